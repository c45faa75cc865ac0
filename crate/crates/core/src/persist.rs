//! Little-endian binary encoding helpers shared by the model formats.
//!
//! Every persisted model starts with a 4-byte ASCII tag, followed by
//! fixed-width little-endian integers and `f64` payloads. The helpers here
//! keep the read side symmetric with the write side so round-trips are
//! bit-exact.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

pub fn write_tag<W: Write>(w: &mut W, tag: &[u8; 4]) -> std::io::Result<()> {
    w.write_all(tag)
}

pub fn read_tag<R: Read>(r: &mut R, expected: &[u8; 4]) -> Result<()> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|e| Error::Format(format!("missing header tag: {e}")))?;
    if &buf != expected {
        return Err(Error::Format(format!(
            "bad header tag {:?}, expected {:?}",
            String::from_utf8_lossy(&buf),
            String::from_utf8_lossy(expected)
        )));
    }
    Ok(())
}

pub fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|e| Error::Format(format!("truncated integer: {e}")))?;
    Ok(u64::from_le_bytes(buf))
}

pub fn write_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|e| Error::Format(format!("truncated float: {e}")))?;
    Ok(f64::from_le_bytes(buf))
}

pub fn write_f64_slice<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for &v in values {
        write_f64(w, v)?;
    }
    Ok(())
}

pub fn read_f64_vec<R: Read>(r: &mut R, len: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(read_f64(r)?);
    }
    Ok(out)
}

pub fn read_array1<R: Read>(r: &mut R, len: usize) -> Result<Array1<f64>> {
    Ok(Array1::from_vec(read_f64_vec(r, len)?))
}

/// Read a row-major `rows x cols` matrix.
pub fn read_array2<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let data = read_f64_vec(r, rows * cols)?;
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::Shape(format!("persisted matrix: {e}")))
}

/// Write a matrix in row-major order regardless of its in-memory layout.
pub fn write_array2<W: Write>(w: &mut W, m: &Array2<f64>) -> std::io::Result<()> {
    for row in m.rows() {
        for &v in row {
            write_f64(w, v)?;
        }
    }
    Ok(())
}

/// Expect end-of-stream; trailing bytes mean the file does not match the
/// format version we parsed it as.
pub fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut buf = [0u8; 1];
    match r.read(&mut buf) {
        Ok(0) => Ok(()),
        Ok(_) => Err(Error::Format("trailing bytes after payload".into())),
        Err(e) => Err(Error::Format(format!("read after payload: {e}"))),
    }
}
