//! Weighted soft-voting fusion of expert score matrices, with exhaustive
//! weight search.
//!
//! Fusing means summing expert score matrices under per-expert weights and
//! taking row-wise argmax. Weights come from a uniform grid `0, S, 2S, ...`
//! capped at a maximum: every pair of experts is scored against every grid
//! pair except (0, 0), and the pair with the most correct predictions wins.
//! More than two experts are fused left to right, re-searching the grid at
//! each step with the running fusion as one side — the flat per-expert
//! weights are then products of the stage weights, so they generally leave
//! the grid. All accuracy comparisons use integer match counts and ties
//! prefer the earliest grid pair in scan order, which makes the search
//! deterministic no matter how it is parallelized.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::dataset::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::evaluation;
use crate::experts::{argmax_row, ProbMatrix};

/// The candidate weights `0, step, 2*step, ...` up to and including `max`
/// (when `max` is a multiple of `step`).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGrid {
    pub step: f64,
    pub max: f64,
    values: Vec<f64>,
}

impl Default for WeightGrid {
    /// 21 candidates: 0.00, 0.05, ..., 1.00.
    fn default() -> Self {
        WeightGrid::new(0.05, 1.0).expect("default grid is valid")
    }
}

impl WeightGrid {
    pub fn new(step: f64, max: f64) -> Result<WeightGrid> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Config(format!("grid step {step} must be positive")));
        }
        if !(max.is_finite() && max >= step) {
            return Err(Error::Config(format!("grid max {max} must be at least the step {step}")));
        }
        // Tolerate max/step landing a hair under an integer.
        let count = (max / step + 1e-9).floor() as usize;
        let values = (0..=count).map(|i| i as f64 * step).collect();
        Ok(WeightGrid { step, max, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The outcome of a weight search.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleWeights {
    /// One name per fused expert, in fusion order.
    pub expert_names: Vec<String>,
    /// One weight per fused expert. Grid members for a pairwise search;
    /// products of grid members for a chained search.
    pub weights: Vec<f64>,
    /// The grid the search ran on.
    pub grid: WeightGrid,
    /// Fraction of searched rows predicted correctly by the winning weights.
    pub achieved_accuracy: f64,
    /// Human-readable description of the rows the search saw. Searches set
    /// this to "all-rows"; commands overwrite it with the split they used.
    pub search_split: String,
}

/// Weighted sum of expert score matrices. Weights must be non-negative,
/// finite, and not all zero. The result is not row-stochastic.
pub fn fuse(experts: &[&ProbMatrix], weights: &[f64]) -> Result<ProbMatrix> {
    let first = *experts.first().ok_or_else(|| Error::Config("fuse of zero experts".into()))?;
    if weights.len() != experts.len() {
        return Err(Error::Shape(format!(
            "{} experts but {} weights",
            experts.len(),
            weights.len()
        )));
    }
    if let Some(e) = experts.iter().find(|e| e.len() != first.len()) {
        return Err(Error::Shape(format!(
            "expert {:?} has {} rows, expected {}",
            e.name,
            e.len(),
            first.len()
        )));
    }
    if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::Config(format!("weight {w} is not a finite non-negative number")));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::Config("all fusion weights are zero".into()));
    }
    let mut scores = Array2::<f64>::zeros((first.len(), NUM_CLASSES));
    for (expert, &w) in experts.iter().zip(weights) {
        if w != 0.0 {
            scores.scaled_add(w, &expert.scores);
        }
    }
    ProbMatrix::new(scores, "fusion", false)
}

/// Row-wise argmax; the lowest class index wins ties.
pub fn argmax_labels(pm: &ProbMatrix) -> Vec<u8> {
    pm.scores.rows().into_iter().map(argmax_row).collect()
}

/// Accuracy of fusing `experts` under `weights` against `truth`.
pub fn fused_accuracy(experts: &[&ProbMatrix], weights: &[f64], truth: &[u8]) -> Result<f64> {
    let fused = fuse(experts, weights)?;
    evaluation::accuracy(&argmax_labels(&fused), truth)
}

/// Count of rows where the weighted pair predicts the true label.
fn count_matches(a: &ProbMatrix, b: &ProbMatrix, truth: &[u8], wa: f64, wb: f64) -> u64 {
    let mut matches = 0u64;
    for ((ra, rb), &t) in a.scores.rows().into_iter().zip(b.scores.rows()).zip(truth) {
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for c in 0..NUM_CLASSES {
            let v = wa * ra[c] + wb * rb[c];
            if v > best_v {
                best_v = v;
                best = c;
            }
        }
        if best == t as usize {
            matches += 1;
        }
    }
    matches
}

fn check_search_inputs(a: &ProbMatrix, b: &ProbMatrix, truth: &[u8]) -> Result<()> {
    if a.len() != b.len() || a.len() != truth.len() {
        return Err(Error::Shape(format!(
            "experts cover {} and {} rows, truth has {}",
            a.len(),
            b.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Config("weight search over zero rows".into()));
    }
    if let Some(&l) = truth.iter().find(|&&l| l as usize >= NUM_CLASSES) {
        return Err(Error::Config(format!("true label {l} out of range")));
    }
    Ok(())
}

/// Exhaustively score every grid pair except (0, 0) and keep the pair with
/// the most matches. Ties prefer the earliest pair in row-major scan order
/// of (weight of `a`, weight of `b`), i.e. the smallest pair of weights.
pub fn pairwise_search(
    a: &ProbMatrix,
    b: &ProbMatrix,
    truth: &[u8],
    grid: &WeightGrid,
) -> Result<EnsembleWeights> {
    check_search_inputs(a, b, truth)?;
    let values = grid.values();
    let v = values.len();
    let best = (0..v * v)
        .into_par_iter()
        .filter(|&flat| flat != 0) // skip (0, 0)
        .map(|flat| {
            let (i, j) = (flat / v, flat % v);
            let matches = count_matches(a, b, truth, values[i], values[j]);
            (matches, std::cmp::Reverse(i), std::cmp::Reverse(j))
        })
        .max()
        .expect("grid has at least one candidate");
    let (matches, std::cmp::Reverse(i), std::cmp::Reverse(j)) = best;
    Ok(EnsembleWeights {
        expert_names: vec![a.name.clone(), b.name.clone()],
        weights: vec![values[i], values[j]],
        grid: grid.clone(),
        achieved_accuracy: matches as f64 / truth.len() as f64,
        search_split: "all-rows".to_string(),
    })
}

/// Fuse experts left to right: search the pair grid for (experts[0],
/// experts[1]), then for (running fusion, experts[2]), and so on. The
/// returned per-expert weights are the expanded stage products, and the
/// achieved accuracy is the final stage's.
pub fn chained_search(
    experts: &[&ProbMatrix],
    truth: &[u8],
    grid: &WeightGrid,
) -> Result<EnsembleWeights> {
    if experts.len() < 2 {
        return Err(Error::Config(format!(
            "chained search needs at least 2 experts, got {}",
            experts.len()
        )));
    }
    let first = pairwise_search(experts[0], experts[1], truth, grid)?;
    let mut flat = first.weights.clone();
    let mut fused = fuse(&[experts[0], experts[1]], &first.weights)?;
    let mut achieved = first.achieved_accuracy;
    for expert in &experts[2..] {
        let stage = pairwise_search(&fused, expert, truth, grid)?;
        let (u, v) = (stage.weights[0], stage.weights[1]);
        for w in flat.iter_mut() {
            *w *= u;
        }
        flat.push(v);
        fused = fuse(&[&fused, expert], &stage.weights)?;
        achieved = stage.achieved_accuracy;
    }
    Ok(EnsembleWeights {
        expert_names: experts.iter().map(|e| e.name.clone()).collect(),
        weights: flat,
        grid: grid.clone(),
        achieved_accuracy: achieved,
        search_split: "all-rows".to_string(),
    })
}

impl EnsembleWeights {
    /// Text format, one `key,value` pair per line after a version header;
    /// floats are written with 17 significant digits so loading is exact.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::from("ensemble-weights,v1\n");
        text.push_str(&format!("grid_step,{:.16e}\n", self.grid.step));
        text.push_str(&format!("grid_max,{:.16e}\n", self.grid.max));
        text.push_str(&format!("search_split,{}\n", self.search_split));
        text.push_str(&format!("achieved_accuracy,{:.16e}\n", self.achieved_accuracy));
        text.push_str(&format!("experts,{}\n", self.expert_names.len()));
        for (name, w) in self.expert_names.iter().zip(&self.weights) {
            text.push_str(&format!("expert,{name},weight,{w:.16e}\n"));
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        if lines.next() != Some("ensemble-weights,v1") {
            return Err(Error::Format(format!("{}: bad weights header", path.display())));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("{}: missing {key} line", path.display())))?;
            line.strip_prefix(&format!("{key},"))
                .map(str::to_string)
                .ok_or_else(|| Error::Format(format!("{}: expected {key}, got {line:?}", path.display())))
        };
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("{}: bad {what} {s:?}", path.display())))
        };
        let step = parse_f64(&field("grid_step")?, "grid step")?;
        let max = parse_f64(&field("grid_max")?, "grid max")?;
        let search_split = field("search_split")?;
        let achieved_accuracy = parse_f64(&field("achieved_accuracy")?, "accuracy")?;
        let count: usize = field("experts")?
            .parse()
            .map_err(|_| Error::Format(format!("{}: bad expert count", path.display())))?;
        let mut expert_names = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for line in lines.by_ref().take(count) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 || fields[0] != "expert" || fields[2] != "weight" {
                return Err(Error::Format(format!("{}: bad expert line {line:?}", path.display())));
            }
            expert_names.push(fields[1].to_string());
            weights.push(parse_f64(fields[3], "weight")?);
        }
        if expert_names.len() != count {
            return Err(Error::Format(format!(
                "{}: header says {count} experts, found {}",
                path.display(),
                expert_names.len()
            )));
        }
        let grid = WeightGrid::new(step, max)?;
        Ok(EnsembleWeights { expert_names, weights, grid, achieved_accuracy, search_split })
    }
}
