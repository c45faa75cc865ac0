//! Helpers shared by the integration test targets: a small synthetic
//! dataset in the CIFAR-10 binary layout, and the construction recipe for
//! the committed ensemble fixture set.

#![allow(dead_code)] // each test target uses a subset

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use cifar_ensemble::dataset::{self, Dataset, IMAGE_DIM, NUM_CLASSES, TRAIN_BATCH_FILES};
use cifar_ensemble::experts::ProbMatrix;

/// Deterministic synthetic dataset in the CIFAR-10 binary layout: class
/// structure is a per-class pixel ramp plus noise, so classifiers beat
/// chance comfortably. Writes 5 train batches of `per_batch` rows and one
/// test batch of `test_rows` rows into `dir`.
pub fn write_mini_dataset(dir: &Path, per_batch: usize, test_rows: usize, seed: u64) {
    fs::create_dir_all(dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut make = |rows: usize| -> Dataset {
        let mut features = Array2::<f64>::zeros((rows, IMAGE_DIM));
        let mut labels = Vec::with_capacity(rows);
        for (i, mut row) in features.rows_mut().into_iter().enumerate() {
            let class = (i % NUM_CLASSES) as u8;
            labels.push(class);
            for (j, v) in row.iter_mut().enumerate() {
                let center = 20.0 + class as f64 * 20.0 + ((j % 7) as f64) * 2.0;
                let noise: f64 = rng.gen_range(-10.0..10.0);
                *v = (center + noise).round().clamp(0.0, 255.0);
            }
        }
        Dataset::new(features, labels, dataset::default_class_names()).unwrap()
    };
    for name in TRAIN_BATCH_FILES {
        let batch = make(per_batch);
        dataset::write_cifar_batch(&batch, dir.join(name)).unwrap();
    }
    let test = make(test_rows);
    dataset::write_cifar_batch(&test, dir.join(dataset::TEST_BATCH_FILE)).unwrap();
}

/// Directory holding the committed ensemble fixture set.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/experts")
}

pub const FIXTURE_ROWS: usize = 1000;
pub const FIXTURE_CNNS: [&str; 4] = ["cnn1", "cnn2", "cnn3", "cnn4"];

/// What each expert does on a given fixture row.
#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    /// All strong experts right.
    Easy,
    /// Exactly one strong expert (by index) is wrong.
    Private(usize),
    /// Experts 0 and 1 are wrong, with different foil classes.
    PairHard,
    /// Experts 0, 1, 2 are wrong, with three different foil classes.
    TripleHard,
    /// All four strong experts back the same wrong class.
    Shared,
}

/// Construction recipe for the committed fixture set.
///
/// Four strong (~93%) experts share 50 confident errors drawn from classes
/// 3, 5, and 7, where all four back the same foil class — the left-to-right
/// weight search can never fix those from the strong experts alone. Each
/// expert also fixes some errors the fusion of its predecessors still makes
/// (`Private`, `PairHard`, `TripleHard` rows), so every search stage has a
/// strict incentive to give the incoming expert real weight and the running
/// fusion keeps a magnitude comparable to the weight grid. A weak (~42%)
/// expert is confidently right on 36 of the 50 shared rows and only
/// diffidently wrong elsewhere: granting it a small weight repairs shared
/// rows without breaking anything, which is exactly the effect the fixture
/// pins. Returns (labels, strong experts, weak expert).
pub fn build_fixture_experts() -> (Vec<u8>, Vec<ProbMatrix>, ProbMatrix) {
    let n = FIXTURE_ROWS;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let labels: Vec<u8> = (0..n).map(|i| (i % NUM_CLASSES) as u8).collect();
    let mut kinds = vec![RowKind::Easy; n];

    // 50 shared-error rows from classes 3, 5, 7.
    let mut shared: Vec<usize> = Vec::new();
    for (class, count) in [(3u8, 17usize), (5, 17), (7, 16)] {
        let mut rows: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        rows.shuffle(&mut rng);
        shared.extend(rows.into_iter().take(count));
    }
    shared.sort_unstable();
    for &i in &shared {
        kinds[i] = RowKind::Shared;
    }

    // Assign the structured error rows from the remaining pool.
    let mut pool: Vec<usize> =
        (0..n).filter(|&i| kinds[i] == RowKind::Easy).collect();
    pool.shuffle(&mut rng);
    let mut take = |count: usize, kinds: &mut Vec<RowKind>, kind: RowKind| {
        for _ in 0..count {
            kinds[pool.pop().unwrap()] = kind;
        }
    };
    for expert in 0..4 {
        take(12, &mut kinds, RowKind::Private(expert));
    }
    take(8, &mut kinds, RowKind::PairHard);
    take(8, &mut kinds, RowKind::TripleHard);

    // Per-row foil classes. Shared rows use one foil from {3,5,7} for every
    // expert; multi-expert rows use pairwise-distinct foils.
    let mut foils: Vec<[usize; 4]> = Vec::with_capacity(n);
    for i in 0..n {
        let t = labels[i] as usize;
        foils.push(match kinds[i] {
            RowKind::Shared => {
                let options: Vec<usize> =
                    [3usize, 5, 7].into_iter().filter(|&c| c != t).collect();
                let w = options[rng.gen_range(0..options.len())];
                [w; 4]
            }
            RowKind::PairHard => {
                let a = pick_foil(&mut rng, t, &[]);
                let b = pick_foil(&mut rng, t, &[a]);
                [a, b, 0, 0]
            }
            RowKind::TripleHard => {
                let a = pick_foil(&mut rng, t, &[]);
                let b = pick_foil(&mut rng, t, &[a]);
                let c = pick_foil(&mut rng, t, &[a, b]);
                [a, b, c, 0]
            }
            RowKind::Private(e) => {
                let mut f = [0usize; 4];
                f[e] = pick_foil(&mut rng, t, &[]);
                f
            }
            RowKind::Easy => [0; 4],
        });
    }

    // The weak expert: right on 36 of the 50 shared rows, plus enough other
    // rows for ~42% overall accuracy. `pool` now holds only Easy rows.
    let mut shared_shuffled = shared.clone();
    shared_shuffled.shuffle(&mut rng);
    let mut weak_right = vec![false; n];
    for &i in shared_shuffled.iter().take(36) {
        weak_right[i] = true;
    }
    for &i in pool.iter().take(384) {
        weak_right[i] = true;
    }

    let spread = |row: &mut [f64], top: usize, top_mass: f64, second: Option<(usize, f64)>| {
        let mut used = top_mass;
        row[top] = top_mass;
        if let Some((idx, mass)) = second {
            row[idx] = mass;
            used += mass;
        }
        let slots = if second.is_some() { 2.0 } else { 1.0 };
        let rest = (1.0 - used) / (NUM_CLASSES as f64 - slots);
        for v in row.iter_mut() {
            if *v == 0.0 {
                *v = rest;
            }
        }
    };

    let mut cnns = Vec::new();
    for (e, name) in FIXTURE_CNNS.iter().enumerate() {
        let mut scores = Array2::<f64>::zeros((n, NUM_CLASSES));
        for (i, mut row) in scores.rows_mut().into_iter().enumerate() {
            let t = labels[i] as usize;
            let row = row.as_slice_mut().unwrap();
            let wrong_here = match kinds[i] {
                RowKind::Shared => true,
                RowKind::Private(p) => p == e,
                RowKind::PairHard => e < 2,
                RowKind::TripleHard => e < 3,
                RowKind::Easy => false,
            };
            if wrong_here {
                if kinds[i] == RowKind::Shared {
                    let top = 0.55 + 0.10 * rng.gen::<f64>();
                    spread(row, foils[i][e], top, Some((t, 0.20 + 0.05 * rng.gen::<f64>())));
                } else {
                    spread(row, foils[i][e], 0.60, Some((t, 0.15)));
                }
            } else {
                spread(row, t, 0.80 + 0.10 * rng.gen::<f64>(), None);
            }
        }
        cnns.push(ProbMatrix::new(scores, *name, true).unwrap());
    }

    let mut weak = Array2::<f64>::zeros((n, NUM_CLASSES));
    for (i, mut row) in weak.rows_mut().into_iter().enumerate() {
        let t = labels[i] as usize;
        let row = row.as_slice_mut().unwrap();
        if weak_right[i] {
            let confidence = if kinds[i] == RowKind::Shared {
                // Confident exactly where the strong experts all fail.
                0.82 + 0.05 * rng.gen::<f64>()
            } else {
                0.45 + 0.10 * rng.gen::<f64>()
            };
            spread(row, t, confidence, None);
        } else {
            let w = pick_foil(&mut rng, t, &[]);
            // Diffident, so a small fusion weight cannot flip rows the
            // strong experts agree on.
            spread(row, w, 0.40 + 0.10 * rng.gen::<f64>(), Some((t, 0.10)));
        }
    }
    let weak = ProbMatrix::new(weak, "knn", true).unwrap();
    (labels, cnns, weak)
}

/// A wrong class for a row: not the truth, not in `exclude`.
fn pick_foil(rng: &mut ChaCha8Rng, t: usize, exclude: &[usize]) -> usize {
    loop {
        let w = rng.gen_range(0..NUM_CLASSES);
        if w != t && !exclude.contains(&w) {
            return w;
        }
    }
}

/// Load the committed fixture set from disk.
pub fn load_fixture_experts() -> (Vec<u8>, Vec<ProbMatrix>, ProbMatrix) {
    let dir = fixture_dir();
    let labels: Vec<u8> = fs::read_to_string(dir.join("labels.txt"))
        .expect("committed fixture labels")
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let cnns: Vec<ProbMatrix> = FIXTURE_CNNS
        .iter()
        .map(|name| {
            cifar_ensemble::experts::load_expert(
                dir.join(format!("{name}.expert")),
                Some(labels.len()),
            )
            .expect("committed fixture expert")
        })
        .collect();
    let weak = cifar_ensemble::experts::load_expert(dir.join("knn.expert"), Some(labels.len()))
        .expect("committed fixture expert");
    (labels, cnns, weak)
}
