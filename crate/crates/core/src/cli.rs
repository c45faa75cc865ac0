//! Implementations of the command-line subcommands.
//!
//! Each command is a pure function of its [`RunConfig`] and the files it
//! reads: running one twice produces byte-identical reports and artifacts.
//!
//! * [`cmd_table1`] — accuracy sweep of logistic regression and KNN over a
//!   fixed list of PCA component counts, with one report per row and a
//!   summary marking the best row of each classifier.
//! * [`cmd_ensemble`] — chained exhaustive weight search over expert score
//!   files (optionally appending a freshly computed KNN expert), writing the
//!   weights, the split, and a comparative report.
//! * [`cmd_export_knn`] — run the preprocessing/PCA/KNN pipeline and export
//!   the test scores in the expert interchange format.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{s, Array2};

use crate::config::{RunConfig, Stage};
use crate::dataset::{self, Dataset};
use crate::ensemble::{self, EnsembleWeights};
use crate::error::{Error, Result};
use crate::evaluation::{accuracy, confusion};
use crate::experts::{export_expert, load_expert, ProbMatrix};
use crate::linear::logreg_train;
use crate::neighbors::knn_fit;
use crate::pca::pca_fit;
use crate::preprocess::{gcn, zca_fit};
use crate::report;

/// Component counts for the logistic-regression sweep (`None` = raw pixels).
pub const LOGREG_COMPONENT_SWEEP: [Option<usize>; 7] =
    [None, Some(50), Some(100), Some(150), Some(200), Some(225), Some(250)];

/// Component counts for the KNN sweep (`None` = raw pixels).
pub const KNN_COMPONENT_SWEEP: [Option<usize>; 9] = [
    None,
    Some(200),
    Some(75),
    Some(50),
    Some(40),
    Some(30),
    Some(25),
    Some(15),
    Some(10),
];

fn ensure_output_dir(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))
}

fn write_artifact(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Apply the configured preprocessing stages, in order, fitting any
/// data-dependent stage (ZCA) on the training side only.
fn apply_stages(
    config: &RunConfig,
    mut train: Array2<f64>,
    mut test: Array2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    for stage in &config.preprocess.stages {
        match stage {
            Stage::Gcn => {
                let params = config.preprocess.gcn_params();
                train = gcn(&train.view(), &params).map_err(|e| e.in_stage("gcn"))?;
                test = gcn(&test.view(), &params).map_err(|e| e.in_stage("gcn"))?;
            }
            Stage::Zca => {
                let model = zca_fit(&train.view(), config.preprocess.zca_epsilon)
                    .map_err(|e| e.in_stage("zca"))?;
                train = model.apply(&train.view()).map_err(|e| e.in_stage("zca"))?;
                test = model.apply(&test.view()).map_err(|e| e.in_stage("zca"))?;
            }
        }
    }
    Ok((train, test))
}

/// Optionally project both sides onto the configured number of components.
fn apply_pca(
    config: &RunConfig,
    train: Array2<f64>,
    test: Array2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if !config.pca.enabled {
        return Ok((train, test));
    }
    let model =
        pca_fit(&train.view(), config.pca.components).map_err(|e| e.in_stage("pca"))?;
    let z_train = model.transform(&train.view()).map_err(|e| e.in_stage("pca"))?;
    let z_test = model.transform(&test.view()).map_err(|e| e.in_stage("pca"))?;
    Ok((z_train, z_test))
}

/// Run preprocessing + optional PCA + KNN and return test scores named "knn".
fn knn_test_scores(config: &RunConfig, train: Dataset, test: &Dataset) -> Result<ProbMatrix> {
    let labels = train.labels.clone();
    let (train_x, test_x) = apply_stages(config, train.features, test.features.clone())?;
    let (train_x, test_x) = apply_pca(config, train_x, test_x)?;
    let model = knn_fit(train_x, labels, config.knn.k, config.knn.vote.into())
        .map_err(|e| e.in_stage("knn"))?;
    model.predict_scores(&test_x.view()).map_err(|e| e.in_stage("knn"))
}

fn subset(values: &[u8], indices: &[usize]) -> Vec<u8> {
    indices.iter().map(|&i| values[i]).collect()
}

struct SweepRow {
    classifier: &'static str,
    components: Option<usize>,
    accuracy: f64,
}

fn component_label(components: Option<usize>) -> String {
    match components {
        None => "raw".to_string(),
        Some(k) => k.to_string(),
    }
}

/// Accuracy sweep over PCA component counts for logistic regression and KNN.
///
/// PCA is fitted once at the largest swept count; each row then uses the
/// leading columns of that projection, which equals refitting at the smaller
/// count exactly. Writes one metrics report per row plus `summary.txt`.
pub fn cmd_table1(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let resolved = config.resolved_toml()?;
    ensure_output_dir(config)?;
    let (train, test) = dataset::load_cifar_dir(&config.data_dir)?;
    let class_names = test.class_names.clone();
    let train_y = train.labels.clone();
    let test_y = test.labels.clone();
    let (train_x, test_x) = apply_stages(config, train.features, test.features)?;

    let max_components = LOGREG_COMPONENT_SWEEP
        .iter()
        .chain(KNN_COMPONENT_SWEEP.iter())
        .filter_map(|c| *c)
        .max()
        .expect("sweeps contain component counts");
    let limit = train_x.nrows().min(train_x.ncols());
    if max_components > limit {
        return Err(Error::Config(format!(
            "the sweep needs {max_components} principal components but the training data \
             supports at most {limit}"
        )));
    }
    let pca_model =
        pca_fit(&train_x.view(), max_components).map_err(|e| e.in_stage("pca"))?;
    let z_train = pca_model.transform(&train_x.view()).map_err(|e| e.in_stage("pca"))?;
    let z_test = pca_model.transform(&test_x.view()).map_err(|e| e.in_stage("pca"))?;

    let mut rows: Vec<SweepRow> = Vec::new();
    let hyper = config.logreg.hyper(config.seed);
    for components in LOGREG_COMPONENT_SWEEP {
        let (xtr, xte) = match components {
            None => (train_x.clone(), test_x.clone()),
            Some(k) => (
                z_train.slice(s![.., ..k]).to_owned(),
                z_test.slice(s![.., ..k]).to_owned(),
            ),
        };
        let model =
            logreg_train(&xtr.view(), &train_y, &hyper).map_err(|e| e.in_stage("logreg"))?;
        let scores = model.predict_scores(&xte.view()).map_err(|e| e.in_stage("logreg"))?;
        let predicted = ensemble::argmax_labels(&scores);
        let acc = accuracy(&predicted, &test_y)?;
        let cm = confusion(&predicted, &test_y)?;
        let label = component_label(components);
        let body = report::metrics_section(
            &format!("logistic regression, components={label}"),
            acc,
            &cm,
            &class_names,
        );
        let title = format!("logistic regression sweep row: components={label}");
        write_artifact(
            &config.output_dir.join(format!("logreg_{label}.txt")),
            &report::document(&title, &resolved, &body),
        )?;
        rows.push(SweepRow { classifier: "logreg", components, accuracy: acc });
    }

    for components in KNN_COMPONENT_SWEEP {
        let (xtr, xte) = match components {
            None => (train_x.clone(), test_x.clone()),
            Some(k) => (
                z_train.slice(s![.., ..k]).to_owned(),
                z_test.slice(s![.., ..k]).to_owned(),
            ),
        };
        let model = knn_fit(xtr, train_y.clone(), config.knn.k, config.knn.vote.into())
            .map_err(|e| e.in_stage("knn"))?;
        let scores = model.predict_scores(&xte.view()).map_err(|e| e.in_stage("knn"))?;
        let predicted = ensemble::argmax_labels(&scores);
        let acc = accuracy(&predicted, &test_y)?;
        let cm = confusion(&predicted, &test_y)?;
        let label = component_label(components);
        let body = report::metrics_section(
            &format!("knn (k={}), components={label}", config.knn.k),
            acc,
            &cm,
            &class_names,
        );
        let title = format!("knn sweep row: components={label}");
        write_artifact(
            &config.output_dir.join(format!("knn_{label}.txt")),
            &report::document(&title, &resolved, &body),
        )?;
        rows.push(SweepRow { classifier: "knn", components, accuracy: acc });
    }

    let best_of = |name: &str| -> usize {
        let mut best = usize::MAX;
        for (i, row) in rows.iter().enumerate() {
            if row.classifier == name && (best == usize::MAX || row.accuracy > rows[best].accuracy)
            {
                best = i;
            }
        }
        best
    };
    let best_logreg = best_of("logreg");
    let best_knn = best_of("knn");

    let mut body = String::new();
    body.push_str(&format!("{:<12} {:<12} {:>9}\n", "classifier", "components", "accuracy"));
    for (i, row) in rows.iter().enumerate() {
        let marker = if i == best_logreg {
            "  <- best logreg"
        } else if i == best_knn {
            "  <- best knn"
        } else {
            ""
        };
        body.push_str(&format!(
            "{:<12} {:<12} {:>9}{marker}\n",
            row.classifier,
            component_label(row.components),
            report::percent(row.accuracy),
        ));
    }
    body.push_str(&format!(
        "\nbest logreg: components={} accuracy={}\n",
        component_label(rows[best_logreg].components),
        report::percent(rows[best_logreg].accuracy)
    ));
    body.push_str(&format!(
        "best knn: components={} accuracy={}\n",
        component_label(rows[best_knn].components),
        report::percent(rows[best_knn].accuracy)
    ));
    write_artifact(
        &config.output_dir.join("summary.txt"),
        &report::document("component sweep summary", &resolved, &body),
    )
}

/// Search fusion weights over the configured experts and report each expert
/// against the fusion.
///
/// By default the labeled test rows are split once (stratified by class,
/// seeded): weights are searched on the held-out side and every accuracy is
/// also reported on the remaining side. With `search_on_test` the search
/// sees all rows — the protocol is optimistically biased, and the command
/// says so on stderr.
pub fn cmd_ensemble(config: &RunConfig, search_on_test: bool) -> Result<()> {
    config.validate()?;
    let resolved = config.resolved_toml()?;
    ensure_output_dir(config)?;
    if config.ensemble.experts.is_empty() && !config.ensemble.include_knn {
        return Err(Error::Config(
            "no experts configured: list expert score files in [ensemble].experts \
             or set include_knn = true"
            .into(),
        ));
    }

    // The test batch supplies the truth labels; the full training set is
    // only needed when a KNN expert must be computed.
    let (knn_scores, test) = if config.ensemble.include_knn {
        let (train, test) = dataset::load_cifar_dir(&config.data_dir)?;
        (Some(knn_test_scores(config, train, &test)?), test)
    } else {
        let path = config.data_dir.join(dataset::TEST_BATCH_FILE);
        (None, dataset::load_cifar_batch(path)?)
    };
    let truth = test.labels.clone();

    let mut experts: Vec<ProbMatrix> = Vec::new();
    for path in &config.ensemble.experts {
        experts.push(load_expert(path, Some(truth.len())).map_err(|e| e.in_stage("experts"))?);
    }
    if let Some(scores) = knn_scores {
        experts.push(scores);
    }

    let grid = config.ensemble.grid()?;
    let (search_indices, report_indices, split_description) = if search_on_test {
        eprintln!(
            "warning: --search-on-test searches fusion weights on the same rows it reports; \
             the reported accuracy is optimistically biased"
        );
        let all: Vec<usize> = (0..truth.len()).collect();
        (all.clone(), all, "test-set (search-on-test)".to_string())
    } else {
        let split =
            dataset::stratified_split_labels(&truth, config.ensemble.search_split, config.seed)?;
        split.save(config.output_dir.join("search_split.txt"))?;
        println!("wrote {}", config.output_dir.join("search_split.txt").display());
        let description = format!(
            "holdout seed={} fraction={}",
            config.seed, config.ensemble.search_split
        );
        (split.validation_indices.clone(), split.train_indices.clone(), description)
    };
    let truth_search = subset(&truth, &search_indices);
    let truth_report = subset(&truth, &report_indices);

    let mut weights = if experts.len() == 1 {
        // Degenerate fusion: a single expert keeps unit weight.
        let predicted = ensemble::argmax_labels(&experts[0]);
        EnsembleWeights {
            expert_names: vec![experts[0].name.clone()],
            weights: vec![1.0],
            grid: grid.clone(),
            achieved_accuracy: accuracy(&subset(&predicted, &search_indices), &truth_search)?,
            search_split: String::new(),
        }
    } else {
        let search_side: Vec<ProbMatrix> = experts
            .iter()
            .map(|e| e.select(&search_indices))
            .collect::<Result<_>>()?;
        let refs: Vec<&ProbMatrix> = search_side.iter().collect();
        ensemble::chained_search(&refs, &truth_search, &grid)
            .map_err(|e| e.in_stage("ensemble"))?
    };
    weights.search_split = split_description.clone();
    weights.save(config.output_dir.join("ensemble_weights.txt"))?;
    println!("wrote {}", config.output_dir.join("ensemble_weights.txt").display());

    let refs: Vec<&ProbMatrix> = experts.iter().collect();
    let fused = ensemble::fuse(&refs, &weights.weights)?;
    let fused_predicted = ensemble::argmax_labels(&fused);

    let mut body = String::new();
    body.push_str(&format!(
        "search rows: {} | report rows: {} | split: {split_description}\n\n",
        search_indices.len(),
        report_indices.len()
    ));
    body.push_str(&format!(
        "{:<16} {:>10} {:>16} {:>16}\n",
        "expert", "weight", "search-accuracy", "report-accuracy"
    ));
    for (expert, weight) in experts.iter().zip(&weights.weights) {
        let predicted = ensemble::argmax_labels(expert);
        let search_acc = accuracy(&subset(&predicted, &search_indices), &truth_search)?;
        let report_acc = accuracy(&subset(&predicted, &report_indices), &truth_report)?;
        body.push_str(&format!(
            "{:<16} {:>10.4} {:>16} {:>16}\n",
            expert.name,
            weight,
            report::percent(search_acc),
            report::percent(report_acc)
        ));
    }
    let fused_search_acc =
        accuracy(&subset(&fused_predicted, &search_indices), &truth_search)?;
    let fused_report_acc =
        accuracy(&subset(&fused_predicted, &report_indices), &truth_report)?;
    body.push_str(&format!(
        "{:<16} {:>10} {:>16} {:>16}\n\n",
        "fusion",
        "-",
        report::percent(fused_search_acc),
        report::percent(fused_report_acc)
    ));
    let cm = confusion(&subset(&fused_predicted, &report_indices), &truth_report)?;
    body.push_str(&report::metrics_section(
        "fusion on report rows",
        fused_report_acc,
        &cm,
        &test.class_names,
    ));
    write_artifact(
        &config.output_dir.join("ensemble_report.txt"),
        &report::document("ensemble fusion", &resolved, &body),
    )
}

/// Run the preprocessing/PCA/KNN pipeline and write the test scores as an
/// expert score file, plus a metrics report.
pub fn cmd_export_knn(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let resolved = config.resolved_toml()?;
    ensure_output_dir(config)?;
    let (train, test) = dataset::load_cifar_dir(&config.data_dir)?;
    let test_y = test.labels.clone();
    let class_names = test.class_names.clone();
    let scores = knn_test_scores(config, train, &test)?;

    let expert_path = config.output_dir.join("knn.expert");
    export_expert(&scores, &expert_path)?;
    println!("wrote {}", expert_path.display());

    let predicted = ensemble::argmax_labels(&scores);
    let acc = accuracy(&predicted, &test_y)?;
    let cm = confusion(&predicted, &test_y)?;
    let body = report::metrics_section(
        &format!("knn (k={})", config.knn.k),
        acc,
        &cm,
        &class_names,
    );
    write_artifact(
        &config.output_dir.join("knn_report.txt"),
        &report::document("knn export", &resolved, &body),
    )?;
    println!("knn accuracy: {}", report::percent(acc));
    Ok(())
}

/// Resolve the effective configuration from an optional file plus flag
/// overrides.
pub fn resolve_config(
    config_path: Option<&Path>,
    data_dir: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<RunConfig> {
    let mut config = match config_path {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = data_dir {
        config.data_dir = dir;
    }
    if let Some(dir) = output_dir {
        config.output_dir = dir;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_have_the_documented_row_counts() {
        assert_eq!(LOGREG_COMPONENT_SWEEP.len(), 7);
        assert_eq!(KNN_COMPONENT_SWEEP.len(), 9);
        assert_eq!(LOGREG_COMPONENT_SWEEP[0], None);
        assert_eq!(KNN_COMPONENT_SWEEP[0], None);
    }

    #[test]
    fn flag_overrides_replace_config_fields() {
        let config = resolve_config(
            None,
            Some(PathBuf::from("/data")),
            Some(PathBuf::from("/out")),
            Some(9),
        )
        .unwrap();
        assert_eq!(config.data_dir, PathBuf::from("/data"));
        assert_eq!(config.output_dir, PathBuf::from("/out"));
        assert_eq!(config.seed, 9);
        let defaults = resolve_config(None, None, None, None).unwrap();
        assert_eq!(defaults, RunConfig::default());
    }

    #[test]
    fn subset_picks_rows_in_order() {
        assert_eq!(subset(&[9, 8, 7, 6], &[0, 2, 3]), vec![9, 7, 6]);
        assert!(subset(&[1], &[]).is_empty());
    }
}
