//! Accuracy and confusion-matrix bookkeeping.
//!
//! Accuracy is always computed as an integer match count divided by the row
//! count, so two runs that agree on every prediction report the same value
//! bit for bit.

use crate::dataset::NUM_CLASSES;
use crate::error::{Error, Result};

fn check_labels(name: &str, labels: &[u8]) -> Result<()> {
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
        return Err(Error::Config(format!("{name} label {l} out of range")));
    }
    Ok(())
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions but {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Config("accuracy of zero rows".into()));
    }
    check_labels("predicted", predicted)?;
    check_labels("true", truth)?;
    let matches = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(matches as f64 / predicted.len() as f64)
}

/// Counts of (true class, predicted class) pairs. Rows index the true class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    /// Overall accuracy recovered from the counts: trace over total.
    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    /// Per-class recall; `None` for classes with no true samples.
    pub fn per_class_accuracy(&self) -> [Option<f64>; NUM_CLASSES] {
        let mut out = [None; NUM_CLASSES];
        for (c, row) in self.counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total > 0 {
                out[c] = Some(self.counts[c][c] as f64 / total as f64);
            }
        }
        out
    }

    /// Fixed-width text table, rows = true class, columns = predicted class.
    pub fn render(&self, class_names: &[String]) -> String {
        let name_w = class_names.iter().map(String::len).max().unwrap_or(0).max(4);
        let cell_w = self
            .counts
            .iter()
            .flatten()
            .map(|c| c.to_string().len())
            .max()
            .unwrap_or(1)
            .max(5);
        let mut out = String::new();
        out.push_str(&format!("{:name_w$} ", "true"));
        for c in 0..NUM_CLASSES {
            out.push_str(&format!(" {:>cell_w$}", format!("p{c}")));
        }
        out.push('\n');
        for (c, row) in self.counts.iter().enumerate() {
            let name = class_names.get(c).map(String::as_str).unwrap_or("?");
            out.push_str(&format!("{name:name_w$} "));
            for v in row {
                out.push_str(&format!(" {v:>cell_w$}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Tally the confusion matrix of a prediction run.
pub fn confusion(predicted: &[u8], truth: &[u8]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions but {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Config("confusion matrix of zero rows".into()));
    }
    check_labels("predicted", predicted)?;
    check_labels("true", truth)?;
    let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    for (&p, &t) in predicted.iter().zip(truth) {
        counts[t as usize][p as usize] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::default_class_names;

    #[test]
    fn accuracy_counts_exact_matches() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 4]).unwrap(), 2.0 / 3.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_rejects_bad_inputs() {
        assert!(matches!(accuracy(&[1], &[1, 2]), Err(Error::Shape(_))));
        assert!(matches!(accuracy(&[], &[]), Err(Error::Config(_))));
        assert!(matches!(accuracy(&[10], &[1]), Err(Error::Config(_))));
        assert!(matches!(accuracy(&[1], &[10]), Err(Error::Config(_))));
    }

    #[test]
    fn confusion_indexes_true_class_by_row() {
        let m = confusion(&[1, 1, 2, 0], &[0, 1, 2, 0]).unwrap();
        assert_eq!(m.counts[0][1], 1); // true 0 predicted 1
        assert_eq!(m.counts[0][0], 1);
        assert_eq!(m.counts[1][1], 1);
        assert_eq!(m.counts[2][2], 1);
        assert_eq!(m.total(), 4);
        assert_eq!(m.trace(), 3);
    }

    #[test]
    fn confusion_accuracy_matches_direct_accuracy() {
        let predicted = [3u8, 1, 4, 1, 5, 9, 2, 6, 5, 3];
        let truth = [3u8, 1, 4, 4, 5, 9, 0, 6, 5, 5];
        let direct = accuracy(&predicted, &truth).unwrap();
        let via_matrix = confusion(&predicted, &truth).unwrap().accuracy();
        assert_eq!(direct, via_matrix);
    }

    #[test]
    fn per_class_accuracy_flags_absent_classes() {
        let m = confusion(&[0, 1, 1], &[0, 0, 1]).unwrap();
        let per = m.per_class_accuracy();
        assert_eq!(per[0], Some(0.5));
        assert_eq!(per[1], Some(1.0));
        for p in &per[2..] {
            assert_eq!(*p, None);
        }
    }

    #[test]
    fn render_lists_every_class_row() {
        let m = confusion(&[0, 1], &[0, 1]).unwrap();
        let text = m.render(&default_class_names());
        assert_eq!(text.lines().count(), NUM_CLASSES + 1);
        assert!(text.contains("airplane"));
        assert!(text.contains("truck"));
    }
}
