//! Deterministic plain-text report documents.
//!
//! Every report opens with a SHA-256 digest of the resolved configuration
//! and then embeds that configuration verbatim, so a report is auditable on
//! its own. Nothing time- or host-dependent is ever written: identical runs
//! produce identical bytes.

use sha2::{Digest, Sha256};

use crate::evaluation::ConfusionMatrix;

/// Lowercase hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Accuracy rendered as a percentage with two decimals, e.g. `41.78%`.
pub fn percent(accuracy: f64) -> String {
    format!("{:.2}%", accuracy * 100.0)
}

/// Assemble a report: title, config digest, the resolved config itself,
/// then the body.
pub fn document(title: &str, resolved_config_toml: &str, body: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {title}\n\n"));
    out.push_str(&format!("config-digest: sha256:{}\n\n", sha256_hex(resolved_config_toml.as_bytes())));
    out.push_str("## resolved configuration\n\n");
    out.push_str(resolved_config_toml.trim_end());
    out.push_str("\n\n## results\n\n");
    out.push_str(body.trim_end());
    out.push('\n');
    out
}

/// Accuracy line plus confusion matrix and per-class accuracies for one
/// classifier run.
pub fn metrics_section(
    label: &str,
    accuracy: f64,
    confusion: &ConfusionMatrix,
    class_names: &[String],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("{label}: accuracy {}\n\n", percent(accuracy)));
    out.push_str(&confusion.render(class_names));
    out.push_str("\nper-class accuracy:\n");
    for (c, acc) in confusion.per_class_accuracy().iter().enumerate() {
        let value = match acc {
            Some(a) => percent(*a),
            None => "undefined (no samples)".to_string(),
        };
        out.push_str(&format!("  {:<12} {value}\n", class_names[c]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::confusion;

    #[test]
    fn sha256_matches_known_vectors() {
        // Standard test vectors for the empty string and "abc".
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn percent_renders_two_decimals() {
        assert_eq!(percent(0.4178), "41.78%");
        assert_eq!(percent(1.0), "100.00%");
        assert_eq!(percent(0.0), "0.00%");
        assert_eq!(percent(0.12345), "12.35%");
    }

    #[test]
    fn document_embeds_digest_and_config() {
        let config = "seed = 1\n";
        let doc = document("run", config, "accuracy 50.00%");
        assert!(doc.starts_with("# run\n"));
        assert!(doc.contains(&format!("sha256:{}", sha256_hex(config.as_bytes()))));
        assert!(doc.contains("seed = 1"));
        assert!(doc.contains("accuracy 50.00%"));
        // Deterministic.
        assert_eq!(doc, document("run", config, "accuracy 50.00%"));
    }

    #[test]
    fn metrics_section_lists_every_class() {
        let pred = vec![0u8, 1, 1, 3];
        let truth = vec![0u8, 1, 2, 3];
        let cm = confusion(&pred, &truth).unwrap();
        let names: Vec<String> = (0..10).map(|i| format!("class{i}")).collect();
        let section = metrics_section("knn", 0.75, &cm, &names);
        assert!(section.contains("knn: accuracy 75.00%"));
        for name in &names {
            assert!(section.contains(name.as_str()));
        }
        assert!(section.contains("undefined"));
    }
}
