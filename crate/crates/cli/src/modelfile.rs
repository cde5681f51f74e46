//! Versioned text format for trained models.
//!
//! ```text
//! auditml-model
//! format_version=1
//! kind=rf
//! checksum=sha256:<hex of the payload line>
//!
//! {"model":...,"preprocessor":...,"label":...,"seed":42,"config_hash":"..."}
//! ```

use std::path::Path;

use auditml_core::fingerprint::sha256_hex;
use auditml_core::preprocess::Preprocessor;
use auditml_core::{LabelSpec, TrainedModel};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "auditml-model";

/// A trained model together with everything needed to score raw records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub model: TrainedModel,
    pub preprocessor: Preprocessor,
    pub label: LabelSpec,
    pub seed: u64,
    pub config_hash: String,
}

impl ModelFile {
    pub fn to_text(&self) -> String {
        let payload = serde_json::to_string(self).expect("model serializes");
        format!(
            "{MAGIC}\nformat_version={FORMAT_VERSION}\nkind={}\nchecksum=sha256:{}\n\n{payload}\n",
            self.model.spec.kind.tag(),
            sha256_hex(payload.as_bytes())
        )
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let corrupt = |m: &str| CliError::Corrupt(m.to_string());
        let mut lines = text.split('\n');
        if lines.next() != Some(MAGIC) {
            return Err(corrupt("not an auditml model file"));
        }
        let mut header = |key: &str| -> Result<String, CliError> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(key))
                .and_then(|l| l.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| corrupt(&format!("missing {key} header")))
        };
        let version = header("format_version")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(CliError::Version {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let kind = header("kind")?;
        let checksum = header("checksum")?;
        let payload = match (lines.next(), lines.next(), lines.next(), lines.next()) {
            (Some(""), Some(p), Some(""), None) => p,
            _ => return Err(corrupt("truncated or malformed payload")),
        };
        if checksum.strip_prefix("sha256:") != Some(sha256_hex(payload.as_bytes()).as_str()) {
            return Err(corrupt("payload checksum mismatch"));
        }
        let file: ModelFile =
            serde_json::from_str(payload).map_err(|e| corrupt(&format!("payload does not parse: {e}")))?;
        if file.model.spec.kind.tag() != kind {
            return Err(corrupt("kind header disagrees with payload"));
        }
        Ok(file)
    }
}

/// Writes the model; identical models give identical bytes.
pub fn save_model(file: &ModelFile, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, file.to_text()).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    ModelFile::from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use auditml_core::label::derive_labels;
    use auditml_core::preprocess::PrepPlan;
    use auditml_core::synthgen::{generate, SynthConfig};
    use auditml_core::ModelSpec;

    fn small_model() -> ModelFile {
        let cfg = SynthConfig {
            n_records: 120,
            ..Default::default()
        };
        let recs = generate(&cfg, 3).unwrap();
        let label = LabelSpec::default();
        let y = derive_labels(&recs, &label).unwrap();
        let pre = Preprocessor::fit(&recs, &PrepPlan::default()).unwrap();
        let data = pre.transform(&recs, &y).unwrap().dataset;
        let spec = ModelSpec::constant(1);
        ModelFile {
            model: TrainedModel::fit(&spec, &data, 3).unwrap(),
            preprocessor: pre,
            label,
            seed: 3,
            config_hash: "abc".into(),
        }
    }

    #[test]
    fn text_round_trip_is_stable() {
        let m = small_model();
        let text = m.to_text();
        let back = ModelFile::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let text = small_model().to_text();
        let cut = &text[..text.len() / 2];
        assert!(matches!(ModelFile::from_text(cut), Err(CliError::Corrupt(_))));
    }

    #[test]
    fn flipped_payload_byte_is_corrupt() {
        let text = small_model().to_text().replace("\"seed\":3", "\"seed\":4");
        assert!(matches!(ModelFile::from_text(&text), Err(CliError::Corrupt(_))));
    }

    #[test]
    fn future_version_names_both_versions() {
        let text = small_model().to_text().replace("format_version=1", "format_version=2");
        let err = ModelFile::from_text(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains('2') && msg.contains('1'), "{msg}");
    }
}
