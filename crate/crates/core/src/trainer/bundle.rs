use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AbductiveModel, IterationLog, RelationalFeature, TrainerConfig, TrainerError};
use crate::equation::OpRuleSet;
use crate::neural::Network;
use crate::perception::PerceptionModel;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

const PERCEPTION_FILE: &str = "perception.ablnet";
const DECISION_FILE: &str = "decision.ablnet";
const FEATURES_FILE: &str = "features.txt";
const MANIFEST_FILE: &str = "manifest.json";

const LOG_HEADER: &str = "iteration,stage,consistency,subsample_size,perception_accuracy,wall_time_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format_version: u32,
    pub config: TrainerConfig,
    pub feature_count: usize,
    /// SHA-256 of each payload file, keyed by file name.
    pub checksums: Vec<(String, String)>,
}

/// Features as `my_op` clauses, each block headed by a `%` comment line.
pub fn features_to_text(features: &[RelationalFeature]) -> String {
    let mut out = String::new();
    for f in features {
        writeln!(
            out,
            "% feature iteration={} consistency={}",
            f.created_at_iteration, f.source_consistency
        )
        .unwrap();
        out.push_str(&f.rules.to_canonical());
        out.push('\n');
    }
    out
}

pub fn features_from_text(text: &str) -> Result<Vec<RelationalFeature>, TrainerError> {
    let bad = |m: String| TrainerError::Format(m);
    let mut features = Vec::new();
    let mut current: Option<(usize, usize, String)> = None;
    let finish = |cur: Option<(usize, usize, String)>, out: &mut Vec<RelationalFeature>| -> Result<(), TrainerError> {
        if let Some((t, c, body)) = cur {
            let rules: OpRuleSet = body.parse().map_err(|e| bad(format!("feature rules: {e}")))?;
            out.push(RelationalFeature {
                rules,
                created_at_iteration: t,
                source_consistency: c,
            });
        }
        Ok(())
    };
    for line in text.lines() {
        if let Some(header) = line.trim().strip_prefix("% feature") {
            finish(current.take(), &mut features)?;
            let mut t = None;
            let mut c = None;
            for field in header.split_whitespace() {
                match field.split_once('=') {
                    Some(("iteration", v)) => t = v.parse().ok(),
                    Some(("consistency", v)) => c = v.parse().ok(),
                    _ => return Err(bad(format!("unknown feature field {field:?}"))),
                }
            }
            match (t, c) {
                (Some(t), Some(c)) => current = Some((t, c, String::new())),
                _ => return Err(bad(format!("incomplete feature header {line:?}"))),
            }
        } else if let Some((_, _, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
        } else if !line.trim().is_empty() {
            return Err(bad("rules before the first feature header".into()));
        }
    }
    finish(current, &mut features)?;
    Ok(features)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the model into `dir`, creating it if needed.
pub fn save_model(model: &AbductiveModel, config: &TrainerConfig, dir: &Path) -> Result<(), TrainerError> {
    fs::create_dir_all(dir)?;
    let payloads = [
        (PERCEPTION_FILE, model.perception().network().to_bytes()),
        (DECISION_FILE, model.decision().to_bytes()),
        (FEATURES_FILE, features_to_text(model.features()).into_bytes()),
    ];
    let mut checksums = Vec::new();
    for (name, bytes) in &payloads {
        fs::write(dir.join(name), bytes)?;
        checksums.push((name.to_string(), sha256_hex(bytes)));
    }
    let manifest = BundleManifest {
        format_version: BUNDLE_FORMAT_VERSION,
        config: config.clone(),
        feature_count: model.features().len(),
        checksums,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| TrainerError::Format(e.to_string()))?;
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(())
}

pub fn load_model(dir: &Path) -> Result<(AbductiveModel, BundleManifest), TrainerError> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: BundleManifest =
        serde_json::from_str(&text).map_err(|e| TrainerError::Format(format!("manifest: {e}")))?;
    if manifest.format_version != BUNDLE_FORMAT_VERSION {
        return Err(TrainerError::Format(format!(
            "format version {} (expected {BUNDLE_FORMAT_VERSION})",
            manifest.format_version
        )));
    }
    let read = |name: &str| -> Result<Vec<u8>, TrainerError> {
        let bytes = fs::read(dir.join(name))?;
        let expected = manifest
            .checksums
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| TrainerError::Format(format!("no checksum for {name}")))?;
        if sha256_hex(&bytes) != expected.1 {
            return Err(TrainerError::Format(format!("checksum mismatch for {name}")));
        }
        Ok(bytes)
    };
    let perception = PerceptionModel::from_network(Network::from_bytes(&read(PERCEPTION_FILE)?)?)?;
    let decision = Network::from_bytes(&read(DECISION_FILE)?)?;
    let features_text =
        String::from_utf8(read(FEATURES_FILE)?).map_err(|_| TrainerError::Format("features are not UTF-8".into()))?;
    let features = features_from_text(&features_text)?;
    if features.len() != manifest.feature_count {
        return Err(TrainerError::Format("feature count differs from manifest".into()));
    }
    Ok((AbductiveModel::new(perception, features, decision)?, manifest))
}

pub fn write_log_csv<W: Write>(log: &[IterationLog], mut out: W) -> io::Result<()> {
    writeln!(out, "{LOG_HEADER}")?;
    for e in log {
        let acc = e.perception_accuracy.map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{acc},{}",
            e.iteration, e.stage, e.consistency, e.subsample_size, e.wall_time_ms
        )?;
    }
    Ok(())
}

pub fn read_log_csv<R: BufRead>(input: R) -> Result<Vec<IterationLog>, TrainerError> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != LOG_HEADER {
        return Err(TrainerError::Format(format!("unexpected log header {header:?}")));
    }
    let mut log = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || TrainerError::Format(format!("log row {}", n + 2));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad());
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        log.push(IterationLog {
            iteration: int(fields[0])?,
            stage: int(fields[1])?,
            consistency: int(fields[2])?,
            subsample_size: int(fields[3])?,
            perception_accuracy: match fields[4] {
                "" => None,
                s => Some(s.parse().map_err(|_| bad())?),
            },
            wall_time_ms: fields[5].parse().map_err(|_| bad())?,
        });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_text_round_trip() {
        let fs = vec![
            RelationalFeature {
                rules: OpRuleSet::addition(),
                created_at_iteration: 3,
                source_consistency: 7,
            },
            RelationalFeature {
                rules: OpRuleSet::new(),
                created_at_iteration: 4,
                source_consistency: 1,
            },
        ];
        let text = features_to_text(&fs);
        assert!(text.contains("my_op(1,1,[1,0])"));
        assert_eq!(features_from_text(&text).unwrap(), fs);
    }

    #[test]
    fn log_round_trip() {
        let log = vec![
            IterationLog {
                iteration: 0,
                stage: 5,
                consistency: 3,
                subsample_size: 7,
                perception_accuracy: Some(0.123456789),
                wall_time_ms: 12,
            },
            IterationLog {
                iteration: 1,
                stage: 5,
                consistency: 0,
                subsample_size: 5,
                perception_accuracy: None,
                wall_time_ms: 9,
            },
        ];
        let mut buf = Vec::new();
        write_log_csv(&log, &mut buf).unwrap();
        assert_eq!(read_log_csv(buf.as_slice()).unwrap(), log);
    }
}
