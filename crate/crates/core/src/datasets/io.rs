use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Dataset, DatasetError, DatasetSpec, EquationInstance, GroundTruth, Provenance, TruthRecord};
use crate::equation::SymbolSeq;
use crate::perception::{decode_images, encode_images, GlyphImage};

pub const FORMAT_VERSION: u32 = 1;

const INDEX_MAGIC: &[u8] = b"ABLIDX1\n";
const FILES: [&str; 3] = ["images.bin", "labels.bin", "truth.sidecar"];

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    spec: DatasetSpec,
    round: u32,
    instances: usize,
    /// SHA-256 of each data file, hex.
    checksums: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn format(m: impl Into<String>) -> DatasetError {
    DatasetError::Format(m.into())
}

/// Writes `manifest.json`, `images.bin` (one image block for all glyphs
/// followed by an index of `(first image, length)` per instance),
/// `labels.bin` (one byte per instance) and `truth.sidecar` (one
/// `sequence<TAB>provenance` line per instance).
pub fn save(dataset: &Dataset, truth: &GroundTruth, dir: &Path) -> Result<(), DatasetError> {
    if truth.records.len() != dataset.len() {
        return Err(format("ground truth does not match the dataset"));
    }
    fs::create_dir_all(dir)?;
    let all: Vec<GlyphImage> = dataset.instances.iter().flat_map(|i| i.images.iter().cloned()).collect();
    let mut images = encode_images(&all);
    images.extend_from_slice(INDEX_MAGIC);
    images.extend_from_slice(&(dataset.len() as u32).to_le_bytes());
    let mut first = 0u32;
    for inst in &dataset.instances {
        images.extend_from_slice(&first.to_le_bytes());
        images.extend_from_slice(&(inst.len() as u32).to_le_bytes());
        first += inst.len() as u32;
    }
    let labels: Vec<u8> = dataset.instances.iter().map(|i| u8::from(i.label)).collect();
    let sidecar: String = truth
        .records
        .iter()
        .map(|r| format!("{}\t{}\n", r.seq, r.provenance.as_str()))
        .collect();
    let contents: [&[u8]; 3] = [&images, &labels, sidecar.as_bytes()];
    let checksums = FILES
        .iter()
        .zip(contents)
        .map(|(name, bytes)| (name.to_string(), sha256_hex(bytes)))
        .collect();
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        spec: dataset.spec.clone(),
        round: dataset.round,
        instances: dataset.len(),
        checksums,
    };
    for (name, bytes) in FILES.iter().zip(contents) {
        fs::write(dir.join(name), bytes)?;
    }
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| format(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json)?;
    Ok(())
}

fn read_manifest(dir: &Path) -> Result<Manifest, DatasetError> {
    let bytes = fs::read(dir.join("manifest.json"))?;
    let value: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| format(format!("manifest: {e}")))?;
    let found = value.get("format_version").and_then(|v| v.as_u64()).ok_or_else(|| format("manifest has no format_version"))?;
    if found != FORMAT_VERSION as u64 {
        return Err(DatasetError::Version {
            found: found as u32,
            expected: FORMAT_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| format(format!("manifest: {e}")))
}

fn read_checked(dir: &Path, manifest: &Manifest, name: &str) -> Result<Vec<u8>, DatasetError> {
    let bytes = fs::read(dir.join(name))?;
    let expected = manifest
        .checksums
        .get(name)
        .ok_or_else(|| format(format!("manifest has no checksum for {name}")))?;
    if &sha256_hex(&bytes) != expected {
        return Err(format(format!("checksum mismatch for {name}")));
    }
    Ok(bytes)
}

/// Loads images, labels and spec. The truth sidecar is not read.
pub fn load(dir: &Path) -> Result<Dataset, DatasetError> {
    let manifest = read_manifest(dir)?;
    let images_bytes = read_checked(dir, &manifest, "images.bin")?;
    let labels = read_checked(dir, &manifest, "labels.bin")?;
    let (images, used) = decode_images(&images_bytes).map_err(|e| format(e.to_string()))?;
    let index = images_bytes[used..]
        .strip_prefix(INDEX_MAGIC)
        .ok_or_else(|| format("missing instance index"))?;
    let word = |i: usize| -> Result<usize, DatasetError> {
        index
            .get(i * 4..i * 4 + 4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
            .ok_or_else(|| format("truncated instance index"))
    };
    let n = word(0)?;
    if n != manifest.instances || labels.len() != n || index.len() != 4 + 8 * n {
        return Err(format("instance count disagrees between manifest, index and labels"));
    }
    let spec = &manifest.spec;
    if n != spec.lengths.len() * spec.per_length {
        return Err(format("instance count disagrees with the dataset spec"));
    }
    let mut instances = Vec::with_capacity(n);
    let mut next = 0;
    for (i, &label_byte) in labels.iter().enumerate() {
        let (first, len) = (word(1 + 2 * i)?, word(2 + 2 * i)?);
        if first != next || first + len > images.len() || len < 5 {
            return Err(format(format!("bad index entry {i}")));
        }
        if len != spec.lengths[i / spec.per_length] {
            return Err(format(format!("instance {i} length disagrees with the dataset spec")));
        }
        let label = match label_byte {
            0 => false,
            1 => true,
            b => return Err(format(format!("bad label byte {b}"))),
        };
        instances.push(EquationInstance {
            images: images[first..first + len].to_vec(),
            label,
        });
        next = first + len;
    }
    if next != images.len() {
        return Err(format("images not covered by the index"));
    }
    Ok(Dataset {
        spec: manifest.spec,
        round: manifest.round,
        instances,
    })
}

/// Loads the evaluation-only truth sidecar.
pub fn load_truth(dir: &Path) -> Result<GroundTruth, DatasetError> {
    let manifest = read_manifest(dir)?;
    let bytes = read_checked(dir, &manifest, "truth.sidecar")?;
    let text = String::from_utf8(bytes).map_err(|_| format("truth sidecar is not UTF-8"))?;
    let records = text
        .lines()
        .map(|line| {
            let (seq, prov) = line.split_once('\t').ok_or_else(|| format(format!("bad truth line {line:?}")))?;
            let seq: SymbolSeq = seq.parse().map_err(|_| format(format!("bad sequence {seq:?}")))?;
            let provenance = match prov {
                "true_result" => Provenance::TrueResult,
                "corrupted_z" => Provenance::CorruptedZ,
                other => return Err(format(format!("bad provenance {other:?}"))),
            };
            Ok(TruthRecord { seq, provenance })
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    if records.len() != manifest.instances {
        return Err(format("truth sidecar length disagrees with the manifest"));
    }
    Ok(GroundTruth { records })
}
