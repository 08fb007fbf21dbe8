use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Network, NetworkSpec};
use super::NeuralError;

/// First line of every model file.
pub const MODEL_MAGIC: &[u8] = b"ABLNET1\n";

/// The JSON line between the magic and the parameter block.
#[derive(Serialize, Deserialize)]
struct Manifest {
    spec: NetworkSpec,
    param_count: usize,
}

impl Network {
    /// Model file bytes: magic, one line of JSON manifest, then every
    /// parameter as a little-endian `f64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let manifest = Manifest {
            spec: self.spec().clone(),
            param_count: self.param_count(),
        };
        let mut out = MODEL_MAGIC.to_vec();
        out.extend(serde_json::to_vec(&manifest).expect("manifest serializes"));
        out.push(b'\n');
        for p in self.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NeuralError> {
        let rest = bytes
            .strip_prefix(MODEL_MAGIC)
            .ok_or_else(|| NeuralError::Format("bad magic".into()))?;
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| NeuralError::Format("unterminated manifest".into()))?;
        let manifest: Manifest =
            serde_json::from_slice(&rest[..nl]).map_err(|e| NeuralError::Format(format!("manifest: {e}")))?;
        let body = &rest[nl + 1..];
        if body.len() != manifest.param_count * 8 {
            return Err(NeuralError::Format(format!(
                "expected {} parameter bytes, found {}",
                manifest.param_count * 8,
                body.len()
            )));
        }
        let params = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Network::from_params(manifest.spec, params).map_err(|e| NeuralError::Format(e.to_string()))
    }
}

pub fn write_network(net: &Network, path: &Path) -> Result<(), NeuralError> {
    fs::write(path, net.to_bytes())?;
    Ok(())
}

pub fn read_network(path: &Path) -> Result<Network, NeuralError> {
    Network::from_bytes(&fs::read(path)?)
}
