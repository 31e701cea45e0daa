//! Structured-text (JSON) checkpoints.
//!
//! ```text
//! {
//!   "format": "wavad-checkpoint",
//!   "version": 1,
//!   "seed": <u64 initialization seed>,
//!   "config": { NetworkConfig fields },
//!   "tensors": [ { "name": "eb.0.kernel", "shape": [out, in, k], "data": [...] },
//!                { "name": "eb.0.bias",   "shape": [out],        "data": [...] }, ... ],
//!   "training": null | { "epochs_completed", "steps_completed", "optimizer": { "lr", "rho", "eps", "square_avg" } }
//! }
//! ```
//!
//! Floats are written with round-trip precision, so a restored network
//! reproduces forward outputs bit for bit. Files are written to a temporary
//! sibling and renamed into place.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autograd::OptimizerState;
use crate::error::{Result, VadError};
use crate::model::{NetworkConfig, VadNetwork};

pub const CHECKPOINT_FORMAT: &str = "wavad-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Optimizer and progress counters needed to resume training exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingState {
    pub epochs_completed: usize,
    pub steps_completed: usize,
    pub optimizer: OptimizerState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config: NetworkConfig,
    pub tensors: Vec<Tensor>,
    pub training: Option<TrainingState>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

impl Checkpoint {
    pub fn from_network(net: &VadNetwork, seed: u64, training: Option<TrainingState>) -> Self {
        let mut tensors = Vec::new();
        for (name, layer) in net.layer_names().into_iter().zip(net.layers()) {
            tensors.push(Tensor {
                name: format!("{name}.kernel"),
                shape: vec![layer.out_channels(), layer.in_channels(), layer.kernel_size()],
                data: layer.kernel.clone(),
            });
            tensors.push(Tensor {
                name: format!("{name}.bias"),
                shape: vec![layer.out_channels()],
                data: layer.bias.clone(),
            });
        }
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            seed,
            config: net.config().clone(),
            tensors,
            training,
        }
    }

    /// Rebuilds the network, checking every tensor name and shape against the config.
    pub fn to_network(&self) -> Result<VadNetwork> {
        let mut net = VadNetwork::zeroed(self.config.clone())?;
        let names = net.layer_names();
        let expected = 2 * names.len();
        if self.tensors.len() != expected {
            return Err(VadError::Checkpoint(format!(
                "{} tensors, config implies {expected}",
                self.tensors.len()
            )));
        }
        for ((name, layer), pair) in names.iter().zip(net.layers_mut()).zip(self.tensors.chunks(2)) {
            let shapes = [
                vec![layer.out_channels(), layer.in_channels(), layer.kernel_size()],
                vec![layer.out_channels()],
            ];
            let targets = [&mut layer.kernel, &mut layer.bias];
            for ((tensor, shape), (suffix, target)) in pair.iter().zip(shapes).zip(["kernel", "bias"].into_iter().zip(targets)) {
                let want = format!("{name}.{suffix}");
                if tensor.name != want {
                    return Err(VadError::Checkpoint(format!("expected tensor '{want}', found '{}'", tensor.name)));
                }
                if tensor.shape != shape || tensor.data.len() != shape.iter().product::<usize>() {
                    return Err(VadError::Checkpoint(format!(
                        "tensor '{want}' has shape {:?} with {} values, expected {shape:?}",
                        tensor.shape,
                        tensor.data.len()
                    )));
                }
                target.copy_from_slice(&tensor.data);
            }
        }
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| VadError::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: Header = serde_json::from_str(text)
            .map_err(|e| VadError::Checkpoint(format!("unreadable or truncated checkpoint: {e}")))?;
        if header.format != CHECKPOINT_FORMAT {
            return Err(VadError::Checkpoint(format!("not a checkpoint (format '{}')", header.format)));
        }
        if header.version != CHECKPOINT_VERSION {
            return Err(VadError::Checkpoint(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                header.version
            )));
        }
        serde_json::from_str(text).map_err(|e| VadError::Checkpoint(format!("malformed checkpoint: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VadError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Writes the network's parameters without training state.
pub fn save_network(net: &VadNetwork, seed: u64, path: &Path) -> Result<()> {
    Checkpoint::from_network(net, seed, None).save(path)
}

pub fn load_network(path: &Path) -> Result<VadNetwork> {
    Checkpoint::load(path)?.to_network()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(net: &VadNetwork) -> Vec<f64> {
        let n = net.min_input_len() + 37;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 0.3).collect();
        net.forward(&x).unwrap().vad_scores().values().to_vec()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let net = VadNetwork::new(NetworkConfig::gradcheck(), 17).unwrap();
        save_network(&net, 17, &path).unwrap();
        let back = load_network(&path).unwrap();
        assert_eq!(back, net);
        let (a, b) = (probe(&net), probe(&back));
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let net = VadNetwork::new(NetworkConfig::gradcheck(), 1).unwrap();
        let json = Checkpoint::from_network(&net, 1, None).to_json().unwrap();
        for cut in [0, 10, json.len() / 2, json.len() - 1] {
            assert!(matches!(Checkpoint::from_json(&json[..cut]), Err(VadError::Checkpoint(_))));
        }
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let net = VadNetwork::new(NetworkConfig::gradcheck(), 1).unwrap();
        let mut ckpt = Checkpoint::from_network(&net, 1, None);
        ckpt.version = 99;
        let err = Checkpoint::from_json(&ckpt.to_json().unwrap()).unwrap_err();
        assert!(err.to_string().contains("version 99"));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let net = VadNetwork::new(NetworkConfig::gradcheck(), 1).unwrap();
        let mut ckpt = Checkpoint::from_network(&net, 1, None);
        ckpt.tensors[3].data.pop();
        assert!(ckpt.to_network().is_err());
        let mut ckpt = Checkpoint::from_network(&net, 1, None);
        ckpt.tensors.swap(0, 2);
        assert!(ckpt.to_network().is_err());
    }
}
