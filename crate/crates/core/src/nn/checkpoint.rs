//! Model checkpoints and metric dumps.
//!
//! Checkpoint layout (integers little-endian): magic `FCMG` | version u16 |
//! topology u8 | block count u32 | per block: name (u16 length + utf8),
//! rank u8, dims u32 each, payload little-endian f32 | crc32 of everything
//! preceding. Values are stored as f32; the in-memory engine is f64, so a
//! round trip quantizes to f32 precision.
//!
//! The layer structure is rebuilt from the named blocks: group prefixes
//! (`left.`/`right.`/`head.` or none) plus the topology's activation
//! convention determine where the nonlinearities go.

use std::fmt::Write as _;
use std::path::Path;

use super::layers::{Activation, DenseLayer, Layer, Mlp};
use super::tensor::Tensor;
use super::{ModelGraph, Result, Topology, TrainError};

const MAGIC: &[u8; 4] = b"FCMG";
const VERSION: u16 = 1;

fn topology_code(t: Topology) -> u8 {
    match t {
        Topology::TwinMlp => 0,
        Topology::Mlp => 1,
        Topology::Autoencoder => 2,
        Topology::Generator => 3,
        Topology::Discriminator => 4,
        Topology::Critic => 5,
    }
}

fn topology_from_code(c: u8) -> Result<Topology> {
    Ok(match c {
        0 => Topology::TwinMlp,
        1 => Topology::Mlp,
        2 => Topology::Autoencoder,
        3 => Topology::Generator,
        4 => Topology::Discriminator,
        5 => Topology::Critic,
        other => return Err(TrainError::Checkpoint(format!("unknown topology code {other}"))),
    })
}

pub fn save_model(model: &ModelGraph, path: impl AsRef<Path>) -> Result<()> {
    let params = model.parameters();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(topology_code(model.topology()));
    buf.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, tensor) in params {
        let name_bytes = name.as_bytes();
        buf.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        buf.extend_from_slice(name_bytes);
        buf.push(tensor.shape().len() as u8);
        for &d in tensor.shape() {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in tensor.data() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    buf.extend_from_slice(&crc32fast::hash(&buf).to_le_bytes());
    std::fs::write(path, buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(TrainError::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16_le(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32_le(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Activation placement for a rebuilt stack.
fn activations_for(topology: Topology, group: &str) -> (Option<Activation>, Option<Activation>) {
    // (between denses, after the last dense)
    match (topology, group) {
        (Topology::TwinMlp, "left." | "right.") => {
            (Some(Activation::Relu), Some(Activation::Relu))
        }
        (Topology::TwinMlp, _) => (Some(Activation::Relu), None),
        (Topology::Autoencoder | Topology::Generator, _) => {
            (Some(Activation::Relu), Some(Activation::Sigmoid))
        }
        (Topology::Discriminator | Topology::Critic | Topology::Mlp, _) => {
            (Some(Activation::Relu), None)
        }
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelGraph> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(TrainError::Checkpoint("bad magic".into()));
    }
    if bytes.len() < 8 {
        return Err(TrainError::Checkpoint("truncated checkpoint".into()));
    }
    let payload_len = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[payload_len..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..payload_len]);
    if stored != computed {
        return Err(TrainError::Checkpoint(format!(
            "checksum mismatch (stored {stored:#010x}, computed {computed:#010x})"
        )));
    }
    let mut cur = Cursor { bytes: &bytes[..payload_len], pos: 4 };
    let version = cur.u16_le()?;
    if version != VERSION {
        return Err(TrainError::Checkpoint(format!("unsupported version {version}")));
    }
    let topology = topology_from_code(cur.take(1)?[0])?;
    let count = cur.u32_le()? as usize;
    let mut blocks: Vec<(String, Tensor)> = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = cur.u16_le()? as usize;
        let name = String::from_utf8(cur.take(name_len)?.to_vec())
            .map_err(|_| TrainError::Checkpoint("non-utf8 parameter name".into()))?;
        let rank = cur.take(1)?[0] as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(cur.u32_le()? as usize);
        }
        let n: usize = shape.iter().product();
        let raw = cur.take(n * 4)?;
        let data: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect();
        blocks.push((name, Tensor::from_vec(shape, data).map_err(TrainError::from)?));
    }
    rebuild(topology, blocks)
}

fn rebuild(topology: Topology, blocks: Vec<(String, Tensor)>) -> Result<ModelGraph> {
    // Group by prefix, preserving block order within each group.
    let mut groups: Vec<(String, Vec<(String, Tensor)>)> = Vec::new();
    for (name, tensor) in blocks {
        let prefix = match name.rfind("dense") {
            Some(pos) => name[..pos].to_string(),
            None => {
                return Err(TrainError::Checkpoint(format!("unrecognized block name {name:?}")))
            }
        };
        match groups.iter_mut().find(|(p, _)| *p == prefix) {
            Some((_, list)) => list.push((name, tensor)),
            None => groups.push((prefix, vec![(name, tensor)])),
        }
    }
    let mut parts: Vec<(String, Mlp)> = Vec::new();
    for (prefix, list) in groups {
        let (between, last) = activations_for(topology, &prefix);
        let mut denses: Vec<DenseLayer> = Vec::new();
        let mut iter = list.into_iter();
        while let Some((wname, w)) = iter.next() {
            let (bname, b) = iter.next().ok_or_else(|| {
                TrainError::Checkpoint(format!("weight {wname:?} missing its bias"))
            })?;
            if !wname.ends_with(".w") || !bname.ends_with(".b") {
                return Err(TrainError::Checkpoint(format!(
                    "unexpected block order near {wname:?}/{bname:?}"
                )));
            }
            denses.push(DenseLayer { w, b });
        }
        let n = denses.len();
        let mut layers = Vec::new();
        for (i, dense) in denses.into_iter().enumerate() {
            layers.push(Layer::Dense(dense));
            if i + 1 < n {
                if let Some(act) = between {
                    layers.push(Layer::Act(act));
                }
            } else if let Some(act) = last {
                layers.push(Layer::Act(act));
            }
        }
        parts.push((prefix, Mlp::new(layers)));
    }
    ModelGraph::from_parts(topology, parts)
}

/// `step,metric,value` rows.
pub fn write_metrics_csv(
    path: impl AsRef<Path>,
    rows: &[(usize, &str, f64)],
) -> Result<()> {
    let mut out = String::from("step,metric,value\n");
    for (step, metric, value) in rows {
        let _ = writeln!(out, "{step},{metric},{value}");
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::FeatureExtractor;

    fn roundtrip(model: &ModelGraph) -> ModelGraph {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.fcmg");
        save_model(model, &path).unwrap();
        load_model(&path).unwrap()
    }

    fn as_f32(model: &ModelGraph) -> Vec<Vec<f32>> {
        model
            .parameters()
            .iter()
            .map(|(_, t)| t.data().iter().map(|&v| v as f32).collect())
            .collect()
    }

    #[test]
    fn stack_and_twin_round_trips_preserve_f32_weights() {
        for model in [
            ModelGraph::discriminator(12, 3),
            ModelGraph::autoencoder(12, 4),
            ModelGraph::generator(8, 12, 5),
            ModelGraph::critic(12, 6),
            ModelGraph::twin_classifier(6, 4, 7),
            ModelGraph::probe(10, 4, 8),
        ] {
            let back = roundtrip(&model);
            assert_eq!(back.topology(), model.topology());
            assert_eq!(as_f32(&back), as_f32(&model));
            let names: Vec<String> =
                model.parameters().into_iter().map(|(n, _)| n).collect();
            let back_names: Vec<String> =
                back.parameters().into_iter().map(|(n, _)| n).collect();
            assert_eq!(names, back_names);
        }
    }

    #[test]
    fn rebuilt_models_run_forward_identically_in_f32() {
        let model = ModelGraph::twin_classifier(5, 3, 9);
        let back = roundtrip(&model);
        let x = Tensor::from_vec(vec![3, 10], (0..30).map(|i| i as f64 / 31.0).collect()).unwrap();
        let a = back.forward(&x).unwrap();
        // The reloaded model still exposes the feature tap.
        assert!(FeatureExtractor::from_model(&back).is_ok());
        assert_eq!(a.shape(), &[3, 3]);
    }

    #[test]
    fn corrupted_checkpoint_fails_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.fcmg");
        save_model(&ModelGraph::probe(6, 3, 1), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x55;
        std::fs::write(&path, bytes).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("checksum"), "{err}");
    }

    #[test]
    fn metrics_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        write_metrics_csv(&path, &[(0, "loss", 1.5), (1, "loss", 0.75)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "step,metric,value\n0,loss,1.5\n1,loss,0.75\n");
    }
}
