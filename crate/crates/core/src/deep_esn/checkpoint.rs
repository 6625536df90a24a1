//! Binary checkpoint: magic, little-endian header length, JSON header, then
//! every matrix row-major as little-endian f64 (per layer `W_in` then `W`,
//! then `W_out`). Reservoir states are not stored.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DeepEsn, EsnLayer};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"UAVESN01";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub layer_sizes: Vec<usize>,
    pub n_inputs: usize,
    pub n_actions: usize,
    pub leaks: Vec<f64>,
    pub spectral_radius_target: f64,
    pub config_hash: String,
}

fn put_matrix(out: &mut Vec<u8>, m: &DMatrix<f64>) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let raw = self.take(rows * cols * 8)?;
        let vals: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(DMatrix::from_row_slice(rows, cols, &vals))
    }
}

impl DeepEsn {
    pub fn header(&self, config_hash: &str) -> CheckpointHeader {
        CheckpointHeader {
            layer_sizes: self.sizes(),
            n_inputs: self.n_inputs(),
            n_actions: self.n_actions(),
            leaks: self.layers.iter().map(|l| l.leak).collect(),
            spectral_radius_target: self.spectral_radius_target,
            config_hash: config_hash.to_string(),
        }
    }

    pub fn to_checkpoint(&self, config_hash: &str) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header(config_hash))?;
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for l in &self.layers {
            put_matrix(&mut out, &l.w_in);
            put_matrix(&mut out, &l.w);
        }
        put_matrix(&mut out, &self.w_out);
        Ok(out)
    }

    /// Parses a checkpoint. With `expected_hash` set, a header whose config
    /// hash differs is refused.
    pub fn from_checkpoint(bytes: &[u8], expected_hash: Option<&str>) -> Result<(DeepEsn, CheckpointHeader)> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let len = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes")) as usize;
        let header: CheckpointHeader = serde_json::from_slice(r.take(len)?)?;
        if let Some(expected) = expected_hash {
            if expected != header.config_hash {
                return Err(Error::HashMismatch {
                    expected: expected.to_string(),
                    found: header.config_hash.clone(),
                });
            }
        }
        if header.layer_sizes.is_empty() || header.leaks.len() != header.layer_sizes.len() {
            return Err(Error::Checkpoint("inconsistent layer description".into()));
        }
        let mut layers = Vec::new();
        let mut fan_in = header.n_inputs;
        for (&n, &leak) in header.layer_sizes.iter().zip(&header.leaks) {
            let w_in = r.matrix(n, fan_in)?;
            let w = r.matrix(n, n)?;
            layers.push(EsnLayer {
                w_in,
                w,
                leak,
                state: DVector::zeros(n),
            });
            fan_in = n;
        }
        let cols = header.n_inputs + header.layer_sizes.iter().sum::<usize>();
        let w_out = r.matrix(header.n_actions, cols)?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let esn = DeepEsn {
            layers,
            w_out,
            spectral_radius_target: header.spectral_radius_target,
        };
        Ok((esn, header))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deep_esn::init_esn;
    use crate::scenario::EsnParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trained() -> DeepEsn {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut e = init_esn(&EsnParams::default(), &[12, 6], 7, 50, &mut rng).unwrap();
        e.w_out.iter_mut().for_each(|w| *w = rng.random::<f64>() - 0.5);
        e
    }

    #[test]
    fn round_trip_bit_exact() {
        let e = trained();
        let bytes = e.to_checkpoint("abc").unwrap();
        let (back, h) = DeepEsn::from_checkpoint(&bytes, Some("abc")).unwrap();
        assert_eq!(h.layer_sizes, vec![12, 6]);
        for (a, b) in e.w_out.iter().zip(back.w_out.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back, e);
        assert_eq!(back.to_checkpoint("abc").unwrap(), bytes);
    }

    #[test]
    fn hash_mismatch_refused_unless_overridden() {
        let bytes = trained().to_checkpoint("abc").unwrap();
        assert!(matches!(
            DeepEsn::from_checkpoint(&bytes, Some("def")),
            Err(Error::HashMismatch { .. })
        ));
        assert!(DeepEsn::from_checkpoint(&bytes, None).is_ok());
    }

    #[test]
    fn truncated_and_garbage() {
        let bytes = trained().to_checkpoint("abc").unwrap();
        assert!(matches!(
            DeepEsn::from_checkpoint(&bytes[..bytes.len() - 1], None),
            Err(Error::Checkpoint(_))
        ));
        assert!(DeepEsn::from_checkpoint(b"not a checkpoint", None).is_err());
    }
}
