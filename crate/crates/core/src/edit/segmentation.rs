use serde::{Deserialize, Serialize};

use super::AttentionMap;
use crate::error::{Error, Result};
use crate::eval::{MaskBundle, MaskSource, ObjectMask};
use crate::kmeans::{kmeans, KMeansConfig};

/// Pixel-affinity matrix: row `p` is the self-attention of pixel `p` over all pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfAttention {
    pub height: usize,
    pub width: usize,
    pub rows: Vec<f64>,
}

impl SelfAttention {
    pub fn new(height: usize, width: usize, rows: Vec<f64>) -> Result<Self> {
        let n = height * width;
        if rows.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "self-attention has {} entries, expected {n}x{n}",
                rows.len()
            )));
        }
        Ok(Self {
            height,
            width,
            rows,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    pub num_segments: usize,
    /// Minimum share of an object's cross-attention a segment must hold.
    pub bg_threshold: f64,
    pub seed: u64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            num_segments: 8,
            bg_threshold: 0.35,
            seed: 0,
        }
    }
}

/// Mask extraction without an external segmenter.
///
/// Pixels are clustered by their self-attention rows; each segment goes to
/// the object holding the largest share of its cross-attention over that
/// segment, or to the background when that share is under `bg_threshold`.
pub fn attention_segmentation(
    image_id: &str,
    self_attn: &SelfAttention,
    cross_attn: &[AttentionMap],
    cfg: &SegmentationConfig,
) -> Result<MaskBundle> {
    if cfg.num_segments < 2 {
        return Err(Error::invalid("num_segments must be at least 2"));
    }
    let (h, w) = (self_attn.height, self_attn.width);
    let n = h * w;
    if let Some(m) = cross_attn.iter().find(|m| m.height != h || m.width != w) {
        return Err(Error::ShapeMismatch(format!(
            "cross-attention {}x{} vs self-attention {h}x{w}",
            m.height, m.width
        )));
    }
    let k = cfg.num_segments.min(n);
    let fit = kmeans(&self_attn.rows, n, None, &KMeansConfig::new(k, cfg.seed))?;

    let mut owner = vec![None; k];
    for (s, slot) in owner.iter_mut().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (j, a) in cross_attn.iter().enumerate() {
            let total = a.sum();
            if !(total > 0.0) {
                continue;
            }
            let mass: f64 = (0..n)
                .filter(|&p| fit.assignments[p] == s)
                .map(|p| a.values[p])
                .sum::<f64>()
                / total;
            if best.is_none_or(|(_, m)| mass > m) {
                best = Some((j, mass));
            }
        }
        *slot = best.filter(|(_, m)| *m >= cfg.bg_threshold).map(|(j, _)| j);
    }

    let masks = (0..cross_attn.len())
        .map(|j| {
            let bits: Vec<bool> = fit
                .assignments
                .iter()
                .map(|&s| owner[s] == Some(j))
                .collect();
            if bits.iter().any(|b| *b) {
                ObjectMask::new(w, h, j, bits)
            } else {
                Ok(ObjectMask::empty(w, h, j))
            }
        })
        .collect::<Result<_>>()?;
    Ok(MaskBundle {
        image_id: image_id.to_string(),
        masks,
        source: MaskSource::AttentionDerived,
    })
}
