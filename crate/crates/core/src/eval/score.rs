use serde::{Deserialize, Serialize};

use super::quantize::{match_cluster, quantize_colors, ClusterSpace};
use super::{DEFAULT_K, DEFAULT_MIN_FRACTION, DEFAULT_TAU};
use crate::benchmark::PairType;
use crate::color::{delta_e_cmc, srgb_to_lab, CmcRatio, SrgbColor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    pub k: usize,
    pub min_fraction: f64,
    pub tau: f64,
    pub cmc: CmcRatio,
    pub space: ClusterSpace,
    pub seed: u64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            min_fraction: DEFAULT_MIN_FRACTION,
            tau: DEFAULT_TAU,
            cmc: CmcRatio::default(),
            space: ClusterSpace::Rgb,
            seed: 0,
        }
    }
}

/// Metrics of a successfully scored object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectMetrics {
    /// Matched cluster centroid, real-valued 0–255 RGB.
    pub matched_color: [f64; 3],
    pub matched_fraction: f64,
    /// ΔE_CMC(target, matched).
    pub lab_dist: f64,
    /// Euclidean distance in 0–255 RGB.
    pub rgb_l2: f64,
    /// 1 iff `lab_dist < tau`.
    pub acc: u8,
    /// Minimum ΔE_CMC to any color named in the prompt.
    pub leakage_dist: f64,
    /// 1 iff `leakage_dist < tau`.
    pub leakage_acc: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScore {
    pub image_id: String,
    pub method: String,
    pub split: PairType,
    pub object_index: usize,
    pub target: SrgbColor,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_reason: Option<String>,
    #[serde(flatten)]
    pub metrics: Option<ObjectMetrics>,
}

impl ObjectScore {
    pub fn new(
        image_id: &str,
        method: &str,
        split: PairType,
        object_index: usize,
        target: SrgbColor,
    ) -> Self {
        Self {
            image_id: image_id.to_string(),
            method: method.to_string(),
            split,
            object_index,
            target,
            valid: false,
            rejection_reason: None,
            metrics: None,
        }
    }

    pub fn dist(&self, leakage: bool) -> Option<f64> {
        self.metrics
            .map(|m| if leakage { m.leakage_dist } else { m.lab_dist })
    }
}

pub fn invalid_score(mut base: ObjectScore, reason: impl Into<String>) -> ObjectScore {
    base.valid = false;
    base.rejection_reason = Some(reason.into());
    base.metrics = None;
    base
}

fn measure(
    pixels: &[SrgbColor],
    target: SrgbColor,
    others: &[SrgbColor],
    cfg: &ScoreConfig,
) -> Result<ObjectMetrics> {
    if !(cfg.tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    let clusters = quantize_colors(pixels, cfg.k, cfg.seed, cfg.space)?;
    let matched = match_cluster(&clusters, target, cfg.min_fraction, cfg.cmc)?;
    let matched_lab = matched.lab();
    let cmc = |reference: SrgbColor| {
        delta_e_cmc(
            srgb_to_lab(reference),
            matched_lab,
            cfg.cmc.lightness,
            cfg.cmc.chroma,
        )
    };
    let lab_dist = cmc(target);
    let t = target.to_f64();
    let rgb_l2 = (0..3)
        .map(|i| (matched.centroid[i] - t[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    let leakage_dist = others.iter().map(|&o| cmc(o)).fold(lab_dist, f64::min);
    Ok(ObjectMetrics {
        matched_color: matched.centroid,
        matched_fraction: matched.fraction,
        lab_dist,
        rgb_l2,
        acc: (lab_dist < cfg.tau) as u8,
        leakage_dist,
        leakage_acc: (leakage_dist < cfg.tau) as u8,
    })
}

/// Scores the pixels under one object mask against its target color.
/// `others` are the remaining colors named in the prompt (for leakage).
pub fn score_object(
    base: ObjectScore,
    pixels: &[SrgbColor],
    target: SrgbColor,
    others: &[SrgbColor],
    cfg: &ScoreConfig,
) -> ObjectScore {
    if pixels.is_empty() {
        return invalid_score(base, "empty masked region");
    }
    match measure(pixels, target, others, cfg) {
        Ok(m) => ObjectScore {
            target,
            valid: true,
            rejection_reason: None,
            metrics: Some(m),
            ..base
        },
        Err(e) => invalid_score(base, e.to_string()),
    }
}
