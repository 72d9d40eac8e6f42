use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::color::{
    delta_e_cmc, lab_to_rgb_f64, rgb_f64_to_lab, srgb_to_lab, CmcRatio, LabColor, SrgbColor,
};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, KMeansConfig};

/// Space the k-means distances are measured in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSpace {
    #[default]
    Rgb,
    Lab,
}

/// A dominant color: real-valued 0–255 centroid and its share of the pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorCluster {
    pub centroid: [f64; 3],
    pub fraction: f64,
}

impl ColorCluster {
    pub fn lab(&self) -> LabColor {
        rgb_f64_to_lab(self.centroid)
    }

    pub fn rounded(&self) -> SrgbColor {
        SrgbColor::from_f64(self.centroid)
    }
}

/// k-means color quantization of an object's pixels. `k` shrinks to the
/// number of distinct pixel values when there are fewer. Clusters come back
/// sorted by descending fraction.
pub fn quantize_colors(
    pixels: &[SrgbColor],
    k: usize,
    seed: u64,
    space: ClusterSpace,
) -> Result<Vec<ColorCluster>> {
    if pixels.is_empty() {
        return Err(Error::invalid("cannot quantize an empty pixel set"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut counts: BTreeMap<SrgbColor, usize> = BTreeMap::new();
    for p in pixels {
        *counts.entry(*p).or_default() += 1;
    }
    let k = k.min(counts.len());
    let mut data = Vec::with_capacity(counts.len() * 3);
    let mut weights = Vec::with_capacity(counts.len());
    for (c, n) in &counts {
        match space {
            ClusterSpace::Rgb => data.extend(c.to_f64()),
            ClusterSpace::Lab => {
                let lab = srgb_to_lab(*c);
                data.extend([lab.l, lab.a, lab.b]);
            }
        }
        weights.push(*n as f64);
    }
    let fit = kmeans(&data, 3, Some(&weights), &KMeansConfig::new(k, seed))?;
    let total = pixels.len() as f64;
    let mut clusters: Vec<ColorCluster> = fit
        .centroids
        .iter()
        .zip(&fit.weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(c, w)| ColorCluster {
            centroid: match space {
                ClusterSpace::Rgb => [c[0], c[1], c[2]],
                ClusterSpace::Lab => lab_to_rgb_f64(LabColor::new(c[0], c[1], c[2])),
            },
            fraction: w / total,
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.fraction.total_cmp(&a.fraction).then_with(|| {
            a.centroid
                .partial_cmp(&b.centroid)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(clusters)
}

/// Among clusters covering at least `min_fraction` of the pixels, the one
/// closest to `target` by ΔE_CMC (target as reference). Ties go to the larger
/// cluster, then to the earlier one.
pub fn match_cluster(
    clusters: &[ColorCluster],
    target: SrgbColor,
    min_fraction: f64,
    ratio: CmcRatio,
) -> Result<ColorCluster> {
    let target_lab = srgb_to_lab(target);
    let mut best: Option<(f64, &ColorCluster)> = None;
    for c in clusters.iter().filter(|c| c.fraction >= min_fraction) {
        let d = delta_e_cmc(target_lab, c.lab(), ratio.lightness, ratio.chroma);
        let better = match best {
            None => true,
            Some((bd, bc)) => d < bd || (d == bd && c.fraction > bc.fraction),
        };
        if better {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| *c).ok_or_else(|| {
        Error::invalid(format!(
            "no cluster covers at least {min_fraction} of the object (have {})",
            clusters.len()
        ))
    })
}
