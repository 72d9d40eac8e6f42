use serde::{Deserialize, Serialize};

use super::LabColor;

/// CIE76 ΔE_ab: Euclidean distance in CIELAB.
pub fn delta_e_76(a: LabColor, b: LabColor) -> f64 {
    let dl = a.l - b.l;
    let da = a.a - b.a;
    let db = a.b - b.b;
    (dl * dl + da * da + db * db).sqrt()
}

/// Lightness and chroma weights of the CMC(l:c) formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmcRatio {
    pub lightness: f64,
    pub chroma: f64,
}

impl CmcRatio {
    /// 2:1, the acceptability setting.
    pub const ACCEPTABILITY: CmcRatio = CmcRatio {
        lightness: 2.0,
        chroma: 1.0,
    };
    pub const PERCEPTIBILITY: CmcRatio = CmcRatio {
        lightness: 1.0,
        chroma: 1.0,
    };
}

impl Default for CmcRatio {
    fn default() -> Self {
        Self::ACCEPTABILITY
    }
}

/// CMC(l:c) color difference. `reference` is the standard (target) color;
/// the weighting functions are evaluated on it, so the result is not symmetric.
pub fn delta_e_cmc(reference: LabColor, sample: LabColor, l: f64, c: f64) -> f64 {
    let c1 = reference.chroma();
    let c2 = sample.chroma();
    let dl = reference.l - sample.l;
    let dc = c1 - c2;
    let da = reference.a - sample.a;
    let db = reference.b - sample.b;
    // Hue difference squared; clamp tiny negatives from cancellation.
    let dh2 = (da * da + db * db - dc * dc).max(0.0);

    let sl = if reference.l < 16.0 {
        0.511
    } else {
        0.040_975 * reference.l / (1.0 + 0.017_65 * reference.l)
    };
    let sc = 0.0638 * c1 / (1.0 + 0.0131 * c1) + 0.638;
    let mut h1 = reference.b.atan2(reference.a).to_degrees();
    if h1 < 0.0 {
        h1 += 360.0;
    }
    let t = if (164.0..=345.0).contains(&h1) {
        0.56 + (0.2 * (h1 + 168.0).to_radians().cos()).abs()
    } else {
        0.36 + (0.4 * (h1 + 35.0).to_radians().cos()).abs()
    };
    let c1_4 = c1.powi(4);
    let f = (c1_4 / (c1_4 + 1900.0)).sqrt();
    let sh = sc * (f * t + 1.0 - f);

    let tl = dl / (l * sl);
    let tc = dc / (c * sc);
    (tl * tl + tc * tc + dh2 / (sh * sh)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::{srgb_to_lab, SrgbColor};

    #[test]
    fn black_white_is_100() {
        let d = delta_e_76(LabColor::new(0.0, 0.0, 0.0), LabColor::new(100.0, 0.0, 0.0));
        assert!((d - 100.0).abs() < 1e-12);
    }

    #[test]
    fn cmc_identity() {
        let x = srgb_to_lab(SrgbColor::new(12, 200, 77));
        for (l, c) in [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)] {
            assert_eq!(delta_e_cmc(x, x, l, c), 0.0);
        }
    }

    #[test]
    fn cmc_is_asymmetric() {
        let x = srgb_to_lab(SrgbColor::new(0, 128, 128));
        let y = srgb_to_lab(SrgbColor::new(255, 105, 180));
        let forward = delta_e_cmc(x, y, 2.0, 1.0);
        let backward = delta_e_cmc(y, x, 2.0, 1.0);
        assert!((forward - backward).abs() > 1e-6, "{forward} {backward}");
    }

    #[test]
    fn dark_reference_uses_constant_lightness_weight() {
        let r = LabColor::new(10.0, 0.0, 0.0);
        let s = LabColor::new(15.0, 0.0, 0.0);
        // Neutral colors: only the lightness term survives, S_L = 0.511.
        let d = delta_e_cmc(r, s, 1.0, 1.0);
        assert!((d - 5.0 / 0.511).abs() < 1e-12);
    }
}
