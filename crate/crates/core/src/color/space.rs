use serde::{Deserialize, Serialize};

/// 8-bit sRGB color. The normalized form is `channel / 255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SrgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl SrgbColor {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    pub fn to_f64(self) -> [f64; 3] {
        [self.r as f64, self.g as f64, self.b as f64]
    }

    pub fn normalized(self) -> [f64; 3] {
        [
            self.r as f64 / 255.0,
            self.g as f64 / 255.0,
            self.b as f64 / 255.0,
        ]
    }

    /// Rounds and clamps a real-valued 0–255 triple.
    pub fn from_f64(rgb: [f64; 3]) -> Self {
        let q = |v: f64| v.round().clamp(0.0, 255.0) as u8;
        Self::new(q(rgb[0]), q(rgb[1]), q(rgb[2]))
    }

    pub fn from_normalized(rgb: [f64; 3]) -> Self {
        Self::from_f64([rgb[0] * 255.0, rgb[1] * 255.0, rgb[2] * 255.0])
    }
}

impl From<[u8; 3]> for SrgbColor {
    fn from(c: [u8; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }
}

/// CIELAB coordinates under D65 / 2°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }

    pub fn chroma(&self) -> f64 {
        self.a.hypot(self.b)
    }
}

/// Result of an inverse conversion; `clamped` is set when any channel left the gamut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GamutResult {
    pub color: SrgbColor,
    pub clamped: bool,
}

// Linear sRGB -> XYZ (IEC 61966-2-1, D65).
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

// Reference white is the image of linear (1,1,1) so white maps to L*=100, a*=b*=0 exactly.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

const EPSILON: f64 = 216.0 / 24389.0; // (6/29)^3
const KAPPA: f64 = 24389.0 / 27.0; // (29/3)^3

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let inv = 1.0 / det;
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv,
        ],
    ]
}

fn to_linear(v: f64) -> f64 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn from_linear(v: f64) -> f64 {
    if v <= 0.003_130_8 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > EPSILON {
        t
    } else {
        (116.0 * f - 16.0) / KAPPA
    }
}

/// Converts a real-valued 0–255 sRGB triple to CIELAB.
pub fn rgb_f64_to_lab(rgb: [f64; 3]) -> LabColor {
    let lin = rgb.map(|c| to_linear(c / 255.0));
    let xyz: [f64; 3] = std::array::from_fn(|i| {
        RGB_TO_XYZ[i][0] * lin[0] + RGB_TO_XYZ[i][1] * lin[1] + RGB_TO_XYZ[i][2] * lin[2]
    });
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    LabColor::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

pub fn srgb_to_lab(c: SrgbColor) -> LabColor {
    rgb_f64_to_lab(c.to_f64())
}

/// Inverse conversion without rounding or clamping, 0–255 scale.
pub fn lab_to_rgb_f64(c: LabColor) -> [f64; 3] {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    let xyz = [
        lab_f_inv(fx) * WHITE[0],
        lab_f_inv(fy) * WHITE[1],
        lab_f_inv(fz) * WHITE[2],
    ];
    let m = invert3(&RGB_TO_XYZ);
    std::array::from_fn(|i| {
        let lin = m[i][0] * xyz[0] + m[i][1] * xyz[1] + m[i][2] * xyz[2];
        from_linear(lin) * 255.0
    })
}

pub fn lab_to_srgb(c: LabColor) -> GamutResult {
    let rgb = lab_to_rgb_f64(c);
    // Half a step of slack so rounding noise at 0 and 255 is not reported.
    let clamped = rgb
        .iter()
        .any(|v| !(-0.5..=255.5).contains(v) || v.is_nan());
    GamutResult {
        color: SrgbColor::from_f64(rgb),
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_and_black() {
        let w = srgb_to_lab(SrgbColor::new(255, 255, 255));
        assert!(
            (w.l - 100.0).abs() < 1e-6 && w.a.abs() < 1e-6 && w.b.abs() < 1e-6,
            "{w:?}"
        );
        let k = srgb_to_lab(SrgbColor::new(0, 0, 0));
        assert!(
            k.l.abs() < 1e-6 && k.a.abs() < 1e-6 && k.b.abs() < 1e-6,
            "{k:?}"
        );
    }

    #[test]
    fn inverse_of_extremes() {
        assert_eq!(
            lab_to_srgb(LabColor::new(100.0, 0.0, 0.0)).color,
            SrgbColor::new(255, 255, 255)
        );
        assert_eq!(
            lab_to_srgb(LabColor::new(0.0, 0.0, 0.0)).color,
            SrgbColor::new(0, 0, 0)
        );
        assert!(!lab_to_srgb(LabColor::new(100.0, 0.0, 0.0)).clamped);
    }

    #[test]
    fn out_of_gamut_is_flagged() {
        let r = lab_to_srgb(LabColor::new(50.0, 120.0, -120.0));
        assert!(r.clamped);
    }

    #[test]
    fn teal_round_trip() {
        let teal = SrgbColor::new(0, 128, 128);
        let back = lab_to_srgb(srgb_to_lab(teal)).color;
        for (x, y) in teal.channels().iter().zip(back.channels()) {
            assert!((*x as i32 - y as i32).abs() <= 1);
        }
        let exact = lab_to_rgb_f64(srgb_to_lab(teal));
        for (x, y) in teal.to_f64().iter().zip(exact) {
            assert!((x - y).abs() < 0.5, "{x} vs {y}");
        }
    }

    #[test]
    fn normalized_form_is_exact_division() {
        let c = SrgbColor::new(0, 128, 255);
        assert_eq!(c.normalized(), [0.0, 128.0 / 255.0, 1.0]);
    }
}
