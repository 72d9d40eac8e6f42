use super::AttentionMap;
use crate::color::SrgbColor;
use crate::error::{Error, Result};

/// Decoded RGB image with channels in `[0, 1]`, row-major, 3 values per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedImage {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl DecodedImage {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * 3 {
            return Err(Error::ShapeMismatch(format!(
                "image has {} values, expected {height}x{width}x3",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Self {
        Self {
            height,
            width,
            data: (0..height * width).flat_map(|_| rgb).collect(),
        }
    }

    pub fn pixel(&self, i: usize) -> [f64; 3] {
        [self.data[3 * i], self.data[3 * i + 1], self.data[3 * i + 2]]
    }

    /// Nearest-neighbour upscaled 8-bit copy, for inspection.
    pub fn to_rgb8(&self, scale: u32) -> image::RgbImage {
        let w = self.width as u32;
        image::RgbImage::from_fn(w * scale, self.height as u32 * scale, |x, y| {
            let i = (y / scale * w + x / scale) as usize;
            image::Rgb(SrgbColor::from_normalized(self.pixel(i)).channels())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorLoss {
    pub value: f64,
    /// Attention-weighted mean color, `[0, 1]` per channel.
    pub mean_rgb: [f64; 3],
    /// ∂L/∂image, same layout as [`DecodedImage::data`].
    pub grad_image: Vec<f64>,
}

/// MSE between the attention-weighted mean color and `target`:
/// L = ⅓ Σ_c (Σ_p w_p x_pc − t_c)², w = A / Σ A.
///
/// The attention map is a fixed weighting here; only the image receives a
/// gradient, ∂L/∂x_pc = ⅔ (mean_c − t_c) w_p.
pub fn color_loss(
    attention: &AttentionMap,
    image: &DecodedImage,
    target: SrgbColor,
) -> Result<ColorLoss> {
    if attention.height != image.height || attention.width != image.width {
        return Err(Error::ShapeMismatch(format!(
            "attention {}x{} vs image {}x{}",
            attention.height, attention.width, image.height, image.width
        )));
    }
    let total = attention.sum();
    if !(total > 0.0) {
        return Err(Error::invalid("color attention has no mass"));
    }
    let t = target.normalized();
    let mut mean = [0.0; 3];
    for (i, a) in attention.values.iter().enumerate() {
        let w = a / total;
        let px = image.pixel(i);
        for c in 0..3 {
            mean[c] += w * px[c];
        }
    }
    let diff: [f64; 3] = std::array::from_fn(|c| mean[c] - t[c]);
    let value = diff.iter().map(|d| d * d).sum::<f64>() / 3.0;
    let grad_image = attention
        .values
        .iter()
        .flat_map(|a| {
            let w = a / total;
            diff.map(|d| 2.0 / 3.0 * d * w)
        })
        .collect();
    Ok(ColorLoss {
        value,
        mean_rgb: mean,
        grad_image,
    })
}
