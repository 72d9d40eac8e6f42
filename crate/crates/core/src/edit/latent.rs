use crate::error::{Error, Result};
use crate::eval::ObjectMask;

/// Latent tensor, row-major `height x width x channels`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTensor {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl LatentTensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::ShapeMismatch(format!(
                "latent has {} values, expected {height}x{width}x{channels}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("latent entries must be finite"));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn index(&self, pixel: usize, channel: usize) -> usize {
        pixel * self.channels + channel
    }

    pub fn same_shape(&self, other: &LatentTensor) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

fn check_mask(z: &LatentTensor, mask: &ObjectMask) -> Result<()> {
    if mask.width != z.width || mask.height != z.height {
        return Err(Error::ShapeMismatch(format!(
            "mask {}x{} vs latent {}x{}",
            mask.width, mask.height, z.width, z.height
        )));
    }
    Ok(())
}

/// `z − step_size · (mask ⊙ grad)`, mask broadcast over channels. Entries
/// outside the mask are copied unchanged.
pub fn gradient_step(
    z: &LatentTensor,
    grad: &LatentTensor,
    step_size: f64,
    mask: Option<&ObjectMask>,
) -> Result<LatentTensor> {
    if !z.same_shape(grad) {
        return Err(Error::ShapeMismatch(
            "latent and gradient shapes differ".into(),
        ));
    }
    if let Some(m) = mask {
        check_mask(z, m)?;
    }
    let mut out = z.clone();
    for p in 0..z.height * z.width {
        if mask.is_some_and(|m| !m.bits()[p]) {
            continue;
        }
        for c in 0..z.channels {
            let i = z.index(p, c);
            out.data[i] = z.data[i] - step_size * grad.data[i];
        }
    }
    Ok(out)
}

/// `z · fg + z_simp · (1 − fg)` for a binary foreground mask.
pub fn blend_latents(
    z: &LatentTensor,
    z_simp: &LatentTensor,
    fg: &ObjectMask,
) -> Result<LatentTensor> {
    if !z.same_shape(z_simp) {
        return Err(Error::ShapeMismatch(
            "latents to blend differ in shape".into(),
        ));
    }
    check_mask(z, fg)?;
    let mut out = z.clone();
    for (p, &on) in fg.bits().iter().enumerate() {
        if !on {
            let range = p * z.channels..(p + 1) * z.channels;
            out.data[range.clone()].copy_from_slice(&z_simp.data[range]);
        }
    }
    Ok(out)
}
