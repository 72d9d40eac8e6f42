use super::{AttentionMap, DecodedImage, LatentTensor};
use crate::error::{Error, Result};
use crate::eval::{MaskBundle, MaskSource, ObjectMask};
use crate::rng::SplitMix64;

/// What a denoiser exposes to the editing kernel at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverOutput {
    /// Full-prompt cross-attention of each object token, softmaxed over pixels.
    pub object_attn: Vec<AttentionMap>,
    /// Full-prompt cross-attention of each color token.
    pub color_attn: Vec<AttentionMap>,
    /// Decoded image, channels in `[0, 1]`.
    pub image: DecodedImage,
}

/// Loss gradients on a [`DriverOutput`]. An empty vector stands for zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputGradient {
    pub object_attn: Vec<Vec<f64>>,
    pub color_attn: Vec<Vec<f64>>,
    pub image: Vec<f64>,
}

/// Differentiable stand-in for the denoising network.
///
/// The kernel never differentiates through the model itself: `backward`
/// maps gradients on the driver outputs back to a gradient on the latent.
pub trait EditDriver {
    /// `(height, width, channels)` of the latent.
    fn latent_shape(&self) -> (usize, usize, usize);
    fn num_objects(&self) -> usize;
    fn initial_latent(&self) -> LatentTensor;
    fn forward(&self, z: &LatentTensor, step: usize) -> Result<DriverOutput>;
    fn backward(
        &self,
        z: &LatentTensor,
        step: usize,
        grad: &OutputGradient,
    ) -> Result<LatentTensor>;
    /// Advance the latent by one denoising step.
    fn denoise(&self, z: &LatentTensor, step: usize) -> Result<LatentTensor>;
    /// Latent of the simplified-prompt trajectory at `step`, used for blending.
    fn simplified_latent(&self, step: usize) -> Result<LatentTensor>;
}

/// Color names of the shipped toy instance, one per default region.
pub const TOY_TARGETS: [&str; 2] = ["SteelBlue", "Peru"];

/// Geometry and gains of the [`ToyDriver`].
#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub height: usize,
    pub width: usize,
    /// One `(x0, y0, x1, y1)` half-open rectangle per object.
    pub regions: Vec<[usize; 4]>,
    /// Logit gain on the latent.
    pub gain: f64,
    /// Logit offset inside an object's own region (and `-bias` outside).
    pub bias: f64,
    /// Share of a color token's attention that initially falls on the other objects.
    pub leak: f64,
    pub decoder_gain: f64,
    /// Decoded color of a zero latent.
    pub decoder_base: [f64; 3],
    pub noise: f64,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            height: 16,
            width: 16,
            regions: vec![[1, 4, 7, 12], [9, 4, 15, 12]],
            gain: 3.0,
            bias: 4.0,
            leak: 0.5,
            decoder_gain: 0.7,
            decoder_base: [0.5; 3],
            noise: 0.05,
            seed: 0,
        }
    }
}

/// Softmax-of-linear attention and a clamped linear decoder over a small
/// latent grid.
///
/// Channel `2i` drives object token `i`, channel `2i + 1` its color token,
/// and the last three channels the decoded RGB.
#[derive(Debug, Clone)]
pub struct ToyDriver {
    config: ToyConfig,
    object_bias: Vec<Vec<f64>>,
    color_bias: Vec<Vec<f64>>,
    initial: LatentTensor,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl ToyDriver {
    pub fn new(config: ToyConfig) -> Result<Self> {
        let (h, w) = (config.height, config.width);
        if h == 0 || w == 0 {
            return Err(Error::invalid("toy grid must be non-empty"));
        }
        if config.regions.is_empty() {
            return Err(Error::invalid(
                "toy driver needs at least one object region",
            ));
        }
        if !(0.0..1.0).contains(&config.leak) {
            return Err(Error::invalid("leak must lie in [0, 1)"));
        }
        let masks: Vec<ObjectMask> = config
            .regions
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r[0] >= r[2] || r[1] >= r[3] || r[2] > w || r[3] > h {
                    return Err(Error::invalid(format!(
                        "region {i} {r:?} is empty or out of bounds"
                    )));
                }
                Ok(ObjectMask::rect(w, h, i, r[0], r[1], r[2], r[3]))
            })
            .collect::<Result<_>>()?;
        let b = config.bias;
        let object_bias: Vec<Vec<f64>> = masks
            .iter()
            .map(|m| m.bits().iter().map(|&on| if on { b } else { -b }).collect())
            .collect();
        // Raising the other objects' logits to `b + ln(leak·A_own / ((1-leak)·A_other))`
        // puts roughly `leak` of the color mass on them.
        let color_bias: Vec<Vec<f64>> = masks
            .iter()
            .enumerate()
            .map(|(i, own)| {
                let others: Vec<&ObjectMask> = masks
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, m)| m)
                    .collect();
                let other_area: usize = others.iter().map(|m| m.count()).sum();
                let lift = if config.leak > 0.0 && other_area > 0 {
                    Some(
                        b + (config.leak * own.count() as f64
                            / ((1.0 - config.leak) * other_area as f64))
                            .ln(),
                    )
                } else {
                    None
                };
                (0..h * w)
                    .map(|p| {
                        if own.bits()[p] {
                            b
                        } else if let (Some(l), true) = (lift, others.iter().any(|m| m.bits()[p])) {
                            l
                        } else {
                            -b
                        }
                    })
                    .collect()
            })
            .collect();
        let channels = 2 * masks.len() + 3;
        let mut rng = SplitMix64::new(config.seed);
        let data = (0..h * w * channels)
            .map(|_| config.noise * rng.normal())
            .collect();
        let initial = LatentTensor::new(h, w, channels, data)?;
        Ok(Self {
            config,
            object_bias,
            color_bias,
            initial,
        })
    }

    pub fn config(&self) -> &ToyConfig {
        &self.config
    }

    /// Exact object masks for the configured regions.
    pub fn masks(&self, image_id: &str) -> MaskBundle {
        let c = &self.config;
        MaskBundle {
            image_id: image_id.to_string(),
            masks: c
                .regions
                .iter()
                .enumerate()
                .map(|(i, r)| ObjectMask::rect(c.width, c.height, i, r[0], r[1], r[2], r[3]))
                .collect(),
            source: MaskSource::ExternalSegmenter,
        }
    }

    /// Object attention of the simplified prompt: the softmax of the object
    /// biases alone, free of color leakage.
    pub fn pseudo_ground_truth(&self) -> Vec<AttentionMap> {
        self.object_bias
            .iter()
            .map(|b| {
                AttentionMap::new(self.config.height, self.config.width, softmax(b))
                    .expect("softmax is a distribution")
            })
            .collect()
    }

    fn check(&self, z: &LatentTensor) -> Result<()> {
        if !z.same_shape(&self.initial) {
            return Err(Error::ShapeMismatch(format!(
                "latent {}x{}x{} vs driver {}x{}x{}",
                z.height,
                z.width,
                z.channels,
                self.initial.height,
                self.initial.width,
                self.initial.channels
            )));
        }
        Ok(())
    }

    fn token_map(&self, z: &LatentTensor, channel: usize, bias: &[f64]) -> AttentionMap {
        let logits: Vec<f64> = (0..bias.len())
            .map(|p| self.config.gain * z.data[z.index(p, channel)] + bias[p])
            .collect();
        AttentionMap::new(self.config.height, self.config.width, softmax(&logits))
            .expect("softmax is a distribution")
    }

    fn decoded_channel(&self, z: &LatentTensor, p: usize, c: usize) -> f64 {
        self.config.decoder_base[c]
            + self.config.decoder_gain * z.data[z.index(p, z.channels - 3 + c)]
    }

    fn softmax_backward(&self, q: &[f64], g: &[f64], z_grad: &mut LatentTensor, channel: usize) {
        let dot: f64 = q.iter().zip(g).map(|(a, b)| a * b).sum();
        for p in 0..q.len() {
            let i = z_grad.index(p, channel);
            z_grad.data[i] += self.config.gain * q[p] * (g[p] - dot);
        }
    }
}

impl EditDriver for ToyDriver {
    fn latent_shape(&self) -> (usize, usize, usize) {
        (
            self.initial.height,
            self.initial.width,
            self.initial.channels,
        )
    }

    fn num_objects(&self) -> usize {
        self.config.regions.len()
    }

    fn initial_latent(&self) -> LatentTensor {
        self.initial.clone()
    }

    fn forward(&self, z: &LatentTensor, _step: usize) -> Result<DriverOutput> {
        self.check(z)?;
        let n = self.num_objects();
        let object_attn = (0..n)
            .map(|i| self.token_map(z, 2 * i, &self.object_bias[i]))
            .collect();
        let color_attn = (0..n)
            .map(|i| self.token_map(z, 2 * i + 1, &self.color_bias[i]))
            .collect();
        let px = z.height * z.width;
        let data = (0..px)
            .flat_map(|p| (0..3).map(move |c| (p, c)))
            .map(|(p, c)| self.decoded_channel(z, p, c).clamp(0.0, 1.0))
            .collect();
        Ok(DriverOutput {
            object_attn,
            color_attn,
            image: DecodedImage::new(z.height, z.width, data)?,
        })
    }

    fn backward(
        &self,
        z: &LatentTensor,
        step: usize,
        grad: &OutputGradient,
    ) -> Result<LatentTensor> {
        let out = self.forward(z, step)?;
        let n = self.num_objects();
        let px = z.height * z.width;
        let mut dz = LatentTensor::zeros(z.height, z.width, z.channels);
        for (maps, grads, offset) in [
            (&out.object_attn, &grad.object_attn, 0),
            (&out.color_attn, &grad.color_attn, 1),
        ] {
            if !grads.is_empty() && grads.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "{} attention gradients for {n} objects",
                    grads.len()
                )));
            }
            for (i, g) in grads.iter().enumerate() {
                if g.is_empty() {
                    continue;
                }
                if g.len() != px {
                    return Err(Error::ShapeMismatch(format!(
                        "attention gradient has {} cells, expected {px}",
                        g.len()
                    )));
                }
                self.softmax_backward(&maps[i].values, g, &mut dz, 2 * i + offset);
            }
        }
        if !grad.image.is_empty() {
            if grad.image.len() != 3 * px {
                return Err(Error::ShapeMismatch(format!(
                    "image gradient has {} values, expected {}",
                    grad.image.len(),
                    3 * px
                )));
            }
            for p in 0..px {
                for c in 0..3 {
                    let v = self.decoded_channel(z, p, c);
                    if v > 0.0 && v < 1.0 {
                        let i = dz.index(p, z.channels - 3 + c);
                        dz.data[i] += self.config.decoder_gain * grad.image[3 * p + c];
                    }
                }
            }
        }
        Ok(dz)
    }

    fn denoise(&self, z: &LatentTensor, _step: usize) -> Result<LatentTensor> {
        self.check(z)?;
        Ok(z.clone())
    }

    fn simplified_latent(&self, _step: usize) -> Result<LatentTensor> {
        Ok(self.initial.clone())
    }
}
