use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    attention_loss, blend_latents, color_loss, gradient_step, total_loss, AttentionMap, ColorLoss,
    EditDriver, EditSchedule, LatentTensor, OutputGradient,
};
use crate::color::SrgbColor;
use crate::error::{Error, Result};
use crate::eval::{MaskBundle, ObjectMask};

/// Losses at one evaluation of the driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub inner_iter: usize,
    #[serde(rename = "L_attention")]
    pub l_attention: f64,
    #[serde(rename = "L_color")]
    pub l_color: f64,
    #[serde(rename = "L_total")]
    pub l_total: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    pub rows: Vec<TraceRow>,
}

impl LossTrace {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Rows of one denoising step, in inner-iteration order.
    pub fn block(&self, step: usize) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(move |r| r.step == step)
    }
}

/// Attention loss and per-object weighted mean colors at one latent.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSnapshot {
    pub attention: f64,
    /// Color-attention-weighted mean RGB per object, channels in `[0, 1]`.
    pub mean_rgb: Vec<[f64; 3]>,
    pub color: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditOutcome {
    pub latent: LatentTensor,
    pub trace: LossTrace,
    pub initial: LossSnapshot,
    pub final_state: LossSnapshot,
}

struct Evaluation {
    attention: super::AttentionLoss,
    colors: Vec<ColorLoss>,
}

fn evaluate(
    driver: &dyn EditDriver,
    z: &LatentTensor,
    step: usize,
    pseudo_gt: &[AttentionMap],
    targets: &[SrgbColor],
) -> Result<Evaluation> {
    let out = driver.forward(z, step)?;
    let attention = attention_loss(pseudo_gt, &out.object_attn, &out.color_attn)?;
    let colors = out
        .color_attn
        .iter()
        .zip(targets)
        .map(|(a, t)| color_loss(a, &out.image, *t))
        .collect::<Result<Vec<_>>>()?;
    let color_sum: f64 = colors.iter().map(|c| c.value).sum();
    if !attention.value.is_finite() || !color_sum.is_finite() {
        return Err(Error::NonFiniteLoss {
            step,
            detail: format!("attention {} color {}", attention.value, color_sum),
        });
    }
    Ok(Evaluation { attention, colors })
}

fn snapshot(e: &Evaluation) -> LossSnapshot {
    LossSnapshot {
        attention: e.attention.value,
        mean_rgb: e.colors.iter().map(|c| c.mean_rgb).collect(),
        color: e.colors.iter().map(|c| c.value).sum(),
    }
}

fn ensure_finite(z: &LatentTensor, step: usize) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteLoss {
            step,
            detail: "latent update produced non-finite values".into(),
        })
    }
}

/// Runs the attention and color updates over the full denoising trajectory.
///
/// Each step evaluates the driver once per inner attention iteration and
/// records a trace row; attention updates stop early once the summed loss is
/// under the threshold. The color update follows as one masked step per
/// object, all computed from the same evaluation. Blending happens at the
/// end of `blend_step`, before the latent is denoised.
pub fn run_edit_schedule(
    driver: &dyn EditDriver,
    schedule: &EditSchedule,
    pseudo_gt: &[AttentionMap],
    targets: &[SrgbColor],
    masks: &MaskBundle,
) -> Result<EditOutcome> {
    schedule.validate()?;
    let n = driver.num_objects();
    let (h, w, _) = driver.latent_shape();
    if pseudo_gt.len() != n || targets.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "driver has {n} objects but got {} pseudo-GT maps and {} targets",
            pseudo_gt.len(),
            targets.len()
        )));
    }
    let object_masks: Vec<&ObjectMask> = (0..n)
        .map(|i| {
            masks
                .mask(i)
                .ok_or_else(|| Error::invalid(format!("no mask for object {i}")))
        })
        .collect::<Result<_>>()?;
    if let Some(m) = object_masks.iter().find(|m| m.width != w || m.height != h) {
        return Err(Error::ShapeMismatch(format!(
            "mask {}x{} vs latent {w}x{h}",
            m.width, m.height
        )));
    }

    let mut z = driver.initial_latent();
    let initial = snapshot(&evaluate(driver, &z, 1, pseudo_gt, targets)?);
    let mut trace = LossTrace::default();
    let blocks = schedule.attention.inner_iters.max(1);

    for step in 1..=schedule.total_steps {
        let attention_on = schedule.attention_active(step);
        let mut last = None;
        for inner in 0..blocks {
            let e = evaluate(driver, &z, step, pseudo_gt, targets)?;
            let total = total_loss(&e.attention, &e.colors, schedule, step)?;
            trace.rows.push(TraceRow {
                step,
                inner_iter: inner,
                l_attention: e.attention.value,
                l_color: total.color_value,
                l_total: total.value,
            });
            let stop = !attention_on
                || schedule.attention.inner_iters == 0
                || e.attention.value < schedule.attention.early_stop_threshold;
            if stop {
                last = Some((e, total));
                break;
            }
            let grad = OutputGradient {
                object_attn: total.grad_object.clone(),
                color_attn: total.grad_color.clone(),
                image: Vec::new(),
            };
            let dz = driver.backward(&z, step, &grad)?;
            z = gradient_step(&z, &dz, 1.0, None)?;
            ensure_finite(&z, step)?;
        }

        if schedule.color_active(step) && schedule.color.inner_iters > 0 {
            for _ in 0..schedule.color.inner_iters {
                let (_, total) = match last.take() {
                    Some(v) => v,
                    None => {
                        let e = evaluate(driver, &z, step, pseudo_gt, targets)?;
                        let t = total_loss(&e.attention, &e.colors, schedule, step)?;
                        (e, t)
                    }
                };
                let mut next = z.clone();
                for (i, g) in total.grad_image.iter().enumerate() {
                    let dz = driver.backward(
                        &z,
                        step,
                        &OutputGradient {
                            image: g.clone(),
                            ..OutputGradient::default()
                        },
                    )?;
                    next = gradient_step(&next, &dz, 1.0, Some(object_masks[i]))?;
                }
                z = next;
                ensure_finite(&z, step)?;
            }
        }

        if schedule.blend_step == Some(step) {
            let fg = masks
                .foreground()
                .ok_or_else(|| Error::invalid("blending needs at least one object mask"))?;
            z = blend_latents(&z, &driver.simplified_latent(step)?, &fg)?;
        }
        z = driver.denoise(&z, step)?;
    }

    let final_state = snapshot(&evaluate(
        driver,
        &z,
        schedule.total_steps,
        pseudo_gt,
        targets,
    )?);
    Ok(EditOutcome {
        latent: z,
        trace,
        initial,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::{ToyConfig, ToyDriver};

    fn setup(cfg: ToyConfig) -> (ToyDriver, Vec<AttentionMap>, MaskBundle) {
        let d = ToyDriver::new(cfg).unwrap();
        let gt = d.pseudo_ground_truth();
        let m = d.masks("toy");
        (d, gt, m)
    }

    const TARGETS: [SrgbColor; 2] = [SrgbColor::new(70, 130, 180), SrgbColor::new(205, 133, 63)];

    #[test]
    fn zero_step_sizes_leave_latent_unchanged() {
        let (d, gt, m) = setup(ToyConfig::default());
        let mut s = EditSchedule::default();
        s.attention.step_size = 0.0;
        s.color.step_size = 0.0;
        let out = run_edit_schedule(&d, &s, &gt, &TARGETS, &m).unwrap();
        assert_eq!(out.latent, d.initial_latent());
        let first = &out.trace.rows[0];
        assert!(out
            .trace
            .rows
            .iter()
            .all(|r| r.l_attention == first.l_attention && r.l_color == first.l_color));
    }

    #[test]
    fn early_stop_on_matching_pseudo_gt() {
        let cfg = ToyConfig {
            leak: 0.0,
            noise: 0.0,
            ..ToyConfig::default()
        };
        let (d, gt, m) = setup(cfg);
        let out = run_edit_schedule(&d, &EditSchedule::default(), &gt, &TARGETS, &m).unwrap();
        assert_eq!(out.trace.block(1).count(), 1);
        assert!(out.trace.rows[0].l_attention < 1e-12);
    }

    #[test]
    fn mismatched_targets_rejected() {
        let (d, gt, m) = setup(ToyConfig::default());
        assert!(run_edit_schedule(&d, &EditSchedule::default(), &gt, &TARGETS[..1], &m).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let trace = LossTrace {
            rows: vec![TraceRow {
                step: 1,
                inner_iter: 0,
                l_attention: 0.5,
                l_color: 0.25,
                l_total: 10.0,
            }],
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s.lines().next().unwrap(),
            "step,inner_iter,L_attention,L_color,L_total"
        );
    }
}
