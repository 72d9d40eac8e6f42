use serde::{Deserialize, Serialize};

use super::{AttentionLoss, ColorLoss};
use crate::error::{Error, Result};

/// Attention-loss window: active for denoising steps `1..=active_until`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionWindow {
    pub step_size: f64,
    pub inner_iters: usize,
    /// Inner iterations stop once the summed attention loss drops below this.
    pub early_stop_threshold: f64,
    pub active_until: usize,
}

/// Color-loss window: active for steps `active_from..=total_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorWindow {
    pub step_size: f64,
    pub inner_iters: usize,
    pub active_from: usize,
}

/// Settings a real denoiser driver needs; the kernel only carries them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverSettings {
    pub guidance_scale: f64,
    pub self_attention_replace_steps: usize,
    /// Inclusive layer range for self-attention replacement.
    pub self_attention_layers: [usize; 2],
}

impl Default for DriverSettings {
    fn default() -> Self {
        Self {
            guidance_scale: 7.5,
            self_attention_replace_steps: 40,
            self_attention_layers: [4, 14],
        }
    }
}

/// Steps are numbered `1..=total_steps` in generation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EditSchedule {
    pub total_steps: usize,
    pub attention: AttentionWindow,
    pub color: ColorWindow,
    /// Step at which background latents are restored; `None` disables blending.
    pub blend_step: Option<usize>,
    pub driver: DriverSettings,
}

impl Default for EditSchedule {
    fn default() -> Self {
        Self {
            total_steps: 50,
            attention: AttentionWindow {
                step_size: 20.0,
                inner_iters: 10,
                early_stop_threshold: 0.1,
                active_until: 35,
            },
            color: ColorWindow {
                step_size: 112.5,
                inner_iters: 1,
                active_from: 25,
            },
            blend_step: Some(40),
            driver: DriverSettings::default(),
        }
    }
}

impl EditSchedule {
    pub fn validate(&self) -> Result<()> {
        let t = self.total_steps;
        if t == 0 {
            return Err(Error::invalid("total_steps must be positive"));
        }
        for (name, v) in [
            ("attention step size", self.attention.step_size),
            ("color step size", self.color.step_size),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be finite and nonnegative"
                )));
            }
        }
        if self.attention.active_until > t || self.color.active_from > t {
            return Err(Error::invalid("loss windows must lie within the schedule"));
        }
        if self.blend_step.is_some_and(|b| b == 0 || b > t) {
            return Err(Error::invalid("blend_step must be within 1..=total_steps"));
        }
        Ok(())
    }

    pub fn attention_active(&self, step: usize) -> bool {
        (1..=self.attention.active_until).contains(&step)
    }

    pub fn color_active(&self, step: usize) -> bool {
        step >= self.color.active_from.max(1) && step <= self.total_steps
    }

    /// `(γ_AL, λ_CL)` in effect at `step`; zero outside their windows.
    pub fn coefficients(&self, step: usize) -> (f64, f64) {
        let g = if self.attention_active(step) {
            self.attention.step_size
        } else {
            0.0
        };
        let l = if self.color_active(step) {
            self.color.step_size
        } else {
            0.0
        };
        (g, l)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sched: Self = serde_json::from_str(s)?;
        sched.validate()?;
        Ok(sched)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Window-gated objective γ·L_attention + λ·Σ L_color and the matching
/// coefficient-scaled gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalLoss {
    pub value: f64,
    pub attention_coef: f64,
    pub color_coef: f64,
    pub attention_value: f64,
    pub color_value: f64,
    pub grad_object: Vec<Vec<f64>>,
    pub grad_color: Vec<Vec<f64>>,
    /// One image gradient per object; the caller masks each by its object.
    pub grad_image: Vec<Vec<f64>>,
}

pub fn total_loss(
    attention: &AttentionLoss,
    colors: &[ColorLoss],
    schedule: &EditSchedule,
    step: usize,
) -> Result<TotalLoss> {
    if step == 0 || step > schedule.total_steps {
        return Err(Error::invalid(format!(
            "step {step} outside 1..={}",
            schedule.total_steps
        )));
    }
    let (g, l) = schedule.coefficients(step);
    let scale = |v: &Vec<f64>, k: f64| v.iter().map(|x| x * k).collect::<Vec<f64>>();
    let color_value: f64 = colors.iter().map(|c| c.value).sum();
    Ok(TotalLoss {
        value: g * attention.value + l * color_value,
        attention_coef: g,
        color_coef: l,
        attention_value: attention.value,
        color_value,
        grad_object: attention.grad_object.iter().map(|v| scale(v, g)).collect(),
        grad_color: attention.grad_color.iter().map(|v| scale(v, g)).collect(),
        grad_image: colors.iter().map(|c| scale(&c.grad_image, l)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn losses() -> (AttentionLoss, Vec<ColorLoss>) {
        let att = AttentionLoss {
            value: 0.5,
            terms: vec![(0.2, 0.3)],
            grad_object: vec![vec![1.0, -1.0]],
            grad_color: vec![vec![2.0, 0.0]],
        };
        let col = ColorLoss {
            value: 0.04,
            mean_rgb: [0.0; 3],
            grad_image: vec![0.5; 6],
        };
        (att, vec![col])
    }

    #[test]
    fn default_settings() {
        let s = EditSchedule::default();
        assert_eq!(s.total_steps, 50);
        assert_eq!(s.attention.step_size, 20.0);
        assert_eq!(s.attention.inner_iters, 10);
        assert_eq!(s.attention.early_stop_threshold, 0.1);
        assert_eq!(s.attention.active_until, 35);
        assert_eq!(s.color.step_size, 112.5);
        assert_eq!(s.color.inner_iters, 1);
        assert_eq!(s.color.active_from, 25);
        assert_eq!(s.driver.self_attention_layers, [4, 14]);
        s.validate().unwrap();
    }

    #[test]
    fn window_gating() {
        let s = EditSchedule::default();
        let (a, c) = losses();
        let at40 = total_loss(&a, &c, &s, 40).unwrap();
        assert_eq!(at40.attention_coef, 0.0);
        assert_eq!(at40.grad_object[0], vec![0.0, -0.0]);
        let at10 = total_loss(&a, &c, &s, 10).unwrap();
        assert_eq!(at10.color_coef, 0.0);
        assert!((at10.value - 10.0).abs() < 1e-12);
        let at30 = total_loss(&a, &c, &s, 30).unwrap();
        assert!(at30.attention_coef > 0.0 && at30.color_coef > 0.0);
        assert!((at30.value - (20.0 * 0.5 + 112.5 * 0.04)).abs() < 1e-12);
        assert!(total_loss(&a, &c, &s, 0).is_err());
        assert!(total_loss(&a, &c, &s, 51).is_err());
    }

    #[test]
    fn json_round_trip_and_partial_config() {
        let s = EditSchedule::default();
        assert_eq!(EditSchedule::from_json(&s.to_json().unwrap()).unwrap(), s);
        let partial = EditSchedule::from_json(r#"{"blend_step": 45}"#).unwrap();
        assert_eq!(partial.blend_step, Some(45));
        assert_eq!(partial.attention, s.attention);
        assert!(EditSchedule::from_json(r#"{"blend_step": 60}"#).is_err());
    }
}
