use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor added to every cell before normalizing, so logs stay finite.
pub const NORMALIZE_EPS: f64 = 1e-12;

/// Nonnegative spatial map for one token, row-major `height x width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionMap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
    /// Entries sum to one.
    pub normalized: bool,
}

impl AttentionMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "attention map has {} cells, expected {height}x{width}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(
                "attention entries must be finite and nonnegative",
            ));
        }
        let sum: f64 = values.iter().sum();
        Ok(Self {
            height,
            width,
            values,
            normalized: (sum - 1.0).abs() <= 1e-9,
        })
    }

    pub fn uniform(height: usize, width: usize) -> Self {
        let n = height * width;
        Self {
            height,
            width,
            values: vec![1.0 / n as f64; n],
            normalized: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    fn same_shape(&self, other: &AttentionMap) -> bool {
        self.height == other.height && self.width == other.width
    }
}

pub fn normalize_attention(raw: &AttentionMap) -> Result<AttentionMap> {
    if raw.values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("attention entries must be nonnegative"));
    }
    let total: f64 = raw.values.iter().map(|v| v + NORMALIZE_EPS).sum();
    Ok(AttentionMap {
        height: raw.height,
        width: raw.width,
        values: raw
            .values
            .iter()
            .map(|v| (v + NORMALIZE_EPS) / total)
            .collect(),
        normalized: true,
    })
}

/// Jensen-Shannon divergence (natural log) and its partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Jsd {
    pub value: f64,
    pub grad_p: Vec<f64>,
    pub grad_q: Vec<f64>,
}

fn xlogy_ratio(x: f64, m: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / m).ln()
    }
}

fn check_distribution(m: &AttentionMap, which: &str) -> Result<()> {
    let s = m.sum();
    if (s - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "{which} is not normalized (sum {s})"
        )));
    }
    Ok(())
}

/// JSD(p, q) = ½ KL(p‖m) + ½ KL(q‖m), m = (p+q)/2, with 0·ln 0 = 0.
///
/// ∂/∂p_i = ½ ln(p_i / m_i). Zero entries use [`NORMALIZE_EPS`] in place of
/// the zero so the gradient stays finite.
pub fn jsd(p: &AttentionMap, q: &AttentionMap) -> Result<Jsd> {
    if !p.same_shape(q) {
        return Err(Error::ShapeMismatch(
            "JSD of differently shaped maps".into(),
        ));
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    let n = p.len();
    let mut value = 0.0;
    let mut grad_p = Vec::with_capacity(n);
    let mut grad_q = Vec::with_capacity(n);
    for (&pi, &qi) in p.values.iter().zip(&q.values) {
        let m = 0.5 * (pi + qi);
        value += 0.5 * (xlogy_ratio(pi, m) + xlogy_ratio(qi, m));
        let (pf, qf) = (pi.max(NORMALIZE_EPS), qi.max(NORMALIZE_EPS));
        let mf = 0.5 * (pf + qf);
        grad_p.push(0.5 * (pf / mf).ln());
        grad_q.push(0.5 * (qf / mf).ln());
    }
    Ok(Jsd {
        value: value.max(0.0),
        grad_p,
        grad_q,
    })
}

/// Stroop-style binding loss and gradients w.r.t. the full-prompt maps.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionLoss {
    pub value: f64,
    /// `(JSD(simp_i, obj_i), JSD(simp_i, color_i))` per object.
    pub terms: Vec<(f64, f64)>,
    pub grad_object: Vec<Vec<f64>>,
    pub grad_color: Vec<Vec<f64>>,
}

/// Σ_i JSD(simp_i, obj_i) + JSD(simp_i, color_i). The simplified-prompt maps
/// are fixed targets, so no gradient flows to them.
pub fn attention_loss(
    simp_object: &[AttentionMap],
    full_object: &[AttentionMap],
    full_color: &[AttentionMap],
) -> Result<AttentionLoss> {
    if simp_object.len() != full_object.len() || simp_object.len() != full_color.len() {
        return Err(Error::ShapeMismatch(format!(
            "object counts differ: {} pseudo-GT, {} object, {} color maps",
            simp_object.len(),
            full_object.len(),
            full_color.len()
        )));
    }
    let mut out = AttentionLoss {
        value: 0.0,
        terms: Vec::with_capacity(simp_object.len()),
        grad_object: Vec::with_capacity(simp_object.len()),
        grad_color: Vec::with_capacity(simp_object.len()),
    };
    for ((gt, obj), col) in simp_object.iter().zip(full_object).zip(full_color) {
        let a = jsd(gt, obj)?;
        let b = jsd(gt, col)?;
        out.value += a.value + b.value;
        out.terms.push((a.value, b.value));
        out.grad_object.push(a.grad_q);
        out.grad_color.push(b.grad_q);
    }
    Ok(out)
}
