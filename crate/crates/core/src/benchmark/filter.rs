use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean ΔE_CMC of single-color generations, per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorMeasurement {
    pub color_name: String,
    pub per_model_mean_distance: BTreeMap<String, f64>,
}

/// Keeps colors whose mean distance is below `threshold` for every model.
pub fn filter_color_set(measurements: &[ColorMeasurement], threshold: f64) -> Result<Vec<String>> {
    if measurements.is_empty() {
        return Err(Error::invalid("no color measurements supplied"));
    }
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold must be positive"));
    }
    for m in measurements {
        if m.per_model_mean_distance.is_empty() {
            return Err(Error::invalid(format!(
                "{} has no model entries",
                m.color_name
            )));
        }
        if m.per_model_mean_distance.values().any(|d| !(*d >= 0.0)) {
            return Err(Error::invalid(format!(
                "{} has a negative or NaN distance",
                m.color_name
            )));
        }
    }
    Ok(measurements
        .iter()
        .filter(|m| m.per_model_mean_distance.values().all(|&d| d < threshold))
        .map(|m| m.color_name.clone())
        .collect())
}
