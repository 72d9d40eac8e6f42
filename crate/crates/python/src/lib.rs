//! Python bindings: color science, benchmark generation, evaluation scoring,
//! the editing kernel's losses and the toy editing run.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use compcolor::benchmark::{self, PairClass};
use compcolor::color::{self, LabColor, NameStyle, SrgbColor};
use compcolor::edit::{self, EditDriver};
use compcolor::eval::{self, ClusterSpace, ObjectMask, ObjectScore, ScoreConfig};
use compcolor::{report, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::UnknownColor { .. } => PyKeyError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn enum_arg<T: serde::de::DeserializeOwned>(name: &str, value: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(value.to_lowercase()))
        .map_err(|_| PyValueError::new_err(format!("invalid {name}: {value:?}")))
}

fn lab((l, a, b): (f64, f64, f64)) -> LabColor {
    LabColor { l, a, b }
}

fn rgb((r, g, b): (u8, u8, u8)) -> SrgbColor {
    SrgbColor::new(r, g, b)
}

#[pyfunction]
fn srgb_to_lab(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let c = color::srgb_to_lab(SrgbColor::new(r, g, b));
    (c.l, c.a, c.b)
}

/// Returns `((r, g, b), clamped)`.
#[pyfunction]
fn lab_to_srgb(l: f64, a: f64, b: f64) -> ((u8, u8, u8), bool) {
    let g = color::lab_to_srgb(LabColor { l, a, b });
    ((g.color.r, g.color.g, g.color.b), g.clamped)
}

#[pyfunction]
fn delta_e_76(a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    color::delta_e_76(lab(a), lab(b))
}

/// CMC(l:c) with `reference` as the standard.
#[pyfunction]
#[pyo3(signature = (reference, sample, l = 2.0, c = 1.0))]
fn delta_e_cmc(reference: (f64, f64, f64), sample: (f64, f64, f64), l: f64, c: f64) -> f64 {
    color::delta_e_cmc(lab(reference), lab(sample), l, c)
}

#[pyfunction]
fn lookup_color<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, color::named_color_lookup(name).map_err(py_err)?)
}

#[pyfunction]
fn final_color_set() -> Vec<String> {
    color::final_color_set()
        .iter()
        .map(|c| c.name.clone())
        .collect()
}

/// `"close"`, `"distant"` or `"neither"`.
#[pyfunction]
fn classify_pair(c1: &str, c2: &str) -> PyResult<&'static str> {
    Ok(match benchmark::classify_pair(c1, c2).map_err(py_err)? {
        PairClass::Close => "close",
        PairClass::Distant => "distant",
        PairClass::Neither => "neither",
    })
}

/// Returns `(pairs, warnings)`.
#[pyfunction]
#[pyo3(signature = (colors = None, per_type = 3))]
fn build_pairs<'py>(
    py: Python<'py>,
    colors: Option<Vec<String>>,
    per_type: usize,
) -> PyResult<(Bound<'py, PyAny>, Vec<String>)> {
    let colors = colors.unwrap_or_else(final_color_set);
    let set = benchmark::build_pairs(&colors, per_type).map_err(py_err)?;
    Ok((to_py(py, &set.pairs)?, set.warnings))
}

#[pyfunction]
fn simplify_text(text: &str) -> String {
    benchmark::simplify_text(text)
}

/// Prompt manifest over `colors` and `objects` (defaults: the shipped sets).
#[pyclass(name = "BenchmarkManifest", module = "compcolor_py")]
struct PyManifest {
    inner: benchmark::BenchmarkManifest,
}

#[pymethods]
impl PyManifest {
    #[staticmethod]
    #[pyo3(signature = (colors = None, objects = None, per_pair = 5, per_type = 3, seed = 0, mode = "pair", name_style = "concatenated"))]
    fn generate(
        colors: Option<Vec<String>>,
        objects: Option<Vec<String>>,
        per_pair: usize,
        per_type: usize,
        seed: u64,
        mode: &str,
        name_style: &str,
    ) -> PyResult<Self> {
        let colors = colors.unwrap_or_else(final_color_set);
        let objects = objects.unwrap_or_else(benchmark::shipped_objects);
        let pairs = benchmark::build_pairs(&colors, per_type).map_err(py_err)?;
        let options = benchmark::ManifestOptions {
            prompts_per_pair: per_pair,
            name_style: enum_arg::<NameStyle>("name_style", name_style)?,
        };
        let m =
            benchmark::generate_manifest(&pairs.pairs, &objects, options, seed).map_err(py_err)?;
        let inner = match mode {
            "pair" => m,
            "single" => benchmark::derive_variants(&m, benchmark::VariantMode::Single, seed)
                .map_err(py_err)?,
            "triple" => benchmark::derive_variants(&m, benchmark::VariantMode::Triple, seed)
                .map_err(py_err)?,
            other => return Err(PyValueError::new_err(format!("invalid mode: {other:?}"))),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: benchmark::BenchmarkManifest::from_json(text).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn rng_seed(&self) -> u64 {
        self.inner.rng_seed
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.provenance.warnings.clone()
    }

    fn entries<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.entries)
    }

    fn entry<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Bound<'py, PyAny>> {
        match self.inner.entry(id) {
            Some(e) => to_py(py, e),
            None => Err(PyKeyError::new_err(id.to_string())),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }
}

/// Returns `[((r, g, b), fraction), ...]` sorted by descending fraction.
#[pyfunction]
#[pyo3(signature = (pixels, k = 5, seed = 0, space = "rgb"))]
fn quantize_colors(
    pixels: Vec<(u8, u8, u8)>,
    k: usize,
    seed: u64,
    space: &str,
) -> PyResult<Vec<([f64; 3], f64)>> {
    let px: Vec<SrgbColor> = pixels.into_iter().map(rgb).collect();
    let space = enum_arg::<ClusterSpace>("space", space)?;
    let clusters = eval::quantize_colors(&px, k, seed, space).map_err(py_err)?;
    Ok(clusters
        .into_iter()
        .map(|c| (c.centroid, c.fraction))
        .collect())
}

fn mask(width: usize, height: usize, bits: Vec<bool>, index: usize) -> PyResult<ObjectMask> {
    ObjectMask::new(width, height, index, bits).map_err(py_err)
}

/// IoU of two row-major boolean masks.
#[pyfunction]
fn mask_iou(width: usize, height: usize, a: Vec<bool>, b: Vec<bool>) -> PyResult<f64> {
    eval::mask_iou(&mask(width, height, a, 0)?, &mask(width, height, b, 1)?).map_err(py_err)
}

/// `None` when the masks pass, otherwise the rejection reason.
#[pyfunction]
fn validate_masks(
    width: usize,
    height: usize,
    masks: Vec<Vec<bool>>,
    expected: usize,
) -> PyResult<Option<String>> {
    let bundle = eval::MaskBundle {
        image_id: String::new(),
        masks: masks
            .into_iter()
            .enumerate()
            .map(|(i, m)| mask(width, height, m, i))
            .collect::<PyResult<_>>()?,
        source: eval::MaskSource::default(),
    };
    Ok(match eval::validate_image_masks(&bundle, expected) {
        eval::MaskValidation::Valid => None,
        eval::MaskValidation::Rejected(r) => Some(r),
    })
}

/// Scores one object's pixels against its target color; `others` are the
/// remaining prompt colors used for the leakage distance.
#[pyfunction]
#[pyo3(signature = (pixels, target, others = Vec::new(), k = 5, min_fraction = 0.2, tau = 10.0, seed = 0, space = "rgb"))]
#[allow(clippy::too_many_arguments)]
fn score_object<'py>(
    py: Python<'py>,
    pixels: Vec<(u8, u8, u8)>,
    target: (u8, u8, u8),
    others: Vec<(u8, u8, u8)>,
    k: usize,
    min_fraction: f64,
    tau: f64,
    seed: u64,
    space: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ScoreConfig {
        k,
        min_fraction,
        tau,
        seed,
        space: enum_arg::<ClusterSpace>("space", space)?,
        ..ScoreConfig::default()
    };
    let px: Vec<SrgbColor> = pixels.into_iter().map(rgb).collect();
    let others: Vec<SrgbColor> = others.into_iter().map(rgb).collect();
    let base = ObjectScore::new("img", "python", benchmark::PairType::Single, 0, rgb(target));
    to_py(
        py,
        &eval::score_object(base, &px, rgb(target), &others, &cfg),
    )
}

fn attention(values: Vec<f64>) -> PyResult<edit::AttentionMap> {
    let n = values.len();
    edit::AttentionMap::new(1, n, values).map_err(py_err)
}

/// Returns `(value, grad_p, grad_q)` for two distributions.
#[pyfunction]
fn jsd(p: Vec<f64>, q: Vec<f64>) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let d = edit::jsd(&attention(p)?, &attention(q)?).map_err(py_err)?;
    Ok((d.value, d.grad_p, d.grad_q))
}

#[pyfunction]
fn normalize_attention(values: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(edit::normalize_attention(&attention(values)?)
        .map_err(py_err)?
        .values)
}

/// Returns `(value, mean_rgb, grad_image)`; `image` is row-major RGB in `[0, 1]`.
#[pyfunction]
fn color_loss(
    attn: Vec<f64>,
    image: Vec<f64>,
    target: (u8, u8, u8),
) -> PyResult<(f64, [f64; 3], Vec<f64>)> {
    let n = attn.len();
    let img = edit::DecodedImage::new(1, n, image).map_err(py_err)?;
    let l = edit::color_loss(&attention(attn)?, &img, rgb(target)).map_err(py_err)?;
    Ok((l.value, l.mean_rgb, l.grad_image))
}

/// Editing schedule with the default settings.
#[pyclass(name = "EditSchedule", module = "compcolor_py", from_py_object)]
#[derive(Clone)]
struct PySchedule {
    inner: edit::EditSchedule,
}

#[pymethods]
impl PySchedule {
    #[new]
    #[pyo3(signature = (json = None))]
    fn new(json: Option<&str>) -> PyResult<Self> {
        let inner = match json {
            Some(s) => edit::EditSchedule::from_json(s).map_err(py_err)?,
            None => edit::EditSchedule::default(),
        };
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    /// `(attention coefficient, color coefficient)` at `step`.
    fn coefficients(&self, step: usize) -> (f64, f64) {
        self.inner.coefficients(step)
    }

    #[getter]
    fn total_steps(&self) -> usize {
        self.inner.total_steps
    }

    #[getter]
    fn blend_step(&self) -> Option<usize> {
        self.inner.blend_step
    }
}

/// Runs the schedule on the toy driver; returns a dict with the initial and
/// final attention loss, final mean colors and the loss trace rows.
#[pyfunction]
#[pyo3(signature = (targets = None, seed = 0, schedule = None))]
fn run_toy_edit<'py>(
    py: Python<'py>,
    targets: Option<Vec<String>>,
    seed: u64,
    schedule: Option<PySchedule>,
) -> PyResult<Bound<'py, PyAny>> {
    let names =
        targets.unwrap_or_else(|| edit::TOY_TARGETS.iter().map(|s| s.to_string()).collect());
    let colors: Vec<SrgbColor> = names
        .iter()
        .map(|n| color::named_color_lookup(n).map(|c| c.rgb))
        .collect::<Result<_, _>>()
        .map_err(py_err)?;
    let driver = edit::ToyDriver::new(edit::ToyConfig {
        seed,
        ..Default::default()
    })
    .map_err(py_err)?;
    if colors.len() != driver.num_objects() {
        return Err(PyValueError::new_err(format!(
            "need {} targets",
            driver.num_objects()
        )));
    }
    let schedule = schedule.map(|s| s.inner).unwrap_or_default();
    let out = edit::run_edit_schedule(
        &driver,
        &schedule,
        &driver.pseudo_ground_truth(),
        &colors,
        &driver.masks("toy"),
    )
    .map_err(py_err)?;
    let summary = serde_json::json!({
        "initial_attention": out.initial.attention,
        "final_attention": out.final_state.attention,
        "final_mean_rgb": out.final_state.mean_rgb,
        "trace": out.trace.rows,
    });
    json_to_py(py, &summary)
}

/// Two-decimal round-half-up rendering used in report tables.
#[pyfunction]
#[pyo3(signature = (value, decimals = 2))]
fn format_fixed(value: f64, decimals: usize) -> String {
    report::format_fixed(value, decimals)
}

/// `LAB\RGB\ACC` summary cell.
#[pyfunction]
fn format_cell(lab: f64, rgb: f64, acc: f64) -> String {
    let key = eval::GroupKey::new("m", benchmark::PairType::Single);
    report::format_cell(&eval::SummaryRow::new(key, lab, rgb, acc))
}

#[pymodule]
pub fn compcolor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyManifest>()?;
    m.add_class::<PySchedule>()?;
    m.add_function(wrap_pyfunction!(srgb_to_lab, m)?)?;
    m.add_function(wrap_pyfunction!(lab_to_srgb, m)?)?;
    m.add_function(wrap_pyfunction!(delta_e_76, m)?)?;
    m.add_function(wrap_pyfunction!(delta_e_cmc, m)?)?;
    m.add_function(wrap_pyfunction!(lookup_color, m)?)?;
    m.add_function(wrap_pyfunction!(final_color_set, m)?)?;
    m.add_function(wrap_pyfunction!(classify_pair, m)?)?;
    m.add_function(wrap_pyfunction!(build_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(simplify_text, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_colors, m)?)?;
    m.add_function(wrap_pyfunction!(mask_iou, m)?)?;
    m.add_function(wrap_pyfunction!(validate_masks, m)?)?;
    m.add_function(wrap_pyfunction!(score_object, m)?)?;
    m.add_function(wrap_pyfunction!(jsd, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_attention, m)?)?;
    m.add_function(wrap_pyfunction!(color_loss, m)?)?;
    m.add_function(wrap_pyfunction!(run_toy_edit, m)?)?;
    m.add_function(wrap_pyfunction!(format_fixed, m)?)?;
    m.add_function(wrap_pyfunction!(format_cell, m)?)?;
    Ok(())
}
