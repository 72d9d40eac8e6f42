//! File formats: RGB PNG images, grayscale mask PNGs, the mask-bundle index,
//! JSON-lines scores and the summary CSV.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma, RgbImage};
use serde::{Deserialize, Serialize};

use super::aggregate::{GroupKey, SummaryRow};
use super::mask::{MaskBundle, MaskSource, ObjectMask};
use super::score::ObjectScore;
use crate::color::SrgbColor;
use crate::error::{Error, Result};

/// Name of the bundle index inside a masks directory.
pub const BUNDLE_INDEX: &str = "masks.json";
pub const SUMMARY_COLUMNS: [&str; 6] = [
    "group",
    "mean_lab",
    "mean_rgb",
    "acc",
    "n_valid",
    "n_rejected",
];

pub fn mask_file_name(image_id: &str, object_index: usize) -> String {
    format!("{image_id}.obj{object_index}.png")
}

pub fn load_rgb_png(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(img.to_rgb8())
}

pub fn save_rgb_png(img: &RgbImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Pixels of `img` under `mask`, in raster order.
pub fn masked_pixels(img: &RgbImage, mask: &ObjectMask) -> Result<Vec<SrgbColor>> {
    if img.width() as usize != mask.width || img.height() as usize != mask.height {
        return Err(Error::ShapeMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.width,
            mask.height,
            img.width(),
            img.height()
        )));
    }
    Ok(img
        .pixels()
        .zip(mask.bits())
        .filter(|(_, on)| **on)
        .map(|(p, _)| SrgbColor::new(p[0], p[1], p[2]))
        .collect())
}

/// Foreground is any gray value above 127.
pub fn load_mask_png(path: &Path, object_index: usize) -> Result<ObjectMask> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let gray = img.to_luma8();
    let bits = gray.pixels().map(|p| p[0] > 127).collect();
    ObjectMask::new(
        gray.width() as usize,
        gray.height() as usize,
        object_index,
        bits,
    )
}

/// Writes foreground as 255 and background as 0.
pub fn save_mask_png(mask: &ObjectMask, path: &Path) -> Result<()> {
    let img = GrayImage::from_fn(mask.width as u32, mask.height as u32, |x, y| {
        Luma([if mask.get(x as usize, y as usize) {
            255
        } else {
            0
        }])
    });
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskFile {
    pub file: String,
    pub object_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleEntry {
    #[serde(default)]
    pub source: MaskSource,
    /// Segmenter produced no masks for this image.
    #[serde(default)]
    pub empty: bool,
    pub masks: Vec<MaskFile>,
}

/// `masks.json`: image id -> mask files and their prompt slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleIndex {
    pub version: String,
    pub images: BTreeMap<String, BundleEntry>,
}

impl Default for BundleIndex {
    fn default() -> Self {
        Self {
            version: "1".to_string(),
            images: BTreeMap::new(),
        }
    }
}

impl BundleIndex {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(self)?)?;
        s.push('\n');
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    /// Registers masks written with [`write_mask_bundle`].
    pub fn insert(&mut self, bundle: &MaskBundle) {
        self.images.insert(
            bundle.image_id.clone(),
            BundleEntry {
                source: bundle.source,
                empty: bundle.masks.is_empty(),
                masks: bundle
                    .masks
                    .iter()
                    .map(|m| MaskFile {
                        file: mask_file_name(&bundle.image_id, m.object_index),
                        object_index: m.object_index,
                    })
                    .collect(),
            },
        );
    }
}

/// Writes every mask of `bundle` as `{image_id}.obj{index}.png` under `dir`.
pub fn write_mask_bundle(bundle: &MaskBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    bundle
        .masks
        .iter()
        .map(|m| {
            let path = dir.join(mask_file_name(&bundle.image_id, m.object_index));
            save_mask_png(m, &path)?;
            Ok(path)
        })
        .collect()
}

/// Loads the masks of one image. Files that do not exist are left out so the
/// bundle fails validation instead of aborting the run; unreadable files are
/// errors.
pub fn load_bundle(
    dir: &Path,
    index: Option<&BundleIndex>,
    image_id: &str,
    expected: usize,
) -> Result<MaskBundle> {
    let (source, files): (MaskSource, Vec<MaskFile>) =
        match index.and_then(|i| i.images.get(image_id)) {
            Some(entry) => (entry.source, entry.masks.clone()),
            None if index.is_some() => (MaskSource::ExternalSegmenter, Vec::new()),
            None => (
                MaskSource::ExternalSegmenter,
                (0..expected)
                    .map(|i| MaskFile {
                        file: mask_file_name(image_id, i),
                        object_index: i,
                    })
                    .collect(),
            ),
        };
    let mut masks = Vec::new();
    for f in files {
        let path = dir.join(&f.file);
        if path.exists() {
            masks.push(load_mask_png(&path, f.object_index)?);
        }
    }
    Ok(MaskBundle {
        image_id: image_id.to_string(),
        masks,
        source,
    })
}

pub fn write_scores_jsonl(scores: &[ObjectScore], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in scores {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scores_jsonl(path: &Path) -> Result<Vec<ObjectScore>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            detail: format!("line {}: {e}", n + 1),
        })?);
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.key.to_string(),
            fmt_opt(r.mean_lab),
            fmt_opt(r.mean_rgb),
            fmt_opt(r.acc_rate),
            r.n_valid.to_string(),
            r.n_rejected.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn summary_from_csv(text: &str, origin: &Path) -> Result<Vec<SummaryRow>> {
    let schema = |detail: String| Error::Schema {
        path: origin.to_path_buf(),
        detail,
    };
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != SUMMARY_COLUMNS {
        return Err(schema(format!(
            "expected columns {SUMMARY_COLUMNS:?}, found {headers:?}"
        )));
    }
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| schema(format!("bad number `{s}`")))
        }
    };
    let count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| schema(format!("bad count `{s}`")))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let key =
            GroupKey::parse(&rec[0]).ok_or_else(|| schema(format!("bad group `{}`", &rec[0])))?;
        rows.push(SummaryRow {
            key,
            mean_lab: opt(&rec[1])?,
            mean_rgb: opt(&rec[2])?,
            acc_rate: opt(&rec[3])?,
            n_valid: count(&rec[4])?,
            n_rejected: count(&rec[5])?,
        });
    }
    Ok(rows)
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    std::fs::write(path, summary_to_csv(rows)?).map_err(|e| Error::io(path, e))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    summary_from_csv(&text, path)
}
