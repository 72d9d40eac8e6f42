use std::path::PathBuf;

use rayon::prelude::*;

use super::io::{load_bundle, load_rgb_png, masked_pixels, BundleIndex, BUNDLE_INDEX};
use super::mask::{validate_image_masks, MaskValidation};
use super::score::{invalid_score, score_object, ObjectScore, ScoreConfig};
use crate::benchmark::{BenchmarkManifest, PromptEntry};
use crate::color::SrgbColor;
use crate::error::Result;

/// Where to find generated images (`{entry id}.png`) and their masks.
#[derive(Debug, Clone)]
pub struct EvalSources {
    pub images_dir: PathBuf,
    pub masks_dir: PathBuf,
    /// Label of the generator that produced the images; first grouping key.
    pub method: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutput {
    /// Ordered by image id, then object index.
    pub scores: Vec<ObjectScore>,
}

fn score_entry(
    entry: &PromptEntry,
    sources: &EvalSources,
    index: Option<&BundleIndex>,
    cfg: &ScoreConfig,
) -> Vec<ObjectScore> {
    let bases: Vec<ObjectScore> = entry
        .slots
        .iter()
        .enumerate()
        .map(|(i, s)| ObjectScore::new(&entry.id, &sources.method, entry.pair_type, i, s.rgb))
        .collect();
    let reject_all = |reason: String| -> Vec<ObjectScore> {
        bases
            .iter()
            .cloned()
            .map(|b| invalid_score(b, reason.clone()))
            .collect()
    };

    let image_path = sources.images_dir.join(format!("{}.png", entry.id));
    if !image_path.exists() {
        return reject_all("missing image".into());
    }
    let image = match load_rgb_png(&image_path) {
        Ok(img) => img,
        Err(e) => return reject_all(format!("unreadable image: {e}")),
    };
    let bundle = match load_bundle(&sources.masks_dir, index, &entry.id, entry.slots.len()) {
        Ok(b) => b,
        Err(e) => return reject_all(format!("unreadable mask: {e}")),
    };
    if bundle
        .masks
        .iter()
        .any(|m| m.width != image.width() as usize || m.height != image.height() as usize)
    {
        return reject_all("mask dimensions differ from image".into());
    }
    if let MaskValidation::Rejected(reason) = validate_image_masks(&bundle, entry.slots.len()) {
        return reject_all(reason);
    }

    let colors: Vec<SrgbColor> = entry.slots.iter().map(|s| s.rgb).collect();
    bases
        .into_iter()
        .map(|base| {
            let i = base.object_index;
            let mask = bundle.mask(i).expect("validated bundle has every slot");
            let others: Vec<SrgbColor> = colors
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| *c)
                .collect();
            match masked_pixels(&image, mask) {
                Ok(px) => score_object(base, &px, colors[i], &others, cfg),
                Err(e) => invalid_score(base, e.to_string()),
            }
        })
        .collect()
}

/// Scores every object of every manifest entry. Per-image problems (missing
/// files, bad masks) become rejected scores; only an unreadable bundle index
/// aborts the run.
pub fn evaluate_manifest(
    manifest: &BenchmarkManifest,
    sources: &EvalSources,
    cfg: &ScoreConfig,
) -> Result<EvalOutput> {
    let index_path = sources.masks_dir.join(BUNDLE_INDEX);
    let index = if index_path.exists() {
        Some(BundleIndex::load(&index_path)?)
    } else {
        None
    };
    let mut scores: Vec<ObjectScore> = manifest
        .entries
        .par_iter()
        .flat_map_iter(|e| score_entry(e, sources, index.as_ref(), cfg))
        .collect();
    scores.sort_by(|a, b| {
        a.image_id
            .cmp(&b.image_id)
            .then(a.object_index.cmp(&b.object_index))
    });
    Ok(EvalOutput { scores })
}
