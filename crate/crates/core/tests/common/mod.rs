#![allow(dead_code)]

use std::path::Path;

use compcolor::benchmark::{
    generate_manifest, BenchmarkManifest, ColorPairSpec, ManifestOptions, PairType,
};
use compcolor::color::{delta_e_76, named_color_lookup, srgb_to_lab, SrgbColor};
use compcolor::eval::io::{save_rgb_png, write_mask_bundle, BundleIndex, BUNDLE_INDEX};
use compcolor::eval::{MaskBundle, MaskSource, ObjectMask};
use image::{Rgb, RgbImage};

pub const SIDE: u32 = 128;
/// Half-open `(x0, y0, x1, y1)` rectangles of the two fixture objects.
pub const RECTS: [[u32; 4]; 2] = [[8, 32, 56, 96], [72, 32, 120, 96]];
pub const BACKGROUND: SrgbColor = SrgbColor::new(255, 255, 255);

pub fn render_two_rect(left: SrgbColor, right: SrgbColor) -> RgbImage {
    RgbImage::from_fn(SIDE, SIDE, |x, y| {
        let inside = |r: &[u32; 4]| (r[0]..r[2]).contains(&x) && (r[1]..r[3]).contains(&y);
        let c = if inside(&RECTS[0]) {
            left
        } else if inside(&RECTS[1]) {
            right
        } else {
            BACKGROUND
        };
        Rgb(c.channels())
    })
}

pub fn rect_masks(image_id: &str) -> MaskBundle {
    let s = SIDE as usize;
    MaskBundle {
        image_id: image_id.to_string(),
        masks: RECTS
            .iter()
            .enumerate()
            .map(|(i, r)| {
                ObjectMask::rect(
                    s,
                    s,
                    i,
                    r[0] as usize,
                    r[1] as usize,
                    r[2] as usize,
                    r[3] as usize,
                )
            })
            .collect(),
        source: MaskSource::ExternalSegmenter,
    }
}

pub fn pair_spec(main: &str, partner: &str) -> ColorPairSpec {
    let a = named_color_lookup(main).unwrap();
    let b = named_color_lookup(partner).unwrap();
    ColorPairSpec {
        main: a.name.clone(),
        partner: b.name.clone(),
        pair_type: PairType::Distant,
        delta_e_ab: delta_e_76(srgb_to_lab(a.rgb), srgb_to_lab(b.rgb)),
    }
}

/// One-entry manifest for `(main, partner)` on two fixed objects.
pub fn fixture_manifest(main: &str, partner: &str) -> BenchmarkManifest {
    let objects = vec!["chair".to_string(), "backpack".to_string()];
    let options = ManifestOptions {
        prompts_per_pair: 1,
        ..ManifestOptions::default()
    };
    generate_manifest(&[pair_spec(main, partner)], &objects, options, 1).unwrap()
}

/// Writes `manifest.json`, one image per entry and its masks (with index) under `dir`.
/// With `swap`, each image paints the two prompt colors on the wrong objects.
pub fn write_fixture(dir: &Path, manifest: &BenchmarkManifest, swap: bool) {
    let images = dir.join("images");
    let masks = dir.join("masks");
    std::fs::create_dir_all(&images).unwrap();
    let mut index = BundleIndex::default();
    for e in &manifest.entries {
        let (a, b) = (e.slots[0].rgb, e.slots[1].rgb);
        let img = if swap {
            render_two_rect(b, a)
        } else {
            render_two_rect(a, b)
        };
        save_rgb_png(&img, &images.join(format!("{}.png", e.id))).unwrap();
        let bundle = rect_masks(&e.id);
        write_mask_bundle(&bundle, &masks).unwrap();
        index.insert(&bundle);
    }
    index.save(&masks.join(BUNDLE_INDEX)).unwrap();
    manifest.write(&dir.join("manifest.json")).unwrap();
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Squared-error objective of the best partition of `points` into at most
/// `k` groups, by enumerating restricted growth strings.
pub fn exhaustive_kmeans_optimum(points: &[[f64; 3]], k: usize) -> f64 {
    fn sse(points: &[[f64; 3]], labels: &[usize], groups: usize) -> f64 {
        let mut sum = vec![[0.0; 3]; groups];
        let mut count = vec![0usize; groups];
        for (p, &l) in points.iter().zip(labels) {
            count[l] += 1;
            for c in 0..3 {
                sum[l][c] += p[c];
            }
        }
        points
            .iter()
            .zip(labels)
            .map(|(p, &l)| {
                (0..3)
                    .map(|c| (p[c] - sum[l][c] / count[l] as f64).powi(2))
                    .sum::<f64>()
            })
            .sum()
    }
    fn walk(points: &[[f64; 3]], k: usize, labels: &mut Vec<usize>, used: usize, best: &mut f64) {
        if labels.len() == points.len() {
            *best = best.min(sse(points, labels, used));
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels.push(l);
            walk(points, k, labels, used.max(l + 1), best);
            labels.pop();
        }
    }
    let mut best = f64::INFINITY;
    walk(
        points,
        k,
        &mut Vec::with_capacity(points.len()),
        0,
        &mut best,
    );
    best
}

/// Objective of fitted centroids: each point to its nearest centroid.
pub fn centroid_objective(points: &[[f64; 3]], centroids: &[[f64; 3]]) -> f64 {
    points
        .iter()
        .map(|p| {
            centroids
                .iter()
                .map(|c| (0..3).map(|i| (p[i] - c[i]).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}
