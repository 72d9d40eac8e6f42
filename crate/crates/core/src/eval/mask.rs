use serde::{Deserialize, Serialize};

use super::MAX_MASK_IOU;
use crate::error::{Error, Result};

/// Binary foreground mask for one prompt slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectMask {
    pub width: usize,
    pub height: usize,
    pub object_index: usize,
    bits: Vec<bool>,
    /// Set when an empty mask is intentional (e.g. segmenter found nothing).
    pub flagged_empty: bool,
}

impl ObjectMask {
    pub fn new(width: usize, height: usize, object_index: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "mask has {} pixels, expected {width}x{height}",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            object_index,
            bits,
            flagged_empty: false,
        })
    }

    pub fn empty(width: usize, height: usize, object_index: usize) -> Self {
        Self {
            width,
            height,
            object_index,
            bits: vec![false; width * height],
            flagged_empty: true,
        }
    }

    pub fn full(width: usize, height: usize, object_index: usize) -> Self {
        Self {
            width,
            height,
            object_index,
            bits: vec![true; width * height],
            flagged_empty: false,
        }
    }

    /// Axis-aligned rectangle `[x0, x1) x [y0, y1)`.
    pub fn rect(
        width: usize,
        height: usize,
        object_index: usize,
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
    ) -> Self {
        let bits = (0..width * height)
            .map(|i| {
                let (x, y) = (i % width, i / width);
                (x0..x1).contains(&x) && (y0..y1).contains(&y)
            })
            .collect();
        Self {
            width,
            height,
            object_index,
            bits,
            flagged_empty: false,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn same_shape(&self, other: &ObjectMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn union(&self, other: &ObjectMask) -> Result<ObjectMask> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch(
                "mask union needs equal dimensions".into(),
            ));
        }
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| *a || *b)
            .collect();
        ObjectMask::new(self.width, self.height, self.object_index, bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskSource {
    #[default]
    ExternalSegmenter,
    AttentionDerived,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskBundle {
    pub image_id: String,
    pub masks: Vec<ObjectMask>,
    pub source: MaskSource,
}

impl MaskBundle {
    pub fn mask(&self, object_index: usize) -> Option<&ObjectMask> {
        self.masks.iter().find(|m| m.object_index == object_index)
    }

    /// Union of all masks (the foreground used for latent blending).
    pub fn foreground(&self) -> Option<ObjectMask> {
        let mut it = self.masks.iter();
        let first = it.next()?.clone();
        it.try_fold(first, |acc, m| acc.union(m)).ok()
    }
}

pub fn mask_iou(a: &ObjectMask, b: &ObjectMask) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "IoU of {}x{} and {}x{} masks",
            a.width, a.height, b.width, b.height
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.bits.iter().zip(&b.bits) {
        inter += (*x && *y) as usize;
        union += (*x || *y) as usize;
    }
    Ok(if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskValidation {
    Valid,
    Rejected(String),
}

impl MaskValidation {
    pub fn is_valid(&self) -> bool {
        matches!(self, MaskValidation::Valid)
    }
}

/// Rejects bundles with a missing or empty mask, duplicate slots, mismatched
/// dimensions, or any pair of masks overlapping with IoU > 0.5.
pub fn validate_image_masks(bundle: &MaskBundle, expected_objects: usize) -> MaskValidation {
    let mut seen = vec![false; expected_objects];
    for m in &bundle.masks {
        match seen.get_mut(m.object_index) {
            Some(s) if *s => {
                return MaskValidation::Rejected(format!(
                    "duplicate mask for object {}",
                    m.object_index
                ))
            }
            Some(s) => *s = true,
            None => {
                return MaskValidation::Rejected(format!(
                    "mask for unexpected object {}",
                    m.object_index
                ))
            }
        }
    }
    if bundle.masks.len() != expected_objects {
        return MaskValidation::Rejected("missing object mask".into());
    }
    if let Some(m) = bundle.masks.iter().find(|m| m.is_empty()) {
        return MaskValidation::Rejected(format!("empty mask for object {}", m.object_index));
    }
    for (i, a) in bundle.masks.iter().enumerate() {
        for b in &bundle.masks[i + 1..] {
            match mask_iou(a, b) {
                Ok(iou) if iou > MAX_MASK_IOU => {
                    return MaskValidation::Rejected(format!("IOU larger than 0.5 ({iou:.3})"));
                }
                Ok(_) => {}
                Err(_) => return MaskValidation::Rejected("mask dimensions differ".into()),
            }
        }
    }
    MaskValidation::Valid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_str(rows: &[&str], idx: usize) -> ObjectMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '#'))
            .collect();
        ObjectMask::new(w, h, idx, bits).unwrap()
    }

    #[test]
    fn iou_cases() {
        let a = from_str(&["##..", "##.."], 0);
        assert_eq!(mask_iou(&a, &a).unwrap(), 1.0);
        let b = from_str(&["..##", "..##"], 1);
        assert_eq!(mask_iou(&a, &b).unwrap(), 0.0);
        // Three shared pixels out of five covered.
        let c = from_str(&["###.", "#..."], 0);
        let d = from_str(&["###.", ".#.."], 1);
        assert!((mask_iou(&c, &d).unwrap() - 0.6).abs() < 1e-15);
        let e = ObjectMask::empty(4, 2, 0);
        assert_eq!(mask_iou(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn iou_shape_mismatch() {
        assert!(mask_iou(&ObjectMask::full(2, 2, 0), &ObjectMask::full(3, 2, 1)).is_err());
    }

    fn bundle(masks: Vec<ObjectMask>) -> MaskBundle {
        MaskBundle {
            image_id: "img".into(),
            masks,
            source: MaskSource::ExternalSegmenter,
        }
    }

    #[test]
    fn validation_rules() {
        let a = from_str(&["##..", "##.."], 0);
        let b = from_str(&["..##", "..##"], 1);
        assert_eq!(
            validate_image_masks(&bundle(vec![a.clone()]), 2),
            MaskValidation::Rejected("missing object mask".into())
        );
        let mut dup = a.clone();
        dup.object_index = 1;
        match validate_image_masks(&bundle(vec![a.clone(), dup]), 2) {
            MaskValidation::Rejected(r) => assert!(r.starts_with("IOU larger than 0.5"), "{r}"),
            v => panic!("{v:?}"),
        }
        assert!(validate_image_masks(&bundle(vec![a.clone(), b]), 2).is_valid());
        let empty = ObjectMask::empty(4, 2, 1);
        assert!(!validate_image_masks(&bundle(vec![a, empty]), 2).is_valid());
    }

    #[test]
    fn iou_exactly_half_is_accepted() {
        // |A∩B| = 2, |A∪B| = 4.
        let a = from_str(&["###.", "...."], 0);
        let b = from_str(&[".###", "...."], 1);
        assert_eq!(mask_iou(&a, &b).unwrap(), 0.5);
        assert!(validate_image_masks(&bundle(vec![a, b]), 2).is_valid());
    }

    #[test]
    fn foreground_is_union() {
        let a = from_str(&["#...", "...."], 0);
        let b = from_str(&["...#", "...."], 1);
        let fg = bundle(vec![a, b]).foreground().unwrap();
        assert_eq!(fg.count(), 2);
    }
}
