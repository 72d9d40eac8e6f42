use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::pairs::{classify_pair, ColorPairSpec, PairClass, PairType};
use super::prompt::{pair_prompt, simplify_text, single_prompt, triple_prompt};
use crate::color::{named_color_lookup, render_name, NameStyle, SrgbColor};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const MANIFEST_VERSION: &str = "1";

/// The 19 benchmark objects in canonical order.
pub fn shipped_objects() -> Vec<String> {
    serde_json::from_str(include_str!("../../data/objects.json"))
        .expect("bundled object list is valid JSON")
}

/// One object-color binding inside a prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub object_noun: String,
    /// Canonical CamelCase color name.
    pub color_name: String,
    pub rgb: SrgbColor,
    pub base_color_token: String,
}

impl Slot {
    pub fn new(object: &str, color: &str) -> Result<Self> {
        let named = named_color_lookup(color)?;
        Ok(Self {
            object_noun: object.to_string(),
            color_name: named.name.clone(),
            rgb: named.rgb,
            base_color_token: named.base_name.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptEntry {
    pub id: String,
    pub text: String,
    pub simplified_text: String,
    pub slots: Vec<Slot>,
    pub pair_type: PairType,
    pub seed: u64,
}

impl PromptEntry {
    fn render(
        id: String,
        slots: Vec<Slot>,
        pair_type: PairType,
        seed: u64,
        style: NameStyle,
    ) -> Self {
        let c = |i: usize| render_name(&slots[i].color_name, style);
        let o = |i: usize| slots[i].object_noun.as_str();
        let text = match slots.len() {
            1 => single_prompt(&c(0), o(0)),
            2 => pair_prompt(&c(0), o(0), &c(1), o(1)),
            3 => triple_prompt(&c(0), o(0), &c(1), o(1), &c(2), o(2)),
            n => unreachable!("prompt entries carry 1..=3 slots, got {n}"),
        };
        let simplified_text = simplify_text(&text);
        Self {
            id,
            text,
            simplified_text,
            slots,
            pair_type,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Distinct colors used, sorted.
    pub colors: Vec<String>,
    pub objects: Vec<String>,
    pub color_set_sha256: String,
    pub object_set_sha256: String,
    pub name_style: NameStyle,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub version: String,
    pub rng_seed: u64,
    pub entries: Vec<PromptEntry>,
    pub provenance: Provenance,
}

impl BenchmarkManifest {
    /// Canonical encoding: pretty JSON, sorted keys, trailing newline.
    pub fn to_json(&self) -> Result<String> {
        // `Value` objects are BTreeMap-backed, which sorts keys.
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        manifest.validate().map_err(|detail| Error::Schema {
            path: path.to_path_buf(),
            detail,
        })?;
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut ids = HashSet::new();
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return Err(format!("duplicate entry id {}", e.id));
            }
            if !(1..=3).contains(&e.slots.len()) {
                return Err(format!("entry {} has {} slots", e.id, e.slots.len()));
            }
        }
        Ok(())
    }

    pub fn entry(&self, id: &str) -> Option<&PromptEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManifestOptions {
    pub prompts_per_pair: usize,
    pub name_style: NameStyle,
}

impl Default for ManifestOptions {
    fn default() -> Self {
        Self {
            prompts_per_pair: 5,
            name_style: NameStyle::Concatenated,
        }
    }
}

fn set_hash<S: AsRef<str>>(items: &[S]) -> String {
    let mut h = Sha256::new();
    for item in items {
        h.update(item.as_ref().as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn draw_seed(rng: &mut SplitMix64) -> u64 {
    // 32 bits keeps seeds exact in any JSON reader.
    rng.next_u64() >> 32
}

/// Samples an ordered pair of distinct object indices.
fn sample_two(rng: &mut SplitMix64, n: usize) -> (usize, usize) {
    let a = rng.index(n);
    let mut b = rng.index(n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Renders `prompts_per_pair` prompts for each pair, sampling two distinct
/// objects per prompt. Object pairs do not repeat within one color pair
/// unless the object list is too small to avoid it.
pub fn generate_manifest(
    pairs: &[ColorPairSpec],
    objects: &[String],
    options: ManifestOptions,
    seed: u64,
) -> Result<BenchmarkManifest> {
    if objects.len() < 2 {
        return Err(Error::invalid(
            "need at least two objects to build pair prompts",
        ));
    }
    if options.prompts_per_pair == 0 {
        return Err(Error::invalid("prompts_per_pair must be at least 1"));
    }
    let distinct: BTreeSet<&str> = objects.iter().map(String::as_str).collect();
    if distinct.len() != objects.len() {
        return Err(Error::invalid("object list contains duplicates"));
    }
    let n = objects.len();
    let mut rng = SplitMix64::new(seed);
    let mut entries = Vec::with_capacity(pairs.len() * options.prompts_per_pair);
    let mut colors = BTreeSet::new();
    for spec in pairs {
        let mut used = HashSet::new();
        for k in 0..options.prompts_per_pair {
            let (a, b) = loop {
                let pick = sample_two(&mut rng, n);
                if used.len() >= n * (n - 1) || used.insert(pick) {
                    break pick;
                }
            };
            let slots = vec![
                Slot::new(&objects[a], &spec.main)?,
                Slot::new(&objects[b], &spec.partner)?,
            ];
            colors.insert(slots[0].color_name.clone());
            colors.insert(slots[1].color_name.clone());
            let id = format!("{}_{}_{k}", slots[0].color_name, slots[1].color_name);
            let entry_seed = draw_seed(&mut rng);
            entries.push(PromptEntry::render(
                id,
                slots,
                spec.pair_type,
                entry_seed,
                options.name_style,
            ));
        }
    }
    let colors: Vec<String> = colors.into_iter().collect();
    let manifest = BenchmarkManifest {
        version: MANIFEST_VERSION.to_string(),
        rng_seed: seed,
        entries,
        provenance: Provenance {
            color_set_sha256: set_hash(&colors),
            object_set_sha256: set_hash(objects),
            colors,
            objects: objects.to_vec(),
            name_style: options.name_style,
            warnings: Vec::new(),
        },
    };
    manifest.validate().map_err(Error::InvalidArgument)?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantMode {
    Single,
    Triple,
}

/// Derives single-object prompts (slot 1 only) or three-object prompts (a
/// third color distant from both existing colors, on a third distinct object).
pub fn derive_variants(
    manifest: &BenchmarkManifest,
    mode: VariantMode,
    seed: u64,
) -> Result<BenchmarkManifest> {
    let style = manifest.provenance.name_style;
    let mut rng = SplitMix64::new(seed);
    let mut warnings = manifest.provenance.warnings.clone();
    let mut entries = Vec::new();
    for e in &manifest.entries {
        match mode {
            VariantMode::Single => {
                if e.pair_type == PairType::Single {
                    entries.push(e.clone());
                    continue;
                }
                let id = format!("{}_single", e.id);
                entries.push(PromptEntry::render(
                    id,
                    vec![e.slots[0].clone()],
                    PairType::Single,
                    e.seed,
                    style,
                ));
            }
            VariantMode::Triple => {
                if e.slots.len() != 2 {
                    warnings.push(format!("{}: triple variants need a pair entry", e.id));
                    continue;
                }
                let mut candidates = Vec::new();
                for c in &manifest.provenance.colors {
                    if classify_pair(c, &e.slots[0].color_name)? == PairClass::Distant
                        && classify_pair(c, &e.slots[1].color_name)? == PairClass::Distant
                    {
                        candidates.push(c.as_str());
                    }
                }
                let objects: Vec<&String> = manifest
                    .provenance
                    .objects
                    .iter()
                    .filter(|o| **o != e.slots[0].object_noun && **o != e.slots[1].object_noun)
                    .collect();
                if candidates.is_empty() || objects.is_empty() {
                    warnings.push(format!(
                        "{}: no distant third color or free object; skipped",
                        e.id
                    ));
                    continue;
                }
                let color = candidates[rng.index(candidates.len())];
                let object = objects[rng.index(objects.len())];
                let mut slots = e.slots.clone();
                slots.push(Slot::new(object, color)?);
                let entry_seed = draw_seed(&mut rng);
                entries.push(PromptEntry::render(
                    format!("{}_triple", e.id),
                    slots,
                    PairType::Triple,
                    entry_seed,
                    style,
                ));
            }
        }
    }
    let derived = BenchmarkManifest {
        version: manifest.version.clone(),
        rng_seed: manifest.rng_seed,
        entries,
        provenance: Provenance {
            warnings,
            ..manifest.provenance.clone()
        },
    };
    derived.validate().map_err(Error::InvalidArgument)?;
    Ok(derived)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skyblue_hotpink() -> ColorPairSpec {
        ColorPairSpec {
            main: "SkyBlue".into(),
            partner: "HotPink".into(),
            pair_type: PairType::Distant,
            delta_e_ab: 81.0,
        }
    }

    #[test]
    fn template_and_simplified_text() {
        let m = generate_manifest(
            &[skyblue_hotpink()],
            &shipped_objects(),
            ManifestOptions::default(),
            1,
        )
        .unwrap();
        assert_eq!(m.entries.len(), 5);
        for e in &m.entries {
            let (o1, o2) = (&e.slots[0].object_noun, &e.slots[1].object_noun);
            assert_ne!(o1, o2);
            assert_eq!(
                e.text,
                format!("a skyblue colored {o1} and a hotpink colored {o2}.")
            );
            assert_eq!(e.simplified_text, format!("a {o1} and a {o2}."));
            assert_eq!(e.slots[1].base_color_token, "pink");
        }
        let pairs: HashSet<_> = m
            .entries
            .iter()
            .map(|e| (&e.slots[0].object_noun, &e.slots[1].object_noun))
            .collect();
        assert_eq!(pairs.len(), 5);
    }

    #[test]
    fn too_few_objects() {
        let r = generate_manifest(
            &[skyblue_hotpink()],
            &["chair".to_string()],
            ManifestOptions::default(),
            1,
        );
        assert!(r.is_err());
    }

    #[test]
    fn hyphenated_style() {
        let opts = ManifestOptions {
            name_style: NameStyle::Hyphenated,
            ..Default::default()
        };
        let m = generate_manifest(&[skyblue_hotpink()], &shipped_objects(), opts, 1).unwrap();
        assert!(m.entries[0].text.starts_with("a sky-blue colored "));
        assert!(!m.entries[0].simplified_text.contains("sky"));
    }

    #[test]
    fn single_variant_and_idempotence() {
        let m = generate_manifest(
            &[skyblue_hotpink()],
            &shipped_objects(),
            ManifestOptions::default(),
            9,
        )
        .unwrap();
        let single = derive_variants(&m, VariantMode::Single, 0).unwrap();
        for (src, s) in m.entries.iter().zip(&single.entries) {
            assert_eq!(
                s.text,
                format!("a skyblue colored {}.", src.slots[0].object_noun)
            );
            assert_eq!(s.pair_type, PairType::Single);
            assert_eq!(s.seed, src.seed);
        }
        assert_eq!(
            derive_variants(&single, VariantMode::Single, 0).unwrap(),
            single
        );
    }

    #[test]
    fn triple_skips_without_candidates() {
        // Only two colors in the manifest, so no third distant color exists.
        let m = generate_manifest(
            &[skyblue_hotpink()],
            &shipped_objects(),
            ManifestOptions::default(),
            9,
        )
        .unwrap();
        let t = derive_variants(&m, VariantMode::Triple, 0).unwrap();
        assert!(t.entries.is_empty());
        assert_eq!(t.provenance.warnings.len(), 5);
    }
}
