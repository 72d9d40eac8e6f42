//! Benchmark construction: color-set filtering, close/distant pairing and
//! prompt manifests.

mod filter;
mod manifest;
mod pairs;
mod prompt;

pub use filter::{filter_color_set, ColorMeasurement};
pub use manifest::{
    derive_variants, generate_manifest, shipped_objects, BenchmarkManifest, ManifestOptions,
    PromptEntry, Provenance, Slot, VariantMode, MANIFEST_VERSION,
};
pub use pairs::{
    build_pairs, classify_pair, classify_pair_lab, ColorPairSpec, PairClass, PairSet, PairType,
};
pub use prompt::{pair_prompt, simplify_prompt, simplify_text, single_prompt, triple_prompt};

/// Inclusive ΔE_ab range for close pairs.
pub const CLOSE_RANGE: (f64, f64) = (5.0, 30.0);
/// Strict lower bound on ΔE_ab for distant pairs.
pub const DISTANT_MIN: f64 = 60.0;
/// Mean ΔE_CMC threshold for keeping a color in the set.
pub const FILTER_THRESHOLD: f64 = 15.0;
