use serde::{Deserialize, Serialize};

use super::{CLOSE_RANGE, DISTANT_MIN};
use crate::color::{delta_e_76, named_color_lookup, srgb_to_lab, LabColor, NamedColor};
use crate::error::Result;

/// Prompt split. Pair specs only use `Close` and `Distant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairType {
    Single,
    Close,
    Distant,
    Triple,
}

impl PairType {
    pub fn as_str(self) -> &'static str {
        match self {
            PairType::Single => "single",
            PairType::Close => "close",
            PairType::Distant => "distant",
            PairType::Triple => "triple",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Some(PairType::Single),
            "close" | "pair-close" => Some(PairType::Close),
            "distant" | "pair-distant" => Some(PairType::Distant),
            "triple" => Some(PairType::Triple),
            _ => None,
        }
    }
}

impl std::fmt::Display for PairType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Close,
    Distant,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorPairSpec {
    pub main: String,
    pub partner: String,
    pub pair_type: PairType,
    pub delta_e_ab: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairSet {
    pub pairs: Vec<ColorPairSpec>,
    /// One message per main color that could not fill its quota.
    pub warnings: Vec<String>,
}

pub fn classify_pair_lab(a: LabColor, b: LabColor, same_group: bool) -> PairClass {
    let d = delta_e_76(a, b);
    if d > DISTANT_MIN {
        PairClass::Distant
    } else if (CLOSE_RANGE.0..=CLOSE_RANGE.1).contains(&d) && !same_group {
        PairClass::Close
    } else {
        PairClass::Neither
    }
}

fn classify_named(a: &NamedColor, b: &NamedColor) -> (PairClass, f64) {
    let la = srgb_to_lab(a.rgb);
    let lb = srgb_to_lab(b.rgb);
    (
        classify_pair_lab(la, lb, a.group == b.group),
        delta_e_76(la, lb),
    )
}

pub fn classify_pair(c1: &str, c2: &str) -> Result<PairClass> {
    let a = named_color_lookup(c1)?;
    let b = named_color_lookup(c2)?;
    Ok(classify_named(a, b).0)
}

/// For each main color: the `per_type` closest qualifying close partners and
/// the `per_type` farthest distant partners. Ties resolve by canonical name.
pub fn build_pairs<S: AsRef<str>>(color_set: &[S], per_type: usize) -> Result<PairSet> {
    let colors = color_set
        .iter()
        .map(|n| named_color_lookup(n.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = PairSet::default();
    for main in &colors {
        let mut close = Vec::new();
        let mut distant = Vec::new();
        for partner in &colors {
            if partner.name == main.name {
                continue;
            }
            let (class, d) = classify_named(main, partner);
            match class {
                PairClass::Close => close.push((d, partner.name.as_str())),
                PairClass::Distant => distant.push((d, partner.name.as_str())),
                PairClass::Neither => {}
            }
        }
        let by_name = |a: &(f64, &str), b: &(f64, &str)| a.1.cmp(b.1);
        close.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| by_name(a, b)));
        distant.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| by_name(a, b)));
        let mut shortfalls = Vec::new();
        for (kind, list) in [(PairType::Close, &close), (PairType::Distant, &distant)] {
            if list.len() < per_type {
                shortfalls.push(format!("{} {kind} of {per_type}", list.len()));
            }
            out.pairs
                .extend(list.iter().take(per_type).map(|&(d, p)| ColorPairSpec {
                    main: main.name.clone(),
                    partner: p.to_string(),
                    pair_type: kind,
                    delta_e_ab: d,
                }));
        }
        if !shortfalls.is_empty() {
            out.warnings
                .push(format!("{}: only {}", main.name, shortfalls.join(", ")));
        }
    }
    Ok(out)
}
