use std::collections::HashMap;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::SrgbColor;
use crate::error::{Error, Result};

/// One entry of the HTML named-color table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedColor {
    /// Canonical CamelCase name, e.g. `HotPink`.
    pub name: String,
    pub rgb: SrgbColor,
    /// HTML extended-color group label (`Pink`, `Blue`, `Gray`, ...).
    pub group: String,
    /// Single-token substitute used in prompts, e.g. `HotPink` -> `pink`.
    pub base_name: String,
    /// Member of the 35-color benchmark set.
    pub final_set: bool,
}

/// The 35 benchmark colors in canonical order.
pub const FINAL_COLOR_NAMES: [&str; 35] = [
    "HotPink",
    "LightPink",
    "Tomato",
    "BlanchedAlmond",
    "RoyalBlue",
    "SteelBlue",
    "CornflowerBlue",
    "SkyBlue",
    "LightSkyBlue",
    "LightSteelBlue",
    "LightBlue",
    "PowderBlue",
    "Teal",
    "MediumTurquoise",
    "Turquoise",
    "Aqua",
    "Cyan",
    "PaleTurquoise",
    "LightCyan",
    "Linen",
    "WhiteSmoke",
    "LavenderBlush",
    "GhostWhite",
    "FloralWhite",
    "MintCream",
    "Snow",
    "Ivory",
    "White",
    "Black",
    "DimGray",
    "SlateGray",
    "Gray",
    "LightSlateGray",
    "LightGray",
    "Silver",
];

#[derive(Deserialize)]
struct RawColor {
    name: String,
    rgb: [u8; 3],
    group: String,
    base_name: String,
    final_set: bool,
}

struct Table {
    colors: Vec<NamedColor>,
    by_key: HashMap<String, usize>,
}

static TABLE: LazyLock<Table> = LazyLock::new(|| {
    let raw: Vec<RawColor> = serde_json::from_str(include_str!("../../data/html_colors.json"))
        .expect("bundled color table is valid JSON");
    let colors: Vec<NamedColor> = raw
        .into_iter()
        .map(|r| NamedColor {
            name: r.name,
            rgb: r.rgb.into(),
            group: r.group,
            base_name: r.base_name,
            final_set: r.final_set,
        })
        .collect();
    let by_key = colors
        .iter()
        .enumerate()
        .map(|(i, c)| (normalize_name(&c.name), i))
        .collect();
    Table { colors, by_key }
});

/// Lowercases and strips spaces, hyphens and underscores: `Sky-Blue` -> `skyblue`.
pub fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, ' ' | '-' | '_'))
        .flat_map(char::to_lowercase)
        .collect()
}

/// All 140 colors in table order.
pub fn all_colors() -> &'static [NamedColor] {
    &TABLE.colors
}

pub fn try_lookup(name: &str) -> Option<&'static NamedColor> {
    TABLE
        .by_key
        .get(&normalize_name(name))
        .map(|&i| &TABLE.colors[i])
}

pub fn named_color_lookup(name: &str) -> Result<&'static NamedColor> {
    try_lookup(name).ok_or_else(|| {
        let key = normalize_name(name);
        let mut scored: Vec<(usize, &str)> = TABLE
            .colors
            .iter()
            .map(|c| {
                (
                    strsim::levenshtein(&key, &normalize_name(&c.name)),
                    c.name.as_str(),
                )
            })
            .collect();
        scored.sort();
        Error::UnknownColor {
            name: name.to_string(),
            candidates: scored.iter().take(3).map(|(_, n)| n.to_string()).collect(),
        }
    })
}

/// The 35 benchmark colors, in canonical order.
pub fn final_color_set() -> Vec<&'static NamedColor> {
    FINAL_COLOR_NAMES
        .iter()
        .map(|n| try_lookup(n).expect("final set is a subset of the table"))
        .collect()
}

/// How a color name is spelled inside prompt text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameStyle {
    /// `skyblue`
    #[default]
    Concatenated,
    /// `sky-blue`
    Hyphenated,
}

pub fn render_name(name: &str, style: NameStyle) -> String {
    match style {
        NameStyle::Concatenated => name.to_lowercase(),
        NameStyle::Hyphenated => {
            let mut out = String::with_capacity(name.len() + 4);
            for (i, ch) in name.chars().enumerate() {
                if ch.is_uppercase() && i > 0 {
                    out.push('-');
                }
                out.extend(ch.to_lowercase());
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes() {
        assert_eq!(all_colors().len(), 140);
        assert_eq!(all_colors().iter().filter(|c| c.final_set).count(), 35);
        for c in final_color_set() {
            assert!(c.final_set, "{} not flagged", c.name);
        }
    }

    #[test]
    fn teal_rgb() {
        assert_eq!(
            named_color_lookup("Teal").unwrap().rgb,
            SrgbColor::new(0, 128, 128)
        );
    }

    #[test]
    fn hotpink_base_is_pink() {
        assert_eq!(named_color_lookup("HotPink").unwrap().base_name, "pink");
    }

    #[test]
    fn spelling_variants_resolve() {
        for spelling in ["sky-blue", "skyblue", "SkyBlue", "Sky Blue", "SKY_BLUE"] {
            assert_eq!(named_color_lookup(spelling).unwrap().name, "SkyBlue");
        }
    }

    #[test]
    fn unknown_name_lists_candidates() {
        match named_color_lookup("NotAColor") {
            Err(Error::UnknownColor { candidates, .. }) => assert_eq!(candidates.len(), 3),
            other => panic!("expected unknown-color error, got {other:?}"),
        }
        let err = named_color_lookup("SkyBlu").unwrap_err().to_string();
        assert!(err.contains("SkyBlue"), "{err}");
    }

    #[test]
    fn base_name_follows_group() {
        for c in all_colors() {
            if c.name == "Black" {
                assert_eq!(c.base_name, "black");
            } else {
                assert_eq!(c.base_name, c.group.to_lowercase(), "{}", c.name);
            }
            assert!(!c.base_name.contains(' '));
        }
    }

    #[test]
    fn rendering_styles() {
        assert_eq!(render_name("SkyBlue", NameStyle::Concatenated), "skyblue");
        assert_eq!(
            render_name("LightSkyBlue", NameStyle::Hyphenated),
            "light-sky-blue"
        );
        for style in [NameStyle::Concatenated, NameStyle::Hyphenated] {
            for c in all_colors() {
                assert_eq!(
                    try_lookup(&render_name(&c.name, style)).unwrap().name,
                    c.name
                );
            }
        }
    }
}
