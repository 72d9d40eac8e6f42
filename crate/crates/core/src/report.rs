//! Text tables over summary rows and base-vs-edited improvement deltas.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::benchmark::PairType;
use crate::error::{Error, Result};
use crate::eval::{GroupKey, SummaryRow};

/// Rounds half away from zero at `decimals` places, working on the shortest
/// decimal representation so that `12.035` becomes `12.04`.
pub fn format_fixed(value: f64, decimals: usize) -> String {
    if !value.is_finite() {
        return "-".to_string();
    }
    let repr = format!("{}", value.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let int_len = digits.len();
    let mut frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    frac.resize(decimals.max(frac.len()), 0);
    let round_up = frac.get(decimals).is_some_and(|d| *d >= 5);
    digits.extend_from_slice(&frac[..decimals]);
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    debug_assert!(split >= int_len);
    let mut out = String::new();
    if value < 0.0 && digits.iter().any(|d| *d != 0) {
        out.push('-');
    }
    out.extend(digits[..split].iter().map(|d| char::from(b'0' + d)));
    if decimals > 0 {
        out.push('.');
        out.extend(digits[split..].iter().map(|d| char::from(b'0' + d)));
    }
    out
}

/// `LAB\RGB\ACC` with ACC as a fraction, or `-` for a group without valid objects.
pub fn format_cell(row: &SummaryRow) -> String {
    match (row.mean_lab, row.mean_rgb, row.acc_rate) {
        (Some(l), Some(r), Some(a)) => format!(
            "{}\\{}\\{}",
            format_fixed(l, 2),
            format_fixed(r, 2),
            format_fixed(a, 2)
        ),
        _ => "-".to_string(),
    }
}

fn render_grid(
    header: &str,
    columns: &[PairType],
    rows: &BTreeMap<String, BTreeMap<PairType, String>>,
) -> String {
    let mut table: Vec<Vec<String>> = Vec::with_capacity(rows.len() + 1);
    table.push(
        std::iter::once(header.to_string())
            .chain(columns.iter().map(|c| c.to_string()))
            .collect(),
    );
    for (method, cells) in rows {
        let mut line = vec![method.clone()];
        line.extend(
            columns
                .iter()
                .map(|c| cells.get(c).cloned().unwrap_or_else(|| "-".to_string())),
        );
        table.push(line);
    }
    let widths: Vec<usize> = (0..=columns.len())
        .map(|i| {
            table
                .iter()
                .map(|r| r[i].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (n, line) in table.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
        if n == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
        }
    }
    out
}

fn split_columns<'a>(keys: impl Iterator<Item = &'a GroupKey>) -> Vec<PairType> {
    keys.map(|k| k.split)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// One row per method, one column per split present in `rows`.
pub fn format_summary_table(rows: &[SummaryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("no summary rows to format"));
    }
    let columns = split_columns(rows.iter().map(|r| &r.key));
    let mut grid: BTreeMap<String, BTreeMap<PairType, String>> = BTreeMap::new();
    for r in rows {
        grid.entry(r.key.method.clone())
            .or_default()
            .insert(r.key.split, format_cell(r));
    }
    Ok(render_grid("method", &columns, &grid))
}

/// Edited-vs-base comparison for one group. ACC values are fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub method: String,
    pub split: PairType,
    pub base_acc: Option<f64>,
    pub edited_acc: Option<f64>,
    pub delta_acc: Option<f64>,
    pub base_lab: Option<f64>,
    pub edited_lab: Option<f64>,
    pub delta_lab: Option<f64>,
    pub base_rgb: Option<f64>,
    pub edited_rgb: Option<f64>,
    pub delta_rgb: Option<f64>,
}

impl ImprovementRow {
    /// ACC gain in percentage points.
    pub fn delta_acc_points(&self) -> Option<f64> {
        self.delta_acc.map(|d| d * 100.0)
    }

    /// Edited ACC in percent followed by the gain, e.g. `59.00 21.00%↑`.
    pub fn percent_cell(&self) -> String {
        match (self.edited_acc, self.delta_acc) {
            (Some(e), Some(d)) => {
                let arrow = if d < 0.0 { '↓' } else { '↑' };
                format!(
                    "{} {}%{arrow}",
                    format_fixed(e * 100.0, 2),
                    format_fixed((d * 100.0).abs(), 2)
                )
            }
            _ => "-".to_string(),
        }
    }

    /// LAB and RGB improvements and the ACC gain as a fraction, e.g. `12.43\79.42\0.24`.
    pub fn delta_cell(&self) -> String {
        match (self.delta_lab, self.delta_rgb, self.delta_acc) {
            (Some(l), Some(r), Some(a)) => format!(
                "{}\\{}\\{}",
                format_fixed(l, 2),
                format_fixed(r, 2),
                format_fixed(a, 2)
            ),
            _ => "-".to_string(),
        }
    }
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

/// Matches each edited row with the base row of the same split. The base
/// summary holds a single method, so splits must be unique in it.
pub fn compute_improvements(
    base: &[SummaryRow],
    edited: &[SummaryRow],
) -> Result<Vec<ImprovementRow>> {
    let mut base_by_split: BTreeMap<PairType, &SummaryRow> = BTreeMap::new();
    for r in base {
        if base_by_split.insert(r.key.split, r).is_some() {
            return Err(Error::invalid(format!(
                "base summary has more than one {} row",
                r.key.split
            )));
        }
    }
    let mut out = Vec::with_capacity(edited.len());
    for e in edited {
        let b = base_by_split
            .get(&e.key.split)
            .ok_or_else(|| Error::invalid(format!("base summary has no {} row", e.key.split)))?;
        out.push(ImprovementRow {
            method: e.key.method.clone(),
            split: e.key.split,
            base_acc: b.acc_rate,
            edited_acc: e.acc_rate,
            delta_acc: diff(e.acc_rate, b.acc_rate),
            base_lab: b.mean_lab,
            edited_lab: e.mean_lab,
            delta_lab: diff(b.mean_lab, e.mean_lab),
            base_rgb: b.mean_rgb,
            edited_rgb: e.mean_rgb,
            delta_rgb: diff(b.mean_rgb, e.mean_rgb),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImprovementStyle {
    /// Edited ACC in percent with the gain.
    #[default]
    Percent,
    /// LAB, RGB and ACC deltas.
    Delta,
}

pub fn format_improvement_table(
    rows: &[ImprovementRow],
    style: ImprovementStyle,
) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("no improvement rows to format"));
    }
    let columns: Vec<PairType> = rows
        .iter()
        .map(|r| r.split)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut grid: BTreeMap<String, BTreeMap<PairType, String>> = BTreeMap::new();
    for r in rows {
        let cell = match style {
            ImprovementStyle::Percent => r.percent_cell(),
            ImprovementStyle::Delta => r.delta_cell(),
        };
        grid.entry(r.method.clone())
            .or_default()
            .insert(r.split, cell);
    }
    Ok(render_grid("method", &columns, &grid))
}
