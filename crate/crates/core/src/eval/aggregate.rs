use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::score::ObjectScore;
use crate::benchmark::PairType;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub method: String,
    pub split: PairType,
}

impl GroupKey {
    pub fn new(method: impl Into<String>, split: PairType) -> Self {
        Self {
            method: method.into(),
            split,
        }
    }

    /// Parses `method/split`; the method itself may contain slashes.
    pub fn parse(s: &str) -> Option<Self> {
        let (method, split) = s.rsplit_once('/')?;
        Some(Self::new(method, PairType::parse(split)?))
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.method, self.split)
    }
}

/// Per-group means over valid objects. `None` marks an undefined mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub key: GroupKey,
    pub mean_lab: Option<f64>,
    pub mean_rgb: Option<f64>,
    pub acc_rate: Option<f64>,
    pub n_valid: usize,
    pub n_rejected: usize,
}

impl SummaryRow {
    pub fn new(key: GroupKey, mean_lab: f64, mean_rgb: f64, acc_rate: f64) -> Self {
        Self {
            key,
            mean_lab: Some(mean_lab),
            mean_rgb: Some(mean_rgb),
            acc_rate: Some(acc_rate),
            n_valid: 0,
            n_rejected: 0,
        }
    }
}

/// Which distance enters the means: the target distance, or the lenient
/// leakage distance that accepts any prompt color.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Strict,
    Leakage,
}

#[derive(Default)]
struct Acc {
    lab: f64,
    rgb: f64,
    hits: f64,
    n_valid: usize,
    n_rejected: usize,
}

pub fn aggregate(scores: &[ObjectScore], criterion: Criterion) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<GroupKey, Acc> = BTreeMap::new();
    for s in scores {
        let acc = groups.entry(GroupKey::new(&s.method, s.split)).or_default();
        match (s.valid, s.metrics) {
            (true, Some(m)) => {
                let (d, hit) = match criterion {
                    Criterion::Strict => (m.lab_dist, m.acc),
                    Criterion::Leakage => (m.leakage_dist, m.leakage_acc),
                };
                acc.lab += d;
                acc.rgb += m.rgb_l2;
                acc.hits += hit as f64;
                acc.n_valid += 1;
            }
            _ => acc.n_rejected += 1,
        }
    }
    groups
        .into_iter()
        .map(|(key, a)| {
            let mean = |v: f64| (a.n_valid > 0).then(|| v / a.n_valid as f64);
            SummaryRow {
                key,
                mean_lab: mean(a.lab),
                mean_rgb: mean(a.rgb),
                acc_rate: mean(a.hits),
                n_valid: a.n_valid,
                n_rejected: a.n_rejected,
            }
        })
        .collect()
}
