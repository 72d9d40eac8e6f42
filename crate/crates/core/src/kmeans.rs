//! Weighted k-means over dense rows: k-means++ seeding, Lloyd iterations, then
//! a Hartigan single-point refinement pass, best of `restarts` seeded runs.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Lloyd stops once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iter: 100,
            tol: 1e-4,
            restarts: 10,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// `k` rows of length `dim`.
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Total weight per cluster.
    pub weights: Vec<f64>,
    /// Weighted sum of squared distances to assigned centroids.
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct Problem<'a> {
    data: &'a [f64],
    dim: usize,
    weights: &'a [f64],
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.weights.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn nearest(&self, i: usize, centroids: &[Vec<f64>]) -> (usize, f64) {
        let x = self.row(i);
        let mut best = (0, f64::INFINITY);
        for (j, c) in centroids.iter().enumerate() {
            let d = sq_dist(x, c);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    fn seed_plus_plus(&self, k: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut centroids = Vec::with_capacity(k);
        let total: f64 = self.weights.iter().sum();
        centroids.push(self.row(self.sample(self.weights, total, rng)).to_vec());
        let mut d2: Vec<f64> = (0..n)
            .map(|i| sq_dist(self.row(i), &centroids[0]))
            .collect();
        while centroids.len() < k {
            let score: Vec<f64> = d2.iter().zip(self.weights).map(|(d, w)| d * w).collect();
            let mass: f64 = score.iter().sum();
            let pick = if mass > 0.0 {
                self.sample(&score, mass, rng)
            } else {
                rng.index(n)
            };
            let c = self.row(pick).to_vec();
            for (i, d) in d2.iter_mut().enumerate() {
                *d = d.min(sq_dist(self.row(i), &c));
            }
            centroids.push(c);
        }
        centroids
    }

    fn sample(&self, mass: &[f64], total: f64, rng: &mut SplitMix64) -> usize {
        let target = rng.next_f64() * total;
        let mut acc = 0.0;
        for (i, m) in mass.iter().enumerate() {
            acc += m;
            if target < acc {
                return i;
            }
        }
        // Floating round-off: fall back to the last positive entry.
        mass.iter().rposition(|&m| m > 0.0).unwrap_or(0)
    }

    fn means(&self, assign: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut sums = vec![vec![0.0; self.dim]; k];
        let mut mass = vec![0.0; k];
        for (i, &a) in assign.iter().enumerate() {
            let w = self.weights[i];
            mass[a] += w;
            for (s, x) in sums[a].iter_mut().zip(self.row(i)) {
                *s += w * x;
            }
        }
        for (s, &m) in sums.iter_mut().zip(&mass) {
            if m > 0.0 {
                s.iter_mut().for_each(|v| *v /= m);
            }
        }
        (sums, mass)
    }

    fn inertia(&self, assign: &[usize], centroids: &[Vec<f64>]) -> f64 {
        assign
            .iter()
            .enumerate()
            .map(|(i, &a)| self.weights[i] * sq_dist(self.row(i), &centroids[a]))
            .sum()
    }

    fn lloyd(&self, mut centroids: Vec<Vec<f64>>, cfg: &KMeansConfig) -> Vec<usize> {
        let k = centroids.len();
        let mut assign = vec![usize::MAX; self.n()];
        for _ in 0..cfg.max_iter {
            let mut changed = false;
            for (i, a) in assign.iter_mut().enumerate() {
                let (j, _) = self.nearest(i, &centroids);
                if *a != j {
                    *a = j;
                    changed = true;
                }
            }
            let (mut next, mass) = self.means(&assign, k);
            // Re-seed an emptied cluster at the point farthest from its centroid.
            for j in 0..k {
                if mass[j] == 0.0 {
                    let far = (0..self.n())
                        .max_by(|&x, &y| {
                            let dx = sq_dist(self.row(x), &next[assign[x]]);
                            let dy = sq_dist(self.row(y), &next[assign[y]]);
                            dx.total_cmp(&dy).then(y.cmp(&x))
                        })
                        .unwrap_or(0);
                    next[j] = self.row(far).to_vec();
                    assign[far] = j;
                    changed = true;
                }
            }
            let shift = centroids
                .iter()
                .zip(&next)
                .map(|(a, b)| sq_dist(a, b).sqrt())
                .fold(0.0, f64::max);
            centroids = next;
            if !changed || shift <= cfg.tol {
                break;
            }
        }
        // Final assignment against the last centroids.
        for (i, a) in assign.iter_mut().enumerate() {
            *a = self.nearest(i, &centroids).0;
        }
        assign
    }

    /// Moves single points between clusters while that strictly lowers the
    /// objective. Every Hartigan fixed point is also a Lloyd fixed point.
    fn hartigan(&self, assign: &mut [usize], k: usize) {
        let (mut centroids, mut mass) = self.means(assign, k);
        let max_sweeps = 100;
        for _ in 0..max_sweeps {
            let mut moved = false;
            for i in 0..self.n() {
                let w = self.weights[i];
                let from = assign[i];
                if mass[from] - w <= 0.0 {
                    continue;
                }
                let x = self.row(i);
                let removal = w * mass[from] / (mass[from] - w) * sq_dist(x, &centroids[from]);
                let mut best = (from, removal);
                for to in 0..k {
                    if to == from {
                        continue;
                    }
                    let add = w * mass[to] / (mass[to] + w) * sq_dist(x, &centroids[to]);
                    if add < best.1 - 1e-12 * removal.abs().max(1.0) {
                        best = (to, add);
                    }
                }
                let to = best.0;
                if to != from {
                    for d in 0..self.dim {
                        let xd = x[d];
                        centroids[from][d] =
                            (centroids[from][d] * mass[from] - w * xd) / (mass[from] - w);
                        centroids[to][d] = (centroids[to][d] * mass[to] + w * xd) / (mass[to] + w);
                    }
                    mass[from] -= w;
                    mass[to] += w;
                    assign[i] = to;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
}

/// Clusters `data` (row-major, `dim` columns, one row per point) with optional
/// per-point weights. `k` must not exceed the number of points.
pub fn kmeans(
    data: &[f64],
    dim: usize,
    weights: Option<&[f64]>,
    cfg: &KMeansConfig,
) -> Result<KMeansFit> {
    if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
        return Err(Error::invalid(
            "k-means input must be a nonempty row-major matrix",
        ));
    }
    let n = data.len() / dim;
    let unit;
    let weights = match weights {
        Some(w) if w.len() != n => {
            return Err(Error::invalid("weight count differs from point count"))
        }
        Some(w) => w,
        None => {
            unit = vec![1.0; n];
            &unit[..]
        }
    };
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::invalid(format!("k={} must be in 1..={n}", cfg.k)));
    }
    let problem = Problem { data, dim, weights };
    let mut rng = SplitMix64::new(cfg.seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..cfg.restarts.max(1) {
        let init = problem.seed_plus_plus(cfg.k, &mut rng);
        let mut assign = problem.lloyd(init, cfg);
        problem.hartigan(&mut assign, cfg.k);
        let (centroids, mass) = problem.means(&assign, cfg.k);
        let inertia = problem.inertia(&assign, &centroids);
        if best.as_ref().is_none_or(|b| inertia < b.inertia) {
            best = Some(KMeansFit {
                centroids,
                assignments: assign,
                weights: mass,
                inertia,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}
