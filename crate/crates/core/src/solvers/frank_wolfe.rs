//! Path-based Frank-Wolfe over a product of scaled simplices.
//!
//! The objective is separable over edges, `F(x) = Σ_e φ_e(x_e)`, and only its
//! gradient field `φ_e'` is needed: directions come from per-pair shortest
//! paths under the field, and the exact line search bisects on the
//! directional derivative.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::routing::USE_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Plain conditional gradient with all-or-nothing directions.
    Classic,
    /// Adds away steps from the most expensive used path of each pair.
    AwayStep,
    /// Shifts flow from each costlier used path of a pair onto its cheapest
    /// path, one exact line search per shift.
    #[default]
    Pairwise,
}

/// Paths as edge lists, grouped by pair, with per-pair demand.
pub(crate) struct PathSystem<'a> {
    pub edge_count: usize,
    pub paths: Vec<&'a [usize]>,
    pub pairs: Vec<Range<usize>>,
    pub demand: Vec<f64>,
}

impl PathSystem<'_> {
    pub fn loads(&self, flow: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.edge_count];
        for (p, edges) in self.paths.iter().enumerate() {
            if flow[p] != 0.0 {
                for &e in *edges {
                    x[e] += flow[p];
                }
            }
        }
        x
    }

    pub fn uniform(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.paths.len()];
        for (r, &m) in self.pairs.iter().zip(&self.demand) {
            let share = m / r.len() as f64;
            f[r.clone()].fill(share);
        }
        f
    }
}

pub(crate) struct Outcome {
    pub flow: Vec<f64>,
    pub loads: Vec<f64>,
    pub relative_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `F` given its edge gradient `field(e, x_e)`.
///
/// Each outer iteration measures the global gap, then visits the pairs in
/// order and takes one step per pair with its own exact line search, loads
/// updated in between. A shared step across pairs would let one pair with a
/// delicate interior balance throttle every other pair.
///
/// The reported gap is `⟨∇F(x), x − s⟩ / scale(x)` where `s` is the
/// all-or-nothing vertex; when `scale(x)` vanishes the absolute gap is used.
pub(crate) fn minimize(
    sys: &PathSystem<'_>,
    field: impl Fn(usize, f64) -> f64,
    scale: impl Fn(&[f64]) -> f64,
    cfg: &SolverConfig,
    init: Option<Vec<f64>>,
) -> Outcome {
    let mut f = init.unwrap_or_else(|| sys.uniform());
    let mut x;
    let mut dx = vec![0.0; sys.edge_count];
    let mut touched: Vec<usize> = Vec::new();
    let mut rel_gap;
    let mut iterations = 0;
    let mut converged = false;
    let path_cost = |x: &[f64], p: usize| -> f64 { sys.paths[p].iter().map(|&e| field(e, x[e])).sum() };

    loop {
        // fresh loads each outer iteration so incremental updates cannot drift
        x = sys.loads(&f);
        let mut gap = 0.0;
        let mut excess: f64 = 0.0;
        let mut used_max: f64 = 0.0;
        for (r, &m) in sys.pairs.iter().zip(&sys.demand) {
            if m > 0.0 {
                let c: Vec<f64> = r.clone().map(|p| path_cost(&x, p)).collect();
                let min = c.iter().copied().fold(f64::INFINITY, f64::min);
                for (p, &cp) in r.clone().zip(&c) {
                    gap += f[p] * (cp - min);
                    if f[p] > USE_THRESHOLD * m {
                        excess = excess.max(cp - min);
                        used_max = used_max.max(cp);
                    }
                }
            }
        }
        let denom = scale(&x);
        rel_gap = if denom > 1e-300 { gap / denom } else { gap };
        // the flow-weighted gap alone lets a lightly used path keep a large excess
        if rel_gap <= cfg.gap_tolerance && excess <= cfg.gap_tolerance * used_max {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;

        let mut stepped = false;
        for (r, &m) in sys.pairs.iter().zip(&sys.demand) {
            if m <= 0.0 || r.len() < 2 {
                continue;
            }
            let c: Vec<f64> = r.clone().map(|p| path_cost(&x, p)).collect();
            let local = |p: usize| p - r.start;
            // cheapest path (lowest index on ties) and costliest used path
            let mut s = r.start;
            let mut a = None::<usize>;
            for p in r.clone() {
                if c[local(p)] < c[local(s)] {
                    s = p;
                }
                if f[p] > 0.0 && a.is_none_or(|a| c[local(p)] > c[local(a)]) {
                    a = Some(p);
                }
            }
            let Some(a) = a else { continue };
            if cfg.variant == Variant::Pairwise {
                for p in r.clone() {
                    let fp = f[p];
                    if p == s || fp <= 0.0 || c[local(p)] <= c[local(s)] {
                        continue;
                    }
                    load_direction(sys, [(s, 1.0), (p, -1.0)].into_iter(), &mut dx, &mut touched);
                    let slope = |t: f64| -> f64 {
                        touched.iter().filter(|&&e| dx[e] != 0.0).map(|&e| field(e, x[e] + t * dx[e]) * dx[e]).sum()
                    };
                    let gamma = line_search(slope, fp, cfg);
                    if gamma > 0.0 {
                        let gamma = if gamma >= fp { fp } else { gamma };
                        for &e in &touched {
                            x[e] += gamma * dx[e];
                        }
                        f[s] += gamma;
                        f[p] = if gamma == fp { 0.0 } else { fp - gamma };
                        stepped = true;
                    }
                }
                continue;
            }
            let gap_fw: f64 = r.clone().map(|p| f[p] * (c[local(p)] - c[local(s)])).sum();
            let gap_away: f64 = r.clone().map(|p| f[p] * (c[local(a)] - c[local(p)])).sum();
            let use_away = cfg.variant == Variant::AwayStep && gap_away > gap_fw && f[a] < m;
            let mut stepped_here = false;
            for try_away in [use_away, false] {
                // away: move toward x from the away vertex; fw: toward the cheapest vertex
                let dir: Vec<f64> = r
                    .clone()
                    .map(|p| {
                        if try_away {
                            f[p] - if p == a { m } else { 0.0 }
                        } else {
                            (if p == s { m } else { 0.0 }) - f[p]
                        }
                    })
                    .collect();
                let gamma_max = if try_away { f[a] / (m - f[a]) } else { 1.0 };
                load_direction(sys, r.clone().zip(dir.iter().copied()), &mut dx, &mut touched);
                let slope = |t: f64| -> f64 {
                    touched.iter().filter(|&&e| dx[e] != 0.0).map(|&e| field(e, x[e] + t * dx[e]) * dx[e]).sum()
                };
                let gamma = line_search(slope, gamma_max, cfg);
                if gamma > 0.0 {
                    for p in r.clone() {
                        for &e in sys.paths[p] {
                            x[e] -= f[p];
                        }
                    }
                    for (p, &d) in r.clone().zip(&dir) {
                        f[p] = (f[p] + gamma * d).max(0.0);
                    }
                    if try_away && gamma >= gamma_max {
                        // drop step: the away path leaves the support exactly
                        f[a] = 0.0;
                    }
                    let sum: f64 = f[r.clone()].iter().sum();
                    if sum > 0.0 && sum != m {
                        let k = m / sum;
                        f[r.clone()].iter_mut().for_each(|v| *v *= k);
                    }
                    for p in r.clone() {
                        for &e in sys.paths[p] {
                            x[e] += f[p];
                        }
                    }
                    stepped_here = true;
                    break;
                }
                if !try_away {
                    break;
                }
            }
            stepped |= stepped_here;
        }
        if !stepped {
            break;
        }
    }

    Outcome { flow: f, loads: x, relative_gap: rel_gap.max(0.0), iterations, converged }
}

/// Accumulate the edge direction of a path direction into `dx`, listing the
/// touched edges. Entries from the previous call are cleared first.
fn load_direction(
    sys: &PathSystem<'_>,
    dir: impl Iterator<Item = (usize, f64)>,
    dx: &mut [f64],
    touched: &mut Vec<usize>,
) {
    for &e in touched.iter() {
        dx[e] = 0.0;
    }
    touched.clear();
    for (p, d) in dir {
        if d != 0.0 {
            for &e in sys.paths[p] {
                touched.push(e);
                dx[e] += d;
            }
        }
    }
    touched.sort_unstable();
    touched.dedup();
}

/// Exact line search on `[0, γmax]` by bisection on the increasing slope.
/// The bracket shrinks relative to its upper end, so steps far below `γmax`
/// are still resolved to relative precision.
fn line_search(slope: impl Fn(f64) -> f64, gamma_max: f64, cfg: &SolverConfig) -> f64 {
    if gamma_max <= 0.0 || slope(0.0) >= 0.0 {
        return 0.0;
    }
    if slope(gamma_max) <= 0.0 {
        return gamma_max;
    }
    let (mut lo, mut hi) = (0.0, gamma_max);
    for _ in 0..100 {
        if hi - lo <= cfg.line_search_tolerance * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if lo > 0.0 {
        lo
    } else {
        0.5 * hi
    }
}

