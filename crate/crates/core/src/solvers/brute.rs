use serde::{Deserialize, Serialize};

use super::{path_system, SolveResult, SolverError};
use crate::routing::{beckmann_potential, social_cost, Demand, FlowProfile, LoadProfile, Network};

pub const MAX_BRUTE_FORCE_PATHS: usize = 6;
const MAX_GRID_POINTS: u128 = 50_000_000;
const REFINE_FACTOR: usize = 10;
const REFINE_RADIUS: i64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Beckmann potential; minimizers are equilibria.
    Beckmann,
    /// Social cost; minimizers are optima.
    Social,
}

/// Exhaustive minimization over the product of per-pair simplex grids with
/// step `m^i / resolution`, then one refinement pass at ten times the
/// resolution within ten coarse steps of the incumbent.
///
/// The returned `objective` is always the social cost of the minimizer and
/// `relative_gap` is the Frank-Wolfe gap of the chosen objective there.
pub fn brute_force_solve(
    net: &Network,
    demand: &Demand,
    objective: Objective,
    resolution: usize,
) -> Result<SolveResult, SolverError> {
    demand.check(net)?;
    if net.path_count() > MAX_BRUTE_FORCE_PATHS {
        return Err(SolverError::TooLarge(format!(
            "{} paths, at most {MAX_BRUTE_FORCE_PATHS} supported",
            net.path_count()
        )));
    }
    if resolution < 100 {
        return Err(SolverError::InvalidConfig(format!("resolution {resolution} is below 100")));
    }
    if demand.total() <= 0.0 {
        return Err(SolverError::ZeroDemand);
    }
    let eval = |flow: &[f64]| -> f64 {
        let x = edge_loads_raw(net, flow);
        match objective {
            Objective::Beckmann => beckmann_potential(net, &x).unwrap_or(f64::INFINITY),
            Objective::Social => social_cost(net, &x).unwrap_or(f64::INFINITY),
        }
    };

    // coarse pass
    let sizes: Vec<usize> = (0..net.pair_count()).map(|i| net.pair_paths(i).len()).collect();
    let count = sizes
        .iter()
        .try_fold(1u128, |acc, &n| acc.checked_mul(binomial(resolution + n - 1, n - 1)))
        .unwrap_or(u128::MAX);
    if count > MAX_GRID_POINTS {
        return Err(SolverError::TooLarge(format!("{count} grid points at resolution {resolution}")));
    }
    let coarse: Vec<Vec<Vec<usize>>> = sizes.iter().map(|&n| compositions(resolution, n)).collect();
    let mut best = (f64::INFINITY, Vec::new());
    let mut flow = vec![0.0; net.path_count()];
    for_each_product(&coarse, |choice| {
        for (i, comp) in choice.iter().enumerate() {
            let step = demand.inflow(i) / resolution as f64;
            for (k, p) in net.pair_paths(i).enumerate() {
                flow[p] = comp[k] as f64 * step;
            }
        }
        let v = eval(&flow);
        if v < best.0 {
            best = (v, flow.clone());
        }
    });

    // refinement around the incumbent on the finer lattice
    let fine = resolution * REFINE_FACTOR;
    let centre: Vec<Vec<i64>> = (0..net.pair_count())
        .map(|i| {
            let m = demand.inflow(i);
            net.pair_paths(i)
                .map(|p| if m > 0.0 { (best.1[p] / m * fine as f64).round() as i64 } else { 0 })
                .collect()
        })
        .collect();
    let local: Vec<Vec<Vec<usize>>> = centre.iter().map(|c| neighbourhood(c, fine)).collect();
    for_each_product(&local, |choice| {
        for (i, comp) in choice.iter().enumerate() {
            let step = demand.inflow(i) / fine as f64;
            for (k, p) in net.pair_paths(i).enumerate() {
                flow[p] = comp[k] as f64 * step;
            }
        }
        let v = eval(&flow);
        if v < best.0 {
            best = (v, flow.clone());
        }
    });

    let flow = best.1;
    let loads = edge_loads_raw(net, &flow);
    let gap = grid_gap(net, demand, &flow, &loads, objective);
    Ok(SolveResult {
        objective: social_cost(net, &loads)?,
        flow: FlowProfile(flow),
        loads,
        relative_gap: gap,
        iterations: 0,
        converged: true,
        warnings: Vec::new(),
    })
}

fn edge_loads_raw(net: &Network, flow: &[f64]) -> LoadProfile {
    let mut x = vec![0.0; net.edge_count()];
    for (p, edges) in net.paths() {
        for &e in edges {
            x[e] += flow[p];
        }
    }
    LoadProfile(x)
}

fn grid_gap(net: &Network, demand: &Demand, flow: &[f64], loads: &LoadProfile, objective: Objective) -> f64 {
    let sys = path_system(net, demand);
    let field = |e: usize| match objective {
        Objective::Beckmann => net.cost(e).eval(loads.0[e]),
        Objective::Social => net.cost(e).marginal(loads.0[e]),
    };
    let mut gap = 0.0;
    for r in &sys.pairs {
        let costs: Vec<f64> = r.clone().map(|p| sys.paths[p].iter().map(|&e| field(e)).sum()).collect();
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        gap += r.clone().zip(&costs).map(|(p, c)| flow[p] * (c - min)).sum::<f64>();
    }
    let l: f64 = social_cost(net, loads).unwrap_or(0.0);
    if l > 1e-300 {
        gap / l
    } else {
        gap
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, j| acc.saturating_mul((n - j) as u128) / (j as u128 + 1))
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k + 1 == cur.len() {
            cur[k] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(k + 1, left - v, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// Lattice points of the fine simplex within `REFINE_RADIUS` of `centre` in
/// every free coordinate.
fn neighbourhood(centre: &[i64], total: usize) -> Vec<Vec<usize>> {
    let n = centre.len();
    let free = n - 1;
    let width = (2 * REFINE_RADIUS + 1) as usize;
    let mut out = Vec::new();
    for code in 0..width.pow(free as u32) {
        let mut c = code;
        let mut point = Vec::with_capacity(n);
        let mut used = 0i64;
        let mut ok = true;
        for &centre_k in &centre[..free] {
            let v = centre_k + (c % width) as i64 - REFINE_RADIUS;
            c /= width;
            if v < 0 {
                ok = false;
                break;
            }
            used += v;
            point.push(v as usize);
        }
        let last = total as i64 - used;
        if ok && last >= 0 {
            point.push(last as usize);
            out.push(point);
        }
    }
    out
}

fn for_each_product(sets: &[Vec<Vec<usize>>], mut f: impl FnMut(&[&Vec<usize>])) {
    if sets.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; sets.len()];
    let mut choice: Vec<&Vec<usize>> = sets.iter().map(|s| &s[0]).collect();
    loop {
        f(&choice);
        let mut k = 0;
        loop {
            if k == sets.len() {
                return;
            }
            idx[k] += 1;
            if idx[k] < sets[k].len() {
                choice[k] = &sets[k][idx[k]];
                break;
            }
            idx[k] = 0;
            choice[k] = &sets[k][0];
            k += 1;
        }
    }
}
