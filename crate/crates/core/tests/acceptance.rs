//! Acceptance suite. Runs without the libtest harness and prints one line per
//! criterion; exits nonzero if any of criteria 1 to 12 fails.
//!
//! Criterion 13 reads `SiouxFalls_net.tntp` and `SiouxFalls_trips.tntp` from
//! the directory named by `POA_SIOUX_FALLS_DIR` and is skipped without it.

mod common;

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use poa_core::asymptotics::{classify, limit_value, rate_bound_constants, Benchmark, TrafficLimit};
use poa_core::lab::{
    fit_power_law, lock_in_threshold, price_of_anarchy, salience_check, sequence_poa, sweep, FitConfig, LogGrid,
    RowStatus, DEFAULT_SALIENCE_THRESHOLD,
};
use poa_core::routing::{CostFunction, Demand, Network};
use poa_core::scenario::{
    builtin, builtin_sequence, parse_tntp_net, parse_tntp_trips, tntp_network, ScenarioParams, BUILTINS,
};
use poa_core::solvers::{brute_force_solve, Objective, SolverConfig, MAX_BRUTE_FORCE_PATHS};

use common::{parallel, random_network, rel};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn scenario(name: &str, params: ScenarioParams) -> (Network, Vec<f64>) {
    let s = builtin(name, &params).unwrap();
    (s.network, s.rates)
}

fn poa_at(net: &Network, rates: &[f64], m: f64) -> f64 {
    let p = price_of_anarchy(net, &Demand::from_rates(m, rates).unwrap(), &cfg()).unwrap();
    assert!(p.converged, "solver did not converge at M = {m:e}");
    p.poa
}

fn within(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

fn c01_pigou_baseline() -> Outcome {
    let t = Instant::now();
    let (net, rates) = scenario("pigou_affine", ScenarioParams::default());
    let poa = poa_at(&net, &rates, 1.0);
    let el = t.elapsed();
    let err = (poa - 4.0 / 3.0).abs();
    check(err <= 1e-6 && within(el, 1.0), format!("PoA {poa:.12} |err| {err:.1e} <= 1e-6, {el:.2?} < 1s"))
}

/// Heavy-traffic constant of `x^d1` against `x^d2`, `d1 < d2`, recomputed from
/// the two-link first-order conditions: `b = d2·((1+d1)/(1+d2))^{1+1/d2} − d1`.
fn heavy_constant(d1: f64, d2: f64) -> f64 {
    d2 * ((1.0 + d1) / (1.0 + d2)).powf(1.0 + 1.0 / d2) - d1
}

fn pigou_rate(limit: TrafficLimit, from: f64, to: f64, exponent: f64, constant: f64) -> Outcome {
    let t = Instant::now();
    let (net, rates) = scenario("pigou_monomial", ScenarioParams { d1: Some(1), d2: Some(2), d: None });
    let result = sweep(&net, &rates, &LogGrid::new(from, to, 25).unwrap(), &cfg(), None).unwrap();
    let fit = fit_power_law(&result, limit, &FitConfig::default()).unwrap();
    let el = t.elapsed();
    let a = fit.exponent.finite().unwrap_or(f64::NAN);
    let b = fit.constant.unwrap_or(f64::NAN);
    let (ea, eb) = (rel(a, exponent), rel(b, constant));
    check(
        ea <= 0.05 && eb <= 0.02 && within(el, 10.0),
        format!("a = {a:.5} (rel {ea:.1e} <= 5%), b = {b:.6} vs {constant:.6} (rel {eb:.1e} <= 2%), {el:.2?} < 10s"),
    )
}

fn c02_heavy_rate() -> Outcome {
    let b = heavy_constant(1.0, 2.0);
    if (b - 0.088662).abs() > 5e-7 {
        return Outcome::Fail(format!("re-derived constant {b} disagrees with 0.088662"));
    }
    pigou_rate(TrafficLimit::Heavy, 1e4, 1e8, 0.5, b)
}

fn c03_light_rate() -> Outcome {
    // x^2 is fast against x near 0, so PoA − 1 = M/4 + O(M²)
    pigou_rate(TrafficLimit::Light, 1e-6, 1e-3, 1.0, 0.25)
}

fn c04_same_degree() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 1..=4 {
        let net = parallel(vec![CostFunction::monomial(d, 1.0).unwrap(), CostFunction::monomial(d, 3.5).unwrap()]);
        for m in LogGrid::new(1e-3, 1e3, 20).unwrap().values() {
            worst = worst.max((poa_at(&net, &[1.0], m) - 1.0).abs());
        }
    }
    check(worst <= 1e-8, format!("max |PoA − 1| = {worst:.1e} <= 1e-8 over degrees 1..4, 20 points each"))
}

fn c05_bpr_lock_in() -> Outcome {
    let net = parallel(vec![
        CostFunction::bpr(1.0, 0.5, 1.0, 4.0).unwrap(),
        CostFunction::bpr(1.2, 0.3, 2.0, 4.0).unwrap(),
        CostFunction::bpr(1.5, 1.0, 1.5, 4.0).unwrap(),
    ]);
    let threshold = lock_in_threshold(&net).unwrap().finite().unwrap();
    let below = LogGrid::new(1e-4 * threshold, 0.999 * threshold, 20).unwrap().values();
    let worst = below.iter().map(|&m| (poa_at(&net, &[1.0], m) - 1.0).abs()).fold(0.0, f64::max);
    let above = LogGrid::new(threshold, 1e3 * threshold, 30).unwrap().values();
    let peak = above.iter().map(|&m| poa_at(&net, &[1.0], m)).fold(f64::NEG_INFINITY, f64::max);
    check(
        worst <= 1e-8 && peak > 1.0 + 1e-4,
        format!("threshold {threshold:.6}; below max |PoA − 1| = {worst:.1e} <= 1e-8; above max PoA = {peak:.6} > 1 + 1e-4"),
    )
}

fn c06_oscillating() -> Outcome {
    let (net, rates) = scenario("oscillating_three_link", ScenarioParams { d: Some(2), ..Default::default() });
    let grid = LogGrid::new(1.0, TWO_PI.exp(), 200).unwrap().values();
    let poas: Vec<f64> = grid.iter().map(|&m| poa_at(&net, &rates, m)).collect();
    let (k, &fw_min) = poas.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let m_star = grid[k];
    let demand = Demand::from_rates(m_star, &rates).unwrap();
    let res = cfg().brute_force_resolution;
    let bf_eq = brute_force_solve(&net, &demand, Objective::Beckmann, res).unwrap();
    let bf_opt = brute_force_solve(&net, &demand, Objective::Social, res).unwrap();
    // the oracle's Eq cost is the social cost at a grid point, accurate to
    // first order in the grid step
    let delta = bf_eq.objective / bf_opt.objective - 1.0;
    let agree = (fw_min - 1.0 - delta).abs();
    let mut drift: f64 = 0.0;
    for &m in grid.iter().step_by(20) {
        drift = drift.max((poa_at(&net, &rates, m) - poa_at(&net, &rates, m * TWO_PI.exp())).abs());
    }
    check(
        delta > 1e-4 && agree <= 1e-4 && fw_min >= 1.0 + delta - 1e-4 && drift <= 1e-4,
        format!(
            "min PoA {fw_min:.8} at M = {m_star:.4}; oracle delta = {delta:.3e} > 0 (|FW − oracle| {agree:.1e} <= 1e-4); \
             period drift {drift:.1e} <= 1e-4 at 10 points"
        ),
    )
}

fn c07_classification() -> Outcome {
    let (net, _) = scenario("wheatstone", ScenarioParams::default());
    let x = Benchmark::Monomial { degree: 1.0 };
    let one = Benchmark::ConstantOne;
    // (limit, benchmark, edges, pairs, network, tight)
    let tables: [(TrafficLimit, Benchmark, [&str; 5], [&str; 2], &str, bool); 3] = [
        (TrafficLimit::Heavy, x, ["tight", "slow", "fast", "fast", "slow"], ["tight", "fast"], "tight", true),
        (TrafficLimit::Light, x, ["tight", "fast", "tight", "slow", "slow"], ["tight", "slow"], "slow", false),
        (TrafficLimit::Light, one, ["fast", "fast", "fast", "tight", "tight"], ["fast", "tight"], "tight", true),
    ];
    let mut mismatches = Vec::new();
    for (limit, bench, edges, pairs, network, tight) in tables {
        let r = classify(&net, &bench, limit).unwrap();
        let got_edges: Vec<String> = r.edges.iter().map(|e| e.label.to_string()).collect();
        let got_pairs: Vec<String> = r.pairs.iter().map(|e| e.label.to_string()).collect();
        if got_edges != edges
            || got_pairs != pairs
            || r.network.label.to_string() != network
            || r.tight != tight
        {
            mismatches.push(format!("{limit}/{bench}: edges {got_edges:?} pairs {got_pairs:?} network {}", r.network.label));
        }
    }
    check(mismatches.is_empty(), if mismatches.is_empty() { "3 tables match".into() } else { mismatches.join("; ") })
}

const RANDOM_NETS: u64 = 20;

fn c08_polynomial_limits() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 1.0;
    let mut at = (0, 0.0);
    for seed in 0..RANDOM_NETS {
        let (net, rates) = random_network(seed);
        for m in [1e-6, 1e8] {
            let p = poa_at(&net, &rates, m);
            if p > worst {
                worst = p;
                at = (seed, m);
            }
        }
    }
    let el = t.elapsed();
    check(
        worst <= 1.02 && within(el, 120.0),
        format!("max PoA {worst:.6} <= 1.02 (net {}, M = {:e}) over {RANDOM_NETS} nets, {el:.2?} < 120s", at.0, at.1),
    )
}

fn c09_bound_soundness() -> Outcome {
    let mut checked = 0;
    let mut inapplicable = 0;
    let mut violations = Vec::new();
    for seed in 0..RANDOM_NETS {
        let (net, rates) = random_network(seed);
        for (limit, from, to) in [(TrafficLimit::Heavy, 1.0, 1e8), (TrafficLimit::Light, 1e-6, 1.0)] {
            let bound = match rate_bound_constants(&net, &rates, limit) {
                Ok(b) => b,
                Err(_) => {
                    inapplicable += 1;
                    continue;
                }
            };
            for m in LogGrid::new(from, to, 17).unwrap().values() {
                if !bound.is_valid_at(m) {
                    continue;
                }
                checked += 1;
                let (p, b) = (poa_at(&net, &rates, m), bound.bound_value(m));
                if p > b + 1e-9 {
                    violations.push(format!("net {seed} {limit} M = {m:e}: PoA {p} > bound {b}"));
                }
            }
        }
    }
    check(
        violations.is_empty() && checked > 0,
        format!(
            "{checked} (net, M) points inside the valid range, {} violations, {inapplicable} limits outside the hypotheses{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

fn c10_limit_value() -> Outcome {
    let (net, rates) = scenario("pigou_monomial", ScenarioParams { d1: Some(1), d2: Some(2), d: None });
    // x^2 is slow against x in heavy traffic, so all mass sits on x: V = 1.
    let v_derived = 1.0;
    let lv = limit_value(&net, &rates, &Benchmark::Monomial { degree: 1.0 }, TrafficLimit::Heavy).unwrap();
    let m = 1e4;
    let opt = price_of_anarchy(&net, &Demand::from_rates(m, &rates).unwrap(), &cfg()).unwrap().opt_cost;
    let ratio = opt / (v_derived * m * m);
    check(
        (ratio - 1.0).abs() <= 0.02 && (lv.value - v_derived).abs() <= 1e-9,
        format!("Opt/(V·M²) = {ratio:.6} within 2%; computed V = {:.9} vs 1", lv.value),
    )
}

fn c11_variable_inflow() -> Outcome {
    let (net, _) = scenario("uncoupled", ScenarioParams::default());
    let inefficient = builtin_sequence("example_inefficient").unwrap();
    let efficient = builtin_sequence("example_efficient").unwrap();
    let odd = sequence_poa(&net, &inefficient, &[5, 51, 501], &cfg(), None).unwrap();
    let odd_err = odd.rows.iter().map(|r| (r.poa - 4.0 / 3.0).abs()).fold(0.0, f64::max);
    let odd_ok = odd.rows.iter().all(|r| r.status == RowStatus::Ok);
    let eff = sequence_poa(&net, &efficient, &[10_000], &cfg(), None).unwrap();
    let eff_poa = eff.rows[0].poa;
    // The tight pair is the Pigou pair (index 0). Its share vanishes along
    // both sequences: 1/(2n+1) at odd n and 1/(1+√n).
    let s_ineff = salience_check(&inefficient, &[0], 10_000_000, DEFAULT_SALIENCE_THRESHOLD).unwrap();
    let s_eff = salience_check(&efficient, &[0], 100_000_000_000_000, DEFAULT_SALIENCE_THRESHOLD).unwrap();
    check(
        odd_ok && odd_err <= 1e-4 && eff.rows[0].status == RowStatus::Ok && eff_poa <= 1.01 && !s_ineff.salient && !s_eff.salient,
        format!(
            "inefficient odd n: max |PoA − 4/3| = {odd_err:.1e} <= 1e-4; efficient n = 1e4: PoA {eff_poa:.6} <= 1.01; \
             pair 0 salient: inefficient {} (tail min {:.1e}), efficient {} (tail min {:.1e})",
            s_ineff.salient, s_ineff.tail_min, s_eff.salient, s_eff.tail_min
        ),
    )
}

fn c12_oracle_equivalence() -> Outcome {
    let c = cfg();
    let mut worst: f64 = 0.0;
    let mut where_ = String::new();
    let mut count = 0;
    for info in BUILTINS {
        let (net, rates) = scenario(info.name, ScenarioParams::default());
        if net.path_count() > MAX_BRUTE_FORCE_PATHS {
            continue;
        }
        count += 1;
        for m in [0.1, 1.0, 10.0] {
            let d = Demand::from_rates(m, &rates).unwrap();
            let p = price_of_anarchy(&net, &d, &c).unwrap();
            let eq = brute_force_solve(&net, &d, Objective::Beckmann, c.brute_force_resolution).unwrap();
            let opt = brute_force_solve(&net, &d, Objective::Social, c.brute_force_resolution).unwrap();
            for (what, fw, bf) in [("Eq", p.eq_cost, eq.objective), ("Opt", p.opt_cost, opt.objective)] {
                let r = rel(fw, bf);
                if r > worst {
                    worst = r;
                    where_ = format!("{} {what} at M = {m}", info.name);
                }
            }
        }
    }
    check(worst <= 1e-3, format!("{count} scenarios, max relative difference {worst:.1e} <= 1e-3 ({where_})"))
}

fn c13_sioux_falls() -> Outcome {
    let Some(dir) = std::env::var_os("POA_SIOUX_FALLS_DIR").map(PathBuf::from) else {
        return Outcome::Skip("POA_SIOUX_FALLS_DIR not set".into());
    };
    let t = Instant::now();
    let net_text = std::fs::read_to_string(dir.join("SiouxFalls_net.tntp")).unwrap();
    let trips_text = std::fs::read_to_string(dir.join("SiouxFalls_trips.tntp")).unwrap();
    let tnet = parse_tntp_net(&net_text).unwrap();
    let trips = parse_tntp_trips(&trips_text).unwrap();
    let (net, demand, _) = tntp_network(&tnet, &trips, 5).unwrap();
    let rates = demand.rates().unwrap();
    let low = poa_at(&net, &rates, 3.0e4);
    let high = poa_at(&net, &rates, 3.6e5);
    let el = t.elapsed();
    check(
        low <= 1.0 + 1e-6 && (1.002..=1.008).contains(&high) && within(el, 300.0),
        format!("PoA {low:.9} at 3.0e4 (<= 1 + 1e-6), {high:.6} at 3.6e5 (in [1.002, 1.008]), {el:.2?} < 300s"),
    )
}

fn main() {
    let criteria: [(&str, Check); 13] = [
        ("pigou baseline", c01_pigou_baseline),
        ("heavy-traffic rate", c02_heavy_rate),
        ("light-traffic rate", c03_light_rate),
        ("same-degree identity", c04_same_degree),
        ("BPR light lock-in", c05_bpr_lock_in),
        ("oscillating counterexample", c06_oscillating),
        ("classification tables", c07_classification),
        ("polynomial limits", c08_polynomial_limits),
        ("rate bound soundness", c09_bound_soundness),
        ("limit-value scaling", c10_limit_value),
        ("variable-inflow examples", c11_variable_inflow),
        ("solver oracle equivalence", c12_oracle_equivalence),
        ("Sioux Falls", c13_sioux_falls),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        let id = k + 1;
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let el = t.elapsed();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Skip(d) => ("SKIP", d),
            Outcome::Fail(d) => {
                // the Sioux Falls check is best-effort and never fails the run
                if id != 13 {
                    failed += 1;
                }
                ("FAIL", d)
            }
        };
        writeln!(out, "{tag} [{id:>2}] {name}: {detail} ({el:.2?})").unwrap();
    }
    writeln!(out, "{failed} of 12 required criteria failed").unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
