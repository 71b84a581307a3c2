use serde::{Deserialize, Serialize};

use super::{LabError, RowStatus, SweepResult};
use crate::asymptotics::{ExtReal, Provenance, RateEstimate, TrafficLimit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Width of the tail window in decades of `M`, from the end of the grid
    /// nearest the limit.
    pub tail_decades: f64,
    /// Rows with `poa − 1 ≤ noise_factor · (eq_gap + opt_gap)` are dropped.
    pub noise_factor: f64,
    pub min_rows: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { tail_decades: 1.0, noise_factor: 10.0, min_rows: 5 }
    }
}

/// Least-squares fit of `log(poa − 1)` against `log M` over the tail.
///
/// Heavy traffic reports `a = −slope` and `b = geomean((poa − 1)·M^a)`;
/// light traffic reports `a = slope` and `b = geomean((poa − 1)·M^{−a})`.
pub fn fit_power_law(result: &SweepResult, limit: TrafficLimit, cfg: &FitConfig) -> Result<RateEstimate, LabError> {
    let ok: Vec<_> = result.rows.iter().filter(|r| r.status == RowStatus::Ok && r.m > 0.0).collect();
    if ok.is_empty() {
        return Err(LabError::InvalidInput("no usable sweep rows".into()));
    }
    let span = 10f64.powf(cfg.tail_decades);
    let tail: Vec<_> = match limit {
        TrafficLimit::Heavy => {
            let top = ok.iter().map(|r| r.m).fold(f64::NEG_INFINITY, f64::max);
            ok.into_iter().filter(|r| r.m >= top / span * (1.0 - 1e-12)).collect()
        }
        TrafficLimit::Light => {
            let bottom = ok.iter().map(|r| r.m).fold(f64::INFINITY, f64::min);
            ok.into_iter().filter(|r| r.m <= bottom * span * (1.0 + 1e-12)).collect()
        }
    };
    let usable: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.poa - 1.0 > cfg.noise_factor * r.combined_gap())
        .map(|r| (r.m.ln(), (r.poa - 1.0).ln()))
        .collect();
    if usable.is_empty() {
        return Err(LabError::FitDegenerate(format!(
            "all {} tail rows are at the solver noise floor, consistent with PoA = 1",
            tail.len()
        )));
    }
    if usable.len() < cfg.min_rows {
        return Err(LabError::InvalidInput(format!(
            "{} usable tail rows, at least {} needed",
            usable.len(),
            cfg.min_rows
        )));
    }
    let n = usable.len() as f64;
    let (mx, my) = usable.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let sxx: f64 = usable.iter().map(|&(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let a = match limit {
        TrafficLimit::Heavy => -slope,
        TrafficLimit::Light => slope,
    };
    let sign = if limit == TrafficLimit::Heavy { 1.0 } else { -1.0 };
    let log_b = usable.iter().map(|&(x, y)| y + sign * a * x).sum::<f64>() / n;
    Ok(RateEstimate {
        exponent: ExtReal::Finite(a),
        constant: Some(log_b.exp()),
        provenance: Provenance::EmpiricalFit,
        note: Some(format!("{} tail rows", usable.len())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{LogGrid, SweepMeta, SweepRow};
    use crate::solvers::SolverConfig;

    fn synthetic(grid: LogGrid, f: impl Fn(f64) -> f64) -> SweepResult {
        let rows = grid
            .values()
            .into_iter()
            .map(|m| SweepRow {
                n: None,
                m,
                eq_cost: f(m),
                opt_cost: 1.0,
                poa: f(m),
                eq_gap: 0.0,
                opt_gap: 0.0,
                status: RowStatus::Ok,
                message: None,
            })
            .collect();
        SweepResult { meta: SweepMeta { grid: Some(grid), rates: None, solver: SolverConfig::default() }, rows }
    }

    #[test]
    fn exact_light_power_law() {
        let r = synthetic(LogGrid::new(1e-6, 1e-3, 25).unwrap(), |m| 1.0 + 0.25 * m);
        let est = fit_power_law(&r, TrafficLimit::Light, &FitConfig::default()).unwrap();
        assert!((est.exponent.finite().unwrap() - 1.0).abs() < 1e-6);
        assert!((est.constant.unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn exact_heavy_power_law() {
        let r = synthetic(LogGrid::new(1e4, 1e8, 25).unwrap(), |m| 1.0 + 3.0 / m.sqrt());
        let est = fit_power_law(&r, TrafficLimit::Heavy, &FitConfig::default()).unwrap();
        assert!((est.exponent.finite().unwrap() - 0.5).abs() < 1e-9);
        assert!((est.constant.unwrap() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn flat_sweep_is_degenerate() {
        let r = synthetic(LogGrid::new(1.0, 100.0, 10).unwrap(), |_| 1.0);
        assert!(matches!(fit_power_law(&r, TrafficLimit::Heavy, &FitConfig::default()), Err(LabError::FitDegenerate(_))));
    }
}
