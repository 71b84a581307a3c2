use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{price_of_anarchy, DemandSequence, LabError, PoaPoint};
use crate::routing::{Demand, Network};
use crate::solvers::SolverConfig;

/// `points` log-spaced inflows from `from` to `to`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn new(from: f64, to: f64, points: usize) -> Result<Self, LabError> {
        if !(from > 0.0 && to > from && to.is_finite()) || points < 2 {
            return Err(LabError::InvalidInput(format!(
                "grid needs 0 < from < to < inf and at least 2 points, got [{from}, {to}] with {points}"
            )));
        }
        Ok(LogGrid { from, to, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.from.ln(), self.to.ln());
        let last = self.points - 1;
        (0..self.points)
            .map(|k| match k {
                0 => self.from,
                k if k == last => self.to,
                k => (a + (b - a) * k as f64 / last as f64).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    NotConverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(rename = "M")]
    pub m: f64,
    pub eq_cost: f64,
    pub opt_cost: f64,
    pub poa: f64,
    pub eq_gap: f64,
    pub opt_gap: f64,
    pub status: RowStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SweepRow {
    fn from_point(n: Option<u64>, m: f64, point: Result<PoaPoint, LabError>) -> Self {
        match point {
            Ok(p) => SweepRow {
                n,
                m,
                eq_cost: p.eq_cost,
                opt_cost: p.opt_cost,
                poa: p.poa,
                eq_gap: p.eq_gap,
                opt_gap: p.opt_gap,
                status: if p.converged { RowStatus::Ok } else { RowStatus::NotConverged },
                message: None,
            },
            Err(e) => SweepRow {
                n,
                m,
                eq_cost: f64::NAN,
                opt_cost: f64::NAN,
                poa: f64::NAN,
                eq_gap: f64::NAN,
                opt_gap: f64::NAN,
                status: RowStatus::Failed,
                message: Some(e.to_string()),
            },
        }
    }

    /// Combined solver gap, the resolution of `poa − 1`.
    pub fn combined_gap(&self) -> f64 {
        self.eq_gap + self.opt_gap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<LogGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub meta: SweepMeta,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV with 17 significant digits; sequence sweeps lead with an `n` column.
    pub fn to_csv(&self) -> String {
        let indexed = self.rows.iter().any(|r| r.n.is_some());
        let mut out = String::new();
        if indexed {
            out.push_str("n,");
        }
        out.push_str("M,eq_cost,opt_cost,poa,eq_gap,opt_gap\n");
        for r in &self.rows {
            if let Some(n) = r.n {
                let _ = write!(out, "{n},");
            }
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.m, r.eq_cost, r.opt_cost, r.poa, r.eq_gap, r.opt_gap
            );
        }
        out
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status != RowStatus::Ok).count()
    }
}

/// Run `f` on a dedicated pool of `jobs` threads, or the global pool.
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, LabError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(LabError::InvalidInput("--jobs must be at least 1".into())),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| LabError::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// PoA along `M ↦ M·λ` for every grid point. Points are independent and may
/// run in parallel; rows keep grid order and a failing point is flagged.
pub fn sweep(
    net: &Network,
    rates: &[f64],
    grid: &LogGrid,
    cfg: &SolverConfig,
    jobs: Option<usize>,
) -> Result<SweepResult, LabError> {
    cfg.validate()?;
    Demand::from_rates(1.0, rates)?.check(net)?;
    let values = grid.values();
    let rows = with_jobs(jobs, || {
        values
            .par_iter()
            .map(|&m| {
                let point = Demand::from_rates(m, rates).map_err(LabError::from).and_then(|d| price_of_anarchy(net, &d, cfg));
                SweepRow::from_point(None, m, point)
            })
            .collect::<Vec<_>>()
    })?;
    Ok(SweepResult { meta: SweepMeta { grid: Some(*grid), rates: Some(rates.to_vec()), solver: cfg.clone() }, rows })
}

/// PoA at each index `n` of a demand sequence. Pairs with `m_n^i = 0`
/// carry no flow at that `n`.
pub fn sequence_poa(
    net: &Network,
    seq: &DemandSequence,
    indices: &[u64],
    cfg: &SolverConfig,
    jobs: Option<usize>,
) -> Result<SweepResult, LabError> {
    cfg.validate()?;
    if seq.rules.len() != net.pair_count() {
        return Err(LabError::InvalidInput(format!(
            "{} inflow rules for {} OD pairs",
            seq.rules.len(),
            net.pair_count()
        )));
    }
    let rows = with_jobs(jobs, || {
        indices
            .par_iter()
            .map(|&n| {
                let point = seq.demand(n).and_then(|d| {
                    let m = d.total();
                    price_of_anarchy(net, &d, cfg).map(|p| (m, p))
                });
                match point {
                    Ok((m, p)) => SweepRow::from_point(Some(n), m, Ok(p)),
                    Err(e) => SweepRow::from_point(Some(n), f64::NAN, Err(e)),
                }
            })
            .collect::<Vec<_>>()
    })?;
    Ok(SweepResult { meta: SweepMeta { grid: None, rates: None, solver: cfg.clone() }, rows })
}
