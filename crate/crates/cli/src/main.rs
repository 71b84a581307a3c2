//! `poa`: batch front end for equilibria, price-of-anarchy sweeps and the
//! asymptotic calculus. Output is JSON or CSV on stdout unless `--out` is given.
//!
//! Exit codes: 0 success, 2 input error, 3 solver non-convergence,
//! 4 hypothesis violation.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use poa_core::asymptotics::{
    auto_benchmark, classify, limit_value, pigou_asymptotics, rate_bound_constants, rate_exponent, AsymptoticsError,
    Benchmark, RateBound, RateEstimate, TrafficLimit,
};
use poa_core::lab::{
    fit_power_law, lock_in_threshold, price_of_anarchy, salience_check, sequence_poa, sweep, DemandSequence,
    FitConfig, LabError, LogGrid, RowStatus, SweepResult, DEFAULT_SALIENCE_THRESHOLD,
};
use poa_core::routing::{Demand, Network, RoutingError};
use poa_core::scenario::{
    builtin, builtin_sequence, network_from_json, network_to_json, parse_tntp_net, parse_tntp_trips, tntp_network,
    ScenarioError, ScenarioParams, BUILTINS, SEQUENCES,
};
use poa_core::solvers::{
    brute_force_solve, solve_optimum, solve_wardrop, Objective, SolverConfig, SolverError, Variant,
};

#[derive(Parser)]
#[command(name = "poa", version, about = "Nonatomic routing games: equilibria, price of anarchy and its asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the Wardrop equilibrium or the social optimum; prints the result as JSON.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        demand: DemandArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = Problem::Eq)]
        problem: Problem,
        /// Use the exhaustive grid oracle instead of Frank-Wolfe.
        #[arg(long)]
        brute_force: bool,
    },
    /// Print the price of anarchy at one demand.
    Poa {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        demand: DemandArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print the full point (costs, gaps) as JSON.
        #[arg(long)]
        json: bool,
        /// Print the light-traffic lock-in threshold instead.
        #[arg(long)]
        lock_in: bool,
    },
    /// Price of anarchy over a log-spaced inflow grid or along a demand sequence.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Relative inflows; defaults to the scenario's.
        #[arg(long, value_parser = parse_list)]
        rates: Option<FloatList>,
        #[command(flatten)]
        sequence: SequenceArgs,
        /// Sequence indices n, comma separated.
        #[arg(long, value_parser = parse_indices)]
        indices: Option<IndexList>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Edge, path, pair and network classification at a traffic limit.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        limit: TrafficLimit,
        /// `x^D`, `1` or `edge:K`; chosen automatically when absent.
        #[arg(long)]
        benchmark: Option<BenchmarkArg>,
    },
    /// Rate exponent and explicit bound constants, optionally with an empirical fit.
    Rate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        limit: TrafficLimit,
        #[arg(long, value_parser = parse_list)]
        rates: Option<FloatList>,
        /// Also sweep the grid and fit `PoA − 1` by a power law.
        #[arg(long)]
        fit: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Value of the limit problem and its optimal shares.
    Limit {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        limit: TrafficLimit,
        #[arg(long, value_parser = parse_list)]
        rates: Option<FloatList>,
        #[arg(long)]
        benchmark: Option<BenchmarkArg>,
    },
    /// Finite-horizon salience check of a set of OD pairs along a demand sequence.
    Salience {
        #[command(flatten)]
        sequence: SequenceArgs,
        /// OD pair indices, comma separated.
        #[arg(long, value_parser = parse_indices)]
        subset: IndexList,
        #[arg(long)]
        horizon: u64,
        #[arg(long, default_value_t = DEFAULT_SALIENCE_THRESHOLD)]
        threshold: f64,
    },
    /// Builtin scenarios and sequences.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List builtin scenarios and demand sequences as JSON.
    List,
    /// Print a builtin network in the JSON schema accepted by `--network`.
    Show {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Args, Clone, Default)]
struct ParamArgs {
    #[arg(long)]
    d1: Option<u32>,
    #[arg(long)]
    d2: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
}

impl ParamArgs {
    fn params(&self) -> ScenarioParams {
        ScenarioParams { d1: self.d1, d2: self.d2, d: self.d }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Builtin scenario name (see `scenario list`).
    #[arg(long, group = "source")]
    scenario: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
    /// Network JSON file.
    #[arg(long, group = "source")]
    network: Option<PathBuf>,
    /// TNTP network file; needs `--tntp-trips`.
    #[arg(long, group = "source", requires = "tntp_trips")]
    tntp_net: Option<PathBuf>,
    #[arg(long, requires = "tntp_net")]
    tntp_trips: Option<PathBuf>,
    /// Paths per OD pair for TNTP input.
    #[arg(long, default_value_t = 5)]
    k: usize,
}

#[derive(Args)]
struct DemandArgs {
    /// Per-pair inflows, comma separated.
    #[arg(long, value_parser = parse_list, conflicts_with_all = ["total", "rates"])]
    inflow: Option<FloatList>,
    /// Total inflow M, split by `--rates` or the scenario's rates.
    #[arg(long)]
    total: Option<f64>,
    #[arg(long, value_parser = parse_list, requires = "total")]
    rates: Option<FloatList>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long, default_value_t = 25)]
    points: usize,
}

#[derive(Args)]
struct SequenceArgs {
    /// Builtin demand sequence (see `scenario list`).
    #[arg(long)]
    sequence: Option<String>,
    /// Demand sequence JSON file: a list of inflow rules.
    #[arg(long, conflicts_with = "sequence")]
    sequence_file: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Path-update rule; pairwise is the default.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Grid resolution of the brute-force oracle.
    #[arg(long)]
    resolution: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.gap_tol {
            cfg.gap_tolerance = t;
        }
        if let Some(n) = self.max_iter {
            cfg.max_iterations = n;
        }
        if let Some(v) = self.variant {
            cfg.variant = match v {
                VariantArg::Classic => Variant::Classic,
                VariantArg::AwayStep => Variant::AwayStep,
                VariantArg::Pairwise => Variant::Pairwise,
            };
        }
        if let Some(r) = self.resolution {
            cfg.brute_force_resolution = r;
        }
        cfg
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Classic,
    AwayStep,
    Pairwise,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    Eq,
    Opt,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

type FloatList = Vec<f64>;
type IndexList = Vec<u64>;

fn parse_list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect()
}

fn parse_indices(s: &str) -> Result<IndexList, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("'{t}' is not a nonnegative integer")))
        .collect()
}

#[derive(Clone, Copy)]
struct BenchmarkArg(Benchmark);

impl FromStr for BenchmarkArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let b = if s == "1" {
            Benchmark::ConstantOne
        } else if s == "x" {
            Benchmark::Monomial { degree: 1.0 }
        } else if let Some(d) = s.strip_prefix("x^") {
            Benchmark::Monomial { degree: d.parse().map_err(|_| format!("bad monomial degree '{d}'"))? }
        } else if let Some(k) = s.strip_prefix("edge:") {
            Benchmark::EdgeCost { edge: k.parse().map_err(|_| format!("bad edge index '{k}'"))? }
        } else {
            return Err(format!("unknown benchmark '{s}' (expected x^D, x, 1 or edge:K)"));
        };
        Ok(BenchmarkArg(b))
    }
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Input(String),
    NotConverged(String),
    Hypothesis(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::NotConverged(_) => 3,
            Failure::Hypothesis(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::NotConverged(m) | Failure::Hypothesis(m) => m,
        }
    }
}

impl From<AsymptoticsError> for Failure {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::NotComparable(_) | AsymptoticsError::Hypothesis(_) | AsymptoticsError::NotPolynomial { .. } => {
                Failure::Hypothesis(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Asymptotics(a) => a.into(),
            LabError::FitDegenerate(_) => Failure::NotConverged(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Input(e.to_string())
            }
        }
    )*};
}

input_error!(ScenarioError, SolverError, RoutingError, serde_json::Error);

type Outcome = Result<(), Failure>;

/// Loaded input: network, default relative rates and, for TNTP, the trip table.
struct Loaded {
    network: Network,
    rates: Vec<f64>,
    trips: Option<Demand>,
    pigou: Option<(u32, u32)>,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(input: &InputArgs) -> Result<Loaded, Failure> {
    if let Some(name) = &input.scenario {
        let params = input.params.params();
        let s = builtin(name, &params)?;
        let pigou = (name == "pigou_monomial").then(|| (params.d1.unwrap_or(1), params.d2.unwrap_or(2)));
        return Ok(Loaded { network: s.network, rates: s.rates, trips: None, pigou });
    }
    if input.params.params() != ScenarioParams::default() {
        return Err(Failure::Input("--d1/--d2/--d apply to --scenario only".into()));
    }
    if let Some(path) = &input.network {
        let network = network_from_json(&read(path)?)?;
        let k = network.pair_count();
        return Ok(Loaded { network, rates: vec![1.0 / k as f64; k], trips: None, pigou: None });
    }
    if let (Some(net), Some(trips)) = (&input.tntp_net, &input.tntp_trips) {
        let net = parse_tntp_net(&read(net)?)?;
        let trips = parse_tntp_trips(&read(trips)?)?;
        let (network, demand, mut warnings) = tntp_network(&net, &trips, input.k)?;
        warnings.extend(trips.warnings);
        for w in warnings {
            eprintln!("warning: {w}");
        }
        let rates = demand.rates().ok_or_else(|| Failure::Input("trip table has zero total flow".into()))?;
        return Ok(Loaded { network, rates, trips: Some(demand), pigou: None });
    }
    Err(Failure::Input("no input: give --scenario, --network or --tntp-net/--tntp-trips".into()))
}

fn rates_or(loaded: &Loaded, rates: &Option<FloatList>) -> Vec<f64> {
    rates.clone().unwrap_or_else(|| loaded.rates.clone())
}

fn demand(loaded: &Loaded, args: &DemandArgs) -> Result<Demand, Failure> {
    if let Some(inflow) = &args.inflow {
        return Ok(Demand::new(inflow.clone())?);
    }
    if let Some(total) = args.total {
        return Ok(Demand::from_rates(total, &rates_or(loaded, &args.rates))?);
    }
    loaded.trips.clone().ok_or_else(|| Failure::Input("no demand: give --inflow or --total".into()))
}

fn grid(args: &GridArgs) -> Result<LogGrid, Failure> {
    match (args.from, args.to) {
        (Some(from), Some(to)) => Ok(LogGrid::new(from, to, args.points)?),
        _ => Err(Failure::Input("a grid needs --from and --to".into())),
    }
}

fn sequence(args: &SequenceArgs) -> Result<Option<DemandSequence>, Failure> {
    match (&args.sequence, &args.sequence_file) {
        (Some(name), _) => Ok(Some(builtin_sequence(name)?)),
        (None, Some(path)) => Ok(Some(serde_json::from_str(&read(path)?)?)),
        (None, None) => Ok(None),
    }
}

fn benchmark(loaded: &Loaded, arg: Option<BenchmarkArg>, limit: TrafficLimit) -> Result<Benchmark, Failure> {
    match arg {
        Some(BenchmarkArg(b)) => Ok(b),
        None => Ok(auto_benchmark(&loaded.network, limit)?),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

fn sweep_status(result: &SweepResult) -> Outcome {
    let bad = result.rows.iter().filter(|r| r.status != RowStatus::Ok).count();
    if bad > 0 {
        return Err(Failure::NotConverged(format!("{bad} of {} points did not converge or failed", result.rows.len())));
    }
    Ok(())
}

#[derive(Serialize)]
struct RateOutput {
    limit: TrafficLimit,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<RateEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<RateBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<RateEstimate>,
}

#[derive(Serialize)]
struct ListEntry {
    kind: &'static str,
    name: &'static str,
    params: &'static str,
    summary: &'static str,
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve { input, demand: d, solver, problem, brute_force } => {
            let loaded = load(&input)?;
            let demand = demand(&loaded, &d)?;
            let cfg = solver.config();
            let result = match (brute_force, problem) {
                (true, Problem::Eq) => brute_force_solve(&loaded.network, &demand, Objective::Beckmann, cfg.brute_force_resolution)?,
                (true, Problem::Opt) => brute_force_solve(&loaded.network, &demand, Objective::Social, cfg.brute_force_resolution)?,
                (false, Problem::Eq) => solve_wardrop(&loaded.network, &demand, &cfg)?,
                (false, Problem::Opt) => solve_optimum(&loaded.network, &demand, &cfg)?,
            };
            emit(&json(&result)?, None)?;
            if !result.converged {
                return Err(Failure::NotConverged(format!("relative gap {:e} after {} iterations", result.relative_gap, result.iterations)));
            }
            Ok(())
        }
        Command::Poa { input, demand: d, solver, json: as_json, lock_in } => {
            let loaded = load(&input)?;
            if lock_in {
                let threshold = lock_in_threshold(&loaded.network)?;
                return emit(&format!("{}\n", threshold.to_f64()), None);
            }
            let demand = demand(&loaded, &d)?;
            let point = price_of_anarchy(&loaded.network, &demand, &solver.config())?;
            let text = if as_json { json(&point)? } else { format!("{}\n", point.poa) };
            emit(&text, None)?;
            if !point.converged {
                return Err(Failure::NotConverged(format!("gaps {:e} (eq), {:e} (opt)", point.eq_gap, point.opt_gap)));
            }
            Ok(())
        }
        Command::Sweep { input, grid: g, solver, rates, sequence: seq, indices, format, out, jobs } => {
            let loaded = load(&input)?;
            let cfg = solver.config();
            let result = match sequence(&seq)? {
                Some(seq) => {
                    let indices = indices.ok_or_else(|| Failure::Input("sequence mode needs --indices".into()))?;
                    sequence_poa(&loaded.network, &seq, &indices, &cfg, jobs)?
                }
                None => sweep(&loaded.network, &rates_or(&loaded, &rates), &grid(&g)?, &cfg, jobs)?,
            };
            let text = match format {
                Format::Csv => result.to_csv(),
                Format::Json => json(&result)?,
            };
            emit(&text, out.as_deref())?;
            sweep_status(&result)
        }
        Command::Classify { input, limit, benchmark: b } => {
            let loaded = load(&input)?;
            let bench = benchmark(&loaded, b, limit)?;
            emit(&json(&classify(&loaded.network, &bench, limit)?)?, None)
        }
        Command::Rate { input, limit, rates, fit, grid: g, solver, jobs } => {
            let loaded = load(&input)?;
            let rates = rates_or(&loaded, &rates);
            let estimate = match loaded.pigou {
                Some((d1, d2)) => pigou_asymptotics(d1 as f64, d2 as f64, limit),
                None => rate_exponent(&loaded.network, limit),
            };
            let bound = rate_bound_constants(&loaded.network, &rates, limit);
            let mut output = RateOutput { limit, estimate: None, estimate_error: None, bound: None, bound_error: None, fit: None };
            if fit {
                let result = sweep(&loaded.network, &rates, &grid(&g)?, &solver.config(), jobs)?;
                output.fit = Some(fit_power_law(&result, limit, &FitConfig::default())?);
                match estimate {
                    Ok(e) => output.estimate = Some(e),
                    Err(e) => output.estimate_error = Some(e.to_string()),
                }
                match bound {
                    Ok(b) => output.bound = Some(b),
                    Err(e) => output.bound_error = Some(e.to_string()),
                }
            } else {
                output.estimate = Some(estimate?);
                output.bound = Some(bound?);
            }
            emit(&json(&output)?, None)
        }
        Command::Limit { input, limit, rates, benchmark: b } => {
            let loaded = load(&input)?;
            let bench = benchmark(&loaded, b, limit)?;
            emit(&json(&limit_value(&loaded.network, &rates_or(&loaded, &rates), &bench, limit)?)?, None)
        }
        Command::Salience { sequence: seq, subset, horizon, threshold } => {
            let seq = sequence(&seq)?.ok_or_else(|| Failure::Input("give --sequence or --sequence-file".into()))?;
            let subset: Vec<usize> = subset.iter().map(|&i| i as usize).collect();
            emit(&json(&salience_check(&seq, &subset, horizon, threshold)?)?, None)
        }
        Command::Scenario { action: ScenarioAction::List } => {
            let entries: Vec<ListEntry> = BUILTINS
                .iter()
                .map(|b| ListEntry { kind: "scenario", name: b.name, params: b.params, summary: b.summary })
                .chain(SEQUENCES.iter().map(|b| ListEntry { kind: "sequence", name: b.name, params: b.params, summary: b.summary }))
                .collect();
            emit(&json(&entries)?, None)
        }
        Command::Scenario { action: ScenarioAction::Show { name, params } } => {
            let s = builtin(&name, &params.params())?;
            emit(&(network_to_json(&s.network) + "\n"), None)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
