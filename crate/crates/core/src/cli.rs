//! Argument parsing and dispatch for the `rdmc` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::chainwalk::{
    check_antichain_bound, check_hitting_lemma_with, check_obs_k2, check_obs_k3, f_largest_binomials,
    simulate_walk_with, walk_success_probability, ChainCertificate, HittingOptions, OrderPolicy, WalkInstance,
};
use crate::dptable::{
    build_table_with, load_table, parse_delta, save_table, verify_stash, BuildOptions, CandidateRule, GridSpec,
    Schedule,
};
use crate::error::{Error, Result};
use crate::exact::{parse_rational, Rational, Surd, SurdSum};
use crate::oracle::{
    eliminate, exact_tail_capped, high_dim_exact_tail, NormDirection, TailMode, TailQuery, VectorWeightSet,
    WeightVector, DEFAULT_ENUMERATION_CAP,
};
use crate::prawitz::{prawitz_f, theta, Integrator, PrawitzParams, Resolution};
use crate::report::VerificationReport;
use crate::verify::{emit_report, run_campaign, Campaign, CampaignOptions, ReportFormat};

/// Exit status for bad arguments or unusable inputs.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rdmc", version, about = "Certified lower bounds on Rademacher tail probabilities")]
pub struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact tail probabilities by enumeration.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// The characteristic-function lower bound F.
    #[command(subcommand)]
    Prawitz(PrawitzCmd),
    /// Build, query and check the bound table.
    #[command(subcommand)]
    Table(TableCmd),
    /// Antichain counting bounds.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// The stopped sign walk.
    #[command(subcommand)]
    Walk(WalkCmd),
    /// Run a verification campaign.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Pr[X ? t] for one weight vector.
    Tail {
        /// Comma-separated weights, e.g. `1/2,1/2,sqrt(1/8)`; normalized to unit variance.
        #[arg(long, value_parser = surd, value_delimiter = ',', required = true)]
        weights: Vec<Surd>,
        #[arg(long, value_parser = surd_sum)]
        t: SurdSum,
        /// Upper threshold for `abs-in-open`.
        #[arg(long, value_parser = surd_sum)]
        t2: Option<SurdSum>,
        #[arg(long, default_value = "gt")]
        mode: TailMode,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Pr[||X|| >= 1] or Pr[||X|| <= 1] for vector weights.
    Highdim {
        /// Vectors separated by `;`, coordinates by `,`.
        #[arg(long)]
        vectors: String,
        #[arg(long, default_value = "le")]
        direction: NormDirection,
        /// Rescale so that the squared norms sum to one.
        #[arg(long)]
        normalize: bool,
    },
    /// Condition on the signs of the largest weights and check the total-probability identity.
    Eliminate {
        #[arg(long, value_parser = surd, value_delimiter = ',', required = true)]
        weights: Vec<Surd>,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = surd_sum)]
        t: SurdSum,
        #[arg(long, default_value = "gt")]
        mode: TailMode,
    },
}

#[derive(Debug, Subcommand)]
pub enum PrawitzCmd {
    /// Lower bound F(a, x, T, q) with its error budget.
    Eval {
        #[arg(long)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Defaults to pi / a.
        #[arg(long = "T")]
        big_t: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value = "trapezoid")]
        mode: Integrator,
        /// Base panels over the cut-off window.
        #[arg(long)]
        panels: Option<usize>,
    },
    /// Bracket around the root of exp(-t^2/2) + cos t.
    Theta,
}

#[derive(Debug, Args)]
pub struct TableArg {
    #[arg(long, env = "RDMC_TABLE")]
    pub table: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TableCmd {
    /// Compute D_0 and iterate the recursion, then save the table
    Build {
        #[arg(long, default_value = "1/400")]
        delta: String,
        #[arg(long, default_value_t = 10)]
        iters: u32,
        #[arg(long)]
        out: PathBuf,
        /// Read the initial table from here, or write it after computing.
        #[arg(long)]
        d0_cache: Option<PathBuf>,
        #[arg(long, default_value = "trapezoid")]
        integrator: Integrator,
        #[arg(long, default_value = "intervals")]
        candidates: CandidateRule,
        #[arg(long, default_value = "in-place")]
        schedule: Schedule,
        /// Print progress to stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Lower bound on Pr[X > x] for max weight at most a
    Query {
        #[command(flatten)]
        table: TableArg,
        #[arg(long)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Check the stored reference values
    VerifyStash {
        #[command(flatten)]
        table: TableArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    /// Sum of the k largest binomial coefficients C(t, i).
    F {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
    },
    /// Window mass of the signed sums against f(k, t) / 2^t.
    Check {
        #[arg(long, value_parser = rational, value_delimiter = ',', required = true)]
        weights: Vec<Rational>,
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = rational)]
        alpha: Rational,
        #[arg(long, value_parser = rational, value_delimiter = ',')]
        tail: Vec<Rational>,
    },
    /// Two separated weights: window mass at most 1/4.
    K2 {
        #[arg(long, value_parser = rational)]
        b1: Rational,
        #[arg(long, value_parser = rational)]
        b2: Rational,
        #[arg(long, value_parser = rational)]
        delta: Rational,
        #[arg(long, value_parser = rational, value_delimiter = ',')]
        tail: Vec<Rational>,
    },
    /// Three separated weights: window mass at most 1/8.
    K3 {
        #[arg(long, value_parser = rational)]
        c1: Rational,
        #[arg(long, value_parser = rational)]
        c2: Rational,
        #[arg(long, value_parser = rational)]
        c3: Rational,
        #[arg(long, value_parser = rational)]
        delta: Rational,
        #[arg(long, value_parser = rational, value_delimiter = ',')]
        tail: Vec<Rational>,
    },
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Step sizes sharing one radicand, e.g. `1,1,1/2` or `sqrt(2),sqrt(2)`.
    #[arg(long, value_parser = surd, value_delimiter = ',', required = true)]
    pub set: Vec<Surd>,
    #[arg(long, value_parser = surd)]
    pub x: Surd,
    #[arg(long, default_value = "best")]
    pub policy: OrderPolicy,
}

impl WalkArgs {
    fn instance(&self) -> Result<WalkInstance> {
        WalkInstance::new(self.set.clone(), self.x.clone(), self.policy)
    }
}

#[derive(Debug, Subcommand)]
pub enum WalkCmd {
    /// Exact probability that the walk is absorbed.
    Prob(WalkArgs),
    /// Check the hitting bound on one instance.
    Lemma {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, value_parser = rational)]
        eta: Option<Rational>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
    /// Monte Carlo estimate with a one-sided confidence bound.
    Sim {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// a1, a2, a3, qsums, stash, fixtures or theorems.
    pub campaign: Campaign,
    #[arg(long, env = "RDMC_TABLE")]
    pub table: Option<PathBuf>,
    /// Mesh step; defaults to the campaign's own value.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub off_mesh: usize,
    #[arg(long, default_value_t = 50)]
    pub crossfire: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

/// What a command produced.
#[derive(Debug)]
pub enum Output {
    Value { text: String, json: Value },
    Report(VerificationReport),
}

impl Output {
    fn value(text: impl Into<String>, json: Value) -> Self {
        Output::Value { text: text.into(), json }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Output::Value { .. } => 0,
            Output::Report(r) => r.exit_code(),
        }
    }

    pub fn render(&self, json: bool) -> Result<String> {
        match self {
            Output::Value { text, json: v } => Ok(if json { serde_json::to_string_pretty(v)? } else { text.clone() }),
            Output::Report(r) => {
                emit_report(r, if json { ReportFormat::Json } else { ReportFormat::Text })
            }
        }
    }
}

/// Parses `std::env::args`, runs the command and returns the process exit code.
pub fn main_exit_code() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    match run(&cli).and_then(|out| Ok((out.render(cli.json)?, out.exit_code()))) {
        Ok((text, code)) => {
            // A closed pipe downstream is not an error of the command.
            let _ = writeln!(std::io::stdout().lock(), "{}", text.trim_end());
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                1
            }
        }
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Oracle(c) => oracle(c),
        Command::Prawitz(c) => prawitz(c),
        Command::Table(c) => table(c),
        Command::Chain(c) => chain(c),
        Command::Walk(c) => walk(c, cli.seed),
        Command::Verify(v) => verify(v, cli.seed),
    }
}

fn oracle(cmd: &OracleCmd) -> Result<Output> {
    match cmd {
        OracleCmd::Tail { weights, t, t2, mode, cap } => {
            let w = WeightVector::from_surds(weights)?;
            let q = match (mode, t2) {
                (TailMode::AbsInOpen, Some(t2)) => TailQuery::abs_in_open(t.clone(), t2.clone())?,
                (TailMode::AbsInOpen, None) => {
                    return Err(Error::InvalidQuery("abs-in-open needs --t2".into()));
                }
                (m, _) => TailQuery::new(*m, t.clone())?,
            };
            let p = exact_tail_capped(&w, &q, *cap)?;
            Ok(Output::value(
                format!("{p}"),
                json!({ "mode": mode, "threshold": t.to_string(), "probability": p.to_string(), "value": p.to_f64() }),
            ))
        }
        OracleCmd::Highdim { vectors, direction, normalize } => {
            let parsed = parse_vectors(vectors)?;
            let set = if *normalize {
                VectorWeightSet::normalized(parsed)?
            } else {
                VectorWeightSet::new(parsed)?
            };
            let p = high_dim_exact_tail(&set, *direction)?;
            Ok(Output::value(
                format!("{p}"),
                json!({ "direction": direction, "probability": p.to_string(), "value": p.to_f64() }),
            ))
        }
        OracleCmd::Eliminate { weights, m, t, mode } => {
            let w = WeightVector::from_surds(weights)?;
            let e = eliminate(&w, *m)?;
            let q = TailQuery::new(*mode, t.clone())?;
            let total = e.total_probability(&q, DEFAULT_ENUMERATION_CAP)?;
            let direct = exact_tail_capped(&w, &q, DEFAULT_ENUMERATION_CAP)?.to_rational();
            let scenarios: Vec<Value> = e
                .scenarios
                .iter()
                .map(|s| json!({ "signs": s.signs, "threshold": e.map_threshold(s, t).to_string() }))
                .collect();
            let mut text = format!("sigma_{m}^2 = {}\n", e.sigma_sq);
            for s in &e.scenarios {
                text.push_str(&format!("  signs {:?}: residual threshold {}\n", s.signs, e.map_threshold(s, t)));
            }
            text.push_str(&format!("total {total}, direct {direct}, identity {}", total == direct));
            Ok(Output::value(
                text,
                json!({
                    "m": m,
                    "sigma_sq": e.sigma_sq.to_string(),
                    "scenarios": scenarios,
                    "total": total.to_string(),
                    "direct": direct.to_string(),
                    "identity_holds": total == direct,
                }),
            ))
        }
    }
}

fn surd(s: &str) -> Result<Surd> {
    Surd::parse(s)
}

fn surd_sum(s: &str) -> Result<SurdSum> {
    SurdSum::parse(s)
}

fn rational(s: &str) -> Result<Rational> {
    parse_rational(s)
}

fn parse_vectors(s: &str) -> Result<Vec<Vec<Surd>>> {
    s.split(';')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.split(',').map(Surd::parse).collect())
        .collect()
}

fn prawitz(cmd: &PrawitzCmd) -> Result<Output> {
    match cmd {
        PrawitzCmd::Eval { a, x, big_t, q, mode, panels } => {
            let t = big_t.unwrap_or(std::f64::consts::PI / a);
            let p = PrawitzParams::new(*a, *x, t, *q)?;
            let res = panels.map_or_else(Resolution::default, Resolution::with_panels);
            let e = prawitz_f(&p, *mode, &res)?;
            Ok(Output::value(
                format!(
                    "F({a}, {x}; T={t}, q={q}) >= {:.9} (estimate {:.9}, budget {:.3e}, {})",
                    e.value, e.estimate, e.error_budget, e.integrator
                ),
                json!({ "params": p, "evaluation": e }),
            ))
        }
        PrawitzCmd::Theta => {
            let th = theta();
            Ok(Output::value(
                format!("theta in [{:.13}, {:.13}] (width {:.1e})", th.lo, th.hi, th.width()),
                json!(th),
            ))
        }
    }
}

fn table(cmd: &TableCmd) -> Result<Output> {
    match cmd {
        TableCmd::Build { delta, iters, out, d0_cache, integrator, candidates, schedule, progress } => {
            let (num, den) = parse_delta(delta)?;
            let grid = GridSpec::new(num, den, *iters)?;
            let opts = BuildOptions {
                integrator: *integrator,
                d0_cache: d0_cache.clone(),
                candidates: *candidates,
                schedule: *schedule,
                progress: *progress,
                ..BuildOptions::default()
            };
            let t = build_table_with(&grid, &opts)?;
            save_table(&t, out)?;
            let log = serde_json::to_value(&t.log)?;
            Ok(Output::value(
                format!("wrote {} ({grid})\n{}", out.display(), serde_json::to_string_pretty(&log)?),
                json!({ "path": out, "grid": grid.to_string(), "log": log }),
            ))
        }
        TableCmd::Query { table, a, x } => {
            let t = load_table(&table.table)?;
            let v = t.query(*a, *x)?;
            Ok(Output::value(format!("{v}"), json!({ "a": a, "x": x, "value": v })))
        }
        TableCmd::VerifyStash { table } => Ok(Output::Report(verify_stash(&load_table(&table.table)?))),
    }
}

fn chain(cmd: &ChainCmd) -> Result<Output> {
    match cmd {
        ChainCmd::F { k, t } => {
            let f = f_largest_binomials(*k, *t)?;
            Ok(Output::value(
                format!("{f}"),
                json!({ "k": k, "t": t, "f": f.to_string(), "fraction": format!("{f}/2^{t}") }),
            ))
        }
        ChainCmd::Check { weights, k, alpha, tail } => {
            let c = ChainCertificate::new(weights.clone(), *k, alpha.clone(), tail.clone())?;
            Ok(Output::Report(check_antichain_bound(&c)?))
        }
        ChainCmd::K2 { b1, b2, delta, tail } => Ok(Output::Report(check_obs_k2(b1, b2, delta, tail)?)),
        ChainCmd::K3 { c1, c2, c3, delta, tail } => Ok(Output::Report(check_obs_k3(c1, c2, c3, delta, tail)?)),
    }
}

fn walk(cmd: &WalkCmd, seed: u64) -> Result<Output> {
    match cmd {
        WalkCmd::Prob(w) => {
            let inst = w.instance()?;
            let p = walk_success_probability(&inst)?;
            Ok(Output::value(
                format!("{p}"),
                json!({ "policy": inst.policy.to_string(), "probability": p.to_string(), "value": p.to_f64() }),
            ))
        }
        WalkCmd::Lemma { walk, eta, trials } => {
            let mut inst = walk.instance()?;
            if let Some(eta) = eta {
                inst = inst.with_eta(eta.clone())?;
            }
            let opts = HittingOptions { trials: *trials, seed, ..HittingOptions::default() };
            Ok(Output::Report(check_hitting_lemma_with(&inst, &opts)?))
        }
        WalkCmd::Sim { walk, trials, confidence } => {
            let inst = walk.instance()?;
            let s = simulate_walk_with(&inst, *trials, seed, *confidence)?;
            Ok(Output::value(
                format!(
                    "{}/{} = {:.6}, lower bound {:.6} at {}",
                    s.successes, s.trials, s.estimate, s.lower_bound, s.confidence
                ),
                json!(s),
            ))
        }
    }
}

fn verify(v: &VerifyArgs, seed: u64) -> Result<Output> {
    let table = if v.campaign.needs_table() {
        let path = v
            .table
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter(format!("campaign {} needs --table or RDMC_TABLE", v.campaign)))?;
        Some(load_table(path)?)
    } else {
        None
    };
    let opts = CampaignOptions {
        off_mesh_samples: v.off_mesh,
        crossfire: v.crossfire,
        theorem_samples: v.samples,
        seed,
    };
    Ok(Output::Report(run_campaign(v.campaign, table.as_ref(), v.delta, &opts)?))
}
