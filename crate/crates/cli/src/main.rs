mod report;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use qprop_core::bounds::{prod2_test_budget, scan_subsequence_bound};
use qprop_core::ranktest::{beta_closed_form, beta_limit_large_eps, beta_numeric_oracle, copy_complexity_few_copy, OracleConfig};
use qprop_core::scalar::ParseScalar;
use qprop_core::schmidt::SCHMIDT_RANK_TOL;
use qprop_core::ttns::copies::single_edge_copies;
use qprop_core::ttns::{
    faithful_ttns_approx, farness_hard_instance, few_copy_tree_bounds, hard_instance_state, is_ttns,
    lb_copy_threshold, ttns_copy_upper, ttns_test_accept_hard_instance, LogBase, Tree, TreeState,
};
use qprop_core::verify::{run_suites, Suite, VerifyOptions};
use qprop_core::wss::{accept_prob_rank_test, AcceptMethod, Acceptance};
use qprop_core::{ArithmeticMode, BigRational, BigUint, Caps, Error, Partition, Result, Scalar, Spectrum};

use report::{num, Report};

/// Acceptance probabilities, soundness and copy budgets for rank and
/// tree-tensor-network property tests.
#[derive(Parser, Debug)]
#[command(name = "qprop", version)]
struct Cli {
    /// Number system for the symmetric-function code paths.
    #[arg(long, global = true, default_value = "rational")]
    arithmetic: ArithmeticMode,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override an enumeration cap, e.g. `--cap partitions=100000`.
    /// Names: partitions, brute-words, ssyt, automaton-states.
    #[arg(long = "cap", global = true, value_name = "NAME=VALUE")]
    caps: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Soundness β(ε) of the (r+1)-copy rank test.
    Beta(BetaArgs),
    /// β(ε) curves as CSV with columns epsilon,r,d,beta.
    Figure(FigureArgs),
    /// Acceptance probability of the rank-r test on N copies.
    Accept(AcceptArgs),
    /// Tree tensor network states.
    #[command(subcommand)]
    Ttns(TtnsCommand),
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Scan the LDS ≤ 2 subsequence bound over a window of N t.
    Scan(ScanArgs),
    /// Copy budgets.
    #[command(subcommand)]
    Copies(CopiesCommand),
}

fn number(s: &str) -> std::result::Result<f64, String> {
    f64::parse_scalar(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct BetaArgs {
    #[arg(long, value_parser = number)]
    eps: f64,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    d: usize,
    /// Also run the numeric minimisation and compare.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 2048)]
    grid: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct FigureArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    r_list: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    d: usize,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Write the CSV here and print a summary report instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Brute,
    Automaton,
    Mc,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["spectrum", "spectrum_file", "hard_instance"])))]
struct AcceptArgs {
    /// Comma-separated probabilities, e.g. `1/2,1/4,1/4`.
    #[arg(long)]
    spectrum: Option<String>,
    /// JSON array of probabilities (numbers or strings such as "1/3").
    #[arg(long)]
    spectrum_file: Option<PathBuf>,
    /// `eps,n,d`: the per-edge hard-instance spectrum, tested on all n-1 edges.
    #[arg(long)]
    hard_instance: Option<String>,
    /// Number of copies.
    #[arg(long = "copies", short = 'N', visible_alias = "N")]
    copies: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// Monte-Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Shape {
    Path,
    Star,
    Caterpillar,
    Random,
}

#[derive(Subcommand, Debug)]
enum TtnsCommand {
    /// Truncate a state to bond dimension r and certify the overlap.
    Approx {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        r: usize,
        /// Write the truncated state here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the Schmidt rank across every edge.
    Check {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = SCHMIDT_RANK_TOL)]
        tol: f64,
    },
    /// Build the hard instance on a tree.
    Hardstate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_parser = number)]
        eps: f64,
        #[arg(long)]
        d: usize,
        /// Also report the distance to bond dimension r.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a tree file.
    Tree {
        #[arg(long, value_enum)]
        shape: Shape,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a Haar-random state on a tree.
    Random {
        #[arg(long)]
        tree: PathBuf,
        /// One local dimension per vertex, or a single value for all.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mutation {
    HookOffByOne,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// `all` or a comma-separated list of partitions, wss, ranktest, schmidt, ttns, bounds, linalg.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Deliberately break a formula to check that the suites notice.
    #[arg(long, value_enum, hide = true)]
    mutate: Option<Mutation>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, default_value_t = 50)]
    n_max: usize,
    #[arg(long, default_value_t = 200)]
    t_steps: usize,
    #[arg(long, value_parser = number, default_value = "0.5")]
    window: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LogBaseArg {
    Natural,
    Two,
    Ten,
}

impl From<LogBaseArg> for LogBase {
    fn from(b: LogBaseArg) -> Self {
        match b {
            LogBaseArg::Natural => LogBase::Natural,
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::Ten => LogBase::Ten,
        }
    }
}

#[derive(Subcommand, Debug)]
enum CopiesCommand {
    /// Copies for the rank-r test to reject a state with Schmidt tail `eps`.
    Rank {
        #[arg(long)]
        r: usize,
        #[arg(long, value_parser = number)]
        eps: f64,
        #[arg(long, value_parser = number, default_value = "1/3")]
        target: f64,
    },
    /// Upper and lower copy counts for testing bond dimension r on n vertices.
    Tree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_parser = number)]
        eps: f64,
        #[arg(long, value_parser = number, default_value = "1/3")]
        target: f64,
        #[arg(long, value_enum, default_value_t = LogBaseArg::Natural)]
        log_base: LogBaseArg,
    },
    /// Repetitions of the (r+1)-copy test, and the tree budgets when `--n` is given.
    Fewcopy {
        #[arg(long)]
        r: usize,
        #[arg(long, value_parser = number)]
        eps: f64,
        #[arg(long, value_parser = number, default_value = "1/3")]
        target: f64,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Budget for testing products of n/2 qutrit pairs of Schmidt rank at most 2.
    Prod2 {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = number)]
        eps: f64,
    },
}

/// What a command produced.
struct Outcome {
    report: Report,
    /// Replaces the report on stdout when set.
    raw: Option<String>,
    failed: bool,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome {
            report,
            raw: None,
            failed: false,
        }
    }
}

fn parse_caps(overrides: &[String]) -> Result<Caps> {
    let mut caps = Caps::default();
    for o in overrides {
        let (name, value) = o
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("cap override `{o}` is not NAME=VALUE")))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("cap value `{value}` is not an integer")))?;
        match name.trim() {
            "partitions" => caps.partitions = value,
            "brute-words" => caps.brute_words = value,
            "ssyt" => caps.ssyt = value,
            "automaton-states" => caps.automaton_states = value,
            other => return Err(Error::Parse(format!("unknown cap `{other}`"))),
        }
    }
    Ok(caps)
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn read_tree(path: &Path) -> Result<Tree> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn float_only(cli: &Cli, report: &mut Report) {
    if cli.arithmetic == ArithmeticMode::Rational {
        report.note("this command runs in floating point only");
    }
    report.arithmetic_mode = ArithmeticMode::Float.to_string();
}

fn run(cli: &Cli) -> Result<Outcome> {
    let caps = parse_caps(&cli.caps)?;
    match &cli.command {
        Command::Beta(args) => cmd_beta(cli, args),
        Command::Figure(args) => cmd_figure(cli, args),
        Command::Accept(args) => match cli.arithmetic {
            ArithmeticMode::Rational => cmd_accept::<BigRational>(cli, args, &caps),
            ArithmeticMode::Float => cmd_accept::<f64>(cli, args, &caps),
        },
        Command::Ttns(sub) => cmd_ttns(cli, sub),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Scan(args) => {
            let mut report = Report::new("scan", ArithmeticMode::Float);
            float_only(cli, &mut report);
            report
                .param("n_max", args.n_max)
                .param("t_steps", args.t_steps)
                .param("window", args.window);
            let scan = scan_subsequence_bound(args.n_max, args.t_steps, args.window)?;
            report.value("scan", &scan).note("c2 = 22; c1 is reported from the grid, not asserted");
            let failed = scan.violations > 0;
            Ok(Outcome {
                report,
                raw: None,
                failed,
            })
        }
        Command::Copies(sub) => cmd_copies(cli, sub, &caps),
    }
}

fn cmd_beta(cli: &Cli, args: &BetaArgs) -> Result<Outcome> {
    let mut report = Report::new("beta", ArithmeticMode::Float);
    float_only(cli, &mut report);
    report.param("eps", args.eps).param("r", args.r).param("d", args.d);
    let res = beta_closed_form(args.eps, args.r, args.d)?;
    report
        .value("beta", res.beta)
        .value("z", res.z)
        .value("argmin", res.argmin)
        .value("terms", res.terms)
        .value("witness", res.witness.probs());
    let mut failed = false;
    if args.oracle {
        let config = OracleConfig {
            grid: args.grid,
            random_samples: args.samples,
            seed: cli.seed,
            ..OracleConfig::default()
        };
        let oracle = beta_numeric_oracle(args.eps, args.r, args.d, &config)?;
        let diff = (oracle.result.beta - res.beta).abs();
        failed = diff > 1e-6 || oracle.violations > 0;
        report.param("grid", args.grid).param("samples", args.samples);
        report.seed = Some(cli.seed);
        report.value(
            "oracle",
            json!({
                "beta": oracle.result.beta,
                "abs_diff": diff,
                "random_samples": oracle.random_samples,
                "random_min_e": num(oracle.random_min),
                "violations": oracle.violations,
                "agrees": !failed,
            }),
        );
    }
    Ok(Outcome {
        report,
        raw: None,
        failed,
    })
}

fn cmd_figure(cli: &Cli, args: &FigureArgs) -> Result<Outcome> {
    if args.points == 0 || args.r_list.is_empty() {
        return Err(Error::Domain("need at least one point and one r".into()));
    }
    for &r in &args.r_list {
        if r == 0 || r >= args.d {
            return Err(Error::Domain(format!("need 1 <= r < d, got r = {r}, d = {}", args.d)));
        }
    }
    let jobs: Vec<(usize, usize)> = args
        .r_list
        .iter()
        .flat_map(|&r| (1..=args.points).map(move |i| (r, i)))
        .collect();
    let rows: Vec<(f64, usize, f64)> = jobs
        .par_iter()
        .map(|&(r, i)| {
            let max_eps = 1.0 - r as f64 / args.d as f64;
            let eps = max_eps * (i as f64 / args.points as f64);
            beta_closed_form(eps, r, args.d).map(|b| (eps, r, b.beta))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("epsilon,r,d,beta\n");
    for &(eps, r, beta) in &rows {
        csv.push_str(&format!("{eps},{r},{},{beta}\n", args.d));
    }

    let mut report = Report::new("figure", ArithmeticMode::Float);
    float_only(cli, &mut report);
    report
        .param("r_list", &args.r_list)
        .param("d", args.d)
        .param("points", args.points);
    let mut curves = serde_json::Map::new();
    for &r in &args.r_list {
        let curve: Vec<f64> = rows.iter().filter(|row| row.1 == r).map(|row| row.2).collect();
        let monotone = curve.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        curves.insert(
            r.to_string(),
            json!({
                "endpoint": curve.last().copied().unwrap_or(f64::NAN),
                "limit": beta_limit_large_eps(r),
                "monotone_non_increasing": monotone,
            }),
        );
    }
    report.value("rows", rows.len()).value("curves", Value::Object(curves));
    match &args.out {
        Some(path) => {
            fs::write(path, &csv)?;
            report.param("out", path.display().to_string());
            Ok(Outcome::ok(report))
        }
        None => Ok(Outcome {
            report,
            raw: Some(csv),
            failed: false,
        }),
    }
}

fn parse_list<S: ParseScalar>(s: &str) -> Result<Vec<S>> {
    s.split(',').map(|x| S::parse_scalar(x.trim())).collect()
}

fn read_spectrum_file<S: ParseScalar>(path: &Path) -> Result<Vec<S>> {
    let v: Value = serde_json::from_str(&read(path)?)?;
    let items = v
        .as_array()
        .ok_or_else(|| Error::Parse("spectrum file must hold a JSON array".into()))?;
    items
        .iter()
        .map(|x| match x {
            Value::Number(n) => S::parse_scalar(&n.to_string()),
            Value::String(s) => S::parse_scalar(s),
            other => Err(Error::Parse(format!("`{other}` is not a probability"))),
        })
        .collect()
}

fn acceptance_json<S: Scalar + Display>(a: &Acceptance<S>) -> Value {
    match a {
        Acceptance::Value { value, short_circuit } => {
            let mut v = json!({ "value": num(value.to_f64()), "short_circuit": short_circuit });
            if S::MODE == ArithmeticMode::Rational {
                v["exact"] = Value::String(value.to_string());
            }
            v
        }
        Acceptance::Estimate(e) => json!({
            "value": e.value,
            "stderr": e.stderr,
            "samples": e.samples,
            "seed": e.seed,
        }),
    }
}

fn cmd_accept<S: ParseScalar + Display>(cli: &Cli, args: &AcceptArgs, caps: &Caps) -> Result<Outcome> {
    let mut report = Report::new("accept", S::MODE);
    report
        .param("copies", args.copies)
        .param("r", args.r)
        .param("method", format!("{:?}", args.method).to_lowercase());
    let method = match args.method {
        MethodArg::Exact => AcceptMethod::Exact,
        MethodArg::Brute => AcceptMethod::Brute,
        MethodArg::Automaton => AcceptMethod::Automaton,
        MethodArg::Mc => {
            report.param("samples", args.samples);
            report.seed = Some(cli.seed);
            AcceptMethod::MonteCarlo {
                samples: args.samples,
                seed: cli.seed,
            }
        }
    };
    if let Some(spec) = &args.hard_instance {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let [eps, n, d] = parts[..] else {
            return Err(Error::Parse(format!("--hard-instance expects eps,n,d, got `{spec}`")));
        };
        let eps = S::parse_scalar(eps)?;
        let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("`{s}` is not a count")));
        let (n, d) = (parse(n)?, parse(d)?);
        report
            .param("hard_instance", json!({ "eps": eps.to_f64(), "n": n, "d": d }));
        let res = ttns_test_accept_hard_instance(&eps, n, d, args.r, args.copies, method, caps)?;
        if let Some(single) = &res.single_edge {
            report.value("single_edge", acceptance_json(single));
        }
        report.value("acceptance", acceptance_json(&res.value));
        return Ok(Outcome::ok(report));
    }
    let probs: Vec<S> = match (&args.spectrum, &args.spectrum_file) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(path)) => read_spectrum_file(path)?,
        (None, None) => unreachable!("clap requires an input"),
    };
    let alpha = Spectrum::new(probs)?;
    report.param("spectrum", alpha.to_vec_f64());
    let res = accept_prob_rank_test(&alpha, args.copies, args.r, method, caps)?;
    report.value("acceptance", acceptance_json(&res));
    Ok(Outcome::ok(report))
}

fn write_state(path: &Path, state: &TreeState) -> Result<()> {
    let mut s = state.to_json()?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn cmd_ttns(cli: &Cli, sub: &TtnsCommand) -> Result<Outcome> {
    let mut report = Report::new("ttns", ArithmeticMode::Float);
    float_only(cli, &mut report);
    match sub {
        TtnsCommand::Approx { tree, state, r, out } => {
            report.param("action", "approx").param("r", r);
            let t = read_tree(tree)?;
            let s = TreeState::from_json(&read(state)?)?;
            let (approx, cert) = faithful_ttns_approx(&s, &t, *r)?;
            let check = is_ttns(&approx, &t, *r, SCHMIDT_RANK_TOL)?;
            let failed = !(cert.projection_bound_holds && cert.overlap_bound_holds && check.is_ttns);
            report.value("certificate", &cert).value("output_is_ttns", check.is_ttns);
            if let Some(path) = out {
                write_state(path, &approx)?;
            }
            Ok(Outcome {
                report,
                raw: None,
                failed,
            })
        }
        TtnsCommand::Check { tree, state, r, tol } => {
            report.param("action", "check").param("r", r).param("tol", tol);
            let t = read_tree(tree)?;
            let s = TreeState::from_json(&read(state)?)?;
            let check = is_ttns(&s, &t, *r, *tol)?;
            let failed = !check.is_ttns;
            report.value("check", &check);
            Ok(Outcome {
                report,
                raw: None,
                failed,
            })
        }
        TtnsCommand::Hardstate { tree, eps, d, r, out } => {
            report.param("action", "hardstate").param("eps", eps).param("d", d);
            let t = read_tree(tree)?;
            let state = hard_instance_state(&t, *eps, *d)?;
            report
                .value("site_dims", state.site_dims())
                .value("amplitudes", state.amplitudes().len());
            if let Some(r) = r {
                report.param("r", r);
                report.value("farness", farness_hard_instance(*eps, t.n(), *d, *r)?);
            }
            if let Some(path) = out {
                write_state(path, &state)?;
            }
            Ok(Outcome::ok(report))
        }
        TtnsCommand::Tree { shape, n, out } => {
            report.param("action", "tree").param("n", n);
            report.param("shape", format!("{shape:?}").to_lowercase());
            let t = match shape {
                Shape::Path => Tree::path(*n)?,
                Shape::Star => Tree::star(*n)?,
                Shape::Caterpillar => Tree::caterpillar(*n)?,
                Shape::Random => {
                    report.seed = Some(cli.seed);
                    Tree::random(*n, &mut ChaCha8Rng::seed_from_u64(cli.seed))?
                }
            };
            report.value("tree", &t);
            if let Some(path) = out {
                fs::write(path, serde_json::to_string(&t)? + "\n")?;
            }
            Ok(Outcome::ok(report))
        }
        TtnsCommand::Random { tree, dims, out } => {
            report.param("action", "random").param("dims", dims);
            report.seed = Some(cli.seed);
            let t = read_tree(tree)?;
            let site_dims = match dims.len() {
                1 => vec![dims[0]; t.n()],
                _ => dims.clone(),
            };
            let state = TreeState::random(site_dims, &mut ChaCha8Rng::seed_from_u64(cli.seed))?;
            let check = is_ttns(&state, &t, usize::MAX, SCHMIDT_RANK_TOL)?;
            let ranks: Vec<usize> = check.edges.iter().map(|e| e.rank).collect();
            report.value("edge_ranks", ranks);
            write_state(out, &state)?;
            Ok(Outcome::ok(report))
        }
    }
}

fn hook_off_by_one(lambda: &Partition) -> BigUint {
    let factorial: BigUint = (1..=lambda.n() as u64).product();
    let hooks: BigUint = lambda.hook_lengths().map(|h| BigUint::from(h as u64 + 1)).product();
    factorial / hooks
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<Outcome> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        args.suite.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?
    };
    let mut options = VerifyOptions {
        seed: cli.seed,
        ..VerifyOptions::default()
    };
    let mut report = Report::new("verify", cli.arithmetic);
    report.param("suite", &args.suite);
    report.seed = Some(cli.seed);
    if let Some(Mutation::HookOffByOne) = args.mutate {
        options.dim = &hook_off_by_one;
        report.param("mutate", "hook-off-by-one");
    }
    let results = run_suites(&suites, &options);
    let mut map = serde_json::Map::new();
    for r in &results {
        map.insert(
            r.suite.to_string(),
            json!({ "checks": r.checks, "passed": r.passed(), "failures": r.failures }),
        );
    }
    let passed = results.iter().all(|r| r.passed());
    report.value("suites", Value::Object(map)).value("passed", passed);
    Ok(Outcome {
        report,
        raw: None,
        failed: !passed,
    })
}

const INSTANTIATED: &str = "constants are instantiated for illustration and are not guaranteed by the analysis";

fn cmd_copies(cli: &Cli, sub: &CopiesCommand, caps: &Caps) -> Result<Outcome> {
    let mut report = Report::new("copies", ArithmeticMode::Float);
    float_only(cli, &mut report);
    match sub {
        CopiesCommand::Rank { r, eps, target } => {
            report.param("kind", "rank").param("r", r).param("eps", eps).param("target", target);
            let (copies, witness, acceptance) = single_edge_copies(*r, *eps, *target, caps)?;
            report
                .value("copies", copies)
                .value("witness", witness)
                .value("acceptance", acceptance);
        }
        CopiesCommand::Tree {
            n,
            r,
            eps,
            target,
            log_base,
        } => {
            report
                .param("kind", "tree")
                .param("n", n)
                .param("r", r)
                .param("eps", eps)
                .param("target", target)
                .param("log_base", LogBase::from(*log_base));
            let upper = ttns_copy_upper(*n, *r, *eps, *target, caps)?;
            let lower = lb_copy_threshold(*n, *r, *eps, (*log_base).into())?;
            report.value("upper", &upper).value("lower", &lower).note(INSTANTIATED);
        }
        CopiesCommand::Fewcopy { r, eps, target, n } => {
            report.param("kind", "fewcopy").param("r", r).param("eps", eps).param("target", target);
            let few = copy_complexity_few_copy(*eps, *r, *target)?;
            report
                .value("per_round_beta", few.per_round_beta)
                .value("k", few.rounds)
                .value("copies", few.total_copies);
            if let Some(n) = n {
                report.param("n", n);
                let tree = few_copy_tree_bounds(*n, *r, *eps)?;
                report
                    .value(
                        "tree",
                        json!({
                            "upper": tree.upper.to_string(),
                            "lower": tree.lower.to_string(),
                            "c_upper": tree.c_upper,
                            "c_lower": tree.c_lower,
                        }),
                    )
                    .note(INSTANTIATED);
            }
        }
        CopiesCommand::Prod2 { n, eps } => {
            report.param("kind", "prod2").param("n", n).param("eps", eps);
            report.value("budget", prod2_test_budget(*n, *eps, caps)?).note(INSTANTIATED);
        }
    }
    Ok(Outcome::ok(report))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("qprop: cannot start worker threads: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(outcome) => {
            let text = match (&outcome.raw, cli.format) {
                (Some(raw), _) => raw.clone(),
                (None, Format::Json) => outcome.report.to_json(),
                (None, Format::Csv) => outcome.report.to_csv(),
            };
            print!("{text}");
            if outcome.failed {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("qprop: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
