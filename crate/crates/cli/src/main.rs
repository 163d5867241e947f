use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use rankone::descendants::{
    certify_conservative_inverse, certify_general_product, certify_txt, certify_u_obstruction,
    CensusConfig, CensusMode, CertificateReport, CSV_HEADER, DEFAULT_PAIR_BUDGET,
    DEFAULT_TUPLE_BUDGET,
};
use rankone::heights::{build_family_with, obstruction_product, FamilyOptions, RankOneSpec};
use rankone::markov::{
    check_flip, check_reversible, monte_carlo_returns, product_conservativity_diagnostic,
    required_radius, return_probabilities, stationary, stationary_report, MarkovChainSpec,
};
use rankone::tower::{crosscheck, Tower, DEFAULT_LEVEL_BUDGET};

#[derive(Parser)]
#[command(name = "rankone", version, about = "Rank-one towers, descendant censuses and Markov shift diagnostics")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family of comb height sets and write its spec JSON.
    Build(BuildArgs),
    /// Run a descendant census for j = i+1..=jmax.
    Certify(CertifyArgs),
    /// Kakutani–Parry chain identities and diagnostics.
    Markov {
        #[command(subcommand)]
        command: MarkovCommand,
    },
    /// Compare explicit columns against descendant tables.
    Crosscheck(CrosscheckArgs),
    /// Dump column heights and level counts as CSV.
    Columns(SpecArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Comma list, `constant:c`, `linear` or `powers-of-two`.
    #[arg(long)]
    gamma: String,
    /// Stage count (defaults to the list length for explicit lists).
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Added to every scheduled separation parameter M_k.
    #[arg(long, default_value = "0")]
    m_margin: BigUint,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertificateArg {
    Txt,
    UObstruction,
    InverseConservative,
    General,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CertifyArgs {
    certificate: CertificateArg,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    i: usize,
    /// Last target stage (default: every built stage).
    #[arg(long)]
    jmax: Option<usize>,
    #[arg(long, default_value_t = 1)]
    b: u64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    n: i64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Vec<i64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bs: Vec<i64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
    pair_budget: u64,
    #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET)]
    tuple_budget: u64,
    /// Sample this many pairs (or tuples) instead of enumerating.
    #[arg(long)]
    sample: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time per row (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MarkovCommand {
    /// Stationary vector and the λP = λ, λ_1 and ratio identities.
    Stationary {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = 500)]
        radius: usize,
        #[arg(long)]
        squared: bool,
    },
    /// Detailed balance and cylinder reversal invariance.
    Reversible {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = 200)]
        radius: usize,
        #[arg(long)]
        squared: bool,
        #[arg(long, default_value_t = 10_000)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Return probabilities p_00^(n) by vector iteration.
    Returns {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        steps: usize,
        /// Window radius (default: the smallest leak-free window).
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        squared: bool,
        /// Also estimate with this many Monte Carlo walkers.
        #[arg(long)]
        paths: Option<u64>,
        /// Monte Carlo checkpoints (default: the last step).
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decay exponent of q_00^(n) for Q = P·P and the k-fold verdict.
    ProductDiagnostic {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = 2)]
        fold: u32,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
        #[arg(long)]
        radius: Option<usize>,
    },
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Skip columns with more levels than this.
    #[arg(long, default_value_t = DEFAULT_LEVEL_BUDGET)]
    level_budget: u64,
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Pass,
    Fail,
}

/// Validation and resource errors (exit code 2).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<Verdict> {
    match command {
        Command::Build(args) => cmd_build(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Markov { command } => cmd_markov(command),
        Command::Crosscheck(args) => cmd_crosscheck(args),
        Command::Columns(args) => {
            let tower = Tower::new(&load_spec(&args.spec)?)?;
            emit(None, &tower.column_csv())?;
            Ok(Verdict::Pass)
        }
    }
}

fn load_spec(path: &Path) -> anyhow::Result<RankOneSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(RankOneSpec::from_json(&text)?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn gamma_sequence(rule: &str, stages: Option<usize>) -> anyhow::Result<Vec<usize>> {
    let need = |what: &str| {
        stages.ok_or_else(|| anyhow::Error::new(Usage(format!("--stages is required for {what}"))))
    };
    let seq = if let Some(c) = rule.strip_prefix("constant:") {
        let c: usize = c.parse().map_err(|_| Usage(format!("bad constant {c:?}")))?;
        vec![c; need("constant:c")?]
    } else if rule == "linear" {
        (1..=need("linear")?).collect()
    } else if rule == "powers-of-two" {
        let n = need("powers-of-two")?;
        if n >= 62 {
            bail!(Usage("powers-of-two supports at most 61 stages".into()));
        }
        (0..n).map(|k| 1usize << (k + 1)).collect()
    } else {
        let list = rule
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Usage(format!("unrecognised gamma rule {rule:?}")))?;
        match stages {
            Some(n) if n > list.len() => {
                bail!(Usage(format!("gamma list has {} entries, {n} stages requested", list.len())))
            }
            Some(n) => list[..n].to_vec(),
            None => list,
        }
    };
    if let Some(k) = seq.iter().position(|&g| g == 0) {
        bail!(Usage(format!("stage {k}: gamma must be positive")));
    }
    Ok(seq)
}

fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ratio_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn cmd_build(args: BuildArgs) -> anyhow::Result<Verdict> {
    let gammas = gamma_sequence(&args.gamma, args.stages)?;
    let opts = FamilyOptions {
        m_margin: args.m_margin,
    };
    let spec = build_family_with(&gammas, &opts)?;
    let mut table = String::from("k  gamma  M_k  r_k  h_k_digits  product\n");
    for (k, h) in spec.height_sets().iter().enumerate() {
        let partial = obstruction_product(&gammas[..=k]);
        table.push_str(&format!(
            "{k}  {}  {}  {}  {}  {} ({:.6})\n",
            gammas[k],
            h.m(),
            spec.cut_counts()[k],
            spec.column_height(k).to_string().len(),
            ratio_string(&partial),
            ratio_f64(&partial)
        ));
    }
    let json = spec.to_json() + "\n";
    match &args.out {
        Some(path) => {
            emit(Some(path), &json)?;
            emit(None, &table)?;
        }
        None => {
            emit(None, &json)?;
            eprint!("{table}");
        }
    }
    Ok(Verdict::Pass)
}

fn cmd_certify(args: CertifyArgs) -> anyhow::Result<Verdict> {
    let spec = load_spec(&args.spec)?;
    let jmax = args.jmax.unwrap_or(spec.stages());
    if args.i >= jmax || jmax > spec.stages() {
        bail!(Usage(format!(
            "need i < jmax <= {} (got i = {}, jmax = {jmax})",
            spec.stages(),
            args.i
        )));
    }
    let cfg = CensusConfig {
        pair_budget: args.pair_budget,
        tuple_budget: args.tuple_budget,
        mode: match args.sample {
            Some(samples) => CensusMode::Sampled {
                samples,
                seed: args.seed,
            },
            None => CensusMode::Exhaustive,
        },
        ..CensusConfig::default()
    };
    let mut reports: Vec<CertificateReport> = Vec::new();
    let mut failure = None;
    for j in args.i + 1..=jmax {
        let result = match args.certificate {
            CertificateArg::Txt => certify_txt(&spec, args.i, j, args.b, &cfg),
            CertificateArg::UObstruction => certify_u_obstruction(&spec, args.i, j, &cfg),
            CertificateArg::InverseConservative => {
                certify_conservative_inverse(&spec, args.i, j, args.n, &cfg)
            }
            CertificateArg::General => {
                certify_general_product(&spec, args.i, j, &args.alphas, &args.bs, &cfg)
            }
        };
        match result {
            Ok(mut r) => {
                if !args.timing {
                    r.elapsed_ms = None;
                }
                reports.push(r);
            }
            Err(e) => {
                failure = Some(format!("j = {j}: {e}"));
                break;
            }
        }
    }
    let text = match args.format {
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in &reports {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(msg) = failure {
        bail!(Usage(msg));
    }
    let mut ok = true;
    for r in &reports {
        for c in r.failed_checks() {
            eprintln!("j = {}: check {} failed: {}", r.target_stage, c.name, c.detail);
            ok = false;
        }
    }
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}

fn chain(epsilon: f64, radius: usize, squared: bool) -> anyhow::Result<MarkovChainSpec> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        bail!(Usage(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(MarkovChainSpec::new(epsilon, radius, squared)?)
}

fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn verdict(pass: bool) -> Verdict {
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn cmd_markov(command: MarkovCommand) -> anyhow::Result<Verdict> {
    match command {
        MarkovCommand::Stationary {
            chain: c,
            radius,
            squared,
        } => {
            let spec = chain(c.epsilon, radius, squared)?;
            let lam = stationary(&spec);
            let report = stationary_report(&spec, &lam);
            let text = match c.format {
                Format::Csv => lam.to_csv(),
                Format::Json => to_json(&report)?,
            };
            emit(c.out.as_deref(), &text)?;
            Ok(verdict(report.passed))
        }
        MarkovCommand::Reversible {
            chain: c,
            radius,
            squared,
            words,
            seed,
        } => {
            let spec = chain(c.epsilon, radius, squared)?;
            let lam = stationary(&spec);
            let kernel = spec.kernel();
            let balance = check_reversible(&kernel, &lam)?;
            let flip = check_flip(&kernel, &lam, words, seed)?;
            let pass = balance.passed && flip.passed;
            let text = match c.format {
                Format::Csv => {
                    let (wi, wj) = balance.worst.unwrap_or((0, 0));
                    format!(
                        "epsilon,radius,squared,max_abs,max_rel,worst_i,worst_j,flip_words,flip_max_rel,passed\n{},{radius},{squared},{},{},{wi},{wj},{},{},{pass}\n",
                        c.epsilon, balance.max_abs, balance.max_rel, flip.words, flip.max_rel
                    )
                }
                Format::Json => to_json(&serde_json::json!({
                    "epsilon": c.epsilon,
                    "radius": radius,
                    "squared": squared,
                    "detailed_balance": balance,
                    "flip": flip,
                    "passed": pass,
                }))?,
            };
            emit(c.out.as_deref(), &text)?;
            Ok(verdict(pass))
        }
        MarkovCommand::Returns {
            chain: c,
            steps,
            radius,
            squared,
            paths,
            checkpoints,
            seed,
        } => {
            if steps == 0 {
                bail!(Usage("steps must be positive".into()));
            }
            let probe = chain(c.epsilon, 2, squared)?;
            let radius = radius.unwrap_or_else(|| required_radius(&probe, steps));
            let spec = chain(c.epsilon, radius, squared)?;
            let series = return_probabilities(&spec, steps)?;
            let mc = match paths {
                Some(paths) => {
                    let checkpoints = if checkpoints.is_empty() { vec![steps] } else { checkpoints };
                    if checkpoints.iter().any(|&n| n == 0 || n > steps) {
                        bail!(Usage(format!("checkpoints must lie in 1..={steps}")));
                    }
                    let base = chain(c.epsilon, radius, false)?;
                    let reach = spec.reach();
                    let p_steps: Vec<usize> = checkpoints.iter().map(|n| n * reach).collect();
                    Some((checkpoints, monte_carlo_returns(&base, paths, &p_steps, seed)?))
                }
                None => None,
            };
            let text = match c.format {
                Format::Csv => series.to_csv(),
                Format::Json => {
                    let mc_json = mc.as_ref().map(|(cps, r)| {
                        let rows: Vec<_> = cps
                            .iter()
                            .zip(&r.estimates)
                            .map(|(&n, e)| {
                                let exact = series.at(n);
                                serde_json::json!({
                                    "n": n,
                                    "matrix": exact,
                                    "monte_carlo": e.estimate,
                                    "std_error": e.std_error,
                                    "z": if e.std_error > 0.0 { (e.estimate - exact) / e.std_error } else { 0.0 },
                                })
                            })
                            .collect();
                        serde_json::json!({"paths": r.paths, "seed": r.seed, "escaped": r.escaped, "checkpoints": rows})
                    });
                    to_json(&serde_json::json!({
                        "epsilon": series.epsilon,
                        "radius": series.radius,
                        "squared": series.squared,
                        "steps": steps,
                        "p00": series.p00,
                        "partial_sums": series.partial_sums,
                        "leakage": series.leakage,
                        "monte_carlo": mc_json,
                    }))?
                }
            };
            emit(c.out.as_deref(), &text)?;
            Ok(Verdict::Pass)
        }
        MarkovCommand::ProductDiagnostic {
            chain: c,
            fold,
            steps,
            radius,
        } => {
            let probe = chain(c.epsilon, 2, true)?;
            let radius = radius.unwrap_or_else(|| required_radius(&probe, steps));
            let spec = chain(c.epsilon, radius, true)?;
            let report = product_conservativity_diagnostic(&spec, fold, steps)?;
            let text = match c.format {
                Format::Csv => report.to_csv(),
                Format::Json => to_json(&report)?,
            };
            emit(c.out.as_deref(), &text)?;
            Ok(Verdict::Pass)
        }
    }
}

fn cmd_crosscheck(args: CrosscheckArgs) -> anyhow::Result<Verdict> {
    let spec = load_spec(&args.spec)?;
    let report = crosscheck(&spec, args.level_budget)?;
    emit(None, &to_json(&report)?)?;
    if let Some(m) = &report.mismatch {
        eprintln!(
            "stage {}: first differing height at index {}: column {} vs descendant {}",
            m.stage, m.index, m.column_height, m.descendant
        );
    }
    Ok(verdict(report.passed()))
}
