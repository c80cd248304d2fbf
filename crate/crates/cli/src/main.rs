use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reidemeister::construct::{build, classify, Case, CaseReport, Construction};
use reidemeister::oracle::{
    descend, pullback_check, triple_count, FiniteAutomorphism, FiniteWreath, PullbackReport,
    TripleCount, BURNSIDE_CAP, DEFAULT_CAP,
};
use reidemeister::verify::{full_verify, VerificationReport};
use reidemeister::wreath::{check_compatibility, WreathAutomorphism};
use reidemeister::zqmod::FiniteAbelianGroup;
use reidemeister::Error;
use serde::{Deserialize, Serialize};

const SCHEMA_VERSION: &str = "1";
const COMPATIBILITY_SAMPLES: usize = 64;

#[derive(Parser)]
#[command(
    name = "reidemeister",
    version,
    about = "Reidemeister numbers of automorphisms of G wr Z^k"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest finite quotient enumerated by the oracle.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Also write the JSON output to this file.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Do not print the JSON output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Report which constructions apply to a group and rank.
    Classify(GroupArgs),
    /// Build an automorphism with finite Reidemeister number.
    Construct(CaseArgs),
    /// Certify a construction read from a file or given inline.
    Verify {
        /// Path to construction JSON, or the JSON text itself.
        #[arg(long)]
        construction: String,
    },
    /// Count twisted classes on one finite quotient by all three methods.
    Oracle {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        n: u64,
        /// Use the identity instead of a construction.
        #[arg(long, value_enum)]
        psi: Option<Psi>,
    },
    /// Classify, construct, verify and cross-check on every requested quotient.
    Report {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, required = true)]
        n: Vec<u64>,
    },
}

#[derive(Args)]
struct GroupArgs {
    /// Group such as "2^1:2,3^1:2" (prime^exponent:multiplicity).
    #[arg(long, allow_hyphen_values = true)]
    group: String,
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct CaseArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// 1, 2 or 3; the first applicable case when omitted.
    #[arg(long)]
    case: Option<u8>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Psi {
    Identity,
}

/// Why a run stopped, mapped to the exit code.
enum Failure {
    Input(String),
    Assertion(String),
    Cap(String),
}

impl Failure {
    fn at(stage: &'static str) -> impl Fn(Error) -> Failure {
        move |e| {
            let msg = format!("{stage}: {e}");
            match e {
                Error::CapExceeded { .. } => Failure::Cap(msg),
                Error::Internal(_)
                | Error::Overflow(_)
                | Error::OrbitNotClosed(_)
                | Error::InfiniteOrder(_) => Failure::Assertion(msg),
                _ => Failure::Input(msg),
            }
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Assertion(_) => 1,
            Failure::Input(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Assertion(m) | Failure::Cap(m) => m,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(format!("{e:#}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct InputEcho {
    group: String,
    k: usize,
    case: u8,
    n: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Compatibility {
    samples: usize,
    passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct OracleResult {
    n: u64,
    quotient_order: u64,
    counts: TripleCount,
    agree: bool,
    pullback: PullbackReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct OracleOutput {
    group: String,
    k: usize,
    psi: String,
    #[serde(flatten)]
    result: OracleResult,
    elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct RunReport {
    schema_version: String,
    tool_version: String,
    seed: u64,
    input: InputEcho,
    classification: CaseReport,
    construction: Construction,
    verification: VerificationReport,
    compatibility: Compatibility,
    oracle: Vec<OracleResult>,
    consistent: bool,
    failures: Vec<String>,
}

fn parse_group(spec: &str) -> Result<FiniteAbelianGroup, Failure> {
    spec.parse().map_err(Failure::at("parse"))
}

fn choose_case(report: &CaseReport, requested: Option<u8>) -> Result<Case, Failure> {
    match requested {
        Some(n) => Case::try_from(n)
            .map_err(|_| Failure::Input(format!("case must be 1, 2 or 3, got {n}"))),
        None => report.default_case().ok_or_else(|| {
            Failure::Input(format!(
                "no construction applies to {} with k = {}",
                report.group, report.k
            ))
        }),
    }
}

fn construct(args: &CaseArgs) -> Result<(CaseReport, Construction), Failure> {
    let group = parse_group(&args.group.group)?;
    let report = classify(&group, args.group.k);
    let case = choose_case(&report, args.case)?;
    let c = build(&group, args.group.k, case).map_err(Failure::at("construct"))?;
    Ok((report, c))
}

fn oracle_on(
    group: &FiniteAbelianGroup,
    k: usize,
    n: u64,
    cap: u64,
    psi: &FiniteAutomorphism,
    lift: &WreathAutomorphism,
) -> Result<OracleResult, Failure> {
    let gamma = FiniteWreath::new(group.clone(), n, k, cap).map_err(Failure::at("oracle"))?;
    let counts = triple_count(&gamma, psi, BURNSIDE_CAP.min(cap)).map_err(Failure::at("oracle"))?;
    let pullback = pullback_check(&gamma, psi, Some(lift)).map_err(Failure::at("pullback"))?;
    Ok(OracleResult {
        n,
        quotient_order: gamma.order(),
        agree: counts.agree(),
        counts,
        pullback,
    })
}

fn read_construction(arg: &str) -> anyhow::Result<Construction> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    serde_json::from_str(&text).context("invalid construction")
}

fn run_report(
    cli: &Cli,
    args: &CaseArgs,
    ns: &[u64],
) -> Result<(serde_json::Value, bool), Failure> {
    let (classification, construction) = construct(args)?;
    let verification = full_verify(&construction).map_err(Failure::at("verify"))?;
    let mut failures = Vec::new();
    if verification.r_total != construction.predicted_r {
        failures.push(format!(
            "verify: r_total {} differs from predicted {}",
            verification.r_total, construction.predicted_r
        ));
    }
    let phi = &construction.automorphism;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let passed = check_compatibility(
        phi.f(),
        phi.m(),
        &construction.group,
        COMPATIBILITY_SAMPLES,
        &mut rng,
    )
    .map_err(Failure::at("compatibility"))?;
    if !passed {
        failures.push("compatibility: sampled relation violated".into());
    }
    let mut oracle = Vec::new();
    for &n in ns {
        let psi = descend(phi, n).map_err(Failure::at("descend"))?;
        let result = oracle_on(&construction.group, construction.k(), n, cli.cap, &psi, phi)?;
        if !result.agree {
            failures.push(format!(
                "oracle mod {n}: counts disagree {:?}",
                result.counts
            ));
        }
        if result.pullback.preconditions_hold && !result.pullback.cylinders {
            failures.push(format!(
                "pullback mod {n}: classes are not preimages of base classes"
            ));
        }
        oracle.push(result);
    }
    let report = RunReport {
        schema_version: SCHEMA_VERSION.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: cli.seed,
        input: InputEcho {
            group: construction.group.to_string(),
            k: construction.k(),
            case: construction.case.number(),
            n: ns.to_vec(),
        },
        classification,
        construction,
        verification,
        compatibility: Compatibility {
            samples: COMPATIBILITY_SAMPLES,
            passed,
        },
        oracle,
        consistent: failures.is_empty(),
        failures,
    };
    let ok = report.consistent;
    Ok((json(&report), ok))
}

fn run(cli: &Cli) -> Result<(serde_json::Value, bool), Failure> {
    match &cli.command {
        Command::Classify(args) => {
            let group = parse_group(&args.group)?;
            Ok((json(&classify(&group, args.k)), true))
        }
        Command::Construct(args) => {
            let (_, c) = construct(args)?;
            Ok((json(&c), true))
        }
        Command::Verify { construction } => {
            let c = read_construction(construction)?;
            let report = full_verify(&c).map_err(Failure::at("verify"))?;
            let ok = report.r_total == c.predicted_r;
            Ok((json(&report), ok))
        }
        Command::Oracle { case, n, psi } => {
            let start = Instant::now();
            let (group, k, name, psi, lift) = match psi {
                Some(Psi::Identity) => {
                    let group = parse_group(&case.group.group)?;
                    let k = case.group.k;
                    let lift =
                        WreathAutomorphism::identity(&group, k).map_err(Failure::at("oracle"))?;
                    let psi = FiniteAutomorphism::identity(&group, *n, k);
                    (group, k, "identity".to_string(), psi, lift)
                }
                None => {
                    let (_, c) = construct(case)?;
                    let psi = descend(&c.automorphism, *n).map_err(Failure::at("descend"))?;
                    let k = c.k();
                    (c.group, k, c.case.to_string(), psi, c.automorphism)
                }
            };
            let result = oracle_on(&group, k, *n, cli.cap, &psi, &lift)?;
            let ok = result.agree;
            let out = OracleOutput {
                group: group.to_string(),
                k,
                psi: name,
                result,
                elapsed_ms: start.elapsed().as_millis() as u64,
            };
            Ok((json(&out), ok))
        }
        Command::Report { case, n } => run_report(cli, case, n),
    }
}

fn json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("serializable")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, ok)) => {
            let text = serde_json::to_string_pretty(&value).expect("serializable");
            if let Some(path) = &cli.json_out {
                if let Err(e) = fs::write(path, format!("{text}\n")) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if !cli.quiet {
                println!("{text}");
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: consistency check failed");
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
