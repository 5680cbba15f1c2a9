use std::io::Read;
use std::process::ExitCode;

use anyhow::{anyhow, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use slc::gen::{gen_batch, rule_coverage, GenConfig};
use slc::suites::{linear_agreement, run_suite, SuiteConfig, SuiteRegistry};
use slc_core::denote::degeneracy_report;
use slc_core::syntax::{parse_source, parse_type};
use slc_core::{
    check_program, eval_trace, BackendConfig, BackendRegistry, Calculus, Context, EvalOutcome, Fuel, Term,
};

/// Linear and affine lambda calculi: check, run, interpret and test programs.
#[derive(Parser)]
#[command(name = "slc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for generated programs and probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Fuel for evaluation and interpretation (default 10000).
    #[arg(long, global = true)]
    fuel: Option<u64>,

    /// Calculus; overrides a `calculus` line in the file (default linear).
    #[arg(long, global = true, value_enum)]
    calculus: Option<CalcArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalcArg {
    Linear,
    Affine,
}

impl From<CalcArg> for Calculus {
    fn from(c: CalcArg) -> Self {
        match c {
            CalcArg::Linear => Calculus::Linear,
            CalcArg::Affine => Calculus::Affine,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Type check a program and print its type.
    Check { file: String },
    /// Type check and evaluate a program.
    Run { file: String },
    /// Type check a program and print its denotation.
    Denote {
        file: String,
        #[arg(long, default_value = "standard")]
        backend: String,
        #[arg(long, default_value_t = 8)]
        probes: usize,
        /// Search bound for the naive backend's bottom judgments.
        #[arg(long, default_value_t = 10_000)]
        bottom_bound: u64,
    },
    /// Demonstrations.
    Demo {
        #[command(subcommand)]
        demo: Demo,
    },
    /// Run a property suite, or `all`.
    Test {
        suite: Option<String>,
        #[command(flatten)]
        opts: SuiteOpts,
        /// List the available suites and backends.
        #[arg(long)]
        list: bool,
    },
    /// Print generated well-typed programs.
    Gen {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        max_depth: u32,
        /// Type of the generated programs, e.g. `I -o I`.
        #[arg(long = "type")]
        ty: Option<String>,
        /// Print how often each typing rule occurs instead of the programs.
        #[arg(long)]
        coverage: bool,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// The affine program that the naive interpreter gets wrong.
    Degeneracy {
        /// Search bound for the bottom judgment on the affine program.
        #[arg(long, default_value_t = 1_000_000)]
        bottom_bound: u64,
        /// Linear programs compared between the two interpreters.
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 8)]
        probes: usize,
    },
}

#[derive(Args)]
struct SuiteOpts {
    /// Cases per calculus.
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    #[arg(long, default_value_t = 8)]
    probes: usize,
    #[arg(long, default_value_t = 5)]
    max_depth: u32,
    /// Search bound for the naive backend's bottom judgments.
    #[arg(long, default_value_t = 10_000)]
    bottom_bound: u64,
    /// Bound up to which a program counts as divergent.
    #[arg(long, default_value_t = 1_000_000)]
    divergence_bound: u64,
}

/// Exit status: 0 success, 1 rejection or failure, 2 usage error.
enum Outcome {
    Success,
    Failure,
}

struct Usage(anyhow::Error);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("slc: {:#}", e.0);
            ExitCode::from(2)
        }
    }
}

fn usage<T>(r: Result<T>) -> Result<T, Usage> {
    r.map_err(Usage)
}

fn read_file(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("cannot read {path}"))
    }
}

/// A parsed program and the calculus it is read in: the flag, else the
/// file's pragma, else linear.
fn load(cli: &Cli, path: &str) -> Result<Result<(Calculus, Term), String>, Usage> {
    let text = usage(read_file(path))?;
    Ok(parse_source(&text)
        .map(|src| (cli.calculus.map(Calculus::from).or(src.calculus).unwrap_or(Calculus::Linear), src.term))
        .map_err(|e| format!("{path}: {e}")))
}

fn emit(cli: &Cli, value: serde_json::Value, text: impl FnOnce() -> String) {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        println!("{}", text());
    }
}

fn reject(cli: &Cli, value: serde_json::Value, text: String) -> Outcome {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        eprintln!("{text}");
    }
    Outcome::Failure
}

fn checked(cli: &Cli, path: &str) -> Result<Result<(Calculus, Term, slc_core::Type), Outcome>, Usage> {
    let (calc, term) = match load(cli, path)? {
        Ok(p) => p,
        Err(e) => return Ok(Err(reject(cli, json!({ "ok": false, "parse_error": e }), e))),
    };
    match check_program(calc, &term) {
        Ok(ty) => Ok(Ok((calc, term, ty))),
        Err(e) => Ok(Err(reject(
            cli,
            json!({ "ok": false, "calculus": calc, "type_error": e }),
            format!("{path}: rejected in the {calc} calculus: {e}"),
        ))),
    }
}

fn run(cli: &Cli) -> Result<Outcome, Usage> {
    let fuel = Fuel(cli.fuel.unwrap_or(10_000));
    match &cli.command {
        Command::Check { file } => {
            let (calc, _, ty) = match checked(cli, file)? {
                Ok(p) => p,
                Err(o) => return Ok(o),
            };
            emit(cli, json!({ "ok": true, "calculus": calc, "type": ty.to_string() }), || ty.to_string());
            Ok(Outcome::Success)
        }
        Command::Run { file } => {
            let (calc, term, ty) = match checked(cli, file)? {
                Ok(p) => p,
                Err(o) => return Ok(o),
            };
            let (out, stats) = eval_trace(&term, fuel);
            let value = out.value().map(|v| v.to_string());
            let status = match out {
                EvalOutcome::Converged(_) => "converged",
                EvalOutcome::OutOfFuel => "out_of_fuel",
                EvalOutcome::Stuck(_) => "stuck",
            };
            emit(
                cli,
                json!({ "calculus": calc, "type": ty.to_string(), "outcome": status, "value": value,
                        "rules": stats.rules, "depth": stats.max_depth, "fuel": fuel }),
                || out.to_string(),
            );
            Ok(Outcome::Success)
        }
        Command::Denote { file, backend, probes, bottom_bound } => {
            let registry = BackendRegistry::builtin(BackendConfig { bottom_bound: Fuel(*bottom_bound), probes: *probes });
            let Some(b) = registry.get(backend) else {
                return Err(Usage(anyhow!("unknown backend `{backend}`; available: {}", registry.names().join(", "))));
            };
            let (calc, term, ty) = match checked(cli, file)? {
                Ok(p) => p,
                Err(o) => return Ok(o),
            };
            let den = b.denote(calc, &Context::new(), &term).map_err(|e| Usage(anyhow!(e)))?;
            let (val, spent) = den.closed().run_metered(fuel);
            let shown = val.as_ref().map_or_else(|| format!("BOTTOM_UP_TO_FUEL({})", fuel.0), |v| v.to_string());
            emit(
                cli,
                json!({ "calculus": calc, "backend": b.name(), "type": ty.to_string(), "converged": val.is_some(),
                        "value": shown, "steps": val.as_ref().map(|_| spent), "fuel": fuel }),
                || shown.clone(),
            );
            Ok(Outcome::Success)
        }
        Command::Demo { demo: Demo::Degeneracy { bottom_bound, cases, probes } } => {
            let mut report = degeneracy_report(Fuel(*bottom_bound), fuel, *probes);
            let cfg = SuiteConfig { seed: cli.seed, cases: *cases, fuel, probes: *probes, ..SuiteConfig::default() };
            let (agreement, _) = linear_agreement(&cfg);
            report.linear_agreement = Some(agreement);
            let ok = report.holds();
            emit(cli, serde_json::to_value(&report).expect("json"), || degeneracy_text(&report));
            Ok(if ok { Outcome::Success } else { Outcome::Failure })
        }
        Command::Test { suite, opts, list } => {
            let registry = SuiteRegistry::builtin();
            if *list || suite.is_none() {
                for s in registry.iter() {
                    println!("{:26} {}", s.name(), s.summary());
                }
                let backends = BackendRegistry::default();
                println!("backends: {}", backends.names().join(", "));
                return Ok(if suite.is_none() && !*list { Outcome::Failure } else { Outcome::Success });
            }
            let name = suite.as_deref().expect("checked above");
            let selected: Vec<_> = if name == "all" {
                registry.iter().collect()
            } else {
                match registry.get(name) {
                    Some(s) => vec![s],
                    None => {
                        return Err(Usage(anyhow!("unknown suite `{name}`; available: {}", registry.names().join(", "))))
                    }
                }
            };
            let cfg = SuiteConfig {
                seed: cli.seed,
                cases: opts.cases,
                fuel,
                divergence_bound: Fuel(opts.divergence_bound),
                probes: opts.probes,
                max_depth: opts.max_depth,
                calculi: cli.calculus.map_or_else(|| Calculus::ALL.to_vec(), |c| vec![c.into()]),
                bottom_bound: Fuel(opts.bottom_bound),
                ..SuiteConfig::default()
            };
            let mut failed = false;
            let mut reports = Vec::new();
            for s in selected {
                let report = run_suite(s, &cfg);
                failed |= s.gates_exit(&report);
                if !cli.json {
                    print!("{report}");
                }
                reports.push(report);
            }
            if cli.json {
                let value = if reports.len() == 1 { json!(reports[0]) } else { json!(reports) };
                println!("{}", serde_json::to_string_pretty(&value).expect("json"));
            }
            Ok(if failed { Outcome::Failure } else { Outcome::Success })
        }
        Command::Gen { count, max_depth, ty, coverage } => {
            let target = match ty {
                Some(t) => Some(parse_type(t).map_err(|e| Usage(anyhow!("bad --type: {e}")))?),
                None => None,
            };
            let cfg = GenConfig {
                calculus: cli.calculus.map_or(Calculus::Linear, Calculus::from),
                max_depth: *max_depth,
                seed: cli.seed,
                count: *count,
                fuel,
                target,
                ..GenConfig::default()
            };
            let batch = gen_batch(&cfg);
            if *coverage {
                let counts = rule_coverage(batch.iter().map(|g| &g.term));
                emit(cli, json!(counts), || {
                    counts.iter().map(|(r, n)| format!("{r:10} {n}")).collect::<Vec<_>>().join("\n")
                });
            } else {
                let items: Vec<_> = batch
                    .iter()
                    .map(|g| json!({ "seed": g.seed, "term": g.term.to_string(), "type": g.ty.to_string() }))
                    .collect();
                emit(cli, json!(items), || {
                    batch.iter().map(|g| format!("{} : {}", g.term, g.ty)).collect::<Vec<_>>().join("\n")
                });
            }
            Ok(Outcome::Success)
        }
    }
}

fn degeneracy_text(r: &slc_core::denote::DegeneracyReport) -> String {
    let mut out = vec![
        format!("program:            {}", r.program),
        format!("affine type:        {}", r.affine_type.as_deref().unwrap_or("rejected")),
        format!("linear calculus:    {}", r.linear_rejection.as_deref().unwrap_or("accepted")),
        format!("evaluation:         {} ({} rules)", r.eval, r.eval_rules),
        format!(
            "standard:           {}{}",
            r.standard,
            r.standard_fuel.map(|f| format!(" (fuel {f})")).unwrap_or_default()
        ),
        format!("naive:              {}", judgment(&r.naive)),
        format!("divergent program:  {}", r.divergent),
        format!("  evaluation:       {} at fuel {}", r.divergent_eval, r.bottom_bound.0),
        format!("  standard:         {}", judgment(&r.divergent_standard)),
        format!("  naive:            {}", judgment(&r.divergent_naive)),
    ];
    if let Some(a) = &r.linear_agreement {
        out.push(format!(
            "linear programs:    {} compared, {} differ, {} unknown, {} convergence mismatches ({} at type I)",
            a.terms, a.differ, a.unknown, a.convergence_mismatches, a.unit_convergence_mismatches
        ));
    }
    let failures = r.failures();
    out.push(if failures.is_empty() {
        "verdict:            naive interpretation is unsound for the affine calculus; standard is sound".to_string()
    } else {
        format!("verdict:            UNEXPECTED: {}", failures.join("; "))
    });
    out.join("\n")
}

fn judgment(j: &slc_core::denote::BottomJudgment) -> String {
    match j {
        slc_core::denote::BottomJudgment::JudgedBottom { bound } => format!("BOTTOM_UP_TO_FUEL({})", bound.0),
        slc_core::denote::BottomJudgment::NotBottom { fuel } => format!("converges (fuel {})", fuel.0),
    }
}
