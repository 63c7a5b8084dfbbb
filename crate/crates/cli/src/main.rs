mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Serialize;
use serde_json::json;

use rbc_core::{
    build_region, check_pmf, instantiate_region, table1, verify_theorem, BoundResult, HalfspaceSystem, JointPmf,
    MiAssignment, Scheme1Options, VerifyOptions,
};

use config::{parse_config, Bound, Command, Format, Overrides, RunConfig};

/// Rate regions and bounds for the relay broadcast channel with feedback.
#[derive(Parser, Debug)]
#[command(name = "rbc", version)]
struct Cli {
    /// Subcommand; may instead be given as `command` in the config.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

/// Outcome of a successful dispatch.
enum Status {
    Ok,
    Mismatches,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Mismatches) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    init_threads()?;
    let overrides = Overrides {
        command: cli.command,
        format: cli.format,
        output: cli.output,
        seed: cli.seed,
        trials: cli.trials,
    };
    let (text, base) = match &cli.config {
        Some(path) => (
            std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?,
            path.parent().map(Path::to_path_buf),
        ),
        None => (String::new(), None),
    };
    let cfg = parse_config(&text, base.as_deref(), &overrides).map_err(|errors| {
        let mut msg = String::from("invalid configuration:");
        for e in errors {
            let _ = write!(msg, "\n  - {e}");
        }
        anyhow::anyhow!(msg)
    })?;
    let (body, status) = dispatch(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(status)
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("RBC_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().with_context(|| format!("RBC_THREADS must be a positive integer (got `{value}`)"))?;
    if n == 0 {
        bail!("RBC_THREADS must be a positive integer (got `{value}`)");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn dispatch(cfg: &RunConfig) -> Result<(String, Status)> {
    let body = match cfg.command {
        Command::Table1 => run_table1(cfg)?,
        Command::Corner => run_corner(cfg)?,
        Command::Region => run_region(cfg)?,
        Command::Project => run_project(cfg)?,
        Command::Verify => return run_verify(cfg),
    };
    Ok((body, Status::Ok))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn run_table1(cfg: &RunConfig) -> Result<String> {
    let t = table1(&cfg.d, &cfg.channel(cfg.d[0])?)?;
    match cfg.format {
        Format::Csv => Ok(t.to_csv()),
        Format::Json => to_json(&t),
    }
}

#[derive(Serialize)]
struct CornerRow {
    d: f64,
    bound: String,
    #[serde(flatten)]
    result: BoundResult,
}

fn run_corner(cfg: &RunConfig) -> Result<String> {
    let bound = cfg.bound.expect("validated");
    let rows = cfg
        .d
        .iter()
        .map(|&d| {
            let p = cfg.channel(d)?;
            let result = match bound {
                Bound::Liang => rbc_core::liang_pdf_rate(&p)?,
                Bound::Scheme1 => rbc_core::scheme1_rate_with(&p, Scheme1Options { wyner_ziv: cfg.wyner_ziv })?,
                Bound::Wu => rbc_core::wu_rate(&p)?,
                Bound::Cf => rbc_core::cf_rate(&p)?,
            };
            Ok(CornerRow { d, bound: bound.to_string(), result })
        })
        .collect::<Result<Vec<_>>>()?;
    match cfg.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = String::from("d,bound,rate,beta,gamma,nhat,active\n");
            for r in &rows {
                let q = &r.result.argmax;
                let nhat = if q.nhat.is_infinite() { "inf".to_string() } else { format!("{:.6}", q.nhat) };
                let _ = writeln!(
                    out,
                    "{},{},{:.4},{:.4},{:.4},{},{:?}",
                    r.d, r.bound, r.result.rate, q.beta, q.gamma, nhat, r.result.active_constraint
                );
            }
            Ok(out)
        }
    }
}

fn read_pmf(cfg: &RunConfig) -> Result<JointPmf> {
    let path = cfg.pmf.as_ref().expect("validated");
    let text = std::fs::read_to_string(path).with_context(|| format!("reading pmf {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing pmf {}", path.display()))
}

fn vertices_csv(sys: &HalfspaceSystem) -> Result<String> {
    let mut out = String::from("R0,R1,R2\n");
    for v in sys.enumerate_vertices()?.points {
        let _ = writeln!(out, "{:.6},{:.6},{:.6}", v[0], v[1], v[2]);
    }
    Ok(out)
}

fn run_region(cfg: &RunConfig) -> Result<String> {
    let id = cfg.region.expect("validated");
    let pmf = read_pmf(cfg)?;
    let spec = build_region(id);
    let a = MiAssignment::from_pmf(&pmf, &spec.atoms())?;
    let inst = instantiate_region(&spec, &a, cfg.rates)?;
    match cfg.format {
        Format::Csv => vertices_csv(&inst.system),
        Format::Json => to_json(&json!({
            "region": id.to_string(),
            "feasible": inst.feasible,
            "system": inst.system,
            "vertices": inst.system.enumerate_vertices()?.points,
        })),
    }
}

fn run_project(cfg: &RunConfig) -> Result<String> {
    let scheme = cfg.scheme.expect("validated");
    let pmf = read_pmf(cfg)?;
    let check = check_pmf(scheme, &pmf, cfg.rates, cfg.transcription, cfg.tol)?;
    match cfg.format {
        Format::Csv => vertices_csv(&check.projection),
        Format::Json => to_json(&json!({
            "scheme": scheme.to_string(),
            "theorem": rbc_core::prefme::theorem_for(scheme).to_string(),
            "system": check.projection,
            "vertices": check.projection.enumerate_vertices()?.points,
            "theorem_feasible": check.feasible,
            "verdict": check.verdict,
            "discrepancies": check.discrepancies,
        })),
    }
}

fn run_verify(cfg: &RunConfig) -> Result<(String, Status)> {
    let scheme = cfg.scheme.expect("validated");
    let opts = VerifyOptions {
        trials: cfg.trials,
        seed: cfg.seed,
        alphabet: cfg.alphabet,
        rates: cfg.rates,
        tol: cfg.tol,
        transcription: cfg.transcription,
        ..Default::default()
    };
    let report = verify_theorem(scheme, &opts)?;
    let status = if report.unexplained().is_empty() { Status::Ok } else { Status::Mismatches };
    let body = match cfg.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut out = String::from("trial,pmf_seed,verdict,feasible\n");
            for v in &report.verdicts {
                let verdict = serde_json::to_value(v.verdict)?;
                let _ = writeln!(out, "{},{},{},{}", v.trial, v.pmf_seed, verdict.as_str().unwrap_or_default(), v.feasible);
            }
            out
        }
    };
    Ok((body, status))
}
