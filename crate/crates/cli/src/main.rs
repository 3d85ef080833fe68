use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use damut_core::catalog::Catalog;
use damut_core::codegen::{generate, GenerateOptions};
use damut_core::faultmodel::{
    advise_operators, load_files, parse_spec, read_text, validate_spec, DataItemProfile,
    Dependency, Nature, RepresentationType,
};
use damut_core::metrics::{analyze, emit_report, ReportFormat};
use damut_core::orchestrator::{execute, RunArtifacts, RunConfig};

/// Data-driven mutation analysis for message-exchanging components.
#[derive(Parser)]
#[command(name = "damut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Fault-model CSV.
    #[arg(long)]
    spec: PathBuf,
    /// Model configuration (unit size, buffer size, endianness, scales, seed).
    #[arg(long)]
    sidecar: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check a fault-model specification and print row diagnostics.
    Validate(SpecArgs),
    /// Suggest mutation operators for a data item.
    Advise {
        #[arg(long, value_enum)]
        nature: NatureArg,
        #[arg(long = "type", value_name = "TYPE")]
        rep: String,
        #[arg(long, value_enum)]
        dependency: DependencyArg,
        /// Number of input partitions (numerical stateless or stateful items).
        #[arg(long)]
        partitions: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// List mutation operations with their mutant ids, one per line.
    Enumerate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        json: bool,
    },
    /// Generate the C probe API (api.h, api.c, manifest.json).
    GenApi {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: PathBuf,
        /// Read the operation table at probe start instead of compiling it in.
        #[arg(long)]
        runtime_load: bool,
    },
    /// Run the coverage pass and the mutant matrix over a test suite.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// JSON list of {id, cmd, cwd, timeout_s, env}.
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Directory that receives the run directory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Run directory name (default: a timestamp).
        #[arg(long)]
        stamp: Option<String>,
    },
    /// Compute coverage and mutation score for a finished run.
    Report {
        /// Run directory written by `damut run`.
        run: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
        #[arg(long)]
        subject: Option<String>,
        /// Exit 1 unless every fault model is covered and no applied mutant survives.
        #[arg(long)]
        check: bool,
        /// With --check, also require this MOC percentage.
        #[arg(long, requires = "check")]
        min_moc: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NatureArg {
    Numerical,
    Categorical,
    Ordinal,
    Other,
}

#[derive(Clone, Copy, ValueEnum)]
enum DependencyArg {
    Stateless,
    Stateful,
    Signal,
    #[value(name = "na", alias = "n/a")]
    NotApplicable,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Markdown,
}

fn load(args: &SpecArgs) -> Result<damut_core::faultmodel::FaultModelSpec> {
    load_files(&args.spec, &args.sidecar).with_context(|| format!("loading {}", args.spec.display()))
}

fn validate(args: &SpecArgs) -> Result<ExitCode> {
    let csv = read_text(&args.spec)?;
    let sidecar = read_text(&args.sidecar)?;
    let spec = parse_spec(&csv, &sidecar)?;
    let diagnostics = validate_spec(&spec);
    if diagnostics.is_empty() {
        let rows: usize = spec.models.iter().map(|m| m.rows.len()).sum();
        println!(
            "ok: {} fault models, {rows} rows, {} mutation operations",
            spec.models.len(),
            Catalog::new(&spec).mutant_count()
        );
        return Ok(ExitCode::SUCCESS);
    }
    for d in &diagnostics {
        println!("{d}");
    }
    eprintln!("{}: {} problem(s)", args.spec.display(), diagnostics.len());
    Ok(ExitCode::from(1))
}

fn advise(
    nature: NatureArg,
    rep: &str,
    dependency: DependencyArg,
    partitions: Option<u32>,
    json: bool,
) -> Result<ExitCode> {
    let Ok(rep) = rep.parse::<RepresentationType>() else {
        bail!("unknown representation type {rep:?}");
    };
    let profile = DataItemProfile {
        nature: match nature {
            NatureArg::Numerical => Nature::Numerical,
            NatureArg::Categorical => Nature::Categorical,
            NatureArg::Ordinal => Nature::Ordinal,
            NatureArg::Other => Nature::Other,
        },
        rep,
        dependency: match dependency {
            DependencyArg::Stateless => Dependency::Stateless,
            DependencyArg::Stateful => Dependency::Stateful,
            DependencyArg::Signal => Dependency::Signal,
            DependencyArg::NotApplicable => Dependency::NotApplicable,
        },
        partitions,
    };
    let advice = advise_operators(&profile)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&advice)?);
        return Ok(ExitCode::SUCCESS);
    }
    for s in &advice.required {
        println!("required  {} {}  {}", s.operator, s.multiplicity, s.purpose);
    }
    for (i, set) in advice.alternatives.iter().enumerate() {
        for s in set {
            println!("option {}  {} {}  {}", i + 1, s.operator, s.multiplicity, s.purpose);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report(
    run: &Path,
    format: FormatArg,
    subject: Option<String>,
    check: bool,
    min_moc: Option<f64>,
) -> Result<ExitCode> {
    let artifacts = RunArtifacts::load(run)?;
    let subject = subject.unwrap_or_else(|| {
        run.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    });
    let analysis = analyze(&subject, &artifacts);
    let format = match format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Markdown => ReportFormat::Markdown,
    };
    print!("{}", emit_report(&analysis, format));
    if !check {
        return Ok(ExitCode::SUCCESS);
    }
    let full = |p: Option<damut_core::metrics::Percent>| p.is_some_and(|p| p.hundredths() == 10_000);
    let mut failures = Vec::new();
    if !full(analysis.fmc) {
        failures.push(format!("FMC {}", shown(analysis.fmc)));
    }
    if !full(analysis.ms) {
        failures.push(format!("MS {}", shown(analysis.ms)));
    }
    if let Some(min) = min_moc {
        let moc = analysis.moc.map_or(f64::NEG_INFINITY, |p| p.hundredths() as f64 / 100.0);
        if moc < min {
            failures.push(format!("MOC {} below {min}", shown(analysis.moc)));
        }
    }
    if failures.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!("check failed: {}", failures.join(", "));
    Ok(ExitCode::from(1))
}

fn shown(p: Option<damut_core::metrics::Percent>) -> String {
    p.map_or_else(|| "N/A".into(), |p| format!("{p}%"))
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate(args) => validate(&args),
        Command::Advise {
            nature,
            rep,
            dependency,
            partitions,
            json,
        } => advise(nature, &rep, dependency, partitions, json),
        Command::Enumerate { spec, json } => {
            let catalog = Catalog::new(&load(&spec)?);
            if json {
                let ops: Vec<_> = catalog
                    .iter()
                    .map(|op| {
                        serde_json::json!({
                            "mutant_id": op.id,
                            "fault_model": op.fault_model,
                            "row_index": op.row_index,
                            "operator": op.operator,
                            "procedure_index": op.procedure_index,
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&ops)?);
            } else {
                print!("{}", catalog.to_table());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GenApi {
            spec,
            out,
            runtime_load,
        } => {
            let api = generate(&load(&spec)?, GenerateOptions { runtime_load })?;
            api.write_to(&out)?;
            println!(
                "wrote {} ({} mutants, {} entry points)",
                out.display(),
                api.manifest.mutant_count,
                api.manifest.fault_models.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            spec,
            suite,
            seed,
            jobs,
            out,
            stamp,
        } => {
            if jobs == 0 {
                bail!("--jobs must be at least 1");
            }
            let artifacts = execute(&RunConfig {
                spec_path: spec.spec,
                sidecar_path: spec.sidecar,
                suite_path: suite,
                seed,
                jobs,
                runs_root: out,
                stamp,
            })?;
            println!("{}", artifacts.dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            run,
            format,
            subject,
            check,
            min_moc,
        } => report(&run, format, subject, check, min_moc),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
