use clap::{Args, Parser, Subcommand};
use gencontact::gallery::{entry, fixture, mismatches, run_entry, ENTRIES};
use gencontact::suite::{run_checks, SuiteReport};
use gencontact_cli::{load_config, parse_config, write_structure, CliError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gencontact", version, about = "Verify generalized contact structures on coordinate charts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Sampling {
    #[arg(long)]
    seed: Option<u64>,
    /// Base sample points per check.
    #[arg(long)]
    samples: Option<usize>,
    /// Cone sample points per check.
    #[arg(long)]
    cone_samples: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the checks of a JSON configuration; exit 1 if any fails.
    Verify {
        config: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Tolerance for every check.
        #[arg(long)]
        tol: Option<f64>,
        /// Report path (default: the config's "out", else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall time per check (reports stop being reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Named example structures.
    Gallery {
        #[command(subcommand)]
        cmd: GalleryCmd,
    },
    /// Apply a configuration's pipeline and write the resulting structure.
    Deform {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GalleryCmd {
    List,
    /// Run an entry's checks; exit 1 unless every verdict is as recorded.
    Run {
        name: String,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
    /// Write an entry as structure JSON.
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn summarize(rep: &SuiteReport) {
    for c in &rep.checks {
        let worst = c.report.entries.iter().filter(|e| !e.probe).map(|e| e.max_residual).fold(0.0, f64::max);
        eprintln!("{:<22} {} (worst {:.3e})", c.check, if c.pass { "PASS" } else { "FAIL" }, worst);
    }
}

fn apply_sampling(o: &mut gencontact::suite::RunOptions, s: &Sampling) -> Result<(), CliError> {
    if let Some(v) = s.seed {
        o.seed = v;
    }
    for (v, slot, flag) in [(s.samples, &mut o.samples, "--samples"), (s.cone_samples, &mut o.cone_samples, "--cone-samples")] {
        if let Some(v) = v {
            if v == 0 {
                return Err(CliError::Usage(format!("{} must be at least 1", flag)));
            }
            *slot = v;
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GENCONTACT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("GENCONTACT_THREADS must be a positive integer, got '{}'", v)))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    init_threads()?;
    match cli.cmd {
        Cmd::Verify { config, sampling, tol, out, timings } => {
            let mut job = load_config(&read(&config)?)?;
            apply_sampling(&mut job.options, &sampling)?;
            if let Some(t) = tol {
                if !(t.is_finite() && t > 0.0) {
                    return Err(CliError::Usage("--tol must be positive and finite".into()));
                }
                job.options.tol = Some(t);
                job.options.overrides.clear();
            }
            job.options.timings = timings;
            let rep = run_checks(&job.name, &job.fixture, &job.checks, &job.options)?;
            summarize(&rep);
            emit(out.as_deref().or(job.out.as_deref()), &to_json(&rep))?;
            Ok(if rep.pass { 0 } else { 1 })
        }
        Cmd::Gallery { cmd: GalleryCmd::List } => {
            for e in ENTRIES {
                println!("{:<22} {}", e.name, e.description);
            }
            Ok(0)
        }
        Cmd::Gallery { cmd: GalleryCmd::Run { name, sampling, out, timings } } => {
            let e = entry(&name).ok_or_else(|| CliError::Usage(format!("unknown gallery structure '{}'", name)))?;
            let mut opts = gencontact::suite::RunOptions { timings, ..Default::default() };
            apply_sampling(&mut opts, &sampling)?;
            let rep = run_entry(e, &opts)?;
            summarize(&rep);
            let bad = mismatches(e, &rep);
            for m in &bad {
                eprintln!("unexpected verdict: {}", m);
            }
            emit(out.as_deref(), &to_json(&rep))?;
            Ok(if bad.is_empty() { 0 } else { 1 })
        }
        Cmd::Gallery { cmd: GalleryCmd::Export { name, out } } => {
            let fx = fixture(&name).ok_or_else(|| CliError::Usage(format!("unknown gallery structure '{}'", name)))?;
            emit(out.as_deref(), &to_json(&write_structure(&fx)?))?;
            Ok(0)
        }
        Cmd::Deform { config, out } => {
            let cfg = parse_config(&read(&config)?)?;
            if cfg.pipeline.is_empty() {
                return Err(CliError::Usage("configuration has no pipeline".into()));
            }
            let opts = cfg.options()?;
            let (_, base) = cfg.base_fixture()?;
            let fx = gencontact_cli::apply_pipeline(&base, &cfg.pipeline, &opts)?;
            emit(out.as_deref().or(cfg.out.as_deref()), &to_json(&write_structure(&fx)?))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
