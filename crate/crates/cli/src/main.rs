//! `hopfcurl`: runs one verification command and writes its report.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or a
//! computation errors, 2 for usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use hopfcurl_core::conformal::Manifold;
use hopfcurl_core::report::{run, Command, Format, Report, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hopfcurl", version, about = "Curl-spectrum verification runs")]
struct Args {
    /// verify-atlas, verify-identities, taylor-check, local-max-scan,
    /// optimality-scan, annulus or bounds.
    #[arg(long)]
    command: Option<Command>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dmax: Option<u32>,
    #[arg(long)]
    tol_exact: Option<f64>,
    #[arg(long)]
    tol_float: Option<f64>,
    /// s3, rp3 or t3 (optimality-scan).
    #[arg(long)]
    manifold: Option<Manifold>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("hopfcurl: {msg}");
    ExitCode::from(2)
}

fn load(args: &Args) -> Result<RunConfig, String> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            RunConfig::from_toml(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => RunConfig::default(),
    };
    match (args.command, &args.config) {
        (Some(c), _) => cfg.command = c,
        (None, None) => return Err("--command or --config is required".into()),
        (None, Some(_)) => {}
    }
    if let Some(v) = &args.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = args.format {
        cfg.format = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.dmax {
        cfg.dmax = v;
    }
    if let Some(v) = args.tol_exact {
        cfg.tol_exact = v;
    }
    if let Some(v) = args.tol_float {
        cfg.tol_float = v;
    }
    if let Some(v) = args.manifold {
        cfg.manifold = v;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(report: &Report, cfg: &RunConfig) -> std::io::Result<()> {
    let text = report.render(cfg.format).map_err(std::io::Error::other)?;
    match &cfg.out {
        Some(p) => write_atomic(p, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match load(&args) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("hopfcurl: {} failed: {e}", cfg.command);
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&report, &cfg) {
        eprintln!("hopfcurl: cannot write report: {e}");
        return ExitCode::from(1);
    }
    let failed = report.failures().count();
    eprintln!("{}: {} checks, {} failed", cfg.command, report.records.len(), failed);
    for r in report.failures() {
        eprintln!("  FAIL {} expected {} computed {} (err {:e}, tol {:e})", r.id, r.expected, r.computed, r.rel_err, r.tol);
    }
    ExitCode::from(report.exit_code() as u8)
}
