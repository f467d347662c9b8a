//! `genunit`: runs audits, evolutions and eigen-reductions from a scenario file.
//!
//! Exit status: 0 on success, 1 when an audit has failing identities or a run
//! cannot complete, 2 for configuration and command-line errors.

mod config;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use genunit_core::grid::format_f64;

use config::{ConfigError, Mode, ScenarioConfig};
use scenario::Table;

/// Environment variable that overrides the output directory (below `--out`).
const OUT_ENV: &str = "GENUNIT_OUT_DIR";

#[derive(Parser)]
#[command(name = "genunit", version, about = "Generalized imaginary units: identity audits and grid evolutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity audit (the scenario file is optional).
    Audit(Common),
    /// Run whatever mode the scenario file names.
    Run(Common),
    /// Run an eigen-reduce scenario.
    Eigen(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $GENUNIT_OUT_DIR, then the scenario's directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave the timestamp line out of CSV headers.
    #[arg(long)]
    no_timestamp: bool,
    /// Worker threads for the audit (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Loads the scenario, applies command-line overrides and runs it. Returns
/// whether the run passed.
fn execute(command: Command) -> Result<bool> {
    let (common, required) = match command {
        Command::Audit(c) => (c, Some(Mode::Audit)),
        Command::Run(c) => (c, None),
        Command::Eigen(c) => (c, Some(Mode::EigenReduce)),
    };
    let mut cfg = match (&common.config, required) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(Mode::Audit)) => ScenarioConfig::parse("mode = \"audit\"")?,
        (None, _) => return Err(ConfigError("--config is required for this subcommand".into()).into()),
    };
    if let Some(mode) = required {
        if cfg.mode != mode {
            return Err(ConfigError(format!(
                "mode: the scenario is `{}` but this subcommand runs `{}`; use `genunit run`",
                cfg.mode.name(),
                mode.name()
            ))
            .into());
        }
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = common.threads {
        if let Some(a) = cfg.audit.as_mut() {
            a.threads = threads;
        }
    }
    let cfg = cfg.normalized()?;

    let out_dir = output_dir(&common);
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let stem = common
        .config
        .as_deref()
        .and_then(Path::file_stem)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "audit".into());

    match cfg.mode {
        Mode::Audit => {
            let (report, summary) = scenario::audit(&cfg)?;
            print!("{}", report.render_table());
            let path = out_dir.join(format!("{stem}.json"));
            std::fs::write(&path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
            println!("{summary}; report {}", path.display());
            Ok(report.all_passed())
        }
        mode => {
            let (table, summary) = match mode {
                Mode::EvolveComplex => scenario::evolve_complex(&cfg)?,
                Mode::EvolveQuat => scenario::evolve_quat(&cfg)?,
                _ => scenario::eigen_reduce(&cfg)?,
            };
            let path = out_dir.join(format!("{stem}.csv"));
            write_table(&path, &cfg, &table, !common.no_timestamp)?;
            println!("{summary}; wrote {}", path.display());
            Ok(true)
        }
    }
}

fn output_dir(common: &Common) -> PathBuf {
    if let Some(out) = &common.out {
        return out.clone();
    }
    if let Some(env) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    common
        .config
        .as_deref()
        .and_then(Path::parent)
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Header comment block, then an RFC-4180 table with 17 significant digits.
///
/// ```text
/// # genunit 0.1.0
/// # generated-unix-time = 1760000000      (omitted with --no-timestamp)
/// # effective dt = ...                    (run notes)
/// # --- effective configuration ---
/// # mode = "evolve-complex"
/// # ...
/// # --- end configuration ---
/// t,norm,...
/// ```
fn write_table(path: &Path, cfg: &ScenarioConfig, table: &Table, timestamp: bool) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "# genunit {}", env!("CARGO_PKG_VERSION"))?;
    if timestamp {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(out, "# generated-unix-time = {secs}")?;
    }
    for note in &table.notes {
        writeln!(out, "# {note}")?;
    }
    writeln!(out, "{CONFIG_BEGIN}")?;
    for line in cfg.echo().lines() {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{CONFIG_END}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    w.flush()?;
    drop(w);
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

const CONFIG_BEGIN: &str = "# --- effective configuration ---";
const CONFIG_END: &str = "# --- end configuration ---";
