//! Command-line front end.
//!
//! ```text
//! cvconc cavity   [--config FILE] [--set K=V]... [--out DIR] [--threads N] [--format csv,json,svg]
//! cvconc kerr     [same options]
//! cvconc optimize [same options]
//! cvconc plot FILE.csv... [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical or I/O
//! failure.

pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::analysis::{optimize_phi0, sweep_cavity_phi0_with, sweep_scan};
use crate::kerr::scan_grid;
use crate::format_float;
use config::{CavityConfig, KerrConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cvconc", version, about = "Entanglement concentration of two-mode squeezed vacuum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cavity scheme: phase sweep and optimum.
    Cavity(RunArgs),
    /// Kerr scheme: outcome grid and threshold sweep.
    Kerr(RunArgs),
    /// Optimize the cavity preparation phase only.
    Optimize(RunArgs),
    /// Render CSV datasets as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML file with [cavity] and [kerr] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a config entry, `section.key=value` or `key=value`.
    #[arg(long = "set", value_name = "K=V")]
    set: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, default_value = "csv,json")]
    format: String,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// CSV files to render.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Directory for the SVG files (default: next to each input).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Failure(format!("{}: {e}", path.display()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Formats {
    csv: bool,
    json: bool,
    svg: bool,
}

fn parse_formats(spec: &str) -> Result<Formats, CliError> {
    let mut f = Formats::default();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "csv" => f.csv = true,
            "json" => f.json = true,
            "svg" => f.svg = true,
            other => return Err(CliError::Usage(format!("unknown format `{other}`"))),
        }
    }
    if f == Formats::default() {
        return Err(CliError::Usage("no output format selected".into()));
    }
    Ok(f)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Failure(m) => eprintln!("error: {m}"),
            }
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Cavity(args) => with_threads(&args, |cfg, fmt| run_cavity(&cfg.cavity, &args.out, fmt), "cavity"),
        Command::Kerr(args) => {
            with_threads(&args, |cfg, fmt| run_kerr(&cfg.kerr, &args.out, fmt, args.threads), "kerr")
        }
        Command::Optimize(args) => with_threads(&args, |cfg, fmt| run_optimize(&cfg.cavity, &args.out, fmt), "cavity"),
        Command::Plot(args) => emit_plots(&args.inputs, args.out.as_deref()),
    }
}

fn with_threads(
    args: &RunArgs,
    body: impl FnOnce(&config::ConfigFile, Formats) -> Result<(), CliError> + Send,
    section: &str,
) -> Result<(), CliError> {
    let formats = parse_formats(&args.format)?;
    let cfg = config::load(args.config.as_deref(), &args.set, section).map_err(CliError::Usage)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Failure(e.to_string()))?;
    pool.install(|| body(&cfg, formats))
}

/// Collects output files in memory so nothing is written when a later step
/// fails.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn csv(&mut self, formats: Formats, name: &str, text: String) {
        if formats.svg {
            if let Ok(table) = svg::parse_csv(&text) {
                let stem = name.trim_end_matches(".csv");
                self.files.push((format!("{stem}.svg"), svg::render(&table, stem)));
            }
        }
        if formats.csv {
            self.files.push((name.to_string(), text));
        }
    }

    fn json(&mut self, formats: Formats, name: &str, value: &serde_json::Value) {
        if formats.json {
            let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
            self.files.push((name.to_string(), text));
        }
    }

    fn write(self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| io_err(&self.dir, e))?;
        for (name, text) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        }
        Ok(())
    }
}

fn optimum_json(cfg: &CavityConfig) -> Result<serde_json::Value, CliError> {
    if cfg.lambda == 0.0 {
        return Ok(json!({
            "lambda": cfg.lambda,
            "phi": cfg.phi,
            "phi0_star": null,
            "fidelity_star": null,
            "probability_at_star": null,
            "evaluations": 0,
            "warnings": ["product input: the success probability and fidelity do not depend on the entanglement"],
        }));
    }
    let r = optimize_phi0(cfg.lambda, cfg.phi)?;
    Ok(json!({
        "lambda": cfg.lambda,
        "phi": cfg.phi,
        "phi0_star": r.phi0_star,
        "fidelity_star": r.fidelity_star,
        "probability_at_star": r.probability_at_star,
        "evaluations": r.evaluations,
        "warnings": [],
    }))
}

/// Writes `fig2a.csv` (phi0, P, S), `fig2b.csv` (phi0, F) and `optimum.json`.
fn run_cavity(cfg: &CavityConfig, out: &Path, formats: Formats) -> Result<(), CliError> {
    cfg.validate().map_err(CliError::Usage)?;
    let sweep = sweep_cavity_phi0_with(cfg.lambda, cfg.phi, (cfg.phi0_min, cfg.phi0_max), cfg.steps, cfg.n_max)?;
    let optimum = optimum_json(cfg)?;
    let mut outputs = Outputs::new(out);
    outputs.csv(formats, "fig2a.csv", sweep.to_csv(&["P", "S"])?);
    outputs.csv(formats, "fig2b.csv", sweep.to_csv(&["F"])?);
    outputs.json(formats, "optimum.json", &optimum);
    outputs.write()
}

fn run_optimize(cfg: &CavityConfig, out: &Path, formats: Formats) -> Result<(), CliError> {
    cfg.validate().map_err(CliError::Usage)?;
    let optimum = optimum_json(cfg)?;
    println!("{}", serde_json::to_string_pretty(&optimum).expect("JSON values serialize"));
    let mut outputs = Outputs::new(out);
    outputs.json(formats, "optimum.json", &optimum);
    if formats.json {
        outputs.write()?;
    }
    Ok(())
}

fn grid_csv(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_float).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes `fig5a.csv`, `fig5b.csv`, `grid.csv`, `fig6.csv`, `fig7.csv` and
/// `summary.json`.
fn run_kerr(cfg: &KerrConfig, out: &Path, formats: Formats, threads: Option<usize>) -> Result<(), CliError> {
    let start = Instant::now();
    let (params, grid) = cfg.validate().map_err(CliError::Usage)?;
    let scan = scan_grid(&params, &grid)?;
    let (sweep, regions) = sweep_scan(&scan, &cfg.delta_f)?;

    let mut outputs = Outputs::new(out);
    let pts = &scan.points;
    outputs.csv(formats, "fig5a.csv", grid_csv("x,y,Q", pts.iter().map(|p| vec![p.x, p.y, p.q])));
    outputs.csv(formats, "fig5b.csv", grid_csv("x,y,F", pts.iter().map(|p| vec![p.x, p.y, p.fidelity])));
    outputs.csv(
        formats,
        "grid.csv",
        grid_csv("x,y,Q,F_phiN,F_teleport", pts.iter().map(|p| vec![p.x, p.y, p.q, p.fidelity, p.teleport])),
    );
    if !regions.is_empty() {
        outputs.csv(formats, "fig6.csv", sweep.to_csv(&["avg_F", "P_omega"])?);
        outputs.csv(formats, "fig7.csv", sweep.to_csv(&["F_teleport"])?);
    }
    let summary = json!({
        "params": {
            "lambda": params.lambda(),
            "alpha": params.alpha(),
            "phi": params.phi(),
            "fock_cut": params.fock_cut(),
            "n_max": params.n_max(),
            "half_width": grid.half_width(),
            "step": grid.step(),
        },
        "F0": scan.f0,
        "max_F": scan.max_fidelity(),
        "window_probability": scan.total_probability(),
        "regions": regions,
        "truncated_at": sweep.truncated_at,
        "warnings": sweep.warnings,
        "meta": {
            "threads": threads.unwrap_or_else(rayon::current_num_threads),
            "elapsed_seconds": start.elapsed().as_secs_f64(),
            "version": env!("CARGO_PKG_VERSION"),
        },
    });
    outputs.json(formats, "summary.json", &summary);
    outputs.write()
}

/// Renders each CSV as `<stem>.svg`.
fn emit_plots(inputs: &[PathBuf], out: Option<&Path>) -> Result<(), CliError> {
    let mut rendered = Vec::new();
    for input in inputs {
        let text = std::fs::read_to_string(input).map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
        let table = svg::parse_csv(&text).map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_string();
        let dir = match out {
            Some(d) => d.to_path_buf(),
            None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        rendered.push((dir.join(format!("{stem}.svg")), svg::render(&table, &stem)));
    }
    for (path, text) in rendered {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_parsing() {
        assert_eq!(parse_formats("csv, svg").unwrap(), Formats { csv: true, json: false, svg: true });
        assert!(parse_formats("png").is_err());
        assert!(parse_formats("").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["cvconc"]), EXIT_USAGE);
        assert_eq!(run(["cvconc", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["cvconc", "kerr", "--threads", "0", "--out", "/nonexistent/never"]), EXIT_USAGE);
        assert_eq!(run(["cvconc", "--help"]), EXIT_OK);
    }
}
