//! Parameter sweeps, figure tables and validation runs for damped-packet
//! decoherence.
//!
//! Settings come from defaults, then the `--config` TOML file, then flags.

mod commands;
mod config;
mod failure;
mod table;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{RunConfig, SourceChoice, WeightChoice};
use failure::Failure;
use table::{Format, Table};

#[derive(Parser, Debug)]
#[command(name = "packet-decoherence", version, about = "Decoherence of a damped Gaussian packet in a harmonic trap")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with [bath], [state], [time], [quadrature], [snapshot] and [validate] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    #[arg(long, global = true, allow_negative_numbers = true)]
    rel_tol: Option<f64>,

    /// Cutoff frequencies λ_C, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    lambda_c: Option<Vec<f64>>,

    /// Damping ratios R = γ/ω₀.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    damping: Option<Vec<f64>>,

    /// κ = ħω₀/2k_BT.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    kappa: Option<Vec<f64>>,

    /// Squeezing parameters ζ.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    squeezing: Option<Vec<f64>>,

    /// Off-diagonal distances r in units of σ₀.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    distance: Option<Vec<f64>>,

    /// Initial momentum p̃.
    #[arg(long, global = true, allow_negative_numbers = true)]
    momentum: Option<f64>,

    /// Explicit θ values; overrides the uniform grid.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    theta: Option<Vec<f64>>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    theta_max: Option<f64>,

    #[arg(long, global = true)]
    theta_points: Option<usize>,

    #[arg(long, global = true, value_enum)]
    weight: Option<WeightArg>,

    #[arg(long, global = true, value_enum)]
    source: Option<SourceArg>,

    /// θ of the density-matrix snapshot.
    #[arg(long, global = true, allow_negative_numbers = true)]
    snapshot_theta: Option<f64>,

    /// Points along each snapshot axis.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Multiplies every acceptance tolerance.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tolerance_scale: Option<f64>,

    /// Acceptance criteria to run, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    criteria: Option<Vec<usize>>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// F, P, purity and packet center over the θ grid.
    Evolve,
    /// Weak-damping τ_D/τ_R table with r = ζ.
    FigWeak,
    /// Strong-damping decay rates and τ_D/τ_R.
    FigStrong,
    /// Density-matrix magnitude on a (q, r) grid.
    Snapshot,
    /// Cutoff dependence of −d²I/dθ²|₀, d_C and s_∞.
    Divergence,
    /// Run the acceptance criteria.
    Validate,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum WeightArg {
    Auto,
    Exact,
    HighTemperature,
    ZeroTemperature,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SourceArg {
    Quadrature,
    Residue,
    Appendix,
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.rel_tol {
            cfg.quadrature.rel_tol = v;
        }
        if let Some(v) = &self.lambda_c {
            cfg.bath.lambda_c = v.clone();
        }
        if let Some(v) = &self.damping {
            cfg.bath.damping = v.clone();
        }
        if let Some(v) = &self.kappa {
            cfg.bath.kappa = v.clone();
        }
        if let Some(v) = &self.squeezing {
            cfg.state.squeezing = v.clone();
        }
        if let Some(v) = &self.distance {
            cfg.state.distance = v.clone();
        }
        if let Some(v) = self.momentum {
            cfg.state.momentum = v;
        }
        if let Some(v) = &self.theta {
            cfg.time.theta = Some(v.clone());
        }
        if let Some(v) = self.theta_max {
            cfg.time.end = v;
        }
        if let Some(v) = self.theta_points {
            cfg.time.points = v;
        }
        if let Some(w) = self.weight {
            cfg.quadrature.weight = match w {
                WeightArg::Auto => WeightChoice::Auto,
                WeightArg::Exact => WeightChoice::Exact,
                WeightArg::HighTemperature => WeightChoice::HighTemperature,
                WeightArg::ZeroTemperature => WeightChoice::ZeroTemperature,
            };
        }
        if let Some(s) = self.source {
            cfg.quadrature.source = match s {
                SourceArg::Quadrature => SourceChoice::Quadrature,
                SourceArg::Residue => SourceChoice::Residue,
                SourceArg::Appendix => SourceChoice::Appendix,
            };
        }
        if let Some(v) = self.snapshot_theta {
            cfg.snapshot.theta = v;
        }
        if let Some(n) = self.grid_points {
            cfg.snapshot.q_points = n;
            cfg.snapshot.r_points = n;
        }
        if let Some(v) = self.tolerance_scale {
            cfg.validate.tolerance_scale = v;
        }
        if let Some(v) = &self.criteria {
            cfg.validate.criteria = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Writes the whole output at once so failures never leave partial files.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn render(table: &Table, format: Format) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    table.write(&mut buf, format)?;
    Ok(buf)
}

fn header_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".header.json");
    out.with_file_name(name)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = cli.run_config()?;
    let format = cli.format();
    let out = cli.out.as_deref();
    match cli.command {
        Command::Evolve => emit(out, &render(&commands::evolve(&cfg)?, format)?),
        Command::FigWeak => emit(out, &render(&commands::fig_weak(&cfg)?, format)?),
        Command::FigStrong => emit(out, &render(&commands::fig_strong(&cfg)?, format)?),
        Command::Divergence => emit(out, &render(&commands::divergence(&cfg)?, format)?),
        Command::Snapshot => {
            let (meta, table) = commands::snapshot(&cfg)?;
            match format {
                Format::Csv => {
                    let path = out.ok_or_else(|| {
                        Failure::config("snapshot CSV output needs --out for its header file")
                    })?;
                    let mut header = serde_json::to_vec_pretty(&meta)?;
                    header.push(b'\n');
                    emit(Some(&header_path(path)), &header)?;
                    emit(out, &render(&table, format)?)
                }
                Format::Json => {
                    let doc = serde_json::json!({ "header": meta, "rows": table });
                    let mut bytes = serde_json::to_vec_pretty(&doc)?;
                    bytes.push(b'\n');
                    emit(out, &bytes)
                }
            }
        }
        Command::Validate => {
            let (table, failed) = commands::validate(&cfg);
            emit(out, &render(&table, format)?)?;
            if failed.is_empty() {
                Ok(())
            } else {
                let ids: Vec<String> = failed.iter().map(|o| o.id.to_string()).collect();
                Err(Failure::validation(format!("criteria failed: {}", ids.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.code as u8)
        }
    }
}
