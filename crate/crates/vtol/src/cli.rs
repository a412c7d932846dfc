//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use vtol_core::harness::{compare_runs, design_pipeline, run_scenario_with_table, PlantMode, RunReport};
use vtol_core::plant::AeroTable;
use vtol_core::lti::{bode, closed_loop_stability, discretize_tustin, discretize_tustin_sections, magnitude_slope, margins};

use crate::config::{load_pipeline, load_scenario, read_toml, to_toml, TfConfig, BUILTIN_PREFIX};
use crate::csvio;
use crate::error::{Error, Result, EXIT_ACCEPTANCE, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "vtol", version, about = "Tail-sitter rate-loop identification, design and simulation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DefaultsKind {
    Scenario,
    Pipeline,
    Tf,
    AeroTable,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario file or `builtin:<name>` and evaluate its checks.
    Run {
        scenario: String,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to `out/<scenario name>`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Aerodynamic table CSV `alpha_rad,V_ms,CL,CD` replacing the built-in one.
        #[arg(long)]
        aero_table: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Sweep, FRF estimate, model fit, notch placement and loop analysis.
    Pipeline {
        /// Pipeline TOML; the defaults are used when omitted.
        config: Option<PathBuf>,
        #[arg(long)]
        skip_notch: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Bode export `freq_hz,mag_db,phase_deg` of a transfer-function TOML.
    Bode {
        tf: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        lo: f64,
        #[arg(long, default_value_t = 100.0)]
        hi: f64,
        #[arg(long, default_value_t = 200)]
        points_per_decade: usize,
        /// Output file, `-` for standard output.
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Gain crossover, phase and gain margins, slope and closed-loop stability.
    Margins {
        tf: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        lo: f64,
        #[arg(long, default_value_t = 100.0)]
        hi: f64,
        #[arg(long, num_args = 2, default_values_t = [0.6, 14.0])]
        slope_band: Vec<f64>,
    },
    /// Tustin biquads `section,b0,b1,b2,a1,a2` of a transfer-function TOML.
    Biquads {
        tf: PathBuf,
        #[arg(long, default_value_t = 250.0)]
        sample_hz: f64,
        /// Single prewarp frequency; without it each resonant section is
        /// prewarped at its own natural frequency.
        #[arg(long)]
        prewarp_hz: Option<f64>,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Column-wise difference of two CSV logs; exit 0 only if bit-identical.
    Compare { a: PathBuf, b: PathBuf },
    /// Prints a default configuration (TOML, or CSV for the aero table).
    Defaults {
        #[arg(value_enum)]
        kind: DefaultsKind,
        /// Built-in scenario to print instead of the bare default.
        #[arg(long)]
        builtin: Option<String>,
    },
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn finish(rep: &RunReport) -> i32 {
    print!("{}", rep.to_text());
    if rep.passed() {
        EXIT_OK
    } else {
        EXIT_ACCEPTANCE
    }
}

fn cmd_run(source: &str, seed: Option<u64>, out_dir: Option<PathBuf>, aero: Option<&Path>) -> Result<i32> {
    let mut sc = load_scenario(source)?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    let table = match aero {
        Some(p) => csvio::read_aero_table(p)?,
        None => AeroTable::default(),
    };
    let dir = out_dir.unwrap_or_else(|| Path::new("out").join(&sc.name));
    prepare_dir(&dir)?;
    let (tel, mut rep) = run_scenario_with_table(&sc, &table)?;
    let mut files = vec![dir.join("telemetry.csv"), dir.join("metrics.csv"), dir.join("scenario.toml")];
    csvio::write_telemetry(&files[0], &tel)?;
    csvio::write_metrics(&files[1], &rep)?;
    write_text(&files[2], &to_toml(&sc)?)?;
    if sc.plant_mode == PlantMode::Nonlinear {
        let p = dir.join("sim_log.csv");
        csvio::write_sim_log(&p, &tel)?;
        files.push(p);
    }
    let report = dir.join("report.txt");
    files.push(report.clone());
    rep.artifacts = files.iter().map(|p| p.display().to_string()).collect();
    write_text(&report, &rep.to_text())?;
    Ok(finish(&rep))
}

fn cmd_pipeline(config: Option<&Path>, skip_notch: bool, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<i32> {
    let mut cfg = load_pipeline(config)?;
    cfg.skip_notch |= skip_notch;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let res = design_pipeline(&cfg)?;
    let dir = out_dir.unwrap_or_else(|| Path::new("out").join(&res.report.scenario));
    prepare_dir(&dir)?;
    let mut rep = res.report.clone();
    let mut files = vec![dir.join("sweep.csv"), dir.join("frf.csv")];
    csvio::write_sweep(&files[0], &res.sweep)?;
    csvio::write_frf(&files[1], &res.frf)?;
    for (name, fr) in res.bodes() {
        let p = dir.join(format!("{name}.csv"));
        csvio::write_bode(&p, fr)?;
        files.push(p);
    }
    let fit = dir.join("fitted_plant.toml");
    write_text(&fit, &to_toml(&res.fit.params)?)?;
    let fit_report = dir.join("fit_report.txt");
    write_text(&fit_report, &res.fit.to_text())?;
    let metrics = dir.join("metrics.csv");
    csvio::write_metrics(&metrics, &rep)?;
    let used = dir.join("pipeline.toml");
    write_text(&used, &to_toml(&cfg)?)?;
    let report = dir.join("report.txt");
    files.extend([fit, fit_report, metrics, used, report.clone()]);
    rep.artifacts = files.iter().map(|p| p.display().to_string()).collect();
    write_text(&report, &rep.to_text())?;
    Ok(finish(&rep))
}

fn cmd_margins(tf: &Path, lo: f64, hi: f64, slope_band: &[f64]) -> Result<i32> {
    let l = read_toml::<TfConfig>(tf)?.build()?;
    let to_err = |e| Error::Harness(vtol_core::error::HarnessError::Lti(e));
    let m = margins(&l, (lo, hi)).map_err(to_err)?;
    let slope = magnitude_slope(&l, slope_band[0], slope_band[1]).map_err(to_err)?;
    let stab = closed_loop_stability(&l).map_err(to_err)?;
    println!("gain_crossover_hz = {}", m.gain_crossover_hz);
    println!("phase_margin_deg = {}", m.phase_margin_deg);
    match (m.phase_crossover_hz, m.gain_margin_db) {
        (Some(f), Some(g)) => {
            println!("phase_crossover_hz = {f}");
            println!("gain_margin_db = {g}");
        }
        _ => println!("phase_crossover_hz = none"),
    }
    println!("gain_crossings_hz = {:?}", m.all_gain_crossings_hz);
    println!("slope_db_per_dec = {slope}  # over [{}, {}] Hz", slope_band[0], slope_band[1]);
    println!("closed_loop_stable = {}", stab.stable);
    println!("max_pole_real_part = {}", stab.max_real_part);
    Ok(EXIT_OK)
}

fn cmd_compare(a: &Path, b: &Path) -> Result<i32> {
    let (ha, ra) = csvio::read_table(a)?;
    let (hb, rb) = csvio::read_table(b)?;
    let rep = compare_runs(&ha, &ra, &hb, &rb)?;
    print!("{}", rep.to_text());
    Ok(if rep.identical { EXIT_OK } else { EXIT_ACCEPTANCE })
}

fn cmd_defaults(kind: DefaultsKind, name: Option<&str>) -> Result<i32> {
    let text = match kind {
        DefaultsKind::Scenario => match name {
            Some(n) => to_toml(&load_scenario(&format!("{BUILTIN_PREFIX}{n}"))?)?,
            None => to_toml(&vtol_core::harness::Scenario::default())?,
        },
        DefaultsKind::Pipeline => to_toml(&vtol_core::harness::PipelineConfig::default())?,
        DefaultsKind::Tf => to_toml(&TfConfig::designed_loop())?,
        DefaultsKind::AeroTable => {
            csvio::write_aero_table(Path::new("-"), &AeroTable::default())?;
            return Ok(EXIT_OK);
        }
    };
    print!("{text}");
    Ok(EXIT_OK)
}

/// Executes a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            out_dir,
            aero_table,
            ..
        } => cmd_run(&scenario, seed, out_dir, aero_table.as_deref()),
        Command::Pipeline {
            config,
            skip_notch,
            seed,
            out_dir,
            ..
        } => cmd_pipeline(config.as_deref(), skip_notch, seed, out_dir),
        Command::Bode {
            tf,
            lo,
            hi,
            points_per_decade,
            out,
        } => {
            let t = read_toml::<TfConfig>(&tf)?.build()?;
            let fr = bode(&t, lo, hi, points_per_decade).map_err(|e| Error::Harness(e.into()))?;
            csvio::write_bode(&out, &fr)?;
            Ok(EXIT_OK)
        }
        Command::Margins { tf, lo, hi, slope_band } => cmd_margins(&tf, lo, hi, &slope_band),
        Command::Biquads {
            tf,
            sample_hz,
            prewarp_hz,
            out,
        } => {
            let t = read_toml::<TfConfig>(&tf)?.build()?;
            let f = match prewarp_hz {
                Some(p) => discretize_tustin(&t, sample_hz, Some(p)),
                None => discretize_tustin_sections(&t, sample_hz),
            }
            .map_err(|e| Error::Harness(e.into()))?;
            csvio::write_biquads(&out, &f)?;
            if f.delay.samples() > 0 || f.delay_remainder != 0.0 {
                eprintln!(
                    "delay: {} samples, {} s remainder dropped",
                    f.delay.samples(),
                    f.delay_remainder
                );
            }
            Ok(EXIT_OK)
        }
        Command::Compare { a, b } => cmd_compare(&a, &b),
        Command::Defaults { kind, builtin } => cmd_defaults(kind, builtin.as_deref()),
    }
}

/// Parses the process arguments, runs and maps errors to exit codes.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
