use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aesa_chain::array_model::ArrayGeometry;
use aesa_chain::harness::{load_config, run_experiment, write_report, ExperimentConfig, Mode};
use aesa_chain::grid::{Grid, GridAxis};
use aesa_chain::rd::range_compress;
use aesa_chain::scene::Scene;
use aesa_chain::{Error, Result};

#[derive(Parser)]
#[command(name = "aesa-chain", version, about = "Subarrayed AESA receive-chain experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run {
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        /// TOML scenario; defaults for the mode when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        adaptive: Option<OnOff>,
        /// Comma-separated steering angles in degrees.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        steer: Option<Vec<f64>>,
        /// Also write element and subarray geometry CSVs.
        #[arg(long)]
        dump_geometry: bool,
        /// Also write the first dwell's raw and range-compressed channels.
        #[arg(long)]
        emit_raw: bool,
    },
    /// Print the default scenario for a mode.
    Defaults {
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
    },
}

fn parse_mode(s: &str) -> Result<Mode> {
    s.parse()
}

fn dump_geometry(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<()> {
    let g = ArrayGeometry::demonstrator(cfg.radar.wavelength_m)?;
    let mut text = String::from("element,x_m,z_m,subarray\n");
    for (k, (x, z)) in g.element_positions.iter().enumerate() {
        text += &format!("{k},{x},{z},{}\n", g.subarray_map[k]);
    }
    std::fs::write(out.join("elements.csv"), text)?;
    let mut text = String::from("subarray,x_m,z_m\n");
    for (i, (x, z)) in g.subarray_phase_centers().iter().enumerate() {
        text += &format!("{i},{x},{z}\n");
    }
    std::fs::write(out.join("subarrays.csv"), text)?;
    Ok(())
}

fn emit_raw(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<()> {
    let g = ArrayGeometry::demonstrator(cfg.radar.wavelength_m)?;
    let scene = Scene {
        params: cfg.radar.clone(),
        geometry: g,
        targets: cfg.targets.clone(),
        jammer: Some(cfg.jammer.clone()),
        clutter: cfg.clutter.clone(),
        noise_power: cfg.noise_power,
    };
    let raw = scene.simulate(cfg.seed, 0)?;
    let comp = range_compress(&raw)?;
    let dir = out.join("grids");
    std::fs::create_dir_all(&dir)?;
    let pri = 1.0 / cfg.radar.prf_hz;
    let fs = cfg.radar.sample_rate_hz;
    for c in 0..raw.n_channels() {
        let r = raw.values.index_axis(ndarray::Axis(0), c).to_owned();
        let fast = GridAxis::new(cfg.radar.first_sample() as f64 / fs, 1.0 / fs, "s");
        Grid::complex(fast, GridAxis::new(0.0, pri, "s"), &r).save(&dir.join(format!("raw_ch{c}.aesg")))?;
        let m = comp.values.index_axis(ndarray::Axis(0), c).to_owned();
        Grid::complex(GridAxis::from_coords(&comp.range_axis, "m"), GridAxis::new(0.0, pri, "s"), &m)
            .save(&dir.join(format!("compressed_ch{c}.aesg")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Defaults { mode } => {
            print!("{}", aesa_chain::harness::config_to_string(&ExperimentConfig::for_mode(mode))?);
            Ok(())
        }
        Command::Run { mode, scenario, seed, out, adaptive, steer, dump_geometry: geom, emit_raw: raw } => {
            let mut cfg = match &scenario {
                Some(path) => load_config(path)?,
                None => ExperimentConfig::for_mode(mode),
            };
            if cfg.mode != mode {
                return Err(Error::Config(format!(
                    "--mode {mode} disagrees with the scenario's mode = \"{}\"",
                    cfg.mode
                )));
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(a) = adaptive {
                cfg.adaptive = matches!(a, OnOff::On);
            }
            if let Some(s) = steer {
                cfg.steering_deg = s;
            }
            cfg.validate()?;
            let report = run_experiment(&cfg)?;
            let files = write_report(&report, &out)?;
            if geom {
                dump_geometry(&cfg, &out)?;
            }
            if raw {
                emit_raw(&cfg, &out)?;
            }
            print!("{}", aesa_chain::harness::summary_text(&report));
            eprintln!("wrote {} files to {}", files.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
