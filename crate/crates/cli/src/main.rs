//! `latticevib` command-line front end.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ColorChoice, Parser, Subcommand};

use latticevib::detection::full_report;
use latticevib::floquet::{DetuningGrid, FloquetParams};
use latticevib::golden::{parse_suite, run_golden_suite, DEFAULT_SUITE};
use latticevib::lineshape::{convolve_spectrum, recommended_n_theta, band_half_width};
use latticevib::link_budget::{depth_vs_length_sweep, FiberLink};
use latticevib::oracle::compare_spectra;
use latticevib::output::{
    depth_table, oracle_table, read_spectrum, sidecar_path, spectrum_table, to_json_string, write_json,
    write_spectrum, write_text, Table,
};
use latticevib::presets::run_preset;
use latticevib::svg::{render_svg, PlotSpec};
use latticevib::sweep::{parse_values, sweep};
use latticevib::{ClockPulse, Error, Preset, Result, Scenario};

#[derive(Parser, Debug)]
#[command(name = "latticevib", version, color = ColorChoice::Never, about = "Lattice clock demodulation of a fiber vibration sensor")]
struct Cli {
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lattice depth and tunneling versus fiber length.
    DepthSweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Lengths in km, `start:stop:count` or a comma list.
        #[arg(long, default_value = "0:8:81")]
        lengths: String,
        /// Losses in dB/km; defaults to the configured loss.
        #[arg(long)]
        losses: Option<String>,
        /// FBG reflectivities; defaults to the configured value.
        #[arg(long)]
        reflectivities: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clock excitation spectrum of a scenario.
    Spectrum {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Skip the band lineshape even if the scenario enables it.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Broadens a raw spectrum file with the band lineshape.
    Convolve {
        /// Raw spectrum CSV with its JSON sidecar.
        #[arg(long)]
        input: PathBuf,
        /// Scenario supplying tunneling and SOC phase.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Tunneling J0 in Hz, overriding the link budget.
        #[arg(long)]
        j0_hz: Option<f64>,
        #[arg(long)]
        n_theta: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detection limits of a scenario.
    Detect {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print JSON instead of the table.
        #[arg(long)]
        print_json: bool,
    },
    /// Compares the sideband formula with direct time integration.
    OracleCheck {
        #[arg(long)]
        beta: f64,
        /// Drive frequency in units of the Rabi frequency.
        #[arg(long, default_value_t = 20.0)]
        ratio: f64,
        /// Rabi frequency in Hz.
        #[arg(long, default_value_t = 10.0)]
        rabi_hz: f64,
        /// Pulse area in units of pi.
        #[arg(long, default_value_t = 1.0)]
        area_pi: f64,
        /// Half span in units of the drive frequency.
        #[arg(long, default_value_t = 2.0)]
        span: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        /// Largest accepted absolute deviation.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a figure preset (fig1, fig3, fig4, fig5).
    Preset {
        name: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Re-runs a scenario over values of one numeric key.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Configuration key, e.g. `link.length_km`.
        #[arg(long)]
        axis: String,
        /// `start:stop:count` or a comma list, in the key's units.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line plot of CSV columns as SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        x: String,
        /// Comma-separated y columns.
        #[arg(long)]
        y: String,
        /// Comma-separated columns that split rows into curves.
        #[arg(long)]
        group_by: Option<String>,
        #[arg(long, default_value = "")]
        title: String,
        #[arg(long)]
        log_y: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the golden-number regression suite.
    Golden {
        /// Suite file; defaults to the built-in suite.
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn load_scenario(config: Option<&Path>) -> Result<Scenario> {
    match config {
        Some(p) => Scenario::parse_config(p),
        None => Ok(Scenario::default()),
    }
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn emit_table(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            table.write(p)?;
            println!("{}", p.display());
        }
        None => print!("{}", table.to_csv_string()?),
    }
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::DepthSweep {
            config,
            lengths,
            losses,
            reflectivities,
            out,
        } => {
            let sc = load_scenario(config.as_deref())?;
            let link: FiberLink = sc.link;
            let losses = match losses {
                Some(s) => parse_values(&s)?,
                None => vec![link.loss_db_per_km],
            };
            let refl = match reflectivities {
                Some(s) => parse_values(&s)?,
                None => vec![link.fbg_reflectivity],
            };
            let rows = depth_vs_length_sweep(&sc.lattice, &losses, &refl, &parse_values(&lengths)?)?;
            emit_table(&depth_table(&rows), out.as_deref())
        }
        Command::Spectrum { config, raw, out } => {
            let sc = load_scenario(config.as_deref())?;
            let grid = sc.detuning_grid()?;
            let accel = sc.vibration.acceleration;
            let spec = if raw {
                sc.raw_spectrum_at(accel, &grid)?
            } else {
                sc.observed_spectrum_at(accel, &grid)?
            };
            if let Some(w) = &spec.meta.warning {
                eprintln!("warning: {w}");
            }
            let out = out.or_else(|| sc.output_dir.as_ref().map(|d| Path::new(d).join("spectrum.csv")));
            match out {
                Some(p) => {
                    write_spectrum(&p, &spec)?;
                    println!("{}", p.display());
                    println!("{}", sidecar_path(&p).display());
                }
                None => print!("{}", spectrum_table(&spec).to_csv_string()?),
            }
            Ok(())
        }
        Command::Convolve {
            input,
            config,
            j0_hz,
            n_theta,
            out,
        } => {
            let sc = load_scenario(config.as_deref())?;
            let raw = read_spectrum(&input)?;
            if raw.meta.convolved {
                return Err(Error::Data(format!("{} is already broadened", input.display())));
            }
            let j0 = match j0_hz {
                Some(hz) => hz * TAU,
                None => sc.link_budget()?.j0_rad_s,
            };
            let phi = sc.lattice.species.soc_phase;
            let n = n_theta.unwrap_or_else(|| recommended_n_theta(band_half_width(j0, phi), raw.meta.duration));
            let spec = convolve_spectrum(&raw, j0, phi, n)?;
            write_spectrum(&out, &spec)?;
            println!("{}", out.display());
            println!("{}", sidecar_path(&out).display());
            Ok(())
        }
        Command::Detect {
            config,
            json,
            print_json,
        } => {
            let sc = load_scenario(config.as_deref())?;
            let report = full_report(&sc, &sc.criterion)?;
            if let Some(p) = &json {
                write_json(p, &report)?;
            }
            if print_json {
                print!("{}", to_json_string(&report)?);
            } else {
                print!("{}", report.to_table());
            }
            Ok(())
        }
        Command::OracleCheck {
            beta,
            ratio,
            rabi_hz,
            area_pi,
            span,
            points,
            tolerance,
            out,
        } => {
            let omega0 = TAU * rabi_hz;
            let pulse = ClockPulse::new(omega0, area_pi * PI / omega0)?;
            let params = FloquetParams::new(beta, ratio * omega0)?;
            let grid = DetuningGrid::symmetric(span * params.drive_freq, points)?;
            let cmp = compare_spectra(&params, &pulse, &grid)?;
            let table = oracle_table(&cmp);
            match &out {
                Some(p) => {
                    table.write(p)?;
                    println!("{}", p.display());
                    println!("max_abs_dev = {}", cmp.max_abs_dev);
                }
                None => {
                    print!("{}", table.to_csv_string()?);
                    if cmp.max_abs_dev <= tolerance {
                        eprintln!("max_abs_dev = {}", cmp.max_abs_dev);
                    }
                }
            }
            if cmp.max_abs_dev > tolerance {
                return Err(Error::Accuracy(format!(
                    "deviation {} exceeds tolerance {tolerance}",
                    cmp.max_abs_dev
                )));
            }
            Ok(())
        }
        Command::Preset { name, out_dir } => {
            let preset: Preset = name.parse()?;
            for p in run_preset(preset, &out_dir)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            values,
            out,
        } => {
            let sc = load_scenario(config.as_deref())?;
            let s = sweep(&sc, &axis, &parse_values(&values)?)?;
            emit_table(&s.table(), out.as_deref())
        }
        Command::Render {
            input,
            x,
            y,
            group_by,
            title,
            log_y,
            out,
        } => {
            let ys = list(&y);
            let groups = group_by.as_deref().map(list).unwrap_or_default();
            let spec = PlotSpec {
                x: x.clone(),
                y: ys,
                group_by: groups,
                title,
                log_y,
                ..PlotSpec::new(&x, &[])
            };
            render_svg(&input, &spec, &out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Golden { suite, json } => {
            let text = match &suite {
                Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
                None => DEFAULT_SUITE.to_string(),
            };
            let report = run_golden_suite(&parse_suite(&text)?);
            if let Some(p) = &json {
                write_text(p, &to_json_string(&report)?)?;
            }
            print!("{}", report.to_table());
            if !report.all_passed() {
                return Err(Error::Accuracy(format!("{} golden records failed", report.failed)));
            }
            Ok(())
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    let msg = e.to_string().replace('\n', " ");
    let _ = writeln!(std::io::stderr(), "error: {}: {msg}", e.kind());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            let first = first.trim_start_matches("error: ");
            let _ = writeln!(std::io::stderr(), "error: usage: {first}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(&Error::InvalidParameter {
                name: "threads".into(),
                reason: "must be at least 1".into(),
            });
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Error::Io(format!("thread pool: {e}")));
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
