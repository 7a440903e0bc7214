//! `eogchair` command-line driver.
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eogchair::decision::{write_commands_csv, Pipeline};
use eogchair::filter::{component_values, discretize, response_sweep, SallenKeyParams};
use eogchair::harness::{
    calibrate_white_sigma, evaluate, render_report, Execution, ReportFormat, DEFAULT_MASTER_SEED,
    DEFAULT_TRIALS,
};
use eogchair::motor::{run_until, write_log_csv, MotorCommand};
use eogchair::signal_model::{add_noise, load_script, load_trace_csv, synth_trace, write_trace_csv};
use eogchair::{Error, PipelineConfig};

#[derive(Parser)]
#[command(name = "eogchair", version, about = "EOG wheelchair control-chain simulator")]
struct Cli {
    /// Pipeline config file (TOML). The shipped defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render a gaze script into a trace CSV.
    Synth {
        /// Script with lines `direction,onset_s,duration_s,amplitude_uV`.
        script: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        total_s: f64,
        /// Sample rate; defaults to the config's.
        #[arg(long)]
        fs: Option<f64>,
        /// Add the noise of this subject profile from the config.
        #[arg(long)]
        subject: Option<u8>,
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Amplify and low-pass filter a trace CSV.
    Filter {
        trace: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the biquad coefficients as CSV.
        #[arg(long)]
        dump_coeffs: Option<PathBuf>,
    },
    /// Run the full chain on a trace CSV and emit `time_s,direction` commands.
    Classify {
        trace: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the motor transition log as `time_s,state`.
        #[arg(long)]
        motor_log: Option<PathBuf>,
    },
    /// Monte-Carlo accuracy per subject profile.
    Evaluate {
        #[arg(long, default_value = "plain")]
        format: String,
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// Run trials on one thread.
        #[arg(long)]
        sequential: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Frequency response of the configured (or given) low-pass as CSV.
    Respond {
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        gain: Option<f64>,
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        /// Print R/C values for this C2 (farads) on stderr.
        #[arg(long)]
        capacitor: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit each subject's white-noise level to a target accuracy.
    Calibrate {
        /// Comma-separated target accuracies, one per subject in config order.
        #[arg(long, value_delimiter = ',', default_values_t = [98.0, 98.7, 99.5, 99.0, 98.3])]
        targets: Vec<f64>,
        #[arg(long, default_value_t = 4000)]
        trials: usize,
        #[arg(long, default_value_t = 777)]
        seed: u64,
    },
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
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Error> {
    let mut out = sink(path)?;
    let label = path.unwrap_or(Path::new("<stdout>"));
    write(&mut out).and_then(|_| out.flush()).map_err(|e| io_err(label, e))
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::shipped(),
    };

    match cli.command {
        Cmd::Synth {
            script,
            total_s,
            fs,
            subject,
            seed,
            output,
        } => {
            let events = load_script(&script)?;
            let fs = fs.unwrap_or(cfg.signal.sample_rate_hz);
            let mut trace = synth_trace(&events, total_s, fs, cfg.signal.polarity)?;
            if let Some(id) = subject {
                let profile = cfg
                    .subject(id)
                    .ok_or_else(|| Error::Config(format!("no subject with id {id}")))?;
                trace = add_noise(&trace, &profile.noise.with_seed(seed))?;
            }
            emit(output.as_deref(), |w| write_trace_csv(&trace, w))
        }
        Cmd::Filter {
            trace,
            output,
            dump_coeffs,
        } => {
            let trace = load_trace_csv(&trace)?;
            let coeffs = discretize(&cfg.filter, trace.sample_rate_hz())?;
            let mut stage = cfg.clone();
            stage.signal.sample_rate_hz = trace.sample_rate_hz();
            let filtered = Pipeline::new(&stage)?.filtered(&trace)?;
            if let Some(path) = dump_coeffs {
                emit(Some(&path), |w| coeffs.write_csv(w))?;
            }
            emit(output.as_deref(), |w| {
                writeln!(w, "time_s,v_V,clipped")?;
                for (i, (v, c)) in filtered.v_out_v.iter().zip(&filtered.clipped).enumerate() {
                    writeln!(w, "{},{},{}", trace.time_s(i), v, u8::from(*c))?;
                }
                Ok(())
            })
        }
        Cmd::Classify {
            trace,
            output,
            motor_log,
        } => {
            let trace = load_trace_csv(&trace)?;
            let mut stage = cfg.clone();
            stage.signal.sample_rate_hz = trace.sample_rate_hz();
            let commands = Pipeline::new(&stage)?.classify(&trace)?;
            if let Some(path) = motor_log {
                let motor: Vec<MotorCommand> = commands.iter().copied().map(MotorCommand::from).collect();
                let end = trace.duration_s().max(motor.last().map_or(0.0, |c| c.at_s) + cfg.motor.dwell_s);
                let log = run_until(&motor, &cfg.motor, end)?;
                emit(Some(&path), |w| write_log_csv(&log, w))?;
            }
            emit(output.as_deref(), |w| write_commands_csv(&commands, w))
        }
        Cmd::Evaluate {
            format,
            seed,
            trials,
            sequential,
            output,
        } => {
            let format: ReportFormat = format.parse()?;
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let report = evaluate(&cfg.subjects, trials, &cfg, seed, exec)?;
            let text = render_report(&report, format);
            emit(output.as_deref(), |w| w.write_all(text.as_bytes()))
        }
        Cmd::Respond {
            cutoff,
            q,
            gain,
            fs,
            points,
            capacitor,
            output,
        } => {
            let params = SallenKeyParams {
                cutoff_hz: cutoff.unwrap_or(cfg.filter.cutoff_hz),
                q: q.unwrap_or(cfg.filter.q),
                gain: gain.unwrap_or(cfg.filter.gain),
            };
            let coeffs = discretize(&params, fs.unwrap_or(cfg.signal.sample_rate_hz))?;
            if points < 2 {
                return Err(Error::Config("--points must be at least 2".into()));
            }
            if let Some(c) = capacitor {
                let parts = component_values(&params, c)?;
                eprintln!(
                    "R1 = {:.4e} ohm, R2 = {:.4e} ohm, C1 = {:.4e} F, C2 = {:.4e} F, K = {}",
                    parts.r1_ohms, parts.r2_ohms, parts.c1_farads, parts.c2_farads, parts.gain
                );
            }
            emit(output.as_deref(), |w| {
                writeln!(w, "f_hz,magnitude,phase_rad")?;
                for (f, m, p) in response_sweep(&coeffs, points) {
                    writeln!(w, "{f},{m},{p}")?;
                }
                Ok(())
            })
        }
        Cmd::Calibrate { targets, trials, seed } => {
            if targets.len() != cfg.subjects.len() {
                return Err(Error::Config(format!(
                    "{} targets for {} subjects",
                    targets.len(),
                    cfg.subjects.len()
                )));
            }
            for (profile, target) in cfg.subjects.iter().zip(targets) {
                let fit = calibrate_white_sigma(profile, target, &cfg, trials, seed, (0.0, 200.0))?;
                println!(
                    "subject {:02}: white_sigma_uv = {:.3}  ({:.2}% vs target {:.2}%)",
                    profile.id, fit.white_sigma_uv, fit.accuracy_percent, target
                );
            }
            Ok(())
        }
    }
}
