//! `qiup` command-line front end.
//!
//! Every subcommand accepts `--config FILE`, a `key=value` file whose keys
//! are the subcommand's long flag names. File entries are spliced in right
//! after the subcommand; entries for flags that also appear on the command
//! line are dropped, so the command line wins.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use duality_core::imaging::{
    load_map, max_abs_error, rank_correlation, reconstruct, rmse, save_map, synth_letter_object, Execution, Glyph,
    ReconstructionPlan,
};
use duality_core::measure::{
    calibrate_no_object, estimate_visibility, minmax_visibility, scan_with, MeasurementPlan, Sampling,
    DEFAULT_GRID_SIZE,
};
use duality_core::mzi;
use duality_core::qiup::{ObjectPixel, QiupConfig, QiupState};
use duality_core::states::TwoPathState;
use duality_core::{fmt_sig17, Error};

#[derive(Debug, Parser)]
#[command(name = "qiup", version, about = "Duality ellipse demos and simulated imaging with undetected photons")]
pub struct Cli {
    /// key=value file with defaults for the subcommand's flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Duality ellipse loci (D, V) for a set of ellipticities, as CSV
    #[command(args_override_self = true)]
    DemoEllipse {
        /// Ellipticities eta = 1 - gamma, each in [0, 1)
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.5", allow_negative_numbers = true)]
        etas: Vec<f64>,
        /// Pump splits per locus, rounded up to an odd count so p1 = 1/2 is included
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Output CSV (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulated photon-counting fringe scan of one pixel, as CSV
    #[command(args_override_self = true)]
    Scan {
        #[command(flatten)]
        setup: SetupArgs,
        /// Object transmittance T at the pixel
        #[arg(long, default_value_t = 1.0)]
        transmittance: f64,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Output CSV (stdout if omitted; estimates are then not printed)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// No-object calibration of the overlap factor alpha * gamma
    #[command(args_override_self = true)]
    Calibrate {
        #[command(flatten)]
        setup: SetupArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Also write the result lines to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic letter-shaped cut-out object
    #[command(args_override_self = true)]
    Synth {
        /// Letter: S, O or I
        #[arg(long, default_value = "S")]
        glyph: Glyph,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        /// Edge ramp width in pixels
        #[arg(long, default_value_t = 3.0)]
        softness: f64,
        /// Output map (.pgm for an image, CSV otherwise)
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulated measurement and pixel-wise reconstruction of an object map
    #[command(args_override_self = true)]
    Reconstruct {
        /// Truth transmittance map (.pgm or CSV)
        #[arg(long)]
        object: PathBuf,
        #[command(flatten)]
        setup: SetupArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Assume alpha * gamma = 1 instead of calibrating without the object
        #[arg(long)]
        no_calibrate: bool,
        /// Process pixels on one thread
        #[arg(long)]
        serial: bool,
        /// Directory for the reconstruction, per-pixel estimates and report.txt
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compare an estimated map against the truth
    #[command(args_override_self = true)]
    Report {
        /// Truth map (.pgm or CSV)
        #[arg(long)]
        truth: PathBuf,
        /// Estimated map (.pgm or CSV)
        #[arg(long)]
        estimate: PathBuf,
        /// Also write the report to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SetupArgs {
    /// Pump probability in arm 1
    #[arg(long, default_value_t = 0.5)]
    p1: f64,
    /// Pump coherence between the two crystals
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Idler alignment overlap
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Fringe phase offset in radians
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    fringe_phase: f64,
}

impl SetupArgs {
    fn config(&self) -> Result<QiupConfig, Error> {
        QiupConfig::new(self.p1, self.gamma, self.alpha, self.fringe_phase)
    }
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Phase points per fringe scan
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
    /// Mean photon number per phase point
    #[arg(long, default_value_t = 100_000)]
    photons: u64,
    /// Use expected counts instead of Poisson samples
    #[arg(long)]
    noiseless: bool,
    /// Master seed, required unless --noiseless
    #[arg(long, required_unless_present = "noiseless")]
    seed: Option<u64>,
}

impl MeasureArgs {
    fn plan(&self) -> Result<MeasurementPlan, Error> {
        let sampling = if self.noiseless { Sampling::Noiseless } else { Sampling::Poisson };
        MeasurementPlan::new(self.grid, self.photons, sampling)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed command line or config file.
    Usage(String),
    Clap(clap::Error),
    Core(Error),
    /// I/O failure on a named file.
    File { path: PathBuf, source: Error },
}

impl CliError {
    /// 0 for help and version output, 1 usage, 2 data/parse/io, 3 physics.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Clap(e) if is_info(e) => 0,
            CliError::Clap(_) => 1,
            CliError::Core(e) if e.is_physics() => 3,
            CliError::Core(e) if e.is_invalid_parameter() => 1,
            CliError::Core(_) | CliError::File { .. } => 2,
        }
    }

    /// Full text for help and version requests, one line otherwise.
    pub fn message(&self) -> String {
        match self {
            CliError::Usage(msg) => format!("error: {msg}"),
            CliError::Clap(e) if is_info(e) || e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                e.render().to_string()
            }
            CliError::Clap(e) => {
                // clap lists details on indented lines before the usage block
                let text = e.render().to_string();
                text.lines()
                    .take_while(|l| !l.starts_with("Usage:"))
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .collect::<Vec<_>>()
                    .join(" ")
            }
            CliError::Core(e) => format!("error: {e}"),
            CliError::File { path, source } => format!("error: {}: {source}", path.display()),
        }
    }
}

fn is_info(e: &clap::Error) -> bool {
    matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion)
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// Attaches `path` to I/O failures; other errors pass through.
fn on_file(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| match e {
        Error::Io(_) => CliError::File {
            path: path.to_path_buf(),
            source: e,
        },
        other => CliError::Core(other),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| on_file(path)(Error::Io(e)))
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// stdout text to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = with_config_file(args.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(args).map_err(CliError::Clap)?;
    match cli.command {
        Command::DemoEllipse { etas, samples, out: path } => {
            emit(path.as_deref(), &demo_ellipse(&etas, samples)?, out)
        }
        Command::Scan {
            setup,
            transmittance,
            measure,
            out: path,
        } => {
            let state = QiupState::forward(&setup.config()?, ObjectPixel::new(transmittance)?)?;
            let scan = scan_with(|phi| state.signal_probability(phi).unwrap_or(0.0), &measure.plan()?, measure.seed())?;
            match path {
                None => emit(None, &scan.to_csv(), out),
                Some(path) => {
                    scan.write_csv(&path).map_err(on_file(&path))?;
                    let fit = estimate_visibility(&scan)?;
                    let (mm, sigma_mm) = minmax_visibility(&scan)?;
                    let text = key_values(&[
                        ("visibility", fmt_sig17(state.visibility()?)),
                        ("v_hat", fmt_sig17(fit.v_hat)),
                        ("sigma_v", fmt_sig17(fit.sigma_v)),
                        ("fitted_phase", fmt_sig17(fit.fitted_phase)),
                        ("v_minmax", fmt_sig17(mm)),
                        ("sigma_minmax", fmt_sig17(sigma_mm)),
                    ]);
                    emit(None, &text, out)
                }
            }
        }
        Command::Calibrate {
            setup,
            measure,
            out: path,
        } => {
            let cal = calibrate_no_object(&setup.config()?, &measure.plan()?, measure.seed())?;
            let text = key_values(&[
                ("alpha_gamma_hat", fmt_sig17(cal.alpha_gamma_hat())),
                ("photons_used", cal.photons_used().to_string()),
                ("seed", cal.seed().to_string()),
            ]);
            if let Some(path) = path {
                write_file(&path, &text)?;
            }
            emit(None, &text, out)
        }
        Command::Synth {
            glyph,
            width,
            height,
            softness,
            out: path,
        } => {
            save_map(&synth_letter_object(width, height, glyph, softness)?, &path).map_err(on_file(&path))?;
            Ok(())
        }
        Command::Reconstruct {
            object,
            setup,
            measure,
            no_calibrate,
            serial,
            out_dir,
        } => {
            let truth = load_map(&object).map_err(on_file(&object))?;
            let mut plan = ReconstructionPlan::new(setup.config()?, measure.plan()?, measure.seed());
            plan.calibrate = !no_calibrate;
            plan.execution = if serial { Execution::Serial } else { Execution::Parallel };
            let report = reconstruct(&truth, &plan)?;
            report.write_to_dir(&out_dir).map_err(on_file(&out_dir))?;
            emit(None, &report.summary(), out)
        }
        Command::Report {
            truth,
            estimate,
            out: path,
        } => {
            let truth = load_map(&truth).map_err(on_file(&truth))?;
            let estimate = load_map(&estimate).map_err(on_file(&estimate))?;
            let rank = match rank_correlation(&truth, &estimate)? {
                Some(r) => fmt_sig17(r),
                None => "nan".to_string(),
            };
            let text = key_values(&[
                ("width", truth.width().to_string()),
                ("height", truth.height().to_string()),
                ("rmse", fmt_sig17(rmse(&truth, &estimate)?)),
                ("max_abs_error", fmt_sig17(max_abs_error(&truth, &estimate)?)),
                ("rank_correlation", rank),
            ]);
            if let Some(path) = path {
                write_file(&path, &text)?;
            }
            emit(None, &text, out)
        }
    }
}

/// CSV of duality ellipse loci with columns `eta,gamma,p1,predictability,visibility`.
pub fn demo_ellipse(etas: &[f64], samples: usize) -> Result<String, Error> {
    if samples < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: samples as f64,
            reason: "need at least 2 points per locus",
        });
    }
    let n = samples | 1;
    let mut csv = String::from("eta,gamma,p1,predictability,visibility\n");
    for &eta in etas {
        if !(eta.is_finite() && (0.0..1.0).contains(&eta)) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "must lie in [0, 1)",
            });
        }
        let gamma = 1.0 - eta;
        for k in 0..n {
            let p1 = k as f64 / (n - 1) as f64;
            let s = TwoPathState::new(p1, gamma, 0.0, 0.0)?;
            writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_sig17(eta),
                fmt_sig17(gamma),
                fmt_sig17(p1),
                fmt_sig17(mzi::predictability(&s)),
                fmt_sig17(mzi::visibility(&s))
            )
            .expect("string write");
        }
    }
    Ok(csv)
}

fn key_values(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(path) => write_file(path, text)?,
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Core(Error::Io(e)))?,
    }
    Ok(())
}

/// Finds `--config FILE` (or `--config=FILE`) and inserts the file's
/// entries as flags directly after the subcommand name.
fn with_config_file(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut config = None;
    let mut iter = args.iter().skip(1);
    while let Some(arg) = iter.next() {
        let Some(arg) = arg.to_str() else { continue };
        if arg == "--config" {
            config = iter.next().cloned();
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(path.into());
        }
    }
    let Some(config) = config else { return Ok(args) };

    let root = Cli::command();
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| root.find_subcommand(a).map(|sub| (i, sub)))
    else {
        // let clap report the missing subcommand
        return Ok(args);
    };
    let config = PathBuf::from(config);
    let text = std::fs::read_to_string(&config).map_err(|e| on_file(&config)(Error::Io(e)))?;
    let given: Vec<&str> = args[pos + 1..]
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--"))
        .map(|a| a.split_once('=').map_or(a, |(k, _)| k))
        .collect();
    let mut flags = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| CliError::Usage(format!("{}:{}: {why}", config.display(), lineno + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| bad(&format!("unknown key `{key}` for `{}`", sub.get_name())))?;
        if given.contains(&key.as_str()) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                "true" => flags.push(OsString::from(format!("--{key}"))),
                "false" => {}
                _ => return Err(bad(&format!("`{key}` expects true or false"))),
            }
        } else {
            flags.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let mut merged = args[..=pos].to_vec();
    merged.extend(flags);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}
