use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use wireshift::config::OMEGA_A;
use wireshift::emitters::{
    analytic_approximations, dicke_levels, fit_plasmon_lorentzian, fit_two_lorentzian,
    markov_diagnostic, plasmon_window, LorentzianFit, TwoLorentzian,
};
use wireshift::sweep::{run_sweep, sweep_at, write_rows, SweepRow};
use wireshift::validate::{run_validation, ValidateOptions};
use wireshift::{Error, Format, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

/// Decay rates and level shifts of two emitters near a metallic nanowire.
#[derive(Debug, Parser)]
#[command(name = "wireshift", version)]
struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format (csv or json).
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rates and shifts over the configured separations.
    Sweep,
    /// Full report at a single separation.
    Point {
        /// Axial separation in units of λ0.
        #[arg(long)]
        dz: f64,
    },
    /// Plasmon peak of Im G̃_rr(kz) and its Lorentzian fit.
    Dispersion {
        /// Frequency in units of ω_A.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Fit a synthetic two-Lorentzian spectrum A,γ,kz_pl (natural units)
        /// instead of the wire.
        #[arg(long, value_delimiter = ',', value_name = "A,GAMMA,KZ")]
        synthetic: Option<Vec<f64>>,
    },
    /// Built-in numerical self-checks.
    Validate {
        /// Run only the named suite; repeatable.
        #[arg(long)]
        suite: Vec<String>,
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
}

enum Failure {
    Config(String),
    Convergence(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Convergence(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Convergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONVERGENCE)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(tol) = cli.tol {
        cfg.quadrature.tol = tol;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Sweep => sweep(&cfg),
        Command::Point { dz } => point(&cfg, *dz),
        Command::Dispersion { omega, synthetic } => dispersion(&cfg, *omega, synthetic.as_deref()),
        Command::Validate { suite, inject_sign_flip } => validate(&cfg, suite, *inject_sign_flip),
    }
}

fn report_rows(cfg: &RunConfig, rows: &[SweepRow]) -> Result<(), Failure> {
    let mut bad = 0;
    for row in rows {
        if !row.converged() {
            bad += 1;
            eprintln!(
                "dz = {:e}: rates converged = {}, shifts converged = {}",
                row.dz, row.rates_converged, row.shifts_converged
            );
        }
    }
    let mut out = open_output(cfg.output.path.as_deref())?;
    write_rows(rows, cfg.output.format, &mut out)?;
    out.flush()?;
    if bad > 0 {
        return Err(Failure::Convergence(format!("{bad} of {} rows did not converge", rows.len())));
    }
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let table = run_sweep(cfg)?;
    for r in &table.results {
        if r.dz > 0.0 {
            let m = markov_diagnostic(r, OMEGA_A, cfg.emitters.gamma0_over_omega_a)?;
            if m.warning {
                log::warn!("dz = {}: coupling {:e} strains the Markov bandwidth {:e}", r.dz, m.coupling, m.bandwidth);
            }
        }
    }
    report_rows(cfg, &table.rows)
}

fn point(cfg: &RunConfig, dz: f64) -> Result<(), Failure> {
    if !dz.is_finite() {
        return Err(Failure::Config(format!("--dz must be finite, got {dz}")));
    }
    let table = sweep_at(cfg, &[dz])?;
    if cfg.output.format == Format::Csv {
        return report_rows(cfg, &table.rows);
    }
    let r = &table.results[0];
    let markov = if dz != 0.0 {
        Some(markov_diagnostic(r, OMEGA_A, cfg.emitters.gamma0_over_omega_a)?)
    } else {
        None
    };
    let appr = match &table.fit {
        Some(f) => Some(analytic_approximations(f, dz.abs())?),
        None => None,
    };
    let report = json!({
        "config": cfg,
        "result": r,
        "over_gamma11": r.over_gamma11(),
        "fit": table.fit,
        "approximations": appr,
        "dicke": dicke_levels(r),
        "markov": markov,
        "decay_matrix_min_eigenvalue": r.decay_matrix_min_eigenvalue(),
    });
    let mut out = open_output(cfg.output.path.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    if !table.rows[0].converged() {
        return Err(Failure::Convergence(format!("dz = {dz} did not converge")));
    }
    Ok(())
}

fn dispersion(cfg: &RunConfig, omega_units: f64, synthetic: Option<&[f64]>) -> Result<(), Failure> {
    if !(omega_units > 0.0) {
        return Err(Failure::Config(format!("--omega must be positive, got {omega_units}")));
    }
    let omega = omega_units * OMEGA_A;
    let (samples, fit): (Vec<(f64, f64)>, LorentzianFit) = match synthetic {
        Some(p) => {
            if p.len() != 3 {
                return Err(Failure::Config(format!("--synthetic takes A,GAMMA,KZ, got {} values", p.len())));
            }
            let model = TwoLorentzian { amplitude: p[0], width: p[1], center: p[2] };
            if !(model.amplitude > 0.0 && model.width > 0.0 && model.center > omega) {
                return Err(Failure::Config(format!(
                    "synthetic model needs A > 0, γ > 0 and kz_pl > ω, got {p:?}"
                )));
            }
            let top = 4.0 * model.center;
            let n = 1601;
            let samples: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    let k = omega + (top - omega) * (i as f64 + 0.5) / n as f64;
                    (k, model.eval(k))
                })
                .collect();
            let fit = fit_two_lorentzian(&samples, omega)?;
            (samples, fit)
        }
        None => {
            let geom = cfg.geometry()?;
            let rho = cfg.emitters.rho_1;
            let samples = plasmon_window(&geom, rho, omega)?;
            (samples, fit_plasmon_lorentzian(&geom, rho, omega)?)
        }
    };
    let model = fit.model();
    let mut out = open_output(cfg.output.path.as_deref())?;
    match cfg.output.format {
        Format::Csv => {
            writeln!(out, "kz,im_g,fit")?;
            for (k, v) in &samples {
                writeln!(out, "{k:.16e},{v:.16e},{:.16e}", model.eval(*k))?;
            }
            writeln!(out, "# amplitude_a={:.16e}", fit.amplitude_a)?;
            writeln!(out, "# width_gamma={:.16e}", fit.width_gamma)?;
            writeln!(out, "# center_kz_pl={:.16e}", fit.center_kz_pl)?;
            writeln!(out, "# center_over_omega={:.16e}", fit.center_kz_pl / omega)?;
            writeln!(out, "# fit_residual={:.16e}", fit.fit_residual)?;
        }
        Format::Json => {
            let spectrum: Vec<_> =
                samples.iter().map(|(k, v)| json!({"kz": k, "im_g": v, "fit": model.eval(*k)})).collect();
            let doc = json!({"fit": fit, "center_over_omega": fit.center_kz_pl / omega, "spectrum": spectrum});
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn validate(cfg: &RunConfig, suites: &[String], flip: bool) -> Result<(), Failure> {
    let opts = ValidateOptions {
        geometry: cfg.geometry()?,
        rho: cfg.emitters.rho_1,
        inject_sign_flip: flip,
        only: suites.to_vec(),
    };
    let report = run_validation(&opts)?;
    let mut out = open_output(cfg.output.path.as_deref())?;
    match cfg.output.format {
        Format::Csv => write!(out, "{report}")?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if !report.passed() {
        let failed: Vec<_> = report
            .suites
            .iter()
            .filter(|s| s.status == wireshift::validate::Status::Fail)
            .map(|s| s.name.as_str())
            .collect();
        return Err(Failure::Validation(format!("failed suites: {}", failed.join(", "))));
    }
    Ok(())
}
