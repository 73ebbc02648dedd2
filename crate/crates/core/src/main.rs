//! `srlab` — batch driver for the super-resolution laboratory.
//!
//! Thin dispatch over the library: campaigns from TOML configs, plots from
//! their CSVs, and one-shot evaluations of bounds, incoherence and the
//! adversarial construction.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use srlab::adversarial::{build_instance, AdversarialInstance, AdversarialJson, CERTIFICATION_GRID};
use srlab::bounds::{bound_report, TheoremMode};
use srlab::experiments::{self, ExperimentConfig, PatternFamily, PlotKind};
use srlab::illumination::IlluminationSet;
use srlab::incoherence::sigma_inf_min;
use srlab::linalg::CMat;
use srlab::measure::Dim;

#[derive(Parser)]
#[command(name = "srlab", version, about = "multi-illumination super-resolution laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment campaign from a TOML config.
    Run { config: PathBuf },
    /// Render a campaign CSV into a standalone SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, default_value = "heatmap")]
        kind: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Print the separation threshold and error bound for one parameter point.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        omega: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        m_min: f64,
        #[arg(long)]
        sigma_inf_min: f64,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        /// Separation for the error bound; defaults to the threshold itself.
        #[arg(long)]
        d_min: Option<f64>,
        #[arg(long, default_value = "wrapped")]
        mode: String,
        #[arg(long)]
        json: bool,
    },
    /// Compute σ_∞,min of a matrix given as JSON.
    Incoherence {
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Build and certify a worst-case pair, dumping it as JSON.
    Adversarial {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        omega: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        m_min: f64,
        #[arg(long, default_value_t = 2)]
        frames: usize,
        #[arg(long, default_value = "constant")]
        family: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Re-verify a dumped adversarial instance.
    Certify { instance: PathBuf },
}

#[derive(Deserialize)]
struct MatrixJson {
    entries_re: Vec<Vec<f64>>,
    entries_im: Option<Vec<Vec<f64>>>,
}

fn parse_mode(s: &str) -> srlab::Result<TheoremMode> {
    match s {
        "wrapped" => Ok(TheoremMode::Wrapped1d),
        "euclidean" => Ok(TheoremMode::Euclidean1d),
        "2d" | "twod" => Ok(TheoremMode::TwoD),
        other => Err(srlab::Error::InvalidArgument(format!(
            "mode must be wrapped, euclidean or 2d, got {other}"
        ))),
    }
}

fn parse_family(s: &str) -> srlab::Result<PatternFamily> {
    match s {
        "sinusoid" => Ok(PatternFamily::Sinusoid),
        "speckle" => Ok(PatternFamily::Speckle),
        "constant" => Ok(PatternFamily::Constant),
        other => Err(srlab::Error::InvalidArgument(format!(
            "family must be sinusoid, speckle or constant, got {other}"
        ))),
    }
}

fn real_main() -> srlab::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            let manifest = experiments::run(&config)?;
            println!(
                "wrote {} cells to {}",
                manifest.cells.len(),
                config.output_dir.display()
            );
            for cell in &manifest.cells {
                println!(
                    "  cell {:>3}  T={} noise={} sep={:?}  success {}/{}",
                    cell.cell,
                    cell.frames,
                    cell.noise_ratio,
                    cell.separation_rayleigh,
                    cell.successes,
                    cell.trials
                );
            }
            for e in &manifest.empirical_thresholds {
                println!(
                    "  T={} noise={}: empirical threshold {:?} Rayleigh, theorem {:.4} Rayleigh{}",
                    e.frames,
                    e.noise_ratio,
                    e.empirical_rayleigh,
                    e.theorem_rayleigh,
                    match e.consistent {
                        Some(true) => " (empirical ≤ theorem)",
                        Some(false) => " (empirical above theorem — finite-trial noise?)",
                        None => "",
                    }
                );
            }
            for note in &manifest.notes {
                println!("  {note}");
            }
            Ok(manifest.all_green)
        }
        Command::Plot { csv, kind, out } => {
            let kind: PlotKind = kind.parse()?;
            let text = std::fs::read_to_string(&csv)?;
            let svg = experiments::plot(&text, kind)?;
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&out, svg)?;
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Bounds {
            n,
            omega,
            sigma,
            m_min,
            sigma_inf_min,
            c0,
            d_min,
            mode,
            json,
        } => {
            let mode = parse_mode(&mode)?;
            let threshold =
                srlab::bounds::threshold(mode, n, omega, sigma, m_min, sigma_inf_min, c0)?;
            let d = d_min.unwrap_or(threshold.value);
            let report = bound_report(mode, n, omega, d, sigma, m_min, sigma_inf_min, c0)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                let ray = srlab::rayleigh(omega);
                println!("mode                 {:?}", report.mode);
                println!("n                    {}", report.n);
                println!("cut-off Ω            {}", report.cutoff);
                println!("noise-to-signal      {:.6e}", report.noise_to_signal);
                println!(
                    "separation threshold {:.6} ({:.4} Rayleigh)",
                    report.threshold,
                    report.threshold / ray
                );
                println!("d_min                {:.6} ({:.4} Rayleigh)", report.d_min, report.d_min / ray);
                println!("SRF                  {:.4}", report.srf);
                println!("C(n)                 {:.6e}", report.constant_c);
                println!(
                    "location error bound {:.6e} ({:.4e} Rayleigh)",
                    report.location_error_bound,
                    report.location_error_bound / ray
                );
                println!("vacuous              {}", report.vacuous);
            }
            Ok(true)
        }
        Command::Incoherence { matrix, tol } => {
            let text = std::fs::read_to_string(&matrix)?;
            let parsed: MatrixJson = serde_json::from_str(&text)?;
            let rows = parsed.entries_re.len();
            let cols = parsed.entries_re.first().map_or(0, |r| r.len());
            let mut m = CMat::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    let im = parsed
                        .entries_im
                        .as_ref()
                        .map_or(0.0, |mm| mm[i][j]);
                    m[(i, j)] = num_complex::Complex64::new(parsed.entries_re[i][j], im);
                }
            }
            let report = sigma_inf_min(&m, tol)?;
            println!(
                "{}",
                serde_json::json!({
                    "value": report.value,
                    "lower_bound_svd": report.lower_bound_svd,
                    "argmin_re": report.argmin.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "argmin_im": report.argmin.iter().map(|z| z.im).collect::<Vec<_>>(),
                    "method": format!("{:?}", report.method),
                    "converged": report.converged,
                })
            );
            Ok(true)
        }
        Command::Adversarial {
            n,
            omega,
            sigma,
            m_min,
            frames,
            family,
            seed,
            out,
        } => {
            let family = parse_family(&family)?;
            let span = n as f64 * 0.05 / omega;
            let illum = match family {
                PatternFamily::Constant => IlluminationSet::uniform(Dim::One, frames)?,
                _ => experiments::illumination_1d(
                    family,
                    frames,
                    omega,
                    (-2.0 * span, 2.0 * span),
                    seed,
                )?,
            };
            let inst = build_instance(n, omega, sigma, m_min, &illum, None)?;
            println!(
                "τ = {:.6e}  Ωτ = {:.4}  max residual = {:.4e} < σ = {:.4e}  supports disjoint: {}",
                inst.tau,
                omega * inst.tau,
                inst.residuals.iter().copied().fold(0.0, f64::max),
                sigma,
                inst.supports_disjoint()
            );
            let text = serde_json::to_string_pretty(&inst.to_json())?;
            match out {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    println!("wrote {}", path.display());
                }
                None => println!("{text}"),
            }
            Ok(true)
        }
        Command::Certify { instance } => {
            let text = std::fs::read_to_string(&instance)?;
            let parsed: AdversarialJson = serde_json::from_str(&text)?;
            let inst = AdversarialInstance::from_json(&parsed)?;
            let residuals = inst.certify(CERTIFICATION_GRID)?;
            println!(
                "re-verified: max residual {:.4e} < σ = {:.4e}, supports disjoint: {}, Ωτ = {:.4}",
                residuals.iter().copied().fold(0.0, f64::max),
                inst.sigma,
                inst.supports_disjoint(),
                inst.cutoff * inst.tau
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("campaign finished with red cells");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
