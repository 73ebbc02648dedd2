//! Numerical laboratory for sparsity-based multi-illumination super-resolution.
//!
//! A band-limited imaging system with cut-off frequency `Ω` observes a cluster of
//! point scatterers `μ = Σ aⱼ δ_{yⱼ}` through `T` illumination patterns `I_t`,
//! producing per-frame Fourier data
//!
//! ```text
//! Y_t(ω) = Σⱼ I_t(yⱼ) aⱼ e^{i yⱼ·ω} + W_t(ω),   |ω| ≤ Ω,
//! ```
//!
//! with noise bounded by `σ` in an RMS or sup norm. This crate simulates such
//! measurements, recovers the sparsest consistent measure by exhaustive
//! `l0`-minimization at desk scale, evaluates the closed-form resolution
//! thresholds and location-error bounds that govern when recovery is stable,
//! constructs worst-case scatterer pairs that no method can distinguish under
//! unknown illuminations, and numerically certifies the Vandermonde
//! approximation inequalities behind all of it.
//!
//! The crate is organized around the quantities it computes:
//!
//! - [`measure`] / [`illumination`]: discrete measures, wrapped metric,
//!   illumination patterns and the illumination matrix.
//! - [`forward`]: frequency grids, noiseless Fourier sums, bounded noise draws,
//!   frame norms and residuals.
//! - [`incoherence`]: the functional `σ_∞,min(A) = min_{‖x‖_∞ ≥ 1} ‖Ax‖_∞`
//!   that measures illumination incoherence, plus its singular-value lower bound.
//! - [`vandermonde`]: Vandermonde vectors, η-products, factorial constants and
//!   numeric certificates for the approximation-theory lemmas.
//! - [`bounds`]: separation thresholds, super-resolution factors and
//!   `C(n)·SRF^{n-1}` error bounds in 1D (wrapped and Euclidean) and 2D.
//! - [`recovery`]: the three `l0` problem variants (known / approximated /
//!   unknown illuminations), support matching and theorem certification.
//! - [`adversarial`]: the moment-matched worst-case pair at spacing
//!   `τ = (0.043/Ω)(σ/m_min)^{1/n}`.
//! - [`projection`]: 2D-to-1D direction fans and pigeonhole certification.
//! - [`experiments`]: batch campaigns (phase transitions, certification sweeps),
//!   CSV/JSON outputs and SVG plots; drives the `srlab` CLI.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example recover_1d`
//! is a good starting point. The acceptance suite is
//! `cargo test --test acceptance -- --nocapture`.

pub mod adversarial;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod forward;
pub mod illumination;
pub mod incoherence;
pub mod linalg;
pub mod measure;
pub mod projection;
pub mod recovery;
pub mod vandermonde;

pub use error::{Error, Result};
pub use measure::{wrapped_distance, Dim, DiscreteMeasure, Metric};

/// Rayleigh resolution limit `π/Ω` of a system with cut-off frequency `cutoff`.
pub fn rayleigh(cutoff: f64) -> f64 {
    std::f64::consts::PI / cutoff
}
