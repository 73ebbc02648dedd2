//! The incoherence functional `σ_∞,min`.
//!
//! For a `T×k` complex matrix `A`,
//!
//! ```text
//! σ_∞,min(A) = min { ‖Ax‖_∞ : x ∈ ℂ^k, ‖x‖_∞ ≥ 1 }
//! ```
//!
//! measures how far the columns of `A` are from linear dependence; applied to
//! the illumination matrix it is the quantity through which pattern diversity
//! enters every resolution bound. By positive homogeneity the minimum is
//! attained on the sphere `‖x‖_∞ = 1`, and multiplying `x` by a unit scalar
//! leaves `‖Ax‖_∞` unchanged, so some coordinate can be pinned to exactly `1`.
//! That splits the computation into `k` convex problems
//!
//! ```text
//! min ‖Ax‖_∞   subject to   x_j = 1, |x_i| ≤ 1 (i ≠ j),
//! ```
//!
//! each solved globally by projected subgradient descent (diminishing steps,
//! then a Polyak-step refinement with a geometrically shrinking target gap).
//! The reported value is `‖A·argmin‖_∞` of the best feasible point found, so
//! it is always an upper bound on the true minimum and always at least the
//! singular-value bound `σ_min(A)/√T`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{column_singular_values, inf_norm, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm2x2,
    ConvexSubproblems,
    RandomOracle,
}

/// Result of a `σ_∞,min` computation.
#[derive(Debug, Clone)]
pub struct IncoherenceReport {
    /// Achieved minimum of `‖Ax‖_∞` over the unit `∞`-sphere.
    pub value: f64,
    /// A minimizer with `‖x‖_∞ = 1`.
    pub argmin: Vec<Complex64>,
    /// `σ_min(A)/√T`, always a lower bound for `value`.
    pub lower_bound_svd: f64,
    pub method: Method,
    /// False when the iteration budget ran out before the target-gap schedule
    /// finished; `value` is still the best point found.
    pub converged: bool,
}

/// Iteration cap per (subproblem, restart) run.
const ITERATION_CAP: usize = 50_000;
/// Random restarts per subproblem.
const RESTARTS: usize = 20;
/// Plain diminishing-step iterations before the Polyak refinement.
const WARMUP_ITERS: usize = 1_500;
/// Iterations per Polyak target level.
const LEVEL_ITERS: usize = 220;

fn eval(a: &CMat, x: &[Complex64]) -> f64 {
    inf_norm(&a.matvec(x))
}

/// Subgradient of `‖Ax‖_∞` at `x`: the active row `r` contributes
/// `(u_r/|u_r|)·conj(a_r)`.
fn subgradient(a: &CMat, x: &[Complex64]) -> (f64, Vec<Complex64>) {
    let u = a.matvec(x);
    let mut best = 0usize;
    for (r, z) in u.iter().enumerate() {
        if z.norm() > u[best].norm() {
            best = r;
        }
    }
    let f = u[best].norm();
    let phase = if f == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        u[best] / f
    };
    let g = a.row(best).iter().map(|arj| phase * arj.conj()).collect();
    (f, g)
}

fn project(x: &mut [Complex64], pinned: usize) {
    x[pinned] = Complex64::new(1.0, 0.0);
    for (i, xi) in x.iter_mut().enumerate() {
        if i != pinned {
            let n = xi.norm();
            if n > 1.0 {
                *xi /= n;
            }
        }
    }
}

/// One restart of the convex subproblem with coordinate `pinned` fixed to 1.
/// Returns the best point found, its value, and whether the target-gap
/// schedule completed within the iteration cap.
fn solve_subproblem(
    a: &CMat,
    pinned: usize,
    start: Vec<Complex64>,
    tol: f64,
) -> (f64, Vec<Complex64>, bool) {
    let k = a.cols;
    let row_sum_max = (0..a.rows)
        .map(|r| a.row(r).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);

    let mut x = start;
    project(&mut x, pinned);
    let mut best = x.clone();
    let mut f_best = eval(a, &best);
    let mut iters = 0usize;

    // Diminishing-step phase: normalized direction, step c/sqrt(iter).
    for it in 1..=WARMUP_ITERS {
        let (f, g) = subgradient(a, &x);
        if f < f_best {
            f_best = f;
            best.copy_from_slice(&x);
        }
        let gnorm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if gnorm < 1e-15 {
            break;
        }
        let step = row_sum_max.min(1.0) / (it as f64).sqrt() / gnorm;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        project(&mut x, pinned);
        iters += 1;
    }
    if k == 1 {
        // No free coordinates: the single feasible point is the answer.
        return (f_best, best, true);
    }

    // Polyak refinement: aim at f_best − δ, halving δ when a level fails to
    // make progress.
    let mut delta = (0.5 * f_best).max(tol);
    let mut completed = true;
    'outer: while delta > tol / 8.0 {
        x.copy_from_slice(&best);
        let level_start = f_best;
        for _ in 0..LEVEL_ITERS {
            if iters >= ITERATION_CAP {
                completed = false;
                break 'outer;
            }
            iters += 1;
            let (f, g) = subgradient(a, &x);
            if f < f_best {
                f_best = f;
                best.copy_from_slice(&x);
            }
            let gnorm_sqr: f64 = g.iter().map(|z| z.norm_sqr()).sum();
            if gnorm_sqr < 1e-30 {
                break 'outer;
            }
            let target = (level_start - delta).max(0.0);
            let gap = f - target;
            if gap <= 0.0 {
                break;
            }
            let step = gap / gnorm_sqr;
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= step * gi;
            }
            project(&mut x, pinned);
        }
        if level_start - f_best < delta / 2.0 {
            delta *= 0.5;
        }
    }
    (f_best, best, completed)
}

/// Compute `σ_∞,min(A)` to within `tol` of the true minimum (matrices with
/// `k ≤ ~6` columns; every experiment in this crate is in that range).
pub fn sigma_inf_min(a: &CMat, tol: f64) -> Result<IncoherenceReport> {
    sigma_inf_min_with(a, tol, RESTARTS)
}

/// As [`sigma_inf_min`] with an explicit restart count. Each subproblem is
/// convex, so restarts only hedge against slow subgradient progress; hot
/// loops that evaluate many similar matrices can run with fewer.
pub fn sigma_inf_min_with(a: &CMat, tol: f64, restarts: usize) -> Result<IncoherenceReport> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::invalid("σ_∞,min needs T ≥ 1 and k ≥ 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let restarts = restarts.max(1);
    let k = a.cols;
    let lower_bound_svd = svd_lower_bound(a);

    // Deterministic seeds: the operation is a pure function of its inputs.
    let runs: Vec<(usize, usize)> = (0..k)
        .flat_map(|j| (0..restarts).map(move |r| (j, r)))
        .collect();
    let candidates: Vec<(f64, Vec<Complex64>, bool, usize, usize)> = runs
        .par_iter()
        .map(|&(j, r)| {
            let start = if r == 0 {
                // Origin start: only the pinned coordinate is nonzero.
                vec![Complex64::new(0.0, 0.0); k]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(0x51AB + (j * restarts + r) as u64);
                (0..k)
                    .map(|_| {
                        let rad = rng.gen::<f64>();
                        let phase = std::f64::consts::TAU * rng.gen::<f64>();
                        Complex64::from_polar(rad, phase)
                    })
                    .collect()
            };
            let (f, x, completed) = solve_subproblem(a, j, start, tol);
            (f, x, completed, j, r)
        })
        .collect();

    let winner = candidates
        .iter()
        .min_by(|a, b| {
            (a.0, a.3, a.4)
                .partial_cmp(&(b.0, b.3, b.4))
                .unwrap()
        })
        .expect("at least one run");

    Ok(IncoherenceReport {
        value: winner.0,
        argmin: winner.1.clone(),
        lower_bound_svd,
        method: Method::ConvexSubproblems,
        converged: winner.2,
    })
}

/// Closed form for `A = [[1, s], [s, 1]]` with `s ∈ [0, 1]`: `σ_∞,min = 1−s`.
pub fn sigma_inf_min_2x2(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("s must lie in [0, 1], got {s}")));
    }
    Ok(1.0 - s)
}

/// `σ_min(A)/√T` where `σ_min` is the smallest column singular value (zero
/// when `rows < cols`). Lower-bounds `σ_∞,min(A)` because
/// `‖Ax‖_∞ ≥ ‖Ax‖₂/√T ≥ σ_min‖x‖₂/√T ≥ σ_min‖x‖_∞/√T`.
pub fn svd_lower_bound(a: &CMat) -> f64 {
    let sv = column_singular_values(a);
    sv.first().copied().unwrap_or(0.0) / (a.rows as f64).sqrt()
}

/// True iff duplicating the last row leaves `σ_∞,min` unchanged within the
/// combined solver tolerances.
pub fn duplicate_row_invariance_check(a: &CMat, tol: f64) -> Result<bool> {
    let base = sigma_inf_min(a, tol)?;
    let mut extended = a.clone();
    extended.push_row(&a.row(a.rows - 1).to_vec());
    let dup = sigma_inf_min(&extended, tol)?;
    Ok((base.value - dup.value).abs() <= 2.0 * tol + 1e-9)
}
