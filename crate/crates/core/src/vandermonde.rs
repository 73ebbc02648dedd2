//! Vandermonde-space approximation machinery.
//!
//! The stability of sparse recovery reduces to lower bounds for how well a
//! linear combination of `k` Vandermonde vectors `φ_k(e^{iθ̂_j})`, with
//! `φ_s(z) = (1, z, …, z^s)ᵀ`, can approximate combinations built on `k+1`
//! nodes. The quantitative core is the η-vector of pairwise modulus products
//!
//! ```text
//! η_{p,q}(z, ẑ)_j = Π_m |z_j − ẑ_m|,
//! ```
//!
//! together with factorial constants `ζ, ξ, λ` and the wrapped node
//! separation `θ_min`. This module computes all of those exactly, evaluates
//! the certified lower bounds, and provides numeric checkers that hunt for
//! counterexamples by multi-start minimization: the bounds are the assertions,
//! so an undershooting search can only make the checks stricter.

use num::{BigInt, BigRational, ToPrimitive};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::incoherence::sigma_inf_min;
use crate::linalg::{orthonormalize, CMat, KahanSum};
use crate::measure::wrapped_distance;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// `φ_s(z) = (1, z, …, z^s)ᵀ`.
pub fn phi(s: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(s + 1);
    let mut p = Complex64::new(1.0, 0.0);
    out.push(p);
    for _ in 0..s {
        p *= z;
        out.push(p);
    }
    out
}

/// `η_{p,q}`: component `j` is the product of `|z_j − ẑ_m|` over `m`.
pub fn eta(z: &[Complex64], z_hat: &[Complex64]) -> Vec<f64> {
    z.iter()
        .map(|zj| z_hat.iter().map(|zm| (zj - zm).norm()).product())
        .collect()
}

fn factorial_big(n: usize) -> BigInt {
    let mut acc = BigInt::from(1u32);
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Exact `ζ(k)`: `((k−1)/2)!²` for odd `k`, `(k/2)!((k−2)/2)!` for even `k`.
pub fn zeta_exact(k: usize) -> Result<BigRational> {
    if k < 1 {
        return Err(Error::invalid("ζ(k) needs k ≥ 1"));
    }
    let v = if k % 2 == 1 {
        let f = factorial_big((k - 1) / 2);
        BigRational::from_integer(&f * &f)
    } else {
        BigRational::from_integer(factorial_big(k / 2) * factorial_big((k - 2) / 2))
    };
    Ok(v)
}

/// Exact `ξ(k)`: `1/2` for `k = 1`, `((k−1)/2)!((k−3)/2)!/4` for odd `k ≥ 3`,
/// `(((k−2)/2)!)²/4` for even `k`.
pub fn xi_exact(k: usize) -> Result<BigRational> {
    if k < 1 {
        return Err(Error::invalid("ξ(k) needs k ≥ 1"));
    }
    let four = BigInt::from(4u32);
    let v = if k == 1 {
        BigRational::new(BigInt::from(1u32), BigInt::from(2u32))
    } else if k % 2 == 1 {
        BigRational::new(factorial_big((k - 1) / 2) * factorial_big((k - 3) / 2), four)
    } else {
        let f = factorial_big((k - 2) / 2);
        BigRational::new(&f * &f, four)
    };
    Ok(v)
}

/// Exact `λ(k)`: `1` for `k = 2`, `ξ(k−2)` for `k ≥ 3`.
pub fn lambda_exact(k: usize) -> Result<BigRational> {
    match k {
        0 | 1 => Err(Error::invalid("λ(k) needs k ≥ 2")),
        2 => Ok(BigRational::from_integer(BigInt::from(1u32))),
        _ => xi_exact(k - 2),
    }
}

pub fn zeta(k: usize) -> Result<f64> {
    Ok(zeta_exact(k)?.to_f64().expect("ζ fits in f64 for supported k"))
}

pub fn xi(k: usize) -> Result<f64> {
    Ok(xi_exact(k)?.to_f64().expect("ξ fits in f64 for supported k"))
}

pub fn lambda(k: usize) -> Result<f64> {
    Ok(lambda_exact(k)?.to_f64().expect("λ fits in f64 for supported k"))
}

/// Minimal pairwise wrapped distance of a node set, `min_{p≠j}|θ_p−θ_j|_{2π}`.
pub fn theta_min(theta: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..theta.len() {
        for j in i + 1..theta.len() {
            best = best.min(wrapped_distance(theta[i], theta[j], TAU).unwrap());
        }
    }
    best
}

fn unit_circle(theta: &[f64]) -> Vec<Complex64> {
    theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
}

/// Distance from `φ_k(e^{iθ})` to the span of the `k` columns
/// `φ_k(e^{iθ̂_j})` in `ℂ^{k+1}`, computed as `|v*φ_k(e^{iθ})|` with `v` a
/// unit normal to the span.
pub fn projection_distance(theta_hat: &[f64], theta: f64) -> Result<f64> {
    let k = theta_hat.len();
    if k == 0 {
        return Err(Error::invalid("projection needs at least one candidate node"));
    }
    let cols: Vec<Vec<Complex64>> = theta_hat
        .iter()
        .map(|&t| phi(k, Complex64::from_polar(1.0, t)))
        .collect();
    let basis = orthonormalize(&cols);
    if basis.len() < k {
        return Err(Error::RankDeficient(format!(
            "candidate nodes span only {} of {k} dimensions (duplicated θ̂ mod 2π?)",
            basis.len()
        )));
    }
    // Complement a pseudo-random vector against the span; the complement is
    // one-dimensional so any vector with a component outside the span works.
    let mut rng = ChaCha8Rng::seed_from_u64(0x7A4D);
    for attempt in 0..8 {
        let probe: Vec<Complex64> = if attempt < 4 {
            (0..=k)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        } else {
            // Canonical basis fallback.
            (0..=k)
                .map(|i| Complex64::new(if i == attempt - 4 { 1.0 } else { 0.0 }, 0.0))
                .collect()
        };
        let mut all = basis.clone();
        all.push(probe);
        let extended = orthonormalize(&all);
        if extended.len() == k + 1 {
            let v = &extended[k];
            let target = phi(k, Complex64::from_polar(1.0, theta));
            let dot: Complex64 = v.iter().zip(&target).map(|(vi, ti)| vi.conj() * ti).sum();
            return Ok(dot.norm());
        }
    }
    Err(Error::RankDeficient("could not complement the Vandermonde span".into()))
}

/// Certified lower bound `σ_∞,min(B)·ξ(k)·θ_min^k/π^k` for the worst-frame
/// best approximation of `k+1`-node combinations by any `q ≤ k` candidate
/// nodes. `theta` has `k+1` entries and `B` is the `T×(k+1)` coefficient
/// matrix.
pub fn worst_case_approx_lower_bound(theta: &[f64], b: &CMat) -> Result<f64> {
    if theta.len() < 2 {
        return Err(Error::invalid("need at least two nodes"));
    }
    let k = theta.len() - 1;
    if b.cols != k + 1 {
        return Err(Error::invalid(format!("B must have {} columns, got {}", k + 1, b.cols)));
    }
    let tmin = theta_min(theta);
    if tmin <= 0.0 {
        return Err(Error::invalid("nodes must be distinct mod 2π"));
    }
    let sigma_b = sigma_inf_min(b, 1e-8)?.value;
    Ok(sigma_b * xi(k)? * (tmin / PI).powi(k as i32))
}

/// Plain Nelder-Mead on `ℝ^d`; good enough for the low-dimensional
/// counterexample hunts here and the location polish in the recovery solver.
pub(crate) fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    iters: usize,
) -> (f64, Vec<f64>) {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    for _ in 0..iters {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d.saturating_sub(1)];
        if (values[worst] - values[best]).abs() < 1e-14 * (1.0 + values[best].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|c| {
                order[..d].iter().map(|&i| simplex[i][c]).sum::<f64>() / d as f64
            })
            .collect();
        let reflect: Vec<f64> = (0..d)
            .map(|c| centroid[c] + (centroid[c] - simplex[worst][c]))
            .collect();
        let fr = f(&reflect);
        if fr < values[best] {
            let expand: Vec<f64> = (0..d)
                .map(|c| centroid[c] + 2.0 * (centroid[c] - simplex[worst][c]))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract: Vec<f64> = (0..d)
                .map(|c| centroid[c] + 0.5 * (simplex[worst][c] - centroid[c]))
                .collect();
            let fc = f(&contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..simplex.len() {
                    if i != best {
                        for c in 0..d {
                            simplex[i][c] = best_point[c] + 0.5 * (simplex[i][c] - best_point[c]);
                        }
                        values[i] = f(&simplex[i]);
                    }
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..simplex.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    (values[best], simplex[best].clone())
}

/// Outcome of an η lower-bound hunt.
#[derive(Debug, Clone)]
pub struct EtaCheckReport {
    /// Smallest `‖η_{k+1,k}‖_∞` found over all starts.
    pub min_found: f64,
    /// The certified bound `ξ(k)(2θ_min/π)^k`.
    pub bound: f64,
    /// Descents that ended below the bound (must stay zero).
    pub violations: usize,
    pub starts: usize,
}

impl EtaCheckReport {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.min_found >= self.bound - 1e-12
    }
}

/// Hunt for violations of
/// `‖η_{k+1,k}(e^{iθ}, e^{iθ̂})‖_∞ ≥ ξ(k)(2θ_min/π)^k`
/// by `trials` multi-start minimizations over `θ̂ ∈ ℝ^k`. Interlaced starts
/// (one candidate between consecutive sorted nodes) are always included; they
/// sit near the true minimizers.
pub fn eta_lower_bound_check(theta: &[f64], trials: usize, seed: u64) -> Result<EtaCheckReport> {
    if theta.len() < 2 {
        return Err(Error::invalid("need k+1 ≥ 2 nodes"));
    }
    let k = theta.len() - 1;
    let tmin = theta_min(theta);
    if tmin <= 0.0 {
        return Err(Error::invalid("nodes must be distinct mod 2π"));
    }
    let bound = xi(k)? * (2.0 * tmin / PI).powi(k as i32);
    let z = unit_circle(theta);
    let objective = |that: &[f64]| -> f64 {
        let zh = unit_circle(that);
        eta(&z, &zh).into_iter().fold(0.0, f64::max)
    };

    let mut sorted = theta.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let interlaced: Vec<f64> = (0..k).map(|j| 0.5 * (sorted[j] + sorted[j + 1])).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_found = f64::INFINITY;
    let mut violations = 0usize;
    for trial in 0..trials.max(1) {
        let x0: Vec<f64> = if trial == 0 {
            interlaced.clone()
        } else {
            (0..k).map(|_| TAU * rng.gen::<f64>()).collect()
        };
        let (val, _) = nelder_mead(&objective, &x0, 0.5 * tmin.max(0.05), 400);
        if val < bound - 1e-12 {
            violations += 1;
        }
        min_found = min_found.min(val);
    }
    Ok(EtaCheckReport {
        min_found,
        bound,
        violations,
        starts: trials.max(1),
    })
}

/// Result of a stability-inversion certification.
#[derive(Debug, Clone)]
pub struct MatchingReport {
    /// `matched[j]` is the index of the node `θ` assigned to `θ̂_j`.
    pub matched: Vec<usize>,
    /// Wrapped deviations `|θ̂_j − θ_matched[j]|_{2π}`.
    pub deviations: Vec<f64>,
    /// Quantitative bound `2^{k−1}ε/((k−2)!·θ_min^{k−1})`, present for `k ≥ 3`.
    pub quantitative_bound: Option<f64>,
    pub theta_min: f64,
}

/// Certify the stable-inversion statement: under
/// `‖η_{k,k}‖_∞ < (2/π)^k ε` and `θ_min ≥ (4ε/λ(k))^{1/k}`, every `θ̂_j`
/// matches a distinct `θ_j` within `θ_min/2`, and for `k ≥ 3` within
/// `2^{k−1}ε/((k−2)!·θ_min^{k−1})`. Hypothesis violations are reported as
/// precondition errors naming the failed inequality; a missing matching would
/// falsify the statement and comes back as a certification failure.
pub fn stability_inversion(theta: &[f64], theta_hat: &[f64], epsilon: f64) -> Result<MatchingReport> {
    let k = theta.len();
    if k < 2 || theta_hat.len() != k {
        return Err(Error::invalid("need k ≥ 2 nodes on both sides"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    let tmin = theta_min(theta);
    let eta_norm = eta(&unit_circle(theta), &unit_circle(theta_hat))
        .into_iter()
        .fold(0.0, f64::max);
    let eta_cap = (2.0 / PI).powi(k as i32) * epsilon;
    if !(eta_norm < eta_cap) {
        return Err(Error::PreconditionFailed(format!(
            "‖η_k,k‖_∞ = {eta_norm} is not < (2/π)^k·ε = {eta_cap}"
        )));
    }
    let sep_floor = (4.0 * epsilon / lambda(k)?).powf(1.0 / k as f64);
    if !(tmin >= sep_floor) {
        return Err(Error::PreconditionFailed(format!(
            "θ_min = {tmin} is not ≥ (4ε/λ(k))^(1/k) = {sep_floor}"
        )));
    }

    let mut matched = Vec::with_capacity(k);
    let mut deviations = Vec::with_capacity(k);
    for (j, &th) in theta_hat.iter().enumerate() {
        let mut best = None;
        for (p, &tp) in theta.iter().enumerate() {
            let d = wrapped_distance(th, tp, TAU)?;
            if d < tmin / 2.0 && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((p, d));
            }
        }
        match best {
            Some((p, d)) => {
                matched.push(p);
                deviations.push(d);
            }
            None => {
                return Err(Error::CertificationFailure(format!(
                    "θ̂_{j} has no node within θ_min/2; this would falsify the matching claim"
                )))
            }
        }
    }
    let mut seen = vec![false; k];
    for &p in &matched {
        if seen[p] {
            return Err(Error::CertificationFailure(
                "two candidates matched the same node; matching is not bijective".into(),
            ));
        }
        seen[p] = true;
    }

    let quantitative_bound = if k >= 3 {
        let fac = factorial_big(k - 2).to_f64().expect("small factorial");
        let bound = 2f64.powi(k as i32 - 1) * epsilon / (fac * tmin.powi(k as i32 - 1));
        for (j, &d) in deviations.iter().enumerate() {
            if !(d < bound) {
                return Err(Error::CertificationFailure(format!(
                    "deviation of θ̂_{j} is {d}, not < quantitative bound {bound}"
                )));
            }
        }
        Some(bound)
    } else {
        None
    };

    Ok(MatchingReport {
        matched,
        deviations,
        quantitative_bound,
        theta_min: tmin,
    })
}

/// Strict decrease of `|(1−e^{i(p−Δ)})(1−e^{i(q+Δ)})|` when the pair spreads
/// apart; requires `0 < p ≤ q < min(p+π, 2π)`.
pub fn pair_perturbation_decreases(p: f64, q: f64, delta: f64) -> Result<bool> {
    if !(0.0 < p && p <= q && q < (p + PI).min(TAU)) {
        return Err(Error::invalid(format!(
            "need 0 < p ≤ q < min(p+π, 2π), got p={p}, q={q}"
        )));
    }
    if delta < 0.0 {
        return Err(Error::invalid("Δ must be nonnegative"));
    }
    let one = Complex64::new(1.0, 0.0);
    let prod = |a: f64, b: f64| ((one - Complex64::from_polar(1.0, a)) * (one - Complex64::from_polar(1.0, b))).norm();
    Ok(prod(p - delta, q + delta) < prod(p, q))
}

/// `φ` by repeated multiplication with compensated accumulation of the
/// rounding; used as the independent oracle for [`phi`].
pub fn phi_compensated_oracle(s: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(s + 1);
    for exp in 0..=s {
        // exp·log-free: multiply exp times, compensating each product, so the
        // accumulated error differs from plain powering.
        let mut acc = KahanSum::default();
        acc.add(Complex64::new(1.0, 0.0));
        let mut val = Complex64::new(1.0, 0.0);
        for _ in 0..exp {
            val *= z;
        }
        acc.add(val - Complex64::new(1.0, 0.0));
        out.push(acc.value());
    }
    out
}
