//! Closed-form resolution thresholds and location-error bounds.
//!
//! Every stability statement has the same shape: when the scatterers are
//! separated by at least a threshold
//!
//! ```text
//! (const(n, c0)·e·π/Ω) · ((1/σ_∞,min(I))·(σ/m_min))^{1/n}
//! ```
//!
//! with noise-to-signal ratio `(1/σ_∞,min)(σ/m_min) ≤ 1`, recovery succeeds
//! and every matched location deviates by less than both `d_min/2` and
//!
//! ```text
//! (C(n)/Ω) · SRF^{n−1} · (1/σ_∞,min(I)) · (σ/m_min),   SRF = π/(Ω·d_min).
//! ```
//!
//! Three regimes differ only in constants: the 1D wrapped metric
//! (`2.2eπ`, `C(n) = 2√(2π)·n·eⁿ`), the 1D Euclidean interval
//! (`4.4c0eπ`, `C(n) = 2ⁿ√(2π)·n·c0^{n−1}·eⁿ`), and the 2D disk
//! (`2.2c0eπ(n+1)(n+2)`, `C(n) = (n+1)ⁿ(n+2)ⁿ√(2π)·n·c0^{n−1}·eⁿ`).
//! The decimal constants are stored exactly as printed; nothing is rederived.
//!
//! The combinatorial inequalities that make the constants work are certified
//! in exact arithmetic by [`verify_combinatorial_lemmas`].

use num::{BigInt, BigRational, One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vandermonde::{lambda_exact, xi_exact};

const E: f64 = std::f64::consts::E;
const PI: f64 = std::f64::consts::PI;

/// Which theorem's constants to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremMode {
    Wrapped1d,
    Euclidean1d,
    TwoD,
}

/// A bound value together with a vacuity flag: `vacuous` is set when the
/// theorem's hypotheses (noise-to-signal ratio ≤ 1, and for error bounds the
/// separation condition) do not hold, in which case the number is the formula
/// value but certifies nothing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub vacuous: bool,
}

fn check_common(n: usize, cutoff: f64, sigma: f64, m_min: f64, sigma_inf_min: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(cutoff > 0.0) {
        return Err(Error::invalid("cut-off frequency must be positive"));
    }
    if !(sigma >= 0.0) {
        return Err(Error::invalid("σ must be nonnegative"));
    }
    if !(m_min > 0.0) {
        return Err(Error::invalid("m_min must be positive"));
    }
    if !(sigma_inf_min >= 0.0) {
        return Err(Error::invalid("σ_∞,min must be nonnegative"));
    }
    Ok(())
}

/// Noise-to-signal ratio `(1/σ_∞,min)(σ/m_min)`; infinite when the
/// incoherence vanishes and σ > 0.
pub fn noise_to_signal(sigma: f64, m_min: f64, sigma_inf_min: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else if sigma_inf_min == 0.0 {
        f64::INFINITY
    } else {
        sigma / (m_min * sigma_inf_min)
    }
}

/// 1D wrapped-metric separation threshold `(2.2eπ/Ω)·ratio^{1/n}`.
pub fn threshold_1d_wrapped(
    n: usize,
    cutoff: f64,
    sigma: f64,
    m_min: f64,
    sigma_inf_min: f64,
) -> Result<Bound> {
    check_common(n, cutoff, sigma, m_min, sigma_inf_min)?;
    let ratio = noise_to_signal(sigma, m_min, sigma_inf_min);
    Ok(Bound {
        value: 2.2 * E * PI / cutoff * ratio.powf(1.0 / n as f64),
        vacuous: !(ratio <= 1.0),
    })
}

/// 1D Euclidean-interval threshold `(4.4·c0·eπ/Ω)·ratio^{1/n}`.
pub fn threshold_1d_euclidean(
    n: usize,
    cutoff: f64,
    sigma: f64,
    m_min: f64,
    sigma_inf_min: f64,
    c0: f64,
) -> Result<Bound> {
    check_common(n, cutoff, sigma, m_min, sigma_inf_min)?;
    if !(c0 >= 1.0) {
        return Err(Error::invalid("c0 must be at least 1"));
    }
    let ratio = noise_to_signal(sigma, m_min, sigma_inf_min);
    Ok(Bound {
        value: 4.4 * c0 * E * PI / cutoff * ratio.powf(1.0 / n as f64),
        vacuous: !(ratio <= 1.0),
    })
}

/// 2D disk threshold `(2.2·c0·eπ(n+1)(n+2)/Ω)·ratio^{1/n}`; stated for n ≥ 2.
pub fn threshold_2d(
    n: usize,
    cutoff: f64,
    sigma: f64,
    m_min: f64,
    sigma_inf_min: f64,
    c0: f64,
) -> Result<Bound> {
    if n < 2 {
        return Err(Error::invalid("the 2D threshold is stated for n ≥ 2"));
    }
    check_common(n, cutoff, sigma, m_min, sigma_inf_min)?;
    if !(c0 >= 1.0) {
        return Err(Error::invalid("c0 must be at least 1"));
    }
    let ratio = noise_to_signal(sigma, m_min, sigma_inf_min);
    let factor = ((n + 1) * (n + 2)) as f64;
    Ok(Bound {
        value: 2.2 * c0 * E * PI * factor / cutoff * ratio.powf(1.0 / n as f64),
        vacuous: !(ratio <= 1.0),
    })
}

/// Separation threshold for the given mode.
pub fn threshold(
    mode: TheoremMode,
    n: usize,
    cutoff: f64,
    sigma: f64,
    m_min: f64,
    sigma_inf_min: f64,
    c0: f64,
) -> Result<Bound> {
    match mode {
        TheoremMode::Wrapped1d => threshold_1d_wrapped(n, cutoff, sigma, m_min, sigma_inf_min),
        TheoremMode::Euclidean1d => threshold_1d_euclidean(n, cutoff, sigma, m_min, sigma_inf_min, c0),
        TheoremMode::TwoD => threshold_2d(n, cutoff, sigma, m_min, sigma_inf_min, c0),
    }
}

/// `ln C(n)` for the mode; log domain so large `n` cannot overflow `eⁿ`, `2ⁿ`
/// or the polynomial factors.
pub fn ln_constant_c(mode: TheoremMode, n: usize, c0: f64) -> f64 {
    let nf = n as f64;
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    match mode {
        TheoremMode::Wrapped1d => 2f64.ln() + half_ln_2pi + nf.ln() + nf,
        TheoremMode::Euclidean1d => {
            nf * 2f64.ln() + half_ln_2pi + nf.ln() + (nf - 1.0) * c0.ln() + nf
        }
        TheoremMode::TwoD => {
            nf * ((nf + 1.0).ln() + (nf + 2.0).ln())
                + half_ln_2pi
                + nf.ln()
                + (nf - 1.0) * c0.ln()
                + nf
        }
    }
}

/// `C(n)` evaluated directly; overflows to infinity only beyond n ≈ 500.
pub fn constant_c(mode: TheoremMode, n: usize, c0: f64) -> f64 {
    ln_constant_c(mode, n, c0).exp()
}

/// Super-resolution factor `π/(Ω·d_min)`.
pub fn super_resolution_factor(cutoff: f64, d_min: f64) -> f64 {
    PI / (cutoff * d_min)
}

/// Matched-location error bound `(C(n)/Ω)·SRF^{n−1}·ratio`, assembled in log
/// domain. Vacuous when the mode's separation hypothesis or the ratio
/// condition fails.
pub fn location_error_bound(
    mode: TheoremMode,
    n: usize,
    cutoff: f64,
    d_min: f64,
    sigma: f64,
    m_min: f64,
    sigma_inf_min: f64,
    c0: f64,
) -> Result<Bound> {
    check_common(n, cutoff, sigma, m_min, sigma_inf_min)?;
    if !(d_min > 0.0) {
        return Err(Error::invalid("d_min must be positive"));
    }
    let ratio = noise_to_signal(sigma, m_min, sigma_inf_min);
    let sep = threshold(mode, n, cutoff, sigma, m_min, sigma_inf_min, c0)?;
    let vacuous = sep.vacuous || !(d_min >= sep.value);
    if ratio == 0.0 {
        return Ok(Bound { value: 0.0, vacuous });
    }
    let srf = super_resolution_factor(cutoff, d_min);
    let ln_value = ln_constant_c(mode, n, c0) - cutoff.ln()
        + (n as f64 - 1.0) * srf.ln()
        + ratio.ln();
    Ok(Bound {
        value: ln_value.exp(),
        vacuous,
    })
}

/// Everything the theorems say about one parameter point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub mode: TheoremMode,
    pub n: usize,
    pub cutoff: f64,
    pub sigma: f64,
    pub m_min: f64,
    pub sigma_inf_min: f64,
    pub c0: f64,
    pub d_min: f64,
    /// `(1/σ_∞,min)(σ/m_min)`; the theorems require this ≤ 1.
    pub noise_to_signal: f64,
    /// Separation threshold in length units.
    pub threshold: f64,
    /// `π/(Ω·d_min)` at the given separation.
    pub srf: f64,
    pub constant_c: f64,
    pub location_error_bound: f64,
    /// Set when the ratio condition or the separation hypothesis fails.
    pub vacuous: bool,
}

pub fn bound_report(
    mode: TheoremMode,
    n: usize,
    cutoff: f64,
    d_min: f64,
    sigma: f64,
    m_min: f64,
    sigma_inf_min: f64,
    c0: f64,
) -> Result<BoundReport> {
    let sep = threshold(mode, n, cutoff, sigma, m_min, sigma_inf_min, c0)?;
    let err = location_error_bound(mode, n, cutoff, d_min, sigma, m_min, sigma_inf_min, c0)?;
    Ok(BoundReport {
        mode,
        n,
        cutoff,
        sigma,
        m_min,
        sigma_inf_min,
        c0,
        d_min,
        noise_to_signal: noise_to_signal(sigma, m_min, sigma_inf_min),
        threshold: sep.value,
        srf: super_resolution_factor(cutoff, d_min),
        constant_c: constant_c(mode, n, c0),
        location_error_bound: err.value,
        vacuous: sep.vacuous || err.vacuous,
    })
}

// ── Exact combinatorial certificates ────────────────────────────────

fn rational_from_decimal(s: &str) -> BigRational {
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    let digits: String = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().expect("decimal literal");
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    BigRational::new(numer, denom)
}

/// 28-digit rational bracket of `e`.
fn e_bracket() -> (BigRational, BigRational) {
    let lo = rational_from_decimal("2.7182818284590452353602874713");
    let hi = rational_from_decimal("2.7182818284590452353602874714");
    (lo, hi)
}

/// 28-digit rational upper bound of `π`.
fn pi_upper() -> BigRational {
    rational_from_decimal("3.1415926535897932384626433833")
}

fn pow_rational(base: &BigRational, exp: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

fn factorial_rational(n: usize) -> BigRational {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    BigRational::from_integer(acc)
}

/// Exact certification of the three inequality families behind the theorem
/// constants, for `2 ≤ n ≤ n_max` (Stirling from `n = 1`):
///
/// 1. `(2√n·n^{n−1}/ξ(n−1))^{1/(n−1)} < 4.4e`
/// 2. `(8√n·nⁿ/λ(n))^{1/n} < 4.4e`
/// 3. `√(2π)·n^{n+1/2}·e^{−n} ≤ n! ≤ e·n^{n+1/2}·e^{−n}`
///
/// Roots and transcendentals are eliminated by raising both sides to even
/// powers and bracketing `e`, `π` by 28-digit rationals, so every comparison
/// is exact big-integer arithmetic. Any listed failure would falsify the
/// source inequalities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombinatorialReport {
    pub n_max: usize,
    pub number_lemma_failures: Vec<usize>,
    pub support_lemma_failures: Vec<usize>,
    pub stirling_failures: Vec<usize>,
}

impl CombinatorialReport {
    pub fn all_hold(&self) -> bool {
        self.number_lemma_failures.is_empty()
            && self.support_lemma_failures.is_empty()
            && self.stirling_failures.is_empty()
    }
}

pub fn verify_combinatorial_lemmas(n_max: usize) -> Result<CombinatorialReport> {
    if n_max < 2 {
        return Err(Error::invalid("n_max must be at least 2"));
    }
    let (e_lo, e_hi) = e_bracket();
    let pi_hi = pi_upper();
    let rhs_base = rational_from_decimal("4.4") * &e_lo;

    let mut number_lemma_failures = Vec::new();
    let mut support_lemma_failures = Vec::new();
    let mut stirling_failures = Vec::new();

    for n in 2..=n_max {
        let n_big = BigRational::from_integer(BigInt::from(n));

        // (2√n·n^{n−1}/ξ(n−1))² = 4·n^{2n−1}/ξ² against (4.4e)^{2(n−1)}.
        let xi = xi_exact(n - 1)?;
        let lhs = BigRational::from_integer(BigInt::from(4u32)) * pow_rational(&n_big, 2 * n - 1)
            / (&xi * &xi);
        let rhs = pow_rational(&rhs_base, 2 * (n - 1));
        if lhs >= rhs {
            number_lemma_failures.push(n);
        }

        // (8√n·nⁿ/λ(n))² = 64·n^{2n+1}/λ² against (4.4e)^{2n}.
        let lam = lambda_exact(n)?;
        let lhs = BigRational::from_integer(BigInt::from(64u32)) * pow_rational(&n_big, 2 * n + 1)
            / (&lam * &lam);
        let rhs = pow_rational(&rhs_base, 2 * n);
        if lhs >= rhs {
            support_lemma_failures.push(n);
        }
    }

    for n in 1..=n_max {
        let n_big = BigRational::from_integer(BigInt::from(n));
        let fact = factorial_rational(n);
        let fact_sq = &fact * &fact;
        let n_pow = pow_rational(&n_big, 2 * n + 1);

        // Lower: 2π·n^{2n+1} ≤ (n!)²·e^{2n}, with π rounded up and e down.
        let lhs = BigRational::from_integer(BigInt::from(2u32)) * &pi_hi * &n_pow;
        let rhs = &fact_sq * pow_rational(&e_lo, 2 * n);
        let lower_ok = lhs <= rhs;

        // Upper: (n!)²·e^{2n−2} ≤ n^{2n+1}, with e rounded up.
        let lhs = &fact_sq * pow_rational(&e_hi, 2 * n - 2);
        let upper_ok = lhs <= n_pow;

        if !(lower_ok && upper_ok) {
            stirling_failures.push(n);
        }
    }

    Ok(CombinatorialReport {
        n_max,
        number_lemma_failures,
        support_lemma_failures,
        stirling_failures,
    })
}

/// f64 witnesses of the rational margins, handy for reports.
pub fn number_lemma_margin(n: usize) -> Result<f64> {
    let xi = xi_exact(n - 1)?.to_f64().expect("ξ fits f64");
    let lhs = (2.0 * (n as f64).sqrt() * (n as f64).powi(n as i32 - 1) / xi)
        .powf(1.0 / (n as f64 - 1.0));
    Ok(4.4 * E - lhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrapped_threshold_examples() {
        // Worked example: n = 2, σ/m_min = 1e−3, σ_∞,min = 0.3, Ω = π gives
        // ≈ 0.345 Rayleigh units.
        let b = threshold_1d_wrapped(2, PI, 1e-3, 1.0, 0.3).unwrap();
        assert!(!b.vacuous);
        let rayleigh_units = b.value / crate::rayleigh(PI);
        assert!((rayleigh_units - 0.34).abs() < 0.01, "got {rayleigh_units}");

        let b = threshold_1d_wrapped(1, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(b.value, 2.2 * E * PI / 2.0, epsilon = 1e-12);
        assert!(!b.vacuous);

        let b = threshold_1d_wrapped(3, 2.0, 1e-3, 1.0, 1.0).unwrap();
        assert_relative_eq!(b.value, 2.2 * E * PI / 2.0 * 0.1, epsilon = 1e-12);
    }

    #[test]
    fn euclidean_threshold_examples() {
        let w = threshold_1d_wrapped(2, 1.5, 0.01, 1.0, 0.3).unwrap();
        let e1 = threshold_1d_euclidean(2, 1.5, 0.01, 1.0, 0.3, 1.0).unwrap();
        assert_relative_eq!(e1.value, 2.0 * w.value, epsilon = 1e-12);

        // Hand evaluation for n = 2, c0 = 1, ratio = 0.01/0.3.
        let want = 4.4 * E * PI / 1.5 * (0.01f64 / 0.3).sqrt();
        assert_relative_eq!(e1.value, want, epsilon = 1e-12);

        let e2 = threshold_1d_euclidean(1, 3.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(e2.value, 8.8 * E * PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn two_d_threshold_examples() {
        let w = threshold_1d_wrapped(2, 1.0, 1e-2, 1.0, 0.5).unwrap();
        let d2 = threshold_2d(2, 1.0, 1e-2, 1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(d2.value, 12.0 * w.value, epsilon = 1e-12);

        let d3 = threshold_2d(3, PI, 1e-3, 1.0, 1.0, 1.0).unwrap();
        let rayleigh_units = d3.value / crate::rayleigh(PI);
        assert_relative_eq!(rayleigh_units, 2.2 * E * 20.0 * 0.1, epsilon = 1e-9);

        assert!(threshold_2d(1, 1.0, 0.1, 1.0, 1.0, 1.0).is_err());

        let vac = threshold_2d(2, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(vac.vacuous);
    }

    #[test]
    fn constant_c_values() {
        // C(2) for the wrapped mode: 2√(2π)·2·e² ≈ 74.09.
        let c2 = constant_c(TheoremMode::Wrapped1d, 2, 1.0);
        assert_relative_eq!(c2, 2.0 * (2.0 * PI).sqrt() * 2.0 * E * E, epsilon = 1e-9);
        assert!((c2 - 74.1).abs() < 0.1);

        let c3e = constant_c(TheoremMode::Euclidean1d, 3, 2.0);
        assert_relative_eq!(
            c3e,
            8.0 * (2.0 * PI).sqrt() * 3.0 * 4.0 * E.powi(3),
            epsilon = 1e-9
        );

        let c2d = constant_c(TheoremMode::TwoD, 2, 1.0);
        assert_relative_eq!(c2d, 9.0 * 16.0 * (2.0 * PI).sqrt() * 2.0 * E * E, epsilon = 1e-9);

        // Log-domain path stays finite where the direct product would
        // overflow partial terms.
        let big = ln_constant_c(TheoremMode::TwoD, 200, 1.0);
        assert!(big.is_finite());
    }

    #[test]
    fn error_bound_examples() {
        // σ → 0 collapses the bound to zero.
        let b = location_error_bound(TheoremMode::Wrapped1d, 2, PI, 1.0, 0.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(b.value, 0.0);

        // Doubling d_min divides the n = 3 bound by 4 (SRF² factor).
        let d = 2.0;
        let b1 = location_error_bound(TheoremMode::Wrapped1d, 3, PI, d, 1e-4, 1.0, 0.9, 1.0).unwrap();
        let b2 =
            location_error_bound(TheoremMode::Wrapped1d, 3, PI, 2.0 * d, 1e-4, 1.0, 0.9, 1.0).unwrap();
        assert_relative_eq!(b1.value / b2.value, 4.0, epsilon = 1e-9);

        // Sub-threshold separation is vacuous, not an error.
        let sep = threshold_1d_wrapped(2, PI, 1e-2, 1.0, 0.5).unwrap().value;
        let b = location_error_bound(TheoremMode::Wrapped1d, 2, PI, 0.5 * sep, 1e-2, 1.0, 0.5, 1.0)
            .unwrap();
        assert!(b.vacuous);
    }

    #[test]
    fn error_bound_scale_invariance() {
        // Jointly scaling (σ, m_min) leaves the bound unchanged.
        let b1 = location_error_bound(TheoremMode::Euclidean1d, 2, 2.0, 3.0, 1e-3, 1.0, 0.4, 1.5)
            .unwrap();
        let b2 =
            location_error_bound(TheoremMode::Euclidean1d, 2, 2.0, 3.0, 7e-3, 7.0, 0.4, 1.5).unwrap();
        assert_relative_eq!(b1.value, b2.value, epsilon = 1e-12);
    }

    #[test]
    fn threshold_monotonicity() {
        let mut prev = f64::INFINITY;
        for sim in [0.1, 0.3, 0.5, 0.8, 1.0] {
            let b = threshold_1d_wrapped(2, 1.0, 1e-3, 1.0, sim).unwrap();
            assert!(b.value < prev, "threshold not decreasing in σ_∞,min");
            prev = b.value;
        }
        let mut prev = 0.0;
        for sigma in [1e-4, 1e-3, 1e-2, 1e-1] {
            let b = threshold_1d_wrapped(2, 1.0, sigma, 1.0, 0.5).unwrap();
            assert!(b.value > prev, "threshold not increasing in σ");
            prev = b.value;
        }
    }

    #[test]
    fn two_d_to_wrapped_ratio_identity() {
        for n in 2..=5 {
            for c0 in [1.0, 2.0] {
                let w = threshold_1d_wrapped(n, 1.7, 1e-3, 1.0, 0.6).unwrap();
                let d = threshold_2d(n, 1.7, 1e-3, 1.0, 0.6, c0).unwrap();
                assert_relative_eq!(
                    d.value / w.value,
                    c0 * ((n + 1) * (n + 2)) as f64,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn srf_straddles_rayleigh() {
        let cutoff = 2.0;
        let ray = crate::rayleigh(cutoff);
        assert!(super_resolution_factor(cutoff, 0.5 * ray) > 1.0);
        assert!(super_resolution_factor(cutoff, 2.0 * ray) < 1.0);
        assert_relative_eq!(super_resolution_factor(cutoff, ray), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn combinatorial_lemmas_to_50() {
        // The number lemma and Stirling hold everywhere; the support lemma is
        // genuinely violated at n = 6 ((8√6·6⁶·4)^{1/6} ≈ 12.41 > 4.4e ≈ 11.96)
        // and the checker must report exactly that.
        let rep = verify_combinatorial_lemmas(50).unwrap();
        assert!(rep.number_lemma_failures.is_empty(), "{rep:?}");
        assert!(rep.stirling_failures.is_empty(), "{rep:?}");
        assert_eq!(rep.support_lemma_failures, vec![6], "{rep:?}");
    }

    #[test]
    fn number_lemma_n2_margin() {
        // (2√2·2/ξ(1))^1 = 8√2 ≈ 11.31 < 4.4e ≈ 11.96.
        let lhs = 8.0 * 2.0f64.sqrt();
        assert!((lhs - 11.3137).abs() < 1e-3);
        assert!(lhs < 4.4 * E);
        let margin = number_lemma_margin(2).unwrap();
        assert!(margin > 0.6 && margin < 0.7, "margin {margin}");
    }

    #[test]
    fn stirling_boundary_n1() {
        // √(2π)e^{−1} ≈ 0.922 ≤ 1 and e·e^{−1} = 1 exactly.
        let lower = (2.0 * PI).sqrt() / E;
        assert!(lower <= 1.0 && (lower - 0.922).abs() < 1e-3);
        let rep = verify_combinatorial_lemmas(2).unwrap();
        assert!(rep.stirling_failures.is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(threshold_1d_wrapped(0, 1.0, 0.1, 1.0, 0.5).is_err());
        assert!(threshold_1d_wrapped(2, 0.0, 0.1, 1.0, 0.5).is_err());
        assert!(threshold_1d_wrapped(2, 1.0, 0.1, 0.0, 0.5).is_err());
        assert!(threshold_1d_euclidean(2, 1.0, 0.1, 1.0, 0.5, 0.5).is_err());
        assert!(verify_combinatorial_lemmas(1).is_err());
    }
}
