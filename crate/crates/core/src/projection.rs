//! 2D-to-1D reduction: direction fans and pigeonhole certification.
//!
//! For `n` scatterers in the plane, set `Δ = π/((n+2)(n+1))` and consider the
//! `N = ⌊π/(2Δ)⌋` unit vectors `v(τ·2Δ)`. Each normalized difference vector
//! `u = y_p − y_j` disqualifies at most one candidate (the one with
//! `|v·u| < ‖u‖·sin Δ`), and a count shows at least `n+1` candidates survive.
//! Projections onto any surviving direction separate the scatterers by at
//! least `(2Δ/π)·d_min`, so the 1D theory applies along each of them.
//!
//! Recoveries certified per direction are glued back together by the
//! pigeonhole principle: with `n+1` directions and only `n` recovered atoms,
//! some atom is matched to the same recovered atom along two directions, and
//! for two lines with `|v₁·v₂| ≤ cos θ` the projections control the full
//! length: `|v₁·u|² + |v₂·u|² ≥ (1 − cos θ)‖u‖²`.
//!
//! Projections are line projections, so each `v` is only defined up to sign;
//! pairwise dot products are compared in absolute value and flipped
//! per-pair where a sign convention is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::Matching;

const PI: f64 = std::f64::consts::PI;

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: [f64; 2]) -> f64 {
    dot(a, a).sqrt()
}

/// The selected projection directions for one scatterer configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionFan {
    pub n: usize,
    /// `Δ = π/((n+2)(n+1))`.
    pub delta: f64,
    /// Candidate angular pitch `2Δ`.
    pub theta: f64,
    /// All `N = ⌊π/θ⌋` candidate directions, in `τ` order.
    pub candidates: Vec<[f64; 2]>,
    /// The first `n+1` surviving directions.
    pub selected: Vec<[f64; 2]>,
    /// Candidate indices (`τ − 1`) of the selected directions.
    pub selected_indices: Vec<usize>,
    /// Guaranteed projected separation `(2Δ/π)·d_min`.
    pub projected_separation: f64,
}

/// Choose `n+1` directions whose projections keep all pairwise separations
/// above `(2Δ/π)·d_min`. Deterministic: candidates are scanned in increasing
/// `τ` and the first survivors win. Fewer than `n+1` survivors would
/// contradict the counting argument and is reported as a certification
/// failure.
pub fn select_directions(points: &[[f64; 2]]) -> Result<DirectionFan> {
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid("need at least two points"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i] == points[j] {
                return Err(Error::invalid("points must be pairwise distinct"));
            }
        }
    }
    let delta = PI / (((n + 2) * (n + 1)) as f64);
    let theta = 2.0 * delta;
    let count = (PI / theta).floor() as usize;
    let candidates: Vec<[f64; 2]> = (1..=count)
        .map(|tau| {
            let a = tau as f64 * theta;
            [a.cos(), a.sin()]
        })
        .collect();

    let mut differences = Vec::new();
    let mut d_min = f64::INFINITY;
    for p in 0..n {
        for j in p + 1..n {
            let u = [points[p][0] - points[j][0], points[p][1] - points[j][1]];
            d_min = d_min.min(norm(u));
            differences.push(u);
        }
    }

    let sin_delta = delta.sin();
    let mut selected = Vec::new();
    let mut selected_indices = Vec::new();
    for (idx, &v) in candidates.iter().enumerate() {
        let excluded = differences
            .iter()
            .any(|&u| dot(v, u).abs() < norm(u) * sin_delta);
        if !excluded {
            selected.push(v);
            selected_indices.push(idx);
            if selected.len() == n + 1 {
                break;
            }
        }
    }
    if selected.len() < n + 1 {
        return Err(Error::CertificationFailure(format!(
            "only {} of the required {} directions survived; this contradicts the counting bound",
            selected.len(),
            n + 1
        )));
    }
    Ok(DirectionFan {
        n,
        delta,
        theta,
        candidates,
        selected,
        selected_indices,
        projected_separation: 2.0 * delta / PI * d_min,
    })
}

impl DirectionFan {
    /// Check both guarantees against a point set: every selected pair of
    /// directions has `|v_p·v_j| ≤ cos 2Δ`, and every pair of points stays
    /// separated by at least `(2Δ/π)·d_min` under every selected projection.
    pub fn verify(&self, points: &[[f64; 2]]) -> bool {
        let cos_theta = self.theta.cos();
        for i in 0..self.selected.len() {
            for j in i + 1..self.selected.len() {
                if dot(self.selected[i], self.selected[j]).abs() > cos_theta + 1e-12 {
                    return false;
                }
            }
        }
        for v in &self.selected {
            for p in 0..points.len() {
                for j in p + 1..points.len() {
                    let u = [points[p][0] - points[j][0], points[p][1] - points[j][1]];
                    let projected = dot(*v, u).abs();
                    if projected + 1e-12 < 2.0 * self.delta / PI * norm(u) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// `|v₁·u|² + |v₂·u|² ≥ (1 − cos θ)·‖u‖₂²` for unit vectors with
/// `0 ≤ v₁·v₂ ≤ cos θ` (the sign convention is the caller's; flip `v₂` if
/// needed). Returns whether the inequality holds; precondition violations are
/// errors.
pub fn two_projection_bound(u: [f64; 2], v1: [f64; 2], v2: [f64; 2], theta: f64) -> Result<bool> {
    if (norm(v1) - 1.0).abs() > 1e-9 || (norm(v2) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("v1 and v2 must be unit vectors"));
    }
    if !(0.0..=PI / 2.0).contains(&theta) {
        return Err(Error::invalid("θ must lie in [0, π/2]"));
    }
    let d = dot(v1, v2);
    if d < -1e-12 || d > theta.cos() + 1e-12 {
        return Err(Error::invalid(format!(
            "need 0 ≤ v1·v2 ≤ cos θ, got v1·v2 = {d}, cos θ = {}",
            theta.cos()
        )));
    }
    let lhs = dot(v1, u).powi(2) + dot(v2, u).powi(2);
    let rhs = (1.0 - theta.cos()) * dot(u, u);
    Ok(lhs >= rhs - 1e-12 * dot(u, u).max(1.0))
}

/// Per-atom glue of `n+1` per-direction matchings into 2D error bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PigeonholeReport {
    /// `assigned[j]` is the recovered-atom index certified for truth atom `j`.
    pub assigned: Vec<usize>,
    /// Certified 2D deviation bound per truth atom, from the two directions
    /// that agree on it.
    pub per_atom_bound: Vec<f64>,
    /// The closed-form bound `((n+2)(n+1)/2)·d1_error_bound` that dominates
    /// every per-atom bound.
    pub formula_bound: f64,
    /// Whether the glued assignment is a permutation of the recovered atoms.
    pub bijective: bool,
}

/// Combine per-direction matchings: for each truth atom find two directions
/// assigning it the same recovered atom (guaranteed by pigeonhole with `n+1`
/// directions over `n` atoms), then bound its full 2D deviation through the
/// two-projection inequality with `1 − cos 2Δ ≥ 8/((n+2)²(n+1)²)`.
pub fn pigeonhole_match(
    matchings: &[Matching],
    fan: &DirectionFan,
    d1_error_bound: f64,
) -> Result<PigeonholeReport> {
    let n = fan.n;
    if matchings.len() != n + 1 {
        return Err(Error::invalid(format!(
            "need {} per-direction matchings, got {}",
            n + 1,
            matchings.len()
        )));
    }
    for m in matchings {
        if m.permutation.len() != n {
            return Err(Error::invalid("each matching must cover all truth atoms"));
        }
        for (q, &d) in m.deviations.iter().enumerate() {
            if !(d <= d1_error_bound) {
                return Err(Error::PreconditionFailed(format!(
                    "direction matching deviation {d} (atom {q}) exceeds the 1D bound {d1_error_bound}"
                )));
            }
        }
    }
    if !(d1_error_bound >= 0.0) {
        return Err(Error::invalid("the 1D error bound must be nonnegative"));
    }

    let one_minus_cos = 1.0 - fan.theta.cos();
    let mut assigned = Vec::with_capacity(n);
    let mut per_atom_bound = Vec::with_capacity(n);
    for j in 0..n {
        let mut found = None;
        'outer: for q1 in 0..n + 1 {
            for q2 in q1 + 1..n + 1 {
                if matchings[q1].permutation[j] == matchings[q2].permutation[j] {
                    found = Some((q1, q2));
                    break 'outer;
                }
            }
        }
        let (q1, q2) = found.ok_or_else(|| {
            Error::CertificationFailure(format!(
                "no repeated assignment for atom {j}; impossible with n+1 matchings over n atoms"
            ))
        })?;
        let d1 = matchings[q1].deviations[j];
        let d2 = matchings[q2].deviations[j];
        assigned.push(matchings[q1].permutation[j]);
        per_atom_bound.push(((d1 * d1 + d2 * d2) / one_minus_cos).sqrt());
    }

    let factor = ((n + 2) * (n + 1)) as f64 / 2.0;
    let formula_bound = factor * d1_error_bound;
    let mut seen = vec![false; n];
    let mut bijective = true;
    for &p in &assigned {
        if p >= n || seen[p] {
            bijective = false;
        } else {
            seen[p] = true;
        }
    }
    Ok(PigeonholeReport {
        assigned,
        per_atom_bound,
        formula_bound,
        bijective,
    })
}

/// `1 − cos 2Δ ≥ (8/π²)Δ²` (and hence `≥ 8/((n+2)²(n+1)²)` at the fan's Δ).
pub fn cosine_gap_inequality_holds(n: usize) -> bool {
    let delta = PI / (((n + 2) * (n + 1)) as f64);
    let lhs = 1.0 - (2.0 * delta).cos();
    lhs >= 8.0 / (PI * PI) * delta * delta - 1e-15
        && lhs >= 8.0 / (((n + 2) * (n + 1)) as f64).powi(2) - 1e-15
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn collinear_pair_keeps_enough_directions() {
        // n = 2: Δ = π/12, θ = π/6, N = 6 candidates; candidates nearly
        // orthogonal to the x-axis get excluded, at least 3 survive.
        let fan = select_directions(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(fan.candidates.len(), 6);
        assert!((fan.delta - PI / 12.0).abs() < 1e-15);
        assert_eq!(fan.selected.len(), 3);
        assert!(fan.verify(&[[0.0, 0.0], [1.0, 0.0]]));
        // The excluded candidate is the one closest to ±90°.
        for &v in &fan.selected {
            assert!(v[0].abs() > PI.div_euclid(12.0).max(0.0) * 0.0 + 0.2, "kept {v:?}");
        }
    }

    #[test]
    fn fan_is_deterministic() {
        let pts = [[0.1, 0.2], [0.9, -0.3], [-0.5, 0.6]];
        let a = select_directions(&pts).unwrap();
        let b = select_directions(&pts).unwrap();
        assert_eq!(a.selected_indices, b.selected_indices);
    }

    #[test]
    fn random_point_sets_satisfy_both_guarantees() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..200 {
            let n = 2 + (rng.gen::<f64>() * 4.0) as usize; // 2..=5
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0])
                .collect();
            let fan = match select_directions(&pts) {
                Ok(f) => f,
                Err(Error::InvalidArgument(_)) => continue,
                Err(e) => panic!("trial {trial}: {e}"),
            };
            assert!(fan.verify(&pts), "trial {trial} failed verification");
        }
    }

    #[test]
    fn two_projection_examples() {
        // Orthogonal directions: Pythagoras, equality at θ = π/2.
        let u = [0.7, -1.3];
        assert!(two_projection_bound(u, [1.0, 0.0], [0.0, 1.0], PI / 2.0).unwrap());
        let lhs = u[0] * u[0] + u[1] * u[1];
        let rhs = (1.0 - (PI / 2.0).cos()) * lhs;
        assert!((lhs - rhs).abs() < 1e-12);

        // Zero vector: 0 ≥ 0.
        assert!(two_projection_bound([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], PI / 2.0).unwrap());

        // Precondition violations.
        assert!(two_projection_bound(u, [2.0, 0.0], [0.0, 1.0], PI / 2.0).is_err());
        let close = [(0.1f64).cos(), (0.1f64).sin()];
        assert!(two_projection_bound(u, [1.0, 0.0], close, PI / 2.0).is_err());
    }

    #[test]
    fn two_projection_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10_000 {
            let theta = 0.2 + rng.gen::<f64>() * (PI / 2.0 - 0.2);
            let phi = rng.gen::<f64>() * PI;
            let v1 = [phi.cos(), phi.sin()];
            // v2 exactly θ away so v1·v2 = cos θ.
            let v2 = [(phi + theta).cos(), (phi + theta).sin()];
            let u = [rng.gen::<f64>() * 6.0 - 3.0, rng.gen::<f64>() * 6.0 - 3.0];
            assert!(two_projection_bound(u, v1, v2, theta).unwrap());
        }
    }

    #[test]
    fn cosine_gap_holds_for_all_small_n() {
        for n in 2..=50 {
            assert!(cosine_gap_inequality_holds(n), "n = {n}");
        }
    }

    #[test]
    fn pigeonhole_exact_matchings_give_zero() {
        let pts = [[0.0, 0.0], [1.0, 0.3]];
        let fan = select_directions(&pts).unwrap();
        let matchings: Vec<Matching> = (0..fan.selected.len())
            .map(|_| Matching {
                permutation: vec![0, 1],
                deviations: vec![0.0, 0.0],
            })
            .collect();
        let rep = pigeonhole_match(&matchings, &fan, 0.1).unwrap();
        assert_eq!(rep.assigned, vec![0, 1]);
        assert!(rep.bijective);
        assert!(rep.per_atom_bound.iter().all(|&b| b == 0.0));
        assert!((rep.formula_bound - 6.0 * 0.1).abs() < 1e-12);
    }

    #[test]
    fn pigeonhole_jitter_respects_formula() {
        let pts = [[0.0, 0.0], [2.0, 0.0], [0.5, 1.7]];
        let fan = select_directions(&pts).unwrap();
        let n = fan.n;
        let d1_bound = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let matchings: Vec<Matching> = (0..n + 1)
            .map(|_| Matching {
                permutation: (0..n).collect(),
                deviations: (0..n).map(|_| rng.gen::<f64>() * d1_bound).collect(),
            })
            .collect();
        let rep = pigeonhole_match(&matchings, &fan, d1_bound).unwrap();
        assert!(rep.bijective);
        for &b in &rep.per_atom_bound {
            assert!(
                b <= rep.formula_bound + 1e-12,
                "per-atom bound {b} above formula bound {}",
                rep.formula_bound
            );
        }
    }

    #[test]
    fn pigeonhole_rejects_oversized_deviations() {
        let pts = [[0.0, 0.0], [1.0, 0.0]];
        let fan = select_directions(&pts).unwrap();
        let matchings: Vec<Matching> = (0..fan.selected.len())
            .map(|_| Matching {
                permutation: vec![0, 1],
                deviations: vec![0.5, 0.0],
            })
            .collect();
        assert!(matches!(
            pigeonhole_match(&matchings, &fan, 0.1),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn fan_serializes_for_reproducibility() {
        let fan = select_directions(&[[0.0, 0.0], [1.5, 0.2], [-0.3, 0.8]]).unwrap();
        let text = serde_json::to_string(&fan).unwrap();
        let back: DirectionFan = serde_json::from_str(&text).unwrap();
        assert_eq!(back.selected_indices, fan.selected_indices);
        assert_eq!(back.selected, fan.selected);
    }
}
