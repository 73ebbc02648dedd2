//! Discrete measures and the wrapped metric.
//!
//! A [`DiscreteMeasure`] is the object `μ = Σ aⱼ δ_{yⱼ}`: finitely many
//! pairwise-distinct locations (1D scalars or 2D points) with nonzero complex
//! amplitudes. All resolution statements are phrased in terms of its minimal
//! amplitude `m_min` and minimal separation `d_min`, the latter measured either
//! in the Euclidean metric or in the wrapped (periodic) metric
//! `|x−y|_Λ = min_k |x−y−kΛ|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

/// Metric for pairwise separations. The wrapped metric carries its period `Λ`
/// and is only meaningful in 1D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclidean,
    Wrapped(f64),
}

/// Distance on `ℝ` modulo `period`: `min over integers k of |x − y − k·period|`.
///
/// The result lies in `[0, period/2]`.
pub fn wrapped_distance(x: f64, y: f64, period: f64) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::invalid(format!("wrapped period must be > 0, got {period}")));
    }
    let d = (x - y).rem_euclid(period);
    Ok(d.min(period - d))
}

/// `μ = Σ aⱼ δ_{yⱼ}`: locations with complex amplitudes.
///
/// Invariants enforced at construction: locations pairwise distinct with zero
/// tolerance, amplitudes nonzero, both lists the same length. Values are
/// immutable afterwards, so measures are freely shared across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: Dim,
    locations: Vec<[f64; 2]>,
    amplitudes: Vec<Complex64>,
}

impl DiscreteMeasure {
    pub fn new_1d(locations: &[f64], amplitudes: &[Complex64]) -> Result<Self> {
        let locs: Vec<[f64; 2]> = locations.iter().map(|&x| [x, 0.0]).collect();
        Self::build(Dim::One, locs, amplitudes.to_vec())
    }

    pub fn new_2d(locations: &[[f64; 2]], amplitudes: &[Complex64]) -> Result<Self> {
        Self::build(Dim::Two, locations.to_vec(), amplitudes.to_vec())
    }

    fn build(dim: Dim, locations: Vec<[f64; 2]>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if locations.len() != amplitudes.len() {
            return Err(Error::invalid(format!(
                "{} locations but {} amplitudes",
                locations.len(),
                amplitudes.len()
            )));
        }
        for (j, a) in amplitudes.iter().enumerate() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::invalid(format!("amplitude {j} is not finite")));
            }
            if a.norm() == 0.0 {
                return Err(Error::invalid(format!("amplitude {j} is zero; zero-amplitude atoms are rejected")));
            }
        }
        for p in locations.iter() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::invalid("non-finite location"));
            }
        }
        // Exact deduplication: equal coordinates are an error, no tolerance.
        for i in 0..locations.len() {
            for j in i + 1..locations.len() {
                if locations[i] == locations[j] {
                    return Err(Error::invalid(format!(
                        "duplicate locations at indices {i} and {j}"
                    )));
                }
            }
        }
        Ok(DiscreteMeasure {
            dim,
            locations,
            amplitudes,
        })
    }

    /// The empty measure (zero atoms) in the given dimension.
    pub fn empty(dim: Dim) -> Self {
        DiscreteMeasure {
            dim,
            locations: Vec::new(),
            amplitudes: Vec::new(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Locations as points; for 1D measures the second coordinate is zero.
    pub fn points(&self) -> &[[f64; 2]] {
        &self.locations
    }

    /// 1D locations as scalars. Errors on a 2D measure.
    pub fn scalars(&self) -> Result<Vec<f64>> {
        match self.dim {
            Dim::One => Ok(self.locations.iter().map(|p| p[0]).collect()),
            Dim::Two => Err(Error::DimensionMismatch(
                "scalar locations requested from a 2D measure".into(),
            )),
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `m_min = min |aⱼ|`. Errors when the measure is empty.
    pub fn min_amplitude(&self) -> Result<f64> {
        self.amplitudes
            .iter()
            .map(|a| a.norm())
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |m| m.min(x))))
            .ok_or_else(|| Error::invalid("m_min undefined for an empty measure"))
    }

    /// Minimum pairwise separation `d_min` under the chosen metric.
    ///
    /// Needs at least two atoms; the wrapped metric is rejected for 2D
    /// measures.
    pub fn separation(&self, metric: Metric) -> Result<f64> {
        if self.len() < 2 {
            return Err(Error::invalid("separation undefined for fewer than 2 atoms"));
        }
        if self.dim == Dim::Two {
            if let Metric::Wrapped(_) = metric {
                return Err(Error::DimensionMismatch(
                    "wrapped metric is only defined for 1D measures".into(),
                ));
            }
        }
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = match metric {
                    Metric::Euclidean => {
                        let dx = self.locations[i][0] - self.locations[j][0];
                        let dy = self.locations[i][1] - self.locations[j][1];
                        (dx * dx + dy * dy).sqrt()
                    }
                    Metric::Wrapped(period) => {
                        wrapped_distance(self.locations[i][0], self.locations[j][0], period)?
                    }
                };
                best = best.min(d);
            }
        }
        Ok(best)
    }

    /// Same atoms with locations shifted by `s` (1D).
    pub fn translated_1d(&self, s: f64) -> Result<Self> {
        let locs = self.scalars()?.iter().map(|&x| x + s).collect::<Vec<_>>();
        DiscreteMeasure::new_1d(&locs, &self.amplitudes)
    }
}

/// JSON form of a measure: `dim`, `locations` (scalars in 1D, pairs in 2D) and
/// split real/imaginary amplitude arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub dim: u8,
    pub locations: serde_json::Value,
    pub amplitudes_re: Vec<f64>,
    pub amplitudes_im: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn to_json(&self) -> MeasureJson {
        let locations = match self.dim {
            Dim::One => serde_json::json!(self
                .locations
                .iter()
                .map(|p| p[0])
                .collect::<Vec<f64>>()),
            Dim::Two => serde_json::json!(self.locations),
        };
        MeasureJson {
            dim: self.dim.as_usize() as u8,
            locations,
            amplitudes_re: self.amplitudes.iter().map(|a| a.re).collect(),
            amplitudes_im: self.amplitudes.iter().map(|a| a.im).collect(),
        }
    }

    pub fn from_json(j: &MeasureJson) -> Result<Self> {
        let amps: Vec<Complex64> = j
            .amplitudes_re
            .iter()
            .zip(&j.amplitudes_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        match j.dim {
            1 => {
                let locs: Vec<f64> = serde_json::from_value(j.locations.clone())?;
                DiscreteMeasure::new_1d(&locs, &amps)
            }
            2 => {
                let locs: Vec<[f64; 2]> = serde_json::from_value(j.locations.clone())?;
                DiscreteMeasure::new_2d(&locs, &amps)
            }
            d => Err(Error::invalid(format!("dim must be 1 or 2, got {d}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wrapped_distance_examples() {
        let lambda = 5.0;
        assert_relative_eq!(wrapped_distance(0.0, lambda, lambda).unwrap(), 0.0);
        assert_relative_eq!(
            wrapped_distance(0.0, 0.6 * lambda, lambda).unwrap(),
            0.4 * lambda,
            epsilon = 1e-12
        );
        let two_pi = std::f64::consts::TAU;
        assert_relative_eq!(wrapped_distance(0.1, 0.3, two_pi).unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn wrapped_distance_rejects_bad_period() {
        assert!(wrapped_distance(0.0, 1.0, 0.0).is_err());
        assert!(wrapped_distance(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn separation_examples() {
        let tau = 0.37;
        let m = DiscreteMeasure::new_1d(
            &[0.0, tau, 2.0 * tau],
            &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert_relative_eq!(m.separation(Metric::Euclidean).unwrap(), tau, epsilon = 1e-12);

        let lambda = 2.0;
        let m = DiscreteMeasure::new_1d(&[0.0, 0.9 * lambda], &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(
            m.separation(Metric::Wrapped(lambda)).unwrap(),
            0.1 * lambda,
            epsilon = 1e-12
        );
    }

    #[test]
    fn separation_matches_brute_force_oracle() {
        // Independent O(n²) scan over a fixed random-ish 5-atom set.
        let locs = [0.13, 2.71, -1.4, 0.55, 1.92];
        let amps = vec![c(1.0, 0.5); 5];
        let m = DiscreteMeasure::new_1d(&locs, &amps).unwrap();
        let mut oracle = f64::INFINITY;
        for i in 0..locs.len() {
            for j in 0..locs.len() {
                if i != j {
                    oracle = oracle.min((locs[i] - locs[j]).abs());
                }
            }
        }
        assert_relative_eq!(m.separation(Metric::Euclidean).unwrap(), oracle, epsilon = 1e-15);
    }

    #[test]
    fn separation_error_paths() {
        let single = DiscreteMeasure::new_1d(&[0.0], &[c(1.0, 0.0)]).unwrap();
        assert!(single.separation(Metric::Euclidean).is_err());

        let m2 = DiscreteMeasure::new_2d(&[[0.0, 0.0], [1.0, 1.0]], &[c(1.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        assert!(m2.separation(Metric::Wrapped(1.0)).is_err());
        assert!(m2.separation(Metric::Euclidean).is_ok());
    }

    #[test]
    fn construction_rejects_invalid_atoms() {
        assert!(DiscreteMeasure::new_1d(&[0.0, 0.0], &[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(DiscreteMeasure::new_1d(&[0.0], &[c(0.0, 0.0)]).is_err());
        assert!(DiscreteMeasure::new_1d(&[0.0, 1.0], &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = DiscreteMeasure::new_1d(
            &[0.1 + 0.2, std::f64::consts::PI, -7.25e-13],
            &[c(1.0 / 3.0, -0.7), c(2.0f64.sqrt(), 0.0), c(-1e-300, 3.0)],
        )
        .unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back = DiscreteMeasure::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(m, back);

        let m2 = DiscreteMeasure::new_2d(&[[0.1, -0.3], [1.0 / 7.0, 2e-8]], &[c(1.0, 2.0), c(0.5, 0.25)])
            .unwrap();
        let text = serde_json::to_string(&m2.to_json()).unwrap();
        let back = DiscreteMeasure::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(m2, back);
    }
}
