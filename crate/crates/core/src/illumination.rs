//! Illumination patterns and the illumination matrix.
//!
//! Each frame `t` modulates the source by a pattern `I_t` before imaging. The
//! values of the `T` patterns at the `n` scatterer locations form the `T×n`
//! illumination matrix, which is the sole carrier of incoherence in the
//! resolution theory: everything about the patterns enters the bounds through
//! `σ_∞,min` of this matrix.
//!
//! Three representations are supported: constants, analytic sinusoids
//! `c + a·cos(κ·y + φ)` (complex `c`, `a`), and speckles tabulated on a
//! uniform grid with bilinear interpolation. Tabulated speckle values inside
//! the unit disk stay inside it under bilinear interpolation, so boundedness
//! checks reduce to checking the samples.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::measure::{Dim, DiscreteMeasure};

/// Speckle pattern: complex values on a uniform grid, bilinear interpolation
/// in between. 1D speckles use a grid of shape `[n, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeckleGrid {
    pub dim: Dim,
    pub origin: [f64; 2],
    pub pitch: f64,
    /// Grid points per axis; `shape[1] == 1` in 1D.
    pub shape: [usize; 2],
    /// Row-major: index `ix * shape[1] + iy`.
    pub values: Vec<Complex64>,
}

/// Default speckle grid pitch: an eighth of the Rayleigh limit `π/Ω`, so the
/// pattern varies below the resolution scale of the imaging system.
pub fn default_speckle_pitch(cutoff: f64) -> f64 {
    crate::rayleigh(cutoff) / 8.0
}

impl SpeckleGrid {
    pub fn new(dim: Dim, origin: [f64; 2], pitch: f64, shape: [usize; 2], values: Vec<Complex64>) -> Result<Self> {
        if !(pitch > 0.0) {
            return Err(Error::invalid("speckle pitch must be positive"));
        }
        if dim == Dim::One && shape[1] != 1 {
            return Err(Error::invalid("1D speckle grids must have shape [n, 1]"));
        }
        if shape[0] < 2 || (dim == Dim::Two && shape[1] < 2) {
            return Err(Error::invalid("speckle grid needs at least 2 points per axis"));
        }
        if values.len() != shape[0] * shape[1] {
            return Err(Error::invalid(format!(
                "speckle grid of shape {shape:?} needs {} values, got {}",
                shape[0] * shape[1],
                values.len()
            )));
        }
        Ok(SpeckleGrid {
            dim,
            origin,
            pitch,
            shape,
            values,
        })
    }

    /// Random speckle with samples uniform in the disk of radius `max_modulus`.
    pub fn random(
        dim: Dim,
        origin: [f64; 2],
        pitch: f64,
        shape: [usize; 2],
        max_modulus: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = shape[0] * shape[1];
        let values = (0..n)
            .map(|_| {
                let r = max_modulus * rng.gen::<f64>().sqrt();
                let phase = std::f64::consts::TAU * rng.gen::<f64>();
                Complex64::from_polar(r, phase)
            })
            .collect();
        SpeckleGrid::new(dim, origin, pitch, shape, values)
    }

    fn axis_coord(&self, x: f64, axis: usize) -> Result<(usize, f64)> {
        let rel = (x - self.origin[axis]) / self.pitch;
        let max = (self.shape[axis] - 1) as f64;
        if rel < 0.0 || rel > max {
            return Err(Error::OutOfDomain(format!(
                "location coordinate {x} outside tabulated speckle grid (axis {axis})"
            )));
        }
        let i = (rel.floor() as usize).min(self.shape[axis] - 2);
        Ok((i, rel - i as f64))
    }

    pub fn eval(&self, point: [f64; 2]) -> Result<Complex64> {
        let (ix, fx) = self.axis_coord(point[0], 0)?;
        match self.dim {
            Dim::One => {
                let v0 = self.values[ix];
                let v1 = self.values[ix + 1];
                Ok(v0 * (1.0 - fx) + v1 * fx)
            }
            Dim::Two => {
                let (iy, fy) = self.axis_coord(point[1], 1)?;
                let at = |i: usize, j: usize| self.values[i * self.shape[1] + j];
                let v = at(ix, iy) * ((1.0 - fx) * (1.0 - fy))
                    + at(ix + 1, iy) * (fx * (1.0 - fy))
                    + at(ix, iy + 1) * ((1.0 - fx) * fy)
                    + at(ix + 1, iy + 1) * (fx * fy);
                Ok(v)
            }
        }
    }

    pub fn max_sample_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// One illumination pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Constant(Complex64),
    /// `c + a·cos(κ·y + φ)`.
    Sinusoid {
        offset: Complex64,
        amp: Complex64,
        wavevec: [f64; 2],
        phase: f64,
    },
    /// Analytic complex sinusoid `a·e^{i(κ·y + φ)}`; modulus `|a|` everywhere.
    ComplexExp {
        amp: Complex64,
        wavevec: [f64; 2],
        phase: f64,
    },
    Speckle(SpeckleGrid),
}

impl Pattern {
    pub fn eval(&self, point: [f64; 2]) -> Result<Complex64> {
        match self {
            Pattern::Constant(c) => Ok(*c),
            Pattern::Sinusoid {
                offset,
                amp,
                wavevec,
                phase,
            } => {
                let arg = wavevec[0] * point[0] + wavevec[1] * point[1] + phase;
                Ok(offset + amp * arg.cos())
            }
            Pattern::ComplexExp { amp, wavevec, phase } => {
                let arg = wavevec[0] * point[0] + wavevec[1] * point[1] + phase;
                Ok(amp * Complex64::from_polar(1.0, arg))
            }
            Pattern::Speckle(grid) => grid.eval(point),
        }
    }

    /// True when `|I(y)| ≤ bound` can be guaranteed everywhere on the pattern
    /// domain: triangle inequality for analytic patterns (exact for complex
    /// exponentials), sample check for speckles (bilinear interpolation stays
    /// in the convex hull of samples).
    pub fn is_bounded_by(&self, bound: f64) -> bool {
        let slack = 1e-12;
        match self {
            Pattern::Constant(c) => c.norm() <= bound + slack,
            Pattern::Sinusoid { offset, amp, .. } => offset.norm() + amp.norm() <= bound + slack,
            Pattern::ComplexExp { amp, .. } => amp.norm() <= bound + slack,
            Pattern::Speckle(grid) => grid.max_sample_modulus() <= bound + slack,
        }
    }
}

/// An ordered family of `T ≥ 1` patterns, one per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationSet {
    dim: Dim,
    patterns: Vec<Pattern>,
}

impl IlluminationSet {
    pub fn new(dim: Dim, patterns: Vec<Pattern>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::invalid("an illumination set needs at least one pattern"));
        }
        Ok(IlluminationSet { dim, patterns })
    }

    /// `T` copies of the constant pattern `1`.
    pub fn uniform(dim: Dim, frames: usize) -> Result<Self> {
        IlluminationSet::new(dim, vec![Pattern::Constant(Complex64::new(1.0, 0.0)); frames])
    }

    /// Structured-illumination family `I_t(y) = (1 + cos(κ·y + φ_t))/2` with
    /// evenly spread phases; every pattern satisfies `0 ≤ I_t ≤ 1`.
    pub fn shifted_cosines(dim: Dim, frames: usize, wavevec: [f64; 2]) -> Result<Self> {
        let patterns = (0..frames)
            .map(|t| Pattern::Sinusoid {
                offset: Complex64::new(0.5, 0.0),
                amp: Complex64::new(0.5, 0.0),
                wavevec,
                phase: std::f64::consts::PI * t as f64 / frames as f64,
            })
            .collect();
        IlluminationSet::new(dim, patterns)
    }

    /// Fourier-harmonic family `I_t(y) = e^{i·t·κ₀·y}`, `t = 0..T−1`, with
    /// `κ₀` chosen so the top harmonic sits at `max_wavevec`. All moduli are
    /// exactly 1, and the illumination matrix of separated atoms is a
    /// Vandermonde matrix in `e^{iκ₀·yⱼ}`, which keeps `σ_∞,min` well away
    /// from zero.
    pub fn fourier_harmonics(dim: Dim, frames: usize, max_wavevec: [f64; 2]) -> Result<Self> {
        let denom = (frames.max(2) - 1) as f64;
        let patterns = (0..frames)
            .map(|t| Pattern::ComplexExp {
                amp: Complex64::new(1.0, 0.0),
                wavevec: [
                    max_wavevec[0] * t as f64 / denom,
                    max_wavevec[1] * t as f64 / denom,
                ],
                phase: 0.0,
            })
            .collect();
        IlluminationSet::new(dim, patterns)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn frames(&self) -> usize {
        self.patterns.len()
    }

    pub fn pattern(&self, t: usize) -> &Pattern {
        &self.patterns[t]
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn eval(&self, t: usize, point: [f64; 2]) -> Result<Complex64> {
        self.patterns[t].eval(point)
    }

    pub fn all_bounded_by(&self, bound: f64) -> bool {
        self.patterns.iter().all(|p| p.is_bounded_by(bound))
    }
}

/// The `T×n` matrix of pattern values at scatterer locations,
/// `entries[t][j] = I_t(yⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationMatrix {
    pub entries: CMat,
}

impl IlluminationMatrix {
    pub fn frames(&self) -> usize {
        self.entries.rows
    }

    pub fn atoms(&self) -> usize {
        self.entries.cols
    }
}

/// Evaluate every pattern at every atom location.
pub fn build_illumination_matrix(
    set: &IlluminationSet,
    measure: &DiscreteMeasure,
) -> Result<IlluminationMatrix> {
    if set.dim() != measure.dim() {
        return Err(Error::DimensionMismatch(format!(
            "illumination set is {:?} but measure is {:?}",
            set.dim(),
            measure.dim()
        )));
    }
    let mut entries = CMat::zeros(set.frames(), measure.len());
    for t in 0..set.frames() {
        for (j, &p) in measure.points().iter().enumerate() {
            entries[(t, j)] = set.eval(t, p)?;
        }
    }
    Ok(IlluminationMatrix { entries })
}

/// JSON form of a tabulated speckle: `grid` is the per-axis shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeckleJson {
    pub grid: Vec<usize>,
    pub values_re: Vec<f64>,
    pub values_im: Vec<f64>,
    pub pitch: f64,
    pub origin: Vec<f64>,
}

impl SpeckleGrid {
    pub fn to_json(&self) -> SpeckleJson {
        let grid = match self.dim {
            Dim::One => vec![self.shape[0]],
            Dim::Two => vec![self.shape[0], self.shape[1]],
        };
        let origin = match self.dim {
            Dim::One => vec![self.origin[0]],
            Dim::Two => vec![self.origin[0], self.origin[1]],
        };
        SpeckleJson {
            grid,
            values_re: self.values.iter().map(|v| v.re).collect(),
            values_im: self.values.iter().map(|v| v.im).collect(),
            pitch: self.pitch,
            origin,
        }
    }

    pub fn from_json(j: &SpeckleJson) -> Result<Self> {
        let (dim, shape, origin) = match (j.grid.len(), j.origin.len()) {
            (1, 1) => (Dim::One, [j.grid[0], 1], [j.origin[0], 0.0]),
            (2, 2) => (Dim::Two, [j.grid[0], j.grid[1]], [j.origin[0], j.origin[1]]),
            _ => return Err(Error::invalid("speckle grid/origin must both have 1 or 2 entries")),
        };
        let values = j
            .values_re
            .iter()
            .zip(&j.values_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        SpeckleGrid::new(dim, origin, j.pitch, shape, values)
    }
}
