//! Band-limited multi-frame forward model.
//!
//! Frame `t` of the measurement is the Fourier transform of the illuminated
//! measure sampled on a frequency grid inside the band:
//!
//! ```text
//! Y_t(ω) = Σⱼ I_t(yⱼ) aⱼ e^{i yⱼ·ω} + W_t(ω)
//! ```
//!
//! Continuous-frequency norms are replaced by their grid counterparts: the
//! 2-norm becomes the root mean square over the grid nodes and the sup norm
//! the maximal modulus. Noise is drawn so that the declared per-frame norm
//! bound `‖W_t‖ < σ` holds strictly for every seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::illumination::IlluminationSet;
use crate::linalg::{CMat, KahanSum};
use crate::measure::{Dim, DiscreteMeasure};

/// Which grid norm a measurement set is judged in: RMS for the 1D wrapped
/// theory, sup for the Euclidean/2D theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormMode {
    Rms,
    Sup,
}

/// How a frequency grid was constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridScheme {
    /// `count` evenly spaced 1D nodes `−Ω + l·(2Ω/count)`, `l = 0..count`.
    /// A uniform grid whose count is a multiple of `n` is the disjoint union
    /// of `count/n` wrapped theorem grids, one per offset.
    Uniform { count: usize },
    /// 1D nodes `ω_j = offset + (j−1)·h − Ω` with `h = 2Ω/n`.
    TheoremWrapped { n: usize, offset: f64, count: usize },
    /// 1D nodes `ω_j = offset + (j−1)·h − Ω` with `h = Ω/(c0·n)`.
    TheoremEuclidean { n: usize, c0: f64, offset: f64, count: usize },
    /// 2D polar product grid restricted to `‖ω‖₂ ≤ Ω`, plus the origin.
    Polar { radial: usize, angular: usize },
    /// 1D theorem grid embedded along a unit direction in the 2D band.
    Directional { direction: [f64; 2] },
    Custom,
}

/// Sampling nodes inside the band `|ω| ≤ Ω` (1D) or `‖ω‖₂ ≤ Ω` (2D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub dim: Dim,
    pub cutoff: f64,
    pub nodes: Vec<[f64; 2]>,
    pub scheme: GridScheme,
}

impl FrequencyGrid {
    fn check(self) -> Result<Self> {
        if !(self.cutoff > 0.0) {
            return Err(Error::invalid("cut-off frequency must be positive"));
        }
        let tol = 1e-9 * self.cutoff;
        for w in &self.nodes {
            let inside = match self.dim {
                Dim::One => w[0].abs() <= self.cutoff + tol && w[1] == 0.0,
                Dim::Two => (w[0] * w[0] + w[1] * w[1]).sqrt() <= self.cutoff + tol,
            };
            if !inside {
                return Err(Error::invalid(format!("node {w:?} outside the band |ω| ≤ {}", self.cutoff)));
            }
        }
        Ok(self)
    }

    pub fn uniform_1d(cutoff: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("uniform grid needs at least one node"));
        }
        let h = 2.0 * cutoff / count as f64;
        let nodes = (0..count).map(|l| [-cutoff + l as f64 * h, 0.0]).collect();
        FrequencyGrid {
            dim: Dim::One,
            cutoff,
            nodes,
            scheme: GridScheme::Uniform { count },
        }
        .check()
    }

    /// `count` midpoint nodes `−Ω + (l+1/2)·(2Ω/count)`. Grid RMS on this
    /// design converges to the continuum RMS at second order, which the
    /// residual certifications rely on.
    pub fn uniform_midpoint_1d(cutoff: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("uniform grid needs at least one node"));
        }
        let h = 2.0 * cutoff / count as f64;
        let nodes = (0..count)
            .map(|l| [-cutoff + (l as f64 + 0.5) * h, 0.0])
            .collect();
        FrequencyGrid {
            dim: Dim::One,
            cutoff,
            nodes,
            scheme: GridScheme::Custom,
        }
        .check()
    }

    /// Wrapped-setting theorem grid: spacing `h = 2Ω/n`, nodes
    /// `offset + (j−1)h − Ω` for `j = 1..=count` with `count ∈ {n−1, n}`.
    pub fn theorem_wrapped(cutoff: f64, n: usize, offset: f64, count: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("theorem grid needs n ≥ 1"));
        }
        let h = 2.0 * cutoff / n as f64;
        if !(0.0..=h).contains(&offset) {
            return Err(Error::invalid(format!("offset must lie in [0, {h}], got {offset}")));
        }
        if count != n && count + 1 != n {
            return Err(Error::invalid("theorem grid count must be n or n−1"));
        }
        let nodes = (1..=count)
            .map(|j| [offset + (j - 1) as f64 * h - cutoff, 0.0])
            .collect();
        FrequencyGrid {
            dim: Dim::One,
            cutoff,
            nodes,
            scheme: GridScheme::TheoremWrapped { n, offset, count },
        }
        .check()
    }

    /// Euclidean-setting theorem grid: spacing `h = Ω/(c0·n)`.
    pub fn theorem_euclidean(cutoff: f64, n: usize, c0: f64, offset: f64, count: usize) -> Result<Self> {
        if n == 0 || !(c0 >= 1.0) {
            return Err(Error::invalid("theorem grid needs n ≥ 1 and c0 ≥ 1"));
        }
        let h = cutoff / (c0 * n as f64);
        if !(0.0..=h).contains(&offset) {
            return Err(Error::invalid(format!("offset must lie in [0, {h}], got {offset}")));
        }
        if count != n && count + 1 != n {
            return Err(Error::invalid("theorem grid count must be n or n−1"));
        }
        let nodes = (1..=count)
            .map(|j| [offset + (j - 1) as f64 * h - cutoff, 0.0])
            .collect();
        FrequencyGrid {
            dim: Dim::One,
            cutoff,
            nodes,
            scheme: GridScheme::TheoremEuclidean { n, c0, offset, count },
        }
        .check()
    }

    /// Polar product grid: `radial` rings of `angular` nodes plus the origin.
    pub fn polar_2d(cutoff: f64, radial: usize, angular: usize) -> Result<Self> {
        if radial == 0 || angular == 0 {
            return Err(Error::invalid("polar grid needs radial ≥ 1 and angular ≥ 1"));
        }
        let mut nodes = vec![[0.0, 0.0]];
        for i in 1..=radial {
            let r = cutoff * i as f64 / radial as f64;
            for a in 0..angular {
                let phi = std::f64::consts::TAU * a as f64 / angular as f64;
                nodes.push([r * phi.cos(), r * phi.sin()]);
            }
        }
        FrequencyGrid {
            dim: Dim::Two,
            cutoff,
            nodes,
            scheme: GridScheme::Polar { radial, angular },
        }
        .check()
    }

    /// Embed a 1D grid along a unit direction `v`: nodes `w·v` for the scalar
    /// nodes `w` of `base`.
    pub fn directional_2d(base: &FrequencyGrid, direction: [f64; 2]) -> Result<Self> {
        if base.dim != Dim::One {
            return Err(Error::DimensionMismatch("directional grid needs a 1D base grid".into()));
        }
        let norm = (direction[0] * direction[0] + direction[1] * direction[1]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("direction must be a unit vector"));
        }
        let nodes = base
            .nodes
            .iter()
            .map(|w| [w[0] * direction[0], w[0] * direction[1]])
            .collect();
        FrequencyGrid {
            dim: Dim::Two,
            cutoff: base.cutoff,
            nodes,
            scheme: GridScheme::Directional { direction },
        }
        .check()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Per-frame sampled Fourier data with its noise level and norm convention.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub grid: FrequencyGrid,
    pub frames: Vec<Vec<Complex64>>,
    pub sigma: f64,
    pub norm_mode: NormMode,
}

impl MeasurementSet {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }
}

/// Grid norm of one frame of samples.
pub fn frame_norm(samples: &[Complex64], mode: NormMode) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("frame norm of an empty sample list"));
    }
    Ok(match mode {
        NormMode::Rms => {
            (samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / samples.len() as f64).sqrt()
        }
        NormMode::Sup => samples.iter().map(|z| z.norm()).fold(0.0, f64::max),
    })
}

/// `Σⱼ aⱼ e^{i yⱼ·ω}` for one frequency node.
pub fn fourier_sum(points: &[[f64; 2]], amplitudes: &[Complex64], node: [f64; 2]) -> Complex64 {
    points
        .iter()
        .zip(amplitudes)
        .map(|(y, a)| {
            let phase = y[0] * node[0] + y[1] * node[1];
            a * Complex64::from_polar(1.0, phase)
        })
        .sum()
}

/// Noiseless measurements: exact nonuniform Fourier sums per frame per node.
pub fn fourier_transform(
    measure: &DiscreteMeasure,
    illum: &IlluminationSet,
    grid: &FrequencyGrid,
    mode: NormMode,
) -> Result<MeasurementSet> {
    if measure.dim() != grid.dim || illum.dim() != grid.dim {
        return Err(Error::DimensionMismatch(format!(
            "measure {:?} / illumination {:?} / grid {:?}",
            measure.dim(),
            illum.dim(),
            grid.dim
        )));
    }
    let mut frames = Vec::with_capacity(illum.frames());
    for t in 0..illum.frames() {
        let eff: Vec<Complex64> = measure
            .points()
            .iter()
            .zip(measure.amplitudes())
            .map(|(&y, &a)| Ok(illum.eval(t, y)? * a))
            .collect::<Result<_>>()?;
        let samples = grid
            .nodes
            .iter()
            .map(|&w| fourier_sum(measure.points(), &eff, w))
            .collect();
        frames.push(samples);
    }
    Ok(MeasurementSet {
        grid: grid.clone(),
        frames,
        sigma: 0.0,
        norm_mode: mode,
    })
}

/// Shape of the noise draw; both are rescaled when a draw would violate the
/// strict norm bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseModel {
    ComplexGaussianCapped,
    UniformDisk,
}

/// The strict fraction of `σ` noise is capped at.
pub const NOISE_CAP: f64 = 1.0 - 1e-9;

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 is kept away from zero.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Perturb every frame with noise whose declared norm is strictly below `σ`:
/// frame RMS in `Rms` mode, maximal modulus in `Sup` mode. Deterministic for
/// a fixed seed.
pub fn add_noise(
    ms: &MeasurementSet,
    sigma: f64,
    model: NoiseModel,
    seed: u64,
) -> Result<MeasurementSet> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("noise level must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = sigma * NOISE_CAP;
    let mut out = ms.clone();
    out.sigma = sigma;
    for frame in out.frames.iter_mut() {
        let noise: Vec<Complex64> = match model {
            NoiseModel::ComplexGaussianCapped => frame
                .iter()
                .map(|_| {
                    let g1 = standard_normal(&mut rng);
                    let g2 = standard_normal(&mut rng);
                    Complex64::new(g1, g2) * (sigma / (2.0 * 2.0f64.sqrt()))
                })
                .collect(),
            NoiseModel::UniformDisk => frame
                .iter()
                .map(|_| {
                    let r = cap * rng.gen::<f64>().sqrt();
                    let phase = std::f64::consts::TAU * rng.gen::<f64>();
                    Complex64::from_polar(r, phase)
                })
                .collect(),
        };
        let norm = frame_norm(&noise, ms.norm_mode)?;
        let scale = if norm > cap { cap / norm } else { 1.0 };
        for (s, w) in frame.iter_mut().zip(&noise) {
            *s += w * scale;
        }
    }
    Ok(out)
}

/// Per-frame residual norm of a candidate with per-frame effective amplitudes
/// `effective[t][j]` (illumination already folded in) against the data.
pub fn residual(
    candidate: &DiscreteMeasure,
    effective: &CMat,
    ms: &MeasurementSet,
) -> Result<Vec<f64>> {
    if candidate.dim() != ms.grid.dim {
        return Err(Error::DimensionMismatch("candidate and grid dimensions differ".into()));
    }
    if effective.rows != ms.frame_count() || effective.cols != candidate.len() {
        return Err(Error::invalid(format!(
            "effective amplitudes must be {}×{}, got {}×{}",
            ms.frame_count(),
            candidate.len(),
            effective.rows,
            effective.cols
        )));
    }
    let mut out = Vec::with_capacity(ms.frame_count());
    for (t, data) in ms.frames.iter().enumerate() {
        let eff = effective.row(t);
        let diff: Vec<Complex64> = ms
            .grid
            .nodes
            .iter()
            .zip(data)
            .map(|(&w, &y)| fourier_sum(candidate.points(), eff, w) - y)
            .collect();
        out.push(frame_norm(&diff, ms.norm_mode)?);
    }
    Ok(out)
}

/// Residual of a candidate under a known illumination model: effective
/// amplitudes are `I_t(ŷⱼ)·âⱼ`.
pub fn residual_with_illum(
    candidate: &DiscreteMeasure,
    illum: &IlluminationSet,
    ms: &MeasurementSet,
) -> Result<Vec<f64>> {
    let mut eff = CMat::zeros(ms.frame_count(), candidate.len());
    for t in 0..ms.frame_count() {
        for (j, (&y, &a)) in candidate.points().iter().zip(candidate.amplitudes()).enumerate() {
            eff[(t, j)] = illum.eval(t, y)? * a;
        }
    }
    residual(candidate, &eff, ms)
}

/// A sup-bounded noise field that can be evaluated at any frequency:
/// `W(ω) = scale · Σ_m w_m e^{i ω·p_m}` with `Σ|w_m| = 1`, so `|W(ω)| ≤ scale`
/// everywhere by the triangle inequality. Restrictions to lines through the
/// origin keep the same bound, which is what the 2D-to-1D projection
/// machinery needs.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    terms: Vec<(Complex64, [f64; 2])>,
    scale: f64,
}

impl NoiseField {
    pub fn random(scale: f64, term_count: usize, spread: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms: Vec<(Complex64, [f64; 2])> = (0..term_count.max(1))
            .map(|_| {
                let w = Complex64::from_polar(
                    rng.gen::<f64>(),
                    std::f64::consts::TAU * rng.gen::<f64>(),
                );
                let p = [
                    spread * (2.0 * rng.gen::<f64>() - 1.0),
                    spread * (2.0 * rng.gen::<f64>() - 1.0),
                ];
                (w, p)
            })
            .collect();
        let total: f64 = terms.iter().map(|(w, _)| w.norm()).sum();
        for (w, _) in terms.iter_mut() {
            *w /= total.max(1e-300);
        }
        NoiseField { terms, scale }
    }

    pub fn eval(&self, node: [f64; 2]) -> Complex64 {
        let mut acc = KahanSum::default();
        for (w, p) in &self.terms {
            let phase = node[0] * p[0] + node[1] * p[1];
            acc.add(w * Complex64::from_polar(1.0, phase));
        }
        acc.value() * self.scale
    }

    pub fn sup_bound(&self) -> f64 {
        self.scale
    }
}

/// A measurement source that can be re-evaluated at arbitrary in-band
/// frequencies: signal atoms plus an optional per-frame noise field.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub measure: DiscreteMeasure,
    pub illum: IlluminationSet,
    pub noise: Option<Vec<NoiseField>>,
    pub sigma: f64,
}

impl FrameField {
    pub fn noiseless(measure: DiscreteMeasure, illum: IlluminationSet) -> Self {
        FrameField {
            measure,
            illum,
            noise: None,
            sigma: 0.0,
        }
    }

    /// Attach independent sup-bounded noise fields, one per frame, with
    /// `sup |W_t| < σ` strictly.
    pub fn with_sup_noise(mut self, sigma: f64, spread: f64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid("noise level must be positive"));
        }
        let fields = (0..self.illum.frames())
            .map(|t| NoiseField::random(sigma * NOISE_CAP, 24, spread, seed.wrapping_add(t as u64)))
            .collect();
        self.noise = Some(fields);
        self.sigma = sigma;
        Ok(self)
    }

    pub fn frames(&self) -> usize {
        self.illum.frames()
    }

    pub fn eval(&self, t: usize, node: [f64; 2]) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&y, &a) in self.measure.points().iter().zip(self.measure.amplitudes()) {
            let phase = y[0] * node[0] + y[1] * node[1];
            acc += self.illum.eval(t, y)? * a * Complex64::from_polar(1.0, phase);
        }
        if let Some(fields) = &self.noise {
            acc += fields[t].eval(node);
        }
        Ok(acc)
    }

    /// Sample the field on a grid.
    pub fn sample(&self, grid: &FrequencyGrid, mode: NormMode) -> Result<MeasurementSet> {
        if grid.dim != self.measure.dim() {
            return Err(Error::DimensionMismatch("grid and field dimensions differ".into()));
        }
        let mut frames = Vec::with_capacity(self.frames());
        for t in 0..self.frames() {
            frames.push(
                grid.nodes
                    .iter()
                    .map(|&w| self.eval(t, w))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(MeasurementSet {
            grid: grid.clone(),
            frames,
            sigma: self.sigma,
            norm_mode: mode,
        })
    }
}

/// JSON form: frames as interleaved re/im arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementJson {
    pub grid: FrequencyGrid,
    pub sigma: f64,
    pub norm_mode: NormMode,
    pub frames: Vec<Vec<f64>>,
}

impl MeasurementSet {
    pub fn to_json(&self) -> MeasurementJson {
        MeasurementJson {
            grid: self.grid.clone(),
            sigma: self.sigma,
            norm_mode: self.norm_mode,
            frames: self
                .frames
                .iter()
                .map(|f| f.iter().flat_map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &MeasurementJson) -> Result<Self> {
        let mut frames = Vec::with_capacity(j.frames.len());
        for f in &j.frames {
            if f.len() % 2 != 0 || f.len() / 2 != j.grid.nodes.len() {
                return Err(Error::invalid("frame sample count does not match the grid"));
            }
            frames.push(f.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
        }
        Ok(MeasurementSet {
            grid: j.grid.clone(),
            frames,
            sigma: j.sigma,
            norm_mode: j.norm_mode,
        })
    }

    /// CSV rows `frame,omega_x,omega_y,re,im`, one per (t, ω) pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,omega_x,omega_y,re,im\n");
        for (t, frame) in self.frames.iter().enumerate() {
            for (w, z) in self.grid.nodes.iter().zip(frame) {
                out.push_str(&format!("{t},{},{},{},{}\n", w[0], w[1], z.re, z.im));
            }
        }
        out
    }
}
