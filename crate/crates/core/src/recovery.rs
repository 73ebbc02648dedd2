//! Sparsest-measure recovery by exhaustive support search.
//!
//! The three problem variants differ only in how candidate amplitudes are
//! fitted against the frames:
//!
//! - **known** illuminations: one joint least-squares system across all
//!   frames in the shared amplitudes `âⱼ`, weighted by `I_t(ŷⱼ)`;
//! - **approximated**: the same with the supplied approximations `Î_t`;
//! - **unknown**: independent per-frame fits in `â_{j,t}` — feasibility means
//!   *some* illuminations exist, so each frame gets its best fit.
//!
//! The solver scans sparsity `k = 0, 1, …` and returns the first `k` whose
//! best candidate meets every per-frame residual constraint
//! `‖𝓕[·] − Y_t‖ < σ` (implemented as `≤ σ·(1 − 1e−9)` to keep the strict
//! inequality away from floating-point ties). Candidate supports come from a
//! location grid — exhaustively for `k ≤ 3`, by matching-pursuit-seeded beam
//! search above — and the best few are polished by derivative-free coordinate
//! descent on the locations with amplitude re-fits at every step. This is
//! exact enough at desk scale (n ≤ 6, modest grids); minimality of the
//! returned sparsity is what the resolution theory certifies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, TheoremMode};
use crate::error::{Error, Result};
use crate::forward::{fourier_sum, frame_norm, FrameField, FrequencyGrid, MeasurementSet, NormMode};
use crate::illumination::IlluminationSet;
use crate::incoherence::sigma_inf_min;
use crate::linalg::{condition_number, lstsq, CMat};
use crate::measure::{Dim, DiscreteMeasure, Metric};

/// Strictness margin for the `< σ` feasibility constraint.
pub const FEASIBILITY_MARGIN: f64 = 1.0 - 1e-9;
/// Supports with a worse design-matrix condition number are skipped.
pub const CONDITION_LIMIT: f64 = 1e12;
/// How many of the best-scoring supports get coordinate-descent polish.
const REFINE_CANDIDATES: usize = 10;
/// Beam width for the `k ≥ 4` search.
const BEAM_WIDTH: usize = 32;
/// Exhaustive enumeration cap; beyond this many subsets the solver falls back
/// to beam search and notes it in the log.
const EXHAUSTIVE_CAP: u128 = 2_000_000;

/// Illumination knowledge available to the solver.
#[derive(Debug, Clone)]
pub enum IllumMode {
    Known(IlluminationSet),
    /// Approximate patterns plus the caller's perturbation bound (recorded,
    /// not enforced; no admissibility criterion exists).
    Approximated {
        patterns: IlluminationSet,
        perturbation_bound: f64,
    },
    Unknown,
}

/// Search domain for scatterer locations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Disk { center: [f64; 2], radius: f64 },
}

impl Domain {
    /// Disk of the default radius `c0·n·π/Ω`.
    pub fn disk_default(center: [f64; 2], c0: f64, n: usize, cutoff: f64) -> Self {
        Domain::Disk {
            center,
            radius: c0 * n as f64 * std::f64::consts::PI / cutoff,
        }
    }

    pub fn dim(&self) -> Dim {
        match self {
            Domain::Interval { .. } => Dim::One,
            Domain::Disk { .. } => Dim::Two,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Domain::Interval { lo, hi } => p[0] >= lo && p[0] <= hi,
            Domain::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                (dx * dx + dy * dy).sqrt() <= radius * (1.0 + 1e-12)
            }
        }
    }
}

/// One instance of the `l0` problem.
#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub measurements: MeasurementSet,
    pub illum_mode: IllumMode,
    pub domain: Domain,
    /// Feasibility tolerance; defaults to the measurement noise level.
    pub sigma: f64,
    pub grid_pitch: f64,
    pub max_sparsity: usize,
    /// Re-evaluable source for the same frames, needed when projections must
    /// sample frequencies that the stored grid does not contain.
    pub field: Option<FrameField>,
}

impl RecoveryProblem {
    pub fn new(
        measurements: MeasurementSet,
        illum_mode: IllumMode,
        domain: Domain,
        grid_pitch: f64,
        max_sparsity: usize,
    ) -> Result<Self> {
        if domain.dim() != measurements.grid.dim {
            return Err(Error::DimensionMismatch("domain and measurement dimensions differ".into()));
        }
        if let IllumMode::Known(set) | IllumMode::Approximated { patterns: set, .. } = &illum_mode {
            if set.dim() != measurements.grid.dim {
                return Err(Error::DimensionMismatch("illumination dimension differs".into()));
            }
            if set.frames() != measurements.frame_count() {
                return Err(Error::invalid("one pattern per frame required"));
            }
        }
        if !(grid_pitch > 0.0) {
            return Err(Error::invalid("grid pitch must be positive"));
        }
        if max_sparsity > 6 {
            return Err(Error::invalid("the exhaustive solver supports max_sparsity ≤ 6"));
        }
        let sigma = measurements.sigma;
        Ok(RecoveryProblem {
            measurements,
            illum_mode,
            domain,
            sigma,
            grid_pitch,
            max_sparsity,
            field: None,
        })
    }

    /// Override the feasibility tolerance (for noiseless data, σ is the
    /// accuracy at which a candidate counts as consistent).
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid("feasibility tolerance must be positive"));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn with_field(mut self, field: FrameField) -> Self {
        self.field = Some(field);
        self
    }

    fn frames(&self) -> usize {
        self.measurements.frame_count()
    }

    /// Candidate location grid in deterministic lexicographic order.
    fn location_grid(&self) -> Vec<[f64; 2]> {
        match self.domain {
            Domain::Interval { lo, hi } => {
                let mut out = Vec::new();
                let mut x = lo;
                while x <= hi + 1e-12 * self.grid_pitch {
                    out.push([x.min(hi), 0.0]);
                    x += self.grid_pitch;
                }
                out
            }
            Domain::Disk { center, radius } => {
                let mut out = Vec::new();
                let steps = (2.0 * radius / self.grid_pitch).ceil() as i64;
                for ix in 0..=steps {
                    let x = center[0] - radius + ix as f64 * self.grid_pitch;
                    for iy in 0..=steps {
                        let y = center[1] - radius + iy as f64 * self.grid_pitch;
                        if self.domain.contains([x, y]) {
                            out.push([x, y]);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// The sparsest feasible measure (empty when infeasible).
    pub measure: DiscreteMeasure,
    /// Atom count of the solution; `max_sparsity + 1` signals infeasibility.
    pub sparsity: usize,
    pub per_frame_residuals: Vec<f64>,
    /// `T×k` per-frame effective amplitudes: `Î_t(ŷⱼ)·âⱼ` in the known and
    /// approximated modes, the free per-frame fits in unknown mode.
    pub effective_amplitudes: CMat,
    /// (refinement pass, worst-frame residual) pairs for the winning support.
    pub refinement_trace: Vec<(usize, f64)>,
    pub feasible: bool,
    /// Human-readable notes: skipped ill-conditioned supports, beam fallback.
    pub solve_log: Vec<String>,
}

#[derive(Debug, Clone)]
struct Fit {
    effective: CMat,
    shared: Vec<Complex64>,
    residuals: Vec<f64>,
    max_residual: f64,
}

fn residuals_of(
    points: &[[f64; 2]],
    effective: &CMat,
    ms: &MeasurementSet,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ms.frame_count());
    for (t, data) in ms.frames.iter().enumerate() {
        let diff: Vec<Complex64> = ms
            .grid
            .nodes
            .iter()
            .zip(data)
            .map(|(&w, &y)| fourier_sum(points, effective.row(t), w) - y)
            .collect();
        out.push(frame_norm(&diff, ms.norm_mode)?);
    }
    Ok(out)
}

/// Fit amplitudes on a fixed support. `Ok(None)` means the support was
/// skipped for conditioning.
fn fit_support(problem: &RecoveryProblem, points: &[[f64; 2]]) -> Result<Option<Fit>> {
    let k = points.len();
    let ms = &problem.measurements;
    let t_frames = problem.frames();
    let nodes = &ms.grid.nodes;
    let m = nodes.len();

    if k == 0 {
        let effective = CMat::zeros(t_frames, 0);
        let residuals = residuals_of(points, &effective, ms)?;
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        return Ok(Some(Fit {
            effective,
            shared: Vec::new(),
            residuals,
            max_residual,
        }));
    }

    let phase_block = |out: &mut CMat, row0: usize, weights: Option<&[Complex64]>| {
        for (l, &w) in nodes.iter().enumerate() {
            for (j, &p) in points.iter().enumerate() {
                let e = Complex64::from_polar(1.0, p[0] * w[0] + p[1] * w[1]);
                out[(row0 + l, j)] = match weights {
                    Some(ws) => ws[j] * e,
                    None => e,
                };
            }
        }
    };

    match &problem.illum_mode {
        IllumMode::Known(set) | IllumMode::Approximated { patterns: set, .. } => {
            let mut weights = CMat::zeros(t_frames, k);
            for t in 0..t_frames {
                for (j, &p) in points.iter().enumerate() {
                    weights[(t, j)] = set.eval(t, p)?;
                }
            }
            let mut design = CMat::zeros(t_frames * m, k);
            let mut rhs = Vec::with_capacity(t_frames * m);
            for t in 0..t_frames {
                phase_block(&mut design, t * m, Some(weights.row(t)));
                rhs.extend_from_slice(&ms.frames[t]);
            }
            if condition_number(&design) > CONDITION_LIMIT {
                return Ok(None);
            }
            let shared = match lstsq(&design, &rhs) {
                Some(x) => x,
                None => return Ok(None),
            };
            let mut effective = CMat::zeros(t_frames, k);
            for t in 0..t_frames {
                for j in 0..k {
                    effective[(t, j)] = weights[(t, j)] * shared[j];
                }
            }
            let residuals = residuals_of(points, &effective, ms)?;
            let max_residual = residuals.iter().copied().fold(0.0, f64::max);
            Ok(Some(Fit {
                effective,
                shared,
                residuals,
                max_residual,
            }))
        }
        IllumMode::Unknown => {
            let mut design = CMat::zeros(m, k);
            phase_block(&mut design, 0, None);
            if condition_number(&design) > CONDITION_LIMIT {
                return Ok(None);
            }
            let mut effective = CMat::zeros(t_frames, k);
            for t in 0..t_frames {
                let a_t = match lstsq(&design, &ms.frames[t]) {
                    Some(x) => x,
                    None => return Ok(None),
                };
                for j in 0..k {
                    effective[(t, j)] = a_t[j];
                }
            }
            // Representative shared amplitude: largest across frames.
            let shared = (0..k)
                .map(|j| {
                    (0..t_frames)
                        .map(|t| effective[(t, j)])
                        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
                        .unwrap()
                })
                .collect();
            let residuals = residuals_of(points, &effective, ms)?;
            let max_residual = residuals.iter().copied().fold(0.0, f64::max);
            Ok(Some(Fit {
                effective,
                shared,
                residuals,
                max_residual,
            }))
        }
    }
}

/// In the known/approximated modes the per-frame free fit can only improve
/// each frame's RMS residual over the joint fit; checked while testing.
#[cfg(debug_assertions)]
fn assert_free_fit_dominates(problem: &RecoveryProblem, points: &[[f64; 2]], joint: &Fit) {
    if points.is_empty()
        || problem.measurements.norm_mode != NormMode::Rms
        || matches!(problem.illum_mode, IllumMode::Unknown)
    {
        return;
    }
    let free_problem = RecoveryProblem {
        illum_mode: IllumMode::Unknown,
        ..problem.clone()
    };
    if let Ok(Some(free)) = fit_support(&free_problem, points) {
        for (t, (f, j)) in free.residuals.iter().zip(&joint.residuals).enumerate() {
            debug_assert!(
                f <= &(j + 1e-9),
                "frame {t}: free fit residual {f} exceeds joint fit residual {j}"
            );
        }
    }
}

fn combinations_count(n: usize, k: usize) -> u128 {
    let mut num: u128 = 1;
    for i in 0..k {
        num = num.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    num
}

fn enumerate_combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        // Advance the combination odometer.
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] + (k - pos) <= n - 1 {
                idx[pos] += 1;
                for q in pos + 1..k {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Score every candidate support in parallel and keep the best few by
/// (worst-frame residual, lexicographic support order).
fn best_supports(
    problem: &RecoveryProblem,
    grid: &[[f64; 2]],
    supports: &[Vec<usize>],
    keep: usize,
) -> Result<(Vec<(f64, Vec<usize>)>, usize)> {
    let scored: Vec<std::result::Result<Option<(f64, Vec<usize>)>, Error>> = supports
        .par_iter()
        .map(|support| {
            let points: Vec<[f64; 2]> = support.iter().map(|&i| grid[i]).collect();
            match fit_support(problem, &points) {
                Ok(Some(fit)) if fit.max_residual.is_finite() => {
                    Ok(Some((fit.max_residual, support.clone())))
                }
                Ok(_) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut kept = Vec::new();
    let mut skipped = 0usize;
    for s in scored {
        match s? {
            Some(pair) => kept.push(pair),
            None => skipped += 1,
        }
    }
    kept.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| a.1.cmp(&b.1))
    });
    // Keep the list spatially diverse: index-adjacent supports refine into
    // the same basin, so they would waste polish slots.
    let mut diverse: Vec<(f64, Vec<usize>)> = Vec::with_capacity(keep);
    for cand in kept {
        let adjacent = diverse.iter().any(|(_, s)| {
            s.len() == cand.1.len() && s.iter().zip(&cand.1).all(|(&a, &b)| a.abs_diff(b) <= 1)
        });
        if !adjacent {
            diverse.push(cand);
            if diverse.len() == keep {
                break;
            }
        }
    }
    Ok((diverse, skipped))
}

/// Matching-pursuit chain: greedily append the grid node that most reduces
/// the worst-frame residual.
fn matching_pursuit(problem: &RecoveryProblem, grid: &[[f64; 2]], k: usize) -> Result<Vec<Vec<usize>>> {
    let mut chain: Vec<usize> = Vec::new();
    let mut prefixes = Vec::new();
    for _ in 0..k {
        let candidates: Vec<Vec<usize>> = (0..grid.len())
            .filter(|i| !chain.contains(i))
            .map(|i| {
                let mut s = chain.clone();
                s.push(i);
                s.sort_unstable();
                s
            })
            .collect();
        let (best, _) = best_supports(problem, grid, &candidates, 1)?;
        match best.into_iter().next() {
            Some((_, support)) => {
                chain = support;
                prefixes.push(chain.clone());
            }
            None => break,
        }
    }
    Ok(prefixes)
}

/// Beam search over supports of size `k`, seeded by the matching-pursuit
/// chain.
fn beam_search(problem: &RecoveryProblem, grid: &[[f64; 2]], k: usize) -> Result<Vec<Vec<usize>>> {
    let mut beam: Vec<Vec<usize>> = (0..grid.len()).map(|i| vec![i]).collect();
    let (kept, _) = best_supports(problem, grid, &beam, BEAM_WIDTH)?;
    beam = kept.into_iter().map(|(_, s)| s).collect();
    for _level in 1..k {
        let mut extensions: Vec<Vec<usize>> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for member in &beam {
            for i in 0..grid.len() {
                if member.contains(&i) {
                    continue;
                }
                let mut s = member.clone();
                s.push(i);
                s.sort_unstable();
                if seen.insert(s.clone()) {
                    extensions.push(s);
                }
            }
        }
        let (kept, _) = best_supports(problem, grid, &extensions, BEAM_WIDTH)?;
        beam = kept.into_iter().map(|(_, s)| s).collect();
        if beam.is_empty() {
            break;
        }
    }
    let mut out = beam;
    for prefix in matching_pursuit(problem, grid, k)? {
        if prefix.len() == k && !out.contains(&prefix) {
            out.push(prefix);
        }
    }
    Ok(out)
}

/// Coordinate descent on the atom locations, re-fitting amplitudes at every
/// trial move. Besides single-atom moves the sweep tries translating the
/// whole support (the translation direction is only weakly pinned by the
/// data, which makes it a steep coupled valley that per-atom moves cannot
/// follow). Only strict improvements of the worst-frame residual are
/// accepted, so the objective never increases.
fn refine(
    problem: &RecoveryProblem,
    mut points: Vec<[f64; 2]>,
    mut fit: Fit,
) -> Result<(Vec<[f64; 2]>, Fit, Vec<(usize, f64)>)> {
    let axes = problem.domain.dim().as_usize();
    let mut step = problem.grid_pitch / 2.0;
    let min_step = problem.grid_pitch * 1e-10;
    let mut trace = vec![(0usize, fit.max_residual)];

    for pass in 1..=500usize {
        let before = fit.max_residual;
        // Whole-support translations, one per axis and sign.
        for axis in 0..axes {
            for dir in [1.0, -1.0] {
                let cand: Vec<[f64; 2]> = points
                    .iter()
                    .map(|p| {
                        let mut q = *p;
                        q[axis] += dir * step;
                        q
                    })
                    .collect();
                if !cand.iter().all(|&p| problem.domain.contains(p)) {
                    continue;
                }
                if let Some(better) = fit_support(problem, &cand)? {
                    if better.max_residual < fit.max_residual {
                        points = cand;
                        fit = better;
                        break;
                    }
                }
            }
        }
        // Per-atom coordinate moves.
        for atom in 0..points.len() {
            for axis in 0..axes {
                for dir in [1.0, -1.0] {
                    let mut cand = points.clone();
                    cand[atom][axis] += dir * step;
                    if !problem.domain.contains(cand[atom]) {
                        continue;
                    }
                    if cand.iter().enumerate().any(|(i, p)| i != atom && *p == cand[atom]) {
                        continue;
                    }
                    if let Some(better) = fit_support(problem, &cand)? {
                        if better.max_residual < fit.max_residual {
                            points = cand;
                            fit = better;
                            break;
                        }
                    }
                }
            }
        }
        trace.push((pass, fit.max_residual));
        if before - fit.max_residual < 1e-10 {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }
    Ok((points, fit, trace))
}

/// Simplex polish for stalled refinements: Nelder-Mead over the flattened
/// location vector (amplitudes re-fitted inside the objective), followed by
/// another coordinate-descent pass. Used only when the coordinate descent
/// bottoms out above the feasibility threshold; the simplex tracks coupled
/// valleys that axis-aligned moves cannot.
fn polish_simplex(
    problem: &RecoveryProblem,
    points: Vec<[f64; 2]>,
    fit: Fit,
) -> Result<(Vec<[f64; 2]>, Fit, Vec<(usize, f64)>)> {
    let axes = problem.domain.dim().as_usize();
    let k = points.len();
    if k == 0 {
        return Ok((points, fit, Vec::new()));
    }
    let flatten = |pts: &[[f64; 2]]| -> Vec<f64> {
        pts.iter().flat_map(|p| p[..axes].to_vec()).collect()
    };
    let unflatten = |x: &[f64]| -> Vec<[f64; 2]> {
        (0..k)
            .map(|j| {
                let mut p = [0.0, 0.0];
                for a in 0..axes {
                    p[a] = x[j * axes + a];
                }
                p
            })
            .collect()
    };
    let objective = |x: &[f64]| -> f64 {
        let pts = unflatten(x);
        if !pts.iter().all(|&p| problem.domain.contains(p)) {
            return f64::INFINITY;
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[i] == pts[j] {
                    return f64::INFINITY;
                }
            }
        }
        match fit_support(problem, &pts) {
            Ok(Some(f)) => f.max_residual,
            _ => f64::INFINITY,
        }
    };
    let dims = k * axes;
    let (val, best_x) = crate::vandermonde::nelder_mead(
        &objective,
        &flatten(&points),
        problem.grid_pitch / 3.0,
        (220 * dims).max(400),
    );
    if !val.is_finite() || val >= fit.max_residual {
        return Ok((points, fit, Vec::new()));
    }
    let pts = unflatten(&best_x);
    let polished = fit_support(problem, &pts)?.ok_or_else(|| {
        Error::RankDeficient("simplex polish landed on an ill-conditioned support".into())
    })?;
    refine(problem, pts, polished)
}

fn infeasible_result(problem: &RecoveryProblem, log: Vec<String>) -> Result<RecoveryResult> {
    let empty = DiscreteMeasure::empty(problem.domain.dim());
    let effective = CMat::zeros(problem.frames(), 0);
    let residuals = residuals_of(empty.points(), &effective, &problem.measurements)?;
    Ok(RecoveryResult {
        measure: empty,
        sparsity: problem.max_sparsity + 1,
        per_frame_residuals: residuals,
        effective_amplitudes: effective,
        refinement_trace: Vec::new(),
        feasible: false,
        solve_log: log,
    })
}

/// Solve the `l0` problem: smallest `k ≤ max_sparsity` admitting a candidate
/// with every per-frame residual strictly below σ.
pub fn solve_l0(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    if !(problem.sigma > 0.0) {
        return Err(Error::invalid(
            "feasibility tolerance must be positive (set with_sigma for noiseless data)",
        ));
    }
    let threshold = problem.sigma * FEASIBILITY_MARGIN;
    let grid = problem.location_grid();
    let mut log = Vec::new();
    if grid.is_empty() {
        log.push("location grid is empty".into());
        return infeasible_result(problem, log);
    }

    for k in 0..=problem.max_sparsity {
        if k == 0 {
            let fit = fit_support(problem, &[])?.expect("empty support always fits");
            if fit.max_residual <= threshold {
                return Ok(RecoveryResult {
                    measure: DiscreteMeasure::empty(problem.domain.dim()),
                    sparsity: 0,
                    per_frame_residuals: fit.residuals,
                    effective_amplitudes: fit.effective,
                    refinement_trace: Vec::new(),
                    feasible: true,
                    solve_log: log,
                });
            }
            continue;
        }
        if k > grid.len() {
            break;
        }

        let supports: Vec<Vec<usize>> = if k <= 3 && combinations_count(grid.len(), k) <= EXHAUSTIVE_CAP
        {
            enumerate_combinations(grid.len(), k)
        } else {
            log.push(format!("k={k}: beam search over {} grid nodes", grid.len()));
            beam_search(problem, &grid, k)?
        };
        let (kept, skipped) = best_supports(problem, &grid, &supports, REFINE_CANDIDATES)?;
        if skipped > 0 {
            log.push(format!("k={k}: skipped {skipped} ill-conditioned supports"));
        }

        let mut refined: Vec<(Vec<[f64; 2]>, Fit, Vec<(usize, f64)>)> = Vec::new();
        for (_, support) in kept {
            let points: Vec<[f64; 2]> = support.iter().map(|&i| grid[i]).collect();
            let fit = match fit_support(problem, &points)? {
                Some(f) => f,
                None => continue,
            };
            refined.push(refine(problem, points, fit)?);
        }
        refined.sort_by(|a, b| a.1.max_residual.partial_cmp(&b.1.max_residual).unwrap());

        // When the coordinate descent bottoms out above the threshold,
        // simplex-polish the best few stalls before giving up on this k.
        if refined
            .first()
            .map_or(false, |(_, f, _)| f.max_residual > threshold)
        {
            let mut polished = Vec::new();
            for (pts, fit, _) in refined.iter().take(3) {
                polished.push(polish_simplex(problem, pts.clone(), fit.clone())?);
            }
            refined.extend(polished);
            refined.sort_by(|a, b| a.1.max_residual.partial_cmp(&b.1.max_residual).unwrap());
        }
        let best = refined.into_iter().next();

        if let Some((points, fit, trace)) = best {
            if fit.max_residual <= threshold {
                #[cfg(debug_assertions)]
                assert_free_fit_dominates(problem, &points, &fit);
                let measure = match problem.domain.dim() {
                    Dim::One => {
                        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
                        DiscreteMeasure::new_1d(&xs, &fit.shared)
                    }
                    Dim::Two => DiscreteMeasure::new_2d(&points, &fit.shared),
                };
                let measure = match measure {
                    Ok(m) => m,
                    Err(e) => {
                        // A degenerate fit (zero amplitude) collapses to a
                        // smaller support already covered; skip this k.
                        log.push(format!("k={k}: winning fit rejected ({e})"));
                        continue;
                    }
                };
                return Ok(RecoveryResult {
                    measure,
                    sparsity: k,
                    per_frame_residuals: fit.residuals,
                    effective_amplitudes: fit.effective,
                    refinement_trace: trace,
                    feasible: true,
                    solve_log: log,
                });
            }
        }
    }
    infeasible_result(problem, log)
}

/// Residuals and effective amplitudes of the best amplitude fit on a fixed
/// support, without any search or refinement.
#[derive(Debug, Clone)]
pub struct SupportEvaluation {
    pub per_frame_residuals: Vec<f64>,
    pub max_residual: f64,
    /// `T×k` per-frame effective amplitudes.
    pub effective: CMat,
}

/// Fit amplitudes on the given support under the problem's illumination mode
/// and report the per-frame residuals. `None` when the support is skipped for
/// conditioning.
pub fn evaluate_support(
    problem: &RecoveryProblem,
    points: &[[f64; 2]],
) -> Result<Option<SupportEvaluation>> {
    Ok(fit_support(problem, points)?.map(|fit| SupportEvaluation {
        per_frame_residuals: fit.residuals,
        max_residual: fit.max_residual,
        effective: fit.effective,
    }))
}

/// Exact minimum-total-distance assignment between equal-sized atom sets.
#[derive(Debug, Clone)]
pub struct Matching {
    /// `permutation[i]` is the recovered-atom index assigned to truth atom `i`.
    pub permutation: Vec<usize>,
    pub deviations: Vec<f64>,
}

fn atom_distance(a: [f64; 2], b: [f64; 2], metric: Metric) -> Result<f64> {
    match metric {
        Metric::Euclidean => {
            let dx = a[0] - b[0];
            let dy = a[1] - b[1];
            Ok((dx * dx + dy * dy).sqrt())
        }
        Metric::Wrapped(period) => crate::measure::wrapped_distance(a[0], b[0], period),
    }
}

/// Minimum-cost bipartite matching by exhaustive permutation search — exact
/// at the atom counts this crate works with.
pub fn match_supports(
    truth: &DiscreteMeasure,
    recovered: &DiscreteMeasure,
    metric: Metric,
) -> Result<Matching> {
    let n = truth.len();
    if recovered.len() != n {
        return Err(Error::invalid(format!(
            "atom counts differ: {n} vs {}",
            recovered.len()
        )));
    }
    if n == 0 {
        return Ok(Matching {
            permutation: Vec::new(),
            deviations: Vec::new(),
        });
    }
    if n > 8 {
        return Err(Error::invalid("matching supports up to 8 atoms"));
    }
    let mut cost = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            cost[i][j] = atom_distance(truth.points()[i], recovered.points()[j], metric)?;
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best_perm = perm.clone();
    let mut best_cost = f64::INFINITY;
    // Heap's algorithm over all permutations.
    let mut c = vec![0usize; n];
    let eval = |p: &[usize], best_cost: &mut f64, best_perm: &mut Vec<usize>| {
        let total: f64 = p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if total < *best_cost {
            *best_cost = total;
            best_perm.copy_from_slice(p);
        }
    };
    eval(&perm, &mut best_cost, &mut best_perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            eval(&perm, &mut best_cost, &mut best_perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let deviations = best_perm
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .collect();
    Ok(Matching {
        permutation: best_perm,
        deviations,
    })
}

/// Outcome of checking a recovery against a stability theorem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremCertificate {
    pub mode: TheoremMode,
    /// Hypotheses (separation, noise-to-signal ratio) did not hold; nothing
    /// is claimed either way.
    pub vacuous: bool,
    /// All matched deviations beat both `d_min/2` and the error bound.
    pub passed: bool,
    pub sigma_inf_min: f64,
    pub d_min: f64,
    pub separation_threshold: f64,
    pub half_dmin: f64,
    pub error_bound: f64,
    pub deviations: Vec<f64>,
    /// Worst-case slack `error_bound − deviation` over atoms.
    pub slack: f64,
}

/// Check a recovered measure against the stability theorem for `mode`,
/// using the illumination matrix of the *true* configuration.
pub fn certify_against_theorem(
    truth: &DiscreteMeasure,
    recovered: &DiscreteMeasure,
    illum_matrix: &crate::illumination::IlluminationMatrix,
    sigma: f64,
    cutoff: f64,
    mode: TheoremMode,
    c0: f64,
) -> Result<TheoremCertificate> {
    let n = truth.len();
    if n == 0 {
        return Err(Error::invalid("certification needs a nonempty truth"));
    }
    let m_min = truth.min_amplitude()?;
    let sim = sigma_inf_min(&illum_matrix.entries, 1e-8)?.value;
    let metric = match mode {
        TheoremMode::Wrapped1d => Metric::Wrapped(n as f64 * std::f64::consts::PI / cutoff),
        _ => Metric::Euclidean,
    };
    let d_min = if n >= 2 {
        truth.separation(metric)?
    } else {
        f64::INFINITY
    };
    let sep = bounds::threshold(mode, n, cutoff, sigma, m_min, sim, c0)?;
    let hypothesis = !sep.vacuous && d_min >= sep.value;
    let err = bounds::location_error_bound(mode, n, cutoff, d_min, sigma, m_min, sim, c0)?;

    if !hypothesis {
        return Ok(TheoremCertificate {
            mode,
            vacuous: true,
            passed: false,
            sigma_inf_min: sim,
            d_min,
            separation_threshold: sep.value,
            half_dmin: d_min / 2.0,
            error_bound: err.value,
            deviations: Vec::new(),
            slack: f64::NAN,
        });
    }

    if recovered.len() != n {
        return Ok(TheoremCertificate {
            mode,
            vacuous: false,
            passed: false,
            sigma_inf_min: sim,
            d_min,
            separation_threshold: sep.value,
            half_dmin: d_min / 2.0,
            error_bound: err.value,
            deviations: Vec::new(),
            slack: f64::NAN,
        });
    }

    let matching = match_supports(truth, recovered, metric)?;
    let half = d_min / 2.0;
    let passed = matching
        .deviations
        .iter()
        .all(|&d| d < half && d < err.value);
    let slack = matching
        .deviations
        .iter()
        .map(|&d| err.value - d)
        .fold(f64::INFINITY, f64::min);
    Ok(TheoremCertificate {
        mode,
        vacuous: false,
        passed,
        sigma_inf_min: sim,
        d_min,
        separation_threshold: sep.value,
        half_dmin: half,
        error_bound: err.value,
        deviations: matching.deviations,
        slack,
    })
}

/// Restrict a 2D problem to the line spanned by the unit vector `v`: sample
/// the frames at `ω = w·v` for the scalar nodes `w` of `base`, which equals
/// the 1D transform of the projected measure. Existing grid nodes are reused
/// when they match; otherwise the frames must be re-evaluable through the
/// attached [`FrameField`].
pub fn project_problem_1d(
    problem: &RecoveryProblem,
    v: [f64; 2],
    base: &FrequencyGrid,
) -> Result<RecoveryProblem> {
    if problem.domain.dim() != Dim::Two {
        return Err(Error::DimensionMismatch("projection needs a 2D problem".into()));
    }
    if base.dim != Dim::One {
        return Err(Error::DimensionMismatch("base grid must be 1D".into()));
    }
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("direction must be a unit vector"));
    }

    let ms = &problem.measurements;
    let mut frames: Vec<Vec<Complex64>> = vec![Vec::with_capacity(base.len()); ms.frame_count()];
    for &w in &base.nodes {
        let node2 = [w[0] * v[0], w[0] * v[1]];
        let existing = ms
            .grid
            .nodes
            .iter()
            .position(|&g| (g[0] - node2[0]).abs() < 1e-12 && (g[1] - node2[1]).abs() < 1e-12);
        match (existing, &problem.field) {
            (Some(l), _) => {
                for (t, frame) in frames.iter_mut().enumerate() {
                    frame.push(ms.frames[t][l]);
                }
            }
            (None, Some(field)) => {
                for (t, frame) in frames.iter_mut().enumerate() {
                    frame.push(field.eval(t, node2)?);
                }
            }
            (None, None) => {
                return Err(Error::invalid(format!(
                    "node {node2:?} not in the sampled grid and the frames are not re-evaluable"
                )))
            }
        }
    }

    let (center, radius) = match problem.domain {
        Domain::Disk { center, radius } => (center, radius),
        Domain::Interval { .. } => unreachable!("2D problems have disk domains"),
    };
    let c_proj = center[0] * v[0] + center[1] * v[1];
    let projected = MeasurementSet {
        grid: base.clone(),
        frames,
        sigma: problem.sigma,
        norm_mode: ms.norm_mode,
    };
    // Per-frame amplitudes of the projected measure are I_t(yⱼ)aⱼ at the
    // projected locations: exactly the unknown-illumination formulation.
    RecoveryProblem::new(
        projected,
        IllumMode::Unknown,
        Domain::Interval {
            lo: c_proj - radius,
            hi: c_proj + radius,
        },
        problem.grid_pitch,
        problem.max_sparsity,
    )
}
