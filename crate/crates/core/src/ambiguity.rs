//! Spatio-temporal ambiguity functions.
//!
//! Three variants measure how similar the signal at the true structural
//! parameters `μ` is to the signal at test parameters `μ′`:
//!
//! * single polarization: the normalized inner product of basis vectors;
//! * general polarimetric: principal angles between the 4-dimensional
//!   column spaces of the polarimetric basis matrices;
//! * high XPR: the mean of the four per-polarization-pair magnitudes, which
//!   equals the general form when every element is perfectly polarized.
//!
//! [`AmbiguityObjective`] integrates `|X|^𝒫` over true × test angles and the
//! Doppler offset with a midpoint rule. Only `ν − ν′` matters, so the true
//! Doppler is pinned to zero and the offset axis spans `[-ν_up, ν_up]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{ArrayModel, Polarization, DEFAULT_XPR_DB};
use crate::linalg::{midpoints, norm, pairwise_sum};
use crate::signal::{basis_matrix_polarimetric_with, SoundingConfig, POLARIZATION_PAIRS};
use crate::{Error, Result};

pub use crate::signal::StructuralParams;

/// Relative tolerance below which a QR diagonal entry counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Default tuning exponent.
pub const DEFAULT_EXPONENT: f64 = 6.0;

/// Discretization of the integration region.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityGrid {
    pub azimuth_tx: usize,
    pub elevation_tx: usize,
    pub azimuth_rx: usize,
    pub elevation_rx: usize,
    pub doppler: usize,
    /// Half-width of the Doppler offset range; `None` means `1/(2·dt)`.
    pub doppler_bound: Option<f64>,
    pub exponent: f64,
}

impl Default for AmbiguityGrid {
    fn default() -> Self {
        Self {
            azimuth_tx: 36,
            elevation_tx: 1,
            azimuth_rx: 1,
            elevation_rx: 1,
            doppler: 32,
            doppler_bound: None,
            exponent: DEFAULT_EXPONENT,
        }
    }
}

impl AmbiguityGrid {
    pub fn validate(&self) -> Result<()> {
        let counts = [self.azimuth_tx, self.elevation_tx, self.azimuth_rx, self.elevation_rx, self.doppler];
        if counts.contains(&0) {
            return Err(Error::InvalidParameter("ambiguity grid counts must be ≥ 1".into()));
        }
        if let Some(b) = self.doppler_bound {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidParameter(format!("Doppler bound must be positive, got {b}")));
            }
        }
        if !(self.exponent >= 1.0 && self.exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent must be ≥ 1, got {}", self.exponent)));
        }
        Ok(())
    }

    pub fn doppler_bound_for(&self, dt: f64) -> f64 {
        self.doppler_bound.unwrap_or(1.0 / (2.0 * dt))
    }

    /// Integration weight of one (true, test, offset) cell.
    pub fn cell_measure(&self, dt: f64) -> f64 {
        let az = 2.0 * PI;
        let el = PI;
        let angle_cell = (az / self.azimuth_tx as f64).powi(2)
            * (el / self.elevation_tx as f64).powi(2)
            * (az / self.azimuth_rx as f64).powi(2)
            * (el / self.elevation_rx as f64).powi(2);
        angle_cell * 2.0 * self.doppler_bound_for(dt) / self.doppler as f64
    }

    /// Midpoint angle tuples `(φ_T, ϑ_T, φ_R, ϑ_R)` in row-major order.
    pub fn angle_tuples(&self) -> Vec<[f64; 4]> {
        let apt = midpoints(0.0, 2.0 * PI, self.azimuth_tx);
        let ept = midpoints(0.0, PI, self.elevation_tx);
        let apr = midpoints(0.0, 2.0 * PI, self.azimuth_rx);
        let epr = midpoints(0.0, PI, self.elevation_rx);
        let mut out = Vec::with_capacity(apt.len() * ept.len() * apr.len() * epr.len());
        for &a in &apt {
            for &b in &ept {
                for &c in &apr {
                    for &d in &epr {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    }

    pub fn doppler_offsets(&self, dt: f64) -> Vec<f64> {
        let up = self.doppler_bound_for(dt);
        midpoints(-up, up, self.doppler)
    }
}

/// Normalized inner product of the single-polarization basis vectors.
pub fn ambiguity_single_pol(
    mu: &StructuralParams,
    mu_test: &StructuralParams,
    eta: &[f64],
    cfg: &SoundingConfig,
) -> Result<Complex64> {
    let b = cfg.basis_vector(mu, eta)?;
    let b2 = cfg.basis_vector(mu_test, eta)?;
    normalized_inner(&b, &b2)
}

fn normalized_inner(a: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok(crate::linalg::inner(a, b) / (na * nb))
}

/// Similarity measures derived from the principal angles between two
/// 4-dimensional subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceSimilarity {
    /// Cosines of the principal angles, descending, clamped to `[0, 1]`.
    pub singular_values: [f64; 4],
}

impl SubspaceSimilarity {
    fn from_cross(m: &Matrix4<Complex64>) -> Self {
        let sv = m.singular_values();
        let mut s = [0.0; 4];
        for (dst, v) in s.iter_mut().zip(sv.iter()) {
            *dst = v.clamp(0.0, 1.0);
        }
        s.sort_by(|a, b| b.total_cmp(a));
        Self { singular_values: s }
    }

    /// `(1/4)·Σσ_i`, the polarimetric ambiguity.
    pub fn s1(&self) -> f64 {
        self.singular_values.iter().sum::<f64>() / 4.0
    }

    /// `(1/4)·(Σσ_i²)^{1/2}`; at most 1/2.
    pub fn s2(&self) -> f64 {
        self.singular_values.iter().map(|s| s * s).sum::<f64>().sqrt() / 4.0
    }

    /// `(1/4)·(Σ arccos²σ_i)^{1/2}`, the normalized Grassmann distance.
    pub fn d2(&self) -> f64 {
        self.singular_values.iter().map(|s| s.acos().powi(2)).sum::<f64>().sqrt() / 4.0
    }
}

/// Orthonormal basis of the column space of an `N × 4` matrix (thin QR).
pub fn orthonormal_basis(b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let rank = numerical_rank(b);
    if rank < 4 {
        return Err(Error::RankDeficient { rank });
    }
    Ok(b.clone().qr().q())
}

fn numerical_rank(b: &DMatrix<Complex64>) -> usize {
    if b.nrows() < b.ncols() {
        return b.nrows().min(rank_of_r(&b.clone().qr().r()));
    }
    rank_of_r(&b.clone().qr().r())
}

fn rank_of_r(r: &DMatrix<Complex64>) -> usize {
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].norm()).collect();
    let scale = diag.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > RANK_TOLERANCE * scale).count()
}

/// Principal-angle similarity between the polarimetric subspaces at `μ`
/// and `μ′`, using the configured sequence.
pub fn polarimetric_similarity(
    mu: &StructuralParams,
    mu_test: &StructuralParams,
    cfg: &SoundingConfig,
) -> Result<SubspaceSimilarity> {
    polarimetric_similarity_with(mu, mu_test, cfg.sequence().eta(), cfg)
}

pub fn polarimetric_similarity_with(
    mu: &StructuralParams,
    mu_test: &StructuralParams,
    eta: &[f64],
    cfg: &SoundingConfig,
) -> Result<SubspaceSimilarity> {
    let q = orthonormal_basis(&basis_matrix_polarimetric_with(mu, cfg, eta)?)?;
    let q2 = orthonormal_basis(&basis_matrix_polarimetric_with(mu_test, cfg, eta)?)?;
    let cross = q.adjoint() * q2;
    let m = Matrix4::from_fn(|i, j| cross[(i, j)]);
    Ok(SubspaceSimilarity::from_cross(&m))
}

/// General polarimetric ambiguity `(1/4)·Σσ_i`.
pub fn ambiguity_polarimetric_general(
    mu: &StructuralParams,
    mu_test: &StructuralParams,
    cfg: &SoundingConfig,
) -> Result<f64> {
    Ok(polarimetric_similarity(mu, mu_test, cfg)?.s1())
}

/// Whether the high-XPR precondition is verified before evaluating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XprCheck {
    Enforce { threshold_db: f64 },
    Skip,
}

impl Default for XprCheck {
    fn default() -> Self {
        XprCheck::Enforce { threshold_db: DEFAULT_XPR_DB }
    }
}

fn check_xpr_at(cfg: &SoundingConfig, mus: &[&StructuralParams], threshold_db: f64) -> Result<()> {
    let tx: Vec<(f64, f64)> = mus.iter().map(|m| (m.azimuth_tx, m.elevation_tx)).collect();
    let rx: Vec<(f64, f64)> = mus.iter().map(|m| (m.azimuth_rx, m.elevation_rx)).collect();
    if cfg.tx().is_high_xpr(&tx, threshold_db)? && cfg.rx().is_high_xpr(&rx, threshold_db)? {
        Ok(())
    } else {
        Err(Error::XprPrecondition { threshold_db })
    }
}

/// High-XPR polarimetric ambiguity `(1/4)·Σ|X_i|` over the four
/// polarization pairs. With [`XprCheck::Enforce`] both arrays must pass the
/// XPR test at the angles of `μ` and `μ′`.
pub fn ambiguity_polarimetric_xpr(
    mu: &StructuralParams,
    mu_test: &StructuralParams,
    cfg: &SoundingConfig,
    check: XprCheck,
) -> Result<f64> {
    ambiguity_polarimetric_xpr_with(mu, mu_test, cfg.sequence().eta(), cfg, check)
}

pub fn ambiguity_polarimetric_xpr_with(
    mu: &StructuralParams,
    mu_test: &StructuralParams,
    eta: &[f64],
    cfg: &SoundingConfig,
    check: XprCheck,
) -> Result<f64> {
    if let XprCheck::Enforce { threshold_db } = check {
        check_xpr_at(cfg, &[mu, mu_test], threshold_db)?;
    }
    let mut total = 0.0;
    for (tp, rp) in POLARIZATION_PAIRS {
        let b = cfg.basis_vector_pol(mu, eta, tp, rp)?;
        let b2 = cfg.basis_vector_pol(mu_test, eta, tp, rp)?;
        total += normalized_inner(&b, &b2)?.norm();
    }
    Ok(total / 4.0)
}

/// Which ambiguity variant the objective integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbiguityMode {
    SinglePol,
    HighXpr,
    General,
}

impl AmbiguityMode {
    /// Single-pol unless `polarimetric`; then high-XPR when both arrays pass
    /// the XPR test on the grid angles, general otherwise.
    pub fn select(cfg: &SoundingConfig, grid: &AmbiguityGrid, polarimetric: bool) -> Result<Self> {
        if !polarimetric {
            return Ok(AmbiguityMode::SinglePol);
        }
        let tuples = grid.angle_tuples();
        let tx: Vec<(f64, f64)> = tuples.iter().map(|t| (t[0], t[1])).collect();
        let rx: Vec<(f64, f64)> = tuples.iter().map(|t| (t[2], t[3])).collect();
        if cfg.tx().is_high_xpr(&tx, DEFAULT_XPR_DB)? && cfg.rx().is_high_xpr(&rx, DEFAULT_XPR_DB)? {
            Ok(AmbiguityMode::HighXpr)
        } else {
            Ok(AmbiguityMode::General)
        }
    }
}

/// Spatial vectors `b_T ⊗ b_R` for one angle tuple, one per polarization
/// pair in use, plus whatever the mode needs to normalize them.
struct SpatialPoint {
    /// `pairs × N`, pair-major.
    vectors: Vec<Vec<Complex64>>,
    norms: Vec<f64>,
    /// Inverse of the thin-QR `R` factor of the `N × 4` spatial matrix.
    r_inv: Option<Matrix4<Complex64>>,
}

/// Precomputed integrand of the ambiguity objective.
///
/// Responses depend only on the angle grid, so they are evaluated once and
/// reused for every candidate sequence.
pub struct AmbiguityObjective {
    points: Vec<SpatialPoint>,
    offsets: Vec<f64>,
    snapshot_factor: Vec<f64>,
    measure: f64,
    exponent: f64,
    mode: AmbiguityMode,
    pairs: usize,
}

fn spatial(
    tx: &ArrayModel,
    rx: &ArrayModel,
    t: &[f64; 4],
    tp: Polarization,
    rp: Polarization,
) -> Result<Vec<Complex64>> {
    let bt = tx.response(tp, t[0], t[1])?;
    let br = rx.response(rp, t[2], t[3])?;
    Ok(crate::linalg::kron(&bt, &br))
}

impl AmbiguityObjective {
    pub fn new(cfg: &SoundingConfig, grid: &AmbiguityGrid, mode: AmbiguityMode) -> Result<Self> {
        grid.validate()?;
        let dt = cfg.sequence().dt();
        let tuples = grid.angle_tuples();
        let pol_pairs: Vec<(Polarization, Polarization)> = match mode {
            AmbiguityMode::SinglePol => vec![cfg.polarization()],
            _ => POLARIZATION_PAIRS.to_vec(),
        };
        let points = tuples
            .par_iter()
            .map(|t| {
                let vectors = pol_pairs
                    .iter()
                    .map(|&(tp, rp)| spatial(cfg.tx(), cfg.rx(), t, tp, rp))
                    .collect::<Result<Vec<_>>>()?;
                let norms: Vec<f64> = vectors.iter().map(|v| norm(v)).collect();
                let r_inv = if mode == AmbiguityMode::General {
                    let n = vectors[0].len();
                    let s = DMatrix::from_fn(n, 4, |i, j| vectors[j][i]);
                    let rank = numerical_rank(&s);
                    if rank < 4 {
                        return Err(Error::RankDeficient { rank });
                    }
                    let r = s.qr().r();
                    let r4 = Matrix4::from_fn(|i, j| r[(i, j)]);
                    Some(r4.try_inverse().ok_or(Error::RankDeficient { rank: 3 })?)
                } else {
                    if norms.contains(&0.0) {
                        return Err(Error::DegenerateDirection);
                    }
                    None
                };
                Ok(SpatialPoint { vectors, norms, r_inv })
            })
            .collect::<Result<Vec<_>>>()?;
        let offsets = grid.doppler_offsets(dt);
        let times = cfg.snapshot_times();
        let mt = times.len() as f64;
        let snapshot_factor = offsets
            .iter()
            .map(|&d| {
                let s: Complex64 = times.iter().map(|&t| Complex64::from_polar(1.0, -2.0 * PI * d * t)).sum();
                s.norm() / mt
            })
            .collect();
        Ok(Self {
            points,
            offsets,
            snapshot_factor,
            measure: grid.cell_measure(dt),
            exponent: grid.exponent,
            mode,
            pairs: pol_pairs.len(),
        })
    }

    pub fn mode(&self) -> AmbiguityMode {
        self.mode
    }

    /// Number of ambiguity evaluations per objective call.
    pub fn evaluations(&self) -> usize {
        self.points.len() * self.points.len() * self.offsets.len()
    }

    fn power(&self, x: f64) -> f64 {
        if self.exponent.fract() == 0.0 && self.exponent <= i32::MAX as f64 {
            x.powi(self.exponent as i32)
        } else {
            x.powf(self.exponent)
        }
    }

    /// Objective value for timing vector `eta`.
    pub fn evaluate(&self, eta: &[f64]) -> Result<f64> {
        let n = self.points.first().map_or(0, |p| p.vectors[0].len());
        if eta.len() != n {
            return Err(Error::Dimension(format!("timing vector has {} entries, expected {n}", eta.len())));
        }
        // phases[d][k] = exp(-j2π·Δν_d·η_k)
        let phases: Vec<Vec<Complex64>> = self
            .offsets
            .iter()
            .map(|&d| eta.iter().map(|&e| Complex64::from_polar(1.0, -2.0 * PI * d * e)).collect())
            .collect();
        let partial: Vec<f64> = self
            .points
            .par_iter()
            .map(|p| {
                let terms: Vec<f64> = self.points.iter().map(|q| self.pair_sum(p, q, &phases)).collect();
                pairwise_sum(&terms)
            })
            .collect();
        Ok(pairwise_sum(&partial) * self.measure)
    }

    fn pair_sum(&self, p: &SpatialPoint, q: &SpatialPoint, phases: &[Vec<Complex64>]) -> f64 {
        let n = p.vectors[0].len();
        let mut total = 0.0;
        match self.mode {
            AmbiguityMode::SinglePol | AmbiguityMode::HighXpr => {
                let products: Vec<Vec<Complex64>> = (0..self.pairs)
                    .map(|c| (0..n).map(|k| p.vectors[c][k].conj() * q.vectors[c][k]).collect())
                    .collect();
                let scales: Vec<f64> = (0..self.pairs).map(|c| 1.0 / (p.norms[c] * q.norms[c])).collect();
                for (ph, &sf) in phases.iter().zip(&self.snapshot_factor) {
                    let mut x = 0.0;
                    for (w, s) in products.iter().zip(&scales) {
                        let z: Complex64 = w.iter().zip(ph).map(|(a, b)| a * b).sum();
                        x += z.norm() * s;
                    }
                    x *= sf / self.pairs as f64;
                    total += self.power(x.min(1.0));
                }
            }
            AmbiguityMode::General => {
                let (ri, rj) = (p.r_inv.as_ref().expect("general mode"), q.r_inv.as_ref().expect("general mode"));
                for (ph, &sf) in phases.iter().zip(&self.snapshot_factor) {
                    let mut g = Matrix4::<Complex64>::zeros();
                    for a in 0..4 {
                        for b in 0..4 {
                            g[(a, b)] = (0..n).map(|k| p.vectors[a][k].conj() * q.vectors[b][k] * ph[k]).sum();
                        }
                    }
                    let m = ri.adjoint() * g * rj * Complex64::new(sf, 0.0);
                    let x = SubspaceSimilarity::from_cross(&m).s1();
                    total += self.power(x);
                }
            }
        }
        total
    }
}

/// Integrated ambiguity `∬_D |X|^𝒫` for timing `eta`.
pub fn ambiguity_objective(
    eta: &[f64],
    grid: &AmbiguityGrid,
    cfg: &SoundingConfig,
    mode: AmbiguityMode,
) -> Result<f64> {
    AmbiguityObjective::new(cfg, grid, mode)?.evaluate(eta)
}

/// A parameter that can be swept on an ambiguity surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceAxis {
    AzimuthTx,
    ElevationTx,
    AzimuthRx,
    ElevationRx,
    /// `Δν = ν − ν′` in Hz.
    DopplerOffset,
}

impl SurfaceAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SurfaceAxis::AzimuthTx => "azimuth_tx",
            SurfaceAxis::ElevationTx => "elevation_tx",
            SurfaceAxis::AzimuthRx => "azimuth_rx",
            SurfaceAxis::ElevationRx => "elevation_rx",
            SurfaceAxis::DopplerOffset => "doppler_offset",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "azimuth_tx" => Ok(SurfaceAxis::AzimuthTx),
            "elevation_tx" => Ok(SurfaceAxis::ElevationTx),
            "azimuth_rx" => Ok(SurfaceAxis::AzimuthRx),
            "elevation_rx" => Ok(SurfaceAxis::ElevationRx),
            "doppler_offset" => Ok(SurfaceAxis::DopplerOffset),
            other => Err(Error::InvalidParameter(format!("unknown sweep axis `{other}`"))),
        }
    }

    fn apply(&self, base: &StructuralParams, truth: &StructuralParams, value: f64) -> StructuralParams {
        let mut out = *base;
        match self {
            SurfaceAxis::AzimuthTx => out.azimuth_tx = value,
            SurfaceAxis::ElevationTx => out.elevation_tx = value,
            SurfaceAxis::AzimuthRx => out.azimuth_rx = value,
            SurfaceAxis::ElevationRx => out.elevation_rx = value,
            SurfaceAxis::DopplerOffset => out.doppler = truth.doppler - value,
        }
        out
    }
}

/// One swept dimension: the axis and its sample values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub axis: SurfaceAxis,
    pub values: Vec<f64>,
}

/// Dense `rows × cols` grid of `|X|`, row-major; a 1-D sweep has one column.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    pub rows: SweepAxis,
    pub cols: Option<SweepAxis>,
    pub values: Vec<f64>,
}

impl AmbiguitySurface {
    pub fn ncols(&self) -> usize {
        self.cols.as_ref().map_or(1, |c| c.values.len())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols() + col]
    }

    /// Count of strict local maxima (8-neighbourhood) above `threshold`.
    pub fn local_maxima_above(&self, threshold: f64) -> usize {
        let (nr, nc) = (self.rows.values.len(), self.ncols());
        let mut count = 0;
        for r in 0..nr {
            for c in 0..nc {
                let v = self.get(r, c);
                if v <= threshold {
                    continue;
                }
                let mut is_max = true;
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                        if rr < 0 || cc < 0 || rr >= nr as i64 || cc >= nc as i64 {
                            continue;
                        }
                        let w = self.get(rr as usize, cc as usize);
                        // ties resolve to the first cell in row-major order
                        let earlier = (rr, cc) < (r as i64, c as i64);
                        if w > v || (w == v && earlier) {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    count += 1;
                }
            }
        }
        count
    }
}

/// `|X(μ, μ′)|` over a 1- or 2-D sweep of `μ′` around `truth`.
pub fn ambiguity_surface(
    eta: &[f64],
    truth: &StructuralParams,
    rows: SweepAxis,
    cols: Option<SweepAxis>,
    cfg: &SoundingConfig,
    mode: AmbiguityMode,
) -> Result<AmbiguitySurface> {
    if rows.values.is_empty() || cols.as_ref().is_some_and(|c| c.values.is_empty()) {
        return Err(Error::InvalidParameter("sweep axes need at least one value".into()));
    }
    if cols.as_ref().is_some_and(|c| c.axis == rows.axis) {
        return Err(Error::InvalidParameter("sweep axes must differ".into()));
    }
    let col_values = cols.as_ref().map_or(vec![f64::NAN], |c| c.values.clone());
    let eval = |mu_test: &StructuralParams| -> Result<f64> {
        match mode {
            AmbiguityMode::SinglePol => Ok(ambiguity_single_pol(truth, mu_test, eta, cfg)?.norm()),
            AmbiguityMode::HighXpr => ambiguity_polarimetric_xpr_with(truth, mu_test, eta, cfg, XprCheck::Skip),
            AmbiguityMode::General => Ok(polarimetric_similarity_with(truth, mu_test, eta, cfg)?.s1()),
        }
    };
    let values = rows
        .values
        .par_iter()
        .map(|&rv| {
            let base = rows.axis.apply(truth, truth, rv);
            col_values
                .iter()
                .map(|&cv| {
                    let mu = match &cols {
                        Some(c) => c.axis.apply(&base, truth, cv),
                        None => base,
                    };
                    eval(&mu)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(AmbiguitySurface { rows, cols, values })
}

/// Recovers the 1-based permutation behind a timing vector.
pub fn perm_from_eta(eta: &[f64], dt: f64) -> Result<Vec<usize>> {
    let c = (eta.len() as f64 - 1.0) / 2.0;
    eta.iter()
        .map(|&e| {
            let slot = e / dt + c + 1.0;
            let r = slot.round();
            if (slot - r).abs() > 1e-6 || r < 1.0 {
                Err(Error::InvalidPermutation(format!("timing {e} is not on the dt grid")))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::complexity::alternating_polarization_array;
    use crate::signal::SwitchingSequence;
    use proptest::prelude::*;

    fn params() -> impl Strategy<Value = StructuralParams> {
        (-PI..PI, 0.0..PI, -PI..PI, 0.0..PI, -400.0f64..400.0)
            .prop_map(|(a, b, c, d, e)| StructuralParams::new(a, b, c, d, e))
    }

    fn perm(m: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((1..=m).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn single_pol_is_bounded_and_symmetric(p in perm(8), mu in params(), mu2 in params()) {
            let tx = ArrayModel::isotropic_ula(4, 0.5, Polarization::V).unwrap();
            let rx = ArrayModel::isotropic_ula(2, 0.5, Polarization::V).unwrap();
            let cfg = SoundingConfig::new(tx, rx, SwitchingSequence::new(p, 1e-3).unwrap()).unwrap();
            let eta = cfg.sequence().eta().to_vec();
            let x = ambiguity_single_pol(&mu, &mu2, &eta, &cfg).unwrap().norm();
            let y = ambiguity_single_pol(&mu2, &mu, &eta, &cfg).unwrap().norm();
            prop_assert!(x <= 1.0 + 1e-12);
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((ambiguity_single_pol(&mu, &mu, &eta, &cfg).unwrap().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn polarimetric_variants_are_bounded_and_symmetric(p in perm(8), mu in params(), mu2 in params()) {
            let cfg = SoundingConfig::new(
                alternating_polarization_array(4, 0).unwrap(),
                alternating_polarization_array(2, 1).unwrap(),
                SwitchingSequence::new(p, 1e-3).unwrap(),
            )
            .unwrap();
            let g = ambiguity_polarimetric_general(&mu, &mu2, &cfg).unwrap();
            let g2 = ambiguity_polarimetric_general(&mu2, &mu, &cfg).unwrap();
            let x = ambiguity_polarimetric_xpr(&mu, &mu2, &cfg, XprCheck::Skip).unwrap();
            let x2 = ambiguity_polarimetric_xpr(&mu2, &mu, &cfg, XprCheck::Skip).unwrap();
            prop_assert!(g <= 1.0 + 1e-12 && x <= 1.0 + 1e-12);
            prop_assert!((g - g2).abs() < 1e-10);
            prop_assert!((x - x2).abs() < 1e-12);
            prop_assert!((g - x).abs() < 1e-8);
        }
    }
}
