//! Fisher information of a single path and the Doppler/angle cross-term
//! costs that the Fisher step minimizes.
//!
//! For `s = γ·v(θ)` in white circular noise of variance `σ²` the FIM is
//! `(2/σ²)·Re{DᴴD}` with `D` the Jacobian. Only the four Doppler/angle cross
//! entries depend on the switching order; the diagonal depends on `‖η‖`
//! alone. Writing `u = G·([β_φ⊙α_φ] ⊗ β_ϑ)` for the azimuth derivative of a
//! response without its `j` factor, the TX azimuth cross entry is
//!
//! ```text
//! F_νφT = (4πr²/σ²) · Re Σ_k τ_k · |b_R,r(k)|² · conj(b_T,t(k)) · u_T,t(k)
//! ```
//!
//! and the cost terms drop the positive prefactor and use unit RX weights,
//! so that `f = max over the angle grid of |Σ_t S_t · Re{conj(b_t)·u_t}|`
//! with `S_t` the timing mass that touches element `t`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{eadf_from_sampled_pattern, ArrayModel, Eadf, Polarization, SampledPattern};
use crate::linalg::linspace;
use crate::signal::{PathParameters, SoundingConfig};
use crate::{Error, Result};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Condition number above which the FIM is treated as singular.
pub const CONDITION_CAP: f64 = 1e12;

/// Single-path parameters in FIM row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parameter {
    ElevationTx,
    AzimuthTx,
    ElevationRx,
    AzimuthRx,
    Doppler,
    Amplitude,
    Phase,
}

impl Parameter {
    pub const ALL: [Parameter; 7] = [
        Parameter::ElevationTx,
        Parameter::AzimuthTx,
        Parameter::ElevationRx,
        Parameter::AzimuthRx,
        Parameter::Doppler,
        Parameter::Amplitude,
        Parameter::Phase,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Parameter::ElevationTx => "elevation_tx",
            Parameter::AzimuthTx => "azimuth_tx",
            Parameter::ElevationRx => "elevation_rx",
            Parameter::AzimuthRx => "azimuth_rx",
            Parameter::Doppler => "doppler",
            Parameter::Amplitude => "amplitude",
            Parameter::Phase => "phase",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown parameter `{s}`")))
    }

    fn get(self, p: &PathParameters) -> f64 {
        match self {
            Parameter::ElevationTx => p.elevation_tx,
            Parameter::AzimuthTx => p.azimuth_tx,
            Parameter::ElevationRx => p.elevation_rx,
            Parameter::AzimuthRx => p.azimuth_rx,
            Parameter::Doppler => p.doppler,
            Parameter::Amplitude => p.amplitude,
            Parameter::Phase => p.phase,
        }
    }

    /// Copy of `p` with this parameter set to `value`.
    pub fn with(self, p: &PathParameters, value: f64) -> PathParameters {
        let mut out = *p;
        match self {
            Parameter::ElevationTx => out.elevation_tx = value,
            Parameter::AzimuthTx => out.azimuth_tx = value,
            Parameter::ElevationRx => out.elevation_rx = value,
            Parameter::AzimuthRx => out.azimuth_rx = value,
            Parameter::Doppler => out.doppler = value,
            Parameter::Amplitude => out.amplitude = value,
            Parameter::Phase => out.phase = value,
        }
        out
    }

    pub fn value(self, p: &PathParameters) -> f64 {
        self.get(p)
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Real symmetric information matrix with labeled rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    labels: Vec<Parameter>,
    values: DMatrix<f64>,
}

impl FisherMatrix {
    pub fn new(labels: Vec<Parameter>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != labels.len() || values.ncols() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} labels for a {}×{} matrix",
                labels.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(Self { labels, values })
    }

    pub fn labels(&self) -> &[Parameter] {
        &self.labels
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    fn position(&self, p: Parameter) -> Result<usize> {
        self.labels
            .iter()
            .position(|&q| q == p)
            .ok_or_else(|| Error::InvalidParameter(format!("parameter {p} not in this matrix")))
    }

    pub fn get(&self, a: Parameter, b: Parameter) -> Result<f64> {
        Ok(self.values[(self.position(a)?, self.position(b)?)])
    }

    /// Restriction to `params`, in the given order.
    pub fn restrict(&self, params: &[Parameter]) -> Result<Self> {
        let idx = params.iter().map(|&p| self.position(p)).collect::<Result<Vec<_>>>()?;
        let values = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.values[(idx[i], idx[j])]);
        Ok(Self { labels: params.to_vec(), values })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.labels.len()).map(|i| self.values[(i, i)]).collect()
    }

    /// Diagonal of the inverse.
    pub fn crlb(&self) -> Result<Vec<f64>> {
        inverse_diagonal(&self.values)
    }
}

/// `diag(A⁻¹)` of a symmetric positive definite matrix via its
/// eigendecomposition; fails when the condition number exceeds
/// [`CONDITION_CAP`].
pub fn inverse_diagonal(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !(min > 0.0) || max / min > CONDITION_CAP {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(Error::SingularFim { condition });
    }
    Ok((0..n).map(|i| (0..n).map(|j| eig.eigenvectors[(i, j)].powi(2) / eig.eigenvalues[j]).sum()).collect())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("noise std must be positive, got {sigma}")))
    }
}

/// Analytic Jacobian `∂s/∂θ`, columns in [`Parameter::ALL`] order.
pub fn jacobian(path: &PathParameters, cfg: &SoundingConfig) -> Result<DMatrix<Complex64>> {
    if path.amplitude == 0.0 {
        return Err(Error::DegenerateAmplitude);
    }
    let (tp, rp) = cfg.polarization();
    let eta = cfg.sequence().eta();
    let nu = path.doppler;
    let (bt, dbt_phi, dbt_theta) = cfg.tx().response_with_derivatives(tp, path.azimuth_tx, path.elevation_tx)?;
    let (br, dbr_phi, dbr_theta) = cfg.rx().response_with_derivatives(rp, path.azimuth_rx, path.elevation_rx)?;
    let gamma = path.gain();
    let scaled = |v: Vec<Complex64>, c: Complex64| -> Vec<Complex64> { v.into_iter().map(|x| x * c).collect() };
    let v = cfg.stack(&bt, &br, nu, eta)?;
    let s = scaled(v.clone(), gamma);
    let times = cfg.row_times(eta);
    let columns = [
        scaled(cfg.stack(&dbt_theta, &br, nu, eta)?, gamma),
        scaled(cfg.stack(&dbt_phi, &br, nu, eta)?, gamma),
        scaled(cfg.stack(&bt, &dbr_theta, nu, eta)?, gamma),
        scaled(cfg.stack(&bt, &dbr_phi, nu, eta)?, gamma),
        s.iter().zip(&times).map(|(x, &t)| x * J * 2.0 * PI * t).collect(),
        scaled(v, Complex64::from_polar(1.0, path.phase)),
        s.iter().map(|x| x * J).collect(),
    ];
    Ok(DMatrix::from_fn(s.len(), 7, |i, j| columns[j][i]))
}

/// `(2/σ²)·Re{DᴴD}` for a Jacobian.
pub fn fim_from_jacobian(d: &DMatrix<Complex64>, sigma: f64) -> Result<DMatrix<f64>> {
    check_sigma(sigma)?;
    let g = d.adjoint() * d;
    let scale = 2.0 / (sigma * sigma);
    let n = g.nrows();
    // symmetrize so roundoff cannot break exact symmetry
    Ok(DMatrix::from_fn(n, n, |i, j| scale * 0.5 * (g[(i, j)].re + g[(j, i)].re)))
}

/// Full 7-parameter FIM.
pub fn fim(path: &PathParameters, cfg: &SoundingConfig, sigma: f64) -> Result<FisherMatrix> {
    check_sigma(sigma)?;
    let d = jacobian(path, cfg)?;
    FisherMatrix::new(Parameter::ALL.to_vec(), fim_from_jacobian(&d, sigma)?)
}

/// `8·(rπ‖η‖/σ)²`, the Doppler information of unit-modulus responses over
/// one snapshot.
pub fn doppler_information_unit_modulus(eta: &[f64], amplitude: f64, sigma: f64) -> f64 {
    let norm_sq: f64 = eta.iter().map(|e| e * e).sum();
    8.0 * (amplitude * PI / sigma).powi(2) * norm_sq
}

/// Angle paired with Doppler in a cross entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossTerm {
    AzimuthTx,
    ElevationTx,
    AzimuthRx,
    ElevationRx,
}

impl CrossTerm {
    pub const ALL: [CrossTerm; 4] =
        [CrossTerm::AzimuthTx, CrossTerm::ElevationTx, CrossTerm::AzimuthRx, CrossTerm::ElevationRx];

    pub fn parameter(self) -> Parameter {
        match self {
            CrossTerm::AzimuthTx => Parameter::AzimuthTx,
            CrossTerm::ElevationTx => Parameter::ElevationTx,
            CrossTerm::AzimuthRx => Parameter::AzimuthRx,
            CrossTerm::ElevationRx => Parameter::ElevationRx,
        }
    }

    fn is_tx(self) -> bool {
        matches!(self, CrossTerm::AzimuthTx | CrossTerm::ElevationTx)
    }

    fn is_azimuth(self) -> bool {
        matches!(self, CrossTerm::AzimuthTx | CrossTerm::AzimuthRx)
    }
}

/// `Re{conj(b)·u}` per element, where `u = ∂b/∂angle / j`.
fn cross_weights(
    array: &ArrayModel,
    pol: Polarization,
    azimuth: f64,
    elevation: f64,
    azimuth_derivative: bool,
) -> Result<Vec<f64>> {
    let (b, d_phi, d_theta) = array.response_with_derivatives(pol, azimuth, elevation)?;
    let d = if azimuth_derivative { d_phi } else { d_theta };
    Ok(b.iter().zip(&d).map(|(x, y)| (x.conj() * (y * -J)).re).collect())
}

/// Closed-form Doppler/angle cross entry of the FIM.
pub fn fim_cross_doppler_angle(
    path: &PathParameters,
    cfg: &SoundingConfig,
    sigma: f64,
    which: CrossTerm,
) -> Result<f64> {
    check_sigma(sigma)?;
    let (tp, rp) = cfg.polarization();
    let (bt, dbt_phi, dbt_theta) = cfg.tx().response_with_derivatives(tp, path.azimuth_tx, path.elevation_tx)?;
    let (br, dbr_phi, dbr_theta) = cfg.rx().response_with_derivatives(rp, path.azimuth_rx, path.elevation_rx)?;
    let (m_t, m_r) = (bt.len(), br.len());
    // per-element weights on the differentiated side, |b|² on the other
    let (diff, other): (Vec<f64>, Vec<f64>) = {
        let w = |b: &[Complex64], d: &[Complex64]| -> Vec<f64> {
            b.iter().zip(d).map(|(x, y)| (x.conj() * (y * -J)).re).collect()
        };
        let mag = |b: &[Complex64]| -> Vec<f64> { b.iter().map(|x| x.norm_sqr()).collect() };
        match which {
            CrossTerm::AzimuthTx => (w(&bt, &dbt_phi), mag(&br)),
            CrossTerm::ElevationTx => (w(&bt, &dbt_theta), mag(&br)),
            CrossTerm::AzimuthRx => (w(&br, &dbr_phi), mag(&bt)),
            CrossTerm::ElevationRx => (w(&br, &dbr_theta), mag(&bt)),
        }
    };
    let eta = cfg.sequence().eta();
    let times = cfg.snapshot_times();
    let bf_energy: f64 = cfg.frequency_basis().iter().map(|z| z.norm_sqr()).sum();
    let mut acc = 0.0;
    for &tm in &times {
        for t in 0..m_t {
            for r in 0..m_r {
                let tau = tm + eta[t * m_r + r];
                let (wd, wo) = if which.is_tx() { (diff[t], other[r]) } else { (diff[r], other[t]) };
                acc += tau * wd * wo;
            }
        }
    }
    Ok(4.0 * PI * path.amplitude.powi(2) / sigma.powi(2) * bf_energy * acc)
}

/// CRLB of `params` with the remaining parameters treated as known.
pub fn crlb(path: &PathParameters, cfg: &SoundingConfig, sigma: f64, params: &[Parameter]) -> Result<Vec<f64>> {
    fim(path, cfg, sigma)?.restrict(params)?.crlb()
}

/// Which side's cross terms a Fisher cost includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostSide {
    Tx,
    Rx,
    Joint,
}

/// Angle grids and active terms of the Fisher cost.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherCostConfig {
    /// Azimuth grid size over `[-π, π]`.
    pub azimuth_points: usize,
    /// Elevation grid size over `[0, π]`; a single point sits at 0.
    pub elevation_points: usize,
    /// `f_1…f_4`: TX azimuth, TX elevation, RX azimuth, RX elevation.
    pub active: [bool; 4],
    pub side: CostSide,
    /// Golden-section refinement of each grid maximum.
    pub refine: bool,
}

impl Default for FisherCostConfig {
    fn default() -> Self {
        Self { azimuth_points: 181, elevation_points: 91, active: [true; 4], side: CostSide::Joint, refine: false }
    }
}

impl FisherCostConfig {
    /// Azimuth-only TX cost on a 181-point grid at zero elevation.
    pub fn tx_azimuth() -> Self {
        Self {
            azimuth_points: 181,
            elevation_points: 1,
            active: [true, false, false, false],
            side: CostSide::Tx,
            refine: false,
        }
    }

    fn terms(&self) -> Vec<CrossTerm> {
        CrossTerm::ALL
            .into_iter()
            .zip(self.active)
            .filter(|&(t, on)| on && (self.side == CostSide::Joint || (self.side == CostSide::Tx) == t.is_tx()))
            .map(|(t, _)| t)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for t in self.terms() {
            let n = if t.is_azimuth() { self.azimuth_points } else { self.elevation_points };
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "{} cost term needs at least 2 grid points",
                    t.parameter()
                )));
            }
        }
        if self.azimuth_points == 0 || self.elevation_points == 0 {
            return Err(Error::InvalidParameter("angle grids must be nonempty".into()));
        }
        Ok(())
    }

    fn azimuths(&self) -> Vec<f64> {
        linspace(-PI, PI, self.azimuth_points)
    }

    fn elevations(&self) -> Vec<f64> {
        linspace(0.0, PI, self.elevation_points)
    }
}

struct CostTerm {
    which: CrossTerm,
    angles: Vec<(f64, f64)>,
    /// Row-major `angles × elements`.
    weights: Vec<f64>,
    elements: usize,
}

/// Precomputed Fisher cost `J(η)` for fixed arrays and grids.
pub struct FisherCost {
    tx: ArrayModel,
    rx: ArrayModel,
    tx_pol: Polarization,
    rx_pol: Polarization,
    config: FisherCostConfig,
    terms: Vec<CostTerm>,
    azimuth_step: f64,
    elevation_step: f64,
}

impl FisherCost {
    pub fn new(
        tx: &ArrayModel,
        rx: &ArrayModel,
        pols: (Polarization, Polarization),
        config: &FisherCostConfig,
    ) -> Result<Self> {
        config.validate()?;
        let mut angles = Vec::new();
        for &a in &config.azimuths() {
            for &e in &config.elevations() {
                angles.push((a, e));
            }
        }
        let terms = config
            .terms()
            .into_iter()
            .map(|which| {
                let (array, pol) = if which.is_tx() { (tx, pols.0) } else { (rx, pols.1) };
                let rows = angles
                    .par_iter()
                    .map(|&(a, e)| cross_weights(array, pol, a, e, which.is_azimuth()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CostTerm { which, angles: angles.clone(), weights: rows.concat(), elements: array.element_count() })
            })
            .collect::<Result<Vec<_>>>()?;
        let step = |n: usize, range: f64| if n > 1 { range / (n - 1) as f64 } else { 0.0 };
        Ok(Self {
            tx: tx.clone(),
            rx: rx.clone(),
            tx_pol: pols.0,
            rx_pol: pols.1,
            azimuth_step: step(config.azimuth_points, 2.0 * PI),
            elevation_step: step(config.elevation_points, PI),
            config: config.clone(),
            terms,
        })
    }

    pub fn from_sounding(cfg: &SoundingConfig, config: &FisherCostConfig) -> Result<Self> {
        Self::new(cfg.tx(), cfg.rx(), cfg.polarization(), config)
    }

    /// Expected timing-vector length for the configured side.
    pub fn input_len(&self) -> usize {
        match self.config.side {
            CostSide::Tx => self.tx.element_count(),
            CostSide::Rx => self.rx.element_count(),
            CostSide::Joint => self.tx.element_count() * self.rx.element_count(),
        }
    }

    /// Timing mass per element of each side.
    fn element_sums(&self, eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (m_t, m_r) = (self.tx.element_count(), self.rx.element_count());
        match self.config.side {
            CostSide::Tx => (eta.to_vec(), Vec::new()),
            CostSide::Rx => (Vec::new(), eta.to_vec()),
            CostSide::Joint => {
                let mut st = vec![0.0; m_t];
                let mut sr = vec![0.0; m_r];
                for t in 0..m_t {
                    for r in 0..m_r {
                        st[t] += eta[t * m_r + r];
                        sr[r] += eta[t * m_r + r];
                    }
                }
                (st, sr)
            }
        }
    }

    pub fn evaluate(&self, eta: &[f64]) -> Result<f64> {
        if eta.len() != self.input_len() {
            return Err(Error::Dimension(format!(
                "timing vector has {} entries, expected {}",
                eta.len(),
                self.input_len()
            )));
        }
        let (st, sr) = self.element_sums(eta);
        let mut total = 0.0;
        for term in &self.terms {
            let s = if term.which.is_tx() { &st } else { &sr };
            total += self.term_max(term, s)?;
        }
        Ok(total)
    }

    /// Per-term maxima `f_i` in `CrossTerm::ALL` order (0 for inactive).
    pub fn partial_costs(&self, eta: &[f64]) -> Result<[f64; 4]> {
        self.evaluate(eta)?;
        let (st, sr) = self.element_sums(eta);
        let mut out = [0.0; 4];
        for term in &self.terms {
            let s = if term.which.is_tx() { &st } else { &sr };
            let i = CrossTerm::ALL.iter().position(|&c| c == term.which).expect("known term");
            out[i] = self.term_max(term, s)?;
        }
        Ok(out)
    }

    fn term_max(&self, term: &CostTerm, s: &[f64]) -> Result<f64> {
        // strict > keeps the first (index-ordered) maximizer
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, w) in term.weights.chunks_exact(term.elements).enumerate() {
            let v = w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>().abs();
            if v > best.0 {
                best = (v, i);
            }
        }
        if !self.config.refine {
            return Ok(best.0);
        }
        let (a0, e0) = term.angles[best.1];
        self.refine(term.which, s, a0, e0, best.0)
    }

    fn value_at(&self, which: CrossTerm, s: &[f64], azimuth: f64, elevation: f64) -> Result<f64> {
        let (array, pol) = if which.is_tx() { (&self.tx, self.tx_pol) } else { (&self.rx, self.rx_pol) };
        let w = cross_weights(array, pol, azimuth, elevation, which.is_azimuth())?;
        Ok(w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>().abs())
    }

    fn refine(&self, which: CrossTerm, s: &[f64], a0: f64, e0: f64, grid_best: f64) -> Result<f64> {
        let (mut a, mut e) = (a0, e0);
        let mut best = grid_best;
        for _ in 0..3 {
            if self.azimuth_step > 0.0 {
                let (x, v) =
                    golden_max(|x| self.value_at(which, s, x, e), a - self.azimuth_step, a + self.azimuth_step, 30)?;
                if v > best {
                    best = v;
                    a = x;
                }
            }
            if self.elevation_step > 0.0 {
                let (x, v) = golden_max(
                    |x| self.value_at(which, s, a, x),
                    e - self.elevation_step,
                    e + self.elevation_step,
                    30,
                )?;
                if v > best {
                    best = v;
                    e = x;
                }
            }
        }
        Ok(best)
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub(crate) fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, iterations: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iterations {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// `J(η)` for the arrays in `cfg`.
pub fn fisher_cost(eta: &[f64], cfg: &SoundingConfig, config: &FisherCostConfig) -> Result<f64> {
    FisherCost::from_sounding(cfg, config)?.evaluate(eta)
}

/// Isotropic-ULA shortcut `|ηᵀm|`; equals the TX azimuth cost up to the
/// constant factor `2π·d/λ`.
pub fn fisher_cost_isotropic_ula(eta: &[f64], m: &[f64]) -> Result<f64> {
    if eta.len() != m.len() {
        return Err(Error::Dimension(format!("η has {} entries, m has {}", eta.len(), m.len())));
    }
    Ok(eta.iter().zip(m).map(|(a, b)| a * b).sum::<f64>().abs())
}

/// Per-side cost `J_T` or `J_R` for a split design: the sum of the azimuth
/// and elevation maxima of that side, with `eta` the side's own timing.
pub fn fisher_cost_split(
    eta: &[f64],
    array: &ArrayModel,
    pol: Polarization,
    side: CostSide,
    config: &FisherCostConfig,
) -> Result<f64> {
    let single = ArrayModel::single_isotropic(pol);
    let cfg = FisherCostConfig { side, ..config.clone() };
    match side {
        CostSide::Tx => FisherCost::new(array, &single, (pol, pol), &cfg)?.evaluate(eta),
        CostSide::Rx => FisherCost::new(&single, array, (pol, pol), &cfg)?.evaluate(eta),
        CostSide::Joint => Err(Error::InvalidParameter("split cost needs the TX or RX side".into())),
    }
}

/// TX azimuth cost evaluated straight from EADF coefficients at zero
/// elevation: `max_φ |Re{[b⊙η]ᴴ·G·[β⊙α]}|` with `b = G·β`.
pub fn fisher_cost_eadf_azimuth(eta: &[f64], eadf: &Eadf, azimuths: &[f64]) -> Result<f64> {
    if eadf.a_theta() != 1 {
        return Err(Error::InvalidParameter("azimuth-only cost needs an EADF without elevation harmonics".into()));
    }
    if eta.len() != eadf.elements() {
        return Err(Error::Dimension(format!("η has {} entries for {} elements", eta.len(), eadf.elements())));
    }
    let mut best = 0.0f64;
    for &phi in azimuths {
        let beta = crate::array::steering_phase_vector(phi, eadf.alpha_phi());
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &e) in eta.iter().enumerate() {
            let mut b = Complex64::new(0.0, 0.0);
            let mut u = Complex64::new(0.0, 0.0);
            for (i, (&bb, &a)) in beta.iter().zip(eadf.alpha_phi()).enumerate() {
                let g = eadf.coefficient(m, i, 0);
                b += g * bb;
                u += g * bb * a;
            }
            acc += (b * e).conj() * u;
        }
        best = best.max(acc.re.abs());
    }
    Ok(best)
}

/// How per-frequency patterns are folded into one Fisher cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidebandMode {
    /// Sum of the narrowband costs over all frequency points.
    Sum,
    /// One cost on the composite pattern taken from the strongest delay bin.
    Composite,
}

/// Sampling grid for composite patterns (odd sizes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeGrid {
    pub azimuth: usize,
    pub elevation: usize,
}

impl Default for CompositeGrid {
    fn default() -> Self {
        Self { azimuth: 63, elevation: 1 }
    }
}

/// Composite value of one element: inverse DFT over frequency (scaled by
/// `1/M_f`), then the largest-magnitude bin, ties to the smallest delay.
pub fn composite_response(per_frequency: &[Complex64]) -> Complex64 {
    let mf = per_frequency.len();
    let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
    for n in 0..mf {
        let v: Complex64 = per_frequency
            .iter()
            .enumerate()
            .map(|(k, x)| x * Complex64::from_polar(1.0, 2.0 * PI * (k * n) as f64 / mf as f64))
            .sum::<Complex64>()
            / mf as f64;
        if v.norm() > best.0 {
            best = (v.norm(), v);
        }
    }
    best.1
}

/// Composite EADF array built from per-frequency responses of `pol`.
pub fn composite_array(patterns: &[ArrayModel], pol: Polarization, grid: CompositeGrid) -> Result<ArrayModel> {
    let first = patterns.first().ok_or_else(|| Error::InvalidParameter("empty pattern set".into()))?;
    let m = first.element_count();
    if patterns.iter().any(|p| p.element_count() != m) {
        return Err(Error::Dimension("frequency patterns disagree on element count".into()));
    }
    let mut failure = None;
    let sampled = SampledPattern::sample(m, grid.azimuth, grid.elevation, |k, az, el| {
        let per_f: Vec<Complex64> = patterns
            .iter()
            .map(|p| match p.response(pol, az, el) {
                Ok(b) => b[k],
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        composite_response(&per_f)
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let eadf = eadf_from_sampled_pattern(&sampled, pol)?;
    match pol {
        Polarization::H => ArrayModel::measured(Some(eadf), None),
        Polarization::V => ArrayModel::measured(None, Some(eadf)),
    }
}

/// Fisher cost over `M_f` frequency points of TX patterns (`tx[f]`) and RX
/// patterns (`rx[f]`).
pub fn wideband_fisher_cost(
    eta: &[f64],
    tx: &[ArrayModel],
    rx: &[ArrayModel],
    pols: (Polarization, Polarization),
    config: &FisherCostConfig,
    mode: WidebandMode,
) -> Result<f64> {
    if tx.is_empty() || tx.len() != rx.len() {
        return Err(Error::InvalidParameter(format!(
            "need matching nonempty TX/RX pattern sets, got {} and {}",
            tx.len(),
            rx.len()
        )));
    }
    match mode {
        WidebandMode::Sum => tx.iter().zip(rx).map(|(t, r)| FisherCost::new(t, r, pols, config)?.evaluate(eta)).sum(),
        WidebandMode::Composite => {
            if tx.len() == 1 {
                return FisherCost::new(&tx[0], &rx[0], pols, config)?.evaluate(eta);
            }
            let grid = CompositeGrid { azimuth: 63, elevation: if config.elevation_points > 1 { 31 } else { 1 } };
            let t = composite_array(tx, pols.0, grid)?;
            let r = composite_array(rx, pols.1, grid)?;
            FisherCost::new(&t, &r, pols, config)?.evaluate(eta)
        }
    }
}
