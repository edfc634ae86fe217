//! Single-path maximum-likelihood estimation of TX azimuth and Doppler, and
//! the Monte Carlo harness that compares switching sequences against their
//! Cramér–Rao bounds.
//!
//! With one path the complex gain has the closed form `γ̂ = vᴴy/‖v‖²`, so
//! the likelihood concentrates to `|vᴴy|²/‖v‖²` over (azimuth, Doppler). A
//! grid search picks the starting point and alternating golden-section
//! passes refine it below the grid spacing.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::fisher::{crlb, golden_max, Parameter};
use crate::linalg::{linspace, pairwise_sum};
use crate::rng;
use crate::signal::{PathParameters, SoundingConfig, SwitchingSequence};
use crate::{Complex64, Error, Result};

/// Alternating azimuth/Doppler refinement passes.
const REFINE_ROUNDS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorGrid {
    pub azimuth_points: usize,
    /// Radians.
    pub azimuth_range: (f64, f64),
    pub doppler_points: usize,
    /// Hz; `None` spans the unambiguous band `±1/(2·dt)`.
    pub doppler_range: Option<(f64, f64)>,
    /// Golden-section iterations per dimension and pass.
    pub refine_iterations: usize,
}

impl Default for EstimatorGrid {
    fn default() -> Self {
        Self {
            azimuth_points: 181,
            azimuth_range: (-PI, PI),
            doppler_points: 129,
            doppler_range: None,
            refine_iterations: 40,
        }
    }
}

impl EstimatorGrid {
    pub fn doppler_bound(dt: f64) -> f64 {
        1.0 / (2.0 * dt)
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        if self.azimuth_points < 2 || self.doppler_points < 2 {
            return Err(Error::InvalidParameter("estimator grids need at least 2 points per axis".into()));
        }
        if !(self.azimuth_range.0 < self.azimuth_range.1) {
            return Err(Error::InvalidParameter("azimuth range must be increasing".into()));
        }
        let (lo, hi) = self.dopplers_range(dt);
        let bound = Self::doppler_bound(dt) * (1.0 + 1e-12);
        if !(lo < hi) || lo < -bound || hi > bound {
            return Err(Error::InvalidParameter(format!(
                "Doppler range [{lo}, {hi}] must be increasing and within ±{:.6e} Hz",
                Self::doppler_bound(dt)
            )));
        }
        Ok(())
    }

    fn dopplers_range(&self, dt: f64) -> (f64, f64) {
        self.doppler_range.unwrap_or_else(|| {
            let b = Self::doppler_bound(dt);
            (-b, b)
        })
    }

    pub fn azimuths(&self) -> Vec<f64> {
        linspace(self.azimuth_range.0, self.azimuth_range.1, self.azimuth_points)
    }

    pub fn dopplers(&self, dt: f64) -> Vec<f64> {
        let (lo, hi) = self.dopplers_range(dt);
        linspace(lo, hi, self.doppler_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub azimuth: f64,
    pub doppler: f64,
    pub gain: Complex64,
    /// Concentrated likelihood at the estimate.
    pub likelihood: f64,
}

/// Precomputed grid likelihood for one sounding configuration. All path
/// parameters except TX azimuth, Doppler and gain are taken as known.
pub struct Estimator {
    cfg: SoundingConfig,
    template: PathParameters,
    grid: EstimatorGrid,
    azimuths: Vec<f64>,
    dopplers: Vec<f64>,
    /// `conj(b_T ⊗ b_R)` per azimuth, `azimuths × pairs`.
    responses: DMatrix<Complex64>,
    /// `Σ_k |b_k|²` per azimuth.
    energies: Vec<f64>,
    /// `exp(−j2πν·τ)` per snapshot, each `pairs × dopplers`.
    phases: Vec<DMatrix<Complex64>>,
    rx_response: Vec<Complex64>,
    row_energy: f64,
}

impl Estimator {
    pub fn new(cfg: &SoundingConfig, template: &PathParameters, grid: &EstimatorGrid) -> Result<Self> {
        let dt = cfg.sequence().dt();
        grid.validate(dt)?;
        let (tp, rp) = cfg.polarization();
        let rx_response = cfg.rx().response(rp, template.azimuth_rx, template.elevation_rx)?;
        let azimuths = grid.azimuths();
        let dopplers = grid.dopplers(dt);
        let pairs = cfg.pairs();
        let rows = azimuths
            .iter()
            .map(|&a| Self::pair_response(cfg, tp, &rx_response, a, template.elevation_tx))
            .collect::<Result<Vec<_>>>()?;
        let responses = DMatrix::from_fn(azimuths.len(), pairs, |i, k| rows[i][k].conj());
        let energies = rows.iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect();
        let eta = cfg.sequence().eta();
        let phases = cfg
            .snapshot_times()
            .iter()
            .map(|&tm| {
                DMatrix::from_fn(pairs, dopplers.len(), |k, j| {
                    Complex64::from_polar(1.0, -2.0 * PI * dopplers[j] * (tm + eta[k]))
                })
            })
            .collect();
        let row_energy = cfg.snapshots() as f64 * cfg.frequency_basis().iter().map(|z| z.norm_sqr()).sum::<f64>();
        Ok(Self {
            cfg: cfg.clone(),
            template: *template,
            grid: grid.clone(),
            azimuths,
            dopplers,
            responses,
            energies,
            phases,
            rx_response,
            row_energy,
        })
    }

    fn pair_response(
        cfg: &SoundingConfig,
        tp: crate::array::Polarization,
        rx: &[Complex64],
        azimuth: f64,
        elevation: f64,
    ) -> Result<Vec<Complex64>> {
        let tx = cfg.tx().response(tp, azimuth, elevation)?;
        Ok(crate::linalg::kron(&tx, rx))
    }

    /// `y` folded over frequency: `z[m][k] = Σ_f conj(b_f)·y[m,k,f]`.
    fn fold_frequency(&self, y: &[Complex64]) -> Vec<Vec<Complex64>> {
        let bf = self.cfg.frequency_basis();
        let mf = bf.len();
        let pairs = self.cfg.pairs();
        (0..self.cfg.snapshots())
            .map(|m| {
                (0..pairs)
                    .map(|k| {
                        let base = (m * pairs + k) * mf;
                        bf.iter().zip(&y[base..base + mf]).map(|(b, v)| b.conj() * v).sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// `vᴴy` and `‖v‖²` at one (azimuth, Doppler).
    fn correlate(&self, folded: &[Vec<Complex64>], azimuth: f64, doppler: f64) -> Result<(Complex64, f64)> {
        let (tp, _) = self.cfg.polarization();
        let b = Self::pair_response(&self.cfg, tp, &self.rx_response, azimuth, self.template.elevation_tx)?;
        let eta = self.cfg.sequence().eta();
        let mut acc = Complex64::new(0.0, 0.0);
        for (tm, z) in self.cfg.snapshot_times().iter().zip(folded) {
            for k in 0..b.len() {
                acc += b[k].conj() * Complex64::from_polar(1.0, -2.0 * PI * doppler * (tm + eta[k])) * z[k];
            }
        }
        let energy = b.iter().map(|x| x.norm_sqr()).sum::<f64>() * self.row_energy;
        Ok((acc, energy))
    }

    fn likelihood(&self, folded: &[Vec<Complex64>], azimuth: f64, doppler: f64) -> Result<f64> {
        let (c, e) = self.correlate(folded, azimuth, doppler)?;
        Ok(if e > 0.0 { c.norm_sqr() / e } else { 0.0 })
    }

    /// Concentrated likelihood on the whole grid, `azimuths × dopplers`.
    pub fn grid_likelihood(&self, y: &[Complex64]) -> Result<DMatrix<f64>> {
        if y.len() != self.cfg.signal_len() {
            return Err(Error::Dimension(format!(
                "signal has {} entries, expected {}",
                y.len(),
                self.cfg.signal_len()
            )));
        }
        let folded = self.fold_frequency(y);
        let mut z = DMatrix::<Complex64>::zeros(self.cfg.pairs(), self.dopplers.len());
        for (phase, fm) in self.phases.iter().zip(&folded) {
            for j in 0..self.dopplers.len() {
                for k in 0..fm.len() {
                    z[(k, j)] += phase[(k, j)] * fm[k];
                }
            }
        }
        let corr = &self.responses * z;
        Ok(DMatrix::from_fn(self.azimuths.len(), self.dopplers.len(), |i, j| {
            let e = self.energies[i] * self.row_energy;
            if e > 0.0 {
                corr[(i, j)].norm_sqr() / e
            } else {
                0.0
            }
        }))
    }

    pub fn estimate(&self, y: &[Complex64]) -> Result<Estimate> {
        if y.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::UndefinedEstimate);
        }
        let surface = self.grid_likelihood(y)?;
        // first maximum in row-major order
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for i in 0..surface.nrows() {
            for j in 0..surface.ncols() {
                if surface[(i, j)] > best.0 {
                    best = (surface[(i, j)], i, j);
                }
            }
        }
        let folded = self.fold_frequency(y);
        let (mut az, mut nu, mut value) = (self.azimuths[best.1], self.dopplers[best.2], best.0);
        if self.grid.refine_iterations > 0 {
            let az_step = self.azimuths[1] - self.azimuths[0];
            let nu_step = self.dopplers[1] - self.dopplers[0];
            let iters = self.grid.refine_iterations;
            for round in 0..REFINE_ROUNDS {
                let shrink = 0.5f64.powi(round as i32);
                let (a, v) = golden_max(
                    |x| self.likelihood(&folded, x, nu),
                    az - az_step * shrink,
                    az + az_step * shrink,
                    iters,
                )?;
                if v > value {
                    az = a;
                    value = v;
                }
                let (n, v) = golden_max(
                    |x| self.likelihood(&folded, az, x),
                    nu - nu_step * shrink,
                    nu + nu_step * shrink,
                    iters,
                )?;
                if v > value {
                    nu = n;
                    value = v;
                }
            }
        }
        let (c, e) = self.correlate(&folded, az, nu)?;
        if !(e > 0.0) {
            return Err(Error::UndefinedEstimate);
        }
        Ok(Estimate { azimuth: az, doppler: nu, gain: c / e, likelihood: value })
    }
}

/// One-shot estimate; builds the grid tables each call.
pub fn mle_estimate(
    y: &[Complex64],
    cfg: &SoundingConfig,
    template: &PathParameters,
    grid: &EstimatorGrid,
) -> Result<Estimate> {
    Estimator::new(cfg, template, grid)?.estimate(y)
}

/// Wrap an angle difference in degrees to `(−180, 180]`.
pub fn wrap_degrees(x: f64) -> f64 {
    let r = x.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Noise standard deviation for a per-sample SNR `r²·mean|v|²/σ²`.
pub fn sigma_for_snr(path: &PathParameters, cfg: &SoundingConfig, snr_db: f64) -> Result<f64> {
    let v = cfg.basis_vector(&path.structural(), cfg.sequence().eta())?;
    let mean_power = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
    if !(mean_power > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    Ok(path.amplitude * mean_power.sqrt() / 10f64.powf(snr_db / 20.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloScenario {
    /// Arrays, snapshots and polarization; the sequence is replaced per
    /// candidate.
    pub sounding: SoundingConfig,
    pub truth: PathParameters,
    pub sequences: Vec<(String, SwitchingSequence)>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid: EstimatorGrid,
    /// SNRs at which raw azimuth estimates are kept for CDFs.
    pub cdf_snr_db: Vec<f64>,
}

/// Metrics of one sequence at one SNR. Azimuth in degrees, Doppler in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrMetrics {
    pub snr_db: f64,
    pub azimuth_rmse: f64,
    pub azimuth_log_mse: f64,
    pub doppler_rmse: f64,
    pub doppler_log_mse: f64,
    pub azimuth_crlb: f64,
    pub doppler_crlb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub name: String,
    pub sequence: SwitchingSequence,
    pub metrics: Vec<SnrMetrics>,
    /// `(snr_db, azimuth estimates in degrees)` in trial order.
    pub azimuth_estimates: Vec<(f64, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub sequences: Vec<SequenceReport>,
    pub trials: usize,
    pub seed: u64,
}

impl MonteCarloReport {
    pub fn sequence(&self, name: &str) -> Option<&SequenceReport> {
        self.sequences.iter().find(|s| s.name == name)
    }
}

/// Parameters left unknown by the estimator.
pub const ESTIMATED_PARAMETERS: [Parameter; 4] =
    [Parameter::AzimuthTx, Parameter::Doppler, Parameter::Amplitude, Parameter::Phase];

/// CRLB of TX azimuth (deg²) and Doppler (Hz²) per SNR.
pub fn crlb_reference(sounding: &SoundingConfig, truth: &PathParameters, snr_db: &[f64]) -> Result<Vec<(f64, f64)>> {
    snr_db
        .iter()
        .map(|&snr| {
            let sigma = sigma_for_snr(truth, sounding, snr)?;
            let b = crlb(truth, sounding, sigma, &ESTIMATED_PARAMETERS)?;
            Ok((b[0] * (180.0 / PI).powi(2), b[1]))
        })
        .collect()
}

/// Monte Carlo comparison with one noise draw per (SNR, trial) shared by
/// all sequences.
pub fn run_monte_carlo(scenario: &MonteCarloScenario) -> Result<MonteCarloReport> {
    if scenario.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let truth = &scenario.truth;
    let truth_az = truth.azimuth_tx.to_degrees();
    let n_snr = scenario.snr_db.len() as u64;
    let mut reports = Vec::with_capacity(scenario.sequences.len());
    for (name, seq) in &scenario.sequences {
        let cfg = scenario.sounding.clone().with_sequence(seq.clone())?;
        let estimator = Estimator::new(&cfg, truth, &scenario.grid)?;
        let clean = crate::signal::noiseless_signal(truth, &cfg)?;
        let crlbs = crlb_reference(&cfg, truth, &scenario.snr_db)?;
        let mut metrics = Vec::with_capacity(scenario.snr_db.len());
        let mut kept = Vec::new();
        for (si, &snr) in scenario.snr_db.iter().enumerate() {
            let sigma = sigma_for_snr(truth, &cfg, snr)?;
            let errors = (0..scenario.trials as u64)
                .into_par_iter()
                .map(|trial| {
                    // stream depends on (snr, trial) only, never on the sequence
                    let mut rng = rng::stream(scenario.seed, trial * n_snr + si as u64);
                    let y: Vec<Complex64> = clean.iter().map(|&v| v + rng::complex_gaussian(&mut rng, sigma)).collect();
                    let est = estimator.estimate(&y)?;
                    Ok((
                        wrap_degrees(est.azimuth.to_degrees() - truth_az),
                        est.doppler - truth.doppler,
                        est.azimuth.to_degrees(),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let az_sq: Vec<f64> = errors.iter().map(|e| e.0 * e.0).collect();
            let nu_sq: Vec<f64> = errors.iter().map(|e| e.1 * e.1).collect();
            let az_mse = pairwise_sum(&az_sq) / errors.len() as f64;
            let nu_mse = pairwise_sum(&nu_sq) / errors.len() as f64;
            metrics.push(SnrMetrics {
                snr_db: snr,
                azimuth_rmse: az_mse.sqrt(),
                azimuth_log_mse: az_mse.log10(),
                doppler_rmse: nu_mse.sqrt(),
                doppler_log_mse: nu_mse.log10(),
                azimuth_crlb: crlbs[si].0,
                doppler_crlb: crlbs[si].1,
            });
            if scenario.cdf_snr_db.contains(&snr) {
                kept.push((snr, errors.iter().map(|e| e.2).collect()));
            }
        }
        reports.push(SequenceReport { name: name.clone(), sequence: seq.clone(), metrics, azimuth_estimates: kept });
    }
    Ok(MonteCarloReport { sequences: reports, trials: scenario.trials, seed: scenario.seed })
}

/// Empirical CDF of kept azimuth estimates (degrees) on `points` equally
/// spaced abscissae over `range` (degrees).
pub fn estimate_cdf(report: &SequenceReport, snr_db: f64, range: (f64, f64), points: usize) -> Result<Vec<(f64, f64)>> {
    let (_, estimates) =
        report.azimuth_estimates.iter().find(|(s, _)| *s == snr_db).ok_or(Error::UnknownSnr(snr_db))?;
    if points < 2 {
        return Err(Error::InvalidParameter("CDF needs at least 2 points".into()));
    }
    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(linspace(range.0, range.1, points)
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            // the last abscissa closes the CDF over the search range
            let count = if i + 1 == points { sorted.len() } else { sorted.partition_point(|&e| e <= x) };
            (x, count as f64 / n)
        })
        .collect())
}
