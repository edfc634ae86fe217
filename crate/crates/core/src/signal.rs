//! Switching sequences, Doppler phase vectors, basis vectors and synthetic
//! received signals.
//!
//! Antenna pair `k` of an `M_T × M_R` sounder is TX element `k / M_R` with
//! RX element `k % M_R`, matching the order of `b_T ⊗ b_R`. The timing
//! vector `η` holds the centered activation time of every pair. Snapshots
//! repeat `η` and are spaced `T` apart (default `M_TR·Δt`, back-to-back);
//! the full signal vector is ordered (snapshot, pair, frequency).

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array::{ArrayModel, NumberedLines, Polarization};
use crate::linalg::{centered_indices, kron, kron_real};
use crate::rng;
use crate::{Error, Result};

/// Permutation of antenna-pair indices plus the inter-activation interval.
///
/// `perm[k]` (1-based) is the activation slot of pair `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSequence {
    perm: Vec<usize>,
    dt: f64,
    eta: Vec<f64>,
}

impl SwitchingSequence {
    pub fn new(perm: Vec<usize>, dt: f64) -> Result<Self> {
        let eta = eta_from_permutation(&perm, dt, perm.len())?;
        Ok(Self { perm, dt, eta })
    }

    /// Sequential activation `[1, 2, …, M_TR]`.
    pub fn trivial(len: usize, dt: f64) -> Result<Self> {
        Self::new((1..=len).collect(), dt)
    }

    /// Builds from a 0-based permutation.
    pub fn from_zero_based(perm: &[usize], dt: f64) -> Result<Self> {
        Self::new(perm.iter().map(|&p| p + 1).collect(), dt)
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Copy with positions `i` and `j` exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        out.swap_in_place(i, j);
        out
    }

    pub fn swap_in_place(&mut self, i: usize, j: usize) {
        self.perm.swap(i, j);
        self.eta.swap(i, j);
    }

    /// Line 1 `M_TR dt`, line 2 the space-separated permutation.
    pub fn write_to<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "{} {:e}", self.perm.len(), self.dt)?;
        let joined: Vec<String> = self.perm.iter().map(|p| p.to_string()).collect();
        writeln!(writer, "{}", joined.join(" "))
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = NumberedLines::new(reader);
        let (lineno, header) = lines.next_nonempty()?.ok_or_else(|| Error::Format("sequence file is empty".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Format(format!("line {lineno}: expected `M_TR dt`")));
        }
        let m: usize =
            fields[0].parse().map_err(|_| Error::Format(format!("line {lineno}: bad length `{}`", fields[0])))?;
        let dt: f64 =
            fields[1].parse().map_err(|_| Error::Format(format!("line {lineno}: bad interval `{}`", fields[1])))?;
        let (lineno, body) =
            lines.next_nonempty()?.ok_or_else(|| Error::Format("sequence file lacks the permutation line".into()))?;
        let perm = body
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| Error::Format(format!("line {lineno}: bad index `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if perm.len() != m {
            return Err(Error::Format(format!("line {lineno}: header announces {m} indices, found {}", perm.len())));
        }
        if let Some((lineno, _)) = lines.next_nonempty()? {
            return Err(Error::Format(format!("line {lineno}: unexpected trailing data")));
        }
        Self::new(perm, dt)
    }
}

/// `[η]_k = dt·(perm[k] − 1 − (M_TR−1)/2)`.
pub fn eta_from_permutation(perm: &[usize], dt: f64, m_tr: usize) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("switching interval must be positive, got {dt}")));
    }
    validate_permutation(perm, m_tr)?;
    let c = (m_tr as f64 - 1.0) / 2.0;
    Ok(perm.iter().map(|&p| dt * (p as f64 - 1.0 - c)).collect())
}

pub fn validate_permutation(perm: &[usize], m_tr: usize) -> Result<()> {
    if perm.len() != m_tr {
        return Err(Error::InvalidPermutation(format!("expected {m_tr} indices, got {}", perm.len())));
    }
    let mut seen = vec![false; m_tr];
    for &p in perm {
        if p == 0 || p > m_tr {
            return Err(Error::InvalidPermutation(format!("index {p} outside 1..={m_tr}")));
        }
        if std::mem::replace(&mut seen[p - 1], true) {
            return Err(Error::InvalidPermutation(format!("index {p} repeated")));
        }
    }
    Ok(())
}

/// Plain Kronecker product `η_T ⊗ η_R` of two timing vectors.
pub fn kron_sequence(eta_t: &[f64], eta_r: &[f64]) -> Vec<f64> {
    kron_real(eta_t, eta_r)
}

/// Joint TX/RX schedule that runs the whole RX sequence once per TX slot.
///
/// Pair `(t, r)` gets slot `(p_T[t]−1)·M_R + p_R[r]`, so the joint timing is
/// `η_T(M_R·dt) ⊗ 1 + 1 ⊗ η_R(dt)` and its Doppler phase vector factors as
/// `a_ν(η_T) ⊗ a_ν(η_R)`.
pub fn kron_joint_sequence(tx: &SwitchingSequence, rx: &SwitchingSequence, dt: f64) -> Result<SwitchingSequence> {
    let m_r = rx.len();
    let mut perm = Vec::with_capacity(tx.len() * m_r);
    for &pt in tx.perm() {
        for &pr in rx.perm() {
            perm.push((pt - 1) * m_r + pr);
        }
    }
    SwitchingSequence::new(perm, dt)
}

/// `[a_ν]_k = exp(j2πν[η]_k)`.
pub fn doppler_phase_vector(nu: f64, eta: &[f64]) -> Vec<Complex64> {
    eta.iter().map(|&t| Complex64::from_polar(1.0, 2.0 * PI * nu * t)).collect()
}

/// `(b_T ⊗ b_R) ⊙ a_ν`.
pub fn basis_vector_single_pol(b_t: &[Complex64], b_r: &[Complex64], nu: f64, eta: &[f64]) -> Result<Vec<Complex64>> {
    if b_t.len() * b_r.len() != eta.len() {
        return Err(Error::Dimension(format!(
            "{}·{} responses do not match a timing vector of length {}",
            b_t.len(),
            b_r.len(),
            eta.len()
        )));
    }
    let a = doppler_phase_vector(nu, eta);
    Ok(kron(b_t, b_r).iter().zip(&a).map(|(x, y)| x * y).collect())
}

/// Structural parameters of a path: angles on both sides and Doppler.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructuralParams {
    pub azimuth_tx: f64,
    pub elevation_tx: f64,
    pub azimuth_rx: f64,
    pub elevation_rx: f64,
    pub doppler: f64,
}

impl StructuralParams {
    pub fn new(azimuth_tx: f64, elevation_tx: f64, azimuth_rx: f64, elevation_rx: f64, doppler: f64) -> Self {
        Self { azimuth_tx, elevation_tx, azimuth_rx, elevation_rx, doppler }
    }
}

/// Full single-path parameter set; the complex gain is `r·exp(jψ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParameters {
    pub elevation_tx: f64,
    pub azimuth_tx: f64,
    pub elevation_rx: f64,
    pub azimuth_rx: f64,
    pub doppler: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl PathParameters {
    pub fn new(structural: StructuralParams, amplitude: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude must be ≥ 0, got {amplitude}")));
        }
        let p = Self {
            elevation_tx: structural.elevation_tx,
            azimuth_tx: structural.azimuth_tx,
            elevation_rx: structural.elevation_rx,
            azimuth_rx: structural.azimuth_rx,
            doppler: structural.doppler,
            amplitude,
            phase,
        };
        let all = [p.elevation_tx, p.azimuth_tx, p.elevation_rx, p.azimuth_rx, p.doppler, p.phase];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("path parameters must be finite".into()));
        }
        Ok(p)
    }

    pub fn structural(&self) -> StructuralParams {
        StructuralParams {
            azimuth_tx: self.azimuth_tx,
            elevation_tx: self.elevation_tx,
            azimuth_rx: self.azimuth_rx,
            elevation_rx: self.elevation_rx,
            doppler: self.doppler,
        }
    }

    pub fn gain(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Sounder geometry and timing: arrays, sequence, snapshots and frequency
/// basis, plus the polarization pair used in single-polarization work.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundingConfig {
    tx: ArrayModel,
    rx: ArrayModel,
    sequence: SwitchingSequence,
    snapshots: usize,
    snapshot_interval: Option<f64>,
    frequency_basis: Vec<Complex64>,
    tx_pol: Polarization,
    rx_pol: Polarization,
}

impl SoundingConfig {
    pub fn new(tx: ArrayModel, rx: ArrayModel, sequence: SwitchingSequence) -> Result<Self> {
        if tx.element_count() * rx.element_count() != sequence.len() {
            return Err(Error::Dimension(format!(
                "{}×{} antenna pairs but the sequence has {} entries",
                tx.element_count(),
                rx.element_count(),
                sequence.len()
            )));
        }
        Ok(Self {
            tx,
            rx,
            sequence,
            snapshots: 1,
            snapshot_interval: None,
            frequency_basis: vec![Complex64::new(1.0, 0.0)],
            tx_pol: Polarization::V,
            rx_pol: Polarization::V,
        })
    }

    /// `count` snapshots spaced `interval` seconds apart (default
    /// `M_TR·dt`).
    pub fn with_snapshots(mut self, count: usize, interval: Option<f64>) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("at least one snapshot is required".into()));
        }
        if let Some(t) = interval {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("snapshot interval must be positive, got {t}")));
            }
        }
        self.snapshots = count;
        self.snapshot_interval = interval;
        Ok(self)
    }

    pub fn with_frequency_basis(mut self, basis: Vec<Complex64>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidParameter("frequency basis must not be empty".into()));
        }
        self.frequency_basis = basis;
        Ok(self)
    }

    pub fn with_polarization(mut self, tx: Polarization, rx: Polarization) -> Self {
        self.tx_pol = tx;
        self.rx_pol = rx;
        self
    }

    pub fn with_sequence(mut self, sequence: SwitchingSequence) -> Result<Self> {
        if sequence.len() != self.sequence.len() {
            return Err(Error::Dimension(format!(
                "sequence length {} does not match {} antenna pairs",
                sequence.len(),
                self.sequence.len()
            )));
        }
        self.sequence = sequence;
        Ok(self)
    }

    pub fn tx(&self) -> &ArrayModel {
        &self.tx
    }

    pub fn rx(&self) -> &ArrayModel {
        &self.rx
    }

    pub fn sequence(&self) -> &SwitchingSequence {
        &self.sequence
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    pub fn frequency_basis(&self) -> &[Complex64] {
        &self.frequency_basis
    }

    pub fn polarization(&self) -> (Polarization, Polarization) {
        (self.tx_pol, self.rx_pol)
    }

    pub fn pairs(&self) -> usize {
        self.sequence.len()
    }

    /// Length of the stacked signal vector, `M_t·M_TR·M_f`.
    pub fn signal_len(&self) -> usize {
        self.snapshots * self.pairs() * self.frequency_basis.len()
    }

    pub fn snapshot_interval(&self) -> f64 {
        self.snapshot_interval.unwrap_or(self.pairs() as f64 * self.sequence.dt())
    }

    /// Centered snapshot start times `t_m`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let t = self.snapshot_interval();
        centered_indices(self.snapshots).into_iter().map(|m| m * t).collect()
    }

    /// Snapshot Doppler basis `[b_t]_m = exp(j2πν t_m)`.
    pub fn snapshot_basis(&self, nu: f64) -> Vec<Complex64> {
        doppler_phase_vector(nu, &self.snapshot_times())
    }

    /// Activation time of every row of the signal vector for timing `eta`.
    pub fn row_times(&self, eta: &[f64]) -> Vec<f64> {
        let mf = self.frequency_basis.len();
        let mut out = Vec::with_capacity(self.snapshots * eta.len() * mf);
        for tm in self.snapshot_times() {
            for &e in eta {
                out.extend(std::iter::repeat_n(tm + e, mf));
            }
        }
        out
    }

    /// `((b_t ⊗ b_T ⊗ b_R) ⊙ (1 ⊗ a_ν(η))) ⊗ b_f` for given responses.
    pub fn stack(&self, b_t: &[Complex64], b_r: &[Complex64], nu: f64, eta: &[f64]) -> Result<Vec<Complex64>> {
        let pair = basis_vector_single_pol(b_t, b_r, nu, eta)?;
        let with_snapshots = kron(&self.snapshot_basis(nu), &pair);
        Ok(kron(&with_snapshots, &self.frequency_basis))
    }

    /// Single-polarization basis vector for the configured polarization pair
    /// and timing `eta`.
    pub fn basis_vector(&self, mu: &StructuralParams, eta: &[f64]) -> Result<Vec<Complex64>> {
        self.basis_vector_pol(mu, eta, self.tx_pol, self.rx_pol)
    }

    pub fn basis_vector_pol(
        &self,
        mu: &StructuralParams,
        eta: &[f64],
        tx_pol: Polarization,
        rx_pol: Polarization,
    ) -> Result<Vec<Complex64>> {
        let b_t = self.tx.response(tx_pol, mu.azimuth_tx, mu.elevation_tx)?;
        let b_r = self.rx.response(rx_pol, mu.azimuth_rx, mu.elevation_rx)?;
        self.stack(&b_t, &b_r, mu.doppler, eta)
    }
}

/// The four polarization pairs in column order.
pub const POLARIZATION_PAIRS: [(Polarization, Polarization); 4] = [
    (Polarization::H, Polarization::H),
    (Polarization::H, Polarization::V),
    (Polarization::V, Polarization::H),
    (Polarization::V, Polarization::V),
];

/// Polarimetric basis matrix with columns HH, HV, VH, VV (TX pol first).
pub fn basis_matrix_polarimetric(mu: &StructuralParams, cfg: &SoundingConfig) -> Result<DMatrix<Complex64>> {
    basis_matrix_polarimetric_with(mu, cfg, cfg.sequence().eta())
}

pub fn basis_matrix_polarimetric_with(
    mu: &StructuralParams,
    cfg: &SoundingConfig,
    eta: &[f64],
) -> Result<DMatrix<Complex64>> {
    let mut columns = Vec::with_capacity(4);
    for (tp, rp) in POLARIZATION_PAIRS {
        columns.push(cfg.basis_vector_pol(mu, eta, tp, rp)?);
    }
    let rows = columns[0].len();
    Ok(DMatrix::from_fn(rows, 4, |i, j| columns[j][i]))
}

/// Noiseless single-path signal `γ·v` for the configured polarization pair.
pub fn noiseless_signal(path: &PathParameters, cfg: &SoundingConfig) -> Result<Vec<Complex64>> {
    let gamma = path.gain();
    Ok(cfg.basis_vector(&path.structural(), cfg.sequence().eta())?.into_iter().map(|v| gamma * v).collect())
}

/// `y = γ·v + n` with circular Gaussian noise of total variance `σ²` per
/// entry drawn from stream 0 of `seed`.
pub fn synth_received_signal(
    path: &PathParameters,
    cfg: &SoundingConfig,
    sigma: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let mut rng = rng::stream(seed, 0);
    synth_received_signal_with(path, cfg, sigma, &mut rng)
}

pub fn synth_received_signal_with<R: rand::Rng + ?Sized>(
    path: &PathParameters,
    cfg: &SoundingConfig,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise std must be ≥ 0, got {sigma}")));
    }
    let mut y = noiseless_signal(path, cfg)?;
    if sigma > 0.0 {
        for v in &mut y {
            *v += rng::complex_gaussian(rng, sigma);
        }
    }
    Ok(y)
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn sq(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn perm_strategy(max: usize) -> impl Strategy<Value = Vec<usize>> {
        (1..=max).prop_flat_map(|m| Just((1..=m).collect::<Vec<_>>()).prop_shuffle())
    }

    proptest! {
        #[test]
        fn timing_is_centered_with_fixed_norm(perm in perm_strategy(40), dt in 1e-7f64..1.0) {
            let m = perm.len();
            let seq = SwitchingSequence::new(perm, dt).unwrap();
            let trivial = SwitchingSequence::trivial(m, dt).unwrap();
            let sum: f64 = seq.eta().iter().sum();
            prop_assert!(sum.abs() <= 1e-12 * dt * m as f64);
            let n = sq(seq.eta());
            let n0 = sq(trivial.eta());
            prop_assert!((n - n0).abs() <= 1e-12 * n0.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn kron_sequence_norm_is_product(a in perm_strategy(8), b in perm_strategy(8)) {
            let ea = SwitchingSequence::new(a, 0.5).unwrap();
            let eb = SwitchingSequence::new(b, 2.0).unwrap();
            let k = kron_sequence(ea.eta(), eb.eta());
            let lhs = sq(&k).sqrt();
            let rhs = sq(ea.eta()).sqrt() * sq(eb.eta()).sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn joint_sequence_is_a_kronecker_sum(a in perm_strategy(6), b in perm_strategy(6), dt in 1e-6f64..1.0) {
            let (mt, mr) = (a.len(), b.len());
            let tx = SwitchingSequence::new(a, mr as f64 * dt).unwrap();
            let rx = SwitchingSequence::new(b, dt).unwrap();
            let joint = kron_joint_sequence(&tx, &rx, dt).unwrap();
            for t in 0..mt {
                for r in 0..mr {
                    let want = tx.eta()[t] + rx.eta()[r];
                    prop_assert!((joint.eta()[t * mr + r] - want).abs() <= 1e-12 * dt * (mt * mr) as f64);
                }
            }
        }
    }

    #[test]
    fn synthesized_noise_honors_the_snr_definition() {
        let tx = ArrayModel::isotropic_ula(8, 0.5, Polarization::V).unwrap();
        let rx = ArrayModel::single_isotropic(Polarization::V);
        let cfg = SoundingConfig::new(tx, rx, SwitchingSequence::trivial(8, 1e-3).unwrap())
            .unwrap()
            .with_snapshots(500, None)
            .unwrap();
        let path = PathParameters::new(StructuralParams::new(1.0, 0.0, 0.0, 0.0, 3.0), 2.0, 0.1).unwrap();
        let snr_db = 6.0;
        let sigma = path.amplitude / 10f64.powf(snr_db / 20.0);
        let y = synth_received_signal(&path, &cfg, sigma, 4).unwrap();
        let clean = noiseless_signal(&path, &cfg).unwrap();
        let noise: f64 = y.iter().zip(&clean).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / y.len() as f64;
        let signal: f64 = clean.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len() as f64;
        let measured = 10.0 * (signal / noise).log10();
        assert!((measured - snr_db).abs() < 0.2, "{measured}");
    }
}
