//! Antenna array models and polarimetric responses.
//!
//! Two kinds of array are supported:
//!
//! * measured arrays described by an EADF, i.e. a matrix `G` of 2-D Fourier
//!   coefficients per element and polarization, so that the response is
//!   `b = G · (β_φ ⊗ β_ϑ)` with `β_x = exp(j·x·α_x)`;
//! * closed-form uniform linear arrays of isotropic, perfectly polarized
//!   elements, `[b]_k = exp(-j·m_k·2π(d/λ)cos φ)`. The ULA ignores elevation.
//!
//! The Fourier series of an EADF is evaluated at any angle; outside the
//! angular support that was measured this is an extrapolation and its
//! quality is the caller's responsibility.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_complex::Complex64;

use crate::linalg::centered_indices;
use crate::{Error, Result};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            other => Err(Error::Format(format!("unknown polarization `{other}`"))),
        }
    }
}

/// `[β]_k = exp(j·angle·[α]_k)`.
pub fn steering_phase_vector(angle: f64, alpha: &[f64]) -> Vec<Complex64> {
    alpha.iter().map(|&a| Complex64::from_polar(1.0, angle * a)).collect()
}

/// Centered angular frequencies `[-(A-1)/2, …, (A-1)/2]`.
pub fn centered_frequencies(count: usize) -> Vec<f64> {
    centered_indices(count)
}

/// Enhanced aperture distribution function of one polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct Eadf {
    elements: usize,
    /// Row-major `elements × (A_φ·A_ϑ)`; column `i_φ·A_ϑ + i_ϑ`.
    coeffs: Vec<Complex64>,
    alpha_phi: Vec<f64>,
    alpha_theta: Vec<f64>,
    polarization: Polarization,
}

impl Eadf {
    /// Builds an EADF from coefficients in `(element, α_φ, α_ϑ)` row-major
    /// order.
    pub fn new(
        elements: usize,
        a_phi: usize,
        a_theta: usize,
        polarization: Polarization,
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        if elements == 0 || a_phi == 0 || a_theta == 0 {
            return Err(Error::InvalidParameter("EADF needs at least one element and one coefficient per axis".into()));
        }
        if coeffs.len() != elements * a_phi * a_theta {
            return Err(Error::Dimension(format!(
                "EADF expects {} coefficients, got {}",
                elements * a_phi * a_theta,
                coeffs.len()
            )));
        }
        Ok(Self {
            elements,
            coeffs,
            alpha_phi: centered_frequencies(a_phi),
            alpha_theta: centered_frequencies(a_theta),
            polarization,
        })
    }

    /// Frequency-flat pattern: every element has the single coefficient
    /// `gains[m]` at `α = 0`.
    pub fn flat(gains: &[Complex64], polarization: Polarization) -> Result<Self> {
        Self::new(gains.len(), 1, 1, polarization, gains.to_vec())
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn a_phi(&self) -> usize {
        self.alpha_phi.len()
    }

    pub fn a_theta(&self) -> usize {
        self.alpha_theta.len()
    }

    pub fn alpha_phi(&self) -> &[f64] {
        &self.alpha_phi
    }

    pub fn alpha_theta(&self) -> &[f64] {
        &self.alpha_theta
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, element: usize, i_phi: usize, i_theta: usize) -> Complex64 {
        let cols = self.a_phi() * self.a_theta();
        self.coeffs[element * cols + i_phi * self.a_theta() + i_theta]
    }

    /// `G · (β_φ ⊗ β_ϑ)`.
    pub fn response(&self, azimuth: f64, elevation: f64) -> Vec<Complex64> {
        let bp = steering_phase_vector(azimuth, &self.alpha_phi);
        let bt = steering_phase_vector(elevation, &self.alpha_theta);
        let basis = crate::linalg::kron(&bp, &bt);
        self.apply(&basis)
    }

    /// Response together with its azimuth and elevation derivatives:
    /// `G·(j[β_φ⊙α_φ] ⊗ β_ϑ)` and `G·(β_φ ⊗ j[β_ϑ⊙α_ϑ])`.
    pub fn response_with_derivatives(
        &self,
        azimuth: f64,
        elevation: f64,
    ) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
        let bp = steering_phase_vector(azimuth, &self.alpha_phi);
        let bt = steering_phase_vector(elevation, &self.alpha_theta);
        let dbp: Vec<Complex64> = bp.iter().zip(&self.alpha_phi).map(|(b, &a)| J * b * a).collect();
        let dbt: Vec<Complex64> = bt.iter().zip(&self.alpha_theta).map(|(b, &a)| J * b * a).collect();
        let b = self.apply(&crate::linalg::kron(&bp, &bt));
        let d_phi = self.apply(&crate::linalg::kron(&dbp, &bt));
        let d_theta = self.apply(&crate::linalg::kron(&bp, &dbt));
        (b, d_phi, d_theta)
    }

    fn apply(&self, basis: &[Complex64]) -> Vec<Complex64> {
        let cols = basis.len();
        self.coeffs.chunks_exact(cols).map(|row| row.iter().zip(basis).map(|(g, x)| g * x).sum()).collect()
    }

    /// Reads the text format: header `M A_phi A_theta polarization`, then
    /// `M·A_φ·A_ϑ` lines of `re im` in `(element, α_φ, α_ϑ)` row-major order.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = NumberedLines::new(reader);
        let (lineno, header) = lines.next_nonempty()?.ok_or_else(|| Error::Format("EADF file is empty".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!("line {lineno}: expected `M A_phi A_theta polarization`")));
        }
        let m = parse_usize(fields[0], lineno)?;
        let a_phi = parse_usize(fields[1], lineno)?;
        let a_theta = parse_usize(fields[2], lineno)?;
        let pol = fields[3].parse::<Polarization>().map_err(|e| Error::Format(format!("line {lineno}: {e}")))?;
        let coeffs = lines.read_complex(m * a_phi * a_theta)?;
        Self::new(m, a_phi, a_theta, pol, coeffs)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "{} {} {} {}", self.elements, self.a_phi(), self.a_theta(), self.polarization)?;
        for c in &self.coeffs {
            writeln!(writer, "{} {}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// Uniformly sampled polarimetric pattern of an array over a full period in
/// azimuth and elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPattern {
    pub elements: usize,
    pub azimuths: Vec<f64>,
    pub elevations: Vec<f64>,
    /// `(element, azimuth, elevation)` row-major.
    pub samples: Vec<Complex64>,
}

impl SampledPattern {
    /// Samples `f(element, φ, ϑ)` on the canonical grid
    /// `φ_p = 2πp/N_φ`, `ϑ_q = 2πq/N_ϑ`.
    pub fn sample<F>(elements: usize, n_phi: usize, n_theta: usize, mut f: F) -> Self
    where
        F: FnMut(usize, f64, f64) -> Complex64,
    {
        let azimuths = uniform_period(n_phi);
        let elevations = uniform_period(n_theta);
        let mut samples = Vec::with_capacity(elements * n_phi * n_theta);
        for m in 0..elements {
            for &az in &azimuths {
                for &el in &elevations {
                    samples.push(f(m, az, el));
                }
            }
        }
        Self { elements, azimuths, elevations, samples }
    }

    /// Reads header `M N_phi N_theta` followed by `M·N_φ·N_ϑ` lines `re im`;
    /// sample angles are the canonical uniform grid.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = NumberedLines::new(reader);
        let (lineno, header) = lines.next_nonempty()?.ok_or_else(|| Error::Format("pattern file is empty".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!("line {lineno}: expected `M N_phi N_theta`")));
        }
        let m = parse_usize(fields[0], lineno)?;
        let n_phi = parse_usize(fields[1], lineno)?;
        let n_theta = parse_usize(fields[2], lineno)?;
        let samples = lines.read_complex(m * n_phi * n_theta)?;
        Ok(Self { elements: m, azimuths: uniform_period(n_phi), elevations: uniform_period(n_theta), samples })
    }
}

fn uniform_period(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

fn check_uniform_period(angles: &[f64], axis: &str) -> Result<()> {
    let n = angles.len();
    if n == 0 || n % 2 == 0 {
        return Err(Error::Format(format!("{axis} grid must have an odd number of samples, got {n}")));
    }
    let expected = uniform_period(n);
    if angles.iter().zip(&expected).any(|(a, e)| (a - e).abs() > 1e-9) {
        return Err(Error::Format(format!("{axis} grid must be uniform over [0, 2π) starting at 0")));
    }
    Ok(())
}

/// 2-D discrete Fourier coefficients of a sampled pattern, arranged so that
/// [`Eadf::response`] reproduces the samples at the sample angles.
pub fn eadf_from_sampled_pattern(pattern: &SampledPattern, polarization: Polarization) -> Result<Eadf> {
    check_uniform_period(&pattern.azimuths, "azimuth")?;
    check_uniform_period(&pattern.elevations, "elevation")?;
    let (np, nt) = (pattern.azimuths.len(), pattern.elevations.len());
    if pattern.samples.len() != pattern.elements * np * nt {
        return Err(Error::Dimension(format!(
            "pattern expects {} samples, got {}",
            pattern.elements * np * nt,
            pattern.samples.len()
        )));
    }
    let alpha_phi = centered_frequencies(np);
    let alpha_theta = centered_frequencies(nt);
    // kernels[a][p] = exp(-j α_a x_p)
    let kernel = |alpha: &[f64], angles: &[f64]| -> Vec<Vec<Complex64>> {
        alpha.iter().map(|&a| angles.iter().map(|&x| Complex64::from_polar(1.0, -a * x)).collect()).collect()
    };
    let kp = kernel(&alpha_phi, &pattern.azimuths);
    let kt = kernel(&alpha_theta, &pattern.elevations);
    let scale = 1.0 / (np * nt) as f64;
    let mut coeffs = Vec::with_capacity(pattern.elements * np * nt);
    for m in 0..pattern.elements {
        let block = &pattern.samples[m * np * nt..(m + 1) * np * nt];
        // transform along elevation first: partial[p][b]
        let partial: Vec<Vec<Complex64>> = (0..np)
            .map(|p| {
                kt.iter().map(|row| row.iter().zip(&block[p * nt..(p + 1) * nt]).map(|(k, s)| k * s).sum()).collect()
            })
            .collect();
        for row in &kp {
            for b in 0..nt {
                let c: Complex64 = row.iter().zip(&partial).map(|(k, pr)| k * pr[b]).sum();
                coeffs.push(c * scale);
            }
        }
    }
    Eadf::new(pattern.elements, np, nt, polarization, coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayKind {
    /// Measured polarimetric array; a polarization may be absent.
    MeasuredEadf { h: Option<Eadf>, v: Option<Eadf> },
    /// ULA of isotropic elements that are perfectly polarized along
    /// `polarization`; the cross-polarized response is identically zero.
    IsotropicUla { spacing_over_lambda: f64, polarization: Polarization },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayModel {
    kind: ArrayKind,
    elements: usize,
    indices: Vec<f64>,
}

impl ArrayModel {
    pub fn isotropic_ula(elements: usize, spacing_over_lambda: f64, polarization: Polarization) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidParameter("array needs at least one element".into()));
        }
        if !(spacing_over_lambda > 0.0 && spacing_over_lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "element spacing must be positive, got {spacing_over_lambda}"
            )));
        }
        Ok(Self {
            kind: ArrayKind::IsotropicUla { spacing_over_lambda, polarization },
            elements,
            indices: centered_indices(elements),
        })
    }

    /// Single isotropic antenna, e.g. the receiver of a SIMO sounder.
    pub fn single_isotropic(polarization: Polarization) -> Self {
        Self::isotropic_ula(1, 0.5, polarization).expect("valid single-element array")
    }

    pub fn measured(h: Option<Eadf>, v: Option<Eadf>) -> Result<Self> {
        for (slot, e) in [(Polarization::H, &h), (Polarization::V, &v)] {
            if let Some(e) = e {
                if e.polarization() != slot {
                    return Err(Error::InvalidParameter(format!(
                        "{} EADF supplied for the {slot} polarization",
                        e.polarization()
                    )));
                }
            }
        }
        let elements = match (&h, &v) {
            (None, None) => return Err(Error::InvalidParameter("measured array needs at least one EADF".into())),
            (Some(a), Some(b)) if a.elements() != b.elements() => {
                return Err(Error::Dimension(format!(
                    "H and V EADFs disagree on element count ({} vs {})",
                    a.elements(),
                    b.elements()
                )))
            }
            (Some(a), _) => a.elements(),
            (None, Some(b)) => b.elements(),
        };
        Ok(Self { kind: ArrayKind::MeasuredEadf { h, v }, elements, indices: centered_indices(elements) })
    }

    pub fn kind(&self) -> &ArrayKind {
        &self.kind
    }

    pub fn element_count(&self) -> usize {
        self.elements
    }

    /// Centered element index vector `m`.
    pub fn centered_indices(&self) -> &[f64] {
        &self.indices
    }

    pub fn is_isotropic_ula(&self) -> bool {
        matches!(self.kind, ArrayKind::IsotropicUla { .. })
    }

    pub fn supports(&self, pol: Polarization) -> bool {
        match &self.kind {
            ArrayKind::MeasuredEadf { h, v } => match pol {
                Polarization::H => h.is_some(),
                Polarization::V => v.is_some(),
            },
            ArrayKind::IsotropicUla { .. } => true,
        }
    }

    pub fn eadf(&self, pol: Polarization) -> Option<&Eadf> {
        match &self.kind {
            ArrayKind::MeasuredEadf { h, v } => match pol {
                Polarization::H => h.as_ref(),
                Polarization::V => v.as_ref(),
            },
            ArrayKind::IsotropicUla { .. } => None,
        }
    }

    fn measured_eadf(&self, pol: Polarization) -> Result<&Eadf> {
        self.eadf(pol).ok_or(Error::MissingPolarization(pol))
    }

    /// Phase `μ_φ = 2π(d/λ)cos φ` of an isotropic ULA and its derivative.
    fn ula_phase(spacing: f64, azimuth: f64) -> (f64, f64) {
        (2.0 * PI * spacing * azimuth.cos(), -2.0 * PI * spacing * azimuth.sin())
    }

    /// Array response of length `M` at `(φ, ϑ)`.
    pub fn response(&self, pol: Polarization, azimuth: f64, elevation: f64) -> Result<Vec<Complex64>> {
        match &self.kind {
            ArrayKind::MeasuredEadf { .. } => Ok(self.measured_eadf(pol)?.response(azimuth, elevation)),
            ArrayKind::IsotropicUla { spacing_over_lambda, polarization } => {
                if pol != *polarization {
                    return Ok(vec![Complex64::new(0.0, 0.0); self.elements]);
                }
                let (mu, _) = Self::ula_phase(*spacing_over_lambda, azimuth);
                Ok(self.indices.iter().map(|&m| Complex64::from_polar(1.0, -m * mu)).collect())
            }
        }
    }

    /// `(∂b/∂φ, ∂b/∂ϑ)` at `(φ, ϑ)`.
    pub fn response_derivatives(
        &self,
        pol: Polarization,
        azimuth: f64,
        elevation: f64,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let (_, d_phi, d_theta) = self.response_with_derivatives(pol, azimuth, elevation)?;
        Ok((d_phi, d_theta))
    }

    /// `(b, ∂b/∂φ, ∂b/∂ϑ)` in one evaluation.
    pub fn response_with_derivatives(
        &self,
        pol: Polarization,
        azimuth: f64,
        elevation: f64,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
        match &self.kind {
            ArrayKind::MeasuredEadf { .. } => {
                Ok(self.measured_eadf(pol)?.response_with_derivatives(azimuth, elevation))
            }
            ArrayKind::IsotropicUla { spacing_over_lambda, polarization } => {
                let zero = vec![Complex64::new(0.0, 0.0); self.elements];
                if pol != *polarization {
                    return Ok((zero.clone(), zero.clone(), zero));
                }
                let (mu, dmu) = Self::ula_phase(*spacing_over_lambda, azimuth);
                let b: Vec<Complex64> = self.indices.iter().map(|&m| Complex64::from_polar(1.0, -m * mu)).collect();
                let d_phi = b.iter().zip(&self.indices).map(|(x, &m)| x * (-J * m * dmu)).collect();
                Ok((b, d_phi, zero))
            }
        }
    }

    /// Response of `pol`, or zeros when the array does not define it.
    pub fn response_or_zero(&self, pol: Polarization, azimuth: f64, elevation: f64) -> Vec<Complex64> {
        self.response(pol, azimuth, elevation).unwrap_or_else(|_| vec![Complex64::new(0.0, 0.0); self.elements])
    }

    /// [`high_xpr_check`] on the responses sampled at `angles`.
    pub fn is_high_xpr(&self, angles: &[(f64, f64)], threshold_db: f64) -> Result<bool> {
        let h: Vec<_> = angles.iter().map(|&(a, e)| self.response_or_zero(Polarization::H, a, e)).collect();
        let v: Vec<_> = angles.iter().map(|&(a, e)| self.response_or_zero(Polarization::V, a, e)).collect();
        high_xpr_check(&h, &v, threshold_db)
    }
}

/// Default cross-polarization ratio threshold in dB.
pub const DEFAULT_XPR_DB: f64 = 30.0;

/// True iff every element at every sampled angle is dominated by one
/// polarization: `min(|b_H|,|b_V|) / max(|b_H|,|b_V|) ≤ 10^(-threshold/20)`.
/// Elements silent in both polarizations pass.
///
/// `h[i]` and `v[i]` are the responses at the i-th grid angle.
pub fn high_xpr_check(h: &[Vec<Complex64>], v: &[Vec<Complex64>], threshold_db: f64) -> Result<bool> {
    if h.len() != v.len() {
        return Err(Error::Dimension(format!(
            "H and V sampled on different grids ({} vs {} angles)",
            h.len(),
            v.len()
        )));
    }
    let limit = 10f64.powf(-threshold_db / 20.0);
    for (bh, bv) in h.iter().zip(v) {
        if bh.len() != bv.len() {
            return Err(Error::Dimension(format!(
                "H and V responses have different lengths ({} vs {})",
                bh.len(),
                bv.len()
            )));
        }
        for (x, y) in bh.iter().zip(bv) {
            let (a, b) = (x.norm(), y.norm());
            let hi = a.max(b);
            if hi == 0.0 {
                continue;
            }
            if a.min(b) / hi > limit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn parse_usize(s: &str, lineno: usize) -> Result<usize> {
    s.parse::<usize>().map_err(|_| Error::Format(format!("line {lineno}: `{s}` is not a non-negative integer")))
}

pub(crate) struct NumberedLines<R> {
    inner: std::io::Lines<R>,
    lineno: usize,
}

impl<R: BufRead> NumberedLines<R> {
    pub(crate) fn new(reader: R) -> Self {
        Self { inner: reader.lines(), lineno: 0 }
    }

    pub(crate) fn next_nonempty(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.lineno += 1;
            let line = line.map_err(|e| Error::Format(format!("line {}: {e}", self.lineno)))?;
            let trimmed = line.trim();
            if !trimmed.is_empty() && !trimmed.starts_with('#') {
                return Ok(Some((self.lineno, trimmed.to_string())));
            }
        }
        Ok(None)
    }

    fn read_complex(&mut self, count: usize) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let (lineno, line) = self
                .next_nonempty()?
                .ok_or_else(|| Error::Format(format!("expected {count} complex values, found {}", out.len())))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Format(format!("line {lineno}: expected `re im`")));
            }
            let parse =
                |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("line {lineno}: `{s}` is not a number")));
            out.push(Complex64::new(parse(parts[0])?, parse(parts[1])?));
        }
        if let Some((lineno, _)) = self.next_nonempty()? {
            return Err(Error::Format(format!("line {lineno}: unexpected trailing data")));
        }
        Ok(out)
    }
}
