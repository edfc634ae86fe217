//! Runtime scaling measurements: fixed kernels per problem size, median
//! wall times, and the least-squares slope of `log t` against `log n`.

use std::time::{Duration, Instant};

use crate::ambiguity::{ambiguity_polarimetric_xpr, polarimetric_similarity, XprCheck};
use crate::array::{ArrayModel, Eadf, Polarization};
use crate::fourier::FourierCost;
use crate::signal::{SoundingConfig, StructuralParams, SwitchingSequence};
use crate::{Complex64, Error, Result};

/// Dual-polarized array whose elements alternate between pure H and pure V
/// radiation, so every element has infinite XPR and the H and V responses
/// have disjoint supports.
pub fn alternating_polarization_array(elements: usize, offset: usize) -> Result<ArrayModel> {
    let (a_phi, a_theta) = (3, 3);
    let mut h = Vec::with_capacity(elements * a_phi * a_theta);
    let mut v = Vec::with_capacity(elements * a_phi * a_theta);
    let zero = Complex64::new(0.0, 0.0);
    for m in 0..elements {
        for a in 0..a_phi * a_theta {
            let c = Complex64::new(((m * 7 + a) as f64).sin() + 1.5, ((m + 3 * a) as f64).cos());
            let (ch, cv) = if (m + offset) % 2 == 0 { (c, zero) } else { (zero, c) };
            h.push(ch);
            v.push(cv);
        }
    }
    ArrayModel::measured(
        Some(Eadf::new(elements, a_phi, a_theta, Polarization::H, h)?),
        Some(Eadf::new(elements, a_phi, a_theta, Polarization::V, v)?),
    )
}

/// Kernel whose runtime is measured against the pair count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKernel {
    /// One subspace-similarity evaluation (QR of both bases plus a 4×4 SVD).
    AmbiguityGeneral,
    /// One high-XPR evaluation (four normalized inner products).
    AmbiguityHighXpr,
    /// One spectrum-median evaluation.
    FourierCost,
}

impl ScalingKernel {
    pub fn label(self) -> &'static str {
        match self {
            ScalingKernel::AmbiguityGeneral => "ambiguity_general",
            ScalingKernel::AmbiguityHighXpr => "ambiguity_high_xpr",
            ScalingKernel::FourierCost => "fourier_cost",
        }
    }

    /// Closure running the kernel once at `pairs` TX×RX pairs; the TX array
    /// holds `pairs/2` elements and the RX array 2.
    pub fn prepare(self, pairs: usize) -> Result<Box<dyn FnMut() -> f64>> {
        if pairs < 2 {
            return Err(Error::InvalidParameter(format!("scaling needs at least 2 pairs, got {pairs}")));
        }
        match self {
            ScalingKernel::FourierCost => {
                let plan = FourierCost::new(pairs);
                let seq = SwitchingSequence::trivial(pairs, 1.0)?;
                Ok(Box::new(move || plan.evaluate(seq.eta(), 1.0)))
            }
            ScalingKernel::AmbiguityGeneral | ScalingKernel::AmbiguityHighXpr => {
                if pairs % 2 != 0 {
                    return Err(Error::InvalidParameter("ambiguity scaling needs an even pair count".into()));
                }
                let tx = alternating_polarization_array(pairs / 2, 0)?;
                let rx = alternating_polarization_array(2, 1)?;
                let cfg = SoundingConfig::new(tx, rx, SwitchingSequence::trivial(pairs, 1e-3)?)?;
                let mu = StructuralParams::new(0.3, 1.0, 2.0, 0.4, 12.0);
                let mu2 = StructuralParams::new(0.5, 1.2, 1.8, 0.6, -7.0);
                if self == ScalingKernel::AmbiguityGeneral {
                    Ok(Box::new(move || polarimetric_similarity(&mu, &mu2, &cfg).map(|s| s.s1()).unwrap_or(f64::NAN)))
                } else {
                    Ok(Box::new(move || {
                        ambiguity_polarimetric_xpr(&mu, &mu2, &cfg, XprCheck::Skip).unwrap_or(f64::NAN)
                    }))
                }
            }
        }
    }
}

/// Median over `batches` of the mean time per call, each batch running
/// long enough to exceed `min_batch`.
pub fn time_kernel(kernel: &mut dyn FnMut() -> f64, batches: usize, min_batch: Duration) -> f64 {
    let mut reps = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(kernel());
        }
        if start.elapsed() >= min_batch || reps >= 1 << 24 {
            break;
        }
        reps *= 2;
    }
    let mut samples: Vec<f64> = (0..batches.max(1))
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(kernel());
            }
            start.elapsed().as_secs_f64() / reps as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("slope needs at least two (size, time) pairs".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("sizes must not all be equal".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingMeasurement {
    pub kernel: ScalingKernel,
    pub sizes: Vec<usize>,
    /// Seconds per call.
    pub seconds: Vec<f64>,
    pub slope: f64,
}

pub fn measure_scaling(
    kernel: ScalingKernel,
    sizes: &[usize],
    batches: usize,
    min_batch: Duration,
) -> Result<ScalingMeasurement> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("size list is empty".into()));
    }
    let mut seconds = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut f = kernel.prepare(n)?;
        seconds.push(time_kernel(&mut *f, batches, min_batch));
    }
    let x: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&x, &seconds)?;
    Ok(ScalingMeasurement { kernel, sizes: sizes.to_vec(), seconds, slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn kernels_run() {
        for k in [ScalingKernel::AmbiguityGeneral, ScalingKernel::AmbiguityHighXpr, ScalingKernel::FourierCost] {
            let mut f = k.prepare(8).unwrap();
            assert!(f().is_finite(), "{}", k.label());
        }
        assert!(ScalingKernel::AmbiguityGeneral.prepare(7).is_err());
    }
}
