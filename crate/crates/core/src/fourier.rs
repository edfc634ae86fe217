//! Spectral screening of switching orders.
//!
//! The cost of a sequence is the median magnitude of the DFT of its
//! integer timing vector `η/dt`. A flat, low spectrum spreads the
//! ambiguity side lobes, so the sequence with the smallest median is used
//! to seed the Fisher refinement. The search either samples permutations
//! (with a sample size from Cochran's formula) or enumerates all of them.

use std::cmp::Ordering;
use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::rng::{self, StreamRng};
use crate::signal::{eta_from_permutation, SwitchingSequence};
use crate::{Complex64, Error, Result};

/// Largest pair count for exhaustive enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 9;

/// Largest Fourier-step sample materialized in memory.
pub const SAMPLE_LIMIT: u64 = 5_000_000;

/// Relative tolerance below which two costs count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierStepConfig {
    pub confidence_level: f64,
    pub margin: f64,
    /// Prior proportion `p` in Cochran's formula.
    pub prior: f64,
    pub pairs: usize,
    pub dt: f64,
    pub seed: u64,
}

impl FourierStepConfig {
    pub fn new(pairs: usize, dt: f64, seed: u64) -> Self {
        Self { confidence_level: 0.99, margin: 0.05, prior: 0.5, pairs, dt, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.confidence_level) || !open_unit(self.margin) || !open_unit(self.prior) {
            return Err(Error::InvalidParameter(format!(
                "confidence level, margin and prior must lie in (0, 1); got {}, {}, {}",
                self.confidence_level, self.margin, self.prior
            )));
        }
        if self.pairs == 0 {
            return Err(Error::InvalidParameter("sequence needs at least one pair".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("switching interval must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Reusable FFT plan for one sequence length.
pub struct FourierCost {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl FourierCost {
    pub fn new(len: usize) -> Self {
        Self { fft: FftPlanner::new().plan_fft_forward(len), len }
    }

    /// Median spectrum magnitude of `eta / dt`.
    pub fn evaluate(&self, eta: &[f64], dt: f64) -> f64 {
        assert_eq!(eta.len(), self.len, "timing vector length does not match the plan");
        let mut buf: Vec<Complex64> = eta.iter().map(|&e| Complex64::new(e / dt, 0.0)).collect();
        self.fft.process(&mut buf);
        median(buf.iter().map(|z| z.norm()).collect())
    }

    fn evaluate_perm(&self, perm: &[usize]) -> f64 {
        // η/dt depends on the permutation only
        let eta = eta_from_permutation(perm, 1.0, perm.len()).expect("valid permutation");
        self.evaluate(&eta, 1.0)
    }
}

/// Median; even lengths average the two central order statistics.
pub fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn fourier_cost(seq: &SwitchingSequence) -> f64 {
    FourierCost::new(seq.len()).evaluate(seq.eta(), seq.dt())
}

/// Standard normal quantile (Wichura's AS241, about 1e-16 relative).
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0, 1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = [
            3.387_132_872_796_366_5,
            133.141_667_891_784_38,
            1_971.590_950_306_551_3,
            13_731.693_765_509_461,
            45_921.953_931_549_87,
            67_265.770_927_008_7,
            33_430.575_583_588_13,
            2_509.080_928_730_122_7,
        ];
        let den = [
            1.0,
            42.313_330_701_600_91,
            687.187_007_492_057_9,
            5_394.196_021_424_751,
            21_213.794_301_586_597,
            39_307.895_800_092_71,
            28_729.085_735_721_943,
            5_226.495_278_852_545,
        ];
        return q * horner(&num, r) / horner(&den, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = [
            1.423_437_110_749_683_5,
            4.630_337_846_156_546,
            5.769_497_221_460_691,
            3.647_848_324_763_204_5,
            1.270_458_252_452_368_4,
            0.241_780_725_177_450_6,
            0.022_723_844_989_269_184,
            7.745_450_142_783_414e-4,
        ];
        let den = [
            1.0,
            2.053_191_626_637_759,
            1.676_384_830_183_803_8,
            0.689_767_334_985_1,
            0.148_103_976_427_480_08,
            0.015_198_666_563_616_457,
            5.475_938_084_995_345e-4,
            1.050_750_071_644_416_9e-9,
        ];
        horner(&num, r) / horner(&den, r)
    } else {
        r -= 5.0;
        let num = [
            6.657_904_643_501_103,
            5.463_784_911_164_114,
            1.784_826_539_917_291_3,
            0.296_560_571_828_504_9,
            0.026_532_189_526_576_124,
            0.001_242_660_947_388_078_4,
            2.711_555_568_743_487_6e-5,
            2.010_334_399_292_288_1e-7,
        ];
        let den = [
            1.0,
            0.599_832_206_555_888,
            0.136_929_880_922_735_8,
            0.014_875_361_290_850_615,
            7.868_691_311_456_133e-4,
            1.846_318_317_510_054_8e-5,
            1.421_511_758_316_446e-7,
            2.044_263_103_389_939_7e-15,
        ];
        horner(&num, r) / horner(&den, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `n!`, saturating at `u64::MAX`.
fn factorial_saturating(n: usize) -> u64 {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k)).unwrap_or(u64::MAX)
}

/// Cochran's `⌈t²·p(1−p)/d²⌉`, capped at the population size `M_TR!`.
pub fn cochran_sample_size(cfg: &FourierStepConfig) -> Result<u64> {
    cfg.validate()?;
    let t = normal_quantile(1.0 - (1.0 - cfg.confidence_level) / 2.0);
    let n0 = (t * t * cfg.prior * (1.0 - cfg.prior) / (cfg.margin * cfg.margin)).ceil();
    let n0 = if n0 >= u64::MAX as f64 { u64::MAX } else { n0 as u64 };
    Ok(n0.max(1).min(factorial_saturating(cfg.pairs)))
}

/// `n` uniform permutations of `1..=len`, drawn with replacement.
pub fn sample_sequences(len: usize, n: usize, dt: f64, rng: &mut StreamRng) -> Result<Vec<SwitchingSequence>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let mut perm: Vec<usize> = (1..=len).collect();
    (0..n)
        .map(|_| {
            perm.shuffle(rng);
            SwitchingSequence::new(perm.clone(), dt)
        })
        .collect()
}

/// Index-ordered argmin with near-ties resolved to the smaller permutation.
fn better(a: (&[usize], f64), b: (&[usize], f64)) -> bool {
    let scale = a.1.abs().max(b.1.abs()).max(f64::MIN_POSITIVE);
    if (a.1 - b.1).abs() <= TIE_TOLERANCE * scale {
        a.0.cmp(b.0) == Ordering::Less
    } else {
        a.1 < b.1
    }
}

fn argmin(candidates: Vec<Vec<usize>>, plan: &FourierCost) -> Vec<usize> {
    let costs: Vec<f64> = candidates.par_iter().map(|p| plan.evaluate_perm(p)).collect();
    let mut best = 0;
    for i in 1..candidates.len() {
        if better((&candidates[i], costs[i]), (&candidates[best], costs[best])) {
            best = i;
        }
    }
    candidates.into_iter().nth(best).expect("nonempty candidate set")
}

fn all_permutations(len: usize) -> Vec<Vec<usize>> {
    (1..=len).permutations(len).collect()
}

/// Fourier step: best sequence among a Cochran-sized sample, or among all
/// permutations once the sample would cover the whole population.
pub fn fourier_step(cfg: &FourierStepConfig) -> Result<SwitchingSequence> {
    let n0 = cochran_sample_size(cfg)?;
    if n0 > SAMPLE_LIMIT {
        return Err(Error::Capacity(format!("Fourier step needs {n0} samples, the limit is {SAMPLE_LIMIT}")));
    }
    let plan = FourierCost::new(cfg.pairs);
    let candidates = if n0 == factorial_saturating(cfg.pairs) {
        all_permutations(cfg.pairs)
    } else {
        let mut rng = rng::stream(cfg.seed, 0);
        sample_sequences(cfg.pairs, n0 as usize, cfg.dt, &mut rng)?.into_iter().map(|s| s.perm().to_vec()).collect()
    };
    SwitchingSequence::new(argmin(candidates, &plan), cfg.dt)
}

/// Exact minimizer over all `len!` permutations.
pub fn brute_force_fourier_step(len: usize, dt: f64) -> Result<SwitchingSequence> {
    if len > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity(format!(
            "exhaustive search over {len}! permutations exceeds the limit of {BRUTE_FORCE_LIMIT}"
        )));
    }
    if len == 0 {
        return Err(Error::InvalidParameter("sequence needs at least one pair".into()));
    }
    SwitchingSequence::new(argmin(all_permutations(len), &FourierCost::new(len)), dt)
}
