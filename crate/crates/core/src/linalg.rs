//! Small dense vector helpers shared by the model, ambiguity and Fisher code.

use num_complex::Complex64;

/// Kronecker product of two complex vectors; `a` is the slow index.
pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Kronecker product of two real vectors.
pub fn kron_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Elementwise product.
pub fn hadamard(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Inner product `uᴴ v` (conjugate-linear in the first argument).
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(u: &[Complex64]) -> f64 {
    norm_sqr(u).sqrt()
}

/// Centered index vector `[0, …, n-1] - (n-1)/2`.
pub fn centered_indices(n: usize) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    (0..n).map(|k| k as f64 - c).collect()
}

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so results are reproducible regardless of how the terms
/// were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Uniform grid of `count` points over `[start, stop]`; a single point sits
/// at `start`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| start + step * i as f64).collect()
        }
    }
}

/// Midpoints of `count` equal cells partitioning `[start, stop]`.
pub fn midpoints(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let width = (stop - start) / count as f64;
    (0..count).map(|i| start + width * (i as f64 + 0.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_orders_first_argument_slow() {
        let a = [c(1.0, 0.0), c(2.0, 0.0)];
        let b = [c(1.0, 0.0), c(0.0, 1.0), c(3.0, 0.0)];
        let k = kron(&a, &b);
        assert_eq!(k.len(), 6);
        assert_eq!(k[1], c(0.0, 1.0));
        assert_eq!(k[4], c(0.0, 2.0));
        assert_eq!(kron_real(&[-0.5, 0.5], &[-0.5, 0.5]), vec![0.25, -0.25, -0.25, 0.25]);
    }

    #[test]
    fn inner_conjugates_first_argument() {
        let u = [c(0.0, 1.0)];
        let v = [c(0.0, 1.0)];
        assert_eq!(inner(&u, &v), c(1.0, 0.0));
    }

    #[test]
    fn centered_indices_sum_to_zero() {
        assert_eq!(centered_indices(4), vec![-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(centered_indices(1), vec![0.0]);
        for n in 1..20 {
            assert_eq!(centered_indices(n).iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(midpoints(0.0, 1.0, 2), vec![0.25, 0.75]);
    }
}
