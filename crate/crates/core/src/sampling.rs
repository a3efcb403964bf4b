//! Deterministic sample sets: seeded unit-sphere points in C^4 with a fixed
//! anchor prefix, antipodal probe directions in C^3 charts, and
//! order-independent pairwise summation.

use num::complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Number of fixed anchor points prefixed to every sphere sample set.
pub const N_ANCHORS: usize = 11;

/// The four coordinate points, the balanced point with all coordinates 1/2,
/// and the six two-coordinate points (e_i + e_j)/sqrt(2). Anchors pin the
/// normalization shift and the sup-norm diagnostics to exact locations; the
/// rest of a sample set is seeded Gaussian directions.
fn anchors() -> Vec<[Complex64; 4]> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(N_ANCHORS);
    for i in 0..4 {
        let mut p = [zero; 4];
        p[i] = one;
        out.push(p);
    }
    out.push([Complex64::new(0.5, 0.0); 4]);
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut p = [zero; 4];
            p[i] = r;
            p[j] = r;
            out.push(p);
        }
    }
    out
}

fn gaussian_unit<const N: usize>(rng: &mut ChaCha8Rng) -> Option<[Complex64; N]> {
    let mut v = [Complex64::new(0.0, 0.0); N];
    let mut norm2 = 0.0;
    for c in &mut v {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *c = Complex64::new(re, im);
        norm2 += c.norm_sqr();
    }
    if norm2 < 1e-24 {
        return None;
    }
    let inv = norm2.sqrt().recip();
    for c in &mut v {
        *c *= inv;
    }
    Some(v)
}

/// `n` unit-norm points in C^4: the anchor prefix followed by seeded complex
/// Gaussian directions (ChaCha8 stream). Deterministic in `(n, seed)`; the
/// first `min(n, N_ANCHORS)` points never depend on the seed.
pub fn sphere_samples(n: usize, seed: u64) -> Vec<[Complex64; 4]> {
    let mut out = anchors();
    out.truncate(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < n {
        if let Some(p) = gaussian_unit::<4>(&mut rng) {
            out.push(p);
        }
    }
    out
}

/// `n_dirs` unit directions in a C^3 chart arranged as antipodal pairs
/// (v, -v), so spherical means cancel odd-order terms. Deterministic in
/// `(n_dirs, seed)`.
pub fn fixed_directions(n_dirs: usize, seed: u64) -> Vec<[Complex64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_dirs);
    while out.len() < n_dirs {
        let Some(v) = gaussian_unit::<3>(&mut rng) else {
            continue;
        };
        out.push(v);
        if out.len() < n_dirs {
            out.push([-v[0], -v[1], -v[2]]);
        }
    }
    out
}

/// Pairwise (balanced-tree) summation in index order. Used wherever a sum
/// must not depend on thread count or chunking.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(p: &[Complex64]) -> f64 {
        p.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    #[test]
    fn anchor_prefix_is_fixed_and_unit_norm() {
        let s = sphere_samples(64, 7);
        assert_eq!(s.len(), 64);
        assert_eq!(s[0][0], Complex64::new(1.0, 0.0));
        assert_eq!(s[3][3], Complex64::new(1.0, 0.0));
        assert_eq!(s[4], [Complex64::new(0.5, 0.0); 4]);
        for p in &s {
            assert!((norm(p) - 1.0).abs() < 1e-12);
        }
        let t = sphere_samples(64, 99);
        assert_eq!(&s[..N_ANCHORS], &t[..N_ANCHORS]);
        assert_ne!(s[N_ANCHORS], t[N_ANCHORS]);
    }

    #[test]
    fn samples_are_deterministic_in_seed() {
        let a = sphere_samples(200, 42);
        let b = sphere_samples(200, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn directions_come_in_antipodal_pairs() {
        let d = fixed_directions(64, 5);
        assert_eq!(d.len(), 64);
        for k in 0..32 {
            for i in 0..3 {
                assert_eq!(d[2 * k + 1][i], -d[2 * k][i]);
            }
            assert!((norm(&d[2 * k]) - 1.0).abs() < 1e-12);
        }
        assert_eq!(d, fixed_directions(64, 5));
    }

    #[test]
    fn pairwise_sum_matches_exact_totals() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[3.5]), 3.5);
        let w = [0.1; 1000];
        assert!((pairwise_sum(&w) - 100.0).abs() < 1e-10);
    }
}
