//! Known-mixing fixtures and independent scoring shared by the integration
//! tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::TAU;

use csi_gait::numerics::{Matrix, SeededRng, Tensor3};

pub const RATE_HZ: f64 = 100.0;

/// Pearson |r| computed long-hand.
pub fn abs_corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (sab / (saa * sbb).sqrt()).abs()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest per-source |r| under the pairing that maximizes the total,
/// found by trying every permutation.
pub fn matched_min_corr(est: &Matrix<f64>, truth: &Matrix<f64>) -> f64 {
    let p = truth.cols();
    let r: Vec<Vec<f64>> =
        (0..p).map(|i| (0..p).map(|j| abs_corr(&truth.column(i), &est.column(j))).collect()).collect();
    let best = permutations(p)
        .into_iter()
        .max_by(|a, b| {
            let sa: f64 = a.iter().enumerate().map(|(i, &j)| r[i][j]).sum();
            let sb: f64 = b.iter().enumerate().map(|(i, &j)| r[i][j]).sum();
            sa.total_cmp(&sb)
        })
        .unwrap();
    best.iter().enumerate().map(|(i, &j)| r[i][j]).fold(1.0, f64::min)
}

fn mix(s: &Matrix<f64>, m: usize, rng: &mut SeededRng) -> Matrix<f64> {
    let a = Matrix::from_fn(s.cols(), m, |_, _| rng.gaussian());
    s.matmul(&a).unwrap()
}

/// Two i.i.d. uniform sources mixed into `m` channels.
pub fn uniform_mixture(seed: u64, n: usize, m: usize) -> (Matrix<f64>, Matrix<f64>) {
    let mut rng = SeededRng::new(seed);
    let s = Matrix::from_fn(n, 2, |_, _| rng.uniform_range(-1.0, 1.0));
    (mix(&s, m, &mut rng), s)
}

/// Two AR(1) sources with coefficients 0.9 and 0.2.
pub fn ar1_mixture(seed: u64, n: usize, m: usize) -> (Matrix<f64>, Matrix<f64>) {
    let mut rng = SeededRng::new(seed);
    let coeffs = [0.9, 0.2];
    let mut s = Matrix::zeros(n, 2);
    for j in 0..2 {
        let mut prev = 0.0;
        for t in 0..n {
            prev = coeffs[j] * prev + rng.gaussian();
            s[(t, j)] = prev;
        }
    }
    (mix(&s, m, &mut rng), s)
}

/// Exact non-negative product `W₀·H₀` with rectified-sinusoid activations.
pub fn planted_nmf(seed: u64, n: usize, m: usize) -> (Matrix<f64>, Matrix<f64>) {
    let mut rng = SeededRng::new(seed);
    let f = [rng.uniform_range(0.8, 1.2), rng.uniform_range(1.8, 2.4)];
    let w = Matrix::from_fn(n, 2, |t, j| (TAU * f[j] * t as f64 / RATE_HZ).sin().max(0.0));
    // each basis row has zeros so the factorization is identifiable
    let h = Matrix::from_fn(2, m, |i, c| if (c + i) % 3 == 0 { 0.0 } else { rng.uniform_range(0.2, 1.0) });
    (w.matmul(&h).unwrap(), w)
}

fn orthonormal(rows: usize, cols: usize, rng: &mut SeededRng) -> Matrix<f64> {
    let mut g = Matrix::from_fn(rows, cols, |_, _| rng.gaussian());
    csi_gait::numerics::orthonormalize_columns(&mut g);
    g
}

/// `G ×₁ A ×₂ B ×₃ C` with a diagonal core of distinct weights and
/// orthonormal factors; `A` holds the planted temporal sources.
pub fn planted_tucker(seed: u64, n: usize, m: usize, k: usize) -> (Tensor3<f64>, Matrix<f64>) {
    let mut rng = SeededRng::new(seed);
    let a = orthonormal(n, 2, &mut rng);
    let b = orthonormal(m, 2, &mut rng);
    let c = orthonormal(k, 2, &mut rng);
    let g = [3.0, 1.0];
    let x = Tensor3::from_fn([n, m, k], |t, j, l| (0..2).map(|r| g[r] * a[(t, r)] * b[(j, r)] * c[(l, r)]).sum());
    (x, a)
}

pub fn random_tensor(seed: u64, dims: [usize; 3]) -> Tensor3<f64> {
    let mut rng = SeededRng::new(seed);
    Tensor3::from_fn(dims, |_, _, _| rng.gaussian())
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

pub fn brute_centroid(g: &[Vec<f64>]) -> Vec<f64> {
    let mut c = vec![0.0; g[0].len()];
    for f in g {
        for (k, v) in f.iter().enumerate() {
            c[k] += v;
        }
    }
    c.iter().map(|v| v / g.len() as f64).collect()
}

pub fn brute_isv(g: &[Vec<f64>]) -> f64 {
    let mu = brute_centroid(g);
    let mut s = 0.0;
    for f in g {
        s += euclid(f, &mu);
    }
    s / g.len() as f64
}

pub fn brute_isd(centroids: &[Vec<f64>]) -> f64 {
    let c = centroids.len();
    let mut s = 0.0;
    for i in 0..c {
        for j in 0..c {
            if i != j {
                s += euclid(&centroids[i], &centroids[j]);
            }
        }
    }
    s / (c * (c - 1)) as f64
}

/// Histogram intersection over 32 equal bins spanning both classes, averaged
/// over dimensions and class pairs, in percent.
pub fn brute_overlap(groups: &[Vec<Vec<f64>>]) -> f64 {
    let bins = 32;
    let d = groups[0][0].len();
    let mut total = 0.0;
    let mut terms = 0;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            for k in 0..d {
                let all: Vec<f64> = groups[i].iter().chain(&groups[j]).map(|f| f[k]).collect();
                let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                terms += 1;
                if hi <= lo {
                    total += 1.0;
                    continue;
                }
                let w = (hi - lo) / bins as f64;
                let hist = |g: &[Vec<f64>]| {
                    let mut h = vec![0.0; bins];
                    for f in g {
                        let mut b = 0;
                        while b + 1 < bins && f[k] >= lo + (b + 1) as f64 * w {
                            b += 1;
                        }
                        h[b] += 1.0 / g.len() as f64;
                    }
                    h
                };
                let (ha, hb) = (hist(&groups[i]), hist(&groups[j]));
                total += ha.iter().zip(&hb).map(|(a, b)| a.min(*b)).sum::<f64>();
            }
        }
    }
    100.0 * total / terms as f64
}

/// Standard normal CDF by Simpson quadrature of the density from −12.
pub fn normal_cdf(x: f64) -> f64 {
    let a = -12.0;
    let n = 20_000;
    let h = (x - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (TAU).sqrt();
    let mut s = pdf(a) + pdf(x);
    for i in 1..n {
        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `n` points of dimension `d` in two to four loose gaussian clusters.
pub fn random_feature_set(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<u32>) {
    let mut rng = SeededRng::new(seed);
    let classes = 2 + rng.index(3) as u32;
    let centres: Vec<Vec<f64>> = (0..classes).map(|_| (0..d).map(|_| 2.0 * rng.gaussian()).collect()).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let c = (i as u32) % classes;
        x.push(centres[c as usize].iter().map(|m| m + rng.gaussian()).collect());
        y.push(c);
    }
    (x, y)
}
