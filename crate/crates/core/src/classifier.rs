//! One-vs-one RBF-kernel SVM.
//!
//! Each class pair is trained with an SMO solver that picks the maximal
//! KKT-violating pair on every step. Training samples are sorted into a
//! canonical order first, so the model does not depend on input order.
//! Voting ties go to the smallest label.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MODEL_HEADER: &str = "csi-gait-svm";
pub const MODEL_VERSION: u32 = 1;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// `None` derives γ from the training data.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Per-feature z-scoring fitted on the training set.
    pub standardize: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, gamma: None, tol: 1e-3, max_iter: 10_000, standardize: false }
    }
}

/// γ = 1 / (d · var), where var is the sample variance pooled over every
/// entry of the N × d feature matrix.
pub fn compute_gamma<T: Real>(features: &[Vec<T>]) -> Result<T> {
    let d = features.first().map_or(0, Vec::len);
    if features.len() < 2 || d == 0 {
        return Err(Error::invalid("gamma needs at least two non-empty feature vectors"));
    }
    if features.iter().any(|f| f.len() != d) {
        return Err(Error::invalid("feature vectors differ in length"));
    }
    let count = features.len() * d;
    let mean = features.iter().flatten().copied().sum::<T>() / T::from_usize_lossy(count);
    let var = features.iter().flatten().map(|&v| (v - mean) * (v - mean)).sum::<T>() / T::from_usize_lossy(count - 1);
    if !(var > T::zero()) || !var.is_finite() {
        return Err(Error::invalid("pooled feature variance is zero"));
    }
    Ok(T::one() / (T::from_usize_lossy(d) * var))
}

pub fn rbf<T: Real>(a: &[T], b: &[T], gamma: T) -> T {
    let d2: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairModel<T> {
    /// Decision value > 0 (or exactly 0) votes for `positive`.
    pub positive: u32,
    pub negative: u32,
    pub support_vectors: Vec<Vec<T>>,
    /// αᵢ·yᵢ for each support vector.
    pub coefficients: Vec<T>,
    pub bias: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> PairModel<T> {
    pub fn decision(&self, x: &[T], gamma: T) -> T {
        self.support_vectors.iter().zip(&self.coefficients).map(|(sv, &c)| c * rbf(sv, x, gamma)).sum::<T>() + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardization<T> {
    pub means: Vec<T>,
    pub stds: Vec<T>,
}

impl<T: Real> Standardization<T> {
    fn fit(x: &[Vec<T>]) -> Self {
        let d = x[0].len();
        let n = T::from_usize_lossy(x.len());
        let means: Vec<T> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<T>() / n).collect();
        let stds = (0..d)
            .map(|j| {
                let v = x.iter().map(|r| (r[j] - means[j]) * (r[j] - means[j])).sum::<T>() / n;
                if v > T::zero() {
                    v.sqrt()
                } else {
                    T::one()
                }
            })
            .collect();
        Self { means, stds }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(self.means.iter().zip(&self.stds)).map(|(&v, (&m, &s))| (v - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier<T> {
    pub labels: Vec<u32>,
    pub gamma: T,
    pub c: T,
    pub dim: usize,
    pub standardization: Option<Standardization<T>>,
    pub pairs: Vec<PairModel<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub label: u32,
    pub votes: BTreeMap<u32, usize>,
}

fn canonical_cmp<T: Real>(a: &(Vec<T>, u32), b: &(Vec<T>, u32)) -> Ordering {
    a.1.cmp(&b.1).then_with(|| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.as_f64().total_cmp(&y.as_f64()))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

struct BinaryFit<T> {
    alpha: Vec<T>,
    bias: T,
    iterations: usize,
    converged: bool,
}

/// Soft-margin dual for labels `y` in {+1, −1}.
fn smo<T: Real>(k: &[Vec<T>], y: &[T], c: T, tol: T, max_iter: usize) -> BinaryFit<T> {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let tau = T::lit(TAU);
    let up = |a: T, yi: T| (yi > T::zero() && a < c) || (yi < T::zero() && a > T::zero());
    let low = |a: T, yi: T| (yi > T::zero() && a > T::zero()) || (yi < T::zero() && a < c);

    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut i = None;
        let mut gmax = T::neg_infinity();
        let mut j = None;
        let mut gmin = T::infinity();
        for t in 0..n {
            let v = -y[t] * grad[t];
            if up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = Some(t);
            }
            if low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i, j) else {
            converged = true;
            break;
        };
        if gmax - gmin < tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + q(i, j) + q(i, j);
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - q(i, j) - q(i, j);
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // ρ from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (T::infinity(), T::neg_infinity());
    let (mut free, mut sum_free) = (0usize, T::zero());
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < T::zero() {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if alpha[t] <= T::zero() {
            if y[t] > T::zero() {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / T::from_usize_lossy(free) } else { (ub + lb) * T::lit(0.5) };
    BinaryFit { alpha, bias: -rho, iterations, converged }
}

pub fn train<T: Real>(features: &[Vec<T>], labels: &[u32], params: &SvmParams) -> Result<TrainedClassifier<T>> {
    if features.len() != labels.len() {
        return Err(Error::invalid("feature and label counts differ"));
    }
    let dim = features.first().map_or(0, Vec::len);
    if dim == 0 || features.iter().any(|f| f.len() != dim) {
        return Err(Error::invalid("feature vectors must share one non-zero dimension"));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("training features contain non-finite values"));
    }
    let mut class_labels: Vec<u32> = labels.to_vec();
    class_labels.sort_unstable();
    class_labels.dedup();
    if class_labels.len() < 2 {
        return Err(Error::invalid("training needs at least two classes"));
    }
    if !(params.c > 0.0) {
        return Err(Error::invalid("C must be positive"));
    }

    let standardization = params.standardize.then(|| Standardization::fit(features));
    let mut samples: Vec<(Vec<T>, u32)> = features
        .iter()
        .zip(labels)
        .map(|(f, &l)| (standardization.as_ref().map_or_else(|| f.clone(), |s| s.apply(f)), l))
        .collect();
    samples.sort_by(canonical_cmp);

    let gamma = match params.gamma {
        Some(g) if g > 0.0 => T::lit(g),
        Some(_) => return Err(Error::invalid("gamma must be positive")),
        None => compute_gamma(&samples.iter().map(|s| s.0.clone()).collect::<Vec<_>>())?,
    };
    let c = T::lit(params.c);
    let tol = T::lit(params.tol);

    let pair_list: Vec<(u32, u32)> = class_labels
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| class_labels[i + 1..].iter().map(move |&b| (a, b)))
        .collect();
    let pairs = pair_list
        .par_iter()
        .map(|&(a, b)| {
            let subset: Vec<&(Vec<T>, u32)> = samples.iter().filter(|s| s.1 == a || s.1 == b).collect();
            let y: Vec<T> = subset.iter().map(|s| if s.1 == a { T::one() } else { -T::one() }).collect();
            let k: Vec<Vec<T>> =
                subset.iter().map(|si| subset.iter().map(|sj| rbf(&si.0, &sj.0, gamma)).collect()).collect();
            let fit = smo(&k, &y, c, tol, params.max_iter);
            let mut support_vectors = Vec::new();
            let mut coefficients = Vec::new();
            for (t, &al) in fit.alpha.iter().enumerate() {
                if al > T::zero() {
                    support_vectors.push(subset[t].0.clone());
                    coefficients.push(al * y[t]);
                }
            }
            PairModel {
                positive: a,
                negative: b,
                support_vectors,
                coefficients,
                bias: fit.bias,
                iterations: fit.iterations,
                converged: fit.converged,
            }
        })
        .collect();
    Ok(TrainedClassifier { labels: class_labels, gamma, c, dim, standardization, pairs })
}

fn parse_field<X: std::str::FromStr>(tok: Option<&str>, line: u64, what: &str) -> Result<X> {
    let tok = tok.ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} '{tok}'") })
}

impl<T: Real> TrainedClassifier<T> {
    pub fn all_converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }

    pub fn predict(&self, x: &[T]) -> Result<Prediction> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!("expected {} features, got {}", self.dim, x.len())));
        }
        let x = self.standardization.as_ref().map_or_else(|| x.to_vec(), |s| s.apply(x));
        let mut votes: BTreeMap<u32, usize> = self.labels.iter().map(|&l| (l, 0)).collect();
        for p in &self.pairs {
            // decision values within rounding of zero are ties and go to the smaller label
            let scale = p.coefficients.iter().map(|c| c.abs()).sum::<T>() + p.bias.abs();
            let slack = T::lit(64.0) * T::epsilon() * scale;
            let winner = if p.decision(&x, self.gamma) >= -slack { p.positive } else { p.negative };
            *votes.get_mut(&winner).expect("pair labels are model labels") += 1;
        }
        // BTreeMap iterates in ascending label order, so the first maximum is the smallest label
        let mut label = self.labels[0];
        let mut best = 0;
        for (&l, &v) in &votes {
            if v > best {
                best = v;
                label = l;
            }
        }
        Ok(Prediction { label, votes })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[T]| v.iter().map(|x| x.to_exact_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "{MODEL_HEADER} v{MODEL_VERSION}").unwrap();
        writeln!(s, "gamma {}", self.gamma.to_exact_string()).unwrap();
        writeln!(s, "c {}", self.c.to_exact_string()).unwrap();
        writeln!(s, "dim {}", self.dim).unwrap();
        let labels: Vec<String> = self.labels.iter().map(u32::to_string).collect();
        writeln!(s, "labels {}", labels.join(" ")).unwrap();
        match &self.standardization {
            None => writeln!(s, "standardization none").unwrap(),
            Some(st) => {
                writeln!(s, "standardization yes").unwrap();
                writeln!(s, "means {}", join(&st.means)).unwrap();
                writeln!(s, "stds {}", join(&st.stds)).unwrap();
            }
        }
        writeln!(s, "pairs {}", self.pairs.len()).unwrap();
        for p in &self.pairs {
            writeln!(
                s,
                "pair {} {} {} {} {} {}",
                p.positive,
                p.negative,
                p.support_vectors.len(),
                p.bias.to_exact_string(),
                p.iterations,
                p.converged
            )
            .unwrap();
            for (sv, c) in p.support_vectors.iter().zip(&p.coefficients) {
                writeln!(s, "sv {} {}", c.to_exact_string(), join(sv)).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l));
        let mut next = |key: &str| -> Result<(u64, Vec<String>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::Format(format!("model file ends before '{key}'")))?;
            let mut toks = line.split_whitespace();
            match toks.next() {
                Some(k) if k == key => Ok((no, toks.map(str::to_string).collect())),
                other => Err(Error::Parse { line: no, msg: format!("expected '{key}', found {other:?}") }),
            }
        };
        let (no, version) = next(MODEL_HEADER)?;
        if version.first().map(String::as_str) != Some(&format!("v{MODEL_VERSION}")) {
            return Err(Error::Parse { line: no, msg: format!("unsupported model version {version:?}") });
        }
        let reals = |no: u64, toks: &[String], what: &str| -> Result<Vec<T>> {
            toks.iter().map(|t| parse_field(Some(t), no, what)).collect()
        };
        let (no, t) = next("gamma")?;
        let gamma: T = parse_field(t.first().map(String::as_str), no, "gamma")?;
        let (no, t) = next("c")?;
        let c: T = parse_field(t.first().map(String::as_str), no, "C")?;
        let (no, t) = next("dim")?;
        let dim: usize = parse_field(t.first().map(String::as_str), no, "dim")?;
        let (no, t) = next("labels")?;
        let labels: Vec<u32> = t.iter().map(|x| parse_field(Some(x), no, "label")).collect::<Result<_>>()?;
        let (no, t) = next("standardization")?;
        let standardization = match t.first().map(String::as_str) {
            Some("none") => None,
            Some("yes") => {
                let (no, m) = next("means")?;
                let means = reals(no, &m, "mean")?;
                let (no, s) = next("stds")?;
                let stds = reals(no, &s, "std")?;
                if means.len() != dim || stds.len() != dim {
                    return Err(Error::Parse { line: no, msg: "standardization length differs from dim".into() });
                }
                Some(Standardization { means, stds })
            }
            _ => return Err(Error::Parse { line: no, msg: "standardization must be 'none' or 'yes'".into() }),
        };
        let (no, t) = next("pairs")?;
        let count: usize = parse_field(t.first().map(String::as_str), no, "pair count")?;
        let mut pairs = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, t) = next("pair")?;
            let mut it = t.iter().map(String::as_str);
            let positive = parse_field(it.next(), no, "label")?;
            let negative = parse_field(it.next(), no, "label")?;
            let nsv: usize = parse_field(it.next(), no, "support vector count")?;
            let bias = parse_field(it.next(), no, "bias")?;
            let iterations = parse_field(it.next(), no, "iterations")?;
            let converged = parse_field(it.next(), no, "converged flag")?;
            let mut support_vectors = Vec::with_capacity(nsv);
            let mut coefficients = Vec::with_capacity(nsv);
            for _ in 0..nsv {
                let (no, t) = next("sv")?;
                let vals = reals(no, &t, "support vector entry")?;
                if vals.len() != dim + 1 {
                    return Err(Error::Parse { line: no, msg: format!("support vector needs {} values", dim + 1) });
                }
                coefficients.push(vals[0]);
                support_vectors.push(vals[1..].to_vec());
            }
            pairs.push(PairModel { positive, negative, support_vectors, coefficients, bias, iterations, converged });
        }
        Ok(Self { labels, gamma, c, dim, standardization, pairs })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
