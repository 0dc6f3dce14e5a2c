//! Blind source separation of normalized CSI into per-person signals.
//!
//! Six methods share one request/result shape: FastICA, SOBI, PCA, sparse
//! NMF, wavelet band selection and Tucker (HOOI) decomposition. Every method
//! returns an n × p matrix of sources; which fields of the result are filled
//! depends on the method.

pub mod align;
pub mod dwt;
pub mod fastica;
pub mod nmf;
pub mod sobi;
pub mod tucker;
pub mod wavelet;
pub mod whiten;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::enumeration::AntennaReduction;
use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix, Tensor3};
use crate::preprocess::NormalizedTrial;
use crate::scalar::Real;

pub use align::{align_sources, best_assignment, correlation, Alignment};
pub use nmf::NmfInput;

pub const SOBI_MIN_SAMPLES: usize = 50;
pub const WAVELET_MIN_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    FastICA,
    SOBI,
    PCA,
    NMF,
    Wavelet,
    Tensor,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::FastICA, Method::SOBI, Method::PCA, Method::NMF, Method::Wavelet, Method::Tensor];

    pub fn name(self) -> &'static str {
        match self {
            Method::FastICA => "FastICA",
            Method::SOBI => "SOBI",
            Method::PCA => "PCA",
            Method::NMF => "NMF",
            Method::Wavelet => "Wavelet",
            Method::Tensor => "Tensor",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fastica" | "ica" => Ok(Method::FastICA),
            "sobi" => Ok(Method::SOBI),
            "pca" => Ok(Method::PCA),
            "nmf" => Ok(Method::NMF),
            "wavelet" | "dwt" => Ok(Method::Wavelet),
            "tensor" | "tucker" => Ok(Method::Tensor),
            _ => Err(Error::Config(format!("unknown separation method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FastIcaOptions {
    /// Scale `a` of the log-cosh contrast.
    pub a: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FastIcaOptions {
    fn default() -> Self {
        Self { a: 1.0, tol: 1e-4, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SobiOptions {
    pub lags: Vec<usize>,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for SobiOptions {
    fn default() -> Self {
        Self { lags: sobi::default_lags(), max_sweeps: 100, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmfOptions {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub input: NmfInput,
}

impl Default for NmfOptions {
    fn default() -> Self {
        Self { alpha: 0.1, tol: 1e-5, max_iter: 500, input: NmfInput::Shift }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveletOptions {
    pub levels: usize,
    pub band_hz: (f64, f64),
    pub min_peak_separation_hz: f64,
}

impl Default for WaveletOptions {
    fn default() -> Self {
        Self { levels: 4, band_hz: (0.5, 3.0), min_peak_separation_hz: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuckerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TuckerOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 100 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeparationOptions {
    /// How antennas enter the matrix methods. Wavelet always averages and
    /// Tensor always keeps the antenna mode.
    pub antenna_mode: AntennaReduction,
    pub fastica: FastIcaOptions,
    pub sobi: SobiOptions,
    pub nmf: NmfOptions,
    pub wavelet: WaveletOptions,
    pub tucker: TuckerOptions,
}

#[derive(Debug, Clone)]
pub struct SeparationRequest<T> {
    /// n × subcarriers × antennas.
    pub tensor: Tensor3<T>,
    pub sample_rate_hz: f64,
    pub p: usize,
    pub method: Method,
    pub seed: u64,
}

impl<T: Real> SeparationRequest<T> {
    pub fn from_normalized(norm: &NormalizedTrial<T>, method: Method, p: usize, seed: u64) -> Self {
        Self { tensor: norm.tensor.clone(), sample_rate_hz: norm.sample_rate_hz, p, method, seed }
    }

    /// Single-antenna request from an n × m matrix.
    pub fn from_matrix(x: &Matrix<T>, sample_rate_hz: f64, method: Method, p: usize, seed: u64) -> Self {
        let tensor = Tensor3::from_fn([x.rows(), x.cols(), 1], |t, j, _| x[(t, j)]);
        Self { tensor, sample_rate_hz, p, method, seed }
    }
}

#[derive(Debug, Clone)]
pub struct SeparationResult<T> {
    pub method: Method,
    /// n × p, one column per separated source.
    pub sources: Matrix<T>,
    /// p × m map from centred data to sources (FastICA, SOBI, PCA).
    pub unmixing: Option<Matrix<T>>,
    /// p × m non-negative basis (NMF).
    pub basis: Option<Matrix<T>>,
    pub iterations: usize,
    pub converged: bool,
    /// Per-iteration objective: negentropy (FastICA), off-diagonal energy
    /// (SOBI), penalized residual (NMF), fit (Tensor).
    pub objective_trace: Vec<T>,
    /// Fraction of variance per component (PCA).
    pub explained_variance_ratio: Option<Vec<T>>,
    /// SOBI: lagged covariances too weak for a reliable rotation.
    pub low_confidence: bool,
    pub metadata: BTreeMap<String, String>,
}

impl<T: Real> SeparationResult<T> {
    fn new(method: Method, sources: Matrix<T>) -> Self {
        Self {
            method,
            sources,
            unmixing: None,
            basis: None,
            iterations: 0,
            converged: true,
            objective_trace: Vec::new(),
            explained_variance_ratio: None,
            low_confidence: false,
            metadata: BTreeMap::new(),
        }
    }
}

fn fit_matrix<T: Real>(tensor: &Tensor3<T>, mode: AntennaReduction) -> Matrix<T> {
    match mode {
        AntennaReduction::Average => tensor.mean_over_last(),
        AntennaReduction::Stack => tensor.stack_last_as_rows(),
    }
}

fn project<T: Real>(x: &Matrix<T>, mean: &[T], unmixing: &Matrix<T>) -> Result<Matrix<T>> {
    let xc = Matrix::from_fn(x.rows(), x.cols(), |t, j| x[(t, j)] - mean[j]);
    xc.matmul_t(unmixing)
}

pub fn separate<T: Real>(req: &SeparationRequest<T>, opts: &SeparationOptions) -> Result<SeparationResult<T>> {
    let [n, m, k] = req.tensor.dims();
    let p = req.p;
    if p == 0 || p > m {
        return Err(Error::invalid(format!("source count {p} must lie in 1..={m}")));
    }
    if n < 2 || k == 0 {
        return Err(Error::invalid(format!("separation needs at least two samples, got {n}")));
    }
    if !req.tensor.all_finite() {
        return Err(Error::invalid("separation input has non-finite entries"));
    }
    let averaged = req.tensor.mean_over_last();
    let mode = opts.antenna_mode;
    let mut result = match req.method {
        Method::FastICA => {
            let fitm = fit_matrix(&req.tensor, mode);
            let white = whiten::whiten(&fitm, p)?;
            let o = &opts.fastica;
            let ica = fastica::fit(&white, T::lit(o.a), T::lit(o.tol), o.max_iter, req.seed)?;
            let unmixing = ica.w.matmul(&white.transform)?;
            let mut sources = project(&averaged, &white.mean, &unmixing)?;
            whiten::standardize_columns(&mut sources);
            let mut r = SeparationResult::new(Method::FastICA, sources);
            r.unmixing = Some(unmixing);
            r.iterations = ica.iterations;
            r.converged = ica.converged;
            r.objective_trace = ica.objective;
            r
        }
        Method::SOBI => {
            if n <= SOBI_MIN_SAMPLES {
                return Err(Error::invalid(format!("SOBI needs more than {SOBI_MIN_SAMPLES} samples, got {n}")));
            }
            let fitm = fit_matrix(&req.tensor, mode);
            let white = whiten::whiten(&fitm, p)?;
            let segments: Vec<Matrix<T>> = match mode {
                AntennaReduction::Average => vec![white.z.clone()],
                AntennaReduction::Stack => (0..k)
                    .map(|a| {
                        let xa = Matrix::from_fn(n, m, |t, j| req.tensor.get(t, j, a));
                        project(&xa, &white.mean, &white.transform)
                    })
                    .collect::<Result<_>>()?,
            };
            let o = &opts.sobi;
            let fit = sobi::fit(&segments, &o.lags, o.max_sweeps, T::lit(o.tol))?;
            let unmixing = fit.jd.w.matmul(&white.transform)?;
            let mut sources = project(&averaged, &white.mean, &unmixing)?;
            whiten::standardize_columns(&mut sources);
            let floor = sobi::confidence_floor::<T>(p, n);
            let mut r = SeparationResult::new(Method::SOBI, sources);
            r.low_confidence = fit.max_lag_norm < floor;
            r.metadata.insert("max_lag_norm".into(), fit.max_lag_norm.to_string());
            r.metadata.insert("confidence_floor".into(), floor.to_string());
            r.unmixing = Some(unmixing);
            r.iterations = fit.jd.sweeps;
            r.converged = fit.jd.converged;
            r.objective_trace = fit.jd.off_trace;
            r
        }
        Method::PCA => {
            let fitm = fit_matrix(&req.tensor, mode);
            let mean = fitm.column_means();
            let eig = sym_eig(&fitm.centered().gram_scaled())?;
            let total: T = eig.values.iter().map(|&l| l.max(T::zero())).sum();
            if !(total > T::zero()) {
                return Err(Error::DegenerateInput("PCA input has zero variance".into()));
            }
            let unmixing = Matrix::from_fn(p, m, |i, j| eig.vectors[(j, i)]);
            let sources = project(&averaged, &mean, &unmixing)?;
            let mut r = SeparationResult::new(Method::PCA, sources);
            r.explained_variance_ratio = Some(eig.values[..p].iter().map(|&l| l.max(T::zero()) / total).collect());
            r.unmixing = Some(unmixing);
            r
        }
        Method::NMF => {
            let o = &opts.nmf;
            let fitm = o.input.prepare(&fit_matrix(&req.tensor, mode))?;
            let fit = nmf::factorize(&fitm, p, T::lit(o.alpha), T::lit(o.tol), o.max_iter)?;
            let sources = match mode {
                AntennaReduction::Average => fit.w,
                AntennaReduction::Stack => {
                    let inv = T::one() / T::from_usize_lossy(k);
                    Matrix::from_fn(n, p, |t, i| (0..k).map(|a| fit.w[(t * k + a, i)]).sum::<T>() * inv)
                }
            };
            let mut r = SeparationResult::new(Method::NMF, sources);
            r.basis = Some(fit.h);
            r.iterations = fit.iterations;
            r.converged = fit.converged;
            r.objective_trace = fit.objective;
            r
        }
        Method::Wavelet => {
            if n < WAVELET_MIN_SAMPLES {
                return Err(Error::invalid(format!("wavelet separation needs {WAVELET_MIN_SAMPLES} samples, got {n}")));
            }
            let o = &opts.wavelet;
            let fit =
                wavelet::separate(&averaged, p, req.sample_rate_hz, o.levels, o.band_hz, o.min_peak_separation_hz)?;
            let mut r = SeparationResult::new(Method::Wavelet, fit.sources);
            let peaks: Vec<String> = fit.peaks.iter().map(|pk| format!("{:.4}", pk.freq_hz)).collect();
            r.metadata.insert("peaks_hz".into(), peaks.join(","));
            r.metadata.insert("kept_bands".into(), fit.kept_bands.join(","));
            r
        }
        Method::Tensor => {
            let ranks = [p, p.min(m), p.min(k)];
            let o = &opts.tucker;
            let t = tucker::hooi(&req.tensor, ranks, T::lit(o.tol), o.max_iter)?;
            let mut r = SeparationResult::new(Method::Tensor, t.factors[0].clone());
            r.iterations = t.iterations;
            r.converged = t.converged;
            r.metadata.insert("ranks".into(), format!("{},{},{}", ranks[0], ranks[1], ranks[2]));
            r.objective_trace = t.fit_trace;
            r
        }
    };
    result.metadata.insert("antenna_mode".into(), format!("{mode:?}").to_lowercase());
    Ok(result)
}
