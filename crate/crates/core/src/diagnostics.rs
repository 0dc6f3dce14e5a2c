//! Classification metrics, feature-space diagnostics (ISV, ISD, PDR,
//! overlap) and the tabular report built from them.
//!
//! The overlap measure is this crate's own definition: for every feature
//! dimension and class pair, the histogram intersection of the two classes
//! over 32 shared bins, averaged and expressed in percent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const OVERLAP_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Macro,
    Micro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics<T> {
    pub accuracy: T,
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

fn ratio<T: Real>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_usize_lossy(num) / T::from_usize_lossy(den)
    }
}

fn f1_of<T: Real>(p: T, r: T) -> T {
    if p + r > T::zero() {
        T::lit(2.0) * p * r / (p + r)
    } else {
        T::zero()
    }
}

/// Averaged over the classes present in `truths`.
pub fn classification_metrics<T: Real>(
    predictions: &[u32],
    truths: &[u32],
    averaging: Averaging,
) -> Result<ClassificationMetrics<T>> {
    if predictions.len() != truths.len() {
        return Err(Error::invalid("prediction and truth counts differ"));
    }
    if truths.is_empty() {
        return Err(Error::invalid("metrics need at least one prediction"));
    }
    let correct = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    let accuracy = ratio(correct, truths.len());
    let classes: BTreeSet<u32> = truths.iter().copied().collect();
    let counts: Vec<(usize, usize, usize)> = classes
        .iter()
        .map(|&c| {
            let mut tp = 0;
            let mut fp = 0;
            let mut fnn = 0;
            for (&p, &t) in predictions.iter().zip(truths) {
                match (p == c, t == c) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fnn += 1,
                    _ => {}
                }
            }
            (tp, fp, fnn)
        })
        .collect();
    let (precision, recall, f1) = match averaging {
        Averaging::Macro => {
            let k = T::from_usize_lossy(counts.len());
            let (mut ps, mut rs, mut fs) = (T::zero(), T::zero(), T::zero());
            for &(tp, fp, fnn) in &counts {
                let p: T = ratio(tp, tp + fp);
                let r: T = ratio(tp, tp + fnn);
                ps += p;
                rs += r;
                fs += f1_of(p, r);
            }
            (ps / k, rs / k, fs / k)
        }
        Averaging::Micro => {
            let tp: usize = counts.iter().map(|c| c.0).sum();
            let fp: usize = counts.iter().map(|c| c.1).sum();
            let fnn: usize = counts.iter().map(|c| c.2).sum();
            let p: T = ratio(tp, tp + fp);
            let r: T = ratio(tp, tp + fnn);
            (p, r, f1_of(p, r))
        }
    };
    Ok(ClassificationMetrics { accuracy, precision, recall, f1 })
}

pub fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

pub fn centroid<T: Real>(group: &[Vec<T>]) -> Result<Vec<T>> {
    let first = group.first().ok_or_else(|| Error::invalid("centroid of an empty class"))?;
    let n = T::from_usize_lossy(group.len());
    Ok((0..first.len()).map(|j| group.iter().map(|f| f[j]).sum::<T>() / n).collect())
}

/// Intra-subject variability: mean distance of each class's vectors from
/// the class centroid.
pub fn isv<T: Real>(groups: &[Vec<Vec<T>>]) -> Result<Vec<T>> {
    groups
        .iter()
        .map(|g| {
            let mu = centroid(g)?;
            Ok(g.iter().map(|f| distance(f, &mu)).sum::<T>() / T::from_usize_lossy(g.len()))
        })
        .collect()
}

/// Inter-subject distinguishability: mean distance over ordered centroid pairs.
pub fn isd<T: Real>(centroids: &[Vec<T>]) -> Result<T> {
    let c = centroids.len();
    if c < 2 {
        return Err(Error::invalid("ISD needs at least two classes"));
    }
    let mut total = T::zero();
    for i in 0..c {
        for j in 0..c {
            if i != j {
                total += distance(&centroids[i], &centroids[j]);
            }
        }
    }
    Ok(total / T::from_usize_lossy(c * (c - 1)))
}

/// Performance degradation rate in percent; negative when the 10-person
/// accuracy is higher.
pub fn pdr<T: Real>(acc_2person: T, acc_10person: T) -> Result<T> {
    if !(acc_2person > T::zero()) {
        return Err(Error::invalid("PDR needs a positive 2-person accuracy"));
    }
    Ok((acc_2person - acc_10person) / acc_2person * T::lit(100.0))
}

pub fn isv_isd_ratio<T: Real>(mean_isv: T, isd: T) -> Result<T> {
    if !(isd > T::zero()) {
        return Err(Error::invalid("ISV/ISD ratio needs a positive ISD"));
    }
    Ok(mean_isv / isd)
}

fn histogram<T: Real>(values: impl Iterator<Item = T>, lo: T, width: T, count: usize) -> Vec<T> {
    let mut h = vec![T::zero(); OVERLAP_BINS];
    for v in values {
        let b = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(OVERLAP_BINS - 1);
        h[b] += T::one();
    }
    let n = T::from_usize_lossy(count);
    h.iter_mut().for_each(|x| *x /= n);
    h
}

/// Histogram-intersection overlap of a pair of classes along one dimension, in [0, 1].
pub fn dimension_overlap<T: Real>(a: &[Vec<T>], b: &[Vec<T>], dim: usize) -> T {
    let vals = a.iter().chain(b).map(|f| f[dim]);
    let lo = vals.clone().fold(T::infinity(), T::min);
    let hi = vals.fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return T::one();
    }
    let width = (hi - lo) / T::from_usize_lossy(OVERLAP_BINS);
    let ha = histogram(a.iter().map(|f| f[dim]), lo, width, a.len());
    let hb = histogram(b.iter().map(|f| f[dim]), lo, width, b.len());
    ha.iter().zip(&hb).map(|(&x, &y)| x.min(y)).sum()
}

/// Mean overlap over dimensions and unordered class pairs, in percent.
pub fn overlap<T: Real>(groups: &[Vec<Vec<T>>]) -> Result<T> {
    if groups.len() < 2 {
        return Err(Error::invalid("overlap needs at least two classes"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("overlap needs at least two samples per class"));
    }
    let d = groups[0][0].len();
    let mut total = T::zero();
    let mut terms = 0usize;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            for k in 0..d {
                total += dimension_overlap(&groups[i], &groups[j], k);
                terms += 1;
            }
        }
    }
    Ok(total / T::from_usize_lossy(terms.max(1)) * T::lit(100.0))
}

/// Splits labelled vectors into classes in ascending label order.
pub fn group_by_label<T: Real>(features: &[Vec<T>], labels: &[u32]) -> (Vec<u32>, Vec<Vec<Vec<T>>>) {
    let mut map: BTreeMap<u32, Vec<Vec<T>>> = BTreeMap::new();
    for (f, &l) in features.iter().zip(labels) {
        map.entry(l).or_default().push(f.clone());
    }
    map.into_iter().unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDiagnostics {
    pub classes: Vec<u32>,
    pub isv_per_class: Vec<f64>,
    pub isv_mean: f64,
    pub isd: Option<f64>,
    pub isv_isd_ratio: Option<f64>,
    /// Percent; absent when a class has fewer than two samples.
    pub overlap: Option<f64>,
}

pub fn feature_diagnostics<T: Real>(features: &[Vec<T>], labels: &[u32]) -> Result<FeatureDiagnostics> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::invalid("feature diagnostics need matching, non-empty features and labels"));
    }
    let (classes, groups) = group_by_label(features, labels);
    let isv_c = isv(&groups)?;
    let isv_mean = isv_c.iter().copied().sum::<T>() / T::from_usize_lossy(isv_c.len());
    let centroids: Vec<Vec<T>> = groups.iter().map(|g| centroid(g)).collect::<Result<_>>()?;
    let isd_v = if classes.len() >= 2 { Some(isd(&centroids)?) } else { None };
    let ratio = isd_v.and_then(|d| isv_isd_ratio(isv_mean, d).ok());
    let ov = overlap(&groups).ok();
    Ok(FeatureDiagnostics {
        classes,
        isv_per_class: isv_c.iter().map(|v| v.as_f64()).collect(),
        isv_mean: isv_mean.as_f64(),
        isd: isd_v.map(Real::as_f64),
        isv_isd_ratio: ratio.map(Real::as_f64),
        overlap: ov.map(Real::as_f64),
    })
}

/// One row of the method comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Accuracy per environment tag, absent when the method has no
    /// evaluated sources there.
    pub env_accuracy: BTreeMap<String, Option<f64>>,
    pub isv: Option<f64>,
    pub isd: Option<f64>,
    pub pdr: Option<f64>,
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub environment: String,
    pub persons: usize,
    pub method: String,
    pub trials: usize,
    pub failed_trials: usize,
    pub evaluated_sources: usize,
    pub accuracy: Option<f64>,
    pub mean_estimated_p: Option<f64>,
    pub isv: Option<f64>,
    pub isd: Option<f64>,
    pub isv_isd_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub environments: Vec<String>,
    pub methods: Vec<MethodSummary>,
    pub scenarios: Vec<ScenarioSummary>,
}

pub const MISSING: &str = "NA";

fn pct(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(|| MISSING.to_string(), f)
}

fn parse_cell(cell: &str, line: u64) -> Result<Option<f64>> {
    if cell == MISSING {
        return Ok(None);
    }
    cell.parse().map(Some).map_err(|_| Error::Parse { line, msg: format!("bad number '{cell}'") })
}

impl DiagnosticsReport {
    pub fn summary_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["Method", "Acc", "Prec", "Rec", "F1"].iter().map(|s| s.to_string()).collect();
        h.extend(self.environments.iter().map(|e| format!("Acc_{e}")));
        h.extend(["ISV", "ISD", "PDR", "Overlap"].iter().map(|s| s.to_string()));
        h
    }

    /// Rates and overlap in percent with one decimal; ISV and ISD with four
    /// decimals; PDR in percent with one decimal.
    pub fn summary_csv(&self) -> String {
        let mut out = self.summary_header().join(",");
        out.push('\n');
        for m in &self.methods {
            let mut row = vec![m.method.clone(), pct(m.accuracy), pct(m.precision), pct(m.recall), pct(m.f1)];
            for e in &self.environments {
                row.push(opt(m.env_accuracy.get(e).copied().flatten(), pct));
            }
            row.push(opt(m.isv, |v| format!("{v:.4}")));
            row.push(opt(m.isd, |v| format!("{v:.4}")));
            row.push(opt(m.pdr, |v| format!("{v:.1}")));
            row.push(opt(m.overlap, |v| format!("{v:.1}")));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses a summary table back into (rounded) numbers. Rates come back as
    /// fractions; scenario rows are not part of the summary.
    pub fn parse_summary_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Format("empty summary".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        let fixed = ["Method", "Acc", "Prec", "Rec", "F1"];
        let tail = ["ISV", "ISD", "PDR", "Overlap"];
        if cols.len() < fixed.len() + tail.len() || cols[..5] != fixed || cols[cols.len() - 4..] != tail {
            return Err(Error::Parse { line: 1, msg: "unexpected summary header".into() });
        }
        let environments: Vec<String> = cols[5..cols.len() - 4]
            .iter()
            .map(|c| {
                c.strip_prefix("Acc_")
                    .map(str::to_string)
                    .ok_or_else(|| Error::Parse { line: 1, msg: format!("bad column '{c}'") })
            })
            .collect::<Result<_>>()?;
        let mut methods = Vec::new();
        for (i, line) in lines {
            let no = i as u64 + 1;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != cols.len() {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected {} cells, got {}", cols.len(), cells.len()),
                });
            }
            let frac = |c: &str| -> Result<Option<f64>> { Ok(parse_cell(c, no)?.map(|v| v / 100.0)) };
            let need = |v: Option<f64>| v.ok_or_else(|| Error::Parse { line: no, msg: "missing rate".into() });
            let k = cells.len();
            methods.push(MethodSummary {
                method: cells[0].to_string(),
                accuracy: need(frac(cells[1])?)?,
                precision: need(frac(cells[2])?)?,
                recall: need(frac(cells[3])?)?,
                f1: need(frac(cells[4])?)?,
                env_accuracy: environments
                    .iter()
                    .zip(&cells[5..k - 4])
                    .map(|(e, c)| Ok((e.clone(), frac(c)?)))
                    .collect::<Result<_>>()?,
                isv: parse_cell(cells[k - 4], no)?,
                isd: parse_cell(cells[k - 3], no)?,
                pdr: parse_cell(cells[k - 2], no)?,
                overlap: parse_cell(cells[k - 1], no)?,
            });
        }
        Ok(Self { environments, methods, scenarios: Vec::new() })
    }

    pub fn per_scenario_csv(&self) -> String {
        let mut out = String::from(
            "Scenario,Environment,Persons,Method,Trials,FailedTrials,Sources,Acc,MeanEstimatedP,ISV,ISD,ISV_ISD\n",
        );
        for s in &self.scenarios {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                s.scenario,
                s.environment,
                s.persons,
                s.method,
                s.trials,
                s.failed_trials,
                s.evaluated_sources,
                opt(s.accuracy, pct),
                opt(s.mean_estimated_p, |v| format!("{v:.2}")),
                opt(s.isv, |v| format!("{v:.4}")),
                opt(s.isd, |v| format!("{v:.4}")),
                opt(s.isv_isd_ratio, |v| format!("{v:.4}")),
            )
            .unwrap();
        }
        out
    }

    /// Mean accuracy per (method, person count) across scenarios, for plotting.
    pub fn accuracy_vs_persons_csv(&self) -> String {
        let mut acc: BTreeMap<(String, usize), (usize, usize)> = BTreeMap::new();
        for s in &self.scenarios {
            if let Some(a) = s.accuracy {
                let e = acc.entry((s.method.clone(), s.persons)).or_default();
                // weight by evaluated sources
                e.0 += (a * s.evaluated_sources as f64).round() as usize;
                e.1 += s.evaluated_sources;
            }
        }
        let mut out = String::from("Method,Persons,Acc\n");
        for ((m, p), (hit, n)) in acc {
            writeln!(out, "{m},{p},{}", if n == 0 { MISSING.to_string() } else { pct(hit as f64 / n as f64) }).unwrap();
        }
        out
    }

    pub fn text_table(&self) -> String {
        let header = self.summary_header();
        let rows: Vec<Vec<String>> =
            self.summary_csv().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
            .collect();
        let fmt_row =
            |r: &[String]| r.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ");
        let mut out = fmt_row(&header);
        out.push('\n');
        for r in &rows {
            out.push_str(&fmt_row(r));
            out.push('\n');
        }
        out
    }
}
