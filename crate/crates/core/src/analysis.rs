//! Post-processing: spike binning, input×output Pearson heatmaps, trend
//! regressions across generations, trial statistics and pheromone marginals.
//!
//! Undefined quantities (zero-variance correlations, empty fields) are kept
//! as explicit missing values and written as `NA`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::embodiment::{SpikeLog, INPUT_LABELS, N_CHANNELS, OUTPUT_LABELS};
use crate::snn::{N_INPUT, N_OUTPUT};
use crate::{Error, Result};

/// Default significance cut for reported trends.
pub const DEFAULT_P_MAX: f64 = 0.005;

/// One colony trial, shared by network-driven and rule-based models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub model: String,
    pub trial_seed: u64,
    pub food_delivered: u32,
    #[serde(rename = "T_s")]
    pub t_s: u32,
}

/// Spike counts per channel per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedTrains {
    pub counts: Vec<Vec<u32>>,
    pub bin_size: u64,
}

impl BinnedTrains {
    pub fn n_bins(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }
}

/// Histograms every channel of `log`. Ticks are 1-based, so bin `k` covers
/// ticks `k*bin_size + 1 ..= (k+1)*bin_size`.
pub fn bin_trains(log: &SpikeLog, bin_size: u64) -> Result<BinnedTrains> {
    if bin_size == 0 {
        return Err(Error::Degenerate("bin_size must be at least 1".into()));
    }
    let last = log.channels.iter().filter_map(|c| c.last().copied()).max().unwrap_or(0);
    let span = log.duration.max(last);
    let n_bins = span.div_ceil(bin_size) as usize;
    let counts = log
        .channels
        .iter()
        .map(|ts| {
            let mut bins = vec![0u32; n_bins];
            for &t in ts {
                bins[(t.max(1) - 1) as usize / bin_size as usize] += 1;
            }
            bins
        })
        .collect();
    Ok(BinnedTrains { counts, bin_size })
}

/// Pearson correlation; `None` when either series has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "pearson series",
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("pearson needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// 12×4 input/output correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, input: usize, output: usize) -> Option<f64> {
        self.values[input][output]
    }

    pub fn to_csv(&self, config_hash: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(h) = config_hash {
            out.push_str(&format!("# config_hash={h}\n"));
        }
        out.push_str("input,");
        out.push_str(&OUTPUT_LABELS.join(","));
        out.push('\n');
        for (i, row) in self.values.iter().enumerate() {
            out.push_str(INPUT_LABELS[i]);
            for v in row {
                out.push(',');
                match v {
                    Some(r) => out.push_str(&r.to_string()),
                    None => out.push_str("NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Correlates every input channel with every output channel of one ant.
pub fn correlation_matrix(log: &SpikeLog, bin_size: u64) -> Result<CorrelationMatrix> {
    if log.channels.len() != N_CHANNELS {
        return Err(Error::LengthMismatch {
            what: "spike log channels",
            expected: N_CHANNELS,
            actual: log.channels.len(),
        });
    }
    let binned = bin_trains(log, bin_size)?;
    if binned.n_bins() < 2 {
        return Ok(CorrelationMatrix {
            values: vec![vec![None; N_OUTPUT]; N_INPUT],
        });
    }
    let series: Vec<Vec<f64>> = binned
        .counts
        .iter()
        .map(|c| c.iter().map(|&v| v as f64).collect())
        .collect();
    let mut values = vec![vec![None; N_OUTPUT]; N_INPUT];
    for (i, row) in values.iter_mut().enumerate() {
        for (o, v) in row.iter_mut().enumerate() {
            *v = pearson(&series[i], &series[N_INPUT + o])?;
        }
    }
    Ok(CorrelationMatrix { values })
}

/// Element-wise mean of per-ant matrices, skipping undefined entries.
/// An entry undefined for every ant stays undefined.
pub fn mean_matrix(per_ant: &[CorrelationMatrix]) -> CorrelationMatrix {
    let mut values = vec![vec![None; N_OUTPUT]; N_INPUT];
    for (i, row) in values.iter_mut().enumerate() {
        for (o, v) in row.iter_mut().enumerate() {
            let defined: Vec<f64> = per_ant.iter().filter_map(|m| m.values[i][o]).collect();
            if !defined.is_empty() {
                *v = Some(defined.iter().sum::<f64>() / defined.len() as f64);
            }
        }
    }
    CorrelationMatrix { values }
}

pub fn correlation_heatmap(logs: &[SpikeLog], bin_size: u64) -> Result<CorrelationMatrix> {
    if logs.is_empty() {
        return Err(Error::Degenerate("no spike logs to correlate".into()));
    }
    let per_ant = logs
        .iter()
        .map(|l| correlation_matrix(l, bin_size))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_matrix(&per_ant))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided p-value of the slope's t statistic.
    pub p_value: f64,
    /// Sample standard deviation of the y values.
    pub sigma: f64,
    pub slope_std_error: f64,
    pub n: usize,
}

/// Ordinary least squares of `y` on `x` with a t-test on the slope.
pub fn trend_regression(points: &[(f64, f64)]) -> Result<RegressionResult> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("regression needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values are identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let df = nf - 2.0;
    let se = (sse / df / sxx).sqrt();
    let p_value = if se == 0.0 || !se.is_finite() {
        if slope == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        let t = (slope / se).abs();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        (2.0 * dist.sf(t)).clamp(0.0, 1.0)
    };
    Ok(RegressionResult {
        slope,
        intercept,
        p_value,
        sigma: (syy / (nf - 1.0)).sqrt(),
        slope_std_error: se,
        n,
    })
}

/// One significant input/output trend across generations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub input: String,
    pub output: String,
    pub slope: f64,
    pub p: f64,
    pub sigma: f64,
}

/// Regresses each input/output coefficient against generation and keeps the
/// pairs with `p < p_max`. Generations where a pair is undefined are skipped
/// for that pair; pairs with fewer than 3 defined points are not reported.
pub fn trend_report(per_generation: &[(usize, CorrelationMatrix)], p_max: f64) -> Result<Vec<TrendRow>> {
    let mut rows = Vec::new();
    for i in 0..N_INPUT {
        for o in 0..N_OUTPUT {
            let points: Vec<(f64, f64)> = per_generation
                .iter()
                .filter_map(|(g, m)| m.values[i][o].map(|r| (*g as f64, r)))
                .collect();
            let distinct_x = points.windows(2).any(|w| w[0].0 != w[1].0);
            if points.len() < 3 || !distinct_x {
                continue;
            }
            let reg = trend_regression(&points)?;
            if reg.p_value < p_max {
                rows.push(TrendRow {
                    input: INPUT_LABELS[i].to_string(),
                    output: OUTPUT_LABELS[o].to_string(),
                    slope: reg.slope,
                    p: reg.p_value,
                    sigma: reg.sigma,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceStats {
    pub mean: f64,
    /// Sample standard deviation (zero for a single trial).
    pub sd: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> PerformanceStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    PerformanceStats { mean, sd, n }
}

/// Mean and sample SD of food delivered, grouped by model.
pub fn performance_stats(results: &[TrialResult]) -> BTreeMap<String, PerformanceStats> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        groups.entry(r.model.clone()).or_default().push(r.food_delivered as f64);
    }
    groups.into_iter().map(|(m, v)| (m, summarize(&v))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    /// Mass per column (x), normalised to sum 1.
    pub x: Vec<f64>,
    /// Mass per row (y), normalised to sum 1.
    pub y: Vec<f64>,
    /// Set when the field was empty and uniform marginals were substituted.
    pub empty_field: bool,
}

/// Density marginals of a `[y][x]` pheromone matrix.
pub fn pheromone_density_marginals(matrix: &[Vec<f64>]) -> Result<Marginals> {
    let h = matrix.len();
    let w = matrix.first().map_or(0, Vec::len);
    if h == 0 || w == 0 || matrix.iter().any(|r| r.len() != w) {
        return Err(Error::Degenerate("pheromone matrix must be non-empty and rectangular".into()));
    }
    if matrix.iter().flatten().any(|v| !(*v >= 0.0)) {
        return Err(Error::Degenerate("pheromone matrix must be non-negative".into()));
    }
    let mut x = vec![0.0; w];
    let mut y = vec![0.0; h];
    for (j, row) in matrix.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            x[i] += v;
            y[j] += v;
        }
    }
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return Ok(Marginals {
            x: vec![1.0 / w as f64; w],
            y: vec![1.0 / h as f64; h],
            empty_field: true,
        });
    }
    x.iter_mut().for_each(|v| *v /= total);
    y.iter_mut().for_each(|v| *v /= total);
    Ok(Marginals {
        x,
        y,
        empty_field: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_with(channel: usize, ts: &[u64], duration: u64) -> SpikeLog {
        let mut l = SpikeLog::new(0);
        l.channels[channel] = ts.to_vec();
        l.duration = duration;
        l
    }

    #[test]
    fn empty_log_bins_to_zero() {
        let mut l = SpikeLog::new(0);
        l.duration = 40;
        let b = bin_trains(&l, 20).unwrap();
        assert_eq!(b.n_bins(), 2);
        assert!(b.counts.iter().flatten().all(|&c| c == 0));
    }

    #[test]
    fn hand_binning() {
        let b = bin_trains(&log_with(0, &[1, 2, 3], 3), 2).unwrap();
        assert_eq!(b.counts[0], vec![2, 1]);
        assert!(bin_trains(&log_with(0, &[1], 3), 0).is_err());
    }

    #[test]
    fn binning_shift_moves_one_bin() {
        let ts = [1, 4, 5, 9, 13, 14];
        let a = bin_trains(&log_with(2, &ts, 20), 4).unwrap();
        let shifted: Vec<u64> = ts.iter().map(|t| t + 4).collect();
        let b = bin_trains(&log_with(2, &shifted, 24), 4).unwrap();
        assert_eq!(b.counts[2][0], 0);
        assert_eq!(&b.counts[2][1..], &a.counts[2][..]);
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x).unwrap().unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| 7.0 - v).collect();
        assert!((pearson(&x, &neg).unwrap().unwrap() + 1.0).abs() < 1e-15);
        // sxy = 3.5, sxx = 5, syy = 4.75  =>  r = 3.5 / sqrt(23.75)
        let r = pearson(&x, &[2.0, 4.0, 5.0, 4.0]).unwrap().unwrap();
        assert!((r - 3.5 / 23.75f64.sqrt()).abs() < 1e-15);
        assert!((r - 0.7182).abs() < 1e-4);
        assert_eq!(pearson(&x, &[3.0; 4]).unwrap(), None);
        assert!(pearson(&x, &[1.0]).is_err());
    }

    #[test]
    fn dead_network_heatmap_is_undefined() {
        // Constant heartbeat, silent outputs.
        let ts: Vec<u64> = (1..=100).filter(|t| t % 10 == 0).collect();
        let l = log_with(11, &ts, 100);
        let m = correlation_heatmap(&[l], 10).unwrap();
        assert!(m.values.iter().flatten().all(Option::is_none));
        assert!(m.to_csv(None).contains("Heartbeat,NA,NA,NA,NA"));
    }

    #[test]
    fn heatmap_averages_defined_entries() {
        let mk = |out_ts: &[u64]| {
            let mut l = SpikeLog::new(0);
            l.channels[0] = vec![1, 2, 11, 31];
            l.channels[12] = out_ts.to_vec();
            l.duration = 40;
            l
        };
        let a = mk(&[1, 11, 12]);
        let b = mk(&[21, 22, 23]);
        let ma = correlation_matrix(&a, 10).unwrap();
        let mb = correlation_matrix(&b, 10).unwrap();
        let m = correlation_heatmap(&[a.clone(), b.clone()], 10).unwrap();
        let expect = (ma.get(0, 0).unwrap() + mb.get(0, 0).unwrap()) / 2.0;
        assert!((m.get(0, 0).unwrap() - expect).abs() < 1e-15);
        let single = correlation_heatmap(&[a.clone()], 10).unwrap();
        assert_eq!(single, ma);
        let swapped = correlation_heatmap(&[b, a], 10).unwrap();
        assert_eq!(swapped, m);
    }

    #[test]
    fn regression_constant_and_exact() {
        let flat: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.3)).collect();
        let r = trend_regression(&flat).unwrap();
        assert_eq!(r.slope, 0.0);
        assert_eq!(r.p_value, 1.0);
        let line: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * i as f64)).collect();
        let r = trend_regression(&line).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-12);
        assert!(r.p_value < 1e-12);
        assert!(trend_regression(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)]).is_err());
        assert!(trend_regression(&[(1.0, 2.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn performance_stats_hand_values() {
        let mk = |m: &str, f| TrialResult {
            model: m.into(),
            trial_seed: 0,
            food_delivered: f,
            t_s: 2000,
        };
        let s = performance_stats(&[mk("a", 120), mk("a", 130), mk("b", 7), mk("b", 7)]);
        assert_eq!(s["a"].mean, 125.0);
        assert!((s["a"].sd - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!(s["b"].sd, 0.0);
    }

    #[test]
    fn marginals() {
        let mut m = vec![vec![0.0; 5]; 4];
        m[2][3] = 7.0;
        let r = pheromone_density_marginals(&m).unwrap();
        assert_eq!(r.x, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(r.y, vec![0.0, 0.0, 1.0, 0.0]);
        m[0][1] = 7.0;
        let r = pheromone_density_marginals(&m).unwrap();
        assert_eq!(r.x[1], 0.5);
        assert_eq!(r.x[3], 0.5);
        let r = pheromone_density_marginals(&vec![vec![2.0; 4]; 2]).unwrap();
        assert!(r.x.iter().all(|&v| v == 0.25) && !r.empty_field);
        let r = pheromone_density_marginals(&vec![vec![0.0; 4]; 2]).unwrap();
        assert!(r.empty_field);
        assert!(pheromone_density_marginals(&[vec![-1.0]]).is_err());
    }
}
