//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Two-sided Student t tail probability P(|T| >= t) for integer degrees of
/// freedom, from the closed-form finite series in `cos θ`, `θ = atan(t/√ν)`.
pub fn t_two_sided_p(t: f64, df: u32) -> f64 {
    assert!(df >= 1);
    let theta = (t.abs() / (df as f64).sqrt()).atan();
    let (s, c) = theta.sin_cos();
    let c2 = c * c;
    let inside = if df % 2 == 1 {
        if df == 1 {
            2.0 * theta / PI
        } else {
            // θ + sinθ [cosθ + (2/3)cos³θ + (2·4)/(3·5)cos⁵θ + ...] up to cos^{ν-2}
            let mut term = c;
            let mut sum = c;
            let mut k = 2;
            while k < df - 1 {
                term *= c2 * k as f64 / (k + 1) as f64;
                sum += term;
                k += 2;
            }
            2.0 / PI * (theta + s * sum)
        }
    } else {
        // sinθ [1 + (1/2)cos²θ + (1·3)/(2·4)cos⁴θ + ...] up to cos^{ν-2}
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1;
        while k < df - 1 {
            term *= c2 * k as f64 / (k + 1) as f64;
            sum += term;
            k += 2;
        }
        s * sum
    };
    (1.0 - inside).clamp(0.0, 1.0)
}

/// Pearson r from raw power sums, without centring first.
pub fn pearson_direct(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let num = n * sxy - sx * sy;
    let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    (den > 0.0).then(|| num / den)
}

/// Slope, intercept and two-sided slope p-value of ordinary least squares,
/// computed from normal equations in raw sums.
pub fn ols_oracle(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let var_x = sxx - sx * sx / n;
    let se = (rss / (n - 2.0) / var_x).sqrt();
    let p = t_two_sided_p(slope / se, points.len() as u32 - 2);
    (slope, intercept, p)
}

/// Pick probability of rank `r` (1 = best of `n`) in a size-`k` tournament
/// drawn with replacement.
pub fn tournament_rank_law(r: usize, n: usize, k: i32) -> f64 {
    let nf = n as f64;
    (((n - r + 1) as f64 / nf).powi(k)) - (((n - r) as f64 / nf).powi(k))
}

/// One ant's contribution in one tick for the fitness oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct AntTick {
    pub delivered: u32,
    pub touched: u32,
    pub turned: bool,
    pub moved: bool,
    pub dropped: bool,
}

/// Colony fitness summed term by term over ticks and ants.
pub fn fitness_oracle(
    log: &[Vec<AntTick>],
    t_max: u32,
    nest: f64,
    food: f64,
    step_cost: f64,
    action_cost: f64,
    eta: f64,
) -> f64 {
    let mut total = 0.0;
    for tick in log {
        for a in tick {
            let actions = a.turned as u32 + a.moved as u32 + a.dropped as u32;
            let n = nest * a.delivered as f64;
            let f = food * a.touched as f64;
            let c = step_cost + action_cost * actions as f64;
            total += n + f - c;
        }
    }
    total + eta * (t_max as f64 - log.len() as f64)
}
