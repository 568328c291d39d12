//! Birkhoff sums, the normalized sums `S_n / sqrt(n)`, their variance, the
//! Maxwell–Woodroofe growth statistic, normality tests and the comparison of
//! fixed-start and stationary-start characteristic functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::circle::CirclePoint;
use crate::diagnostics::DualMode;
use crate::error::{IfsError, Result};
use crate::ifs::{partial_sums, Ifs, StationaryOptions};
use crate::measure::EmpiricalMeasure;
use crate::observable::{CircleFn, Observable};
use crate::rng::Streams;
use crate::stats::{loglog_slope, Moments, Z95};

/// An observable centred against one stationary sample, with the drift of the
/// centring constant against a second independent sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    pub observable: Observable,
    pub offset: f64,
    pub centering_error: f64,
}

/// `f - <f, mu>`.
pub fn center_observable(f: &Observable, mu_star_hat: &EmpiricalMeasure) -> Observable {
    f.centered(mu_star_hat.integrate(f))
}

/// Centres `f` on the pooled mean of two independent stationary samples and
/// reports the half difference of the two means as the centring error.
pub fn center_with_error(f: &Observable, a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Centering {
    let (ca, cb) = (a.integrate(f), b.integrate(f));
    let offset = 0.5 * (ca + cb);
    Centering { observable: f.centered(offset), offset, centering_error: 0.5 * (ca - cb).abs() }
}

/// Stationary sample large enough for centring: `count` states split over many chains.
pub fn centering_sample(ifs: &Ifs, x0: CirclePoint, count: usize, burn_in: usize, streams: &Streams) -> Result<EmpiricalMeasure> {
    let chains = (count / 100_000).clamp(1, 1024);
    ifs.stationary_sample(&StationaryOptions { x0, burn_in, count, thinning: 1, chains }, streams)
}

/// One replicate of `S_n f(omega, x) = sum_{l=1..n} f(X_l^x)`, drawn from stream 0.
pub fn birkhoff_sum<F: CircleFn + ?Sized>(ifs: &Ifs, f: &F, x: CirclePoint, n: usize, streams: &Streams) -> f64 {
    birkhoff_from(ifs, f, x, n, &mut streams.stream(0))
}

fn birkhoff_from<F: CircleFn + ?Sized, R: rand::Rng>(ifs: &Ifs, f: &F, x: CirclePoint, n: usize, rng: &mut R) -> f64 {
    let mut p = x;
    let mut s = 0.0;
    for _ in 0..n {
        p = ifs.step(p, rng).1;
        s += f.eval(p);
    }
    s
}

/// Where replicate chains start.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StartMode {
    /// After a fresh burn-in of `burn_in` steps from `x0`.
    Stationary { x0: CirclePoint, burn_in: usize },
    Fixed { x: CirclePoint },
}

impl StartMode {
    pub fn label(&self) -> &'static str {
        match self {
            StartMode::Stationary { .. } => "stationary",
            StartMode::Fixed { .. } => "fixed",
        }
    }
}

/// `replicates` independent values of `S_n / sqrt(n)`.
///
/// Replicate `r` draws its `n` summed steps from stream `r` whatever the start
/// mode; the stationary burn-in uses a separate family. Fixed and stationary
/// replicates with the same index therefore share their driving symbols.
pub fn sn_star_samples<F: CircleFn + ?Sized>(ifs: &Ifs, f: &F, n: usize, replicates: usize, start: StartMode, streams: &Streams) -> Result<Vec<f64>> {
    if n == 0 || replicates < 2 {
        return Err(IfsError::Invalid("normalized sums need n >= 1 and at least 2 replicates".into()));
    }
    let burn = streams.derive_named("burn-in");
    let scale = 1.0 / (n as f64).sqrt();
    Ok((0..replicates)
        .into_par_iter()
        .map(|r| {
            let x = match start {
                StartMode::Fixed { x } => x,
                StartMode::Stationary { x0, burn_in } => {
                    let mut rng = burn.stream(r as u64);
                    (0..burn_in).fold(x0, |p, _| ifs.step(p, &mut rng).1)
                }
            };
            birkhoff_from(ifs, f, x, n, &mut streams.stream(r as u64)) * scale
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sigma2 {
    /// Unbiased variance around the sample mean.
    pub sigma2: f64,
    /// Mean of squares (the variance if the true mean is zero).
    pub second_moment: f64,
    pub mean: f64,
    /// Half width of the 95% interval `sigma2 * z * sqrt(2 / (R - 1))`.
    pub ci_half_width: f64,
    pub replicates: usize,
}

pub fn sigma2_estimate(samples: &[f64]) -> Result<Sigma2> {
    if samples.len() < 2 {
        return Err(IfsError::Invalid("variance needs at least 2 samples".into()));
    }
    let m = Moments::from_slice(samples);
    let var = m.variance();
    if var < 1e-12 {
        return Err(IfsError::DegenerateSample { variance: var });
    }
    let r = samples.len();
    Ok(Sigma2 {
        sigma2: var,
        second_moment: samples.iter().map(|s| s * s).sum::<f64>() / r as f64,
        mean: m.mean,
        ci_half_width: var * Z95 * (2.0 / (r - 1) as f64).sqrt(),
        replicates: r,
    })
}

/// Limiting distribution function of `sqrt(n) D_n` (Kolmogorov), upper tail.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    // the alternating series converges slowly near zero, where the tail is 1 to double precision
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub ks_stat: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against `N(0, sigma2)`; the p-value
/// uses the asymptotic distribution with the Stephens small-sample correction.
pub fn normality_test(samples: &[f64], sigma2: f64) -> Result<KsResult> {
    let m = Moments::from_slice(samples);
    if !(sigma2 > 0.0) || m.variance() < 1e-12 {
        return Err(IfsError::DegenerateSample { variance: m.variance().min(sigma2.max(0.0)) });
    }
    if samples.len() < 100 {
        return Err(IfsError::Invalid("normality test needs at least 100 samples".into()));
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| IfsError::Invalid(e.to_string()))?;
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max);
    let sq = n.sqrt();
    Ok(KsResult { ks_stat: d, p_value: kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d) })
}

/// Growth of `h_n = sum_{k<=n} U^k f` in `L^2` of the stationary law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwReport {
    pub n_values: Vec<usize>,
    pub a_n: Vec<f64>,
    /// Least-squares slope of `log a_n` on `log n` over the upper half of `n_values`.
    pub beta_growth_hat: f64,
    /// Partial sums of `n^{-3/2} a_n` over `n_values`.
    pub partial_series: Vec<f64>,
    pub x_sample_count: usize,
    pub mode: DualMode,
}

impl MwReport {
    /// Increment of the partial series over the last quarter of `n_values`,
    /// relative to its final value.
    pub fn tail_fraction(&self) -> f64 {
        let len = self.partial_series.len();
        let total = *self.partial_series.last().unwrap_or(&0.0);
        if total <= 0.0 {
            return 0.0;
        }
        let cut = len - len.div_ceil(4);
        let before = if cut == 0 { 0.0 } else { self.partial_series[cut - 1] };
        (total - before) / total
    }
}

/// Upper-half log-log slope used for every growth exponent in this module.
pub fn growth_exponent(ns: &[usize], values: &[f64]) -> f64 {
    let h = ns.len() / 2;
    loglog_slope(&ns[h..], &values[h..])
}

/// Evaluates `h_n(x)` at every point of `xs` (a sample of the stationary law)
/// for each `n` in `n_list`, then `a_n = sqrt(mean h_n(x)^2)`.
///
/// `Mc` mode replaces every `U^k f(x)` by a sampled estimate over
/// `mc_samples` paths, which adds variance of order `n^2 / mc_samples` to `a_n^2`.
pub fn mw_statistic(
    ifs: &Ifs,
    f: &Observable,
    n_list: &[usize],
    xs: &[CirclePoint],
    mode: DualMode,
    node_budget: u64,
    mc_samples: usize,
    streams: &Streams,
) -> Result<MwReport> {
    if n_list.is_empty() || xs.is_empty() || n_list.contains(&0) {
        return Err(IfsError::Invalid("mw statistic needs positive n values and at least one x".into()));
    }
    let n_max = *n_list.iter().max().unwrap();
    let sums: Vec<Vec<f64>> = match mode {
        DualMode::Exact => xs.par_iter().map(|&x| ifs.dual_sum_exact(f, x, n_max, node_budget)).collect::<Result<_>>()?,
        DualMode::Mc => xs
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let s = streams.derive(i as u64);
                let mut acc = vec![0.0; n_max];
                for p in 0..mc_samples {
                    let mut rng = s.stream(p as u64);
                    let mut y = x;
                    let mut h = 0.0;
                    for slot in acc.iter_mut() {
                        y = ifs.step(y, &mut rng).1;
                        h += f.eval(y);
                        *slot += h;
                    }
                }
                Ok(acc.into_iter().map(|v| v / mc_samples.max(1) as f64).collect())
            })
            .collect::<Result<_>>()?,
    };
    let a_n: Vec<f64> = n_list
        .iter()
        .map(|&n| (sums.iter().map(|h| h[n - 1] * h[n - 1]).sum::<f64>() / xs.len() as f64).sqrt())
        .collect();
    let terms: Vec<f64> = n_list.iter().zip(&a_n).map(|(&n, a)| a / (n as f64).powf(1.5)).collect();
    Ok(MwReport {
        n_values: n_list.to_vec(),
        beta_growth_hat: growth_exponent(n_list, &a_n),
        partial_series: partial_sums(&terms),
        a_n,
        x_sample_count: xs.len(),
        mode,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumGapRow {
    pub n: usize,
    pub gap: f64,
}

/// `n -> |sum_{k<=n} (U^k f(x) - U^k f(y))|` from one shared exact tree.
pub fn uniform_sum_gap<F: CircleFn + ?Sized>(ifs: &Ifs, f: &F, x: CirclePoint, y: CirclePoint, n_list: &[usize], node_budget: u64) -> Result<Vec<SumGapRow>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let levels = ifs.paired_dual_levels(f, x, y, n_max, node_budget)?;
    let sums = partial_sums(&levels[1..]);
    Ok(n_list.iter().map(|&n| SumGapRow { n, gap: if n == 0 { 0.0 } else { sums[n - 1].abs() } }).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharfnRow {
    pub n: usize,
    pub t: f64,
    pub gap: f64,
}

fn ecf(samples: &[f64], t: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let (c, s) = samples.iter().fold((0.0, 0.0), |(c, s), &v| (c + (t * v).cos(), s + (t * v).sin()));
    (c / n, s / n)
}

/// `|E exp(it S_n^x / sqrt n) - E exp(it S_n / sqrt n)|` between fixed-start
/// and stationary-start replicates, which share driving symbols.
pub fn charfn_gap<F: CircleFn + ?Sized>(
    ifs: &Ifs,
    f: &F,
    x: CirclePoint,
    stationary: StartMode,
    n_list: &[usize],
    t_list: &[f64],
    replicates: usize,
    streams: &Streams,
) -> Result<Vec<CharfnRow>> {
    let mut rows = Vec::with_capacity(n_list.len() * t_list.len());
    for &n in n_list {
        let s = streams.derive(n as u64);
        let fixed = sn_star_samples(ifs, f, n, replicates, StartMode::Fixed { x }, &s)?;
        let stat = sn_star_samples(ifs, f, n, replicates, stationary, &s)?;
        for &t in t_list {
            let (a, b) = (ecf(&fixed, t), ecf(&stat, t));
            rows.push(CharfnRow { n, t, gap: (a.0 - b.0).hypot(a.1 - b.1) });
        }
    }
    Ok(rows)
}

/// Summary of one batch of normalized sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub replicates: usize,
    pub sigma2_hat: f64,
    pub sigma2_ci_half_width: f64,
    pub sample_mean: f64,
    pub ks_stat: f64,
    pub p_value: f64,
    pub centering_error: f64,
    pub start_mode: String,
    pub start_x: Option<f64>,
}

/// Variance and normality of `replicates` values of `S_n / sqrt(n)`.
pub fn clt_report<F: CircleFn + ?Sized>(ifs: &Ifs, f: &F, n: usize, replicates: usize, start: StartMode, centering_error: f64, streams: &Streams) -> Result<CltReport> {
    let samples = sn_star_samples(ifs, f, n, replicates, start, streams)?;
    let s2 = sigma2_estimate(&samples)?;
    let ks = normality_test(&samples, s2.sigma2)?;
    Ok(CltReport {
        n,
        replicates,
        sigma2_hat: s2.sigma2,
        sigma2_ci_half_width: s2.ci_half_width,
        sample_mean: s2.mean,
        ks_stat: ks.ks_stat,
        p_value: ks.p_value,
        centering_error,
        start_mode: start.label().to_string(),
        start_x: match start {
            StartMode::Fixed { x } => Some(x.value()),
            StartMode::Stationary { .. } => None,
        },
    })
}
