//! Stochastic trajectory engine: samples absorption and emission event
//! times for the single photon, integrates the probe amplitude ODE
//! piecewise-exactly across the jumps, and accumulates Monte Carlo
//! statistics of the conditional probe displacement.

use crate::analytic;
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, TimeSeries};
use crate::params::SystemParams;
use crate::pulse::PulseShape;
use crate::rng::RngStream;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Trials per deterministic work unit. Partial results are reduced in batch
/// order, so output bits do not depend on the worker count.
const BATCH: u64 = 1024;

/// One trajectory's absorption/emission event times. The binary occupation
/// is n_a(t) = 1 iff t_abs <= t < t_emit (t_emit = infinity when absent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub t_abs: Option<f64>,
    pub t_emit: Option<f64>,
    /// Set when an event fell beyond the simulated horizon and was dropped.
    pub truncated: bool,
}

impl JumpRecord {
    pub fn empty() -> Self {
        JumpRecord {
            t_abs: None,
            t_emit: None,
            truncated: false,
        }
    }

    pub fn occupation(&self, t: f64) -> u8 {
        match self.t_abs {
            Some(ta) if t >= ta => match self.t_emit {
                Some(te) if t >= te => 0,
                _ => 1,
            },
            _ => 0,
        }
    }

    /// Dwell time T = t_emit - t_abs, when both events happened.
    pub fn dwell(&self) -> Option<f64> {
        match (self.t_abs, self.t_emit) {
            (Some(ta), Some(te)) => Some(te - ta),
            _ => None,
        }
    }
}

/// Uniform binning of Monte Carlo outcomes with explicit under/overflow
/// counts, so every trial is accounted for.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    pub n_trials: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo || bins == 0 {
            return Err(Error::Validation(format!(
                "histogram needs finite lo < hi and at least one bin (lo={lo}, hi={hi}, bins={bins})"
            )));
        }
        Ok(Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
            n_trials: 0,
        })
    }

    pub fn record(&mut self, x: f64) {
        self.n_trials += 1;
        if x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let w = (self.hi - self.lo) / self.counts.len() as f64;
            let mut i = ((x - self.lo) / w) as usize;
            if i >= self.counts.len() {
                i = self.counts.len() - 1;
            }
            self.counts[i] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.n_trials += other.n_trials;
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + w * i as f64, self.lo + w * (i + 1) as f64)
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

/// Order-independent accumulator of raw moments for real-valued samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    pub n: u64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.s1 += x;
        let x2 = x * x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.n += other.n;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
    }

    pub fn mean(&self) -> f64 {
        self.s1 / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        ((self.s2 - n * m * m) / (n - 1.0)).max(0.0)
    }

    /// Fourth central moment (biased plug-in estimate).
    pub fn central4(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        (self.s4 - 4.0 * m * self.s3 + 6.0 * m * m * self.s2 - 3.0 * n * m.powi(4)) / n
    }

    /// Standard error of the sample variance, sqrt((m4 - var^2)/n).
    pub fn variance_std_error(&self) -> f64 {
        let v = self.variance();
        ((self.central4() - v * v).max(0.0) / self.n as f64).sqrt()
    }
}

/// Empirical summary of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSummary {
    pub n_trials: u64,
    pub mean: C64,
    pub variance: f64,
    pub std_error: f64,
    /// Standard error of the variance estimate, for variance-level checks.
    pub variance_std_error: f64,
}

impl McSummary {
    pub(crate) fn from_real_moments(acc: &MomentAccumulator) -> Self {
        let variance = acc.variance();
        McSummary {
            n_trials: acc.n,
            mean: C64::new(acc.mean(), 0.0),
            variance,
            std_error: (variance / acc.n as f64).sqrt(),
            variance_std_error: acc.variance_std_error(),
        }
    }
}

/// Draws a dwell time T ~ Exp(kappa_a).
pub fn sample_dwell(rng: &mut RngStream, kappa_a: f64) -> f64 {
    -rng.uniform_open().ln() / kappa_a
}

/// Inverse-CDF sampler for the absorption time, built on a dense cumulative
/// table of the absorption rate.
///
/// The total absorption probability is min(1, integral of p_abs); when the
/// raw integral exceeds one (kappa_a > gamma/3 for the exponential pulse)
/// the single-event classical picture is out of its regime, the cap is
/// applied and [`AbsorptionSampler::out_of_regime`] is set.
#[derive(Debug, Clone)]
pub struct AbsorptionSampler {
    times: Vec<f64>,
    cdf: Vec<f64>,
    /// Raw integral of p_abs over the table span.
    pub raw_total: f64,
    /// Capped total absorption probability, min(1, raw_total).
    pub p_total: f64,
    pub out_of_regime: bool,
}

/// Table resolution for the cumulative absorption integral.
const TABLE_POINTS: usize = 10_000;

impl AbsorptionSampler {
    pub fn new(shape: &PulseShape, params: &SystemParams) -> Result<Self> {
        let shape = shape.validated()?;
        let params = params.validated()?;
        let t0 = shape.t0();
        let span = 40.0 / shape.rate().min(params.kappa_a).min(params.gamma);
        let n = TABLE_POINTS;
        let h = span / (n - 1) as f64;
        let mut times = Vec::with_capacity(n);
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        let mut prev = 0.0;
        for i in 0..n {
            let t = t0 + h * i as f64;
            let rate = analytic::p_abs_exp(&params, t - t0);
            if !rate.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite absorption rate at t = {t}"
                )));
            }
            if i > 0 {
                // composite Simpson per table interval
                let mid = analytic::p_abs_exp(&params, t - t0 - h / 2.0);
                acc += h / 6.0 * (prev + 4.0 * mid + rate);
            }
            times.push(t);
            cdf.push(acc);
            prev = rate;
        }
        let raw_total = acc;
        Ok(AbsorptionSampler {
            times,
            cdf,
            raw_total,
            p_total: raw_total.min(1.0),
            out_of_regime: raw_total > 1.0,
        })
    }

    /// With probability p_total returns an absorption time drawn from the
    /// normalized p_abs density; otherwise the photon is never absorbed.
    pub fn sample(&self, rng: &mut RngStream) -> Option<f64> {
        let u = rng.uniform();
        if u >= self.p_total {
            return None;
        }
        let target = u / self.p_total * self.raw_total;
        // binary search the cumulative table, then interpolate linearly
        let idx = match self
            .cdf
            .binary_search_by(|c| c.partial_cmp(&target).unwrap())
        {
            Ok(i) => i,
            Err(i) => i,
        };
        if idx == 0 {
            return Some(self.times[0]);
        }
        if idx >= self.cdf.len() {
            return Some(*self.times.last().unwrap());
        }
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        Some(t0 + frac * (t1 - t0))
    }
}

/// Samples one absorption/emission record up to t_max. Events past t_max
/// are dropped and flagged as truncated.
pub fn simulate_occupation(
    rng: &mut RngStream,
    sampler: &AbsorptionSampler,
    params: &SystemParams,
    t_max: f64,
) -> JumpRecord {
    match sampler.sample(rng) {
        None => JumpRecord::empty(),
        Some(t_abs) if t_abs > t_max => JumpRecord {
            t_abs: None,
            t_emit: None,
            truncated: true,
        },
        Some(t_abs) => {
            let t_emit = t_abs + sample_dwell(rng, params.kappa_a);
            if t_emit > t_max {
                JumpRecord {
                    t_abs: Some(t_abs),
                    t_emit: None,
                    truncated: true,
                }
            } else {
                JumpRecord {
                    t_abs: Some(t_abs),
                    t_emit: Some(t_emit),
                    truncated: false,
                }
            }
        }
    }
}

/// Piecewise-exact probe propagation over segments of constant effective
/// occupation. Within a segment the amplitude relaxes exponentially toward
/// the segment fixed point -i epsilon / (kappa_b/2 + i chi n):
/// beta(t) = beta_fix + (beta(t_seg) - beta_fix) e^{-(kappa_b/2 + i chi n)(t - t_seg)}.
///
/// `breaks` are the ordered jump times of `n_of_t`, which is piecewise
/// constant between them. Used with n in {0, 1} for a single rail and
/// n1 - n2 in {-1, 0, 1} for the parity gate.
pub fn propagate_probe<F: Fn(f64) -> f64>(
    n_of_t: F,
    breaks: &[f64],
    params: &SystemParams,
    grid: &TimeGrid,
    beta0: C64,
) -> TimeSeries<C64> {
    let step = |beta: C64, n: f64, dt: f64| -> C64 {
        let decay = C64::new(params.kappa_b / 2.0, params.chi * n);
        let fix = C64::new(0.0, -params.epsilon) / decay;
        fix + (beta - fix) * (-decay * dt).exp()
    };
    let mut values = Vec::with_capacity(grid.n_points);
    let mut beta = beta0;
    let mut t_cur = grid.t_start;
    values.push(beta);
    for i in 1..grid.n_points {
        let t_next = grid.time(i);
        // advance across any jumps inside (t_cur, t_next]
        for &tb in breaks {
            if tb > t_cur && tb < t_next {
                let n = n_of_t(0.5 * (t_cur + tb));
                beta = step(beta, n, tb - t_cur);
                t_cur = tb;
            }
        }
        let n = n_of_t(0.5 * (t_cur + t_next));
        beta = step(beta, n, t_next - t_cur);
        t_cur = t_next;
        values.push(beta);
    }
    TimeSeries { grid: *grid, values }
}

/// Integrates the probe ODE d beta/dt = -i eps - i chi n_a(t) beta - (kappa_b/2) beta
/// across one trajectory's jumps, sampling beta on the grid.
pub fn integrate_probe(
    record: &JumpRecord,
    params: &SystemParams,
    grid: &TimeGrid,
    beta0: C64,
) -> TimeSeries<C64> {
    let mut breaks = Vec::new();
    if let Some(ta) = record.t_abs {
        breaks.push(ta);
    }
    if let Some(te) = record.t_emit {
        breaks.push(te);
    }
    propagate_probe(
        |t| record.occupation(t) as f64,
        &breaks,
        params,
        grid,
        beta0,
    )
}

pub(crate) fn batched_trials<T, P>(n_trials: u64, init: P, trial: T) -> Vec<P>
where
    P: Clone + Send,
    T: Fn(&mut P, u64) + Sync,
    P: Sync,
{
    let n_batches = n_trials.div_ceil(BATCH);
    (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut partial = init.clone();
            let end = ((b + 1) * BATCH).min(n_trials);
            for k in (b * BATCH)..end {
                trial(&mut partial, k);
            }
            partial
        })
        .collect()
}

/// Monte Carlo histogram of the conditional displacement magnitude
/// |Delta beta(T)| with T ~ Exp(kappa_a), as in the conditional picture
/// where the photon is known to have entered the cavity.
///
/// Default binning (via [`default_histogram_bins`]): 100 uniform bins on
/// [0, 1.05 B].
pub fn mc_delta_beta_histogram(
    rng: &RngStream,
    params: &SystemParams,
    n_trials: u64,
    bins: usize,
) -> Result<(Histogram, McSummary)> {
    let params = params.validated()?;
    if n_trials < 1 {
        return Err(Error::Validation("n_trials must be at least 1".into()));
    }
    let b = params.displacement_scale().abs();
    let hist_hi = if b > 0.0 { 1.05 * b } else { 1.0 };
    let template = (Histogram::new(0.0, hist_hi, bins)?, MomentAccumulator::default());
    let partials = batched_trials(n_trials, template, |(hist, acc), k| {
        let mut r = rng.split(k);
        let dwell = sample_dwell(&mut r, params.kappa_a);
        let delta = analytic::delta_beta_approx(&params, dwell);
        hist.record(delta.abs());
        acc.push(delta);
    });
    let mut hist = Histogram::new(0.0, hist_hi, bins)?;
    let mut acc = MomentAccumulator::default();
    for (h, a) in &partials {
        hist.merge(h);
        acc.merge(a);
    }
    Ok((hist, McSummary::from_real_moments(&acc)))
}

/// 100 uniform bins on [0, 1.05 B].
pub const DEFAULT_HISTOGRAM_BINS: usize = 100;

/// Empirical mean/variance of the signed conditional displacement
/// Delta beta(T) over T ~ Exp(kappa_a).
pub fn mc_conditional_stats(
    rng: &RngStream,
    params: &SystemParams,
    n_trials: u64,
) -> Result<McSummary> {
    let params = params.validated()?;
    if n_trials < 2 {
        return Err(Error::Validation("n_trials must be at least 2".into()));
    }
    let partials = batched_trials(n_trials, MomentAccumulator::default(), |acc, k| {
        let mut r = rng.split(k);
        let dwell = sample_dwell(&mut r, params.kappa_a);
        acc.push(analytic::delta_beta_approx(&params, dwell));
    });
    let mut acc = MomentAccumulator::default();
    for a in &partials {
        acc.merge(a);
    }
    Ok(McSummary::from_real_moments(&acc))
}

/// Ensemble-averaged occupation curve over `n_trials` trajectories, on the
/// given grid. Returns the empirical mean occupation and the sampler used
/// (for regime inspection).
pub fn mc_mean_occupation(
    rng: &RngStream,
    shape: &PulseShape,
    params: &SystemParams,
    grid: &TimeGrid,
    n_trials: u64,
) -> Result<(TimeSeries<f64>, AbsorptionSampler)> {
    let sampler = AbsorptionSampler::new(shape, params)?;
    let counts = batched_trials(n_trials, vec![0u64; grid.n_points], |counts, k| {
        let mut r = rng.split(k);
        let rec = simulate_occupation(&mut r, &sampler, params, grid.t_end);
        if let Some(ta) = rec.t_abs {
            let te = rec.t_emit.unwrap_or(f64::INFINITY);
            for (i, t) in grid.times().enumerate() {
                if t >= ta && t < te {
                    counts[i] += 1;
                }
            }
        }
    });
    let mut total = vec![0u64; grid.n_points];
    for c in &counts {
        for (a, b) in total.iter_mut().zip(c) {
            *a += b;
        }
    }
    let values = total
        .iter()
        .map(|&c| c as f64 / n_trials as f64)
        .collect();
    Ok((TimeSeries::new(*grid, values)?, sampler))
}
