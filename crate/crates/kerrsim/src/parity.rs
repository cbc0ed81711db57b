//! Two-qubit parity-gate scenario: two independent single-photon rails
//! cross-Kerr couple to one probe with opposite signs, so an odd photon
//! count shifts the probe while an even count cancels on average — but only
//! on average, since the rails absorb and emit at independent random times.
//!
//! The probe obeys dβ/dt = −iε − iχ(n₁ − n₂)β − (κ_b/2)β with n₁, n₂ the
//! classical rail occupations, and the gate is read out through an
//! integrated rotated quadrature S = ∫ Re[e^{iφ}(β − β∞)]dt. The
//! discriminator stands in for an unspecified homodyne measurement; every
//! reported error probability is tied to this definition.

use crate::analytic;
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, TimeSeries};
use crate::lindblad::{
    self, CascadeChain, DensityMatrix, FockSpace, Liouvillian, SlavedReport,
};
use crate::params::SystemParams;
use crate::pulse::PulseShape;
use crate::rng::RngStream;
use crate::trajectory::{
    batched_trials, simulate_occupation, AbsorptionSampler, Histogram, JumpRecord, McSummary,
    MomentAccumulator,
};
use ndarray::Array1;
use num_complex::Complex64 as C64;

/// Two-qubit input: is a photon loaded on each cavity rail?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParityCase {
    pub n1_in: bool,
    pub n2_in: bool,
}

impl ParityCase {
    pub const ALL: [ParityCase; 4] = [
        ParityCase { n1_in: false, n2_in: false },
        ParityCase { n1_in: true, n2_in: false },
        ParityCase { n1_in: false, n2_in: true },
        ParityCase { n1_in: true, n2_in: true },
    ];

    pub fn is_even(&self) -> bool {
        self.n1_in == self.n2_in
    }

    pub fn label(&self) -> &'static str {
        match (self.n1_in, self.n2_in) {
            (false, false) => "00",
            (true, false) => "10",
            (false, true) => "01",
            (true, true) => "11",
        }
    }
}

/// One Monte Carlo shot: the two rails' event records and the probe path.
#[derive(Debug, Clone)]
pub struct ShotRecord {
    pub case: ParityCase,
    pub rail1: JumpRecord,
    pub rail2: JumpRecord,
    pub beta: TimeSeries<C64>,
}

impl ShotRecord {
    /// max_t |β(t) − β∞| over the stored path.
    pub fn max_delta(&self, beta_inf: C64) -> f64 {
        self.beta
            .values
            .iter()
            .map(|b| (b - beta_inf).norm())
            .fold(0.0, f64::max)
    }

    /// β(t) − β∞ at the grid point nearest to `t`.
    pub fn delta_at(&self, t: f64, beta_inf: C64) -> Result<C64> {
        let grid = self.beta.grid;
        if t < grid.t_start || t > grid.t_end {
            return Err(Error::Validation(format!(
                "probe time {t} outside the grid span [{}, {}]",
                grid.t_start, grid.t_end
            )));
        }
        let i = ((t - grid.t_start) / grid.spacing()).round() as usize;
        Ok(self.beta.values[i.min(grid.n_points - 1)] - beta_inf)
    }
}

/// Probe path for a pair of rail records: piecewise-exact integration of
/// dβ/dt = −iε − iχ(n₁ − n₂)β − (κ_b/2)β from β(0) = β∞.
pub fn probe_path(
    rail1: &JumpRecord,
    rail2: &JumpRecord,
    params: &SystemParams,
    grid: &TimeGrid,
) -> TimeSeries<C64> {
    let mut breaks = Vec::with_capacity(4);
    for rail in [rail1, rail2] {
        if let Some(t) = rail.t_abs {
            breaks.push(t);
        }
        if let Some(t) = rail.t_emit {
            breaks.push(t);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    crate::trajectory::propagate_probe(
        |t| rail1.occupation(t) as f64 - rail2.occupation(t) as f64,
        &breaks,
        params,
        grid,
        analytic::beta_steady(params),
    )
}

/// Samples one shot: each loaded rail draws independent absorption and
/// emission times from the shared pulse; rail 2's events are shifted by
/// `timing_offset` (0 for the synchronous photons the gate assumes).
pub fn simulate_parity_shot(
    rng: &mut RngStream,
    sampler: &AbsorptionSampler,
    params: &SystemParams,
    case: ParityCase,
    grid: &TimeGrid,
    timing_offset: f64,
) -> ShotRecord {
    let rail1 = if case.n1_in {
        simulate_occupation(rng, sampler, params, grid.t_end)
    } else {
        JumpRecord::empty()
    };
    let rail2 = if case.n2_in {
        let rec = simulate_occupation(rng, sampler, params, grid.t_end);
        JumpRecord {
            t_abs: rec.t_abs.map(|t| t + timing_offset),
            t_emit: rec.t_emit.map(|t| t + timing_offset),
            truncated: rec.truncated,
        }
    } else {
        JumpRecord::empty()
    };
    let beta = probe_path(&rail1, &rail2, params, grid);
    ShotRecord {
        case,
        rail1,
        rail2,
        beta,
    }
}

/// Trapezoid integral of β(t) − β∞ over the grid points inside `window`.
pub fn window_integral(
    beta: &TimeSeries<C64>,
    beta_inf: C64,
    window: (f64, f64),
) -> Result<C64> {
    let grid = beta.grid;
    let (w_lo, w_hi) = window;
    if !(w_lo.is_finite() && w_hi.is_finite()) || w_lo < grid.t_start || w_hi > grid.t_end {
        return Err(Error::Validation(format!(
            "window [{w_lo}, {w_hi}] must lie inside the grid span [{}, {}]",
            grid.t_start, grid.t_end
        )));
    }
    let h = grid.spacing();
    let i_lo = ((w_lo - grid.t_start) / h).ceil() as usize;
    let i_hi = ((w_hi - grid.t_start) / h).floor() as usize;
    if i_hi <= i_lo {
        return Err(Error::Validation(format!(
            "window [{w_lo}, {w_hi}] contains fewer than two grid points"
        )));
    }
    let mut sum = C64::new(0.0, 0.0);
    for i in i_lo..=i_hi {
        let weight = if i == i_lo || i == i_hi { 0.5 } else { 1.0 };
        sum += (beta.values[i] - beta_inf) * weight;
    }
    Ok(sum * h)
}

/// Integrated rotated quadrature S = ∫_window Re[e^{iφ}(β(t) − β∞)]dt.
///
/// Swapping the rails maps β − β∞ to its negated conjugate, so S(φ) is
/// exactly negated at φ = 0 and maps to −S(−φ) in general.
pub fn discriminator(
    shot: &ShotRecord,
    params: &SystemParams,
    phi: f64,
    window: (f64, f64),
) -> Result<f64> {
    let w = window_integral(&shot.beta, analytic::beta_steady(params), window)?;
    Ok((C64::new(0.0, phi).exp() * w).re)
}

/// Per-case shot statistics of the discriminator.
#[derive(Debug, Clone)]
pub struct CaseStats {
    pub case: ParityCase,
    pub histogram: Histogram,
    pub summary: McSummary,
}

/// One point of the threshold sweep: classify a shot as odd parity when
/// |S| > θ and report the misclassification probability (parity classes
/// weighted equally, cases within a class weighted equally).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPoint {
    pub theta: f64,
    pub error_rate: f64,
}

#[derive(Debug, Clone)]
pub struct ParityMcResult {
    /// Quadrature angle actually used (from the sweep unless fixed).
    pub phi: f64,
    pub window: (f64, f64),
    /// Statistics per case, in [`ParityCase::ALL`] order.
    pub cases: Vec<CaseStats>,
    pub theta_sweep: Vec<ThetaPoint>,
    pub best_theta: ThetaPoint,
    /// Inherited from the absorption model (κ_a > γ/3 for the exponential
    /// pulse caps the absorption probability at one).
    pub out_of_regime: bool,
}

/// Angles probed when choosing φ: the coarse sweep maximizes |E[S]| for the
/// odd-parity case (1,0).
pub const PHI_SWEEP_POINTS: usize = 64;

/// Thresholds probed in the misclassification sweep.
pub const THETA_SWEEP_POINTS: usize = 33;

/// Monte Carlo over all four parity cases with `n_trials` shots each.
/// `window` defaults to the full grid span; `phi` defaults to the sweep
/// maximizer. Trials use split, counter-indexed streams, so results are
/// bit-identical for any worker count.
#[allow(clippy::too_many_arguments)]
pub fn parity_mc(
    rng: &RngStream,
    params: &SystemParams,
    shape: &PulseShape,
    n_trials: u64,
    grid: &TimeGrid,
    phi: Option<f64>,
    window: Option<(f64, f64)>,
    timing_offset: f64,
) -> Result<ParityMcResult> {
    let params = params.validated()?;
    if n_trials < 100 {
        return Err(Error::Validation(format!(
            "parity statistics need at least 100 trials (got {n_trials})"
        )));
    }
    if !timing_offset.is_finite() {
        return Err(Error::NonFinite { field: "timing_offset" });
    }
    let window = window.unwrap_or((grid.t_start, grid.t_end));
    let sampler = AbsorptionSampler::new(shape, &params)?;
    let beta_inf = analytic::beta_steady(&params);
    // validate the window against the grid before spawning trials
    {
        let probe = TimeSeries::new(*grid, vec![beta_inf; grid.n_points])?;
        window_integral(&probe, beta_inf, window)?;
    }

    // Per-shot window integrals W; S(φ) = Re[e^{iφ} W] is formed afterwards
    // so the φ-sweep reuses the same shots.
    let mut case_w: Vec<Vec<C64>> = Vec::with_capacity(4);
    for (ci, case) in ParityCase::ALL.into_iter().enumerate() {
        let batches = batched_trials(n_trials, Vec::<C64>::new(), |ws, k| {
            // Disjoint stream blocks per case keep the four ensembles
            // independent.
            let mut r = rng.split(ci as u64 * n_trials + k);
            let shot = simulate_parity_shot(&mut r, &sampler, &params, case, grid, timing_offset);
            ws.push(window_integral(&shot.beta, beta_inf, window).expect("window checked above"));
        });
        case_w.push(batches.into_iter().flatten().collect());
    }

    let phi = match phi {
        Some(p) => {
            if !p.is_finite() {
                return Err(Error::NonFinite { field: "phi" });
            }
            p
        }
        None => {
            let mean_w10 = case_w[1].iter().sum::<C64>() / C64::new(n_trials as f64, 0.0);
            (0..PHI_SWEEP_POINTS)
                .map(|k| k as f64 / PHI_SWEEP_POINTS as f64 * std::f64::consts::TAU)
                .max_by(|a, b| {
                    let proj = |p: &f64| (C64::new(0.0, *p).exp() * mean_w10).re.abs();
                    proj(a).partial_cmp(&proj(b)).unwrap()
                })
                .unwrap_or(0.0)
        }
    };
    let rot = C64::new(0.0, phi).exp();
    let case_s: Vec<Vec<f64>> = case_w
        .iter()
        .map(|ws| ws.iter().map(|w| (rot * w).re).collect())
        .collect();

    let s_max = case_s
        .iter()
        .flatten()
        .map(|s| s.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut cases = Vec::with_capacity(4);
    for (case, ss) in ParityCase::ALL.into_iter().zip(&case_s) {
        let mut hist = Histogram::new(-1.0001 * s_max, 1.0001 * s_max, 100)?;
        let mut acc = MomentAccumulator::default();
        for &s in ss {
            hist.record(s);
            acc.push(s);
        }
        cases.push(CaseStats {
            case,
            histogram: hist,
            summary: McSummary::from_real_moments(&acc),
        });
    }

    let mut theta_sweep = Vec::with_capacity(THETA_SWEEP_POINTS);
    for j in 0..THETA_SWEEP_POINTS {
        let theta = s_max * j as f64 / (THETA_SWEEP_POINTS - 1) as f64;
        // P(|S| > θ | even) + P(|S| <= θ | odd), each class averaging its
        // two cases
        let frac = |ss: &[f64], odd_called: bool| {
            let hits = ss
                .iter()
                .filter(|s| (s.abs() > theta) == odd_called)
                .count();
            hits as f64 / ss.len() as f64
        };
        let even_err = 0.5 * (frac(&case_s[0], true) + frac(&case_s[3], true));
        let odd_err = 0.5 * (frac(&case_s[1], false) + frac(&case_s[2], false));
        theta_sweep.push(ThetaPoint {
            theta,
            error_rate: 0.5 * (even_err + odd_err),
        });
    }
    let best_theta = *theta_sweep
        .iter()
        .min_by(|a, b| a.error_rate.partial_cmp(&b.error_rate).unwrap())
        .expect("sweep is non-empty");

    Ok(ParityMcResult {
        phi,
        window,
        cases,
        theta_sweep,
        best_theta,
        out_of_regime: sampler.out_of_regime,
    })
}

/// Full-quantum validation of the parity gate on the five-mode space
/// (c₁, a₁, c₂, a₂, b) in the displaced picture.
#[derive(Debug)]
pub struct ParityLindbladCheck {
    pub grid: TimeGrid,
    /// ⟨b⟩_d with both sources loaded (even parity).
    pub even_b_d: TimeSeries<C64>,
    /// Largest |⟨b⟩_d| of the even-parity run. Zero only at linear order in
    /// χ: the rails dephase the probe through ⟨(n̂₁−n̂₂)²⟩ > 0, leaving an
    /// O(χ²) residual.
    pub even_max_b: f64,
    /// ⟨b⟩_d with only source 1 loaded (odd parity).
    pub odd_b_d: TimeSeries<C64>,
    pub odd_n1: TimeSeries<f64>,
    /// Slaved-tracking report for the odd-parity run, when in regime.
    pub odd_slaved: Option<SlavedReport>,
    pub max_trace_error: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue_samples: Vec<(f64, f64)>,
    pub top_level_population: f64,
    pub truncation_warning: bool,
}

/// Integrates the cascaded master equation for both parity classes and
/// extracts the probe observable. Dimension is 16·N_b, so N_b ≤ 8 keeps
/// D ≤ 128.
pub fn parity_lindblad_check(
    params: &SystemParams,
    n_b: usize,
    t_max: f64,
    dt: Option<f64>,
) -> Result<ParityLindbladCheck> {
    let params = params.validated()?;
    if !(4..=8).contains(&n_b) {
        return Err(Error::Validation(format!(
            "parity check needs 4 <= N_b <= 8 (got {n_b})"
        )));
    }
    if params.delta_a != 0.0 {
        return Err(Error::Validation(
            "displaced runs assume delta_a = 0 (the detuning is chosen to cancel)".into(),
        ));
    }
    let space = FockSpace::new(&[2, 2, 2, 2, n_b])?;
    let c1 = space.lowering(0)?;
    let a1 = space.lowering(1)?;
    let c2 = space.lowering(2)?;
    let a2 = space.lowering(3)?;
    let b = space.lowering(4)?;
    let n1 = space.number(1)?;
    let n2 = space.number(3)?;
    let n_b_op = space.number(4)?;

    // H = χ(n̂₁ − n̂₂)(β∞b† + β∞*b) + χ(n̂₁ − n̂₂)n̂_b
    let beta_inf = analytic::beta_steady(&params);
    let diff = &n1 - &n2;
    let linear = b.t().map(|z| z.conj() * beta_inf) + b.mapv(|z| z * beta_inf.conj());
    let h = (diff.dot(&linear) + diff.dot(&n_b_op)).mapv(|z| z * params.chi);

    let liouv = Liouvillian::new(
        h,
        vec![(params.kappa_b, b.clone())],
        vec![
            CascadeChain {
                rate_src: params.gamma,
                src: c1,
                rate_dst: params.kappa_a,
                dst: a1,
            },
            CascadeChain {
                rate_src: params.gamma,
                src: c2,
                rate_dst: params.kappa_a,
                dst: a2,
            },
        ],
    )?;

    let n_points = ((t_max * 20.0).ceil() as usize).clamp(100, 2000) + 1;
    let grid = TimeGrid::new(0.0, t_max, n_points)?;
    let step = dt.unwrap_or_else(|| lindblad::default_dt(&params));
    let top_guard = space.level_projector(4, n_b - 1)? + space.level_projector(4, n_b - 2)?;
    let observables = [n1.clone(), b.clone(), top_guard];

    let initial = |loaded2: bool| -> Result<DensityMatrix> {
        let one = Array1::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let vac2 = Array1::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let mut vac_b = Array1::<C64>::zeros(n_b);
        vac_b[0] = C64::new(1.0, 0.0);
        let c2_state = if loaded2 { one.clone() } else { vac2.clone() };
        DensityMatrix::from_pure(
            &space.product_state(&[one.clone(), vac2.clone(), c2_state, vac2, vac_b])?,
        )
    };

    let even = lindblad::integrate(&liouv, &initial(true)?, &grid, step, &observables)?;
    let odd = lindblad::integrate(&liouv, &initial(false)?, &grid, step, &observables)?;

    let even_b_d = even.observables[1].clone();
    let even_max_b = even_b_d.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let odd_b_d = odd.observables[1].clone();
    let odd_n1 = TimeSeries::new(grid, odd.observables[0].values.iter().map(|z| z.re).collect())?;

    let slaved_regime = params.chi != 0.0
        && params.kappa_b >= 10.0 * params.kappa_a
        && params.chi.abs() <= 0.01 * params.kappa_b;
    let odd_slaved = if slaved_regime {
        let b_scale = params.displacement_scale();
        let peak_occupation = odd_n1.values.iter().copied().fold(0.0, f64::max);
        let max_deviation = odd_b_d
            .values
            .iter()
            .zip(&odd_n1.values)
            .map(|(bv, &n)| (bv + C64::new(b_scale * n, 0.0)).norm())
            .fold(0.0, f64::max);
        let bound = 0.05 * b_scale.abs() * peak_occupation;
        Some(SlavedReport {
            max_deviation,
            bound,
            peak_occupation,
            within_bound: max_deviation <= bound,
        })
    } else {
        None
    };

    let max_trace = |out: &lindblad::IntegrationOutput| {
        out.trace_error.values.iter().copied().fold(0.0, f64::max)
    };
    let top_pop = |out: &lindblad::IntegrationOutput| {
        out.observables[2]
            .values
            .iter()
            .map(|z| z.re)
            .fold(0.0, f64::max)
    };
    let top_level_population = top_pop(&even).max(top_pop(&odd));
    let mut min_eigenvalue_samples = even.min_eigenvalue_samples.clone();
    min_eigenvalue_samples.extend(&odd.min_eigenvalue_samples);

    Ok(ParityLindbladCheck {
        grid,
        even_b_d,
        even_max_b,
        odd_b_d,
        odd_n1,
        odd_slaved,
        max_trace_error: max_trace(&even).max(max_trace(&odd)),
        max_hermiticity_defect: even
            .max_hermiticity_defect
            .max(odd.max_hermiticity_defect),
        min_eigenvalue_samples,
        top_level_population,
        truncation_warning: top_level_population > lindblad::TRUNCATION_THRESHOLD,
    })
}
