//! Path ensembles, the network comparison table, the deterministic run and
//! time-step studies.

use serde::Serialize;

use crate::dynamics::{
    aggregate_drift, burst_monitor, explicit_bubble, grid_index, init_bubble, sample_tau,
    step_bubble, BirthTime, BubbleModel, BubbleStep, BurstMonitor, PathNoise, Resiliency,
    Trajectory,
};
use crate::error::{param, Error, Result};
use crate::network::NetworkSpec;
use crate::parallel::map_paths;
use crate::params::ModelParams;
use crate::rng::{stream, Purpose};

/// Probe times reported by the comparison table.
pub const TABLE_PROBES: [f64; 2] = [0.6, 1.6];

/// Share of failed paths an ensemble tolerates.
pub const MAX_INVALID_SHARE: f64 = 0.01;

/// The three per-path quantities of the comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    /// Largest bubble value on `[birth, T]`; zero without a birth.
    pub max: f64,
    /// First grid time attaining `max`; `None` without a birth.
    pub argmax: Option<f64>,
    /// Bubble at each probe time.
    pub beta_at: Vec<f64>,
}

/// Reduces one trajectory to its summary.
pub fn summarize(tr: &Trajectory, probes: &[f64]) -> Result<PathSummary> {
    let beta_at = probes
        .iter()
        .map(|&t| {
            tr.index_of(t)
                .map(|i| tr.beta[i])
                .ok_or_else(|| param("t_probe", format!("{t} is outside the simulation grid")))
        })
        .collect::<Result<Vec<_>>>()?;
    let Some(birth) = tr.birth else {
        return Ok(PathSummary {
            max: 0.0,
            argmax: None,
            beta_at,
        });
    };
    let mut best = birth;
    for i in birth + 1..tr.len() {
        if tr.beta[i] > tr.beta[best] {
            best = i;
        }
    }
    Ok(PathSummary {
        max: tr.beta[best],
        argmax: Some(tr.times[best]),
        beta_at,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub n_paths: usize,
    /// Paths with a birth before the horizon; the argmax is averaged over
    /// these only.
    pub n_born: usize,
    pub mean_max: f64,
    pub se_max: f64,
    pub mean_argmax: f64,
    pub se_argmax: f64,
    pub t_probe: f64,
    pub beta_at: f64,
    pub se_beta_at: f64,
}

impl EnsembleStats {
    /// Two-sided 95% normal interval of a mean.
    pub fn ci95(mean: f64, se: f64) -> (f64, f64) {
        (mean - 1.96 * se, mean + 1.96 * se)
    }
}

/// Whether two 95% intervals are disjoint with `a` above `b`.
pub fn above_disjoint(a: (f64, f64), b: (f64, f64)) -> bool {
    EnsembleStats::ci95(a.0, a.1).0 > EnsembleStats::ci95(b.0, b.1).1
}

/// Sample mean and standard error (zero for fewer than two values).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Statistics of summaries for probe number `probe`.
pub fn stats_from_summaries(
    summaries: &[PathSummary],
    probe: usize,
    t_probe: f64,
) -> EnsembleStats {
    let maxes: Vec<f64> = summaries.iter().map(|s| s.max).collect();
    let argmaxes: Vec<f64> = summaries.iter().filter_map(|s| s.argmax).collect();
    let at: Vec<f64> = summaries.iter().map(|s| s.beta_at[probe]).collect();
    let (mean_max, se_max) = mean_se(&maxes);
    let (mean_argmax, se_argmax) = mean_se(&argmaxes);
    let (beta_at, se_beta_at) = mean_se(&at);
    EnsembleStats {
        n_paths: summaries.len(),
        n_born: argmaxes.len(),
        mean_max,
        se_max,
        mean_argmax,
        se_argmax,
        t_probe,
        beta_at,
        se_beta_at,
    }
}

/// Statistics of a set of trajectories sharing one grid.
pub fn stats(trajectories: &[Trajectory], t_probe: f64) -> Result<EnsembleStats> {
    if trajectories.is_empty() {
        return Err(param("n_paths", "no trajectories"));
    }
    let summaries = trajectories
        .iter()
        .map(|tr| summarize(tr, &[t_probe]))
        .collect::<Result<Vec<_>>>()?;
    Ok(stats_from_summaries(&summaries, 0, t_probe))
}

#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub n_paths: usize,
    pub probes: Vec<f64>,
    /// Number of leading trajectories returned in full.
    pub keep: usize,
    pub threads: Option<usize>,
}

impl EnsembleOptions {
    pub fn new(n_paths: usize, t_probe: f64) -> Self {
        Self {
            n_paths,
            probes: vec![t_probe],
            keep: 0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    /// One entry per probe time.
    pub stats: Vec<EnsembleStats>,
    pub kept: Vec<Trajectory>,
    pub invalid: usize,
}

/// Simulates paths `0..n_paths`, keeping only their summaries (plus the
/// first `keep` trajectories).
pub fn run_ensemble(model: &BubbleModel, opts: &EnsembleOptions) -> Result<EnsembleRun> {
    if opts.n_paths == 0 {
        return Err(param("n_paths", "must be > 0"));
    }
    let results = map_paths(opts.n_paths as u64, opts.threads, |i| {
        let tr = model.simulate_path(i)?;
        let summary = summarize(&tr, &opts.probes)?;
        let kept = ((i as usize) < opts.keep).then_some(tr);
        Ok::<_, Error>((summary, kept))
    });
    let mut summaries = Vec::with_capacity(opts.n_paths);
    let mut kept = Vec::new();
    let mut invalid = 0;
    for r in results {
        match r {
            Ok((s, t)) => {
                summaries.push(s);
                kept.extend(t);
            }
            Err(Error::Path { .. }) => invalid += 1,
            Err(e) => return Err(e),
        }
    }
    if invalid as f64 > MAX_INVALID_SHARE * opts.n_paths as f64 || summaries.is_empty() {
        return Err(Error::Ensemble {
            invalid,
            total: opts.n_paths,
        });
    }
    let stats = opts
        .probes
        .iter()
        .enumerate()
        .map(|(j, &t)| stats_from_summaries(&summaries, j, t))
        .collect();
    Ok(EnsembleRun {
        stats,
        kept,
        invalid,
    })
}

/// One network's row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub network: String,
    pub mean_degree: f64,
    /// Statistics at each of [`TABLE_PROBES`].
    pub stats: Vec<EnsembleStats>,
}

/// Runs the same seed on every network.
pub fn run_table(
    params: &ModelParams,
    networks: &[NetworkSpec],
    n_paths: usize,
    threads: Option<usize>,
) -> Result<Vec<TableRow>> {
    networks
        .iter()
        .map(|net| {
            let dist = net.build(params.nodes)?;
            let z = dist.z;
            let model = BubbleModel::new(params.clone(), dist)?;
            let opts = EnsembleOptions {
                n_paths,
                probes: TABLE_PROBES.to_vec(),
                keep: 0,
                threads,
            };
            let run = run_ensemble(&model, &opts)?;
            Ok(TableRow {
                network: net.label(),
                mean_degree: z,
                stats: run.stats,
            })
        })
        .collect()
}

/// One path of the model with every volatility switched off.
pub fn deterministic_run(params: &ModelParams, network: &NetworkSpec) -> Result<Trajectory> {
    let p = params.deterministic();
    let model = BubbleModel::new(p, network.build(params.nodes)?)?;
    model.simulate_path(0)
}

/// Classical RK4 on the noiseless model: the oracle for the deterministic
/// Euler run. The burst switch and the volume clamps are applied between
/// steps exactly as in the path integrator.
pub fn rk4_deterministic(params: &ModelParams, network: &NetworkSpec, dt: f64) -> Result<Vec<f64>> {
    let p = params.deterministic();
    p.validate()?;
    let dist = network.build(p.nodes)?;
    let kp = dist.edge_weights();
    let z = dist.z;
    let nodes = p.nodes as f64;
    let steps = (p.horizon / dt).round() as usize;
    let birth = match sample_tau(&p, &mut stream(p.seed, Purpose::BirthTime, 0)) {
        BirthTime::At(t) => grid_index(t, dt, steps + 1).filter(|&i| i < steps),
        BirthTime::Never => None,
    };
    let resil = Resiliency::from_params(&p)?;
    let lambda_rate = |l: f64| match resil {
        Resiliency::Constant => 0.0,
        Resiliency::Diffusion { kappa, target, .. } => kappa * (target - l),
    };

    // state: wf, m, theta, lambda, x, beta, then x^k
    const WF: usize = 0;
    const M: usize = 1;
    const TH: usize = 2;
    const L: usize = 3;
    const X: usize = 4;
    const B: usize = 5;
    const K0: usize = 6;
    let dim = K0 + kp.len();
    let mut y = vec![0.0; dim];
    y[WF] = p.wf0;
    y[M] = p.m0;
    y[TH] = p.theta0;
    y[L] = p.lambda0;
    let mut out = vec![0.0; steps + 1];
    let mut contagion = p.lambda_contagion;
    let mut selling = p.delta_sell;
    let mut monitor: Option<BurstMonitor> = None;

    let rhs = |y: &[f64], alive: bool, contagion: f64, selling: f64, d: &mut [f64]| {
        d[WF] = p.a * y[WF];
        d[M] = p.mu_m * y[M];
        d[TH] = p.mu_theta * y[TH];
        d[L] = lambda_rate(y[L]);
        if !alive {
            d[X..].fill(0.0);
            return;
        }
        let n: f64 = kp.iter().zip(&y[K0..]).map(|(w, x)| w * x).sum();
        let pressure = n / z;
        let mu = aggregate_drift(y[X], n, y[TH], z, nodes, contagion, selling);
        d[X] = mu;
        d[B] = y[L] * y[M] * (-p.k_decay * y[B] + 2.0 * mu);
        for (k, (dk, xk)) in d[K0..].iter_mut().zip(&y[K0..]).enumerate() {
            *dk = -selling * xk + contagion * k as f64 * pressure * (y[TH] - xk);
        }
    };

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    for (i, slot) in out.iter_mut().enumerate() {
        let t = i as f64 * dt;
        if Some(i) == birth {
            y[K0..].fill(p.xk0);
            y[X] = p.x_birth();
            y[B] = init_bubble(y[X], y[L], y[M], y[WF]);
            monitor = Some(BurstMonitor::new(p.burst_window, t, y[B]));
        }
        *slot = y[B];
        if i == steps {
            break;
        }
        let alive = monitor.is_some();
        rhs(&y, alive, contagion, selling, &mut k1);
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * dt * k1[j];
        }
        rhs(&tmp, alive, contagion, selling, &mut k2);
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * dt * k2[j];
        }
        rhs(&tmp, alive, contagion, selling, &mut k3);
        for j in 0..dim {
            tmp[j] = y[j] + dt * k3[j];
        }
        rhs(&tmp, alive, contagion, selling, &mut k4);
        for j in 0..dim {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if alive {
            let cap = y[TH];
            y[X] = y[X].clamp(0.0, nodes * cap);
            for xk in &mut y[K0..] {
                *xk = xk.clamp(0.0, cap);
            }
            if let Some(mon) = monitor.as_mut() {
                if mon.observe(t + dt, y[B]) {
                    selling *= p.burst_delta_mult;
                    contagion *= p.burst_lambda_mult;
                }
            }
        }
    }
    Ok(out)
}

/// Number of up-to-down turns of a curve, ignoring moves smaller than
/// `slack` times its largest magnitude.
pub fn count_peaks(curve: &[f64], slack: f64) -> usize {
    let scale = curve.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = slack * scale;
    let Some(&first) = curve.first() else {
        return 0;
    };
    // hysteresis: track the running extreme since the last turn
    let mut rising = true;
    let mut extreme = first;
    let mut peaks = 0;
    for &v in &curve[1..] {
        if rising {
            if v > extreme {
                extreme = v;
            } else if v < extreme - tol {
                peaks += 1;
                rising = false;
                extreme = v;
            }
        } else if v < extreme {
            extreme = v;
        } else if v > extreme + tol {
            rising = true;
            extreme = v;
        }
    }
    peaks
}

/// Rises from its start to a single peak (possibly the last point) and
/// never turns up into a second one.
pub fn peaks_once(curve: &[f64], slack: f64) -> bool {
    let top = curve.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    count_peaks(curve, slack) <= 1 && curve.first().is_some_and(|&f| top > f)
}

/// Errors of one grid level of a step-size study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub median_error: f64,
    pub mean_error: f64,
    /// Median over paths of this level's error over the previous level's.
    pub median_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub reference_dt: Option<f64>,
    pub n_paths: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Median errors decrease from each level to the next.
    pub monotone: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn ladder_factors(dts: &[f64]) -> Result<Vec<usize>> {
    if dts.len() < 3 {
        return Err(param("dt", "a ladder needs at least three steps"));
    }
    let finest = *dts.last().unwrap();
    dts.iter()
        .map(|&dt| {
            let f = dt / finest;
            let r = f.round();
            if r < 1.0 || (f - r).abs() > 1e-9 * f {
                Err(param(
                    "dt",
                    "ladder steps must be integer multiples of the finest",
                ))
            } else {
                Ok(r as usize)
            }
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|f| {
            if f.windows(2).all(|w| w[0] > w[1]) {
                Ok(f)
            } else {
                Err(param("dt", "ladder steps must decrease"))
            }
        })
}

fn report(dts: &[f64], reference_dt: Option<f64>, errors: Vec<Vec<f64>>) -> ConvergenceReport {
    let n_paths = errors.len();
    let levels = dts.len();
    let mut rows = Vec::with_capacity(levels);
    for (l, &dt) in dts.iter().enumerate() {
        let e: Vec<f64> = errors.iter().map(|p| p[l]).collect();
        let median_ratio = (l > 0).then(|| {
            median(
                errors
                    .iter()
                    .filter(|p| p[l - 1] > 0.0)
                    .map(|p| p[l] / p[l - 1])
                    .collect(),
            )
        });
        rows.push(ConvergenceRow {
            dt,
            median_error: median(e.clone()),
            mean_error: e.iter().sum::<f64>() / e.len() as f64,
            median_ratio,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].median_error < w[0].median_error);
    ConvergenceReport {
        reference_dt,
        n_paths,
        rows,
        monotone,
    }
}

/// Strong error of the bubble against the finest grid of `dts` on shared
/// Brownian paths: for each coarser step, the largest gap over its grid.
pub fn convergence_study(
    model: &BubbleModel,
    dts: &[f64],
    n_paths: usize,
    threads: Option<usize>,
) -> Result<ConvergenceReport> {
    let factors = ladder_factors(dts)?;
    let finest = *dts.last().unwrap();
    let steps = (model.params.horizon / finest).round() as usize;
    if factors.iter().any(|f| !steps.is_multiple_of(*f)) {
        return Err(param("dt", "every ladder step must divide the horizon"));
    }
    let per_path = map_paths(n_paths as u64, threads, |i| -> Result<Vec<f64>> {
        let noise = PathNoise::generate(model.params.seed, i, steps, finest);
        let birth = model.birth_time(i);
        let reference = model.simulate_with_noise(i, &noise, birth)?;
        factors[..factors.len() - 1]
            .iter()
            .map(|&f| {
                let coarse = model.simulate_with_noise(i, &noise.coarsen(f), birth)?;
                Ok(coarse
                    .beta
                    .iter()
                    .enumerate()
                    .map(|(j, b)| (b - reference.beta[j * f]).abs())
                    .fold(0.0, f64::max))
            })
            .collect()
    });
    let errors = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(report(&dts[..dts.len() - 1], Some(finest), errors))
}

/// Gap between the Euler bubble and the closed-form bubble evaluated on the
/// same path, for each step of `dts` on shared Brownian paths.
pub fn explicit_gap_study(
    model: &BubbleModel,
    dts: &[f64],
    n_paths: usize,
    threads: Option<usize>,
) -> Result<ConvergenceReport> {
    let factors = ladder_factors(dts)?;
    let finest = *dts.last().unwrap();
    let steps = (model.params.horizon / finest).round() as usize;
    if factors.iter().any(|f| !steps.is_multiple_of(*f)) {
        return Err(param("dt", "every ladder step must divide the horizon"));
    }
    let per_path = map_paths(n_paths as u64, threads, |i| -> Result<Vec<f64>> {
        let noise = PathNoise::generate(model.params.seed, i, steps, finest);
        let birth = model.birth_time(i);
        factors
            .iter()
            .map(|&f| {
                let tr = model.simulate_with_noise(i, &noise.coarsen(f), birth)?;
                let exact = explicit_bubble(&tr, model.params.k_decay);
                Ok(tr
                    .beta
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max))
            })
            .collect()
    });
    let errors = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(report(dts, None, errors))
}

/// Euler bubble with constant coefficients and no volume,
/// `b' = b (1 - k L M dt)`, against `b0 exp(-k L M T)`; returns the
/// relative error at `T`.
pub fn pure_decay_error(beta0: f64, lm: f64, k_decay: f64, horizon: f64, dt: f64) -> f64 {
    let steps = (horizon / dt).round() as usize;
    let s = BubbleStep {
        mu: 0.0,
        sigma: 0.0,
        lambda: lm,
        m: 1.0,
        wf: 1.0,
        x_birth: 0.0,
        k_decay,
    };
    let mut b = beta0;
    for _ in 0..steps {
        b = step_bubble(b, &s, 0.0, 0.0, dt);
    }
    let exact = beta0 * (-k_decay * lm * steps as f64 * dt).exp();
    ((b - exact) / exact).abs()
}

/// Index of the burst switch along a stored bubble path.
pub fn burst_index(tr: &Trajectory, window: f64) -> Option<usize> {
    let b = tr.birth?;
    burst_monitor(&tr.times[b..], &tr.beta[b..], window).map(|i| i + b)
}
