use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::burst::{BurstMonitor, Regime};
use super::steps::{
    advance_contagion, aggregate_drift, aggregate_vol, init_bubble, step_bubble, step_fundamental,
    step_liquidity, step_wealth_cap, BubbleStep, Resiliency,
};
use crate::error::{Error, Result};
use crate::network::DegreeDistribution;
use crate::params::{ModelParams, TauMode};
use crate::rng::{stream, Purpose};

/// Brownian increments `dB1..dB4` for one path on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathNoise {
    pub dt: f64,
    pub db: [Vec<f64>; 4],
}

impl PathNoise {
    /// Draws `n_steps` increments of each Brownian motion from the path's
    /// own stream.
    pub fn generate(seed: u64, path_index: u64, n_steps: usize, dt: f64) -> Self {
        let mut rng = stream(seed, Purpose::Brownian, path_index);
        let sd = dt.sqrt();
        let mut db: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n_steps));
        for _ in 0..n_steps {
            for series in db.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                series.push(sd * z);
            }
        }
        Self { dt, db }
    }

    /// Sums consecutive blocks of `factor` increments: the same Brownian
    /// paths seen on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        let db = std::array::from_fn(|j| {
            self.db[j]
                .chunks(factor)
                .map(|c| c.iter().sum::<f64>())
                .collect()
        });
        Self {
            dt: self.dt * factor as f64,
            db,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.db[0].len()
    }
}

/// Outcome of drawing the bubble birth time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BirthTime {
    At(f64),
    /// No birth before the horizon.
    Never,
}

/// First event of an inhomogeneous Poisson process on `[0, horizon)` by
/// thinning a rate-`bound` homogeneous process.
pub fn first_event_by_thinning<R: Rng + ?Sized>(
    intensity: impl Fn(f64) -> f64,
    bound: f64,
    horizon: f64,
    rng: &mut R,
) -> BirthTime {
    if bound <= 0.0 {
        return BirthTime::Never;
    }
    let gaps = Exp::new(bound).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += gaps.sample(rng);
        if t >= horizon {
            return BirthTime::Never;
        }
        let u: f64 = rng.random();
        if u * bound < intensity(t) {
            return BirthTime::At(t);
        }
    }
}

/// Bubble birth time for a path.
pub fn sample_tau<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> BirthTime {
    match params.tau_mode {
        TauMode::Deterministic => BirthTime::At(params.tau0),
        TauMode::Intensity => {
            let pi = params.pi_intensity;
            first_event_by_thinning(|_| pi, params.pi_bound, params.horizon, rng)
        }
    }
}

/// Per-degree volumes recorded every `stride` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PerDegreeRecord {
    pub stride: usize,
    pub rows: Vec<Vec<f64>>,
}

/// A simulated path of every state variable on the grid `0, dt, ..., T`.
///
/// Before the birth the bubble, the volumes and their coefficients are
/// zero. `mu[i]` and `sigma[i]` are the coefficients used on step `i -> i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub path_index: u64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub wf: Vec<f64>,
    pub m: Vec<f64>,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub n: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub regime: Vec<Regime>,
    pub db: [Vec<f64>; 4],
    /// Grid index of the birth (the jump lands on this point).
    pub birth: Option<usize>,
    pub jump_time: Option<f64>,
    pub burst_time: Option<f64>,
    pub per_degree: Option<PerDegreeRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the grid point closest to `t`, if `t` lies on the grid span.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        grid_index(t, self.dt, self.len())
    }
}

pub(crate) fn grid_index(t: f64, dt: f64, len: usize) -> Option<usize> {
    if !t.is_finite() || t < -0.5 * dt {
        return None;
    }
    let i = (t / dt).round() as usize;
    (i < len).then_some(i)
}

/// A parameter set bound to a degree table, ready to simulate paths.
#[derive(Debug, Clone)]
pub struct BubbleModel {
    pub params: ModelParams,
    pub dist: DegreeDistribution,
    edge_weights: Vec<f64>,
    resiliency: Resiliency,
    record_stride: Option<usize>,
}

impl BubbleModel {
    pub fn new(params: ModelParams, dist: DegreeDistribution) -> Result<Self> {
        params.validate()?;
        if dist.z <= 0.0 {
            return Err(Error::DegenerateNetwork);
        }
        let resiliency = Resiliency::from_params(&params)?;
        Ok(Self {
            edge_weights: dist.edge_weights(),
            params,
            dist,
            resiliency,
            record_stride: None,
        })
    }

    /// Keep per-degree volumes every `stride` steps in the trajectories.
    pub fn record_per_degree(mut self, stride: usize) -> Self {
        self.record_stride = Some(stride.max(1));
        self
    }

    pub fn birth_time(&self, path_index: u64) -> BirthTime {
        let mut rng = stream(self.params.seed, Purpose::BirthTime, path_index);
        sample_tau(&self.params, &mut rng)
    }

    pub fn noise(&self, path_index: u64) -> PathNoise {
        PathNoise::generate(
            self.params.seed,
            path_index,
            self.params.n_steps(),
            self.params.dt,
        )
    }

    /// Full coupled integration of path `path_index`; a pure function of
    /// `(seed, path_index, dt)`.
    pub fn simulate_path(&self, path_index: u64) -> Result<Trajectory> {
        let noise = self.noise(path_index);
        self.simulate_with_noise(path_index, &noise, self.birth_time(path_index))
    }

    /// Integrates on caller-supplied increments; the grid step is `noise.dt`.
    pub fn simulate_with_noise(
        &self,
        path_index: u64,
        noise: &PathNoise,
        birth: BirthTime,
    ) -> Result<Trajectory> {
        let p = &self.params;
        let dt = noise.dt;
        let steps = noise.n_steps();
        let len = steps + 1;
        let nodes = p.nodes as f64;
        let z = self.dist.z;
        let unit = p.vol_unit();
        let x_birth = p.x_birth();

        let birth_index = match birth {
            BirthTime::At(t) => grid_index(t, dt, len).filter(|&i| i < steps),
            BirthTime::Never => None,
        };

        let mut tr = Trajectory {
            path_index,
            dt,
            times: (0..len).map(|i| i as f64 * dt).collect(),
            wf: vec![0.0; len],
            m: vec![0.0; len],
            lambda: vec![0.0; len],
            theta: vec![0.0; len],
            x: vec![0.0; len],
            n: vec![0.0; len],
            beta: vec![0.0; len],
            mu: vec![0.0; len],
            sigma: vec![0.0; len],
            regime: vec![Regime::PreBubble; len],
            db: noise.db.clone(),
            birth: birth_index,
            jump_time: birth_index.map(|i| i as f64 * dt),
            burst_time: None,
            per_degree: self.record_stride.map(|stride| PerDegreeRecord {
                stride,
                rows: Vec::new(),
            }),
        };
        tr.wf[0] = p.wf0;
        tr.m[0] = p.m0;
        tr.lambda[0] = p.lambda0;
        tr.theta[0] = p.theta0;

        let mut xk = vec![0.0; self.edge_weights.len()];
        let mut n_now = 0.0;
        let mut contagion = p.lambda_contagion;
        let mut selling = p.delta_sell;
        let mut monitor: Option<BurstMonitor> = None;
        let mut regime = Regime::PreBubble;

        for i in 0..len {
            let t = tr.times[i];
            if Some(i) == birth_index {
                xk.fill(p.xk0);
                n_now = p.xk0 * self.dist.z;
                tr.x[i] = x_birth;
                tr.beta[i] = init_bubble(x_birth, tr.lambda[i], tr.m[i], tr.wf[i]);
                monitor = Some(BurstMonitor::new(p.burst_window, t, tr.beta[i]));
                regime = Regime::Growth;
                tr.regime[i] = regime;
            }
            let alive = monitor.is_some();
            if alive {
                tr.n[i] = n_now;
                tr.mu[i] =
                    aggregate_drift(tr.x[i], n_now, tr.theta[i], z, nodes, contagion, selling);
                tr.sigma[i] = aggregate_vol(
                    tr.x[i],
                    tr.theta[i],
                    nodes,
                    p.sigma_bar_at(t),
                    p.alpha_vol,
                    unit,
                );
            }
            if let Some(rec) = tr.per_degree.as_mut() {
                if i % rec.stride == 0 {
                    rec.rows.push(xk.clone());
                }
            }
            if i == steps {
                break;
            }

            let [db1, db2, db3, db4] = [
                noise.db[0][i],
                noise.db[1][i],
                noise.db[2][i],
                noise.db[3][i],
            ];
            tr.wf[i + 1] = step_fundamental(tr.wf[i], p.a, p.b, db1, dt);
            tr.m[i + 1] = step_liquidity(tr.m[i], p.mu_m, p.sigma_m, db3, dt);
            tr.theta[i + 1] = step_wealth_cap(tr.theta[i], p.mu_theta, p.sigma_theta, db3, dt);
            tr.lambda[i + 1] = self.resiliency.step(tr.lambda[i], db4, dt);

            if let Some(mon) = monitor.as_mut() {
                let coeffs = BubbleStep {
                    mu: tr.mu[i],
                    sigma: tr.sigma[i],
                    lambda: tr.lambda[i],
                    m: tr.m[i],
                    wf: tr.wf[i],
                    x_birth,
                    k_decay: p.k_decay,
                };
                tr.beta[i + 1] = step_bubble(tr.beta[i], &coeffs, db2, 0.0, dt);
                let cap = nodes * tr.theta[i + 1];
                tr.x[i + 1] = (tr.x[i] + tr.mu[i] * dt + tr.sigma[i] * db2).clamp(0.0, cap);
                n_now = advance_contagion(
                    &mut xk,
                    &self.edge_weights,
                    n_now / z,
                    tr.theta[i],
                    tr.theta[i + 1],
                    contagion,
                    selling,
                    dt,
                );
                if mon.observe(tr.times[i + 1], tr.beta[i + 1]) {
                    regime = Regime::Burst;
                    selling *= p.burst_delta_mult;
                    contagion *= p.burst_lambda_mult;
                    tr.burst_time = Some(tr.times[i + 1]);
                }
                tr.regime[i + 1] = regime;
            }

            let finite = tr.wf[i + 1].is_finite()
                && tr.m[i + 1].is_finite()
                && tr.theta[i + 1].is_finite()
                && tr.beta[i + 1].is_finite()
                && tr.x[i + 1].is_finite()
                && n_now.is_finite();
            if !finite {
                return Err(Error::Path {
                    path: path_index,
                    step: i + 1,
                    reason: "non-finite state".into(),
                });
            }
        }
        Ok(tr)
    }
}
