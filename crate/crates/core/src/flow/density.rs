use crate::dynamics::Trajectory;
use crate::params::ModelParams;

use super::kernels::FlowKernels;

/// Density of `Q^t` against `P` along one path, on the kernels' grid range.
///
/// Index `j` corresponds to grid point `first + j`; `z[0] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPath {
    pub first: usize,
    pub log_z: Vec<f64>,
    pub z: Vec<f64>,
    pub log_zbar: Vec<f64>,
    /// Continuous part, the exponential of the two Brownian integrals.
    pub zbar: Vec<f64>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    /// Jump part: `prod (1 + alpha3 dN) exp(-int alpha3 pi ds)`.
    pub jump_factor: Vec<f64>,
}

impl DensityPath {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.log_z.iter().all(|v| v.is_finite())
    }

    /// Checks `Z <= 2 e^(3 + T Pi) Zbar` at every point (in logs).
    pub fn bound_holds(&self, horizon: f64, pi_bound: f64) -> bool {
        let log_c = std::f64::consts::LN_2 + 3.0 + horizon * pi_bound;
        self.log_z
            .iter()
            .zip(&self.log_zbar)
            .all(|(&lz, &lzb)| lz <= log_c + lzb + 1e-12)
    }
}

/// Accumulates the stochastic exponential in log space.
///
/// Brownian parts use `log Z += a dB - a^2 dt / 2` with left-point kernels.
/// The jump at the birth (only if it falls strictly after `t`) multiplies by
/// `1 + alpha3` taken just before the jump, and the compensator
/// `exp(-alpha3 pi ds)` runs while the birth is pending.
pub fn density_path(k: &FlowKernels, tr: &Trajectory, p: &ModelParams) -> DensityPath {
    let n = k.last - k.first + 1;
    let birth = tr.birth.unwrap_or(usize::MAX);
    let pi = p.pi_intensity;
    let dt = tr.dt;
    let (mut l1, mut l2, mut lj) = (0.0f64, 0.0f64, 0.0f64);
    let mut d = DensityPath {
        first: k.first,
        log_z: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        log_zbar: Vec::with_capacity(n),
        zbar: Vec::with_capacity(n),
        z1: Vec::with_capacity(n),
        z2: Vec::with_capacity(n),
        jump_factor: Vec::with_capacity(n),
    };
    let push = |d: &mut DensityPath, l1: f64, l2: f64, lj: f64| {
        let lz = l1 + l2 + lj;
        d.log_z.push(lz);
        d.z.push(lz.exp());
        d.log_zbar.push(l1 + l2);
        d.zbar.push((l1 + l2).exp());
        d.z1.push(l1.exp());
        d.z2.push(l2.exp());
        d.jump_factor.push(lj.exp());
    };
    push(&mut d, 0.0, 0.0, 0.0);
    for i in k.first..k.last {
        let j = k.at(i);
        let (a1, a2, a3) = (k.alpha1[j], k.alpha2[j], k.alpha3[j]);
        l1 += a1 * tr.db[0][i] - 0.5 * a1 * a1 * dt;
        l2 += a2 * tr.db[1][i] - 0.5 * a2 * a2 * dt;
        if i < birth {
            lj -= a3 * pi * dt;
        }
        if i + 1 == birth {
            // the kernel is predictable: use its value just before the jump
            let pre = super::kernels::alpha3(true, tr.m[i + 1], tr.wf[i + 1]);
            lj += (1.0 + pre).ln();
        }
        push(&mut d, l1, l2, lj);
    }
    d
}
