use super::path::Trajectory;

/// Closed-form bubble evaluated on the noise and coefficients of `tr`.
///
/// Uses the integrating factor `exp(-k int L M ds)` with coefficients frozen
/// on each grid cell: the `ds` integral is exact per cell, the `dB2`
/// integral takes the left point. Zero before the birth.
pub fn explicit_bubble(tr: &Trajectory, k_decay: f64) -> Vec<f64> {
    let mut out = vec![0.0; tr.len()];
    let Some(start) = tr.birth else {
        return out;
    };
    let dt = tr.dt;
    out[start] = tr.beta[start];
    for i in start..tr.len() - 1 {
        let lm = tr.lambda[i] * tr.m[i];
        let rate = k_decay * lm;
        let decay = (-rate * dt).exp();
        // int_0^dt exp(-rate (dt - u)) du
        let weight = if rate * dt > 1e-12 {
            -(-rate * dt).exp_m1() / rate
        } else {
            dt
        };
        out[i + 1] = decay * out[i]
            + 2.0 * lm * tr.mu[i] * weight
            + decay * 2.0 * lm * tr.sigma[i] * tr.db[1][i];
    }
    out
}
