use serde::{Deserialize, Serialize};

/// Market regime at a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PreBubble,
    Growth,
    Burst,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PreBubble => "pre-bubble",
            Regime::Growth => "growth",
            Regime::Burst => "burst",
        }
    }
}

/// Watches the bubble for the end of its growth phase.
///
/// The switch fires once the bubble has gone `window` time units without
/// setting a new strict maximum. It is one-way.
#[derive(Debug, Clone)]
pub struct BurstMonitor {
    window: f64,
    peak: f64,
    peak_time: f64,
    switched_at: Option<f64>,
}

impl BurstMonitor {
    pub fn new(window: f64, t0: f64, beta0: f64) -> Self {
        Self {
            window,
            peak: beta0,
            peak_time: t0,
            switched_at: None,
        }
    }

    /// Feeds the next grid value; returns `true` on the step that switches.
    pub fn observe(&mut self, t: f64, beta: f64) -> bool {
        if self.switched_at.is_some() {
            return false;
        }
        if beta > self.peak {
            self.peak = beta;
            self.peak_time = t;
            return false;
        }
        // small slack so that t - peak_time == window on the grid counts
        if t - self.peak_time >= self.window * (1.0 - 1e-9) {
            self.switched_at = Some(t);
            return true;
        }
        false
    }

    pub fn switched_at(&self) -> Option<f64> {
        self.switched_at
    }
}

/// Index of the first grid point at which the burst switch fires for a
/// recorded bubble history, if any.
pub fn burst_monitor(times: &[f64], beta: &[f64], window: f64) -> Option<usize> {
    let (&t0, &b0) = (times.first()?, beta.first()?);
    let mut mon = BurstMonitor::new(window, t0, b0);
    times
        .iter()
        .zip(beta)
        .skip(1)
        .position(|(&t, &b)| mon.observe(t, b))
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn increasing_never_switches() {
        let t = grid(500, 0.01);
        let b: Vec<f64> = t.iter().map(|x| x * x + 1.0).collect();
        assert_eq!(burst_monitor(&t, &b, 0.1), None);
    }

    #[test]
    fn flat_after_peak_switches_on_first_elapsed_point() {
        let t = grid(200, 0.01);
        let b: Vec<f64> = t.iter().map(|&x| if x < 0.5 { x } else { 0.5 }).collect();
        // peak first reached at index 50 (t = 0.5); 0.1 elapses at index 60
        assert_eq!(burst_monitor(&t, &b, 0.1), Some(60));
    }

    #[test]
    fn triangle_switch_time() {
        let dt = 1e-3;
        let t = grid(3001, dt);
        let peak = 1.234;
        let b: Vec<f64> = t.iter().map(|&x| 1.0 - (x - peak).abs()).collect();
        let idx = burst_monitor(&t, &b, 0.1).unwrap();
        assert!((t[idx] - (peak + 0.1)).abs() <= dt + 1e-12, "{}", t[idx]);
    }

    #[test]
    fn switch_is_one_way() {
        let mut m = BurstMonitor::new(0.1, 0.0, 1.0);
        assert!(!m.observe(0.05, 0.5));
        assert!(m.observe(0.1, 0.5));
        assert!(!m.observe(0.2, 10.0));
        assert_eq!(m.switched_at(), Some(0.1));
    }
}
