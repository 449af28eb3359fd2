//! Degree distributions and the mean-field contagion aggregates.
//!
//! Networks are never instantiated edge by edge. Everything downstream only
//! needs the degree table `p_k`, its mean `z`, and the two degree-biased sums
//! built from it: the edge-end holding probability and the contagion pressure.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Truncated, renormalized degree table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    /// `probs[k]` is the probability of degree `k`, for `k = 0..=kmax`.
    pub probs: Vec<f64>,
    pub kmax: usize,
    /// Mean degree `sum_k k p_k` of the truncated table.
    pub z: f64,
    /// Network size used to pick the truncation.
    pub nodes: u64,
}

/// How a power-law tail is cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerLawCutoff {
    /// `kmax = floor(N^(1/(alpha-1)))`, the expected largest degree in a
    /// network of `N` nodes.
    #[default]
    Natural,
    /// Largest `k` whose expected node count `N p_k` is at least one.
    ExpectedCount,
}

/// Per-degree trading volumes `X^k` together with the current cap `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerDegreeVolumes {
    pub values: Vec<f64>,
    pub theta_cap: f64,
}

impl PerDegreeVolumes {
    pub fn uniform(len: usize, value: f64, theta_cap: f64) -> Self {
        Self {
            values: vec![value; len],
            theta_cap,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.theta_cap >= 0.0
            && self
                .values
                .iter()
                .all(|&x| (0.0..=self.theta_cap).contains(&x))
    }
}

impl DegreeDistribution {
    /// Builds a table from raw (possibly unnormalized) weights indexed by degree.
    pub fn from_weights(weights: &[f64], nodes: u64) -> Result<Self> {
        if weights.is_empty() {
            return Err(param("probs", "empty degree table"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(param("probs", "weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(param("probs", "weights sum to zero"));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let z = mean_degree(&probs);
        Ok(Self {
            kmax: probs.len() - 1,
            probs,
            z,
            nodes,
        })
    }

    /// `k p_k` for every degree, the weights used by both aggregates.
    pub fn edge_weights(&self) -> Vec<f64> {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .collect()
    }

    /// Second moment `sum_k k^2 p_k`.
    pub fn second_moment(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k * k) as f64 * p)
            .sum()
    }

    /// Writes the table as CSV with header `k,p_k`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["k", "p_k"])?;
        for (k, p) in self.probs.iter().enumerate() {
            w.write_record([k.to_string(), format!("{p:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `k,p_k` table; `#` lines are metadata.
    pub fn read_csv(path: &Path, nodes: u64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut weights = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let k: usize = rec
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad degree in {}", path.display())))?;
            let p: f64 = rec
                .get(1)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad p_k in {}", path.display())))?;
            if weights.len() <= k {
                weights.resize(k + 1, 0.0);
            }
            weights[k] = p;
        }
        Self::from_weights(&weights, nodes)
    }
}

fn mean_degree(probs: &[f64]) -> f64 {
    probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}

/// Largest degree whose expected node count `N p_k` reaches one.
///
/// `raw` holds untruncated probabilities indexed by degree. When no degree
/// qualifies (tiny `N`) the mode is returned.
pub fn truncate_kmax(raw: &[f64], nodes: u64) -> usize {
    let n = nodes as f64;
    match raw.iter().rposition(|&p| n * p >= 1.0) {
        Some(k) => k,
        None => {
            raw.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &p)| {
                    if p > best.1 {
                        (k, p)
                    } else {
                        best
                    }
                })
                .0
        }
    }
}

/// Untruncated Poisson probabilities up to the point where the expected count
/// in a network of `nodes` is negligible.
fn poisson_raw(lambda: f64, nodes: u64) -> Vec<f64> {
    let mut raw = vec![(-lambda).exp()];
    let floor = 1e-6 / nodes.max(1) as f64;
    let mut k = 0usize;
    loop {
        k += 1;
        let next = raw[k - 1] * lambda / k as f64;
        raw.push(next);
        if (k as f64 > lambda && next < floor) || next == 0.0 || k > 100_000 {
            break;
        }
    }
    raw
}

/// Erdős–Rényi (Poisson) degrees `p_k = e^-l l^k / k!`, truncated at the
/// expected-count rule and renormalized.
pub fn poisson_degrees(lambda_tilde: f64, nodes: u64) -> Result<DegreeDistribution> {
    if !lambda_tilde.is_finite() || lambda_tilde < 0.0 {
        return Err(param("lambda_tilde", "must be finite and >= 0"));
    }
    if nodes == 0 {
        return Err(param("nodes", "must be >= 1"));
    }
    if lambda_tilde == 0.0 {
        return DegreeDistribution::from_weights(&[1.0], nodes);
    }
    let raw = poisson_raw(lambda_tilde, nodes);
    let kmax = truncate_kmax(&raw, nodes);
    DegreeDistribution::from_weights(&raw[..=kmax], nodes)
}

/// Scale-free degrees `p_k ~ k^-alpha` on `k >= 1` with the natural cutoff.
pub fn powerlaw_degrees(alpha_exp: f64, nodes: u64) -> Result<DegreeDistribution> {
    powerlaw_degrees_with(alpha_exp, nodes, PowerLawCutoff::Natural)
}

pub fn powerlaw_degrees_with(
    alpha_exp: f64,
    nodes: u64,
    cutoff: PowerLawCutoff,
) -> Result<DegreeDistribution> {
    check_powerlaw(alpha_exp, nodes)?;
    let kmax = match cutoff {
        PowerLawCutoff::Natural => {
            ((nodes as f64).powf(1.0 / (alpha_exp - 1.0)).floor() as usize).max(1)
        }
        PowerLawCutoff::ExpectedCount => {
            let norm = zeta(alpha_exp);
            // N k^-a / zeta >= 1  <=>  k <= (N / zeta)^(1/a); scan around it.
            let guess = ((nodes as f64 / norm).powf(1.0 / alpha_exp).ceil() as usize).max(1) + 2;
            let raw: Vec<f64> = (0..=guess)
                .map(|k| {
                    if k == 0 {
                        0.0
                    } else {
                        (k as f64).powf(-alpha_exp) / norm
                    }
                })
                .collect();
            truncate_kmax(&raw, nodes).max(1)
        }
    };
    powerlaw_degrees_with_kmax(alpha_exp, nodes, kmax)
}

/// Scale-free table with an explicit largest degree.
pub fn powerlaw_degrees_with_kmax(
    alpha_exp: f64,
    nodes: u64,
    kmax: usize,
) -> Result<DegreeDistribution> {
    check_powerlaw(alpha_exp, nodes)?;
    if kmax == 0 {
        return Err(param("kmax", "power-law support starts at k = 1"));
    }
    let weights: Vec<f64> = (0..=kmax)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                (k as f64).powf(-alpha_exp)
            }
        })
        .collect();
    DegreeDistribution::from_weights(&weights, nodes)
}

fn check_powerlaw(alpha_exp: f64, nodes: u64) -> Result<()> {
    if !(alpha_exp > 2.0 && alpha_exp < 3.0) {
        return Err(param("alpha_exp", format!("{alpha_exp} outside (2, 3)")));
    }
    if nodes == 0 {
        return Err(param("nodes", "must be >= 1"));
    }
    Ok(())
}

/// Riemann zeta for `s > 1`: direct sum plus Euler–Maclaurin tail.
pub(crate) fn zeta(s: f64) -> f64 {
    const CUT: usize = 1000;
    let head: f64 = (1..CUT).map(|k| (k as f64).powf(-s)).sum();
    let n = CUT as f64;
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

/// Probability that the node at the end of a random edge is holding:
/// `(1/z) sum_k k p_k rho_k`.
pub fn theta_fraction(dist: &DegreeDistribution, fractions: &[f64]) -> Result<f64> {
    if dist.z == 0.0 {
        return Err(Error::DegenerateNetwork);
    }
    if fractions.len() != dist.probs.len() {
        return Err(param("fractions", "length must match the degree table"));
    }
    let s: f64 = dist
        .probs
        .iter()
        .zip(fractions)
        .enumerate()
        .map(|(k, (p, r))| k as f64 * p * r)
        .sum();
    Ok(s / dist.z)
}

/// Degree-weighted volume `n = sum_k k p_k X^k`.
pub fn weighted_volume(dist: &DegreeDistribution, volumes: &PerDegreeVolumes) -> f64 {
    dist.probs
        .iter()
        .zip(&volumes.values)
        .enumerate()
        .map(|(k, (p, x))| k as f64 * p * x)
        .sum()
}

/// Named networks used by the experiment tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NetworkSpec {
    ScaleFree { alpha_exp: f64 },
    ErdosRenyi { lambda_tilde: f64 },
}

impl NetworkSpec {
    pub const SF22: NetworkSpec = NetworkSpec::ScaleFree { alpha_exp: 2.2 };
    pub const SF25: NetworkSpec = NetworkSpec::ScaleFree { alpha_exp: 2.5 };
    pub const ER32: NetworkSpec = NetworkSpec::ErdosRenyi { lambda_tilde: 3.2 };
    pub const ER19: NetworkSpec = NetworkSpec::ErdosRenyi { lambda_tilde: 1.9 };

    /// The four networks of the comparison table, in table order.
    pub const TABLE: [NetworkSpec; 4] = [Self::SF22, Self::SF25, Self::ER32, Self::ER19];

    pub fn build(&self, nodes: u64) -> Result<DegreeDistribution> {
        match *self {
            NetworkSpec::ScaleFree { alpha_exp } => powerlaw_degrees(alpha_exp, nodes),
            NetworkSpec::ErdosRenyi { lambda_tilde } => poisson_degrees(lambda_tilde, nodes),
        }
    }

    /// Short label, `sf2.2` style.
    pub fn label(&self) -> String {
        match *self {
            NetworkSpec::ScaleFree { alpha_exp } => format!("sf{alpha_exp}"),
            NetworkSpec::ErdosRenyi { lambda_tilde } => format!("er{lambda_tilde}"),
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        let bad = || param("network", format!("unknown network `{label}`"));
        let (kind, value) = if let Some(v) = label.strip_prefix("sf") {
            ("sf", v)
        } else if let Some(v) = label.strip_prefix("er") {
            ("er", v)
        } else {
            return Err(bad());
        };
        let value: f64 = value.parse().map_err(|_| bad())?;
        Ok(match kind {
            "sf" => NetworkSpec::ScaleFree { alpha_exp: value },
            _ => NetworkSpec::ErdosRenyi {
                lambda_tilde: value,
            },
        })
    }
}
