use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bubbleflow::config::FellerFamily;
use bubbleflow::flow::{flow_check, FlowCheckOptions};
use bubbleflow::lab::{
    classify_martingale, custom_table, gbm_inverse, gbm_linear, mc_exponential_mean,
    CoefficientTable, DiffusionSpec,
};
use bubbleflow::montecarlo::{
    convergence_study, count_peaks, deterministic_run, explicit_gap_study, run_ensemble, run_table,
    EnsembleOptions,
};
use bubbleflow::output::{self, write_file, Metadata};
use bubbleflow::{BubbleModel, NetworkSpec, RunConfig};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "bubbleflow", version = output::VERSION)]
#[command(
    about = "Bubble simulation on contagion networks, pricing-measure flows and martingale tests"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat JSON config; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long = "t-probe", global = true)]
    t_probe: Option<f64>,
    /// One of sf2.2, sf2.5, er3.2, er1.9 (any sfA / erL label is accepted).
    #[arg(long, global = true)]
    network: Option<String>,
    /// Switch every volatility off.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an ensemble on one network and export sample trajectories.
    Simulate {
        /// Number of trajectories written in full.
        #[arg(long)]
        keep: Option<usize>,
    },
    /// Comparison table over the four reference networks.
    Table,
    /// Noiseless single-path runs (all four networks unless --network).
    Deterministic,
    /// Monte Carlo check of the pricing-measure flow.
    FlowCheck {
        /// Evaluation time.
        #[arg(long)]
        t: Option<f64>,
        /// Number of paths.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Martingale test for a stochastic exponential of a diffusion.
    Feller {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        mu0: Option<f64>,
        #[arg(long)]
        sigma0: Option<f64>,
        /// Coefficient CSV (x, mu, sigma, f) for the custom-table family.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Paths of an optional Monte Carlo estimate of the mean at the horizon.
        #[arg(long)]
        mc_paths: Option<usize>,
    },
    /// Step-size study of the bubble on shared Brownian paths.
    Convergence {
        /// Comma-separated step ladder, coarsest first.
        #[arg(long, value_delimiter = ',')]
        dts: Option<Vec<f64>>,
        /// Number of paths.
        #[arg(long)]
        n: Option<usize>,
    },
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(path) => {
            RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let c = &cli.common;
    let (m, o) = (&mut cfg.model, &mut cfg.options);
    if let Some(v) = c.seed {
        m.seed = v;
    }
    if let Some(v) = c.paths {
        m.n_paths = v;
    }
    if let Some(v) = c.dt {
        m.dt = v;
    }
    if let Some(v) = &c.out {
        o.out = v.clone();
    }
    if let Some(v) = c.t_probe {
        o.t_probe = v;
    }
    if let Some(v) = &c.network {
        o.network = v.clone();
    }
    match &cli.command {
        Command::Simulate { keep } => {
            if let Some(v) = keep {
                o.keep = *v;
            }
        }
        Command::FlowCheck { t, .. } => {
            if let Some(v) = t {
                o.flow_t = *v;
            }
        }
        Command::Feller {
            family,
            mu0,
            sigma0,
            table,
            horizon,
            mc_paths,
        } => {
            if let Some(v) = family {
                o.feller_family = FellerFamily::parse(v)?;
            }
            if let Some(v) = mu0 {
                o.feller_mu0 = *v;
            }
            if let Some(v) = sigma0 {
                o.feller_sigma0 = *v;
            }
            if let Some(v) = table {
                o.feller_table = Some(v.clone());
            }
            if let Some(v) = horizon {
                o.feller_horizon = *v;
            }
            if let Some(v) = mc_paths {
                o.feller_mc_paths = *v;
            }
        }
        Command::Convergence { dts, n } => {
            if let Some(v) = dts {
                o.convergence_dts = v.clone();
            }
            if let Some(v) = n {
                o.convergence_paths = *v;
            }
        }
        Command::Table | Command::Deterministic => {}
    }
    if c.deterministic {
        cfg.model = cfg.model.deterministic();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate { .. } => "simulate",
        Command::Table => "table",
        Command::Deterministic => "deterministic",
        Command::FlowCheck { .. } => "flow-check",
        Command::Feller { .. } => "feller",
        Command::Convergence { .. } => "convergence",
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    meta: Metadata,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.options.out.join(name)
    }

    fn meta(&self) -> Metadata {
        self.meta.clone()
    }

    fn degrees(&self, net: &NetworkSpec, model: &BubbleModel) -> Result<()> {
        let meta = self.meta().with("network", net.label());
        let name = format!("degrees_{}.csv", net.label());
        write_file(&self.path(&name), |w| {
            output::write_degrees(w, &meta, &model.dist)
        })?;
        Ok(())
    }

    fn report<T: Serialize>(&self, name: &str, body: &T) -> Result<()> {
        write_file(&self.path(name), |w| {
            output::write_report(w, &self.meta, body)
        })?;
        Ok(())
    }
}

fn model_on(cfg: &RunConfig, net: &NetworkSpec) -> Result<BubbleModel> {
    Ok(BubbleModel::new(
        cfg.model.clone(),
        net.build(cfg.model.nodes)?,
    )?)
}

#[derive(Serialize)]
struct EnsembleReport<'a> {
    network: String,
    mean_degree: f64,
    invalid: usize,
    #[serde(flatten)]
    stats: &'a bubbleflow::montecarlo::EnsembleStats,
}

fn simulate(run: &Run) -> Result<String> {
    let cfg = run.cfg;
    let net = cfg.network()?;
    let model = model_on(cfg, &net)?;
    let mut opts = EnsembleOptions::new(cfg.model.n_paths, cfg.options.t_probe);
    opts.keep = cfg.options.keep.min(cfg.model.n_paths);
    let res = run_ensemble(&model, &opts)?;
    let meta = run.meta().with("network", net.label());
    write_file(&run.path("trajectories.csv"), |w| {
        output::write_trajectories(w, &meta, &res.kept)
    })?;
    run.degrees(&net, &model)?;
    let s = &res.stats[0];
    run.report(
        "ensemble.json",
        &EnsembleReport {
            network: net.label(),
            mean_degree: model.dist.z,
            invalid: res.invalid,
            stats: s,
        },
    )?;
    Ok(format!(
        "simulate {}: {} paths, mean max {:.4e} (se {:.2e}), argmax {:.4} (se {:.2e}), beta({}) {:.4e}",
        net.label(),
        s.n_paths,
        s.mean_max,
        s.se_max,
        s.mean_argmax,
        s.se_argmax,
        s.t_probe,
        s.beta_at
    ))
}

fn table(run: &Run) -> Result<String> {
    let cfg = run.cfg;
    let rows = run_table(&cfg.model, &NetworkSpec::TABLE, cfg.model.n_paths, None)?;
    write_file(&run.path("table.csv"), |w| {
        output::write_table(w, &run.meta(), &rows)
    })?;
    for net in NetworkSpec::TABLE {
        run.degrees(&net, &model_on(cfg, &net)?)?;
    }
    let argmax: Vec<String> = rows
        .iter()
        .map(|r| format!("{} {:.3}", r.network, r.stats[0].mean_argmax))
        .collect();
    Ok(format!(
        "table: {} networks x {} paths, argmax {}",
        rows.len(),
        cfg.model.n_paths,
        argmax.join(", ")
    ))
}

/// Relative size of a turn that counts as a peak.
const PEAK_SLACK: f64 = 1e-6;

fn deterministic(run: &Run, only: Option<&str>) -> Result<String> {
    let cfg = run.cfg;
    let nets = match only {
        Some(label) => vec![NetworkSpec::parse(label)?],
        None => NetworkSpec::TABLE.to_vec(),
    };
    let mut parts = Vec::new();
    for net in nets {
        let tr = deterministic_run(&cfg.model, &net)?;
        let meta = run.meta().with("network", net.label());
        let name = format!("deterministic_{}.csv", net.label());
        write_file(&run.path(&name), |w| {
            output::write_trajectories(w, &meta, std::slice::from_ref(&tr))
        })?;
        let top = tr.beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        parts.push(format!(
            "{} max {:.4e} peaks {}",
            net.label(),
            top,
            count_peaks(&tr.beta, PEAK_SLACK)
        ));
    }
    Ok(format!("deterministic: {}", parts.join(", ")))
}

fn flow(run: &Run, n: Option<usize>) -> Result<String> {
    let cfg = run.cfg;
    let net = cfg.network()?;
    let model = model_on(cfg, &net)?;
    let n = n.unwrap_or(cfg.model.n_paths);
    let opts = FlowCheckOptions::new(cfg.options.flow_t, cfg.model.dt, n);
    let rep = flow_check(&model, &opts)?;
    run.report("flow_check.json", &rep)?;
    Ok(format!(
        "flow-check {} t={}: mean Z {:.5} (se {:.2e}), z-score {:.3}, ess {:.1}, bound violations {}",
        net.label(),
        rep.t,
        rep.mean_z,
        rep.se_z,
        rep.z_score,
        rep.effective_sample_size,
        rep.bound_violations
    ))
}

fn feller_spec(cfg: &RunConfig) -> Result<DiffusionSpec> {
    let o = &cfg.options;
    Ok(match o.feller_family {
        FellerFamily::GbmInverse => gbm_inverse(o.feller_mu0, o.feller_sigma0)?,
        FellerFamily::GbmLinear => gbm_linear(o.feller_mu0, o.feller_sigma0)?,
        FellerFamily::CustomTable => {
            let Some(path) = &o.feller_table else {
                bail!("feller_table: required by the custom-table family");
            };
            let table = CoefficientTable::read_csv(path)
                .with_context(|| format!("reading {}", path.display()))?;
            custom_table(table, None, None, None)?
        }
    })
}

#[derive(Serialize)]
struct FellerOutput<'a> {
    family: FellerFamily,
    mu0: f64,
    sigma0: f64,
    #[serde(flatten)]
    report: &'a bubbleflow::lab::FellerReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_mean: Option<bubbleflow::flow::MeanEstimate>,
}

fn feller(run: &Run) -> Result<String> {
    let cfg = run.cfg;
    let o = &cfg.options;
    let spec = feller_spec(cfg)?;
    let rep = classify_martingale(&spec, o.feller_horizon)?;
    let mc_mean = if o.feller_mc_paths > 0 {
        Some(mc_exponential_mean(
            &spec,
            spec.c,
            o.feller_horizon,
            cfg.model.dt,
            o.feller_mc_paths,
            cfg.model.seed,
            None,
        )?)
    } else {
        None
    };
    run.report(
        "feller.json",
        &FellerOutput {
            family: o.feller_family,
            mu0: o.feller_mu0,
            sigma0: o.feller_sigma0,
            report: &rep,
            mc_mean,
        },
    )?;
    let verdict = serde_json::to_value(rep.verdict)?;
    let mut line = format!("feller: {}", verdict.as_str().unwrap_or("?"));
    if let Some(m) = mc_mean {
        line += &format!(", E[Z_T] = {:.4} (se {:.2e})", m.mean, m.se);
    }
    Ok(line)
}

#[derive(Serialize)]
struct ConvergenceOutput<'a> {
    network: String,
    strong: &'a bubbleflow::montecarlo::ConvergenceReport,
    explicit_gap: &'a bubbleflow::montecarlo::ConvergenceReport,
}

fn convergence(run: &Run) -> Result<String> {
    let cfg = run.cfg;
    let net = cfg.network()?;
    let model = model_on(cfg, &net)?;
    let (dts, n) = (&cfg.options.convergence_dts, cfg.options.convergence_paths);
    let strong = convergence_study(&model, dts, n, None)?;
    let gap = explicit_gap_study(&model, dts, n, None)?;
    let meta = run.meta().with("network", net.label());
    write_file(&run.path("convergence.csv"), |w| {
        output::write_convergence(w, &meta.clone().with("study", "strong"), &strong)
    })?;
    write_file(&run.path("explicit_gap.csv"), |w| {
        output::write_convergence(w, &meta.clone().with("study", "explicit-gap"), &gap)
    })?;
    run.report(
        "convergence.json",
        &ConvergenceOutput {
            network: net.label(),
            strong: &strong,
            explicit_gap: &gap,
        },
    )?;
    let ratios: Vec<String> = gap
        .rows
        .iter()
        .filter_map(|r| r.median_ratio.map(|q| format!("{q:.3}")))
        .collect();
    Ok(format!(
        "convergence {}: strong monotone {}, explicit-gap ratios {}",
        net.label(),
        strong.monotone,
        ratios.join(" ")
    ))
}

fn execute(cli: &Cli) -> Result<String> {
    let cfg = load(cli)?;
    let name = command_name(&cli.command);
    let run = Run {
        cfg: &cfg,
        meta: Metadata::new(cfg.model.seed, name),
    };
    let echo = cfg.to_json()?;
    write_file(&run.path("config.json"), |w| {
        w.extend_from_slice(echo.as_bytes());
        Ok(())
    })?;
    match &cli.command {
        Command::Simulate { .. } => simulate(&run),
        Command::Table => table(&run),
        Command::Deterministic => deterministic(&run, cli.common.network.as_deref()),
        Command::FlowCheck { n, .. } => flow(&run, *n),
        Command::Feller { .. } => feller(&run),
        Command::Convergence { .. } => convergence(&run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("bubbleflow").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.json");
        std::fs::write(&file, r#"{"dt": 0.01, "seed": 5}"#).unwrap();
        let f = file.to_str().unwrap();
        let cfg = load(&parse(&["--config", f, "table", "--dt", "1e-4"])).unwrap();
        assert_eq!(cfg.model.dt, 1e-4);
        assert_eq!(cfg.model.seed, 5);
        let cfg = load(&parse(&["table", "--config", f])).unwrap();
        assert_eq!(cfg.model.dt, 0.01);
    }

    #[test]
    fn deterministic_flag_zeroes_volatility() {
        let cfg = load(&parse(&["simulate", "--deterministic"])).unwrap();
        assert_eq!(cfg.model.sigma_bar, 0.0);
        assert_eq!(cfg.model.sigma_m, 0.0);
        assert_eq!(RunConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn command_options_land_in_config() {
        let cfg = load(&parse(&["feller", "--family", "gbm-linear", "--mu0", "0"])).unwrap();
        assert_eq!(cfg.options.feller_family, FellerFamily::GbmLinear);
        assert_eq!(cfg.options.feller_mu0, 0.0);
        let cfg = load(&parse(&["convergence", "--dts", "0.004,0.002,0.001"])).unwrap();
        assert_eq!(cfg.options.convergence_dts, vec![4e-3, 2e-3, 1e-3]);
        assert!(load(&parse(&["feller", "--family", "bogus"])).is_err());
    }
}
