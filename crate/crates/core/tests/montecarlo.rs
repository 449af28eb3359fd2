use bubbleflow::montecarlo::{
    count_peaks, deterministic_run, mean_se, peaks_once, rk4_deterministic, run_ensemble,
    run_table, stats, stats_from_summaries, summarize, EnsembleOptions, PathSummary,
};
use bubbleflow::{BubbleModel, Error, ModelParams, NetworkSpec, Regime, Trajectory};
use proptest::prelude::*;

/// A trajectory carrying only a bubble curve on the grid `i * dt`.
fn bubble_path(beta: Vec<f64>, dt: f64, birth: Option<usize>) -> Trajectory {
    let len = beta.len();
    let z = || vec![0.0; len];
    Trajectory {
        path_index: 0,
        dt,
        times: (0..len).map(|i| i as f64 * dt).collect(),
        wf: z(),
        m: z(),
        lambda: z(),
        theta: z(),
        x: z(),
        n: z(),
        beta,
        mu: z(),
        sigma: z(),
        regime: vec![Regime::Growth; len],
        db: std::array::from_fn(|_| z()),
        birth,
        jump_time: birth.map(|b| b as f64 * dt),
        burst_time: None,
        per_degree: None,
    }
}

#[test]
fn triangle_path_summary() {
    // peak 5 at t = 1 on a grid of 0.01
    let beta: Vec<f64> = (0..=300)
        .map(|i| 5.0 - 5.0 * (i as f64 * 0.01 - 1.0).abs())
        .collect();
    let tr = bubble_path(beta.clone(), 0.01, Some(0));
    let s = summarize(&tr, &[0.6, 1.6]).unwrap();
    assert_eq!(s.max, 5.0);
    assert!((s.argmax.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(s.beta_at, vec![beta[60], beta[160]]);
    assert!(matches!(
        summarize(&tr, &[3.5]),
        Err(Error::Parameter { key: "t_probe", .. })
    ));
}

#[test]
fn constant_paths_have_no_spread() {
    let a = bubble_path(vec![2.0; 11], 0.1, Some(0));
    let b = a.clone();
    let st = stats(&[a, b], 0.5).unwrap();
    assert_eq!((st.mean_max, st.se_max), (2.0, 0.0));
    assert_eq!((st.beta_at, st.se_beta_at), (2.0, 0.0));
    // first grid time attaining the max
    assert_eq!((st.mean_argmax, st.se_argmax), (0.0, 0.0));
}

#[test]
fn argmax_ignores_time_before_the_birth() {
    let mut beta = vec![0.0; 11];
    beta[7] = 3.0;
    let tr = bubble_path(beta, 0.1, Some(5));
    let s = summarize(&tr, &[0.0]).unwrap();
    assert!((s.argmax.unwrap() - 0.7).abs() < 1e-12);
    let unborn = summarize(&bubble_path(vec![0.0; 11], 0.1, None), &[0.0]).unwrap();
    assert_eq!((unborn.max, unborn.argmax), (0.0, None));
}

fn brute_force(paths: &[Vec<f64>], dt: f64, probe: usize) -> [f64; 6] {
    let n = paths.len() as f64;
    let mut cols = [vec![], vec![], vec![]];
    for p in paths {
        let mut best = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = i;
            }
        }
        cols[0].push(p[best]);
        cols[1].push(best as f64 * dt);
        cols[2].push(p[probe]);
    }
    let mut out = [0.0; 6];
    for (c, xs) in cols.iter().enumerate() {
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        out[2 * c] = mean;
        out[2 * c + 1] = (var / n).sqrt();
    }
    out
}

fn curves() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1e5f64..1e6, 21), 2..30)
}

proptest! {
    #[test]
    fn stats_match_a_direct_recompute(paths in curves()) {
        let trs: Vec<Trajectory> = paths
            .iter()
            .map(|b| bubble_path(b.clone(), 0.05, Some(0)))
            .collect();
        let st = stats(&trs, 0.5).unwrap();
        let want = brute_force(&paths, 0.05, 10);
        let got = [st.mean_max, st.se_max, st.mean_argmax, st.se_argmax, st.beta_at, st.se_beta_at];
        for (g, w) in got.iter().zip(want) {
            prop_assert!((g - w).abs() <= 1e-9 * (1.0 + w.abs()), "{} vs {}", g, w);
        }
        prop_assert!(st.se_max >= 0.0 && st.se_argmax >= 0.0 && st.se_beta_at >= 0.0);
    }

    #[test]
    fn stats_ignore_path_order(paths in curves(), seed in any::<u64>()) {
        let summaries: Vec<PathSummary> = paths
            .iter()
            .map(|b| summarize(&bubble_path(b.clone(), 0.05, Some(3)), &[0.5]).unwrap())
            .collect();
        let mut shuffled = summaries.clone();
        // deterministic shuffle driven by the seed
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let a = stats_from_summaries(&summaries, 0, 0.5);
        let b = stats_from_summaries(&shuffled, 0, 0.5);
        prop_assert!((a.mean_max - b.mean_max).abs() <= 1e-9 * a.mean_max.abs().max(1.0));
        prop_assert!((a.se_max - b.se_max).abs() <= 1e-9 * a.se_max.max(1.0));
        prop_assert!((a.mean_argmax - b.mean_argmax).abs() <= 1e-12);
        prop_assert!((a.beta_at - b.beta_at).abs() <= 1e-9 * a.beta_at.abs().max(1.0));
        for s in &summaries {
            let t = s.argmax.unwrap();
            prop_assert!((0.15 - 1e-12..=1.0 + 1e-12).contains(&t));
        }
    }
}

#[test]
fn mean_se_small_samples() {
    assert!(mean_se(&[]).0.is_nan());
    assert_eq!(mean_se(&[4.0]), (4.0, 0.0));
    let (m, s) = mean_se(&[1.0, 3.0]);
    assert_eq!(m, 2.0);
    assert!((s - 1.0).abs() < 1e-15);
}

#[test]
fn ensembles_do_not_depend_on_workers() {
    let p = ModelParams {
        horizon: 2.0,
        ..Default::default()
    };
    let model = BubbleModel::new(p.clone(), NetworkSpec::ER19.build(p.nodes).unwrap()).unwrap();
    let mut opts = EnsembleOptions::new(24, 0.6);
    opts.probes = vec![0.6, 1.6];
    opts.keep = 2;
    opts.threads = Some(1);
    let one = run_ensemble(&model, &opts).unwrap();
    opts.threads = Some(3);
    let three = run_ensemble(&model, &opts).unwrap();
    assert_eq!(one.stats, three.stats);
    assert_eq!(one.kept, three.kept);
    assert_eq!(one.kept.len(), 2);
    assert_eq!(one.invalid, 0);

    let nets = [NetworkSpec::ER32, NetworkSpec::ER19];
    let t1 = run_table(&p, &nets, 8, Some(1)).unwrap();
    let t2 = run_table(&p, &nets, 8, Some(2)).unwrap();
    assert_eq!(t1, t2);
    assert_eq!(t1[0].network, "er3.2");
}

#[test]
fn deterministic_curves_rise_and_peak_once() {
    let p = ModelParams::default();
    for net in NetworkSpec::TABLE {
        let tr = deterministic_run(&p, &net).unwrap();
        assert!(peaks_once(&tr.beta, 1e-6), "{}", net.label());
        assert!(count_peaks(&tr.beta, 1e-6) <= 1);
        assert!(tr.sigma.iter().all(|&s| s == 0.0));
    }
}

#[test]
fn scale_free_builds_up_faster() {
    let p = ModelParams::default();
    let sf = deterministic_run(&p, &NetworkSpec::SF22).unwrap();
    let er = deterministic_run(&p, &NetworkSpec::ER32).unwrap();
    // ahead through the build-up, after a 0.05 transient
    for i in 50..=1100 {
        assert!(sf.beta[i] > er.beta[i], "t = {}", sf.times[i]);
    }
    // and half of its own maximum is reached earlier
    let half_time = |b: &[f64]| {
        let top = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        b.iter().position(|&v| v >= 0.5 * top).unwrap()
    };
    assert!(half_time(&sf.beta) < half_time(&er.beta));
    // the noiseless ER curve overtakes later and peaks higher
    let at = |t: f64| sf.index_of(t).unwrap();
    assert!(er.beta[at(1.5)] > sf.beta[at(1.5)]);
}

#[test]
fn deterministic_euler_tracks_rk4() {
    let p = ModelParams {
        dt: 1e-4,
        ..Default::default()
    };
    for net in [NetworkSpec::ER32, NetworkSpec::ER19] {
        let euler = deterministic_run(&p, &net).unwrap();
        let rk4 = rk4_deterministic(&p, &net, 1e-4).unwrap();
        for t in [0.6, 1.6, 2.5] {
            let i = euler.index_of(t).unwrap();
            let rel = (euler.beta[i] - rk4[i]).abs() / rk4[i].abs();
            assert!(rel <= 1e-3, "{} t {t}: {rel}", net.label());
        }
    }
}
