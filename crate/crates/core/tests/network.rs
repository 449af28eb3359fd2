use bubbleflow::network::{
    poisson_degrees, powerlaw_degrees, theta_fraction, truncate_kmax, weighted_volume,
    PerDegreeVolumes,
};
use bubbleflow::{DegreeDistribution, NetworkSpec};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..40).prop_filter("needs an edge", |w| {
        w.iter().enumerate().skip(1).any(|(_, &x)| x > 1e-6)
    })
}

#[test]
fn reference_mean_degrees() {
    let start = std::time::Instant::now();
    let z: Vec<f64> = NetworkSpec::TABLE
        .iter()
        .map(|n| n.build(50_000).unwrap().z)
        .collect();
    for (got, want) in z.iter().zip([3.1987, 1.9069, 3.2, 1.9]) {
        assert!((got - want).abs() < 0.05, "{got} vs {want}");
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn poisson_truncation_barely_moves_the_mean() {
    for l in [1.9, 3.2] {
        let d = poisson_degrees(l, 50_000).unwrap();
        assert!((d.z - l).abs() / l < 0.01);
        // the scan rule, restated
        let p = |k: usize| (-l + k as f64 * f64::ln(l) - ln_factorial(k)).exp();
        assert!(50_000.0 * p(d.kmax) >= 1.0);
        assert!(50_000.0 * p(d.kmax + 1) < 1.0);
    }
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

#[test]
fn degree_csv_files_reload() {
    let dir = tempfile::tempdir().unwrap();
    for net in NetworkSpec::TABLE {
        let d = net.build(50_000).unwrap();
        let path = dir.path().join(format!("{}.csv", net.label()));
        d.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        let back = DegreeDistribution::read_csv(&path, 50_000).unwrap();
        assert_eq!(back.kmax, d.kmax);
        assert!((back.z - d.z).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn constant_fraction_is_returned(w in weights(), c in 0.0f64..1.0) {
        let d = DegreeDistribution::from_weights(&w, 100).unwrap();
        let got = theta_fraction(&d, &vec![c; w.len()]).unwrap();
        prop_assert!((got - c).abs() <= 1e-12);
    }

    #[test]
    fn pressure_is_capped_by_theta(
        w in weights(),
        theta in 0.01f64..10.0,
        shares in prop::collection::vec(0.0f64..=1.0, 40),
    ) {
        let d = DegreeDistribution::from_weights(&w, 100).unwrap();
        let vols = PerDegreeVolumes {
            values: shares[..w.len()].iter().map(|s| s * theta).collect(),
            theta_cap: theta,
        };
        prop_assert!(vols.is_valid());
        prop_assert!(weighted_volume(&d, &vols) / d.z <= theta * (1.0 + 1e-12));
    }

    #[test]
    fn truncated_tables_are_normalized(
        l in 0.1f64..8.0,
        a in 2.05f64..2.95,
        nodes in 1u64..200_000,
    ) {
        for d in [poisson_degrees(l, nodes).unwrap(), powerlaw_degrees(a, nodes).unwrap()] {
            let total: f64 = d.probs.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(d.probs.iter().all(|p| *p >= 0.0));
            prop_assert_eq!(d.probs.len(), d.kmax + 1);
        }
    }

    #[test]
    fn scan_rule_keeps_an_expected_node(w in weights(), nodes in 1u64..1000) {
        let total: f64 = w.iter().sum();
        let raw: Vec<f64> = w.iter().map(|x| x / total).collect();
        let k = truncate_kmax(&raw, nodes);
        let mode = raw
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        prop_assert!(nodes as f64 * raw[k] >= 1.0 || k == mode);
    }

    #[test]
    fn labels_round_trip(a in 2.01f64..2.99) {
        let a = (a * 100.0).round() / 100.0;
        let spec = NetworkSpec::ScaleFree { alpha_exp: a };
        prop_assert_eq!(NetworkSpec::parse(&spec.label()).unwrap(), spec);
    }
}
