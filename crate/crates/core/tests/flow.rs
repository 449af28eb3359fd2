use bubbleflow::flow::{
    alpha3, density_path, drift_check, eta, flow_check, flow_kernels,
    simulate_fundamental_under_flow, FlowCheckOptions, FlowFundamental, FlowSettings, HorizonLaw,
};
use bubbleflow::{BubbleModel, ModelParams, NetworkSpec};
use proptest::prelude::*;

/// A parameter set on which the density has a usable effective sample.
fn tame() -> ModelParams {
    ModelParams {
        sigma_bar: 2.0,
        b: 0.5,
        wf0: 20.0,
        burst_window: 100.0,
        horizon: 0.5,
        ..Default::default()
    }
}

fn model(p: ModelParams) -> BubbleModel {
    let dist = NetworkSpec::ER32.build(p.nodes).unwrap();
    BubbleModel::new(p, dist).unwrap()
}

#[test]
fn pathwise_invariants_hold_after_and_before_the_birth() {
    for tau0 in [0.0, 0.7] {
        let p = ModelParams {
            tau0,
            ..Default::default()
        };
        let m = model(p.clone());
        let fs = FlowSettings::new(0.0, p.dt);
        let law = HorizonLaw::Deterministic(p.horizon);
        for i in 0..20 {
            let tr = m.simulate_path(i).unwrap();
            let k = flow_kernels(&tr, &p, &law, &fs).unwrap();
            assert!(k.alpha3.iter().all(|a| a.abs() <= 1.0));
            let d = density_path(&k, &tr, &p);
            assert_eq!(d.z[0], 1.0);
            assert!(d.z.iter().all(|&z| z > 0.0 || !z.is_normal()));
            assert!(d.bound_holds(p.horizon, p.pi_bound));
            let res = drift_check(&k, &tr, &p);
            assert!(res <= 1e-10, "tau0 {tau0} path {i}: {res}");
        }
    }
}

#[test]
fn perturbed_kernel_is_caught_by_the_drift_check() {
    let p = ModelParams::default();
    let tr = model(p.clone()).simulate_path(0).unwrap();
    let mut fs = FlowSettings::new(0.0, p.dt);
    fs.alpha1_shift = 0.1;
    let k = flow_kernels(&tr, &p, &HorizonLaw::Deterministic(p.horizon), &fs).unwrap();
    let res = drift_check(&k, &tr, &p);
    assert!(res > 1e-10, "{res}");
}

#[test]
fn pricing_identity_and_its_negative_control() {
    let p = tame();
    let m = model(p.clone());
    let mut opts = FlowCheckOptions::new(0.0, p.dt, 20_000);
    let good = flow_check(&m, &opts).unwrap();
    assert!(good.z_score.abs() <= 3.0, "{}", good.z_score);
    assert!(!good.low_effective_sample);
    assert_eq!(good.bound_violations, 0);
    opts.settings.eta_shift = 2.0;
    let bad = flow_check(&m, &opts).unwrap();
    assert!(bad.z_score.abs() > 3.0, "{}", bad.z_score);
}

#[test]
fn fundamental_under_the_flow_keeps_its_value() {
    let p = ModelParams::default();
    let e = eta(0.0, &HorizonLaw::Deterministic(p.horizon), 0.0).unwrap();
    let f = FlowFundamental {
        t: 0.0,
        wf_t: p.wf0,
        eta: e,
        b: p.b,
        horizon: p.horizon,
        dt: p.dt,
    };
    let est = simulate_fundamental_under_flow(&f, 100_000, p.seed, None);
    assert!(est.z_score(p.wf0).abs() <= 3.0, "{est:?}");
}

proptest! {
    #[test]
    fn jump_kernel_is_bounded(pre in any::<bool>(), m in 1e-9f64..1e9, wf in 1e-9f64..1e9) {
        prop_assert!(alpha3(pre, m, wf).abs() <= 1.0);
    }

    #[test]
    fn correction_integrates_to_zero(t in 0.0f64..2.9, horizon in 3.0f64..10.0) {
        let e = eta(t, &HorizonLaw::Deterministic(horizon), 0.0).unwrap();
        // int_t^T (s - eta) ds in closed form
        let integral = 0.5 * (horizon * horizon - t * t) - e * (horizon - t);
        prop_assert!(integral.abs() <= 1e-12 * horizon * horizon);
    }

    #[test]
    fn carry_is_absorbed(t in 0.0f64..2.0, carry in -5.0f64..5.0) {
        let horizon = 3.0;
        let e = eta(t, &HorizonLaw::Deterministic(horizon), carry).unwrap();
        let integral = e * (horizon - t) - 0.5 * (horizon * horizon - t * t);
        prop_assert!((integral - carry).abs() <= 1e-12 * 10.0);
    }
}
