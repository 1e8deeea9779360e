use std::collections::HashSet;

use klms::analysis::grid_search_sigma;
use klms::experiments::{
    embed, gen_static, lorenz_series, run_monte_carlo, run_monte_carlo_with, silverman_init,
    static_target, ExperimentConfig, LorenzParams, SigmaPolicy,
};

#[test]
fn rk4_step_agrees_with_two_half_steps() {
    let p = LorenzParams::default();
    let full = p.rk4_step([1.0, 1.0, 1.0], 0.01);
    let half = p.rk4_step(p.rk4_step([1.0, 1.0, 1.0], 0.005), 0.005);
    for k in 0..3 {
        assert!((full[k] - half[k]).abs() < 1e-8, "component {k}: {}", full[k] - half[k]);
    }
}

#[test]
fn rk4_local_error_is_fifth_order() {
    let p = LorenzParams::default();
    let diff = |h: f64| {
        let full = p.rk4_step([1.0, 1.0, 1.0], h);
        let half = p.rk4_step(p.rk4_step([1.0, 1.0, 1.0], h / 2.0), h / 2.0);
        (0..3).map(|k| (full[k] - half[k]).abs()).fold(0.0, f64::max)
    };
    for h in [0.01, 0.005] {
        let ratio = diff(h) / diff(h / 2.0);
        assert!((28.0..36.0).contains(&ratio), "h={h}: ratio {ratio}");
    }
}

#[test]
fn oscillator_is_bounded_and_aperiodic() {
    let p = LorenzParams::default();
    let mut s = p.initial_state;
    let mut seen = HashSet::new();
    let mut max_abs = 0.0f64;
    for _ in 0..100_000 {
        s = p.rk4_step(s, p.dt);
        max_abs = s.iter().fold(max_abs, |m, v| m.max(v.abs()));
        assert!(seen.insert(s.map(f64::to_bits)), "state recurred exactly");
    }
    assert!(max_abs < 1e3, "trajectory reached {max_abs}");
    let y = lorenz_series::<f64>(&p, 100_000).unwrap();
    let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi - lo > 10.0);
}

#[test]
fn static_noise_statistics() {
    let n = 100_000;
    let var = 1e-4;
    let d = gen_static::<f64>(n, var, 77).unwrap();
    let v: Vec<f64> = d.iter().map(|(u, y)| y - static_target(u[0])).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    let s2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() < 4.0 * (var / n as f64).sqrt());
    assert!((s2 / var - 1.0).abs() < 0.1);
    let umean = d.inputs().map(|u| u[0]).sum::<f64>() / n as f64;
    assert!(umean.abs() < 0.03);
}

#[test]
fn silverman_values() {
    let d = gen_static::<f64>(5000, 1e-4, 1).unwrap();
    let s = silverman_init(&d).unwrap();
    assert!((s - 0.35).abs() <= 0.02, "static rule gives {s}");

    let p = LorenzParams::default();
    let series = lorenz_series::<f64>(&p, 1005).unwrap();
    let s = silverman_init(&embed(&series, 5).unwrap()).unwrap();
    assert!((4.5..=6.5).contains(&s), "lorenz rule gives {s}");
}

#[test]
fn grid_search_prefers_narrow_kernel_on_static_problem() {
    let train = gen_static::<f64>(3000, 1e-4, 41).unwrap();
    let validate = gen_static::<f64>(1000, 1e-4, 42).unwrap();
    let best = grid_search_sigma(&train, &validate, &[0.05, 0.1, 0.35, 0.5, 1.0], 0.5).unwrap();
    assert_eq!(best, 0.1);
}

#[test]
fn grid_search_on_lorenz() {
    let series = lorenz_series::<f64>(&LorenzParams::default(), 1105).unwrap();
    let pairs = embed(&series, 5).unwrap();
    let train = pairs.slice(0..1000);
    let validate = pairs.slice(1000..1100);
    let best = grid_search_sigma(&train, &validate, &[1.0, 5.5, 10.0, 15.0, 20.0, 30.0], 0.1).unwrap();
    assert_eq!(best, 15.0);
}

#[test]
fn wide_static_kernel_stalls() {
    let mut c = ExperimentConfig::static_default();
    c.mc_runs = 20;
    c.policies = vec![SigmaPolicy::Fixed(1.0)];
    let r = run_monte_carlo_with(&c, false).unwrap();
    let final_emse = r.policies[0].summary.final_metric_mean();
    assert!(final_emse > 0.1, "final EMSE {final_emse}");
}

#[test]
fn lorenz_fixed_fifteen_test_mse() {
    let mut c = ExperimentConfig::lorenz_default();
    c.policies = vec![SigmaPolicy::Fixed(15.0)];
    let r = run_monte_carlo_with(&c, false).unwrap();
    let mse = r.policies[0].summary.final_metric_mean();
    assert!((0.5..=1.5).contains(&mse), "final test MSE {mse}");
}

#[test]
fn adaptive_kernel_size_settles_and_emse_falls() {
    let mut c = ExperimentConfig::static_default();
    c.mc_runs = 40;
    c.policies = vec![SigmaPolicy::Fixed(0.1), SigmaPolicy::Adaptive];
    let r = run_monte_carlo(&c).unwrap();

    // mean of σ_i − σ_{i−1} over the last 1000 iterations
    for t in &r.policies[1].traces {
        let n = t.sigma.len();
        let drift: f64 = (t.sigma[n - 1] - t.sigma[n - 1001]) / 1000.0;
        assert!(drift.abs() < 1e-3, "drift {drift}");
    }

    // windowed EMSE at iteration 5000 below that at iteration 100
    let traces = &r.policies[0].traces;
    let window_mean = |t: &klms::experiments::RunTrace<f64>, end: usize, len: usize| {
        (end - len..end).map(|i| t.metric(i)).sum::<f64>() / len as f64
    };
    let improved = traces
        .iter()
        .filter(|t| window_mean(t, 5000, 2000) < window_mean(t, 100, 100))
        .count();
    assert!(improved as f64 >= 0.95 * traces.len() as f64);
}
