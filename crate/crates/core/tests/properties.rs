use klms::experiments::{embed, ExperimentConfig, SigmaPolicy};
use klms::filter::{AdaptiveKlms, KernelSizeAdaptation, Klms, OnlineFilter, Qklms};
use klms::kernel::{self, RkhsContext};
use klms::scalar::squared_distance;
use proptest::prelude::*;

fn point(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, m)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..5).prop_flat_map(|m| (point(m), point(m)))
}

fn samples(max_len: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    (1usize..4).prop_flat_map(move |m| prop::collection::vec((point(m), -2.0f64..2.0), 1..max_len))
}

proptest! {
    #[test]
    fn eval_is_symmetric_and_bounded((u, v) in pair(), sigma in 0.01f64..10.0) {
        let a = kernel::eval(&u, &v, sigma).unwrap();
        let b = kernel::eval(&v, &u, sigma).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(kernel::eval(&u, &u, sigma).unwrap(), 1.0);
        if squared_distance(&u, &v) > 1e-6 * sigma * sigma {
            prop_assert!(a < 1.0);
        }
    }

    #[test]
    fn rkhs_inner_symmetry_and_consistency(
        (u, v) in pair(),
        sstar in 0.2f64..3.0,
        ku in 0.72f64..4.0,
        kv in 0.72f64..4.0,
    ) {
        let ctx = RkhsContext::new(sstar, u.len()).unwrap();
        let (su, sv) = (ku * sstar, kv * sstar);
        let a = kernel::rkhs_inner(&u, su, &v, sv, &ctx).unwrap();
        let b = kernel::rkhs_inner(&v, sv, &u, su, &ctx).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));

        let diag = kernel::rkhs_inner(&u, su, &u, su, &ctx).unwrap();
        let norm_sq = kernel::rkhs_norm(su, &ctx).unwrap().powi(2);
        prop_assert!((diag - norm_sq).abs() <= 1e-12 * norm_sq);

        let repro = kernel::rkhs_inner(&u, sstar, &v, sstar, &ctx).unwrap();
        prop_assert_eq!(repro, kernel::eval(&u, &v, sstar).unwrap());
    }

    #[test]
    fn plain_klms_only_appends(data in samples(40), sigma in 0.1f64..3.0, eta in 0.05f64..1.9) {
        let mut f = Klms::new(data[0].0.len(), sigma, eta).unwrap();
        for (i, (u, y)) in data.iter().enumerate() {
            let before = f.expansion().clone();
            let r = f.step(u, *y).unwrap();
            let after = f.expansion();
            prop_assert_eq!(r.network_size, i + 1);
            prop_assert_eq!(&after.coefficients()[..i], before.coefficients());
            prop_assert_eq!(&after.kernel_sizes()[..i], before.kernel_sizes());
            for j in 0..i {
                prop_assert_eq!(after.center(j), before.center(j));
            }
        }
    }

    #[test]
    fn adaptive_klms_only_appends_and_stays_positive(
        data in samples(40),
        sigma0 in 0.1f64..3.0,
        rho in 0.0f64..5.0,
    ) {
        let adaptation = KernelSizeAdaptation::with_bounds(rho, 0.05, 50.0).unwrap();
        let mut f = AdaptiveKlms::new(data[0].0.len(), sigma0, 0.5, adaptation).unwrap();
        for (i, (u, y)) in data.iter().enumerate() {
            let before = f.expansion().clone();
            let r = f.step(u, *y).unwrap();
            prop_assert_eq!(r.network_size, i + 1);
            prop_assert!(r.sigma_after >= 0.05 && r.sigma_after <= 50.0);
            prop_assert_eq!(&f.expansion().coefficients()[..i], before.coefficients());
            prop_assert_eq!(&f.expansion().kernel_sizes()[..i], before.kernel_sizes());
        }
    }

    #[test]
    fn quantized_growth_and_separation(
        data in samples(60),
        eps in 0.0f64..2.0,
        adaptive in any::<bool>(),
    ) {
        let adaptation = adaptive.then(|| KernelSizeAdaptation::new(0.1).unwrap());
        let mut f = Qklms::new(data[0].0.len(), eps, 1.0, 0.5, adaptation).unwrap();
        let mut last = 0;
        for (i, (u, y)) in data.iter().enumerate() {
            let r = f.step(u, *y).unwrap();
            prop_assert!(r.network_size == last || r.network_size == last + 1);
            prop_assert_eq!(r.added_center, r.network_size == last + 1);
            prop_assert!(r.network_size <= i + 1);
            prop_assert!(r.sigma_after > 0.0);
            last = r.network_size;
        }
        let cb = f.codebook();
        for a in 0..cb.len() {
            for b in a + 1..cb.len() {
                prop_assert!(squared_distance(cb.codeword(a), cb.codeword(b)).sqrt() > eps);
            }
        }
    }

    #[test]
    fn filters_are_reproducible(data in samples(30), rho in 0.0f64..1.0) {
        let run = || {
            let a = KernelSizeAdaptation::new(rho).unwrap();
            let mut f = AdaptiveKlms::new(data[0].0.len(), 1.0, 0.5, a).unwrap();
            let errors: Vec<f64> = data.iter().map(|(u, y)| f.step(u, *y).unwrap().error).collect();
            (errors, f.expansion().clone())
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn embedding_reassembles_the_series(series in prop::collection::vec(-10.0f64..10.0, 2..60), taps in 1usize..6) {
        prop_assume!(series.len() > taps);
        let d = embed(&series, taps).unwrap();
        prop_assert_eq!(d.len(), series.len() - taps);
        prop_assert_eq!(d.targets(), &series[taps..]);
        prop_assert_eq!(d.input(0), &series[..taps]);
    }

    #[test]
    fn config_round_trips(
        eta in 0.01f64..1.99,
        seed in any::<u64>(),
        runs in 1usize..500,
        sigmas in prop::collection::vec(0.01f64..50.0, 1..5),
        eps in prop::option::of(0.0f64..5.0),
    ) {
        let mut c = ExperimentConfig::static_default();
        c.eta = eta;
        c.seed = seed;
        c.mc_runs = runs;
        c.policies = sigmas.into_iter().map(SigmaPolicy::Fixed).collect();
        c.policies.push(SigmaPolicy::SilvermanAdaptive);
        c.quantization = eps;
        let parsed = ExperimentConfig::parse(&c.to_kv_string()).unwrap();
        prop_assert_eq!(parsed, c);
    }
}
