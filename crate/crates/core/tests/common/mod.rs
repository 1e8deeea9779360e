#![allow(dead_code)]

use std::f64::consts::PI;

use klms::filter::{klms_step, RbfExpansion};
use rand::Rng;

/// `<κ_{su}(u,·), κ_{sv}(v,·)>` in the RKHS of width `sstar`, by quadrature of
/// the frequency-domain inner product. The integrand factorizes over
/// coordinates, so each one is a 1-D trapezoid integral on [0, W].
pub fn quad_inner(u: &[f64], su: f64, v: &[f64], sv: f64, sstar: f64) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| quad_inner_1d(a - b, su, sv, sstar))
        .product()
}

fn quad_inner_1d(d: f64, su: f64, sv: f64, sstar: f64) -> f64 {
    let ft = |s: f64, w: f64| (2.0 * PI).sqrt() * s * (-0.5 * s * s * w * w).exp();
    let a = su * su + sv * sv - sstar * sstar;
    assert!(a > 0.0, "integral diverges");
    // integrand decays like exp(-a w²/2); stop where it is below 1e-40
    let w_max = (2.0 * 92.0 / a).sqrt();
    let n = 200_000;
    let h = w_max / n as f64;
    let f = |w: f64| ft(su, w) * ft(sv, w) / ft(sstar, w) * (w * d).cos();
    let mut s = 0.5 * (f(0.0) + f(w_max));
    for k in 1..n {
        s += f(k as f64 * h);
    }
    // even integrand: (1/2π)∫_{-∞}^{∞} = (1/π)∫_0^∞
    s * h / PI
}

/// Central difference of `g` at `x` with step `h`.
pub fn central_diff(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (g(x + h) - g(x - h)) / (2.0 * h)
}

/// Minimizer of `(e − α)² + γα²` by successive grid refinement, without using
/// the closed form.
pub fn grid_minimize_scalar(e: f64, gamma: f64) -> f64 {
    let cost = |a: f64| (e - a) * (e - a) + gamma * a * a;
    let mut lo = -2.0 * e.abs() - 1.0;
    let mut hi = 2.0 * e.abs() + 1.0;
    let n = 200;
    for _ in 0..40 {
        let h = (hi - lo) / n as f64;
        let best = (0..=n)
            .map(|k| lo + k as f64 * h)
            .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
            .unwrap();
        lo = best - h;
        hi = best + h;
    }
    0.5 * (lo + hi)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Random unit-cube points of dimension `m`.
pub fn random_point(rng: &mut impl Rng, m: usize, scale: f64) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Runs fixed-size KLMS through `pairs`, returning the model after each step.
pub fn klms_snapshots(pairs: &[(Vec<f64>, f64)], sigma: f64, eta: f64) -> Vec<RbfExpansion<f64>> {
    let mut model = RbfExpansion::new(pairs[0].0.len());
    let mut out = vec![model.clone()];
    for (u, y) in pairs {
        klms_step(&mut model, u, *y, eta, sigma).unwrap();
        out.push(model.clone());
    }
    out
}
