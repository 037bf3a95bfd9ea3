use proptest::prelude::*;

use pme_absorb::config::{ParamsInput, RunConfig};
use pme_absorb::params::{Params, Regime};
use pme_absorb::profile::{integrate_equation, Class, ProfileEquation, ProfileOptions};
use pme_absorb::shooting::{classify, solve, ShootingOptions};
use pme_absorb::tridiag;
use pme_absorb::verify::{ordering_pair, series_order, SeriesCheckOptions};

fn default_params() -> Params {
    Params::new(2.0, 0.5, 2.0, 1).unwrap()
}

/// Admissible parameters with σ a safe margin above its threshold.
fn admissible() -> impl Strategy<Value = Params> {
    (1.2f64..3.0, 0.2f64..0.8, 0.3f64..4.0, 1u32..4).prop_map(|(m, q, extra, dim)| {
        let sigma = 2.0 * (1.0 - q) / (m - 1.0) + extra;
        Params { m, q, sigma, dim }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn params_validation_matches_conditions(m in 0.5f64..3.0, q in -0.2f64..1.2, sigma in 0.0f64..8.0, dim in 0u32..4) {
        let ok = m > 1.0 && q > 0.0 && q < 1.0 && dim >= 1 && sigma > 2.0 * (1.0 - q) / (m - 1.0);
        prop_assert_eq!(Params::new(m, q, sigma, dim).is_ok(), ok);
    }

    #[test]
    fn exponents_are_positive_and_consistent(p in admissible()) {
        let e = p.validate().unwrap().exponents();
        prop_assert!(e.alpha > 0.0 && e.beta > 0.0 && e.a_stat > 0.0);
        // α(m−q) = β(σ+2)
        prop_assert!((e.alpha * (p.m - p.q) - e.beta * (p.sigma + 2.0)).abs() < 1e-12 * e.alpha.max(1.0));
        let expected = if (p.m + p.q - 2.0).abs() < 1e-12 { Regime::Critical } else if p.m + p.q > 2.0 { Regime::HighSum } else { Regime::LowSum };
        prop_assert_eq!(p.regime(), expected);
    }

    #[test]
    fn tridiagonal_solve_has_small_residual(n in 2usize..60, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let lower: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { rng.gen_range(-1.0..0.0) }).collect();
        let upper: Vec<f64> = (0..n).map(|i| if i + 1 == n { 0.0 } else { rng.gen_range(-1.0..0.0) }).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + lower[i].abs() + upper[i].abs() + rng.gen_range(0.0..1.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x = tridiag::solve(&lower, &diag, &upper, &rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 { r += lower[i] * x[i - 1]; }
            if i + 1 < n { r += upper[i] * x[i + 1]; }
            prop_assert!(r.abs() < 1e-12 * (1.0 + rhs[i].abs()));
        }
    }

    #[test]
    fn params_survive_config_round_trip(p in admissible()) {
        let cfg = RunConfig {
            params: ParamsInput { preset: None, m: Some(p.m), q: Some(p.q), sigma: Some(p.sigma), dim: Some(p.dim) },
            ..RunConfig::default()
        };
        let back = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(back.params.resolve().unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Profiles are ordered in a before the first one turns: a1 < a2 gives f1 < f2.
    #[test]
    fn profiles_are_ordered(l1 in -3.0f64..3.0, gap in 0.01f64..2.0) {
        let e = default_params().exponents();
        let a1 = 10f64.powf(l1);
        let a2 = a1 * 10f64.powf(gap);
        let opts = ProfileOptions { rtol: 1e-12, ..ProfileOptions::default() };
        let (checked, bad) = ordering_pair(&e, a1, a2, &opts).unwrap();
        prop_assert!(checked > 0);
        prop_assert_eq!(bad, 0);
    }

    /// Away from a*, halving every tolerance does not change the class.
    #[test]
    fn classification_stable_under_tightening(side in prop::bool::ANY, dist in 0.05f64..2.0) {
        let e = default_params().exponents();
        let a_star = 203.8778;
        let a = if side { a_star * dist.exp() } else { a_star * (-dist).exp() };
        let opts = ProfileOptions::default();
        let c1 = classify(&e, a, &opts).unwrap().class;
        let c2 = classify(&e, a, &opts.tightened(2.0)).unwrap().class;
        prop_assert_eq!(c1, c2);
        prop_assert_eq!(c1, if side { Class::C } else { Class::A });
    }

    /// f(ξ; a) = a g(a^γ ξ), g solving the rescaled equation with g(0) = 1, for both γ.
    #[test]
    fn downscaling_is_consistent(la in -2.0f64..2.0, small in prop::bool::ANY) {
        let e = default_params().exponents();
        let a = 10f64.powf(la);
        let gamma = if small { e.gamma_small } else { e.gamma_large };
        let x_max = 2.0 * a.powf(-gamma).min(5.0);
        let o = |xi_max: f64, xi_init: f64| ProfileOptions { rtol: 1e-12, atol: 1e-16, xi_max: Some(xi_max), xi_init: Some(xi_init), ..ProfileOptions::default() };
        let s = a.powf(gamma);
        let xi_init = 1e-4 * x_max;
        let f = integrate_equation(&ProfileEquation::self_similar(&e), a, &o(x_max, xi_init)).unwrap();
        let g = integrate_equation(&ProfileEquation::rescaled(&e, a, gamma), 1.0, &o(s * x_max, s * xi_init)).unwrap();
        let end = f.last().xi.min(g.last().xi / s);
        for k in 1..=8 {
            let xi = end * k as f64 / 9.0;
            if xi <= f.samples[0].xi { continue; }
            let (lhs, rhs) = (f.f_hermite(xi), a * g.f_hermite(s * xi));
            prop_assert!((lhs - rhs).abs() <= 1e-6 * a, "xi {} f {} a g {}", xi, lhs, rhs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    /// The truncated series differs from the solution by at least the predicted power of ξ.
    /// The measured slope may exceed it where two neglected terms nearly cancel.
    #[test]
    fn series_truncation_order(m in 1.5f64..2.5, q in 0.3f64..0.7, extra in 0.5f64..3.0, dim in 1u32..4) {
        let p = Params::new(m, q, 2.0 * (1.0 - q) / (m - 1.0) + extra, dim).unwrap();
        let e = p.exponents();
        let shot = solve(&e, &ShootingOptions::default()).unwrap();
        let r = series_order(&e, shot.a_star, &SeriesCheckOptions::default()).unwrap();
        prop_assert!(r.slope >= r.required - 0.3 && r.slope >= r.predicted - 0.3, "{:?}", r);
    }
}
