//! Profile ODE in the semilinear form for `F = f^m`, integrated from a series
//! start near the origin and classified by its first sign event.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Step, StepperOptions};
use crate::params::Exponents;
use crate::series::SeriesExpansion;

/// `F'' + (N-1)/ξ F' + c1 (α f − β ξ f') − c2 ξ^σ f^q = 0` with `f = F^{1/m}`.
///
/// `c1 = c2 = 1` is the self-similar profile equation; other choices give the
/// pure PME profile, the rescaled equation and its two limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEquation {
    pub m: f64,
    pub q: f64,
    pub sigma: f64,
    pub n: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ProfileEquation {
    fn with(e: &Exponents, c1: f64, c2: f64) -> Self {
        let p = &e.params;
        ProfileEquation { m: p.m, q: p.q, sigma: p.sigma, n: p.n(), alpha: e.alpha, beta: e.beta, c1, c2 }
    }

    pub fn self_similar(e: &Exponents) -> Self {
        Self::with(e, 1.0, 1.0)
    }

    /// Same equation without the absorption term.
    pub fn pme(e: &Exponents) -> Self {
        Self::with(e, 1.0, 0.0)
    }

    /// Equation for `g` where `f(ξ; a) = a g(a^γ ξ)`.
    pub fn rescaled(e: &Exponents, a: f64, gamma: f64) -> Self {
        let p = &e.params;
        let c1 = a.powf(1.0 - p.m - 2.0 * gamma);
        let c2 = a.powf(p.q - p.m - gamma * (p.sigma + 2.0));
        Self::with(e, c1, c2)
    }

    /// `a → 0` limit of the rescaled equation.
    pub fn limit_small(e: &Exponents) -> Self {
        Self::with(e, 1.0, 0.0)
    }

    /// `a → ∞` limit of the rescaled equation.
    pub fn limit_large(e: &Exponents) -> Self {
        Self::with(e, 0.0, 1.0)
    }

    /// `F''` at `xi`, with `F` clamped below at `floor` inside the nonlinear terms.
    #[inline]
    pub fn second_derivative(&self, xi: f64, big_f: f64, d_f: f64, floor: f64) -> f64 {
        let fc = big_f.max(floor);
        let f = fc.powf(1.0 / self.m);
        let df = f / fc * d_f / self.m;
        let mut rhs = -self.c1 * self.alpha * f + self.c1 * self.beta * xi * df;
        if self.c2 != 0.0 {
            rhs += self.c2 * xi.powf(self.sigma) * f.powf(self.q);
        }
        if self.n != 1.0 {
            rhs -= (self.n - 1.0) / xi * d_f;
        }
        rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    A,
    C,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    HitZeroNegSlope,
    DerivativeVanished,
    MaxXiReached,
    StepFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub xi: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    #[serde(rename = "dF")]
    pub d_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileOptions {
    /// Start of integration; `None` picks `1e-3·min(1, a^{(m-1)/2})`.
    pub xi_init: Option<f64>,
    pub xi_max: Option<f64>,
    /// Relative to `a^m`.
    pub f_floor: f64,
    /// Relative to `a^m`.
    pub slope_tol: f64,
    pub rtol: f64,
    /// Relative to `a^m`.
    pub atol: f64,
    pub max_step: Option<f64>,
    /// Stop at the first zero of `F'`. Off for the increasing limit equation.
    pub stop_at_minimum: bool,
    pub event_tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            xi_init: None,
            xi_max: None,
            f_floor: 1e-12,
            slope_tol: 1e-8,
            rtol: 1e-10,
            atol: 1e-14,
            max_step: None,
            stop_at_minimum: true,
            event_tol: 1e-12,
        }
    }
}

impl ProfileOptions {
    /// Integration tolerances, floor and slope threshold divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        ProfileOptions {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
            f_floor: self.f_floor / factor,
            slope_tol: self.slope_tol / factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub a: f64,
    pub m: f64,
    pub samples: Vec<Sample>,
    pub xi0: Option<f64>,
    pub xi1: Option<f64>,
    pub class: Class,
    pub termination: Termination,
    /// Absolute floor used for `F`.
    pub f_floor: f64,
}

impl ProfileSolution {
    pub fn f(&self, s: &Sample) -> f64 {
        s.big_f.max(0.0).powf(1.0 / self.m)
    }

    /// `f'` from `F'`.
    pub fn df(&self, s: &Sample) -> f64 {
        let f = self.f(s);
        if f == 0.0 {
            return 0.0;
        }
        s.d_f / (self.m * f.powf(self.m - 1.0))
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("profile has at least one sample")
    }

    /// Linear interpolation of `f` at `xi`, zero beyond the last sample and past `xi0`.
    pub fn f_at(&self, xi: f64) -> f64 {
        let s = &self.samples;
        if xi <= s[0].xi {
            return self.f(&s[0]);
        }
        if let Some(x0) = self.xi0 {
            if xi >= x0 {
                return 0.0;
            }
        }
        let i = s.partition_point(|p| p.xi <= xi);
        if i >= s.len() {
            return 0.0;
        }
        let (p, n) = (&s[i - 1], &s[i]);
        let w = (xi - p.xi) / (n.xi - p.xi);
        (1.0 - w) * self.f(p) + w * self.f(n)
    }
}

impl ProfileSolution {
    /// `f` from cubic Hermite interpolation of `F` (using `F'`); zero past `xi0` or the last sample.
    pub fn f_hermite(&self, xi: f64) -> f64 {
        let s = &self.samples;
        if xi <= s[0].xi {
            return self.f(&s[0]);
        }
        if self.xi0.is_some_and(|x0| xi >= x0) {
            return 0.0;
        }
        let i = s.partition_point(|p| p.xi <= xi);
        if i >= s.len() {
            return 0.0;
        }
        let (p, n) = (&s[i - 1], &s[i]);
        let h = n.xi - p.xi;
        let w = (xi - p.xi) / h;
        let (w2, w3) = (w * w, w * w * w);
        let big_f = (2.0 * w3 - 3.0 * w2 + 1.0) * p.big_f
            + (w3 - 2.0 * w2 + w) * h * p.d_f
            + (-2.0 * w3 + 3.0 * w2) * n.big_f
            + (w3 - w2) * h * n.d_f;
        big_f.max(0.0).powf(1.0 / self.m)
    }
}

fn bisect<const D: usize>(step: &Step<D>, comp: usize, target: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (step.x0, step.x1);
    let s_lo = (step.y0[comp] - target).signum();
    while hi - lo > tol * hi.abs().max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if (step.eval(mid)[comp] - target).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn default_xi_init(m: f64, a: f64) -> f64 {
    1e-3 * a.powf(0.5 * (m - 1.0)).min(1.0)
}

/// Integrates `eq` with `f(0) = a` and classifies the trajectory.
pub fn integrate_equation(eq: &ProfileEquation, a: f64, opts: &ProfileOptions) -> Result<ProfileSolution> {
    let series = SeriesExpansion::new(eq, a)?;
    let scale = a.powf(eq.m);
    let xi_init = opts.xi_init.unwrap_or_else(|| default_xi_init(eq.m, a));
    let xi_max = opts.xi_max.unwrap_or_else(|| {
        let s = 1f64.max(a.powf(0.5 * (eq.m - 1.0))).max(a.powf((eq.m - eq.q) / (eq.sigma + 2.0)));
        100.0 * s
    });
    if !(xi_init > 0.0 && xi_max > xi_init) {
        return Err(Error::InvalidArgument(format!("need 0 < xi_init < xi_max, got {xi_init}, {xi_max}")));
    }
    let (f0, df0) = series.init(xi_init)?;
    let floor = opts.f_floor * scale;
    let slope_tol = opts.slope_tol * scale;
    let sopts = StepperOptions {
        rtol: opts.rtol,
        atol: opts.atol * scale,
        h_init: 0.1 * xi_init,
        h_max: opts.max_step.unwrap_or(f64::INFINITY),
        h_min_rel: 1e-14,
    };
    let eqc = *eq;
    let rhs = move |x: f64, y: &[f64; 2]| [y[1], eqc.second_derivative(x, y[0], y[1], floor)];
    let mut stepper = Dopri5::new(rhs, xi_init, [f0, df0], sopts);

    let mut samples = vec![Sample { xi: xi_init, big_f: f0, d_f: df0 }];
    let mut sol = ProfileSolution {
        a,
        m: eq.m,
        samples: Vec::new(),
        xi0: None,
        xi1: None,
        class: Class::Undecided,
        termination: Termination::MaxXiReached,
        f_floor: floor,
    };
    // steps since F first dropped to the floor, for locating its zero
    let mut below: Vec<Step<2>> = Vec::new();
    loop {
        let step = match stepper.step(xi_max) {
            Ok(s) => s,
            Err(_) => {
                sol.termination = Termination::StepFailure;
                break;
            }
        };
        let [big_f, d_f] = step.y1;
        let x = step.x1;

        if big_f <= floor {
            below.push(step.clone());
            if d_f < -slope_tol {
                sol.class = Class::A;
                sol.termination = Termination::HitZeroNegSlope;
                sol.xi0 = Some(locate_zero(&below, opts.event_tol));
                break;
            }
            if opts.stop_at_minimum {
                // reached the floor with a vanishing slope: neither A nor C
                sol.termination = Termination::DerivativeVanished;
                samples.push(Sample { xi: x, big_f, d_f });
                break;
            }
            if x >= xi_max {
                break;
            }
            continue;
        }
        below.clear();
        if d_f >= 0.0 && opts.stop_at_minimum && step.y0[1] < 0.0 {
            let x1 = bisect(&step, 1, 0.0, opts.event_tol);
            let y = step.eval(x1);
            sol.class = Class::C;
            sol.termination = Termination::DerivativeVanished;
            sol.xi1 = Some(x1);
            samples.push(Sample { xi: x1, big_f: y[0], d_f: 0.0 });
            break;
        }
        samples.push(Sample { xi: x, big_f, d_f });
        if x >= xi_max {
            break;
        }
    }
    sol.samples = samples;
    Ok(sol)
}

/// First zero of `F` across the recorded steps, or a linear extrapolation from the last one.
fn locate_zero(steps: &[Step<2>], tol: f64) -> f64 {
    for s in steps {
        if s.y0[0] > 0.0 && s.y1[0] <= 0.0 {
            return bisect(s, 0, 0.0, tol);
        }
    }
    let s = steps.last().expect("non-empty");
    let [big_f, d_f] = s.y1;
    if big_f > 0.0 && d_f < 0.0 {
        s.x1 - big_f / d_f
    } else {
        s.x1
    }
}

pub fn integrate_profile(e: &Exponents, a: f64, opts: &ProfileOptions) -> Result<ProfileSolution> {
    integrate_equation(&ProfileEquation::self_similar(e), a, opts)
}

/// Profile of the pure PME with the same exponents; run to its own zero.
pub fn integrate_pme(e: &Exponents, a: f64, opts: &ProfileOptions) -> Result<ProfileSolution> {
    integrate_equation(&ProfileEquation::pme(e), a, opts)
}

/// `a → 0` limit with `h(0) = 1`.
pub fn integrate_limit_h(e: &Exponents, opts: &ProfileOptions) -> Result<ProfileSolution> {
    let o = ProfileOptions { xi_init: Some(opts.xi_init.unwrap_or(1e-3)), xi_max: Some(opts.xi_max.unwrap_or(100.0)), ..*opts };
    integrate_equation(&ProfileEquation::limit_small(e), 1.0, &o)
}

/// `a → ∞` limit with `l(0) = 1`, run to `xi_max` (default 4).
pub fn integrate_limit_l(e: &Exponents, opts: &ProfileOptions) -> Result<ProfileSolution> {
    let o = ProfileOptions {
        xi_init: Some(opts.xi_init.unwrap_or(1e-3)),
        xi_max: Some(opts.xi_max.unwrap_or(4.0)),
        stop_at_minimum: false,
        ..*opts
    };
    integrate_equation(&ProfileEquation::limit_large(e), 1.0, &o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    fn exps(m: f64, q: f64, s: f64, n: u32) -> Exponents {
        Params::new(m, q, s, n).unwrap().exponents()
    }

    #[test]
    fn small_a_is_a_large_a_is_c() {
        // the m = 1.2 case only turns over for astronomically large a
        for (e, big) in [(exps(2.0, 0.5, 2.0, 1), 1e3), (exps(1.2, 0.5, 6.0, 1), 1e80), (exps(1.5, 0.5, 4.0, 3), 1e3)] {
            let s = integrate_profile(&e, 1e-2, &ProfileOptions::default()).unwrap();
            assert_eq!(s.class, Class::A, "{:?}", e.params);
            assert!(s.xi0.unwrap() > s.last().xi);
            let s = integrate_profile(&e, big, &ProfileOptions::default()).unwrap();
            assert_eq!(s.class, Class::C, "{:?}", e.params);
        }
    }

    #[test]
    fn samples_increase_and_stay_positive() {
        let e = exps(2.0, 0.5, 2.0, 1);
        for a in [0.1, 1.0, 10.0] {
            let s = integrate_profile(&e, a, &ProfileOptions::default()).unwrap();
            assert!(s.samples.windows(2).all(|w| w[0].xi < w[1].xi));
            assert!(s.samples.iter().all(|p| p.big_f > 0.0));
        }
    }

    #[test]
    fn interior_minimum_bound() {
        let e = exps(2.0, 0.5, 2.0, 1);
        let s = integrate_profile(&e, 1e3, &ProfileOptions::default()).unwrap();
        assert_eq!(s.class, Class::C);
        let x1 = s.xi1.unwrap();
        let f1 = s.f(s.last());
        assert!(x1.powf(2.0) >= e.alpha * f1.powf(0.5) * (1.0 - 1e-8));
    }

    #[test]
    fn limit_h_reaches_zero_with_slope() {
        let e = exps(2.0, 0.5, 2.0, 1);
        let h = integrate_limit_h(&e, &ProfileOptions::default()).unwrap();
        assert_eq!(h.class, Class::A);
        assert!(h.xi0.unwrap().is_finite());
        assert!(h.last().d_f < 0.0);
    }

    #[test]
    fn limit_l_is_increasing_and_bounded() {
        for e in [exps(2.0, 0.5, 2.0, 1), exps(1.5, 0.5, 4.0, 3)] {
            let l = integrate_limit_l(&e, &ProfileOptions::default()).unwrap();
            let p = &e.params;
            assert!(l.last().xi >= 4.0 - 1e-12);
            for w in l.samples.windows(2) {
                assert!(w[1].d_f > 0.0 && l.f(&w[1]) >= l.f(&w[0]));
            }
            for s in &l.samples {
                let v = l.f(s).powf(p.m - p.q);
                let bound = 1.0
                    + (p.m - p.q) * s.xi.powf(p.sigma + 2.0) / (p.m * (p.sigma + 2.0) * (p.n() + p.sigma));
                assert!(v >= 1.0 - 1e-12 && v <= bound * (1.0 + 1e-9), "xi {} v {v} bound {bound}", s.xi);
            }
        }
    }

    #[test]
    fn pme_scaling_identity() {
        let e = exps(2.0, 0.5, 2.0, 1);
        let o = ProfileOptions { rtol: 1e-12, xi_init: Some(1e-4), ..Default::default() };
        let p1 = integrate_pme(&e, 1.0, &ProfileOptions { max_step: Some(1e-3), ..o }).unwrap();
        let a: f64 = 4.0;
        let pa = integrate_pme(&e, a, &ProfileOptions { xi_init: Some(1e-4 * a.powf(0.5)), ..o }).unwrap();
        let x0 = p1.xi0.unwrap();
        assert!((pa.xi0.unwrap() - a.powf(0.5) * x0).abs() < 1e-6 * x0);
        for s in pa.samples.iter().step_by(7) {
            let y = a.powf(2.0) * p1.f_at(s.xi / a.powf(0.5)).powf(2.0);
            assert!((s.big_f - y).abs() < 1e-5 * a * a, "xi {}: {} vs {y}", s.xi, s.big_f);
        }
    }
}
