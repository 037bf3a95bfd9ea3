//! Bisection on `a = f(0)` between overshooting (A) and turning (C) trajectories.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{fit_interface, FitOptions};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, StepperOptions};
use crate::params::Exponents;
use crate::profile::{
    default_xi_init, integrate_profile, Class, ProfileEquation, ProfileOptions, ProfileSolution, Sample, Termination,
};
use crate::series::SeriesExpansion;
use crate::tail::{complete_tail, TailMatch, TailOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootingOptions {
    pub a_seed: f64,
    /// Relative bracket width at which bisection stops.
    pub bracket_tol: f64,
    pub max_doublings: usize,
    pub max_bisections: usize,
    pub profile: ProfileOptions,
    /// Tolerances for the final trajectory at `a_star`.
    pub final_rtol: f64,
    pub final_atol: f64,
    /// The final trajectory is kept while the bracket ends agree to this relative level.
    pub reliable_tol: f64,
    /// Floor for the final trajectory, relative to `a^m`.
    pub final_f_floor: f64,
    /// Tail sampling density: max change of `ln F` between stored samples.
    pub tail_log_step: f64,
    /// Continue the profile to the interface by backward integration.
    pub complete_tail: bool,
    pub tail: TailOptions,
}

impl ShootingOptions {
    /// Tolerances near the limit of double precision.
    pub fn precise() -> Self {
        ShootingOptions {
            bracket_tol: 1e-15,
            final_rtol: 1e-13,
            profile: ProfileOptions { rtol: 1e-14, atol: 1e-20, ..Default::default() },
            ..Default::default()
        }
    }
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            a_seed: 1.0,
            bracket_tol: 1e-10,
            max_doublings: 512,
            max_bisections: 200,
            profile: ProfileOptions::default(),
            final_rtol: 1e-12,
            final_atol: 1e-24,
            reliable_tol: 1e-3,
            final_f_floor: 1e-30,
            tail_log_step: 0.02,
            complete_tail: true,
            tail: TailOptions::default(),
        }
    }
}

/// How a classification was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution {
    Direct,
    /// Decided after dividing tolerances by `10^k`.
    Tightened(u32),
    /// Still undecided; assigned by the sign of `F'` at the last sample.
    SlopeSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub a: f64,
    pub class: Class,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub a_star: f64,
    pub bracket: (f64, f64),
    pub bracket_history: Vec<(f64, f64)>,
    pub iterations: Vec<Iteration>,
    /// Trajectory at `a_star`, truncated where the bracket ends separate.
    pub profile: ProfileSolution,
    pub xi0_star: f64,
    /// `max(F, |F'|)` at the last reliable forward sample.
    pub residual: f64,
    /// `max(F, |F'|)` at the last sample of the completed profile.
    pub tail_residual: f64,
    /// Samples `[..forward_len]` come from forward integration, the rest from the tail completion.
    pub forward_len: usize,
    pub tail: Option<TailMatch>,
    /// True if any classification needed the slope-sign fallback.
    pub undecided_fallback: bool,
}

impl ShootingResult {
    pub fn relative_width(&self) -> f64 {
        (self.bracket.1 - self.bracket.0) / self.a_star
    }

    /// Jump of `F'` where the backward branch joins the forward one, relative to `a_star^m`.
    pub fn junction_defect(&self) -> Option<f64> {
        let t = self.tail?;
        let s = self.profile.samples[self.forward_len - 1];
        Some(t.slope_mismatch * s.d_f.abs() / self.a_star.powf(self.profile.m))
    }

    /// Every `a` classified A lies below every `a` classified C.
    pub fn is_monotone(&self) -> bool {
        check_monotone(&self.iterations).is_ok()
    }
}

fn check_monotone(log: &[Iteration]) -> Result<()> {
    let max_a = log.iter().filter(|i| i.class == Class::A).map(|i| i.a).fold(f64::NEG_INFINITY, f64::max);
    let min_c = log.iter().filter(|i| i.class == Class::C).map(|i| i.a).fold(f64::INFINITY, f64::min);
    if max_a >= min_c {
        return Err(Error::NonMonotoneClassification { a_at: max_a, c_at: min_c });
    }
    Ok(())
}

/// Classifies `a`, resolving undecided trajectories by tightening and then by slope sign.
pub fn classify(e: &Exponents, a: f64, opts: &ProfileOptions) -> Result<Iteration> {
    let mut last: Option<ProfileSolution> = None;
    for k in 0..3u32 {
        let o = opts.tightened(10f64.powi(k as i32));
        let sol = integrate_profile(e, a, &o)?;
        if sol.class != Class::Undecided {
            let resolution = if k == 0 { Resolution::Direct } else { Resolution::Tightened(k) };
            return Ok(Iteration { a, class: sol.class, resolution });
        }
        last = Some(sol);
    }
    let sol = last.expect("at least one attempt");
    let class = if sol.last().d_f < 0.0 {
        Class::A
    } else {
        Class::C
    };
    Ok(Iteration { a, class, resolution: Resolution::SlopeSign })
}

/// Geometric search from `a_seed` for an A/C pair; returns `(a_lo, a_hi)`.
pub fn find_bracket(e: &Exponents, a_seed: f64, opts: &ShootingOptions) -> Result<(f64, f64)> {
    let mut log = Vec::new();
    find_bracket_logged(e, a_seed, opts, &mut log)
}

fn find_bracket_logged(
    e: &Exponents,
    a_seed: f64,
    opts: &ShootingOptions,
    log: &mut Vec<Iteration>,
) -> Result<(f64, f64)> {
    if !(a_seed > 0.0 && a_seed.is_finite()) {
        return Err(Error::InvalidArgument(format!("a_seed must be positive, got {a_seed}")));
    }
    let first = classify(e, a_seed, &opts.profile)?;
    log.push(first);
    let factor = if first.class == Class::A { 2.0 } else { 0.5 };
    let mut prev = a_seed;
    for _ in 0..opts.max_doublings {
        let a = prev * factor;
        let it = match classify(e, a, &opts.profile) {
            Ok(it) => it,
            Err(_) => break,
        };
        log.push(it);
        if it.class != first.class {
            return Ok(if factor > 1.0 { (prev, a) } else { (a, prev) });
        }
        prev = a;
    }
    Err(Error::BracketNotFound { attempts: log.len(), last_a: prev })
}

/// Full shooting: bracket, bisect, then integrate the final trajectory and fit its interface.
pub fn solve(e: &Exponents, opts: &ShootingOptions) -> Result<ShootingResult> {
    let mut iterations = Vec::new();
    let (mut lo, mut hi) = find_bracket_logged(e, opts.a_seed, opts, &mut iterations)?;
    let mut history = vec![(lo, hi)];
    for _ in 0..opts.max_bisections {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= opts.bracket_tol * mid || mid <= lo || mid >= hi {
            break;
        }
        let it = classify(e, mid, &opts.profile)?;
        iterations.push(it);
        if it.class == Class::A {
            lo = mid;
        } else {
            hi = mid;
        }
        history.push((lo, hi));
    }
    check_monotone(&iterations)?;
    let a_star = 0.5 * (lo + hi);
    let (forward, spread) = bracketed_profile(e, lo, a_star, hi, opts)?;
    let last = *forward.last();
    let residual = last.big_f.max(last.d_f.abs());
    let forward_len = forward.samples.len();
    let completed = if opts.complete_tail { complete_tail(&forward, &spread, e, &opts.tail).ok() } else { None };
    let (mut profile, tail, forward_len, window) = match completed {
        Some((p, t)) => {
            let n = p.samples.iter().take_while(|s| s.xi <= t.xi_match).count();
            (p, Some(t), n, FitOptions::for_regime(e.params.regime()))
        }
        None => (forward, None, forward_len, FitOptions::default()),
    };
    // the completed branch ends on an extrapolated power law, so its xi0 is the fit's
    let xi0_star = match (tail, fit_interface(&profile, e, &window)) {
        (Some(t), _) => t.xi0,
        (None, Ok(fit)) => fit.xi0,
        (None, Err(_)) => last.xi - last.big_f / last.d_f.min(-f64::MIN_POSITIVE),
    };
    profile.xi0 = Some(xi0_star);
    let end = *profile.last();
    let tail_residual = end.big_f.max(end.d_f.abs());
    let undecided_fallback = iterations.iter().any(|i| i.resolution == Resolution::SlopeSign);
    Ok(ShootingResult {
        a_star,
        bracket: (lo, hi),
        bracket_history: history,
        iterations,
        profile,
        xi0_star,
        residual,
        tail_residual,
        forward_len,
        tail,
        undecided_fallback,
    })
}

/// Integrates `a_lo < a < a_hi` on a common grid and keeps the middle trajectory
/// while the outer two agree to `reliable_tol` relative to it.
/// Also returns the relative spread `|F_hi - F_lo| / F` at every sample.
pub fn bracketed_profile(
    e: &Exponents,
    a_lo: f64,
    a: f64,
    a_hi: f64,
    opts: &ShootingOptions,
) -> Result<(ProfileSolution, Vec<f64>)> {
    let eq = ProfileEquation::self_similar(e);
    let scale = a.powf(eq.m);
    let xi_init = opts.profile.xi_init.unwrap_or_else(|| default_xi_init(eq.m, a));
    let floor = opts.final_f_floor * scale;
    let mut y0 = [0.0; 6];
    for (k, &ak) in [a_lo, a, a_hi].iter().enumerate() {
        let (f, df) = SeriesExpansion::new(&eq, ak)?.init(xi_init)?;
        y0[2 * k] = f;
        y0[2 * k + 1] = df;
    }
    let sopts = StepperOptions {
        rtol: opts.final_rtol,
        atol: opts.final_atol * scale,
        h_init: 0.1 * xi_init,
        h_max: opts.profile.max_step.unwrap_or(f64::INFINITY),
        h_min_rel: 1e-15,
    };
    let rhs = move |x: f64, y: &[f64; 6]| {
        [
            y[1],
            eq.second_derivative(x, y[0], y[1], floor),
            y[3],
            eq.second_derivative(x, y[2], y[3], floor),
            y[5],
            eq.second_derivative(x, y[4], y[5], floor),
        ]
    };
    let xi_max = opts.profile.xi_max.unwrap_or(f64::INFINITY);
    let mut stepper = Dopri5::new(rhs, xi_init, y0, sopts);
    let reliable = |y: &[f64; 6]| {
        y[2] > floor && y[0] > floor && y[3] < 0.0 && y[5] < 0.0 && (y[4] - y[0]) <= opts.reliable_tol * y[2]
    };
    let mut samples = vec![Sample { xi: xi_init, big_f: y0[2], d_f: y0[3] }];
    let mut spread = vec![(y0[4] - y0[0]).abs() / y0[2]];
    let mut termination = Termination::DerivativeVanished;
    'outer: loop {
        let step = match stepper.step(xi_max) {
            Ok(s) => s,
            Err(_) => {
                termination = Termination::StepFailure;
                break;
            }
        };
        let (fa, fb) = (step.y0[2].max(floor), step.y1[2].max(floor));
        let n_sub = ((fa.ln() - fb.ln()).abs() / opts.tail_log_step).ceil().clamp(1.0, 1e4) as usize;
        for j in 1..=n_sub {
            let x = step.x0 + step.h() * j as f64 / n_sub as f64;
            let y = if j == n_sub { step.y1 } else { step.eval(x) };
            if !reliable(&y) {
                break 'outer;
            }
            samples.push(Sample { xi: x, big_f: y[2], d_f: y[3] });
            spread.push((y[4] - y[0]).abs() / y[2]);
        }
        if step.x1 >= xi_max {
            termination = Termination::MaxXiReached;
            break;
        }
    }
    let sol = ProfileSolution {
        a,
        m: eq.m,
        samples,
        xi0: None,
        xi1: None,
        class: Class::Undecided,
        termination,
        f_floor: floor,
    };
    Ok((sol, spread))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    fn exps() -> Exponents {
        Params::new(2.0, 0.5, 2.0, 1).unwrap().exponents()
    }

    #[test]
    fn bracket_from_either_side() {
        let e = exps();
        let o = ShootingOptions::default();
        for seed in [1.0, 1e4] {
            let (lo, hi) = find_bracket(&e, seed, &o).unwrap();
            assert!(lo < hi && (hi / lo - 2.0).abs() < 1e-12);
            assert_eq!(classify(&e, lo, &o.profile).unwrap().class, Class::A);
            assert_eq!(classify(&e, hi, &o.profile).unwrap().class, Class::C);
        }
    }

    #[test]
    fn bad_seed_rejected() {
        assert!(find_bracket(&exps(), 0.0, &ShootingOptions::default()).is_err());
    }

    #[test]
    fn bisection_halves_width() {
        let r = solve(&exps(), &ShootingOptions::default()).unwrap();
        for w in r.bracket_history.windows(2) {
            let (a, b) = (w[0].1 - w[0].0, w[1].1 - w[1].0);
            assert!((b / a - 0.5).abs() < 1e-6);
        }
        assert!(r.relative_width() <= 1e-10);
        assert!(r.bracket.0 < r.a_star && r.a_star < r.bracket.1);
        assert!(r.is_monotone());
    }

    #[test]
    fn non_monotone_log_is_reported() {
        let log = [
            Iteration { a: 2.0, class: Class::A, resolution: Resolution::Direct },
            Iteration { a: 1.0, class: Class::C, resolution: Resolution::Direct },
        ];
        assert!(matches!(check_monotone(&log), Err(Error::NonMonotoneClassification { .. })));
    }
}
