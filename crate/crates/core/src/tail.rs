//! Completion of a shooting profile near its interface.
//!
//! Forward integration from the origin cannot follow the touchdown trajectory
//! all the way to the edge of the support: the departing mode grows as the
//! trajectory nears the edge. Integrated towards the origin that mode decays, so
//! the trajectory is continued backwards from a point close to a trial edge
//! `xi0`, and `xi0` is fixed by matching `F` with the reliable forward part.
//! The starting data only needs to be roughly right; it is taken from a crude
//! power-law fit of the forward tail.

use serde::{Deserialize, Serialize};

use crate::asymptotics::fit_power_law;
use crate::error::{Error, Result};
use crate::ode::{Dopri5, StepperOptions};
use crate::params::{Exponents, Regime};
use crate::profile::{ProfileEquation, ProfileSolution, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailOptions {
    /// Match at the last forward sample whose bracket spread is below this.
    pub match_spread: f64,
    /// `f / a` where backward integration starts; `None` picks by regime.
    pub depth: Option<f64>,
    pub rtol: f64,
    pub max_steps: usize,
    /// Max change of `ln F` between stored samples.
    pub log_step: f64,
    /// Relative tolerance on `xi0`.
    pub xi0_tol: f64,
    /// Multiplies the first starting amplitude; 1 in normal use.
    pub start_scale: f64,
    /// Lower limit on the starting distance from `xi0`, relative to `xi0`.
    pub min_distance: f64,
    /// Backward solves; each later one restarts on a law refitted from the previous branch.
    pub passes: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            match_spread: 1e-6,
            depth: None,
            rtol: 1e-12,
            max_steps: 2_000_000,
            log_step: 0.02,
            xi0_tol: 1e-14,
            start_scale: 1.0,
            min_distance: 1e-10,
            passes: 2,
        }
    }
}

impl TailOptions {
    pub fn depth_for(&self, regime: Regime) -> f64 {
        self.depth.unwrap_or(match regime {
            // the approach is exponentially stiff here, so stay shallower
            Regime::HighSum => 1e-12,
            _ => 1e-30,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailMatch {
    pub xi0: f64,
    pub xi_match: f64,
    /// Relative mismatch of `F'` at the match point.
    pub slope_mismatch: f64,
    /// Distance from `xi0` where backward integration started.
    pub start_distance: f64,
    pub start_exponent: f64,
    pub start_amplitude: f64,
    pub steps: usize,
    pub passes: usize,
}

/// Backward trajectory from `xi0 - d0` down to `xi_end`, samples in decreasing `xi`.
fn integrate_back(
    eq: &ProfileEquation,
    xi0: f64,
    d0: f64,
    amp: f64,
    p: f64,
    xi_end: f64,
    opts: &TailOptions,
    keep: bool,
) -> Option<(Vec<Sample>, usize)> {
    let m = eq.m;
    let f0 = amp * d0.powf(p);
    let df0 = -p * amp * d0.powf(p - 1.0);
    let big_f = f0.powf(m);
    let d_big_f = m * f0.powf(m - 1.0) * df0;
    if !(big_f > 0.0 && big_f.is_finite() && d_big_f.is_finite()) {
        return None;
    }
    let eqc = *eq;
    let rhs = move |t: f64, y: &[f64; 2]| {
        let xi = -t;
        [-y[1], -eqc.second_derivative(xi, y[0], y[1], 0.0)]
    };
    let sopts = StepperOptions {
        rtol: opts.rtol,
        atol: 1e-6 * big_f,
        h_init: 1e-3 * d0,
        h_max: f64::INFINITY,
        h_min_rel: 1e-15,
    };
    let t_end = -xi_end;
    let mut st = Dopri5::new(rhs, -(xi0 - d0), [big_f, d_big_f], sopts);
    let mut out = Vec::new();
    if keep {
        out.push(Sample { xi: xi0 - d0, big_f, d_f: d_big_f });
    }
    let mut steps = 0;
    while st.x() < t_end {
        let step = st.step(t_end).ok()?;
        steps += 1;
        if steps > opts.max_steps || !(step.y1[0] > 0.0) {
            return None;
        }
        if keep {
            let last = out.last().map_or(step.y0[0], |s: &Sample| s.big_f).ln();
            let gap = (last - step.y1[0].ln()).abs();
            if gap >= opts.log_step || st.x() >= t_end {
                let within = (step.y0[0].ln() - step.y1[0].ln()).abs();
                let n_sub = (within / opts.log_step).ceil().clamp(1.0, 1e4) as usize;
                for j in 1..=n_sub {
                    let t = step.x0 + step.h() * j as f64 / n_sub as f64;
                    let y = if j == n_sub { step.y1 } else { step.eval(t) };
                    out.push(Sample { xi: -t, big_f: y[0], d_f: y[1] });
                }
            }
        } else if st.x() >= t_end {
            out.push(Sample { xi: -step.x1, big_f: step.y1[0], d_f: step.y1[1] });
        }
    }
    Some((out, steps))
}

/// Replaces the part of `forward` beyond the match point by a backward trajectory
/// ending at the matched interface. `spread[i]` is the relative bracket spread at sample `i`.
pub fn complete_tail(
    forward: &ProfileSolution,
    spread: &[f64],
    e: &Exponents,
    opts: &TailOptions,
) -> Result<(ProfileSolution, TailMatch)> {
    let eq = ProfileEquation::self_similar(e);
    let a = forward.a;
    if opts.passes == 0 {
        return Err(Error::InvalidArgument("tail completion needs at least one pass".into()));
    }
    let im = spread
        .iter()
        .rposition(|&s| s <= opts.match_spread)
        .ok_or_else(|| Error::DomainError("no forward sample below the matching spread".into()))?;
    let m_s = forward.samples[im];
    let xi_m = m_s.xi;

    // crude starting law from the forward tail
    let tail: Vec<&Sample> = forward
        .samples
        .iter()
        .filter(|s| s.d_f < 0.0 && forward.f(s) <= 0.1 * a && forward.f(s) > 0.0)
        .collect();
    let last = forward.last();
    let (p0, k0, xi0_guess) = if tail.len() >= 5 {
        let xs: Vec<f64> = tail.iter().map(|s| s.xi).collect();
        let fs: Vec<f64> = tail.iter().map(|s| forward.f(s)).collect();
        let fit = fit_power_law(&xs, &fs, last.xi);
        (fit.exponent, fit.amplitude, fit.xi0)
    } else {
        let p = e.interface_exponent();
        let f = forward.f(last);
        let df = forward.df(last);
        let d = -p * f / df;
        (p, f / d.powf(p), last.xi + d)
    };
    if !(p0 > 0.0 && k0 > 0.0 && xi0_guess > xi_m) {
        return Err(Error::DomainError(format!("unusable start law p = {p0}, K = {k0}")));
    }
    let depth = opts.depth_for(e.params.regime());
    let mut law = (p0, k0 * opts.start_scale, xi0_guess);
    let mut pass = 1;
    loop {
        let (back, tm) = match_once(&eq, m_s, law, depth * a, opts)?;
        let refit = if pass < opts.passes { refit_law(&back, m_s, eq.m) } else { None };
        match refit {
            Some(l) => {
                law = l;
                pass += 1;
            }
            None => {
                let mut samples: Vec<Sample> = forward.samples[..=im].to_vec();
                samples.extend(back.iter().rev().filter(|s| s.xi > xi_m));
                let out = ProfileSolution { samples, xi0: Some(tm.xi0), ..forward.clone() };
                return Ok((out, TailMatch { passes: pass, ..tm }));
            }
        }
    }
}

/// Power law fitted on the backward branch away from both its ends.
fn refit_law(back: &[Sample], m_s: Sample, m: f64) -> Option<(f64, f64, f64)> {
    let f_start = back[0].big_f.powf(1.0 / m);
    let f_match = m_s.big_f.powf(1.0 / m);
    let (xs, fs): (Vec<f64>, Vec<f64>) = back
        .iter()
        .rev()
        .map(|s| (s.xi, s.big_f.powf(1.0 / m)))
        .filter(|&(_, f)| f >= 1e4 * f_start && f <= 1e-2 * f_match)
        .unzip();
    if xs.len() < 10 {
        return None;
    }
    let fit = fit_power_law(&xs, &fs, xs[xs.len() - 1]);
    (fit.exponent > 0.0 && fit.amplitude > 0.0).then_some((fit.exponent, fit.amplitude, fit.xi0))
}

/// One backward solve: finds `xi0` so that the branch started on `law` meets `F` at `m_s`.
fn match_once(
    eq: &ProfileEquation,
    m_s: Sample,
    law: (f64, f64, f64),
    f_depth: f64,
    opts: &TailOptions,
) -> Result<(Vec<Sample>, TailMatch)> {
    let (p0, amp, xi0_guess) = law;
    let xi_m = m_s.xi;
    // keep xi0 - d0 well resolved in floating point
    let d0 = (f_depth / amp).powf(1.0 / p0).max(opts.min_distance * xi0_guess);
    let g = |xi0: f64| -> f64 {
        if xi0 - d0 <= xi_m {
            return f64::NEG_INFINITY;
        }
        match integrate_back(eq, xi0, d0, amp, p0, xi_m, opts, false) {
            Some((s, _)) => s.last().map_or(f64::NEG_INFINITY, |x| x.big_f.ln() - m_s.big_f.ln()),
            None => f64::NEG_INFINITY,
        }
    };
    let mut lo = xi_m + d0 * (1.0 + 1e-9);
    let mut hi = xi0_guess.max(lo + d0);
    let mut k = 0;
    while !(g(hi) > 0.0) {
        lo = lo.max(hi);
        hi = xi_m + 2.0 * (hi - xi_m);
        k += 1;
        if k > 60 {
            return Err(Error::DomainError("could not bracket the interface position".into()));
        }
    }
    while hi - lo > opts.xi0_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let xi0 = 0.5 * (lo + hi);
    let (back, steps) = integrate_back(eq, xi0, d0, amp, p0, xi_m, opts, true)
        .ok_or_else(|| Error::DomainError("backward integration failed at the matched interface".into()))?;
    let at_m = back.last().expect("non-empty");
    let tm = TailMatch {
        xi0,
        xi_match: xi_m,
        slope_mismatch: (at_m.d_f - m_s.d_f).abs() / m_s.d_f.abs(),
        start_distance: d0,
        start_exponent: p0,
        start_amplitude: amp,
        steps,
        passes: 1,
    };
    Ok((back, tm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{fit_interface, FitOptions};
    use crate::params::Params;
    use crate::shooting::{bracketed_profile, solve, ShootingOptions};

    fn setup() -> (Exponents, ProfileSolution, Vec<f64>) {
        let e = Params::new(1.5, 0.5, 4.0, 3).unwrap().exponents();
        let o = ShootingOptions { complete_tail: false, ..ShootingOptions::precise() };
        let r = solve(&e, &o).unwrap();
        let (p, spread) = bracketed_profile(&e, r.bracket.0, r.a_star, r.bracket.1, &o).unwrap();
        (e, p, spread)
    }

    #[test]
    fn insensitive_to_start_amplitude() {
        let (e, p, spread) = setup();
        let window = FitOptions::for_regime(e.params.regime());
        let fits: Vec<_> = [1.0, 0.5, 2.0]
            .iter()
            .map(|&k| {
                let o = TailOptions { start_scale: k, ..Default::default() };
                let (c, t) = complete_tail(&p, &spread, &e, &o).unwrap();
                (t.xi0, fit_interface(&c, &e, &window).unwrap())
            })
            .collect();
        for (xi0, f) in &fits[1..] {
            assert!((xi0 / fits[0].0 - 1.0).abs() < 1e-9);
            assert!((f.amplitude_fit / fits[0].1.amplitude_fit - 1.0).abs() < 1e-4);
            assert!((f.exponent_fit - fits[0].1.exponent_fit).abs() < 1e-5);
        }
    }

    #[test]
    fn branch_joins_forward_part() {
        let (e, p, spread) = setup();
        let (c, t) = complete_tail(&p, &spread, &e, &TailOptions::default()).unwrap();
        assert!(t.slope_mismatch < 1e-3);
        assert!(t.passes == 2);
        assert!(c.samples.windows(2).all(|w| w[1].xi > w[0].xi && w[1].big_f < w[0].big_f * (1.0 + 1e-12)));
        assert!(c.last().xi < t.xi0);
        let i = c.samples.iter().position(|s| s.xi == t.xi_match).unwrap();
        assert_eq!(&c.samples[..=i], &p.samples[..=i]);
    }

    #[test]
    fn zero_passes_rejected() {
        let (e, p, spread) = setup();
        let o = TailOptions { passes: 0, ..Default::default() };
        assert!(matches!(complete_tail(&p, &spread, &e, &o), Err(Error::InvalidArgument(_))));
    }
}
