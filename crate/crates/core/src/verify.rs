//! Checks on computed profiles: expansion order near the origin, comparison with the
//! diffusion-only profile, ordering in `a`, and the interface diagnostics of a shot profile.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, BoundsReport, DecadeStats, FitOptions, InterfaceFit, Variant};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, StepperOptions};
use crate::params::Exponents;
use crate::profile::{integrate_profile, Class, ProfileEquation, ProfileOptions, ProfileSolution};
use crate::series::SeriesExpansion;
use crate::shooting::ShootingResult;

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `F` at each point of the increasing list `xs`, integrated from a tiny start with the
/// expansion as initial data.
fn reference_values(eq: &ProfileEquation, a: f64, xs: &[f64], rtol: f64) -> Result<Vec<f64>> {
    let series = SeriesExpansion::new(eq, a)?;
    let x_start = xs[0] * 1e-3;
    let (f0, df0) = series.init(x_start)?;
    let scale = a.powf(eq.m);
    let opts = StepperOptions { rtol, atol: 1e-30 * scale, h_init: x_start * 1e-2, ..StepperOptions::default() };
    let eqc = *eq;
    let mut st = Dopri5::new(move |x, y: &[f64; 2]| [y[1], eqc.second_derivative(x, y[0], y[1], 0.0)], x_start, [f0, df0], opts);
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        while st.x() < x {
            st.step(x)?;
        }
        out.push(st.y()[0]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesCheckOptions {
    /// Largest point as a fraction of the radius where the last kept term reaches 1e-3·F(0).
    pub top_fraction: f64,
    /// Most points used.
    pub levels: usize,
    /// Points whose difference falls below this (relative to `a^m`) are dropped as rounding.
    pub floor: f64,
    pub rtol: f64,
}

impl Default for SeriesCheckOptions {
    fn default() -> Self {
        SeriesCheckOptions { top_fraction: 1.0, levels: 6, floor: 1e-13, rtol: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesOrderReport {
    pub a: f64,
    /// Decreasing dyadic points.
    pub xi: Vec<f64>,
    /// `|F_series − F_ode| / a^m`.
    pub diff: Vec<f64>,
    pub slope: f64,
    /// Exponent of the first neglected term.
    pub predicted: f64,
    /// `min(σ+3, k0+3)`.
    pub required: f64,
}

impl SeriesOrderReport {
    pub fn passes(&self, slack: f64) -> bool {
        self.slope >= self.required - slack && (self.slope - self.predicted).abs() <= slack
    }
}

/// Radius where the last kept term of the expansion reaches `1e-3·F(0)`.
pub fn series_radius(series: &SeriesExpansion, e: &Exponents) -> f64 {
    let b0 = series.coeffs_b[0];
    let top = series.order();
    let mut radius = (1e-3 * b0 / series.coeffs_b[top].abs()).powf(1.0 / top as f64);
    if series.sigma_coeff != 0.0 {
        radius = radius.min((1e-3 * b0 / series.sigma_coeff.abs()).powf(1.0 / (e.params.sigma + 2.0)));
    }
    radius
}

/// Increasing dyadic candidates ending at `top_fraction` times the expansion radius.
fn dyadic_points(series: &SeriesExpansion, e: &Exponents, opts: &SeriesCheckOptions) -> Vec<f64> {
    let hi = opts.top_fraction * series_radius(series, e);
    (0..DYADIC_CANDIDATES).rev().map(|k| hi * 0.5f64.powi(k as i32)).collect()
}

const DYADIC_CANDIDATES: usize = 24;

/// Keeps the leading run (from the top point down) of values above `floor`, at most `levels`,
/// returned in decreasing-ξ order.
fn trim(xs: &[f64], vals: &[f64], opts: &SeriesCheckOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut x, mut v) = (vec![], vec![]);
    for (&xi, &d) in xs.iter().zip(vals).rev() {
        if !(d >= opts.floor) || x.len() == opts.levels {
            break;
        }
        x.push(xi);
        v.push(d);
    }
    if x.len() < 3 {
        return Err(Error::DomainError(format!("only {} dyadic points above the rounding floor", x.len())));
    }
    Ok((x, v))
}

/// Compares the truncated expansion with an accurate integration on a dyadic sequence.
pub fn series_order(e: &Exponents, a: f64, opts: &SeriesCheckOptions) -> Result<SeriesOrderReport> {
    if opts.levels < 2 {
        return Err(Error::InvalidArgument("need at least two levels".into()));
    }
    let eq = ProfileEquation::self_similar(e);
    let series = SeriesExpansion::new(&eq, a)?;
    let b0 = series.coeffs_b[0];
    let xs = dyadic_points(&series, e, opts);
    let reference = reference_values(&eq, a, &xs, opts.rtol)?;
    let diff: Vec<f64> = xs.iter().zip(&reference).map(|(&x, &r)| (series.eval(x).0 - r).abs() / b0).collect();
    let (xs, diff) = trim(&xs, &diff, opts)?;
    let slope = log_log_slope(&xs, &diff);
    let sigma = e.params.sigma;
    let required = (sigma + 3.0).min(series.k0 as f64 + 3.0);
    Ok(SeriesOrderReport { a, xi: xs, diff, slope, predicted: series.truncation_order(), required })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmeComparison {
    pub a: f64,
    /// Decreasing dyadic points.
    pub xi: Vec<f64>,
    /// `|F − Φ_a| / (a^m ξ²)`.
    pub ratio: Vec<f64>,
}

impl PmeComparison {
    /// Whether the ratio decreases over the last `k` points.
    pub fn decreasing_tail(&self, k: usize) -> bool {
        let n = self.ratio.len();
        n >= k && self.ratio[n - k..].windows(2).all(|w| w[1] < w[0])
    }
}

/// Distance between the profile and the diffusion-only profile with the same `a`, relative to `ξ²`.
pub fn pme_comparison(e: &Exponents, a: f64, opts: &SeriesCheckOptions) -> Result<PmeComparison> {
    let eq = ProfileEquation::self_similar(e);
    let xs = dyadic_points(&SeriesExpansion::new(&eq, a)?, e, opts);
    let f = reference_values(&eq, a, &xs, opts.rtol)?;
    let phi = reference_values(&ProfileEquation::pme(e), a, &xs, opts.rtol)?;
    let scale = a.powf(e.params.m);
    let diff: Vec<f64> = f.iter().zip(&phi).map(|(f, p)| (f - p).abs() / scale).collect();
    let (xs, diff) = trim(&xs, &diff, opts)?;
    let ratio = xs.iter().zip(&diff).map(|(x, d)| d / (x * x)).collect();
    Ok(PmeComparison { a, xi: xs, ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub pairs: usize,
    pub points_checked: usize,
    pub violations: usize,
    /// Pairs `(a1, a2)` with at least one violation.
    pub offending: Vec<(f64, f64)>,
}

fn decreasing_end(p: &ProfileSolution) -> f64 {
    match p.class {
        Class::A => p.xi0.unwrap_or(p.last().xi),
        Class::C => p.xi1.unwrap_or(p.last().xi),
        Class::Undecided => p.last().xi,
    }
}

/// Checks `f(·; a1) < f(·; a2)` on `[0, ξ1(a1))` at the samples of the first profile.
pub fn ordering_pair(e: &Exponents, a1: f64, a2: f64, opts: &ProfileOptions) -> Result<(usize, usize)> {
    if !(a1 < a2) {
        return Err(Error::InvalidArgument(format!("need a1 < a2, got {a1}, {a2}")));
    }
    // common start so both lists begin at the same point
    let xi_init = opts.xi_init.unwrap_or_else(|| crate::profile::default_xi_init(e.params.m, a1).min(crate::profile::default_xi_init(e.params.m, a2)));
    let o1 = ProfileOptions { xi_init: Some(xi_init), ..*opts };
    let o2 = ProfileOptions { xi_init: Some(xi_init), stop_at_minimum: false, xi_max: None, ..*opts };
    let p1 = integrate_profile(e, a1, &o1)?;
    let mut p2 = integrate_profile(e, a2, &o2)?;
    if p2.class == Class::A && p2.xi0.is_none() {
        p2.xi0 = Some(p2.last().xi);
    }
    let end = decreasing_end(&p1).min(p2.last().xi);
    let (mut checked, mut bad) = (0, 0);
    for s in p1.samples.iter().filter(|s| s.xi < end) {
        checked += 1;
        if !(p1.f(s) < p2.f_hermite(s.xi)) {
            bad += 1;
        }
    }
    Ok((checked, bad))
}

/// `pairs` random pairs with `a` log-uniform in `[lo, hi]`.
pub fn ordering_check<R: Rng>(e: &Exponents, lo: f64, hi: f64, pairs: usize, rng: &mut R, opts: &ProfileOptions) -> Result<OrderingReport> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("need 0 < lo < hi, got {lo}, {hi}")));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let draws: Vec<(f64, f64)> = (0..pairs)
        .map(|_| {
            let x: f64 = rng.gen_range(llo..lhi);
            let y: f64 = rng.gen_range(llo..lhi);
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            (a.exp(), b.exp())
        })
        .filter(|(a, b)| a < b)
        .collect();
    let results: Vec<Result<(usize, usize)>> = draws.par_iter().map(|&(a1, a2)| ordering_pair(e, a1, a2, opts)).collect();
    let mut rep = OrderingReport { pairs: draws.len(), points_checked: 0, violations: 0, offending: vec![] };
    for (r, &pair) in results.into_iter().zip(&draws) {
        let (c, b) = r?;
        rep.points_checked += c;
        rep.violations += b;
        if b > 0 {
            rep.offending.push(pair);
        }
    }
    Ok(rep)
}

/// Interface diagnostics of a shot profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub a_star: f64,
    pub xi0_star: f64,
    pub relative_width: f64,
    pub monotone_log: bool,
    /// `max(F, |F'|) / a^m` at the last forward sample.
    pub forward_residual: f64,
    /// Same at the last sample of the completed profile.
    pub tail_residual: f64,
    pub junction_defect: Option<f64>,
    pub fit: InterfaceFit,
    pub bounds: BoundsReport,
    pub variant: Variant,
    pub y_star: f64,
    pub final_decade: DecadeStats,
    pub sign_violations: usize,
}

impl ProfileReport {
    pub fn y_rel_error(&self) -> f64 {
        match self.variant {
            Variant::Low => (self.final_decade.mean_y / self.y_star - 1.0).abs(),
            Variant::High => self.final_decade.max_abs_y,
        }
    }
}

pub fn verify_profile(e: &Exponents, res: &ShootingResult, bounds_tol: f64) -> Result<ProfileReport> {
    let regime = e.params.regime();
    let scale = res.a_star.powf(e.params.m);
    let fit_opts = if res.tail.is_some() { FitOptions::for_regime(regime) } else { FitOptions::default() };
    let fit = asymptotics::fit_interface(&res.profile, e, &fit_opts)?;
    let bounds = asymptotics::interface_bounds_check(&res.profile, e, res.xi0_star, bounds_tol);
    let variant = Variant::for_regime(regime);
    let traj = asymptotics::phase_transform(&res.profile, e, variant, res.xi0_star)?;
    Ok(ProfileReport {
        a_star: res.a_star,
        xi0_star: res.xi0_star,
        relative_width: res.relative_width(),
        monotone_log: res.is_monotone(),
        forward_residual: res.residual / scale,
        tail_residual: res.tail_residual / scale,
        junction_defect: res.junction_defect(),
        fit,
        bounds,
        variant,
        y_star: traj.y_star_theory,
        final_decade: traj.final_decade(res.xi0_star),
        sign_violations: traj.sign_violations(),
    })
}
