//! Interface fits, upper bounds near the edge of the support and phase-space
//! diagnostics for a converged profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Exponents, Regime};
use crate::profile::{ProfileSolution, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Window in `f / a`.
    pub f_min: f64,
    pub f_max: f64,
    pub min_samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { f_min: 1e-6, f_max: 1e-2, min_samples: 30 }
    }
}

impl FitOptions {
    /// Deeper windows where correction terms are negligible; needs a completed tail.
    pub fn for_regime(regime: Regime) -> Self {
        let (f_min, f_max) = match regime {
            Regime::HighSum => (1e-11, 1e-8),
            _ => (1e-14, 1e-10),
        };
        FitOptions { f_min, f_max, min_samples: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceFit {
    pub regime: Regime,
    pub exponent_fit: f64,
    pub exponent_theory: f64,
    pub amplitude_fit: f64,
    /// Evaluated at the fitted `xi0`.
    pub amplitude_theory: f64,
    pub xi0: f64,
    pub fit_window: (f64, f64),
    pub n_samples: usize,
    pub r_squared: f64,
}

impl InterfaceFit {
    pub fn exponent_rel_error(&self) -> f64 {
        (self.exponent_fit / self.exponent_theory - 1.0).abs()
    }

    pub fn amplitude_rel_error(&self) -> f64 {
        (self.amplitude_fit / self.amplitude_theory - 1.0).abs()
    }
}

/// Result of fitting `f ≈ A (ξ0 − ξ)^p` with `ξ0` free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub xi0: f64,
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

fn regress(u: &[f64], v: &[f64]) -> (f64, f64, f64, f64) {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suu, mut suv, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        suu += (a - mu) * (a - mu);
        suv += (a - mu) * (b - mv);
        svv += (b - mv) * (b - mv);
    }
    let slope = suv / suu;
    let icpt = mv - slope * mu;
    let sse = (svv - slope * suv).max(0.0);
    (slope, icpt, sse, svv)
}

/// Least squares of `ln f` on `ln(ξ0 − ξ)`, minimising over `ξ0 > xi_lower`.
pub fn fit_power_law(xi: &[f64], f: &[f64], xi_lower: f64) -> PowerFit {
    let v: Vec<f64> = f.iter().map(|x| x.ln()).collect();
    let sse_at = |t: f64| {
        let x0 = xi_lower + t.exp();
        let u: Vec<f64> = xi.iter().map(|x| (x0 - x).ln()).collect();
        regress(&u, &v).2
    };
    let span = (xi_lower - xi[0]).abs().max(xi_lower.abs() * 1e-6).max(f64::MIN_POSITIVE);
    let (t_lo, t_hi) = ((xi_lower.abs().max(span) * 1e-13).ln(), (10.0 * span).ln());
    let n = 400;
    let grid: Vec<f64> = (0..=n).map(|k| t_lo + (t_hi - t_lo) * k as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| sse_at(t)).collect();
    let k = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(n)]);
    // golden section
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (sse_at(c), sse_at(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sse_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sse_at(d);
        }
    }
    let x0 = xi_lower + (0.5 * (a + b)).exp();
    let u: Vec<f64> = xi.iter().map(|x| (x0 - x).ln()).collect();
    let (slope, icpt, sse, sst) = regress(&u, &v);
    PowerFit { xi0: x0, exponent: slope, amplitude: icpt.exp(), r_squared: 1.0 - sse / sst }
}

/// Tail samples with `f` inside the window and decreasing.
pub fn fit_window<'a>(profile: &'a ProfileSolution, opts: &FitOptions) -> Vec<&'a Sample> {
    let a = profile.a;
    profile
        .samples
        .iter()
        .filter(|s| {
            let f = profile.f(s);
            s.d_f < 0.0 && f >= opts.f_min * a && f <= opts.f_max * a
        })
        .collect()
}

pub fn fit_interface(profile: &ProfileSolution, e: &Exponents, opts: &FitOptions) -> Result<InterfaceFit> {
    let w = fit_window(profile, opts);
    if w.len() < opts.min_samples {
        return Err(Error::InsufficientTail { found: w.len(), needed: opts.min_samples });
    }
    let xi: Vec<f64> = w.iter().map(|s| s.xi).collect();
    let f: Vec<f64> = w.iter().map(|s| profile.f(s)).collect();
    let fit = fit_power_law(&xi, &f, profile.last().xi);
    Ok(InterfaceFit {
        regime: e.params.regime(),
        exponent_fit: fit.exponent,
        exponent_theory: e.interface_exponent(),
        amplitude_fit: fit.amplitude,
        amplitude_theory: e.interface_amplitude(fit.xi0),
        xi0: fit.xi0,
        fit_window: (xi[0], xi[xi.len() - 1]),
        n_samples: xi.len(),
        r_squared: fit.r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub checked: usize,
    /// Violations of the derivative bound and the two upper bounds on `f`.
    pub violations: [usize; 3],
    /// Largest `lhs / rhs` seen for each bound.
    pub worst_ratio: [f64; 3],
    pub tolerance: f64,
}

impl BoundsReport {
    pub fn total_violations(&self) -> usize {
        self.violations.iter().sum()
    }
}

/// Checks the three upper bounds on `(ξ0/2, ξ0)` at every sample, relative tolerance `tol`.
pub fn interface_bounds_check(profile: &ProfileSolution, e: &Exponents, xi0: f64, tol: f64) -> BoundsReport {
    let p = &e.params;
    let (m, q, s, n) = (p.m, p.q, p.sigma, p.n());
    let c1 = (2f64.powf(n - 2.0) * (m - q) * xi0.powf(s) / m).powf(1.0 / (m - q));
    let c2 = (2f64.powf(n) * xi0.powf(s - 1.0) / e.beta).powf(1.0 / (1.0 - q));
    let mut rep = BoundsReport { checked: 0, violations: [0; 3], worst_ratio: [0.0; 3], tolerance: tol };
    for smp in profile.samples.iter().filter(|x| x.xi > 0.5 * xi0 && x.xi < xi0) {
        let f = profile.f(smp);
        let d = xi0 - smp.xi;
        // (f^{m-q})' = (m-q)/m F' f^{-q}
        let lhs = [
            if f > 0.0 { ((m - q) / m * smp.d_f * f.powf(-q)).abs() } else { 0.0 },
            f,
            f,
        ];
        let rhs = [2f64.powf(n - 1.0) * xi0.powf(s) * d, c1 * d.powf(2.0 / (m - q)), c2 * d.powf(1.0 / (1.0 - q))];
        rep.checked += 1;
        for k in 0..3 {
            let ratio = if lhs[k] == 0.0 { 0.0 } else { lhs[k] / rhs[k] };
            rep.worst_ratio[k] = rep.worst_ratio[k].max(ratio);
            if lhs[k] > rhs[k] * (1.0 + tol) {
                rep.violations[k] += 1;
            }
        }
    }
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Low,
    High,
}

impl Variant {
    pub fn for_regime(r: Regime) -> Self {
        match r {
            Regime::HighSum => Variant::High,
            _ => Variant::Low,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub xi: f64,
    pub eta: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub variant: Variant,
    pub samples: Vec<PhasePoint>,
    pub y_star_theory: f64,
    pub z_star: f64,
}

/// `(X, Y, Z)` at one point.
pub fn phase_point(variant: Variant, e: &Exponents, xi: f64, f: f64, df: f64) -> (f64, f64, f64) {
    let p = &e.params;
    let (m, q, s, a) = (p.m, p.q, p.sigma, e.alpha);
    match variant {
        Variant::Low => {
            let sm = m.sqrt();
            (
                sm * xi.powf(-(s + 2.0) / 2.0) * f.powf((m - q) / 2.0),
                sm * xi.powf(-s / 2.0) * f.powf((m - q - 2.0) / 2.0) * df,
                a / sm * xi.powf((2.0 - s) / 2.0) * f.powf((2.0 - m - q) / 2.0),
            )
        }
        Variant::High => (
            m / a * xi.powi(-2) * f.powf(m - 1.0),
            m / a / xi * f.powf(m - 2.0) * df,
            m / (a * a) * xi.powf(s - 2.0) * f.powf(m + q - 2.0),
        ),
    }
}

/// Recovers `(f, f')` from `(X, Y)` at `xi`.
pub fn phase_inverse(variant: Variant, e: &Exponents, xi: f64, x: f64, y: f64) -> (f64, f64) {
    let p = &e.params;
    let (m, q, s, a) = (p.m, p.q, p.sigma, e.alpha);
    match variant {
        Variant::Low => {
            let sm = m.sqrt();
            let f = (x * xi.powf((s + 2.0) / 2.0) / sm).powf(2.0 / (m - q));
            (f, y * xi.powf(s / 2.0) * f.powf((q + 2.0 - m) / 2.0) / sm)
        }
        Variant::High => {
            let f = (a * x * xi * xi / m).powf(1.0 / (m - 1.0));
            (f, a * y * xi * f.powf(2.0 - m) / m)
        }
    }
}

/// Theoretical limit of `Y` along the trajectory.
pub fn y_star(variant: Variant, e: &Exponents, xi0: f64) -> (f64, f64) {
    let p = &e.params;
    match variant {
        Variant::High => (0.0, 0.0),
        Variant::Low => {
            let zs = if p.regime() == Regime::Critical {
                e.alpha * xi0.powf((2.0 - p.sigma) / 2.0) / p.m.sqrt()
            } else {
                0.0
            };
            let r = e.beta / e.alpha * zs;
            let mq = p.m + p.q;
            ((r - (r * r + 2.0 * mq).sqrt()) / mq, zs)
        }
    }
}

pub fn phase_transform(profile: &ProfileSolution, e: &Exponents, variant: Variant, xi0: f64) -> Result<PhaseTrajectory> {
    let p = &e.params;
    let (m, q, s) = (p.m, p.q, p.sigma);
    let integrand = |xi: f64, f: f64| match variant {
        Variant::Low => f.powf((q - m) / 2.0) * xi.powf(s / 2.0) / m.sqrt(),
        Variant::High => e.alpha / m * xi / f.powf(m - 1.0),
    };
    let mut out = Vec::with_capacity(profile.samples.len());
    let mut eta = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for smp in &profile.samples {
        let f = profile.f(smp);
        if !(f > 0.0) {
            return Err(Error::DomainError(format!("f = {f} at xi = {}", smp.xi)));
        }
        let g = integrand(smp.xi, f);
        eta += match prev {
            // integrand behaves like a power of ξ near the origin
            None => {
                let k = match variant {
                    Variant::Low => s / 2.0,
                    Variant::High => 1.0,
                };
                g * smp.xi / (k + 1.0)
            }
            Some((x, gp)) => 0.5 * (g + gp) * (smp.xi - x),
        };
        prev = Some((smp.xi, g));
        let (x, y, z) = phase_point(variant, e, smp.xi, f, profile.df(smp));
        out.push(PhasePoint { xi: smp.xi, eta, x, y, z });
    }
    let (y_star_theory, z_star) = y_star(variant, e, xi0);
    Ok(PhaseTrajectory { variant, samples: out, y_star_theory, z_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeStats {
    pub count: usize,
    pub mean_y: f64,
    pub std_y: f64,
    pub max_abs_y: f64,
    pub mean_x: f64,
}

impl PhaseTrajectory {
    /// Number of samples breaking the sign pattern of the variant.
    pub fn sign_violations(&self) -> usize {
        self.samples
            .iter()
            .filter(|p| match self.variant {
                Variant::Low => !(p.x > 0.0 && p.z > 0.0 && p.y < 0.0),
                Variant::High => !(p.x >= 0.0 && p.z >= 0.0 && p.y <= 0.0),
            })
            .count()
    }

    /// Places where `X` increases by more than `rel` relative.
    pub fn x_increases(&self, rel: f64) -> usize {
        self.samples.windows(2).filter(|w| w[1].x > w[0].x * (1.0 + rel)).count()
    }

    /// Statistics over samples whose distance to `xi0` is within a factor 10 of the smallest one.
    pub fn final_decade(&self, xi0: f64) -> DecadeStats {
        let dmin = self.samples.iter().map(|p| xi0 - p.xi).fold(f64::INFINITY, f64::min);
        let sel: Vec<&PhasePoint> = self.samples.iter().filter(|p| xi0 - p.xi <= 10.0 * dmin).collect();
        let n = sel.len().max(1) as f64;
        let mean_y = sel.iter().map(|p| p.y).sum::<f64>() / n;
        let var = sel.iter().map(|p| (p.y - mean_y).powi(2)).sum::<f64>() / n;
        DecadeStats {
            count: sel.len(),
            mean_y,
            std_y: var.sqrt(),
            max_abs_y: sel.iter().map(|p| p.y.abs()).fold(0.0, f64::max),
            mean_x: sel.iter().map(|p| p.x).sum::<f64>() / n,
        }
    }
}

/// `H(ξ) = ξ^{N-1} F'(ξ) − β ξ^N f(ξ)`, interpolated linearly between samples.
pub fn h_function(profile: &ProfileSolution, e: &Exponents, xi: f64) -> Result<f64> {
    let n = e.params.n();
    let h_at = |s: &Sample| s.xi.powf(n - 1.0) * s.d_f - e.beta * s.xi.powf(n) * profile.f(s);
    let s = &profile.samples;
    let last = s[s.len() - 1].xi;
    if !(xi >= 0.0 && xi <= last) {
        return Err(Error::DomainError(format!("xi = {xi} outside [0, {last}]")));
    }
    if xi <= s[0].xi {
        return Ok(h_at(&s[0]) * xi / s[0].xi);
    }
    let i = s.partition_point(|p| p.xi < xi).min(s.len() - 1);
    let (p, q) = (&s[i - 1], &s[i]);
    let w = (xi - p.xi) / (q.xi - p.xi);
    Ok((1.0 - w) * h_at(p) + w * h_at(q))
}

/// `(−H)^{1−q} / (ξ0 − ξ)` divided by its limiting value, at each sample within `(ξ0/2, ξ0)`.
pub fn h_limit_ratios(profile: &ProfileSolution, e: &Exponents, xi0: f64) -> Vec<(f64, f64)> {
    let p = &e.params;
    let theory = (1.0 - p.q) * e.beta.powf(-p.q) * xi0.powf(p.sigma + p.n() * (1.0 - p.q) - 1.0);
    profile
        .samples
        .iter()
        .filter(|s| s.xi > 0.5 * xi0 && s.xi < xi0)
        .filter_map(|s| {
            let h = h_function(profile, e, s.xi).ok()?;
            Some((s.xi, (-h).powf(1.0 - p.q) / (xi0 - s.xi) / theory))
        })
        .collect()
}
