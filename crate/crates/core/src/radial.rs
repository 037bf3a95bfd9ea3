//! Radially symmetric solver for `u_t = Δu^m − |x|^σ u^q` on `[0, r_max]`.
//!
//! Backward Euler in `v = u^m`: each step solves
//! `v^{1/m} − dt Δ_r v + dt r^σ v^{q/m} = u_old` by damped Newton with a tridiagonal Jacobian.
//! Zero flux at the origin, `u = 0` at `r_max`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Exponents, Params};
use crate::profile::ProfileSolution;
use crate::tridiag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_cells: usize,
    pub dr: f64,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_cells: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) || n_cells == 0 {
            return Err(Error::InvalidArgument(format!("grid needs r_max > 0 and n_cells > 0, got {r_max}, {n_cells}")));
        }
        Ok(RadialGrid { r_max, n_cells, dr: r_max / n_cells as f64 })
    }

    /// Number of nodes, `n_cells + 1`.
    pub fn len(&self) -> usize {
        self.n_cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.r(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub grid: RadialGrid,
    pub t: f64,
    pub u: Vec<f64>,
    /// Cached `u^m`.
    pub v: Vec<f64>,
}

impl RadialState {
    pub fn sup_norm(&self) -> f64 {
        self.u.iter().fold(0.0, |a: f64, &b| a.max(b))
    }

    pub fn origin_value(&self) -> f64 {
        self.u[0]
    }

    fn from_v(grid: RadialGrid, t: f64, v: Vec<f64>, m: f64) -> Self {
        let u = v.iter().map(|&x| x.powf(1.0 / m)).collect();
        RadialState { grid, t, u, v }
    }
}

/// Samples `u0` at the nodes. The node at `r_max` is set to zero (boundary condition).
pub fn init_state(grid: RadialGrid, m: f64, t0: f64, u0: impl Fn(f64) -> f64) -> Result<RadialState> {
    let mut u = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let r = grid.r(i);
        let x = u0(r);
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::NegativeData { r, value: x });
        }
        u.push(x);
    }
    u[grid.n_cells] = 0.0;
    let v = u.iter().map(|&x: &f64| x.powf(m)).collect();
    Ok(RadialState { grid, t: t0, u, v })
}

/// Time step selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// `dt = clamp(fraction · t, dt_min, dt_max)`.
    Proportional { fraction: f64, dt_min: f64, dt_max: f64 },
}

impl DtPolicy {
    pub fn dt(&self, t: f64) -> f64 {
        match *self {
            DtPolicy::Fixed { dt } => dt,
            DtPolicy::Proportional { fraction, dt_min, dt_max } => (fraction * t).clamp(dt_min, dt_max),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DtPolicy::Fixed { dt } => dt > 0.0 && dt.is_finite(),
            DtPolicy::Proportional { fraction, dt_min, dt_max } => fraction > 0.0 && dt_min > 0.0 && dt_max >= dt_min,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid time step policy {self:?}")))
        }
    }
}

/// Time discretisation used by [`Solver::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    BackwardEuler,
    /// Variable-step BDF2. Falls back to a backward Euler step when there is no history
    /// or the step ratio exceeds 2. The comparison principle is not guaranteed.
    Bdf2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonOptions {
    /// Tolerance on the update and the scaled residual, relative to `max u_old`; `eps` is added.
    pub tol: f64,
    pub max_iter: usize,
    /// Floor on `u` inside the Jacobian of `v^{1/m}` and `v^{q/m}`.
    pub eps: f64,
    /// Times `dt` may be halved after a Newton failure.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-13, max_iter: 100, eps: 1e-14, max_halvings: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub state: RadialState,
    pub steps: usize,
    pub halvings: usize,
    pub newton_iterations: usize,
}

/// Discrete operator on a fixed grid.
#[derive(Debug, Clone)]
pub struct Solver {
    pub params: Params,
    pub grid: RadialGrid,
    /// Multiplies the absorption term; 1 for the actual equation.
    pub absorption: f64,
    pub newton: NewtonOptions,
    pub scheme: TimeScheme,
    weight: Vec<f64>,
    lap_lo: Vec<f64>,
    lap_up: Vec<f64>,
}

impl Solver {
    pub fn new(params: Params, grid: RadialGrid) -> Self {
        let n = grid.len();
        let h2 = grid.dr * grid.dr;
        let dim = params.n();
        let mut lap_lo = vec![0.0; n];
        let mut lap_up = vec![0.0; n];
        lap_up[0] = 2.0 * dim / h2;
        for i in 1..n {
            let fi = i as f64;
            lap_lo[i] = ((fi - 0.5) / fi).powf(dim - 1.0) / h2;
            lap_up[i] = ((fi + 0.5) / fi).powf(dim - 1.0) / h2;
        }
        let weight = (0..n).map(|i| grid.r(i).powf(params.sigma)).collect();
        Solver { params, grid, absorption: 1.0, newton: NewtonOptions::default(), scheme: TimeScheme::default(), weight, lap_lo, lap_up }
    }

    pub fn with_absorption(mut self, k: f64) -> Self {
        self.absorption = k;
        self
    }

    pub fn with_newton(mut self, o: NewtonOptions) -> Self {
        self.newton = o;
        self
    }

    pub fn with_scheme(mut self, s: TimeScheme) -> Self {
        self.scheme = s;
        self
    }

    /// `(Δ_r v)_i` for `i < n_cells`; `v` beyond the last node is zero.
    pub fn laplacian(&self, v: &[f64], i: usize) -> f64 {
        let up = if i + 1 < v.len() { v[i + 1] } else { 0.0 };
        let lo = if i > 0 { v[i - 1] } else { 0.0 };
        self.lap_lo[i] * (lo - v[i]) + self.lap_up[i] * (up - v[i])
    }

    /// Writes the residual into `out` and returns its largest entry divided by the
    /// diagonal of the Jacobian in `u` units, an estimate of the error in `u`.
    fn residual(&self, v: &[f64], u_old: &[f64], dt: f64, out: &mut [f64]) -> f64 {
        let Params { m, q, .. } = self.params;
        let nlast = self.grid.n_cells;
        let eps = self.newton.eps;
        let mut worst: f64 = 0.0;
        for i in 0..nlast {
            let u = v[i].powf(1.0 / m);
            let g = u + dt * self.absorption * self.weight[i] * v[i].powf(q / m) - dt * self.laplacian(v, i) - u_old[i];
            out[i] = g;
            let uf = u.max(eps);
            let d = 1.0
                + dt * self.absorption * self.weight[i] * q * uf.powf(q - 1.0)
                + dt * (self.lap_lo[i] + self.lap_up[i]) * m * uf.powf(m - 1.0);
            worst = worst.max(g.abs() / d);
        }
        out[nlast] = 0.0;
        worst
    }

    /// One backward Euler step of size `dt`; also returns the Newton iteration count.
    ///
    /// The residual is concave in `v` with an M-matrix Jacobian, so plain Newton approaches
    /// the root from below once an iterate lies below it; no line search is used. An update
    /// that would make `v_i` negative shrinks it instead.
    pub fn step_implicit(&self, state: &RadialState, dt: f64) -> Result<(RadialState, usize)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        self.solve_stage(state, &state.u, dt, dt)
    }

    /// One variable-step BDF2 step from `state` with `u_prev` taken `dt_prev` earlier.
    pub fn step_bdf2(&self, state: &RadialState, u_prev: &[f64], dt_prev: f64, dt: f64) -> Result<(RadialState, usize)> {
        if !(dt > 0.0 && dt.is_finite() && dt_prev > 0.0 && dt_prev.is_finite()) {
            return Err(Error::InvalidArgument(format!("steps must be positive, got {dt_prev}, {dt}")));
        }
        if u_prev.len() != state.u.len() {
            return Err(Error::InvalidArgument("history has the wrong length".into()));
        }
        let w = dt / dt_prev;
        let c0 = (1.0 + 2.0 * w) / (1.0 + w);
        let c2 = w * w / (1.0 + w);
        // extrapolated data can dip below zero at the front
        let b: Vec<f64> = state.u.iter().zip(u_prev).map(|(&u, &up)| (((1.0 + w) * u - c2 * up) / c0).max(0.0)).collect();
        self.solve_stage(state, &b, dt / c0, dt)
    }

    /// Solves `u + h (w u^q - Δ v) = b` for the state at `state.t + dt`.
    fn solve_stage(&self, state: &RadialState, b: &[f64], h: f64, dt: f64) -> Result<(RadialState, usize)> {
        let Params { m, q, .. } = self.params;
        let n = self.grid.len();
        let nlast = self.grid.n_cells;
        let o = &self.newton;
        // nothing below the Jacobian floor is resolved
        let tol = o.tol * state.sup_norm() + o.eps;
        let v_floor = o.eps.powf(m);
        let mut v = state.v.clone();
        v[nlast] = 0.0;
        let mut g = vec![0.0; n];
        let (mut lo, mut di, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut step = vec![0.0; n];
        let mut work = vec![0.0; n];
        let mut merit = f64::INFINITY;
        for it in 0..o.max_iter {
            merit = self.residual(&v, b, h, &mut g);
            if !merit.is_finite() {
                break;
            }
            for i in 0..nlast {
                let vf = v[i].max(v_floor);
                lo[i] = -h * self.lap_lo[i];
                up[i] = -h * self.lap_up[i];
                di[i] = vf.powf(1.0 / m - 1.0) / m
                    + h * self.absorption * self.weight[i] * (q / m) * vf.powf(q / m - 1.0)
                    + h * (self.lap_lo[i] + self.lap_up[i]);
                step[i] = -g[i];
            }
            // Dirichlet row
            lo[nlast] = 0.0;
            up[nlast] = 0.0;
            di[nlast] = 1.0;
            step[nlast] = 0.0;
            tridiag::solve_in_place(&lo, &di, &up, &mut step, &mut work)?;
            let mut change: f64 = 0.0;
            for i in 0..nlast {
                let old = v[i];
                let new = old + step[i];
                v[i] = if new >= 0.0 { new } else { 0.01 * old };
                change = change.max((v[i].powf(1.0 / m) - old.powf(1.0 / m)).abs());
            }
            if change <= tol && merit <= tol {
                return Ok((RadialState::from_v(self.grid, state.t + dt, v, m), it + 1));
            }
        }
        Err(Error::NewtonDiverged { t: state.t + dt, iterations: o.max_iter, residual: merit })
    }

    /// Advances to `t_end`, landing exactly on every time in `log_times` (and on `t_end`)
    /// and calling `observer` there as well as on the initial state.
    pub fn run(
        &self,
        state0: RadialState,
        t_end: f64,
        policy: &DtPolicy,
        log_times: &[f64],
        observer: &mut dyn FnMut(&RadialState),
    ) -> Result<RunSummary> {
        policy.validate()?;
        if !(t_end > state0.t) {
            return Err(Error::InvalidArgument(format!("t_end = {t_end} must exceed the start time {}", state0.t)));
        }
        let mut marks: Vec<f64> = log_times.iter().copied().filter(|&t| t > state0.t && t < t_end).collect();
        marks.push(t_end);
        marks.sort_by(f64::total_cmp);
        marks.dedup();
        let mut state = state0;
        observer(&state);
        let (mut steps, mut halvings, mut iters) = (0, 0, 0);
        let mut history: Option<(Vec<f64>, f64)> = None;
        for &mark in &marks {
            while state.t < mark {
                let remaining = mark - state.t;
                let mut dt = policy.dt(state.t);
                // avoid a sliver step before the mark
                if dt >= remaining || remaining - dt < 1e-9 * mark {
                    dt = remaining;
                }
                let mut tries = 0;
                let (next, k) = loop {
                    let attempt = match (&history, self.scheme) {
                        (Some((u_prev, dt_prev)), TimeScheme::Bdf2) if dt <= 2.0 * dt_prev => {
                            self.step_bdf2(&state, u_prev, *dt_prev, dt)
                        }
                        _ => self.step_implicit(&state, dt),
                    };
                    match attempt {
                        Ok(r) => break r,
                        Err(e @ Error::NewtonDiverged { .. }) => {
                            tries += 1;
                            if tries > self.newton.max_halvings {
                                return Err(e);
                            }
                            halvings += 1;
                            dt *= 0.5;
                        }
                        Err(e) => return Err(e),
                    }
                };
                steps += 1;
                iters += k;
                if self.scheme == TimeScheme::Bdf2 {
                    history = Some((std::mem::take(&mut state.u), dt));
                }
                state = next;
                if (mark - state.t).abs() <= 1e-12 * mark.abs().max(1.0) {
                    state.t = mark;
                }
            }
            observer(&state);
        }
        Ok(RunSummary { state, steps, halvings, newton_iterations: iters })
    }
}

/// Largest node radius with `u > eps_supp`, or 0.
pub fn support_radius(state: &RadialState, eps_supp: f64) -> f64 {
    state.u.iter().rposition(|&x| x > eps_supp).map_or(0.0, |i| state.grid.r(i))
}

/// How the profile is evaluated between its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileInterp {
    #[default]
    Linear,
    /// Cubic Hermite on `F` using the stored `F'`.
    Hermite,
}

/// Self-similar solution `t^{-α} f*(r t^β)` at a node radius.
pub fn self_similar_value(e: &Exponents, profile: &ProfileSolution, interp: ProfileInterp, t: f64, r: f64) -> f64 {
    let xi = r * t.powf(e.beta);
    let f = match interp {
        ProfileInterp::Linear => profile.f_at(xi),
        ProfileInterp::Hermite => profile.f_hermite(xi),
    };
    t.powf(-e.alpha) * f
}

/// `t^α max_i |u_i − t^{-α} f*(r_i t^β)|`, with `f*` extended by zero beyond its interface.
pub fn rescaled_error(state: &RadialState, e: &Exponents, profile: &ProfileSolution, interp: ProfileInterp) -> Result<f64> {
    if !(state.t > 0.0) {
        return Err(Error::DomainError(format!("rescaled error needs t > 0, got {}", state.t)));
    }
    let t = state.t;
    let worst = state
        .u
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - self_similar_value(e, profile, interp, t, state.grid.r(i))).abs())
        .fold(0.0, f64::max);
    Ok(t.powf(e.alpha) * worst)
}

/// Smallest shift `τ∞ > 1` such that the self-similar solution started at `τ∞` lies below
/// `delta · 1_{r < r0}`; then `u(t, 0) ≥ (τ∞ + t)^{-α} a*`.
pub fn lower_barrier_shift(e: &Exponents, a_star: f64, xi0: f64, delta: f64, r0: f64) -> Result<f64> {
    if !(delta > 0.0 && r0 > 0.0) {
        return Err(Error::InvalidArgument("bump height and radius must be positive".into()));
    }
    let by_support = (xi0 / r0).powf(1.0 / e.beta);
    let by_height = (a_star / delta).powf(1.0 / e.alpha);
    Ok(by_support.max(by_height).max(1.0) * (1.0 + 1e-9))
}

/// Stationary solution `U(r) = A r^{(σ+2)/(m−q)}`.
pub fn stationary_solution(e: &Exponents, r: f64) -> f64 {
    let p = e.params;
    e.a_stat * r.powf((p.sigma + 2.0) / (p.m - p.q))
}

/// Max over nodes with `r ≥ r_from` of `|Δ_r U^m − r^σ U^q| / r^{(σm+2q)/(m−q)}`.
/// The continuation of `U` is used past `r_max`.
pub fn stationary_residual(e: &Exponents, grid: RadialGrid, r_from: f64) -> f64 {
    let p = e.params;
    let solver = Solver::new(p, grid);
    let vm: Vec<f64> = (0..grid.len() + 1).map(|i| stationary_solution(e, grid.r(i)).powf(p.m)).collect();
    let expo = (p.sigma * p.m + 2.0 * p.q) / (p.m - p.q);
    let mut worst: f64 = 0.0;
    for i in 1..grid.len() {
        let r = grid.r(i);
        if r < r_from {
            continue;
        }
        let lap = solver.lap_lo[i] * (vm[i - 1] - vm[i]) + solver.lap_up[i] * (vm[i + 1] - vm[i]);
        let res = lap - r.powf(p.sigma) * stationary_solution(e, r).powf(p.q);
        worst = worst.max(res.abs() / r.powf(expo));
    }
    worst
}

/// One-variable comparison function `W_R(t, x) = (Y_R(x) + Z_R(t))^{1/m}` on `(0, T) × (R, 2R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Supersolution {
    pub params: Params,
    pub r: f64,
    pub t: f64,
    pub a_r: f64,
    pub b_r: f64,
}

impl Supersolution {
    /// Equality choice of `A(R)`, `B(R)`.
    pub fn new(params: Params, r: f64, t: f64) -> Self {
        let Params { m, q, sigma, .. } = params;
        let a_r = (m - q).powi(2) * r.powf(sigma) / (4.0 * m * (m + q));
        let b_r = (1.0 - q) * r.powf(sigma) / 2.0;
        Supersolution { params, r, t, a_r, b_r }
    }

    /// `W_R(0) ≥ sup u0` and `W_R ≥ sup u0` on `x = R`.
    pub fn dominates(&self, sup_u0: f64) -> bool {
        let Params { m, q, .. } = self.params;
        self.b_r >= sup_u0.powf(1.0 - q) / self.t && self.a_r * self.r * self.r >= sup_u0.powf(m - q)
    }

    fn y(&self, x: f64) -> f64 {
        let Params { m, q, .. } = self.params;
        (self.a_r * (x - 2.0 * self.r).powi(2)).powf(m / (m - q))
    }

    fn z(&self, t: f64) -> f64 {
        let Params { m, q, .. } = self.params;
        (self.b_r * (self.t - t).max(0.0)).powf(m / (1.0 - q))
    }

    pub fn w(&self, t: f64, x: f64) -> f64 {
        (self.y(x) + self.z(t)).powf(1.0 / self.params.m)
    }

    /// `∂t W − ∂²_x W^m + x^σ W^q`, from closed-form derivatives.
    pub fn operator(&self, t: f64, x: f64) -> f64 {
        let Params { m, q, sigma, .. } = self.params;
        let s = self.y(x) + self.z(t);
        let dt_w = if s > 0.0 {
            -self.b_r.powf(m / (1.0 - q)) / (1.0 - q) * (self.t - t).max(0.0).powf((m + q - 1.0) / (1.0 - q))
                / s.powf((m - 1.0) / m)
        } else {
            0.0
        };
        let dxx = 2.0 * m * (m + q) / (m - q).powi(2)
            * self.a_r.powf(m / (m - q))
            * (x - 2.0 * self.r).abs().powf(2.0 * q / (m - q));
        dt_w - dxx + x.powf(sigma) * s.powf(q / m)
    }

    /// Minimum of the operator over a uniform `(nt+1) × (nx+1)` grid on `[0, T] × [R, 2R]`.
    pub fn min_residual(&self, nt: usize, nx: usize) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..=nt {
            let t = self.t * i as f64 / nt.max(1) as f64;
            for j in 0..=nx {
                let x = self.r * (1.0 + j as f64 / nx.max(1) as f64);
                worst = worst.min(self.operator(t, x));
            }
        }
        worst
    }
}

/// `min L W_R` for `R = R(T)` and the equality choice of `A(R)`, `B(R)`.
pub fn supersolution_residual(params: &Params, sup_u0: f64, t: f64, nt: usize, nx: usize) -> Result<f64> {
    let r = crate::params::shrinking_radius(params, sup_u0, t)?;
    Ok(Supersolution::new(*params, r, t).min_residual(nt, nx))
}
