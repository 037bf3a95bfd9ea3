//! Task runners behind the command line: each reads a resolved config and writes its files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acceptance::{self, AcceptanceReport};
use crate::config::{Datum, Resolved, ShootSection, SimulateSection, Task};
use crate::error::{Error, Result};
use crate::io::{self, Header};
use crate::params::{Exponents, Params};
use crate::radial::{self, RadialGrid, RadialState, Solver};
use crate::shooting::{self, ShootingResult};
use crate::verify::{self, ProfileReport};

/// What a task produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub task: Task,
    pub files: Vec<PathBuf>,
    /// Lines for the terminal.
    pub summary: Vec<String>,
    /// False when a verification or acceptance check failed.
    pub passed: bool,
}

/// Contents of `shoot.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootOutput {
    pub exponents: Exponents,
    pub shooting: ShootingResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub exponents: Exponents,
    pub report: ProfileReport,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: f64,
    pub sup_u: f64,
    pub u_origin: f64,
    pub support: f64,
    /// `None` without a profile.
    pub rescaled_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub steps: usize,
    pub halvings: usize,
    pub newton_iterations: usize,
    pub eps_supp: f64,
    pub a_star: Option<f64>,
    pub xi0_star: Option<f64>,
    pub observations: Vec<Observation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub params: Params,
    pub report: Option<ProfileReport>,
    pub error: Option<String>,
}

pub fn run(resolved: &Resolved, out_dir: &Path) -> Result<Outcome> {
    run_selected(resolved, out_dir, &[])
}

/// Like [`run`]; `criteria` restricts the acceptance task to those ids.
pub fn run_selected(resolved: &Resolved, out_dir: &Path, criteria: &[u8]) -> Result<Outcome> {
    let echo = resolved.config.to_toml_string()?;
    let mut outcome = match resolved.task {
        Task::Shoot => shoot_task(resolved, out_dir)?,
        Task::VerifyProfile => verify_task(resolved, out_dir)?,
        Task::Simulate => simulate_task(resolved, out_dir)?,
        Task::Sweep => sweep_task(resolved, out_dir)?,
        Task::Acceptance => acceptance_outcome(resolved, out_dir, criteria)?,
    };
    outcome.files.push(io::write_text(&out_dir.join("config.toml"), &echo)?);
    Ok(outcome)
}

fn shoot(p: Params, section: &ShootSection) -> Result<ShootOutput> {
    let e = p.exponents();
    Ok(ShootOutput { exponents: e, shooting: shooting::solve(&e, &section.options())? })
}

fn profile_rows(out: &ShootOutput) -> Vec<Vec<f64>> {
    let prof = &out.shooting.profile;
    prof.samples.iter().map(|s| vec![s.xi, prof.f(s), prof.df(s), s.big_f, s.d_f]).collect()
}

fn shoot_task(r: &Resolved, dir: &Path) -> Result<Outcome> {
    let out = shoot(r.params, &r.config.shoot)?;
    let header = Header::new(Task::Shoot, r.params, r.config.shoot.options())?;
    let mut files = vec![io::write_json(&dir.join("shoot.json"), &header, &out)?];
    if r.config.shoot.write_profile {
        files.push(io::write_csv(&dir.join("profile.csv"), &header, &["xi", "f", "df", "F", "dF"], &profile_rows(&out))?);
    }
    let s = &out.shooting;
    let mut summary = vec![
        format!("a* = {:.12e}  bracket width {:.2e}", s.a_star, s.relative_width()),
        format!("xi0* = {:.12e}  samples {}", s.xi0_star, s.profile.samples.len()),
    ];
    if s.tail.is_none() && r.config.shoot.options().complete_tail {
        summary.push("warning: tail completion failed; xi0* is extrapolated from the forward part".into());
    }
    Ok(Outcome { task: Task::Shoot, files, summary, passed: true })
}

fn verify_passed(r: &ProfileReport) -> bool {
    r.monotone_log && r.bounds.total_violations() == 0 && r.sign_violations == 0
}

fn verify_task(r: &Resolved, dir: &Path) -> Result<Outcome> {
    let out = shoot(r.params, &r.config.shoot)?;
    let report = verify::verify_profile(&out.exponents, &out.shooting, 1e-10)?;
    let passed = verify_passed(&report);
    let header = Header::new(Task::VerifyProfile, r.params, r.config.shoot.options())?;
    let f = &report.fit;
    let summary = vec![
        format!("a* = {:.12e}  xi0* = {:.12e}", report.a_star, report.xi0_star),
        format!("interface exponent {:.6} (theory {:.6})", f.exponent_fit, f.exponent_theory),
        format!("interface amplitude {:.6e} (theory {:.6e})", f.amplitude_fit, f.amplitude_theory),
        format!("bound violations {}  phase sign violations {}", report.bounds.total_violations(), report.sign_violations),
    ];
    let mut summary = summary;
    if out.shooting.tail.is_none() {
        summary.push("warning: tail completion failed; the interface fit only sees the forward part and may be biased".into());
    }
    let doc = VerifyOutput { exponents: out.exponents, report, passed };
    let files = vec![io::write_json(&dir.join("verify.json"), &header, &doc)?];
    Ok(Outcome { task: Task::VerifyProfile, files, summary, passed })
}

fn load_profile(r: &Resolved, sim: &SimulateSection) -> Result<Option<ShootOutput>> {
    let needs = sim.rescaled_error || matches!(sim.datum, Datum::SelfSimilar { .. });
    if !needs {
        return Ok(None);
    }
    if let Some(f) = &sim.profile_file {
        let path = if f.is_absolute() { f.clone() } else { r.config.base_dir.join(f) };
        let doc: io::Document<ShootOutput> = io::read_json(&path)?;
        if doc.header.params != r.params {
            return Err(Error::config(
                "simulate.profile_file",
                format!("profile was shot for {:?}, the run uses {:?}", doc.header.params, r.params),
            ));
        }
        return Ok(Some(doc.result));
    }
    shoot(r.params, &r.config.shoot).map(Some)
}

/// Initial state of a simulation.
pub fn initial_state(p: Params, sim: &SimulateSection, grid: RadialGrid, profile: Option<&ShootOutput>) -> Result<RadialState> {
    let e = p.exponents();
    match sim.datum {
        Datum::Bump { delta, r0 } => radial::init_state(grid, p.m, 0.0, |r| if r < r0 { delta } else { 0.0 }),
        Datum::Constant { c } => radial::init_state(grid, p.m, 0.0, |_| c),
        Datum::SelfSimilar { t0 } => {
            let prof = profile.ok_or_else(|| Error::InvalidArgument("self-similar datum needs a profile".into()))?;
            radial::init_state(grid, p.m, t0, |r| radial::self_similar_value(&e, &prof.shooting.profile, sim.interp, t0, r))
        }
        Datum::CappedStationary { cap } => {
            let cap = cap.unwrap_or_else(|| radial::stationary_solution(&e, 0.5 * grid.r_max));
            radial::init_state(grid, p.m, 0.0, |r| radial::stationary_solution(&e, r).min(cap))
        }
    }
}

fn simulate_task(r: &Resolved, dir: &Path) -> Result<Outcome> {
    let p = r.params;
    let sim = r.config.simulate.as_ref().ok_or_else(|| Error::config("simulate", "section required"))?;
    let profile = load_profile(r, sim)?;
    let e = p.exponents();
    let grid = RadialGrid::new(sim.r_max, sim.n_cells)?;
    let state0 = initial_state(p, sim, grid, profile.as_ref())?;
    let eps_supp = sim.eps_supp.unwrap_or(1e-10 * state0.sup_norm());
    let solver = Solver::new(p, grid).with_newton(sim.newton).with_scheme(sim.scheme);
    let times = sim.observation_times();
    let header = Header::new(
        Task::Simulate,
        p,
        serde_json::json!({
            "r_max": sim.r_max, "n_cells": sim.n_cells, "dr": grid.dr, "dt": sim.dt_policy(),
            "scheme": sim.scheme, "newton": sim.newton, "interp": sim.interp, "datum": sim.datum,
        }),
    )?;
    let mut obs = vec![];
    let mut snaps = vec![];
    let mut failure = None;
    let summary = solver.run(state0, sim.t_end, &sim.dt_policy(), &times, &mut |s: &RadialState| {
        let err = match (&profile, sim.rescaled_error && s.t > 0.0) {
            (Some(pr), true) => match radial::rescaled_error(s, &e, &pr.shooting.profile, sim.interp) {
                Ok(v) => Some(v),
                Err(er) => {
                    failure.get_or_insert(er);
                    None
                }
            },
            _ => None,
        };
        obs.push(Observation { t: s.t, sup_u: s.sup_norm(), u_origin: s.origin_value(), support: radial::support_radius(s, eps_supp), rescaled_error: err });
        if sim.snapshots {
            snaps.push(s.clone());
        }
    })?;
    if let Some(er) = failure {
        return Err(er);
    }
    let rows: Vec<Vec<f64>> =
        obs.iter().map(|o| vec![o.t, o.sup_u, o.u_origin, o.support, o.rescaled_error.unwrap_or(f64::NAN)]).collect();
    let mut files = vec![io::write_csv(&dir.join("observations.csv"), &header, &["t", "sup_u", "u_origin", "support", "rescaled_error"], &rows)?];
    for (k, s) in snaps.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (0..grid.len()).map(|i| vec![s.t, grid.r(i), s.u[i]]).collect();
        files.push(io::write_csv(&dir.join(format!("snapshot_{k:04}.csv")), &header, &["t", "r", "u"], &rows)?);
    }
    let last = *obs.last().expect("observer runs at the end");
    let out = SimulateOutput {
        steps: summary.steps,
        halvings: summary.halvings,
        newton_iterations: summary.newton_iterations,
        eps_supp,
        a_star: profile.as_ref().map(|p| p.shooting.a_star),
        xi0_star: profile.as_ref().map(|p| p.shooting.xi0_star),
        observations: obs,
    };
    files.insert(0, io::write_json(&dir.join("simulate.json"), &header, &out)?);
    let mut lines = vec![
        format!("t = {}  steps {}  newton iterations {}  dt halvings {}", last.t, out.steps, out.newton_iterations, out.halvings),
        format!("sup u = {:.6e}  u(t,0) = {:.6e}  support radius {:.6e}", last.sup_u, last.u_origin, last.support),
    ];
    if let Some(v) = last.rescaled_error {
        lines.push(format!("rescaled distance to the self-similar solution {v:.6e}"));
    }
    Ok(Outcome { task: Task::Simulate, files, summary: lines, passed: true })
}

fn sweep_task(r: &Resolved, dir: &Path) -> Result<Outcome> {
    let points = r.config.sweep.points(r.params)?;
    let section = &r.config.sweep.shoot;
    let entries: Vec<SweepEntry> = points
        .par_iter()
        .map(|&p| {
            let go = || -> Result<ProfileReport> {
                let out = shoot(p, section)?;
                verify::verify_profile(&out.exponents, &out.shooting, 1e-10)
            };
            match go() {
                Ok(rep) => SweepEntry { params: p, report: Some(rep), error: None },
                Err(e) => SweepEntry { params: p, report: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let header = Header::new(Task::Sweep, r.params, section.options())?;
    let nan = f64::NAN;
    let rows: Vec<Vec<f64>> = entries
        .iter()
        .map(|en| {
            let p = en.params;
            let mut row = vec![p.m, p.q, p.sigma, p.dim as f64];
            row.extend(match &en.report {
                Some(rep) => vec![
                    rep.a_star,
                    rep.xi0_star,
                    rep.relative_width,
                    rep.fit.exponent_fit,
                    rep.fit.exponent_theory,
                    rep.fit.amplitude_fit,
                    rep.fit.amplitude_theory,
                ],
                None => vec![nan; 7],
            });
            row
        })
        .collect();
    let cols = ["m", "q", "sigma", "N", "a_star", "xi0_star", "relative_width", "exponent_fit", "exponent_theory", "amplitude_fit", "amplitude_theory"];
    let files = vec![io::write_json(&dir.join("sweep.json"), &header, &entries)?, io::write_csv(&dir.join("sweep.csv"), &header, &cols, &rows)?];
    let failed = entries.iter().filter(|e| e.error.is_some()).count();
    let mut summary: Vec<String> = entries
        .iter()
        .map(|en| {
            let p = en.params;
            match (&en.report, &en.error) {
                (Some(rep), _) => format!("({}, {}, {}, {}): a* = {:.10e} xi0* = {:.10e}", p.m, p.q, p.sigma, p.dim, rep.a_star, rep.xi0_star),
                (None, err) => format!("({}, {}, {}, {}): failed: {}", p.m, p.q, p.sigma, p.dim, err.as_deref().unwrap_or("?")),
            }
        })
        .collect();
    summary.push(format!("{} points, {failed} failed", entries.len()));
    if failed > 0 {
        return Err(Error::Io(summary.join("\n")));
    }
    Ok(Outcome { task: Task::Sweep, files, summary, passed: true })
}

/// Runs the acceptance suite, optionally only the criteria in `only`.
pub fn acceptance_report(r: &Resolved, only: &[u8]) -> Result<AcceptanceReport> {
    let opts = r.config.acceptance.clone();
    if only.is_empty() {
        return acceptance::run_acceptance(r.params, opts);
    }
    let seed = opts.seed;
    let ctx = acceptance::Context::prepare(r.params, opts)?;
    let criteria = only.iter().map(|&id| acceptance::run_criterion(&ctx, id)).collect::<Result<Vec<_>>>()?;
    Ok(AcceptanceReport { tool_version: env!("CARGO_PKG_VERSION").into(), params: r.params, seed, criteria })
}

pub fn acceptance_outcome(r: &Resolved, dir: &Path, only: &[u8]) -> Result<Outcome> {
    if let Some(&bad) = only.iter().find(|&&id| id == 0 || id as usize > acceptance::CRITERIA) {
        return Err(Error::InvalidArgument(format!("no criterion {bad}")));
    }
    let report = acceptance_report(r, only)?;
    let header = Header::new(Task::Acceptance, r.params, &r.config.acceptance)?;
    let files = vec![io::write_json(&dir.join("acceptance.json"), &header, &report)?];
    let mut summary: Vec<String> = report.criteria.iter().map(|c| c.line()).collect();
    let passed = report.all_passed();
    let n_pass = report.criteria.iter().filter(|c| c.passed).count();
    summary.push(format!("{n_pass}/{} criteria passed", report.criteria.len()));
    Ok(Outcome { task: Task::Acceptance, files, summary, passed })
}
