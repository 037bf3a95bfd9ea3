//! Run configuration: TOML input, named presets, validation with field paths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acceptance::AcceptanceOptions;
use crate::error::{Error, Result};
use crate::params::{shrinking_radius, Params};
use crate::radial::{DtPolicy, NewtonOptions, ProfileInterp, TimeScheme};
use crate::shooting::ShootingOptions;

/// Environment variable overriding the output root.
pub const OUTPUT_ENV: &str = "PME_ABSORB_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Shoot,
    VerifyProfile,
    Simulate,
    Sweep,
    Acceptance,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Shoot => "shoot",
            Task::VerifyProfile => "verify-profile",
            Task::Simulate => "simulate",
            Task::Sweep => "sweep",
            Task::Acceptance => "acceptance",
        }
    }
}

/// Named parameter sets: `(name, params, note)`.
pub const PARAM_PRESETS: &[(&str, Params, &str)] = &[
    ("default", Params { m: 2.0, q: 0.5, sigma: 2.0, dim: 1 }, "m+q > 2"),
    ("high-sum-3d", Params { m: 2.0, q: 0.5, sigma: 2.5, dim: 3 }, "m+q > 2, N = 3, non-integer sigma"),
    ("low-sum", Params { m: 1.2, q: 0.5, sigma: 6.0, dim: 1 }, "m+q < 2"),
    ("low-sum-2d", Params { m: 1.4, q: 0.3, sigma: 4.5, dim: 2 }, "m+q < 2, N = 2"),
    ("critical", Params { m: 1.5, q: 0.5, sigma: 4.0, dim: 3 }, "m+q = 2"),
    ("critical-1d", Params { m: 1.3, q: 0.7, sigma: 8.0, dim: 1 }, "m+q = 2, corrected amplitude"),
];

pub fn param_preset(name: &str) -> Option<Params> {
    PARAM_PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

/// `[params]`: a preset name, explicit values, or a preset with some values replaced.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, rename = "N", alias = "dim", skip_serializing_if = "Option::is_none")]
    pub dim: Option<u32>,
}

impl ParamsInput {
    pub fn resolve(&self) -> Result<Params> {
        let base = match &self.preset {
            Some(name) => Some(param_preset(name).ok_or_else(|| {
                let names: Vec<&str> = PARAM_PRESETS.iter().map(|p| p.0).collect();
                Error::config("params.preset", format!("unknown preset `{name}` (known: {})", names.join(", ")))
            })?),
            None => None,
        };
        let pick = |v: Option<f64>, b: Option<f64>, key: &str| {
            v.or(b).ok_or_else(|| Error::config(format!("params.{key}"), "missing (give it or name a preset)"))
        };
        let p = Params {
            m: pick(self.m, base.map(|b| b.m), "m")?,
            q: pick(self.q, base.map(|b| b.q), "q")?,
            sigma: pick(self.sigma, base.map(|b| b.sigma), "sigma")?,
            dim: self.dim.or(base.map(|b| b.dim)).unwrap_or(1),
        };
        p.validate().map_err(|e| match e {
            Error::OutOfRange(msg) => {
                let key = ["sigma", "m", "q", "N"].into_iter().find(|k| msg.starts_with(k)).unwrap_or("params");
                let path = if key == "params" { "params".to_string() } else { format!("params.{key}") };
                Error::config(path, format!("{msg}; admissible range: m > 1, 0 < q < 1, sigma > 2(1-q)/(m-1), N >= 1"))
            }
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootSection {
    /// Tight tolerances; otherwise the library defaults.
    pub precise: bool,
    pub bracket_tol: Option<f64>,
    pub a_seed: Option<f64>,
    pub complete_tail: Option<bool>,
    /// Write every sample of the profile.
    pub write_profile: bool,
}

impl Default for ShootSection {
    fn default() -> Self {
        ShootSection { precise: true, bracket_tol: None, a_seed: None, complete_tail: None, write_profile: true }
    }
}

impl ShootSection {
    pub fn options(&self) -> ShootingOptions {
        let mut o = if self.precise { ShootingOptions::precise() } else { ShootingOptions::default() };
        if let Some(v) = self.bracket_tol {
            o.bracket_tol = v;
        }
        if let Some(v) = self.a_seed {
            o.a_seed = v;
        }
        if let Some(v) = self.complete_tail {
            o.complete_tail = v;
        }
        o
    }

    fn validate(&self) -> Result<()> {
        if let Some(v) = self.bracket_tol {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config("shoot.bracket_tol", format!("must lie in (0, 1), got {v}")));
            }
        }
        if let Some(v) = self.a_seed {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config("shoot.a_seed", format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Initial datum of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Datum {
    /// `delta · 1_{r < r0}`.
    Bump {
        #[serde(default = "one")]
        delta: f64,
        #[serde(default = "one")]
        r0: f64,
    },
    /// `c` on the whole grid (zero at `r_max`).
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// The self-similar solution at time `t0`; the run starts there.
    #[serde(rename = "selfsimilar")]
    SelfSimilar {
        #[serde(default = "one")]
        t0: f64,
    },
    /// `min(U, cap)` with `U` the stationary solution; `cap` defaults to `U(r_max / 2)`.
    CappedStationary { cap: Option<f64> },
}

fn one() -> f64 {
    1.0
}

impl Datum {
    pub fn start_time(&self) -> f64 {
        match *self {
            Datum::SelfSimilar { t0 } => t0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub r_max: f64,
    pub n_cells: usize,
    pub t_end: f64,
    pub datum: Datum,
    /// Defaults to a fixed step equal to `Δr`.
    #[serde(default)]
    pub dt: Option<DtPolicy>,
    #[serde(default)]
    pub scheme: TimeScheme,
    #[serde(default)]
    pub newton: NewtonOptions,
    /// Explicit observation times.
    #[serde(default)]
    pub log_times: Vec<f64>,
    /// Observation spacing added to `log_times`.
    #[serde(default)]
    pub log_every: Option<f64>,
    /// Also write `u` on the grid at every observation.
    #[serde(default)]
    pub snapshots: bool,
    /// Support threshold; defaults to `1e-10 · max u0`.
    #[serde(default)]
    pub eps_supp: Option<f64>,
    /// Compare with the self-similar solution (needs a shot profile).
    #[serde(default = "yes")]
    pub rescaled_error: bool,
    #[serde(default)]
    pub interp: ProfileInterp,
    /// `shoot.json` from an earlier run, instead of shooting again.
    #[serde(default)]
    pub profile_file: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

impl SimulateSection {
    pub fn dt_policy(&self) -> DtPolicy {
        self.dt.unwrap_or(DtPolicy::Fixed { dt: self.r_max / self.n_cells as f64 })
    }

    /// Observation times inside `(t_start, t_end]`, sorted.
    pub fn observation_times(&self) -> Vec<f64> {
        let t0 = self.datum.start_time();
        let mut ts: Vec<f64> = self.log_times.iter().copied().filter(|&t| t > t0 && t <= self.t_end).collect();
        if let Some(h) = self.log_every {
            let mut k = 1;
            loop {
                let t = t0 + h * k as f64;
                if t > self.t_end * (1.0 + 1e-12) {
                    break;
                }
                ts.push(t.min(self.t_end));
                k += 1;
            }
        }
        ts.push(self.t_end);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        ts
    }

    fn validate(&self, base: &Path) -> Result<()> {
        let s = "simulate";
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::config(format!("{s}.r_max"), format!("must be positive, got {}", self.r_max)));
        }
        if self.n_cells < 2 {
            return Err(Error::config(format!("{s}.n_cells"), "need at least 2 cells"));
        }
        let t0 = self.datum.start_time();
        if !(self.t_end > t0 && self.t_end.is_finite()) {
            return Err(Error::config(format!("{s}.t_end"), format!("must exceed the start time {t0}, got {}", self.t_end)));
        }
        let pol = self.dt_policy();
        let ok = match pol {
            DtPolicy::Fixed { dt } => dt > 0.0 && dt.is_finite(),
            DtPolicy::Proportional { fraction, dt_min, dt_max } => fraction > 0.0 && dt_min > 0.0 && dt_max >= dt_min,
        };
        if !ok {
            return Err(Error::config(format!("{s}.dt"), format!("invalid policy {pol:?}")));
        }
        if let Some(h) = self.log_every {
            if !(h > 0.0) {
                return Err(Error::config(format!("{s}.log_every"), format!("must be positive, got {h}")));
            }
        }
        if let Some(e) = self.eps_supp {
            if !(e > 0.0) {
                return Err(Error::config(format!("{s}.eps_supp"), format!("must be positive, got {e}")));
            }
        }
        let pos = |v: f64, k: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{s}.datum.{k}"), format!("must be positive, got {v}")))
            }
        };
        match self.datum {
            Datum::Bump { delta, r0 } => {
                pos(delta, "delta")?;
                pos(r0, "r0")?;
            }
            Datum::Constant { c } => pos(c, "c")?,
            Datum::SelfSimilar { t0 } => pos(t0, "t0")?,
            Datum::CappedStationary { cap } => {
                if let Some(c) = cap {
                    pos(c, "cap")?;
                }
            }
        }
        if let Some(f) = &self.profile_file {
            let p = resolve(base, f);
            if !p.is_file() {
                return Err(Error::config(format!("{s}.profile_file"), format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

/// `[sweep]`: shoot a list of parameter sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Named presets to include.
    pub presets: Vec<String>,
    /// Values of σ, each combined with `[params]`.
    pub sigma: Vec<f64>,
    /// Explicit parameter sets.
    pub points: Vec<Params>,
    pub shoot: ShootSection,
}

impl SweepSection {
    pub fn points(&self, base: Params) -> Result<Vec<Params>> {
        let mut out = vec![];
        for (i, name) in self.presets.iter().enumerate() {
            out.push(param_preset(name).ok_or_else(|| Error::config(format!("sweep.presets[{i}]"), format!("unknown preset `{name}`")))?);
        }
        for (i, &s) in self.sigma.iter().enumerate() {
            let p = Params { sigma: s, ..base };
            out.push(p.validate().map_err(|e| Error::config(format!("sweep.sigma[{i}]"), e.to_string()))?);
        }
        for (i, p) in self.points.iter().enumerate() {
            out.push(p.validate().map_err(|e| Error::config(format!("sweep.points[{i}]"), e.to_string()))?);
        }
        if out.is_empty() {
            out.push(base);
        }
        Ok(out)
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default)]
    pub params: ParamsInput,
    /// Relative paths are taken from the output root.
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub shoot: ShootSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub acceptance: AcceptanceOptions,
    /// Directory relative paths inside the file refer to; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task: None,
            params: ParamsInput { preset: Some("default".into()), ..Default::default() },
            output_dir: default_output(),
            seed: None,
            shoot: ShootSection::default(),
            simulate: None,
            sweep: SweepSection::default(),
            acceptance: AcceptanceOptions::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// A validated configuration with its resolved parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    pub task: Task,
    pub params: Params,
    /// Non-fatal remarks, e.g. a domain that truncates the datum.
    pub warnings: Vec<String>,
}

impl RunConfig {
    /// Parses TOML text; errors carry the path of the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().to_string();
            Error::config(if path == "." { "<root>".to_string() } else { path }, msg)
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        let mut c = Self::from_toml_str(&text)?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(c)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Io(format!("cannot serialise config: {e}")))
    }

    /// Validates against the task, which comes from the command when the file leaves it out.
    pub fn resolve(mut self, command: Option<Task>) -> Result<Resolved> {
        let task = match (self.task, command) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::config("task", format!("file says `{}` but the command is `{}`", a.name(), b.name())))
            }
            (a, b) => a.or(b).ok_or_else(|| Error::config("task", "no task given"))?,
        };
        self.task = Some(task);
        let params = self.params.resolve()?;
        self.shoot.validate()?;
        self.sweep.shoot.validate()?;
        let mut warnings = vec![];
        match task {
            Task::Simulate => {
                let sim = self.simulate.as_ref().ok_or_else(|| Error::config("simulate", "section required for the simulate task"))?;
                sim.validate(&self.base_dir)?;
                warnings.extend(domain_warnings(sim, &params));
            }
            Task::Sweep => {
                self.sweep.points(params)?;
            }
            Task::Acceptance => {
                if let Some(s) = self.seed {
                    self.acceptance.seed = s;
                }
                for (i, p) in self.acceptance.presets.iter().enumerate() {
                    p.validate().map_err(|e| Error::config(format!("acceptance.presets[{i}]"), e.to_string()))?;
                }
                if self.acceptance.presets.len() < 3 {
                    return Err(Error::config("acceptance.presets", "need at least three presets"));
                }
            }
            Task::Shoot | Task::VerifyProfile => {}
        }
        Ok(Resolved { config: self, task, params, warnings })
    }

    /// Output directory: `root/output_dir`, where the root is the environment override or
    /// the current directory. An explicit `cli_out` replaces `output_dir`.
    pub fn output_path(&self, cli_out: Option<&Path>, env_root: Option<&Path>) -> PathBuf {
        let dir = cli_out.unwrap_or(&self.output_dir);
        match env_root {
            Some(root) if !dir.is_absolute() => root.join(dir),
            _ => dir.to_path_buf(),
        }
    }
}

fn domain_warnings(sim: &SimulateSection, p: &Params) -> Vec<String> {
    let mut w = vec![];
    let support = match sim.datum {
        Datum::Bump { r0, .. } => Some(r0),
        Datum::Constant { .. } | Datum::CappedStationary { .. } => None,
        Datum::SelfSimilar { .. } => None,
    };
    if let Some(s) = support {
        if s >= sim.r_max {
            w.push(format!("datum support {s} reaches r_max = {}; the Dirichlet condition truncates it", sim.r_max));
        }
    }
    if let Datum::Constant { c } = sim.datum {
        let t = sim.observation_times()[0];
        if let Ok(r) = shrinking_radius(p, c, t) {
            if sim.r_max < 2.0 * r {
                w.push(format!("r_max = {} is below 2R(t) = {} at the first observation t = {t}", sim.r_max, 2.0 * r));
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml_str("task = \"shoot\"\n[params]\nm = 2.0\nq = 0.5\nsigma = 2.0\ndim = 1\n").unwrap();
        let r = c.resolve(None).unwrap();
        assert_eq!(r.task, Task::Shoot);
        assert_eq!(r.params, Params::new(2.0, 0.5, 2.0, 1).unwrap());
        assert!(r.config.shoot.precise);
        assert_eq!(r.config.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn small_sigma_cites_range() {
        let c = RunConfig::from_toml_str("task = \"shoot\"\n[params]\nm = 2.0\nq = 0.5\nsigma = 0.9\n").unwrap();
        match c.resolve(None) {
            Err(Error::ConfigError { path, message }) => {
                assert_eq!(path, "params.sigma");
                assert!(message.contains("2(1-q)/(m-1)"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        for (text, key) in [
            ("task = \"shoot\"\nbogus = 1\n", "bogus"),
            ("[params]\npreset = \"default\"\nfoo = 3\n", "foo"),
            ("[simulate]\nr_max = 1.0\nn_cells = 10\nt_end = 1.0\ndatum = { kind = \"bump\", width = 2 }\n", "width"),
        ] {
            match RunConfig::from_toml_str(text) {
                Err(Error::ConfigError { message, .. }) => assert!(message.contains(key), "{message}"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn nested_error_path() {
        let e = RunConfig::from_toml_str("[simulate]\nr_max = \"far\"\nn_cells = 10\nt_end = 1.0\ndatum = { kind = \"constant\" }\n").unwrap_err();
        match e {
            Error::ConfigError { path, .. } => assert_eq!(path, "simulate.r_max"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn presets_cover_all_regimes() {
        use crate::params::Regime;
        let regimes: Vec<Regime> = PARAM_PRESETS.iter().map(|p| p.1.validate().unwrap().regime()).collect();
        for r in [Regime::HighSum, Regime::LowSum, Regime::Critical] {
            assert!(regimes.contains(&r));
        }
        let c = RunConfig::from_toml_str("[params]\npreset = \"critical\"\nN = 1\n").unwrap().resolve(Some(Task::Shoot)).unwrap();
        assert_eq!(c.params.dim, 1);
        assert_eq!(c.params.m, 1.5);
        assert!(RunConfig::from_toml_str("[params]\npreset = \"nope\"\n").unwrap().resolve(Some(Task::Shoot)).is_err());
    }

    #[test]
    fn task_mismatch_and_missing_section() {
        let c = RunConfig::from_toml_str("task = \"sweep\"\n").unwrap();
        assert!(matches!(c.clone().resolve(Some(Task::Shoot)), Err(Error::ConfigError { .. })));
        assert!(matches!(RunConfig::default().resolve(Some(Task::Simulate)), Err(Error::ConfigError { path, .. }) if path == "simulate"));
    }

    #[test]
    fn observation_times_merge() {
        let c = RunConfig::from_toml_str(
            "[simulate]\nr_max = 1.0\nn_cells = 10\nt_end = 1.0\nlog_times = [0.5, 0.25, 3.0]\nlog_every = 0.25\ndatum = { kind = \"constant\" }\n",
        )
        .unwrap();
        assert_eq!(c.simulate.unwrap().observation_times(), vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::from_toml_str(
            "task = \"simulate\"\nseed = 4\n[params]\npreset = \"low-sum\"\n[simulate]\nr_max = 3.0\nn_cells = 64\nt_end = 2.0\ndatum = { kind = \"capped-stationary\" }\ndt = { kind = \"proportional\", fraction = 0.01, dt_min = 1e-6, dt_max = 0.1 }\n",
        )
        .unwrap();
        let back = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn output_root_override() {
        let c = RunConfig::default();
        assert_eq!(c.output_path(None, None), PathBuf::from("out"));
        assert_eq!(c.output_path(None, Some(Path::new("/tmp/r"))), PathBuf::from("/tmp/r/out"));
        assert_eq!(c.output_path(Some(Path::new("x")), Some(Path::new("/tmp/r"))), PathBuf::from("/tmp/r/x"));
        assert_eq!(c.output_path(Some(Path::new("/abs")), Some(Path::new("/tmp/r"))), PathBuf::from("/abs"));
    }
}
