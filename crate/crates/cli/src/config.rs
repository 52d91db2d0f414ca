//! Run configuration: a sectioned TOML file, checked against a fixed schema.
//!
//! Every violation is collected before reporting. Environment variables of the form
//! `MHD_<SECTION>__<KEY>` (and `MHD_EXPERIMENT__<ID>__<KEY>` for experiment tables) fill
//! in keys the file leaves unset; the file always wins.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use mhd_core::dynamics::{Coupling, SolverConfig, Truncation};
use mhd_core::lifting::{BoundaryMode, BoundaryTrace, CompatibilityPolicy, Envelope};
use mhd_core::Grid;
use mhd_verify::scenarios::SCENARIO_IDS;
use mhd_verify::{ExperimentParams, EXPERIMENT_IDS};
use thiserror::Error;
use toml::{Table, Value};

use crate::params;
use crate::value::{parse_literal, TomlValue};

pub const ENV_PREFIX: &str = "MHD_";

/// One invalid setting, named by its dotted key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl Violation {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Syntax(String),
    #[error("{} invalid setting(s):\n  {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<Violation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

const SCHEMA: [(&str, &[&str]); 9] = [
    ("grid", &["nx", "ny"]),
    ("time", &["dt", "T"]),
    ("physics", &["Re", "Rm", "S"]),
    ("galerkin", &["n", "m"]),
    ("boundary", &["modes", "csv"]),
    ("initial", &["preset", "checkpoint"]),
    (
        "tolerances",
        &[
            "picard",
            "picard_max_iter",
            "outer",
            "outer_max_iter",
            "compatibility",
            "div_clean",
        ],
    ),
    (
        "outputs",
        &["ledger", "checkpoint", "checkpoint_every", "calibration"],
    ),
    ("experiment", &["id"]),
];

const MODE_KEYS: [&str; 7] = [
    "amplitude",
    "wavenumber",
    "phase",
    "envelope",
    "frequency",
    "envelope_phase",
    "rate",
];

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryConfig {
    /// Whatever the initial data brings: the preset's trace, or zero after a checkpoint.
    Inherit,
    Modes(Vec<BoundaryMode>),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialConfig {
    Preset(String),
    Checkpoint(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub picard: f64,
    pub picard_max_iter: usize,
    /// Fixed-point coupling tolerance; single-pass coupling when unset.
    pub outer: Option<f64>,
    pub outer_max_iter: usize,
    pub compatibility: CompatibilityPolicy,
    pub div_clean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    /// Relative paths are taken inside the output directory.
    pub ledger: PathBuf,
    pub checkpoint: PathBuf,
    /// Steps between checkpoints; 0 disables them.
    pub checkpoint_every: usize,
    pub calibration: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_final: f64,
    pub re: f64,
    pub rm: f64,
    pub s: f64,
    pub galerkin: Truncation,
    /// Laplacian modes for diagnostics and the basis cache.
    pub laplacian_modes: Option<usize>,
    pub boundary: BoundaryConfig,
    pub initial: InitialConfig,
    pub tolerances: Tolerances,
    pub outputs: Outputs,
    pub experiments: Vec<String>,
    pub params: ExperimentParams,
}

impl RunConfig {
    pub fn grid(&self) -> mhd_core::Result<Grid> {
        Grid::new(self.nx, self.ny)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut c = SolverConfig::new(self.nx, self.dt, self.t_final);
        c.ny = self.ny;
        c.truncation = self.galerkin;
        c.picard_tol = self.tolerances.picard;
        c.picard_max_iter = self.tolerances.picard_max_iter;
        c.coupling = match self.tolerances.outer {
            Some(tol) => Coupling::FixedPoint {
                tol,
                max_iter: self.tolerances.outer_max_iter,
            },
            None => Coupling::SinglePass,
        };
        c.re = self.re;
        c.rm = self.rm;
        c.s = self.s;
        c.div_clean_threshold = self.tolerances.div_clean;
        c.compatibility = self.tolerances.compatibility;
        c
    }

    pub fn to_table(&self) -> Table {
        let mut root = Table::new();
        let mut section = |name: &str, entries: Vec<(&str, Value)>| {
            if !entries.is_empty() {
                root.insert(
                    name.to_owned(),
                    Value::Table(
                        entries
                            .into_iter()
                            .map(|(k, v)| (k.to_owned(), v))
                            .collect(),
                    ),
                );
            }
        };
        section(
            "grid",
            vec![("nx", self.nx.to_toml()), ("ny", self.ny.to_toml())],
        );
        section(
            "time",
            vec![("dt", self.dt.to_toml()), ("T", self.t_final.to_toml())],
        );
        section(
            "physics",
            vec![
                ("Re", self.re.to_toml()),
                ("Rm", self.rm.to_toml()),
                ("S", self.s.to_toml()),
            ],
        );
        let mut gal = vec![(
            "n",
            match self.galerkin {
                Truncation::Full => Value::String("full".into()),
                Truncation::Modes(n) => n.to_toml(),
            },
        )];
        if let Some(m) = self.laplacian_modes {
            gal.push(("m", m.to_toml()));
        }
        section("galerkin", gal);
        section(
            "boundary",
            match &self.boundary {
                BoundaryConfig::Inherit => vec![],
                BoundaryConfig::Modes(ms) => {
                    vec![("modes", Value::Array(ms.iter().map(mode_to_toml).collect()))]
                }
                BoundaryConfig::Csv(p) => vec![("csv", p.to_toml())],
            },
        );
        section(
            "initial",
            vec![match &self.initial {
                InitialConfig::Preset(id) => ("preset", id.to_toml()),
                InitialConfig::Checkpoint(p) => ("checkpoint", p.to_toml()),
            }],
        );
        let t = &self.tolerances;
        let mut tol = vec![
            ("picard", t.picard.to_toml()),
            ("picard_max_iter", t.picard_max_iter.to_toml()),
            ("outer_max_iter", t.outer_max_iter.to_toml()),
            (
                "compatibility",
                Value::String(
                    match t.compatibility {
                        CompatibilityPolicy::Reject => "reject",
                        CompatibilityPolicy::Project => "project",
                    }
                    .into(),
                ),
            ),
            ("div_clean", t.div_clean.to_toml()),
        ];
        if let Some(o) = t.outer {
            tol.push(("outer", o.to_toml()));
        }
        section("tolerances", tol);
        let o = &self.outputs;
        section(
            "outputs",
            vec![
                ("ledger", o.ledger.to_toml()),
                ("checkpoint", o.checkpoint.to_toml()),
                ("checkpoint_every", o.checkpoint_every.to_toml()),
                ("calibration", o.calibration.to_toml()),
            ],
        );
        let mut exp = Table::new();
        if !self.experiments.is_empty() {
            exp.insert("id".into(), self.experiments.to_toml());
        }
        for (name, t) in params::to_tables(&self.params) {
            exp.insert(name.into(), Value::Table(t));
        }
        root.insert("experiment".into(), Value::Table(exp));
        root
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_table()).expect("configuration tables serialize")
    }
}

fn mode_to_toml(m: &BoundaryMode) -> Value {
    let mut t = Table::new();
    t.insert(
        "amplitude".into(),
        vec![m.amplitude[0], m.amplitude[1]].to_toml(),
    );
    t.insert("wavenumber".into(), m.wavenumber.to_toml());
    t.insert("phase".into(), m.phase.to_toml());
    match m.envelope {
        Envelope::Constant => {
            t.insert("envelope".into(), Value::String("constant".into()));
        }
        Envelope::Sinusoidal { frequency, phase } => {
            t.insert("envelope".into(), Value::String("sinusoidal".into()));
            t.insert("frequency".into(), frequency.to_toml());
            t.insert("envelope_phase".into(), phase.to_toml());
        }
        Envelope::Ramp { rate } => {
            t.insert("envelope".into(), Value::String("ramp".into()));
            t.insert("rate".into(), rate.to_toml());
        }
    }
    Value::Table(t)
}

/// Reads, overlays the environment and validates.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_str(&text, base, std::env::vars())
}

/// As [`parse_config`], with relative input paths resolved against `base` and the
/// environment given explicitly.
pub fn parse_str(
    text: &str,
    base: &Path,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<RunConfig, ConfigError> {
    let mut root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut errs = Vec::new();
    apply_env(&mut root, env, &mut errs);
    let cfg = Parser {
        errs: &mut errs,
        base,
    }
    .run(&root);
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}

fn canonical<'a>(candidates: impl IntoIterator<Item = &'a str>, seg: &str) -> Option<&'a str> {
    candidates.into_iter().find(|c| c.eq_ignore_ascii_case(seg))
}

fn apply_env(
    root: &mut Table,
    env: impl IntoIterator<Item = (String, String)>,
    errs: &mut Vec<Violation>,
) {
    let mut vars: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (name, raw) in vars {
        let segs: Vec<String> = name[ENV_PREFIX.len()..]
            .split("__")
            .map(str::to_ascii_lowercase)
            .collect();
        let mut path: Vec<String> = Vec::new();
        let Some(section) = canonical(SCHEMA.iter().map(|s| s.0), &segs[0]) else {
            errs.push(Violation::new(name, "not a configuration section"));
            continue;
        };
        path.push(section.to_owned());
        let keys = SCHEMA
            .iter()
            .find(|s| s.0 == section)
            .map(|s| s.1)
            .unwrap_or(&[]);
        match segs.len() {
            2 => match canonical(keys.iter().copied(), &segs[1]) {
                Some(k) => path.push(k.to_owned()),
                None => {
                    errs.push(Violation::new(name, format!("unknown key in [{section}]")));
                    continue;
                }
            },
            3 if section == "experiment" => {
                let table = canonical(params::TABLES, &segs[1]);
                match table.and_then(|t| {
                    params::keys(t).and_then(|ks| canonical(ks.iter().copied(), &segs[2]))
                }) {
                    Some(k) => {
                        path.push(table.unwrap_or_default().to_owned());
                        path.push(k.to_owned());
                    }
                    None => {
                        errs.push(Violation::new(name, "unknown experiment parameter"));
                        continue;
                    }
                }
            }
            _ => {
                errs.push(Violation::new(name, "expected MHD_<SECTION>__<KEY>"));
                continue;
            }
        }
        insert_absent(root, &path, parse_literal(&raw));
    }
}

fn insert_absent(t: &mut Table, path: &[String], v: Value) {
    match path {
        [] => {}
        [leaf] => {
            t.entry(leaf.clone()).or_insert(v);
        }
        [head, rest @ ..] => {
            // a non-table here is reported by the schema check
            if let Value::Table(inner) = t
                .entry(head.clone())
                .or_insert_with(|| Value::Table(Table::new()))
            {
                insert_absent(inner, rest, v);
            }
        }
    }
}

struct Parser<'a> {
    errs: &'a mut Vec<Violation>,
    base: &'a Path,
}

impl Parser<'_> {
    fn bad(&mut self, key: impl Into<String>, msg: impl Into<String>) {
        self.errs.push(Violation::new(key, msg));
    }

    fn section<'t>(&mut self, root: &'t Table, name: &str) -> Option<&'t Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.bad(name, "expected a section");
                None
            }
        }
    }

    fn check_keys(&mut self, t: &Table, prefix: &str, allowed: &[&str]) {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                self.bad(format!("{prefix}.{k}"), "unknown key");
            }
        }
    }

    fn get<T: TomlValue>(&mut self, t: Option<&Table>, prefix: &str, key: &str) -> Option<T> {
        let v = t?.get(key)?;
        match T::from_toml(v) {
            Ok(x) => Some(x),
            Err(e) => {
                self.bad(format!("{prefix}.{key}"), e);
                None
            }
        }
    }

    fn positive(&mut self, key: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.bad(key, format!("must be positive and finite, found {v}"));
        }
    }

    fn path(&self, p: PathBuf) -> PathBuf {
        if p.is_absolute() {
            p
        } else {
            self.base.join(p)
        }
    }

    fn run(&mut self, root: &Table) -> RunConfig {
        for k in root.keys() {
            if !SCHEMA.iter().any(|s| s.0 == k) {
                self.bad(k.clone(), "unknown section");
            }
        }
        let [grid, time, physics, galerkin, boundary, initial, tolerances, outputs, experiment] =
            SCHEMA.map(|(name, keys)| {
                let t = self.section(root, name);
                if let Some(t) = t {
                    if name == "experiment" {
                        let mut allowed = keys.to_vec();
                        allowed.extend(params::TABLES);
                        self.check_keys(t, name, &allowed);
                    } else {
                        self.check_keys(t, name, keys);
                    }
                }
                t
            });

        let nx = self.get(grid, "grid", "nx").unwrap_or(32usize);
        let ny = self.get(grid, "grid", "ny").unwrap_or(nx);
        for (k, n) in [("grid.nx", nx), ("grid.ny", ny)] {
            if n < 4 {
                self.bad(k, format!("needs at least 4 cells, found {n}"));
            }
        }

        let dt = self.get::<f64>(time, "time", "dt");
        let t_final = self.get::<f64>(time, "time", "T");
        if time.is_none_or(|t| !t.contains_key("dt")) {
            self.bad("time.dt", "missing required key");
        }
        if time.is_none_or(|t| !t.contains_key("T")) {
            self.bad("time.T", "missing required key");
        }
        let dt = dt.unwrap_or(f64::NAN);
        let t_final = t_final.unwrap_or(f64::NAN);
        if time.is_some_and(|t| t.contains_key("dt")) && !dt.is_nan() {
            self.positive("time.dt", dt);
        }
        if time.is_some_and(|t| t.contains_key("T")) && !t_final.is_nan() {
            self.positive("time.T", t_final);
        }
        if dt > 0.0 && t_final > 0.0 && dt > t_final {
            self.bad(
                "time.dt",
                format!("step {dt} exceeds the horizon {t_final}"),
            );
        }

        let mut phys = [1.0; 3];
        for (slot, key) in phys.iter_mut().zip(["Re", "Rm", "S"]) {
            if let Some(v) = self.get(physics, "physics", key) {
                *slot = v;
                self.positive(&format!("physics.{key}"), v);
            }
        }

        let galerkin_n = match galerkin.and_then(|t| t.get("n")) {
            None => Truncation::Full,
            Some(Value::String(s)) if s == "full" => Truncation::Full,
            Some(Value::Integer(n)) if *n >= 1 => Truncation::Modes(*n as usize),
            Some(v) => {
                self.bad(
                    "galerkin.n",
                    format!("expected \"full\" or a positive mode count, found {v}"),
                );
                Truncation::Full
            }
        };
        let laplacian_modes = self.get::<usize>(galerkin, "galerkin", "m");
        if laplacian_modes == Some(0) {
            self.bad("galerkin.m", "must be positive");
        }

        let boundary_cfg = self.boundary(boundary, nx, ny);
        let initial_cfg = self.initial(initial, nx, ny);
        let tolerances = self.tolerances(tolerances);
        let outputs = Outputs {
            ledger: self
                .get(outputs, "outputs", "ledger")
                .unwrap_or_else(|| "ledger.csv".into()),
            checkpoint: self
                .get(outputs, "outputs", "checkpoint")
                .unwrap_or_else(|| "checkpoint.bin".into()),
            checkpoint_every: self
                .get(outputs, "outputs", "checkpoint_every")
                .unwrap_or(0),
            calibration: self
                .get(outputs, "outputs", "calibration")
                .unwrap_or_else(|| "calibration.txt".into()),
        };

        let (experiments, params) = self.experiment(experiment);
        RunConfig {
            nx,
            ny,
            dt,
            t_final,
            re: phys[0],
            rm: phys[1],
            s: phys[2],
            galerkin: galerkin_n,
            laplacian_modes,
            boundary: boundary_cfg,
            initial: initial_cfg,
            tolerances,
            outputs,
            experiments,
            params,
        }
    }

    fn boundary(&mut self, t: Option<&Table>, nx: usize, ny: usize) -> BoundaryConfig {
        let Some(t) = t else {
            return BoundaryConfig::Inherit;
        };
        match (t.get("modes"), t.get("csv")) {
            (Some(_), Some(_)) => {
                self.bad("boundary", "give either modes or csv, not both");
                BoundaryConfig::Inherit
            }
            (Some(Value::Array(items)), None) => {
                let mut modes = Vec::new();
                for (k, item) in items.iter().enumerate() {
                    let prefix = format!("boundary.modes[{k}]");
                    match item {
                        Value::Table(m) => {
                            if let Some(mode) = self.mode(m, &prefix) {
                                modes.push(mode);
                            }
                        }
                        _ => self.bad(prefix, "expected a table"),
                    }
                }
                BoundaryConfig::Modes(modes)
            }
            (Some(_), None) => {
                self.bad("boundary.modes", "expected an array of tables");
                BoundaryConfig::Inherit
            }
            (None, Some(_)) => {
                let Some(p) = self.get::<PathBuf>(Some(t), "boundary", "csv") else {
                    return BoundaryConfig::Inherit;
                };
                let p = self.path(p);
                if let Ok(g) = Grid::new(nx, ny) {
                    if let Err(e) = BoundaryTrace::from_csv(g, &p) {
                        self.bad("boundary.csv", format!("{}: {e}", p.display()));
                    }
                }
                BoundaryConfig::Csv(p)
            }
            (None, None) => BoundaryConfig::Inherit,
        }
    }

    fn mode(&mut self, m: &Table, prefix: &str) -> Option<BoundaryMode> {
        self.check_keys(m, prefix, &MODE_KEYS);
        let before = self.errs.len();
        let amplitude: Vec<f64> = self.get(Some(m), prefix, "amplitude").unwrap_or_default();
        if amplitude.len() != 2 {
            self.bad(format!("{prefix}.amplitude"), "expected two components");
        }
        let wavenumber = self.get(Some(m), prefix, "wavenumber").unwrap_or(0usize);
        let phase = self.get(Some(m), prefix, "phase").unwrap_or(0.0);
        let kind: String = self
            .get(Some(m), prefix, "envelope")
            .unwrap_or_else(|| "constant".into());
        let frequency = self.get(Some(m), prefix, "frequency");
        let envelope_phase = self.get(Some(m), prefix, "envelope_phase");
        let rate = self.get(Some(m), prefix, "rate");
        let stray = |present: bool, key: &str, errs: &mut Vec<Violation>| {
            if present {
                errs.push(Violation::new(
                    format!("{prefix}.{key}"),
                    format!("not used by a {kind} envelope"),
                ));
            }
        };
        let envelope = match kind.as_str() {
            "constant" => {
                stray(frequency.is_some(), "frequency", self.errs);
                stray(envelope_phase.is_some(), "envelope_phase", self.errs);
                stray(rate.is_some(), "rate", self.errs);
                Envelope::Constant
            }
            "sinusoidal" => {
                stray(rate.is_some(), "rate", self.errs);
                let frequency = frequency.unwrap_or(1.0);
                if !frequency.is_finite() {
                    self.bad(format!("{prefix}.frequency"), "must be finite");
                }
                Envelope::Sinusoidal {
                    frequency,
                    phase: envelope_phase.unwrap_or(0.0),
                }
            }
            "ramp" => {
                stray(frequency.is_some(), "frequency", self.errs);
                stray(envelope_phase.is_some(), "envelope_phase", self.errs);
                let rate = rate.unwrap_or(1.0);
                self.positive(&format!("{prefix}.rate"), rate);
                Envelope::Ramp { rate }
            }
            other => {
                self.bad(
                    format!("{prefix}.envelope"),
                    format!("unknown envelope `{other}`; expected constant, sinusoidal or ramp"),
                );
                Envelope::Constant
            }
        };
        (self.errs.len() == before).then(|| BoundaryMode {
            amplitude: [amplitude[0], amplitude[1]],
            wavenumber,
            phase,
            envelope,
        })
    }

    fn initial(&mut self, t: Option<&Table>, nx: usize, ny: usize) -> InitialConfig {
        let preset = self.get::<String>(t, "initial", "preset");
        let checkpoint = self.get::<PathBuf>(t, "initial", "checkpoint");
        match (preset, checkpoint) {
            (Some(_), Some(_)) => {
                self.bad("initial", "give either preset or checkpoint, not both");
                InitialConfig::Preset("zero".into())
            }
            (None, Some(p)) => InitialConfig::Checkpoint(self.path(p)),
            (preset, None) => {
                let id = preset.unwrap_or_else(|| "zero".into());
                if !SCENARIO_IDS.contains(&id.as_str()) {
                    self.bad(
                        "initial.preset",
                        format!("unknown preset `{id}`; known: {}", SCENARIO_IDS.join(", ")),
                    );
                } else if nx != ny {
                    self.bad("grid.ny", "presets are defined on square grids");
                }
                InitialConfig::Preset(id)
            }
        }
    }

    fn tolerances(&mut self, t: Option<&Table>) -> Tolerances {
        let mut out = Tolerances {
            picard: 1e-10,
            picard_max_iter: 50,
            outer: None,
            outer_max_iter: 50,
            compatibility: CompatibilityPolicy::Reject,
            div_clean: 1e-6,
        };
        if let Some(v) = self.get(t, "tolerances", "picard") {
            self.positive("tolerances.picard", v);
            out.picard = v;
        }
        if let Some(v) = self.get(t, "tolerances", "outer") {
            self.positive("tolerances.outer", v);
            out.outer = Some(v);
        }
        for (key, slot) in [
            ("picard_max_iter", &mut out.picard_max_iter),
            ("outer_max_iter", &mut out.outer_max_iter),
        ] {
            if let Some(v) = self.get::<usize>(t, "tolerances", key) {
                if v == 0 {
                    self.errs.push(Violation::new(
                        format!("tolerances.{key}"),
                        "must be positive",
                    ));
                }
                *slot = v;
            }
        }
        if let Some(v) = self.get::<f64>(t, "tolerances", "div_clean") {
            if v.is_nan() || v <= 0.0 {
                self.bad(
                    "tolerances.div_clean",
                    "must be positive (inf disables cleaning)",
                );
            }
            out.div_clean = v;
        }
        match self
            .get::<String>(t, "tolerances", "compatibility")
            .as_deref()
        {
            None | Some("reject") => {}
            Some("project") => out.compatibility = CompatibilityPolicy::Project,
            Some(other) => self.bad(
                "tolerances.compatibility",
                format!("unknown policy `{other}`; expected reject or project"),
            ),
        }
        out
    }

    fn experiment(&mut self, t: Option<&Table>) -> (Vec<String>, ExperimentParams) {
        let mut p = ExperimentParams::default();
        let Some(t) = t else {
            return (Vec::new(), p);
        };
        let ids = match t.get("id") {
            None => Vec::new(),
            Some(Value::String(s)) => vec![s.clone()],
            Some(v) => Vec::<String>::from_toml(v).unwrap_or_else(|e| {
                self.bad("experiment.id", e);
                Vec::new()
            }),
        };
        for id in &ids {
            if !EXPERIMENT_IDS.contains(&id.as_str()) {
                self.bad(
                    "experiment.id",
                    format!(
                        "unknown experiment `{id}`; known: {}",
                        EXPERIMENT_IDS.join(", ")
                    ),
                );
            }
        }
        for name in params::TABLES {
            let prefix = format!("experiment.{name}");
            match t.get(name) {
                None => {}
                Some(Value::Table(tt)) => {
                    self.check_keys(tt, &prefix, params::keys(name).unwrap_or(&[]));
                    params::apply(&mut p, name, tt, &prefix, self.errs);
                }
                Some(_) => self.bad(prefix, "expected a table"),
            }
        }
        for (key, id) in params::scenario_refs(&p) {
            if !SCENARIO_IDS.contains(&id) {
                self.errs
                    .push(Violation::new(key, format!("unknown scenario `{id}`")));
            }
        }
        (ids, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_str(text, Path::new("/cfg"), Vec::new())
    }

    #[test]
    fn minimal_config_takes_unit_coefficients() {
        let c = parse("[time]\ndt = 0.01\nT = 0.1\n").unwrap();
        assert_eq!((c.re, c.rm, c.s), (1.0, 1.0, 1.0));
        assert_eq!(c.initial, InitialConfig::Preset("zero".into()));
        assert_eq!(c.galerkin, Truncation::Full);
        assert_eq!(c.solver_config().coupling, Coupling::SinglePass);
    }

    #[test]
    fn zero_step_is_named() {
        let e = parse("[time]\ndt = 0\nT = 1\n").unwrap_err();
        assert_eq!(e.violations().len(), 1);
        assert_eq!(e.violations()[0].key, "time.dt");
    }

    #[test]
    fn all_violations_are_collected() {
        let e = parse("[grid]\nnx = 2\ncolour = 1\n[time]\nT = -1\n[physics]\nRe = 0\n[bogus]\n")
            .unwrap_err();
        let keys: Vec<&str> = e.violations().iter().map(|v| v.key.as_str()).collect();
        for k in [
            "grid.nx",
            "grid.colour",
            "time.dt",
            "time.T",
            "physics.Re",
            "bogus",
        ] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn unknown_experiment_parameter_is_rejected() {
        let e = parse("[time]\ndt = 0.1\nT = 1\n[experiment.mms]\nspatial_resolution = [16]\n")
            .unwrap_err();
        assert_eq!(e.violations()[0].key, "experiment.mms.spatial_resolution");
    }

    #[test]
    fn environment_fills_gaps_only() {
        let env = vec![
            ("MHD_TIME__T".to_owned(), "0.5".to_owned()),
            ("MHD_TIME__DT".to_owned(), "0.2".to_owned()),
            ("MHD_PHYSICS__RM".to_owned(), "3".to_owned()),
            ("MHD_EXPERIMENT__EIGEN__SEED".to_owned(), "99".to_owned()),
            ("MHD_INITIAL__PRESET".to_owned(), "decay".to_owned()),
            ("PATH".to_owned(), "/bin".to_owned()),
        ];
        let c = parse_str("[time]\ndt = 0.01\n", Path::new(""), env).unwrap();
        assert_eq!(c.dt, 0.01);
        assert_eq!(c.t_final, 0.5);
        assert_eq!(c.rm, 3.0);
        assert_eq!(c.params.eigen.seed, 99);
        assert_eq!(c.initial, InitialConfig::Preset("decay".into()));
    }

    #[test]
    fn boundary_modes_and_round_trip() {
        let text = r#"
[grid]
nx = 16
[time]
dt = 0.01
T = 0.1
[galerkin]
n = 8
m = 20
[boundary]
modes = [
  { amplitude = [0.1, 0.0], wavenumber = 1, envelope = "sinusoidal", frequency = 2.0 },
  { amplitude = [0.0, 0.2], wavenumber = 0, envelope = "ramp", rate = 3.0 },
]
[tolerances]
outer = 1e-12
div_clean = inf
compatibility = "project"
[experiment]
id = ["mms", "tail"]
"#;
        let c = parse(text).unwrap();
        assert_eq!(c.galerkin, Truncation::Modes(8));
        let BoundaryConfig::Modes(ms) = &c.boundary else {
            panic!("expected modes")
        };
        assert_eq!(ms[1].envelope, Envelope::Ramp { rate: 3.0 });
        assert!(c.tolerances.div_clean.is_infinite());
        let again = parse(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn bad_envelope_vocabulary() {
        let e = parse(
            "[time]\ndt = 0.1\nT = 1\n[boundary]\nmodes = [{ amplitude = [1.0, 0.0], envelope = \"square\" }]\n",
        )
        .unwrap_err();
        assert_eq!(e.violations()[0].key, "boundary.modes[0].envelope");
    }
}
