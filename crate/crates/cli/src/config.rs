//! Run configuration: TOML text, `KWG_` environment overrides, validation with
//! line numbers, and a normalized echo that parses back to the same value.

use std::fmt;

use kwg_core::solver::{PhysParams, PressureModel};
use kwg_core::thermo::VdWParams;
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "KWG_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Sweep,
    Besov,
    Thermo,
    LinearSpectrum,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Besov => "besov",
            Command::Thermo => "thermo",
            Command::LinearSpectrum => "linear-spectrum",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    /// Output directory; the `--out` flag takes precedence and is not echoed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub initial: InitialConfig,
    pub run: RunSection,
    pub sweep: SweepSection,
    pub besov: BesovSection,
    pub thermo: ThermoSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Check,
            seed: 0,
            out: None,
            grid: GridConfig::default(),
            params: ParamsConfig::default(),
            initial: InitialConfig::default(),
            run: RunSection::default(),
            sweep: SweepSection::default(),
            besov: BesovSection::default(),
            thermo: ThermoSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 2, n: 64, length: 20.0 * std::f64::consts::PI }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureKind {
    Isothermal,
    Power,
    VanDerWaals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// `P′(1)`; derived from the law when `pressure = "van-der-waals"`.
    pub p: f64,
    pub eps: f64,
    pub pressure: PressureKind,
    pub exponent: f64,
    pub vdw: VdwConfig,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            lambda: 0.0,
            kappa: 1.0,
            p: 1.0,
            eps: 0.1,
            pressure: PressureKind::Isothermal,
            exponent: 1.4,
            vdw: VdwConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VdwConfig {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub tstar: f64,
}

impl Default for VdwConfig {
    fn default() -> Self {
        Self { a: 1.0, b: 2.0, r: 1.0, tstar: 1.0 }
    }
}

impl VdwConfig {
    pub fn law(&self) -> kwg_core::Result<VdWParams> {
        VdWParams::new(self.a, self.b, self.r, self.tstar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Gaussian,
    Random,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub q_amplitude: f64,
    pub u_amplitude: [f64; 2],
    pub width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    /// Random data: band limit and peak amplitude of `q` and `u`.
    pub xi_max: f64,
    pub amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::Gaussian,
            q_amplitude: 0.05,
            u_amplitude: [0.0, 0.0],
            width: 3.0,
            center: None,
            xi_max: 1.0,
            amplitude: 0.01,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Nonlinear,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub system: SystemKind,
    pub t_final: f64,
    /// Defaults to `min(0.25Δx/max(1, ‖u₀‖_∞), 10⁻²)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Number of stored intervals; the step count is rounded up to a multiple.
    pub snapshots: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub friedrichs: Option<f64>,
    pub vacuum_floor: f64,
    pub write_snapshots: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            system: SystemKind::Nonlinear,
            t_final: 2.0,
            dt: None,
            snapshots: 10,
            friedrichs: None,
            vacuum_floor: kwg_core::solver::DEFAULT_VACUUM_FLOOR,
            write_snapshots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub eps: Vec<f64>,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Exit status 4 when the fitted slope falls below this value.
    pub slope_floor: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { eps: vec![0.2, 0.14, 0.1, 0.07, 0.05], alpha: 0.9, eta: None, slope_floor: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BesovSection {
    /// Regularity exponents; empty means `{d/2 − 1, d/2}`.
    pub s: Vec<f64>,
    /// Weights `α` of the `B̃_α` norms.
    pub alpha: Vec<f64>,
}

impl Default for BesovSection {
    fn default() -> Self {
        Self { s: Vec::new(), alpha: vec![0.5, 1.0, 2.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermoSection {
    pub vdw: VdwConfig,
    pub samples: usize,
}

impl Default for ThermoSection {
    fn default() -> Self {
        Self { vdw: VdwConfig::default(), samples: 400 }
    }
}

/// Parse or validation failure, with the 1-based line of the offending entry when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = …` inside `[section]` (dotted for nesting), or of the header itself.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = h.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

fn parse_env_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `KWG_SECTION__KEY=value` entries; `__` separates nesting levels.
pub fn apply_env_overrides<I>(table: &mut toml::Table, vars: I) -> Result<(), ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (k, v) in vars {
        let path: Vec<String> = k[ENV_PREFIX.len()..].split("__").map(|s| s.to_ascii_lowercase()).collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(ConfigError { message: format!("malformed override variable {k}"), line: None });
        }
        let mut node = &mut *table;
        for seg in &path[..path.len() - 1] {
            let entry = node.entry(seg.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = entry.as_table_mut().ok_or_else(|| ConfigError {
                message: format!("override {k}: {seg} is not a section"),
                line: None,
            })?;
        }
        node.insert(path[path.len() - 1].clone(), parse_env_value(&v));
    }
    Ok(())
}

/// Parses, validates and fills defaults, without environment overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with_env(text, std::iter::empty())
}

pub fn parse_config_with_env<I>(text: &str, vars: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    // Parse the text alone first so syntax and schema errors carry a line.
    toml::from_str::<RunConfig>(text).map_err(|e| ConfigError {
        message: e.message().to_string(),
        line: e.span().map(|s| line_of_offset(text, s.start)),
    })?;
    let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError {
        message: e.message().to_string(),
        line: e.span().map(|s| line_of_offset(text, s.start)),
    })?;
    apply_env_overrides(&mut table, vars)?;
    let cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError { message: format!("after {ENV_PREFIX} overrides: {}", e.message()), line: None })?;
    cfg.validate().map_err(|(section, key, message)| ConfigError { message, line: locate(text, section, key) })?;
    Ok(cfg)
}

impl RunConfig {
    /// Canonical TOML echo: every field explicit, stable ordering.
    pub fn normalized(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn phys_params(&self) -> kwg_core::Result<PhysParams> {
        let p = &self.params;
        match p.pressure {
            PressureKind::Isothermal => PhysParams::new(p.mu, p.lambda, p.kappa, p.p, p.eps),
            PressureKind::Power => PhysParams::with_pressure(
                p.mu,
                p.lambda,
                p.kappa,
                p.p,
                p.eps,
                PressureModel::Power { exponent: p.exponent },
            ),
            PressureKind::VanDerWaals => PhysParams::van_der_waals(p.mu, p.lambda, p.kappa, p.eps, p.vdw.law()?),
        }
    }

    /// First violated constraint as `(section, key, message)`.
    fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        let g = &self.grid;
        kwg_core::lpaley::TorusGrid::new(g.dim, g.n, g.length).map_err(|e| {
            let key = if !(g.dim == 1 || g.dim == 2) {
                "dim"
            } else if !(g.length > 0.0) {
                "length"
            } else {
                "n"
            };
            ("grid", key, e.to_string())
        })?;
        let p = &self.params;
        self.phys_params().map_err(|e| {
            let msg = e.to_string();
            let key = if msg.contains("min(μ,2μ+λ)>0") {
                if p.mu > 0.0 { "lambda" } else { "mu" }
            } else if msg.contains("eps") {
                "eps"
            } else if msg.contains("kappa") {
                "kappa"
            } else if msg.contains("P'(1)") {
                "p"
            } else if msg.contains("exponent") {
                "exponent"
            } else {
                "pressure"
            };
            ("params", key, msg)
        })?;
        let i = &self.initial;
        if !(i.width > 0.0) {
            return Err(("initial", "width", format!("width = {} must be > 0", i.width)));
        }
        if !(i.xi_max > 0.0) {
            return Err(("initial", "xi_max", format!("xi_max = {} must be > 0", i.xi_max)));
        }
        if i.kind == InitialKind::Snapshot && i.path.is_none() {
            return Err(("initial", "kind", "snapshot initial data needs a path".into()));
        }
        let r = &self.run;
        if !(r.t_final > 0.0) {
            return Err(("run", "t_final", format!("t_final = {} must be > 0", r.t_final)));
        }
        if let Some(dt) = r.dt {
            if !(dt > 0.0) {
                return Err(("run", "dt", format!("dt = {dt} must be > 0")));
            }
        }
        if r.snapshots == 0 {
            return Err(("run", "snapshots", "snapshots must be >= 1".into()));
        }
        if let Some(n) = r.friedrichs {
            if !(n >= 1.0) {
                return Err(("run", "friedrichs", format!("Friedrichs level {n} must be >= 1")));
            }
        }
        let s = &self.sweep;
        if s.eps.len() < 2 || s.eps.iter().any(|e| !(*e > 0.0)) || s.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(("sweep", "eps", "sweep eps must hold >= 2 strictly decreasing positive values".into()));
        }
        let alpha_ok = if g.dim == 2 { s.alpha > 0.0 && s.alpha < 1.0 } else { s.alpha > 0.0 && s.alpha <= 1.0 };
        if !alpha_ok {
            return Err(("sweep", "alpha", format!("alpha = {} outside its admissible range", s.alpha)));
        }
        if self.besov.alpha.iter().any(|a| !(*a > 0.0)) {
            return Err(("besov", "alpha", "besov alpha weights must be > 0".into()));
        }
        self.thermo.vdw.law().map_err(|e| ("thermo.vdw", "a", e.to_string()))?;
        if self.thermo.samples < 2 {
            return Err(("thermo", "samples", "samples must be >= 2".into()));
        }
        Ok(())
    }
}
