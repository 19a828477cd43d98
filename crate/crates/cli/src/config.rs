//! Run configuration: TOML sections `[bath]`, `[system]` and `[run]`.
//!
//! Energies are in μeV; any energy key may instead be given with a `_mev`
//! suffix. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;

use polaron_core::units::energy_to_angular;
use polaron_core::{AlphaConvention, BathParams, DriveKind, ModelVariant, SystemParams};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("[{section}] missing required keys: {}", keys.join(", "))]
    Missing {
        section: &'static str,
        keys: Vec<&'static str>,
    },
    #[error("[{section}] unknown key `{key}`")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] key `{key}`: {reason}")]
    BadValue {
        section: &'static str,
        key: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(#[from] polaron_core::Error),
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Channel selection for linewidth runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelChoice {
    /// Cavity readout for exciton drive, exciton readout for cavity drive.
    Auto,
    Exciton,
    Cavity,
}

/// Detuning grid for sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// 5 μeV near the exciton and cavity lines, 25 μeV elsewhere, ±6 meV.
    Default,
    Uniform { start: f64, end: f64, step: f64 },
}

impl GridSpec {
    pub fn points(&self, delta_cx: f64) -> Vec<f64> {
        match *self {
            GridSpec::Default => polaron_core::experiments::default_grid(delta_cx),
            GridSpec::Uniform { start, end, step } => {
                let n = ((end - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| start + k as f64 * step).collect()
            }
        }
    }
}

/// Subcommand options from `[run]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub grid: GridSpec,
    pub pumps: Vec<f64>,
    pub n_max_list: Vec<usize>,
    pub channel: ChannelChoice,
    /// Linewidth center guess (μeV); defaults to the probed resonance.
    pub center: Option<f64>,
    pub search_half_width: f64,
    pub window_multiple: f64,
    /// Total-IPL half width about the probe center; whole grid if unset.
    pub ipl_half_width: Option<f64>,
    pub convergence_tolerance: f64,
    pub plot: bool,
    pub log_y: bool,
    pub normalize: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::Default,
            pumps: Vec::new(),
            n_max_list: Vec::new(),
            channel: ChannelChoice::Auto,
            center: None,
            search_half_width: 300.0,
            window_multiple: 3.0,
            ipl_half_width: None,
            convergence_tolerance: 0.01,
            plot: true,
            log_y: false,
            normalize: false,
        }
    }
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bath: BathParams,
    pub system: SystemParams,
    pub variant: ModelVariant,
    pub run: RunOptions,
}

struct Section<'a> {
    name: &'static str,
    table: Table,
    _src: &'a str,
}

impl Section<'_> {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn bad(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            section: self.name,
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    fn number(&self, key: &str, v: Value) -> Result<f64> {
        match v {
            Value::Float(f) => Ok(f),
            Value::Integer(i) => Ok(i as f64),
            other => Err(self.bad(key, format!("expected a number, got {}", other.type_str()))),
        }
    }

    /// Energy in μeV from `key` or `key_mev`.
    fn energy(&mut self, key: &str) -> Result<Option<f64>> {
        let plain = self.take(key);
        let mev_key = format!("{key}_mev");
        let mev = self.take(&mev_key);
        match (plain, mev) {
            (Some(_), Some(_)) => Err(self.bad(key, format!("both `{key}` and `{mev_key}` given"))),
            (Some(v), None) => self.number(key, v).map(Some),
            (None, Some(v)) => self.number(&mev_key, v).map(|x| Some(1000.0 * x)),
            (None, None) => Ok(None),
        }
    }

    fn energies(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        let plain = self.take(key);
        let mev_key = format!("{key}_mev");
        let mev = self.take(&mev_key);
        let (v, scale, k) = match (plain, mev) {
            (Some(_), Some(_)) => return Err(self.bad(key, format!("both `{key}` and `{mev_key}` given"))),
            (Some(v), None) => (v, 1.0, key.to_string()),
            (None, Some(v)) => (v, 1000.0, mev_key),
            (None, None) => return Ok(None),
        };
        match v {
            Value::Array(items) => items
                .into_iter()
                .map(|x| self.number(&k, x).map(|n| n * scale))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            other => Err(self.bad(&k, format!("expected an array of numbers, got {}", other.type_str()))),
        }
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| self.number(key, v)).transpose()
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(b)),
            Some(o) => Err(self.bad(key, format!("expected true or false, got {}", o.type_str()))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(o) => Err(self.bad(key, format!("expected a string, got {}", o.type_str()))),
        }
    }

    fn integer(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(o) => Err(self.bad(key, format!("expected a non-negative integer, got {o}"))),
        }
    }

    fn integers(&mut self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::Integer(i) if i >= 0 => Ok(i as usize),
                    o => Err(self.bad(key, format!("expected non-negative integers, got {o}"))),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(o) => Err(self.bad(key, format!("expected an array, got {}", o.type_str()))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().next() {
            Some(k) => Err(ConfigError::UnknownKey {
                section: self.name.to_string(),
                key: k.clone(),
            }),
            None => Ok(()),
        }
    }
}

fn parse_enum<T: std::str::FromStr<Err = polaron_core::Error>>(
    sec: &Section,
    key: &str,
    s: &str,
) -> Result<T> {
    s.parse::<T>().map_err(|e| sec.bad(key, e.to_string()))
}

/// Parses and validates a configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut root: Table = text
        .parse::<Table>()
        .map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut section = |name: &'static str| -> Result<Option<Section>> {
        match root.remove(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section {
                name,
                table: t,
                _src: text,
            })),
            Some(_) => Err(ConfigError::BadValue {
                section: name,
                key: name.to_string(),
                reason: "expected a section".into(),
            }),
        }
    };
    let bath_sec = section("bath")?;
    let system_sec = section("system")?;
    let run_sec = section("run")?;
    if let Some(k) = root.keys().next() {
        return Err(ConfigError::UnknownKey {
            section: "<top level>".into(),
            key: k.clone(),
        });
    }
    let bath = parse_bath(bath_sec)?;
    let mut system_sec = system_sec.ok_or(ConfigError::Missing {
        section: "system",
        keys: SYSTEM_REQUIRED.to_vec(),
    })?;
    let system = parse_system(&mut system_sec)?;
    system_sec.finish()?;
    let (variant, run) = parse_run(run_sec)?;
    Ok(RunConfig {
        bath,
        system,
        variant,
        run,
    })
}

const SYSTEM_REQUIRED: [&str; 6] = ["drive", "delta_cx", "g", "gamma", "kappa", "gamma_prime"];

fn parse_bath(sec: Option<Section>) -> Result<BathParams> {
    let Some(mut s) = sec else {
        return Err(ConfigError::Missing {
            section: "bath",
            keys: vec!["temperature"],
        });
    };
    let mut bath = BathParams::reference(0.0);
    if let Some(a) = s.float("alpha_p")? {
        bath.alpha_p = a;
    }
    if let Some(w) = s.energy("omega_b")? {
        bath.omega_b = energy_to_angular(w);
    }
    bath.temperature = s.float("temperature")?.ok_or(ConfigError::Missing {
        section: "bath",
        keys: vec!["temperature"],
    })?;
    if let Some(c) = s.string("alpha_convention")? {
        bath.alpha_convention = parse_enum::<AlphaConvention>(&s, "alpha_convention", &c)?;
    }
    s.finish()?;
    bath.validate()?;
    Ok(bath)
}

fn parse_system(s: &mut Section) -> Result<SystemParams> {
    let drive = s.string("drive")?;
    let delta_cx = s.energy("delta_cx")?;
    let g = s.energy("g")?;
    let gamma = s.energy("gamma")?;
    let kappa = s.energy("kappa")?;
    let gamma_prime = s.energy("gamma_prime")?;
    let mut missing = Vec::new();
    for (k, present) in [
        ("drive", drive.is_some()),
        ("delta_cx", delta_cx.is_some()),
        ("g", g.is_some()),
        ("gamma", gamma.is_some()),
        ("kappa", kappa.is_some()),
        ("gamma_prime", gamma_prime.is_some()),
    ] {
        if !present {
            missing.push(k);
        }
    }
    if !missing.is_empty() {
        return Err(ConfigError::Missing {
            section: "system",
            keys: missing,
        });
    }
    let drive: DriveKind = parse_enum(s, "drive", &drive.unwrap())?;
    let eta_x = s.energy("eta_x")?.unwrap_or(0.0);
    let eta_c = s.energy("eta_c")?.unwrap_or(0.0);
    let laser = s.energy("laser_detuning")?.unwrap_or(0.0);
    let n_max = s
        .integer("n_max")?
        .unwrap_or_else(|| SystemParams::default_n_max(drive));
    let explicit = s.boolean("explicit_polaron_shift")?.unwrap_or(false);
    let p = SystemParams {
        delta_xl: -laser,
        delta_cx: delta_cx.unwrap(),
        g: g.unwrap(),
        eta_x,
        eta_c,
        gamma: gamma.unwrap(),
        kappa: kappa.unwrap(),
        gamma_prime: gamma_prime.unwrap(),
        n_max,
        drive,
        explicit_polaron_shift: explicit,
    };
    p.validate()?;
    Ok(p)
}

fn parse_run(sec: Option<Section>) -> Result<(ModelVariant, RunOptions)> {
    let mut run = RunOptions::default();
    let Some(mut s) = sec else {
        return Ok((ModelVariant::FullTcl, run));
    };
    let variant = match s.string("variant")? {
        Some(v) => parse_enum(&s, "variant", &v)?,
        None => ModelVariant::FullTcl,
    };
    let start = s.energy("grid_start")?;
    let end = s.energy("grid_end")?;
    let step = s.energy("grid_step")?;
    run.grid = match (start, end, step) {
        (None, None, None) => GridSpec::Default,
        (Some(a), Some(b), Some(h)) => {
            if !(h > 0.0) || !(b > a) {
                return Err(s.bad("grid_step", "need grid_end > grid_start and grid_step > 0"));
            }
            GridSpec::Uniform { start: a, end: b, step: h }
        }
        _ => {
            return Err(ConfigError::Missing {
                section: "run",
                keys: vec!["grid_start", "grid_end", "grid_step"],
            })
        }
    };
    if let Some(p) = s.energies("pumps")? {
        run.pumps = p;
    }
    if let Some(n) = s.integers("n_max_list")? {
        run.n_max_list = n;
    }
    if let Some(c) = s.string("channel")? {
        run.channel = match c.as_str() {
            "auto" => ChannelChoice::Auto,
            "i_x" | "exciton" => ChannelChoice::Exciton,
            "i_c" | "cavity" => ChannelChoice::Cavity,
            _ => return Err(s.bad("channel", format!("expected auto, i_x or i_c, got `{c}`"))),
        };
    }
    run.center = s.energy("center")?;
    if let Some(v) = s.energy("search_half_width")? {
        run.search_half_width = v;
    }
    if let Some(v) = s.float("window_multiple")? {
        run.window_multiple = v;
    }
    run.ipl_half_width = s.energy("ipl_half_width")?;
    if let Some(v) = s.float("convergence_tolerance")? {
        run.convergence_tolerance = v;
    }
    if let Some(v) = s.boolean("plot")? {
        run.plot = v;
    }
    if let Some(v) = s.boolean("log_y")? {
        run.log_y = v;
    }
    if let Some(v) = s.boolean("normalize")? {
        run.normalize = v;
    }
    s.finish()?;
    Ok((variant, run))
}

impl RunConfig {
    /// Resolved configuration as ordered key/value pairs (for file headers).
    pub fn metadata(&self) -> BTreeMap<String, String> {
        let b = &self.bath;
        let s = &self.system;
        let r = &self.run;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("bath.alpha_p", b.alpha_p.to_string());
        put("bath.alpha_convention", b.alpha_convention.to_string());
        put("bath.omega_b_rad_per_ps", b.omega_b.to_string());
        put("bath.temperature", b.temperature.to_string());
        put("system.drive", s.drive.to_string());
        put("system.delta_cx", s.delta_cx.to_string());
        put("system.g", s.g.to_string());
        put("system.eta_x", s.eta_x.to_string());
        put("system.eta_c", s.eta_c.to_string());
        put("system.gamma", s.gamma.to_string());
        put("system.kappa", s.kappa.to_string());
        put("system.gamma_prime", s.gamma_prime.to_string());
        put("system.laser_detuning", s.laser_detuning().to_string());
        put("system.n_max", s.n_max.to_string());
        put("system.explicit_polaron_shift", s.explicit_polaron_shift.to_string());
        put("run.variant", self.variant.to_string());
        put("run.grid", r.grid.to_string());
        put("run.pumps", format!("{:?}", r.pumps));
        put("run.n_max_list", format!("{:?}", r.n_max_list));
        put("run.channel", format!("{:?}", r.channel).to_lowercase());
        put("run.center", r.center.map_or("auto".into(), |c| c.to_string()));
        put("run.search_half_width", r.search_half_width.to_string());
        put("run.window_multiple", r.window_multiple.to_string());
        put("run.ipl_half_width", r.ipl_half_width.map_or("whole grid".into(), |v| v.to_string()));
        put("run.convergence_tolerance", r.convergence_tolerance.to_string());
        put("run.normalize", r.normalize.to_string());
        m
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Default => f.write_str("default"),
            GridSpec::Uniform { start, end, step } => write!(f, "{start}:{step}:{end}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
[bath]
alpha_p = 0.06
omega_b_mev = 1.0
temperature = 4

[system]
drive = "exciton"
delta_cx_mev = 3
g = 20
kappa = 50
gamma = 2
gamma_prime = 2
eta_x = 40
"#;

    #[test]
    fn canonical_config() {
        let c = parse_config(CANONICAL).unwrap();
        let want = SystemParams::exciton_driven(40.0, 3000.0);
        assert_eq!(c.system, want);
        assert_eq!(c.bath, BathParams::reference(4.0));
        assert_eq!(c.variant, ModelVariant::FullTcl);
        assert_eq!(c.system.n_max, 2);
    }

    #[test]
    fn empty_system_names_required_keys() {
        let e = parse_config("[bath]\ntemperature = 4\n[system]\n").unwrap_err();
        let msg = e.to_string();
        for k in SYSTEM_REQUIRED {
            assert!(msg.contains(k), "{msg}");
        }
    }

    #[test]
    fn two_drives_rejected() {
        let text = CANONICAL.replace("eta_x = 40", "eta_x = 40\neta_c = 40");
        let e = parse_config(&text).unwrap_err();
        assert!(e.to_string().contains("eta_c"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = CANONICAL.replace("g = 20", "g = 20\nkapa = 3");
        assert!(matches!(parse_config(&text), Err(ConfigError::UnknownKey { .. })));
        let text = format!("{CANONICAL}\n[extra]\nx = 1\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::UnknownKey { .. })));
    }

    #[test]
    fn duplicate_units_rejected() {
        let text = CANONICAL.replace("g = 20", "g = 20\ng_mev = 0.02");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_config("[bath]\ntemperature = \n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn cavity_default_truncation_and_run_section() {
        let text = r#"
[bath]
temperature = 4
[system]
drive = "cavity"
delta_cx = 500
g = 20
kappa = 50
gamma = 2
gamma_prime = 2
eta_c = 30
[run]
variant = "epme"
grid_start = 0
grid_end = 1000
grid_step = 5
pumps = [20, 40, 60]
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.system.n_max, 6);
        assert_eq!(c.variant, ModelVariant::Epme);
        assert_eq!(c.run.pumps, vec![20.0, 40.0, 60.0]);
        assert_eq!(c.run.grid.points(500.0).len(), 201);
    }
}
