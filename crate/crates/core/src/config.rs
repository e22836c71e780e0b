//! Run configuration: a TOML document with the sections below.
//!
//! ```toml
//! [device]
//! model = "tls"            # or "multilevel"
//! alpha = 0.8
//! eta = 0.25
//! n_charge = 20
//! levels = 4               # multilevel only
//! delta = "derive"         # tls: E_J units, or "derive" from the circuit
//! i_p = "derive"
//!
//! [drive]
//! omega0 = 0.003
//! f_dc = { start = 0.0, stop = 6.0, points = 121, unit = "f_omega" }
//! f_ac = 0.003             # scalar, list, range table or { values = [...], unit = ... }
//! theta = 0.0
//!
//! [[bath]]
//! tag = "flux"
//! gamma = 0.001
//! temperature = 0.0014
//! omega_c = 0.15
//!
//! [[coupling]]
//! tag = "flux"             # bath it talks to
//! kind = "longitudinal"    # transverse, critical_current
//! strength = 1.0           # or "derive"
//! mixing = "cos"           # optional: multiply by cos θ or sin θ
//!
//! [run]
//! mode = "finite_time"     # steady_state, timescales, rwa_compare, isolated
//! times = [1000.0]         # in periods; "steady" allowed
//! measurement = "period_average"
//! isolated_periods = 1000.0   # or "inf"
//!
//! [solver]
//! n_steps = 4096
//! n_grid = 4096
//! ```
//!
//! Unknown keys are errors. A `[meta]` table is accepted and ignored, so the
//! `.meta` file written next to every result can be fed back in.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use toml::de::{DeTable, DeValue};

use crate::floquet::FloquetSettings;
use crate::model::DEFAULT_N_CHARGE;
use crate::sweep::{linspace, CouplingKind, Measurement, Mixing};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    /// 1-based line and column of the offending item
    pub position: Option<(usize, usize)>,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        ConfigError { message: message.into(), position: None }
    }

    fn at(message: impl Into<String>, text: &str, span: Option<Range<usize>>) -> Self {
        ConfigError { message: message.into(), position: span.map(|s| line_col(text, s.start)) }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some((l, c)) => write!(f, "line {l}, column {c}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Derive {
    Derive,
}

/// A number, or the keyword "derive".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Derivable {
    Value(f64),
    Derived(Derive),
}

impl Derivable {
    pub fn value(self) -> Option<f64> {
        match self {
            Derivable::Value(v) => Some(v),
            Derivable::Derived(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tls,
    Multilevel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridUnit {
    /// Φ₀
    #[default]
    Flux,
    /// multiples of f_ω = ω₀/(4πI_p)
    FOmega,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Scalar(f64),
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        unit: GridUnit,
    },
    Values {
        values: Vec<f64>,
        #[serde(default)]
        unit: GridUnit,
    },
}

impl Grid {
    /// Grid values in flux units (`f_omega` converts f_ω multiples).
    pub fn resolve(&self, f_omega: f64) -> Vec<f64> {
        let scale = |u: &GridUnit| if *u == GridUnit::FOmega { f_omega } else { 1.0 };
        match self {
            Grid::Scalar(v) => vec![*v],
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, points, unit } => linspace(*start, *stop, *points).into_iter().map(|x| x * scale(unit)).collect(),
            Grid::Values { values, unit } => values.iter().map(|x| x * scale(unit)).collect(),
        }
    }

    fn raw_len(&self) -> usize {
        match self {
            Grid::Scalar(_) => 1,
            Grid::List(v) | Grid::Values { values: v, .. } => v.len(),
            Grid::Range { points, .. } => *points,
        }
    }

    fn numbers(&self) -> Vec<f64> {
        match self {
            Grid::Scalar(v) => vec![*v],
            Grid::List(v) | Grid::Values { values: v, .. } => v.clone(),
            Grid::Range { start, stop, .. } => vec![*start, *stop],
        }
    }
}

fn zero_grid() -> Grid {
    Grid::Scalar(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub model: ModelKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_n_charge")]
    pub n_charge: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "derived")]
    pub delta: Derivable,
    #[serde(default = "derived")]
    pub i_p: Derivable,
}

fn default_alpha() -> f64 {
    0.8
}
fn default_eta() -> f64 {
    0.25
}
fn default_n_charge() -> usize {
    DEFAULT_N_CHARGE
}
fn default_levels() -> usize {
    4
}
fn derived() -> Derivable {
    Derivable::Derived(Derive::Derive)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default = "default_omega0")]
    pub omega0: f64,
    pub f_dc: Grid,
    pub f_ac: Grid,
    #[serde(default = "zero_grid")]
    pub theta: Grid,
}

fn default_omega0() -> f64 {
    0.003
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub tag: String,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_omega_c")]
    pub omega_c: f64,
}

fn default_gamma() -> f64 {
    0.001
}
fn default_temperature() -> f64 {
    0.0014
}
fn default_omega_c() -> f64 {
    crate::bath::DEFAULT_OMEGA_C
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub tag: String,
    pub kind: CouplingKind,
    #[serde(default = "unit_strength")]
    pub strength: Derivable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<Mixing>,
}

fn unit_strength() -> Derivable {
    Derivable::Value(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FiniteTime,
    SteadyState,
    Timescales,
    RwaCompare,
    Isolated,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::FiniteTime => "finite_time",
            Mode::SteadyState => "steady_state",
            Mode::Timescales => "timescales",
            Mode::RwaCompare => "rwa_compare",
            Mode::Isolated => "isolated",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Mode::FiniteTime, Mode::SteadyState, Mode::Timescales, Mode::RwaCompare, Mode::Isolated]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Steady {
    Steady,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Infinite {
    Inf,
}

/// An evaluation time in periods, or "steady".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Periods(f64),
    Steady(Steady),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PeriodCount {
    Finite(f64),
    Infinite(Infinite),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    #[serde(default = "default_times")]
    pub times: Vec<TimeSpec>,
    #[serde(default)]
    pub measurement: Measurement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "default_isolated_periods")]
    pub isolated_periods: PeriodCount,
}

fn default_times() -> Vec<TimeSpec> {
    vec![TimeSpec::Periods(1000.0)]
}
fn default_isolated_periods() -> PeriodCount {
    PeriodCount::Finite(1000.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceConfig,
    pub drive: DriveConfig,
    #[serde(default, rename = "bath")]
    pub baths: Vec<BathConfig>,
    #[serde(default, rename = "coupling")]
    pub couplings: Vec<CouplingConfig>,
    pub run: RunSection,
    #[serde(default)]
    pub solver: FloquetSettings,
    /// diagnostics of an earlier run; ignored on input
    #[serde(default, skip_serializing)]
    pub meta: Option<toml::Table>,
}

const REQUIRED: [(&str, &str); 4] = [("device", "model"), ("drive", "f_dc"), ("drive", "f_ac"), ("run", "mode")];

type Path<'a> = Vec<PathItem<'a>>;

#[derive(Clone, Copy, Debug)]
enum PathItem<'a> {
    Key(&'a str),
    Index(usize),
}

fn lookup(doc: &DeValue<'_>, path: &[PathItem<'_>]) -> Option<Range<usize>> {
    let mut span = None;
    let mut node = doc;
    for item in path {
        let next = match item {
            PathItem::Key(k) => node.get(*k)?,
            PathItem::Index(i) => node.get(*i)?,
        };
        span = Some(next.span());
        node = next.get_ref();
    }
    span
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc = DeTable::parse(text).map_err(|e| ConfigError::at(e.message().to_string(), text, e.span()))?;
    let root = DeValue::Table(doc.into_inner());

    let missing: Vec<String> = REQUIRED
        .iter()
        .filter(|(s, k)| root.get(*s).and_then(|t| t.get_ref().get(*k)).is_none())
        .map(|(s, k)| format!("{s}.{k}"))
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::new(format!("missing required keys: {}", missing.join(", "))));
    }

    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::at(e.message().to_string(), text, e.span()))?;
    validate(&cfg).map_err(|(msg, path)| ConfigError::at(msg, text, lookup(&root, &path)))?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), (String, Path<'static>)> {
    use PathItem::{Index, Key};
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let d = &cfg.device;
    if !(d.alpha > 0.0 && d.alpha < 2.0) {
        return Err(("alpha must lie in (0, 2)".into(), vec![Key("device"), Key("alpha")]));
    }
    if !(d.eta > 0.0 && d.eta < 2.0) {
        return Err(("eta must lie in (0, 2)".into(), vec![Key("device"), Key("eta")]));
    }
    if d.n_charge < 4 {
        return Err(("n_charge must be ≥ 4".into(), vec![Key("device"), Key("n_charge")]));
    }
    if d.model == ModelKind::Multilevel && !(2..=8).contains(&d.levels) {
        return Err(("levels must lie in 2..=8".into(), vec![Key("device"), Key("levels")]));
    }
    if d.delta.value().is_some() != d.i_p.value().is_some() {
        return Err(("delta and i_p must both be numbers or both \"derive\"".into(), vec![Key("device"), Key("delta")]));
    }
    for (key, v) in [("delta", d.delta), ("i_p", d.i_p)] {
        if let Some(x) = v.value() {
            let ok = if key == "delta" { x >= 0.0 && x.is_finite() } else { positive(x) };
            if !ok {
                return Err((format!("{key} must be {}", if key == "delta" { "≥ 0" } else { "> 0" }), vec![Key("device"), Key(key)]));
            }
            if d.model == ModelKind::Multilevel {
                return Err((format!("{key} applies to the tls model only"), vec![Key("device"), Key(key)]));
            }
        }
    }
    if !positive(cfg.drive.omega0) {
        return Err(("omega0 must be > 0".into(), vec![Key("drive"), Key("omega0")]));
    }
    for (key, g) in [("f_dc", &cfg.drive.f_dc), ("f_ac", &cfg.drive.f_ac), ("theta", &cfg.drive.theta)] {
        if g.raw_len() == 0 {
            return Err((format!("{key} grid is empty"), vec![Key("drive"), Key(key)]));
        }
        if g.numbers().iter().any(|x| !x.is_finite()) {
            return Err((format!("{key} values must be finite"), vec![Key("drive"), Key(key)]));
        }
    }
    for (i, b) in cfg.baths.iter().enumerate() {
        if !(b.gamma >= 0.0 && b.gamma.is_finite()) {
            return Err(("gamma must be ≥ 0".into(), vec![Key("bath"), Index(i), Key("gamma")]));
        }
        if !positive(b.temperature) {
            return Err(("temperature must be > 0".into(), vec![Key("bath"), Index(i), Key("temperature")]));
        }
        if !positive(b.omega_c) {
            return Err(("omega_c must be > 0".into(), vec![Key("bath"), Index(i), Key("omega_c")]));
        }
        if cfg.baths[..i].iter().any(|o| o.tag == b.tag) {
            return Err((format!("duplicate bath tag '{}'", b.tag), vec![Key("bath"), Index(i), Key("tag")]));
        }
    }
    for (i, c) in cfg.couplings.iter().enumerate() {
        if !cfg.baths.iter().any(|b| b.tag == c.tag) {
            return Err((format!("coupling refers to unknown bath '{}'", c.tag), vec![Key("coupling"), Index(i), Key("tag")]));
        }
        if let Some(s) = c.strength.value() {
            if !s.is_finite() {
                return Err(("strength must be finite".into(), vec![Key("coupling"), Index(i), Key("strength")]));
            }
        } else if d.model == ModelKind::Tls && (d.delta.value().is_some() || d.i_p.value().is_some()) {
            return Err((
                "strength = \"derive\" needs delta and i_p derived from the circuit".into(),
                vec![Key("coupling"), Index(i), Key("strength")],
            ));
        }
    }
    let needs_bath = matches!(cfg.run.mode, Mode::FiniteTime | Mode::SteadyState | Mode::Timescales | Mode::RwaCompare);
    if needs_bath && cfg.couplings.is_empty() {
        return Err((format!("mode {} needs at least one [[coupling]]", cfg.run.mode.name()), vec![Key("run"), Key("mode")]));
    }
    if cfg.run.mode == Mode::FiniteTime && cfg.run.times.is_empty() {
        return Err(("times must not be empty".into(), vec![Key("run"), Key("times")]));
    }
    for (i, t) in cfg.run.times.iter().enumerate() {
        if let TimeSpec::Periods(m) = t {
            if !(*m >= 0.0 && m.is_finite()) {
                return Err(("times must be ≥ 0 periods".into(), vec![Key("run"), Key("times"), Index(i)]));
            }
        }
    }
    if let PeriodCount::Finite(n) = cfg.run.isolated_periods {
        if !positive(n) {
            return Err(("isolated_periods must be > 0".into(), vec![Key("run"), Key("isolated_periods")]));
        }
    }
    if cfg.run.mode == Mode::RwaCompare && d.model != ModelKind::Tls {
        return Err(("rwa_compare requires the tls model".into(), vec![Key("device"), Key("model")]));
    }
    cfg.solver.validate().map_err(|e| (e.to_string(), vec![Key("solver")]))?;
    Ok(())
}

/// TOML text that parses back to the same configuration.
pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration is always representable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BASELINE: &str = r#"
[device]
model = "tls"
delta = 3.33e-4
i_p = 0.721

[drive]
omega0 = 0.003
f_dc = { start = 0.0, stop = 6.0, points = 61, unit = "f_omega" }
f_ac = 0.003

[[bath]]
tag = "flux"
gamma = 0.001
temperature = 0.0014

[[coupling]]
tag = "flux"
kind = "longitudinal"

[run]
mode = "finite_time"
times = [1000]
"#;

    #[test]
    fn baseline_parses_with_defaults() {
        let cfg = parse_config(BASELINE).unwrap();
        assert_eq!(cfg.device.alpha, 0.8);
        assert_eq!(cfg.device.delta, Derivable::Value(3.33e-4));
        assert_eq!(cfg.baths[0].omega_c, 0.15);
        assert_eq!(cfg.couplings[0].strength, Derivable::Value(1.0));
        assert_eq!(cfg.run.measurement, Measurement::PeriodAverage);
        assert_eq!(cfg.run.times, vec![TimeSpec::Periods(1000.0)]);
        assert_eq!(cfg.solver, FloquetSettings::default());
        assert_eq!(cfg.drive.theta, Grid::Scalar(0.0));
        let f = cfg.drive.f_dc.resolve(0.5);
        assert_eq!(f.len(), 61);
        assert_eq!(f[60], 3.0);
    }

    #[test]
    fn empty_file_lists_every_required_key() {
        let e = parse_config("").unwrap_err();
        for key in ["device.model", "drive.f_dc", "drive.f_ac", "run.mode"] {
            assert!(e.message.contains(key), "{e}");
        }
    }

    #[test]
    fn negative_gamma_is_located() {
        let text = BASELINE.replace("gamma = 0.001", "gamma = -0.001");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.message, "gamma must be ≥ 0");
        let line = text.lines().position(|l| l.starts_with("gamma")).unwrap() + 1;
        assert_eq!(e.position, Some((line, 9)));
    }

    #[test]
    fn unknown_keys_and_type_errors_carry_positions() {
        let text = BASELINE.replace("omega0 = 0.003", "omega0 = 0.003\nomega1 = 2");
        let e = parse_config(&text).unwrap_err();
        assert!(e.message.contains("omega1"), "{e}");
        let line = text.lines().position(|l| l.starts_with("omega1")).unwrap() + 1;
        assert_eq!(e.position.unwrap().0, line);

        let text = BASELINE.replace("kind = \"longitudinal\"", "kind = 3");
        let e = parse_config(&text).unwrap_err();
        let line = text.lines().position(|l| l.starts_with("kind")).unwrap() + 1;
        assert_eq!(e.position.unwrap().0, line);

        let e = parse_config("[device\nmodel=1").unwrap_err();
        assert_eq!(e.position.unwrap().0, 1);
    }

    #[test]
    fn semantic_checks() {
        let bad = [
            ("tag = \"flux\"\nkind", "tag = \"charge\"\nkind"),
            ("mode = \"finite_time\"", "mode = \"rwa\""),
            ("omega0 = 0.003", "omega0 = 0"),
            ("times = [1000]", "times = [-1]"),
            ("i_p = 0.721", "i_p = 0.721\nlevels = 4\nstrength = 1"),
        ];
        for (from, to) in bad {
            assert!(parse_config(&BASELINE.replace(from, to)).is_err(), "{to}");
        }
        let derive = BASELINE.replace("kind = \"longitudinal\"", "kind = \"longitudinal\"\nstrength = \"derive\"");
        assert!(parse_config(&derive).unwrap_err().message.contains("derive"));
    }

    #[test]
    fn meta_table_is_ignored() {
        let text = format!("{BASELINE}\n[meta]\nversion = \"0.1.0\"\nwall_time_s = 1.5\n");
        let cfg = parse_config(&text).unwrap();
        let plain = parse_config(BASELINE).unwrap();
        assert_eq!(cfg.device, plain.device);
        assert_eq!(cfg.run, plain.run);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in ["finite_time", "steady_state", "timescales", "rwa_compare", "isolated"] {
            assert_eq!(m.parse::<Mode>().unwrap().name(), m);
        }
        assert!("other".parse::<Mode>().is_err());
    }

    fn grid_strategy() -> impl Strategy<Value = Grid> {
        prop_oneof![
            (-1e-2f64..1e-2).prop_map(Grid::Scalar),
            prop::collection::vec(-1e-2f64..1e-2, 1..4).prop_map(Grid::List),
            (0.0f64..1.0, 1.0f64..6.0, 2usize..50).prop_map(|(a, b, n)| Grid::Range { start: a, stop: b, points: n, unit: GridUnit::FOmega }),
        ]
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(
            f_dc in grid_strategy(),
            f_ac in grid_strategy(),
            gamma in 0.0f64..0.01,
            temperature in 1e-4f64..1e-2,
            theta in 0.0f64..1.6,
            steady in any::<bool>(),
            tls in any::<bool>(),
        ) {
            let mut cfg = parse_config(BASELINE).unwrap();
            cfg.drive.f_dc = f_dc;
            cfg.drive.f_ac = f_ac;
            cfg.drive.theta = Grid::Scalar(theta);
            cfg.baths[0].gamma = gamma;
            cfg.baths[0].temperature = temperature;
            cfg.couplings[0].mixing = Some(Mixing::Cos);
            if steady {
                cfg.run.times.push(TimeSpec::Steady(Steady::Steady));
                cfg.run.isolated_periods = PeriodCount::Infinite(Infinite::Inf);
            }
            if !tls {
                cfg.device.model = ModelKind::Multilevel;
                cfg.device.delta = derived();
                cfg.device.i_p = derived();
            }
            cfg.solver.harmonics = Some(40);
            let text = to_toml(&cfg);
            prop_assert_eq!(parse_config(&text).unwrap(), cfg);
        }
    }
}
