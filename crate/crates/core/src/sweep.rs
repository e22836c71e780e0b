//! Parameter sweeps over (f̃_dc, f_ac, θ) and the derived resonance diagnostics.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::OhmicBath;
use crate::error::{LzsError, Result};
use crate::floquet::{floquet_states, matrix_elements, FloquetBasis, FloquetSettings};
use crate::master::{
    build_generator, initial_state, positivity_defect, rate_tensor, steady_state, timescales, Dynamics, Generator,
    Observable,
};
use crate::model::{Axis, CouplingSpec, DrivenModel, FluxQubit, MultilevelCoupling, MultilevelProjection, NoiseKind, TlsParams};

/// P₊ below −ε or above 1+ε flags the cell.
pub const POSITIVITY_ALLOWANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// σ_z on the TLS, flux noise for the multilevel model
    Longitudinal,
    /// σ_y on the TLS, charge noise for the multilevel model
    Transverse,
    /// σ_x on the TLS, critical-current noise for the multilevel model
    CriticalCurrent,
}

/// Which factor of the mixing angle multiplies a channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mixing {
    Cos,
    Sin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub kind: CouplingKind,
    pub strength: f64,
    pub mixing: Option<Mixing>,
    pub bath: OhmicBath,
}

impl Channel {
    pub fn new(kind: CouplingKind, strength: f64, bath: OhmicBath) -> Self {
        Channel { kind, strength, mixing: None, bath }
    }

    pub fn mixed(mut self, mixing: Mixing) -> Self {
        self.mixing = Some(mixing);
        self
    }

    pub fn weight(&self, theta: f64) -> f64 {
        match self.mixing {
            None => self.strength,
            Some(Mixing::Cos) => self.strength * theta.cos(),
            Some(Mixing::Sin) => self.strength * theta.sin(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Device {
    Tls(TlsParams),
    Multilevel { qubit: Arc<FluxQubit>, levels: usize },
}

impl Device {
    pub fn tls(&self) -> &TlsParams {
        match self {
            Device::Tls(t) => t,
            Device::Multilevel { qubit, .. } => &qubit.tls,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimePoint {
    /// t = m·τ
    Periods(f64),
    Steady,
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::Periods(m) => write!(f, "{m}"),
            TimePoint::Steady => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    /// average over [t, t + τ]
    #[default]
    PeriodAverage,
    /// P₊ at t = m·τ exactly
    Stroboscopic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Observables {
    pub p_plus: bool,
    pub timescales: bool,
    pub spectrum: bool,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub device: Device,
    pub omega0: f64,
    pub f_dc: Vec<f64>,
    pub f_ac: Vec<f64>,
    pub theta: Vec<f64>,
    pub channels: Vec<Channel>,
    pub times: Vec<TimePoint>,
    pub measurement: Measurement,
    pub observables: Observables,
    pub settings: FloquetSettings,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.f_dc.is_empty() || self.f_ac.is_empty() || self.theta.is_empty() {
            return Err(LzsError::InvalidParameter("sweep grids must be non-empty".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.f_dc) || !finite(&self.f_ac) || !finite(&self.theta) {
            return Err(LzsError::InvalidParameter("grid values must be finite".into()));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(LzsError::InvalidParameter("omega0 must be > 0".into()));
        }
        if self.observables.p_plus && self.times.is_empty() {
            return Err(LzsError::InvalidParameter("at least one evaluation time is required".into()));
        }
        for t in &self.times {
            if let TimePoint::Periods(m) = t {
                if !(*m >= 0.0 && m.is_finite()) {
                    return Err(LzsError::InvalidParameter(format!("times must be ≥ 0, got {m}")));
                }
            }
        }
        for ch in &self.channels {
            ch.bath.validate()?;
        }
        self.settings.validate()
    }

    pub fn f_omega(&self) -> f64 {
        self.device.tls().f_omega(self.omega0)
    }

    pub fn len(&self) -> usize {
        self.f_dc.len() * self.f_ac.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid order: θ slowest, then f_ac, f̃_dc fastest.
    pub fn point(&self, index: usize) -> (f64, f64, f64) {
        let nd = self.f_dc.len();
        let na = self.f_ac.len();
        (self.f_dc[index % nd], self.f_ac[(index / nd) % na], self.theta[index / (nd * na)])
    }

    fn baths(&self) -> Vec<OhmicBath> {
        self.channels
            .iter()
            .enumerate()
            .map(|(k, ch)| OhmicBath { tag: channel_tag(k), ..ch.bath.clone() })
            .collect()
    }
}

// each channel gets its own bath, so tags are positional
fn channel_tag(k: usize) -> String {
    format!("ch{k}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Ok,
    /// state left the physical range by more than the allowance
    Positivity,
    /// no complex pair in the spectrum: t_d absent
    NoPair,
    NonUnique,
    Error,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flag::Ok => "ok",
            Flag::Positivity => "positivity",
            Flag::NoPair => "no_pair",
            Flag::NonUnique => "nonunique",
            Flag::Error => "error",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct PointResult {
    pub f_dc: f64,
    pub f_ac: f64,
    pub theta: f64,
    /// one entry per requested time; NaN in a flagged cell
    pub p_plus: Vec<f64>,
    pub positivity_defect: Vec<f64>,
    pub t_r: Option<f64>,
    pub t_d: Option<f64>,
    pub t_phi: Option<f64>,
    pub spectrum: Vec<Complex64>,
    pub flag: Flag,
    pub message: Option<String>,
    /// largest harmonic tail weight among the coupling tables
    pub harmonic_tail: f64,
    pub unitarity_defect: f64,
}

#[derive(Clone, Debug)]
pub struct LzsMap {
    pub f_dc: Vec<f64>,
    pub f_ac: Vec<f64>,
    pub theta: Vec<f64>,
    pub times: Vec<TimePoint>,
    pub f_omega: f64,
    pub omega0: f64,
    /// reference time scale t_exp = 1000τ
    pub t_exp: f64,
    pub points: Vec<PointResult>,
}

impl LzsMap {
    /// P₊ along f̃_dc at fixed (f_ac, θ) indices and time index.
    pub fn line(&self, ac: usize, th: usize, time: usize) -> Vec<(f64, f64)> {
        let nd = self.f_dc.len();
        let base = (th * self.f_ac.len() + ac) * nd;
        (0..nd).map(|i| (self.f_dc[i], self.points[base + i].p_plus[time])).collect()
    }

    pub fn flagged(&self) -> usize {
        self.points.iter().filter(|p| p.flag != Flag::Ok).count()
    }
}

/// Per-point pipeline shared by all sweep modes.
pub struct PointSystem {
    pub model: DrivenModel,
    pub basis: FloquetBasis,
    pub generator: Generator,
    pub harmonic_tail: f64,
}

impl PointSystem {
    pub fn build(spec: &SweepSpec, projection: Option<&MultilevelProjection>, f_dc: f64, f_ac: f64, theta: f64) -> Result<Self> {
        let model = build_model(spec, projection, f_dc, f_ac, theta)?;
        let basis = floquet_states(&model, &spec.settings)?;
        let elements = matrix_elements(&basis, &model.couplings)?;
        let harmonic_tail = elements.tables.iter().map(|t| t.tail).fold(0.0, f64::max);
        let r = rate_tensor(&elements, &spec.baths(), &basis)?;
        let generator = build_generator(&r, &basis)?;
        Ok(PointSystem { model, basis, generator, harmonic_tail })
    }
}

/// The driven model at one grid point; multilevel devices need the static
/// projection of that f̃_dc row.
pub fn build_model(spec: &SweepSpec, projection: Option<&MultilevelProjection>, f_dc: f64, f_ac: f64, theta: f64) -> Result<DrivenModel> {
    match &spec.device {
        Device::Tls(tls) => {
            let couplings: Vec<CouplingSpec> = spec
                .channels
                .iter()
                .enumerate()
                .map(|(k, ch)| {
                    let axis = match ch.kind {
                        CouplingKind::Longitudinal => Axis::Z,
                        CouplingKind::Transverse => Axis::Y,
                        CouplingKind::CriticalCurrent => Axis::X,
                    };
                    CouplingSpec::new(axis, ch.weight(theta), channel_tag(k))
                })
                .collect();
            crate::model::build_tls_model(tls, f_dc, f_ac, spec.omega0, &couplings)
        }
        Device::Multilevel { .. } => {
            let projection = projection.ok_or_else(|| LzsError::InvalidParameter("multilevel model needs a static projection".into()))?;
            let couplings: Vec<MultilevelCoupling> = spec
                .channels
                .iter()
                .enumerate()
                .map(|(k, ch)| {
                    let kind = match ch.kind {
                        CouplingKind::Longitudinal => NoiseKind::Flux,
                        CouplingKind::Transverse => NoiseKind::Charge,
                        CouplingKind::CriticalCurrent => NoiseKind::CriticalCurrent,
                    };
                    MultilevelCoupling { kind, scale: ch.weight(theta), tag: channel_tag(k) }
                })
                .collect();
            projection.model(f_ac, spec.omega0, &couplings)
        }
    }
}

fn evaluate(spec: &SweepSpec, projection: Option<&MultilevelProjection>, index: usize) -> PointResult {
    let (f_dc, f_ac, theta) = spec.point(index);
    let nt = spec.times.len();
    let mut out = PointResult {
        f_dc,
        f_ac,
        theta,
        p_plus: vec![f64::NAN; if spec.observables.p_plus { nt } else { 0 }],
        positivity_defect: vec![f64::NAN; if spec.observables.p_plus { nt } else { 0 }],
        t_r: None,
        t_d: None,
        t_phi: None,
        spectrum: Vec::new(),
        flag: Flag::Ok,
        message: None,
        harmonic_tail: f64::NAN,
        unitarity_defect: f64::NAN,
    };
    if let Err(e) = fill_point(spec, projection, &mut out) {
        out.flag = match e {
            LzsError::NonUniqueSteadyState { .. } => Flag::NonUnique,
            _ => Flag::Error,
        };
        out.message = Some(e.to_string());
        out.p_plus.iter_mut().for_each(|p| *p = f64::NAN);
    }
    out
}

fn fill_point(spec: &SweepSpec, projection: Option<&MultilevelProjection>, out: &mut PointResult) -> Result<()> {
    let sys = PointSystem::build(spec, projection, out.f_dc, out.f_ac, out.theta)?;
    out.harmonic_tail = sys.harmonic_tail;
    out.unitarity_defect = sys.basis.unitarity_defect;
    if spec.observables.timescales || spec.observables.spectrum {
        let ts = timescales(&sys.generator)?;
        out.t_r = ts.t_r;
        out.t_d = ts.t_d;
        out.t_phi = ts.t_phi();
        if spec.observables.timescales && ts.t_d.is_none() {
            out.flag = Flag::NoPair;
        }
        if spec.observables.spectrum {
            out.spectrum = ts.eigenvalues;
        }
    }
    if spec.observables.p_plus {
        let obs = Observable::new(&sys.basis, &sys.model.projector_plus)?;
        let tau = sys.basis.period();
        let needs_dynamics = spec.times.iter().any(|t| matches!(t, TimePoint::Periods(_)));
        let dynamics = if needs_dynamics {
            Some(Dynamics::new(&sys.generator, &initial_state(&sys.model, &sys.basis)?)?)
        } else {
            None
        };
        let steady = if spec.times.contains(&TimePoint::Steady) { Some(steady_state(&sys.generator)?) } else { None };
        for (k, t) in spec.times.iter().enumerate() {
            let (p, rho) = match t {
                TimePoint::Periods(m) => {
                    let d = dynamics.as_ref().unwrap();
                    let rho = d.state(m * tau);
                    let p = match spec.measurement {
                        Measurement::PeriodAverage => d.window_average(&obs, m * tau, tau),
                        Measurement::Stroboscopic => obs.stroboscopic(&rho),
                    };
                    (p, rho)
                }
                TimePoint::Steady => {
                    let rho = steady.clone().unwrap();
                    let p = match spec.measurement {
                        Measurement::PeriodAverage => obs.stationary_average(&rho),
                        Measurement::Stroboscopic => obs.stroboscopic(&rho),
                    };
                    (p, rho)
                }
            };
            let defect = positivity_defect(&rho);
            out.p_plus[k] = p;
            out.positivity_defect[k] = defect;
            if defect > POSITIVITY_ALLOWANCE || !(-POSITIVITY_ALLOWANCE..=1.0 + POSITIVITY_ALLOWANCE).contains(&p) {
                out.flag = Flag::Positivity;
            }
        }
    }
    Ok(())
}

/// Static projections, one per f̃_dc row (multilevel only).
pub fn projections(spec: &SweepSpec) -> Result<Vec<Option<MultilevelProjection>>> {
    match &spec.device {
        Device::Tls(_) => Ok(vec![None; spec.f_dc.len()]),
        Device::Multilevel { qubit, levels } => spec
            .f_dc
            .par_iter()
            .map(|&f| qubit.projection(f, *levels).map(Some))
            .collect(),
    }
}

/// Evaluates every grid point; output order is grid order whatever the scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<LzsMap> {
    spec.validate()?;
    let proj = projections(spec)?;
    let nd = spec.f_dc.len();
    let points: Vec<PointResult> = (0..spec.len())
        .into_par_iter()
        .map(|i| evaluate(spec, proj[i % nd].as_ref(), i))
        .collect();
    Ok(LzsMap {
        f_dc: spec.f_dc.clone(),
        f_ac: spec.f_ac.clone(),
        theta: spec.theta.clone(),
        times: spec.times.clone(),
        f_omega: spec.f_omega(),
        omega0: spec.omega0,
        t_exp: 1000.0 * 2.0 * std::f64::consts::PI / spec.omega0,
        points,
    })
}

/// Sweep of t_r, t_d (and the raw spectrum) only.
pub fn timescale_scan(spec: &SweepSpec) -> Result<LzsMap> {
    let mut s = spec.clone();
    s.observables = Observables { p_plus: false, timescales: true, spectrum: true };
    run_sweep(&s)
}

/// Unitary time average of P₊ from the static ground state, over `n_periods`
/// periods or, for `None`, over infinite time.
pub fn isolated_average(model: &DrivenModel, n_periods: Option<f64>, settings: &FloquetSettings) -> Result<f64> {
    let basis = floquet_states(model, settings)?;
    let gen = Generator::coherent(&basis);
    let rho0 = initial_state(model, &basis)?;
    let obs = Observable::new(&basis, &model.projector_plus)?;
    let dynamics = Dynamics::new(&gen, &rho0)?;
    let window = match n_periods {
        Some(n) if n > 0.0 && n.is_finite() => n * basis.period(),
        Some(n) => return Err(LzsError::InvalidParameter(format!("n_periods must be > 0, got {n}"))),
        None => f64::INFINITY,
    };
    Ok(dynamics.window_average(&obs, 0.0, window))
}

/// `isolated_average` over the (f̃_dc, f_ac) grid at the first θ; NaN marks failed cells.
pub fn isolated_map(spec: &SweepSpec, n_periods: Option<f64>) -> Result<Vec<(f64, f64, f64)>> {
    spec.validate()?;
    let proj = projections(spec)?;
    let nd = spec.f_dc.len();
    let theta = spec.theta[0];
    Ok((0..nd * spec.f_ac.len())
        .into_par_iter()
        .map(|i| {
            let (f_dc, f_ac) = (spec.f_dc[i % nd], spec.f_ac[i / nd]);
            let p = build_model(spec, proj[i % nd].as_ref(), f_dc, f_ac, theta)
                .and_then(|m| isolated_average(&m, n_periods, &spec.settings))
                .unwrap_or(f64::NAN);
            (f_dc, f_ac, p)
        })
        .collect())
}

/// Resonance shape asymmetry S ∈ [−1, 1] of a P₊(f̃_dc) scan around n·f_ω.
///
/// S = Σ_δ[P(n+δ) − P(n−δ)] / Σ_δ(|P(n+δ) − P(n−δ)| + |P(n+δ) + P(n−δ) − 2b|)
/// with b = P at the resonance centre. Odd shapes give |S| = 1, even ones 0.
/// The scan must be symmetric about n·f_ω on the sampled points.
pub fn asymmetry_metric(line: &[(f64, f64)], n: i32, f_omega: f64, window: f64) -> Result<f64> {
    let centre = n as f64 * f_omega;
    let tol = 1e-9 * f_omega;
    let at = |f: f64| line.iter().find(|(x, _)| (x - f).abs() <= tol).map(|p| p.1);
    let b = at(centre).ok_or_else(|| LzsError::InvalidParameter("scan does not sample the resonance centre".into()))?;
    let lo = line.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = line.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if lo > centre - window * f_omega + tol || hi < centre + window * f_omega - tol {
        return Err(LzsError::InvalidParameter("window truncated by the scan range".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(f, p_up) in line {
        let d = f - centre;
        if d <= tol || d > window * f_omega + tol {
            continue;
        }
        let p_dn = at(centre - d).ok_or_else(|| LzsError::InvalidParameter(format!("no mirror point for δ = {d:e}")))?;
        num += p_up - p_dn;
        den += (p_up - p_dn).abs() + (p_up + p_dn - 2.0 * b).abs();
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// n·f_ω + k·step for k = −m..=m: a scan symmetric about the resonance.
pub fn symmetric_scan(n: i32, f_omega: f64, half_width: f64, m: usize) -> Vec<f64> {
    let step = half_width * f_omega / m as f64;
    (-(m as i64)..=m as i64).map(|k| n as f64 * f_omega + k as f64 * step).collect()
}

/// `points` values evenly spaced over [start, stop].
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points).map(|i| start + (stop - start) * i as f64 / (points - 1) as f64).collect(),
    }
}
