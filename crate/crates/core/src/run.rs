//! Config-driven runs: resolve a [`RunConfig`] into a sweep, evaluate it and
//! render the CSV values file and the `.meta` companion.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::bath::OhmicBath;
use crate::config::{Derivable, ModelKind, Mode, PeriodCount, RunConfig, TimeSpec};
use crate::error::{LzsError, Result};
use crate::model::{compute_tls_parameters, FluxQubit, FqParams, TlsParams};
use crate::rwa::{dressed_coupling_coefficients, dressed_params, nearest_resonance, rates_longitudinal, rates_transverse, rotation_angle};
use crate::sweep::{isolated_map, run_sweep, Channel, CouplingKind, Device, Flag, LzsMap, Observables, SweepSpec, TimePoint};

pub const UNITS_HEADER: &str = "# units: energy E_J, time hbar/E_J, flux Phi_0, temperature E_J/k_B; t_over_tau in drive periods";

/// A configuration with every "derive" replaced by its value, and the sweep it describes.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub spec: SweepSpec,
}

pub fn resolve(config: &RunConfig) -> Result<Resolved> {
    let mut config = config.clone();
    config.meta = None;
    let d = &config.device;
    let (device, tls) = match d.model {
        ModelKind::Tls => {
            let tls = match (d.delta.value(), d.i_p.value()) {
                (Some(delta), Some(i_p)) => TlsParams::explicit(delta, i_p)?,
                _ => compute_tls_parameters(&FqParams::new(d.alpha, d.eta, 0.0, d.n_charge)?)?,
            };
            (Device::Tls(tls), tls)
        }
        ModelKind::Multilevel => {
            let qubit = FluxQubit::new(&FqParams::new(d.alpha, d.eta, 0.0, d.n_charge)?)?;
            let tls = qubit.tls;
            (Device::Multilevel { qubit: Arc::new(qubit), levels: d.levels }, tls)
        }
    };
    if d.model == ModelKind::Tls {
        config.device.delta = Derivable::Value(tls.delta);
        config.device.i_p = Derivable::Value(tls.i_p);
    }

    let mut channels = Vec::with_capacity(config.couplings.len());
    for c in &mut config.couplings {
        let strength = match (c.strength.value(), config.device.model) {
            (Some(s), _) => s,
            (None, ModelKind::Multilevel) => 1.0,
            (None, ModelKind::Tls) => match c.kind {
                CouplingKind::Longitudinal => tls.lambda_f,
                CouplingKind::Transverse => tls.lambda_ch,
                CouplingKind::CriticalCurrent => tls.lambda_cc,
            },
        };
        c.strength = Derivable::Value(strength);
        let b = config.baths.iter().find(|b| b.tag == c.tag).ok_or_else(|| LzsError::MissingBath(c.tag.clone()))?;
        let bath = OhmicBath::new(b.tag.clone(), b.gamma, b.omega_c, b.temperature)?;
        let mut ch = Channel::new(c.kind, strength, bath);
        if let Some(m) = c.mixing {
            ch = ch.mixed(m);
        }
        channels.push(ch);
    }

    let f_omega = tls.f_omega(config.drive.omega0);
    let times = match config.run.mode {
        Mode::SteadyState => vec![TimePoint::Steady],
        _ => config
            .run
            .times
            .iter()
            .map(|t| match t {
                TimeSpec::Periods(m) => TimePoint::Periods(*m),
                TimeSpec::Steady(_) => TimePoint::Steady,
            })
            .collect(),
    };
    let observables = match config.run.mode {
        Mode::FiniteTime | Mode::SteadyState => Observables { p_plus: true, ..Default::default() },
        Mode::Timescales | Mode::RwaCompare => Observables { timescales: true, ..Default::default() },
        Mode::Isolated => Observables::default(),
    };
    let spec = SweepSpec {
        device,
        omega0: config.drive.omega0,
        f_dc: config.drive.f_dc.resolve(f_omega),
        f_ac: config.drive.f_ac.resolve(f_omega),
        theta: config.drive.theta.resolve(f_omega),
        channels,
        times,
        measurement: config.run.measurement,
        observables,
        settings: config.solver.clone(),
    };
    if matches!(config.run.mode, Mode::RwaCompare | Mode::Isolated) && spec.theta.len() > 1 {
        return Err(LzsError::InvalidParameter(format!("mode {} takes a single theta", config.run.mode.name())));
    }
    spec.validate()?;
    Ok(Resolved { config, spec })
}

/// Worst-case diagnostics over the run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub rows: usize,
    pub flagged: usize,
    pub max_harmonic_tail: f64,
    pub max_unitarity_defect: f64,
    pub max_positivity_defect: f64,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub mode: Mode,
    /// CSV text including the header
    pub values: String,
    pub diagnostics: Diagnostics,
}

pub fn execute(resolved: &Resolved) -> Result<Report> {
    let mode = resolved.config.run.mode;
    let spec = &resolved.spec;
    let mut out = String::new();
    writeln!(out, "{UNITS_HEADER}").unwrap();
    writeln!(out, "# lzs {} mode={}", env!("CARGO_PKG_VERSION"), mode.name()).unwrap();
    let mut diag = Diagnostics::default();
    match mode {
        Mode::FiniteTime | Mode::SteadyState => {
            let map = run_sweep(spec)?;
            writeln!(out, "f_dc,f_ac,theta,t_over_tau,p_plus,positivity_defect,flag").unwrap();
            for p in &map.points {
                for (k, t) in map.times.iter().enumerate() {
                    writeln!(out, "{},{},{},{},{},{},{}", p.f_dc, p.f_ac, p.theta, t, p.p_plus[k], p.positivity_defect[k], p.flag).unwrap();
                    diag.rows += 1;
                    diag.max_positivity_defect = nan_max(diag.max_positivity_defect, p.positivity_defect[k]);
                }
            }
            map_diagnostics(&map, &mut diag);
        }
        Mode::Timescales => {
            let map = run_sweep(spec)?;
            writeln!(out, "f_dc,f_ac,theta,t_r,t_d,t_phi,flag").unwrap();
            for p in &map.points {
                writeln!(out, "{},{},{},{},{},{},{}", p.f_dc, p.f_ac, p.theta, opt(p.t_r), opt(p.t_d), opt(p.t_phi), p.flag).unwrap();
                diag.rows += 1;
            }
            map_diagnostics(&map, &mut diag);
        }
        Mode::RwaCompare => {
            let map = run_sweep(spec)?;
            writeln!(out, "f_dc,f_ac,n,gamma_r_num,gamma_d_num,gamma_r_rwa,gamma_d_rwa").unwrap();
            for p in &map.points {
                let (n, r_rwa, d_rwa) = rwa_rates(spec, p.f_dc, p.f_ac, p.theta)?;
                let inv = |t: Option<f64>| t.map_or(f64::NAN, |t| 1.0 / t);
                writeln!(out, "{},{},{},{},{},{},{}", p.f_dc, p.f_ac, n, inv(p.t_r), inv(p.t_d), r_rwa, d_rwa).unwrap();
                diag.rows += 1;
            }
            map_diagnostics(&map, &mut diag);
        }
        Mode::Isolated => {
            let n = match resolved.config.run.isolated_periods {
                PeriodCount::Finite(n) => Some(n),
                PeriodCount::Infinite(_) => None,
            };
            writeln!(out, "f_dc,f_ac,p_plus_avg").unwrap();
            for (f_dc, f_ac, p) in isolated_map(spec, n)? {
                writeln!(out, "{f_dc},{f_ac},{p}").unwrap();
                diag.rows += 1;
                if p.is_nan() {
                    diag.flagged += 1;
                }
            }
        }
    }
    Ok(Report { mode, values: out, diagnostics: diag })
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if b.is_nan() {
        a
    } else {
        a.max(b)
    }
}

fn map_diagnostics(map: &LzsMap, diag: &mut Diagnostics) {
    diag.flagged = map.points.iter().filter(|p| p.flag != Flag::Ok).count();
    for p in &map.points {
        diag.max_harmonic_tail = nan_max(diag.max_harmonic_tail, p.harmonic_tail);
        diag.max_unitarity_defect = nan_max(diag.max_unitarity_defect, p.unitarity_defect);
    }
}

/// RWA (Γ_r, Γ_d) on the nearest resonance, summed over independent channels.
fn rwa_rates(spec: &SweepSpec, f_dc: f64, f_ac: f64, theta: f64) -> Result<(i32, f64, f64)> {
    let tls = spec.device.tls();
    let n = nearest_resonance(4.0 * PI * tls.i_p * f_dc, spec.omega0);
    let d = dressed_params(tls, f_dc, f_ac, spec.omega0, n)?;
    let (mut gamma_r, mut gamma_phi) = (0.0, 0.0);
    for ch in &spec.channels {
        let w = ch.weight(theta);
        let r = match ch.kind {
            CouplingKind::Longitudinal => rates_longitudinal(&d, &ch.bath, w),
            CouplingKind::Transverse => rates_transverse(&d, &ch.bath, w)?,
            CouplingKind::CriticalCurrent => dressed_coupling_coefficients(w, PI / 2.0, rotation_angle(&d), n, d.x)?.rates(&d, &ch.bath),
        };
        gamma_r += r.gamma_r;
        gamma_phi += r.gamma_phi;
    }
    Ok((n, gamma_r, gamma_r / 2.0 + gamma_phi))
}

/// Resolved configuration followed by a `[meta]` table; parses back as a config.
pub fn metadata(resolved: &Resolved, report: &Report, wall_time_s: f64, threads: usize) -> String {
    let d = &report.diagnostics;
    let mut meta = toml::Table::new();
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    meta.insert("mode".into(), report.mode.name().into());
    meta.insert("wall_time_s".into(), wall_time_s.into());
    meta.insert("threads".into(), (threads as i64).into());
    meta.insert("f_omega".into(), resolved.spec.f_omega().into());
    meta.insert("grid_points".into(), (resolved.spec.len() as i64).into());
    meta.insert("rows".into(), (d.rows as i64).into());
    meta.insert("flagged".into(), (d.flagged as i64).into());
    meta.insert("partial".into(), (d.flagged > 0).into());
    meta.insert("max_harmonic_tail".into(), d.max_harmonic_tail.into());
    meta.insert("max_unitarity_defect".into(), d.max_unitarity_defect.into());
    meta.insert("max_positivity_defect".into(), d.max_positivity_defect.into());
    let mut text = format!("{}\n", UNITS_HEADER);
    text += &crate::config::to_toml(&resolved.config);
    text += "\n[meta]\n";
    text += &toml::to_string(&meta).expect("flat table");
    text
}
