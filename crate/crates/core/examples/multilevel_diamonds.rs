//! Relaxation time of the four-level flux qubit along f_ac at f̃_dc = 2.7 f_ω
//! for flux and charge noise. Flux-noise relaxation speeds up once the drive
//! reaches the upper levels.

use std::sync::Arc;

use lzs::bath::OhmicBath;
use lzs::floquet::FloquetSettings;
use lzs::model::{FluxQubit, FqParams};
use lzs::sweep::{linspace, timescale_scan, Channel, CouplingKind, Device, Measurement, Observables, SweepSpec};

fn main() -> lzs::Result<()> {
    let qubit = Arc::new(FluxQubit::new(&FqParams::reference())?);
    let omega0 = 0.003;
    let tau = 2.0 * std::f64::consts::PI / omega0;
    let f_omega = qubit.tls.f_omega(omega0);
    let bath = OhmicBath::new("b", 0.001, 0.15, 0.0014)?;

    for kind in [CouplingKind::Longitudinal, CouplingKind::Transverse] {
        let spec = SweepSpec {
            device: Device::Multilevel { qubit: qubit.clone(), levels: 4 },
            omega0,
            f_dc: vec![2.7 * f_omega],
            f_ac: linspace(0.001, 0.02, 20),
            theta: vec![0.0],
            channels: vec![Channel::new(kind, 1.0, bath.clone())],
            times: vec![],
            measurement: Measurement::PeriodAverage,
            observables: Observables { timescales: true, ..Default::default() },
            settings: FloquetSettings::default(),
        };
        let map = timescale_scan(&spec)?;
        println!("\n{} noise, times in periods", if kind == CouplingKind::Longitudinal { "flux" } else { "charge" });
        println!(" f_ac     t_r          t_d");
        for p in &map.points {
            println!("{:.4}  {:11.4e}  {:11.4e}", p.f_ac, p.t_r.unwrap_or(f64::NAN) / tau, p.t_d.unwrap_or(f64::NAN) / tau);
        }
    }
    Ok(())
}
