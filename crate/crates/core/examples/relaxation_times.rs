//! Relaxation and decoherence times across the n = 4 resonance for
//! longitudinal (flux) and transverse (charge) coupling.

use lzs::bath::OhmicBath;
use lzs::floquet::FloquetSettings;
use lzs::model::TlsParams;
use lzs::sweep::{symmetric_scan, timescale_scan, Channel, CouplingKind, Device, Measurement, Observables, SweepSpec};

fn main() -> lzs::Result<()> {
    let tls = TlsParams::explicit(3.33e-4, 0.721)?;
    let omega0 = 0.003;
    let tau = 2.0 * std::f64::consts::PI / omega0;
    let bath = OhmicBath::new("b", 0.001, 0.15, 0.0014)?;
    let f_dc = symmetric_scan(4, tls.f_omega(omega0), 0.5, 10);

    for (kind, strength) in [(CouplingKind::Longitudinal, 1.0), (CouplingKind::Transverse, 1.0)] {
        let spec = SweepSpec {
            device: Device::Tls(tls),
            omega0,
            f_dc: f_dc.clone(),
            f_ac: vec![0.003],
            theta: vec![0.0],
            channels: vec![Channel::new(kind, strength, bath.clone())],
            times: vec![],
            measurement: Measurement::PeriodAverage,
            observables: Observables { timescales: true, ..Default::default() },
            settings: FloquetSettings::default(),
        };
        let map = timescale_scan(&spec)?;
        println!("\n{kind:?} coupling, times in periods");
        println!(" f_dc/f_w    t_r          t_d          t_d/(2 t_r)");
        for p in &map.points {
            let (tr, td) = (p.t_r.unwrap_or(f64::NAN), p.t_d.unwrap_or(f64::NAN));
            println!("{:8.3}  {:11.4e}  {:11.4e}  {:.4}", p.f_dc / map.f_omega, tr / tau, td / tau, td / (2.0 * tr));
        }
    }
    Ok(())
}
