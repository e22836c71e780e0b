//! A coarse LZS interference map P₊(f̃_dc, f_ac) at t = 1000τ, written as CSV
//! to stdout.

use lzs::bath::OhmicBath;
use lzs::floquet::FloquetSettings;
use lzs::model::TlsParams;
use lzs::sweep::{linspace, run_sweep, Channel, CouplingKind, Device, Measurement, Observables, SweepSpec, TimePoint};

fn main() -> lzs::Result<()> {
    let tls = TlsParams::explicit(3.33e-4, 0.721)?;
    let omega0 = 0.003;
    let f_omega = tls.f_omega(omega0);
    let spec = SweepSpec {
        device: Device::Tls(tls),
        omega0,
        f_dc: linspace(0.0, 6.0 * f_omega, 61),
        f_ac: linspace(0.0005, 0.006, 23),
        theta: vec![0.0],
        channels: vec![Channel::new(CouplingKind::Longitudinal, 1.0, OhmicBath::new("b", 0.001, 0.15, 0.0014)?)],
        times: vec![TimePoint::Periods(1000.0)],
        measurement: Measurement::PeriodAverage,
        observables: Observables { p_plus: true, ..Default::default() },
        settings: FloquetSettings::default(),
    };
    let map = run_sweep(&spec)?;
    println!("f_dc,f_ac,p_plus,flag");
    for p in &map.points {
        println!("{},{},{},{}", p.f_dc, p.f_ac, p.p_plus[0], p.flag);
    }
    eprintln!("{} points, {} flagged", map.points.len(), map.flagged());
    Ok(())
}
