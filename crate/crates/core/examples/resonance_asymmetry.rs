//! Shape of the n = 4 resonance at the experimental time and in the steady
//! state: symmetric dip at 1000τ, antisymmetric profile at long times for
//! flux noise; charge noise stays symmetric.

use lzs::bath::OhmicBath;
use lzs::floquet::FloquetSettings;
use lzs::model::TlsParams;
use lzs::sweep::{asymmetry_metric, run_sweep, symmetric_scan, Channel, CouplingKind, Device, Measurement, Observables, SweepSpec, TimePoint};

fn main() -> lzs::Result<()> {
    let tls = TlsParams::explicit(3.33e-4, 0.721)?;
    let omega0 = 0.003;
    let f_omega = tls.f_omega(omega0);
    let bath = OhmicBath::new("b", 0.001, 0.15, 0.0014)?;

    for (kind, strength) in [(CouplingKind::Longitudinal, 1.0), (CouplingKind::Transverse, 1.0)] {
        let spec = SweepSpec {
            device: Device::Tls(tls),
            omega0,
            f_dc: symmetric_scan(4, f_omega, 0.5, 20),
            f_ac: vec![0.003],
            theta: vec![0.0],
            channels: vec![Channel::new(kind, strength, bath.clone())],
            times: vec![TimePoint::Periods(1000.0), TimePoint::Steady],
            measurement: Measurement::PeriodAverage,
            observables: Observables { p_plus: true, ..Default::default() },
            settings: FloquetSettings::default(),
        };
        let map = run_sweep(&spec)?;
        println!("\n{kind:?}");
        println!(" f_dc/f_w   P+(1000 tau)  P+(steady)");
        for p in map.points.iter().step_by(4) {
            println!("{:8.3}   {:.4}        {:.4}", p.f_dc / f_omega, p.p_plus[0], p.p_plus[1]);
        }
        for (t, label) in [(0, "1000 tau"), (1, "steady")] {
            let s = asymmetry_metric(&map.line(0, 0, t), 4, f_omega, 0.5)?;
            println!("asymmetry S at {label}: {s:+.3}");
        }
    }
    Ok(())
}
