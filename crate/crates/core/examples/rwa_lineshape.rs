//! Multiphoton resonances of the isolated qubit: unitary time averages
//! against the dressed-state (RWA) lineshape, and the first J₄ zero.

use lzs::floquet::FloquetSettings;
use lzs::model::{build_tls_model, TlsParams};
use lzs::rwa::{bessel_j, dressed_params, p_plus_averaged};
use lzs::sweep::isolated_average;

fn main() -> lzs::Result<()> {
    let tls = TlsParams::explicit(3.33e-4, 0.721)?;
    let (omega0, f_ac) = (0.003, 0.003);
    let f_omega = tls.f_omega(omega0);
    let settings = FloquetSettings::default();

    println!(" n   offset   numeric(1000 tau)  rwa");
    for n in 1..=6 {
        let d0 = dressed_params(&tls, n as f64 * f_omega, f_ac, omega0, n)?;
        // offset in linewidths |Delta_n|
        for k in [0.0, 1.0, 5.0] {
            let f_dc = n as f64 * f_omega + k * d0.delta_n.abs() / (4.0 * std::f64::consts::PI * tls.i_p);
            let model = build_tls_model(&tls, f_dc, f_ac, omega0, &[])?;
            let p = isolated_average(&model, Some(1000.0), &settings)?;
            let rwa = p_plus_averaged(&dressed_params(&tls, f_dc, f_ac, omega0, n)?);
            println!("{n:2}  {k:5.1}    {p:.4}             {rwa:.4}");
        }
    }

    // first zero of J4 by bisection
    let (mut a, mut b) = (7.0, 8.0);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if bessel_j(4, a)? * bessel_j(4, m)? <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let x = 0.5 * (a + b);
    let model = build_tls_model(&tls, 4.0 * f_omega, x * f_omega, omega0, &[])?;
    let p = isolated_average(&model, Some(1000.0), &settings)?;
    println!("\nJ4 zero at f_ac/f_w = {x:.6}: on-resonance average {p:.4} (tunneling suppressed)");
    Ok(())
}
