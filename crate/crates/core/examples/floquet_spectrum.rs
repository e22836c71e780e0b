//! Quasienergies of the driven two-level system versus drive amplitude.
//!
//! On the n = 4 resonance the quasienergy splitting follows Δ·|J₄(A/ω₀)|,
//! closing at the Bessel zeros (coherent destruction of tunneling).

use lzs::floquet::{floquet_states, FloquetSettings};
use lzs::model::{build_tls_model, TlsParams};
use lzs::rwa::bessel_j;

fn main() -> lzs::Result<()> {
    let tls = TlsParams::explicit(3.33e-4, 0.721)?;
    let omega0 = 0.003;
    let f_omega = tls.f_omega(omega0);
    let settings = FloquetSettings::default();

    println!(" f_ac/f_w   splitting     Delta|J4|");
    for i in 0..=24 {
        let x = 0.5 * i as f64;
        let model = build_tls_model(&tls, 4.0 * f_omega, x * f_omega, omega0, &[])?;
        let basis = floquet_states(&model, &settings)?;
        let e = &basis.quasienergies;
        // splitting folded into the first zone
        let d = (e[1] - e[0]).rem_euclid(omega0);
        let split = d.min(omega0 - d);
        println!("{x:8.2}  {split:.4e}  {:.4e}", tls.delta * bessel_j(4, x)?.abs());
    }
    Ok(())
}
