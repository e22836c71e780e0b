//! P₊(t) of the dissipative driven qubit from the static ground state, on and
//! off the n = 4 resonance, approaching the steady state.

use lzs::bath::OhmicBath;
use lzs::floquet::{floquet_states, matrix_elements, FloquetSettings};
use lzs::master::{build_generator, initial_state, rate_tensor, steady_state, Dynamics, Observable};
use lzs::model::{build_tls_model, Axis, CouplingSpec, TlsParams};

fn main() -> lzs::Result<()> {
    let tls = TlsParams::explicit(3.33e-4, 0.721)?;
    let omega0 = 0.003;
    let f_omega = tls.f_omega(omega0);
    let bath = OhmicBath::new("flux", 0.001, 0.15, 0.0014)?;
    let coupling = [CouplingSpec::new(Axis::Z, 1.0, "flux")];

    for (label, f_dc) in [("on resonance", 4.0 * f_omega), ("off resonance", 4.3 * f_omega)] {
        let model = build_tls_model(&tls, f_dc, 0.003, omega0, &coupling)?;
        let basis = floquet_states(&model, &FloquetSettings::default())?;
        let elements = matrix_elements(&basis, &model.couplings)?;
        let gen = build_generator(&rate_tensor(&elements, std::slice::from_ref(&bath), &basis)?, &basis)?;
        let obs = Observable::new(&basis, &model.projector_plus)?;
        let dynamics = Dynamics::new(&gen, &initial_state(&model, &basis)?)?;
        let tau = basis.period();

        println!("\n{label} (f_dc = {:.2} f_w)", f_dc / f_omega);
        println!("   t/tau    <P+>_tau");
        for m in [0.0, 10.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0, 30000.0] {
            println!("{m:8.0}    {:.5}", dynamics.window_average(&obs, m * tau, tau));
        }
        println!("  steady    {:.5}", obs.stationary_average(&steady_state(&gen)?));
    }
    Ok(())
}
