//! Two-level reduction of the three-junction flux qubit.
//!
//! Diagonalizes the charge-basis Hamiltonian at the symmetry point and prints
//! the gap, the persistent current and the noise coupling strengths.

use lzs::model::{build_fq_hamiltonian, compute_tls_parameters, diagonalize_static, FqParams};

fn main() -> lzs::Result<()> {
    let params = FqParams::reference();
    let tls = compute_tls_parameters(&params)?;
    println!("alpha = {}, eta = {}, charge cutoff N = {}", params.alpha, params.eta, params.n_charge);
    println!("gap      Delta     = {:.4e} E_J", tls.delta);
    println!("current  I_p       = {:.4} E_J/Phi_0", tls.i_p);
    println!("flux     lambda_f  = {:.4}", tls.lambda_f);
    println!("charge   lambda_ch = {:.4e}", tls.lambda_ch);
    println!("Ic noise lambda_cc = {:.4e}", tls.lambda_cc);

    // level structure away from the symmetry point
    println!("\n f_dc      E1-E0       E2-E0       E3-E0");
    for f_dc in [0.0, 0.001, 0.002, 0.004, 0.008] {
        let h = build_fq_hamiltonian(&params, 0.5 + f_dc)?;
        let e = diagonalize_static(&h, 4)?.energies;
        println!("{f_dc:6.3}  {:.4e}  {:.4e}  {:.4e}", e[1] - e[0], e[2] - e[0], e[3] - e[0]);
    }
    Ok(())
}
