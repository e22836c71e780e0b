//! Ohmic bath correlation weight g(ω) and its detailed-balance ratio.

use lzs::bath::OhmicBath;

fn main() -> lzs::Result<()> {
    let bath = OhmicBath::new("flux", 0.001, 0.15, 0.0014)?;
    println!("g(0) = {:e} (gamma*T = {:e})", bath.g(0.0), bath.gamma * bath.temperature);
    println!("\n   omega          g(omega)       g(-omega)    ratio/exp(w/T)");
    for w in [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2] {
        let (up, down) = (bath.g(w), bath.g(-w));
        println!("{w:9.1e}  {up:14.6e}  {down:14.6e}  {:.12}", down / up / (w / bath.temperature).exp());
    }
    Ok(())
}
