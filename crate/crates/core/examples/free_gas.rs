//! Thermodynamics of the free Bose gas on Z^3: density and loop mass as
//! functions of the chemical potential, the critical density, the
//! chemical-potential inverse and the rate function.

use loopsoup::thermo;
use loopsoup::ModelParams;

fn main() -> loopsoup::Result<()> {
    let p = ModelParams::critical(3, 1.0)?;
    let rho_c = thermo::critical_density(&p, 1e-12)?;
    println!("rho_c = {rho_c:.10} (zeta route {:.10})", thermo::critical_density_zeta(&p)?);
    println!("loop mass c_2 = {:.10}", thermo::loop_mass(&p)?);
    println!("\nmu, rho(mu), M(mu), b(rho(mu))");
    for mu in [-2.0, -1.0, -0.5, -0.1, -0.01] {
        let rho = thermo::rho(&p, mu, 1e-12)?;
        let b = thermo::invert_density(&p, rho, 1e-12)?;
        println!("{mu}, {rho:.8}, {:.8}, {b:.8}", thermo::m_mass(&p, mu, 1e-12)?);
    }
    println!("\nx, rate function");
    for f in [0.0, 0.25, 0.5, 1.0, 1.5] {
        println!("{:.4}, {:?}", f * rho_c, thermo::rate_function(&p, f * rho_c));
    }
    for n in [100u64, 1_000, 10_000] {
        let scaled = thermo::tail_mass(&p, n)? * (n as f64).powf(1.5);
        println!("n^(3/2) tail_mass(n) at n = {n}: {scaled:.6} (limit {:.6})", thermo::tail_constant(&p));
    }
    Ok(())
}
