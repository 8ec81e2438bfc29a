//! Transition kernel and Green's function of the rate-one walk on Z^3,
//! compared with their Gaussian and far-field approximations.

use loopsoup::interlacements::green_asymptotic;
use loopsoup::kernels::{gaussian_kernel, green_function, transition_kernel};
use loopsoup::{ModelParams, Site};

fn main() -> loopsoup::Result<()> {
    let p = ModelParams::critical(3, 1.0)?;
    println!("t, p_t(0), gaussian at t/d");
    for t in [1.0, 10.0, 100.0, 1000.0] {
        let exact = transition_kernel(&p, t, &Site::origin(3))?;
        let gauss = gaussian_kernel(&p, t / 3.0, &[0.0, 0.0, 0.0])?;
        println!("{t}, {exact:.6e}, {gauss:.6e}");
    }
    println!("\n|x|, G(x), 3/(2 pi |x|)");
    for r in [0, 1, 2, 5, 10, 20] {
        let g = green_function(&p, &Site::axis(3, 0, r), 1e-10)?;
        let far = if r > 0 { green_asymptotic(3, r as f64) } else { f64::NAN };
        println!("{r}, {g:.8}, {far:.8}");
    }
    Ok(())
}
