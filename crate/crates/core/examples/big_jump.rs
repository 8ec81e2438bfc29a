//! Single big jump of centred Pareto sums: P(S_n > bn) against n P(X > bn).

use loopsoup::conditioned::pareto_big_jump;
use loopsoup::rng::{stream, ModuleTag};

fn main() -> loopsoup::Result<()> {
    let mut rng = stream(1, ModuleTag::BigJump, 0, 0);
    for n in [100, 1_000, 10_000] {
        let r = pareto_big_jump(1.5, n, 2.0, 20_000, &mut rng)?;
        println!("n = {n}: P = {:.3e}, n P(X > bn) = {:.3e}, ratio {:.3} ± {:.3}", r.probability.mean, r.single_term, r.ratio, r.ratio_se);
    }
    Ok(())
}
