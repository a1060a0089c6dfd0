//! Intersections of a few loops with the surfaces swept by j¹(λ cos kq).

use jetspectra::jet::LegendrianLoop;
use jetspectra::scenarios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let constant = LegendrianLoop::one_jet(720, |_| (1.0, 0.0))?;
    let wavy = LegendrianLoop::one_jet(720, |q| (1.5 + 0.4 * (2.0 * q).sin(), 0.8 * (2.0 * q).cos()))?;
    let high = scenarios::build_high_p_loop(0.1, 0.1, 720)?;
    for (name, l) in [("j1(1)", &constant), ("j1(1.5 + 0.4 sin 2q)", &wavy), ("high-p loop", &high)] {
        let counts: Vec<usize> = (1..=5).map(|k| scenarios::lambda_k_intersections(l, k).count).collect();
        println!("{name}: counts for k = 1..5: {counts:?}");
    }
    for p in scenarios::lambda_k_intersections(&constant, 2).points {
        println!("  k = 2: q = {:.4}, lambda = {:.6}, residual {:.1e}", p.q, p.lambda, p.residual);
    }
    Ok(())
}
