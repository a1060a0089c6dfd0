//! Zeros of lambda -> c_k(F - lambda f) over {cos 3q >= 0}, each checked
//! against a Newton solve for the first-jet tangency.

use jetspectra::expr::parse;
use jetspectra::genfam::GeneratingFamily;
use jetspectra::scenarios;
use jetspectra::spectra::Grids;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f1 = GeneratingFamily::parse(vec![], "2 + 0.3*sin(q)")?;
    let f = parse("cos(3*q)", 0)?;
    let s = scenarios::lambda_scan(&f1, &f, 10.0, 2000, Grids::default())?;
    println!("b(f) = {}, curves decreasing: {}", s.b, s.monotone_decreasing);
    for c in &s.crossings {
        println!(
            "  c_{} vanishes at lambda = {:.6}, q = {:.4}, oracle {} (|F - lambda f| = {:.1e}, |slope| = {:.1e})",
            c.k, c.lambda, c.q, c.oracle_converged, c.residual_value, c.residual_slope
        );
    }
    println!("distinct positive zeros: {:?}", s.distinct_positive);
    Ok(())
}
