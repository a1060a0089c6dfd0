//! Raising the fiber over a point of the plane: the moved Legendrian meets
//! both half-surfaces {lambda f} and {-lambda f} for a linear f.

use jetspectra::cerf::FamilyPath;
use jetspectra::scenarios;
use jetspectra::spectra::Grids;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs = [
        ([0.0, 0.0], [1.0, 0.0], "t"),
        ([0.5, -0.3], [0.0, 1.0], "0.5*cos(q) - 0.3*sin(q) + t*(1 + 0.2*cos(q))"),
    ];
    for (x, d, g) in runs {
        let path = FamilyPath::parse(vec![], g, (0.0, 1.0), 16)?;
        let r = scenarios::theorem5_experiment(x, d, &path, 10.0, 500, Grids::default())?;
        println!("x = {x:?}, direction {d:?}: {} points, pass {}", r.count, r.pass);
        for c in r.plus.iter().chain(&r.minus) {
            println!("  q = {:.4}, lambda = {:.6}", c.q, c.lambda);
        }
    }
    Ok(())
}
