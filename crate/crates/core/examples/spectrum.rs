//! Min-max values of a few generating families, over the circle and over
//! the region {cos 3q >= 0}.

use jetspectra::expr::parse;
use jetspectra::genfam::GeneratingFamily;
use jetspectra::spectra::{self, Grids, Region};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let families = [
        (vec![], "3*cos(q) + 4*sin(q)"),
        (vec![1], "cos(q) + 0.5*w1*sin(2*q)"),
        (vec![-1], "sin(q) + 0.3*cos(3*q)"),
    ];
    for (signs, g) in families {
        let fam = GeneratingFamily::parse(signs.clone(), g)?;
        let s = spectra::viterbo_numbers(&fam, Grids::new(512, 33))?;
        println!("signs {signs:?}, g = {g}: c = {:?}, degrees {:?}", s.values, s.degrees);
    }

    let f = parse("cos(3*q)", 0)?;
    let fam = GeneratingFamily::parse(vec![], "2 + 0.3*sin(q)")?;
    let s = spectra::spectrum_over(&fam, &Region::NonNegative(f.clone()), Grids::new(1024, 33))?;
    println!("over {{cos 3q >= 0}} (b = {}): c = {:?}", s.b, s.values);
    for v in spectra::generalized_critical_values(&fam, &f, 1024)? {
        println!("  generalized critical value {:.6} at q = {:.4}{}", v.value, v.q, if v.boundary { " (boundary)" } else { "" });
    }
    Ok(())
}
