//! Moving between 1-jets on the circle and contact elements of the plane.
//! Writes `elements.svg` into the directory given as the first argument.

use std::path::PathBuf;

use jetspectra::genfam::{self, GeneratingFamily};
use jetspectra::hodograph::{self, ContactElement};
use jetspectra::jet::{default_tol_leg, JetPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;

    let e = hodograph::hodograph_fwd(&JetPoint::new(std::f64::consts::FRAC_PI_2, 2.0, 3.0));
    println!("(pi/2, 2, 3) -> x = {:?}, theta = {:.4}", e.x, e.theta);
    let p = hodograph::hodograph_inv(&ContactElement::new([-2.0, 3.0], 1.0));
    println!("x = (-2, 3), theta = 1 -> (q, p, u) = ({:.4}, {:.4}, {:.4})", p.q, p.p, p.u);

    let fam = GeneratingFamily::parse(vec![1], "1.5 + 0.5*w1*sin(2*q) + 0.2*cos(3*q)")?;
    for l in genfam::legendrian_from_family(&fam, 512)? {
        let curve = hodograph::hodograph_loop(&l);
        let r = hodograph::check_legendrian_st(&curve, default_tol_leg(curve.len()))?;
        println!("family loop: {} elements, max defect {:.2e}, pass {}", curve.len(), r.max_defect, r.pass);
        std::fs::write(dir.join("elements.svg"), hodograph::elements_svg(&curve, 48))?;
    }
    println!("wrote {}", dir.display());
    Ok(())
}
