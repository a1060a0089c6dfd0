//! Front projections with their cusps. Writes `front.svg` into the
//! directory given as the first argument.

use std::path::PathBuf;

use jetspectra::genfam::{self, GeneratingFamily};
use jetspectra::jet::front_projection;
use jetspectra::scenarios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;

    let high = scenarios::build_high_p_loop(0.1, 0.1, 512)?;
    let front = front_projection(&high);
    println!("high-p loop: {} cusps", front.cusps.len());
    std::fs::write(dir.join("front.svg"), front.to_svg())?;

    let fam = GeneratingFamily::parse(vec![1], "w1*cos(q) + 0.3*sin(w1)")?;
    for l in genfam::legendrian_from_family(&fam, 512)? {
        println!("family loop: {} cusps, winding {}", front_projection(&l).cusps.len(), l.winding());
    }
    println!("wrote {}", dir.display());
    Ok(())
}
