//! Cerf diagram of a positive path and of a path with a birth-death pair.
//! Writes `cerf.svg` and `cusp.svg` into the directory given as the first
//! argument (default: the system temp dir).

use std::path::PathBuf;

use jetspectra::cerf::{self, FamilyPath};
use jetspectra::spectra::{Grids, Region};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;

    let path = FamilyPath::parse(vec![], "cos(q) + t*(2 + sin(q))", (0.0, 1.0), 64)?;
    let pos = cerf::check_positive_family(&path, 256)?;
    let d = cerf::cerf_diagram(&path, &Region::All, 256)?;
    let tr = cerf::viterbo_trajectory(&path, &Region::All, Grids::default())?;
    let slopes = cerf::slope_check(&d, true);
    println!("positive path: min vertical speed {:.4}", pos.min_speed);
    println!("  {} branches, {} events, slopes in [{:.3}, {:.3}]", d.branches.len(), d.events.len(), slopes.min_slope, slopes.max_slope);
    println!("  c_k increase by [{:.4}, {:.4}], strictly at every step: {}", tr.min_increase, tr.max_increase, tr.strictly_monotone);
    std::fs::write(dir.join("cerf.svg"), d.to_svg(Some(&tr)))?;

    let path = FamilyPath::parse(vec![], "sin(q)^3 - 3*t*sin(q)", (-0.5, 0.2), 64)?;
    let d = cerf::cerf_diagram(&path, &Region::All, 512)?;
    for e in &d.events {
        println!("  event {:?} at t = {:.4}, q = {:.4}, z = {:.4}", e.kind, e.t, e.q, e.z);
    }
    std::fs::write(dir.join("cusp.svg"), d.to_svg(None))?;
    println!("wrote {}", dir.display());
    Ok(())
}
