//! A positive loop of Legendrian embeddings and its checks.

use jetspectra::scenarios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for eps in [0.05, 0.1, 0.5] {
        let iso = scenarios::build_positive_loop(eps)?;
        let r = scenarios::verify_loop(&iso, eps);
        println!(
            "eps {eps}: {} frames, min alpha {:.4}, defect {:.1e}, min separation {:.3e}, closure gap {:.1e}, {} cusps, pass {}",
            r.frames, r.min_alpha, r.max_legendrian_defect, r.min_separation, r.closure_gap, r.front_cusps, r.pass
        );
    }
    Ok(())
}
