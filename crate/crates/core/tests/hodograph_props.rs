use std::f64::consts::TAU;

use jetspectra::genfam::{self, GeneratingFamily};
use jetspectra::hodograph::{self, check_legendrian_st, hodograph_fwd, hodograph_inv, ContactElement};
use jetspectra::jet::{check_legendrian, default_tol_leg, JetPoint, LegendrianLoop};
use jetspectra::spectra::{self, Grids};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn round_trips(q in 0.0..TAU, p in -50.0..50.0f64, u in -50.0..50.0f64) {
        let back = hodograph_inv(&hodograph_fwd(&JetPoint::new(q, p, u)));
        prop_assert!((back.q - q).abs() < 1e-12 && (back.p - p).abs() < 1e-12 && (back.u - u).abs() < 1e-12);
        let el = ContactElement::new([p, u], q);
        let again = hodograph_fwd(&hodograph_inv(&el));
        prop_assert!((again.x[0] - p).abs() < 1e-12 && (again.x[1] - u).abs() < 1e-12);
        prop_assert!((again.theta - el.theta).abs() < 1e-12);
    }

    #[test]
    fn fibers_are_points_with_values_plus_minus_norm(x1 in -5.0..5.0f64, x2 in -5.0..5.0f64) {
        let l = hodograph::fiber_as_jet([x1, x2], 256).unwrap();
        prop_assert!(check_legendrian(&l, default_tol_leg(256)).unwrap().pass);
        for e in hodograph::hodograph_loop(&l) {
            prop_assert!((e.x[0] - x1).abs() < 1e-12 && (e.x[1] - x2).abs() < 1e-12);
        }
        let fam = GeneratingFamily::parse(vec![], &format!("({x1})*cos(q) + ({x2})*sin(q)")).unwrap();
        let s = spectra::viterbo_numbers(&fam, Grids::new(1024, 33)).unwrap();
        let r = x1.hypot(x2);
        let tol = r * (TAU / 1024.0).powi(2);
        prop_assert!((s.values[0] + r).abs() <= tol && (s.values[1] - r).abs() <= tol);
    }
}

#[test]
fn family_loops_are_legendrian_in_the_plane() {
    for g in ["cos(q) + 0.3*sin(2*q)", "0.5*w1*sin(q) + cos(2*q)", "2 + 0.7*w1*cos(q) + 0.2*sin(q)"] {
        let k = if g.contains("w1") { 1 } else { 0 };
        let fam = GeneratingFamily::parse(vec![1; k], g).unwrap();
        for l in genfam::legendrian_from_family(&fam, 512).unwrap() {
            let c = hodograph::hodograph_loop(&l);
            let r = check_legendrian_st(&c, default_tol_leg(c.len())).unwrap();
            assert!(r.pass, "{g}: {r:?}");
        }
    }
}

#[test]
fn circles_of_contact_elements() {
    // the unit circle with outward normals is the 1-jet of the constant 1
    let l = LegendrianLoop::one_jet(128, |_| (1.0, 0.0)).unwrap();
    for e in hodograph::hodograph_loop(&l) {
        assert!((e.x[0] - e.theta.cos()).abs() < 1e-15 && (e.x[1] - e.theta.sin()).abs() < 1e-15);
    }
}
