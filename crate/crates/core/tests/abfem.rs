mod common;

use abspectra::abfem::{assemble, solve_eigs, solve_eigs_with, EigenOptions, Order, Weight};
use abspectra::geometry::{build_mesh, build_mesh_with, DomainSpec, MeshPolicy, PoleConfig};
use abspectra::Point;
use common::{bessel_zero, rel};
use std::f64::consts::PI;

fn lambdas(d: &DomainSpec, h: f64, pole: Option<PoleConfig>, k: usize) -> Vec<f64> {
    let m = build_mesh_with(d, &MeshPolicy::new(h, 2.0), pole.as_ref()).unwrap();
    solve_eigs(&assemble(&m, &Weight::one(), Order::P2).unwrap(), k, 1e-9).unwrap().lambdas
}

#[test]
fn bessel_oracle_is_sane() {
    assert!((bessel_zero(0.0, 1) - 2.404825557695773).abs() < 1e-12);
    assert!((bessel_zero(1.0, 1) - 3.831705970207512).abs() < 1e-12);
    assert!((bessel_zero(0.5, 1) - PI).abs() < 1e-12);
    assert!((bessel_zero(0.5, 2) - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn disk_matches_bessel_zeros() {
    let l = lambdas(&DomainSpec::disk(1.0), 0.1, None, 6);
    let j01 = bessel_zero(0.0, 1).powi(2);
    let j11 = bessel_zero(1.0, 1).powi(2);
    let j21 = bessel_zero(2.0, 1).powi(2);
    let want = [j01, j11, j11, j21, j21];
    for (a, b) in l.iter().zip(want) {
        assert!(rel(*a, b) < 5e-3, "{a} vs {b}");
    }
}

#[test]
fn refinement_reduces_the_error() {
    let exact = bessel_zero(0.0, 1).powi(2);
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| rel(lambdas(&DomainSpec::disk(1.0), h, None, 1)[0], exact))
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    // boundary approximation limits the rate to second order
    assert!(errs[0] / errs[2] > 4.0, "{errs:?}");
}

#[test]
fn linear_elements_converge_too() {
    let m = build_mesh(&DomainSpec::disk(1.0), 0.05, 2.0).unwrap();
    let l = solve_eigs(&assemble(&m, &Weight::one(), Order::P1).unwrap(), 1, 1e-9).unwrap().lambdas;
    assert!(rel(l[0], bessel_zero(0.0, 1).powi(2)) < 1e-2);
}

#[test]
fn weight_scales_the_spectrum() {
    let m = build_mesh(&DomainSpec::disk(1.0), 0.1, 2.0).unwrap();
    let one = solve_eigs(&assemble(&m, &Weight::one(), Order::P2).unwrap(), 2, 1e-9).unwrap();
    let four = solve_eigs(&assemble(&m, &Weight::Constant { value: 4.0 }, Order::P2).unwrap(), 2, 1e-9).unwrap();
    for (a, b) in one.lambdas.iter().zip(&four.lambdas) {
        assert!(rel(4.0 * b, *a) < 1e-9);
    }
}

#[test]
fn centred_pole_gives_half_integer_bessel() {
    let l = lambdas(&DomainSpec::disk(1.0), 0.1, Some(PoleConfig::at(Point::ORIGIN)), 4);
    let j = bessel_zero(0.5, 1).powi(2);
    assert!(rel(l[0], j) < 5e-3 && rel(l[1], j) < 5e-3, "{l:?}");
    // the cut breaks the rotational symmetry of the mesh only
    assert!(rel(l[0], l[1]) < 1e-3);
    let j32 = bessel_zero(1.5, 1).powi(2);
    assert!(rel(l[2], j32) < 5e-3 && rel(l[3], j32) < 5e-3, "{l:?}");
}

#[test]
fn eigenvalues_do_not_depend_on_the_cut() {
    let d = DomainSpec::half_disk(1.0);
    let a = Point::new(0.3, 0.2);
    let straight = lambdas(&d, 0.08, Some(PoleConfig::at(a)), 3);
    let bent = lambdas(&d, 0.08, Some(PoleConfig::with_cut(a, vec![Point::new(0.3, 0.6), Point::new(0.0, 0.6)])), 3);
    for (x, y) in straight.iter().zip(&bent) {
        assert!(rel(*x, *y) < 1e-3, "{straight:?} vs {bent:?}");
    }
}

#[test]
fn diamagnetic_inequality() {
    let d = DomainSpec::half_disk(1.0);
    let l0 = lambdas(&d, 0.1, None, 1)[0];
    for a in [Point::new(0.1, 0.0), Point::new(0.4, 0.3), Point::new(0.7, -0.2)] {
        let la = lambdas(&d, 0.1, Some(PoleConfig::at(a)), 1)[0];
        assert!(la > l0, "pole {a:?}: {la} <= {l0}");
    }
}

#[test]
fn eigenvectors_are_mass_orthonormal_and_seeded() {
    let m = build_mesh(&DomainSpec::rectangle(1.0, 1.0), 0.1, 2.0).unwrap();
    let pb = assemble(&m, &Weight::one(), Order::P2).unwrap();
    let r1 = solve_eigs_with(&pb, &EigenOptions::new(3)).unwrap();
    let r2 = solve_eigs_with(&pb, &EigenOptions::new(3)).unwrap();
    assert_eq!(r1.lambdas, r2.lambdas);
    for i in 0..3 {
        for j in 0..3 {
            let g = pb.pencil.m.quad_form(&r1.vectors[i], &r1.vectors[j]);
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-8, "({i},{j}) = {g}");
        }
    }
    // unit square: π²(1+1), π²(1+4) twice
    assert!(rel(r1.lambdas[0], 2.0 * PI * PI) < 1e-3);
    assert!(rel(r1.lambdas[1], 5.0 * PI * PI) < 1e-3);
}
