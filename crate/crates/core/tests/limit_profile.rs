mod common;

use abspectra::limit_profile::{compute_beta, LimitProfile};
use abspectra::Point;
use common::{profile_closed_form, profile_coefficient, rel};
use std::f64::consts::PI;

#[test]
fn closed_form_satisfies_the_boundary_conditions() {
    for &t in &[0.1, 0.5, 0.9] {
        assert!(profile_closed_form(t, 0.0).0.abs() < 1e-12);
    }
    for &t in &[0.1, 1.0, 3.0] {
        assert!(profile_closed_form(0.0, t).0.abs() < 1e-12);
    }
    // natural condition beyond the tip
    for &t in &[1.5, 3.0] {
        assert!(profile_closed_form(t, 1e-12).1 .1.abs() < 1e-9);
    }
}

#[test]
fn closed_form_coefficients_match_its_series() {
    let r = 7.0;
    for &th in &[0.0, 0.4, 1.1] {
        let exact = profile_closed_form(r * f64::cos(th), r * f64::sin(th)).0;
        let mut s = r * th.cos();
        for n in (1..40).step_by(2) {
            s += profile_coefficient(n) * (n as f64 * th).cos() / r.powi(n as i32);
        }
        assert!((s - exact).abs() < 1e-13, "{s} {exact}");
    }
    assert_eq!(profile_coefficient(1), -0.5);
    assert_eq!(profile_coefficient(3), -0.125);
}

#[test]
fn beta_matches_the_closed_form() {
    let b = compute_beta(8.0, 0.05).unwrap();
    assert!(b.beta > 0.0);
    assert!(rel(b.beta, PI / 2.0) < 2e-3, "beta = {}", b.beta);
    assert!(rel(b.beta_flux, b.beta) < 1e-2);
    assert!(b.stability < 0.05);
}

#[test]
fn far_field_coefficients_match_the_closed_form() {
    let (p, _, coef) = LimitProfile::compute(8.0, 0.05, 9).unwrap();
    for n in [1, 3, 5] {
        let got = coef.b(n).unwrap();
        let want = profile_coefficient(n);
        assert!((got - want).abs() < 0.02 * want.abs() + 2e-3, "b_{n}: {got} vs {want}");
    }
    for (n, v) in &coef.even {
        assert!(v.abs() < 1e-3, "even coefficient {n}: {v}");
    }
    assert!(rel(p.b["1"], -p.beta / PI) < 1e-12);
    assert!(rel(p.b1_fitted.unwrap(), -0.5) < 1e-2);
}

#[test]
fn evaluator_tracks_the_closed_form() {
    let (p, _, _) = LimitProfile::compute(8.0, 0.05, 9).unwrap();
    let ev = p.evaluator();
    let mut worst: f64 = 0.0;
    for &r in &[0.5, 1.5, 2.5, 4.0] {
        for j in 0..7 {
            let th = -PI / 2.0 + PI * (j as f64 + 0.5) / 7.0;
            let x = Point::polar(r, th);
            if x.dist(Point::new(1.0, 0.0)) < 0.1 {
                continue;
            }
            let (v, _) = ev.eval(x).unwrap();
            let want = profile_closed_form(x.x, x.y.abs()).0;
            worst = worst.max((v - want).abs() / r);
        }
    }
    assert!(worst < 5e-3, "worst scaled deviation {worst}");
}

#[test]
fn frequency_of_the_profile_decreases_to_one() {
    let (p, _, _) = LimitProfile::compute(8.0, 0.05, 9).unwrap();
    let ks = [2.0, 4.0, 8.0, 16.0];
    let n: Vec<f64> = ks.iter().map(|&k| p.frequency(k)).collect();
    for w in n.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!((n[2] - 1.0).abs() <= 0.05);
    assert!(n[3] > 1.0);
    for &k in &ks {
        let c = p.c_norm(k);
        assert!(rel(c * c * p.h_at(k), 1.0) < 1e-12);
    }
}

#[test]
fn profile_json_round_trip() {
    let (p, _, _) = LimitProfile::compute(4.0, 0.1, 7).unwrap();
    let q = LimitProfile::from_json(&p.to_json().unwrap()).unwrap();
    assert_eq!(p.beta, q.beta);
    assert_eq!(p.b, q.b);
}
