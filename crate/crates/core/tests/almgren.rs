use abspectra::abfem::{assemble, manufactured_ab_solution, solve_eigs, EigenProblem, EigenResult, Order, Weight};
use abspectra::almgren::{
    check_dh_identity, check_frequency_bounds, frequency_trace, hardy_ratio, pohozaev_residual, poincare_check, AbField,
    BoundsOptions, FrequencyTrace, TraceRegion,
};
use abspectra::geometry::{build_mesh_with, DomainSpec, MeshPolicy, PoleConfig};
use abspectra::Point;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// Half-disk eigenpairs, with and without a pole near the flat side.
fn half_disk(pole: bool) -> &'static (EigenProblem, EigenResult) {
    static PLAIN: OnceLock<(EigenProblem, EigenResult)> = OnceLock::new();
    static POLE: OnceLock<(EigenProblem, EigenResult)> = OnceLock::new();
    let cell = if pole { &POLE } else { &PLAIN };
    cell.get_or_init(|| {
        let p = pole.then(|| PoleConfig::at(Point::new(0.05, 0.1)));
        let m = build_mesh_with(&DomainSpec::half_disk(1.0), &MeshPolicy::new(0.1, 2.0), p.as_ref()).unwrap();
        let pb = assemble(&m, &Weight::one(), Order::P2).unwrap();
        let r = solve_eigs(&pb, 3, 1e-9).unwrap();
        (pb, r)
    })
}

/// Radii in triples `r(1 - δ), r, r(1 + δ)` so that the centred difference is accurate.
fn triples(rs: &[f64], delta: f64) -> Vec<f64> {
    rs.iter().flat_map(|&r| [r * (1.0 - delta), r, r * (1.0 + delta)]).collect()
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn frequency_is_scale_invariant(
        j in 0u32..2, c in -1.0f64..1.0, d in 0.5f64..1.5,
        ax in -0.3f64..0.3, ay in -0.3f64..0.3, s in 0.3f64..3.0, r in 0.5f64..0.9,
    ) {
        let a = Point::new(ax, ay);
        let f = AbField::manufactured(manufactured_ab_solution(2 * j + 1, c, d, a));
        let g = AbField::manufactured(manufactured_ab_solution(2 * j + 1, c, d, a * s));
        let tf = frequency_trace(&f, 0.0, Some(a), &[r], TraceRegion::Disk(Point::ORIGIN)).unwrap();
        let tg = frequency_trace(&g, 0.0, Some(a * s), &[s * r], TraceRegion::Disk(Point::ORIGIN)).unwrap();
        prop_assert!((tf.n[0] - tg.n[0]).abs() < 1e-9 * tf.n[0].abs().max(1.0), "{} vs {}", tf.n[0], tg.n[0]);
    }

    #[test]
    fn frequency_of_homogeneous_fields(j in 0u32..3, c in -1.0f64..1.0, d in 0.5f64..1.5, r in 0.1f64..2.0) {
        let h = 2 * j + 1;
        let f = AbField::manufactured(manufactured_ab_solution(h, c, d, Point::new(0.0, 0.3)));
        let t = frequency_trace(&f, 0.0, Some(Point::new(0.0, 0.3)), &[r], TraceRegion::Disk(Point::new(0.0, 0.3))).unwrap();
        prop_assert!((t.n[0] - h as f64 / 2.0).abs() < 1e-9, "N = {}", t.n[0]);
    }

    #[test]
    fn dh_check_ignores_radius_order(seed in 0u64..1000) {
        let a = Point::new(0.1, -0.05);
        let f = AbField::manufactured(manufactured_ab_solution(1, 0.3, 1.0, a));
        let mut rs = triples(&[0.3, 0.5, 0.7], 1e-3);
        let sorted = check_dh_identity(&frequency_trace(&f, 0.0, Some(a), &rs, TraceRegion::Disk(Point::ORIGIN)).unwrap()).unwrap();
        // deterministic shuffle
        let n = rs.len();
        for i in 0..n {
            let k = ((seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64 * 1442695040888963407)) >> 33) as usize % n;
            rs.swap(i, k);
        }
        let shuffled = check_dh_identity(&frequency_trace(&f, 0.0, Some(a), &rs, TraceRegion::Disk(Point::ORIGIN)).unwrap()).unwrap();
        prop_assert_eq!(sorted.rows, shuffled.rows);
    }

    #[test]
    fn poincare_and_trace_inequalities_fem(cy in -0.5f64..0.5, u in 0.1f64..0.95, k in 0usize..3) {
        let (pb, r) = half_disk(false);
        let f = AbField::from_eigen(pb, r, k).unwrap();
        let c = Point::new(0.0, cy);
        let rad = u * (1.0 - cy.abs());
        let rep = poincare_check(&f, c, rad).unwrap();
        prop_assert!(rep.poincare_ok(), "{rep:?}");
        prop_assert!(rep.trace_ok(), "{rep:?}");
    }

    #[test]
    fn poincare_and_trace_inequalities_analytic(m in 1u32..6, cy in -1.0f64..1.0, r in 0.2f64..2.0, amp in 0.0f64..1.0) {
        // harmonic, zero on {x1 = 0}, plus a non-harmonic part also zero there
        let f = AbField::analytic(
            move |p: Point| {
                let (rr, th) = (p.norm(), p.angle() + PI / 2.0);
                let mf = m as f64;
                let v = rr.powf(mf) * (mf * th).sin() + amp * p.x * p.y * p.y;
                let gr = mf * rr.powf(mf - 1.0) * (mf * th).sin();
                let gt = mf * rr.powf(mf - 1.0) * (mf * th).cos();
                let ang = p.angle();
                let g = Point::new(gr * ang.cos() - gt * ang.sin(), gr * ang.sin() + gt * ang.cos())
                    + Point::new(amp * p.y * p.y, 2.0 * amp * p.x * p.y);
                (v, g)
            },
            None,
        );
        let rep = poincare_check(&f, Point::new(0.0, cy), r).unwrap();
        prop_assert!(rep.poincare_ok(), "{rep:?}");
        prop_assert!(rep.trace_ok(), "{rep:?}");
    }
}

#[test]
fn dh_identity_on_analytic_fields() {
    for (h, a) in [(1, Point::new(0.1, 0.05)), (3, Point::new(-0.2, 0.1)), (1, Point::new(0.0, 0.0))] {
        let f = AbField::manufactured(manufactured_ab_solution(h, 0.4, 1.0, a));
        let t = frequency_trace(&f, 0.0, Some(a), &triples(&[0.4, 0.6, 0.8], 1e-4), TraceRegion::Disk(Point::ORIGIN)).unwrap();
        let rep = check_dh_identity(&t).unwrap();
        // only the centre of each triple is a genuine centred difference
        let worst = rep.rows.iter().step_by(3).map(|r| r.3).fold(0.0, f64::max);
        assert!(worst <= 1e-6, "h = {h}: {worst}");
    }
}

#[test]
fn dh_identity_on_fem_eigenfunctions() {
    let (pb, r) = half_disk(true);
    let a = Point::new(0.05, 0.1);
    let f = AbField::from_eigen(pb, r, 0).unwrap();
    let radii: Vec<f64> = (0..30).map(|j| 0.1 * 5f64.powf(j as f64 / 29.0)).collect();
    let t = frequency_trace(&f, r.lambdas[0], Some(a), &radii, TraceRegion::default()).unwrap();
    let rep = check_dh_identity(&t).unwrap();
    assert!(rep.max_relative <= 1e-2, "{}", rep.max_relative);
}

#[test]
fn pohozaev_on_manufactured_solutions() {
    for (h, a, c, d) in [(1, Point::new(0.05, 0.1), 0.7, 1.0), (1, Point::new(0.2, -0.1), -0.3, 0.8), (3, Point::new(0.1, 0.0), 0.5, 1.0)] {
        let f = AbField::manufactured(manufactured_ab_solution(h, c, d, a));
        // zero energy; the pole term for a simple pole is a1 π (c² - d²)/4
        let ma = if h == 1 { a.x * PI * (c * c - d * d) / 4.0 } else { 0.0 };
        for r in [0.3, 0.5] {
            let rep = pohozaev_residual(&f, 0.0, a, r, ma).unwrap();
            assert!(rep.residual <= 1e-3, "h = {h}, r = {r}: {rep:?}");
        }
    }
}

#[test]
fn hardy_inequality() {
    let (pb, r) = half_disk(true);
    for i in 0..3 {
        let q = hardy_ratio(&r.function(pb, i), Point::new(0.05, 0.1));
        assert!(q > 0.0 && q <= 4.0, "{q}");
    }
}

#[test]
fn frequency_bounds_on_synthetic_traces() {
    let radii: Vec<f64> = (0..10).map(|j| 0.05 * 2f64.powf(j as f64 / 3.0)).collect();
    let make = |n: f64| {
        let h: Vec<f64> = radii.iter().map(|r| r.powf(2.0 * n)).collect();
        FrequencyTrace {
            center: Point::ORIGIN,
            half: true,
            lambda: 1.0,
            pole: Some(Point::new(0.01, 0.0)),
            radii: radii.clone(),
            e: radii.iter().zip(&h).map(|(_, h)| n * h).collect(),
            h,
            n: vec![n; radii.len()],
        }
    };
    let opt = BoundsOptions { k: 4.0, r_eps: 0.4, eps: 0.25, delta: 0.05, p_sup: 1.0 };
    assert!(check_frequency_bounds(&make(1.0), &opt).unwrap().ok());
    let hi = check_frequency_bounds(&make(1.4), &opt).unwrap();
    assert!(!hi.upper_ok && !hi.doubling_ok);
    let lo = check_frequency_bounds(&make(0.5), &opt).unwrap();
    assert!(!lo.lower_ok && !lo.growth_ok);
}

#[test]
fn regions_leaving_the_mesh_are_refused() {
    let (pb, r) = half_disk(true);
    let f = AbField::from_eigen(pb, r, 0).unwrap();
    assert!(frequency_trace(&f, r.lambdas[0], Some(Point::new(0.05, 0.1)), &[1.5], TraceRegion::default()).is_err());
}
