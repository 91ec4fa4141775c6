use abspectra::geometry::{build_mesh, build_mesh_with, DomainSpec, Mesh, MeshPolicy, PoleConfig};
use abspectra::Point;
use proptest::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;

fn exact_area(d: &DomainSpec) -> f64 {
    match *d {
        DomainSpec::Disk { radius } => PI * radius * radius,
        DomainSpec::Sector { angle, radius } => 0.5 * angle * radius * radius,
        DomainSpec::HalfDisk { radius } => 0.5 * PI * radius * radius,
        DomainSpec::Rectangle { width, height } => width * height,
    }
}

fn domain() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (0.6f64..1.5).prop_map(DomainSpec::disk),
        (0.5f64..2.5, 0.6f64..1.5).prop_map(|(a, r)| DomainSpec::sector(a, r)),
        (0.6f64..1.5).prop_map(DomainSpec::half_disk),
        (0.6f64..1.5, 0.6f64..1.5).prop_map(|(w, h)| DomainSpec::rectangle(w, h)),
    ]
}

/// Conformity in raw vertex indices: every edge belongs to one or two triangles,
/// the edges with one triangle are the listed boundary edges (both sides of a cut
/// included). Without a cut the mesh is a topological disk; a cut splits every
/// vertex but its two ends, which pinches two boundary points together (χ = 0).
fn check_conforming(m: &Mesh) {
    m.validate().unwrap();
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &m.triangles {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            *count.entry((i.min(j), i.max(j))).or_default() += 1;
        }
    }
    assert!(count.values().all(|&c| c == 1 || c == 2));
    let single = count.values().filter(|&&c| c == 1).count();
    let cut_edges = m
        .boundary_edges
        .iter()
        .filter(|e| m.cut_pairs.iter().any(|&(a, s)| e.v.contains(&a) || e.v.contains(&s)))
        .count();
    assert!(single >= m.boundary_edges.len() - cut_edges);
    let euler = m.vertices.len() as i64 - count.len() as i64 + m.triangles.len() as i64;
    assert_eq!(euler, if m.cut_pairs.is_empty() { 1 } else { 0 });
    let used: std::collections::HashSet<usize> = m.triangles.iter().flatten().copied().collect();
    assert_eq!(used.len(), m.vertices.len(), "unused vertices");
}

fn total_area(m: &Mesh) -> f64 {
    (0..m.triangles.len()).map(|t| m.area(t)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn meshes_are_conforming(d in domain(), h in 0.08f64..0.25) {
        let m = build_mesh(&d, h, 2.0).unwrap();
        check_conforming(&m);
        let a = total_area(&m);
        prop_assert!((a - exact_area(&d)).abs() < 0.03 * exact_area(&d), "area {a}");
        prop_assert!(m.max_edge_length() <= 2.0 * h);
        prop_assert!(m.min_angle_deg() > 15.0, "min angle {}", m.min_angle_deg());
        for v in &m.vertices {
            prop_assert!(d.contains(*v) || d.nearest_boundary(*v).0 < 1e-8);
        }
    }

    #[test]
    fn cut_meshes_are_conforming(d in domain(), u in 0.15f64..0.85, v in 0.15f64..0.85) {
        // pole inside the domain, away from corners
        let pole = match d {
            DomainSpec::Disk { radius } => Point::polar(u * radius, 2.0 * PI * v),
            DomainSpec::Sector { angle, radius } => Point::polar(u * radius, angle * (v - 0.5)),
            DomainSpec::HalfDisk { radius } => Point::polar(u * radius, PI * (v - 0.5)),
            DomainSpec::Rectangle { width, height } => Point::new(u * width, (v - 0.5) * height),
        };
        let m = build_mesh_with(&d, &MeshPolicy::new(0.15, 2.0), Some(&PoleConfig::at(pole))).unwrap();
        check_conforming(&m);
        prop_assert!(!m.cut_pairs.is_empty());
        prop_assert!(m.pole().unwrap().dist(pole) < 1e-12);
        prop_assert!(m.cut_tip.is_some());
        let plain = m.without_cut();
        prop_assert!(plain.cut_pairs.is_empty());
        prop_assert!(plain.triangles.len() == m.triangles.len());
        prop_assert!((total_area(&plain) - total_area(&m)).abs() < 1e-12);
    }
}

#[test]
fn text_round_trip() {
    let m = build_mesh_with(&DomainSpec::half_disk(1.0), &MeshPolicy::new(0.2, 2.0), Some(&PoleConfig::at(Point::new(0.3, 0.1))))
        .unwrap();
    let back = Mesh::from_text(&m.to_text()).unwrap();
    assert_eq!(back.vertices, m.vertices);
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(back.cut_pairs, m.cut_pairs);
    assert_eq!(back.pole_vertex, m.pole_vertex);
}

#[test]
fn meshing_is_deterministic() {
    let d = DomainSpec::sector(PI / 4.0, 1.0);
    let p = PoleConfig::at(Point::new(0.6, 0.05));
    let a = build_mesh_with(&d, &MeshPolicy::default(), Some(&p)).unwrap();
    let b = build_mesh_with(&d, &MeshPolicy::default(), Some(&p)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pole_refinement_scales_with_boundary_distance() {
    let d = DomainSpec::half_disk(1.0);
    let near = build_mesh_with(&d, &MeshPolicy::default(), Some(&PoleConfig::at(Point::new(0.02, 0.0)))).unwrap();
    let far = build_mesh_with(&d, &MeshPolicy::default(), Some(&PoleConfig::at(Point::new(0.3, 0.0)))).unwrap();
    let hn = near.local_size(Point::new(0.02, 0.0));
    let hf = far.local_size(Point::new(0.3, 0.0));
    assert!(hn < 0.1 * 0.02 && hf < 0.1 * 0.3 && hn < hf);
}

#[test]
fn bad_domains_are_rejected() {
    assert!(build_mesh(&DomainSpec::disk(-1.0), 0.1, 2.0).is_err());
    assert!(build_mesh(&DomainSpec::sector(7.0, 1.0), 0.1, 2.0).is_err());
    let outside = PoleConfig::at(Point::new(2.0, 0.0));
    assert!(build_mesh_with(&DomainSpec::disk(1.0), &MeshPolicy::default(), Some(&outside)).is_err());
}
