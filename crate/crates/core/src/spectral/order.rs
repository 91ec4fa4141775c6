use crate::abfem::{EigenProblem, EigenResult, FemFunction};
use crate::error::{Error, Result};
use crate::geometry::{Locator, Mesh};
use crate::point::Point;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Where the order of vanishing is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Interior,
    Boundary,
    Pole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderOptions {
    /// Largest sampling radius; chosen from the geometry when `None`.
    pub r0: Option<f64>,
    pub levels: usize,
    pub samples: usize,
    /// Required ratio between the leading coefficient and every lower one.
    pub dominance: f64,
    pub consecutive: usize,
    pub max_harmonic: usize,
    /// Radii stop at this multiple of the local element size.
    pub min_radius_factor: f64,
    /// Ratio between consecutive radii.
    pub ratio: f64,
}

impl Default for OrderOptions {
    fn default() -> Self {
        OrderOptions {
            r0: None,
            levels: 16,
            samples: 128,
            dominance: 10.0,
            consecutive: 3,
            max_harmonic: 10,
            min_radius_factor: 2.0,
            ratio: std::f64::consts::SQRT_2,
        }
    }
}

/// Leading homogeneous term `r^{h/2} (c cos(hθ/2) + d sin(hθ/2))` of a field at a point.
///
/// At boundary points the angle is measured from the inward bisector of the local wedge,
/// and at wedges of opening `ω ≠ π` the order refers to the pulled-back variable
/// `x^{π/ω}`: the radial exponent is `exponent = (h/2) π/ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingOrder {
    pub kind: PointKind,
    pub point: Point,
    pub h: u32,
    pub exponent: f64,
    /// `(c_h, d_h)` scaled by `r^{-exponent}` at the smallest radius of the run.
    pub coeffs: (f64, f64),
    pub radii_used: Vec<f64>,
    /// Relative size of the remaining harmonics at the smallest radius used.
    pub fit_residual: f64,
    /// Opening of the wedge seen from a boundary point (`2π` elsewhere).
    pub wedge_angle: f64,
    pub note: Option<String>,
}

impl VanishingOrder {
    /// `h/2 - 1` nodal arcs end at a boundary zero, `h` at an interior one.
    pub fn expected_arcs(&self) -> usize {
        match self.kind {
            PointKind::Boundary => (self.h / 2).saturating_sub(1) as usize,
            PointKind::Interior | PointKind::Pole => self.h as usize,
        }
    }
}

/// Order of vanishing of eigenvector `index` at `point`.
pub fn vanishing_order(
    problem: &EigenProblem,
    result: &EigenResult,
    index: usize,
    point: Point,
    kind: PointKind,
) -> Result<VanishingOrder> {
    vanishing_order_with(problem, result, index, point, kind, &OrderOptions::default())
}

pub fn vanishing_order_with(
    problem: &EigenProblem,
    result: &EigenResult,
    index: usize,
    point: Point,
    kind: PointKind,
    opts: &OrderOptions,
) -> Result<VanishingOrder> {
    let v = result
        .vectors
        .get(index)
        .ok_or_else(|| Error::InvalidInput(format!("no eigenvector with index {index}")))?;
    let f = FemFunction::from_free(&problem.space, v);
    fem_vanishing_order(&f, point, kind, opts)
}

/// Direction in which the cut leaves the pole.
pub fn cut_angle(mesh: &Mesh) -> Result<f64> {
    let recipe = mesh.recipe.as_ref().and_then(|r| r.pole.as_ref().map(|p| (r.domain, p)));
    match recipe {
        Some((domain, pole)) => {
            let path = pole.resolve(&domain)?;
            Ok((path[1] - path[0]).angle())
        }
        None => Err(Error::InvalidInput("mesh carries no pole".into())),
    }
}

pub fn fem_vanishing_order(f: &FemFunction<'_>, point: Point, kind: PointKind, opts: &OrderOptions) -> Result<VanishingOrder> {
    let mesh = &f.space.mesh;
    let loc = Locator::new(mesh);
    let sample = |p: Point| f.eval(&loc, p).ok().map(|v| v.0);
    let cut = match kind {
        PointKind::Pole => cut_angle(mesh)?,
        _ => 0.0,
    };
    let h_local = mesh.local_size(point);
    order_from_samples(&sample, point, kind, cut, h_local, opts)
}

/// Harmonic analysis on dyadic circles around `b`, for any sampled field
/// (`sample` returns `None` outside the domain).
pub fn order_from_samples(
    sample: &dyn Fn(Point) -> Option<f64>,
    b: Point,
    kind: PointKind,
    cut_angle: f64,
    h_local: f64,
    opts: &OrderOptions,
) -> Result<VanishingOrder> {
    let n = opts.samples.max(16);
    let full_circle_ok = |r: f64| (0..n).all(|j| sample(b + Point::polar(r, 2.0 * PI * (j as f64 + 0.5) / n as f64)).is_some());
    let r0 = match opts.r0 {
        Some(r) => r,
        None => {
            // Largest radius whose circle stays in the domain (interior kinds) or a
            // radius comparable to the domain (boundary kind).
            let mut r = 1.0;
            while sample(b + Point::new(r, 0.0)).is_some() || sample(b - Point::new(r, 0.0)).is_some() {
                r *= 2.0;
            }
            let mut r = r / 2.0;
            if kind != PointKind::Boundary {
                while r > h_local && !full_circle_ok(r) {
                    r /= 2.0;
                }
                // Push out towards the largest admissible circle.
                let mut hi = 2.0 * r;
                for _ in 0..20 {
                    let mid = 0.5 * (r + hi);
                    if full_circle_ok(mid) {
                        r = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            0.8 * r
        }
    };
    let r_min = opts.min_radius_factor * h_local;
    let mut radii = vec![];
    let mut r = r0;
    while radii.len() < opts.levels && r >= r_min {
        radii.push(r);
        r /= opts.ratio.max(1.01);
    }
    if radii.len() < opts.consecutive {
        return Err(Error::Inconclusive(format!(
            "unresolved: only {} radii between {r0:.3e} and {:.3e}",
            radii.len(),
            r_min
        )));
    }
    let mut spectra = Vec::with_capacity(radii.len());
    for &r in &radii {
        spectra.push(harmonics(sample, b, r, kind, cut_angle, n, opts.max_harmonic)?);
    }
    let dom: Vec<Option<usize>> = spectra.iter().map(|s| dominant(&s.amp, opts.dominance)).collect();
    let mut best: Option<(usize, usize)> = None; // (harmonic index, last radius index of run)
    let mut j = 0;
    while j < dom.len() {
        let Some(m) = dom[j] else {
            j += 1;
            continue;
        };
        let mut e = j;
        while e + 1 < dom.len() && dom[e + 1] == Some(m) {
            e += 1;
        }
        if e + 1 - j >= opts.consecutive && best.is_none_or(|(bm, _)| m < bm) {
            best = Some((m, e));
        }
        j = e + 1;
    }
    let Some((m, last)) = best else {
        return Err(Error::Inconclusive(format!(
            "unresolved: no harmonic dominates on {} consecutive radii (dominant per radius: {dom:?})",
            opts.consecutive
        )));
    };
    let first = (0..=last).rev().take_while(|&i| dom[i] == Some(m)).last().unwrap_or(last);
    let s = &spectra[last];
    let r = radii[last];
    let (h, exponent) = match kind {
        PointKind::Interior => (2 * m as u32, m as f64),
        PointKind::Pole => (2 * m as u32 + 1, m as f64 + 0.5),
        PointKind::Boundary => (2 * (m as u32 + 1), (m as f64 + 1.0) * PI / s.wedge),
    };
    let scale = r.powf(exponent);
    let coeffs = (s.c[m] / scale, s.d[m] / scale);
    let rest: f64 = s.amp.iter().enumerate().filter(|(i, _)| *i != m).map(|(_, a)| a * a).sum::<f64>().sqrt();
    let note = (kind == PointKind::Boundary && (s.wedge - PI).abs() > 0.05).then(|| {
        format!("order in pulled-back coordinates x^(pi/omega), omega = {:.6}", s.wedge)
    });
    Ok(VanishingOrder {
        kind,
        point: b,
        h,
        exponent,
        coeffs,
        radii_used: radii[first..=last].to_vec(),
        fit_residual: rest / s.amp[m].max(1e-300),
        wedge_angle: s.wedge,
        note,
    })
}

struct Spectrum {
    amp: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    wedge: f64,
}

fn dominant(amp: &[f64], ratio: f64) -> Option<usize> {
    let top = amp.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let mut lower_max: f64 = 0.0;
    for (i, &a) in amp.iter().enumerate() {
        if a >= 0.1 * top && a >= ratio * lower_max {
            return Some(i);
        }
        lower_max = lower_max.max(a);
    }
    None
}

fn harmonics(
    sample: &dyn Fn(Point) -> Option<f64>,
    b: Point,
    r: f64,
    kind: PointKind,
    cut_angle: f64,
    n: usize,
    mh: usize,
) -> Result<Spectrum> {
    let get = |th: f64| -> Result<f64> {
        let p = b + Point::polar(r, th);
        sample(p).ok_or(Error::OffMesh(p.x, p.y))
    };
    let (mut c, mut d) = (vec![0.0; mh], vec![0.0; mh]);
    let mut wedge = 2.0 * PI;
    match kind {
        PointKind::Interior | PointKind::Pole => {
            let (start, freq): (f64, Box<dyn Fn(usize) -> f64>) = match kind {
                PointKind::Interior => (0.0, Box::new(|m| m as f64)),
                _ => (cut_angle, Box::new(|m| m as f64 + 0.5)),
            };
            for j in 0..n {
                let th = start + 2.0 * PI * (j as f64 + 0.5) / n as f64;
                let v = get(th)?;
                for m in 0..mh {
                    let k = freq(m);
                    c[m] += v * (k * th).cos();
                    d[m] += v * (k * th).sin();
                }
            }
            for m in 0..mh {
                let w = if kind == PointKind::Interior && m == 0 { 1.0 } else { 2.0 };
                c[m] *= w / n as f64;
                d[m] *= w / n as f64;
            }
        }
        PointKind::Boundary => {
            let (p0, p1) = interior_arc(sample, b, r)?;
            wedge = p1 - p0;
            for j in 0..n {
                let s = (j as f64 + 0.5) / n as f64;
                let v = get(p0 + s * wedge)?;
                for m in 0..mh {
                    c[m] += v * ((m + 1) as f64 * PI * s).sin();
                }
            }
            for m in 0..mh {
                let sm = c[m] * 2.0 / n as f64;
                // sin(k(θ + ω/2)) = sin(kθ) cos(kω/2) + cos(kθ) sin(kω/2), θ from the bisector.
                let k = (m + 1) as f64 * PI / wedge;
                c[m] = sm * (k * wedge / 2.0).sin();
                d[m] = sm * (k * wedge / 2.0).cos();
            }
        }
    }
    let amp = c.iter().zip(&d).map(|(a, b)| a.hypot(*b)).collect();
    Ok(Spectrum { amp, c, d, wedge })
}

/// Angular interval `[φ0, φ1]` of the circle `∂D_r(b)` inside the domain.
fn interior_arc(sample: &dyn Fn(Point) -> Option<f64>, b: Point, r: f64) -> Result<(f64, f64)> {
    let m = 720;
    let inside: Vec<bool> = (0..m).map(|j| sample(b + Point::polar(r, 2.0 * PI * j as f64 / m as f64)).is_some()).collect();
    if inside.iter().all(|&x| x) || !inside.iter().any(|&x| x) {
        return Err(Error::InvalidInput(format!("({}, {}) is not a boundary point at radius {r}", b.x, b.y)));
    }
    // Longest cyclic run of inside samples.
    let start = (0..m).find(|&j| !inside[j]).unwrap();
    let (mut best, mut cur, mut best_end) = (0, 0, 0);
    for k in 1..=m {
        let j = (start + k) % m;
        if inside[j] {
            cur += 1;
            if cur > best {
                best = cur;
                best_end = start + k;
            }
        } else {
            cur = 0;
        }
    }
    let dth = 2.0 * PI / m as f64;
    let last_in = best_end as f64 * dth;
    let first_in = (best_end + 1 - best) as f64 * dth;
    let is_in = |th: f64| sample(b + Point::polar(r, th)).is_some();
    let bisect = |mut a_in: f64, mut a_out: f64| {
        for _ in 0..50 {
            let mid = 0.5 * (a_in + a_out);
            if is_in(mid) {
                a_in = mid;
            } else {
                a_out = mid;
            }
        }
        0.5 * (a_in + a_out)
    };
    let p0 = bisect(first_in, first_in - dth);
    let p1 = bisect(last_in, last_in + dth);
    Ok((p0, p1))
}
