use crate::abfem::{EigenProblem, EigenResult, FemFunction, ManufacturedAb, Weight};
use crate::error::{Error, Result};
use crate::geometry::Locator;
use crate::integrate::{barycentric, clip_disk, clip_half_plane, ClipRule};
use crate::point::Point;
use crate::quadrature::gauss_interval;
use std::f64::consts::PI;

/// Value and gradient of a real field.
pub type FieldFn<'a> = dyn Fn(Point) -> (f64, Point) + Sync + 'a;

/// A field in the real double covering representation: `|u| = |f|` and
/// `|(i∇ + A_a) u| = |∇f|`.
pub enum AbField<'a> {
    Fem { f: FemFunction<'a>, loc: Locator<'a>, weight: Weight },
    Analytic { eval: Box<FieldFn<'a>>, singular: Option<Point>, weight: Weight },
}

/// `D_r(c)`, or its part `{x1 > c.x}` when `half` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub center: Point,
    pub r: f64,
    pub half: bool,
}

impl Region {
    pub fn half_disk(center: Point, r: f64) -> Self {
        Region { center, r, half: true }
    }
    pub fn disk(center: Point, r: f64) -> Self {
        Region { center, r, half: false }
    }
    fn contains(&self, p: Point) -> bool {
        p.dist(self.center) < self.r && (!self.half || p.x > self.center.x)
    }
}

/// Volume integrals over a region.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VolumeMoments {
    /// `∫ |∇f|²`
    pub grad2: f64,
    /// `∫ p f²`
    pub pf2: f64,
    /// `∫ f²`
    pub f2: f64,
    /// `∫ f² (p + ∇p·(x - c)/2)`
    pub weighted: f64,
    pub area: f64,
}

/// Integrals over the circular part of the region boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArcMoments {
    /// `∫ f²`
    pub f2: f64,
    /// `∫ |∇f|²`
    pub grad2: f64,
    /// `∫ (∂_ν f)²`
    pub dnu2: f64,
    /// `∫ p f²`
    pub pf2: f64,
    /// `∫ f ∂_ν f`
    pub flux: f64,
    pub length: f64,
}

impl<'a> AbField<'a> {
    pub fn fem(f: FemFunction<'a>, weight: Weight) -> Self {
        let loc = Locator::new(&f.space.mesh);
        AbField::Fem { f, loc, weight }
    }

    /// Eigenfunction `index` of a computed result.
    pub fn from_eigen(problem: &'a EigenProblem, result: &EigenResult, index: usize) -> Result<Self> {
        let v = result
            .vectors
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("no eigenvector with index {index}")))?;
        Ok(AbField::fem(FemFunction::from_free(&problem.space, v), problem.weight.clone()))
    }

    pub fn analytic(eval: impl Fn(Point) -> (f64, Point) + Sync + 'a, singular: Option<Point>) -> Self {
        AbField::Analytic { eval: Box::new(eval), singular, weight: Weight::one() }
    }

    pub fn manufactured(m: ManufacturedAb) -> AbField<'static> {
        AbField::Analytic {
            eval: Box::new(move |x| (m.real_value(x), m.real_gradient(x))),
            singular: Some(m.a),
            weight: Weight::one(),
        }
    }

    pub fn with_weight(mut self, w: Weight) -> Self {
        match &mut self {
            AbField::Fem { weight, .. } | AbField::Analytic { weight, .. } => *weight = w,
        }
        self
    }

    pub fn weight(&self) -> &Weight {
        match self {
            AbField::Fem { weight, .. } | AbField::Analytic { weight, .. } => weight,
        }
    }

    /// Value and gradient at a point.
    pub fn eval(&self, p: Point) -> Result<(f64, Point)> {
        match self {
            AbField::Fem { f, loc, .. } => f.eval(loc, p),
            AbField::Analytic { eval, .. } => Ok(eval(p)),
        }
    }

    /// Fails when the region's circular boundary leaves the mesh.
    pub fn check_region(&self, reg: &Region) -> Result<()> {
        if let AbField::Fem { loc, .. } = self {
            let n = 256;
            for j in 0..n {
                let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                let p = reg.center + Point::polar(reg.r * (1.0 - 1e-9), th);
                if reg.half && p.x <= reg.center.x {
                    continue;
                }
                if loc.locate(p).is_none() {
                    return Err(Error::RegionOutside(format!(
                        "circle of radius {} about ({}, {}) leaves the mesh",
                        reg.r, reg.center.x, reg.center.y
                    )));
                }
            }
        }
        Ok(())
    }

    /// Visit quadrature points `(x, f, ∇f, weight)` of the region.
    pub fn for_each_volume_point(&self, reg: &Region, mut visit: impl FnMut(Point, f64, Point, f64)) {
        match self {
            AbField::Fem { f, .. } => {
                let mesh = &f.space.mesh;
                let mut pts = Vec::new();
                for t in 0..mesh.triangles.len() {
                    let tri = mesh.triangle_points(t);
                    if !touches(&tri, reg) {
                        continue;
                    }
                    let poly = if reg.half { clip_half_plane(&tri, reg.center.x) } else { tri.to_vec() };
                    let clip = clip_disk(&poly, reg.center, reg.r);
                    pts.clear();
                    clip.area_points(reg.center, reg.r, ClipRule::default(), &mut pts);
                    for &(x, wt) in &pts {
                        let (v, g) = f.eval_in(t, barycentric(tri, x));
                        visit(x, v, g, wt);
                    }
                }
            }
            AbField::Analytic { eval, singular, .. } => {
                let s = match singular {
                    Some(s) if reg.contains(*s) => *s,
                    _ => reg.center,
                };
                for (x, wt) in star_points(reg, s) {
                    let (v, g) = eval(x);
                    visit(x, v, g, wt);
                }
            }
        }
    }

    pub fn volume(&self, reg: &Region) -> VolumeMoments {
        let mut m = VolumeMoments::default();
        let w = self.weight();
        self.for_each_volume_point(reg, |x, f, g, wt| {
            let p = w.value(x);
            let gp = w.gradient(x);
            m.grad2 += wt * g.norm2();
            m.pf2 += wt * p * f * f;
            m.f2 += wt * f * f;
            m.weighted += wt * f * f * (p + 0.5 * gp.dot(x - reg.center));
            m.area += wt;
        });
        m
    }

    pub fn arc(&self, reg: &Region) -> ArcMoments {
        let mut m = ArcMoments::default();
        let w = self.weight();
        let mut add = |x: Point, nu: Point, f: f64, g: Point, wt: f64| {
            let dn = g.dot(nu);
            m.f2 += wt * f * f;
            m.grad2 += wt * g.norm2();
            m.dnu2 += wt * dn * dn;
            m.pf2 += wt * w.value(x) * f * f;
            m.flux += wt * f * dn;
            m.length += wt;
        };
        match self {
            AbField::Fem { f, .. } => {
                let mesh = &f.space.mesh;
                let mut pts = Vec::new();
                for t in 0..mesh.triangles.len() {
                    let tri = mesh.triangle_points(t);
                    if !touches(&tri, reg) {
                        continue;
                    }
                    let poly = if reg.half { clip_half_plane(&tri, reg.center.x) } else { tri.to_vec() };
                    let clip = clip_disk(&poly, reg.center, reg.r);
                    pts.clear();
                    clip.arc_points(reg.center, reg.r, 8, &mut pts);
                    for &(x, nu, wt) in &pts {
                        let (v, g) = f.eval_in(t, barycentric(tri, x));
                        add(x, nu, v, g, wt);
                    }
                }
            }
            AbField::Analytic { eval, .. } => {
                let (t0, t1) = if reg.half { (-PI / 2.0, PI / 2.0) } else { (0.0, 2.0 * PI) };
                for (th, wt) in panels(t0, t1, 16, 16) {
                    let nu = Point::polar(1.0, th);
                    let x = reg.center + nu * reg.r;
                    let (v, g) = eval(x);
                    add(x, nu, v, g, wt * reg.r);
                }
            }
        }
        m
    }

    /// `∫ ∂₁f ∂₂f (x₂ - c₂) dx₂` over the flat side of a half-disk: the part of the
    /// Pohozaev boundary term that survives when `f` does not vanish there.
    /// Finite element fields satisfy the Dirichlet condition and give zero.
    pub fn flat_term(&self, reg: &Region) -> f64 {
        match self {
            AbField::Fem { .. } => 0.0,
            AbField::Analytic { eval, .. } => {
                if !reg.half {
                    return 0.0;
                }
                let c = reg.center;
                panels(c.y - reg.r, c.y + reg.r, 16, 16)
                    .map(|(y, w)| {
                        let (_, g) = eval(Point::new(c.x, y));
                        w * g.x * g.y * (y - c.y)
                    })
                    .sum()
            }
        }
    }
}

fn touches(tri: &[Point; 3], reg: &Region) -> bool {
    let c = reg.center;
    let lo = Point::new(tri.iter().map(|p| p.x).fold(f64::INFINITY, f64::min), tri.iter().map(|p| p.y).fold(f64::INFINITY, f64::min));
    let hi = Point::new(
        tri.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
        tri.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
    );
    let dx = (lo.x - c.x).max(0.0).max(c.x - hi.x);
    let dy = (lo.y - c.y).max(0.0).max(c.y - hi.y);
    dx * dx + dy * dy < reg.r * reg.r && (!reg.half || hi.x > c.x)
}

/// Composite Gauss rule with `np` panels of `n` points on `[a, b]`.
pub(crate) fn panels(a: f64, b: f64, np: usize, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = (b - a) / np as f64;
    (0..np).flat_map(move |k| gauss_interval(n, a + k as f64 * h, a + (k + 1) as f64 * h))
}

/// Polar quadrature about a point `s` of the (star-shaped) region.
fn star_points(reg: &Region, s: Point) -> Vec<(Point, f64)> {
    let c = reg.center;
    let f = s - c;
    let rho_max = |th: f64| -> f64 {
        let e = Point::polar(1.0, th);
        let b = f.dot(e);
        let disc = b * b - (f.norm2() - reg.r * reg.r);
        let mut rho = -b + disc.max(0.0).sqrt();
        if reg.half && e.x < 0.0 {
            rho = rho.min((c.x - s.x) / e.x);
        }
        rho.max(0.0)
    };
    let mut breaks = vec![0.0, 2.0 * PI];
    if reg.half {
        for q in [c + Point::new(0.0, reg.r), c - Point::new(0.0, reg.r)] {
            if q.dist(s) > 0.0 {
                breaks.push((q - s).angle().rem_euclid(2.0 * PI));
            }
        }
        if (s.x - c.x).abs() < 1e-14 * reg.r {
            breaks.push(PI / 2.0);
            breaks.push(1.5 * PI);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        for (th, wt) in panels(w[0], w[1], 4, 16) {
            let rm = rho_max(th);
            if rm <= 0.0 {
                continue;
            }
            let e = Point::polar(1.0, th);
            for (rho, wr) in gauss_interval(24, 0.0, rm) {
                out.push((s + e * rho, wt * wr * rho));
            }
        }
    }
    out
}
