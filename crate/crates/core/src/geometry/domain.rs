use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};

/// A point of the plane, stored as a complex number.
pub type Point = Complex64;

pub fn pt(re: f64, im: f64) -> Point {
    Point::new(re, im)
}

/// Relative tolerance under which two boundary candidates count as equally near.
const TIE_TOL: f64 = 1e-13;

/// Symbolic planar domain.
///
/// Variants carry their natural parameters; `WithPunctures` removes finitely
/// many points from a base domain. Use [`DomainSpec::validate`] after
/// deserializing untrusted input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk {
        center: Point,
        radius: f64,
    },
    /// `{ z : Re(z * conj(n)) > offset }` with unit normal `n = exp(i * normal_angle)`
    /// pointing into the domain.
    HalfPlane {
        normal_angle: f64,
        offset: f64,
    },
    Annulus {
        inner: f64,
        outer: f64,
        center: Point,
    },
    ExteriorDisk {
        center: Point,
        radius: f64,
    },
    Polygon {
        vertices: Vec<Point>,
    },
    PuncturedPlane {
        punctures: Vec<Point>,
    },
    WithPunctures {
        base: Box<DomainSpec>,
        punctures: Vec<Point>,
    },
}

/// One connected piece of the boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryComponent {
    Circle { center: Point, radius: f64 },
    Line { normal_angle: f64, offset: f64 },
    Polygon { vertices: Vec<Point> },
    Puncture(Point),
}

impl BoundaryComponent {
    /// Nearest point on this component and its distance to `w`.
    pub fn nearest(&self, w: Point) -> (Point, f64) {
        match self {
            BoundaryComponent::Circle { center, radius } => {
                let d = w - center;
                let r = d.norm();
                let p = if r == 0.0 {
                    center + radius
                } else {
                    center + d * (radius / r)
                };
                (p, (r - radius).abs())
            }
            BoundaryComponent::Line {
                normal_angle,
                offset,
            } => {
                let n = Point::from_polar(1.0, *normal_angle);
                let s = (w * n.conj()).re - offset;
                (w - n * s, s.abs())
            }
            BoundaryComponent::Polygon { vertices } => {
                let mut best = (vertices[0], f64::INFINITY);
                for (a, b) in edges(vertices) {
                    let q = nearest_on_segment(a, b, w);
                    let d = (w - q).norm();
                    if closer(w, (q, d), best) {
                        best = (q, d);
                    }
                }
                best
            }
            BoundaryComponent::Puncture(p) => (*p, (w - p).norm()),
        }
    }

    pub fn is_puncture(&self) -> bool {
        matches!(self, BoundaryComponent::Puncture(_))
    }

    /// Signed curvature of the component at its nearest point to `w`, positive
    /// when the component bends around `w` (disk interior).
    pub fn curvature_towards(&self, w: Point) -> f64 {
        match self {
            BoundaryComponent::Circle { center, radius } => {
                if (w - center).norm() < *radius {
                    1.0 / radius
                } else {
                    -1.0 / radius
                }
            }
            _ => 0.0,
        }
    }
}

pub(crate) fn edges(vertices: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = vertices.len();
    (0..n).map(move |k| (vertices[k], vertices[(k + 1) % n]))
}

pub(crate) fn nearest_on_segment(a: Point, b: Point, w: Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = ((w - a) * ab.conj()).re / len2;
    a + ab * t.clamp(0.0, 1.0)
}

/// Angle of `p - w` measured in `[0, 2pi)`.
fn angle_from(w: Point, p: Point) -> f64 {
    let a = (p - w).arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Strict preference between two candidates with tie-break on the angle around `w`.
fn closer(w: Point, cand: (Point, f64), best: (Point, f64)) -> bool {
    if !best.1.is_finite() {
        return true;
    }
    let scale = best.1.max(cand.1).max(1e-300);
    if cand.1 < best.1 - TIE_TOL * scale {
        true
    } else if cand.1 > best.1 + TIE_TOL * scale {
        false
    } else {
        angle_from(w, cand.0) < angle_from(w, best.0)
    }
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    fn orient(p: Point, q: Point, r: Point) -> f64 {
        ((q - p).conj() * (r - p)).im
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        orient(p, q, r) == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(MetricError::InvalidDomain(format!(
            "{name} must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

fn check_point(p: Point) -> Result<()> {
    if !(p.re.is_finite() && p.im.is_finite()) {
        return Err(MetricError::InvalidDomain(format!(
            "non-finite coordinate ({}, {})",
            p.re, p.im
        )));
    }
    Ok(())
}

fn check_distinct(points: &[Point]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        check_point(*p)?;
        if points[..i].contains(p) {
            return Err(MetricError::DuplicatePuncture(*p));
        }
    }
    Ok(())
}

impl DomainSpec {
    pub fn disk(center: Point, radius: f64) -> Self {
        DomainSpec::Disk { center, radius }
    }

    pub fn unit_disk() -> Self {
        Self::disk(Point::new(0.0, 0.0), 1.0)
    }

    pub fn punctured_plane(punctures: impl Into<Vec<Point>>) -> Self {
        DomainSpec::PuncturedPlane {
            punctures: punctures.into(),
        }
    }

    /// `C \ {0, 1}`.
    pub fn twice_punctured_standard() -> Self {
        Self::punctured_plane(vec![pt(0.0, 0.0), pt(1.0, 0.0)])
    }

    /// Checks the structural invariants of the variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Disk { center, radius } | DomainSpec::ExteriorDisk { center, radius } => {
                check_point(*center)?;
                check_radius("radius", *radius)
            }
            DomainSpec::HalfPlane {
                normal_angle,
                offset,
            } => {
                if normal_angle.is_finite() && offset.is_finite() {
                    Ok(())
                } else {
                    Err(MetricError::InvalidDomain("non-finite half-plane".into()))
                }
            }
            DomainSpec::Annulus {
                inner,
                outer,
                center,
            } => {
                check_point(*center)?;
                check_radius("inner radius", *inner)?;
                check_radius("outer radius", *outer)?;
                if inner >= outer {
                    return Err(MetricError::InvalidDomain(format!(
                        "annulus needs inner < outer, got {inner} >= {outer}"
                    )));
                }
                Ok(())
            }
            DomainSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(MetricError::InvalidDomain(
                        "polygon needs at least 3 vertices".into(),
                    ));
                }
                check_distinct(vertices)
                    .map_err(|_| MetricError::InvalidDomain("repeated polygon vertex".into()))?;
                let n = vertices.len();
                for i in 0..n {
                    for j in i + 1..n {
                        let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                        if adjacent {
                            continue;
                        }
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                        if segments_cross(a, b, c, d) {
                            return Err(MetricError::InvalidDomain(format!(
                                "polygon edges {i} and {j} intersect"
                            )));
                        }
                    }
                }
                if polygon_area(vertices).abs() == 0.0 {
                    return Err(MetricError::InvalidDomain("degenerate polygon".into()));
                }
                Ok(())
            }
            DomainSpec::PuncturedPlane { punctures } => {
                if punctures.is_empty() {
                    return Err(MetricError::InvalidDomain(
                        "punctured plane needs at least one puncture".into(),
                    ));
                }
                check_distinct(punctures)
            }
            DomainSpec::WithPunctures { base, punctures } => {
                if matches!(
                    **base,
                    DomainSpec::WithPunctures { .. } | DomainSpec::PuncturedPlane { .. }
                ) {
                    return Err(MetricError::InvalidDomain(
                        "nested puncture lists must be flattened".into(),
                    ));
                }
                base.validate()?;
                check_distinct(punctures)?;
                for p in punctures {
                    if !base.contains(*p) {
                        return Err(MetricError::PointNotInDomain(*p));
                    }
                }
                Ok(())
            }
        }
    }

    /// Open-set membership: boundary points and punctures are excluded.
    pub fn contains(&self, w: Point) -> bool {
        if !(w.re.is_finite() && w.im.is_finite()) {
            return false;
        }
        match self {
            DomainSpec::Disk { center, radius } => (w - center).norm() < *radius,
            DomainSpec::HalfPlane {
                normal_angle,
                offset,
            } => (w * Point::from_polar(1.0, -normal_angle)).re > *offset,
            DomainSpec::Annulus {
                inner,
                outer,
                center,
            } => {
                let r = (w - center).norm();
                r > *inner && r < *outer
            }
            DomainSpec::ExteriorDisk { center, radius } => (w - center).norm() > *radius,
            DomainSpec::Polygon { vertices } => {
                point_in_polygon(vertices, w)
                    && edges(vertices).all(|(a, b)| (w - nearest_on_segment(a, b, w)).norm() > 0.0)
            }
            DomainSpec::PuncturedPlane { punctures } => !punctures.contains(&w),
            DomainSpec::WithPunctures { base, punctures } => {
                base.contains(w) && !punctures.contains(&w)
            }
        }
    }

    /// Punctures (isolated boundary points) of the domain.
    pub fn punctures(&self) -> &[Point] {
        match self {
            DomainSpec::PuncturedPlane { punctures } | DomainSpec::WithPunctures { punctures, .. } => {
                punctures
            }
            _ => &[],
        }
    }

    /// The domain with all punctures filled in (`None` for a punctured plane).
    pub fn base(&self) -> Option<&DomainSpec> {
        match self {
            DomainSpec::WithPunctures { base, .. } => Some(base),
            DomainSpec::PuncturedPlane { .. } => None,
            other => Some(other),
        }
    }

    /// Boundary components, continua first, then punctures in list order.
    pub fn boundary_components(&self) -> Vec<BoundaryComponent> {
        let mut out = Vec::new();
        match self {
            DomainSpec::Disk { center, radius } | DomainSpec::ExteriorDisk { center, radius } => {
                out.push(BoundaryComponent::Circle {
                    center: *center,
                    radius: *radius,
                })
            }
            DomainSpec::HalfPlane {
                normal_angle,
                offset,
            } => out.push(BoundaryComponent::Line {
                normal_angle: *normal_angle,
                offset: *offset,
            }),
            DomainSpec::Annulus {
                inner,
                outer,
                center,
            } => {
                out.push(BoundaryComponent::Circle {
                    center: *center,
                    radius: *outer,
                });
                out.push(BoundaryComponent::Circle {
                    center: *center,
                    radius: *inner,
                });
            }
            DomainSpec::Polygon { vertices } => out.push(BoundaryComponent::Polygon {
                vertices: vertices.clone(),
            }),
            DomainSpec::PuncturedPlane { punctures } => {
                out.extend(punctures.iter().map(|p| BoundaryComponent::Puncture(*p)))
            }
            DomainSpec::WithPunctures { base, punctures } => {
                out = base.boundary_components();
                out.extend(punctures.iter().map(|p| BoundaryComponent::Puncture(*p)));
            }
        }
        out
    }

    /// Complement contains at least two points.
    pub fn is_hyperbolic(&self) -> bool {
        match self {
            DomainSpec::PuncturedPlane { punctures } => punctures.len() >= 2,
            _ => true,
        }
    }

    pub fn is_simply_connected(&self) -> bool {
        matches!(
            self,
            DomainSpec::Disk { .. } | DomainSpec::HalfPlane { .. } | DomainSpec::Polygon { .. }
        )
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            DomainSpec::Disk { .. } | DomainSpec::Annulus { .. } | DomainSpec::Polygon { .. } => true,
            DomainSpec::WithPunctures { base, .. } => base.is_bounded(),
            _ => false,
        }
    }

    /// True when the complement is compact, so the domain contains a
    /// neighbourhood of infinity.
    pub fn has_compact_complement(&self) -> bool {
        match self {
            DomainSpec::ExteriorDisk { .. } | DomainSpec::PuncturedPlane { .. } => true,
            DomainSpec::WithPunctures { base, .. } => base.has_compact_complement(),
            _ => false,
        }
    }

    fn require_inside(&self, w: Point) -> Result<()> {
        if self.contains(w) {
            Ok(())
        } else {
            Err(MetricError::PointNotInDomain(w))
        }
    }

    /// Euclidean distance from `w` to the complement.
    pub fn boundary_distance(&self, w: Point) -> Result<f64> {
        self.require_inside(w)?;
        Ok(self
            .boundary_components()
            .iter()
            .map(|c| c.nearest(w).1)
            .fold(f64::INFINITY, f64::min))
    }

    /// Nearest boundary point; ties broken by the smallest angle of `p - w`
    /// measured counter-clockwise from the positive real axis.
    pub fn nearest_boundary_point(&self, w: Point) -> Result<Point> {
        self.require_inside(w)?;
        Ok(self.nearest_feature(w).0)
    }

    /// Nearest boundary point, its distance and the index of its component.
    pub(crate) fn nearest_feature(&self, w: Point) -> (Point, f64, usize) {
        let mut best = (w, f64::INFINITY);
        let mut idx = 0;
        for (k, c) in self.boundary_components().iter().enumerate() {
            let cand = c.nearest(w);
            if closer(w, cand, best) {
                best = cand;
                idx = k;
            }
        }
        (best.0, best.1, idx)
    }

    /// Distance to the boundary with punctures ignored; infinite for punctured planes.
    pub fn continuum_distance(&self, w: Point) -> f64 {
        self.boundary_components()
            .iter()
            .filter(|c| !c.is_puncture())
            .map(|c| c.nearest(w).1)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn on_boundary(&self, p: Point, tol: f64) -> bool {
        self.boundary_components()
            .iter()
            .any(|c| c.nearest(p).1 <= tol)
    }

    /// Image of the domain under `z -> alpha * z + beta`.
    pub fn affine_image(&self, alpha: Point, beta: Point) -> Result<DomainSpec> {
        if alpha == Point::new(0.0, 0.0) {
            return Err(MetricError::InvalidArgument(
                "affine map needs alpha != 0".into(),
            ));
        }
        let t = |z: Point| alpha * z + beta;
        let s = alpha.norm();
        Ok(match self {
            DomainSpec::Disk { center, radius } => DomainSpec::Disk {
                center: t(*center),
                radius: radius * s,
            },
            DomainSpec::ExteriorDisk { center, radius } => DomainSpec::ExteriorDisk {
                center: t(*center),
                radius: radius * s,
            },
            DomainSpec::Annulus {
                inner,
                outer,
                center,
            } => DomainSpec::Annulus {
                inner: inner * s,
                outer: outer * s,
                center: t(*center),
            },
            DomainSpec::HalfPlane {
                normal_angle,
                offset,
            } => {
                let n = Point::from_polar(1.0, normal_angle + alpha.arg());
                DomainSpec::HalfPlane {
                    normal_angle: n.arg(),
                    offset: offset * s + (beta * n.conj()).re,
                }
            }
            DomainSpec::Polygon { vertices } => DomainSpec::Polygon {
                vertices: vertices.iter().map(|v| t(*v)).collect(),
            },
            DomainSpec::PuncturedPlane { punctures } => DomainSpec::PuncturedPlane {
                punctures: punctures.iter().map(|v| t(*v)).collect(),
            },
            DomainSpec::WithPunctures { base, punctures } => DomainSpec::WithPunctures {
                base: Box::new(base.affine_image(alpha, beta)?),
                punctures: punctures.iter().map(|v| t(*v)).collect(),
            },
        })
    }

    /// A deterministic list of points meant to lie inside the domain; used
    /// when a witness point is needed.
    pub fn interior_candidates(&self) -> Vec<Point> {
        let mut out = match self.base() {
            Some(DomainSpec::Disk { center, radius }) => {
                let r = *radius;
                vec![
                    center + r / 2.0,
                    center + Point::new(0.0, r / 2.0),
                    center - r / 2.0,
                    *center,
                ]
            }
            Some(DomainSpec::Annulus {
                inner,
                outer,
                center,
            }) => {
                let r = (inner + outer) / 2.0;
                vec![center + r, center + Point::new(0.0, r), center - r]
            }
            Some(DomainSpec::ExteriorDisk { center, radius }) => {
                vec![center + 2.0 * radius, center + Point::new(0.0, 2.0 * radius)]
            }
            Some(DomainSpec::HalfPlane {
                normal_angle,
                offset,
            }) => {
                let n = Point::from_polar(1.0, *normal_angle);
                vec![n * (offset + 1.0), n * (offset + 2.0)]
            }
            Some(DomainSpec::Polygon { vertices }) => {
                let c = vertices.iter().sum::<Point>() / vertices.len() as f64;
                let mut v = vec![c];
                for (a, b) in edges(vertices) {
                    let mid = (a + b) / 2.0;
                    v.push(mid + (c - mid) * 0.5);
                }
                v
            }
            _ => {
                let ps = self.punctures();
                let c = ps.iter().sum::<Point>() / ps.len().max(1) as f64;
                let spread = ps.iter().map(|p| (p - c).norm()).fold(0.0, f64::max).max(1.0);
                vec![
                    c + Point::new(0.5 * spread, 0.5 * spread),
                    c + Point::new(-0.5 * spread, 0.7 * spread),
                    c,
                ]
            }
        };
        out.retain(|p| self.contains(*p));
        out
    }

    /// Bounding box `(min, max)` of the closure, `None` for unbounded domains.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self.base()? {
            DomainSpec::Disk { center, radius } => Some((
                center - Point::new(*radius, *radius),
                center + Point::new(*radius, *radius),
            )),
            DomainSpec::Annulus { outer, center, .. } => Some((
                center - Point::new(*outer, *outer),
                center + Point::new(*outer, *outer),
            )),
            DomainSpec::Polygon { vertices } => {
                let mut lo = vertices[0];
                let mut hi = vertices[0];
                for v in vertices {
                    lo = Point::new(lo.re.min(v.re), lo.im.min(v.im));
                    hi = Point::new(hi.re.max(v.re), hi.im.max(v.im));
                }
                Some((lo, hi))
            }
            _ => None,
        }
    }

    /// Center and radius of a disk containing the (compact) complement.
    pub fn complement_extent(&self) -> Option<(Point, f64)> {
        match self {
            DomainSpec::ExteriorDisk { center, radius } => Some((*center, *radius)),
            DomainSpec::PuncturedPlane { punctures } => {
                let c = punctures.iter().sum::<Point>() / punctures.len() as f64;
                let r = punctures.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
                Some((c, r))
            }
            DomainSpec::WithPunctures { base, punctures } => {
                let (c, r) = base.complement_extent()?;
                let r = punctures.iter().map(|p| (p - c).norm()).fold(r, f64::max);
                Some((c, r))
            }
            _ => None,
        }
    }
}

pub(crate) fn polygon_area(vertices: &[Point]) -> f64 {
    edges(vertices)
        .map(|(a, b)| (a.conj() * b).im)
        .sum::<f64>()
        / 2.0
}

fn point_in_polygon(vertices: &[Point], w: Point) -> bool {
    let mut inside = false;
    for (a, b) in edges(vertices) {
        if (a.im > w.im) != (b.im > w.im) {
            let x = a.re + (w.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if w.re < x {
                inside = !inside;
            }
        }
    }
    inside
}
