use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::cross;
use crate::{Error, Point, Result};

/// Which family member a [`DomainSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// Intersection of the two sectors with vertices `(-L, 0)` and `(L, 0)`.
    TwoCorner,
    /// Single infinite sector of opening `omega` with apex at the origin,
    /// symmetric about the positive `x1` axis.
    Sector,
    /// Two-corner triangle with `omega = pi/3`: three equal corners.
    Equilateral,
    /// Half-strip `|x1| < L, x2 > 0`, i.e. the `omega = pi/2` member.
    RectangleReference,
}

/// Parameters of one domain of the family plus its truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Corner opening in radians, `0 < omega < pi`.
    pub omega: f64,
    /// Half-distance between the two corners. For sectors it only sets the
    /// scale of the Agmon cap.
    pub l: f64,
    /// Robin parameter.
    pub beta: f64,
    /// Height of the artificial cut; required iff the domain is unbounded.
    pub truncation_height: Option<f64>,
    pub kind: DomainKind,
}

impl DomainSpec {
    pub fn two_corner(omega: f64, l: f64, beta: f64, truncation_height: Option<f64>) -> Result<Self> {
        let spec = Self { omega, l, beta, truncation_height, kind: DomainKind::TwoCorner };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sector(omega: f64, l: f64, beta: f64, truncation_height: Option<f64>) -> Result<Self> {
        let spec = Self { omega, l, beta, truncation_height, kind: DomainKind::Sector };
        spec.validate()?;
        Ok(spec)
    }

    pub fn equilateral(l: f64, beta: f64) -> Result<Self> {
        let spec = Self { omega: FRAC_PI_3, l, beta, truncation_height: None, kind: DomainKind::Equilateral };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rectangle_reference(l: f64, beta: f64, height: f64) -> Result<Self> {
        let spec = Self {
            omega: FRAC_PI_2,
            l,
            beta,
            truncation_height: Some(height),
            kind: DomainKind::RectangleReference,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Half of the corner opening.
    pub fn alpha(&self) -> f64 {
        0.5 * self.omega
    }

    /// Whether the untruncated domain is unbounded.
    pub fn is_unbounded(&self) -> bool {
        match self.kind {
            DomainKind::TwoCorner => self.omega >= FRAC_PI_2,
            DomainKind::Sector | DomainKind::RectangleReference => true,
            DomainKind::Equilateral => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        if !(self.omega > 0.0 && self.omega < std::f64::consts::PI) {
            return bad(format!("omega = {} not in (0, pi)", self.omega));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad(format!("L = {} must be positive", self.l));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta = {} must be positive", self.beta));
        }
        match self.kind {
            DomainKind::Equilateral if (self.omega - FRAC_PI_3).abs() > 1e-12 => {
                return bad("equilateral domain requires omega = pi/3".into())
            }
            DomainKind::RectangleReference if (self.omega - FRAC_PI_2).abs() > 1e-12 => {
                return bad("rectangle reference requires omega = pi/2".into())
            }
            _ => {}
        }
        match (self.is_unbounded(), self.truncation_height) {
            (true, None) => bad("unbounded domain needs a truncation height".into()),
            (false, Some(_)) => bad("bounded domain must not carry a truncation height".into()),
            (true, Some(h)) if !(h > 0.0 && h.is_finite()) => bad(format!("truncation height {h} must be positive")),
            _ => Ok(()),
        }
    }

    /// Corners of the untruncated domain where two Robin sides meet,
    /// paired with their half-openings.
    pub fn robin_corners(&self) -> Vec<(Point, f64)> {
        let a = self.alpha();
        match self.kind {
            DomainKind::Sector => vec![([0.0, 0.0], a)],
            DomainKind::TwoCorner | DomainKind::Equilateral | DomainKind::RectangleReference => {
                let mut c = vec![([-self.l, 0.0], a), ([self.l, 0.0], a)];
                if self.omega < FRAC_PI_2 {
                    c.push(([0.0, self.l * self.omega.tan()], FRAC_PI_2 - self.omega));
                }
                c
            }
        }
    }

    /// Sets the cut from [`truncation_height`](super::truncation_height)
    /// when the domain is unbounded; bounded specs pass through.
    pub fn with_truncation_tol(mut self, tol: f64) -> Result<Self> {
        if !self.is_unbounded() {
            return Ok(self);
        }
        self.truncation_height.get_or_insert(1.0);
        let h = super::truncation_height(&self, tol)?;
        self.with_truncation_height(h)
    }

    pub fn with_truncation_height(mut self, h: f64) -> Result<Self> {
        self.truncation_height = Some(h);
        self.validate()?;
        Ok(self)
    }
}

/// Boundary condition carried by a polygon edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    /// Physical boundary with the Robin condition.
    Robin,
    /// Truncation cut; Dirichlet is imposed there.
    Artificial,
}

impl fmt::Display for EdgeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeTag::Robin => "robin",
            EdgeTag::Artificial => "artificial",
        })
    }
}

impl std::str::FromStr for EdgeTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robin" => Ok(EdgeTag::Robin),
            "artificial" => Ok(EdgeTag::Artificial),
            other => Err(Error::InvalidArgument(format!("unknown edge tag {other:?}"))),
        }
    }
}

/// Convex polygon, vertices counterclockwise; edge `i` joins vertex `i`
/// to vertex `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
    pub edge_tags: Vec<EdgeTag>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>, edge_tags: Vec<EdgeTag>) -> Result<Self> {
        let p = Self { vertices, edge_tags };
        p.validate()?;
        Ok(p)
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let c = p[0] * q[1] - q[0] * p[1];
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
            a2 += c;
        }
        [cx / (3.0 * a2), cy / (3.0 * a2)]
    }

    /// Checks: at least three vertices, one tag per edge, strictly convex,
    /// counterclockwise. Convexity plus a positive area rules out
    /// self-intersections.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!("polygon has {n} vertices")));
        }
        if self.edge_tags.len() != n {
            return Err(Error::InvalidDomain("edge tag count differs from edge count".into()));
        }
        let scale = self
            .vertices
            .iter()
            .fold(0.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()))
            .max(1e-300);
        for i in 0..n {
            let c = cross(self.vertices[i], self.vertices[(i + 1) % n], self.vertices[(i + 2) % n]);
            if c <= 1e-14 * scale * scale {
                return Err(Error::InvalidDomain(format!("polygon not strictly convex at vertex {}", (i + 1) % n)));
            }
        }
        if self.signed_area() <= 0.0 {
            return Err(Error::InvalidDomain("polygon is not counterclockwise".into()));
        }
        Ok(())
    }
}

/// Realises a [`DomainSpec`] as a tagged convex polygon.
pub fn build_domain(spec: &DomainSpec) -> Result<Polygon> {
    spec.validate()?;
    use EdgeTag::{Artificial, Robin};
    let l = spec.l;
    let (vertices, tags) = match spec.kind {
        DomainKind::Sector => {
            let h = spec.truncation_height.expect("validated");
            let t = spec.alpha().tan();
            (vec![[0.0, 0.0], [h, -h * t], [h, h * t]], vec![Robin, Artificial, Robin])
        }
        _ if spec.omega < FRAC_PI_2 => {
            let apex = [0.0, l * spec.omega.tan()];
            (vec![[-l, 0.0], [l, 0.0], apex], vec![Robin, Robin, Robin])
        }
        _ => {
            let h = spec.truncation_height.expect("validated");
            // the slanted sides leave A1, A2 at interior angle omega
            let half_top = if spec.kind == DomainKind::RectangleReference {
                l
            } else {
                l - h * spec.omega.cos() / spec.omega.sin()
            };
            (
                vec![[-l, 0.0], [l, 0.0], [half_top, h], [-half_top, h]],
                vec![Robin, Robin, Artificial, Robin],
            )
        }
    };
    let poly = Polygon { vertices, edge_tags: tags };
    poly.validate()
        .map_err(|e| Error::InvalidDomain(format!("constructed polygon is not convex: {e}")))?;
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Point, b: Point) -> bool {
        (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14
    }

    #[test]
    fn quarter_angle_triangle() {
        let spec = DomainSpec::two_corner(PI / 4.0, 1.0, 1.0, None).unwrap();
        let p = build_domain(&spec).unwrap();
        let want = [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(p.vertices.len(), 3);
        for (v, w) in p.vertices.iter().zip(want) {
            assert!(close(*v, w), "{v:?} vs {w:?}");
        }
        assert!(p.edge_tags.iter().all(|t| *t == EdgeTag::Robin));
    }

    #[test]
    fn right_angle_gives_rectangle() {
        let spec = DomainSpec::two_corner(PI / 2.0, 1.0, 1.0, Some(2.0)).unwrap();
        let p = build_domain(&spec).unwrap();
        let want = [[-1.0, 0.0], [1.0, 0.0], [1.0, 2.0], [-1.0, 2.0]];
        for (v, w) in p.vertices.iter().zip(want) {
            assert!(close(*v, w), "{v:?} vs {w:?}");
        }
        assert_eq!(p.edge_tags, vec![EdgeTag::Robin, EdgeTag::Robin, EdgeTag::Artificial, EdgeTag::Robin]);
        assert!((p.area() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn unbounded_without_height_is_rejected() {
        assert!(DomainSpec::two_corner(2.0, 1.0, 1.0, None).is_err());
        assert!(DomainSpec::two_corner(2.0, 1.0, 1.0, Some(0.0)).is_err());
        assert!(DomainSpec::two_corner(2.0, 1.0, 1.0, Some(-1.0)).is_err());
        assert!(DomainSpec::two_corner(0.5, 1.0, 1.0, Some(1.0)).is_err());
        assert!(DomainSpec::two_corner(PI, 1.0, 1.0, Some(1.0)).is_err());
        assert!(DomainSpec::two_corner(1.0, 0.0, 1.0, None).is_err());
        assert!(DomainSpec::two_corner(1.0, 1.0, -1.0, None).is_err());
    }

    #[test]
    fn sector_polygon_tags() {
        let spec = DomainSpec::sector(PI / 3.0, 1.0, 1.0, Some(5.0)).unwrap();
        let p = build_domain(&spec).unwrap();
        assert_eq!(p.edge_tags, vec![EdgeTag::Robin, EdgeTag::Artificial, EdgeTag::Robin]);
        // opening at the apex equals omega
        let (a, b) = (p.vertices[1], p.vertices[2]);
        let ang = b[1].atan2(b[0]) - a[1].atan2(a[0]);
        assert!((ang - PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn equilateral_has_three_corners() {
        let spec = DomainSpec::equilateral(1.0, 1.0).unwrap();
        let c = spec.robin_corners();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|(_, a)| (a - PI / 6.0).abs() < 1e-14));
    }

    #[test]
    fn nonconvex_polygon_rejected() {
        let p = Polygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [2.0, 2.0], [0.0, 2.0]],
            edge_tags: vec![EdgeTag::Robin; 5],
        };
        assert!(p.validate().is_err());
        let cw = Polygon { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], edge_tags: vec![EdgeTag::Robin; 3] };
        assert!(cw.validate().is_err());
    }
}
