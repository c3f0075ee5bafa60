use super::domain::{DomainKind, DomainSpec};
use super::dist;
use crate::{Error, Point, Result};

/// Cap constant `b`: the Agmon weight never exceeds `beta * b * L`.
pub const AGMON_CAP_FACTOR: f64 = 10.0;

/// Fraction `eps0` of the Agmon weight given up in the truncation rule.
pub const TRUNCATION_MARGIN: f64 = 0.1;

/// `Phi(x) = beta * min(min_j cot(alpha_j) |x - A_j|, b L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgmonWeight {
    pub corner_positions: Vec<Point>,
    pub corner_halfangles: Vec<f64>,
    pub beta: f64,
    /// The constant `b * L`.
    pub cap: f64,
}

impl AgmonWeight {
    pub fn for_domain(spec: &DomainSpec) -> Self {
        let (corner_positions, corner_halfangles) = spec.robin_corners().into_iter().unzip();
        Self { corner_positions, corner_halfangles, beta: spec.beta, cap: AGMON_CAP_FACTOR * spec.l }
    }

    pub fn value(&self, x: Point) -> f64 {
        let d = self
            .corner_positions
            .iter()
            .zip(&self.corner_halfangles)
            .map(|(a, &h)| dist(x, *a) / h.tan())
            .fold(f64::INFINITY, f64::min);
        self.beta * d.min(self.cap)
    }

    /// Minimum of the weight over the segment `[p, q]`.
    pub fn min_on_segment(&self, p: Point, q: Point) -> f64 {
        let d = self
            .corner_positions
            .iter()
            .zip(&self.corner_halfangles)
            .map(|(a, &h)| point_segment_distance(*a, p, q) / h.tan())
            .fold(f64::INFINITY, f64::min);
        self.beta * d.min(self.cap)
    }
}

fn point_segment_distance(a: Point, p: Point, q: Point) -> f64 {
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((a[0] - p[0]) * d[0] + (a[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(a, [p[0] + t * d[0], p[1] + t * d[1]])
}

/// The artificial cut at height `h` as a segment.
fn cut_segment(spec: &DomainSpec, h: f64) -> (Point, Point) {
    match spec.kind {
        DomainKind::Sector => {
            let t = spec.alpha().tan();
            ([h, -h * t], [h, h * t])
        }
        DomainKind::RectangleReference => ([-spec.l, h], [spec.l, h]),
        _ => {
            let half = spec.l - h * spec.omega.cos() / spec.omega.sin();
            ([-half, h], [half, h])
        }
    }
}

/// Smallest cut height `H >= 1` such that `(1 - eps0) * Phi >= ln(1/tol)`
/// everywhere on the cut. Nonincreasing in `tol`.
pub fn truncation_height(spec: &DomainSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol <= 1.0) {
        return Err(Error::InvalidArgument(format!("truncation tolerance {tol} not in (0, 1]")));
    }
    if !spec.is_unbounded() {
        return Err(Error::InvalidDomain("bounded domain needs no truncation".into()));
    }
    let w = AgmonWeight::for_domain(spec);
    let target = (1.0 / tol).ln();
    let margin = 1.0 - TRUNCATION_MARGIN;
    let reached = |h: f64| {
        let (p, q) = cut_segment(spec, h);
        margin * w.min_on_segment(p, q) >= target
    };
    if margin * spec.beta * w.cap < target {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol:e} unreachable: Agmon cap beta*b*L = {} is too small",
            spec.beta * w.cap
        )));
    }
    if reached(0.0) {
        return Ok(1.0);
    }
    let mut hi = 1.0;
    while !reached(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidArgument("truncation height search diverged".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_at_corners() {
        let spec = DomainSpec::two_corner(PI / 2.0, 1.0, 1.0, Some(3.0)).unwrap();
        let w = AgmonWeight::for_domain(&spec);
        assert_eq!(w.value([-1.0, 0.0]), 0.0);
        assert_eq!(w.value([1.0, 0.0]), 0.0);
    }

    #[test]
    fn midpoint_of_right_angle_biangle() {
        let w = AgmonWeight {
            corner_positions: vec![[-1.0, 0.0], [1.0, 0.0]],
            corner_halfangles: vec![PI / 4.0; 2],
            beta: 1.0,
            cap: 10.0,
        };
        assert!((w.value([0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equilateral_origin() {
        let spec = DomainSpec::two_corner(PI / 3.0, 1.0, 2.0, None).unwrap();
        let w = AgmonWeight::for_domain(&spec);
        let want = 2.0 * (PI / 6.0).tan().recip();
        assert!((w.value([0.0, 0.0]) - want).abs() < 1e-14);
        assert!((want - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn cap_binds_far_away() {
        let spec = DomainSpec::two_corner(PI / 2.0, 1.0, 1.0, Some(3.0)).unwrap();
        let w = AgmonWeight::for_domain(&spec);
        assert_eq!(w.value([0.0, 1e6]), 1.0 * AGMON_CAP_FACTOR * 1.0);
    }

    #[test]
    fn tol_one_gives_minimal_height() {
        let spec = DomainSpec::two_corner(PI / 2.0, 3.0, 1.0, Some(1.0)).unwrap();
        assert_eq!(truncation_height(&spec, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let spec = DomainSpec::two_corner(PI / 2.0, 3.0, 1.0, Some(1.0)).unwrap();
        assert!(truncation_height(&spec, 0.0).is_err());
        assert!(truncation_height(&spec, 1.5).is_err());
        let tri = DomainSpec::two_corner(PI / 4.0, 3.0, 1.0, None).unwrap();
        assert!(truncation_height(&tri, 0.1).is_err());
    }

    #[test]
    fn unreachable_when_cap_is_small() {
        let spec = DomainSpec::two_corner(PI / 2.0, 0.5, 1.0, Some(1.0)).unwrap();
        assert!(truncation_height(&spec, 1e-10).is_err());
    }
}
