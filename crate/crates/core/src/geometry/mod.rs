//! Computational domains: the two-corner family, truncated sectors, the
//! Agmon-type truncation rule and conforming triangulations.

mod agmon;
mod domain;
mod mesh;
mod mesh_io;

pub use agmon::{truncation_height, AgmonWeight, AGMON_CAP_FACTOR, TRUNCATION_MARGIN};
pub use domain::{build_domain, DomainKind, DomainSpec, EdgeTag, Polygon};
pub use mesh::{triangulate, TriMesh};
pub use mesh_io::{read_mesh, write_mesh};

use crate::Point;

pub(crate) fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
