use std::collections::HashMap;

use super::{cross, dist};
use super::domain::{EdgeTag, Polygon};
use crate::{Error, Point, Result};

/// Conforming triangulation with tagged boundary edges.
///
/// Triangles are counterclockwise. Refinement only appends nodes, so the
/// node list of a coarser level is a prefix of the finer one.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<([usize; 2], EdgeTag)>,
}

impl TriMesh {
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * cross(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Longest edge over all triangles.
    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .map(|(a, b)| super::dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Nodes touching an edge with the given tag.
    pub fn nodes_on(&self, tag: EdgeTag) -> Vec<usize> {
        let mut v: Vec<usize> =
            self.boundary_edges.iter().filter(|(_, t)| *t == tag).flat_map(|(e, _)| e.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Conformity check: positive orientation, every interior edge shared
    /// by exactly two triangles with opposite orientation, every other edge
    /// listed exactly once in `boundary_edges`.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::DegenerateMesh(format!("triangle {t} references a missing node")));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(Error::DegenerateMesh(format!("triangle {t} has non-positive area")));
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for i in 0..3 {
                *directed.entry((tri[i], tri[(i + 1) % 3])).or_default() += 1;
            }
        }
        let mut open: HashMap<(usize, usize), usize> = HashMap::new();
        for (&(a, b), &cnt) in &directed {
            if cnt != 1 {
                return Err(Error::DegenerateMesh(format!("edge ({a}, {b}) repeated with same orientation")));
            }
            if !directed.contains_key(&(b, a)) {
                *open.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut listed: HashMap<(usize, usize), usize> = HashMap::new();
        for ([a, b], _) in &self.boundary_edges {
            *listed.entry(((*a).min(*b), (*a).max(*b))).or_default() += 1;
        }
        if listed.values().any(|&c| c != 1) {
            return Err(Error::DegenerateMesh("boundary edge listed more than once".into()));
        }
        if open.len() != listed.len() || open.keys().any(|k| !listed.contains_key(k)) {
            return Err(Error::DegenerateMesh("boundary edges do not match the open edges of the mesh".into()));
        }
        Ok(())
    }
}

struct Midpoints {
    map: HashMap<(usize, usize), usize>,
}

impl Midpoints {
    fn get(&mut self, nodes: &mut Vec<Point>, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        *self.map.entry(key).or_insert_with(|| {
            let (p, q) = (nodes[key.0], nodes[key.1]);
            nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            nodes.len() - 1
        })
    }
}

fn red_refine(mesh: &mut TriMesh) {
    let mut mids = Midpoints { map: HashMap::with_capacity(mesh.triangles.len() * 2) };
    let mut tris = Vec::with_capacity(mesh.triangles.len() * 4);
    for &[a, b, c] in &mesh.triangles {
        let ab = mids.get(&mut mesh.nodes, a, b);
        let bc = mids.get(&mut mesh.nodes, b, c);
        let ca = mids.get(&mut mesh.nodes, c, a);
        tris.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    mesh.triangles = tris;
    let mut edges = Vec::with_capacity(mesh.boundary_edges.len() * 2);
    for &([a, b], tag) in &mesh.boundary_edges {
        let m = mids.get(&mut mesh.nodes, a, b);
        edges.push(([a, m], tag));
        edges.push(([m, b], tag));
    }
    mesh.boundary_edges = edges;
}

/// Diagonal of the quadrilateral `ma, a, b, mb`: the shorter one, ties
/// broken by distance of its midpoint from the corner. Both rules commute
/// with reflections, so mirror-symmetric meshes stay symmetric.
fn split_at_ma(nodes: &[Point], c: usize, a: usize, b: usize, ma: usize, mb: usize) -> bool {
    let d1 = dist(nodes[ma], nodes[b]);
    let d2 = dist(nodes[a], nodes[mb]);
    if (d1 - d2).abs() > 1e-12 * d1.max(d2) {
        return d1 < d2;
    }
    let mid = |p: Point, q: Point| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    dist(nodes[c], mid(nodes[ma], nodes[b])) <= dist(nodes[c], mid(nodes[a], nodes[mb]))
}

/// Splits every triangle incident to a corner node once: the two edges
/// at the corner are halved and the remaining quadrilateral is cut along
/// a diagonal. Only corner edges are split, so no hanging nodes appear.
fn grade_corners(mesh: &mut TriMesh, corners: &[usize]) {
    let mut mids = Midpoints { map: HashMap::new() };
    let mut tris = Vec::with_capacity(mesh.triangles.len() + 8);
    for &tri in &mesh.triangles {
        match (0..3).find(|&i| corners.contains(&tri[i])) {
            Some(i) => {
                let (c, a, b) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let ma = mids.get(&mut mesh.nodes, c, a);
                let mb = mids.get(&mut mesh.nodes, c, b);
                tris.push([c, ma, mb]);
                if split_at_ma(&mesh.nodes, c, a, b, ma, mb) {
                    tris.extend_from_slice(&[[ma, a, b], [ma, b, mb]]);
                } else {
                    tris.extend_from_slice(&[[ma, a, mb], [mb, a, b]]);
                }
            }
            None => tris.push(tri),
        }
    }
    mesh.triangles = tris;
    let mut edges = Vec::with_capacity(mesh.boundary_edges.len() + 4);
    for &([a, b], tag) in &mesh.boundary_edges {
        if corners.contains(&a) || corners.contains(&b) {
            let m = mids.get(&mut mesh.nodes, a, b);
            edges.push(([a, m], tag));
            edges.push(([m, b], tag));
        } else {
            edges.push(([a, b], tag));
        }
    }
    mesh.boundary_edges = edges;
}

/// Centroid fan followed by `refine_levels` rounds of red refinement; with
/// `grade_corners` each round also splits the triangles touching a vertex
/// where two Robin edges meet.
pub fn triangulate(p: &Polygon, refine_levels: usize, grade: bool) -> Result<TriMesh> {
    p.validate().map_err(|e| Error::DegenerateMesh(e.to_string()))?;
    let n = p.vertices.len();
    let mut nodes = p.vertices.clone();
    nodes.push(p.centroid());
    let triangles = (0..n).map(|i| [i, (i + 1) % n, n]).collect();
    let boundary_edges = (0..n).map(|i| ([i, (i + 1) % n], p.edge_tags[i])).collect();
    let corners: Vec<usize> = (0..n)
        .filter(|&i| p.edge_tags[i] == EdgeTag::Robin && p.edge_tags[(i + n - 1) % n] == EdgeTag::Robin)
        .collect();
    let mut mesh = TriMesh { nodes, triangles, boundary_edges };
    for _ in 0..refine_levels {
        red_refine(&mut mesh);
        if grade {
            grade_corners(&mut mesh, &corners);
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![EdgeTag::Robin; 3]).unwrap()
    }

    #[test]
    fn fan_of_unit_triangle() {
        let m = triangulate(&unit_triangle(), 0, false).unwrap();
        assert_eq!(m.triangles.len(), 3);
        assert_eq!(m.nodes.len(), 4);
        m.validate().unwrap();
    }

    #[test]
    fn red_refinement_quadruples() {
        let p = unit_triangle();
        for k in 0..5 {
            let m = triangulate(&p, k, false).unwrap();
            assert_eq!(m.triangles.len(), 3 * 4usize.pow(k as u32));
            m.validate().unwrap();
        }
    }

    #[test]
    fn graded_mesh_is_conforming() {
        let p = unit_triangle();
        for k in 0..5 {
            let m = triangulate(&p, k, true).unwrap();
            m.validate().unwrap();
            assert!((m.total_area() - 0.5).abs() < 1e-13);
        }
        let plain = triangulate(&p, 3, false).unwrap();
        let graded = triangulate(&p, 3, true).unwrap();
        assert!(graded.triangles.len() > plain.triangles.len());
    }

    #[test]
    fn validator_catches_hanging_node() {
        let mut m = triangulate(&unit_triangle(), 1, false).unwrap();
        // split one triangle in two through an edge midpoint without touching its neighbour
        let [a, b, c] = m.triangles[3];
        let (pa, pb) = (m.nodes[a], m.nodes[b]);
        m.nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        let h = m.nodes.len() - 1;
        m.triangles[3] = [a, h, c];
        m.triangles.push([h, b, c]);
        assert!(m.validate().is_err());
    }

    #[test]
    fn validator_catches_inverted_triangle() {
        let mut m = triangulate(&unit_triangle(), 0, false).unwrap();
        m.triangles[0].swap(0, 1);
        assert!(m.validate().is_err());
    }
}
