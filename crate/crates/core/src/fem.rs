//! P1 discretisation of the Robin form
//! `h(u, u) = ∫ |∇u|² dx - β ∫_{robin} u² ds`.

use crate::geometry::{EdgeTag, TriMesh};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::{Error, Result};

/// Stiffness `K`, mass `M` and Robin boundary mass `B` of a P1 mesh. The
/// discrete operator is `K - βB` against `M`; nodes on artificial edges
/// carry a homogeneous Dirichlet condition and are eliminated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePencil {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub b: CsrMatrix,
    /// Sorted node indices on artificial edges.
    pub dirichlet_nodes: Vec<usize>,
    pub n: usize,
}

/// Pencil restricted to the free (non-Dirichlet) nodes.
#[derive(Debug, Clone)]
pub struct ReducedPencil {
    pub a: CsrMatrix,
    pub m: CsrMatrix,
    /// `free[k]` is the mesh node of reduced unknown `k`.
    pub free: Vec<usize>,
    pub n_full: usize,
}

impl ReducedPencil {
    /// Embeds a reduced vector into the full node numbering (zero on
    /// Dirichlet nodes).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_full];
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = x[k];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }
}

pub fn assemble(mesh: &TriMesh) -> Result<SparsePencil> {
    let n = mesh.nodes.len();
    let nt = mesh.triangles.len();
    let mut kb = TripletBuilder::with_capacity(n, 9 * nt);
    let mut mb = TripletBuilder::with_capacity(n, 9 * nt);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.nodes[i]);
        let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if area2 <= 0.0 {
            return Err(Error::DegenerateMesh(format!("triangle {t} is inverted or flat")));
        }
        let area = 0.5 * area2;
        // ∇λ_i = (y_j - y_k, x_k - x_j) / (2|T|) for (i, j, k) cyclic
        let g: [[f64; 2]; 3] = std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            [(p[j][1] - p[k][1]) / area2, (p[k][0] - p[j][0]) / area2]
        });
        for i in 0..3 {
            for j in 0..3 {
                kb.add(tri[i], tri[j], area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                mb.add(tri[i], tri[j], area / 12.0 * if i == j { 2.0 } else { 1.0 });
            }
        }
    }
    let mut bb = TripletBuilder::new(n);
    for &([a, c], tag) in &mesh.boundary_edges {
        if tag != EdgeTag::Robin {
            continue;
        }
        let e = crate::geometry::dist(mesh.nodes[a], mesh.nodes[c]);
        bb.add(a, a, e / 3.0);
        bb.add(c, c, e / 3.0);
        bb.add(a, c, e / 6.0);
        bb.add(c, a, e / 6.0);
    }
    Ok(SparsePencil {
        k: kb.build(),
        m: mb.build(),
        b: bb.build(),
        dirichlet_nodes: mesh.nodes_on(EdgeTag::Artificial),
        n,
    })
}

impl SparsePencil {
    /// `K - βB` on the full node set.
    pub fn operator(&self, beta: f64) -> CsrMatrix {
        self.k.axpby(1.0, &self.b, -beta)
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        let mut is_dir = vec![false; self.n];
        self.dirichlet_nodes.iter().for_each(|&i| is_dir[i] = true);
        (0..self.n).filter(|&i| !is_dir[i]).collect()
    }

    /// Eliminates Dirichlet rows and columns.
    pub fn reduce(&self, beta: f64) -> ReducedPencil {
        let free = self.free_nodes();
        ReducedPencil { a: self.operator(beta).submatrix(&free), m: self.m.submatrix(&free), free, n_full: self.n }
    }

    /// `(uᵀKu - β uᵀBu) / uᵀMu` for `u` vanishing on Dirichlet nodes.
    pub fn rayleigh(&self, beta: f64, u: &[f64]) -> Result<f64> {
        if u.len() != self.n {
            return Err(Error::InvalidArgument(format!("vector length {} differs from {}", u.len(), self.n)));
        }
        if u.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidArgument("Rayleigh quotient of the zero vector".into()));
        }
        let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if self.dirichlet_nodes.iter().any(|&i| u[i].abs() > 1e-14 * scale) {
            return Err(Error::InvalidArgument("vector does not vanish on Dirichlet nodes".into()));
        }
        Ok((self.k.bilinear(u, u) - beta * self.b.bilinear(u, u)) / self.m.bilinear(u, u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangulate, EdgeTag, Polygon};

    fn single_triangle() -> TriMesh {
        TriMesh {
            nodes: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![([0, 1], EdgeTag::Robin), ([1, 2], EdgeTag::Robin), ([2, 0], EdgeTag::Robin)],
        }
    }

    #[test]
    fn textbook_stiffness() {
        let p = assemble(&single_triangle()).unwrap();
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((p.k.get(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
        // mass sums to the area
        let total: f64 = p.m.values.iter().sum();
        assert!((total - 0.5).abs() < 1e-15);
    }

    #[test]
    fn edge_mass_of_length_two() {
        let mesh = TriMesh {
            nodes: vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![([0, 1], EdgeTag::Robin), ([1, 2], EdgeTag::Artificial), ([2, 0], EdgeTag::Artificial)],
        };
        let p = assemble(&mesh).unwrap();
        assert!((p.b.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.b.get(1, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.b.get(0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.b.get(2, 2), 0.0);
        assert_eq!(p.dirichlet_nodes, vec![0, 1, 2]);
    }

    #[test]
    fn constants_are_in_the_kernel_of_k() {
        let poly = Polygon::new(
            vec![[-1.0, 0.0], [1.0, 0.0], [1.5, 2.0], [-1.0, 1.0]],
            vec![EdgeTag::Robin, EdgeTag::Robin, EdgeTag::Artificial, EdgeTag::Robin],
        )
        .unwrap();
        let mesh = triangulate(&poly, 3, true).unwrap();
        let p = assemble(&mesh).unwrap();
        let ones = vec![1.0; p.n];
        let r = p.k.mul(&ones);
        assert!(r.iter().all(|v| v.abs() < 1e-13));
        assert!(p.k.asymmetry() < 1e-14 && p.m.asymmetry() < 1e-14 && p.b.asymmetry() < 1e-14);
    }

    #[test]
    fn rayleigh_of_constant_on_rectangle() {
        let poly = Polygon::new(
            vec![[-1.0, 0.0], [1.0, 0.0], [1.0, 2.0], [-1.0, 2.0]],
            vec![EdgeTag::Robin, EdgeTag::Robin, EdgeTag::Artificial, EdgeTag::Robin],
        )
        .unwrap();
        let mesh = triangulate(&poly, 2, false).unwrap();
        let mut p = assemble(&mesh).unwrap();
        // the top edge is treated as natural (Neumann) here
        p.dirichlet_nodes.clear();
        let r = p.rayleigh(1.0, &vec![1.0; p.n]).unwrap();
        assert!((r + 1.5).abs() < 1e-13, "{r}");
    }

    #[test]
    fn rayleigh_rejects_zero_and_dirichlet_violations() {
        let p = assemble(&single_triangle()).unwrap();
        assert!(p.rayleigh(1.0, &[0.0; 3]).is_err());
        let mut q = p.clone();
        q.dirichlet_nodes = vec![0];
        assert!(q.rayleigh(1.0, &[1.0, 1.0, 1.0]).is_err());
        assert!(q.rayleigh(1.0, &[0.0, 1.0, 1.0]).is_ok());
    }

    #[test]
    fn inverted_triangle_is_an_error() {
        let mut mesh = single_triangle();
        mesh.triangles[0] = [0, 2, 1];
        assert!(assemble(&mesh).is_err());
    }
}
