use std::collections::VecDeque;

use super::CsrMatrix;

/// Fill-reducing symmetric ordering applied before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Natural,
    ReverseCuthillMcKee,
    #[default]
    NestedDissection,
}

impl Ordering {
    /// Permutation with `perm[new] = old`.
    pub fn permutation(self, a: &CsrMatrix) -> Vec<usize> {
        match self {
            Ordering::Natural => (0..a.n).collect(),
            Ordering::ReverseCuthillMcKee => reverse_cuthill_mckee(a),
            Ordering::NestedDissection => nested_dissection(a),
        }
    }
}

fn adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    (0..a.n).map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect()).collect()
}

/// BFS level structure restricted to nodes with `mark[v] == id`.
fn levels_from(root: usize, adj: &[Vec<usize>], mark: &[usize], id: usize, seen: &mut [usize], stamp: usize) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![root]];
    seen[root] = stamp;
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if mark[w] == id && seen[w] != stamp {
                    seen[w] = stamp;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

struct Dissector<'a> {
    adj: &'a [Vec<usize>],
    mark: Vec<usize>,
    seen: Vec<usize>,
    next_id: usize,
    stamp: usize,
    out: Vec<usize>,
}

const LEAF_SIZE: usize = 48;

impl Dissector<'_> {
    fn fresh_id(&mut self, nodes: &[usize]) -> usize {
        self.next_id += 1;
        for &v in nodes {
            self.mark[v] = self.next_id;
        }
        self.next_id
    }

    fn bfs(&mut self, root: usize, id: usize) -> Vec<Vec<usize>> {
        self.stamp += 1;
        levels_from(root, self.adj, &self.mark, id, &mut self.seen, self.stamp)
    }

    fn dissect(&mut self, nodes: Vec<usize>) {
        if nodes.len() <= LEAF_SIZE {
            self.out.extend(nodes);
            return;
        }
        let id = self.fresh_id(&nodes);
        let mut levels = self.bfs(nodes[0], id);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < nodes.len() {
            // disconnected: dissect each component on its own
            let comp: Vec<usize> = levels.concat();
            let stamp = self.stamp;
            let rest: Vec<usize> = nodes.iter().copied().filter(|&v| self.seen[v] != stamp).collect();
            self.dissect(comp);
            self.dissect(rest);
            return;
        }
        // pseudo-peripheral root
        for _ in 0..6 {
            let far = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| self.adj[v].iter().filter(|&&w| self.mark[w] == id).count())
                .unwrap();
            let cand = self.bfs(far, id);
            if cand.len() <= levels.len() {
                break;
            }
            levels = cand;
        }
        if levels.len() < 3 {
            self.out.extend(nodes);
            return;
        }
        let half = nodes.len() / 2;
        let mut acc = 0;
        let mut m = 1;
        for (k, lev) in levels.iter().enumerate() {
            acc += lev.len();
            if acc >= half {
                m = k;
                break;
            }
        }
        let m = m.clamp(1, levels.len() - 2);
        // separator nodes without a neighbour beyond the cut join the near side
        self.stamp += 1;
        let stamp = self.stamp;
        for &v in &levels[m + 1] {
            self.seen[v] = stamp;
        }
        let (sep, moved): (Vec<usize>, Vec<usize>) =
            levels[m].iter().partition(|&&v| self.adj[v].iter().any(|&w| self.seen[w] == stamp));
        let mut part_a: Vec<usize> = levels[..m].concat();
        part_a.extend(moved);
        let part_b: Vec<usize> = levels[m + 1..].concat();
        self.dissect(part_a);
        self.dissect(part_b);
        self.out.extend(sep);
    }
}

/// Recursive graph bisection with BFS level-set separators; separators are
/// eliminated last.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let adj = adjacency(a);
    let mut d = Dissector {
        adj: &adj,
        mark: vec![0; a.n],
        seen: vec![0; a.n],
        next_id: 0,
        stamp: 0,
        out: Vec::with_capacity(a.n),
    };
    d.dissect((0..a.n).collect());
    debug_assert_eq!(d.out.len(), a.n);
    d.out
}

pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let adj = adjacency(a);
    let n = a.n;
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (deg[v], v));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn grid(nx: usize, ny: usize) -> CsrMatrix {
        let id = |i: usize, j: usize| i * ny + j;
        let mut b = TripletBuilder::new(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                b.add(id(i, j), id(i, j), 4.0);
                if i + 1 < nx {
                    b.add(id(i, j), id(i + 1, j), -1.0);
                    b.add(id(i + 1, j), id(i, j), -1.0);
                }
                if j + 1 < ny {
                    b.add(id(i, j), id(i, j + 1), -1.0);
                    b.add(id(i, j + 1), id(i, j), -1.0);
                }
            }
        }
        b.build()
    }

    fn is_permutation(p: &[usize], n: usize) -> bool {
        let mut s = p.to_vec();
        s.sort_unstable();
        s == (0..n).collect::<Vec<_>>()
    }

    #[test]
    fn orderings_are_permutations() {
        let a = grid(23, 17);
        for o in [Ordering::Natural, Ordering::ReverseCuthillMcKee, Ordering::NestedDissection] {
            assert!(is_permutation(&o.permutation(&a), a.n), "{o:?}");
        }
    }

    #[test]
    fn disconnected_graph() {
        let mut a = grid(10, 10);
        // drop all coupling: 100 isolated nodes
        a = CsrMatrix::from_diagonal(&a.diagonal());
        assert!(is_permutation(&nested_dissection(&a), 100));
    }
}
