//! Plain-text mesh format:
//!
//! ```text
//! nodes N
//! x y            (N lines)
//! triangles T
//! i j k          (T lines, 0-based)
//! boundary E
//! i j tag        (E lines, tag is robin or artificial)
//! ```
//!
//! Floats use Rust's shortest round-trip formatting.

use std::io::{BufRead, Write};

use super::domain::EdgeTag;
use super::mesh::TriMesh;
use crate::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &TriMesh, mut w: W) -> Result<()> {
    writeln!(w, "nodes {}", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{:?} {:?}", p[0], p[1])?;
    }
    writeln!(w, "triangles {}", mesh.triangles.len())?;
    for t in &mesh.triangles {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "boundary {}", mesh.boundary_edges.len())?;
    for ([a, b], tag) in &mesh.boundary_edges {
        writeln!(w, "{a} {b} {tag}")?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let l = self.next_line()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.err(format!("expected `{key} <count>`")));
        }
        it.next().and_then(|s| s.parse().ok()).ok_or_else(|| self.err("bad count"))
    }

    fn fields<T: std::str::FromStr>(&mut self, n: usize) -> Result<(Vec<T>, Option<String>)> {
        let l = self.next_line()?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < n {
            return Err(self.err(format!("expected {n} fields")));
        }
        let vals = toks[..n]
            .iter()
            .map(|s| s.parse::<T>().map_err(|_| self.err(format!("cannot parse {s:?}"))))
            .collect::<Result<Vec<T>>>()?;
        Ok((vals, toks.get(n).map(|s| s.to_string())))
    }
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<TriMesh> {
    let mut lines = Lines { inner: r.lines(), line: 0 };
    let n = lines.header("nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (v, _) = lines.fields::<f64>(2)?;
        nodes.push([v[0], v[1]]);
    }
    let t = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(t);
    for _ in 0..t {
        let (v, _) = lines.fields::<usize>(3)?;
        triangles.push([v[0], v[1], v[2]]);
    }
    let e = lines.header("boundary")?;
    let mut boundary_edges = Vec::with_capacity(e);
    for _ in 0..e {
        let (v, tag) = lines.fields::<usize>(2)?;
        let tag: EdgeTag = tag.ok_or_else(|| lines.err("missing edge tag"))?.parse()?;
        boundary_edges.push(([v[0], v[1]], tag));
    }
    Ok(TriMesh { nodes, triangles, boundary_edges })
}
