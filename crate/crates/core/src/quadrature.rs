//! Adaptive tensor Gauss–Legendre quadrature on rectangles.
//!
//! Each cell compares its 7×7 rule with the sum over its four children and
//! subdivides depth-first until the difference meets the cell's share of
//! the tolerance. Cells of the initial grid run in parallel and are summed
//! in grid order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::{Error, Result};

const NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

pub const MAX_DEPTH: usize = 30;
/// Cells whose estimate is below this fraction of their own value are
/// accepted: integrands built from cancelling terms carry noise there.
pub const REL_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub values: Vec<f64>,
    /// Sum of the accepted local error estimates, per component.
    pub error_estimate: Vec<f64>,
    pub evaluations: usize,
    pub max_depth: usize,
}

#[derive(Clone, Copy)]
struct Cell {
    x: [f64; 2],
    y: [f64; 2],
}

impl Cell {
    fn children(&self) -> [Cell; 4] {
        let xm = 0.5 * (self.x[0] + self.x[1]);
        let ym = 0.5 * (self.y[0] + self.y[1]);
        [
            Cell { x: [self.x[0], xm], y: [self.y[0], ym] },
            Cell { x: [xm, self.x[1]], y: [self.y[0], ym] },
            Cell { x: [self.x[0], xm], y: [ym, self.y[1]] },
            Cell { x: [xm, self.x[1]], y: [ym, self.y[1]] },
        ]
    }
}

struct Integrator<'a, F> {
    f: &'a F,
    n: usize,
}

struct Acc {
    values: Vec<f64>,
    errors: Vec<f64>,
    evaluations: usize,
    max_depth: usize,
}

impl<F: Fn(f64, f64, &mut [f64]) + Sync> Integrator<'_, F> {
    fn rule(&self, c: &Cell, buf: &mut [f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let hx = 0.5 * (c.x[1] - c.x[0]);
        let hy = 0.5 * (c.y[1] - c.y[0]);
        let mx = 0.5 * (c.x[1] + c.x[0]);
        let my = 0.5 * (c.y[1] + c.y[0]);
        for (xi, wi) in NODES.iter().zip(WEIGHTS) {
            for (yj, wj) in NODES.iter().zip(WEIGHTS) {
                (self.f)(mx + hx * xi, my + hy * yj, buf);
                let w = wi * wj * hx * hy;
                out.iter_mut().zip(buf.iter()).for_each(|(o, b)| *o += w * b);
            }
        }
    }

    fn refine(&self, c: &Cell, coarse: &[f64], tol: f64, depth: usize, acc: &mut Acc) -> Result<()> {
        let mut buf = vec![0.0; self.n];
        let kids = c.children();
        let mut kid_vals = vec![vec![0.0; self.n]; 4];
        for (k, v) in kids.iter().zip(kid_vals.iter_mut()) {
            self.rule(k, &mut buf, v);
        }
        acc.evaluations += 4 * 49;
        acc.max_depth = acc.max_depth.max(depth);
        let mut worst: f64 = 0.0;
        let mut fine = vec![0.0; self.n];
        for i in 0..self.n {
            fine[i] = kid_vals.iter().map(|v| v[i]).sum();
            let diff = (fine[i] - coarse[i]).abs();
            let floor = REL_FLOOR * kid_vals.iter().map(|v| v[i].abs()).sum::<f64>();
            worst = worst.max(diff - floor);
        }
        if worst <= tol {
            for i in 0..self.n {
                acc.values[i] += fine[i];
                acc.errors[i] += (fine[i] - coarse[i]).abs();
            }
            return Ok(());
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Quadrature(format!(
                "no convergence at depth {depth} on [{}, {}]x[{}, {}]: estimate {worst:e} > {tol:e}",
                c.x[0], c.x[1], c.y[0], c.y[1]
            )));
        }
        for (k, v) in kids.iter().zip(&kid_vals) {
            self.refine(k, v, tol / 4.0, depth + 1, acc)?;
        }
        Ok(())
    }
}

/// Integrates the `n`-component integrand `f(x, y, out)` over
/// `[x0, x1] × [y0, y1]` to absolute tolerance `tol` per component,
/// starting from a `grid × grid` partition.
pub fn integrate_box<F>(f: &F, n: usize, x: [f64; 2], y: [f64; 2], tol: f64, grid: usize) -> Result<QuadResult>
where
    F: Fn(f64, f64, &mut [f64]) + Sync,
{
    if !(tol > 0.0) || grid == 0 || n == 0 {
        return Err(Error::InvalidArgument("need tol > 0, grid >= 1, n >= 1".into()));
    }
    let integ = Integrator { f, n };
    let dx = (x[1] - x[0]) / grid as f64;
    let dy = (y[1] - y[0]) / grid as f64;
    let cells: Vec<Cell> = (0..grid * grid)
        .map(|i| {
            let (a, b) = (i % grid, i / grid);
            let x0 = x[0] + a as f64 * dx;
            let y0 = y[0] + b as f64 * dy;
            let x1 = if a + 1 == grid { x[1] } else { x0 + dx };
            let y1 = if b + 1 == grid { y[1] } else { y0 + dy };
            Cell { x: [x0, x1], y: [y0, y1] }
        })
        .collect();
    let cell_tol = tol / (grid * grid) as f64;
    let parts: Vec<Result<Acc>> = cells
        .par_iter()
        .map(|c| {
            let mut acc = Acc { values: vec![0.0; n], errors: vec![0.0; n], evaluations: 49, max_depth: 0 };
            let mut buf = vec![0.0; n];
            let mut coarse = vec![0.0; n];
            integ.rule(c, &mut buf, &mut coarse);
            integ.refine(c, &coarse, cell_tol, 0, &mut acc)?;
            Ok(acc)
        })
        .collect();
    let mut out = QuadResult { values: vec![0.0; n], error_estimate: vec![0.0; n], evaluations: 0, max_depth: 0 };
    for p in parts {
        let p = p?;
        for i in 0..n {
            out.values[i] += p.values[i];
            out.error_estimate[i] += p.errors[i];
        }
        out.evaluations += p.evaluations;
        out.max_depth = out.max_depth.max(p.max_depth);
    }
    Ok(out)
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(f: &F, x: [f64; 2], y: [f64; 2], tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let g = |a: f64, b: f64, out: &mut [f64]| out[0] = f(a, b);
    Ok(integrate_box(&g, 1, x, y, tol, 4)?.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_scalar(&|x, y| x.powi(6) * y.powi(5) + 1.0, [0.0, 1.0], [0.0, 2.0], 1e-14).unwrap();
        assert!((v - (64.0 / 42.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_and_kink_line() {
        let v = integrate_scalar(&|x, y| (-(x * x + y * y)).exp(), [-8.0, 8.0], [-8.0, 8.0], 1e-12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-11);
        let k = integrate_scalar(&|x, _| (x - 0.3).abs(), [0.0, 1.0], [0.0, 1.0], 1e-5).unwrap();
        assert!((k - (0.045 + 0.245)).abs() < 1e-5);
    }

    #[test]
    fn vector_components_and_determinism() {
        let f = |x: f64, y: f64, o: &mut [f64]| {
            o[0] = x.sin() * y.cos();
            o[1] = (x * y).exp();
        };
        let a = integrate_box(&f, 2, [0.0, 1.0], [0.0, 1.0], 1e-13, 3).unwrap();
        let b = integrate_box(&f, 2, [0.0, 1.0], [0.0, 1.0], 1e-13, 3).unwrap();
        assert_eq!(a.values, b.values);
        assert!((a.values[0] - (1.0 - 1f64.cos()) * 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn depth_limit_reports_failure() {
        let r = integrate_box(&|x: f64, _y: f64, o: &mut [f64]| o[0] = 1.0 / x.abs().sqrt().max(1e-300), 1, [-1.0, 1.0], [0.0, 1.0], 1e-15, 1);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
