//! Brute-force midpoint sums over the half-strip `|x1| < L, x2 > 0`, which
//! contains the support of both right-angle quasimodes.

use std::f64::consts::FRAC_PI_2;

use robin_tunneling::asymptotics::sector_ground_energy;
use robin_tunneling::quasimodes::{interaction_data, residual_norm, Quasimode};

fn midpoint_sum(l: f64, h: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let nx = (2.0 * l / h).round() as usize;
    let ny = (2.0 * l / h).round() as usize;
    let mut total = 0.0;
    for i in 0..nx {
        let x = -l + (i as f64 + 0.5) * h;
        let mut row = 0.0;
        for j in 0..ny {
            row += f(x, (j as f64 + 0.5) * h);
        }
        total += row;
    }
    total * h * h
}

#[test]
fn gram_off_diagonal_by_riemann_sum() {
    let (l, beta) = (5.0, 1.0);
    let q1 = Quasimode::new(FRAC_PI_2, l, beta, 1).unwrap();
    let q2 = Quasimode::new(FRAC_PI_2, l, beta, 2).unwrap();
    let g12 = midpoint_sum(l, 0.005, |x, y| q1.psi([x, y]) * q2.psi([x, y]));
    let g11 = midpoint_sum(l, 0.005, |x, y| q1.psi([x, y]).powi(2));
    let d = interaction_data(FRAC_PI_2, l, beta, 1e-11).unwrap();
    assert!(((d.gram[0][1] - g12) / g12).abs() < 1e-3, "{} vs {g12}", d.gram[0][1]);
    assert!((d.gram[0][0] - g11).abs() < 1e-3);
}

#[test]
fn residual_by_finite_differences() {
    let (l, beta) = (4.0, 1.0);
    let q = Quasimode::new(FRAC_PI_2, l, beta, 1).unwrap();
    let e = sector_ground_energy(FRAC_PI_2 / 2.0, beta).unwrap();
    let d = 1e-3;
    let r2 = midpoint_sum(l, 0.01, |x, y| {
        let p = |a: f64, b: f64| q.psi([a, b]);
        let lap = (p(x + d, y) + p(x - d, y) + p(x, y + d) + p(x, y - d) - 4.0 * p(x, y)) / (d * d);
        (-lap - e * p(x, y)).powi(2)
    });
    let want = r2.sqrt();
    let got = residual_norm(FRAC_PI_2, l, beta, 1, 1e-11).unwrap();
    assert!(((got - want) / want).abs() < 1e-2, "{got} vs {want}");
}
