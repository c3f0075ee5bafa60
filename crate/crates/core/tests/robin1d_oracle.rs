use robin_tunneling::robin1d::{dirichlet_robin_k, interval_robin_pair, neumann_robin_k, EigenfunctionKind};

/// Root of `f` on `[a, b]` by plain bisection.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) < 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn matches_hyperbolic_secular_equations() {
    for &beta in &[0.5, 1.0, 2.5] {
        for &ell in &[0.7, 1.5, 3.0, 6.0] {
            // u = cosh(k(ell - x)): k tanh(k ell) = beta
            let kn = bisect(|k| k * (k * ell).tanh() - beta, beta * 0.999, beta * 20.0 + 20.0 / ell);
            let n = neumann_robin_k(beta, ell).unwrap();
            assert!(((n.k - kn) / kn).abs() < 1e-12, "N beta={beta} ell={ell}: {} vs {kn}", n.k);
            assert_eq!(n.eigenfunction_kind, EigenfunctionKind::Cosh);
            assert!(n.root_residual.abs() < 1e-12);

            let d = dirichlet_robin_k(beta, ell).unwrap();
            if beta * ell > 1.0 {
                // u = sinh(k(ell - x)): k coth(k ell) = beta
                let kd = bisect(|k| k / (k * ell).tanh() - beta, 1e-9, beta);
                let d = d.expect("negative Dirichlet state exists");
                assert!(((d.k - kd) / kd).abs() < 1e-10, "D beta={beta} ell={ell}: {} vs {kd}", d.k);
                assert_eq!(d.eigenfunction_kind, EigenfunctionKind::Sinh);
            } else {
                assert!(d.is_none());
            }
        }
    }
}

#[test]
fn pair_splitting_is_difference_of_energies() {
    let p = interval_robin_pair(1.0, 4.0).unwrap();
    let e2 = p.e2.as_ref().unwrap().energy;
    assert!((p.splitting().unwrap() - (e2 - p.e1.energy)).abs() < 1e-15);
    assert!(p.splitting().unwrap() > 0.0);
}
