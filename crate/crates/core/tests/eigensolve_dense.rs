use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robin_tunneling::eigensolve::{count_below_matrix, lowest_eigenpairs_matrix, SolverOptions};
use robin_tunneling::sparse::{CsrMatrix, Ordering};

/// Banded symmetric `A` (indefinite) and diagonally dominant SPD `M`.
fn random_pencil(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![vec![0.0; n]; n];
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..(i + 4).min(n) {
            let v: f64 = rng.gen_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
            if j > i && j < i + 2 {
                let w = rng.gen_range(-0.2..0.2);
                m[i][j] = w;
                m[j][i] = w;
            }
        }
        a[i][i] += 3.0 * (i as f64 / n as f64) - 1.0;
        m[i][i] = 1.0 + rng.gen_range(0.0..0.5);
    }
    (a, m)
}

fn dense_generalized(a: &[Vec<f64>], m: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let am = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let mm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let l = mm.cholesky().expect("M is SPD").l();
    let li = l.clone().try_inverse().unwrap();
    let c = &li * am * li.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn lowest_pairs_match_dense_oracle() {
    for seed in 0..3 {
        let (a, m) = random_pencil(50, seed);
        let oracle = dense_generalized(&a, &m);
        let (ac, mc) = (CsrMatrix::from_dense(&a), CsrMatrix::from_dense(&m));
        let r = lowest_eigenpairs_matrix(&ac, &mc, &SolverOptions::new(4, -20.0).tol(1e-12)).unwrap();
        for (got, want) in r.eigenvalues.iter().zip(&oracle) {
            assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "seed {seed}: {got} vs {want}");
        }
        for (x, lam) in r.eigenvectors.iter().zip(&r.eigenvalues) {
            let ax = ac.mul(x);
            let mx = mc.mul(x);
            let res: f64 = ax.iter().zip(&mx).map(|(p, q)| (p - lam * q).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-8, "residual {res}");
            assert!((mc.bilinear(x, x) - 1.0).abs() < 1e-10);
        }
        // inertia count agrees with the dense spectrum between eigenvalues
        for k in [1usize, 3, 10] {
            let t = 0.5 * (oracle[k - 1] + oracle[k]);
            for ord in [Ordering::NestedDissection, Ordering::ReverseCuthillMcKee] {
                assert_eq!(count_below_matrix(&ac, &mc, t, ord).unwrap(), k);
            }
        }
    }
}
