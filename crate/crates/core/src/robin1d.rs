//! Negative eigenvalues of the Robin Laplacian on an interval `(-ℓ, ℓ)`.
//!
//! Roots are found for the offset `δ = |k - β|` rather than `k`, so the
//! exponentially small corrections `E + β²` keep full relative precision.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Even state: Neumann at the midpoint.
    Neumann,
    /// Odd state: Dirichlet at the midpoint.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenfunctionKind {
    Cosh,
    Sinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneDResult {
    pub kind: BoundaryKind,
    pub beta: f64,
    pub ell: f64,
    pub k: f64,
    /// `|k - β|`.
    pub delta: f64,
    /// `-k²`.
    pub energy: f64,
    pub expansion_energy: f64,
    pub eigenfunction_kind: EigenfunctionKind,
    /// Final value of the log-form equation at the root.
    pub root_residual: f64,
}

impl OneDResult {
    /// `energy + β²`, computed from `δ` without cancellation.
    pub fn energy_offset(&self) -> f64 {
        let (b, d) = (self.beta, self.delta);
        match self.kind {
            BoundaryKind::Neumann => -(2.0 * b * d + d * d),
            BoundaryKind::Dirichlet => 2.0 * b * d - d * d,
        }
    }

    /// `energy - expansion_energy`, free of the `-β²` cancellation.
    pub fn expansion_remainder(&self) -> f64 {
        self.energy_offset() - expansion_offset(self.kind, self.beta, self.ell)
    }
}

fn check(beta: f64, ell: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) || !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidArgument(format!("need beta > 0 and ell > 0, got beta={beta}, ell={ell}")));
    }
    Ok(())
}

/// `h(δ)` for each kind; both are zero exactly at the root.
fn log_form(kind: BoundaryKind, beta: f64, ell: f64, d: f64) -> (f64, f64) {
    match kind {
        BoundaryKind::Neumann => (
            d.ln() - (2.0 * beta + d).ln() + 2.0 * (beta + d) * ell,
            1.0 / d - 1.0 / (2.0 * beta + d) + 2.0 * ell,
        ),
        BoundaryKind::Dirichlet => (
            d.ln() - (2.0 * beta - d).ln() + 2.0 * (beta - d) * ell,
            1.0 / d + 1.0 / (2.0 * beta - d) - 2.0 * ell,
        ),
    }
}

/// Bisection in `ln δ` followed by bracketed Newton; `h` is increasing on
/// `(lo, hi)` with `h(lo) < 0 < h(hi)`.
fn solve_delta(kind: BoundaryKind, beta: f64, ell: f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let h = |d: f64| log_form(kind, beta, ell, d);
    for _ in 0..200 {
        if hi / lo < 1.0 + 1e-4 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if h(mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut d = 0.5 * (lo + hi);
    let mut r = h(d).0;
    for _ in 0..60 {
        let (f, df) = h(d);
        r = f;
        if f.abs() < 1e-15 {
            break;
        }
        if f < 0.0 {
            lo = d;
        } else {
            hi = d;
        }
        let mut next = d - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == d {
            break;
        }
        d = next;
    }
    (d, r)
}

fn result(kind: BoundaryKind, beta: f64, ell: f64, delta: f64, residual: f64) -> OneDResult {
    let k = match kind {
        BoundaryKind::Neumann => beta + delta,
        BoundaryKind::Dirichlet => beta - delta,
    };
    OneDResult {
        kind,
        beta,
        ell,
        k,
        delta,
        energy: -k * k,
        expansion_energy: expansion_1d(kind, beta, ell),
        eigenfunction_kind: match kind {
            BoundaryKind::Neumann => EigenfunctionKind::Cosh,
            BoundaryKind::Dirichlet => EigenfunctionKind::Sinh,
        },
        root_residual: residual,
    }
}

/// Root `k > β` of `k·tanh(kℓ) = β` (even ground state).
pub fn neumann_robin_k(beta: f64, ell: f64) -> Result<OneDResult> {
    check(beta, ell)?;
    let mut hi = 2.0 * beta * (-beta * ell).exp() + 1.0;
    while log_form(BoundaryKind::Neumann, beta, ell, hi).0 <= 0.0 {
        hi *= 2.0;
    }
    let lo = f64::MIN_POSITIVE.max(hi * 1e-300);
    let (d, r) = solve_delta(BoundaryKind::Neumann, beta, ell, lo, hi);
    Ok(result(BoundaryKind::Neumann, beta, ell, d, r))
}

/// Root `k ∈ (β - 1/ℓ, β)` of `k·coth(kℓ) = β`; `None` unless `βℓ > 1`.
pub fn dirichlet_robin_k(beta: f64, ell: f64) -> Result<Option<OneDResult>> {
    check(beta, ell)?;
    if beta * ell <= 1.0 {
        return Ok(None);
    }
    // h attains its maximum at k* = β√(1 - 1/(βℓ)), where it is positive
    let k_star = beta * (1.0 - 1.0 / (beta * ell)).sqrt();
    let hi = beta - k_star;
    if !(log_form(BoundaryKind::Dirichlet, beta, ell, hi).0 > 0.0) {
        // βℓ so close to 1 that the bump is below rounding
        return Ok(None);
    }
    let lo = f64::MIN_POSITIVE.max(hi * 1e-300);
    let (d, r) = solve_delta(BoundaryKind::Dirichlet, beta, ell, lo, hi);
    Ok(Some(result(BoundaryKind::Dirichlet, beta, ell, d, r)))
}

fn expansion_offset(kind: BoundaryKind, beta: f64, ell: f64) -> f64 {
    let b2 = beta * beta;
    let e2 = (-2.0 * beta * ell).exp();
    let sign = match kind {
        BoundaryKind::Neumann => -1.0,
        BoundaryKind::Dirichlet => 1.0,
    };
    sign * 4.0 * b2 * e2 + 8.0 * b2 * (2.0 * beta * ell - 1.0) * e2 * e2
}

/// Three-term expansion `-β² ∓ 4β²e^{-2βℓ} + 8β²(2βℓ-1)e^{-4βℓ}`.
pub fn expansion_1d(kind: BoundaryKind, beta: f64, ell: f64) -> f64 {
    -beta * beta + expansion_offset(kind, beta, ell)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalPair {
    pub e1: OneDResult,
    pub e2: Option<OneDResult>,
}

impl IntervalPair {
    /// `E₂ - E₁` from the root offsets, accurate even when tiny.
    pub fn splitting(&self) -> Option<f64> {
        let dn = self.e1.delta;
        self.e2.map(|d| {
            let dd = d.delta;
            (dn + dd) * (2.0 * self.e1.beta + dn - dd)
        })
    }
}

/// The (at most two) negative eigenvalues of the interval problem.
pub fn interval_robin_pair(beta: f64, ell: f64) -> Result<IntervalPair> {
    Ok(IntervalPair { e1: neumann_robin_k(beta, ell)?, e2: dirichlet_robin_k(beta, ell)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatedReference {
    pub e1: f64,
    pub e2: Option<f64>,
    /// Transverse factor: `-β²`, or the Robin/Dirichlet value on `(0, H)`.
    pub transverse: f64,
    pub pair: IntervalPair,
}

impl SeparatedReference {
    pub fn splitting(&self) -> Option<f64> {
        self.pair.splitting()
    }
}

/// Two lowest eigenvalues of the half-strip `(-L, L) × (0, ∞)` with Robin
/// sides and bottom, or of the rectangle of height `H` with Dirichlet top.
pub fn separated_reference(beta: f64, l: f64, height: Option<f64>) -> Result<SeparatedReference> {
    let pair = interval_robin_pair(beta, l)?;
    let transverse = match height {
        None => -beta * beta,
        Some(h) => dirichlet_robin_k(beta, h)?
            .ok_or_else(|| Error::InvalidArgument(format!("height {h} too small: beta*H must exceed 1")))?
            .energy,
    };
    Ok(SeparatedReference {
        e1: transverse + pair.e1.energy_offset() - beta * beta,
        e2: pair.e2.map(|d| transverse + d.energy_offset() - beta * beta),
        transverse,
        pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(a) < 0.0) == (f(m) < 0.0) {
                a = m
            } else {
                b = m
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn neumann_unit() {
        let r = neumann_robin_k(1.0, 1.0).unwrap();
        let k = bisect(|k| k * k.tanh() - 1.0, 0.5, 3.0);
        assert!((r.k - k).abs() < 1e-12);
        assert!((r.k - 1.1997).abs() < 1e-4 && (r.energy + 1.4392).abs() < 1e-4);
        assert!(r.k > 1.0 && r.root_residual.abs() < 1e-14);
        assert_eq!(r.eigenfunction_kind, EigenfunctionKind::Cosh);
    }

    #[test]
    fn neumann_short_interval_outside_default_bracket() {
        let r = neumann_robin_k(1.0, 0.01).unwrap();
        let k = bisect(|k| k * (0.01 * k).tanh() - 1.0, 1.0, 100.0);
        assert!((r.k - k).abs() < 1e-10 * k);
    }

    #[test]
    fn dirichlet_cases() {
        assert!(dirichlet_robin_k(1.0, 0.5).unwrap().is_none());
        assert!(dirichlet_robin_k(1.0, 1.0).unwrap().is_none());
        let r = dirichlet_robin_k(1.0, 2.0).unwrap().unwrap();
        let k = bisect(|k| k / (2.0 * k).tanh() - 1.0, 0.1, 1.0);
        assert!((r.k - k).abs() < 1e-12);
        assert!((r.k - 0.957).abs() < 1e-3);
        assert!(r.k > 0.5 && r.k < 1.0);
        assert_eq!(r.eigenfunction_kind, EigenfunctionKind::Sinh);
    }

    #[test]
    fn expansion_value() {
        let e = expansion_1d(BoundaryKind::Neumann, 1.0, 5.0);
        let want = -1.0 - 4.0 * (-10.0f64).exp() + 72.0 * (-20.0f64).exp();
        assert!((e - want).abs() < 1e-15);
        let d = expansion_1d(BoundaryKind::Dirichlet, 1.0, 5.0);
        assert!(((d - e) - 8.0 * (-10.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn leading_correction_of_k() {
        for ell in [4.0, 6.0, 8.0] {
            let r = neumann_robin_k(1.0, ell).unwrap();
            let rel = (r.delta - 2.0 * (-2.0 * ell).exp()) / (-2.0 * ell as f64).exp();
            assert!(rel.abs() < 1e-2, "{ell}: {rel}");
        }
    }

    #[test]
    fn pair_and_reference() {
        let p = interval_robin_pair(1.0, 3.0).unwrap();
        let e2 = p.e2.unwrap();
        assert!(p.e1.energy < e2.energy);
        assert!((p.splitting().unwrap() - (e2.energy - p.e1.energy)).abs() < 1e-14);
        assert!(interval_robin_pair(1.0, 0.9).unwrap().e2.is_none());

        let r = separated_reference(1.0, 3.0, None).unwrap();
        assert!((r.e1 - (-1.0 + p.e1.energy)).abs() < 1e-14);
        let t1 = separated_reference(1.0, 3.0, Some(5.0)).unwrap();
        let t2 = separated_reference(1.0, 3.0, Some(10.0)).unwrap();
        assert!(t1.e1 > t2.e1 && t2.e1 > r.e1);
        assert!(separated_reference(1.0, 3.0, Some(0.5)).is_err());
    }

    #[test]
    fn monotone_in_ell() {
        let mut prev_n = f64::INFINITY;
        let mut prev_d = 0.0;
        for i in 0..40 {
            let ell = 1.2 + 0.2 * i as f64;
            let n = neumann_robin_k(1.0, ell).unwrap().k;
            let d = dirichlet_robin_k(1.0, ell).unwrap().unwrap().k;
            assert!(n < prev_n && d > prev_d);
            prev_n = n;
            prev_d = d;
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(neumann_robin_k(0.0, 1.0).is_err());
        assert!(dirichlet_robin_k(1.0, -1.0).is_err());
    }
}
