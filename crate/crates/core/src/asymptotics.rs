//! Closed-form corner asymptotics: sector ground state, the two-corner
//! eigenvalue expansion, and the interaction matrices.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::InvalidArgument(format!("half-angle {alpha} not in (0, pi)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpectrum {
    pub alpha: f64,
    pub beta: f64,
    pub ground_energy: f64,
    /// Bottom of the rest of the spectrum; only known numerically for α < π/2.
    pub gap: Option<f64>,
    pub essential_threshold: f64,
}

impl SectorSpectrum {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let e = sector_ground_energy(alpha, beta)?;
        Ok(Self {
            alpha,
            beta,
            ground_energy: e,
            gap: (alpha >= FRAC_PI_2).then_some(e),
            essential_threshold: -beta * beta,
        })
    }

    pub fn with_gap_estimate(mut self, gap: f64) -> Self {
        self.gap = Some(gap);
        self
    }
}

/// `-β²/sin²α` for `α < π/2`, else `-β²`.
pub fn sector_ground_energy(alpha: f64, beta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_beta(beta)?;
    if alpha < FRAC_PI_2 {
        Ok(-(beta / alpha.sin()).powi(2))
    } else {
        Ok(-beta * beta)
    }
}

/// Normalization constant `β√(2cosα/sin³α)` of the sector ground state.
pub fn sector_ground_state_amplitude(alpha: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("no sector eigenfunction for half-angle {alpha}")));
    }
    Ok(beta * (2.0 * alpha.cos() / alpha.sin().powi(3)).sqrt())
}

/// Normalized ground state of the sector `|arg x| < α`, bisector along `x₁`.
pub fn sector_ground_state(alpha: f64, beta: f64, x: Point) -> Result<f64> {
    let c = sector_ground_state_amplitude(alpha, beta)?;
    Ok(c * (-beta * x[0] / alpha.sin()).exp())
}

/// `τ`: `1/cos ω` below π/3, `2` from π/2 on.
pub fn tau(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega < PI) {
        return Err(Error::InvalidArgument(format!("omega {omega} not in (0, pi)")));
    }
    if omega < FRAC_PI_3 {
        Ok(1.0 / omega.cos())
    } else if omega >= FRAC_PI_2 {
        Ok(2.0)
    } else {
        Err(Error::ExcludedAngle { omega })
    }
}

pub fn delta_exponent(omega: f64) -> Result<f64> {
    Ok(2.0 * (tau(omega)? - 1.0))
}

/// Leading term `2β²cos²α/sin⁴α · e^{-2βL cotα}` of the corner coupling.
pub fn coupling_w(alpha: f64, l: f64, beta: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    2.0 * beta * beta * c * c / s.powi(4) * (-2.0 * beta * l * c / s).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub omega: f64,
    pub l: f64,
    pub beta: f64,
    pub e_alpha: f64,
    pub e1_leading: f64,
    pub e2_leading: f64,
    pub splitting_leading: f64,
    pub delta_exponent: f64,
    pub tau: f64,
    pub w_closed: f64,
    /// Ascending eigenvalues of the 2×2 interaction matrix.
    pub interaction_eigenvalues: Vec<f64>,
    /// Decay rate `(2+δ)β(1+cosω)/sinω` of the remainder `L²e^{-rate·L}`.
    pub remainder_rate: f64,
}

/// Two-term expansion of the two lowest eigenvalues of `Ω_L`.
pub fn two_corner_prediction(omega: f64, l: f64, beta: f64) -> Result<PredictionRecord> {
    let t = tau(omega)?;
    check_beta(beta)?;
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("L must be positive, got {l}")));
    }
    let (s, c) = omega.sin_cos();
    let b2 = beta * beta;
    let lead = -2.0 * b2 / (1.0 - c);
    let rate = 2.0 * beta * (1.0 + c) / s;
    let corr = 4.0 * b2 * (1.0 + c) / (1.0 - c).powi(2) * (-rate * l).exp();
    let alpha = omega / 2.0;
    let e_alpha = sector_ground_energy(alpha, beta)?;
    let w = coupling_w(alpha, l, beta);
    let delta = 2.0 * (t - 1.0);
    Ok(PredictionRecord {
        omega,
        l,
        beta,
        e_alpha,
        e1_leading: lead - corr,
        e2_leading: lead + corr,
        splitting_leading: 2.0 * corr,
        delta_exponent: delta,
        tau: t,
        w_closed: w,
        interaction_eigenvalues: interaction_matrix(e_alpha, w, 2)?.eigenvalues,
        remainder_rate: (2.0 + delta) * beta * (1.0 + c) / s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub matrix: Vec<Vec<f64>>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// Diagonal `E`, every off-diagonal entry `w`.
pub fn interaction_matrix(e: f64, w: f64, corners: usize) -> Result<InteractionMatrix> {
    let mut eigenvalues = match corners {
        2 => vec![e - w, e + w],
        3 => vec![e + 2.0 * w, e - w, e - w],
        _ => return Err(Error::InvalidArgument(format!("corners must be 2 or 3, got {corners}"))),
    };
    eigenvalues.sort_by(f64::total_cmp);
    let matrix = (0..corners).map(|i| (0..corners).map(|j| if i == j { e } else { w }).collect()).collect();
    Ok(InteractionMatrix { matrix, eigenvalues })
}

/// Both readings of the equilateral-triangle prediction, kept side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilateralPrediction {
    pub l: f64,
    pub beta: f64,
    pub e_alpha: f64,
    /// Coupling with `β` in the exponent.
    pub w_closed: f64,
    /// `24β²e^{-2√3L}`, exponent without `β`.
    pub w_unscaled_exponent: f64,
    /// The two couplings differ (`β ≠ 1`).
    pub exponent_discrepancy: bool,
    /// Eigenvalues of the 3×3 matrix: `E+2w` simple, `E-w` double.
    pub interaction_eigenvalues: Vec<f64>,
    /// Multiplicities swapped: `E-w` simple, `E+w` double.
    pub swapped_eigenvalues: Vec<f64>,
}

pub fn equilateral_prediction(l: f64, beta: f64) -> Result<EquilateralPrediction> {
    check_beta(beta)?;
    let alpha = PI / 6.0;
    let e_alpha = sector_ground_energy(alpha, beta)?;
    let w = coupling_w(alpha, l, beta);
    let w_unscaled_exponent = 24.0 * beta * beta * (-2.0 * 3f64.sqrt() * l).exp();
    Ok(EquilateralPrediction {
        l,
        beta,
        e_alpha,
        w_closed: w,
        w_unscaled_exponent,
        exponent_discrepancy: beta != 1.0,
        interaction_eigenvalues: interaction_matrix(e_alpha, w, 3)?.eigenvalues,
        swapped_eigenvalues: vec![e_alpha - w, e_alpha + w, e_alpha + w],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn sector_energies() {
        assert!((sector_ground_energy(FRAC_PI_4, 1.0).unwrap() + 2.0).abs() < 1e-14);
        assert!((sector_ground_energy(PI / 6.0, 1.0).unwrap() + 4.0).abs() < 1e-13);
        assert_eq!(sector_ground_energy(2.0, 3.0).unwrap(), -9.0);
        assert!(sector_ground_energy(0.0, 1.0).is_err());
        assert!(sector_ground_energy(1.0, -1.0).is_err());
        let s = SectorSpectrum::new(2.0, 1.0).unwrap();
        assert_eq!(s.gap, Some(-1.0));
        assert!(SectorSpectrum::new(0.5, 1.0).unwrap().gap.is_none());
    }

    #[test]
    fn ground_state_solves_equation() {
        let (a, b) = (0.4, 1.3);
        let e = sector_ground_energy(a, b).unwrap();
        let u = |x: f64| sector_ground_state(a, b, [x, 0.1]).unwrap();
        let h = 1e-4;
        let lap = (u(1.0 + h) - 2.0 * u(1.0) + u(1.0 - h)) / (h * h);
        assert!((-lap - e * u(1.0)).abs() < 1e-5 * u(1.0).abs());
        assert!(sector_ground_state(FRAC_PI_2, 1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn tau_branches() {
        assert!((tau(FRAC_PI_4).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(tau(3.0 * FRAC_PI_4).unwrap(), 2.0);
        assert!(matches!(tau(FRAC_PI_3), Err(Error::ExcludedAngle { .. })));
        assert!(tau(1.2).is_err());
        assert!((delta_exponent(FRAC_PI_4).unwrap() - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn right_angle_prediction() {
        let p = two_corner_prediction(FRAC_PI_2, 3.0, 1.0).unwrap();
        assert!((p.e1_leading - (-2.0 - 4.0 * (-6.0f64).exp())).abs() < 1e-14);
        assert!((p.e_alpha - -2.0).abs() < 1e-14);
        assert!(p.splitting_leading > 0.0);
        assert!(two_corner_prediction(FRAC_PI_3, 3.0, 1.0).is_err());
    }

    #[test]
    fn interaction_eigenvalues() {
        let m = interaction_matrix(-2.0, 0.1, 2).unwrap();
        assert!((m.eigenvalues[0] + 2.1).abs() < 1e-15 && (m.eigenvalues[1] + 1.9).abs() < 1e-15);
        let m3 = interaction_matrix(-4.0, 0.01, 3).unwrap();
        assert_eq!(m3.eigenvalues[0], m3.eigenvalues[1]);
        assert!((m3.eigenvalues.iter().sum::<f64>() + 12.0).abs() < 1e-14);
        assert!(interaction_matrix(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn equilateral_readings() {
        let p = equilateral_prediction(2.0, 1.0).unwrap();
        assert!((p.w_closed - p.w_unscaled_exponent).abs() < 1e-13 * p.w_closed);
        assert!(!p.exponent_discrepancy);
        assert!(equilateral_prediction(2.0, 2.0).unwrap().exponent_discrepancy);
        assert_ne!(p.interaction_eigenvalues, p.swapped_eigenvalues);
    }
}
