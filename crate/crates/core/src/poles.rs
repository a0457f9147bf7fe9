//! Pole extraction from LPC coefficients, the McAdams phase transformation,
//! and conversion back to coefficients.
//!
//! Poles are stored in polar form so that phase-only operations leave the
//! magnitude untouched exactly.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lpc::LpcFrame;

/// A filter pole in polar form, phase in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub radius: f64,
    pub phase: f64,
}

impl Pole {
    pub fn from_complex(c: Complex<f64>) -> Self {
        Pole {
            radius: c.norm(),
            phase: c.arg(),
        }
    }

    pub fn to_complex(self) -> Complex<f64> {
        Complex::from_polar(self.radius, self.phase)
    }

    pub fn imag(self) -> f64 {
        self.radius * self.phase.sin()
    }

    pub fn conj(self) -> Pole {
        Pole {
            radius: self.radius,
            phase: -self.phase,
        }
    }
}

/// Multiset of poles of an all-pole filter, closed under conjugation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
}

impl PoleSet {
    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Checks closure under conjugation within `tol` (for tests and debugging).
    pub fn is_conjugate_symmetric(&self, real_epsilon: f64, tol: f64) -> bool {
        let mut unmatched: Vec<Pole> = self
            .poles
            .iter()
            .copied()
            .filter(|p| p.imag().abs() > real_epsilon)
            .collect();
        while let Some(p) = unmatched.pop() {
            let target = p.conj();
            match unmatched.iter().position(|q| {
                (q.radius - target.radius).abs() <= tol && (q.phase - target.phase).abs() <= tol
            }) {
                Some(i) => {
                    unmatched.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }
}

/// Residual tolerance for accepting roots, relative to the largest
/// polynomial coefficient magnitude.
const ROOT_RESIDUAL_TOL: f64 = 1e-6;

/// Roots of the prediction-error polynomial A(z), i.e. the poles of 1/A(z).
pub fn find_poles(lpc: &LpcFrame) -> Result<PoleSet> {
    let p = lpc.coefficients.len();
    if p == 0 {
        return Ok(PoleSet::default());
    }
    // A(z) = 1 - sum a_i z^-i; multiplying by z^p gives the monic polynomial
    // z^p + c_1 z^(p-1) + ... + c_p with c_i = -a_i.
    let c: Vec<f64> = lpc.coefficients.iter().map(|&a| -a).collect();

    let companion = DMatrix::<f64>::from_fn(p, p, |i, j| {
        if i == 0 {
            -c[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eigen = companion.complex_eigenvalues();

    let max_coeff = c.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
    let mut poles = Vec::with_capacity(p);
    for root in eigen.iter() {
        let residual = eval_monic(&c, *root).norm();
        if !residual.is_finite() || residual > ROOT_RESIDUAL_TOL * max_coeff {
            return Err(Error::Numerical(format!(
                "root finder residual {residual:.3e} exceeds tolerance"
            )));
        }
        poles.push(Pole::from_complex(*root));
    }
    Ok(PoleSet { poles })
}

/// Evaluate z^p + c_1 z^(p-1) + ... + c_p at `z`.
fn eval_monic(c: &[f64], z: Complex<f64>) -> Complex<f64> {
    let mut acc = Complex::new(1.0, 0.0);
    for &ci in c {
        acc = acc * z + ci;
    }
    acc
}

/// Raise the phase of every non-real pole to the power `alpha`, mirroring
/// conjugates; real poles (|imag| <= real_pole_epsilon) are unchanged.
pub fn mcadams_shift(poles: &PoleSet, alpha: f64, real_pole_epsilon: f64) -> Result<PoleSet> {
    if alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "McAdams coefficient must be positive, got {alpha}"
        )));
    }
    let mut shifted = Vec::with_capacity(poles.len());
    for &pole in &poles.poles {
        if pole.imag().abs() <= real_pole_epsilon {
            shifted.push(pole);
            continue;
        }
        let upper = pole.phase.abs();
        if upper <= 0.0 || upper >= std::f64::consts::PI {
            return Err(Error::Numerical(format!(
                "non-real pole with phase {} outside (0, pi)",
                pole.phase
            )));
        }
        // The conjugate member gets the mirrored phase, exactly.
        let new_phase = upper.powf(alpha).copysign(pole.phase);
        shifted.push(Pole {
            radius: pole.radius,
            phase: new_phase,
        });
    }
    Ok(PoleSet { poles: shifted })
}

/// Expand a pole set back into predictor coefficients a_1..a_p.
///
/// Poles with magnitude >= 1 are first projected radially to
/// `stability_margin`; the tiny imaginary residue of the complex expansion
/// is discarded.
pub fn poles_to_coeffs(poles: &PoleSet, stability_margin: f64) -> Vec<f64> {
    let mut monic = vec![Complex::new(1.0, 0.0)];
    for pole in &poles.poles {
        let radius = if pole.radius >= 1.0 {
            stability_margin
        } else {
            pole.radius
        };
        let z = Complex::from_polar(radius, pole.phase);
        // Multiply the polynomial by (x - z).
        monic.push(Complex::new(0.0, 0.0));
        for i in (1..monic.len()).rev() {
            let prev = monic[i - 1];
            monic[i] -= z * prev;
        }
    }
    monic.iter().skip(1).map(|c| -c.re).collect()
}
