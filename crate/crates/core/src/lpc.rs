//! LPC analysis (autocorrelation method / Levinson-Durbin) and all-pole
//! resynthesis.
//!
//! Coefficients follow the predictor convention A(z) = 1 - sum_i a_i z^-i,
//! so the analysis filter output (residual) is e[n] = x[n] - sum_i a_i x[n-i]
//! and the synthesis filter is 1/A(z).

use crate::error::{Error, Result};

/// Per-frame all-pole model.
#[derive(Debug, Clone)]
pub struct LpcFrame {
    pub order: usize,
    /// Predictor coefficients a_1..a_p.
    pub coefficients: Vec<f64>,
    /// Final prediction-error standard deviation.
    pub gain: f64,
    /// Analysis-filter output, same length as the input frame.
    pub residual: Vec<f64>,
    /// True when the frame had no energy; such frames pass through unmodified.
    pub degenerate: bool,
}

const ZERO_ENERGY_THRESHOLD: f64 = 1e-20;

/// Autocorrelation-method LPC analysis of a (windowed) frame.
pub fn lpc_analyze(frame: &[f64], order: usize) -> Result<LpcFrame> {
    if order >= frame.len() {
        return Err(Error::InvalidArgument(format!(
            "LPC order {order} must be below frame length {}",
            frame.len()
        )));
    }

    let r = autocorrelation(frame, order);
    if r[0] <= ZERO_ENERGY_THRESHOLD {
        return Ok(LpcFrame {
            order,
            coefficients: vec![0.0; order],
            gain: 0.0,
            residual: vec![0.0; frame.len()],
            degenerate: true,
        });
    }

    let (a, err) = levinson_durbin(&r, order);
    let residual = analysis_filter(frame, &a);
    Ok(LpcFrame {
        order,
        coefficients: a,
        gain: err.max(0.0).sqrt(),
        residual,
        degenerate: false,
    })
}

/// Filter a residual through the all-pole synthesis filter 1/A(z) with zero
/// initial state.
pub fn synthesize_frame(residual: &[f64], coeffs: &[f64]) -> Result<Vec<f64>> {
    let p = coeffs.len();
    let mut y = vec![0.0f64; residual.len()];
    for n in 0..residual.len() {
        let mut acc = residual[n];
        for (i, &a) in coeffs.iter().enumerate().take(n.min(p)) {
            acc += a * y[n - 1 - i];
        }
        y[n] = acc;
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "non-finite output from synthesis filter (unstable coefficients)".into(),
        ));
    }
    Ok(y)
}

/// Residual e[n] = x[n] - sum_i a_i x[n-i], zero history before the frame.
fn analysis_filter(frame: &[f64], coeffs: &[f64]) -> Vec<f64> {
    let p = coeffs.len();
    (0..frame.len())
        .map(|n| {
            let mut acc = frame[n];
            for (i, &a) in coeffs.iter().enumerate().take(n.min(p)) {
                acc -= a * frame[n - 1 - i];
            }
            acc
        })
        .collect()
}

fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| frame.iter().zip(&frame[lag..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// Solve the normal equations; returns (a_1..a_p, final prediction error).
fn levinson_durbin(r: &[f64], order: usize) -> (Vec<f64>, f64) {
    // Internally uses the 1 + sum b_i z^-i convention, negated on return.
    let mut b = vec![0.0f64; order];
    let mut err = r[0];
    for i in 0..order {
        if err <= 0.0 {
            break; // perfectly predictable; remaining coefficients stay zero
        }
        let mut acc = r[i + 1];
        for j in 0..i {
            acc += b[j] * r[i - j];
        }
        let k = -acc / err;
        b[i] = k;
        for j in 0..i / 2 {
            let tmp = b[j] + k * b[i - 1 - j];
            b[i - 1 - j] += k * b[j];
            b[j] = tmp;
        }
        if i % 2 == 1 {
            b[i / 2] += k * b[i / 2];
        }
        err *= 1.0 - k * k;
    }
    (b.iter().map(|&v| -v).collect(), err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_energy(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn recovers_ar2_coefficients() {
        // x_n = 0.5 x_{n-1} - 0.25 x_{n-2} + e_n with deterministic noise.
        let mut state: u64 = 7;
        let mut noise = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut x = vec![0.0f64; 8000];
        for n in 2..x.len() {
            x[n] = 0.5 * x[n - 1] - 0.25 * x[n - 2] + noise();
        }
        let lpc = lpc_analyze(&x, 2).unwrap();
        assert!((lpc.coefficients[0] - 0.5).abs() < 0.05, "{:?}", lpc.coefficients);
        assert!((lpc.coefficients[1] + 0.25).abs() < 0.05, "{:?}", lpc.coefficients);
    }

    #[test]
    fn zero_frame_is_degenerate() {
        let lpc = lpc_analyze(&[0.0; 64], 10).unwrap();
        assert!(lpc.degenerate);
        assert!(lpc.coefficients.iter().all(|&c| c == 0.0));
        assert!(lpc.residual.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn residual_energy_never_exceeds_frame_energy() {
        let mut state: u64 = 99;
        let x: Vec<f64> = (0..512)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        for order in [1, 4, 10, 20] {
            let lpc = lpc_analyze(&x, order).unwrap();
            assert!(
                frame_energy(&lpc.residual) <= frame_energy(&x) * (1.0 + 1e-9),
                "order {order}"
            );
        }
    }

    #[test]
    fn analysis_synthesis_inverse_pair() {
        let x: Vec<f64> = (0..256)
            .map(|n| (n as f64 * 0.11).sin() * 0.5 + (n as f64 * 0.041).cos() * 0.2)
            .collect();
        let lpc = lpc_analyze(&x, 12).unwrap();
        let y = synthesize_frame(&lpc.residual, &lpc.coefficients).unwrap();
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(err / scale < 1e-6, "relative error {}", err / scale);
    }

    #[test]
    fn zero_residual_gives_zero_frame() {
        let y = synthesize_frame(&[0.0; 32], &[0.5, -0.2]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ar1_impulse_response_is_geometric() {
        let mut residual = vec![0.0; 8];
        residual[0] = 1.0;
        let y = synthesize_frame(&residual, &[0.5]).unwrap();
        for (n, &v) in y.iter().enumerate() {
            assert!((v - 0.5f64.powi(n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn order_must_be_below_frame_length() {
        assert!(lpc_analyze(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn synthesis_filter_is_minimum_phase() {
        // Levinson-Durbin on a valid autocorrelation must give all reflection
        // coefficients in (-1, 1); verify indirectly via bounded impulse
        // response over a long horizon.
        let x: Vec<f64> = (0..400).map(|n| (n as f64 * 0.3).sin()).collect();
        let lpc = lpc_analyze(&x, 20).unwrap();
        let mut impulse = vec![0.0; 4000];
        impulse[0] = 1.0;
        let y = synthesize_frame(&impulse, &lpc.coefficients).unwrap();
        let tail = y[3000..].iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let head = y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(tail < head, "impulse response does not decay");
    }
}
