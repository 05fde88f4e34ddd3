//! Rotation-gate accuracy needed for a given temperature resolution.
//!
//! The prepared amplitude is p(T) = e^{−a/T}, so first-order uncertainty
//! propagation gives δp = |dp/dT|·δT = (a/T²)·e^{−a/T}·δT.

use serde::Serialize;
use thiserror::Error;

use crate::circuits::Dim;

/// Amplitude exponents quoted for the two lattices: p = e^{−1/T} (1D), e^{−2/T} (2D).
pub const AMPLITUDE_EXPONENT_1D: f64 = 1.0;
pub const AMPLITUDE_EXPONENT_2D: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccuracyError {
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("amplitude exponent must be positive, got {0}")]
    Exponent(f64),
    #[error("temperature resolution must be positive, got {0}")]
    Resolution(f64),
}

pub fn amplitude_exponent(dim: Dim) -> f64 {
    match dim {
        Dim::One => AMPLITUDE_EXPONENT_1D,
        Dim::Two => AMPLITUDE_EXPONENT_2D,
    }
}

/// p(T) = e^{−a/T}.
pub fn amplitude(temperature: f64, exponent: f64) -> f64 {
    (-exponent / temperature).exp()
}

/// Largest amplitude error compatible with resolving `delta_t`.
pub fn required_accuracy(temperature: f64, exponent: f64, delta_t: f64) -> Result<f64, AccuracyError> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(AccuracyError::Temperature(temperature));
    }
    if exponent.is_nan() || exponent <= 0.0 {
        return Err(AccuracyError::Exponent(exponent));
    }
    if delta_t.is_nan() || delta_t <= 0.0 {
        return Err(AccuracyError::Resolution(delta_t));
    }
    Ok(exponent / (temperature * temperature) * amplitude(temperature, exponent) * delta_t)
}

/// Temperature shift caused by a systematic amplitude offset, to first order.
pub fn linearized_temperature_shift(temperature: f64, exponent: f64, delta_p: f64) -> Result<f64, AccuracyError> {
    // δT = δp / |dp/dT|; reuse required_accuracy with δT = 1 for the derivative
    Ok(delta_p / required_accuracy(temperature, exponent, 1.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub dim: Dim,
    pub amplitude_exponent: f64,
    pub temperature: f64,
    pub delta_t: f64,
    pub delta_p: f64,
}

impl ErrorBudget {
    pub fn new(dim: Dim, temperature: f64, delta_t: f64) -> Result<Self, AccuracyError> {
        let amplitude_exponent = amplitude_exponent(dim);
        let delta_p = required_accuracy(temperature, amplitude_exponent, delta_t)?;
        Ok(ErrorBudget { dim, amplitude_exponent, temperature, delta_t, delta_p })
    }
}

pub fn accuracy_curve(exponent: f64, delta_t: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>, AccuracyError> {
    grid.iter().map(|&t| Ok((t, required_accuracy(t, exponent, delta_t)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyRow {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub delta_p_1d: f64,
    pub delta_p_2d: f64,
}

/// Both lattice curves on one grid.
pub fn accuracy_table(delta_t: f64, grid: &[f64]) -> Result<Vec<AccuracyRow>, AccuracyError> {
    grid.iter()
        .map(|&t| {
            Ok(AccuracyRow {
                temperature: t,
                delta_p_1d: required_accuracy(t, AMPLITUDE_EXPONENT_1D, delta_t)?,
                delta_p_2d: required_accuracy(t, AMPLITUDE_EXPONENT_2D, delta_t)?,
            })
        })
        .collect()
}

/// Shift the amplitude √P by `offset`, clamp to [0, 1] and square.
pub fn perturb_amplitude(prob: f64, offset: f64) -> f64 {
    let p = (prob.sqrt() + offset).clamp(0.0, 1.0);
    p * p
}

/// Rotation error drawn uniformly from [−δp, +δp] using the uniform `u ∈ [0, 1)`.
pub fn inject_rotation_error(prob: f64, delta_p: f64, u: f64) -> f64 {
    if delta_p == 0.0 {
        return prob;
    }
    perturb_amplitude(prob, (2.0 * u - 1.0) * delta_p)
}

/// Temperature at which min{1, e^{−ΔE/T}} equals `prob`, for ΔE > 0 in units of J.
pub fn effective_temperature(delta_e: f64, prob: f64) -> f64 {
    -delta_e / prob.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let v = required_accuracy(2.0, 2.0, 0.1).unwrap();
        assert!((v - 0.5 * (-1.0f64).exp() * 0.1).abs() < 1e-15);
        assert!((v - 0.018394).abs() < 1e-6);
        let v = required_accuracy(1.0, 2.0, 0.1).unwrap();
        assert!((v - 0.027067).abs() < 1e-6);
        let v = required_accuracy(4.0, 1.0, 0.1).unwrap();
        assert!((v - 0.004868).abs() < 1e-6);
    }

    #[test]
    fn peak_at_half_exponent() {
        let peak = required_accuracy(1.0, 2.0, 0.1).unwrap();
        for t in [0.8, 0.95, 1.05, 1.3] {
            assert!(required_accuracy(t, 2.0, 0.1).unwrap() < peak);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(required_accuracy(0.0, 2.0, 0.1), Err(AccuracyError::Temperature(0.0)));
        assert_eq!(required_accuracy(-1.0, 2.0, 0.1), Err(AccuracyError::Temperature(-1.0)));
        assert!(required_accuracy(1.0, 0.0, 0.1).is_err());
        assert!(required_accuracy(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn curve_shape() {
        let grid: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
        let curve = accuracy_curve(2.0, 0.1, &grid).unwrap();
        assert_eq!(curve.len(), 8);
        for w in curve.windows(2).filter(|w| w[0].0 >= 1.0) {
            assert!(w[1].1 < w[0].1, "{:?}", w);
        }
        let table = accuracy_table(0.1, &[3.0]).unwrap();
        assert!(table[0].delta_p_2d > table[0].delta_p_1d);
    }

    #[test]
    fn injection_edges() {
        for p in [0.0, 0.1, 0.37, 1.0] {
            for u in [0.0, 0.3, 0.999] {
                assert_eq!(inject_rotation_error(p, 0.0, u).to_bits(), p.to_bits());
            }
        }
        assert_eq!(perturb_amplitude(1.0, 0.2), 1.0);
        assert_eq!(perturb_amplitude(1.0, 0.0), 1.0);
        assert_eq!(perturb_amplitude(0.0, -0.3), 0.0);
        assert!((perturb_amplitude(0.25, 0.1) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn budget_uses_lattice_exponent() {
        let b = ErrorBudget::new(Dim::Two, 2.0, 0.1).unwrap();
        assert_eq!(b.amplitude_exponent, 2.0);
        assert!((b.delta_p - 0.018394).abs() < 1e-6);
        let b = ErrorBudget::new(Dim::One, 4.0, 0.1).unwrap();
        assert!((b.delta_p - 0.004868).abs() < 1e-6);
    }

    #[test]
    fn effective_temperature_inverts_boltzmann_factor() {
        let t = 2.5;
        let p = (-4.0f64 / t).exp();
        assert!((effective_temperature(4.0, p) - t).abs() < 1e-12);
    }
}
