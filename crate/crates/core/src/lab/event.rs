use serde::{Deserialize, Serialize};

use crate::spectral::StokesBasis;
use crate::Scalar;

/// Closed family of Borel sets of `D(A)` used as events.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventSpec {
    Full,
    Empty,
    /// `{y : |A(y − c)| ≤ r}`; an empty center means 0.
    ABall {
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
    },
    /// `{y : ⟨Ay, hᵢ⟩ ≥ c}`.
    HalfSpace { mode: usize, threshold: f64 },
    /// `{y : |Ay| > r}`, the complement of the `A`-ball around 0.
    AComplementBall { radius: f64 },
    /// `{y : 5 C* (1 + |Ay|)² ε ≤ 1}`.
    Admissible { c_star: f64, epsilon: f64 },
}

fn a_norm<T: Scalar>(basis: &StokesBasis<T>, y: &[T], center: &[f64]) -> f64 {
    y.iter()
        .zip(basis.eigenvalues())
        .enumerate()
        .map(|(i, (c, l))| {
            let shift = center.get(i).copied().unwrap_or(0.0);
            ((c.as_f64() - shift) * l.as_f64()).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

impl EventSpec {
    pub fn contains<T: Scalar>(&self, basis: &StokesBasis<T>, y: &[T]) -> bool {
        match self {
            EventSpec::Full => true,
            EventSpec::Empty => false,
            EventSpec::ABall { center, radius } => a_norm(basis, y, center) <= *radius,
            EventSpec::HalfSpace { mode, threshold } => {
                basis.eigenvalue(*mode).as_f64() * y[*mode].as_f64() >= *threshold
            }
            EventSpec::AComplementBall { radius } => a_norm(basis, y, &[]) > *radius,
            EventSpec::Admissible { c_star, epsilon } => {
                let a = a_norm(basis, y, &[]);
                5.0 * c_star * (1.0 + a).powi(2) * epsilon <= 1.0
            }
        }
    }

    /// Mode indices the event refers to must exist.
    pub fn validate(&self, modes: usize) -> Result<(), String> {
        match self {
            EventSpec::HalfSpace { mode, .. } if *mode >= modes => {
                Err(format!("mode {mode} out of range (basis has {modes})"))
            }
            EventSpec::ABall { center, radius } => {
                if !center.is_empty() && center.len() != modes {
                    Err(format!("center has {} entries, basis has {modes}", center.len()))
                } else if *radius < 0.0 {
                    Err("radius must be non-negative".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Bounded test functional `ψ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
    Indicator { event: EventSpec },
    Constant { value: f64 },
    /// `sin(f·⟨Ay, hᵢ⟩ + phase)`.
    Sine { mode: usize, frequency: f64, #[serde(default)] phase: f64 },
    /// `tanh(f·(|Ay| − offset))`.
    Tanh { frequency: f64, offset: f64 },
}

impl Observable {
    pub fn eval<T: Scalar>(&self, basis: &StokesBasis<T>, y: &[T]) -> f64 {
        match self {
            Observable::Indicator { event } => {
                if event.contains(basis, y) {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::Constant { value } => *value,
            Observable::Sine {
                mode,
                frequency,
                phase,
            } => (frequency * basis.eigenvalue(*mode).as_f64() * y[*mode].as_f64() + phase).sin(),
            Observable::Tanh { frequency, offset } => {
                (frequency * (a_norm(basis, y, &[]) - offset)).tanh()
            }
        }
    }

    /// `‖ψ‖∞`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Observable::Constant { value } => value.abs(),
            _ => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_empty() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let y = vec![0.3; basis.len()];
        assert!(EventSpec::Full.contains(&basis, &y));
        assert!(!EventSpec::Empty.contains(&basis, &y));
    }

    #[test]
    fn ball_and_complement_partition() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        for s in [0.0, 0.001, 0.01, 0.1] {
            let y = vec![s; basis.len()];
            let inside = EventSpec::ABall { center: vec![], radius: 1.0 }.contains(&basis, &y);
            let outside = EventSpec::AComplementBall { radius: 1.0 }.contains(&basis, &y);
            assert_ne!(inside, outside);
        }
    }

    #[test]
    fn config_round_trip() {
        let e = EventSpec::HalfSpace { mode: 3, threshold: 0.1 };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"kind":"half-space","mode":3,"threshold":0.1}"#);
        assert_eq!(serde_json::from_str::<EventSpec>(&s).unwrap(), e);
    }
}
