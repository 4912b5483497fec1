use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

pub fn sigmoid(q: f64) -> f64 {
    if q >= 0.0 {
        1.0 / (1.0 + (-q).exp())
    } else {
        let e = q.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    #[inline]
    pub fn apply(self, q: f64) -> f64 {
        match self {
            Activation::Relu => q.max(0.0),
            Activation::Sigmoid => sigmoid(q),
            Activation::Identity => q,
        }
    }

    /// Derivative; ReLU uses 0 at the kink.
    #[inline]
    pub fn derivative(self, q: f64) -> f64 {
        match self {
            Activation::Relu => {
                if q > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(q);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }

    /// Derivative given both the pre-activation `q` and its image `a = φ(q)`,
    /// which avoids recomputing the sigmoid.
    #[inline]
    pub(crate) fn derivative_with_output(self, q: f64, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            _ => self.derivative(q),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::Validation(format!("unknown activation '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn relu_kink() {
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
        assert_eq!(Activation::Relu.derivative(1e-300), 1.0);
    }
}
