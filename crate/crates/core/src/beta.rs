use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dyson index of the ensemble: real (β = 1) or complex (β = 2) states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn from_index(beta: u8) -> Result<Self> {
        match beta {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            other => Err(Error::domain(format!("Dyson index must be 1 or 2, got {other}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.index() as f64
    }

    /// Ancilla size that turns the induced measure into the Hilbert–Schmidt one.
    pub fn hs_ancilla(self, n: usize) -> usize {
        match self {
            Beta::Complex => n,
            Beta::Real => n + 1,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        b.index()
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Beta::from_index(v)
    }
}
