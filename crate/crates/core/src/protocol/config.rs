use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qudit::Dims;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Tailoring,
    Encoding,
    Relabel,
    Disentangle,
    DecodingFourier,
    DecodingMeasurement,
    Correction,
    FinalRotation,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Tailoring => "tailoring",
            Stage::Encoding => "encoding",
            Stage::Relabel => "relabel",
            Stage::Disentangle => "disentangle",
            Stage::DecodingFourier => "decoding_fourier",
            Stage::DecodingMeasurement => "decoding_measurement",
            Stage::Correction => "correction",
            Stage::FinalRotation => "final_rotation",
        })
    }
}

/// Teleportee dimensions `d1` (Alice → Bob), `d2` (Bob → Alice) and the
/// channel dimension `d`, with `d1·d2 ≤ d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ProtocolConfig {
    d1: usize,
    d2: usize,
    d: usize,
}

impl ProtocolConfig {
    pub fn new(d1: usize, d2: usize, d: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 || d == 0 {
            return Err(Error::invalid(format!(
                "dimensions must be positive, got ({d1}, {d2}, {d})"
            )));
        }
        let product = d1.saturating_mul(d2);
        if product > d {
            return Err(Error::DimensionGate { d1, d2, d, product });
        }
        Ok(ProtocolConfig { d1, d2, d })
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Dimension of the effective channel, `d1·d2`.
    pub fn dp(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn needs_tailoring(&self) -> bool {
        self.dp() < self.d
    }

    pub fn teleportee_dim(&self, party: Party) -> usize {
        match party {
            Party::Alice => self.d1,
            Party::Bob => self.d2,
        }
    }
}

impl fmt::Display for ProtocolConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(d1={}, d2={}, d={})", self.d1, self.d2, self.d)
    }
}

/// Subsystem positions of the protocol register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout;

impl RegisterLayout {
    pub const TELEPORTEE_1: usize = 0;
    pub const CHANNEL_1: usize = 1;
    pub const TELEPORTEE_2: usize = 2;
    pub const CHANNEL_2: usize = 3;

    /// Positions inside the tailoring register `[ancilla, channel₁, channel₂]`.
    pub const ANCILLA: usize = 0;
    pub const TAILOR_CHANNEL_1: usize = 1;
    pub const TAILOR_CHANNEL_2: usize = 2;

    pub fn teleportee(party: Party) -> usize {
        match party {
            Party::Alice => Self::TELEPORTEE_1,
            Party::Bob => Self::TELEPORTEE_2,
        }
    }

    pub fn channel(party: Party) -> usize {
        match party {
            Party::Alice => Self::CHANNEL_1,
            Party::Bob => Self::CHANNEL_2,
        }
    }

    pub fn dims(config: &ProtocolConfig) -> Dims {
        Dims::new(vec![config.d1, config.d, config.d2, config.d]).expect("config dimensions are positive")
    }

    pub fn tailoring_dims(config: &ProtocolConfig) -> Dims {
        Dims::new(vec![config.dp(), config.d, config.d]).expect("config dimensions are positive")
    }
}
