use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Ordered subsystem dimensions of a register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!("subsystem {pos} has dimension 0")));
        }
        Ok(Dims(dims))
    }

    pub fn single(d: usize) -> Result<Self> {
        Dims::new(vec![d])
    }

    /// Total Hilbert-space dimension (1 for an empty register).
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Place value of each subsystem in the composite index.
    pub fn strides(&self) -> Vec<usize> {
        let mut acc = 1;
        self.0
            .iter()
            .map(|&d| {
                let s = acc;
                acc *= d;
                s
            })
            .collect()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        self.0
            .iter()
            .map(|&d| {
                let digit = index % d;
                index /= d;
                digit
            })
            .collect()
    }

    pub fn compose(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.0.len() {
            return Err(Error::invalid(format!(
                "expected {} digits, got {}",
                self.0.len(),
                digits.len()
            )));
        }
        let mut index = 0;
        for ((&digit, &d), stride) in digits.iter().zip(&self.0).zip(self.strides()) {
            if digit >= d {
                return Err(Error::invalid(format!("digit {digit} out of range for dimension {d}")));
            }
            index += digit * stride;
        }
        Ok(index)
    }

    pub fn concat(&self, other: &Dims) -> Dims {
        Dims(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Dimensions of the given subsystems, in the given order.
    pub fn select(&self, subsystems: &[usize]) -> Result<Dims> {
        check_targets(self, subsystems)?;
        Ok(Dims(subsystems.iter().map(|&s| self.0[s]).collect()))
    }
}

impl std::ops::Index<usize> for Dims {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn check_targets(dims: &Dims, targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= dims.len() {
            return Err(Error::invalid(format!(
                "target subsystem {t} out of range for register {dims}"
            )));
        }
        if targets[..i].contains(&t) {
            return Err(Error::invalid(format!("target subsystem {t} repeated")));
        }
    }
    Ok(())
}

/// Splits `j` into the mixed-radix pair `(j mod d1, j div d1)`.
pub fn split_index(j: usize, d1: usize, d2: usize) -> Result<(usize, usize)> {
    if d1 == 0 || d2 == 0 || j >= d1 * d2 {
        return Err(Error::invalid(format!("index {j} not in 0..{d1}*{d2}")));
    }
    Ok((j % d1, j / d1))
}

/// Inverse of [`split_index`]: `j1 + j2·d1`.
pub fn merge_index(j1: usize, j2: usize, d1: usize, d2: usize) -> Result<usize> {
    if j1 >= d1 || j2 >= d2 {
        return Err(Error::invalid(format!("pair ({j1}, {j2}) not in {d1}x{d2}")));
    }
    Ok(j1 + j2 * d1)
}
