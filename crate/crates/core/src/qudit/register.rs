use rand::Rng;
use rand_distr::StandardNormal;

use super::index::check_targets;
use super::{Dims, C64, NORM_TOL, ZERO};
use crate::error::{Error, Result};

/// Joint pure state of an ordered list of qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditRegister {
    dims: Dims,
    amps: Vec<C64>,
}

impl QuditRegister {
    /// Wraps an amplitude vector, requiring unit norm within [`NORM_TOL`].
    pub fn new(dims: Dims, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::invalid(format!(
                "{} amplitudes for register {dims} of dimension {}",
                amps.len(),
                dims.total()
            )));
        }
        let norm = norm_sqr(&amps).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(QuditRegister { dims, amps })
    }

    /// Rescales `amps` to unit norm. Fails on the zero vector.
    pub fn normalized(dims: Dims, mut amps: Vec<C64>) -> Result<Self> {
        let norm = norm_sqr(&amps).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        QuditRegister::new(dims, amps)
    }

    /// Single n-level qudit from its amplitudes.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        QuditRegister::new(Dims::single(amps.len())?, amps)
    }

    /// Computational basis state `|digits⟩`.
    pub fn basis(dims: Dims, digits: &[usize]) -> Result<Self> {
        let index = dims.compose(digits)?;
        let mut amps = vec![ZERO; dims.total()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(QuditRegister { dims, amps })
    }

    /// `|i⟩` of a single n-level qudit.
    pub fn basis_state(n: usize, i: usize) -> Result<Self> {
        QuditRegister::basis(Dims::single(n)?, &[i])
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// Amplitude at the given per-subsystem digits.
    pub fn amplitude(&self, digits: &[usize]) -> Result<C64> {
        Ok(self.amps[self.dims.compose(digits)?])
    }

    /// Reorders subsystems: subsystem `s` of the result is subsystem
    /// `order[s]` of `self`.
    pub fn permute_subsystems(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.dims.len() {
            return Err(Error::invalid("subsystem permutation has the wrong length"));
        }
        check_targets(&self.dims, order)?;
        let new_dims = self.dims.select(order)?;
        let old_strides = self.dims.strides();
        let mut amps = vec![ZERO; self.amps.len()];
        for (new_index, slot) in amps.iter_mut().enumerate() {
            let old_index: usize = new_dims
                .digits(new_index)
                .iter()
                .zip(order)
                .map(|(&digit, &src)| digit * old_strides[src])
                .sum();
            *slot = self.amps[old_index];
        }
        Ok(QuditRegister { dims: new_dims, amps })
    }

    /// Pads a single-qudit state with zero amplitude on levels `n..`.
    pub fn embed(&self, n: usize) -> Result<Self> {
        let own = self.single_dim()?;
        if n < own {
            return Err(Error::invalid(format!("cannot embed dimension {own} into {n}")));
        }
        let mut amps = self.amps.clone();
        amps.resize(n, ZERO);
        QuditRegister::new(Dims::single(n)?, amps)
    }

    /// Drops levels `n..` of a single-qudit state; they must carry weight at
    /// most `1e-12`.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        let own = self.single_dim()?;
        if n == 0 || n > own {
            return Err(Error::invalid(format!("cannot truncate dimension {own} to {n}")));
        }
        let residual = norm_sqr(&self.amps[n..]);
        if residual > 1e-12 {
            return Err(Error::invalid(format!(
                "truncation to {n} levels discards weight {residual:e}"
            )));
        }
        QuditRegister::normalized(Dims::single(n)?, self.amps[..n].to_vec())
    }

    fn single_dim(&self) -> Result<usize> {
        match self.dims.as_slice() {
            [d] => Ok(*d),
            _ => Err(Error::invalid(format!("expected a single qudit, got {}", self.dims))),
        }
    }
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Joint state `a ⊗ b`; subsystems of `a` come first and are less significant.
pub fn tensor(a: &QuditRegister, b: &QuditRegister) -> QuditRegister {
    let mut amps = Vec::with_capacity(a.amps.len() * b.amps.len());
    for &y in &b.amps {
        amps.extend(a.amps.iter().map(|&x| x * y));
    }
    QuditRegister {
        dims: a.dims.concat(&b.dims),
        amps,
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuditRegister, b: &QuditRegister) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::invalid(format!(
            "fidelity between registers {} and {}",
            a.dims, b.dims
        )));
    }
    let overlap: C64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr())
}

/// Haar-random pure state of one n-level qudit.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QuditRegister> {
    if n == 0 {
        return Err(Error::invalid("random state of dimension 0"));
    }
    loop {
        let amps: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if norm_sqr(&amps) > 0.0 {
            return QuditRegister::normalized(Dims::single(n)?, amps);
        }
    }
}
