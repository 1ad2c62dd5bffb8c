use std::f64::consts::TAU;

use super::index::check_targets;
use super::{CMatrix, Dims, QuditRegister, ALGEBRA_TOL, C64, NORM_TOL, ONE, ZERO};
use crate::error::{Error, Result};

/// A unitary acting on an ordered subset of a register's subsystems.
///
/// The first target is the least significant digit of the matrix index.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    targets: Vec<usize>,
    matrix: CMatrix,
}

impl LocalUnitary {
    pub fn new(targets: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("local unitary must be square"));
        }
        for (i, &t) in targets.iter().enumerate() {
            if targets[..i].contains(&t) {
                return Err(Error::invalid(format!("target subsystem {t} repeated")));
            }
        }
        let n = matrix.nrows();
        let defect = unitarity_defect(&matrix);
        if defect > ALGEBRA_TOL * n as f64 {
            return Err(Error::invalid(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(LocalUnitary { targets, matrix })
    }

    /// Basis permutation with optional unit phases, `U|s⟩ = phase[s]·|map[s]⟩`.
    /// Unitary by construction once the map is checked to be a bijection, so
    /// the dense `U†U` check is skipped.
    pub fn permutation(targets: Vec<usize>, map: &[usize], phases: Option<&[C64]>) -> Result<Self> {
        let matrix = permutation_unitary(map.len(), map, phases)?;
        for (i, &t) in targets.iter().enumerate() {
            if targets[..i].contains(&t) {
                return Err(Error::invalid(format!("target subsystem {t} repeated")));
            }
        }
        Ok(LocalUnitary { targets, matrix })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let product = m.adjoint() * m;
    max_abs_diff(&product, &identity(n))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Applies `u` to `state`, acting as the identity on all other subsystems.
pub fn apply_local(state: &QuditRegister, u: &LocalUnitary) -> Result<QuditRegister> {
    let amps = apply_matrix(state.dims(), state.amplitudes(), &u.targets, &u.matrix)?;
    let out = QuditRegister::new(state.dims().clone(), amps)?;
    debug_assert!((out.norm() - 1.0).abs() <= NORM_TOL);
    Ok(out)
}

/// Applies an arbitrary local matrix without normalizing the result.
pub(crate) fn apply_matrix(dims: &Dims, amps: &[C64], targets: &[usize], m: &CMatrix) -> Result<Vec<C64>> {
    check_targets(dims, targets)?;
    let n: usize = targets.iter().map(|&t| dims[t]).product();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::invalid(format!(
            "operator of size {}x{} on targets {targets:?} of register {dims} (local dimension {n})",
            m.nrows(),
            m.ncols()
        )));
    }
    let strides = dims.strides();
    let offsets: Vec<usize> = (0..n)
        .map(|mut local| {
            let mut offset = 0;
            for &t in targets {
                offset += (local % dims[t]) * strides[t];
                local /= dims[t];
            }
            offset
        })
        .collect();
    let entries: Vec<(usize, usize, C64)> = (0..n)
        .flat_map(|col| (0..n).map(move |row| (row, col)))
        .filter_map(|(row, col)| {
            let v = m[(row, col)];
            (v != ZERO).then_some((offsets[row], offsets[col], v))
        })
        .collect();

    let mut out = vec![ZERO; amps.len()];
    for base in 0..amps.len() {
        let is_base = targets.iter().all(|&t| (base / strides[t]).is_multiple_of(dims[t]));
        if !is_base {
            continue;
        }
        for &(row, col, v) in &entries {
            out[base + row] += v * amps[base + col];
        }
    }
    Ok(out)
}

fn root_of_unity(n: usize, power: i64) -> C64 {
    let reduced = power.rem_euclid(n as i64) as f64;
    C64::from_polar(1.0, TAU * reduced / n as f64)
}

fn require_positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        Err(Error::invalid(format!("{what} of dimension 0")))
    } else {
        Ok(())
    }
}

/// `F[m][j] = ω_n^{m·j} / √n` with `ω_n = exp(2πi/n)`.
pub fn fourier_matrix(n: usize) -> Result<CMatrix> {
    require_positive(n, "Fourier transform")?;
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CMatrix::from_fn(n, n, |m, j| root_of_unity(n, (m * j) as i64) * scale))
}

/// Cyclic shift `|j⟩ → |j + shift mod n⟩`.
pub fn pauli_x(n: usize, shift: i64) -> Result<CMatrix> {
    require_positive(n, "shift operator")?;
    let s = shift.rem_euclid(n as i64) as usize;
    Ok(CMatrix::from_fn(
        n,
        n,
        |row, col| if row == (col + s) % n { ONE } else { ZERO },
    ))
}

/// Phase operator `|j⟩ → ω_n^{power·j} |j⟩`.
pub fn pauli_z(n: usize, power: i64) -> Result<CMatrix> {
    require_positive(n, "phase operator")?;
    Ok(CMatrix::from_fn(n, n, |row, col| {
        if row == col {
            root_of_unity(n, power.rem_euclid(n as i64) * row as i64)
        } else {
            ZERO
        }
    }))
}

/// `a ⊗ b` on one `d1·d2`-level qudit read as the pair `j = j1 + j2·d1`:
/// `a` acts on `j1`, `b` on `j2`.
pub fn factored_unitary(d1: usize, d2: usize, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    require_positive(d1, "factor")?;
    require_positive(d2, "factor")?;
    if a.shape() != (d1, d1) || b.shape() != (d2, d2) {
        return Err(Error::invalid(format!(
            "factors of shape {:?} and {:?} for a {d1}x{d2} factorization",
            a.shape(),
            b.shape()
        )));
    }
    for (name, m, n) in [("first", a, d1), ("second", b, d2)] {
        if unitarity_defect(m) > ALGEBRA_TOL * n as f64 {
            return Err(Error::invalid(format!("{name} factor is not unitary")));
        }
    }
    // j1 least significant, so the Kronecker product is b ⊗ a.
    Ok(b.kronecker(a))
}

/// `U|s⟩ = phase[s]·|map[s]⟩`.
pub fn permutation_unitary(n: usize, map: &[usize], phases: Option<&[C64]>) -> Result<CMatrix> {
    if map.len() != n {
        return Err(Error::invalid(format!(
            "permutation of length {} for n = {n}",
            map.len()
        )));
    }
    let mut hit = vec![false; n];
    for &target in map {
        if target >= n || hit[target] {
            return Err(Error::invalid(format!("map is not a bijection on 0..{n}")));
        }
        hit[target] = true;
    }
    if let Some(phases) = phases {
        if phases.len() != n {
            return Err(Error::invalid("one phase per source level required"));
        }
        if phases.iter().any(|p| (p.norm() - 1.0).abs() > ALGEBRA_TOL) {
            return Err(Error::invalid("phases must have unit modulus"));
        }
    }
    let mut m = CMatrix::zeros(n, n);
    for (source, &target) in map.iter().enumerate() {
        m[(target, source)] = phases.map_or(ONE, |p| p[source]);
    }
    Ok(m)
}

/// Embeds an `m×m` block acting on the lowest levels into an `n×n`
/// operator that is the identity on levels `m..n`.
pub fn pad_identity(block: &CMatrix, n: usize) -> Result<CMatrix> {
    let m = block.nrows();
    if !block.is_square() || m > n {
        return Err(Error::invalid(format!(
            "cannot pad a {m}x{} block to {n}",
            block.ncols()
        )));
    }
    let mut out = identity(n);
    out.view_mut((0, 0), (m, m)).copy_from(block);
    Ok(out)
}
