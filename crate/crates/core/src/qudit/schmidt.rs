use super::index::check_targets;
use super::{CMatrix, Dims, QuditRegister, C64, PRODUCT_TOL, ZERO};
use crate::error::{Error, Result};

/// Schmidt coefficients across a bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCheck {
    pub is_product: bool,
    /// Singular values above [`PRODUCT_TOL`], largest first.
    pub schmidt_values: Vec<f64>,
}

/// Amplitudes reshaped so that rows index the subsystems in `group` (in the
/// given order) and columns index the remaining subsystems in register order.
pub fn bipartite_matrix(state: &QuditRegister, group: &[usize]) -> Result<CMatrix> {
    let dims = state.dims();
    check_targets(dims, group)?;
    let rest: Vec<usize> = (0..dims.len()).filter(|s| !group.contains(s)).collect();
    let row_dims = dims.select(group)?;
    let col_dims = dims.select(&rest)?;
    let strides = dims.strides();
    let offset = |sub_dims: &Dims, subs: &[usize], i: usize| -> usize {
        sub_dims
            .digits(i)
            .iter()
            .zip(subs)
            .map(|(&digit, &s)| digit * strides[s])
            .sum()
    };
    let amps = state.amplitudes();
    let row_offsets: Vec<usize> = (0..row_dims.total()).map(|r| offset(&row_dims, group, r)).collect();
    let col_offsets: Vec<usize> = (0..col_dims.total()).map(|c| offset(&col_dims, &rest, c)).collect();
    Ok(CMatrix::from_fn(row_offsets.len(), col_offsets.len(), |r, c| {
        amps[row_offsets[r] + col_offsets[c]]
    }))
}

/// Tests whether `state` factorizes across `group` versus the remaining
/// subsystems.
pub fn is_product(state: &QuditRegister, group: &[usize]) -> Result<ProductCheck> {
    if group.is_empty() || group.len() >= state.dims().len() {
        return Err(Error::invalid("cut must leave both sides non-empty"));
    }
    let m = bipartite_matrix(state, group)?;
    let mut schmidt_values: Vec<f64> = m
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .filter(|&s| s > PRODUCT_TOL)
        .collect();
    schmidt_values.sort_by(|a, b| b.total_cmp(a));
    Ok(ProductCheck {
        is_product: schmidt_values.len() == 1,
        schmidt_values,
    })
}

/// Splits a product state into `(factor on subsystem, state of the rest)`.
///
/// The factor's first largest-magnitude amplitude is made real and positive;
/// the remainder absorbs the global phase, so `factor ⊗ rest` reproduces the
/// input up to subsystem order. Fails if the state is entangled across the
/// cut.
pub fn factor_out(state: &QuditRegister, subsystem: usize) -> Result<(QuditRegister, QuditRegister)> {
    let dims = state.dims();
    if dims.len() < 2 {
        return Err(Error::invalid("need at least two subsystems to factor"));
    }
    let check = is_product(state, &[subsystem])?;
    if !check.is_product {
        return Err(Error::invalid(format!(
            "subsystem {subsystem} is entangled (Schmidt values {:?})",
            check.schmidt_values
        )));
    }
    let m = bipartite_matrix(state, &[subsystem])?;
    let svd = m.clone().svd(true, false);
    let u = svd.u.ok_or_else(|| Error::invalid("SVD failed"))?;
    let top = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut factor: Vec<C64> = u.column(top).iter().copied().collect();
    let pivot = factor
        .iter()
        .enumerate()
        .fold(
            (0, 0.0),
            |best, (i, z)| if z.norm() > best.1 + 1e-12 { (i, z.norm()) } else { best },
        )
        .0;
    let phase = factor[pivot] / factor[pivot].norm();
    factor.iter_mut().for_each(|z| *z /= phase);

    let rest_subsystems: Vec<usize> = (0..dims.len()).filter(|&s| s != subsystem).collect();
    let rest_dims = dims.select(&rest_subsystems)?;
    let mut rest = vec![ZERO; m.ncols()];
    for (col, slot) in rest.iter_mut().enumerate() {
        *slot = (0..m.nrows()).map(|row| factor[row].conj() * m[(row, col)]).sum();
    }
    Ok((
        QuditRegister::normalized(Dims::single(dims[subsystem])?, factor)?,
        QuditRegister::normalized(rest_dims, rest)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{fidelity, random_state, tensor};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn product_of_basis_states() {
        let zz = tensor(
            &QuditRegister::basis_state(2, 0).unwrap(),
            &QuditRegister::basis_state(2, 0).unwrap(),
        );
        let check = is_product(&zz, &[0]).unwrap();
        assert!(check.is_product);
        assert_eq!(check.schmidt_values.len(), 1);
        assert_abs_diff_eq!(check.schmidt_values[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_state_is_entangled() {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let bell = QuditRegister::new(Dims::new(vec![2, 2]).unwrap(), vec![s, ZERO, ZERO, s]).unwrap();
        let check = is_product(&bell, &[1]).unwrap();
        assert!(!check.is_product);
        for v in check.schmidt_values {
            assert_abs_diff_eq!(v, FRAC_1_SQRT_2, epsilon = 1e-12);
        }
        assert!(factor_out(&bell, 0).is_err());
        assert!(is_product(&bell, &[0, 1]).is_err());
    }

    #[test]
    fn factor_out_recovers_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_state(3, &mut rng).unwrap();
        let b = random_state(2, &mut rng).unwrap();
        let c = random_state(4, &mut rng).unwrap();
        let joint = tensor(&tensor(&a, &b), &c);
        let (fb, rest) = factor_out(&joint, 1).unwrap();
        assert_abs_diff_eq!(fidelity(&fb, &b).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&rest, &tensor(&a, &c)).unwrap(), 1.0, epsilon = 1e-12);
        // factor ⊗ rest is exactly the input, phase included
        let rebuilt = tensor(&fb, &rest).permute_subsystems(&[1, 0, 2]).unwrap();
        for (x, y) in rebuilt.amplitudes().iter().zip(joint.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn bipartite_rows_follow_group_order() {
        let reg = QuditRegister::basis(Dims::new(vec![2, 3, 2]).unwrap(), &[1, 2, 0]).unwrap();
        let m = bipartite_matrix(&reg, &[2, 1]).unwrap();
        assert_eq!(m.shape(), (6, 2));
        assert_eq!(m[(2 * 2, 1)], C64::new(1.0, 0.0));
    }
}
