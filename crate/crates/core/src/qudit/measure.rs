use rand::Rng;

use super::ops::{apply_matrix, identity, max_abs_diff};
use super::register::norm_sqr;
use super::{CMatrix, QuditRegister, ALGEBRA_TOL, C64, NORM_TOL, PROBABILITY_FLOOR, ZERO};
use crate::error::{Error, Result};

/// A complete set of orthogonal projectors on some subsystems: one
/// projective measurement. Outcome labels are projector positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    targets: Vec<usize>,
    projectors: Vec<CMatrix>,
    residual: bool,
}

/// Worst-case violations of the projector-family axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyDefects {
    pub hermiticity: f64,
    pub idempotence: f64,
    pub orthogonality: f64,
    pub completeness: f64,
}

impl FamilyDefects {
    pub fn max(&self) -> f64 {
        self.hermiticity
            .max(self.idempotence)
            .max(self.orthogonality)
            .max(self.completeness)
    }
}

impl ProjectorFamily {
    /// Validates hermiticity, idempotence, orthogonality and completeness
    /// to `1e-12·n`.
    pub fn new(targets: Vec<usize>, projectors: Vec<CMatrix>) -> Result<Self> {
        let family = ProjectorFamily {
            targets,
            projectors,
            residual: false,
        };
        family.validate()?;
        Ok(family)
    }

    /// Like [`ProjectorFamily::new`], but appends `I − Σ P` as a final
    /// residual outcome when the given projectors do not already sum to the
    /// identity.
    pub fn completed(targets: Vec<usize>, mut projectors: Vec<CMatrix>) -> Result<Self> {
        let n = projectors
            .first()
            .map(|p| p.nrows())
            .ok_or_else(|| Error::invalid("empty projector family"))?;
        let mut rest = identity(n);
        for p in &projectors {
            if p.shape() != (n, n) {
                return Err(Error::invalid("projectors of differing sizes"));
            }
            rest -= p;
        }
        let residual = rest.iter().any(|z| z.norm() > ALGEBRA_TOL * n as f64);
        if residual {
            projectors.push(rest);
        }
        let family = ProjectorFamily {
            targets,
            projectors,
            residual,
        };
        family.validate()?;
        Ok(family)
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// Label of the completion projector added by [`ProjectorFamily::completed`].
    pub fn residual_label(&self) -> Option<usize> {
        self.residual.then(|| self.projectors.len() - 1)
    }

    pub fn defects(&self) -> FamilyDefects {
        let n = self.projectors.first().map_or(0, |p| p.nrows());
        let mut d = FamilyDefects {
            hermiticity: 0.0,
            idempotence: 0.0,
            orthogonality: 0.0,
            completeness: 0.0,
        };
        let mut sum = CMatrix::zeros(n, n);
        let rows: Vec<SparseRows> = self.projectors.iter().map(sparse_rows).collect();
        for (a, p) in self.projectors.iter().enumerate() {
            d.hermiticity = d.hermiticity.max(max_abs_diff(p, &p.adjoint()));
            d.idempotence = d
                .idempotence
                .max(max_abs_diff(&sparse_product(&rows[a], &rows[a], n), p));
            for b in a + 1..self.projectors.len() {
                let pq = sparse_product(&rows[a], &rows[b], n);
                d.orthogonality = d.orthogonality.max(pq.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
            sum += p;
        }
        d.completeness = max_abs_diff(&sum, &identity(n));
        d
    }

    fn validate(&self) -> Result<()> {
        let n = match self.projectors.first() {
            Some(p) => p.nrows(),
            None => return Err(Error::invalid("empty projector family")),
        };
        if self.projectors.iter().any(|p| p.shape() != (n, n)) {
            return Err(Error::invalid("projectors of differing sizes"));
        }
        let defects = self.defects();
        if defects.max() > ALGEBRA_TOL * n as f64 {
            return Err(Error::invalid(format!(
                "not a complete orthogonal projector family: {defects:?}"
            )));
        }
        Ok(())
    }
}

/// Nonzero entries of each row, as `(column, value)`.
type SparseRows = Vec<Vec<(usize, C64)>>;

fn sparse_rows(m: &CMatrix) -> SparseRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .filter(|&j| m[(i, j)] != ZERO)
                .map(|j| (j, m[(i, j)]))
                .collect()
        })
        .collect()
}

/// Exact product of two square matrices given by their sparse rows.
fn sparse_product(p: &SparseRows, q: &SparseRows, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for (i, row) in p.iter().enumerate() {
        for &(k, a) in row {
            for &(j, b) in &q[k] {
                out[(i, j)] += a * b;
            }
        }
    }
    out
}

/// One outcome of a projective measurement. `post_state` is `None` for
/// branches whose probability is below [`PROBABILITY_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub label: usize,
    pub probability: f64,
    pub post_state: Option<QuditRegister>,
}

impl MeasurementOutcome {
    pub fn is_null(&self) -> bool {
        self.post_state.is_none()
    }
}

fn project(state: &QuditRegister, family: &ProjectorFamily, label: usize) -> Result<MeasurementOutcome> {
    let amps = apply_matrix(
        state.dims(),
        state.amplitudes(),
        &family.targets,
        &family.projectors[label],
    )?;
    let probability = norm_sqr(&amps);
    let post_state = if probability >= PROBABILITY_FLOOR {
        Some(QuditRegister::normalized(state.dims().clone(), amps)?)
    } else {
        None
    };
    Ok(MeasurementOutcome {
        label,
        probability,
        post_state,
    })
}

/// Every outcome with its exact Born probability.
pub fn branches(state: &QuditRegister, family: &ProjectorFamily) -> Result<Vec<MeasurementOutcome>> {
    let out = (0..family.len())
        .map(|label| project(state, family, label))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = out.iter().map(|o| o.probability).sum();
    debug_assert!((total - 1.0).abs() <= NORM_TOL, "branch probabilities sum to {total}");
    Ok(out)
}

/// Samples one outcome by the Born rule.
pub fn measure<R: Rng + ?Sized>(
    state: &QuditRegister,
    family: &ProjectorFamily,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    let live: Vec<MeasurementOutcome> = branches(state, family)?.into_iter().filter(|o| !o.is_null()).collect();
    let total: f64 = live.iter().map(|o| o.probability).sum();
    if live.is_empty() {
        return Err(Error::NumericDegeneracy(
            "every outcome is below the probability floor".into(),
        ));
    }
    let mut draw = rng.random::<f64>() * total;
    let last = live.len() - 1;
    for (i, outcome) in live.into_iter().enumerate() {
        if draw < outcome.probability || i == last {
            return Ok(outcome);
        }
        draw -= outcome.probability;
    }
    unreachable!("live outcome list is non-empty")
}

/// Born probability of a single outcome.
pub fn outcome_probability(state: &QuditRegister, family: &ProjectorFamily, label: usize) -> Result<f64> {
    if label >= family.len() {
        return Err(Error::invalid(format!(
            "outcome {label} of a {}-outcome measurement",
            family.len()
        )));
    }
    let amps = apply_matrix(
        state.dims(),
        state.amplitudes(),
        &family.targets,
        &family.projectors[label],
    )?;
    Ok(norm_sqr(&amps))
}

/// Projects onto a chosen outcome instead of sampling.
pub fn measure_forced(state: &QuditRegister, family: &ProjectorFamily, label: usize) -> Result<MeasurementOutcome> {
    if label >= family.len() {
        return Err(Error::invalid(format!(
            "outcome {label} of a {}-outcome measurement",
            family.len()
        )));
    }
    let outcome = project(state, family, label)?;
    if outcome.is_null() {
        return Err(Error::NumericDegeneracy(format!(
            "forced outcome {label} has probability {:e}",
            outcome.probability
        )));
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::ONE;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn basis_family(n: usize) -> ProjectorFamily {
        let ps = (0..n)
            .map(|k| CMatrix::from_fn(n, n, |r, c| if r == k && c == k { ONE } else { ZERO }))
            .collect();
        ProjectorFamily::new(vec![0], ps).unwrap()
    }

    #[test]
    fn eigenstate_is_deterministic() {
        let zero = QuditRegister::basis_state(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let out = measure(&zero, &basis_family(2), &mut rng).unwrap();
            assert_eq!(out.label, 0);
            assert_abs_diff_eq!(out.probability, 1.0);
            assert_eq!(out.post_state.unwrap(), zero);
        }
    }

    #[test]
    fn branches_of_basis_state() {
        let zero = QuditRegister::basis_state(2, 0).unwrap();
        let b = branches(&zero, &basis_family(2)).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].probability, 1.0);
        assert_eq!(b[0].post_state.as_ref().unwrap(), &zero);
        assert_eq!(b[1].probability, 0.0);
        assert!(b[1].is_null());
        assert!(measure_forced(&zero, &basis_family(2), 1).is_err());
    }

    #[test]
    fn symmetric_superposition_splits_evenly() {
        let plus = QuditRegister::from_amplitudes(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let b = branches(&plus, &basis_family(2)).unwrap();
        assert_abs_diff_eq!(b[0].probability, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1].probability, 0.5, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ones = (0..2000)
            .filter(|_| measure(&plus, &basis_family(2), &mut rng).unwrap().label == 1)
            .count();
        assert!((900..1100).contains(&ones), "{ones}");
    }

    #[test]
    fn incomplete_family_rejected_then_completed() {
        let p0 = CMatrix::from_fn(3, 3, |r, c| if r == 0 && c == 0 { ONE } else { ZERO });
        assert!(ProjectorFamily::new(vec![0], vec![p0.clone()]).is_err());
        let fam = ProjectorFamily::completed(vec![0], vec![p0]).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.residual_label(), Some(1));
        assert!(fam.defects().max() < 1e-12);
        assert_eq!(basis_family(3).residual_label(), None);
    }

    #[test]
    fn non_projector_rejected() {
        let half = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(ProjectorFamily::new(vec![0], vec![half.clone(), half]).is_err());
    }
}
