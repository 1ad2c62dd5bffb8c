//! Operator and measurement constructions for each protocol stage.
//!
//! Channel qudits are read as virtual pairs `c = j1 + j2·d1` on the block
//! `c < d1·d2`. Maps that the protocol only needs on part of the space are
//! completed to full unitaries: controlled modular subtraction for the
//! disentangling and ancilla-separation steps, generalized Pauli products for
//! the corrections, and the mixed-radix factor swap for the final rotation.
//! Every completion is the identity on channel levels `≥ d1·d2`.

use super::{Party, ProtocolConfig, RegisterLayout as L};
use crate::error::{Error, Result};
use crate::qudit::{
    factored_unitary, fourier_matrix, identity, pad_identity, pauli_x, pauli_z, CMatrix, LocalUnitary, ProjectorFamily,
    C64,
};

fn diagonal_projector(n: usize, keep: impl Fn(usize) -> bool) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| {
        if r == c && keep(r) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn sub_mod(a: usize, b: usize, n: usize) -> usize {
    (a + n - b % n) % n
}

fn check_outcome(value: usize, range: usize, what: &str) -> Result<()> {
    if value >= range {
        Err(Error::invalid(format!("{what} = {value} out of range 0..{range}")))
    } else {
        Ok(())
    }
}

/// `R_k = Σ_{n<dp} |n⟩|n+k mod d⟩⟨n+k mod d|⟨n|` on `[ancilla, channel₁]`
/// of the tailoring register, for `k = 0..d`.
pub fn tailoring_projectors(dp: usize, d: usize) -> Result<ProjectorFamily> {
    if dp == 0 || dp > d {
        return Err(Error::invalid(format!("ancilla dimension {dp} must be in 1..={d}")));
    }
    let projectors = (0..d)
        .map(|k| diagonal_projector(dp * d, |l| (l % dp + k) % d == l / dp))
        .collect();
    ProjectorFamily::completed(vec![L::ANCILLA, L::TAILOR_CHANNEL_1], projectors)
}

/// Returns the ancilla to `|0⟩` after tailoring outcome `k`:
/// `|a⟩|c⟩ ↦ |a ⊖ n⟩|c⟩` with `n = c − k mod d`, identity where `n ≥ dp`.
pub fn ancilla_separation(config: &ProtocolConfig, k: usize) -> Result<LocalUnitary> {
    let (dp, d) = (config.dp(), config.d());
    check_outcome(k, d, "k")?;
    let map: Vec<usize> = (0..dp * d)
        .map(|l| {
            let (a, c) = (l % dp, l / dp);
            let n = sub_mod(c, k, d);
            let a_out = if n < dp { sub_mod(a, n, dp) } else { a };
            a_out + c * dp
        })
        .collect();
    LocalUnitary::permutation(vec![L::ANCILLA, L::TAILOR_CHANNEL_1], &map, None)
}

/// `|i⟩ → |i − k⟩` on one channel qudit of the tailoring register.
pub fn channel_subtraction(config: &ProtocolConfig, party: Party, k: usize) -> Result<LocalUnitary> {
    check_outcome(k, config.d(), "k")?;
    let target = match party {
        Party::Alice => L::TAILOR_CHANNEL_1,
        Party::Bob => L::TAILOR_CHANNEL_2,
    };
    LocalUnitary::new(vec![target], pauli_x(config.d(), -(k as i64))?)
}

/// Alice's `P_{k1}` on `[teleportee₁, channel₁]` and Bob's `P_{k2}` on
/// `[teleportee₂, channel₂]`. Each family gets a residual projector onto
/// channel levels `≥ d1·d2` when the channel is larger than needed.
pub fn encoding_projectors(config: &ProtocolConfig) -> Result<(ProjectorFamily, ProjectorFamily)> {
    let (d1, d2, d, dp) = (config.d1(), config.d2(), config.d(), config.dp());
    let alice = (0..d1)
        .map(|k1| {
            diagonal_projector(d1 * d, |l| {
                let (j1, c) = (l % d1, l / d1);
                c < dp && c % d1 == (j1 + k1) % d1
            })
        })
        .collect();
    let bob = (0..d2)
        .map(|k2| {
            diagonal_projector(d2 * d, |l| {
                let (j2, c) = (l % d2, l / d2);
                c < dp && c / d1 == (j2 + k2) % d2
            })
        })
        .collect();
    Ok((
        ProjectorFamily::completed(vec![L::TELEPORTEE_1, L::CHANNEL_1], alice)?,
        ProjectorFamily::completed(vec![L::TELEPORTEE_2, L::CHANNEL_2], bob)?,
    ))
}

/// Undoes the encoding shifts on one channel qudit:
/// `(a ⊕₁ k1) + (b ⊕₂ k2)·d1 ↦ a + b·d1`.
pub fn relabel_unitary(config: &ProtocolConfig, party: Party, k1: usize, k2: usize) -> Result<LocalUnitary> {
    let (d1, d2, d, dp) = (config.d1(), config.d2(), config.d(), config.dp());
    check_outcome(k1, d1, "k1")?;
    check_outcome(k2, d2, "k2")?;
    let map: Vec<usize> = (0..d)
        .map(|s| {
            if s < dp {
                sub_mod(s % d1, k1, d1) + sub_mod(s / d1, k2, d2) * d1
            } else {
                s
            }
        })
        .collect();
    LocalUnitary::permutation(vec![L::channel(party)], &map, None)
}

/// Resets a teleportee to `|0⟩` using the copy of its index held in the
/// channel qudit: `|j⟩|c⟩ ↦ |j ⊖ f(c)⟩|c⟩`, with `f(c) = c mod d1` for
/// Alice and `f(c) = c div d1` for Bob (identity where that exceeds `d2`).
pub fn disentangle_teleportee(party: Party, config: &ProtocolConfig) -> Result<LocalUnitary> {
    let (d1, d2, d) = (config.d1(), config.d2(), config.d());
    let n = config.teleportee_dim(party);
    let map: Vec<usize> = (0..n * d)
        .map(|l| {
            let (j, c) = (l % n, l / n);
            let j_out = match party {
                Party::Alice => sub_mod(j, c % d1, d1),
                Party::Bob if c / d1 < d2 => sub_mod(j, c / d1, d2),
                Party::Bob => j,
            };
            j_out + c * n
        })
        .collect();
    LocalUnitary::permutation(vec![L::teleportee(party), L::channel(party)], &map, None)
}

/// Fourier transform on Alice's `j1` factor or Bob's `j2` factor of their
/// channel qudit.
pub fn decode_fourier(party: Party, config: &ProtocolConfig) -> Result<LocalUnitary> {
    let (d1, d2) = (config.d1(), config.d2());
    let block = match party {
        Party::Alice => factored_unitary(d1, d2, &fourier_matrix(d1)?, &identity(d2))?,
        Party::Bob => factored_unitary(d1, d2, &identity(d1), &fourier_matrix(d2)?)?,
    };
    LocalUnitary::new(vec![L::channel(party)], pad_identity(&block, config.d())?)
}

/// Alice's `Q_{m1}` (fixes `j1 = m1`) and Bob's `Q_{m2}` (fixes `j2 = m2`),
/// each on its own channel qudit, padded like [`encoding_projectors`].
pub fn decoding_projectors(config: &ProtocolConfig) -> Result<(ProjectorFamily, ProjectorFamily)> {
    let (d1, d2, d, dp) = (config.d1(), config.d2(), config.d(), config.dp());
    let alice = (0..d1)
        .map(|m1| diagonal_projector(d, |c| c < dp && c % d1 == m1))
        .collect();
    let bob = (0..d2)
        .map(|m2| diagonal_projector(d, |c| c < dp && c / d1 == m2))
        .collect();
    Ok((
        ProjectorFamily::completed(vec![L::CHANNEL_1], alice)?,
        ProjectorFamily::completed(vec![L::CHANNEL_2], bob)?,
    ))
}

/// `U1 = X^{-m1} ⊗ Z^{-m2}` on Alice's channel qudit and
/// `U2 = Z^{-m1} ⊗ X^{-m2}` on Bob's, factors ordered `(j1, j2)`.
pub fn correction_unitaries(config: &ProtocolConfig, m1: usize, m2: usize) -> Result<(LocalUnitary, LocalUnitary)> {
    let (d1, d2, d) = (config.d1(), config.d2(), config.d());
    check_outcome(m1, d1, "m1")?;
    check_outcome(m2, d2, "m2")?;
    let (m1, m2) = (m1 as i64, m2 as i64);
    let u1 = factored_unitary(d1, d2, &pauli_x(d1, -m1)?, &pauli_z(d2, -m2)?)?;
    let u2 = factored_unitary(d1, d2, &pauli_z(d1, -m1)?, &pauli_x(d2, -m2)?)?;
    Ok((
        LocalUnitary::new(vec![L::CHANNEL_1], pad_identity(&u1, d)?)?,
        LocalUnitary::new(vec![L::CHANNEL_2], pad_identity(&u2, d)?)?,
    ))
}

/// Alice's basis rotation `|j2·d1⟩ ↦ |j2⟩`, completed as the factor swap
/// `j1 + j2·d1 ↦ j2 + j1·d2`.
pub fn final_rotation(config: &ProtocolConfig) -> Result<LocalUnitary> {
    let (d1, d2, d, dp) = (config.d1(), config.d2(), config.d(), config.dp());
    let map: Vec<usize> = (0..d)
        .map(|s| if s < dp { s / d1 + (s % d1) * d2 } else { s })
        .collect();
    LocalUnitary::permutation(vec![L::CHANNEL_1], &map, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{unitarity_defect, ONE, ZERO};

    fn cfg(d1: usize, d2: usize, d: usize) -> ProtocolConfig {
        ProtocolConfig::new(d1, d2, d).unwrap()
    }

    /// Image of basis level `s` under a permutation-like matrix.
    fn image(m: &CMatrix, s: usize) -> (usize, C64) {
        let col = m.column(s);
        let (row, v) = col.iter().enumerate().find(|(_, v)| v.norm() > 0.5).unwrap();
        (row, *v)
    }

    fn diag_support(p: &CMatrix) -> Vec<usize> {
        (0..p.nrows()).filter(|&i| p[(i, i)] == ONE).collect()
    }

    #[test]
    fn tailoring_projector_examples() {
        let f = tailoring_projectors(1, 1).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.projectors()[0], identity(1));

        let f = tailoring_projectors(1, 2).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.residual_label(), None);
        assert_eq!(diag_support(&f.projectors()[0]), vec![0]);
        assert_eq!(diag_support(&f.projectors()[1]), vec![1]);

        let f = tailoring_projectors(2, 3).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.residual_label(), None);
        let ranks: Vec<usize> = f.projectors().iter().map(|p| diag_support(p).len()).collect();
        assert_eq!(ranks, vec![2, 2, 2]);
        assert!(tailoring_projectors(3, 2).is_err());
    }

    #[test]
    fn encoding_projector_examples() {
        let (alice, bob) = encoding_projectors(&cfg(1, 2, 2)).unwrap();
        assert_eq!(alice.len(), 1);
        assert_eq!(bob.len(), 2);

        let (alice, bob) = encoding_projectors(&cfg(2, 2, 4)).unwrap();
        // local index j1 + 2·c: {(0,0),(0,2),(1,1),(1,3)}
        assert_eq!(diag_support(&alice.projectors()[0]), vec![0, 3, 4, 7]);
        assert_eq!(alice.residual_label(), None);
        for p in alice.projectors().iter().chain(bob.projectors()) {
            assert_eq!(diag_support(p).len(), 4);
        }

        let (alice, bob) = encoding_projectors(&cfg(2, 2, 5)).unwrap();
        assert_eq!(alice.len(), 3);
        assert_eq!(bob.residual_label(), Some(2));
    }

    #[test]
    fn relabel_examples() {
        let c = cfg(2, 2, 4);
        assert_eq!(relabel_unitary(&c, Party::Alice, 0, 0).unwrap().matrix(), &identity(4));
        let swap = relabel_unitary(&c, Party::Alice, 1, 0).unwrap();
        let images: Vec<usize> = (0..4).map(|s| image(swap.matrix(), s).0).collect();
        assert_eq!(images, vec![1, 0, 3, 2]);
        let both = relabel_unitary(&c, Party::Bob, 1, 1).unwrap();
        let images: Vec<usize> = (0..4).map(|s| image(both.matrix(), s).0).collect();
        assert_eq!(images, vec![3, 2, 1, 0]);
        assert_eq!(both.targets(), &[L::CHANNEL_2]);
        assert!(relabel_unitary(&c, Party::Alice, 2, 0).is_err());
        // upper levels untouched
        let padded = relabel_unitary(&cfg(2, 2, 6), Party::Alice, 1, 1).unwrap();
        assert_eq!(image(padded.matrix(), 4).0, 4);
        assert_eq!(image(padded.matrix(), 5).0, 5);
    }

    #[test]
    fn disentangle_examples() {
        let trivial = disentangle_teleportee(Party::Alice, &cfg(1, 3, 3)).unwrap();
        assert_eq!(trivial.matrix(), &identity(3));
        let alice = disentangle_teleportee(Party::Alice, &cfg(2, 2, 4)).unwrap();
        // local index j + 2·c
        assert_eq!(image(alice.matrix(), 1 + 2).0, 2);
        assert_eq!(image(alice.matrix(), 2).0, 1 + 2);
        let bob = disentangle_teleportee(Party::Bob, &cfg(2, 3, 7)).unwrap();
        // c = 1 + 2·2 = 5 holds j2 = 2: |2⟩|5⟩ ↦ |0⟩|5⟩
        assert_eq!(image(bob.matrix(), 2 + 3 * 5).0, 3 * 5);
        // c = 6 ≥ dp: identity
        assert_eq!(image(bob.matrix(), 1 + 3 * 6).0, 1 + 3 * 6);
    }

    #[test]
    fn fourier_examples() {
        let c = cfg(1, 2, 2);
        assert_eq!(decode_fourier(Party::Alice, &c).unwrap().matrix(), &identity(2));
        let h = decode_fourier(Party::Alice, &cfg(2, 1, 2)).unwrap();
        assert!(crate::qudit::max_abs_diff(h.matrix(), &fourier_matrix(2).unwrap()) < 1e-15);
        let f = decode_fourier(Party::Alice, &cfg(2, 2, 4)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // column j1=1, j2=1 (index 3) → (|0+2⟩ − |1+2⟩)/√2
        assert!((f.matrix()[(2, 3)] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((f.matrix()[(3, 3)] - C64::new(-s, 0.0)).norm() < 1e-15);
        assert_eq!(f.matrix()[(0, 3)], ZERO);
    }

    #[test]
    fn decoding_projector_examples() {
        let (alice, bob) = decoding_projectors(&cfg(2, 2, 4)).unwrap();
        assert_eq!(diag_support(&alice.projectors()[0]), vec![0, 2]);
        assert_eq!(diag_support(&bob.projectors()[1]), vec![2, 3]);
        let (alice, _) = decoding_projectors(&cfg(1, 2, 3)).unwrap();
        assert_eq!(diag_support(&alice.projectors()[0]), vec![0, 1]);
        assert_eq!(alice.residual_label(), Some(1));
    }

    #[test]
    fn correction_examples() {
        let c = cfg(2, 2, 4);
        let (u1, u2) = correction_unitaries(&c, 0, 0).unwrap();
        assert_eq!(u1.matrix(), &identity(4));
        assert_eq!(u2.matrix(), &identity(4));
        let (u1, _) = correction_unitaries(&c, 1, 0).unwrap();
        let images: Vec<(usize, C64)> = (0..4).map(|s| image(u1.matrix(), s)).collect();
        assert_eq!(images, vec![(1, ONE), (0, ONE), (3, ONE), (2, ONE)]);
        let (u1, _) = correction_unitaries(&c, 0, 1).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| u1.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        assert!(correction_unitaries(&c, 0, 2).is_err());
    }

    #[test]
    fn final_rotation_examples() {
        assert_eq!(final_rotation(&cfg(1, 3, 3)).unwrap().matrix(), &identity(3));
        assert_eq!(final_rotation(&cfg(3, 1, 4)).unwrap().matrix(), &identity(4));
        let v = final_rotation(&cfg(2, 2, 4)).unwrap();
        let images: Vec<usize> = (0..4).map(|s| image(v.matrix(), s).0).collect();
        assert_eq!(images, vec![0, 2, 1, 3]);
        let v = final_rotation(&cfg(2, 3, 6)).unwrap();
        assert_eq!(image(v.matrix(), 2).0, 1);
        assert_eq!(image(v.matrix(), 4).0, 2);
    }

    #[test]
    fn ancilla_separation_is_unitary_and_resets() {
        let c = cfg(1, 2, 3);
        for k in 0..3 {
            let u = ancilla_separation(&c, k).unwrap();
            assert!(unitarity_defect(u.matrix()) < 1e-12);
            // |n⟩|n+k⟩ ↦ |0⟩|n+k⟩
            for n in 0..2 {
                let ch = (n + k) % 3;
                assert_eq!(image(u.matrix(), n + 2 * ch).0, 2 * ch);
            }
        }
    }
}
