//! Reference states built directly from the protocol's closed-form
//! expressions, by summing amplitudes over explicit index tuples. Nothing
//! here goes through the library's operators or measurements.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::TAU;

use qudit_teleport::protocol::ProtocolConfig;
use qudit_teleport::qudit::{Dims, QuditRegister, C64};

pub fn omega(n: usize, power: usize) -> C64 {
    C64::from_polar(1.0, TAU * ((power % n) as f64) / n as f64)
}

/// Accumulates amplitudes on `[t1, c1, t2, c2]` and normalizes.
pub struct Builder {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl Builder {
    pub fn new(dims: &[usize]) -> Self {
        Builder {
            dims: dims.to_vec(),
            amps: vec![C64::new(0.0, 0.0); dims.iter().product()],
        }
    }

    pub fn add(&mut self, digits: &[usize], amp: C64) {
        let mut index = 0;
        let mut stride = 1;
        for (&digit, &d) in digits.iter().zip(&self.dims) {
            assert!(digit < d);
            index += digit * stride;
            stride *= d;
        }
        self.amps[index] += amp;
    }

    pub fn build(self) -> QuditRegister {
        QuditRegister::normalized(Dims::new(self.dims).unwrap(), self.amps).unwrap()
    }
}

fn layout(c: &ProtocolConfig) -> Vec<usize> {
    vec![c.d1(), c.d(), c.d2(), c.d()]
}

/// State after both encoding measurements with results `(k1, k2)`.
pub fn after_encoding(c: &ProtocolConfig, alpha: &[C64], beta: &[C64], k1: usize, k2: usize) -> QuditRegister {
    let (d1, d2) = (c.d1(), c.d2());
    let mut b = Builder::new(&layout(c));
    for j1 in 0..d1 {
        for j2 in 0..d2 {
            let s = (j1 + k1) % d1 + ((j2 + k2) % d2) * d1;
            b.add(&[j1, s, j2, s], alpha[j1] * beta[j2]);
        }
    }
    b.build()
}

/// State after both channel qudits are relabelled.
pub fn after_relabel(c: &ProtocolConfig, alpha: &[C64], beta: &[C64]) -> QuditRegister {
    after_encoding(c, alpha, beta, 0, 0)
}

/// Teleportees reset to `|0⟩`; the channel carries `Σ α_{j1} β_{j2} |j⟩|j⟩`.
pub fn encoded_channel(c: &ProtocolConfig, alpha: &[C64], beta: &[C64]) -> QuditRegister {
    let (d1, d2) = (c.d1(), c.d2());
    let mut b = Builder::new(&layout(c));
    for j1 in 0..d1 {
        for j2 in 0..d2 {
            let s = j1 + j2 * d1;
            b.add(&[0, s, 0, s], alpha[j1] * beta[j2]);
        }
    }
    b.build()
}

/// After both partial Fourier transforms.
pub fn after_fourier(c: &ProtocolConfig, alpha: &[C64], beta: &[C64]) -> QuditRegister {
    let (d1, d2) = (c.d1(), c.d2());
    let mut b = Builder::new(&layout(c));
    for m1 in 0..d1 {
        for j1 in 0..d1 {
            for m2 in 0..d2 {
                for j2 in 0..d2 {
                    let amp = alpha[j1] * beta[j2] * omega(d1, m1 * j1) * omega(d2, m2 * j2);
                    b.add(&[0, m1 + j2 * d1, 0, j1 + m2 * d1], amp);
                }
            }
        }
    }
    b.build()
}

/// After the decoding measurements with results `(m1, m2)`.
pub fn after_decoding_measurement(
    c: &ProtocolConfig,
    alpha: &[C64],
    beta: &[C64],
    m1: usize,
    m2: usize,
) -> QuditRegister {
    let (d1, d2) = (c.d1(), c.d2());
    let mut b = Builder::new(&layout(c));
    for j1 in 0..d1 {
        for j2 in 0..d2 {
            let amp = alpha[j1] * beta[j2] * omega(d1, m1 * j1) * omega(d2, m2 * j2);
            b.add(&[0, m1 + j2 * d1, 0, j1 + m2 * d1], amp);
        }
    }
    b.build()
}

/// After the corrections: Alice holds `Σ β_{j2} |j2·d1⟩`, Bob `Σ α_{j1} |j1⟩`.
pub fn after_correction(c: &ProtocolConfig, alpha: &[C64], beta: &[C64]) -> QuditRegister {
    let (d1, d2) = (c.d1(), c.d2());
    let mut b = Builder::new(&layout(c));
    for j1 in 0..d1 {
        for j2 in 0..d2 {
            b.add(&[0, j2 * d1, 0, j1], alpha[j1] * beta[j2]);
        }
    }
    b.build()
}

/// After Alice's final basis rotation.
pub fn after_rotation(c: &ProtocolConfig, alpha: &[C64], beta: &[C64]) -> QuditRegister {
    let (d1, d2) = (c.d1(), c.d2());
    let mut b = Builder::new(&layout(c));
    for j1 in 0..d1 {
        for j2 in 0..d2 {
            b.add(&[0, j2, 0, j1], alpha[j1] * beta[j2]);
        }
    }
    b.build()
}

/// Tailoring by hand on `(ancilla, c1, c2)` amplitude triples for outcome
/// `k`: project with `R_k`, reset the ancilla, subtract `k` on both channel
/// qudits. Returns the normalized `[c1, c2]` state and the outcome
/// probability.
pub fn tailor_by_hand(dp: usize, d: usize, k: usize) -> (QuditRegister, f64) {
    // |φ⟩|Ψ⟩ amplitudes on (n, i, i)
    let amp = 1.0 / ((dp * d) as f64).sqrt();
    let mut projected: Vec<(usize, usize, usize, f64)> = Vec::new();
    for n in 0..dp {
        for i in 0..d {
            if i == (n + k) % d {
                projected.push((n, i, i, amp));
            }
        }
    }
    let probability: f64 = projected.iter().map(|t| t.3 * t.3).sum();
    let mut b = Builder::new(&[d, d]);
    for (n, c1, c2, a) in projected {
        assert_eq!(c1, (n + k) % d);
        // ancilla |n⟩ → |0⟩, then |i⟩ → |i − k⟩ on both
        b.add(&[(c1 + d - k) % d, (c2 + d - k) % d], C64::new(a, 0.0));
    }
    (b.build(), probability)
}

/// `(1/√dp) Σ_{i<dp} |i⟩|i⟩` on two d-level qudits.
pub fn small_channel(dp: usize, d: usize) -> QuditRegister {
    let mut b = Builder::new(&[d, d]);
    for i in 0..dp {
        b.add(&[i, i], C64::new(1.0, 0.0));
    }
    b.build()
}

/// `⟨ψ|P|ψ⟩` for a projector given as a predicate on digit tuples.
pub fn expectation(state: &QuditRegister, keep: impl Fn(&[usize]) -> bool) -> f64 {
    let dims = state.dims();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(&dims.digits(*i)))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}
