//! Exhaustive verification of the protocol.
//!
//! Every measurement branch is replayed with forced outcomes. Fidelities are
//! recomputed here from the returned output qudits, never taken from the
//! protocol's own bookkeeping, and the branch-wise input→output map is
//! assembled from basis-state runs to certify that each branch implements the
//! identity channel on the joint `d1·d2`-dimensional input space.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{OutcomeSource, OutcomeTuple, Protocol, ProtocolConfig, RegisterLayout as L};
use crate::qudit::{fidelity, random_state, CMatrix, QuditRegister, C64, ZERO};

/// Minimum fidelity every live branch must reach.
pub const FIDELITY_TOL: f64 = 1e-9;
/// Allowed deviation of marginal outcome probabilities from uniform.
pub const UNIFORMITY_TOL: f64 = 1e-9;
/// Allowed deviation of the total branch probability from 1.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Allowed entrywise deviation of a branch map from the identity.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Number of Haar-random input pairs in a certificate.
pub const RANDOM_PAIRS: usize = 8;

/// Configurations `(d1, d2, d)` certified by the acceptance sweep.
pub const ACCEPTANCE_SWEEP: [(usize, usize, usize); 11] = [
    (1, 1, 1),
    (1, 2, 2),
    (2, 1, 2),
    (2, 2, 4),
    (2, 3, 6),
    (3, 2, 6),
    (2, 2, 5),
    (2, 3, 7),
    (3, 3, 9),
    (2, 2, 6),
    (4, 2, 8),
];

/// One fully specified branch of the protocol for a fixed input pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchLeaf {
    pub outcomes: OutcomeTuple,
    pub probability: f64,
    /// `None` when the branch has probability below the sampling floor.
    pub fidelity_alpha: Option<f64>,
    pub fidelity_beta: Option<f64>,
}

impl BranchLeaf {
    pub fn is_degenerate(&self) -> bool {
        self.fidelity_alpha.is_none()
    }
}

/// Counter-based RNG split: independent streams per `(seed, stream)`.
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Replay {
    leaf: BranchLeaf,
    /// Joint output amplitudes `out[i + j·d1]` read off the final register.
    joint_output: Option<Vec<C64>>,
}

fn replay(protocol: &Protocol, alpha: &QuditRegister, beta: &QuditRegister, outcomes: OutcomeTuple) -> Result<Replay> {
    let config = protocol.config();
    let result = match protocol.run(alpha, beta, OutcomeSource::Forced(outcomes)) {
        Ok(r) => r,
        Err(Error::NumericDegeneracy(_)) => {
            return Ok(Replay {
                leaf: BranchLeaf {
                    outcomes,
                    probability: 0.0,
                    fidelity_alpha: None,
                    fidelity_beta: None,
                },
                joint_output: None,
            })
        }
        Err(e) => {
            return Err(Error::AtBranch {
                outcomes,
                source: Box::new(e),
            })
        }
    };
    let d = config.d();
    let fidelity_alpha = fidelity(&result.bob_out, &alpha.embed(d)?)?;
    let fidelity_beta = fidelity(&result.alice_out, &beta.embed(d)?)?;

    let dims = result.final_state.dims().clone();
    let (d1, d2) = (config.d1(), config.d2());
    let mut joint = vec![ZERO; d1 * d2];
    for (j, i) in (0..d2).flat_map(|j| (0..d1).map(move |i| (j, i))) {
        let mut digits = vec![0; dims.len()];
        digits[L::CHANNEL_2] = i;
        digits[L::CHANNEL_1] = j;
        joint[i + j * d1] = result.final_state.amplitude(&digits)?;
    }
    Ok(Replay {
        leaf: BranchLeaf {
            outcomes,
            probability: result.probability(),
            fidelity_alpha: Some(fidelity_alpha),
            fidelity_beta: Some(fidelity_beta),
        },
        joint_output: Some(joint),
    })
}

fn replay_all(protocol: &Protocol, alpha: &QuditRegister, beta: &QuditRegister) -> Result<Vec<Replay>> {
    OutcomeTuple::all(protocol.config())
        .into_par_iter()
        .map(|t| replay(protocol, alpha, beta, t))
        .collect()
}

/// One leaf per outcome tuple, in lexicographic `(k, k1, k2, m1, m2)` order.
pub fn enumerate_branches(
    config: &ProtocolConfig,
    alpha: &QuditRegister,
    beta: &QuditRegister,
) -> Result<Vec<BranchLeaf>> {
    let protocol = Protocol::new(*config)?;
    Ok(replay_all(&protocol, alpha, beta)?
        .into_iter()
        .map(|r| r.leaf)
        .collect())
}

type MarginalKey = Box<dyn Fn(&OutcomeTuple) -> usize>;

/// Largest deviation of each outcome marginal from the uniform distribution.
///
/// Keys are the message tags `k`, `k1`, `k2`, `m1`, `m2` plus the joint
/// pairs `k1k2` and `m1m2`; `k` appears only when the leaves carry a
/// tailoring outcome.
pub fn uniformity_report(config: &ProtocolConfig, leaves: &[BranchLeaf]) -> Result<BTreeMap<String, f64>> {
    if leaves.is_empty() {
        return Err(Error::invalid("uniformity of an empty leaf list"));
    }
    let (d1, d2, d) = (config.d1(), config.d2(), config.d());
    let mut marginals: Vec<(&str, usize, MarginalKey)> = vec![
        ("k1", d1, Box::new(|t| t.k1)),
        ("k2", d2, Box::new(|t| t.k2)),
        ("m1", d1, Box::new(|t| t.m1)),
        ("m2", d2, Box::new(|t| t.m2)),
        ("k1k2", d1 * d2, Box::new(move |t| t.k1 + t.k2 * d1)),
        ("m1m2", d1 * d2, Box::new(move |t| t.m1 + t.m2 * d1)),
    ];
    if leaves.iter().any(|l| l.outcomes.k.is_some()) {
        marginals.push(("k", d, Box::new(|t| t.k.unwrap_or(usize::MAX))));
    }
    let mut report = BTreeMap::new();
    for (name, n, key) in marginals {
        let mut marginal = vec![0.0; n];
        for leaf in leaves {
            let value = key(&leaf.outcomes);
            if value >= n {
                return Err(Error::invalid(format!(
                    "outcome {name}={value} out of range for {config}"
                )));
            }
            marginal[value] += leaf.probability;
        }
        // A one-outcome marginal is certain; total probability is checked
        // separately as completeness.
        if n == 1 {
            report.insert(name.to_string(), 0.0);
            continue;
        }
        let target = 1.0 / n as f64;
        let deviation = marginal.iter().map(|p| (p - target).abs()).fold(0.0, f64::max);
        report.insert(name.to_string(), deviation);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CertificateChecks {
    pub config_valid: bool,
    pub fidelity: bool,
    pub uniformity: bool,
    pub completeness: bool,
    pub identity_channel: bool,
}

/// Summary of an exhaustive verification run for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationCertificate {
    pub d1: usize,
    pub d2: usize,
    pub d: usize,
    pub seed: u64,
    pub input_pairs: usize,
    pub leaves_per_pair: usize,
    pub leaf_count: usize,
    pub min_fidelity: f64,
    pub uniformity: BTreeMap<String, f64>,
    pub max_uniformity_deviation: f64,
    pub max_completeness_error: f64,
    pub identity_channel_residual: f64,
    pub checks: CertificateChecks,
    pub passed: bool,
    pub error: Option<String>,
}

impl VerificationCertificate {
    fn failed(d1: usize, d2: usize, d: usize, seed: u64, config_valid: bool, error: &Error) -> Self {
        VerificationCertificate {
            d1,
            d2,
            d,
            seed,
            input_pairs: 0,
            leaves_per_pair: 0,
            leaf_count: 0,
            min_fidelity: 0.0,
            uniformity: BTreeMap::new(),
            max_uniformity_deviation: 0.0,
            max_completeness_error: 0.0,
            identity_channel_residual: 0.0,
            checks: CertificateChecks {
                config_valid,
                fidelity: false,
                uniformity: false,
                completeness: false,
                identity_channel: false,
            },
            passed: false,
            error: Some(error.to_string()),
        }
    }
}

fn pair_stream(config: &ProtocolConfig, pair: usize) -> u64 {
    ((config.d1() as u64) << 48) | ((config.d2() as u64) << 32) | ((config.d() as u64) << 16) | pair as u64
}

/// Haar-random teleportee pairs used by certificates; deterministic in `seed`.
pub fn random_pairs(config: &ProtocolConfig, seed: u64, count: usize) -> Result<Vec<(QuditRegister, QuditRegister)>> {
    (0..count)
        .map(|r| {
            let mut rng = derive_rng(seed, pair_stream(config, r));
            Ok((
                random_state(config.d1(), &mut rng)?,
                random_state(config.d2(), &mut rng)?,
            ))
        })
        .collect()
}

/// All computational-basis input pairs `(|i⟩, |j⟩)`, ordered by `i + j·d1`.
pub fn basis_pairs(config: &ProtocolConfig) -> Result<Vec<(QuditRegister, QuditRegister)>> {
    let (d1, d2) = (config.d1(), config.d2());
    (0..d1 * d2)
        .map(|col| {
            Ok((
                QuditRegister::basis_state(d1, col % d1)?,
                QuditRegister::basis_state(d2, col / d1)?,
            ))
        })
        .collect()
}

/// Certifies a configuration given as raw dimensions; configurations with
/// `d1·d2 > d` produce a failing certificate with `config_valid = false`.
pub fn verify_identity_channel(d1: usize, d2: usize, d: usize, seed: u64) -> VerificationCertificate {
    let config = match ProtocolConfig::new(d1, d2, d) {
        Ok(c) => c,
        Err(e) => return VerificationCertificate::failed(d1, d2, d, seed, false, &e),
    };
    certify(&config, seed).unwrap_or_else(|e| VerificationCertificate::failed(d1, d2, d, seed, true, &e))
}

/// Enumerates every branch for all basis input pairs and
/// [`RANDOM_PAIRS`] seeded Haar-random pairs, and checks unit fidelity,
/// outcome uniformity, probability completeness and the identity channel.
pub fn certify(config: &ProtocolConfig, seed: u64) -> Result<VerificationCertificate> {
    certify_inner(config, seed, false).map(|(cert, _)| cert)
}

/// Like [`certify`], also returning the leaves of every input pair (basis
/// pairs first, then random pairs).
pub fn certify_with_leaves(
    config: &ProtocolConfig,
    seed: u64,
) -> Result<(VerificationCertificate, Vec<Vec<BranchLeaf>>)> {
    certify_inner(config, seed, true)
}

fn certify_inner(
    config: &ProtocolConfig,
    seed: u64,
    keep_leaves: bool,
) -> Result<(VerificationCertificate, Vec<Vec<BranchLeaf>>)> {
    let basis = basis_pairs(config)?;
    let random = random_pairs(config, seed, RANDOM_PAIRS)?;
    let n_basis = basis.len();
    let protocol = Protocol::new(*config)?;

    let mut min_fidelity = f64::INFINITY;
    let mut uniformity: BTreeMap<String, f64> = BTreeMap::new();
    let mut max_completeness_error = 0.0_f64;
    let mut leaf_count = 0;
    let mut leaves_per_pair = 0;
    let mut basis_outputs: Vec<Vec<Option<Vec<C64>>>> = Vec::with_capacity(n_basis);
    let mut kept = Vec::new();

    for (index, (alpha, beta)) in basis.iter().chain(&random).enumerate() {
        let replays = replay_all(&protocol, alpha, beta)?;
        let leaves: Vec<BranchLeaf> = replays.iter().map(|r| r.leaf.clone()).collect();
        leaf_count += leaves.len();
        leaves_per_pair = leaves.len();
        for leaf in leaves.iter().filter(|l| !l.is_degenerate()) {
            min_fidelity = min_fidelity
                .min(leaf.fidelity_alpha.unwrap_or(0.0))
                .min(leaf.fidelity_beta.unwrap_or(0.0));
        }
        let total: f64 = leaves.iter().map(|l| l.probability).sum();
        max_completeness_error = max_completeness_error.max((total - 1.0).abs());
        for (tag, dev) in uniformity_report(config, &leaves)? {
            let slot = uniformity.entry(tag).or_insert(0.0);
            *slot = slot.max(dev);
        }
        if index < n_basis {
            basis_outputs.push(replays.into_iter().map(|r| r.joint_output).collect());
        }
        if keep_leaves {
            kept.push(leaves);
        }
    }

    if !min_fidelity.is_finite() {
        min_fidelity = 0.0;
    }
    let identity_channel_residual = identity_residual(config, &basis_outputs);
    let max_uniformity_deviation = uniformity.values().copied().fold(0.0, f64::max);
    let checks = CertificateChecks {
        config_valid: true,
        fidelity: min_fidelity >= 1.0 - FIDELITY_TOL,
        uniformity: max_uniformity_deviation <= UNIFORMITY_TOL,
        completeness: max_completeness_error <= COMPLETENESS_TOL,
        identity_channel: identity_channel_residual <= IDENTITY_TOL,
    };
    let passed = checks.fidelity && checks.uniformity && checks.completeness && checks.identity_channel;
    let certificate = VerificationCertificate {
        d1: config.d1(),
        d2: config.d2(),
        d: config.d(),
        seed,
        input_pairs: n_basis + random.len(),
        leaves_per_pair,
        leaf_count,
        min_fidelity,
        uniformity,
        max_uniformity_deviation,
        max_completeness_error,
        identity_channel_residual,
        checks,
        passed,
        error: None,
    };
    Ok((certificate, kept))
}

/// For each branch, stacks the joint outputs of all basis inputs into a
/// matrix, divides out its global phase, and returns the largest entrywise
/// distance from the identity over all branches.
fn identity_residual(config: &ProtocolConfig, basis_outputs: &[Vec<Option<Vec<C64>>>]) -> f64 {
    let n = config.dp();
    let branches = basis_outputs.first().map_or(0, Vec::len);
    let mut worst = 0.0_f64;
    for branch in 0..branches {
        let columns: Option<Vec<&Vec<C64>>> = basis_outputs.iter().map(|outs| outs[branch].as_ref()).collect();
        let Some(columns) = columns else { continue };
        let m = CMatrix::from_fn(n, n, |row, col| columns[col][row]);
        let trace = m.trace();
        if trace.norm() == 0.0 {
            return f64::INFINITY;
        }
        let phase = trace / trace.norm();
        let residual = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| {
                let expected = if r == c { C64::new(1.0, 0.0) } else { ZERO };
                (m[(r, c)] / phase - expected).norm()
            })
            .fold(0.0, f64::max);
        worst = worst.max(residual);
    }
    worst
}
