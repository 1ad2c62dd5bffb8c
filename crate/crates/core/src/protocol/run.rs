use std::fmt;

use rand::RngCore;
use serde::Serialize;

use super::operators::*;
use super::transcript::{ClassicalMessage, MessageTag, ProtocolTranscript, StageEntry};
use super::{Party, ProtocolConfig, RegisterLayout as L, Stage};
use crate::error::{Error, Result};
use crate::qudit::{
    apply_local, factor_out, fidelity, fourier_matrix, is_product, measure, measure_forced, outcome_probability,
    tensor, Dims, LocalUnitary, MeasurementOutcome, ProjectorFamily, QuditRegister, C64, NORM_TOL, PROBABILITY_FLOOR,
    ZERO,
};

/// Measurement results of one protocol branch. `k` is present only when the
/// channel needs tailoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OutcomeTuple {
    pub k: Option<usize>,
    pub k1: usize,
    pub k2: usize,
    pub m1: usize,
    pub m2: usize,
}

impl OutcomeTuple {
    pub fn get(&self, tag: MessageTag) -> Option<usize> {
        match tag {
            MessageTag::K => self.k,
            MessageTag::K1 => Some(self.k1),
            MessageTag::K2 => Some(self.k2),
            MessageTag::M1 => Some(self.m1),
            MessageTag::M2 => Some(self.m2),
        }
    }

    /// Every outcome tuple of a configuration, in lexicographic order
    /// `(k, k1, k2, m1, m2)`.
    pub fn all(config: &ProtocolConfig) -> Vec<OutcomeTuple> {
        let ks: Vec<Option<usize>> = if config.needs_tailoring() {
            (0..config.d()).map(Some).collect()
        } else {
            vec![None]
        };
        let (d1, d2) = (config.d1(), config.d2());
        let mut out = Vec::with_capacity(ks.len() * d1 * d1 * d2 * d2);
        for k in ks {
            for k1 in 0..d1 {
                for k2 in 0..d2 {
                    for m1 in 0..d1 {
                        for m2 in 0..d2 {
                            out.push(OutcomeTuple { k, k1, k2, m1, m2 });
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for OutcomeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            Some(k) => write!(f, "(k={k}, ")?,
            None => write!(f, "(")?,
        }
        write!(f, "k1={}, k2={}, m1={}, m2={})", self.k1, self.k2, self.m1, self.m2)
    }
}

/// Where measurement results come from: Born-rule sampling, or a fixed
/// branch for exhaustive replay.
pub enum OutcomeSource<'a> {
    Sampled(&'a mut dyn RngCore),
    Forced(OutcomeTuple),
}

impl OutcomeSource<'_> {
    fn resolve(
        &mut self,
        config: &ProtocolConfig,
        state: &QuditRegister,
        family: &ProjectorFamily,
        tag: MessageTag,
        stage: Stage,
    ) -> Result<MeasurementOutcome> {
        let outcome = match self {
            OutcomeSource::Sampled(rng) => measure(state, family, &mut **rng)?,
            OutcomeSource::Forced(tuple) => {
                let label = tuple
                    .get(tag)
                    .ok_or_else(|| Error::invalid(format!("forced outcomes lack {tag}")))?;
                if label >= tag.range(config) {
                    return Err(Error::invalid(format!("forced {tag} = {label} out of range")));
                }
                measure_forced(state, family, label)?
            }
        };
        if let Some(residual) = family.residual_label() {
            let p = outcome_probability(state, family, residual)?;
            if outcome.label == residual || p > PROBABILITY_FLOOR {
                return Err(Error::invariant(
                    stage,
                    format!("{tag} measurement has weight {p:e} outside the d1*d2 block"),
                ));
            }
        }
        Ok(outcome)
    }
}

/// Output of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    /// Alice's channel qudit; holds `|β⟩` on its lowest `d2` levels.
    pub alice_out: QuditRegister,
    /// Bob's channel qudit; holds `|α⟩` on its lowest `d1` levels.
    pub bob_out: QuditRegister,
    pub fidelity_alpha: f64,
    pub fidelity_beta: f64,
    /// Full register `[teleportee₁, channel₁, teleportee₂, channel₂]` at the end.
    pub final_state: QuditRegister,
    pub transcript: ProtocolTranscript,
}

impl ProtocolResult {
    pub fn outcomes(&self) -> OutcomeTuple {
        let value = |tag| {
            self.transcript
                .messages()
                .iter()
                .find(|m| m.tag == tag)
                .map(|m| m.value)
        };
        OutcomeTuple {
            k: value(MessageTag::K),
            k1: value(MessageTag::K1).unwrap_or(0),
            k2: value(MessageTag::K2).unwrap_or(0),
            m1: value(MessageTag::M1).unwrap_or(0),
            m2: value(MessageTag::M2).unwrap_or(0),
        }
    }

    /// Probability of the branch that was taken.
    pub fn probability(&self) -> f64 {
        self.transcript.leaf_probability()
    }
}

/// `(1/√d) Σ_i |i⟩|i⟩` on two d-level qudits.
pub fn prepare_channel(d: usize) -> Result<QuditRegister> {
    if d == 0 {
        return Err(Error::invalid("channel dimension must be positive"));
    }
    let dims = Dims::new(vec![d, d])?;
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; d * d];
    for i in 0..d {
        amps[i + i * d] = amp;
    }
    QuditRegister::new(dims, amps)
}

/// Uniform superposition on `dp` levels, prepared as `F_dp |0⟩`.
pub fn prepare_ancilla(dp: usize) -> Result<QuditRegister> {
    let zero = QuditRegister::basis_state(dp, 0)?;
    apply_local(&zero, &LocalUnitary::new(vec![0], fourier_matrix(dp)?)?)
}

fn apply(state: &QuditRegister, u: &LocalUnitary, stage: Stage) -> Result<QuditRegister> {
    apply_local(state, u).map_err(|e| Error::invariant(stage, e.to_string()))
}

fn send(transcript: &mut ProtocolTranscript, config: &ProtocolConfig, tag: MessageTag, value: usize) -> Result<()> {
    transcript.send(ClassicalMessage::new(config, tag, value)?)
}

/// Outcome-independent operators of one configuration, built and validated
/// once and shared by every run.
#[derive(Debug, Clone)]
pub struct Protocol {
    config: ProtocolConfig,
    tailoring: Option<ProjectorFamily>,
    encoding: (ProjectorFamily, ProjectorFamily),
    disentangle: (LocalUnitary, LocalUnitary),
    fourier: (LocalUnitary, LocalUnitary),
    decoding: (ProjectorFamily, ProjectorFamily),
    rotation: LocalUnitary,
    channel: QuditRegister,
}

impl Protocol {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        let tailoring = if config.needs_tailoring() {
            Some(tailoring_projectors(config.dp(), config.d())?)
        } else {
            None
        };
        Ok(Protocol {
            tailoring,
            encoding: encoding_projectors(&config)?,
            disentangle: (
                disentangle_teleportee(Party::Alice, &config)?,
                disentangle_teleportee(Party::Bob, &config)?,
            ),
            fourier: (
                decode_fourier(Party::Alice, &config)?,
                decode_fourier(Party::Bob, &config)?,
            ),
            decoding: decoding_projectors(&config)?,
            rotation: final_rotation(&config)?,
            channel: prepare_channel(config.d())?,
            config,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    /// See [`tailor_channel`].
    pub fn tailor(
        &self,
        channel: &QuditRegister,
        outcomes: &mut OutcomeSource<'_>,
        transcript: &mut ProtocolTranscript,
    ) -> Result<QuditRegister> {
        let config = &self.config;
        if channel.dims() != self.channel.dims() || fidelity(channel, &self.channel)? < 1.0 - NORM_TOL {
            return Err(Error::invalid(
                "tailoring expects the maximally entangled d-level channel",
            ));
        }
        let Some(family) = &self.tailoring else {
            if let OutcomeSource::Forced(OutcomeTuple { k: Some(_), .. }) = outcomes {
                return Err(Error::invalid(
                    "forced tailoring outcome for a channel that needs no tailoring",
                ));
            }
            transcript.record(StageEntry {
                stage: Stage::Tailoring,
                outcomes: vec![],
                probabilities: vec![],
                snapshot: channel.clone(),
            });
            return Ok(channel.clone());
        };

        let dp = config.dp();
        let joint = tensor(&prepare_ancilla(dp)?, channel);
        let measured = outcomes.resolve(config, &joint, family, MessageTag::K, Stage::Tailoring)?;
        let k = measured.label;
        let mut state = measured.post_state.expect("resolved outcomes carry a state");
        send(transcript, config, MessageTag::K, k)?;

        state = apply(&state, &ancilla_separation(config, k)?, Stage::Tailoring)?;
        state = apply(&state, &channel_subtraction(config, Party::Alice, k)?, Stage::Tailoring)?;
        let k_bob = transcript.received(Party::Bob, MessageTag::K)?;
        state = apply(
            &state,
            &channel_subtraction(config, Party::Bob, k_bob)?,
            Stage::Tailoring,
        )?;

        let (ancilla, tailored) =
            factor_out(&state, L::ANCILLA).map_err(|e| Error::invariant(Stage::Tailoring, e.to_string()))?;
        if fidelity(&ancilla, &QuditRegister::basis_state(dp, 0)?)? < 1.0 - NORM_TOL {
            return Err(Error::invariant(Stage::Tailoring, "ancilla not returned to |0>"));
        }
        transcript.record(StageEntry {
            stage: Stage::Tailoring,
            outcomes: vec![k],
            probabilities: vec![measured.probability],
            snapshot: tailored.clone(),
        });
        Ok(tailored)
    }

    /// See [`run_protocol`].
    pub fn run(
        &self,
        alpha: &QuditRegister,
        beta: &QuditRegister,
        mut outcomes: OutcomeSource<'_>,
    ) -> Result<ProtocolResult> {
        let config = &self.config;
        let (d1, d2, d) = (config.d1(), config.d2(), config.d());
        if alpha.dims().as_slice() != [d1] || beta.dims().as_slice() != [d2] {
            return Err(Error::invalid(format!(
                "teleportees {} and {} do not match {config}",
                alpha.dims(),
                beta.dims()
            )));
        }
        if let OutcomeSource::Forced(OutcomeTuple { k: None, .. }) = outcomes {
            if config.needs_tailoring() {
                return Err(Error::invalid(format!(
                    "forced outcomes for {config} need a tailoring outcome k"
                )));
            }
        }
        let mut transcript = ProtocolTranscript::new();

        let channel = self.tailor(&self.channel, &mut outcomes, &mut transcript)?;
        // [t1, c1, c2] ⊗ t2 → [t1, c1, t2, c2]
        let mut state = tensor(&tensor(alpha, &channel), beta).permute_subsystems(&[0, 1, 3, 2])?;

        // Encoding.
        let (p_alice, p_bob) = &self.encoding;
        let a = outcomes.resolve(config, &state, p_alice, MessageTag::K1, Stage::Encoding)?;
        state = a.post_state.expect("resolved outcomes carry a state");
        send(&mut transcript, config, MessageTag::K1, a.label)?;
        let b = outcomes.resolve(config, &state, p_bob, MessageTag::K2, Stage::Encoding)?;
        state = b.post_state.expect("resolved outcomes carry a state");
        send(&mut transcript, config, MessageTag::K2, b.label)?;
        transcript.record(StageEntry {
            stage: Stage::Encoding,
            outcomes: vec![a.label, b.label],
            probabilities: vec![a.probability, b.probability],
            snapshot: state.clone(),
        });

        let k2_at_alice = transcript.received(Party::Alice, MessageTag::K2)?;
        let k1_at_bob = transcript.received(Party::Bob, MessageTag::K1)?;
        state = apply(
            &state,
            &relabel_unitary(config, Party::Alice, a.label, k2_at_alice)?,
            Stage::Relabel,
        )?;
        state = apply(
            &state,
            &relabel_unitary(config, Party::Bob, k1_at_bob, b.label)?,
            Stage::Relabel,
        )?;
        record_unitary_stage(&mut transcript, Stage::Relabel, &state);

        state = apply(&state, &self.disentangle.0, Stage::Disentangle)?;
        state = apply(&state, &self.disentangle.1, Stage::Disentangle)?;
        let reset_weight = teleportees_reset_weight(&state);
        if reset_weight < 1.0 - NORM_TOL {
            return Err(Error::invariant(
                Stage::Disentangle,
                format!("teleportees only {reset_weight} in |0>|0>"),
            ));
        }
        record_unitary_stage(&mut transcript, Stage::Disentangle, &state);

        // Decoding.
        state = apply(&state, &self.fourier.0, Stage::DecodingFourier)?;
        state = apply(&state, &self.fourier.1, Stage::DecodingFourier)?;
        record_unitary_stage(&mut transcript, Stage::DecodingFourier, &state);

        let (q_alice, q_bob) = &self.decoding;
        let a = outcomes.resolve(config, &state, q_alice, MessageTag::M1, Stage::DecodingMeasurement)?;
        state = a.post_state.expect("resolved outcomes carry a state");
        send(&mut transcript, config, MessageTag::M1, a.label)?;
        let b = outcomes.resolve(config, &state, q_bob, MessageTag::M2, Stage::DecodingMeasurement)?;
        state = b.post_state.expect("resolved outcomes carry a state");
        send(&mut transcript, config, MessageTag::M2, b.label)?;
        if !is_product(&state, &[L::TELEPORTEE_1, L::CHANNEL_1])?.is_product {
            return Err(Error::invariant(
                Stage::DecodingMeasurement,
                "Alice and Bob still entangled",
            ));
        }
        transcript.record(StageEntry {
            stage: Stage::DecodingMeasurement,
            outcomes: vec![a.label, b.label],
            probabilities: vec![a.probability, b.probability],
            snapshot: state.clone(),
        });

        let (u1, _) = correction_unitaries(config, a.label, transcript.received(Party::Alice, MessageTag::M2)?)?;
        let (_, u2) = correction_unitaries(config, transcript.received(Party::Bob, MessageTag::M1)?, b.label)?;
        state = apply(&state, &u1, Stage::Correction)?;
        state = apply(&state, &u2, Stage::Correction)?;
        record_unitary_stage(&mut transcript, Stage::Correction, &state);

        state = apply(&state, &self.rotation, Stage::FinalRotation)?;
        record_unitary_stage(&mut transcript, Stage::FinalRotation, &state);

        let extract = |e: Error| Error::invariant(Stage::FinalRotation, e.to_string());
        let (bob_out, rest) = factor_out(&state, L::CHANNEL_2).map_err(extract)?;
        let (alice_out, _) = factor_out(&rest, L::CHANNEL_1).map_err(extract)?;
        let fidelity_alpha = fidelity(&bob_out, &alpha.embed(d)?)?;
        let fidelity_beta = fidelity(&alice_out, &beta.embed(d)?)?;

        Ok(ProtocolResult {
            alice_out,
            bob_out,
            fidelity_alpha,
            fidelity_beta,
            final_state: state,
            transcript,
        })
    }
}

/// Converts the `d`-level channel into a `d1·d2`-level maximally entangled
/// pair on the lowest levels of each channel qudit.
///
/// Alice measures `R_k` on a uniform ancilla and her channel qudit, resets the
/// ancilla, and both parties shift their channel qudit down by `k`. When
/// `d1·d2 = d` the stage is recorded with no outcomes and leaves the channel
/// untouched.
pub fn tailor_channel(
    channel: &QuditRegister,
    config: &ProtocolConfig,
    outcomes: &mut OutcomeSource<'_>,
    transcript: &mut ProtocolTranscript,
) -> Result<QuditRegister> {
    Protocol::new(*config)?.tailor(channel, outcomes, transcript)
}

/// Runs tailoring (when needed), encoding and decoding, teleporting `alpha`
/// from Alice to Bob and `beta` from Bob to Alice. Builds a fresh
/// [`Protocol`]; reuse one directly when running many branches.
pub fn run_protocol(
    config: &ProtocolConfig,
    alpha: &QuditRegister,
    beta: &QuditRegister,
    outcomes: OutcomeSource<'_>,
) -> Result<ProtocolResult> {
    Protocol::new(*config)?.run(alpha, beta, outcomes)
}

fn record_unitary_stage(transcript: &mut ProtocolTranscript, stage: Stage, state: &QuditRegister) {
    transcript.record(StageEntry {
        stage,
        outcomes: vec![],
        probabilities: vec![],
        snapshot: state.clone(),
    });
}

fn teleportees_reset_weight(state: &QuditRegister) -> f64 {
    let dims = state.dims();
    let strides = dims.strides();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            (i / strides[L::TELEPORTEE_1]).is_multiple_of(dims[L::TELEPORTEE_1])
                && (i / strides[L::TELEPORTEE_2]).is_multiple_of(dims[L::TELEPORTEE_2])
        })
        .map(|(_, a)| a.norm_sqr())
        .sum()
}
