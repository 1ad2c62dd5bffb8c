use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};

use super::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::oracle::{
    certify_with_leaves, derive_rng, uniformity_report, verify_identity_channel, BranchLeaf, VerificationCertificate,
    ACCEPTANCE_SWEEP, FIDELITY_TOL,
};
use crate::protocol::{OutcomeSource, OutcomeTuple, Protocol, ProtocolConfig};
use crate::qudit::random_state;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    /// Index of the input pair the leaf belongs to (enumerate mode).
    pub input_pair: Option<usize>,
    pub outcomes: OutcomeTuple,
    /// Exact leaf probability (enumerate) or probability of the sampled branch.
    pub probability: f64,
    pub sampled: bool,
    pub fidelity_alpha: Option<f64>,
    pub fidelity_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub min_fidelity_alpha: Option<f64>,
    pub min_fidelity_beta: Option<f64>,
    pub mean_fidelity_alpha: Option<f64>,
    pub mean_fidelity_beta: Option<f64>,
    pub uniformity: Option<BTreeMap<String, f64>>,
    pub certificates: Vec<VerificationCertificate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub mode: Mode,
    pub seed: u64,
    pub configs: Vec<ProtocolConfig>,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

pub fn build_report(rc: &RunConfig) -> Result<Report> {
    match rc.mode {
        Mode::Sample => sample(required(rc)?, rc.trials, rc.seed),
        Mode::Enumerate => enumerate(required(rc)?, rc.seed),
        Mode::Sweep => Ok(sweep(rc.seed)),
    }
}

fn required(rc: &RunConfig) -> Result<ProtocolConfig> {
    rc.config.ok_or_else(|| Error::invalid("mode needs a configuration"))
}

fn fidelity_summary(trials: &[TrialRecord]) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    let alphas: Vec<f64> = trials.iter().filter_map(|t| t.fidelity_alpha).collect();
    let betas: Vec<f64> = trials.iter().filter_map(|t| t.fidelity_beta).collect();
    let min = |v: &[f64]| v.iter().copied().reduce(f64::min);
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    (min(&alphas), min(&betas), mean(&alphas), mean(&betas))
}

fn sample(config: ProtocolConfig, trials: usize, seed: u64) -> Result<Report> {
    let protocol = Protocol::new(config)?;
    let records = (0..trials as u64)
        .map(|id| {
            let mut rng = derive_rng(seed, id);
            let alpha = random_state(config.d1(), &mut rng)?;
            let beta = random_state(config.d2(), &mut rng)?;
            let result = protocol.run(&alpha, &beta, OutcomeSource::Sampled(&mut rng))?;
            Ok(TrialRecord {
                trial_id: id,
                input_pair: None,
                outcomes: result.outcomes(),
                probability: result.probability(),
                sampled: true,
                fidelity_alpha: Some(result.fidelity_alpha),
                fidelity_beta: Some(result.fidelity_beta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (min_a, min_b, mean_a, mean_b) = fidelity_summary(&records);
    let passed = records.iter().all(|t| {
        t.fidelity_alpha
            .zip(t.fidelity_beta)
            .is_some_and(|(a, b)| a.min(b) >= 1.0 - FIDELITY_TOL)
    });
    Ok(Report {
        mode: Mode::Sample,
        seed,
        configs: vec![config],
        trials: records,
        summary: Summary {
            passed,
            min_fidelity_alpha: min_a,
            min_fidelity_beta: min_b,
            mean_fidelity_alpha: mean_a,
            mean_fidelity_beta: mean_b,
            uniformity: None,
            certificates: vec![],
        },
    })
}

fn enumerate(config: ProtocolConfig, seed: u64) -> Result<Report> {
    let (certificate, per_pair) = certify_with_leaves(&config, seed)?;
    let mut records = Vec::new();
    for (pair, leaves) in per_pair.iter().enumerate() {
        for leaf in leaves {
            records.push(leaf_record(records.len() as u64, pair, leaf));
        }
    }
    let (min_a, min_b, mean_a, mean_b) = fidelity_summary(&records);
    let uniformity = match per_pair.first() {
        Some(leaves) => Some(uniformity_report(&config, leaves)?),
        None => None,
    };
    Ok(Report {
        mode: Mode::Enumerate,
        seed,
        configs: vec![config],
        trials: records,
        summary: Summary {
            passed: certificate.passed,
            min_fidelity_alpha: min_a,
            min_fidelity_beta: min_b,
            mean_fidelity_alpha: mean_a,
            mean_fidelity_beta: mean_b,
            uniformity,
            certificates: vec![certificate],
        },
    })
}

fn leaf_record(trial_id: u64, pair: usize, leaf: &BranchLeaf) -> TrialRecord {
    TrialRecord {
        trial_id,
        input_pair: Some(pair),
        outcomes: leaf.outcomes,
        probability: leaf.probability,
        sampled: false,
        fidelity_alpha: leaf.fidelity_alpha,
        fidelity_beta: leaf.fidelity_beta,
    }
}

fn sweep(seed: u64) -> Report {
    let certificates: Vec<VerificationCertificate> = ACCEPTANCE_SWEEP
        .iter()
        .map(|&(d1, d2, d)| verify_identity_channel(d1, d2, d, seed))
        .collect();
    let configs = ACCEPTANCE_SWEEP
        .iter()
        .filter_map(|&(d1, d2, d)| ProtocolConfig::new(d1, d2, d).ok())
        .collect();
    let min = |f: fn(&VerificationCertificate) -> f64| certificates.iter().map(f).reduce(f64::min);
    Report {
        mode: Mode::Sweep,
        seed,
        configs,
        trials: vec![],
        summary: Summary {
            passed: certificates.iter().all(|c| c.passed),
            min_fidelity_alpha: min(|c| c.min_fidelity),
            min_fidelity_beta: min(|c| c.min_fidelity),
            mean_fidelity_alpha: None,
            mean_fidelity_beta: None,
            uniformity: None,
            certificates,
        },
    }
}

/// Floats as 17 significant digits in scientific notation.
fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rewrites every floating-point number in `value` to [`format_float`] form.
fn canonical_floats(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            Value::Number(Number::from_str(&format_float(x)).expect("formatted float parses"))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonical_floats(v))).collect()),
        other => other,
    }
}

impl Report {
    /// Key-sorted JSON with a trailing newline:
    /// `{config, mode, seed, summary, trials}`.
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let config = match self.mode {
            Mode::Sweep => serde_json::to_value(&self.configs)?,
            _ => serde_json::to_value(self.configs.first())?,
        };
        let mut top = serde_json::Map::new();
        top.insert("config".into(), config);
        top.insert("mode".into(), serde_json::to_value(self.mode)?);
        top.insert("seed".into(), Value::from(self.seed));
        top.insert("summary".into(), serde_json::to_value(&self.summary)?);
        top.insert("trials".into(), serde_json::to_value(&self.trials)?);
        let mut out = serde_json::to_string_pretty(&canonical_floats(Value::Object(top)))?;
        out.push('\n');
        Ok(out)
    }

    /// Per-trial CSV with columns
    /// `trial_id,k,k1,k2,m1,m2,probability,fidelity_alpha,fidelity_beta`.
    /// Sweep reports have no trials and emit one row per certificate instead.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.mode == Mode::Sweep {
            w.write_record([
                "d1",
                "d2",
                "d",
                "leaf_count",
                "min_fidelity",
                "max_uniformity_deviation",
                "identity_channel_residual",
                "passed",
            ])?;
            for c in &self.summary.certificates {
                w.write_record([
                    c.d1.to_string(),
                    c.d2.to_string(),
                    c.d.to_string(),
                    c.leaf_count.to_string(),
                    format_float(c.min_fidelity),
                    format_float(c.max_uniformity_deviation),
                    format_float(c.identity_channel_residual),
                    c.passed.to_string(),
                ])?;
            }
        } else {
            w.write_record([
                "trial_id",
                "k",
                "k1",
                "k2",
                "m1",
                "m2",
                "probability",
                "fidelity_alpha",
                "fidelity_beta",
            ])?;
            let opt = |v: Option<usize>| v.map_or_else(|| "-1".to_string(), |v| v.to_string());
            let fid = |v: Option<f64>| v.map_or_else(|| "-1".to_string(), format_float);
            for t in &self.trials {
                let o = t.outcomes;
                w.write_record([
                    t.trial_id.to_string(),
                    opt(o.k),
                    o.k1.to_string(),
                    o.k2.to_string(),
                    o.m1.to_string(),
                    o.m2.to_string(),
                    format_float(t.probability),
                    fid(t.fidelity_alpha),
                    fid(t.fidelity_beta),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
