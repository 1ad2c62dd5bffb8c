use std::fmt;

use serde::Serialize;

use super::{Party, ProtocolConfig, Stage};
use crate::error::{Error, Result};
use crate::qudit::QuditRegister;

/// Which measurement result a classical message carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageTag {
    K,
    K1,
    K2,
    M1,
    M2,
}

impl MessageTag {
    /// The party whose measurement produces this value.
    pub fn sender(self) -> Party {
        match self {
            MessageTag::K | MessageTag::K1 | MessageTag::M1 => Party::Alice,
            MessageTag::K2 | MessageTag::M2 => Party::Bob,
        }
    }

    /// Number of values the tag can take.
    pub fn range(self, config: &ProtocolConfig) -> usize {
        match self {
            MessageTag::K => config.d(),
            MessageTag::K1 | MessageTag::M1 => config.d1(),
            MessageTag::K2 | MessageTag::M2 => config.d2(),
        }
    }

    fn phase(self) -> u8 {
        match self {
            MessageTag::K => 0,
            MessageTag::K1 | MessageTag::K2 => 1,
            MessageTag::M1 | MessageTag::M2 => 2,
        }
    }
}

impl fmt::Display for MessageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageTag::K => "k",
            MessageTag::K1 => "k1",
            MessageTag::K2 => "k2",
            MessageTag::M1 => "m1",
            MessageTag::M2 => "m2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassicalMessage {
    pub sender: Party,
    pub receiver: Party,
    pub tag: MessageTag,
    pub value: usize,
}

impl ClassicalMessage {
    pub fn new(config: &ProtocolConfig, tag: MessageTag, value: usize) -> Result<Self> {
        if value >= tag.range(config) {
            return Err(Error::invalid(format!(
                "message {tag}={value} out of range 0..{}",
                tag.range(config)
            )));
        }
        let sender = tag.sender();
        Ok(ClassicalMessage {
            sender,
            receiver: sender.other(),
            tag,
            value,
        })
    }
}

/// One protocol stage: outcomes measured in it, their conditional
/// probabilities, and the register right after the stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageEntry {
    pub stage: Stage,
    pub outcomes: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub snapshot: QuditRegister,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProtocolTranscript {
    entries: Vec<StageEntry>,
    messages: Vec<ClassicalMessage>,
}

impl ProtocolTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[StageEntry] {
        &self.entries
    }

    pub fn messages(&self) -> &[ClassicalMessage] {
        &self.messages
    }

    pub fn entry(&self, stage: Stage) -> Option<&StageEntry> {
        self.entries.iter().find(|e| e.stage == stage)
    }

    pub fn record(&mut self, entry: StageEntry) {
        self.entries.push(entry);
    }

    /// Appends a message; messages of a later protocol phase may not precede
    /// those of an earlier one, and each tag is sent at most once.
    pub fn send(&mut self, message: ClassicalMessage) -> Result<()> {
        if self.messages.iter().any(|m| m.tag == message.tag) {
            return Err(Error::invalid(format!("message {} sent twice", message.tag)));
        }
        if let Some(last) = self.messages.last() {
            if last.tag.phase() > message.tag.phase() {
                return Err(Error::invalid(format!(
                    "message {} sent after {}",
                    message.tag, last.tag
                )));
            }
        }
        self.messages.push(message);
        Ok(())
    }

    /// Value of a message addressed to `receiver`. Fails when the message
    /// has not been sent yet.
    pub fn received(&self, receiver: Party, tag: MessageTag) -> Result<usize> {
        self.messages
            .iter()
            .find(|m| m.tag == tag && m.receiver == receiver)
            .map(|m| m.value)
            .ok_or_else(|| Error::invalid(format!("{receiver} has not received {tag}")))
    }

    /// Product of every recorded conditional probability.
    pub fn leaf_probability(&self) -> f64 {
        self.entries.iter().flat_map(|e| &e.probabilities).product()
    }
}
