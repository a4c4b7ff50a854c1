//! Broadcast framing and run transcripts.
//!
//! The broadcast string of a step must be readable bitwise with a detectable
//! end, otherwise information could be smuggled through its length. A step's
//! length is either fixed by the strategy's declared schedule (no header), or
//! the string carries a continuation-flag header: every payload bit is
//! preceded by a `1` flag and the string ends with a `0` flag, so a payload of
//! length `L` costs `2L + 1` bits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BitString, GameError};
use crate::qsim::MeasurementRecord;

/// How the broadcast string of one step is delimited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Framing {
    /// Length fixed by the protocol schedule; payload only.
    Fixed(usize),
    /// Self-delimiting continuation-flag encoding.
    Delimited,
}

impl Framing {
    pub fn encode(self, payload: &BitString) -> Result<BitString, GameError> {
        match self {
            Framing::Fixed(len) if payload.len() == len => Ok(payload.clone()),
            Framing::Fixed(len) => Err(GameError::Protocol(format!(
                "broadcast of {} bits in a step fixed at {len} bits",
                payload.len()
            ))),
            Framing::Delimited => {
                let mut wire = BitString::empty();
                for &b in payload.bits() {
                    wire.push(true);
                    wire.push(b);
                }
                wire.push(false);
                Ok(wire)
            }
        }
    }

    /// Reads one framed string from the front of `wire`; returns the payload
    /// and the number of bits consumed. Trailing bits are left alone.
    pub fn decode(self, wire: &[bool]) -> Result<(BitString, usize), GameError> {
        match self {
            Framing::Fixed(len) if wire.len() >= len => Ok((BitString::from_bits(wire[..len].iter().copied()), len)),
            Framing::Fixed(len) => Err(GameError::Framing(format!("expected {len} bits, found {}", wire.len()))),
            Framing::Delimited => {
                let mut payload = BitString::empty();
                let mut pos = 0;
                loop {
                    match wire.get(pos) {
                        Some(false) => return Ok((payload, pos + 1)),
                        Some(true) => {
                            let bit = wire.get(pos + 1).ok_or_else(|| GameError::Framing("truncated payload bit".into()))?;
                            payload.push(*bit);
                            pos += 2;
                        }
                        None => return Err(GameError::Framing("missing terminating flag".into())),
                    }
                }
            }
        }
    }

    /// Header bits this framing adds to a payload of `len` bits.
    pub fn overhead(self, len: usize) -> usize {
        match self {
            Framing::Fixed(_) => 0,
            Framing::Delimited => len + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Group,
    Broadcast,
}

/// A single message. Player `0` stands for the fallback broadcast the
/// strategy declares on behalf of an empty group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub step: usize,
    pub player: usize,
    pub scope: Scope,
    pub bits: BitString,
}

impl MessageRecord {
    pub fn to_line(&self) -> String {
        let scope = match self.scope {
            Scope::Group => "group",
            Scope::Broadcast => "broadcast",
        };
        format!("step {} | player {} | scope {} | bits {}", self.step, self.player, scope, self.bits)
    }

    pub fn parse_line(line: &str) -> Result<Self, GameError> {
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        let [step, player, scope, bits] = fields.as_slice() else {
            return Err(GameError::Parse(format!("expected 4 fields in {line:?}")));
        };
        let value = |field: &str, key: &str| -> Result<String, GameError> {
            field
                .strip_prefix(key)
                .filter(|rest| rest.is_empty() || rest.starts_with(' '))
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| GameError::Parse(format!("expected `{key} …`, found {field:?}")))
        };
        let num = |s: String| s.parse::<usize>().map_err(|e| GameError::Parse(e.to_string()));
        let scope = match value(scope, "scope")?.as_str() {
            "group" => Scope::Group,
            "broadcast" => Scope::Broadcast,
            other => return Err(GameError::Parse(format!("unknown scope {other:?}"))),
        };
        Ok(Self {
            step: num(value(step, "step")?)?,
            player: num(value(player, "player")?)?,
            scope,
            bits: value(bits, "bits")?.parse()?,
        })
    }
}

/// Everything exchanged in one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Nonempty messages in player order.
    pub messages: Vec<MessageRecord>,
    pub framing: Framing,
    /// Concatenated broadcast payload `b_{t,1} ‖ … ‖ b_{t,n}`.
    pub broadcast: BitString,
    /// The framed string actually counted.
    pub wire: BitString,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub steps: Vec<StepRecord>,
    /// One entry per group; `ε` (empty) when nobody in the group answered.
    pub final_outputs: Vec<BitString>,
    pub measurements: Vec<MeasurementRecord>,
}

impl Transcript {
    /// `Σ_t |b̄_t|`, payload plus framing header bits.
    pub fn broadcast_bits(&self) -> usize {
        self.steps.iter().map(|s| s.wire.len()).sum()
    }

    /// Concatenation of all framed broadcast strings: the transcript `m` a
    /// chosen player ends up seeing.
    pub fn broadcast_history(&self) -> BitString {
        let mut out = BitString::empty();
        for s in &self.steps {
            out.extend_from(&s.wire);
        }
        out
    }

    pub fn messages(&self) -> impl Iterator<Item = &MessageRecord> {
        self.steps.iter().flat_map(|s| s.messages.iter())
    }

    /// Line-oriented text form, one message per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in self.messages() {
            let _ = writeln!(out, "{}", m.to_line());
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Vec<MessageRecord>, GameError> {
        text.lines().filter(|l| !l.trim().is_empty()).map(MessageRecord::parse_line).collect()
    }

    /// Splits the broadcast history back into per-step payloads using the
    /// step framings. Inverse of framing each step and concatenating.
    pub fn decode_history(framings: &[Framing], history: &BitString) -> Result<Vec<BitString>, GameError> {
        let bits = history.bits();
        let mut pos = 0;
        let mut out = Vec::with_capacity(framings.len());
        for f in framings {
            let (payload, used) = f.decode(&bits[pos..])?;
            out.push(payload);
            pos += used;
        }
        if pos != bits.len() {
            return Err(GameError::Framing(format!("{} trailing bits", bits.len() - pos)));
        }
        Ok(out)
    }
}
