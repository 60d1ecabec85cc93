//! Distributed rate determination with one advanced receiver (Rx1, able to
//! decode interference) and one legacy receiver (Rx2, always treats
//! interference as noise).
//!
//! Receivers broadcast their capability and feed back locally measured rates.
//! Tx2 picks its rate and tells Tx1 a single decision bit `b_d`; Tx1 then
//! picks its own rate. Two variants exist: the traditional assignment only
//! (algorithm 1) and the generalized assignment where Tx2 may serve Rx1 and
//! Tx1 may serve Rx2 (algorithm 2). [`audit`] checks an outcome against the
//! centralized sum-rate results.
//!
//! Delivery is reliable, in order and instantaneous. Phases run in a fixed
//! order (announce, feedback, decide, commit) and within a phase nodes act in
//! the order Rx1, Rx2, Tx1, Tx2, so a run is fully deterministic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{Channel, RatePrimitives};
use crate::error::{Error, Result};
use crate::region::{component_region, DecodeConfig, Decoding, HalfPlane};
use crate::sum_rate::{classify_generalized, sumrate_assignment, Assignment};
use crate::TOLERANCE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NodeKind {
    Tx1,
    Tx2,
    Rx1,
    Rx2,
}

impl NodeKind {
    fn transmitter(index: usize) -> Self {
        if index == 0 {
            NodeKind::Tx1
        } else {
            NodeKind::Tx2
        }
    }

    fn label(self) -> &'static str {
        match self {
            NodeKind::Tx1 => "TX1",
            NodeKind::Tx2 => "TX2",
            NodeKind::Rx1 => "RX1",
            NodeKind::Rx2 => "RX2",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Capability {
    /// Treats interference as noise only.
    Legacy,
    /// Can decode interference.
    Advanced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRole {
    pub kind: NodeKind,
    /// Set for receivers only.
    pub rx_capability: Option<Capability>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Algorithm 1: traditional assignment.
    Traditional,
    /// Algorithm 2: generalized assignment.
    Generalized,
}

impl Algorithm {
    pub fn number(self) -> u8 {
        match self {
            Algorithm::Traditional => 1,
            Algorithm::Generalized => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Algorithm::Traditional),
            2 => Ok(Algorithm::Generalized),
            _ => Err(Error::InvalidArgument(format!("algorithm must be 1 or 2, got {n}"))),
        }
    }
}

/// The rate quantities a receiver may feed back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeedbackName {
    #[serde(rename = "R11_IF")]
    R11If,
    #[serde(rename = "R11_IAN")]
    R11Ian,
    #[serde(rename = "R12_IF")]
    R12If,
    #[serde(rename = "R12_IAN")]
    R12Ian,
    #[serde(rename = "R21_IAN")]
    R21Ian,
    #[serde(rename = "R22_IAN")]
    R22Ian,
}

impl FeedbackName {
    /// Name of the rate of message `tx` at receiver `rx` (zero-based).
    fn of(rx: usize, tx: usize, interference_free: bool) -> Option<Self> {
        use FeedbackName::*;
        match (rx, tx, interference_free) {
            (0, 0, true) => Some(R11If),
            (0, 0, false) => Some(R11Ian),
            (0, 1, true) => Some(R12If),
            (0, 1, false) => Some(R12Ian),
            (1, 0, false) => Some(R21Ian),
            (1, 1, false) => Some(R22Ian),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FeedbackName::R11If => "R11_IF",
            FeedbackName::R11Ian => "R11_IAN",
            FeedbackName::R12If => "R12_IF",
            FeedbackName::R12Ian => "R12_IAN",
            FeedbackName::R21Ian => "R21_IAN",
            FeedbackName::R22Ian => "R22_IAN",
        }
    }

    fn parse(label: &str) -> Option<Self> {
        use FeedbackName::*;
        [R11If, R11Ian, R12If, R12Ian, R21Ian, R22Ian]
            .into_iter()
            .find(|n| n.label() == label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Payload {
    CapabilityBroadcast(Capability),
    RateFeedback { name: FeedbackName, value: f64 },
    DecisionBit(u8),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolMessage {
    pub from: NodeKind,
    pub to: NodeKind,
    pub payload: Payload,
}

/// One trace line: `{"seq":n,"from":"TX2","to":"TX1","type":"decision_bit","value":1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seq: usize,
    pub from: NodeKind,
    pub to: NodeKind,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub value: Value,
}

impl ProtocolMessage {
    pub fn to_record(&self, seq: usize) -> TraceRecord {
        let (kind, name, value) = match self.payload {
            Payload::CapabilityBroadcast(c) => (
                "capability",
                None,
                serde_json::to_value(c).expect("enum serializes"),
            ),
            Payload::RateFeedback { name, value } => {
                ("rate_feedback", Some(name.label().to_string()), Value::from(value))
            }
            Payload::DecisionBit(b) => ("decision_bit", None, Value::from(b)),
        };
        TraceRecord {
            seq,
            from: self.from,
            to: self.to,
            kind: kind.to_string(),
            name,
            value,
        }
    }

    pub fn from_record(record: &TraceRecord) -> Result<Self> {
        let bad = |what: &str| Error::InvalidArgument(format!("trace line {}: {what}", record.seq));
        let payload = match record.kind.as_str() {
            "capability" => Payload::CapabilityBroadcast(
                serde_json::from_value(record.value.clone()).map_err(|_| bad("bad capability"))?,
            ),
            "rate_feedback" => Payload::RateFeedback {
                name: record
                    .name
                    .as_deref()
                    .and_then(FeedbackName::parse)
                    .ok_or_else(|| bad("unknown feedback name"))?,
                value: record.value.as_f64().ok_or_else(|| bad("feedback value is not a number"))?,
            },
            "decision_bit" => match record.value.as_u64() {
                Some(b @ (0 | 1)) => Payload::DecisionBit(b as u8),
                _ => return Err(bad("decision bit must be 0 or 1")),
            },
            other => return Err(bad(&format!("unknown message type {other:?}"))),
        };
        Ok(Self {
            from: record.from,
            to: record.to,
            payload,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolOutcome {
    pub algorithm: Algorithm,
    pub r1: f64,
    pub r2: f64,
    pub b_d: u8,
    /// Message assignment the transmitters ended up using.
    pub assignment: Assignment,
    /// Receiver decoding configuration, for assignments (1,2) and (2,1).
    pub config: Option<DecodeConfig>,
    pub trace: Vec<ProtocolMessage>,
    pub messages_to_tx1_from_tx2: usize,
}

impl ProtocolOutcome {
    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }

    /// Trace as JSON lines, one message per line, newline-terminated.
    pub fn trace_json_lines(&self) -> String {
        let mut out = String::new();
        for (seq, msg) in self.trace.iter().enumerate() {
            out.push_str(&serde_json::to_string(&msg.to_record(seq)).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse_trace(text: &str) -> Result<Vec<ProtocolMessage>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| ProtocolMessage::from_record(&serde_json::from_str(l)?))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Announce,
    Feedback,
    Decide,
    Commit,
}

pub const PHASES: [Phase; 4] = [Phase::Announce, Phase::Feedback, Phase::Decide, Phase::Commit];

/// What a receiver measures locally: the rates of both messages at its own
/// output. It knows nothing about the other receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalRates {
    pub r_if: [f64; 2],
    pub r_ian: [f64; 2],
}

impl LocalRates {
    pub fn at(prims: &RatePrimitives, rx: usize) -> Self {
        Self {
            r_if: prims.r_if[rx],
            r_ian: prims.r_ian[rx],
        }
    }
}

/// Receiver node. Its behavior depends only on its own index, capability,
/// measured rates and the algorithm in use.
#[derive(Clone, Debug)]
pub struct Receiver {
    index: usize,
    capability: Capability,
    rates: LocalRates,
    algorithm: Algorithm,
}

impl Receiver {
    pub fn new(index: usize, capability: Capability, rates: LocalRates, algorithm: Algorithm) -> Self {
        Self {
            index,
            capability,
            rates,
            algorithm,
        }
    }

    fn kind(&self) -> NodeKind {
        if self.index == 0 {
            NodeKind::Rx1
        } else {
            NodeKind::Rx2
        }
    }

    fn feedback(&self, tx: usize, interference_free: bool) -> ProtocolMessage {
        let name = FeedbackName::of(self.index, tx, interference_free)
            .expect("receiver placement is canonical");
        let value = if interference_free {
            self.rates.r_if[tx]
        } else {
            self.rates.r_ian[tx]
        };
        ProtocolMessage {
            from: self.kind(),
            to: NodeKind::transmitter(tx),
            payload: Payload::RateFeedback { name, value },
        }
    }

    /// Messages emitted in `phase`.
    pub fn step(&self, phase: Phase) -> Vec<ProtocolMessage> {
        let own = self.index;
        let other = 1 - own;
        match phase {
            Phase::Announce => [NodeKind::Tx1, NodeKind::Tx2]
                .into_iter()
                .map(|to| ProtocolMessage {
                    from: self.kind(),
                    to,
                    payload: Payload::CapabilityBroadcast(self.capability),
                })
                .collect(),
            Phase::Feedback => match (self.capability, self.algorithm) {
                (Capability::Advanced, _) => vec![
                    self.feedback(own, true),
                    self.feedback(own, false),
                    self.feedback(other, true),
                    self.feedback(other, false),
                ],
                (Capability::Legacy, Algorithm::Traditional) => vec![self.feedback(own, false)],
                (Capability::Legacy, Algorithm::Generalized) => {
                    vec![self.feedback(other, false), self.feedback(own, false)]
                }
            },
            Phase::Decide | Phase::Commit => Vec::new(),
        }
    }
}

/// State shared by both transmitter nodes: everything delivered so far.
#[derive(Clone, Debug, Default)]
struct Inbox {
    capabilities: BTreeMap<NodeKind, Capability>,
    feedback: BTreeMap<FeedbackName, f64>,
    decision: Option<u8>,
}

impl Inbox {
    fn receive(&mut self, msg: &ProtocolMessage) {
        match msg.payload {
            Payload::CapabilityBroadcast(c) => {
                self.capabilities.insert(msg.from, c);
            }
            Payload::RateFeedback { name, value } => {
                self.feedback.insert(name, value);
            }
            Payload::DecisionBit(b) => self.decision = Some(b),
        }
    }

    fn get(&self, at: NodeKind, name: FeedbackName) -> Result<f64> {
        self.feedback.get(&name).copied().ok_or_else(|| {
            Error::InvalidArgument(format!("{at} never received {}", name.label()))
        })
    }

    fn require_canonical(&self, at: NodeKind) -> Result<()> {
        let rx1 = self.capabilities.get(&NodeKind::Rx1);
        let rx2 = self.capabilities.get(&NodeKind::Rx2);
        if rx1 == Some(&Capability::Advanced) && rx2 == Some(&Capability::Legacy) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{at} needs RX1 advanced and RX2 legacy, saw {rx1:?} and {rx2:?}"
            )))
        }
    }
}

#[derive(Clone, Debug)]
struct Tx2 {
    algorithm: Algorithm,
    inbox: Inbox,
    rate: Option<f64>,
    serves: Option<u8>,
}

impl Tx2 {
    fn decide(&mut self) -> Result<Vec<ProtocolMessage>> {
        use FeedbackName::*;
        let me = NodeKind::Tx2;
        self.inbox.require_canonical(me)?;
        let r22_ian = self.inbox.get(me, R22Ian)?;
        let r12_if = self.inbox.get(me, R12If)?;
        let r12_ian = self.inbox.get(me, R12Ian)?;

        let b_d = if r22_ian > r12_if {
            self.rate = Some(r22_ian);
            self.serves = Some(2);
            0
        } else {
            match self.algorithm {
                Algorithm::Traditional => {
                    self.rate = Some(r12_ian.min(r22_ian));
                    self.serves = Some(2);
                }
                Algorithm::Generalized => {
                    self.rate = Some(r12_ian);
                    self.serves = Some(1);
                }
            }
            1
        };
        Ok(vec![ProtocolMessage {
            from: me,
            to: NodeKind::Tx1,
            payload: Payload::DecisionBit(b_d),
        }])
    }
}

#[derive(Clone, Debug)]
struct Tx1 {
    algorithm: Algorithm,
    inbox: Inbox,
    rate: Option<f64>,
    serves: Option<u8>,
}

impl Tx1 {
    fn commit(&mut self) -> Result<()> {
        use FeedbackName::*;
        let me = NodeKind::Tx1;
        self.inbox.require_canonical(me)?;
        let b_d = self
            .inbox
            .decision
            .ok_or_else(|| Error::InvalidArgument("TX1 never received the decision bit".into()))?;
        let r11_ian = self.inbox.get(me, R11Ian)?;
        let r11_if = self.inbox.get(me, R11If)?;

        let (rate, serves) = match (b_d, self.algorithm) {
            (0, _) => (r11_ian, 1),
            (_, Algorithm::Traditional) => (r11_if, 1),
            (_, Algorithm::Generalized) => {
                let r21_ian = self.inbox.get(me, R21Ian)?;
                if r21_ian > r11_if {
                    (r21_ian, 2)
                } else {
                    (r11_if, 1)
                }
            }
        };
        self.rate = Some(rate);
        self.serves = Some(serves);
        Ok(())
    }
}

/// Run the rate-determination procedure on a channel, with Rx1 advanced and
/// Rx2 legacy. For the mirrored placement relabel the channel first
/// ([`crate::GaussianIcChannel::swap_users`]).
pub fn run_algorithm(ch: &Channel, algorithm: Algorithm) -> Result<ProtocolOutcome> {
    run_on_primitives(&ch.primitives()?, algorithm)
}

pub fn run_algorithm1(ch: &Channel) -> Result<ProtocolOutcome> {
    run_algorithm(ch, Algorithm::Traditional)
}

pub fn run_algorithm2(ch: &Channel) -> Result<ProtocolOutcome> {
    run_algorithm(ch, Algorithm::Generalized)
}

pub fn run_on_primitives(prims: &RatePrimitives, algorithm: Algorithm) -> Result<ProtocolOutcome> {
    let receivers = [
        Receiver::new(0, Capability::Advanced, LocalRates::at(prims, 0), algorithm),
        Receiver::new(1, Capability::Legacy, LocalRates::at(prims, 1), algorithm),
    ];
    let mut tx1 = Tx1 {
        algorithm,
        inbox: Inbox::default(),
        rate: None,
        serves: None,
    };
    let mut tx2 = Tx2 {
        algorithm,
        inbox: Inbox::default(),
        rate: None,
        serves: None,
    };

    let mut trace = Vec::new();
    for phase in PHASES {
        let mut outgoing = Vec::new();
        for rx in &receivers {
            outgoing.extend(rx.step(phase));
        }
        match phase {
            Phase::Decide => outgoing.extend(tx2.decide()?),
            Phase::Commit => tx1.commit()?,
            _ => {}
        }
        for msg in outgoing {
            match msg.to {
                NodeKind::Tx1 => tx1.inbox.receive(&msg),
                NodeKind::Tx2 => tx2.inbox.receive(&msg),
                // receivers listen to nobody
                NodeKind::Rx1 | NodeKind::Rx2 => {}
            }
            trace.push(msg);
        }
    }

    let missing = || Error::InvalidArgument("protocol ended without both rates".into());
    let (r1, r2) = (tx1.rate.ok_or_else(missing)?, tx2.rate.ok_or_else(missing)?);
    let b_d = tx1.inbox.decision.ok_or_else(missing)?;
    let assignment = Assignment::new(
        tx1.serves.ok_or_else(missing)?,
        tx2.serves.ok_or_else(missing)?,
    )?;
    let config = match (assignment, b_d) {
        (Assignment::TRADITIONAL, 0) | (Assignment::CROSSED, _) => Some(DecodeConfig::IAN_IAN),
        (Assignment::TRADITIONAL, _) => Some(DecodeConfig::SD_IAN),
        _ => None,
    };
    let messages_to_tx1_from_tx2 = trace
        .iter()
        .filter(|m| m.from == NodeKind::Tx2 && m.to == NodeKind::Tx1)
        .count();
    Ok(ProtocolOutcome {
        algorithm,
        r1,
        r2,
        b_d,
        assignment,
        config,
        trace,
        messages_to_tx1_from_tx2,
    })
}

/// One numeric comparison in an audit report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub delta: f64,
    pub pass: bool,
    /// Informational checks are reported but never fail the audit.
    pub informational: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub algorithm: u8,
    pub pass: bool,
    pub r1: f64,
    pub r2: f64,
    pub b_d: u8,
    pub assignment: Assignment,
    pub config: Option<DecodeConfig>,
    pub sum: f64,
    /// Algorithm 1: best of the (ox) and (xx) sums of assignment (1,2).
    /// Algorithm 2: the generalized closed-form maximum.
    pub reference_sum: f64,
    /// `reference_sum - sum`.
    pub gap: f64,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Constraints that `(R1, R2)` must satisfy for both messages to be
/// decodable under the realized assignment and configuration, named for the
/// report.
fn decodability_bounds(
    prims: &RatePrimitives,
    assignment: Assignment,
    config: Option<DecodeConfig>,
) -> Vec<(String, HalfPlane)> {
    let rx_bounds = |p: &RatePrimitives, rx: usize, kind: Decoding| component_region(p, rx, kind).bounds;
    let label = |rx: usize, kind: Decoding| {
        format!("rx{}_{}", rx + 1, if kind == Decoding::Decode { "sd" } else { "ian" })
    };
    let mut out = Vec::new();
    match (assignment, config) {
        (Assignment::TRADITIONAL, Some(cfg)) => {
            for rx in 0..2 {
                for h in rx_bounds(prims, rx, cfg.at(rx)) {
                    out.push((label(rx, cfg.at(rx)), h));
                }
            }
        }
        (Assignment::CROSSED, Some(cfg)) => {
            // transmitters relabeled: swap the rate coordinates back
            let swapped = prims.swap_transmitters();
            for rx in 0..2 {
                for h in rx_bounds(&swapped, rx, cfg.at(rx)) {
                    out.push((label(rx, cfg.at(rx)), HalfPlane::new(h.a[1], h.a[0], h.b)));
                }
            }
        }
        (Assignment::JOINT_RX1, _) => {
            for h in rx_bounds(prims, 0, Decoding::Decode) {
                out.push(("rx1_joint".to_string(), h));
            }
        }
        (Assignment::JOINT_RX2, _) => {
            for h in rx_bounds(prims, 1, Decoding::Decode) {
                out.push(("rx2_joint".to_string(), h));
            }
        }
        _ => {}
    }
    out
}

/// Cross-check a protocol outcome against centralized computation on the same
/// channel.
pub fn audit(outcome: &ProtocolOutcome, prims: &RatePrimitives) -> AuditReport {
    let sum = outcome.sum();
    let mut checks = Vec::new();

    let (reference_sum, informational) = match outcome.algorithm {
        Algorithm::Traditional => {
            let reachable = [DecodeConfig::SD_IAN, DecodeConfig::IAN_IAN]
                .into_iter()
                .map(|c| sumrate_assignment(prims, Assignment::TRADITIONAL, Some(c)).expect("valid config"))
                .fold(f64::NEG_INFINITY, f64::max);
            (reachable, false)
        }
        Algorithm::Generalized => (classify_generalized(prims).result.value, true),
    };
    let gap = reference_sum - sum;
    checks.push(AuditCheck {
        name: match outcome.algorithm {
            Algorithm::Traditional => "sum_equals_reachable_optimum".into(),
            Algorithm::Generalized => "gap_to_generalized_optimum".into(),
        },
        expected: reference_sum,
        actual: sum,
        delta: gap,
        pass: gap.abs() <= TOLERANCE,
        informational,
    });

    // the legacy receiver can never be the one decoding interference
    let legacy_ok = outcome.config.is_none_or(|c| c.b2 == Decoding::Ian)
        && outcome.assignment != Assignment::JOINT_RX2;
    checks.push(AuditCheck {
        name: "legacy_rx2_treats_interference_as_noise".into(),
        expected: 1.0,
        actual: f64::from(u8::from(legacy_ok)),
        delta: f64::from(u8::from(!legacy_ok)),
        pass: legacy_ok,
        informational: false,
    });

    let point = [outcome.r1, outcome.r2];
    for (name, h) in decodability_bounds(prims, outcome.assignment, outcome.config) {
        let lhs = h.a[0] * point[0] + h.a[1] * point[1];
        checks.push(AuditCheck {
            name: format!("decodable_{name}"),
            expected: h.b,
            actual: lhs,
            delta: h.slack(point),
            pass: h.holds(point),
            informational: false,
        });
    }
    checks.push(AuditCheck {
        name: "single_tx2_to_tx1_message".into(),
        expected: 1.0,
        actual: outcome.messages_to_tx1_from_tx2 as f64,
        delta: outcome.messages_to_tx1_from_tx2 as f64 - 1.0,
        pass: outcome.messages_to_tx1_from_tx2 == 1,
        informational: false,
    });

    let pass = checks.iter().all(|c| c.pass || c.informational);
    AuditReport {
        algorithm: outcome.algorithm.number(),
        pass,
        r1: outcome.r1,
        r2: outcome.r2,
        b_d: outcome.b_d,
        assignment: outcome.assignment,
        config: outcome.config,
        sum,
        reference_sum,
        gap,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GaussianIcChannel;
    use approx::assert_abs_diff_eq;

    fn channel(h11: f64, h12: f64, h21: f64, h22: f64, p: f64) -> Channel {
        GaussianIcChannel::real(h11, h12, h21, h22, p).into()
    }

    fn weak_rate() -> f64 {
        (1.0 + 10.0 / 1.1f64).log2()
    }

    #[test]
    fn algorithm1_strong_symmetric() {
        let out = run_algorithm1(&channel(1.0, 3.0, 3.0, 1.0, 1.0)).unwrap();
        assert_eq!(out.b_d, 1);
        assert_abs_diff_eq!(out.r2, 1.1f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.r2, 0.1375, epsilon = 1e-4);
        assert_abs_diff_eq!(out.r1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.sum(), 1.1375, epsilon = 1e-4);
        assert_eq!(out.config, Some(DecodeConfig::SD_IAN));
    }

    #[test]
    fn algorithm1_weak_symmetric() {
        let out = run_algorithm1(&channel(1.0, 0.1, 0.1, 1.0, 10.0)).unwrap();
        assert_eq!(out.b_d, 0);
        assert_abs_diff_eq!(out.r1, weak_rate(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.r2, weak_rate(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.r2, 3.33498, epsilon = 1e-5);
    }

    #[test]
    fn algorithm1_zero_interference() {
        let out = run_algorithm1(&channel(1.0, 0.0, 0.0, 1.0, 3.0)).unwrap();
        assert_eq!(out.b_d, 0);
        assert_eq!((out.r1, out.r2), (2.0, 2.0));
    }

    #[test]
    fn algorithm2_cross_dominant() {
        let out = run_algorithm2(&channel(0.1, 1.0, 1.0, 0.1, 10.0)).unwrap();
        assert_eq!(out.b_d, 1);
        assert_abs_diff_eq!(out.r2, weak_rate(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.r1, weak_rate(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.sum(), 6.66997, epsilon = 1e-5);
        assert_eq!(out.assignment, Assignment::CROSSED);
    }

    #[test]
    fn algorithm2_weak_and_strong() {
        let out = run_algorithm2(&channel(1.0, 0.1, 0.1, 1.0, 10.0)).unwrap();
        assert_eq!(out.b_d, 0);
        assert_abs_diff_eq!(out.r1, weak_rate(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.r2, weak_rate(), epsilon = 1e-12);

        let out = run_algorithm2(&channel(1.0, 3.0, 3.0, 1.0, 1.0)).unwrap();
        assert_eq!(out.b_d, 1);
        assert_abs_diff_eq!(out.r2, 5.5f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.r1, 5.5f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.sum(), 4.9188, epsilon = 1e-4);
        assert_eq!(out.assignment, Assignment::CROSSED);
    }

    #[test]
    fn algorithm2_joint_branch() {
        // b_d = 1 but the cross link to Rx2 is too weak: Tx1 stays on Rx1
        let ch = channel(1.0, 2.0, 0.2, 0.5, 2.0);
        let p = ch.primitives().unwrap();
        assert!(p.r_ian[1][1] <= p.r_if[0][1]);
        assert!(p.r_ian[1][0] <= p.r_if[0][0]);
        let out = run_algorithm2(&ch).unwrap();
        assert_eq!(out.assignment, Assignment::JOINT_RX1);
        assert_abs_diff_eq!(out.sum(), p.mac_sum[0], epsilon = 1e-12);
        assert!(audit(&out, &p).pass);
    }

    #[test]
    fn trace_follows_require_order() {
        let out = run_algorithm2(&channel(1.0, 3.0, 3.0, 1.0, 1.0)).unwrap();
        let lines: Vec<String> = out
            .trace
            .iter()
            .map(|m| match m.payload {
                Payload::CapabilityBroadcast(_) => format!("{}>{} cap", m.from, m.to),
                Payload::RateFeedback { name, .. } => format!("{}>{} {}", m.from, m.to, name.label()),
                Payload::DecisionBit(b) => format!("{}>{} b{}", m.from, m.to, b),
            })
            .collect();
        assert_eq!(
            lines,
            [
                "RX1>TX1 cap",
                "RX1>TX2 cap",
                "RX2>TX1 cap",
                "RX2>TX2 cap",
                "RX1>TX1 R11_IF",
                "RX1>TX1 R11_IAN",
                "RX1>TX2 R12_IF",
                "RX1>TX2 R12_IAN",
                "RX2>TX1 R21_IAN",
                "RX2>TX2 R22_IAN",
                "TX2>TX1 b1",
            ]
        );
        assert_eq!(out.messages_to_tx1_from_tx2, 1);

        let out = run_algorithm1(&channel(1.0, 3.0, 3.0, 1.0, 1.0)).unwrap();
        let names: Vec<_> = out
            .trace
            .iter()
            .filter_map(|m| match m.payload {
                Payload::RateFeedback { name, .. } => Some(name),
                _ => None,
            })
            .collect();
        use FeedbackName::*;
        assert_eq!(names, [R11If, R11Ian, R12If, R12Ian, R22Ian]);
    }

    #[test]
    fn receiver_output_ignores_peer() {
        let p = GaussianIcChannel::real(1.0, 3.0, 3.0, 1.0, 1.0).primitives().unwrap();
        for algorithm in [Algorithm::Traditional, Algorithm::Generalized] {
            let out = run_on_primitives(&p, algorithm).unwrap();
            let standalone = Receiver::new(0, Capability::Advanced, LocalRates::at(&p, 0), algorithm);
            let expected: Vec<_> = PHASES.iter().flat_map(|&ph| standalone.step(ph)).collect();
            let emitted: Vec<_> = out.trace.iter().filter(|m| m.from == NodeKind::Rx1).copied().collect();
            assert_eq!(emitted, expected);

            // changing everything about receiver 2 leaves receiver 1 unchanged
            let mut other = p;
            other.r_if[1] = [7.0, 7.0];
            other.r_ian[1] = [0.5, 0.5];
            other.mac_sum[1] = 7.5;
            let again = run_on_primitives(&other, algorithm).unwrap();
            let emitted_again: Vec<_> = again.trace.iter().filter(|m| m.from == NodeKind::Rx1).copied().collect();
            assert_eq!(emitted_again, expected);
        }
    }

    #[test]
    fn trace_json_round_trip() {
        let out = run_algorithm2(&channel(2.0, 1.0, 0.5, 1.0, 1.0)).unwrap();
        let text = out.trace_json_lines();
        let last = text.lines().last().unwrap();
        assert_eq!(last, r#"{"seq":10,"from":"TX2","to":"TX1","type":"decision_bit","value":0}"#.replace("0}", &format!("{}}}", out.b_d)));
        assert!(text.lines().next().unwrap().contains(r#""type":"capability","value":"ADVANCED""#));
        assert_eq!(ProtocolOutcome::parse_trace(&text).unwrap(), out.trace);
        assert_eq!(run_algorithm2(&channel(2.0, 1.0, 0.5, 1.0, 1.0)).unwrap().trace_json_lines(), text);
    }

    #[test]
    fn audits() {
        let strong = channel(1.0, 3.0, 3.0, 1.0, 1.0);
        let p = strong.primitives().unwrap();
        let report = audit(&run_algorithm1(&strong).unwrap(), &p);
        assert!(report.pass);
        assert_abs_diff_eq!(report.reference_sum, 1.1375, epsilon = 1e-4);

        let weak = channel(1.0, 0.1, 0.1, 1.0, 10.0);
        let report = audit(&run_algorithm1(&weak).unwrap(), &weak.primitives().unwrap());
        assert!(report.pass);
        assert_abs_diff_eq!(report.sum, 2.0 * weak_rate(), epsilon = 1e-12);

        let cross = channel(0.1, 1.0, 1.0, 0.1, 10.0);
        let report = audit(&run_algorithm2(&cross).unwrap(), &cross.primitives().unwrap());
        assert!(report.pass);
        assert_abs_diff_eq!(report.gap, 0.0, epsilon = 1e-9);

        let report = audit(&run_algorithm2(&strong).unwrap(), &p);
        assert!(report.pass, "{report:?}");
        assert_abs_diff_eq!(report.gap, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn audit_flags_undecodable_rates() {
        let ch = channel(1.0, 3.0, 3.0, 1.0, 1.0);
        let p = ch.primitives().unwrap();
        let mut out = run_algorithm1(&ch).unwrap();
        out.r2 += 0.5;
        let report = audit(&out, &p);
        assert!(!report.pass);
        assert!(report.checks.iter().any(|c| c.name.starts_with("decodable_") && !c.pass));
    }

    #[test]
    fn algorithm_numbers() {
        assert_eq!(Algorithm::from_number(2).unwrap(), Algorithm::Generalized);
        assert!(Algorithm::from_number(3).is_err());
    }
}
