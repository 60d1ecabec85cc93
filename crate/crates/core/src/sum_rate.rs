//! Maximum sum rates per message assignment, the closed-form regime
//! classifiers, and the exhaustive oracles that certify them.
//!
//! | Regime               | Assignment | Config | Sum rate                                   |
//! |----------------------|------------|--------|--------------------------------------------|
//! | `IF_IF`              | (1,2)      | oo     | `r_if[0][0] + r_if[1][1]`                   |
//! | `IAN_IAN`            | (1,2)      | xx     | `r_ian[0][0] + r_ian[1][1]`                 |
//! | `RX1_DECODES`        | (1,2)      | ox     | `r_if[0][0] + min(r_ian[0][1], r_ian[1][1])` |
//! | `RX2_DECODES`        | (1,2)      | xo     | `r_if[1][1] + min(r_ian[0][0], r_ian[1][0])` |
//! | `BOTH_DECODE_MINMAC` | (1,2)      | oo     | `min(mac_sum[0], mac_sum[1])`               |
//! | `CROSS_IAN`          | (2,1)      | xx     | `r_ian[0][1] + r_ian[1][0]`                 |
//! | `JOINT_MAC_RX1`      | (1,1)      | none   | `mac_sum[0]`                                |
//! | `JOINT_MAC_RX2`      | (2,2)      | none   | `mac_sum[1]`                                |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{GaussianIcChannel, RatePrimitives};
use crate::error::{Error, Result};
use crate::region::DecodeConfig;
use crate::TOLERANCE;

/// Values closer than this are treated as equal when breaking ties between
/// candidates.
const CANDIDATE_TIE: f64 = 1e-12;

/// Intended receiver of each transmitter; `0` means the transmitter is silent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    a1: u8,
    a2: u8,
}

impl Assignment {
    pub const TRADITIONAL: Self = Self { a1: 1, a2: 2 };
    pub const CROSSED: Self = Self { a1: 2, a2: 1 };
    pub const JOINT_RX1: Self = Self { a1: 1, a2: 1 };
    pub const JOINT_RX2: Self = Self { a1: 2, a2: 2 };
    pub const TX1_TO_RX1: Self = Self { a1: 1, a2: 0 };
    pub const TX2_TO_RX2: Self = Self { a1: 0, a2: 2 };
    pub const TX1_TO_RX2: Self = Self { a1: 2, a2: 0 };
    pub const TX2_TO_RX1: Self = Self { a1: 0, a2: 1 };

    /// All valid assignments in oracle tie-break order.
    pub const ALL: [Self; 8] = [
        Self::JOINT_RX1,
        Self::JOINT_RX2,
        Self::TRADITIONAL,
        Self::CROSSED,
        Self::TX1_TO_RX1,
        Self::TX2_TO_RX2,
        Self::TX1_TO_RX2,
        Self::TX2_TO_RX1,
    ];

    pub fn new(a1: u8, a2: u8) -> Result<Self> {
        if a1 > 2 || a2 > 2 || (a1 == 0 && a2 == 0) {
            return Err(Error::InvalidArgument(format!(
                "assignment ({a1},{a2}) is not one of the eight valid tuples"
            )));
        }
        Ok(Self { a1, a2 })
    }

    pub fn a1(self) -> u8 {
        self.a1
    }

    pub fn a2(self) -> u8 {
        self.a2
    }

    /// Both transmitters active, serving different receivers.
    pub fn needs_config(self) -> bool {
        self == Self::TRADITIONAL || self == Self::CROSSED
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a1, self.a2)
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a1, self.a2].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a1, a2] = <[u8; 2]>::deserialize(d)?;
        Self::new(a1, a2).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// Both receivers decode interference and reach the interference-free sum.
    IfIf,
    /// Neither receiver decodes interference.
    IanIan,
    Rx1Decodes,
    Rx2Decodes,
    /// Both receivers decode; the weaker MAC sum binds.
    BothDecodeMinmac,
    /// Crossed assignment, both receivers treat interference as noise.
    CrossIan,
    JointMacRx1,
    JointMacRx2,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::IfIf => "IF_IF",
            Regime::IanIan => "IAN_IAN",
            Regime::Rx1Decodes => "RX1_DECODES",
            Regime::Rx2Decodes => "RX2_DECODES",
            Regime::BothDecodeMinmac => "BOTH_DECODE_MINMAC",
            Regime::CrossIan => "CROSS_IAN",
            Regime::JointMacRx1 => "JOINT_MAC_RX1",
            Regime::JointMacRx2 => "JOINT_MAC_RX2",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A sum rate together with the operating point that achieves it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRateResult {
    pub value: f64,
    pub assignment: Assignment,
    #[serde(with = "none_string")]
    pub config: Option<DecodeConfig>,
    #[serde(with = "none_string")]
    pub regime: Option<Regime>,
}

/// `Option<T>` written as `"none"` when absent.
mod none_string {
    use serde::de::DeserializeOwned;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => v.serialize(s),
            None => s.serialize_str("none"),
        }
    }

    pub fn deserialize<'de, T: DeserializeOwned, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Option<T>, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        if value == "none" {
            return Ok(None);
        }
        T::deserialize(value).map(Some).map_err(serde::de::Error::custom)
    }
}

/// A governing comparison of a classifier that fell within [`TOLERANCE`] of
/// equality. The classifier's value then comes from the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTie {
    /// The comparison as written in the classifier, e.g. `r_ian[0][1] > r_if[1][1]`.
    pub comparison: String,
    /// Left side minus right side.
    pub margin: f64,
    /// Regime reached with the comparison resolved as evaluated, then flipped.
    pub candidates: [Regime; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub result: SumRateResult,
    pub tie: Option<BoundaryTie>,
}

/// Sum rate of the traditional assignment under one decoding configuration.
fn traditional_sum(p: &RatePrimitives, cfg: DecodeConfig) -> f64 {
    match cfg {
        DecodeConfig::IAN_IAN => p.r_ian[0][0] + p.r_ian[1][1],
        DecodeConfig::SD_IAN => p.r_if[0][0] + p.r_ian[0][1].min(p.r_ian[1][1]),
        DecodeConfig::IAN_SD => p.r_if[1][1] + p.r_ian[1][0].min(p.r_ian[0][0]),
        _ => p.mac_sum[0]
            .min(p.mac_sum[1])
            .min(p.r_if[0][0] + p.r_if[1][1]),
    }
}

/// Maximum sum rate of assignment `a`, with `cfg` given exactly when both
/// transmitters serve different receivers.
///
/// The crossed assignment (2,1) is evaluated by relabeling the transmitters
/// and reusing the (1,2) expressions.
pub fn sumrate_assignment(
    prims: &RatePrimitives,
    a: Assignment,
    cfg: Option<DecodeConfig>,
) -> Result<f64> {
    match (a.needs_config(), cfg) {
        (true, None) => {
            return Err(Error::InvalidArgument(format!(
                "assignment {a} requires a decode configuration"
            )))
        }
        (false, Some(_)) => {
            return Err(Error::InvalidArgument(format!(
                "assignment {a} takes no decode configuration"
            )))
        }
        _ => {}
    }
    let p = prims;
    Ok(match (a.a1, a.a2, cfg) {
        (1, 2, Some(cfg)) => traditional_sum(p, cfg),
        (2, 1, Some(cfg)) => traditional_sum(&p.swap_transmitters(), cfg),
        (1, 0, _) => p.r_if[0][0],
        (0, 2, _) => p.r_if[1][1],
        (2, 0, _) => p.r_if[1][0],
        (0, 1, _) => p.r_if[0][1],
        (1, 1, _) => p.mac_sum[0],
        (2, 2, _) => p.mac_sum[1],
        _ => unreachable!("assignment validated on construction"),
    })
}

/// Every (assignment, config) candidate with its sum rate, in oracle order.
pub fn candidates(prims: &RatePrimitives) -> Vec<(Assignment, Option<DecodeConfig>, f64)> {
    let mut out = Vec::with_capacity(14);
    for a in Assignment::ALL {
        let configs: Vec<Option<DecodeConfig>> = if a.needs_config() {
            DecodeConfig::ALL.into_iter().map(Some).collect()
        } else {
            vec![None]
        };
        for cfg in configs {
            let value = sumrate_assignment(prims, a, cfg).expect("config matches assignment");
            out.push((a, cfg, value));
        }
    }
    out
}

/// Regime label of an operating point, where one is defined.
fn regime_of(prims: &RatePrimitives, a: Assignment, cfg: Option<DecodeConfig>, value: f64) -> Option<Regime> {
    match (a, cfg) {
        (Assignment::TRADITIONAL, Some(DecodeConfig::IAN_IAN)) => Some(Regime::IanIan),
        (Assignment::TRADITIONAL, Some(DecodeConfig::SD_IAN)) => Some(Regime::Rx1Decodes),
        (Assignment::TRADITIONAL, Some(DecodeConfig::IAN_SD)) => Some(Regime::Rx2Decodes),
        (Assignment::TRADITIONAL, Some(_)) => {
            let interference_free = prims.r_if[0][0] + prims.r_if[1][1];
            if (value - interference_free).abs() <= CANDIDATE_TIE {
                Some(Regime::IfIf)
            } else {
                Some(Regime::BothDecodeMinmac)
            }
        }
        (Assignment::CROSSED, Some(DecodeConfig::IAN_IAN)) => Some(Regime::CrossIan),
        (Assignment::JOINT_RX1, _) => Some(Regime::JointMacRx1),
        (Assignment::JOINT_RX2, _) => Some(Regime::JointMacRx2),
        _ => None,
    }
}

/// Largest value among `items`; ties within 1e-12 go to the earliest item.
fn best_of(
    prims: &RatePrimitives,
    items: impl IntoIterator<Item = (Assignment, Option<DecodeConfig>, f64)>,
) -> SumRateResult {
    let items: Vec<_> = items.into_iter().collect();
    let max = items.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let (assignment, config, _) = *items
        .iter()
        .find(|c| c.2 >= max - CANDIDATE_TIE)
        .expect("nonempty candidate list");
    SumRateResult {
        value: max,
        assignment,
        config,
        regime: regime_of(prims, assignment, config, max),
    }
}

/// Maximum sum rate of the traditional assignment as the max over the four
/// decoding configurations. Ties prefer xx, then ox, xo, oo.
pub fn sumrate_12_minmax(prims: &RatePrimitives) -> SumRateResult {
    best_of(
        prims,
        DecodeConfig::ALL
            .into_iter()
            .map(|cfg| (Assignment::TRADITIONAL, Some(cfg), traditional_sum(prims, cfg))),
    )
}

/// Exhaustive maximum over all eight assignments and, for (1,2) and (2,1),
/// all four decoding configurations.
pub fn oracle_generalized(prims: &RatePrimitives) -> SumRateResult {
    best_of(prims, candidates(prims))
}

/// Records the comparisons a classifier consults, detects near-equality and
/// optionally inverts one of them.
struct Comparisons {
    consulted: usize,
    flip: Option<usize>,
    tie: Option<(usize, String, f64)>,
}

impl Comparisons {
    fn new(flip: Option<usize>) -> Self {
        Self {
            consulted: 0,
            flip,
            tie: None,
        }
    }

    /// `lhs > rhs`, strictly.
    fn greater(&mut self, lhs: (f64, &str), rhs: (f64, &str)) -> bool {
        let index = self.consulted;
        self.consulted += 1;
        let margin = lhs.0 - rhs.0;
        if margin.abs() <= TOLERANCE && self.tie.is_none() {
            self.tie = Some((index, format!("{} > {}", lhs.1, rhs.1), margin));
        }
        let outcome = margin > 0.0;
        if self.flip == Some(index) {
            !outcome
        } else {
            outcome
        }
    }
}

fn traditional_regime(p: &RatePrimitives, c: &mut Comparisons) -> Regime {
    let r_if = |i: usize, j: usize| (p.r_if[i][j], IF_NAMES[i][j]);
    let r_ian = |i: usize, j: usize| (p.r_ian[i][j], IAN_NAMES[i][j]);
    let mac = |i: usize| (p.mac_sum[i], MAC_NAMES[i]);

    if c.greater(r_ian(0, 1), r_if(1, 1)) && c.greater(r_ian(1, 0), r_if(0, 0)) {
        Regime::IfIf
    } else if c.greater(r_ian(1, 1), r_if(0, 1)) && c.greater(r_ian(0, 0), r_if(1, 0)) {
        Regime::IanIan
    } else if c.greater(mac(0), mac(1)) && c.greater(r_if(0, 0), r_if(1, 0)) {
        Regime::Rx1Decodes
    } else if c.greater(mac(1), mac(0)) && c.greater(r_if(1, 1), r_if(0, 1)) {
        Regime::Rx2Decodes
    } else {
        Regime::BothDecodeMinmac
    }
}

fn generalized_regime(p: &RatePrimitives, c: &mut Comparisons) -> Regime {
    let r_if = |i: usize, j: usize| (p.r_if[i][j], IF_NAMES[i][j]);
    let r_ian = |i: usize, j: usize| (p.r_ian[i][j], IAN_NAMES[i][j]);

    if c.greater(r_ian(1, 1), r_if(0, 1)) && c.greater(r_ian(0, 0), r_if(1, 0)) {
        Regime::IanIan
    } else if c.greater(r_ian(1, 0), r_if(0, 0)) && c.greater(r_ian(0, 1), r_if(1, 1)) {
        Regime::CrossIan
    } else if p.mac_sum[0] >= p.mac_sum[1] {
        // both branches give the same value, so equality is not a tie
        Regime::JointMacRx1
    } else {
        Regime::JointMacRx2
    }
}

const IF_NAMES: [[&str; 2]; 2] = [["r_if[0][0]", "r_if[0][1]"], ["r_if[1][0]", "r_if[1][1]"]];
const IAN_NAMES: [[&str; 2]; 2] = [["r_ian[0][0]", "r_ian[0][1]"], ["r_ian[1][0]", "r_ian[1][1]"]];
const MAC_NAMES: [&str; 2] = ["mac_sum[0]", "mac_sum[1]"];

/// Operating point and closed-form value of a regime.
fn regime_point(p: &RatePrimitives, regime: Regime) -> (Assignment, Option<DecodeConfig>, f64) {
    use Assignment as A;
    use DecodeConfig as C;
    match regime {
        Regime::IfIf => (A::TRADITIONAL, Some(C::SD_SD), p.r_if[0][0] + p.r_if[1][1]),
        Regime::IanIan => (A::TRADITIONAL, Some(C::IAN_IAN), p.r_ian[0][0] + p.r_ian[1][1]),
        Regime::Rx1Decodes => (
            A::TRADITIONAL,
            Some(C::SD_IAN),
            p.r_if[0][0] + p.r_ian[0][1].min(p.r_ian[1][1]),
        ),
        Regime::Rx2Decodes => (
            A::TRADITIONAL,
            Some(C::IAN_SD),
            p.r_if[1][1] + p.r_ian[0][0].min(p.r_ian[1][0]),
        ),
        Regime::BothDecodeMinmac => (A::TRADITIONAL, Some(C::SD_SD), p.mac_sum[0].min(p.mac_sum[1])),
        Regime::CrossIan => (A::CROSSED, Some(C::IAN_IAN), p.r_ian[0][1] + p.r_ian[1][0]),
        Regime::JointMacRx1 => (A::JOINT_RX1, None, p.mac_sum[0]),
        Regime::JointMacRx2 => (A::JOINT_RX2, None, p.mac_sum[1]),
    }
}

fn classify_with(
    prims: &RatePrimitives,
    rule: fn(&RatePrimitives, &mut Comparisons) -> Regime,
    oracle: fn(&RatePrimitives) -> SumRateResult,
) -> Classification {
    let mut comparisons = Comparisons::new(None);
    let regime = rule(prims, &mut comparisons);
    let (assignment, config, closed_form) = regime_point(prims, regime);

    let tie = comparisons.tie.map(|(index, comparison, margin)| {
        let alternate = rule(prims, &mut Comparisons::new(Some(index)));
        BoundaryTie {
            comparison,
            margin,
            candidates: [regime, alternate],
        }
    });
    let value = if tie.is_some() {
        oracle(prims).value
    } else {
        closed_form
    };
    Classification {
        result: SumRateResult {
            value,
            assignment,
            config,
            regime: Some(regime),
        },
        tie,
    }
}

/// Closed-form classification of the traditional assignment's maximum sum
/// rate, evaluated top-down:
///
/// 1. `r_ian[0][1] > r_if[1][1]` and `r_ian[1][0] > r_if[0][0]`: `IF_IF`.
/// 2. `r_if[0][1] < r_ian[1][1]` and `r_if[1][0] < r_ian[0][0]`: `IAN_IAN`.
/// 3. `mac_sum[0] > mac_sum[1]` and `r_if[0][0] > r_if[1][0]`: `RX1_DECODES`.
/// 4. `mac_sum[0] < mac_sum[1]` and `r_if[0][1] < r_if[1][1]`: `RX2_DECODES`.
/// 5. otherwise `BOTH_DECODE_MINMAC`.
///
/// When a consulted comparison is within [`TOLERANCE`] of equality the result
/// carries a [`BoundaryTie`] and the value is taken from [`sumrate_12_minmax`].
pub fn classify_12(prims: &RatePrimitives) -> Classification {
    classify_with(prims, traditional_regime, sumrate_12_minmax)
}

/// Closed-form classification over all message assignments:
///
/// 1. `r_if[0][1] < r_ian[1][1]` and `r_if[1][0] < r_ian[0][0]`: `IAN_IAN`.
/// 2. `r_if[0][0] < r_ian[1][0]` and `r_if[1][1] < r_ian[0][1]`: `CROSS_IAN`.
/// 3. otherwise joint transmission to the receiver with the larger MAC sum.
pub fn classify_generalized(prims: &RatePrimitives) -> Classification {
    classify_with(prims, generalized_regime, oracle_generalized)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Only the assignments (1,0), (0,2), (1,2).
    Traditional,
    /// All eight assignments.
    Generalized,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traditional" => Ok(Mode::Traditional),
            "generalized" => Ok(Mode::Generalized),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

pub fn classify(prims: &RatePrimitives, mode: Mode) -> Classification {
    match mode {
        Mode::Traditional => classify_12(prims),
        Mode::Generalized => classify_generalized(prims),
    }
}

/// Channel parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// `|h12| = |h21|`, locked together.
    Cross,
    H12,
    H21,
    Power,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross" => Ok(SweepAxis::Cross),
            "h12" => Ok(SweepAxis::H12),
            "h21" => Ok(SweepAxis::H21),
            "power" => Ok(SweepAxis::Power),
            _ => Err(Error::InvalidArgument(format!(
                "unknown sweep variable {s:?} (expected cross, h12, h21 or power)"
            ))),
        }
    }
}

/// `<var>:<min>:<max>:<steps>[:log]`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, min: f64, max: f64, steps: usize, log: bool) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidArgument(format!("sweep needs at least 2 steps, got {steps}")));
        }
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidArgument(format!(
                "sweep needs finite min < max, got {min} and {max}"
            )));
        }
        if log && min <= 0.0 {
            return Err(Error::InvalidArgument("logarithmic sweep needs min > 0".into()));
        }
        if min < 0.0 {
            return Err(Error::InvalidArgument("sweep values must be nonnegative".into()));
        }
        Ok(Self {
            axis,
            min,
            max,
            steps,
            log,
        })
    }

    /// Grid values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let t = k as f64 / last;
                if k + 1 == self.steps {
                    self.max
                } else if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::InvalidArgument(format!(
                "sweep {s:?} is not of the form <var>:<min>:<max>:<steps>[:log]"
            )));
        }
        let number = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("sweep bound {t:?} is not a number")))
        };
        let steps = parts[3]
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("sweep steps {:?} is not an integer", parts[3])))?;
        let log = match parts.get(4) {
            None => false,
            Some(&"log") => true,
            Some(&"linear") => false,
            Some(other) => {
                return Err(Error::InvalidArgument(format!("unknown sweep scale {other:?}")))
            }
        };
        Self::new(parts[0].parse()?, number(parts[1])?, number(parts[2])?, steps, log)
    }
}

/// One row of a regime map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub grid_x: f64,
    /// `|h21|` for gain sweeps; absent for power sweeps.
    pub grid_y: Option<f64>,
    pub regime: Option<Regime>,
    pub value: Option<f64>,
    pub tie_flag: bool,
    pub error: Option<String>,
}

fn with_magnitude(g: Complex64, magnitude: f64) -> Complex64 {
    let norm = g.norm();
    if norm > 0.0 {
        g * (magnitude / norm)
    } else {
        Complex64::new(magnitude, 0.0)
    }
}

/// Apply one grid value of `axis` to `template`. Gain sweeps set the magnitude
/// and keep the template's phase.
pub fn sweep_point(template: &GaussianIcChannel, axis: SweepAxis, value: f64) -> GaussianIcChannel {
    let mut ch = *template;
    match axis {
        SweepAxis::Cross => {
            ch.h[0][1] = with_magnitude(ch.h[0][1], value);
            ch.h[1][0] = with_magnitude(ch.h[1][0], value);
        }
        SweepAxis::H12 => ch.h[0][1] = with_magnitude(ch.h[0][1], value),
        SweepAxis::H21 => ch.h[1][0] = with_magnitude(ch.h[1][0], value),
        SweepAxis::Power => ch.power = value,
    }
    ch
}

/// Classify every grid point of a one-axis sweep over `template`.
///
/// Rows come back in grid order. Invalid grid points produce a row with
/// `error` set instead of aborting the sweep.
pub fn classify_map(
    template: &GaussianIcChannel,
    axis: SweepAxis,
    grid: &[f64],
    mode: Mode,
) -> Result<Vec<MapRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("sweep grid value {v} is not finite")));
    }
    Ok(grid
        .par_iter()
        .map(|&value| {
            let ch = sweep_point(template, axis, value);
            let (grid_x, grid_y) = match axis {
                SweepAxis::Power => (ch.power, None),
                _ => (ch.h[0][1].norm(), Some(ch.h[1][0].norm())),
            };
            match ch.primitives() {
                Ok(p) => {
                    let c = classify(&p, mode);
                    MapRow {
                        grid_x,
                        grid_y,
                        regime: c.result.regime,
                        value: Some(c.result.value),
                        tie_flag: c.tie.is_some(),
                        error: None,
                    }
                }
                Err(e) => MapRow {
                    grid_x,
                    grid_y,
                    regime: None,
                    value: None,
                    tie_flag: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn prims(h11: f64, h12: f64, h21: f64, h22: f64, p: f64) -> RatePrimitives {
        GaussianIcChannel::real(h11, h12, h21, h22, p)
            .primitives()
            .unwrap()
    }

    fn strong() -> RatePrimitives {
        prims(1.0, 3.0, 3.0, 1.0, 1.0)
    }

    fn weak() -> RatePrimitives {
        prims(1.0, 0.1, 0.1, 1.0, 10.0)
    }

    fn asymmetric() -> RatePrimitives {
        prims(2.0, 1.0, 0.5, 1.0, 1.0)
    }

    fn cross_dominant() -> RatePrimitives {
        prims(0.1, 1.0, 1.0, 0.1, 10.0)
    }

    fn weak_sum() -> f64 {
        2.0 * (1.0 + 10.0 / 1.1f64).log2()
    }

    #[test]
    fn assignment_validation() {
        assert!(Assignment::new(0, 0).is_err());
        assert!(Assignment::new(3, 1).is_err());
        assert_eq!(Assignment::new(2, 1).unwrap(), Assignment::CROSSED);
        let p = strong();
        assert!(sumrate_assignment(&p, Assignment::TRADITIONAL, None).is_err());
        assert!(sumrate_assignment(&p, Assignment::JOINT_RX1, Some(DecodeConfig::SD_SD)).is_err());
        assert!(serde_json::from_str::<Assignment>("[0,0]").is_err());
    }

    #[test]
    fn per_assignment_sums() {
        let p = strong();
        let v = sumrate_assignment(&p, Assignment::TRADITIONAL, Some(DecodeConfig::SD_SD)).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        let v = sumrate_assignment(&p, Assignment::JOINT_RX1, None).unwrap();
        assert_abs_diff_eq!(v, 11f64.log2(), epsilon = 1e-12);

        let zero = prims(1.0, 0.0, 0.0, 1.0, 3.0);
        let v = sumrate_assignment(&zero, Assignment::TRADITIONAL, Some(DecodeConfig::IAN_IAN)).unwrap();
        assert_eq!(v, 4.0);

        let a = asymmetric();
        assert_eq!(sumrate_assignment(&a, Assignment::TX1_TO_RX1, None).unwrap(), a.r_if[0][0]);
        assert_eq!(sumrate_assignment(&a, Assignment::TX2_TO_RX2, None).unwrap(), a.r_if[1][1]);
        assert_eq!(sumrate_assignment(&a, Assignment::TX1_TO_RX2, None).unwrap(), a.r_if[1][0]);
        assert_eq!(sumrate_assignment(&a, Assignment::TX2_TO_RX1, None).unwrap(), a.r_if[0][1]);
        assert_eq!(sumrate_assignment(&a, Assignment::JOINT_RX2, None).unwrap(), a.mac_sum[1]);
    }

    #[test]
    fn crossed_assignment_mirrors_traditional() {
        let p = asymmetric();
        for cfg in DecodeConfig::ALL {
            let crossed = sumrate_assignment(&p, Assignment::CROSSED, Some(cfg)).unwrap();
            let relabeled = sumrate_assignment(&p.swap_transmitters(), Assignment::TRADITIONAL, Some(cfg)).unwrap();
            assert_eq!(crossed, relabeled);
        }
        let xx = sumrate_assignment(&p, Assignment::CROSSED, Some(DecodeConfig::IAN_IAN)).unwrap();
        assert_abs_diff_eq!(xx, p.r_ian[0][1] + p.r_ian[1][0], epsilon = 1e-15);
    }

    #[test]
    fn minmax_examples() {
        let s = sumrate_12_minmax(&strong());
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-12);
        assert_eq!(s.config, Some(DecodeConfig::SD_SD));
        assert_eq!(s.regime, Some(Regime::IfIf));
        let all: Vec<f64> = DecodeConfig::ALL
            .iter()
            .map(|&c| traditional_sum(&strong(), c))
            .collect();
        // xx, ox, xo, oo
        for (got, want) in all.iter().zip([0.2750, 1.1375, 1.1375, 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-4);
        }

        let w = sumrate_12_minmax(&weak());
        assert_abs_diff_eq!(w.value, weak_sum(), epsilon = 1e-12);
        assert_abs_diff_eq!(w.value, 6.66997, epsilon = 1e-5);
        assert_eq!(w.config, Some(DecodeConfig::IAN_IAN));

        let a = sumrate_12_minmax(&asymmetric());
        assert_abs_diff_eq!(a.value, 6f64.log2(), epsilon = 1e-12);
        assert_eq!(a.config, Some(DecodeConfig::SD_IAN));
        let all: Vec<f64> = DecodeConfig::ALL
            .iter()
            .map(|&c| traditional_sum(&asymmetric(), c))
            .collect();
        for (got, want) in all.iter().zip([2.4330, 2.5850, 1.1699, 1.1699]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-4);
        }
    }

    #[test]
    fn minmax_prefers_ian_on_ties() {
        // zero interference: every configuration reaches 4
        let s = sumrate_12_minmax(&prims(1.0, 0.0, 0.0, 1.0, 3.0));
        assert_eq!(s.value, 4.0);
        assert_eq!(s.config, Some(DecodeConfig::IAN_IAN));
    }

    #[test]
    fn traditional_examples() {
        let c = classify_12(&strong());
        assert_eq!(c.result.regime, Some(Regime::IfIf));
        assert_abs_diff_eq!(c.result.value, 2.0, epsilon = 1e-12);
        assert!(c.tie.is_none());

        let c = classify_12(&weak());
        assert_eq!(c.result.regime, Some(Regime::IanIan));
        assert_abs_diff_eq!(c.result.value, weak_sum(), epsilon = 1e-12);

        let p = asymmetric();
        assert_abs_diff_eq!(p.r_if[0][0], 2.3219, epsilon = 1e-4);
        assert_abs_diff_eq!(p.r_ian[0][1].min(p.r_ian[1][1]), 0.2630, epsilon = 1e-4);
        assert_abs_diff_eq!(p.mac_sum[1], 1.1699, epsilon = 1e-4);
        assert_abs_diff_eq!(p.r_if[1][0], 0.3219, epsilon = 1e-4);
        let c = classify_12(&p);
        assert_eq!(c.result.regime, Some(Regime::Rx1Decodes));
        assert_eq!(c.result.config, Some(DecodeConfig::SD_IAN));
        assert_abs_diff_eq!(c.result.value, 6f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn generalized_examples() {
        let c = classify_generalized(&weak());
        assert_eq!(c.result.regime, Some(Regime::IanIan));
        assert_abs_diff_eq!(c.result.value, weak_sum(), epsilon = 1e-12);

        let c = classify_generalized(&cross_dominant());
        assert_eq!(c.result.regime, Some(Regime::CrossIan));
        assert_eq!(c.result.assignment, Assignment::CROSSED);
        assert_abs_diff_eq!(c.result.value, weak_sum(), epsilon = 1e-12);

        // Cross links of gain 3 against direct links of gain 1: the crossed
        // assignment with both receivers treating interference as noise
        // carries 2·log2(5.5), above the joint MAC sum log2(11).
        let c = classify_generalized(&strong());
        assert_eq!(c.result.regime, Some(Regime::CrossIan));
        assert_abs_diff_eq!(c.result.value, 2.0 * 5.5f64.log2(), epsilon = 1e-12);
        assert!(c.result.value > 11f64.log2());
    }

    #[test]
    fn generalized_joint_transmission() {
        // moderate interference, receiver 1 has the stronger MAC
        let p = prims(1.5, 1.0, 0.8, 1.0, 4.0);
        let c = classify_generalized(&p);
        assert_eq!(c.result.regime, Some(Regime::JointMacRx1));
        assert_eq!(c.result.assignment, Assignment::JOINT_RX1);
        assert_abs_diff_eq!(c.result.value, p.mac_sum[0], epsilon = 1e-12);
        assert_abs_diff_eq!(c.result.value, oracle_generalized(&p).value, epsilon = 1e-9);
    }

    #[test]
    fn oracle_examples() {
        let o = oracle_generalized(&strong());
        assert_eq!(o.assignment, Assignment::CROSSED);
        assert_eq!(o.config, Some(DecodeConfig::IAN_IAN));
        assert_abs_diff_eq!(o.value, 2.0 * 5.5f64.log2(), epsilon = 1e-12);

        let o = oracle_generalized(&prims(1.0, 0.0, 0.0, 1.0, 3.0));
        assert_eq!(o.value, 4.0);
        assert_eq!((o.assignment, o.config), (Assignment::TRADITIONAL, Some(DecodeConfig::IAN_IAN)));

        let o = oracle_generalized(&cross_dominant());
        assert_eq!((o.assignment, o.config), (Assignment::CROSSED, Some(DecodeConfig::IAN_IAN)));
        assert_abs_diff_eq!(o.value, weak_sum(), epsilon = 1e-12);
        assert_eq!(candidates(&strong()).len(), 14);
    }

    /// Cross gain at which `r_if[0][1] = r_ian[1][1]` on the unit-direct
    /// symmetric channel: with `u = g²P`, `u(1 + u) = P`.
    fn tie_gain(power: f64) -> f64 {
        let u = (-1.0 + (1.0 + 4.0 * power).sqrt()) / 2.0;
        (u / power).sqrt()
    }

    #[test]
    fn boundary_tie_defers_to_oracle() {
        // |h12|²P = |h22|²P / (1 + |h21|²P) puts r_if[0][1] exactly on r_ian[1][1]
        let h12 = (1.0f64 / 1.1).sqrt();
        let p = prims(2.0, h12, 0.1, 1.0, 10.0);
        assert_abs_diff_eq!(p.r_if[0][1], p.r_ian[1][1], epsilon = 1e-12);
        let c = classify_12(&p);
        let tie = c.tie.expect("tie expected");
        assert!(tie.comparison.contains("r_ian[1][1]"), "{}", tie.comparison);
        assert!(tie.candidates.contains(&Regime::IanIan));
        assert_ne!(tie.candidates[0], tie.candidates[1]);
        assert_abs_diff_eq!(c.result.value, sumrate_12_minmax(&p).value, epsilon = 1e-12);

        let c = classify_generalized(&p);
        assert!(c.tie.is_some());
        assert_abs_diff_eq!(c.result.value, oracle_generalized(&p).value, epsilon = 1e-12);

        // symmetric tie point: both halves of the treat-as-noise test tie
        let g = tie_gain(10.0);
        let p = prims(1.0, g, g, 1.0, 10.0);
        assert_abs_diff_eq!(p.r_if[0][1], p.r_ian[1][1], epsilon = 1e-12);
        assert!(classify_12(&p).tie.is_some());
    }

    #[test]
    fn result_json() {
        let r = classify_12(&asymmetric()).result;
        let v = serde_json::to_value(r).unwrap();
        assert_eq!(v["assignment"], serde_json::json!([1, 2]));
        assert_eq!(v["config"], "ox");
        assert_eq!(v["regime"], "RX1_DECODES");
        let back: SumRateResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);

        let joint = SumRateResult {
            value: 1.5,
            assignment: Assignment::JOINT_RX2,
            config: None,
            regime: None,
        };
        let v = serde_json::to_value(joint).unwrap();
        assert_eq!(v["config"], "none");
        assert_eq!(v["regime"], "none");
        assert_eq!(serde_json::from_value::<SumRateResult>(v).unwrap(), joint);
    }

    #[test]
    fn sweep_spec_parsing() {
        let s: SweepSpec = "cross:0.1:3:5:log".parse().unwrap();
        assert_eq!(s.axis, SweepAxis::Cross);
        let v = s.values();
        assert_eq!(v.len(), 5);
        assert_abs_diff_eq!(v[0], 0.1, epsilon = 1e-15);
        assert_eq!(v[4], 3.0);
        assert!("cross:0.1:3:1".parse::<SweepSpec>().is_err());
        assert!("cross:3:0.1:4".parse::<SweepSpec>().is_err());
        assert!("cross:0:3:4:log".parse::<SweepSpec>().is_err());
        assert!("gain:0:3:4".parse::<SweepSpec>().is_err());
        assert!("power:0:3".parse::<SweepSpec>().is_err());
        let lin: SweepSpec = "power:0:10:3".parse().unwrap();
        assert_eq!(lin.values(), vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn regime_map() {
        let template = GaussianIcChannel::real(1.0, 0.0, 0.0, 1.0, 1.0);
        let rows = classify_map(&template, SweepAxis::Cross, &[0.1, 3.0], Mode::Traditional).unwrap();
        // at P = 1 the weak endpoint is already treat-as-noise territory
        assert_eq!(rows[0].regime, Some(Regime::IanIan));
        assert_eq!(rows[1].regime, Some(Regime::IfIf));
        assert_eq!(rows[1].grid_y, Some(3.0));

        let weak_template = GaussianIcChannel::real(1.0, 0.0, 0.0, 1.0, 10.0);
        let rows = classify_map(&weak_template, SweepAxis::Cross, &[0.1], Mode::Traditional).unwrap();
        assert_abs_diff_eq!(rows[0].value.unwrap(), weak_sum(), epsilon = 1e-12);

        assert!(classify_map(&template, SweepAxis::Cross, &[], Mode::Traditional).is_err());

        let g = tie_gain(10.0);
        let rows = classify_map(&weak_template, SweepAxis::Cross, &[0.1, g], Mode::Traditional).unwrap();
        assert_eq!(rows.iter().map(|r| r.tie_flag).collect::<Vec<_>>(), [false, true]);

        let rows = classify_map(&template, SweepAxis::Power, &[1.0, -1.0], Mode::Generalized).unwrap();
        assert!(rows[0].error.is_none());
        assert!(rows[1].error.as_deref().unwrap().contains("power"));
        assert_eq!(rows[1].grid_y, None);
    }

    #[test]
    fn sweep_keeps_phase() {
        let template = GaussianIcChannel::new(
            [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
            1.0,
        );
        let ch = sweep_point(&template, SweepAxis::Cross, 0.5);
        assert_abs_diff_eq!(ch.h[0][1].im, 0.5, epsilon = 1e-15);
        assert_eq!(ch.h[1][0], Complex64::new(0.5, 0.0));
    }
}
