//! The achievable region of the traditional assignment (transmitter `i`
//! serves receiver `i`) as an explicit union of convex pieces.
//!
//! Each receiver either treats the interfering signal as noise (one bound on
//! its own rate) or decodes it jointly with its own message (three MAC
//! bounds). The region is the union, over the four configurations, of the
//! intersection of the two receivers' constraint sets. No time sharing is
//! applied across pieces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::RatePrimitives;
use crate::error::{Error, Result};
use crate::TOLERANCE;

/// What a receiver does with the interfering message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decoding {
    /// Decode the interfering message jointly with the desired one.
    Decode,
    /// Treat the interfering signal as noise.
    Ian,
}

impl Decoding {
    fn code(self) -> char {
        match self {
            Decoding::Decode => 'o',
            Decoding::Ian => 'x',
        }
    }

    fn region_label(self) -> &'static str {
        match self {
            Decoding::Decode => "SD",
            Decoding::Ian => "IAN",
        }
    }
}

/// Per-receiver decoding choice `(b1, b2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DecodeConfig {
    pub b1: Decoding,
    pub b2: Decoding,
}

impl DecodeConfig {
    pub const IAN_IAN: Self = Self::new(Decoding::Ian, Decoding::Ian);
    pub const SD_IAN: Self = Self::new(Decoding::Decode, Decoding::Ian);
    pub const IAN_SD: Self = Self::new(Decoding::Ian, Decoding::Decode);
    pub const SD_SD: Self = Self::new(Decoding::Decode, Decoding::Decode);

    /// All four configurations, in tie-break priority order.
    pub const ALL: [Self; 4] = [Self::IAN_IAN, Self::SD_IAN, Self::IAN_SD, Self::SD_SD];

    pub const fn new(b1: Decoding, b2: Decoding) -> Self {
        Self { b1, b2 }
    }

    pub fn at(self, rx: usize) -> Decoding {
        if rx == 0 {
            self.b1
        } else {
            self.b2
        }
    }

    /// Two-letter code: `o` decodes interference, `x` treats it as noise.
    pub fn code(self) -> String {
        [self.b1.code(), self.b2.code()].iter().collect()
    }

    /// Piece label such as `SD-IAN`.
    pub fn region_label(self) -> String {
        format!("{}-{}", self.b1.region_label(), self.b2.region_label())
    }

    pub fn from_region_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.region_label() == label)
    }
}

impl fmt::Display for DecodeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl FromStr for DecodeConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.code() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown decode configuration {s:?}")))
    }
}

impl Serialize for DecodeConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.code())
    }
}

impl<'de> Deserialize<'de> for DecodeConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Linear constraint `a[0]·R1 + a[1]·R2 <= b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub a: [f64; 2],
    pub b: f64,
}

impl HalfPlane {
    pub fn new(a1: f64, a2: f64, b: f64) -> Self {
        Self { a: [a1, a2], b }
    }

    pub fn slack(&self, point: [f64; 2]) -> f64 {
        self.b - (self.a[0] * point[0] + self.a[1] * point[1])
    }

    pub fn holds(&self, point: [f64; 2]) -> bool {
        self.slack(point) >= -TOLERANCE
    }
}

impl Serialize for HalfPlane {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a[0], self.a[1], self.b].serialize(s)
    }
}

impl<'de> Deserialize<'de> for HalfPlane {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a1, a2, b] = <[f64; 3]>::deserialize(d)?;
        Ok(Self::new(a1, a2, b))
    }
}

/// The constraint set one receiver imposes under one decoding choice.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentRegion {
    /// Zero-based receiver index.
    pub receiver: usize,
    pub kind: Decoding,
    pub bounds: Vec<HalfPlane>,
}

/// Constraints of receiver `receiver` (zero-based) under `kind`.
///
/// Treating interference as noise bounds only the receiver's own rate by
/// `r_ian[i][i]`; simultaneous decoding imposes the MAC bounds
/// `R_i <= r_if[i][i]`, `R_j <= r_if[i][j]`, `R_1 + R_2 <= mac_sum[i]`.
pub fn component_region(prims: &RatePrimitives, receiver: usize, kind: Decoding) -> ComponentRegion {
    assert!(receiver < 2, "receiver index must be 0 or 1");
    let own = receiver;
    let other = 1 - receiver;
    let unit = |k: usize| if k == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
    let single = |k: usize, b: f64| {
        let a = unit(k);
        HalfPlane::new(a[0], a[1], b)
    };
    let bounds = match kind {
        Decoding::Ian => vec![single(own, prims.r_ian[own][own])],
        Decoding::Decode => vec![
            single(own, prims.r_if[own][own]),
            single(other, prims.r_if[own][other]),
            HalfPlane::new(1.0, 1.0, prims.mac_sum[own]),
        ],
    };
    ComponentRegion {
        receiver,
        kind,
        bounds,
    }
}

/// One convex piece: the intersection of both receivers' constraints with the
/// first quadrant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionPiece {
    #[serde(with = "region_label")]
    pub config: DecodeConfig,
    /// Counterclockwise, starting from the vertex closest to the origin.
    pub vertices: Vec<[f64; 2]>,
    /// Defining constraints `[a1, a2, b]`, excluding the coordinate axes.
    pub bounds: Vec<HalfPlane>,
}

mod region_label {
    use super::DecodeConfig;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &DecodeConfig, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&c.region_label())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DecodeConfig, D::Error> {
        let s = String::deserialize(d)?;
        DecodeConfig::from_region_label(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown piece label {s:?}")))
    }
}

impl RegionPiece {
    fn from_bounds(config: DecodeConfig, bounds: Vec<HalfPlane>) -> Self {
        let vertices = enumerate_vertices(&bounds);
        Self {
            config,
            vertices,
            bounds,
        }
    }

    pub fn contains(&self, point: [f64; 2]) -> bool {
        point[0] >= -TOLERANCE
            && point[1] >= -TOLERANCE
            && self.bounds.iter().all(|h| h.holds(point))
    }
}

/// Union of convex pieces, possibly overlapping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionPolygon {
    pub pieces: Vec<RegionPiece>,
}

impl RegionPolygon {
    pub fn piece(&self, config: DecodeConfig) -> Option<&RegionPiece> {
        self.pieces.iter().find(|p| p.config == config)
    }

    pub fn contains(&self, point: [f64; 2]) -> bool {
        contains(self, point)
    }
}

/// The four pieces in the order IAN-IAN, SD-IAN, IAN-SD, SD-SD.
pub fn capacity_region(prims: &RatePrimitives) -> RegionPolygon {
    let order = [
        DecodeConfig::IAN_IAN,
        DecodeConfig::SD_IAN,
        DecodeConfig::IAN_SD,
        DecodeConfig::SD_SD,
    ];
    let pieces = order
        .into_iter()
        .map(|config| {
            let mut bounds = component_region(prims, 0, config.b1).bounds;
            bounds.extend(component_region(prims, 1, config.b2).bounds);
            RegionPiece::from_bounds(config, bounds)
        })
        .collect();
    RegionPolygon { pieces }
}

/// Membership in the union, with [`TOLERANCE`] slack on every constraint.
pub fn contains(region: &RegionPolygon, point: [f64; 2]) -> bool {
    region.pieces.iter().any(|p| p.contains(point))
}

/// Maximum of `w1·R1 + w2·R2` over the region and one maximizing vertex.
///
/// Ties (within 1e-12) go to the lexicographically largest vertex.
pub fn max_weighted_sum(region: &RegionPolygon, w1: f64, w2: f64) -> Result<(f64, [f64; 2])> {
    if !(w1.is_finite() && w2.is_finite()) || w1 < 0.0 || w2 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "weights must be finite and nonnegative, got ({w1}, {w2})"
        )));
    }
    if w1 == 0.0 && w2 == 0.0 {
        return Err(Error::InvalidArgument("weights must not both be zero".into()));
    }
    const TIE: f64 = 1e-12;
    let mut best: Option<(f64, [f64; 2])> = None;
    for v in region.pieces.iter().flat_map(|p| p.vertices.iter().copied()) {
        let value = w1 * v[0] + w2 * v[1];
        best = match best {
            None => Some((value, v)),
            Some((b, _)) if value > b + TIE => Some((value, v)),
            Some((b, bv)) if (value - b).abs() <= TIE && lex_greater(v, bv) => Some((value.max(b), v)),
            keep => keep,
        };
    }
    best.ok_or_else(|| Error::InvalidArgument("region has no vertices".into()))
}

fn lex_greater(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0] > b[0] || (a[0] == b[0] && a[1] > b[1])
}

/// Vertices of `{R >= 0} ∩ bounds` by pairwise intersection of the boundary
/// lines, keeping feasible points.
fn enumerate_vertices(bounds: &[HalfPlane]) -> Vec<[f64; 2]> {
    let mut lines = vec![HalfPlane::new(-1.0, 0.0, 0.0), HalfPlane::new(0.0, -1.0, 0.0)];
    lines.extend_from_slice(bounds);

    let feasible = |p: [f64; 2]| lines.iter().all(|h| h.holds(p));
    let mut points: Vec<[f64; 2]> = Vec::new();
    for (k, first) in lines.iter().enumerate() {
        for second in &lines[k + 1..] {
            let det = first.a[0] * second.a[1] - first.a[1] * second.a[0];
            if det.abs() < 1e-15 {
                continue;
            }
            let r1 = (first.b * second.a[1] - first.a[1] * second.b) / det;
            let r2 = (first.a[0] * second.b - first.b * second.a[0]) / det;
            let p = [r1.max(0.0), r2.max(0.0)];
            if feasible(p) && !points.iter().any(|q| near(*q, p)) {
                points.push(p);
            }
        }
    }
    sort_counterclockwise(&mut points);
    points
}

fn near(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12
}

fn sort_counterclockwise(points: &mut [[f64; 2]]) {
    if points.len() < 2 {
        return;
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let angle = |p: &[f64; 2]| (p[1] - cy).atan2(p[0] - cx);
    points.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    let first = points
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (a[0] + a[1]).total_cmp(&(b[0] + b[1])))
        .map(|(k, _)| k)
        .unwrap_or(0);
    points.rotate_left(first);
}
