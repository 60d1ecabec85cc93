//! Channel models and the information quantities derived from them.
//!
//! Receivers and transmitters are indexed from zero in code: `r_if[0][1]` is
//! the rate of transmitter 2's message at receiver 1 with transmitter 1's
//! message known. Noise at each receiver is unit-variance circularly
//! symmetric complex Gaussian and both transmitters use the same power.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on pmf normalisation.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Largest joint support `|X1|·|X2|·|Y1|·|Y2|` accepted by [`DmcIcChannel::primitives`].
pub const MAX_JOINT_ENTRIES: u128 = 1 << 24;

/// A single failed invariant, naming the offending field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// The twelve scalar information quantities, in bits per channel use.
///
/// - `r_if[i][j]` = I(X_j; Y_i | X_other): rate of message `j` at receiver `i`
///   with the other message known.
/// - `r_ian[i][j]` = I(X_j; Y_i): rate of message `j` at receiver `i` with the
///   other signal treated as noise.
/// - `mac_sum[i]` = I(X_1, X_2; Y_i).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePrimitives {
    pub r_if: [[f64; 2]; 2],
    pub r_ian: [[f64; 2]; 2],
    pub mac_sum: [f64; 2],
}

impl RatePrimitives {
    /// Relabel the transmitters (message 1 becomes message 2 and vice versa).
    /// Receivers keep their labels.
    pub fn swap_transmitters(&self) -> Self {
        let swap = |m: [[f64; 2]; 2]| [[m[0][1], m[0][0]], [m[1][1], m[1][0]]];
        Self {
            r_if: swap(self.r_if),
            r_ian: swap(self.r_ian),
            mac_sum: self.mac_sum,
        }
    }

    /// Relabel both users: transmitter/receiver pair 1 becomes pair 2.
    pub fn swap_users(&self) -> Self {
        let swap = |m: [[f64; 2]; 2]| [[m[1][1], m[1][0]], [m[0][1], m[0][0]]];
        Self {
            r_if: swap(self.r_if),
            r_ian: swap(self.r_ian),
            mac_sum: [self.mac_sum[1], self.mac_sum[0]],
        }
    }

    /// Largest deviation from the chain rule `mac_sum[i] = r_if[i][j] + r_ian[i][other]`
    /// over both receivers and both decoding orders.
    pub fn chain_rule_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let residual = self.mac_sum[i] - (self.r_if[i][j] + self.r_ian[i][1 - j]);
                worst = worst.max(residual.abs());
            }
        }
        worst
    }
}

/// Two-user SISO Gaussian interference channel `y_i = h_i1 x_1 + h_i2 x_2 + z_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "GaussianWire", into = "GaussianWire")]
pub struct GaussianIcChannel {
    /// `h[i][j]` is the gain from transmitter `j` to receiver `i`.
    pub h: [[Complex64; 2]; 2],
    /// Linear transmit power, identical at both transmitters.
    pub power: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianWire {
    h: [[f64; 2]; 4],
    power: f64,
}

impl From<GaussianWire> for GaussianIcChannel {
    fn from(w: GaussianWire) -> Self {
        let c = |k: usize| Complex64::new(w.h[k][0], w.h[k][1]);
        Self {
            h: [[c(0), c(1)], [c(2), c(3)]],
            power: w.power,
        }
    }
}

impl From<GaussianIcChannel> for GaussianWire {
    fn from(ch: GaussianIcChannel) -> Self {
        let mut h = [[0.0; 2]; 4];
        for (k, g) in ch.h.iter().flatten().enumerate() {
            h[k] = [g.re, g.im];
        }
        Self {
            h,
            power: ch.power,
        }
    }
}

impl GaussianIcChannel {
    pub fn new(h: [[Complex64; 2]; 2], power: f64) -> Self {
        Self { h, power }
    }

    /// Channel with real gains `h11, h12, h21, h22`.
    pub fn real(h11: f64, h12: f64, h21: f64, h22: f64, power: f64) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self {
            h: [[c(h11), c(h12)], [c(h21), c(h22)]],
            power,
        }
    }

    /// Swap the two transmitter/receiver pairs.
    pub fn swap_users(&self) -> Self {
        let h = self.h;
        Self {
            h: [[h[1][1], h[1][0]], [h[0][1], h[0][0]]],
            power: self.power,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.power.is_finite() {
            out.push(Violation::new("power", "must be finite"));
        } else if self.power < 0.0 {
            out.push(Violation::new(
                "power",
                format!("must satisfy power >= 0, got {}", self.power),
            ));
        }
        for i in 0..2 {
            for j in 0..2 {
                let g = self.h[i][j];
                if !(g.re.is_finite() && g.im.is_finite()) {
                    out.push(Violation::new(
                        format!("h{}{}", i + 1, j + 1),
                        "gain components must be finite",
                    ));
                }
            }
        }
        out
    }

    /// Closed-form primitives: `log2(1 + |h_ij|²P)`,
    /// `log2(1 + |h_ij|²P / (1 + |h_i,other|²P))` and `log2(1 + P Σ_j |h_ij|²)`.
    pub fn primitives(&self) -> Result<RatePrimitives> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidChannel(violations));
        }
        let snr = |i: usize, j: usize| self.h[i][j].norm_sqr() * self.power;
        let mut p = RatePrimitives {
            r_if: [[0.0; 2]; 2],
            r_ian: [[0.0; 2]; 2],
            mac_sum: [0.0; 2],
        };
        for i in 0..2 {
            for j in 0..2 {
                p.r_if[i][j] = log2_1p(snr(i, j));
                p.r_ian[i][j] = log2_1p(snr(i, j) / (1.0 + snr(i, 1 - j)));
            }
            p.mac_sum[i] = log2_1p(snr(i, 0) + snr(i, 1));
        }
        Ok(p)
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Two-user discrete memoryless interference channel with fixed,
/// independent input distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmcIcChannel {
    /// Input alphabet sizes `[|X1|, |X2|]`.
    pub nx: [usize; 2],
    /// Output alphabet sizes `[|Y1|, |Y2|]`.
    pub ny: [usize; 2],
    /// `p(y1, y2 | x1, x2)`, flattened row-major over `(x1, x2, y1, y2)`.
    pub p: Vec<f64>,
    pub px1: Vec<f64>,
    pub px2: Vec<f64>,
}

impl DmcIcChannel {
    /// Build a channel from a transition function.
    pub fn from_fn(
        nx: [usize; 2],
        ny: [usize; 2],
        px1: Vec<f64>,
        px2: Vec<f64>,
        mut transition: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut p = Vec::with_capacity(nx[0] * nx[1] * ny[0] * ny[1]);
        for x1 in 0..nx[0] {
            for x2 in 0..nx[1] {
                for y1 in 0..ny[0] {
                    for y2 in 0..ny[1] {
                        p.push(transition(x1, x2, y1, y2));
                    }
                }
            }
        }
        Self {
            nx,
            ny,
            p,
            px1,
            px2,
        }
    }

    fn joint_entries(&self) -> u128 {
        self.nx
            .iter()
            .chain(self.ny.iter())
            .map(|&n| n as u128)
            .product()
    }

    fn index(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> usize {
        ((x1 * self.nx[1] + x2) * self.ny[0] + y1) * self.ny[1] + y2
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, n) in [
            ("nx[0]", self.nx[0]),
            ("nx[1]", self.nx[1]),
            ("ny[0]", self.ny[0]),
            ("ny[1]", self.ny[1]),
        ] {
            if n == 0 {
                out.push(Violation::new(name, "alphabet size must be positive"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        check_pmf("px1", &self.px1, self.nx[0], &mut out);
        check_pmf("px2", &self.px2, self.nx[1], &mut out);

        let expected = self.joint_entries();
        if self.p.len() as u128 != expected {
            out.push(Violation::new(
                "p",
                format!("expected {} entries, got {}", expected, self.p.len()),
            ));
            return out;
        }
        if let Some(k) = self.p.iter().position(|v| !v.is_finite() || *v < 0.0) {
            out.push(Violation::new(
                "p",
                format!("entry {} is negative or not finite", k),
            ));
            return out;
        }
        let slice = self.ny[0] * self.ny[1];
        for x1 in 0..self.nx[0] {
            for x2 in 0..self.nx[1] {
                let start = self.index(x1, x2, 0, 0);
                let total = compensated_sum(self.p[start..start + slice].iter().copied());
                if (total - 1.0).abs() > PMF_TOLERANCE {
                    out.push(Violation::new(
                        format!("p[x1={x1}, x2={x2}]"),
                        format!("conditional slice sums to {total}, expected 1"),
                    ));
                }
            }
        }
        out
    }

    /// Primitives by exhaustive summation over `p(x1) p(x2) p(y1, y2 | x1, x2)`.
    pub fn primitives(&self) -> Result<RatePrimitives> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidChannel(violations));
        }
        let entries = self.joint_entries();
        if entries > MAX_JOINT_ENTRIES {
            return Err(Error::SupportTooLarge {
                entries,
                cap: MAX_JOINT_ENTRIES,
            });
        }

        let mut p = RatePrimitives {
            r_if: [[0.0; 2]; 2],
            r_ian: [[0.0; 2]; 2],
            mac_sum: [0.0; 2],
        };
        for rx in 0..2 {
            let e = self.receiver_entropies(rx);
            // Information quantities are differences of entropies; clamp the
            // rounding residue below zero.
            let nonneg = |x: f64| x.max(0.0);
            p.r_if[rx][0] = nonneg(e.given_x2 - e.given_both);
            p.r_if[rx][1] = nonneg(e.given_x1 - e.given_both);
            p.r_ian[rx][0] = nonneg(e.output - e.given_x1);
            p.r_ian[rx][1] = nonneg(e.output - e.given_x2);
            p.mac_sum[rx] = nonneg(e.output - e.given_both);
        }
        Ok(p)
    }

    /// Joint law `q(x1, x2, y)` of both inputs and the output of receiver `rx`,
    /// flattened over `(x1, x2, y)`.
    fn receiver_joint(&self, rx: usize) -> Vec<f64> {
        let ny = self.ny[rx];
        let mut q = vec![0.0; self.nx[0] * self.nx[1] * ny];
        for x1 in 0..self.nx[0] {
            for x2 in 0..self.nx[1] {
                let weight = self.px1[x1] * self.px2[x2];
                for y in 0..ny {
                    let marginal = match rx {
                        0 => compensated_sum((0..self.ny[1]).map(|y2| self.p[self.index(x1, x2, y, y2)])),
                        _ => compensated_sum((0..self.ny[0]).map(|y1| self.p[self.index(x1, x2, y1, y)])),
                    };
                    q[(x1 * self.nx[1] + x2) * ny + y] = weight * marginal;
                }
            }
        }
        q
    }

    fn receiver_entropies(&self, rx: usize) -> Entropies {
        let (n1, n2, ny) = (self.nx[0], self.nx[1], self.ny[rx]);
        let q = self.receiver_joint(rx);
        let at = |x1: usize, x2: usize, y: usize| q[(x1 * n2 + x2) * ny + y];

        let mut q_x1y = vec![0.0; n1 * ny];
        let mut q_x2y = vec![0.0; n2 * ny];
        let mut q_y = vec![0.0; ny];
        for y in 0..ny {
            for x1 in 0..n1 {
                q_x1y[x1 * ny + y] = compensated_sum((0..n2).map(|x2| at(x1, x2, y)));
            }
            for x2 in 0..n2 {
                q_x2y[x2 * ny + y] = compensated_sum((0..n1).map(|x1| at(x1, x2, y)));
            }
            q_y[y] = compensated_sum((0..n1).map(|x1| q_x1y[x1 * ny + y]));
        }

        let given_both = conditional_entropy(
            (0..n1).flat_map(|x1| {
                (0..n2).flat_map(move |x2| (0..ny).map(move |y| (x1, x2, y)))
            })
            .map(|(x1, x2, y)| (at(x1, x2, y), self.px1[x1] * self.px2[x2])),
        );
        let given_x1 = conditional_entropy(
            (0..n1 * ny).map(|k| (q_x1y[k], self.px1[k / ny])),
        );
        let given_x2 = conditional_entropy(
            (0..n2 * ny).map(|k| (q_x2y[k], self.px2[k / ny])),
        );
        let output = conditional_entropy(q_y.iter().map(|&v| (v, 1.0)));
        Entropies {
            output,
            given_x1,
            given_x2,
            given_both,
        }
    }
}

struct Entropies {
    output: f64,
    given_x1: f64,
    given_x2: f64,
    given_both: f64,
}

fn check_pmf(field: &str, pmf: &[f64], len: usize, out: &mut Vec<Violation>) {
    if pmf.len() != len {
        out.push(Violation::new(
            field,
            format!("expected {} entries, got {}", len, pmf.len()),
        ));
        return;
    }
    if pmf.iter().any(|v| !v.is_finite() || *v < 0.0) {
        out.push(Violation::new(field, "entries must be finite and nonnegative"));
        return;
    }
    let total = compensated_sum(pmf.iter().copied());
    if (total - 1.0).abs() > PMF_TOLERANCE {
        out.push(Violation::new(
            field,
            format!("sums to {total}, expected 1"),
        ));
    }
}

/// `-Σ joint · log2(joint / condition)` over `(joint, condition)` pairs, with
/// `0 · log 0 = 0`.
fn conditional_entropy(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    -compensated_sum(terms.filter(|(joint, _)| *joint > 0.0).map(|(joint, cond)| {
        joint * (joint / cond).log2()
    }))
}

/// Neumaier's compensated summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut compensation = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Either channel model, as read from a channel description document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Channel {
    Gaussian(GaussianIcChannel),
    Dmc(DmcIcChannel),
}

impl Channel {
    pub fn validate(&self) -> Vec<Violation> {
        match self {
            Channel::Gaussian(ch) => ch.validate(),
            Channel::Dmc(ch) => ch.validate(),
        }
    }

    pub fn primitives(&self) -> Result<RatePrimitives> {
        match self {
            Channel::Gaussian(ch) => ch.primitives(),
            Channel::Dmc(ch) => ch.primitives(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl From<GaussianIcChannel> for Channel {
    fn from(ch: GaussianIcChannel) -> Self {
        Channel::Gaussian(ch)
    }
}

impl From<DmcIcChannel> for Channel {
    fn from(ch: DmcIcChannel) -> Self {
        Channel::Dmc(ch)
    }
}
