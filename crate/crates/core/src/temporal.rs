//! Two-clock time base and the spike/edge/pulse signal algebra.
//!
//! All functional simulation happens on integer `aclk` ticks inside one
//! gamma cycle. A [`TemporalValue`] is the tick at which an edge-encoded
//! signal rises, or [`TemporalValue::INF`] when it never does. A
//! [`BinaryTrace`] is the per-tick level of a single wire across one gamma
//! cycle.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default unit clock frequency (100 kHz).
pub const DEFAULT_ACLK_FREQ_HZ: f64 = 1.0e5;

/// Default gamma period for 3-bit weights.
pub const DEFAULT_GAMMA_PERIOD_TICKS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemporalError {
    #[error("aclk frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("gamma period of {period} ticks cannot hold a {ramp}-tick ramp")]
    GammaTooShort { period: u32, ramp: u32 },
    #[error("time {time} is outside a gamma cycle of {period} ticks")]
    OutOfRange { time: u32, period: u32 },
    #[error("trace has {len} ticks, expected {period}")]
    TraceLength { len: usize, period: u32 },
}

/// Unit clock frequency plus the gamma period measured in unit ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockConfig {
    pub aclk_freq_hz: f64,
    pub gamma_period_ticks: u32,
}

impl ClockConfig {
    pub fn new(
        aclk_freq_hz: f64,
        gamma_period_ticks: u32,
        weight_bits: u8,
    ) -> Result<Self, TemporalError> {
        let cfg = Self {
            aclk_freq_hz,
            gamma_period_ticks,
        };
        cfg.validate(weight_bits)?;
        Ok(cfg)
    }

    /// Checks that a full `2^weight_bits` ramp fits inside one gamma cycle.
    pub fn validate(&self, weight_bits: u8) -> Result<(), TemporalError> {
        if !self.aclk_freq_hz.is_finite() || self.aclk_freq_hz <= 0.0 {
            return Err(TemporalError::NonPositiveFrequency(self.aclk_freq_hz));
        }
        let ramp = 1u32 << weight_bits;
        if self.gamma_period_ticks < ramp {
            return Err(TemporalError::GammaTooShort {
                period: self.gamma_period_ticks,
                ramp,
            });
        }
        Ok(())
    }

    /// Wall-clock length of one gamma cycle in seconds.
    pub fn gamma_period_secs(&self) -> f64 {
        f64::from(self.gamma_period_ticks) / self.aclk_freq_hz
    }
}

impl Default for ClockConfig {
    fn default() -> Self {
        Self {
            aclk_freq_hz: DEFAULT_ACLK_FREQ_HZ,
            gamma_period_ticks: DEFAULT_GAMMA_PERIOD_TICKS,
        }
    }
}

/// Spike time within a gamma cycle, in aclk ticks, or "no spike".
///
/// `INF` orders after every finite time, so `min` over a set of values
/// yields the earliest spike and ignores absent ones.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TemporalValue(u32);

impl TemporalValue {
    pub const INF: TemporalValue = TemporalValue(u32::MAX);

    /// A finite spike at `tick`. Range against a gamma period is checked by
    /// [`TemporalValue::checked`].
    pub const fn at(tick: u32) -> Self {
        debug_assert!(tick != u32::MAX);
        TemporalValue(tick)
    }

    pub fn checked(tick: u32, gamma_period_ticks: u32) -> Result<Self, TemporalError> {
        if tick >= gamma_period_ticks {
            return Err(TemporalError::OutOfRange {
                time: tick,
                period: gamma_period_ticks,
            });
        }
        Ok(TemporalValue(tick))
    }

    pub const fn from_option(tick: Option<u32>) -> Self {
        match tick {
            Some(t) => TemporalValue::at(t),
            None => TemporalValue::INF,
        }
    }

    pub const fn time(self) -> Option<u32> {
        if self.is_inf() {
            None
        } else {
            Some(self.0)
        }
    }

    pub const fn is_inf(self) -> bool {
        self.0 == u32::MAX
    }

    pub const fn is_finite(self) -> bool {
        !self.is_inf()
    }

    /// True when this value is a legal time for the given gamma period.
    pub fn fits(self, gamma_period_ticks: u32) -> bool {
        self.is_inf() || self.0 < gamma_period_ticks
    }
}

impl Ord for TemporalValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for TemporalValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for TemporalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for TemporalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.time() {
            Some(t) => write!(f, "{t}"),
            None => f.write_str("INF"),
        }
    }
}

impl From<Option<u32>> for TemporalValue {
    fn from(v: Option<u32>) -> Self {
        TemporalValue::from_option(v)
    }
}

// Serialized as a tick number, or `null` for INF.
impl Serialize for TemporalValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.time().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TemporalValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let t = Option::<u32>::deserialize(d)?;
        if t == Some(u32::MAX) {
            return Err(serde::de::Error::custom("tick value reserved for INF"));
        }
        Ok(TemporalValue::from_option(t))
    }
}

/// Per-tick 0/1 levels of one wire over one gamma cycle.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryTrace {
    ticks: Vec<bool>,
}

impl BinaryTrace {
    pub fn zeros(gamma_period_ticks: u32) -> Self {
        Self {
            ticks: vec![false; gamma_period_ticks as usize],
        }
    }

    pub fn ones(gamma_period_ticks: u32) -> Self {
        Self {
            ticks: vec![true; gamma_period_ticks as usize],
        }
    }

    pub fn from_levels(levels: Vec<bool>) -> Self {
        Self { ticks: levels }
    }

    /// Builds a trace and checks it spans exactly one gamma cycle.
    pub fn with_period(levels: Vec<bool>, gamma_period_ticks: u32) -> Result<Self, TemporalError> {
        if levels.len() != gamma_period_ticks as usize {
            return Err(TemporalError::TraceLength {
                len: levels.len(),
                period: gamma_period_ticks,
            });
        }
        Ok(Self { ticks: levels })
    }

    /// A pulse of `width` ticks starting at `start`, clipped at the cycle end.
    pub fn pulse(start: u32, width: u32, gamma_period_ticks: u32) -> Self {
        let mut t = Self::zeros(gamma_period_ticks);
        let end = start.saturating_add(width).min(gamma_period_ticks);
        for i in start.min(end)..end {
            t.ticks[i as usize] = true;
        }
        t
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn get(&self, tick: usize) -> bool {
        self.ticks[tick]
    }

    pub fn set(&mut self, tick: usize, level: bool) {
        self.ticks[tick] = level;
    }

    pub fn levels(&self) -> &[bool] {
        &self.ticks
    }

    pub fn count_ones(&self) -> usize {
        self.ticks.iter().filter(|&&b| b).count()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.ticks.iter().any(|&b| b)
    }

    /// Ticks at which the level goes 0→1, with tick 0 counting when the
    /// trace starts high.
    pub fn rising_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.ticks
            .iter()
            .enumerate()
            .filter(|&(i, &b)| b && (i == 0 || !self.ticks[i - 1]))
            .map(|(i, _)| i)
    }

    /// True if the trace never falls once it has risen.
    pub fn is_monotone(&self) -> bool {
        self.ticks.windows(2).all(|w| !(w[0] && !w[1]))
    }
}

impl fmt::Debug for BinaryTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BinaryTrace[")?;
        for &b in &self.ticks {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

/// Time of the first 0→1 transition, or INF for an all-zero trace.
pub fn first_edge(trace: &BinaryTrace) -> TemporalValue {
    match trace.rising_edges().next() {
        Some(i) => TemporalValue::at(i as u32),
        None => TemporalValue::INF,
    }
}

/// Edge encoding of `v`: low before `v`, high from `v` to the end of the
/// gamma cycle. All-zero for INF.
pub fn temporal_to_edge_trace(
    v: TemporalValue,
    gamma_period_ticks: u32,
) -> Result<BinaryTrace, TemporalError> {
    match v.time() {
        None => Ok(BinaryTrace::zeros(gamma_period_ticks)),
        Some(t) if t >= gamma_period_ticks => Err(TemporalError::OutOfRange {
            time: t,
            period: gamma_period_ticks,
        }),
        Some(t) => Ok(BinaryTrace::pulse(
            t,
            gamma_period_ticks - t,
            gamma_period_ticks,
        )),
    }
}
