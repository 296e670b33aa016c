//! Functional models of the nine column macros.
//!
//! Each macro is either a pure function over [`TemporalValue`]s or a small
//! per-tick state machine that can be stepped inside the column's aclk loop.
//! Trace-level wrappers (`spike_gen`, `pulse2edge`, ...) run a state machine
//! over a whole gamma cycle and exist mostly for testing and inspection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::temporal::{BinaryTrace, TemporalValue};

/// Widest supported synaptic weight. Weights are stored in a `u8`.
pub const MAX_WEIGHT_BITS: u8 = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacroError {
    #[error("WT_INC and WT_DEC asserted in the same cycle")]
    ConflictingControls,
    #[error("select value {select} has no matching line among {lines}")]
    SelectOutOfRange { select: u8, lines: usize },
    #[error("weight width must be in 1..={MAX_WEIGHT_BITS}, got {0}")]
    BadWeightBits(u8),
}

/// Largest weight representable in `weight_bits` bits.
pub fn max_weight(weight_bits: u8) -> u8 {
    debug_assert!((1..=MAX_WEIGHT_BITS).contains(&weight_bits));
    ((1u16 << weight_bits) - 1) as u8
}

pub fn check_weight_bits(weight_bits: u8) -> Result<(), MacroError> {
    if (1..=MAX_WEIGHT_BITS).contains(&weight_bits) {
        Ok(())
    } else {
        Err(MacroError::BadWeightBits(weight_bits))
    }
}

// ---------------------------------------------------------------------------
// spike_gen
// ---------------------------------------------------------------------------

/// Counter that stretches any input pulse to exactly `2^weight_bits` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeGen {
    width: u32,
    remaining: u32,
    prev_input: bool,
}

impl SpikeGen {
    pub fn new(weight_bits: u8) -> Self {
        Self {
            width: 1 << weight_bits,
            remaining: 0,
            prev_input: false,
        }
    }

    /// Advances one aclk tick and returns the output level for this tick.
    /// A rising input while the counter is idle starts a new output pulse;
    /// input activity during a running pulse is ignored.
    pub fn step(&mut self, input: bool) -> bool {
        let rising = input && !self.prev_input;
        self.prev_input = input;
        if self.remaining == 0 && rising {
            self.remaining = self.width;
        }
        if self.remaining > 0 {
            self.remaining -= 1;
            true
        } else {
            false
        }
    }

    pub fn reset(&mut self) {
        self.remaining = 0;
        self.prev_input = false;
    }
}

/// Runs [`SpikeGen`] over a whole gamma cycle.
pub fn spike_gen(input: &BinaryTrace, weight_bits: u8) -> BinaryTrace {
    let mut gen = SpikeGen::new(weight_bits);
    BinaryTrace::from_levels(input.levels().iter().map(|&b| gen.step(b)).collect())
}

/// Output of `spike_gen` for a single input pulse of `input_pulse_width`
/// ticks starting at tick `start`. A zero-width input produces no output.
pub fn spike_gen_pulse(
    start: u32,
    input_pulse_width: u32,
    weight_bits: u8,
    gamma_period_ticks: u32,
) -> BinaryTrace {
    spike_gen(
        &BinaryTrace::pulse(start, input_pulse_width, gamma_period_ticks),
        weight_bits,
    )
}

// ---------------------------------------------------------------------------
// pulse2edge / edge2pulse
// ---------------------------------------------------------------------------

/// Latches high on the first input pulse until the gamma reset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Pulse2Edge {
    latched: bool,
}

impl Pulse2Edge {
    pub fn step(&mut self, input: bool) -> bool {
        self.latched |= input;
        self.latched
    }

    pub fn reset(&mut self) {
        self.latched = false;
    }
}

pub fn pulse2edge(trace: &BinaryTrace) -> BinaryTrace {
    let mut m = Pulse2Edge::default();
    BinaryTrace::from_levels(trace.levels().iter().map(|&b| m.step(b)).collect())
}

/// Rising-edge detector: one-tick pulse on each 0→1 transition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Edge2Pulse {
    prev: bool,
}

impl Edge2Pulse {
    pub fn step(&mut self, input: bool) -> bool {
        let out = input && !self.prev;
        self.prev = input;
        out
    }

    pub fn reset(&mut self) {
        self.prev = false;
    }
}

/// On a monotone edge signal this yields a single pulse at the edge; on
/// arbitrary input it pulses at every rising transition.
pub fn edge2pulse(trace: &BinaryTrace) -> BinaryTrace {
    let mut m = Edge2Pulse::default();
    BinaryTrace::from_levels(trace.levels().iter().map(|&b| m.step(b)).collect())
}

// ---------------------------------------------------------------------------
// syn_readout / syn_weight_update
// ---------------------------------------------------------------------------

/// Weight register of one synapse plus the readout bookkeeping.
///
/// During readout the weight register itself counts down once per tick and
/// wraps; after `2^weight_bits` ticks it is back at `shadow_weight`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynapseState {
    pub weight: u8,
    pub shadow_weight: u8,
    pub readout_active: bool,
}

impl SynapseState {
    pub fn new(weight: u8) -> Self {
        Self {
            weight,
            shadow_weight: weight,
            readout_active: false,
        }
    }

    /// Arms the readout loop; called when the input spike arrives.
    pub fn begin_readout(&mut self) {
        self.shadow_weight = self.weight;
        self.readout_active = true;
    }

    /// gclk reset: abandons an unfinished readout and restores the weight.
    pub fn abort_readout(&mut self) {
        if self.readout_active {
            self.weight = self.shadow_weight;
            self.readout_active = false;
        }
    }

    /// The weight value outside of readout.
    pub fn stored_weight(&self) -> u8 {
        if self.readout_active {
            self.shadow_weight
        } else {
            self.weight
        }
    }
}

/// One aclk tick of the readout loop. Returns the response bit.
///
/// The output is high while the countdown has not yet reached zero since
/// the readout started, so exactly `shadow_weight` ticks are asserted.
pub fn syn_readout_step(state: SynapseState, weight_bits: u8) -> (bool, SynapseState) {
    if !state.readout_active {
        return (false, state);
    }
    let modulus = 1u16 << weight_bits;
    let mask = (modulus - 1) as u8;
    let elapsed = state.shadow_weight.wrapping_sub(state.weight) & mask;
    let out = elapsed < state.shadow_weight;

    let mut next = state;
    next.weight = state.weight.wrapping_sub(1) & mask;
    if next.weight == next.shadow_weight {
        next.readout_active = false;
    }
    (out, next)
}

/// Unit increment/decrement, saturating at both ends of the weight range.
pub fn syn_weight_update(
    state: SynapseState,
    wt_inc: bool,
    wt_dec: bool,
    weight_bits: u8,
) -> Result<SynapseState, MacroError> {
    if wt_inc && wt_dec {
        return Err(MacroError::ConflictingControls);
    }
    let mut next = state;
    if wt_inc {
        next.weight = state.weight.saturating_add(1).min(max_weight(weight_bits));
    } else if wt_dec {
        next.weight = state.weight.saturating_sub(1);
    }
    next.shadow_weight = next.weight;
    Ok(next)
}

// ---------------------------------------------------------------------------
// less_equal
// ---------------------------------------------------------------------------

/// Passes `data_in` iff it arrives no later than `inhibit`.
pub fn less_equal(data_in: TemporalValue, inhibit: TemporalValue) -> TemporalValue {
    if data_in.is_finite() && data_in <= inhibit {
        data_in
    } else {
        TemporalValue::INF
    }
}

/// Tick-level `less_equal` over edge-encoded inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LessEqualGate {
    passed: bool,
    blocked: bool,
}

impl LessEqualGate {
    pub fn step(&mut self, data: bool, inhibit: bool) -> bool {
        if !self.passed && !self.blocked && data {
            self.passed = true;
        }
        // an inhibit edge only blocks data arriving on later ticks
        if inhibit && !self.passed {
            self.blocked = true;
        }
        self.passed
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

pub fn less_equal_trace(data: &BinaryTrace, inhibit: &BinaryTrace) -> BinaryTrace {
    let mut gate = LessEqualGate::default();
    BinaryTrace::from_levels(
        data.levels()
            .iter()
            .zip(inhibit.levels())
            .map(|(&d, &i)| gate.step(d, i))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// STDP: stdp_case_gen, incdec, stabilize_func
// ---------------------------------------------------------------------------

/// One-hot STDP case for a synapse in one gamma cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StdpCase {
    /// No input and no output spike.
    None,
    /// Both spikes, input not later than output.
    Case0,
    /// Both spikes, input later than output.
    Case1,
    /// Input spike only.
    Case2,
    /// Output spike only.
    Case3,
}

impl StdpCase {
    pub const ACTIVE: [StdpCase; 4] = [
        StdpCase::Case0,
        StdpCase::Case1,
        StdpCase::Case2,
        StdpCase::Case3,
    ];

    pub fn index(self) -> Option<usize> {
        match self {
            StdpCase::None => None,
            StdpCase::Case0 => Some(0),
            StdpCase::Case1 => Some(1),
            StdpCase::Case2 => Some(2),
            StdpCase::Case3 => Some(3),
        }
    }

    pub fn one_hot(self) -> [bool; 4] {
        let mut bits = [false; 4];
        if let Some(i) = self.index() {
            bits[i] = true;
        }
        bits
    }

    pub fn from_one_hot(bits: [bool; 4]) -> Option<Self> {
        match bits {
            [false, false, false, false] => Some(StdpCase::None),
            [true, false, false, false] => Some(StdpCase::Case0),
            [false, true, false, false] => Some(StdpCase::Case1),
            [false, false, true, false] => Some(StdpCase::Case2),
            [false, false, false, true] => Some(StdpCase::Case3),
            _ => None,
        }
    }
}

/// Classifies the (input, output) spike pair of one synapse.
///
/// GREATER is the negation of `less_equal(ein, eout)`; the case lines are
/// AND terms over (input present, output present, GREATER).
pub fn stdp_case_gen(ein: TemporalValue, eout: TemporalValue) -> StdpCase {
    let in_present = ein.is_finite();
    let out_present = eout.is_finite();
    let greater = less_equal(ein, eout).is_inf();
    let bits = [
        in_present && out_present && !greater,
        in_present && out_present && greater,
        in_present && !out_present,
        !in_present && out_present,
    ];
    StdpCase::from_one_hot(bits).expect("case lines are mutually exclusive")
}

/// A Bernoulli sample and the probability it was drawn with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Brv {
    pub value: bool,
    pub probability: f64,
}

impl Brv {
    pub const fn new(value: bool, probability: f64) -> Self {
        Self { value, probability }
    }

    /// A sample that is always (or never) one.
    pub const fn fixed(value: bool) -> Self {
        Self {
            value,
            probability: if value { 1.0 } else { 0.0 },
        }
    }
}

/// INC for cases 0 and 2, DEC for cases 1 and 3, gated by the BRV.
/// Returns `(wt_inc, wt_dec)`.
pub fn incdec(case: StdpCase, brv: Brv) -> (bool, bool) {
    let [c0, c1, c2, c3] = case.one_hot();
    let inc = (c0 || c2) && brv.value;
    let dec = (c1 || c3) && brv.value;
    (inc, dec)
}

/// Multiplexer: the current weight selects which BRV line gates the update.
pub fn stabilize_func(weight: u8, brv_lines: &[Brv]) -> Result<Brv, MacroError> {
    brv_lines
        .get(weight as usize)
        .copied()
        .ok_or(MacroError::SelectOutOfRange {
            select: weight,
            lines: brv_lines.len(),
        })
}
