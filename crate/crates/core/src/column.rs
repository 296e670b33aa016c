//! A p×q column: synaptic crossbar, adder-tree neuron bodies, 1-WTA
//! inhibition and per-gamma-cycle STDP.
//!
//! Synapse `(neuron j, input i)` is stored at index `j * p + i`. Input line
//! `i` has one `spike_gen` shared by the `q` synapses it feeds.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::macros::{
    check_weight_bits, incdec, less_equal, max_weight, stabilize_func, stdp_case_gen,
    syn_readout_step, syn_weight_update, SpikeGen, SynapseState,
};
use crate::rng::BrvSource;
use crate::temporal::{TemporalValue, DEFAULT_GAMMA_PERIOD_TICKS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColumnError {
    #[error("invalid column config: {field}: {message}")]
    Invariant {
        field: &'static str,
        message: String,
    },
    #[error("expected {expected} input spike times, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("input {index} has time {time}, outside the {period}-tick gamma cycle")]
    InputOutOfRange {
        index: usize,
        time: u32,
        period: u32,
    },
}

fn invariant(field: &'static str, message: impl Into<String>) -> ColumnError {
    ColumnError::Invariant {
        field,
        message: message.into(),
    }
}

/// Stabilization probabilities indexed by weight: update probability grows
/// toward both ends of the weight range.
///
/// For 3-bit weights this is `[1.0, 0.875, 0.75, 0.625, 0.625, 0.75, 0.875, 1.0]`.
pub fn default_stabilization_probs(weight_bits: u8) -> Vec<f64> {
    let n = 1usize << weight_bits;
    if n <= 2 {
        return vec![1.0; n];
    }
    let half = (n / 2 - 1) as f64;
    (0..n)
        .map(|w| {
            let d = w.min(n - 1 - w) as f64;
            1.0 - 0.375 * d / half
        })
        .collect()
}

fn default_weight_bits() -> u8 {
    3
}
fn default_gamma() -> u32 {
    DEFAULT_GAMMA_PERIOD_TICKS
}
fn default_case_rates() -> [f64; 4] {
    [1.0; 4]
}
fn default_seed() -> u64 {
    1
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnConfig {
    /// Synapses per neuron.
    pub p: usize,
    /// Neurons in the column.
    pub q: usize,
    #[serde(default = "default_weight_bits")]
    pub weight_bits: u8,
    /// Body potential at which a neuron fires.
    pub threshold: u32,
    #[serde(default = "default_gamma")]
    pub gamma_period_ticks: u32,
    /// Per-weight update probabilities; empty means
    /// [`default_stabilization_probs`].
    #[serde(default)]
    pub stabilization_probs: Vec<f64>,
    /// Extra per-case gate on the BRV probability, indexed by STDP case.
    #[serde(default = "default_case_rates")]
    pub stdp_case_rates: [f64; 4],
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub learning_enabled: bool,
    /// Starting weight for every synapse; seeded uniform random when absent.
    #[serde(default)]
    pub initial_weight: Option<u8>,
}

impl ColumnConfig {
    pub fn new(p: usize, q: usize, threshold: u32) -> Self {
        Self {
            p,
            q,
            weight_bits: default_weight_bits(),
            threshold,
            gamma_period_ticks: default_gamma(),
            stabilization_probs: Vec::new(),
            stdp_case_rates: default_case_rates(),
            seed: default_seed(),
            learning_enabled: true,
            initial_weight: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_learning(mut self, enabled: bool) -> Self {
        self.learning_enabled = enabled;
        self
    }

    pub fn with_initial_weight(mut self, weight: u8) -> Self {
        self.initial_weight = Some(weight);
        self
    }

    pub fn synapse_count(&self) -> u64 {
        self.p as u64 * self.q as u64
    }

    pub fn effective_stabilization_probs(&self) -> Vec<f64> {
        if self.stabilization_probs.is_empty() {
            default_stabilization_probs(self.weight_bits)
        } else {
            self.stabilization_probs.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ColumnError> {
        if self.p < 1 {
            return Err(invariant("p", "p ≥ 1"));
        }
        if self.q < 1 {
            return Err(invariant("q", "q ≥ 1"));
        }
        if self.threshold < 1 {
            return Err(invariant("threshold", "threshold ≥ 1"));
        }
        check_weight_bits(self.weight_bits).map_err(|e| invariant("weight_bits", e.to_string()))?;
        let ramp = 1u32 << self.weight_bits;
        if self.gamma_period_ticks < 2 * ramp {
            return Err(invariant(
                "gamma_period_ticks",
                format!("gamma_period_ticks ≥ 2·2^weight_bits = {}", 2 * ramp),
            ));
        }
        if !self.stabilization_probs.is_empty() && self.stabilization_probs.len() != ramp as usize {
            return Err(invariant(
                "stabilization_probs",
                format!(
                    "expected {ramp} entries, got {}",
                    self.stabilization_probs.len()
                ),
            ));
        }
        let in_unit = |x: &f64| (0.0..=1.0).contains(x);
        if !self.stabilization_probs.iter().all(in_unit) {
            return Err(invariant(
                "stabilization_probs",
                "probabilities must lie in [0, 1]",
            ));
        }
        if !self.stdp_case_rates.iter().all(in_unit) {
            return Err(invariant("stdp_case_rates", "rates must lie in [0, 1]"));
        }
        if let Some(w) = self.initial_weight {
            if w > max_weight(self.weight_bits) {
                return Err(invariant(
                    "initial_weight",
                    format!("initial_weight ≤ {}", max_weight(self.weight_bits)),
                ));
            }
        }
        Ok(())
    }
}

/// Weight matrix plus the gamma counter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnState {
    pub p: usize,
    pub q: usize,
    /// Neuron-major: synapse `(j, i)` lives at `j * p + i`.
    pub weights: Vec<SynapseState>,
    pub gamma_index: u64,
}

impl ColumnState {
    pub fn weight(&self, neuron: usize, synapse: usize) -> u8 {
        self.weights[neuron * self.p + synapse].stored_weight()
    }

    pub fn set_weight(&mut self, neuron: usize, synapse: usize, weight: u8) {
        self.weights[neuron * self.p + synapse] = SynapseState::new(weight);
    }

    pub fn weight_values(&self) -> Vec<u8> {
        self.weights
            .iter()
            .map(SynapseState::stored_weight)
            .collect()
    }

    /// Histogram of stored weights with `2^weight_bits` bins.
    pub fn weight_histogram(&self, weight_bits: u8) -> Vec<u64> {
        let mut bins = vec![0u64; 1 << weight_bits];
        for s in &self.weights {
            bins[s.stored_weight() as usize] += 1;
        }
        bins
    }
}

/// Result of one gamma cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnOutput {
    pub winner: Option<usize>,
    /// Post-WTA spike times; at most one finite entry.
    pub spike_times: Vec<TemporalValue>,
    /// Body spike times before inhibition.
    pub pre_wta_times: Vec<TemporalValue>,
    /// Accumulator value of each neuron at every tick.
    pub body_potentials: Vec<Vec<u32>>,
}

/// One aclk tick of a neuron body: add the active response bits and fire
/// once when the threshold is first reached.
///
/// Returns `(accumulator', fired)`; `fired` is only true on the crossing tick.
pub fn neuron_body_step(
    response_bits: &[bool],
    accumulator: u32,
    threshold: u32,
    already_fired: bool,
) -> (u32, bool) {
    let added = response_bits.iter().filter(|&&b| b).count() as u32;
    body_accumulate(added, accumulator, threshold, already_fired)
}

#[inline]
fn body_accumulate(
    added: u32,
    accumulator: u32,
    threshold: u32,
    already_fired: bool,
) -> (u32, bool) {
    let acc = accumulator + added;
    (acc, acc >= threshold && !already_fired)
}

/// 1-WTA: every body spike is gated by `less_equal` against the earliest
/// spike in the column; among the equal-time survivors the lowest index
/// wins. Returns the winner and the post-inhibition times.
pub fn wta_inhibit(spike_times: &[TemporalValue]) -> (Option<usize>, Vec<TemporalValue>) {
    let inhibit = spike_times
        .iter()
        .copied()
        .min()
        .unwrap_or(TemporalValue::INF);
    let passed: Vec<TemporalValue> = spike_times
        .iter()
        .map(|&t| less_equal(t, inhibit))
        .collect();
    let winner = passed.iter().position(|t| t.is_finite());
    let outputs = passed
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            if Some(j) == winner {
                t
            } else {
                TemporalValue::INF
            }
        })
        .collect();
    (winner, outputs)
}

/// A column instance: configuration, learned state, and BRV streams.
#[derive(Debug, Clone)]
pub struct Column {
    config: ColumnConfig,
    stabilization: Vec<f64>,
    state: ColumnState,
    brvs: BrvSource,
}

impl Column {
    pub fn new(config: ColumnConfig) -> Result<Self, ColumnError> {
        config.validate()?;
        let brvs = BrvSource::new(config.seed);
        let max = max_weight(config.weight_bits);
        let n = config.p * config.q;
        let weights = match config.initial_weight {
            Some(w) => vec![SynapseState::new(w); n],
            None => {
                let mut rng = brvs.init_rng();
                (0..n)
                    .map(|_| SynapseState::new(rng.random_range(0..=max)))
                    .collect()
            }
        };
        let state = ColumnState {
            p: config.p,
            q: config.q,
            weights,
            gamma_index: 0,
        };
        Ok(Self {
            stabilization: config.effective_stabilization_probs(),
            config,
            state,
            brvs,
        })
    }

    /// Rebuilds a column around a previously saved state.
    pub fn with_state(config: ColumnConfig, state: ColumnState) -> Result<Self, ColumnError> {
        let mut col = Self::new(config)?;
        if state.p != col.config.p
            || state.q != col.config.q
            || state.weights.len() != state.p * state.q
        {
            return Err(ColumnError::Dimension {
                expected: col.config.p * col.config.q,
                got: state.weights.len(),
            });
        }
        let max = max_weight(col.config.weight_bits);
        if state.weights.iter().any(|s| s.stored_weight() > max) {
            return Err(invariant("weights", format!("weights must be ≤ {max}")));
        }
        col.state = state;
        Ok(col)
    }

    pub fn config(&self) -> &ColumnConfig {
        &self.config
    }

    pub fn state(&self) -> &ColumnState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ColumnState {
        &mut self.state
    }

    pub fn set_learning(&mut self, enabled: bool) {
        self.config.learning_enabled = enabled;
    }

    fn check_inputs(&self, inputs: &[TemporalValue]) -> Result<(), ColumnError> {
        if inputs.len() != self.config.p {
            return Err(ColumnError::Dimension {
                expected: self.config.p,
                got: inputs.len(),
            });
        }
        let period = self.config.gamma_period_ticks;
        for (index, v) in inputs.iter().enumerate() {
            if !v.fits(period) {
                return Err(ColumnError::InputOutOfRange {
                    index,
                    time: v.time().unwrap_or_default(),
                    period,
                });
            }
        }
        Ok(())
    }

    /// Forward pass only; the column's own state is left untouched.
    pub fn infer(&self, inputs: &[TemporalValue]) -> Result<ColumnOutput, ColumnError> {
        self.check_inputs(inputs)?;
        let mut scratch = self.state.weights.clone();
        Ok(run_ticks(&self.config, &mut scratch, inputs))
    }

    /// One full gamma cycle: tick loop, WTA, then STDP when learning is on.
    pub fn gamma_cycle(&mut self, inputs: &[TemporalValue]) -> Result<ColumnOutput, ColumnError> {
        self.check_inputs(inputs)?;
        let out = run_ticks(&self.config, &mut self.state.weights, inputs);
        if self.config.learning_enabled {
            self.learn(inputs, &out.spike_times);
        }
        self.state.gamma_index += 1;
        Ok(out)
    }

    fn learn(&mut self, inputs: &[TemporalValue], outputs: &[TemporalValue]) {
        let cfg = &self.config;
        let p = cfg.p;
        let lines = 1u32 << cfg.weight_bits;
        let gamma = self.state.gamma_index;
        let mut brv_lines = Vec::with_capacity(lines as usize);
        for (j, &eout) in outputs.iter().enumerate() {
            for (i, &ein) in inputs.iter().enumerate() {
                let case = stdp_case_gen(ein, eout);
                let Some(ci) = case.index() else { continue };
                let idx = j * p + i;
                let syn = self.state.weights[idx];
                let rate = cfg.stdp_case_rates[ci];
                self.brvs
                    .draw_lines(idx as u64, gamma, &self.stabilization, rate, &mut brv_lines);
                let brv =
                    stabilize_func(syn.weight, &brv_lines).expect("one line per weight value");
                let (inc, dec) = incdec(case, brv);
                self.state.weights[idx] = syn_weight_update(syn, inc, dec, cfg.weight_bits)
                    .expect("incdec never asserts both controls");
            }
        }
    }
}

/// The aclk loop of one gamma cycle over `weights` (mutated only
/// transiently: every readout ends with the weight restored).
fn run_ticks(
    cfg: &ColumnConfig,
    weights: &mut [SynapseState],
    inputs: &[TemporalValue],
) -> ColumnOutput {
    let (p, q) = (cfg.p, cfg.q);
    let period = cfg.gamma_period_ticks;
    let bits = cfg.weight_bits;

    let mut gens = vec![SpikeGen::new(bits); p];
    let mut enable = vec![false; p];
    let mut acc = vec![0u32; q];
    let mut fired = vec![TemporalValue::INF; q];
    let mut potentials = vec![Vec::with_capacity(period as usize); q];

    // Nothing changes once every readout window has closed.
    let ramp = 1u32 << bits;
    let last_active = inputs
        .iter()
        .filter_map(|v| v.time())
        .map(|t| t + ramp)
        .max()
        .unwrap_or(0)
        .min(period);

    for tick in 0..last_active {
        for i in 0..p {
            let pulse = inputs[i].time() == Some(tick);
            enable[i] = gens[i].step(pulse);
            if pulse && enable[i] {
                for j in 0..q {
                    weights[j * p + i].begin_readout();
                }
            }
        }
        for j in 0..q {
            let row = &mut weights[j * p..(j + 1) * p];
            let mut added = 0u32;
            for (syn, &en) in row.iter_mut().zip(&enable) {
                if en {
                    let (bit, next) = syn_readout_step(*syn, bits);
                    *syn = next;
                    added += u32::from(bit);
                }
            }
            let (a, f) = body_accumulate(added, acc[j], cfg.threshold, fired[j].is_finite());
            acc[j] = a;
            if f {
                fired[j] = TemporalValue::at(tick);
            }
            potentials[j].push(a);
        }
    }
    for j in 0..q {
        potentials[j].resize(period as usize, acc[j]);
    }
    // gclk reset
    for s in weights.iter_mut() {
        s.abort_readout();
    }

    let (winner, spike_times) = wta_inhibit(&fired);
    ColumnOutput {
        winner,
        spike_times,
        pre_wta_times: fired,
        body_potentials: potentials,
    }
}
