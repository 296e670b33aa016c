//! Feedforward stacks of columns.
//!
//! Layer 0 reads the external input vector; every later layer reads the
//! concatenated post-WTA outputs of the layer below (column-major:
//! upstream output `c * q + j` is neuron `j` of column `c`). All layers run
//! inside one logical gamma frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::column::{Column, ColumnConfig, ColumnError, ColumnOutput};
use crate::exec::Execution;
use crate::rng::derive_seed;
use crate::temporal::TemporalValue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("layer {layer}: {message}")]
    Spec { layer: usize, message: String },
    #[error("layer {layer}: {source}")]
    Column {
        layer: usize,
        #[source]
        source: ColumnError,
    },
    #[error("declared total_synapses {declared} does not match computed {computed}")]
    SynapseCount { declared: u64, computed: u64 },
    #[error("expected {expected} network inputs, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// How a layer's columns pick their `p` inputs from the upstream outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Fanin {
    /// Every column reads all upstream outputs in order; needs `p == width`.
    #[default]
    Full,
    /// Column `c` reads upstream `(c * stride + k) % width` for `k < p`.
    Strided { stride: usize },
    /// One index list of length `p` per column.
    Explicit { map: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub columns: usize,
    pub column_config: ColumnConfig,
    #[serde(default)]
    pub fanin_map: Fanin,
}

impl LayerSpec {
    pub fn synapses(&self) -> u64 {
        self.columns as u64 * self.column_config.synapse_count()
    }

    pub fn output_width(&self) -> usize {
        self.columns * self.column_config.q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Width of the external input vector.
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    /// Optional declared count, checked against the layer shapes on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_synapses: Option<u64>,
}

/// Σ columns · p · q over all layers.
pub fn count_synapses(spec: &NetworkSpec) -> u64 {
    spec.layers.iter().map(LayerSpec::synapses).sum()
}

impl NetworkSpec {
    pub fn single_column(config: ColumnConfig) -> Self {
        Self {
            name: None,
            input_dim: config.p,
            layers: vec![LayerSpec {
                columns: 1,
                column_config: config,
                fanin_map: Fanin::Full,
            }],
            total_synapses: None,
        }
    }

    pub fn total_synapses(&self) -> u64 {
        count_synapses(self)
    }

    pub fn total_neurons(&self) -> u64 {
        self.layers.iter().map(|l| l.output_width() as u64).sum()
    }

    pub fn total_columns(&self) -> u64 {
        self.layers.iter().map(|l| l.columns as u64).sum()
    }

    pub fn output_width(&self) -> usize {
        self.layers
            .last()
            .map_or(self.input_dim, LayerSpec::output_width)
    }

    /// Width of the signal feeding `layer`.
    pub fn upstream_width(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            self.layers[layer - 1].output_width()
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if let Some(first) = self.layers.first() {
            let period = first.column_config.gamma_period_ticks;
            for (l, layer) in self.layers.iter().enumerate() {
                let spec_err = |message: String| NetworkError::Spec { layer: l, message };
                if layer.columns < 1 {
                    return Err(spec_err("columns ≥ 1".into()));
                }
                layer
                    .column_config
                    .validate()
                    .map_err(|source| NetworkError::Column { layer: l, source })?;
                if layer.column_config.gamma_period_ticks != period {
                    return Err(spec_err("all layers must share one gamma period".into()));
                }
                let width = self.upstream_width(l);
                let p = layer.column_config.p;
                if width == 0 {
                    return Err(spec_err("upstream width is zero".into()));
                }
                match &layer.fanin_map {
                    Fanin::Full if p != width => {
                        return Err(spec_err(format!(
                            "full fanin needs p == {width}, got p = {p}"
                        )));
                    }
                    Fanin::Full | Fanin::Strided { .. } => {}
                    Fanin::Explicit { map } => {
                        if map.len() != layer.columns {
                            return Err(spec_err(format!(
                                "fanin_map has {} entries for {} columns",
                                map.len(),
                                layer.columns
                            )));
                        }
                        for (c, row) in map.iter().enumerate() {
                            if row.len() != p {
                                return Err(spec_err(format!(
                                    "column {c}: fanin_map covers {} inputs, expected p = {p}",
                                    row.len()
                                )));
                            }
                            if let Some(bad) = row.iter().find(|&&i| i >= width) {
                                return Err(spec_err(format!(
                                    "column {c}: upstream index {bad} out of range (width {width})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        if let Some(declared) = self.total_synapses {
            let computed = count_synapses(self);
            if declared != computed {
                return Err(NetworkError::SynapseCount { declared, computed });
            }
        }
        Ok(())
    }

    fn resolve_fanin(&self, layer: usize, column: usize) -> Vec<usize> {
        let spec = &self.layers[layer];
        let width = self.upstream_width(layer);
        let p = spec.column_config.p;
        match &spec.fanin_map {
            Fanin::Full => (0..p).collect(),
            Fanin::Strided { stride } => (0..p).map(|k| (column * stride + k) % width).collect(),
            Fanin::Explicit { map } => map[column].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerOutput {
    pub columns: Vec<ColumnOutput>,
    /// Concatenated post-WTA spike times of every column in the layer.
    pub spikes: Vec<TemporalValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkOutput {
    pub layers: Vec<LayerOutput>,
}

impl NetworkOutput {
    /// Spike times leaving the last layer.
    pub fn final_spikes(&self) -> &[TemporalValue] {
        self.layers.last().map_or(&[], |l| l.spikes.as_slice())
    }

    /// Earliest output of the last layer, lowest index on ties.
    pub fn winner(&self) -> Option<usize> {
        let spikes = self.final_spikes();
        let first = spikes.iter().copied().min()?;
        if first.is_inf() {
            return None;
        }
        spikes.iter().position(|&t| t == first)
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<Vec<Column>>,
    fanin: Vec<Vec<Vec<usize>>>,
    execution: Execution,
}

impl Network {
    /// Instantiates every column; column `c` of layer `l` gets a seed derived
    /// from its layer seed and `(l, c)`.
    pub fn new(spec: NetworkSpec) -> Result<Self, NetworkError> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.layers.len());
        let mut fanin = Vec::with_capacity(spec.layers.len());
        for (l, layer) in spec.layers.iter().enumerate() {
            let cols = (0..layer.columns)
                .map(|c| {
                    let mut cfg = layer.column_config.clone();
                    if spec.layers.len() > 1 || layer.columns > 1 {
                        cfg.seed = derive_seed(cfg.seed, l as u64, c as u64);
                    }
                    Column::new(cfg).map_err(|source| NetworkError::Column { layer: l, source })
                })
                .collect::<Result<Vec<_>, _>>()?;
            layers.push(cols);
            fanin.push(
                (0..layer.columns)
                    .map(|c| spec.resolve_fanin(l, c))
                    .collect(),
            );
        }
        Ok(Self {
            spec,
            layers,
            fanin,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn set_execution(&mut self, execution: Execution) {
        self.execution = execution;
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Vec<Column>] {
        &self.layers
    }

    pub fn column_mut(&mut self, layer: usize, column: usize) -> &mut Column {
        &mut self.layers[layer][column]
    }

    pub fn set_learning(&mut self, enabled: bool) {
        for col in self.layers.iter_mut().flatten() {
            col.set_learning(enabled);
        }
    }

    fn check_inputs(&self, inputs: &[TemporalValue]) -> Result<(), NetworkError> {
        if inputs.len() != self.spec.input_dim {
            return Err(NetworkError::Dimension {
                expected: self.spec.input_dim,
                got: inputs.len(),
            });
        }
        Ok(())
    }

    fn gather(&self, layer: usize, upstream: &[TemporalValue]) -> Vec<Vec<TemporalValue>> {
        self.fanin[layer]
            .iter()
            .map(|idx| idx.iter().map(|&i| upstream[i]).collect())
            .collect()
    }

    /// One gamma frame through every layer, learning where enabled.
    pub fn gamma_cycle(&mut self, inputs: &[TemporalValue]) -> Result<NetworkOutput, NetworkError> {
        self.check_inputs(inputs)?;
        let exec = self.execution;
        let mut upstream = inputs.to_vec();
        let mut outputs = Vec::with_capacity(self.layers.len());
        for l in 0..self.layers.len() {
            let col_inputs = self.gather(l, &upstream);
            let mut jobs: Vec<(&mut Column, Vec<TemporalValue>)> =
                self.layers[l].iter_mut().zip(col_inputs).collect();
            let results = exec.map_mut(&mut jobs, |(col, inp)| col.gamma_cycle(inp));
            let layer = collect_layer(l, results)?;
            upstream = layer.spikes.clone();
            outputs.push(layer);
        }
        Ok(NetworkOutput { layers: outputs })
    }

    /// Forward pass with frozen weights; `self` is not modified.
    pub fn infer(&self, inputs: &[TemporalValue]) -> Result<NetworkOutput, NetworkError> {
        self.check_inputs(inputs)?;
        let exec = self.execution;
        let mut upstream = inputs.to_vec();
        let mut outputs = Vec::with_capacity(self.layers.len());
        for (l, cols) in self.layers.iter().enumerate() {
            let col_inputs = self.gather(l, &upstream);
            let results = exec.map_range(cols.len(), |c| cols[c].infer(&col_inputs[c]));
            let layer = collect_layer(l, results)?;
            upstream = layer.spikes.clone();
            outputs.push(layer);
        }
        Ok(NetworkOutput { layers: outputs })
    }
}

fn collect_layer(
    layer: usize,
    results: Vec<Result<ColumnOutput, ColumnError>>,
) -> Result<LayerOutput, NetworkError> {
    let columns = results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| NetworkError::Column { layer, source })?;
    let spikes = columns
        .iter()
        .flat_map(|c| c.spike_times.iter().copied())
        .collect();
    Ok(LayerOutput { columns, spikes })
}
