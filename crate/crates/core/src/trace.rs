//! Recording runs and writing spike traces and weight snapshots.
//!
//! Output bytes depend only on the recorded values, so identical runs give
//! identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::OutputFormat;
use crate::network::{Network, NetworkError};
use crate::temporal::TemporalValue;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("no input vectors to present")]
    NoInputs,
}

/// One finite post-inhibition output spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeRecord {
    pub gamma_index: u64,
    pub neuron: usize,
    pub spike_time: u32,
}

/// Weights of one column after a given gamma cycle, neuron-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSnapshot {
    pub gamma_index: u64,
    pub layer: usize,
    pub column: usize,
    pub p: usize,
    pub q: usize,
    pub weights: Vec<u8>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTrace {
    pub cycles: u64,
    pub spikes: Vec<SpikeRecord>,
    pub snapshots: Vec<WeightSnapshot>,
}

impl RunTrace {
    pub fn record_spikes(&mut self, gamma_index: u64, spikes: &[TemporalValue]) {
        self.spikes
            .extend(spikes.iter().enumerate().filter_map(|(neuron, t)| {
                t.time().map(|spike_time| SpikeRecord {
                    gamma_index,
                    neuron,
                    spike_time,
                })
            }));
    }

    pub fn record_weights(&mut self, gamma_index: u64, net: &Network) {
        for (l, layer) in net.layers().iter().enumerate() {
            for (c, col) in layer.iter().enumerate() {
                let state = col.state();
                self.snapshots.push(WeightSnapshot {
                    gamma_index,
                    layer: l,
                    column: c,
                    p: state.p,
                    q: state.q,
                    weights: state.weight_values(),
                });
            }
        }
    }
}

/// Presents `inputs` in order, cycling, for `cycles` gamma cycles and
/// records the final layer's output spikes. With `snapshot_every = k`,
/// weights are captured after every k-th cycle.
pub fn record_run(
    net: &mut Network,
    inputs: &[Vec<TemporalValue>],
    cycles: u64,
    snapshot_every: Option<u64>,
) -> Result<RunTrace, TraceError> {
    if inputs.is_empty() && cycles > 0 {
        return Err(TraceError::NoInputs);
    }
    let mut trace = RunTrace {
        cycles,
        ..RunTrace::default()
    };
    for g in 0..cycles {
        let out = net.gamma_cycle(&inputs[(g % inputs.len() as u64) as usize])?;
        trace.record_spikes(g, out.final_spikes());
        if let Some(k) = snapshot_every.filter(|&k| k > 0) {
            if (g + 1) % k == 0 {
                trace.record_weights(g, net);
            }
        }
    }
    Ok(trace)
}

pub const TRACE_CSV_HEADER: &str = "gamma_index,neuron,spike_time";
pub const SNAPSHOT_CSV_HEADER: &str = "gamma_index,layer,column,neuron,synapse,weight";

pub fn write_trace<W: Write>(
    trace: &RunTrace,
    format: OutputFormat,
    mut w: W,
) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{TRACE_CSV_HEADER}")?;
            for s in &trace.spikes {
                writeln!(w, "{},{},{}", s.gamma_index, s.neuron, s.spike_time)?;
            }
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Spikes<'a> {
                cycles: u64,
                spikes: &'a [SpikeRecord],
            }
            serde_json::to_writer_pretty(
                &mut w,
                &Spikes {
                    cycles: trace.cycles,
                    spikes: &trace.spikes,
                },
            )?;
            writeln!(w)?;
        }
    }
    w.flush()
}

pub fn write_snapshots<W: Write>(
    trace: &RunTrace,
    format: OutputFormat,
    mut w: W,
) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{SNAPSHOT_CSV_HEADER}")?;
            for s in &trace.snapshots {
                for (k, weight) in s.weights.iter().enumerate() {
                    let (neuron, synapse) = (k / s.p, k % s.p);
                    writeln!(
                        w,
                        "{},{},{},{neuron},{synapse},{weight}",
                        s.gamma_index, s.layer, s.column
                    )?;
                }
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer(&mut w, &trace.snapshots)?;
            writeln!(w)?;
        }
    }
    w.flush()
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), TraceError> {
    let io = |source| TraceError::Io {
        path: path.into(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    body(&mut w).map_err(io)
}

pub fn emit_trace(trace: &RunTrace, format: OutputFormat, path: &Path) -> Result<(), TraceError> {
    write_file(path, |w| write_trace(trace, format, w))
}

pub fn emit_snapshots(
    trace: &RunTrace,
    format: OutputFormat,
    path: &Path,
) -> Result<(), TraceError> {
    write_file(path, |w| write_snapshots(trace, format, w))
}

/// `run.csv` → `run.weights.csv`.
pub fn snapshot_path(trace_path: &Path, format: OutputFormat) -> PathBuf {
    let ext = match format {
        OutputFormat::Csv => "weights.csv",
        OutputFormat::Json => "weights.json",
    };
    trace_path.with_extension(ext)
}
