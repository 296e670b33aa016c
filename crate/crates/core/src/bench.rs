//! Spike encoders, synthetic datasets, and the clustering / classification
//! drivers used for desk-scale experiments.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::column::{Column, ColumnConfig, ColumnError};
use crate::exec::Execution;
use crate::network::{Fanin, LayerSpec, Network, NetworkError, NetworkSpec};
use crate::rng::derive_seed;
use crate::temporal::TemporalValue;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot encode an empty sample")]
    EmptySample,
    #[error("sample value {0} is not finite")]
    NonFinite(f64),
    #[error("sample has {got} features, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("dataset has {labels} labels but the column only has {q} neurons")]
    TooManyLabels { labels: usize, q: usize },
    #[error("encoder: {0}")]
    Encoder(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Column(#[from] ColumnError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    /// Larger value → earlier spike, linear over `[floor, ceiling]`.
    IntensityToLatency,
    /// Any value above `floor` spikes at tick 0.
    Onset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub scheme: EncodingScheme,
    pub input_dim: usize,
    /// Latest encoded tick (inclusive).
    pub time_range_ticks: u32,
    /// Values at or below this never spike.
    #[serde(default)]
    pub floor: f64,
    /// Value mapped to tick 0; the per-sample maximum when absent.
    #[serde(default)]
    pub ceiling: Option<f64>,
}

impl EncoderConfig {
    pub fn latency(input_dim: usize, time_range_ticks: u32) -> Self {
        Self {
            scheme: EncodingScheme::IntensityToLatency,
            input_dim,
            time_range_ticks,
            floor: 0.0,
            ceiling: None,
        }
    }

    pub fn validate(&self, gamma_period_ticks: u32) -> Result<(), BenchError> {
        if self.time_range_ticks >= gamma_period_ticks {
            return Err(BenchError::Encoder(format!(
                "time_range_ticks {} must be below the gamma period {gamma_period_ticks}",
                self.time_range_ticks
            )));
        }
        if !self.floor.is_finite() || self.ceiling.is_some_and(|c| !c.is_finite()) {
            return Err(BenchError::Encoder(
                "floor and ceiling must be finite".into(),
            ));
        }
        Ok(())
    }
}

pub fn encode_sample(
    values: &[f64],
    cfg: &EncoderConfig,
) -> Result<Vec<TemporalValue>, BenchError> {
    if values.is_empty() {
        return Err(BenchError::EmptySample);
    }
    if values.len() != cfg.input_dim {
        return Err(BenchError::Dimension {
            expected: cfg.input_dim,
            got: values.len(),
        });
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(BenchError::NonFinite(bad));
    }
    let floor = cfg.floor;
    Ok(match cfg.scheme {
        EncodingScheme::Onset => values
            .iter()
            .map(|&v| {
                if v > floor {
                    TemporalValue::at(0)
                } else {
                    TemporalValue::INF
                }
            })
            .collect(),
        EncodingScheme::IntensityToLatency => {
            let ceiling = cfg
                .ceiling
                .unwrap_or_else(|| values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            let span = ceiling - floor;
            let range = f64::from(cfg.time_range_ticks);
            values
                .iter()
                .map(|&v| {
                    if v <= floor {
                        TemporalValue::INF
                    } else if span <= 0.0 || v >= ceiling {
                        TemporalValue::at(0)
                    } else {
                        let t = ((ceiling - v) / span * range).round();
                        TemporalValue::at(t.clamp(0.0, range) as u32)
                    }
                })
                .collect()
        }
    })
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: usize,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.features.len())
    }

    /// Number of distinct labels.
    pub fn label_count(&self) -> usize {
        let mut labels: Vec<usize> = self.samples.iter().map(|s| s.label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Reads `label,f1,f2,...` rows (no header).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, BenchError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let parse_err = |message: String| BenchError::Parse { line, message };
            let mut fields = record.iter();
            let label = fields
                .next()
                .ok_or_else(|| parse_err("missing label".into()))?
                .parse::<f64>()
                .map_err(|e| parse_err(format!("label: {e}")))?;
            if label < 0.0 || label.fract() != 0.0 {
                return Err(parse_err(format!(
                    "label {label} is not a non-negative integer"
                )));
            }
            let features = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| parse_err(format!("feature {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = samples.first() {
                let first: &Sample = first;
                if features.len() != first.features.len() {
                    return Err(parse_err(format!(
                        "{} features, expected {}",
                        features.len(),
                        first.features.len()
                    )));
                }
            }
            samples.push(Sample {
                label: label as usize,
                features,
            });
        }
        Ok(Self { samples })
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BenchError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for s in &self.samples {
            let mut row = vec![s.label.to_string()];
            row.extend(s.features.iter().map(|f| f.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `k` temporal prototypes, each a bump at a different phase of a
/// `dim`-step series, plus Gaussian jitter. Samples are interleaved by
/// label.
pub fn synthetic_clusters(
    k: usize,
    dim: usize,
    per_cluster: usize,
    jitter: f64,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, jitter.max(0.0)).expect("finite jitter");
    let width = dim as f64 / (2.0 * k as f64);
    let prototypes: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let center = (c as f64 + 0.5) * dim as f64 / k as f64;
            (0..dim)
                .map(|i| {
                    let d = (i as f64 - center) / width;
                    (-0.5 * d * d).exp()
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(k * per_cluster);
    for _ in 0..per_cluster {
        for (label, proto) in prototypes.iter().enumerate() {
            let features = proto
                .iter()
                .map(|&x| (x + noise.sample(&mut rng)).clamp(0.0, 1.0))
                .collect();
            samples.push(Sample { label, features });
        }
    }
    Dataset { samples }
}

/// Uniform features with labels drawn independently of them.
pub fn random_dataset(k: usize, dim: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|i| Sample {
            label: i % k,
            features: (0..dim).map(|_| rng.random::<f64>()).collect(),
        })
        .collect();
    Dataset { samples }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub purity: f64,
    pub accuracy: f64,
    /// Mean number of finite output spikes per gamma cycle in the
    /// evaluation pass.
    pub spikes_per_gamma: f64,
    pub weight_histogram: Vec<u64>,
    pub samples: usize,
    pub cycles: usize,
}

/// Cluster purity. Samples with no winner form their own cluster.
pub fn purity(assignments: &[Option<usize>], labels: &[usize]) -> f64 {
    assert_eq!(assignments.len(), labels.len());
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<Option<usize>, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&a, &l) in assignments.iter().zip(labels) {
        *counts.entry(a).or_default().entry(l).or_default() += 1;
    }
    let hits: usize = counts
        .values()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / labels.len() as f64
}

/// Majority label per winner; ties go to the smallest label.
pub fn majority_map(
    assignments: &[Option<usize>],
    labels: &[usize],
) -> BTreeMap<Option<usize>, usize> {
    let mut counts: BTreeMap<Option<usize>, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&a, &l) in assignments.iter().zip(labels) {
        *counts.entry(a).or_default().entry(l).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(a, m)| {
            let best = m
                .iter()
                .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
                .map(|(&l, _)| l)
                .expect("non-empty group");
            (a, best)
        })
        .collect()
}

fn accuracy(
    assignments: &[Option<usize>],
    labels: &[usize],
    map: &BTreeMap<Option<usize>, usize>,
) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = assignments
        .iter()
        .zip(labels)
        .filter(|(a, l)| map.get(a) == Some(l))
        .count();
    hits as f64 / labels.len() as f64
}

fn encode_all(
    dataset: &Dataset,
    encoder: &EncoderConfig,
) -> Result<Vec<Vec<TemporalValue>>, BenchError> {
    dataset
        .samples
        .iter()
        .map(|s| encode_sample(&s.features, encoder))
        .collect()
}

/// Presentation order for `cycles` training cycles: reshuffled epochs.
fn training_order(n: usize, cycles: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX, 0));
    let mut order = Vec::with_capacity(cycles);
    let mut epoch: Vec<usize> = (0..n).collect();
    while order.len() < cycles {
        epoch.shuffle(&mut rng);
        order.extend(epoch.iter().take(cycles - order.len()));
    }
    order
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

pub fn run_clustering(
    column: &ColumnConfig,
    dataset: &Dataset,
    encoder: &EncoderConfig,
    cycles: usize,
) -> Result<RunMetrics, BenchError> {
    run_clustering_with(column, dataset, encoder, cycles, Execution::default())
}

/// Online learning for `cycles` gamma cycles (skipped when the config has
/// learning disabled), then a frozen-weight pass assigning every sample to
/// its winning neuron.
pub fn run_clustering_with(
    column: &ColumnConfig,
    dataset: &Dataset,
    encoder: &EncoderConfig,
    cycles: usize,
    exec: Execution,
) -> Result<RunMetrics, BenchError> {
    if dataset.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    if dataset.dim() != column.p || encoder.input_dim != column.p {
        return Err(BenchError::Dimension {
            expected: column.p,
            got: dataset.dim(),
        });
    }
    let labels = dataset.label_count();
    if labels > column.q {
        return Err(BenchError::TooManyLabels {
            labels,
            q: column.q,
        });
    }
    encoder.validate(column.gamma_period_ticks)?;
    let inputs = encode_all(dataset, encoder)?;

    let mut col = Column::new(column.clone())?;
    let trained = if column.learning_enabled { cycles } else { 0 };
    for idx in training_order(inputs.len(), trained, column.seed) {
        col.gamma_cycle(&inputs[idx])?;
    }

    let outputs = exec.map(&inputs, |x| col.infer(x));
    let mut assignments = Vec::with_capacity(outputs.len());
    let mut spikes = 0usize;
    for out in outputs {
        let out = out?;
        spikes += out.spike_times.iter().filter(|t| t.is_finite()).count();
        assignments.push(out.winner);
    }
    let truth = dataset.labels();
    let map = majority_map(&assignments, &truth);
    Ok(RunMetrics {
        purity: purity(&assignments, &truth),
        accuracy: accuracy(&assignments, &truth, &map),
        spikes_per_gamma: spikes as f64 / inputs.len() as f64,
        weight_histogram: col.state().weight_histogram(column.weight_bits),
        samples: inputs.len(),
        cycles: trained,
    })
}

/// Independent clustering runs, one per seed, spread over threads.
pub fn clustering_seed_sweep(
    column: &ColumnConfig,
    dataset: &Dataset,
    encoder: &EncoderConfig,
    cycles: usize,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<RunMetrics>, BenchError> {
    exec.map(seeds, |&seed| {
        let cfg = column.clone().with_seed(seed);
        run_clustering_with(&cfg, dataset, encoder, cycles, Execution::Sequential)
    })
    .into_iter()
    .collect()
}

pub fn run_classification(
    spec: &NetworkSpec,
    dataset: &Dataset,
    encoder: &EncoderConfig,
    cycles: usize,
) -> Result<RunMetrics, BenchError> {
    run_classification_split(
        spec,
        dataset,
        dataset,
        encoder,
        cycles,
        Execution::default(),
    )
}

/// Trains on `train` for `cycles` gamma cycles, builds the winner→label
/// majority map on a frozen pass over `train`, and scores `test`.
pub fn run_classification_split(
    spec: &NetworkSpec,
    train: &Dataset,
    test: &Dataset,
    encoder: &EncoderConfig,
    cycles: usize,
    exec: Execution,
) -> Result<RunMetrics, BenchError> {
    if train.is_empty() || test.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    for d in [train, test] {
        if d.dim() != spec.input_dim || encoder.input_dim != spec.input_dim {
            return Err(BenchError::Dimension {
                expected: spec.input_dim,
                got: d.dim(),
            });
        }
    }
    if let Some(first) = spec.layers.first() {
        encoder.validate(first.column_config.gamma_period_ticks)?;
    }
    let train_x = encode_all(train, encoder)?;
    let test_x = encode_all(test, encoder)?;

    let mut net = Network::new(spec.clone())?.with_execution(exec);
    let seed = spec.layers.first().map_or(0, |l| l.column_config.seed);
    for idx in training_order(train_x.len(), cycles, seed) {
        net.gamma_cycle(&train_x[idx])?;
    }
    net.set_learning(false);

    let eval = |xs: &[Vec<TemporalValue>]| -> Result<(Vec<Option<usize>>, usize), BenchError> {
        let mut winners = Vec::with_capacity(xs.len());
        let mut spikes = 0;
        for out in exec.map(xs, |x| net.infer(x)) {
            let out = out?;
            spikes += out.final_spikes().iter().filter(|t| t.is_finite()).count();
            winners.push(out.winner());
        }
        Ok((winners, spikes))
    };
    let (train_w, _) = eval(&train_x)?;
    let map = majority_map(&train_w, &train.labels());
    let (test_w, spikes) = eval(&test_x)?;
    let truth = test.labels();

    let bits = spec
        .layers
        .first()
        .map_or(3, |l| l.column_config.weight_bits);
    let mut hist = vec![0u64; 1 << bits];
    for col in net.layers().iter().flatten() {
        let h = col.state().weight_histogram(col.config().weight_bits);
        for (b, c) in hist.iter_mut().zip(h) {
            *b += c;
        }
    }
    Ok(RunMetrics {
        purity: purity(&test_w, &truth),
        accuracy: accuracy(&test_w, &truth, &map),
        spikes_per_gamma: spikes as f64 / test_x.len() as f64,
        weight_histogram: hist,
        samples: test_x.len(),
        cycles,
    })
}

/// Latency encoder matching a network's first layer: the ramp width sets
/// the time range, and values ≤ 0.2 stay silent.
pub fn default_encoder(spec: &NetworkSpec) -> EncoderConfig {
    let bits = spec
        .layers
        .first()
        .map_or(3, |l| l.column_config.weight_bits);
    EncoderConfig {
        floor: 0.2,
        ..EncoderConfig::latency(spec.input_dim, (1u32 << bits) - 1)
    }
}

/// Encoded input vectors for `spec`: every sample of `data` when given,
/// otherwise `n` uniform random samples drawn from `seed`.
pub fn network_inputs(
    spec: &NetworkSpec,
    data: Option<&Dataset>,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<TemporalValue>>, BenchError> {
    let generated;
    let data = match data {
        Some(d) => d,
        None => {
            generated = random_dataset(1, spec.input_dim, n.max(1), derive_seed(seed, 5, 0));
            &generated
        }
    };
    if data.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    if data.dim() != spec.input_dim {
        return Err(BenchError::Dimension {
            expected: spec.input_dim,
            got: data.dim(),
        });
    }
    let enc = default_encoder(spec);
    if let Some(first) = spec.layers.first() {
        enc.validate(first.column_config.gamma_period_ticks)?;
    }
    encode_all(data, &enc)
}

// ---------------------------------------------------------------------------
// Built-in suites
// ---------------------------------------------------------------------------

/// STDP case rates used by the built-in suites: full-rate potentiation on
/// causal pairs and depression on unanswered outputs, damped depression on
/// anti-causal pairs, and near-zero depression for inputs the winner did
/// not respond to.
pub const SUITE_CASE_RATES: [f64; 4] = [1.0, 0.5, 0.05, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Clustering,
    Classification,
}

/// Learned result next to the chance baseline on label-independent data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub classes: usize,
    pub learned: RunMetrics,
    pub chance: RunMetrics,
}

pub const CLUSTERING_DIM: usize = 24;
pub const CLASSIFICATION_DIM: usize = 16;

fn suite_encoder(dim: usize) -> EncoderConfig {
    EncoderConfig {
        floor: 0.2,
        ..EncoderConfig::latency(dim, 7)
    }
}

pub fn clustering_suite_column(seed: u64) -> ColumnConfig {
    let mut cfg = ColumnConfig::new(CLUSTERING_DIM, 3, 16).with_seed(seed);
    cfg.stdp_case_rates = SUITE_CASE_RATES;
    cfg
}

/// Three phase-shifted prototypes clustered by one 24×3 column.
pub fn clustering_suite(seed: u64, exec: Execution) -> Result<SuiteReport, BenchError> {
    let enc = suite_encoder(CLUSTERING_DIM);
    let cfg = clustering_suite_column(seed);
    let data = synthetic_clusters(3, CLUSTERING_DIM, 100, 0.1, seed);
    let learned = run_clustering_with(&cfg, &data, &enc, 3000, exec)?;
    let noise = random_dataset(3, CLUSTERING_DIM, 600, derive_seed(seed, 1, 0));
    let chance = run_clustering_with(&cfg.with_learning(false), &noise, &enc, 0, exec)?;
    Ok(SuiteReport {
        suite: Suite::Clustering,
        seed,
        classes: 3,
        learned,
        chance,
    })
}

/// Two-layer network: four 16×4 columns over rotated views of the input,
/// then one 16×`q_out` column.
pub fn classification_suite_network(seed: u64, q_out: usize, learning: bool) -> NetworkSpec {
    let mut c1 = ColumnConfig::new(CLASSIFICATION_DIM, 4, 8)
        .with_seed(seed)
        .with_learning(learning);
    c1.stdp_case_rates = SUITE_CASE_RATES;
    let mut c2 = ColumnConfig::new(16, q_out, 2)
        .with_seed(seed)
        .with_learning(learning);
    c2.stdp_case_rates = SUITE_CASE_RATES;
    NetworkSpec {
        name: Some("classification_suite".into()),
        input_dim: CLASSIFICATION_DIM,
        layers: vec![
            LayerSpec {
                columns: 4,
                column_config: c1,
                fanin_map: Fanin::Strided { stride: 4 },
            },
            LayerSpec {
                columns: 1,
                column_config: c2,
                fanin_map: Fanin::Full,
            },
        ],
        total_synapses: None,
    }
}

/// Two-class toy trained and tested on disjoint draws, against an
/// untrained network on a balanced 10-class label-independent toy.
pub fn classification_suite(seed: u64, exec: Execution) -> Result<SuiteReport, BenchError> {
    let enc = suite_encoder(CLASSIFICATION_DIM);
    let train = synthetic_clusters(2, CLASSIFICATION_DIM, 100, 0.1, seed);
    let test = synthetic_clusters(2, CLASSIFICATION_DIM, 100, 0.1, derive_seed(seed, 2, 0));
    let spec = classification_suite_network(seed, 4, true);
    let learned = run_classification_split(&spec, &train, &test, &enc, 2000, exec)?;
    let noise_train = random_dataset(10, CLASSIFICATION_DIM, 1000, derive_seed(seed, 3, 0));
    let noise_test = random_dataset(10, CLASSIFICATION_DIM, 1000, derive_seed(seed, 4, 0));
    let untrained = classification_suite_network(seed, 10, false);
    let chance = run_classification_split(&untrained, &noise_train, &noise_test, &enc, 0, exec)?;
    Ok(SuiteReport {
        suite: Suite::Classification,
        seed,
        classes: 2,
        learned,
        chance,
    })
}

pub fn run_suite(suite: Suite, seed: u64, exec: Execution) -> Result<SuiteReport, BenchError> {
    match suite {
        Suite::Clustering => clustering_suite(seed, exec),
        Suite::Classification => classification_suite(seed, exec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: u32) -> TemporalValue {
        TemporalValue::at(v)
    }

    #[test]
    fn encode_examples() {
        let cfg = EncoderConfig::latency(3, 8);
        assert_eq!(
            encode_sample(&[1.0, 0.5, 0.25], &cfg).unwrap(),
            vec![t(0), t(4), t(6)]
        );
        assert!(encode_sample(&[0.0, 0.0, 0.0], &cfg)
            .unwrap()
            .iter()
            .all(|v| v.is_inf()));
        assert!(matches!(
            encode_sample(&[], &cfg),
            Err(BenchError::EmptySample)
        ));
        assert!(matches!(
            encode_sample(&[1.0, f64::NAN, 0.0], &cfg),
            Err(BenchError::NonFinite(_))
        ));
        assert!(matches!(
            encode_sample(&[1.0], &cfg),
            Err(BenchError::Dimension { .. })
        ));

        let fixed = EncoderConfig {
            ceiling: Some(2.0),
            ..EncoderConfig::latency(2, 8)
        };
        assert_eq!(
            encode_sample(&[3.0, 1.0], &fixed).unwrap(),
            vec![t(0), t(4)]
        );

        let onset = EncoderConfig {
            scheme: EncodingScheme::Onset,
            floor: 0.5,
            ..EncoderConfig::latency(3, 8)
        };
        assert_eq!(
            encode_sample(&[0.2, 0.6, 0.5], &onset).unwrap(),
            vec![TemporalValue::INF, t(0), TemporalValue::INF]
        );
    }

    #[test]
    fn encoder_range_must_fit_gamma() {
        assert!(EncoderConfig::latency(2, 63).validate(64).is_ok());
        assert!(EncoderConfig::latency(2, 64).validate(64).is_err());
    }

    #[test]
    fn purity_examples() {
        let a = [Some(0), Some(0), Some(1), Some(1), None];
        assert_eq!(purity(&a, &[0, 0, 1, 1, 2]), 1.0);
        assert_eq!(purity(&a, &[0, 1, 1, 1, 0]), 0.8);
        // label permutation
        assert_eq!(purity(&a, &[2, 1, 1, 1, 2]), 0.8);
        assert_eq!(purity(&[Some(0); 4], &[0, 1, 2, 3]), 0.25);
    }

    #[test]
    fn majority_map_breaks_ties_low() {
        let m = majority_map(&[Some(0), Some(0), Some(1)], &[3, 1, 2]);
        assert_eq!(m[&Some(0)], 1);
        assert_eq!(m[&Some(1)], 2);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let ds = synthetic_clusters(2, 4, 3, 0.05, 1);
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::from_csv_reader(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 6);
        assert_eq!(back.labels(), ds.labels());
        for (a, b) in back.samples.iter().zip(&ds.samples) {
            for (x, y) in a.features.iter().zip(&b.features) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let bad = "0,1.0,2.0\n1,1.0\n";
        assert!(matches!(
            Dataset::from_csv_reader(bad.as_bytes()),
            Err(BenchError::Parse { line: 2, .. }) | Err(BenchError::Csv(_))
        ));
        assert!(matches!(
            Dataset::from_csv_reader("x,1.0\n".as_bytes()),
            Err(BenchError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn training_order_covers_epochs() {
        let order = training_order(5, 12, 3);
        assert_eq!(order.len(), 12);
        let mut first: Vec<usize> = order[..5].to_vec();
        first.sort_unstable();
        assert_eq!(first, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn single_cluster_is_pure() {
        let ds = synthetic_clusters(1, 8, 10, 0.05, 4);
        let cfg = ColumnConfig::new(8, 1, 8);
        let m = run_clustering(&cfg, &ds, &EncoderConfig::latency(8, 7), 50).unwrap();
        assert_eq!(m.purity, 1.0);
        assert_eq!(m.weight_histogram.iter().sum::<u64>(), 8);
    }

    #[test]
    fn clustering_rejects_bad_shapes() {
        let ds = synthetic_clusters(3, 8, 2, 0.05, 4);
        let cfg = ColumnConfig::new(8, 2, 8);
        assert!(matches!(
            run_clustering(&cfg, &ds, &EncoderConfig::latency(8, 7), 5),
            Err(BenchError::TooManyLabels { labels: 3, q: 2 })
        ));
        let cfg = ColumnConfig::new(9, 3, 8);
        assert!(matches!(
            run_clustering(&cfg, &ds, &EncoderConfig::latency(9, 7), 5),
            Err(BenchError::Dimension { .. })
        ));
    }
}
