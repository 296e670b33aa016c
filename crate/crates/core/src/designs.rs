//! Built-in prototype designs used as cost anchors.
//!
//! The multi-layer MNIST designs are desk-scale surrogates: layer shapes
//! are chosen so the synapse totals match 389K, 1,310K and 3,096K exactly
//! with a 784-wide input, but the per-layer p and q are not the originals.

use crate::column::ColumnConfig;
use crate::network::{Fanin, LayerSpec, NetworkSpec};
use crate::ppa::{Anchor, DesignInventory};

/// Measured (power mW, computation time ns, area mm²) for the three
/// multi-layer designs.
pub const MNIST_MEASURED: [(u64, f64, f64, f64); 3] = [
    (389_000, 2.25, 41.38, 3.09),
    (1_310_000, 7.57, 66.16, 10.42),
    (3_096_000, 17.89, 91.58, 24.63),
];

/// Largest single clustering column: (synapses, power µW, area mm²).
pub const LARGEST_COLUMN_MEASURED: (u64, f64, f64) = (6750, 39.0, 0.054);

pub const MNIST_INPUT_DIM: usize = 784;

fn layer(columns: usize, p: usize, q: usize, fanin: Fanin) -> LayerSpec {
    LayerSpec {
        columns,
        column_config: ColumnConfig::new(p, q, p as u32),
        fanin_map: fanin,
    }
}

fn strided(upstream: usize, columns: usize) -> Fanin {
    Fanin::Strided {
        stride: (upstream / columns).max(1),
    }
}

fn mnist(name: &str, hidden: &[(usize, usize)]) -> NetworkSpec {
    // First layer: 625 columns over 4×8 patches of the image, q = 16.
    let mut layers = vec![layer(625, 32, 16, Fanin::Strided { stride: 1 })];
    let mut width = 625 * 16;
    for &(columns, p) in hidden {
        layers.push(layer(columns, p, 10, strided(width, columns)));
        width = columns * 10;
    }
    layers.push(layer(30, 230, 10, strided(width, 30)));
    let mut spec = NetworkSpec {
        name: Some(name.into()),
        input_dim: MNIST_INPUT_DIM,
        layers,
        total_synapses: None,
    };
    spec.total_synapses = Some(spec.total_synapses());
    spec
}

pub fn mnist_2layer() -> NetworkSpec {
    mnist("mnist_2layer", &[])
}

pub fn mnist_3layer() -> NetworkSpec {
    mnist("mnist_3layer", &[(307, 300)])
}

pub fn mnist_4layer() -> NetworkSpec {
    mnist("mnist_4layer", &[(500, 320), (369, 300)])
}

pub fn mnist_designs() -> [NetworkSpec; 3] {
    [mnist_2layer(), mnist_3layer(), mnist_4layer()]
}

/// 6,750-synapse clustering column.
pub fn largest_column() -> ColumnConfig {
    ColumnConfig::new(675, 10, 675)
}

/// Two-lead ECG clustering column: 82 samples, 2 clusters.
pub fn twolead_ecg_column() -> ColumnConfig {
    ColumnConfig::new(82, 2, 96)
}

/// The three multi-layer designs paired with their measured costs.
pub fn multilayer_anchors() -> Vec<Anchor> {
    mnist_designs()
        .iter()
        .zip(MNIST_MEASURED)
        .map(|(spec, (_, power_mw, time_ns, area_mm2))| Anchor {
            design: DesignInventory::from_network(spec),
            power_mw,
            computation_time_ns: time_ns,
            area_mm2,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synapse_totals_match() {
        for (spec, (n, ..)) in mnist_designs().iter().zip(MNIST_MEASURED) {
            assert_eq!(spec.total_synapses(), n);
            spec.validate().unwrap();
        }
        assert_eq!(largest_column().synapse_count(), LARGEST_COLUMN_MEASURED.0);
        largest_column().validate().unwrap();
        twolead_ecg_column().validate().unwrap();
    }

    #[test]
    fn layer_counts() {
        let n: Vec<usize> = mnist_designs().iter().map(|s| s.layers.len()).collect();
        assert_eq!(n, vec![2, 3, 4]);
    }
}
