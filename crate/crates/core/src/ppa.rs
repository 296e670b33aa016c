//! Analytical power / computation-time / area estimation.
//!
//! Costs are rolled up from the nine characterized macros plus calibrated
//! per-synapse constants:
//!
//! * leakage = Σ macro leakage over synapses, neurons and columns
//! * dynamic = synapses · (power_per_synapse − synapse macro leakage),
//!   linear in the aclk frequency
//! * area = (synapses · synapse macro area + neuron/column macro area) ·
//!   glue factor
//! * time = Σ layers (gamma term + ⌈log2 p⌉ adder stages)
//!   + (layers − 1) · per-layer overhead

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::column::ColumnConfig;
use crate::designs;
use crate::network::NetworkSpec;
use crate::temporal::DEFAULT_ACLK_FREQ_HZ;

#[derive(Debug, Error)]
pub enum PpaError {
    #[error("frequency must be positive, got {0}")]
    BadFrequency(f64),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacroKind {
    SynReadout,
    SynWeightUpdate,
    LessEqual,
    StdpCaseGen,
    Incdec,
    StabilizeFunc,
    SpikeGen,
    Pulse2Edge,
    Edge2Pulse,
}

impl MacroKind {
    pub fn name(self) -> &'static str {
        match self {
            MacroKind::SynReadout => "syn_readout",
            MacroKind::SynWeightUpdate => "syn_weight_update",
            MacroKind::LessEqual => "less_equal",
            MacroKind::StdpCaseGen => "stdp_case_gen",
            MacroKind::Incdec => "incdec",
            MacroKind::StabilizeFunc => "stabilize_func",
            MacroKind::SpikeGen => "spike_gen",
            MacroKind::Pulse2Edge => "pulse2edge",
            MacroKind::Edge2Pulse => "edge2pulse",
        }
    }
}

/// Characterized cost of one macro instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroPpa {
    #[serde(rename = "name")]
    pub kind: MacroKind,
    pub leakage_nw: f64,
    pub delay_ps: f64,
    pub area_um2: f64,
}

const fn entry(kind: MacroKind, leakage_nw: f64, delay_ps: f64, area_um2: f64) -> MacroPpa {
    MacroPpa {
        kind,
        leakage_nw,
        delay_ps,
        area_um2,
    }
}

/// 7nm characterization of the nine macros.
pub const MACRO_TABLE: [MacroPpa; 9] = [
    entry(MacroKind::SynReadout, 0.43, 32.0, 0.50),
    entry(MacroKind::SynWeightUpdate, 1.22, 190.0, 1.24),
    entry(MacroKind::LessEqual, 0.17, 30.0, 0.17),
    entry(MacroKind::StdpCaseGen, 0.34, 66.0, 0.60),
    entry(MacroKind::Incdec, 0.26, 56.0, 0.34),
    entry(MacroKind::StabilizeFunc, 0.12, 158.0, 0.36),
    entry(MacroKind::SpikeGen, 1.46, 28.0, 1.55),
    entry(MacroKind::Pulse2Edge, 0.44, 22.0, 0.44),
    entry(MacroKind::Edge2Pulse, 0.49, 58.0, 0.61),
];

pub fn macro_table() -> &'static [MacroPpa; 9] {
    &MACRO_TABLE
}

pub fn macro_ppa(kind: MacroKind) -> MacroPpa {
    *MACRO_TABLE
        .iter()
        .find(|m| m.kind == kind)
        .expect("every kind is tabulated")
}

/// Macros instantiated once per synapse.
pub const SYNAPSE_MACROS: [MacroKind; 5] = [
    MacroKind::SynReadout,
    MacroKind::SynWeightUpdate,
    MacroKind::StdpCaseGen,
    MacroKind::Incdec,
    MacroKind::StabilizeFunc,
];
/// Once per neuron: the WTA gate and the output edge latch.
pub const NEURON_MACROS: [MacroKind; 2] = [MacroKind::LessEqual, MacroKind::Pulse2Edge];
/// Once per column: the gclk reset pulse.
pub const COLUMN_MACROS: [MacroKind; 1] = [MacroKind::Edge2Pulse];

fn sum_of(kinds: &[MacroKind], f: impl Fn(&MacroPpa) -> f64) -> f64 {
    kinds.iter().map(|&k| f(&macro_ppa(k))).sum()
}

/// Shape of one layer as seen by the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub columns: u64,
    pub p: u64,
    pub q: u64,
}

/// Instance counts a design is costed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignInventory {
    pub name: String,
    pub layers: Vec<LayerShape>,
}

impl DesignInventory {
    pub fn from_network(spec: &NetworkSpec) -> Self {
        Self {
            name: spec.name.clone().unwrap_or_else(|| "network".into()),
            layers: spec
                .layers
                .iter()
                .map(|l| LayerShape {
                    columns: l.columns as u64,
                    p: l.column_config.p as u64,
                    q: l.column_config.q as u64,
                })
                .collect(),
        }
    }

    pub fn from_column(name: impl Into<String>, cfg: &ColumnConfig) -> Self {
        Self {
            name: name.into(),
            layers: vec![LayerShape {
                columns: 1,
                p: cfg.p as u64,
                q: cfg.q as u64,
            }],
        }
    }

    pub fn synapses(&self) -> u64 {
        self.layers.iter().map(|l| l.columns * l.p * l.q).sum()
    }

    pub fn neurons(&self) -> u64 {
        self.layers.iter().map(|l| l.columns * l.q).sum()
    }

    pub fn columns(&self) -> u64 {
        self.layers.iter().map(|l| l.columns).sum()
    }

    fn leakage_nw(&self) -> f64 {
        self.synapses() as f64 * sum_of(&SYNAPSE_MACROS, |m| m.leakage_nw)
            + self.neurons() as f64 * sum_of(&NEURON_MACROS, |m| m.leakage_nw)
            + self.columns() as f64 * sum_of(&COLUMN_MACROS, |m| m.leakage_nw)
    }

    fn non_synapse_leakage_nw(&self) -> f64 {
        self.leakage_nw() - self.synapses() as f64 * sum_of(&SYNAPSE_MACROS, |m| m.leakage_nw)
    }

    /// Cell area before the glue factor.
    fn macro_area_um2(&self, area_per_synapse_um2: f64) -> f64 {
        self.synapses() as f64 * area_per_synapse_um2
            + self.neurons() as f64 * sum_of(&NEURON_MACROS, |m| m.area_um2)
            + self.columns() as f64 * sum_of(&COLUMN_MACROS, |m| m.area_um2)
    }

    /// Σ over layers of ⌈log2 p⌉, the adder-tree depth.
    fn adder_stages(&self) -> u64 {
        self.layers.iter().map(|l| adder_depth(l.p)).sum()
    }
}

/// ⌈log2 p⌉, with a single input needing no adder stage.
pub fn adder_depth(p: u64) -> u64 {
    if p <= 1 {
        0
    } else {
        u64::from(64 - (p - 1).leading_zeros())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConstants {
    /// Total (leakage + dynamic) power per synapse at `reference_freq_hz`.
    pub power_per_synapse_nw: f64,
    /// Synapse macro cell area.
    pub area_per_synapse_um2: f64,
    /// Multiplier from macro cell area to placed area (adder trees,
    /// registers, routing).
    pub glue_area_factor: f64,
    pub adder_stage_delay_ps: f64,
    /// Fixed latency of one layer independent of p.
    pub gamma_term_ns: f64,
    /// Hand-off latency between consecutive layers.
    pub per_layer_overhead_ns: f64,
    pub reference_freq_hz: f64,
}

/// Default adder stage delay; not characterized with the macros.
pub const DEFAULT_ADDER_STAGE_DELAY_PS: f64 = 40.0;

/// A measured design point used for calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub design: DesignInventory,
    pub power_mw: f64,
    pub computation_time_ns: f64,
    pub area_mm2: f64,
}

impl CalibrationConstants {
    /// Fits power and area to one anchor design, and the two timing
    /// constants to `timing` by least squares.
    pub fn calibrate(
        anchor: &Anchor,
        timing: &[Anchor],
        adder_stage_delay_ps: f64,
        reference_freq_hz: f64,
    ) -> Result<Self, PpaError> {
        let d = &anchor.design;
        let syn = d.synapses() as f64;
        if syn == 0.0 {
            return Err(PpaError::Calibration("anchor has no synapses".into()));
        }
        let power_nw = anchor.power_mw * 1e6;
        let power_per_synapse_nw = (power_nw - d.non_synapse_leakage_nw()) / syn;
        let area_per_synapse_um2 = sum_of(&SYNAPSE_MACROS, |m| m.area_um2);
        let glue_area_factor = anchor.area_mm2 * 1e6 / d.macro_area_um2(area_per_synapse_um2);
        if power_per_synapse_nw <= sum_of(&SYNAPSE_MACROS, |m| m.leakage_nw) {
            return Err(PpaError::Calibration(
                "anchor power is below the synapse macro leakage".into(),
            ));
        }

        // T − stages·adder = L·g + (L − 1)·o, solved by normal equations.
        let adder_ns = adder_stage_delay_ps / 1000.0;
        let (mut saa, mut sab, mut sbb, mut say, mut sby) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for row in timing {
            let layers = row.design.layers.len() as f64;
            let (a, b) = (layers, layers - 1.0);
            let y = row.computation_time_ns - row.design.adder_stages() as f64 * adder_ns;
            saa += a * a;
            sab += a * b;
            sbb += b * b;
            say += a * y;
            sby += b * y;
        }
        let det = saa * sbb - sab * sab;
        if timing.len() < 2 || det.abs() < 1e-12 {
            return Err(PpaError::Calibration(
                "timing fit needs designs with at least two different layer counts".into(),
            ));
        }
        let gamma_term_ns = (sbb * say - sab * sby) / det;
        let per_layer_overhead_ns = (saa * sby - sab * say) / det;
        if gamma_term_ns <= 0.0 || per_layer_overhead_ns < 0.0 {
            return Err(PpaError::Calibration(format!(
                "timing fit produced non-physical constants ({gamma_term_ns:.3} ns, {per_layer_overhead_ns:.3} ns)"
            )));
        }
        Ok(Self {
            power_per_synapse_nw,
            area_per_synapse_um2,
            glue_area_factor,
            adder_stage_delay_ps,
            gamma_term_ns,
            per_layer_overhead_ns,
            reference_freq_hz,
        })
    }

    /// Dynamic share of the per-synapse power.
    pub fn dynamic_per_synapse_nw(&self) -> f64 {
        self.power_per_synapse_nw - sum_of(&SYNAPSE_MACROS, |m| m.leakage_nw)
    }
}

impl Default for CalibrationConstants {
    /// Calibrated on the built-in 389K-synapse two-layer design, timing
    /// fitted to the three multi-layer designs.
    fn default() -> Self {
        let anchors = designs::multilayer_anchors();
        Self::calibrate(
            &anchors[0],
            &anchors,
            DEFAULT_ADDER_STAGE_DELAY_PS,
            DEFAULT_ACLK_FREQ_HZ,
        )
        .expect("built-in anchors calibrate")
    }
}

/// Rolled-up cost of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpaReport {
    pub design: String,
    pub synapse_count: u64,
    pub leakage_mw: f64,
    pub dynamic_mw: f64,
    pub power_mw: f64,
    pub computation_time_ns: f64,
    pub area_mm2: f64,
    pub freq_hz: f64,
}

pub fn estimate_design(design: &DesignInventory, cal: &CalibrationConstants) -> PpaReport {
    let leakage_nw = design.leakage_nw();
    let dynamic_nw = design.synapses() as f64 * cal.dynamic_per_synapse_nw();
    let area_um2 = design.macro_area_um2(cal.area_per_synapse_um2) * cal.glue_area_factor;
    let layers = design.layers.len() as f64;
    let time_ns = if design.layers.is_empty() {
        0.0
    } else {
        layers * cal.gamma_term_ns
            + design.adder_stages() as f64 * cal.adder_stage_delay_ps / 1000.0
            + (layers - 1.0) * cal.per_layer_overhead_ns
    };
    PpaReport {
        design: design.name.clone(),
        synapse_count: design.synapses(),
        leakage_mw: leakage_nw * 1e-6,
        dynamic_mw: dynamic_nw * 1e-6,
        power_mw: (leakage_nw + dynamic_nw) * 1e-6,
        computation_time_ns: time_ns,
        area_mm2: area_um2 * 1e-6,
        freq_hz: cal.reference_freq_hz,
    }
}

pub fn estimate_column(config: &ColumnConfig, cal: &CalibrationConstants) -> PpaReport {
    let name = format!("column_{}x{}", config.p, config.q);
    estimate_design(&DesignInventory::from_column(name, config), cal)
}

pub fn estimate_network(spec: &NetworkSpec, cal: &CalibrationConstants) -> PpaReport {
    estimate_design(&DesignInventory::from_network(spec), cal)
}

/// Rescales the dynamic component to `new_freq_hz`; leakage is unchanged.
pub fn scale_power_with_frequency(
    report: &PpaReport,
    new_freq_hz: f64,
) -> Result<PpaReport, PpaError> {
    if !new_freq_hz.is_finite() || new_freq_hz <= 0.0 {
        return Err(PpaError::BadFrequency(new_freq_hz));
    }
    let k = new_freq_hz / report.freq_hz;
    let dynamic_mw = report.dynamic_mw * k;
    Ok(PpaReport {
        dynamic_mw,
        power_mw: report.leakage_mw + dynamic_mw,
        freq_hz: new_freq_hz,
        ..report.clone()
    })
}

pub const REPORT_CSV_HEADER: &str = "design,synapse_count,power_mw,computation_time_ns,area_mm2";
pub const MACRO_CSV_HEADER: &str = "macro,leakage_nw,delay_ps,area_um2";

pub fn write_reports_csv<W: Write>(mut w: W, reports: &[PpaReport]) -> std::io::Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.design, r.synapse_count, r.power_mw, r.computation_time_ns, r.area_mm2
        )?;
    }
    Ok(())
}

pub fn write_macro_table_csv<W: Write>(mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MACRO_CSV_HEADER}")?;
    for m in &MACRO_TABLE {
        writeln!(
            w,
            "{},{},{},{}",
            m.kind.name(),
            m.leakage_nw,
            m.delay_ps,
            m.area_um2
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find(kind: MacroKind) -> MacroPpa {
        macro_ppa(kind)
    }

    #[test]
    fn table_entries() {
        let r = find(MacroKind::SynReadout);
        assert_eq!((r.leakage_nw, r.delay_ps, r.area_um2), (0.43, 32.0, 0.50));
        let l = find(MacroKind::LessEqual);
        assert_eq!((l.leakage_nw, l.delay_ps, l.area_um2), (0.17, 30.0, 0.17));
        let s = find(MacroKind::SpikeGen);
        assert_eq!((s.leakage_nw, s.delay_ps, s.area_um2), (1.46, 28.0, 1.55));
        assert_eq!(MACRO_TABLE.len(), 9);
        assert!(MACRO_TABLE
            .iter()
            .all(|m| m.leakage_nw >= 0.0 && m.delay_ps >= 0.0 && m.area_um2 >= 0.0));
    }

    #[test]
    fn synapse_macro_area_sum() {
        assert!((sum_of(&SYNAPSE_MACROS, |m| m.area_um2) - 3.04).abs() < 1e-12);
    }

    #[test]
    fn adder_depth_is_ceil_log2() {
        assert_eq!(adder_depth(1), 0);
        assert_eq!(adder_depth(2), 1);
        assert_eq!(adder_depth(8), 3);
        assert_eq!(adder_depth(9), 4);
        assert_eq!(adder_depth(1024), 10);
    }

    #[test]
    fn frequency_scaling() {
        let r = PpaReport {
            design: "x".into(),
            synapse_count: 1,
            leakage_mw: 0.0,
            dynamic_mw: 3.0,
            power_mw: 3.0,
            computation_time_ns: 1.0,
            area_mm2: 1.0,
            freq_hz: 1e5,
        };
        assert_eq!(scale_power_with_frequency(&r, 2e5).unwrap().power_mw, 6.0);
        assert_eq!(scale_power_with_frequency(&r, 1e5).unwrap(), r);
        let mixed = PpaReport {
            leakage_mw: 1.5,
            power_mw: 4.5,
            ..r.clone()
        };
        let k3 = scale_power_with_frequency(&mixed, 3e5).unwrap();
        assert_eq!(k3.power_mw, 1.5 + 3.0 * 3.0);
        assert_eq!(k3.leakage_mw, 1.5);
        assert!(scale_power_with_frequency(&r, 0.0).is_err());
        assert!(scale_power_with_frequency(&r, -1.0).is_err());
    }

    #[test]
    fn table_round_trips_bit_exactly() {
        let json = serde_json::to_string(&MACRO_TABLE).unwrap();
        let back: Vec<MacroPpa> = serde_json::from_str(&json).unwrap();
        for (a, b) in back.iter().zip(&MACRO_TABLE) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.leakage_nw.to_bits(), b.leakage_nw.to_bits());
            assert_eq!(a.delay_ps.to_bits(), b.delay_ps.to_bits());
            assert_eq!(a.area_um2.to_bits(), b.area_um2.to_bits());
        }
        let mut csv = Vec::new();
        write_macro_table_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        for (line, m) in text.lines().skip(1).zip(&MACRO_TABLE) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[0], m.kind.name());
            assert_eq!(
                f[1].parse::<f64>().unwrap().to_bits(),
                m.leakage_nw.to_bits()
            );
            assert_eq!(f[2].parse::<f64>().unwrap().to_bits(), m.delay_ps.to_bits());
            assert_eq!(f[3].parse::<f64>().unwrap().to_bits(), m.area_um2.to_bits());
        }
    }

    #[test]
    fn default_calibration_is_physical() {
        let cal = CalibrationConstants::default();
        assert!(cal.power_per_synapse_nw > 5.0 && cal.power_per_synapse_nw < 6.5);
        assert!(cal.dynamic_per_synapse_nw() > 0.0);
        assert!(cal.glue_area_factor > 1.0);
        assert!(cal.gamma_term_ns > 0.0 && cal.per_layer_overhead_ns >= 0.0);
    }

    #[test]
    fn empty_design_costs_nothing() {
        let d = DesignInventory {
            name: "empty".into(),
            layers: vec![],
        };
        let r = estimate_design(&d, &CalibrationConstants::default());
        assert_eq!(r.synapse_count, 0);
        assert_eq!(r.power_mw, 0.0);
        assert_eq!(r.area_mm2, 0.0);
        assert_eq!(r.computation_time_ns, 0.0);
    }
}
