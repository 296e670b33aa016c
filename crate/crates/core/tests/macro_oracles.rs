//! Macro models checked against arithmetic oracles written independently
//! of the tick-level implementations.

use proptest::prelude::*;
use tnnsim_core::macros::*;
use tnnsim_core::temporal::{first_edge, temporal_to_edge_trace};
use tnnsim_core::{BinaryTrace, TemporalValue};

const PERIOD: u32 = 64;

fn all_times() -> impl Iterator<Item = TemporalValue> {
    (0..PERIOD)
        .map(TemporalValue::at)
        .chain([TemporalValue::INF])
}

fn le_oracle(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) if x <= y => Some(x),
        (Some(x), None) => Some(x),
        _ => None,
    }
}

#[test]
fn less_equal_value_form_exhaustive() {
    for a in all_times() {
        for b in all_times() {
            assert_eq!(
                less_equal(a, b).time(),
                le_oracle(a.time(), b.time()),
                "{a:?} {b:?}"
            );
        }
    }
}

#[test]
fn less_equal_tick_form_exhaustive() {
    for a in all_times() {
        for b in all_times() {
            let da = temporal_to_edge_trace(a, PERIOD).unwrap();
            let db = temporal_to_edge_trace(b, PERIOD).unwrap();
            let out = less_equal_trace(&da, &db);
            assert!(out.is_monotone());
            assert_eq!(
                first_edge(&out).time(),
                le_oracle(a.time(), b.time()),
                "{a:?} {b:?}"
            );
        }
    }
}

/// Runs the readout loop for `ticks` ticks starting from an armed state.
fn readout(weight: u8, bits: u8, ticks: u32) -> (Vec<bool>, SynapseState) {
    let mut s = SynapseState::new(weight);
    s.begin_readout();
    let mut out = Vec::new();
    for _ in 0..ticks {
        let (bit, next) = syn_readout_step(s, bits);
        out.push(bit);
        s = next;
    }
    (out, s)
}

#[test]
fn syn_readout_ramp_width_equals_weight() {
    for bits in 1..=MAX_WEIGHT_BITS {
        let window = 1u32 << bits;
        for w in 0..=max_weight(bits) {
            let (bits_out, end) = readout(w, bits, window);
            // oracle: ramp-no-leak asserts the first `w` ticks only
            let expected: Vec<bool> = (0..window).map(|t| t < u32::from(w)).collect();
            assert_eq!(bits_out, expected, "bits {bits} weight {w}");
            assert_eq!(end.weight, w, "weight restored after wraparound");
            assert!(!end.readout_active);
            assert_eq!(end.stored_weight(), w);
        }
    }
}

#[test]
fn syn_readout_abort_restores_weight() {
    for w in 0..=7u8 {
        for cut in 0..8 {
            let (_, mut s) = readout(w, 3, cut);
            s.abort_readout();
            assert_eq!(s.weight, w);
            assert!(!s.readout_active);
        }
    }
}

#[test]
fn syn_weight_update_matches_saturating_arithmetic() {
    for bits in 1..=MAX_WEIGHT_BITS {
        let max = (1u16 << bits) as i32 - 1;
        for w in 0..=max_weight(bits) {
            for (inc, dec) in [(false, false), (true, false), (false, true)] {
                let s = syn_weight_update(SynapseState::new(w), inc, dec, bits).unwrap();
                let expected = (i32::from(w) + i32::from(inc) - i32::from(dec)).clamp(0, max);
                assert_eq!(i32::from(s.weight), expected);
                assert_eq!(s.shadow_weight, s.weight);
            }
            assert!(syn_weight_update(SynapseState::new(w), true, true, bits).is_err());
        }
    }
}

#[test]
fn spike_gen_output_is_one_window() {
    for width in 1..=32 {
        for start in [0, 5, 20] {
            let out = spike_gen_pulse(start, width, 3, PERIOD);
            assert_eq!(out.count_ones(), 8, "width {width} start {start}");
            let expected: Vec<bool> = (0..PERIOD).map(|t| t >= start && t < start + 8).collect();
            assert_eq!(out.levels(), expected.as_slice());
        }
    }
    assert!(spike_gen_pulse(3, 0, 3, PERIOD).is_all_zero());
}

#[test]
fn spike_gen_ignores_input_during_window() {
    // pulses at 0 and 4 overlap the first window; a pulse at 10 retriggers
    let mut input = BinaryTrace::zeros(PERIOD);
    for t in [0, 4, 10] {
        input.set(t, true);
    }
    let out = spike_gen(&input, 3);
    let expected: Vec<bool> = (0..PERIOD as usize)
        .map(|t| t < 8 || (10..18).contains(&t))
        .collect();
    assert_eq!(out.levels(), expected.as_slice());
}

fn case_oracle(ein: Option<u32>, eout: Option<u32>) -> Option<usize> {
    match (ein, eout) {
        (Some(i), Some(o)) if i <= o => Some(0),
        (Some(_), Some(_)) => Some(1),
        (Some(_), None) => Some(2),
        (None, Some(_)) => Some(3),
        (None, None) => None,
    }
}

#[test]
fn stdp_case_gen_exhaustive() {
    for a in all_times() {
        for b in all_times() {
            let case = stdp_case_gen(a, b);
            assert_eq!(case.index(), case_oracle(a.time(), b.time()));
            let hot = case.one_hot().iter().filter(|&&x| x).count();
            assert_eq!(hot, usize::from(case.index().is_some()));
        }
    }
}

#[test]
fn stdp_case_incdec_truth_table() {
    let cases = [
        (StdpCase::Case0, true),
        (StdpCase::Case1, false),
        (StdpCase::Case2, true),
        (StdpCase::Case3, false),
    ];
    for (case, is_inc) in cases {
        for brv in [false, true] {
            let (inc, dec) = incdec(case, Brv::fixed(brv));
            assert_eq!(inc, brv && is_inc, "{case:?} brv {brv}");
            assert_eq!(dec, brv && !is_inc, "{case:?} brv {brv}");
        }
    }
    for brv in [false, true] {
        assert_eq!(incdec(StdpCase::None, Brv::fixed(brv)), (false, false));
    }
}

#[test]
fn stabilize_func_is_a_mux() {
    let lines: Vec<Brv> = (0..8)
        .map(|k| Brv::new(k % 3 == 0, k as f64 / 8.0))
        .collect();
    for w in 0..8u8 {
        assert_eq!(stabilize_func(w, &lines).unwrap(), lines[w as usize]);
    }
    assert!(stabilize_func(8, &lines).is_err());
}

fn trace_strategy() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 1..80)
}

proptest! {
    #[test]
    fn pulse2edge_is_prefix_or(levels in trace_strategy()) {
        let out = pulse2edge(&BinaryTrace::from_levels(levels.clone()));
        let mut seen = false;
        for (t, &l) in levels.iter().enumerate() {
            seen |= l;
            prop_assert_eq!(out.get(t), seen);
        }
    }

    #[test]
    fn edge2pulse_marks_rising_transitions(levels in trace_strategy()) {
        let out = edge2pulse(&BinaryTrace::from_levels(levels.clone()));
        for (t, &l) in levels.iter().enumerate() {
            let prev = t > 0 && levels[t - 1];
            prop_assert_eq!(out.get(t), l && !prev);
        }
    }

    #[test]
    fn edge_round_trip(t in 0u32..PERIOD) {
        let v = TemporalValue::at(t);
        let edge = temporal_to_edge_trace(v, PERIOD).unwrap();
        prop_assert_eq!(first_edge(&edge), v);
        let pulse = edge2pulse(&edge);
        prop_assert_eq!(pulse.count_ones(), 1);
        prop_assert_eq!(pulse2edge(&pulse), edge);
    }
}
