use proptest::prelude::*;

use cryoqc::analog::{
    apply_droop, vdac_pulse, vdac_ramp, BiasLimits, InjectorConfig, LeakageModel, SigmaDeltaSequencer,
    VdacPulse, VdacStage,
};
use cryoqc::detector::{cds_sample, DetectorChainConfig};
use cryoqc::noise::{
    h_cds, h_sh, injector_noise_budget, integrate_power, rc_power_response, sinc, CdsTiming,
    FrequencyGrid, InjectorNoiseParams, NoisePsd, SamplerTiming, Transfer,
};
use cryoqc::patgen::{
    assemble, decode, execute, validate, InstrKind, Instruction, NodeTable, PatternProgram, MEMORY_DEPTH,
};
use cryoqc::patgen::ControlEvent;
use cryoqc::pulsegen::{
    generate_phases, mode_select, pulse_select, Combine, LatchSource, ModeSelect, PulseSelectConfig,
};
use cryoqc::qexp::{extract_probabilities, run_trials, HistogramConfig, ReadoutSetup, TunnelingModel};
use cryoqc::thermal::{
    passive_flex_load, total_load, ActiveLoadSpec, CoaxSpec, ConductivityTable, FlexCableSpec,
};
use cryoqc::timeline::{AnalogTrace, SignalTimeline};

fn node_names() -> Vec<String> {
    let t = NodeTable::default();
    let mut v: Vec<(String, u8)> = t.iter().map(|(n, b)| (n.to_string(), b)).collect();
    v.sort_by_key(|p| p.1);
    v.into_iter().map(|p| p.0).collect()
}

fn plain_vector() -> impl Strategy<Value = Instruction> {
    let names = node_names();
    (
        prop_oneof![
            Just(InstrKind::SetHigh),
            Just(InstrKind::SetLow),
            Just(InstrKind::Pulse),
            Just(InstrKind::Amplitude),
        ],
        0u8..8,
        proptest::collection::btree_set(0usize..names.len(), 1..5),
        any::<u8>(),
        0u8..4,
    )
        .prop_map(move |(kind, leaf_cell, idx, amplitude_code, delay_vectors)| Instruction {
            kind,
            leaf_cell,
            targets: idx.into_iter().map(|i| names[i].clone()).collect(),
            amplitude_code,
            loop_count: 0,
            loop_target: 0,
            delay_vectors,
        })
}

fn program(vectors: Vec<Instruction>) -> PatternProgram {
    PatternProgram {
        vectors,
        node_table: NodeTable::default(),
    }
}

/// Straight-line body, optionally closed by one loop back into it.
fn any_program() -> impl Strategy<Value = PatternProgram> {
    (proptest::collection::vec(plain_vector(), 1..40), any::<Option<(u16, u16)>>()).prop_map(|(mut v, lp)| {
        if let Some((n, t)) = lp {
            let target = 1 + t % v.len() as u16;
            v.push(Instruction::looping(1 + n % 50, target));
        }
        program(v)
    })
}

fn payload(ev: &[ControlEvent]) -> Vec<(u16, u64)> {
    ev.iter().map(|e| (e.data_bus, e.ctrl_bus)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn patgen_round_trip_and_utilization(p in any_program()) {
        prop_assert!(validate(&p).is_ok());
        let img = assemble(&p).unwrap();
        prop_assert_eq!(img.utilization_bits(), 64 * p.len());
        prop_assert_eq!(p.utilization_bits(), 64 * p.len());
        prop_assert_eq!(decode(&img, &p.node_table).unwrap(), p.clone());
        let bytes = img.to_bytes();
        prop_assert_eq!(decode(&cryoqc::patgen::MemoryImage::from_bytes(&bytes).unwrap(), &p.node_table).unwrap(), p);
    }

    #[test]
    fn patgen_loop_algebra(body in proptest::collection::vec(plain_vector(), 1..20), n in 1u16..30, split in any::<prop::sample::Index>()) {
        let t = split.index(body.len());
        let mut looped = body.clone();
        looped.push(Instruction::looping(n, t as u16 + 1));
        let ev = execute(&program(looped), 1 << 40).unwrap();
        let plain = execute(&program(body.clone()), 1 << 40).unwrap();

        let mut expected = payload(&plain);
        let rep = payload(&plain[t..]);
        for _ in 1..n {
            expected.extend(rep.iter().copied());
        }
        prop_assert_eq!(payload(&ev), expected);
        if n == 1 {
            prop_assert_eq!(ev, plain);
        }
    }

    #[test]
    fn patgen_execute_is_pure(p in any_program()) {
        prop_assert_eq!(execute(&p, 1 << 40), execute(&p, 1 << 40));
    }

    #[test]
    fn pulse_width_identity(s1 in 0u8..16, s2 in 0u8..16) {
        let t = 0.5e-9;
        let tl = generate_phases(2e9, 96.0 * t).unwrap();
        let width = |c| {
            let cfg = PulseSelectConfig::new(s1, s2, c, 0).unwrap();
            let out = pulse_select(&cfg, &tl);
            out.high_intervals(&cfg.output_name())
                .iter()
                .map(|&(a, b)| (b.min(64.0 * t) - a.max(32.0 * t)).max(0.0))
                .sum::<f64>()
        };
        prop_assert!((width(Combine::And) + width(Combine::Or) - 16e-9).abs() < 1e-18);
        for e in &tl.edges {
            let k = e.time_s / t;
            prop_assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn sr_latch_follows_last_event(events in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40)) {
        let (set_bit, reset_bit) = (3u8, 7u8);
        let evs: Vec<ControlEvent> = events
            .iter()
            .enumerate()
            .map(|(i, &(s, r))| ControlEvent {
                tick: i as u64,
                data_bus: 0,
                ctrl_bus: (s as u64) << set_bit | (r as u64) << reset_bit,
            })
            .collect();
        let mut input = SignalTimeline::new(1e-9);
        input.push(0.0, "LEAF0", 1);
        let mode = ModeSelect::SrLatch {
            set: LatchSource { ctrl_bit: set_bit },
            reset: LatchSource { ctrl_bit: reset_bit },
            tick_period_s: 1e-9,
        };
        let out = mode_select(&mode, &input, &evs).timeline;
        let mut q = 0u8;
        for (i, &(s, r)) in events.iter().enumerate() {
            if r {
                q = 0;
            } else if s {
                q = 1;
            }
            prop_assert_eq!(out.level_at("LEAF0_SR", i as f64 * 1e-9), q);
        }
    }

    #[test]
    fn sc_conserves_charge_and_converges(
        c1 in 0.1e-15f64..10e-15, c2 in 0.1e-15f64..100e-15,
        v1 in 0.0f64..0.8, v2 in 0.0f64..0.8,
    ) {
        let s = VdacStage { c1_f: c1, c2_f: c2, v1_v: v1, v2_v: v2, vref_v: 0.8 };
        let after = vdac_pulse(s, VdacPulse::SC);
        prop_assert!((after.charge() - s.charge()).abs() <= 1e-12 * s.charge().abs().max(1e-30));
        let up = vdac_pulse(vdac_pulse(s, VdacPulse::CH), VdacPulse::SC);
        let shrink = c2 / (c1 + c2);
        prop_assert!(((0.8 - up.v2_v) - (0.8 - v2) * shrink).abs() < 1e-12);
        let down = vdac_pulse(vdac_pulse(s, VdacPulse::DC), VdacPulse::SC);
        prop_assert!((down.v2_v - v2 * shrink).abs() < 1e-12);
    }

    #[test]
    fn ramp_respects_limits(target in 0.0f64..0.45) {
        let limits = BiasLimits::default();
        let r = vdac_ramp(VdacStage::default_coarse(), VdacStage::default_fine(), &SigmaDeltaSequencer::default(), &limits, target).unwrap();
        for &(_, v) in &r.trajectory {
            prop_assert!(v >= limits.v_min_v() && v <= limits.v_max_v());
        }
        prop_assert!((r.final_v - target).abs() < 300e-6 / 16.0);
    }

    #[test]
    fn injector_is_linear(code in 0u8..=255) {
        let cfg = |c| InjectorConfig { code: c, ..InjectorConfig::default() };
        prop_assert_eq!(cfg(0).step_v(), 0.0);
        prop_assert!((cfg(code).step_v() - code as f64 * cfg(1).step_v()).abs() < 1e-15);
    }

    #[test]
    fn droop_composes(v in -0.5f64..0.5, a in 0.0f64..1e-3, b in 0.0f64..1e-3) {
        let lm = LeakageModel::default();
        let once = apply_droop(v, a + b, &lm).unwrap();
        let twice = apply_droop(apply_droop(v, a, &lm).unwrap(), b, &lm).unwrap();
        prop_assert!((once - twice).abs() < 1e-12);
    }

    #[test]
    fn transfer_functions_nonnegative(
        lg in 0.0f64..10.0, track in 0.0f64..1.0, tau_sh in 10e-9f64..90e-9, lambda in 100e-9f64..500e-9,
    ) {
        let f = 10f64.powf(lg);
        let sh = SamplerTiming::new(track * 1e-6, 1e-6, 100e6).unwrap();
        let cds = CdsTiming::new(tau_sh, lambda, 1e-6).unwrap();
        prop_assert!(h_sh(f, &sh) >= 0.0);
        prop_assert!(h_cds(f, &cds, 100e6) >= 0.0);
        prop_assert!(rc_power_response(f, 70e6) >= 0.0);
        prop_assert_eq!(h_cds(0.0, &cds, 100e6), 0.0);
    }

    #[test]
    fn h_sh_pure_hold_limit(lg in 0.0f64..10.0) {
        let f = 10f64.powf(lg);
        let t = SamplerTiming::new(0.0, 500e-9, 500e6).unwrap();
        let pure = 2.0 * (500e6 * 500e-9) * sinc(f * 500e-9).powi(2);
        prop_assert!((h_sh(f, &t) - pure).abs() <= 1e-12 * 500.0);
    }

    #[test]
    fn integrated_noise_is_monotone(hi in 1e6f64..1e9, extra in 1.0f64..10.0, g in 1.0f64..3.0) {
        let psd = NoisePsd::white("n", 1e-16);
        let chain = [Transfer::Rc { pole_hz: 50e6 }];
        let narrow = FrequencyGrid::logarithmic(1e3, hi, 2000).unwrap();
        let wide = FrequencyGrid::logarithmic(1e3, hi * extra, 2000).unwrap();
        let p1 = integrate_power(&psd, &chain, &narrow).unwrap();
        prop_assert!(integrate_power(&psd, &chain, &wide).unwrap() >= p1);
        let louder = [Transfer::Rc { pole_hz: 50e6 }, Transfer::Gain { g }];
        prop_assert!(integrate_power(&psd, &louder, &narrow).unwrap() >= p1);
    }

    #[test]
    fn injector_budget_is_rss(s_vdac in 1e-20f64..1e-16, s_vdd in 1e-20f64..1e-15, t in 1.0f64..10.0) {
        let p = InjectorNoiseParams { s_vdac_v2_hz: s_vdac, s_vdd_v2_hz: s_vdd, temp_k: t, grid_points: 2000, ..InjectorNoiseParams::default() };
        let b = injector_noise_budget(&p).unwrap();
        let sum: f64 = b.rows.iter().map(|r| r.rms_v * r.rms_v).sum();
        prop_assert!((b.total_rms_v.powi(2) - sum).abs() <= 1e-12 * sum);
    }

    #[test]
    fn cds_linear_and_rejects_constants(dv in -0.1f64..0.1, a in -5.0f64..5.0, c in -1.0f64..1.0) {
        let cfg = DetectorChainConfig::default();
        let diff = |step: f64, base: f64| {
            let mut tr = AnalogTrace::constant(0.0, base);
            tr.step_to(90e-9, base + step);
            cds_sample(&tr, 1e-6, &cfg.cds, cfg.rc_pole_hz, cfg.effective_gain()).unwrap().difference
        };
        let one = diff(dv, 0.0);
        prop_assert!((diff(a * dv, 0.0) - a * one).abs() <= 1e-12);
        prop_assert!(diff(0.0, c).abs() <= 1e-15);
        prop_assert!((diff(dv, c) - one).abs() <= 1e-12);
    }

    #[test]
    fn thermal_monotone_and_additive(
        n in 1u32..200, area in 1e-10f64..1e-8, len in 0.05f64..2.0, hot in 10.0f64..100.0, scale in 1.0f64..3.0,
    ) {
        let table = ConductivityTable::default();
        let coax = CoaxSpec::default();
        let base = FlexCableSpec { n_wires: n, area_m2: area, length_m: len, t_cold_k: 3.0, t_hot_k: hot };
        let act = ActiveLoadSpec::default();
        let load = |f: &FlexCableSpec, a: &ActiveLoadSpec| total_load(f, &coax, a, &table, 1.5).unwrap();
        let r = load(&base, &act);
        prop_assert_eq!(r.total_w, r.flex_passive_w + r.coax_passive_w + r.active_w + r.rf_w);

        let more_wires = FlexCableSpec { n_wires: n + 1, ..base };
        let wider = FlexCableSpec { area_m2: area * scale, ..base };
        let longer = FlexCableSpec { length_m: len * scale, ..base };
        let hotter = FlexCableSpec { t_hot_k: (hot * scale).min(300.0), ..base };
        let busier = ActiveLoadSpec {
            supply_currents_a: act.supply_currents_a.iter().map(|i| i * scale).collect(),
            ..act.clone()
        };
        prop_assert!(load(&more_wires, &act).total_w >= r.total_w);
        prop_assert!(load(&wider, &act).total_w >= r.total_w);
        prop_assert!(load(&hotter, &act).total_w >= r.total_w);
        prop_assert!(load(&base, &busier).total_w >= r.total_w);
        prop_assert!(load(&longer, &act).total_w <= r.total_w);
    }

    #[test]
    fn polynomial_table_integral(a in 1.0f64..100.0, b in 0.0f64..10.0, c in 0.0f64..0.1, lo in 2.0f64..50.0, span in 1.0f64..200.0) {
        let hi = lo + span;
        let rows: Vec<(f64, f64)> = (0..=500)
            .map(|i| {
                let t = 1.0 + 300.0 * i as f64 / 500.0;
                (t, a + b * t + c * t * t)
            })
            .collect();
        let table = ConductivityTable::new(rows, "poly").unwrap();
        let prim = |t: f64| a * t + b * t * t / 2.0 + c * t * t * t / 3.0;
        let exact = prim(hi) - prim(lo);
        prop_assert!((table.integral(lo, hi).unwrap() - exact).abs() <= 1e-3 * exact);
        let flex = FlexCableSpec { t_cold_k: lo, t_hot_k: hi, ..FlexCableSpec::default() };
        let q = passive_flex_load(&flex, &table).unwrap();
        let expect = flex.n_wires as f64 * flex.area_m2 / flex.length_m * exact;
        prop_assert!((q - expect).abs() <= 1e-3 * expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn dose_response_monotone_and_accounted(seed in any::<u64>(), s1 in 30e-3f64..90e-3, s2 in 30e-3f64..90e-3) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let m = TunnelingModel::default();
        let setup = ReadoutSetup::default();
        let hist = HistogramConfig::default();
        let probs = |s| {
            let r = run_trials(&m, &setup, s, 1500, seed).unwrap();
            extract_probabilities(&r.series(), &hist, r.level1_v).unwrap()
        };
        let (a, b) = (probs(lo), probs(hi));
        prop_assert!(b.p1 >= a.p1);
        prop_assert!(b.p0 <= a.p0);
        for p in [a, b] {
            let classified = ((p.p0 + p.p1) * p.n_total as f64).round() as u64;
            prop_assert_eq!(classified + p.discarded, p.n_total);
        }
        prop_assert_eq!(probs(hi), b);
    }
}

#[test]
fn capacity_boundary() {
    let v = Instruction {
        kind: InstrKind::Pulse,
        leaf_cell: 0,
        targets: vec!["IU1".into()],
        amplitude_code: 0,
        loop_count: 0,
        loop_target: 0,
        delay_vectors: 0,
    };
    assert!(assemble(&program(vec![v.clone(); MEMORY_DEPTH])).is_ok());
    assert!(assemble(&program(vec![v; MEMORY_DEPTH + 1])).is_err());
}

#[test]
fn smallest_and_pulse_is_one_clock() {
    let tl = generate_phases(2e9, 96.0 * 0.5e-9).unwrap();
    let mut min = f64::INFINITY;
    for s1 in 0..16 {
        for s2 in 0..16 {
            let cfg = PulseSelectConfig::new(s1, s2, Combine::And, 0).unwrap();
            for (a, b) in pulse_select(&cfg, &tl).high_intervals(&cfg.output_name()) {
                if b.is_finite() && b > a {
                    min = min.min(b - a);
                }
            }
        }
    }
    assert!((min - 0.5e-9).abs() < 1e-18, "{min}");
}

#[test]
fn unset_total_gain_falls_back_to_stage_product() {
    let cfg = DetectorChainConfig {
        chain_gain_total: None,
        ..DetectorChainConfig::default()
    };
    let r = cfg.gain_report();
    assert!((r.effective - 0.9 * 2.2 * 5.4 * 2.0).abs() < 1e-12);
    assert_eq!(r.ratio, None);
    let r80 = DetectorChainConfig::default().gain_report();
    assert!((r80.ratio.unwrap() - 80.0 / 21.384).abs() < 1e-9);
}

#[test]
fn peak_separation_is_gain_times_qpc_step() {
    let setup = ReadoutSetup::default();
    let d = &setup.detector;
    let step = cryoqc::detector::qpc_voltage_step(&cryoqc::detector::QpcEvent::electron_out(0.0), d.c_qpc_f);
    let r = run_trials(&TunnelingModel::default(), &setup, 78e-3, 4000, 5).unwrap();
    let h = cryoqc::qexp::histogram(&r.series(), &HistogramConfig::default()).unwrap();
    let expect = -d.effective_gain() * step;
    assert!(((h.peak0_v - h.peak1_v) - expect).abs() <= 0.03, "{} vs {expect}", h.peak0_v - h.peak1_v);
    assert!((r.level1_v + expect).abs() < 1e-3);
}
