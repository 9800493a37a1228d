//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`) and asserting the stated
//! tolerance. Criteria 1-9 live here; criterion 10 (CLI byte determinism)
//! lives in the CLI crate's own acceptance target.

use std::time::Instant;

use qkdrb_core::compare::{self, SweepSpec};
use qkdrb_core::relayed;
use qkdrb_core::ring::{self, ChordMode, RingScenario};
use qkdrb_core::rng::SplitMix64;
use qkdrb_core::sim::{self, KeyBlock, SimConfig};
use qkdrb_core::skr::{pairing_penalty_db, DecoyParams, GenerationModel, SaturationClamp};
use qkdrb_core::switched::{self, SwitchedConfig};

const FIG_NODE_COUNTS: [usize; 6] = [5, 9, 13, 17, 21, 25];
const FIG_LINK_LENGTHS: [f64; 10] = [1.0, 2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0];

fn reference_spec() -> SweepSpec {
    SweepSpec {
        node_counts: FIG_NODE_COUNTS.to_vec(),
        link_lengths_km: FIG_LINK_LENGTHS.to_vec(),
        switched: SwitchedConfig::reference(),
        model: GenerationModel::reference(),
        attenuation_db_per_km: 0.24,
        chord_mode: ChordMode::Circle,
    }
}

fn model_with_max_rx(max_rx_power_dbm: f64) -> GenerationModel {
    GenerationModel::parametric(
        DecoyParams::default(),
        SaturationClamp::new(0.0, max_rx_power_dbm).unwrap(),
    )
    .unwrap()
}

fn flat_table(rate: f64) -> GenerationModel {
    GenerationModel::from_table(
        vec![(0.0, rate), (1e6, rate)],
        SaturationClamp::new(0.0, 0.0).unwrap(),
    )
    .unwrap()
}

fn pass(criterion: &str, started: Instant) {
    eprintln!("[acceptance] {criterion}: PASS ({:.2} s)", started.elapsed().as_secs_f64());
}

#[test]
fn a01_crossing_count_identity() {
    let started = Instant::now();
    for half in 1..=49usize {
        let n = 2 * half + 1;
        let expected = ring::crossing_paths_per_link(n).unwrap();
        let enumerated = ring::enumerate_crossing_paths(n, (1, 2)).unwrap().len() as u64;
        assert_eq!(enumerated, expected, "N = {n}");
        assert_eq!(expected, (n as u64 * n as u64 - 1) / 8);
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "counting identity took {elapsed:.2} s (budget 1 s)");
    pass("criterion 1 (crossing-count identity)", started);
}

#[test]
fn a02_relayed_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x5EED_0002);
    for half in 1..=12usize {
        let n = 2 * half + 1;
        for _ in 0..20 {
            let le = 1.0 + 34.0 * rng.next_f64();
            let model = match rng.next_below(3) {
                0 => flat_table(10f64.powf(2.0 + 4.0 * rng.next_f64())),
                1 => GenerationModel::parametric(
                    DecoyParams {
                        detector_efficiency: 0.01 + 0.29 * rng.next_f64(),
                        ..DecoyParams::default()
                    },
                    SaturationClamp::new(0.0, -10.0 * rng.next_f64()).unwrap(),
                )
                .unwrap(),
                _ => {
                    let top = 10f64.powf(3.0 + 3.0 * rng.next_f64());
                    GenerationModel::from_table(
                        vec![(0.0, top), (15.0, top / 30.0), (40.0, top / 1e4)],
                        SaturationClamp::new(0.0, -6.0 * rng.next_f64()).unwrap(),
                    )
                    .unwrap()
                }
            };
            let scenario = RingScenario::new(n, le, 0.24, ChordMode::Circle).unwrap();
            let closed = relayed::consumption_bps(&scenario, &model);
            let oracle = relayed::allocation_oracle(&scenario, &model).min_pair_rate_bps();
            assert!(
                (oracle - closed).abs() <= 1e-12 * closed.abs(),
                "N={n} Le={le}: oracle {oracle} vs closed {closed}"
            );
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "oracle equivalence took {elapsed:.2} s (budget 5 s)");
    pass("criterion 2 (relayed closed form = enumeration oracle)", started);
}

#[test]
fn a03_duration_optimizer_never_beats_equalization() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x5EED_0003);
    let model = GenerationModel::reference();
    let mut checked = 0usize;
    while checked < 50 {
        let n = 2 * (1 + rng.next_below(12)) + 1; // odd in [3, 25]
        let le = 1.0 + 11.0 * rng.next_f64();
        let scenario = RingScenario::new(n, le, 0.24, ChordMode::Circle).unwrap();
        let phases = scenario.max_hop() as f64;
        let reconfig = 400.0 * rng.next_f64();
        let duty = 0.2 + 0.75 * rng.next_f64();
        let period = if reconfig > 0.0 { reconfig * phases / (1.0 - duty) } else { 3600.0 };
        let cfg = SwitchedConfig {
            switch_loss_db: 4.0 * rng.next_f64(),
            pairing_penalty_db: -1.0 + 11.0 * rng.next_f64(),
            reconfig_time_s: reconfig,
            period_s: period,
        };
        let closed = switched::consumption_bps(&scenario, &model, &cfg)
            .expect("draw ranges keep every hop inside the link budget");
        let (durations, rate) =
            switched::optimize_durations(&scenario, &model, &cfg, 10_000, 0xA11CE + checked as u64)
                .unwrap();
        assert_eq!(durations.len(), scenario.max_hop());
        assert!(
            rate <= closed * (1.0 + 1e-12),
            "optimizer beat the closed form: {rate} > {closed} (N={n} Le={le:.2})"
        );
        assert!(
            (closed - rate) <= 1e-6 * closed,
            "optimizer fell short: {rate} vs {closed} (N={n} Le={le:.2})"
        );
        checked += 1;
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "optimizer oracle took {elapsed:.2} s (budget 60 s)");
    pass("criterion 3 (rate equalization is optimal)", started);
}

#[test]
fn a04_natural_period_normalization_equivalence() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x5EED_0004);
    let model = GenerationModel::reference();
    for draw in 0..20 {
        let n = 2 * (1 + rng.next_below(12)) + 1;
        let le = 1.0 + 11.0 * rng.next_f64();
        let scenario = RingScenario::new(n, le, 0.24, ChordMode::Circle).unwrap();
        let switch_loss_db = 4.0 * rng.next_f64();
        let pairing_penalty_db = -1.0 + 11.0 * rng.next_f64();
        let penalized = model.with_switched_penalties(switch_loss_db, pairing_penalty_db);
        let inverse_sum: f64 = (1..=scenario.max_hop())
            .map(|k| 1.0 / penalized.rate_bps(scenario.hop_attenuation_db(k).unwrap()))
            .sum();
        let phases = scenario.max_hop() as f64;
        // One-bit normalization: the reconfiguration term must live on the
        // same scale as the per-phase bit times, otherwise the printed form
        // degenerates numerically and the comparison only measures
        // cancellation noise.
        let reconfig = 5.0 * rng.next_f64() * inverse_sum / phases;
        let mut cfg = SwitchedConfig {
            switch_loss_db,
            pairing_penalty_db,
            reconfig_time_s: reconfig,
            period_s: 1.0,
        };
        let natural = switched::natural_period_consumption_bps(&scenario, &model, &cfg).unwrap();
        cfg.period_s = reconfig * phases + inverse_sum;
        let scaled = switched::consumption_bps(&scenario, &model, &cfg).unwrap();
        assert!(
            (scaled - natural).abs() <= 1e-12 * natural,
            "draw {draw}: scaled {scaled} vs natural {natural} (N={n})"
        );
    }
    pass("criterion 4 (duration-scaled form = one-bit normalized form)", started);
}

#[test]
fn a05_simulator_converges_to_analytic_rates() {
    let started = Instant::now();
    let model = GenerationModel::reference();
    // Tolerance: demand sits exactly 1% under the analytic rate, so the
    // relative error budget is consumed by construction; the epsilon only
    // absorbs drain-integration rounding.
    let within = |delivered: f64, analytic: f64| {
        (delivered - analytic).abs() / analytic <= 0.01 + 1e-9
    };

    for &n in &[3usize, 5, 9] {
        let scenario = RingScenario::new(n, 10.0, 0.24, ChordMode::Circle).unwrap();

        // Relayed, 0.99x: converges, never starves.
        let analytic = relayed::consumption_bps(&scenario, &model);
        let sim_ok = SimConfig {
            block_bits: 4096,
            warmup_s: 10.0,
            measure_s: 30.0,
            consumption_rate_bps: 0.99 * analytic,
            seed: 42,
        };
        let report = sim::run_relayed(&scenario, &model, &sim_ok).unwrap();
        assert_eq!(report.total_starvation_events, 0, "relayed N={n} at 0.99x starved");
        assert_eq!(report.relay_symmetry_ok, Some(true));
        for stats in &report.pairs {
            assert!(
                within(stats.delivered_bps, analytic),
                "relayed N={n} pair {:?}: delivered {} vs analytic {analytic}",
                stats.pair,
                stats.delivered_bps
            );
        }

        // Relayed, 1.05x: starvation must be flagged.
        let report = sim::run_relayed(
            &scenario,
            &model,
            &SimConfig { consumption_rate_bps: 1.05 * analytic, ..sim_ok.clone() },
        )
        .unwrap();
        assert!(report.any_starved(), "relayed N={n} at 1.05x did not starve");

        // Switched: reference duty cycle at a 100x shorter period (the
        // analytic rate only depends on the R/T ratio).
        let cfg = SwitchedConfig {
            switch_loss_db: 2.0,
            pairing_penalty_db: 2.0,
            reconfig_time_s: 3.0,
            period_s: 108.0,
        };
        let analytic = switched::consumption_bps(&scenario, &model, &cfg).unwrap();
        let sim_ok = SimConfig {
            block_bits: 16_384,
            warmup_s: 2.0 * cfg.period_s,
            measure_s: 3.0 * cfg.period_s,
            consumption_rate_bps: 0.99 * analytic,
            seed: 43,
        };
        let report = sim::run_switched(&scenario, &model, &cfg, &sim_ok).unwrap();
        assert_eq!(report.total_starvation_events, 0, "switched N={n} at 0.99x starved");
        for stats in &report.pairs {
            assert!(
                within(stats.delivered_bps, analytic),
                "switched N={n} pair {:?}: delivered {} vs analytic {analytic}",
                stats.pair,
                stats.delivered_bps
            );
        }

        // Switched, 1.05x: the pre-charge buffer drains by 5% of a period's
        // keys every period, so bottom is hit near period 20; run past it.
        let report = sim::run_switched(
            &scenario,
            &model,
            &cfg,
            &SimConfig {
                consumption_rate_bps: 1.05 * analytic,
                measure_s: 23.0 * cfg.period_s,
                ..sim_ok.clone()
            },
        )
        .unwrap();
        assert!(report.any_starved(), "switched N={n} at 1.05x did not starve");
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "simulator convergence took {elapsed:.2} s (budget 60 s)");
    pass("criterion 5 (simulator reproduces analytic rates)", started);
}

#[test]
fn a06_relay_chain_recovers_end_keys() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x5EED_0006);
    let block_bits = 256;
    let fresh = |rng: &mut SplitMix64, seq: u64| {
        let mut bits = vec![0u8; block_bits / 8];
        rng.fill_bytes(&mut bits);
        KeyBlock { bits, origin: (1, 2), sequence: seq }
    };

    // Empty chain is the identity.
    let end = fresh(&mut rng, 0);
    let (transcript, recovered) = sim::relay_chain_xor(&end, &[]).unwrap();
    assert!(transcript.is_empty());
    assert_eq!(recovered.bits, end.bits);

    for trial in 0..1000u64 {
        let hops = 1 + rng.next_below(12);
        let end = fresh(&mut rng, trial);
        let pads: Vec<KeyBlock> = (0..hops).map(|h| fresh(&mut rng, h as u64)).collect();
        let (transcript, recovered) = sim::relay_chain_xor(&end, &pads).unwrap();
        assert_eq!(transcript.len(), hops);
        assert_eq!(recovered.bits, end.bits, "trial {trial} ({hops} hops)");
    }
    pass("criterion 6 (end-to-end relay key symmetry)", started);
}

#[test]
fn a07a_reference_grid_dense_cells_favor_switched() {
    let started = Instant::now();
    let cells = compare::sweep(&reference_spec()).unwrap();
    let mut violations = Vec::new();
    for cell in cells.iter().filter(|c| c.le_km <= 5.0) {
        if cell.gain_percent <= 25.0 || cell.gain_percent.is_nan() {
            violations.push(format!(
                "  N={:<2} Le={:<4} f={:+.2}",
                cell.node_count, cell.le_km, cell.gain_percent
            ));
        }
    }
    if !violations.is_empty() {
        eprintln!("[acceptance] criterion 7a (f > 25 for Le <= 5 km): FAIL");
        panic!(
            "f > 25 does not hold on {} of 18 dense cells:\n{}\n\
             The closed forms make these cells unreachable for any generation curve:\n\
             - N=5: every chord sits in the flat region, so f = 100*(ov*3*10^(-P/10)/2 - 1)\n\
             \u{20}  with duty factor ov = 1 - 2R/T = 0.944; at P = 2 dB that is -10.6%, and it\n\
             \u{20}  cannot exceed 0 for any P > 1.51 dB no matter the curve or link length.\n\
             - N=25, Le=5: f > 25 needs the 12-term inverse-rate sum below 24.61, but chords\n\
             \u{20}  reach 39.7 km (9.5 dB + 2 dB switch loss vs the 6 dB knee) and any curve\n\
             \u{20}  that decays at least one decade per 10 dB past its knee keeps the sum\n\
             \u{20}  above 25.27, capping f at 23.0.\n\
             All other dense cells pass; the check is kept at its stated threshold.",
            violations.len(),
            violations.join("\n")
        );
    }
    pass("criterion 7a (f > 25 for Le <= 5 km)", started);
}

#[test]
fn a07b_reference_grid_long_hauls_favor_relayed() {
    let started = Instant::now();
    let cells = compare::sweep(&reference_spec()).unwrap();
    for &(n, le) in &[(21usize, 15.0f64), (21, 20.0), (13, 20.0)] {
        let cell = cells
            .iter()
            .find(|c| c.node_count == n && c.le_km == le)
            .expect("cell on the reference grid");
        assert!(
            cell.gain_percent < -50.0,
            "N={n} Le={le}: expected f < -50, got {:.2}",
            cell.gain_percent
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "reference grid took {elapsed:.2} s (budget 10 s)");
    pass("criterion 7b (f < -50 on long-haul cells)", started);
}

#[test]
fn a08_penalty_and_flat_region_direction_checks() {
    let started = Instant::now();

    // Highly incompatible modules (P = 10 dB): relayed wins on every cell
    // with at least 9 nodes.
    let spec = SweepSpec {
        switched: SwitchedConfig { pairing_penalty_db: 10.0, ..SwitchedConfig::reference() },
        ..reference_spec()
    };
    for cell in compare::sweep(&spec).unwrap() {
        if cell.node_count >= 9 {
            assert!(
                cell.gain_percent < 0.0,
                "P=10: N={} Le={}: f = {:.2} >= 0",
                cell.node_count,
                cell.le_km,
                cell.gain_percent
            );
        }
    }

    // No flat region (R_A = 0 dBm, K = 0): relayed wins everywhere beyond
    // the densest 1 km columns.
    let spec = SweepSpec { model: model_with_max_rx(0.0), ..reference_spec() };
    for cell in compare::sweep(&spec).unwrap() {
        if cell.le_km > 1.0 {
            assert!(
                cell.gain_percent < 0.0,
                "K=0: N={} Le={}: f = {:.2} >= 0",
                cell.node_count,
                cell.le_km,
                cell.gain_percent
            );
        }
    }

    // Wider flat region (R_A = -12 dBm, K = 50 km): the switched-favorable
    // set strictly expands.
    let reference_cells = compare::sweep(&reference_spec()).unwrap();
    let wide_cells =
        compare::sweep(&SweepSpec { model: model_with_max_rx(-12.0), ..reference_spec() }).unwrap();
    let mut gained = 0usize;
    for (reference, wide) in reference_cells.iter().zip(&wide_cells) {
        assert_eq!((reference.node_count, reference.le_km), (wide.node_count, wide.le_km));
        if reference.gain_percent > 0.0 {
            assert!(
                wide.gain_percent > 0.0,
                "K=50 lost a switched-favorable cell: N={} Le={}",
                reference.node_count,
                reference.le_km
            );
        } else if wide.gain_percent > 0.0 {
            gained += 1;
        }
    }
    assert!(gained > 0, "K=50 did not add any switched-favorable cell");

    pass("criterion 8 (penalty and flat-region direction checks)", started);
}

#[test]
fn a09_model_calibration_gate() {
    let started = Instant::now();
    let model = GenerationModel::reference();

    let g6 = model.rate_bps(6.0);
    assert!(
        (1e5..=1e6).contains(&g6),
        "reference G(6 dB) = {g6}, outside [1e5, 1e6]"
    );

    // Finite budget: strictly positive up to some attenuation, exactly zero
    // beyond it.
    let mut cutoff = None;
    let mut a = 6.0;
    while a < 60.0 {
        if model.rate_bps(a) == 0.0 {
            cutoff = Some(a);
            break;
        }
        a += 0.25;
    }
    let cutoff = cutoff.expect("no budget cutoff below 60 dB");
    assert!(model.rate_bps(cutoff - 0.5) > 0.0);
    assert_eq!(model.rate_bps(cutoff + 5.0), 0.0);
    assert_eq!(model.rate_bps(55.0), 0.0);

    // Matched-vs-unmatched penalty of the measured severe pairing.
    let severe = pairing_penalty_db(481_000.0, 3_300.0).unwrap();
    assert!(
        (severe - 21.6).abs() <= 0.1,
        "severe pairing penalty {severe:.3} dB outside 21.6 +/- 0.1"
    );

    pass("criterion 9 (model calibration gate)", started);
}
