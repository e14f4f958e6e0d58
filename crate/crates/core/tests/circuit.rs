use std::time::Instant;

use fracsnap_core::circuit::{
    avalanche_threshold, avalanches, calibrate_recovery, recovery_time, simulate, simulate_detection, SimOptions,
    SnapNetwork, SnapParams, REFERENCE_RECOVERY_NS,
};
use rayon::prelude::*;

fn net() -> SnapNetwork {
    SnapNetwork::build(SnapParams::default()).unwrap()
}

/// With the whole bias starting in the load branch the load current is a
/// pure L/R exponential.
#[test]
fn rl_decay_pointwise() {
    for sections in [1usize, 4, 16] {
        let n = SnapNetwork::build(SnapParams { n_sections: sections, ..SnapParams::default() }).unwrap();
        let opts = SimOptions {
            fire: None,
            initial_chain_ua: Some(0.0),
            horizon_ns: 40.0,
            record_every: 1,
            ..SimOptions::default()
        };
        let tr = simulate(&n, &opts).unwrap();
        let tau = n.total_inductance() / n.p.r_load_ohm;
        let i0 = tr.i_load_ua[0];
        assert!((i0 - n.p.i_bias_ua).abs() < 1e-12);
        for (t, i) in tr.t_ns.iter().zip(&tr.i_load_ua) {
            if *t > 3.0 * tau {
                break;
            }
            let exact = i0 * (-t / tau).exp();
            assert!((i / exact - 1.0).abs() < 1e-3, "n={sections} t={t}: {i} vs {exact}");
        }
    }
}

#[test]
fn calibration_reaches_reference_recovery() {
    let (cal, tau) = calibrate_recovery(&net(), REFERENCE_RECOVERY_NS, 1e-3).unwrap();
    assert!((tau - 8.68).abs() <= 0.5);
    let tr = simulate_detection(&cal, (5, 1), 1e-3, 80.0).unwrap();
    let again = recovery_time(&tr).unwrap();
    assert!((again - 8.68).abs() <= 0.5, "{again}");
}

#[test]
fn recovery_scales_linearly_with_inductance() {
    let base = net();
    let tau = |n: &SnapNetwork| recovery_time(&simulate_detection(n, (0, 0), 1e-3, 120.0).unwrap()).unwrap();
    let t1 = tau(&base);
    for k in [0.5, 2.0] {
        let tk = tau(&base.scale_inductance(k).unwrap());
        assert!((tk / (k * t1) - 1.0).abs() < 0.01, "scale {k}: {tk} vs {}", k * t1);
    }
}

#[test]
fn threshold_agrees_with_dense_scan() {
    let n = net();
    let dt = 1e-3;
    let r = avalanche_threshold(&n, dt).unwrap();
    assert!(r.reachable);
    let step = 0.05;
    let limit = 2.0 * n.p.i_sw_wire_ua;
    let biases: Vec<f64> = (1..).map(|k| k as f64 * step).take_while(|&b| b < limit).collect();
    let hits: Vec<bool> = biases.par_iter().map(|&b| avalanches(&n, b, dt).unwrap()).collect();
    let first = hits.iter().position(|&h| h).expect("scan finds an avalanche");
    assert!(hits[first..].iter().all(|&h| h), "avalanche predicate is not monotone in bias");
    let lo = if first == 0 { 0.0 } else { biases[first - 1] };
    let hi = biases[first];
    assert!(r.threshold_ua > lo && r.threshold_ua <= hi + 0.01, "{} not in ({lo}, {hi}]", r.threshold_ua);
}

#[test]
fn timestep_halving_changes_little() {
    let n = net();
    let a = simulate_detection(&n, (0, 0), 1e-3, 60.0).unwrap();
    let b = simulate_detection(&n, (0, 0), 5e-4, 60.0).unwrap();
    let dp = (a.peak_load() / b.peak_load() - 1.0).abs();
    let dtau = (recovery_time(&a).unwrap() / recovery_time(&b).unwrap() - 1.0).abs();
    assert!(dp < 5e-3, "peak drift {dp}");
    assert!(dtau < 5e-3, "recovery drift {dtau}");
}

#[test]
fn full_cascade_runs_fast_and_conserves() {
    let start = Instant::now();
    let tr = simulate(&net(), &SimOptions { horizon_ns: 100.0, fire: Some((7, 0)), ..SimOptions::default() }).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(secs <= 10.0, "{secs} s");
    assert!(tr.kcl_residual < 1e-9, "kcl {}", tr.kcl_residual);
    assert!(tr.energy_drift < 1e-2, "energy {}", tr.energy_drift);
    // the fired wire takes its partner along; other sections stay superconducting
    assert!(tr.switched(7, 1));
    for s in (0..16).filter(|&s| s != 7) {
        assert!(!tr.switched(s, 0) && !tr.switched(s, 1), "section {s}");
    }
    assert!(recovery_time(&tr).is_ok());
}
