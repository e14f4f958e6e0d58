use fracsnap_core::circuit::{
    avalanche_threshold, calibrate_recovery, recovery_time, simulate, SimOptions, SnapNetwork, SnapParams,
    ThresholdResult,
};
use serde::{Deserialize, Serialize};

use crate::output::{csv_bytes, num, svg};
use crate::plot::{Axes, Series, Style};
use crate::{compute, Artifacts, CliError, Command, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSimConfig {
    pub circuit: SnapParams,
    pub dt_ns: f64,
    pub horizon_ns: f64,
    pub record_every: usize,
    /// Force one wire resistive; false runs the unperturbed circuit.
    pub fire: bool,
    pub fire_section: usize,
    pub fire_wire: usize,
    pub fire_time_ns: f64,
    /// Rescale the inductances to this recovery constant before the run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate_recovery_ns: Option<f64>,
    /// Also locate the avalanche threshold bias.
    pub avalanche_threshold: bool,
}

impl Default for PulseSimConfig {
    fn default() -> Self {
        PulseSimConfig {
            circuit: SnapParams::default(),
            dt_ns: 1e-3,
            horizon_ns: 100.0,
            record_every: 10,
            fire: true,
            fire_section: 0,
            fire_wire: 0,
            fire_time_ns: 1.0,
            calibrate_recovery_ns: None,
            avalanche_threshold: false,
        }
    }
}

#[derive(Serialize)]
struct PulseSummary {
    /// Parameters actually simulated, after any calibration.
    circuit: SnapParams,
    peak_load_ua: f64,
    /// 1/e recovery constant of the load pulse; absent without a pulse.
    recovery_time_ns: Option<f64>,
    switched_wires: usize,
    event_count: usize,
    kcl_residual: f64,
    energy_drift: f64,
    avalanche_threshold: Option<ThresholdResult>,
}

impl Command for PulseSimConfig {
    fn execute(&self) -> Result<Artifacts> {
        let mut net = SnapNetwork::build(self.circuit).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(target) = self.calibrate_recovery_ns {
            net = calibrate_recovery(&net, target, self.dt_ns).map_err(compute)?.0;
        }
        let opts = SimOptions {
            dt_ns: self.dt_ns,
            horizon_ns: self.horizon_ns,
            record_every: self.record_every,
            fire: self.fire.then_some((self.fire_section, self.fire_wire)),
            fire_time_ns: self.fire_time_ns,
            initial_chain_ua: None,
            stop_early: false,
        };
        let tr = simulate(&net, &opts).map_err(compute)?;
        let threshold = if self.avalanche_threshold { Some(avalanche_threshold(&net, self.dt_ns).map_err(compute)?) } else { None };

        let n = net.p.n_sections;
        let mut header = vec!["t_ns".to_string(), "i_load_ua".to_string()];
        for s in 0..n {
            for w in 0..2 {
                header.push(format!("s{s}_w{w}_ua"));
            }
        }
        let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = (0..tr.t_ns.len()).map(|k| {
            let mut r = vec![num(tr.t_ns[k]), num(tr.i_load_ua[k])];
            r.extend(tr.wire_ua[k].iter().map(|&v| num(v)));
            r
        });
        let mut out = Artifacts::new();
        out.insert("trace.csv", csv_bytes(&header_ref, rows));
        out.insert(
            "events.csv",
            csv_bytes(
                &["t_ns", "section", "wire", "kind"],
                tr.events.iter().map(|e| {
                    let kind = serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                    vec![num(e.t_ns), e.section.to_string(), e.wire.to_string(), kind]
                }),
            ),
        );
        let axes = Axes::new("Load current", "time (ns)", "current (µA)");
        out.insert("pulse.svg", svg(&[Series::new("load", tr.t_ns.clone(), tr.i_load_ua.clone(), Style::Line)], &axes)?);
        let switched = (0..n).flat_map(|s| [(s, 0), (s, 1)]).filter(|&(s, w)| tr.switched(s, w)).count();
        out.json(
            "pulse.json",
            &PulseSummary {
                circuit: net.p,
                peak_load_ua: tr.peak_load(),
                recovery_time_ns: recovery_time(&tr).ok(),
                switched_wires: switched,
                event_count: tr.events.len(),
                kcl_residual: tr.kcl_residual,
                energy_drift: tr.energy_drift,
                avalanche_threshold: threshold,
            },
        )?;
        Ok(out)
    }
}
