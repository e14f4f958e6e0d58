use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use super::network::SnapNetwork;
use super::{CircuitError, Result};

/// Energy-balance drift above which a run is rejected.
const MAX_ENERGY_DRIFT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WireState {
    Superconducting,
    Resistive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Forced hotspot at the firing time.
    Fire,
    /// Current exceeded the switching current.
    Switch,
    Heal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub t_ns: f64,
    pub section: usize,
    pub wire: usize,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimOptions {
    pub dt_ns: f64,
    pub horizon_ns: f64,
    /// Keep every n-th step in the trace.
    pub record_every: usize,
    /// `(section, wire)` forced resistive at `fire_time_ns`; `None` runs unperturbed.
    pub fire: Option<(usize, usize)>,
    pub fire_time_ns: f64,
    /// Chain current at t = 0 in µA; defaults to the bias (steady state).
    pub initial_chain_ua: Option<f64>,
    /// Stop once the fired wire's partner switches, or once every wire has
    /// been superconducting for 1 ns after the last heal.
    pub stop_early: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            dt_ns: 1e-3,
            horizon_ns: 60.0,
            record_every: 10,
            fire: Some((0, 0)),
            fire_time_ns: 1.0,
            initial_chain_ua: None,
            stop_early: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseTrace {
    pub t_ns: Vec<f64>,
    pub i_load_ua: Vec<f64>,
    /// Per sample, currents of wire `2 * section + wire`.
    pub wire_ua: Vec<Vec<f64>>,
    pub states: Vec<Vec<WireState>>,
    pub events: Vec<Event>,
    /// Largest |KCL residual| over all recorded samples, µA.
    pub kcl_residual: f64,
    /// Relative energy-balance drift at the end of the run.
    pub energy_drift: f64,
    pub bias_ua: f64,
}

impl PulseTrace {
    pub fn peak_load(&self) -> f64 {
        self.i_load_ua.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn switched(&self, section: usize, wire: usize) -> bool {
        self.events.iter().any(|e| e.section == section && e.wire == wire && e.kind == EventKind::Switch)
    }
}

struct Factor {
    resistive: Vec<bool>,
    h: f64,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rhs_matrix: DMatrix<f64>,
}

/// State `x = [a_0 .. a_{n-1}, c]`: `a_s` is the current of wire 0 in
/// section `s`, `c` the chain current. Wire 1 carries `c - a_s` and the
/// load `I_b - c`, so KCL holds by construction. The network obeys
/// `M x' + K x = b` with `M` the inductance matrix and `K` the resistances.
struct Sim<'a> {
    net: &'a SnapNetwork,
    n: usize,
    m: DMatrix<f64>,
    b: DVector<f64>,
    resistive: Vec<bool>,
    switched_at: Vec<f64>,
    factor: Option<Factor>,
    energy_in: f64,
    dissipated: f64,
}

impl<'a> Sim<'a> {
    fn new(net: &'a SnapNetwork) -> Self {
        let n = net.p.n_sections;
        let lw = net.p.l_wire_nh;
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for s in 0..n {
            m[(s, s)] = 2.0 * lw;
            m[(s, n)] = -lw;
            m[(n, s)] = -lw;
        }
        m[(n, n)] = n as f64 * lw + n as f64 * net.p.l_choke_nh;
        let mut b = DVector::zeros(n + 1);
        b[n] = net.p.r_load_ohm * net.p.i_bias_ua;
        Sim {
            net,
            n,
            m,
            b,
            resistive: vec![false; 2 * n],
            switched_at: vec![f64::NAN; 2 * n],
            factor: None,
            energy_in: 0.0,
            dissipated: 0.0,
        }
    }

    fn r(&self, w: usize) -> f64 {
        if self.resistive[w] {
            self.net.p.r_hotspot_ohm
        } else {
            0.0
        }
    }

    fn k_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut k = DMatrix::zeros(n + 1, n + 1);
        let mut sum_r2 = 0.0;
        for s in 0..n {
            let (r1, r2) = (self.r(2 * s), self.r(2 * s + 1));
            k[(s, s)] = r1 + r2;
            k[(s, n)] = -r2;
            k[(n, s)] = -r2;
            sum_r2 += r2;
        }
        k[(n, n)] = sum_r2 + self.net.p.r_load_ohm;
        k
    }

    fn advance(&mut self, x0: &DVector<f64>, h: f64) -> DVector<f64> {
        let fresh = match &self.factor {
            Some(f) => f.h != h || f.resistive != self.resistive,
            None => true,
        };
        if fresh {
            let k = self.k_matrix();
            let half = &k * (0.5 * h);
            let lu = (&self.m + &half).lu();
            self.factor = Some(Factor { resistive: self.resistive.clone(), h, lu, rhs_matrix: &self.m - half });
        }
        let f = self.factor.as_ref().expect("factor present");
        let rhs = &f.rhs_matrix * x0 + &self.b * h;
        f.lu.solve(&rhs).expect("inductance matrix is positive definite")
    }

    fn wire_current(&self, x: &DVector<f64>, w: usize) -> f64 {
        let s = w / 2;
        if w % 2 == 0 {
            x[s]
        } else {
            x[self.n] - x[s]
        }
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.m * x))
    }

    /// (power delivered by the source to the network, power dissipated in hotspots and load)
    fn powers(&self, x: &DVector<f64>) -> (f64, f64) {
        let p = &self.net.p;
        let i_load = p.i_bias_ua - x[self.n];
        let mut diss = p.r_load_ohm * i_load * i_load;
        let source = p.r_load_ohm * i_load * p.i_bias_ua;
        for w in 0..2 * self.n {
            let i = self.wire_current(x, w);
            diss += self.r(w) * i * i;
        }
        (source, diss)
    }

    fn account(&mut self, x0: &DVector<f64>, x1: &DVector<f64>, h: f64) {
        let (s0, d0) = self.powers(x0);
        let (s1, d1) = self.powers(x1);
        self.energy_in += 0.5 * h * (s0 + s1);
        self.dissipated += 0.5 * h * (d0 + d1);
    }

    /// Earliest switching or healing event in a trial step, as a fraction of it.
    fn next_event(&self, x0: &DVector<f64>, x1: &DVector<f64>, t0: f64, h: f64) -> Option<(f64, usize)> {
        let p = &self.net.p;
        let i_ret = p.retrap_fraction * p.i_sw_wire_ua;
        let mut best: Option<(f64, usize)> = None;
        let mut offer = |phi: f64, w: usize| {
            if best.is_none_or(|(b, _)| phi < b) {
                best = Some((phi, w));
            }
        };
        for w in 0..2 * self.n {
            let (i0, i1) = (self.wire_current(x0, w).abs(), self.wire_current(x1, w).abs());
            if !self.resistive[w] {
                if i0 >= p.i_sw_wire_ua {
                    offer(0.0, w);
                } else if i1 >= p.i_sw_wire_ua {
                    offer(((p.i_sw_wire_ua - i0) / (i1 - i0)).clamp(0.0, 1.0), w);
                }
                continue;
            }
            let expiry = ((self.switched_at[w] + p.tau_hotspot_ns - t0) / h).max(0.0);
            if expiry > 1.0 {
                continue;
            }
            let at_expiry = i0 + expiry * (i1 - i0);
            if at_expiry < i_ret {
                offer(expiry, w);
            } else if i1 < i_ret {
                offer(((i0 - i_ret) / (i0 - i1)).clamp(expiry, 1.0), w);
            }
        }
        best
    }
}

/// Runs the network from steady state (or the given chain current) with an
/// optional forced hotspot.
pub fn simulate(net: &SnapNetwork, opts: &SimOptions) -> Result<PulseTrace> {
    let p = &net.p;
    if !(opts.dt_ns > 0.0 && opts.dt_ns.is_finite()) || !(opts.horizon_ns > 0.0) {
        return Err(CircuitError::Param(format!("dt {} and horizon {} must be positive", opts.dt_ns, opts.horizon_ns)));
    }
    if let Some((s, w)) = opts.fire {
        if s >= p.n_sections || w > 1 {
            return Err(CircuitError::Param(format!("wire {s}:{w} does not exist")));
        }
    }
    let mut sim = Sim::new(net);
    let n = sim.n;
    let c0 = opts.initial_chain_ua.unwrap_or(p.i_bias_ua);
    let mut x = DVector::from_element(n + 1, c0 / 2.0);
    x[n] = c0;
    let e0 = sim.energy(&x);

    let dt = opts.dt_ns;
    let steps = (opts.horizon_ns / dt).round() as usize;
    let fire_step = opts.fire.map(|_| (opts.fire_time_ns / dt).round() as usize);
    let every = opts.record_every.max(1);
    let mut trace = PulseTrace {
        t_ns: Vec::new(),
        i_load_ua: Vec::new(),
        wire_ua: Vec::new(),
        states: Vec::new(),
        events: Vec::new(),
        kcl_residual: 0.0,
        energy_drift: 0.0,
        bias_ua: p.i_bias_ua,
    };
    let record = |trace: &mut PulseTrace, sim: &Sim, x: &DVector<f64>, t: f64| {
        let wires: Vec<f64> = (0..2 * n).map(|w| sim.wire_current(x, w)).collect();
        let i_load = p.i_bias_ua - x[n];
        let chain = wires[0] + wires[1];
        let mut res = (p.i_bias_ua - chain - i_load).abs();
        for s in 1..n {
            res = res.max((wires[2 * s] + wires[2 * s + 1] - chain).abs());
        }
        trace.kcl_residual = trace.kcl_residual.max(res);
        trace.t_ns.push(t);
        trace.i_load_ua.push(i_load);
        trace.wire_ua.push(wires);
        trace.states.push(
            sim.resistive.iter().map(|&r| if r { WireState::Resistive } else { WireState::Superconducting }).collect(),
        );
    };
    let partner = opts.fire.map(|(s, w)| 2 * s + (1 - w));
    let mut last_heal = f64::NAN;
    let mut fired = false;

    record(&mut trace, &sim, &x, 0.0);
    for step in 0..steps {
        let t_start = step as f64 * dt;
        if Some(step) == fire_step {
            let (s, w) = opts.fire.expect("fire set");
            sim.resistive[2 * s + w] = true;
            sim.switched_at[2 * s + w] = t_start;
            trace.events.push(Event { t_ns: t_start, section: s, wire: w, kind: EventKind::Fire });
            fired = true;
        }
        let (mut t0, mut h) = (t_start, dt);
        loop {
            let x1 = sim.advance(&x, h);
            match sim.next_event(&x, &x1, t0, h) {
                None => {
                    sim.account(&x, &x1, h);
                    x = x1;
                    break;
                }
                Some((phi, w)) => {
                    let part = phi * h;
                    if part > 1e-12 * dt {
                        let xe = sim.advance(&x, part);
                        sim.account(&x, &xe, part);
                        x = xe;
                    }
                    t0 += part;
                    h -= part;
                    let kind = if sim.resistive[w] { EventKind::Heal } else { EventKind::Switch };
                    sim.resistive[w] = !sim.resistive[w];
                    if kind == EventKind::Switch {
                        sim.switched_at[w] = t0;
                    } else {
                        last_heal = t0;
                    }
                    trace.events.push(Event { t_ns: t0, section: w / 2, wire: w % 2, kind });
                    if h <= 1e-12 * dt {
                        break;
                    }
                }
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CircuitError::Unstable { drift: f64::INFINITY, dt });
        }
        let t_end = (step + 1) as f64 * dt;
        let done = opts.stop_early
            && fired
            && (partner.is_some_and(|w| trace.switched(w / 2, w % 2))
                || (!sim.resistive.iter().any(|&r| r) && last_heal.is_finite() && t_end - last_heal >= 1.0));
        if (step + 1) % every == 0 || step + 1 == steps || done {
            record(&mut trace, &sim, &x, t_end);
        }
        if done {
            break;
        }
    }
    let stored = sim.energy(&x) - e0;
    let scale = e0 + sim.energy_in.abs() + sim.dissipated.abs();
    trace.energy_drift = if scale > 0.0 { (stored - (sim.energy_in - sim.dissipated)).abs() / scale } else { 0.0 };
    if trace.energy_drift > MAX_ENERGY_DRIFT {
        return Err(CircuitError::Unstable { drift: trace.energy_drift, dt });
    }
    Ok(trace)
}

/// Detection event: `fired` = `(section, wire)` goes resistive at 1 ns.
/// Requires `dt <= 1 ps` and a horizon of at least 50 ns.
pub fn simulate_detection(net: &SnapNetwork, fired: (usize, usize), dt_ns: f64, horizon_ns: f64) -> Result<PulseTrace> {
    if !(dt_ns <= 1e-3) {
        return Err(CircuitError::Param(format!("dt {dt_ns} ns exceeds 1 ps")));
    }
    if !(horizon_ns >= 50.0) {
        return Err(CircuitError::Param(format!("horizon {horizon_ns} ns shorter than 50 ns")));
    }
    simulate(net, &SimOptions { dt_ns, horizon_ns, fire: Some(fired), ..SimOptions::default() })
}

/// 1/e constant from a least-squares fit of `ln y` over the falling edge
/// between 90% and 10% of the peak.
pub fn recovery_time_from(t: &[f64], y: &[f64]) -> Result<f64> {
    let k = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).ok_or(CircuitError::NoPulse)?;
    let peak = y[k];
    if !(peak > 0.0) {
        return Err(CircuitError::NoPulse);
    }
    let start = (k..y.len()).find(|&i| y[i] <= 0.9 * peak).ok_or(CircuitError::NoPulse)?;
    let end = (start..y.len()).find(|&i| y[i] <= 0.1 * peak).ok_or(CircuitError::NoPulse)?;
    let idx: Vec<usize> = (start..=end).filter(|&i| y[i] > 0.0).collect();
    if idx.len() < 3 {
        return Err(CircuitError::NoPulse);
    }
    let m = idx.len() as f64;
    let (st, sl) = idx.iter().fold((0.0, 0.0), |(a, b), &i| (a + t[i], b + y[i].ln()));
    let (mt, ml) = (st / m, sl / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &i in &idx {
        let dx = t[i] - mt;
        sxy += dx * (y[i].ln() - ml);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(CircuitError::NoPulse);
    }
    Ok(-1.0 / slope)
}

/// Recovery constant of the load pulse.
pub fn recovery_time(trace: &PulseTrace) -> Result<f64> {
    recovery_time_from(&trace.t_ns, &trace.i_load_ua)
}

/// Scales both inductances until the simulated recovery constant matches
/// `target_ns` to 1 ps. Returns the calibrated network and its recovery time.
pub fn calibrate_recovery(net: &SnapNetwork, target_ns: f64, dt_ns: f64) -> Result<(SnapNetwork, f64)> {
    if !(target_ns > 0.0) {
        return Err(CircuitError::Calibration(format!("target {target_ns} ns must be positive")));
    }
    let mut cur = net.scale_inductance(target_ns * net.p.r_load_ohm / net.total_inductance())?;
    for _ in 0..12 {
        let horizon = (8.0 * target_ns + 10.0).max(50.0);
        let tr = simulate_detection(&cur, (0, 0), dt_ns, horizon)?;
        let tau = recovery_time(&tr).map_err(|e| CircuitError::Calibration(format!("{e}; the bias may be below the avalanche threshold")))?;
        if (tau - target_ns).abs() < 1e-3 {
            return Ok((cur, tau));
        }
        cur = cur.scale_inductance(target_ns / tau)?;
    }
    Err(CircuitError::Calibration("recovery constant did not settle within 12 iterations".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    /// Lowest bias at which the partner wire switches, µA.
    pub threshold_ua: f64,
    /// `threshold_ua / (2 * i_sw_wire)`.
    pub fraction: f64,
    /// False when no bias below the latching limit triggers an avalanche.
    pub reachable: bool,
    pub scan: Vec<(f64, bool)>,
}

/// Whether firing wire 0 of section 0 at bias `i_b` makes its partner switch.
pub fn avalanches(net: &SnapNetwork, i_b: f64, dt_ns: f64) -> Result<bool> {
    let n = net.with_bias(i_b)?;
    let horizon = 20.0 * n.p.tau_hotspot_ns + 20.0;
    let opts = SimOptions { dt_ns, horizon_ns: horizon, fire_time_ns: 0.0, stop_early: true, ..SimOptions::default() };
    Ok(simulate(&n, &opts)?.switched(0, 1))
}

/// Coarse bias scan checking that the avalanche predicate flips once,
/// then bisection to 0.01 µA.
pub fn avalanche_threshold(net: &SnapNetwork, dt_ns: f64) -> Result<ThresholdResult> {
    let limit = 2.0 * net.p.i_sw_wire_ua;
    let points = 24;
    let mut scan = Vec::with_capacity(points);
    for k in 1..=points {
        let ib = limit * k as f64 / (points + 1) as f64;
        scan.push((ib, avalanches(net, ib, dt_ns)?));
    }
    let flips = scan.windows(2).filter(|w| w[0].1 != w[1].1).count();
    let dump = || scan.iter().map(|(i, a)| format!("{i:.3}:{}", u8::from(*a))).collect::<Vec<_>>().join(" ");
    if flips > 1 || (flips == 1 && scan[0].1) {
        return Err(CircuitError::NonMonotone { scan: dump() });
    }
    let Some(first) = scan.iter().position(|s| s.1) else {
        return Ok(ThresholdResult { threshold_ua: limit, fraction: 1.0, reachable: false, scan });
    };
    let (mut lo, mut hi) = if first == 0 { (0.0, scan[0].0) } else { (scan[first - 1].0, scan[first].0) };
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if avalanches(net, mid, dt_ns)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult { threshold_ua: hi, fraction: hi / limit, reachable: true, scan })
}
