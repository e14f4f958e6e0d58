use serde::{Deserialize, Serialize};

use super::{CircuitError, Result, REFERENCE_ISW_UA};

/// Circuit parameters as read from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapParams {
    pub n_sections: usize,
    /// Kinetic inductance of one wire, nH.
    pub l_wire_nh: f64,
    /// Series choke per section, nH.
    pub l_choke_nh: f64,
    pub r_hotspot_ohm: f64,
    pub tau_hotspot_ns: f64,
    pub r_load_ohm: f64,
    pub i_bias_ua: f64,
    pub i_sw_wire_ua: f64,
    /// A resistive wire heals once its current falls below this fraction of `i_sw_wire_ua`.
    pub retrap_fraction: f64,
}

impl Default for SnapParams {
    fn default() -> Self {
        SnapParams {
            n_sections: 16,
            l_wire_nh: 50.0,
            l_choke_nh: 2.5,
            r_hotspot_ohm: 1000.0,
            tau_hotspot_ns: 0.5,
            r_load_ohm: 50.0,
            i_bias_ua: 19.5,
            i_sw_wire_ua: REFERENCE_ISW_UA / 2.0,
            retrap_fraction: 0.5,
        }
    }
}

/// Validated cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapNetwork {
    pub p: SnapParams,
}

impl SnapNetwork {
    /// Builds the cascade; see [`SnapParams`] for the parameters.
    pub fn build(p: SnapParams) -> Result<Self> {
        if p.n_sections == 0 {
            return Err(CircuitError::Param("n_sections must be at least 1".into()));
        }
        let positive = [
            ("l_wire_nh", p.l_wire_nh),
            ("l_choke_nh", p.l_choke_nh),
            ("r_hotspot_ohm", p.r_hotspot_ohm),
            ("tau_hotspot_ns", p.tau_hotspot_ns),
            ("r_load_ohm", p.r_load_ohm),
            ("i_bias_ua", p.i_bias_ua),
            ("i_sw_wire_ua", p.i_sw_wire_ua),
            ("retrap_fraction", p.retrap_fraction),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CircuitError::Param(format!("{name} must be positive, got {v}")));
            }
        }
        if p.retrap_fraction >= 1.0 {
            return Err(CircuitError::Param(format!("retrap_fraction must be below 1, got {}", p.retrap_fraction)));
        }
        let limit = 2.0 * p.i_sw_wire_ua;
        if p.i_bias_ua >= limit {
            return Err(CircuitError::Latch { bias: p.i_bias_ua, limit });
        }
        Ok(SnapNetwork { p })
    }

    pub fn n_wires(&self) -> usize {
        2 * self.p.n_sections
    }

    /// Series inductance seen by the load once every wire is superconducting.
    pub fn total_inductance(&self) -> f64 {
        self.p.n_sections as f64 * (self.p.l_wire_nh / 2.0 + self.p.l_choke_nh)
    }

    /// Copy with the bias replaced.
    pub fn with_bias(&self, i_bias_ua: f64) -> Result<Self> {
        SnapNetwork::build(SnapParams { i_bias_ua, ..self.p })
    }

    /// Copy with both inductances multiplied by `factor`.
    pub fn scale_inductance(&self, factor: f64) -> Result<Self> {
        SnapNetwork::build(SnapParams {
            l_wire_nh: self.p.l_wire_nh * factor,
            l_choke_nh: self.p.l_choke_nh * factor,
            ..self.p
        })
    }
}
