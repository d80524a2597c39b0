//! Multi-conductor (a, b, c, n) distribution network data model.
//!
//! Everything here is SI (V, A, Ω, F, W) except where a field says pu. The
//! JSON schema is the serde representation of [`Network`]; see `docs/network-schema.md`.

pub(crate) mod admittance;
mod demand;
mod impedance;
mod validate;

pub use admittance::{admittance, NodalAdmittance, NodeRef};
pub use demand::{apply_demand_step, parse_demand_csv, read_demand_csv, DemandRow, DemandStep};
pub use impedance::{ImpedanceMatrix, ImpedanceSpec, SequenceImpedance};
pub use validate::{validate, Issue, IssueCode};

use crate::phasor::{to_phase, Phasor, SequenceTriple};
use crate::power_quality::InductionMachine;
use crate::vsc::VscSpec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conductor {
    A,
    B,
    C,
    N,
}

impl Conductor {
    pub const ALL: [Conductor; 4] = [Conductor::A, Conductor::B, Conductor::C, Conductor::N];
    pub const PHASES: [Conductor; 3] = [Conductor::A, Conductor::B, Conductor::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_phase(self) -> bool {
        self != Conductor::N
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Conductor::A => "a",
            Conductor::B => "b",
            Conductor::C => "c",
            Conductor::N => "n",
        }
    }
}

impl std::fmt::Display for Conductor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optional value per conductor, serialized as a map with absent entries omitted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerConductor<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<T>,
}

impl<T: Copy> PerConductor<T> {
    pub fn get(&self, c: Conductor) -> Option<T> {
        match c {
            Conductor::A => self.a,
            Conductor::B => self.b,
            Conductor::C => self.c,
            Conductor::N => self.n,
        }
    }

    pub fn set(&mut self, c: Conductor, v: Option<T>) {
        match c {
            Conductor::A => self.a = v,
            Conductor::B => self.b = v,
            Conductor::C => self.c = v,
            Conductor::N => self.n = v,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Conductor, T)> + '_ {
        Conductor::ALL
            .into_iter()
            .filter_map(|c| self.get(c).map(|v| (c, v)))
    }
}

impl<T> FromIterator<(Conductor, T)> for PerConductor<T>
where
    T: Copy,
{
    fn from_iter<I: IntoIterator<Item = (Conductor, T)>>(iter: I) -> Self {
        let mut out = PerConductor {
            a: None,
            b: None,
            c: None,
            n: None,
        };
        for (c, v) in iter {
            out.set(c, Some(v));
        }
        out
    }
}

/// Neutral-to-earth connection of a bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grounding {
    Ungrounded,
    /// Ideal bond: the neutral is held at earth potential.
    Solid,
    Resistance(f64),
}

impl Grounding {
    pub fn admittance(self) -> Option<f64> {
        match self {
            Grounding::Resistance(r) if r > 0.0 => Some(1.0 / r),
            _ => None,
        }
    }
}

// JSON: `null` = ungrounded, `0` = solid, positive number = resistance.
impl Serialize for Grounding {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Grounding::Ungrounded => s.serialize_none(),
            Grounding::Solid => s.serialize_f64(0.0),
            Grounding::Resistance(r) => s.serialize_f64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for Grounding {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match Option::<f64>::deserialize(d)? {
            None => Grounding::Ungrounded,
            Some(0.0) => Grounding::Solid,
            Some(r) => Grounding::Resistance(r),
        })
    }
}

fn default_grounding() -> Grounding {
    Grounding::Ungrounded
}

fn default_vmin() -> f64 {
    0.94
}

fn default_vmax() -> f64 {
    1.10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub conductors: Vec<Conductor>,
    /// Nominal phase-to-neutral voltage, V RMS.
    pub v_nominal: f64,
    #[serde(default = "default_vmin")]
    pub v_min: f64,
    #[serde(default = "default_vmax")]
    pub v_max: f64,
    #[serde(default = "default_grounding")]
    pub grounding_resistance: Grounding,
    /// Negative-sequence voltage limit in pu, if the bus carries three-phase equipment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vneg_limit: Option<f64>,
}

impl Bus {
    pub fn has(&self, c: Conductor) -> bool {
        self.conductors.contains(&c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Series impedance, conductor-ordered a, b, c, n.
    pub impedance: ImpedanceMatrix,
    /// Per-conductor ampacity, A RMS.
    #[serde(default)]
    pub ampacity: PerConductor<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub id: String,
    pub bus: String,
    /// Thevenin EMF in pu of the bus nominal voltage.
    pub sequence_voltage: SequenceTriple,
    pub short_circuit_impedance: ImpedanceMatrix,
}

impl Source {
    /// Phase EMFs in volts (the EMF neutral sits at earth potential).
    pub fn emf(&self, v_nominal: f64) -> [Phasor; 4] {
        let p = to_phase(self.sequence_voltage);
        [
            p.a * v_nominal,
            p.b * v_nominal,
            p.c * v_nominal,
            Phasor::default(),
        ]
    }
}

/// Constant-power load, phase-to-neutral on each listed phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: String,
    pub bus: String,
    pub phases: Vec<Conductor>,
    /// Active power per connected phase, kW.
    pub p_kw: f64,
    /// Reactive power per connected phase, kvar.
    pub q_kvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub sources: Vec<Source>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub machines: Vec<InductionMachine>,
    #[serde(default)]
    pub vscs: Vec<VscSpec>,
}

fn default_frequency() -> f64 {
    50.0
}

impl Network {
    pub fn from_json(text: &str) -> Result<Self> {
        let net: Network = serde_json::from_str(text)?;
        if net.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", net.schema_version),
            ));
        }
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn bus(&self, id: &str) -> Result<&Bus> {
        self.buses
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn branch_index(&self, id: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.id == id)
    }

    pub fn vsc_index(&self, id: &str) -> Option<usize> {
        self.vscs.iter().position(|v| v.id == id)
    }

    /// Conductors shared by both ends of a branch, in a, b, c, n order.
    pub fn branch_conductors(&self, branch: &Branch) -> Vec<Conductor> {
        match (self.bus(&branch.from_bus), self.bus(&branch.to_bus)) {
            (Ok(f), Ok(t)) => Conductor::ALL
                .into_iter()
                .filter(|&c| f.has(c) && t.has(c))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Fails with [`Error::Validation`] unless [`validate`] reports nothing.
    pub fn ensure_valid(&self) -> Result<()> {
        let issues = validate(self);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn grounding_json() {
        let g: Vec<Grounding> = serde_json::from_str("[null, 0, 12.5]").unwrap();
        assert_eq!(
            g,
            vec![
                Grounding::Ungrounded,
                Grounding::Solid,
                Grounding::Resistance(12.5)
            ]
        );
        assert_eq!(serde_json::to_string(&g).unwrap(), "[null,0.0,12.5]");
    }

    #[test]
    fn bundled_networks_round_trip() {
        for net in [
            presets::demo_feeder(),
            presets::statcom_toy(),
            presets::sop_two_feeder(),
        ] {
            let back = Network::from_json(&net.to_json().unwrap()).unwrap();
            assert_eq!(back, net);
        }
    }

    #[test]
    fn schema_version_is_checked() {
        let mut net = presets::statcom_toy();
        net.schema_version = 7;
        let text = serde_json::to_string(&net).unwrap();
        assert!(matches!(
            Network::from_json(&text),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
