use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Conductor, Grounding, ImpedanceMatrix, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCode {
    DuplicateId,
    DanglingBranch,
    DanglingReference,
    MissingConductor,
    SelfLoop,
    InvalidNominal,
    InvalidVoltageBounds,
    InvalidVnegLimit,
    GroundingWithoutNeutral,
    AsymmetricImpedance,
    NonpositiveResistance,
    InvalidSource,
    InvalidLoad,
    InvalidMachine,
    TooFewLegs,
    InvalidLeg,
    DuplicateLeg,
    InvalidDcLink,
    IslandWithoutSource,
    MultipleSources,
    Disconnected,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::DuplicateId => "duplicate_id",
            IssueCode::DanglingBranch => "dangling_branch",
            IssueCode::DanglingReference => "dangling_reference",
            IssueCode::MissingConductor => "missing_conductor",
            IssueCode::SelfLoop => "self_loop",
            IssueCode::InvalidNominal => "invalid_nominal",
            IssueCode::InvalidVoltageBounds => "invalid_voltage_bounds",
            IssueCode::InvalidVnegLimit => "invalid_vneg_limit",
            IssueCode::GroundingWithoutNeutral => "grounding_without_neutral",
            IssueCode::AsymmetricImpedance => "asymmetric_impedance",
            IssueCode::NonpositiveResistance => "nonpositive_resistance",
            IssueCode::InvalidSource => "invalid_source",
            IssueCode::InvalidLoad => "invalid_load",
            IssueCode::InvalidMachine => "invalid_machine",
            IssueCode::TooFewLegs => "too_few_legs",
            IssueCode::InvalidLeg => "invalid_leg",
            IssueCode::DuplicateLeg => "duplicate_leg",
            IssueCode::InvalidDcLink => "invalid_dc_link",
            IssueCode::IslandWithoutSource => "island_without_source",
            IssueCode::MultipleSources => "multiple_sources",
            IssueCode::Disconnected => "disconnected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    /// Id of the offending element (bus, branch, load, ...).
    pub element: String,
    pub message: String,
}

struct Collector(Vec<Issue>);

impl Collector {
    fn push(&mut self, code: IssueCode, element: &str, message: impl Into<String>) {
        self.0.push(Issue {
            code,
            element: element.to_string(),
            message: message.into(),
        });
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

const SYMMETRY_TOL: f64 = 1e-9;

fn check_impedance(out: &mut Collector, id: &str, z: &ImpedanceMatrix, conductors: &[Conductor]) {
    if z.max_asymmetry() > SYMMETRY_TOL {
        out.push(
            IssueCode::AsymmetricImpedance,
            id,
            "impedance matrix is not symmetric",
        );
    }
    for &c in conductors {
        if !(z.get(c, c).re > 0.0) {
            out.push(
                IssueCode::NonpositiveResistance,
                id,
                format!("diagonal resistance of conductor {c} must be positive"),
            );
        }
    }
}

/// Checks type invariants and cross references; an empty result means the
/// network can be solved.
pub fn validate(net: &Network) -> Vec<Issue> {
    let mut out = Collector(Vec::new());

    let mut seen = BTreeSet::new();
    let ids = net
        .buses
        .iter()
        .map(|b| ("bus", &b.id))
        .chain(net.branches.iter().map(|b| ("branch", &b.id)))
        .chain(net.sources.iter().map(|s| ("source", &s.id)))
        .chain(net.loads.iter().map(|l| ("load", &l.id)))
        .chain(net.machines.iter().map(|m| ("machine", &m.id)))
        .chain(net.vscs.iter().map(|v| ("vsc", &v.id)));
    for (kind, id) in ids {
        if !seen.insert((kind, id.clone())) {
            out.push(IssueCode::DuplicateId, id, format!("duplicate {kind} id"));
        }
    }

    for bus in &net.buses {
        if !(bus.v_nominal > 0.0) {
            out.push(
                IssueCode::InvalidNominal,
                &bus.id,
                "v_nominal must be positive",
            );
        }
        if !(bus.v_min < bus.v_max) || bus.v_min < 0.0 {
            out.push(
                IssueCode::InvalidVoltageBounds,
                &bus.id,
                "require 0 <= v_min < v_max",
            );
        }
        if let Some(l) = bus.vneg_limit {
            if !(l > 0.0) {
                out.push(
                    IssueCode::InvalidVnegLimit,
                    &bus.id,
                    "vneg_limit must be positive",
                );
            }
        }
        if !bus.has(Conductor::N) && bus.grounding_resistance != Grounding::Ungrounded {
            out.push(
                IssueCode::GroundingWithoutNeutral,
                &bus.id,
                "grounding given for a bus without a neutral conductor",
            );
        }
        if let Grounding::Resistance(r) = bus.grounding_resistance {
            if !(r > 0.0) {
                out.push(
                    IssueCode::GroundingWithoutNeutral,
                    &bus.id,
                    "grounding resistance must be positive",
                );
            }
        }
        if !Conductor::PHASES.iter().any(|&c| bus.has(c)) {
            out.push(
                IssueCode::MissingConductor,
                &bus.id,
                "bus has no phase conductor",
            );
        }
    }

    for br in &net.branches {
        let ends = (net.bus_index(&br.from_bus), net.bus_index(&br.to_bus));
        if ends.0.is_none() || ends.1.is_none() {
            out.push(
                IssueCode::DanglingBranch,
                &br.id,
                "branch references a missing bus",
            );
            continue;
        }
        if ends.0 == ends.1 {
            out.push(
                IssueCode::SelfLoop,
                &br.id,
                "branch connects a bus to itself",
            );
        }
        let conductors = net.branch_conductors(br);
        check_impedance(&mut out, &br.id, &br.impedance, &conductors);
        for (c, amp) in br.ampacity.iter() {
            if !(amp >= 0.0) {
                out.push(
                    IssueCode::InvalidLeg,
                    &br.id,
                    format!("negative ampacity on {c}"),
                );
            }
        }
    }

    for src in &net.sources {
        match net.bus(&src.bus) {
            Err(_) => out.push(
                IssueCode::DanglingReference,
                &src.id,
                "source bus does not exist",
            ),
            Ok(bus) => check_impedance(
                &mut out,
                &src.id,
                &src.short_circuit_impedance,
                &bus.conductors,
            ),
        }
        if !(src.sequence_voltage.positive.norm() > 0.0) {
            out.push(
                IssueCode::InvalidSource,
                &src.id,
                "positive-sequence EMF must be nonzero",
            );
        }
    }

    for load in &net.loads {
        match net.bus(&load.bus) {
            Err(_) => out.push(
                IssueCode::DanglingReference,
                &load.id,
                "load bus does not exist",
            ),
            Ok(bus) => {
                for &p in &load.phases {
                    if !p.is_phase() || !bus.has(p) {
                        out.push(
                            IssueCode::MissingConductor,
                            &load.id,
                            format!("load phase {p} is not a phase conductor of bus {}", bus.id),
                        );
                    }
                }
            }
        }
        if load.phases.is_empty() || !load.p_kw.is_finite() || !load.q_kvar.is_finite() {
            out.push(
                IssueCode::InvalidLoad,
                &load.id,
                "load needs phases and finite p, q",
            );
        }
    }

    for m in &net.machines {
        match net.bus(&m.bus) {
            Err(_) => out.push(
                IssueCode::DanglingReference,
                &m.id,
                "machine bus does not exist",
            ),
            Ok(bus) => {
                if !Conductor::PHASES.iter().all(|&c| bus.has(c)) {
                    out.push(
                        IssueCode::MissingConductor,
                        &m.id,
                        "machine bus is not three-phase",
                    );
                }
            }
        }
        if !(m.rating_kva > 0.0) || !(m.power_factor > 0.0 && m.power_factor <= 1.0) {
            out.push(
                IssueCode::InvalidMachine,
                &m.id,
                "require rating > 0 and 0 < pf <= 1",
            );
        }
    }

    for vsc in &net.vscs {
        if vsc.legs.len() < 3 {
            out.push(
                IssueCode::TooFewLegs,
                &vsc.id,
                "a converter needs at least three legs",
            );
        }
        let mut bound = BTreeSet::new();
        for leg in &vsc.legs {
            match net.bus(&leg.bus) {
                Err(_) => out.push(
                    IssueCode::DanglingReference,
                    &vsc.id,
                    format!("leg {} references missing bus {}", leg.id, leg.bus),
                ),
                Ok(bus) if !bus.has(leg.conductor) => out.push(
                    IssueCode::MissingConductor,
                    &vsc.id,
                    format!(
                        "leg {} binds to conductor {} absent at bus {}",
                        leg.id, leg.conductor, bus.id
                    ),
                ),
                Ok(_) => {}
            }
            if let Some(i) = leg.i_max {
                if !(i >= 0.0) {
                    out.push(
                        IssueCode::InvalidLeg,
                        &vsc.id,
                        format!("leg {} has negative i_max", leg.id),
                    );
                }
            }
            if !bound.insert((leg.bus.clone(), leg.conductor)) {
                out.push(
                    IssueCode::DuplicateLeg,
                    &vsc.id,
                    format!("leg {} duplicates a binding", leg.id),
                );
            }
        }
        let dc = &vsc.dc_link;
        let ripple_ok = dc.ripple_limit.is_none_or(|r| r >= 0.0);
        if !(dc.capacitance > 0.0)
            || !(dc.vdc_nominal > 0.0)
            || !ripple_ok
            || !(dc.esr_coefficient >= 0.0)
        {
            out.push(
                IssueCode::InvalidDcLink,
                &vsc.id,
                "require capacitance > 0, vdc_nominal > 0, ripple_limit >= 0, esr >= 0",
            );
        }
        if !dc.dc_source_power.is_consistent() {
            out.push(
                IssueCode::InvalidDcLink,
                &vsc.id,
                "dc source power bounds are inverted",
            );
        }
    }

    // Islands are formed by branches; converters may couple islands.
    let n = net.buses.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for br in &net.branches {
        if let (Some(f), Some(t)) = (net.bus_index(&br.from_bus), net.bus_index(&br.to_bus)) {
            union(&mut parent, f, t);
        }
    }
    let mut sources_per_island: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        sources_per_island.entry(find(&mut parent, i)).or_default();
    }
    for src in &net.sources {
        if let Some(b) = net.bus_index(&src.bus) {
            *sources_per_island.entry(find(&mut parent, b)).or_default() += 1;
        }
    }
    for (&root, &count) in &sources_per_island {
        let id = &net.buses[root].id;
        if count == 0 {
            out.push(
                IssueCode::IslandWithoutSource,
                id,
                "electrical island has no source",
            );
        } else if count > 1 {
            out.push(
                IssueCode::MultipleSources,
                id,
                "electrical island has more than one source",
            );
        }
    }
    for vsc in &net.vscs {
        let buses: Vec<usize> = vsc
            .legs
            .iter()
            .filter_map(|l| net.bus_index(&l.bus))
            .collect();
        for w in buses.windows(2) {
            union(&mut parent, w[0], w[1]);
        }
    }
    if n > 0 {
        let root = find(&mut parent, 0);
        if let Some(i) = (1..n).find(|&i| find(&mut parent, i) != root) {
            out.push(
                IssueCode::Disconnected,
                &net.buses[i].id,
                "bus is not connected to the network",
            );
        }
    }

    out.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn codes(net: &Network) -> Vec<IssueCode> {
        validate(net).into_iter().map(|i| i.code).collect()
    }

    #[test]
    fn bundled_networks_are_valid() {
        assert_eq!(validate(&presets::demo_feeder()), vec![]);
        assert_eq!(validate(&presets::statcom_toy()), vec![]);
        assert_eq!(validate(&presets::sop_two_feeder()), vec![]);
    }

    #[test]
    fn dangling_branch() {
        let mut net = presets::demo_feeder();
        net.branches[0].to_bus = "nowhere".into();
        assert!(codes(&net).contains(&IssueCode::DanglingBranch));
    }

    #[test]
    fn neutral_leg_on_three_wire_bus() {
        let mut net = presets::statcom_toy();
        let bus = net.vscs[0].legs[0].bus.clone();
        let i = net.bus_index(&bus).unwrap();
        net.buses[i].conductors.retain(|&c| c != Conductor::N);
        net.buses[i].grounding_resistance = Grounding::Ungrounded;
        assert!(codes(&net).contains(&IssueCode::MissingConductor));
    }

    #[test]
    fn islands_need_exactly_one_source() {
        let mut net = presets::statcom_toy();
        let extra = net.sources[0].clone();
        net.sources.push(crate::network::Source {
            id: "second".into(),
            ..extra
        });
        assert!(codes(&net).contains(&IssueCode::MultipleSources));

        let mut net = presets::statcom_toy();
        net.sources.clear();
        assert!(codes(&net).contains(&IssueCode::IslandWithoutSource));
    }

    #[test]
    fn disconnected_bus() {
        let mut net = presets::statcom_toy();
        let mut lonely = net.buses[1].clone();
        lonely.id = "lonely".into();
        net.buses.push(lonely);
        let c = codes(&net);
        assert!(c.contains(&IssueCode::Disconnected));
        assert!(c.contains(&IssueCode::IslandWithoutSource));
    }

    #[test]
    fn bad_bounds_and_impedance() {
        let mut net = presets::demo_feeder();
        net.buses[1].v_min = 1.2;
        net.branches[0].impedance.0[0][1].re += 0.1;
        net.branches[1].impedance.0[1][1].re = 0.0;
        let c = codes(&net);
        assert!(c.contains(&IssueCode::InvalidVoltageBounds));
        assert!(c.contains(&IssueCode::AsymmetricImpedance));
        assert!(c.contains(&IssueCode::NonpositiveResistance));
    }

    #[test]
    fn issue_codes_serialize_snake_case() {
        let s = serde_json::to_string(&IssueCode::DanglingBranch).unwrap();
        assert_eq!(s, "\"dangling_branch\"");
        assert_eq!(IssueCode::MissingConductor.as_str(), "missing_conductor");
    }
}
