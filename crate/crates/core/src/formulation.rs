//! Per-unit rectangular current-voltage equations with an explicit neutral.
//!
//! Shared by the power-flow solver and the OPF assembly. Voltages are
//! referred to earth; a solidly grounded neutral has no variable and no KCL
//! row. Branch currents flow from `from_bus` to `to_bus`, source currents
//! flow out of the source into its bus, load currents flow from the phase
//! through the load to the neutral (or earth on a bus without neutral), and
//! converter leg currents are injections into the bus.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::network::{admittance::block_admittance, Conductor, Grounding, Network, PerConductor};
use crate::nlp::{Func, Outer, QuadForm};
use crate::phasor::{inverse_basis_entry, Phasor};
use crate::power_flow::SystemState;
use crate::{Error, Result};

/// Current base, A.
pub const I_BASE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bases {
    pub v: f64,
    pub i: f64,
    pub z: f64,
    pub s: f64,
}

impl Bases {
    pub fn for_network(net: &Network) -> Result<Bases> {
        let v = net
            .sources
            .first()
            .and_then(|s| net.bus(&s.bus).ok())
            .or_else(|| net.buses.first())
            .map(|b| b.v_nominal)
            .ok_or_else(|| Error::invalid("network", "has no buses"))?;
        Ok(Bases {
            v,
            i: I_BASE,
            z: v / I_BASE,
            s: v * I_BASE,
        })
    }
}

/// Complex affine form `re + j·im` of the variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CLin {
    pub re: QuadForm,
    pub im: QuadForm,
}

impl CLin {
    pub fn constant(c: Phasor) -> CLin {
        CLin {
            re: QuadForm::constant(c.re),
            im: QuadForm::constant(c.im),
        }
    }

    /// Variable pair starting at `k` (re at `k`, im at `k + 1`).
    pub fn var(k: usize) -> CLin {
        CLin {
            re: QuadForm::var(k),
            im: QuadForm::var(k + 1),
        }
    }

    /// `self += a·other`.
    pub fn add(&mut self, other: &CLin, a: Phasor) -> &mut Self {
        self.re
            .add_scaled(&other.re, a.re)
            .add_scaled(&other.im, -a.im);
        self.im
            .add_scaled(&other.im, a.re)
            .add_scaled(&other.re, a.im);
        self
    }

    pub fn plus(mut self, other: &CLin, a: Phasor) -> CLin {
        self.add(other, a);
        self
    }

    pub fn value(&self, x: &[f64]) -> Phasor {
        Phasor::new(self.re.value(x), self.im.value(x))
    }

    pub fn is_zero(&self) -> bool {
        self.re.linear.is_empty()
            && self.re.quad.is_empty()
            && self.re.constant == 0.0
            && self.im.linear.is_empty()
            && self.im.quad.is_empty()
            && self.im.constant == 0.0
    }
}

/// Product of two affine forms as a quadratic form.
pub fn mul_affine(a: &QuadForm, b: &QuadForm) -> QuadForm {
    debug_assert!(a.quad.is_empty() && b.quad.is_empty());
    let mut out = QuadForm::constant(a.constant * b.constant);
    for &(i, ai) in &a.linear {
        out.add_lin(i, ai * b.constant);
    }
    for &(j, bj) in &b.linear {
        out.add_lin(j, bj * a.constant);
    }
    for &(i, ai) in &a.linear {
        for &(j, bj) in &b.linear {
            out.add_quad(i, j, ai * bj);
        }
    }
    out
}

/// `a·b` (no conjugate) as `(re, im)` quadratic forms.
pub fn product(a: &CLin, b: &CLin) -> (QuadForm, QuadForm) {
    let mut re = mul_affine(&a.re, &b.re);
    re.add_scaled(&mul_affine(&a.im, &b.im), -1.0);
    let mut im = mul_affine(&a.re, &b.im);
    im.add_scaled(&mul_affine(&a.im, &b.re), 1.0);
    (re, im)
}

/// `a·b*` as `(re, im)` quadratic forms.
pub fn conj_product(a: &CLin, b: &CLin) -> (QuadForm, QuadForm) {
    let mut re = mul_affine(&a.re, &b.re);
    re.add_scaled(&mul_affine(&a.im, &b.im), 1.0);
    let mut im = mul_affine(&a.im, &b.re);
    im.add_scaled(&mul_affine(&a.re, &b.im), -1.0);
    (re, im)
}

/// `|a|²` of an affine form.
pub fn norm_sqr(a: &CLin) -> QuadForm {
    let mut q = mul_affine(&a.re, &a.re);
    q.add_scaled(&mul_affine(&a.im, &a.im), 1.0);
    q
}

/// What a constraint row enforces, for diagnostics and tests.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintKind {
    Kcl {
        bus: String,
        conductor: Conductor,
    },
    Ohm {
        branch: String,
        conductor: Conductor,
    },
    SourceEmf {
        source: String,
        conductor: Conductor,
    },
    LoadPower {
        load: String,
        phase: Conductor,
    },
    CurrentBalance {
        vsc: String,
    },
    DcPower {
        vsc: String,
    },
    LegOff {
        vsc: String,
        leg: String,
    },
    RippleZero {
        vsc: String,
    },
    LegAmpacity {
        vsc: String,
        leg: String,
    },
    RippleLimit {
        vsc: String,
    },
    VnegLimit {
        bus: String,
    },
    VoltageMin {
        bus: String,
        phase: Conductor,
    },
    VoltageMax {
        bus: String,
        phase: Conductor,
    },
    BranchAmpacity {
        branch: String,
        conductor: Conductor,
    },
    Epigraph {
        conductor: Conductor,
    },
    EpigraphSign,
    DcSourceMin {
        vsc: String,
    },
    DcSourceMax {
        vsc: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadOrigin {
    Load(usize),
    Machine(usize),
}

/// Single-phase constant-power element after expanding loads and machines.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLoad {
    pub id: String,
    pub bus: usize,
    pub phase: Conductor,
    /// W and var.
    pub p: f64,
    pub q: f64,
    pub origin: LoadOrigin,
}

pub fn phase_loads(net: &Network) -> Result<Vec<PhaseLoad>> {
    let mut out = Vec::new();
    for (k, l) in net.loads.iter().enumerate() {
        let bus = net
            .bus_index(&l.bus)
            .ok_or_else(|| Error::UnknownElement(l.bus.clone()))?;
        for &ph in &l.phases {
            out.push(PhaseLoad {
                id: l.id.clone(),
                bus,
                phase: ph,
                p: l.p_kw * 1e3,
                q: l.q_kvar * 1e3,
                origin: LoadOrigin::Load(k),
            });
        }
    }
    for (k, m) in net.machines.iter().enumerate() {
        let bus = net
            .bus_index(&m.bus)
            .ok_or_else(|| Error::UnknownElement(m.bus.clone()))?;
        for ph in Conductor::PHASES {
            out.push(PhaseLoad {
                id: m.id.clone(),
                bus,
                phase: ph,
                p: m.active_power_kw * 1e3 / 3.0,
                q: m.reactive_power_kvar() * 1e3 / 3.0,
                origin: LoadOrigin::Machine(k),
            });
        }
    }
    Ok(out)
}

/// Whether converter leg currents are optimization variables or fixed data.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceMode {
    Variables,
    /// Leg currents in A, per converter and leg.
    Fixed(Vec<Vec<Phasor>>),
}

/// Variable indices; each entry is the real part, the imaginary part follows.
#[derive(Debug, Clone)]
pub struct Layout {
    pub bases: Bases,
    pub v: Vec<[Option<usize>; 4]>,
    pub ibr: Vec<[Option<usize>; 4]>,
    pub isrc: Vec<[Option<usize>; 4]>,
    pub loads: Vec<PhaseLoad>,
    pub iload: Vec<usize>,
    pub ileg: Vec<Vec<usize>>,
    /// Free dc source power (real scalar, pu) per converter.
    pub pdc: Vec<Option<usize>>,
    /// OF1 epigraph variable (real scalar).
    pub t: Option<usize>,
    pub n: usize,
    pub mode: DeviceMode,
}

impl Layout {
    pub fn new(net: &Network, mode: DeviceMode, epigraph: bool) -> Result<Layout> {
        let bases = Bases::for_network(net)?;
        let mut n = 0;
        let mut next = |k: usize| {
            let i = n;
            n += k;
            i
        };
        let v = net
            .buses
            .iter()
            .map(|b| {
                let mut row = [None; 4];
                for c in Conductor::ALL {
                    let solid = c == Conductor::N && b.grounding_resistance == Grounding::Solid;
                    if b.has(c) && !solid {
                        row[c.index()] = Some(next(2));
                    }
                }
                row
            })
            .collect();
        let ibr = net
            .branches
            .iter()
            .map(|br| {
                let mut row = [None; 4];
                for c in net.branch_conductors(br) {
                    row[c.index()] = Some(next(2));
                }
                row
            })
            .collect();
        let isrc = net
            .sources
            .iter()
            .map(|s| {
                let mut row = [None; 4];
                if let Ok(b) = net.bus(&s.bus) {
                    for &c in &b.conductors {
                        row[c.index()] = Some(next(2));
                    }
                }
                row
            })
            .collect();
        let loads = phase_loads(net)?;
        let iload = loads.iter().map(|_| next(2)).collect();
        let (ileg, pdc) = match &mode {
            DeviceMode::Variables => (
                net.vscs
                    .iter()
                    .map(|d| d.legs.iter().map(|_| next(2)).collect())
                    .collect(),
                net.vscs
                    .iter()
                    .map(|d| match d.dc_link.dc_source_power {
                        crate::vsc::DcSourcePower::Range { .. } => Some(next(1)),
                        crate::vsc::DcSourcePower::Fixed(_) => None,
                    })
                    .collect(),
            ),
            DeviceMode::Fixed(currents) => {
                if currents.len() != net.vscs.len() {
                    return Err(Error::LengthMismatch {
                        expected: net.vscs.len(),
                        got: currents.len(),
                    });
                }
                for (d, c) in net.vscs.iter().zip(currents) {
                    if c.len() != d.legs.len() {
                        return Err(Error::LengthMismatch {
                            expected: d.legs.len(),
                            got: c.len(),
                        });
                    }
                }
                (vec![Vec::new(); net.vscs.len()], vec![None; net.vscs.len()])
            }
        };
        let t = epigraph.then(|| next(1));
        Ok(Layout {
            bases,
            v,
            ibr,
            isrc,
            loads,
            iload,
            ileg,
            pdc,
            t,
            n,
            mode,
        })
    }

    fn pair(k: Option<usize>) -> CLin {
        k.map(CLin::var).unwrap_or_default()
    }

    /// Node voltage to earth, pu.
    pub fn voltage(&self, bus: usize, c: Conductor) -> CLin {
        Self::pair(self.v[bus][c.index()])
    }

    /// Phase-to-neutral voltage (phase to earth on a bus without neutral), pu.
    pub fn phase_voltage(&self, net: &Network, bus: usize, c: Conductor) -> CLin {
        let v = self.voltage(bus, c);
        if net.buses[bus].has(Conductor::N) {
            v.plus(&self.voltage(bus, Conductor::N), Phasor::new(-1.0, 0.0))
        } else {
            v
        }
    }

    pub fn branch_current(&self, branch: usize, c: Conductor) -> CLin {
        Self::pair(self.ibr[branch][c.index()])
    }

    /// Leg current in pu; a constant in [`DeviceMode::Fixed`].
    pub fn leg_current(&self, vsc: usize, leg: usize) -> CLin {
        match &self.mode {
            DeviceMode::Variables => CLin::var(self.ileg[vsc][leg]),
            DeviceMode::Fixed(c) => CLin::constant(c[vsc][leg] / self.bases.i),
        }
    }

    /// `V⁻` of the phase-to-neutral voltages, in pu of the bus nominal.
    pub fn negative_sequence(&self, net: &Network, bus: usize) -> CLin {
        let k = self.bases.v / net.buses[bus].v_nominal;
        let mut out = CLin::default();
        for (col, c) in Conductor::PHASES.into_iter().enumerate() {
            out.add(
                &self.phase_voltage(net, bus, c),
                inverse_basis_entry(2, col) * k,
            );
        }
        out
    }

    /// `Σ V·I` over all legs of a converter, pu.
    pub fn ripple(&self, net: &Network, vsc: usize) -> (QuadForm, QuadForm) {
        let mut re = QuadForm::new();
        let mut im = QuadForm::new();
        for (k, leg) in net.vscs[vsc].legs.iter().enumerate() {
            let bus = net.bus_index(&leg.bus).expect("validated");
            let (r, i) = product(&self.voltage(bus, leg.conductor), &self.leg_current(vsc, k));
            re.add_scaled(&r, 1.0);
            im.add_scaled(&i, 1.0);
        }
        (re, im)
    }

    /// `Σ Re(V·I*)` over all legs of a converter, pu.
    pub fn dc_power(&self, net: &Network, vsc: usize) -> QuadForm {
        let mut out = QuadForm::new();
        for (k, leg) in net.vscs[vsc].legs.iter().enumerate() {
            let bus = net.bus_index(&leg.bus).expect("validated");
            let (r, _) = conj_product(&self.voltage(bus, leg.conductor), &self.leg_current(vsc, k));
            out.add_scaled(&r, 1.0);
        }
        out
    }
}

fn push_pair(out: &mut Vec<(ConstraintKind, Func)>, kind: ConstraintKind, z: CLin) {
    out.push((kind.clone(), Func::quad(z.re)));
    out.push((kind, Func::quad(z.im)));
}

/// KCL, Ohm's law, source Thevenin and constant-power load equations.
pub fn network_equalities(net: &Network, layout: &Layout) -> Result<Vec<(ConstraintKind, Func)>> {
    let b = layout.bases;
    let neg = Phasor::new(-1.0, 0.0);
    let one = Phasor::new(1.0, 0.0);
    let mut kcl: Vec<[CLin; 4]> = net.buses.iter().map(|_| Default::default()).collect();

    for (k, br) in net.branches.iter().enumerate() {
        let f = net
            .bus_index(&br.from_bus)
            .ok_or_else(|| Error::UnknownElement(br.from_bus.clone()))?;
        let t = net
            .bus_index(&br.to_bus)
            .ok_or_else(|| Error::UnknownElement(br.to_bus.clone()))?;
        for c in net.branch_conductors(br) {
            let i = layout.branch_current(k, c);
            kcl[f][c.index()].add(&i, one);
            kcl[t][c.index()].add(&i, neg);
        }
    }
    for (k, src) in net.sources.iter().enumerate() {
        let bus = net
            .bus_index(&src.bus)
            .ok_or_else(|| Error::UnknownElement(src.bus.clone()))?;
        for c in Conductor::ALL {
            if let Some(idx) = layout.isrc[k][c.index()] {
                kcl[bus][c.index()].add(&CLin::var(idx), neg);
            }
        }
    }
    for (pl, &idx) in layout.loads.iter().zip(&layout.iload) {
        let i = CLin::var(idx);
        kcl[pl.bus][pl.phase.index()].add(&i, one);
        if net.buses[pl.bus].has(Conductor::N) {
            kcl[pl.bus][Conductor::N.index()].add(&i, neg);
        }
    }
    for (d, vsc) in net.vscs.iter().enumerate() {
        for (k, leg) in vsc.legs.iter().enumerate() {
            let bus = net
                .bus_index(&leg.bus)
                .ok_or_else(|| Error::UnknownElement(leg.bus.clone()))?;
            kcl[bus][leg.conductor.index()].add(&layout.leg_current(d, k), neg);
        }
    }
    for (k, bus) in net.buses.iter().enumerate() {
        if let Some(g) = bus.grounding_resistance.admittance() {
            let v = layout.voltage(k, Conductor::N);
            kcl[k][Conductor::N.index()].add(&v, Phasor::new(g * b.z, 0.0));
        }
    }

    let mut out = Vec::new();
    for (k, bus) in net.buses.iter().enumerate() {
        for c in Conductor::ALL {
            if layout.v[k][c.index()].is_some() {
                let row = std::mem::take(&mut kcl[k][c.index()]);
                push_pair(
                    &mut out,
                    ConstraintKind::Kcl {
                        bus: bus.id.clone(),
                        conductor: c,
                    },
                    row,
                );
            }
        }
    }

    for (k, br) in net.branches.iter().enumerate() {
        let f = net.bus_index(&br.from_bus).expect("checked above");
        let t = net.bus_index(&br.to_bus).expect("checked above");
        let conductors = net.branch_conductors(br);
        for &c in &conductors {
            let mut row = layout.voltage(f, c).plus(&layout.voltage(t, c), neg);
            for &d in &conductors {
                let z = br.impedance.get(c, d) / b.z;
                row.add(&layout.branch_current(k, d), -z);
            }
            push_pair(
                &mut out,
                ConstraintKind::Ohm {
                    branch: br.id.clone(),
                    conductor: c,
                },
                row,
            );
        }
    }

    for (k, src) in net.sources.iter().enumerate() {
        let bus_idx = net.bus_index(&src.bus).expect("checked above");
        let bus = &net.buses[bus_idx];
        let emf = src.emf(bus.v_nominal);
        let present: Vec<Conductor> = Conductor::ALL.into_iter().filter(|&c| bus.has(c)).collect();
        block_admittance(&src.id, &src.short_circuit_impedance, &present)?;
        for &c in &present {
            let mut row = layout.voltage(bus_idx, c);
            row.add(&CLin::constant(-emf[c.index()] / b.v), one);
            for &d in &present {
                let z = src.short_circuit_impedance.get(c, d) / b.z;
                row.add(&CLin::pair_or_zero(layout.isrc[k][d.index()]), z);
            }
            push_pair(
                &mut out,
                ConstraintKind::SourceEmf {
                    source: src.id.clone(),
                    conductor: c,
                },
                row,
            );
        }
    }

    for (pl, &idx) in layout.loads.iter().zip(&layout.iload) {
        let v = layout.phase_voltage(net, pl.bus, pl.phase);
        let (mut p, mut q) = conj_product(&v, &CLin::var(idx));
        p.add_const(-pl.p / b.s);
        q.add_const(-pl.q / b.s);
        let kind = ConstraintKind::LoadPower {
            load: pl.id.clone(),
            phase: pl.phase,
        };
        out.push((kind.clone(), Func::quad(p)));
        out.push((kind, Func::quad(q)));
    }
    Ok(out)
}

impl CLin {
    fn pair_or_zero(k: Option<usize>) -> CLin {
        k.map(CLin::var).unwrap_or_default()
    }
}

/// Flat start: `1∠{0, −120°, 120°}` of the bus nominal on phases, neutral at
/// zero, branch and source currents zero, load currents from `S` at the flat
/// voltage, leg currents zero.
pub fn flat_start(net: &Network, layout: &Layout) -> Vec<f64> {
    let mut x = vec![0.0; layout.n];
    let angle = |c: Conductor| match c {
        Conductor::A => 0.0,
        Conductor::B => -120.0,
        Conductor::C => 120.0,
        Conductor::N => 0.0,
    };
    for (k, bus) in net.buses.iter().enumerate() {
        for c in Conductor::PHASES {
            if let Some(i) = layout.v[k][c.index()] {
                let v = crate::phasor::polar_deg(bus.v_nominal / layout.bases.v, angle(c));
                x[i] = v.re;
                x[i + 1] = v.im;
            }
        }
    }
    for (pl, &idx) in layout.loads.iter().zip(&layout.iload) {
        let v = layout.phase_voltage(net, pl.bus, pl.phase).value(&x);
        if v.norm() > 0.0 {
            let s = Phasor::new(pl.p, pl.q) / layout.bases.s;
            let i = (s / v).conj();
            x[idx] = i.re;
            x[idx + 1] = i.im;
        }
    }
    x
}

/// Converts a solution vector into SI quantities.
pub fn state_from_x(net: &Network, layout: &Layout, x: &[f64]) -> SystemState {
    let b = layout.bases;
    let mut voltage = BTreeMap::new();
    for (k, bus) in net.buses.iter().enumerate() {
        let pc: PerConductor<Phasor> = bus
            .conductors
            .iter()
            .map(|&c| (c, layout.voltage(k, c).value(x) * b.v))
            .collect();
        voltage.insert(bus.id.clone(), pc);
    }
    let mut branch_current = BTreeMap::new();
    for (k, br) in net.branches.iter().enumerate() {
        let pc: PerConductor<Phasor> = net
            .branch_conductors(br)
            .into_iter()
            .map(|c| (c, layout.branch_current(k, c).value(x) * b.i))
            .collect();
        branch_current.insert(br.id.clone(), pc);
    }
    let mut device_current = BTreeMap::new();
    let mut dc_power = BTreeMap::new();
    for (d, vsc) in net.vscs.iter().enumerate() {
        let legs: Vec<Phasor> = (0..vsc.legs.len())
            .map(|k| layout.leg_current(d, k).value(x) * b.i)
            .collect();
        device_current.insert(vsc.id.clone(), legs);
        if let Some(i) = layout.pdc[d] {
            dc_power.insert(vsc.id.clone(), x[i] * b.s);
        }
    }
    SystemState {
        voltage,
        branch_current,
        device_current,
        dc_power,
    }
}

/// Writes the voltages and branch currents of `state` into `x`, and derives
/// source and load currents from them.
pub fn x_from_state(
    net: &Network,
    layout: &Layout,
    state: &SystemState,
    x: &mut [f64],
) -> Result<()> {
    let b = layout.bases;
    for (k, bus) in net.buses.iter().enumerate() {
        let pc = state
            .voltage
            .get(&bus.id)
            .ok_or_else(|| Error::UnknownElement(bus.id.clone()))?;
        for c in Conductor::ALL {
            if let (Some(i), Some(v)) = (layout.v[k][c.index()], pc.get(c)) {
                x[i] = v.re / b.v;
                x[i + 1] = v.im / b.v;
            }
        }
    }
    for (k, br) in net.branches.iter().enumerate() {
        if let Some(pc) = state.branch_current.get(&br.id) {
            for c in Conductor::ALL {
                if let (Some(i), Some(v)) = (layout.ibr[k][c.index()], pc.get(c)) {
                    x[i] = v.re / b.i;
                    x[i + 1] = v.im / b.i;
                }
            }
        }
    }
    for (k, src) in net.sources.iter().enumerate() {
        if let Ok(i) = crate::power_flow::source_currents(net, state, k) {
            let _ = src;
            for c in Conductor::ALL {
                if let (Some(idx), Some(v)) = (layout.isrc[k][c.index()], i.get(c)) {
                    x[idx] = v.re / b.i;
                    x[idx + 1] = v.im / b.i;
                }
            }
        }
    }
    for (pl, &idx) in layout.loads.iter().zip(&layout.iload) {
        let v = layout.phase_voltage(net, pl.bus, pl.phase).value(x);
        if v.norm() > 0.0 {
            let i = (Phasor::new(pl.p, pl.q) / b.s / v).conj();
            x[idx] = i.re;
            x[idx + 1] = i.im;
        }
    }
    if let DeviceMode::Variables = layout.mode {
        for (d, vsc) in net.vscs.iter().enumerate() {
            if let Some(c) = state.device_current.get(&vsc.id) {
                for (k, &i) in c.iter().enumerate().take(vsc.legs.len()) {
                    let idx = layout.ileg[d][k];
                    x[idx] = i.re / b.i;
                    x[idx + 1] = i.im / b.i;
                }
            }
            if let (Some(idx), Some(p)) = (layout.pdc[d], state.dc_power.get(&vsc.id)) {
                x[idx] = p / b.s;
            }
        }
    }
    Ok(())
}

/// Squared-magnitude inequality `|z|² − limit² ≤ 0`.
pub fn magnitude_le(z: &CLin, limit: f64) -> Func {
    Func::new(
        Outer::SumSquares {
            shift: -limit * limit,
        },
        vec![z.re.clone(), z.im.clone()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn square_system_for_power_flow() {
        for net in [
            presets::demo_feeder(),
            presets::statcom_toy(),
            presets::sop_two_feeder(),
        ] {
            let fixed = net
                .vscs
                .iter()
                .map(|d| vec![Phasor::default(); d.legs.len()])
                .collect();
            let layout = Layout::new(&net, DeviceMode::Fixed(fixed), false).unwrap();
            let eq = network_equalities(&net, &layout).unwrap();
            assert_eq!(eq.len(), layout.n, "{}", net.name);
        }
    }

    #[test]
    fn products_match_complex_arithmetic() {
        let a = CLin::var(0).plus(
            &CLin::constant(Phasor::new(0.3, -0.2)),
            Phasor::new(1.0, 0.0),
        );
        let b = CLin::var(2);
        let x = [0.7, -1.1, 0.4, 2.5];
        let av = a.value(&x);
        let bv = b.value(&x);
        let (re, im) = product(&a, &b);
        assert!((Phasor::new(re.value(&x), im.value(&x)) - av * bv).norm() < 1e-14);
        let (re, im) = conj_product(&a, &b);
        assert!((Phasor::new(re.value(&x), im.value(&x)) - av * bv.conj()).norm() < 1e-14);
        assert!((norm_sqr(&a).value(&x) - av.norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn negative_sequence_form() {
        let net = presets::statcom_toy();
        let layout = Layout::new(&net, DeviceMode::Variables, false).unwrap();
        let x = flat_start(&net, &layout);
        let bus = net.bus_index("load").unwrap();
        assert!(layout.negative_sequence(&net, bus).value(&x).norm() < 1e-15);
    }
}
