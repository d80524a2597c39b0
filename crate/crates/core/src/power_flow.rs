//! Newton power flow on the rectangular current-voltage equations, and an
//! independent SI residual check used to verify any solved state.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::formulation::{flat_start, network_equalities, state_from_x, DeviceMode, Layout};
use crate::network::{admittance::block_admittance, Conductor, Grounding, Network, PerConductor};
use crate::nlp::{Func, Nlp};
use crate::phasor::Phasor;
use crate::power_quality::InductionMachine;
use crate::vsc::DcSourcePower;
use crate::{Error, Result};

/// Solved (or candidate) operating point in SI units.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemState {
    /// Node voltage to earth, V, per bus and conductor.
    pub voltage: BTreeMap<String, PerConductor<Phasor>>,
    /// Series current from `from_bus` to `to_bus`, A.
    pub branch_current: BTreeMap<String, PerConductor<Phasor>>,
    /// Leg current injected into the network, A, in leg order.
    pub device_current: BTreeMap<String, Vec<Phasor>>,
    /// dc source power, W, for converters whose source power is a range.
    #[serde(default)]
    pub dc_power: BTreeMap<String, f64>,
}

impl SystemState {
    pub fn voltage_at(&self, bus: &str, c: Conductor) -> Phasor {
        self.voltage
            .get(bus)
            .and_then(|v| v.get(c))
            .unwrap_or_default()
    }

    /// Leg terminal voltages of a converter, V.
    pub fn leg_voltages(&self, net: &Network, vsc: usize) -> Vec<Phasor> {
        net.vscs[vsc]
            .legs
            .iter()
            .map(|l| self.voltage_at(&l.bus, l.conductor))
            .collect()
    }

    pub fn operating_point(&self, net: &Network, vsc: usize) -> crate::vsc::VscOperatingPoint {
        let id = &net.vscs[vsc].id;
        crate::vsc::VscOperatingPoint {
            terminal_voltages: self.leg_voltages(net, vsc),
            leg_currents: self
                .device_current
                .get(id)
                .cloned()
                .unwrap_or_else(|| vec![Phasor::default(); net.vscs[vsc].legs.len()]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    /// A.
    pub kcl_inf_norm: f64,
    /// V, including the source Thevenin rows.
    pub ohm_inf_norm: f64,
    /// Largest of the current-balance mismatch in A and the dc power
    /// mismatch in kW.
    pub device_inf_norm: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.kcl_inf_norm
            .max(self.ohm_inf_norm)
            .max(self.device_inf_norm)
    }
}

/// Currents delivered by source `k` into its bus, `Z⁻¹(E − V)`.
pub fn source_currents(
    net: &Network,
    state: &SystemState,
    k: usize,
) -> Result<PerConductor<Phasor>> {
    let src = &net.sources[k];
    let bus = net.bus(&src.bus)?;
    let present: Vec<Conductor> = Conductor::ALL.into_iter().filter(|&c| bus.has(c)).collect();
    let y = block_admittance(&src.id, &src.short_circuit_impedance, &present)?;
    let emf = src.emf(bus.v_nominal);
    let dv = DVector::from_iterator(
        present.len(),
        present
            .iter()
            .map(|&c| emf[c.index()] - state.voltage_at(&bus.id, c)),
    );
    let i = y * dv;
    Ok(present
        .iter()
        .zip(i.iter())
        .map(|(&c, &v)| (c, v))
        .collect())
}

fn machine_per_phase(m: &InductionMachine) -> Phasor {
    Phasor::new(m.active_power_kw, m.reactive_power_kvar()) * (1e3 / 3.0)
}

/// Net current leaving each node through the network elements.
struct Injections<'a>(BTreeMap<(&'a str, Conductor), Phasor>);

impl<'a> Injections<'a> {
    fn add(&mut self, bus: &str, c: Conductor, i: Phasor) -> Result<()> {
        let slot = self
            .0
            .iter_mut()
            .find(|(k, _)| k.0 == bus && k.1 == c)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::UnknownElement(format!("{bus}.{c}")))?;
        *slot += i;
        Ok(())
    }
}

/// Mismatches of a state against the network equations, computed directly
/// in SI without the optimizer's variable layout.
pub fn residuals(net: &Network, state: &SystemState) -> Result<ResidualReport> {
    let mut inj = Injections(BTreeMap::new());
    for bus in &net.buses {
        if !state.voltage.contains_key(&bus.id) {
            return Err(Error::UnknownElement(bus.id.clone()));
        }
        for &c in &bus.conductors {
            inj.0.insert((bus.id.as_str(), c), Phasor::default());
        }
    }

    let mut ohm: f64 = 0.0;
    for br in &net.branches {
        let i = state
            .branch_current
            .get(&br.id)
            .ok_or_else(|| Error::UnknownElement(br.id.clone()))?;
        let conductors = net.branch_conductors(br);
        for &c in &conductors {
            let ic = i.get(c).unwrap_or_default();
            inj.add(&br.from_bus, c, ic)?;
            inj.add(&br.to_bus, c, -ic)?;
            let mut drop = state.voltage_at(&br.from_bus, c) - state.voltage_at(&br.to_bus, c);
            for &d in &conductors {
                drop -= br.impedance.get(c, d) * i.get(d).unwrap_or_default();
            }
            ohm = ohm.max(drop.norm());
        }
    }
    for (k, src) in net.sources.iter().enumerate() {
        for (c, i) in source_currents(net, state, k)?.iter() {
            inj.add(&src.bus, c, -i)?;
        }
    }

    let mut sinks: Vec<(&str, Conductor, Phasor)> = Vec::new();
    for l in &net.loads {
        for &ph in &l.phases {
            sinks.push((&l.bus, ph, Phasor::new(l.p_kw, l.q_kvar) * 1e3));
        }
    }
    for m in &net.machines {
        for ph in Conductor::PHASES {
            sinks.push((&m.bus, ph, machine_per_phase(m)));
        }
    }
    for (bus, phase, s) in sinks {
        let has_n = net.bus(bus)?.has(Conductor::N);
        let mut v = state.voltage_at(bus, phase);
        if has_n {
            v -= state.voltage_at(bus, Conductor::N);
        }
        let i = if v.norm() > 0.0 {
            (s / v).conj()
        } else {
            Phasor::new(f64::INFINITY, 0.0)
        };
        inj.add(bus, phase, i)?;
        if has_n {
            inj.add(bus, Conductor::N, -i)?;
        }
    }

    let mut device: f64 = 0.0;
    for (d, vsc) in net.vscs.iter().enumerate() {
        let op = state.operating_point(net, d);
        if op.leg_currents.len() != vsc.legs.len() {
            return Err(Error::LengthMismatch {
                expected: vsc.legs.len(),
                got: op.leg_currents.len(),
            });
        }
        for (leg, &i) in vsc.legs.iter().zip(&op.leg_currents) {
            inj.add(&leg.bus, leg.conductor, -i)?;
        }
        device = device.max(op.current_sum().norm());
        let p_ac = crate::vsc::dc_power(&op)?;
        let p_src = match vsc.dc_link.dc_source_power {
            DcSourcePower::Fixed(p) => p,
            DcSourcePower::Range { .. } => state.dc_power.get(&vsc.id).copied().unwrap_or(0.0),
        };
        device = device.max((p_ac - p_src).abs() / 1e3);
    }

    let mut kcl: f64 = 0.0;
    for bus in &net.buses {
        let solid = bus.grounding_resistance == Grounding::Solid;
        if let (true, Some(g)) = (bus.has(Conductor::N), bus.grounding_resistance.admittance()) {
            inj.add(
                &bus.id,
                Conductor::N,
                state.voltage_at(&bus.id, Conductor::N) * g,
            )?;
        }
        for &c in &bus.conductors {
            if c == Conductor::N && solid {
                // the bond holds the neutral at earth; its KCL closes through earth
                ohm = ohm.max(state.voltage_at(&bus.id, c).norm());
            } else {
                kcl = kcl.max(inj.0[&(bus.id.as_str(), c)].norm());
            }
        }
    }
    Ok(ResidualReport {
        kcl_inf_norm: kcl,
        ohm_inf_norm: ohm,
        device_inf_norm: device,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowOptions {
    /// Infinity-norm tolerance on the per-unit equations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        PowerFlowOptions {
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowResult {
    pub state: SystemState,
    pub iterations: usize,
    /// Final per-unit infinity norm.
    pub residual: f64,
}

/// Leg currents (A) per converter, in network order.
pub type DeviceSetpoints = Vec<Vec<Phasor>>;

/// All converters idle.
pub fn zero_setpoints(net: &Network) -> DeviceSetpoints {
    net.vscs
        .iter()
        .map(|d| vec![Phasor::default(); d.legs.len()])
        .collect()
}

pub fn solve(net: &Network, setpoints: &DeviceSetpoints) -> Result<PowerFlowResult> {
    solve_with(net, setpoints, PowerFlowOptions::default())
}

pub fn solve_with(
    net: &Network,
    setpoints: &DeviceSetpoints,
    opts: PowerFlowOptions,
) -> Result<PowerFlowResult> {
    net.ensure_valid()?;
    let layout = Layout::new(net, DeviceMode::Fixed(setpoints.clone()), false)?;
    let eqs: Vec<Func> = network_equalities(net, &layout)?
        .into_iter()
        .map(|(_, f)| f)
        .collect();
    let nlp = Nlp {
        n: layout.n,
        objective: Vec::new(),
        equalities: eqs,
        inequalities: Vec::new(),
    };
    let mut x = flat_start(net, &layout);
    newton(&nlp, &mut x, opts).map(|(iterations, residual)| PowerFlowResult {
        state: state_from_x(net, &layout, &x),
        iterations,
        residual,
    })
}

/// Newton iterations on `nlp.equalities(x) = 0` with dense LU.
pub(crate) fn newton(nlp: &Nlp, x: &mut [f64], opts: PowerFlowOptions) -> Result<(usize, f64)> {
    let mut f = Nlp::values(&nlp.equalities, x);
    let mut res = f.amax();
    for it in 0..opts.max_iter {
        if res < opts.tol {
            return Ok((it, res));
        }
        let j: DMatrix<f64> = nlp.jacobian(&nlp.equalities, x);
        let lu = j.lu();
        let dx: DVector<f64> = lu
            .solve(&(-&f))
            .ok_or(Error::SingularJacobian { iteration: it })?;
        if !dx.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularJacobian { iteration: it });
        }
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi += d;
        }
        f = Nlp::values(&nlp.equalities, x);
        res = f.amax();
        if !res.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it + 1,
                residual: res,
            });
        }
    }
    if res < opts.tol {
        return Ok((opts.max_iter, res));
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: res,
    })
}
