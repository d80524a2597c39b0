//! Optimal power flow with converter ripple constraints: assembly into a
//! smooth NLP, multi-start interior-point solve, verification and a
//! parallel timeseries driver.

mod series;

pub use series::{duration_curve, run_timeseries, SeriesResult, StepRecord};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::formulation::{
    flat_start, magnitude_le, network_equalities, norm_sqr, state_from_x, x_from_state,
    ConstraintKind, DeviceMode, Layout,
};
use crate::network::{Conductor, Network};
use crate::nlp::{self, Func, IpmOptions, IpmStatus, Nlp, Outer, QuadForm};
use crate::phasor::{to_sequence, PhaseTriple, Phasor};
use crate::power_flow::{self, ResidualReport, SystemState};
use crate::power_quality::{derating_cost, DeratingCurve};
use crate::vsc::DcSourcePower;
use crate::{Error, Result};

/// Smoothing radius of the derating surrogate, pu of `|V⁻|`.
pub const DERATING_EPS: f64 = 1e-3;
/// Smoothing radius of the ripple term, W.
pub const RIPPLE_EPS_W: f64 = 100.0;
/// Weight of `Σ|I_leg|²` (pu) added to the optimized objective. It picks one
/// point out of the otherwise flat set of equivalent converter current
/// patterns and is left out of every reported objective value.
pub const LEG_REGULARIZATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Minimize the largest current magnitude on the target branch.
    MinMaxPhaseCurrent,
    /// Machine derating cost plus `β·|ripple|`.
    DeratingPlusRipple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_branch: Option<String>,
    /// Currency per (kVA·%).
    #[serde(default = "default_weight")]
    pub derating_weight: f64,
    /// β, per W of ripple.
    #[serde(default = "default_beta")]
    pub ripple_weight: f64,
    #[serde(default)]
    pub curve: DeratingCurve,
}

fn default_weight() -> f64 {
    1.0
}

fn default_beta() -> f64 {
    1e-4
}

impl ObjectiveSpec {
    pub fn min_max_current(target_branch: impl Into<String>) -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::MinMaxPhaseCurrent,
            target_branch: Some(target_branch.into()),
            derating_weight: default_weight(),
            ripple_weight: default_beta(),
            curve: DeratingCurve::default(),
        }
    }

    pub fn derating_plus_ripple(weight: f64, beta: f64) -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::DeratingPlusRipple,
            target_branch: None,
            derating_weight: weight,
            ripple_weight: beta,
            curve: DeratingCurve::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintToggles {
    pub ripple_limit: bool,
    pub vneg_limit: bool,
    pub voltage_bounds: bool,
    pub ampacity: bool,
}

impl Default for ConstraintToggles {
    fn default() -> Self {
        ConstraintToggles {
            ripple_limit: true,
            vneg_limit: true,
            voltage_bounds: true,
            ampacity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfProblem {
    pub network: Network,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub toggles: ConstraintToggles,
}

/// The NLP plus the bookkeeping needed to read a solution back.
#[derive(Debug, Clone)]
pub struct AssembledOpf {
    pub nlp: Nlp,
    pub layout: Layout,
    pub equality_kinds: Vec<ConstraintKind>,
    pub inequality_kinds: Vec<ConstraintKind>,
    /// Indices into `nlp.objective` of the derating surrogate terms.
    pub derating_terms: Vec<usize>,
    /// Index into `nlp.objective` of the leg-current regularization.
    pub regularization: Option<usize>,
}

/// Branch an OF1 objective monitors when none is named: the first branch
/// leaving a source bus.
pub fn default_target_branch(net: &Network) -> Option<String> {
    net.sources.iter().find_map(|s| {
        net.branches
            .iter()
            .find(|b| b.from_bus == s.bus || b.to_bus == s.bus)
            .map(|b| b.id.clone())
    })
}

fn target_branch(problem: &OpfProblem) -> Result<usize> {
    let id = problem
        .objective
        .target_branch
        .clone()
        .or_else(|| default_target_branch(&problem.network))
        .ok_or_else(|| Error::invalid("target_branch", "network has no branch at a source"))?;
    problem
        .network
        .branch_index(&id)
        .ok_or(Error::UnknownElement(id))
}

pub fn assemble(problem: &OpfProblem) -> Result<AssembledOpf> {
    let net = &problem.network;
    let obj = &problem.objective;
    let tg = problem.toggles;
    if !(obj.ripple_weight >= 0.0) || !obj.ripple_weight.is_finite() {
        return Err(Error::invalid("ripple_weight", "must be finite and >= 0"));
    }
    if !(obj.derating_weight >= 0.0) || !obj.derating_weight.is_finite() {
        return Err(Error::invalid("derating_weight", "must be finite and >= 0"));
    }
    obj.curve.validate()?;

    let of1 = obj.kind == ObjectiveKind::MinMaxPhaseCurrent;
    let target = if of1 {
        Some(target_branch(problem)?)
    } else {
        None
    };
    let layout = Layout::new(net, DeviceMode::Variables, of1)?;
    let b = layout.bases;

    let mut eq: Vec<(ConstraintKind, Func)> = network_equalities(net, &layout)?;
    let mut ineq: Vec<(ConstraintKind, Func)> = Vec::new();

    for (d, vsc) in net.vscs.iter().enumerate() {
        let mut sum = crate::formulation::CLin::default();
        for k in 0..vsc.legs.len() {
            sum.add(&layout.leg_current(d, k), Phasor::new(1.0, 0.0));
        }
        let kind = ConstraintKind::CurrentBalance {
            vsc: vsc.id.clone(),
        };
        eq.push((kind.clone(), Func::quad(sum.re)));
        eq.push((kind, Func::quad(sum.im)));

        let mut p = layout.dc_power(net, d);
        match (vsc.dc_link.dc_source_power, layout.pdc[d]) {
            (DcSourcePower::Fixed(w), _) => {
                p.add_const(-w / b.s);
            }
            (DcSourcePower::Range { min, max }, Some(k)) => {
                p.add_lin(k, -1.0);
                let mut lo = QuadForm::constant(min / b.s);
                lo.add_lin(k, -1.0);
                let mut hi = QuadForm::var(k);
                hi.add_const(-max / b.s);
                ineq.push((
                    ConstraintKind::DcSourceMin {
                        vsc: vsc.id.clone(),
                    },
                    Func::quad(lo),
                ));
                ineq.push((
                    ConstraintKind::DcSourceMax {
                        vsc: vsc.id.clone(),
                    },
                    Func::quad(hi),
                ));
            }
            (DcSourcePower::Range { .. }, None) => {
                unreachable!("layout allocates a dc power variable")
            }
        }
        eq.push((
            ConstraintKind::DcPower {
                vsc: vsc.id.clone(),
            },
            Func::quad(p),
        ));

        for (k, leg) in vsc.legs.iter().enumerate() {
            let i = layout.leg_current(d, k);
            match leg.i_max {
                Some(m) if m < 0.0 || !m.is_finite() => {
                    return Err(Error::invalid("i_max", format!("leg {}", leg.id)))
                }
                Some(0.0) => {
                    let kind = ConstraintKind::LegOff {
                        vsc: vsc.id.clone(),
                        leg: leg.id.clone(),
                    };
                    eq.push((kind.clone(), Func::quad(i.re)));
                    eq.push((kind, Func::quad(i.im)));
                }
                Some(m) => ineq.push((
                    ConstraintKind::LegAmpacity {
                        vsc: vsc.id.clone(),
                        leg: leg.id.clone(),
                    },
                    magnitude_le(&i, m / b.i),
                )),
                None => {}
            }
        }

        if tg.ripple_limit {
            if let Some(lim) = vsc.dc_link.ripple_limit {
                if lim < 0.0 || !lim.is_finite() {
                    return Err(Error::invalid(
                        "ripple_limit",
                        format!("converter {}", vsc.id),
                    ));
                }
                let (re, im) = layout.ripple(net, d);
                if lim == 0.0 {
                    let kind = ConstraintKind::RippleZero {
                        vsc: vsc.id.clone(),
                    };
                    eq.push((kind.clone(), Func::quad(re)));
                    eq.push((kind, Func::quad(im)));
                } else {
                    let l = lim / b.s;
                    ineq.push((
                        ConstraintKind::RippleLimit {
                            vsc: vsc.id.clone(),
                        },
                        Func::new(Outer::SumSquares { shift: -l * l }, vec![re, im]),
                    ));
                }
            }
        }
    }

    for (k, bus) in net.buses.iter().enumerate() {
        let three_phase = Conductor::PHASES.iter().all(|&c| bus.has(c));
        if tg.vneg_limit {
            if let Some(lim) = bus.vneg_limit {
                if !three_phase {
                    return Err(Error::Unsupported(format!(
                        "negative-sequence limit on bus {} without three phases",
                        bus.id
                    )));
                }
                let v = layout.negative_sequence(net, k);
                ineq.push((
                    ConstraintKind::VnegLimit {
                        bus: bus.id.clone(),
                    },
                    magnitude_le(&v, lim),
                ));
            }
        }
        if tg.voltage_bounds {
            let scale = b.v / bus.v_nominal;
            for c in Conductor::PHASES.into_iter().filter(|&c| bus.has(c)) {
                let v = layout.phase_voltage(net, k, c);
                let m2 = norm_sqr(&v).scaled(scale * scale);
                let mut lo = m2.scaled(-1.0);
                lo.add_const(bus.v_min * bus.v_min);
                let mut hi = m2;
                hi.add_const(-bus.v_max * bus.v_max);
                ineq.push((
                    ConstraintKind::VoltageMin {
                        bus: bus.id.clone(),
                        phase: c,
                    },
                    Func::quad(lo),
                ));
                ineq.push((
                    ConstraintKind::VoltageMax {
                        bus: bus.id.clone(),
                        phase: c,
                    },
                    Func::quad(hi),
                ));
            }
        }
    }
    if tg.ampacity {
        for (k, br) in net.branches.iter().enumerate() {
            for (c, amp) in br.ampacity.iter() {
                if layout.ibr[k][c.index()].is_some() {
                    ineq.push((
                        ConstraintKind::BranchAmpacity {
                            branch: br.id.clone(),
                            conductor: c,
                        },
                        magnitude_le(&layout.branch_current(k, c), amp / b.i),
                    ));
                }
            }
        }
    }

    let mut objective = Vec::new();
    let mut derating_terms = Vec::new();
    match (obj.kind, target, layout.t) {
        (ObjectiveKind::MinMaxPhaseCurrent, Some(br), Some(t)) => {
            objective.push(Func::quad(QuadForm::var(t)));
            for c in net.branch_conductors(&net.branches[br]) {
                let mut q = norm_sqr(&layout.branch_current(br, c));
                q.add_quad(t, t, -1.0);
                ineq.push((ConstraintKind::Epigraph { conductor: c }, Func::quad(q)));
            }
            let mut sign = QuadForm::new();
            sign.add_lin(t, -1.0);
            ineq.push((ConstraintKind::EpigraphSign, Func::quad(sign)));
        }
        (ObjectiveKind::DeratingPlusRipple, _, _) => {
            for m in &net.machines {
                let bus = net
                    .bus_index(&m.bus)
                    .ok_or_else(|| Error::UnknownElement(m.bus.clone()))?;
                if !Conductor::PHASES.iter().all(|&c| net.buses[bus].has(c)) {
                    return Err(Error::Unsupported(format!(
                        "machine {} on a bus without three phases",
                        m.id
                    )));
                }
                let v = layout.negative_sequence(net, bus);
                derating_terms.push(objective.len());
                objective.push(Func::new(
                    Outer::Derating {
                        scale: obj.derating_weight * m.rating_kva,
                        curve: obj.curve,
                        eps: DERATING_EPS,
                    },
                    vec![v.re, v.im],
                ));
            }
            if obj.ripple_weight > 0.0 {
                let k = obj.ripple_weight * b.s;
                for d in 0..net.vscs.len() {
                    let (re, im) = layout.ripple(net, d);
                    objective.push(Func::new(
                        Outer::SmoothNorm {
                            eps: obj.ripple_weight * RIPPLE_EPS_W,
                        },
                        vec![re.scaled(k), im.scaled(k)],
                    ));
                }
            }
        }
        _ => unreachable!("target and epigraph exist for OF1"),
    }

    let mut reg = QuadForm::new();
    for legs in &layout.ileg {
        for &idx in legs {
            reg.add_quad(idx, idx, LEG_REGULARIZATION);
            reg.add_quad(idx + 1, idx + 1, LEG_REGULARIZATION);
        }
    }
    let regularization = if reg.quad.is_empty() {
        None
    } else {
        objective.push(Func::quad(reg));
        Some(objective.len() - 1)
    };

    let (equality_kinds, equalities): (Vec<_>, Vec<_>) = eq.into_iter().unzip();
    let (inequality_kinds, inequalities): (Vec<_>, Vec<_>) = ineq.into_iter().unzip();
    Ok(AssembledOpf {
        nlp: Nlp {
            n: layout.n,
            objective,
            equalities,
            inequalities,
        },
        layout,
        equality_kinds,
        inequality_kinds,
        derating_terms,
        regularization,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub residuals: ResidualReport,
    /// Largest positive inequality value of the assembled problem, pu.
    pub max_inequality_violation: f64,
    /// Residuals after re-solving the power flow with the converter currents
    /// frozen at their optimal values.
    pub verification: Option<ResidualReport>,
    /// Largest voltage difference between the optimum and the re-solved
    /// power flow, V.
    pub verification_voltage_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: IpmStatus,
    pub iterations: usize,
    pub restorations: usize,
    /// Which of the deterministic starting points produced the result.
    pub start: usize,
    pub eq_violation: f64,
    pub ineq_violation: f64,
    pub stationarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfSolution {
    pub state: SystemState,
    /// Exact objective (true maximum current in A, or piecewise derating
    /// cost plus `β·|ripple|`).
    pub objective_value: f64,
    /// Smooth surrogate value the optimizer minimized, OF2 only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate_value: Option<f64>,
    /// `|Σ V·I|`, W.
    pub ripple_per_vsc: BTreeMap<String, f64>,
    pub ripple_phasor_per_vsc: BTreeMap<String, Phasor>,
    /// Largest neutral-leg current magnitude, A.
    pub neutral_current_per_vsc: BTreeMap<String, f64>,
    pub feasibility: Feasibility,
    pub solver_stats: SolverStats,
}

/// Negative-sequence magnitude (pu of the bus nominal) of every three-phase bus.
pub fn vneg_by_bus(net: &Network, state: &SystemState) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for bus in &net.buses {
        if !Conductor::PHASES.iter().all(|&c| bus.has(c)) {
            continue;
        }
        let vn = if bus.has(Conductor::N) {
            state.voltage_at(&bus.id, Conductor::N)
        } else {
            Phasor::default()
        };
        let v = |c| (state.voltage_at(&bus.id, c) - vn) / bus.v_nominal;
        let s = to_sequence(PhaseTriple::new(
            v(Conductor::A),
            v(Conductor::B),
            v(Conductor::C),
        ));
        out.insert(bus.id.clone(), s.negative.norm());
    }
    out
}

pub fn ripple_of(net: &Network, state: &SystemState, vsc: usize) -> Result<Phasor> {
    crate::vsc::ripple_phasor(&state.operating_point(net, vsc))
}

/// Largest current magnitude over the given conductors of a branch, A.
pub fn branch_max_current(state: &SystemState, branch: &str, conductors: &[Conductor]) -> f64 {
    state
        .branch_current
        .get(branch)
        .map(|pc| {
            conductors
                .iter()
                .filter_map(|&c| pc.get(c))
                .map(|i| i.norm())
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0)
}

/// Exact objective of a state: the true maximum current for OF1, and the
/// piecewise derating cost plus `β·Σ|ripple|` for OF2.
pub fn evaluate_objective(problem: &OpfProblem, state: &SystemState) -> Result<f64> {
    let net = &problem.network;
    match problem.objective.kind {
        ObjectiveKind::MinMaxPhaseCurrent => {
            let br = target_branch(problem)?;
            let branch = &net.branches[br];
            Ok(branch_max_current(
                state,
                &branch.id,
                &net.branch_conductors(branch),
            ))
        }
        ObjectiveKind::DeratingPlusRipple => {
            let o = &problem.objective;
            let vneg = vneg_by_bus(net, state);
            let mut total = derating_cost(&net.machines, &vneg, o.derating_weight, &o.curve)?;
            for d in 0..net.vscs.len() {
                total += o.ripple_weight * ripple_of(net, state, d)?.norm();
            }
            Ok(total)
        }
    }
}

/// Deterministic starting points: the uncompensated power flow (or warm
/// start), the same with a small rotating leg-current pattern, and the flat
/// profile.
fn starts(problem: &OpfProblem, asm: &AssembledOpf, warm: Option<&SystemState>) -> Vec<Vec<f64>> {
    let net = &problem.network;
    let layout = &asm.layout;
    let flat = flat_start(net, layout);
    let base_state = match warm {
        Some(s) => Some(s.clone()),
        None => power_flow::solve(net, &power_flow::zero_setpoints(net))
            .ok()
            .map(|r| r.state),
    };
    let mut base = flat.clone();
    if let Some(s) = &base_state {
        if x_from_state(net, layout, s, &mut base).is_err() {
            base = flat.clone();
        }
    }
    let mut perturbed = base.clone();
    for legs in &layout.ileg {
        let n = legs.len().max(1) as f64;
        for (k, &idx) in legs.iter().enumerate() {
            let a = std::f64::consts::TAU * k as f64 / n + 0.3;
            perturbed[idx] += 0.02 * a.cos();
            perturbed[idx + 1] += 0.02 * a.sin();
        }
    }
    let mut out = vec![base, perturbed, flat];
    if let Some(t) = layout.t {
        for x in &mut out {
            let m = asm
                .nlp
                .inequalities
                .iter()
                .zip(&asm.inequality_kinds)
                .filter(|(_, k)| matches!(k, ConstraintKind::Epigraph { .. }))
                .map(|(f, _)| {
                    x[t] = 0.0;
                    f.value(x).max(0.0).sqrt()
                })
                .fold(0.0, f64::max);
            x[t] = 1.05 * m + 0.05;
        }
    }
    out
}

fn ripple_total(net: &Network, state: &SystemState) -> f64 {
    (0..net.vscs.len())
        .filter_map(|d| ripple_of(net, state, d).ok())
        .map(|p| p.norm())
        .sum()
}

pub fn solve_opf(problem: &OpfProblem, warm_start: Option<&SystemState>) -> Result<OpfSolution> {
    solve_opf_with(problem, warm_start, &IpmOptions::default())
}

pub fn solve_opf_with(
    problem: &OpfProblem,
    warm_start: Option<&SystemState>,
    opts: &IpmOptions,
) -> Result<OpfSolution> {
    let net = &problem.network;
    net.ensure_valid()?;
    let asm = assemble(problem)?;

    let mut candidates = Vec::new();
    for (k, x0) in starts(problem, &asm, warm_start).into_iter().enumerate() {
        let r = nlp::solve(&asm.nlp, &x0, opts);
        if r.x.iter().all(|v| v.is_finite()) {
            log::debug!(
                "start {k}: {:?} after {} iterations, objective {:.6e}",
                r.status,
                r.iterations,
                r.objective
            );
            candidates.push((k, r));
        }
    }
    let rank = |s: IpmStatus| match s {
        IpmStatus::LocalOptimum => 0,
        IpmStatus::MaxIter => 1,
        IpmStatus::InfeasibleDetected => 2,
    };
    let scored: Vec<_> = candidates
        .into_iter()
        .map(|(k, r)| {
            let state = state_from_x(net, &asm.layout, &r.x);
            let ripple = ripple_total(net, &state);
            let viol = r.eq_violation.max(r.ineq_violation);
            (k, r, state, ripple, viol)
        })
        .collect();
    let best = scored
        .into_iter()
        .min_by(|a, b| {
            let key = |c: &(usize, nlp::IpmResult, SystemState, f64, f64)| {
                let feasible = c.1.status == IpmStatus::LocalOptimum;
                // infeasible candidates are ranked by violation instead of objective
                (
                    rank(c.1.status),
                    if feasible { c.1.objective } else { c.4 },
                    c.3,
                )
            };
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
                .then(a.0.cmp(&b.0))
        })
        .ok_or_else(|| Error::SolverBreakdown("every start produced non-finite iterates".into()))?;
    let (start, r, state, _, _) = best;

    let objective_value = evaluate_objective(problem, &state)?;
    let surrogate_value = if problem.objective.kind == ObjectiveKind::DeratingPlusRipple {
        let x = &r.x;
        let surrogate: f64 = asm
            .derating_terms
            .iter()
            .map(|&i| asm.nlp.objective[i].value(x))
            .sum();
        let o = &problem.objective;
        let exact = derating_cost(
            &net.machines,
            &vneg_by_bus(net, &state),
            o.derating_weight,
            &o.curve,
        )?;
        let rating: f64 = net.machines.iter().map(|m| m.rating_kva).sum();
        let limit = 1e-3 * o.derating_weight * rating * 100.0;
        if (surrogate - exact).abs() > limit {
            return Err(Error::SurrogateMismatch {
                gap: (surrogate - exact).abs(),
                limit,
            });
        }
        let reg = asm
            .regularization
            .map_or(0.0, |i| asm.nlp.objective[i].value(x));
        Some(asm.nlp.objective_value(x) - reg)
    } else {
        None
    };

    let mut ripple_per_vsc = BTreeMap::new();
    let mut ripple_phasor_per_vsc = BTreeMap::new();
    let mut neutral_current_per_vsc = BTreeMap::new();
    for (d, vsc) in net.vscs.iter().enumerate() {
        let p = ripple_of(net, &state, d)?;
        ripple_per_vsc.insert(vsc.id.clone(), p.norm());
        ripple_phasor_per_vsc.insert(vsc.id.clone(), p);
        let currents = &state.device_current[&vsc.id];
        let n = vsc
            .legs
            .iter()
            .zip(currents)
            .filter(|(l, _)| l.conductor == Conductor::N)
            .map(|(_, i)| i.norm())
            .fold(0.0, f64::max);
        neutral_current_per_vsc.insert(vsc.id.clone(), n);
    }

    let residuals = power_flow::residuals(net, &state)?;
    let max_inequality_violation = Nlp::values(&asm.nlp.inequalities, &r.x)
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v));
    let (verification, verification_voltage_gap) = match verify(net, &state) {
        Ok((rep, gap)) => (Some(rep), Some(gap)),
        Err(e) => {
            log::warn!("frozen-device power flow failed: {e}");
            (None, None)
        }
    };

    Ok(OpfSolution {
        state,
        objective_value,
        surrogate_value,
        ripple_per_vsc,
        ripple_phasor_per_vsc,
        neutral_current_per_vsc,
        feasibility: Feasibility {
            residuals,
            max_inequality_violation,
            verification,
            verification_voltage_gap,
        },
        solver_stats: SolverStats {
            status: r.status,
            iterations: r.iterations,
            restorations: r.restorations,
            start,
            eq_violation: r.eq_violation,
            ineq_violation: r.ineq_violation,
            stationarity: r.stationarity,
        },
    })
}

/// Re-solves the power flow with the converter currents of `state` frozen
/// and returns the residuals of the re-solved state and the largest voltage
/// difference to `state`.
pub fn verify(net: &Network, state: &SystemState) -> Result<(ResidualReport, f64)> {
    let setpoints: Vec<Vec<Phasor>> = net
        .vscs
        .iter()
        .map(|d| {
            state
                .device_current
                .get(&d.id)
                .cloned()
                .unwrap_or_else(|| vec![Phasor::default(); d.legs.len()])
        })
        .collect();
    let mut pf = power_flow::solve(net, &setpoints)?.state;
    pf.dc_power = state.dc_power.clone();
    let report = power_flow::residuals(net, &pf)?;
    let mut gap: f64 = 0.0;
    for (bus, pc) in &pf.voltage {
        for (c, v) in pc.iter() {
            gap = gap.max((v - state.voltage_at(bus, c)).norm());
        }
    }
    Ok((report, gap))
}

#[cfg(test)]
mod tests;
