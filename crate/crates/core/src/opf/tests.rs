use super::*;
use crate::phasor::PhaseTriple;
use crate::presets;

fn no_device_max(p: &OpfProblem, branch: &str) -> f64 {
    let pf = power_flow::solve(&p.network, &power_flow::zero_setpoints(&p.network)).unwrap();
    branch_max_current(&pf.state, branch, &Conductor::ALL)
}

fn sequence_at(state: &SystemState, net: &Network, vsc: usize, bus: &str) -> (Phasor, Phasor) {
    let spec = &net.vscs[vsc];
    let currents = &state.device_current[&spec.id];
    let leg = |c| currents[spec.leg(c, bus).unwrap()];
    let v = |c| state.voltage_at(bus, c);
    let i = to_sequence(PhaseTriple::new(
        leg(Conductor::A),
        leg(Conductor::B),
        leg(Conductor::C),
    ));
    let u = to_sequence(PhaseTriple::new(
        v(Conductor::A),
        v(Conductor::B),
        v(Conductor::C),
    ));
    (u.positive, i.negative)
}

fn assert_verified(sol: &OpfSolution) {
    assert_eq!(sol.solver_stats.status, IpmStatus::LocalOptimum);
    assert!(
        sol.feasibility.residuals.max() < 1e-6,
        "{:?}",
        sol.feasibility.residuals
    );
    let v = sol.feasibility.verification.as_ref().unwrap();
    assert!(v.max() < 1e-6, "{v:?}");
}

#[test]
fn unconstrained_statcom_relieves_the_feeder() {
    let p = presets::case("case1a").unwrap();
    let before = no_device_max(&p, "feeder");
    let sol = solve_opf(&p, None).unwrap();
    assert_verified(&sol);
    assert!(
        before - sol.objective_value > 25.0,
        "{before} -> {}",
        sol.objective_value
    );
}

#[test]
fn three_wire_converter_carries_full_ripple() {
    let p = presets::case("case1b").unwrap();
    let sol = solve_opf(&p, None).unwrap();
    assert_verified(&sol);
    assert!(sol.neutral_current_per_vsc["statcom"] < 1e-6);
    let (vpos, _) = sequence_at(&sol.state, &p.network, 0, "load");
    let full = 3.0 * vpos.norm() * 30.0;
    let ripple = sol.ripple_per_vsc["statcom"];
    assert!((ripple - full).abs() <= 0.01 * full, "{ripple} vs {full}");
}

#[test]
fn ripple_free_converter_uses_zero_sequence_only() {
    let p = presets::case("case1c").unwrap();
    let sol = solve_opf(&p, None).unwrap();
    assert_verified(&sol);
    let kva = 3.0 * 240.0 * 30.0;
    assert!(sol.ripple_per_vsc["statcom"] < 1e-3 * kva);
    let currents = &sol.state.device_current["statcom"];
    let spec = &p.network.vscs[0];
    let phase = spec
        .legs
        .iter()
        .zip(currents)
        .filter(|(l, _)| l.conductor.is_phase())
        .map(|(_, i)| i.norm())
        .fold(0.0, f64::max);
    let neutral = sol.neutral_current_per_vsc["statcom"];
    assert!(
        (neutral - 3.0 * phase).abs() <= 0.01 * 3.0 * phase,
        "{neutral} vs {phase}"
    );
}

#[test]
fn tighter_limits_give_less_relief() {
    let before = no_device_max(&presets::case("case1a").unwrap(), "feeder");
    let a = solve_opf(&presets::case("case1a").unwrap(), None).unwrap();
    let d = solve_opf(&presets::case("case1d").unwrap(), None).unwrap();
    assert_verified(&a);
    assert_verified(&d);
    assert!(before - d.objective_value < before - a.objective_value);
    assert!(d.ripple_per_vsc["statcom"] <= 5000.0 * (1.0 + 1e-6));
    assert!(d.neutral_current_per_vsc["statcom"] <= 30.0 * (1.0 + 1e-6));
}

#[test]
fn zero_rated_converter_reproduces_power_flow() {
    let mut p = presets::case("case1a").unwrap();
    for leg in &mut p.network.vscs[0].legs {
        leg.i_max = Some(0.0);
    }
    let before = no_device_max(&p, "feeder");
    let sol = solve_opf(&p, None).unwrap();
    assert_verified(&sol);
    assert!((sol.objective_value - before).abs() < 1e-6 * before);
}

#[test]
fn relaxing_the_ripple_limit_never_hurts() {
    let mut last = f64::INFINITY;
    for lim in [0.0, 2000.0, 8000.0, 30000.0] {
        let mut p = presets::case("case1a").unwrap();
        p.network.vscs[0].dc_link.ripple_limit = Some(lim);
        let sol = solve_opf(&p, None).unwrap();
        assert_verified(&sol);
        assert!(
            sol.objective_value <= last + 1e-3,
            "limit {lim}: {} > {last}",
            sol.objective_value
        );
        last = sol.objective_value;
    }
}

#[test]
fn soft_open_point_cancels_ripple_between_feeders() {
    let p = presets::case("case2").unwrap();
    let net = &p.network;
    let sol = solve_opf(&p, None).unwrap();
    assert_verified(&sol);

    let (v1, i1) = sequence_at(&sol.state, net, 0, "f1_m2");
    let (_, i2) = sequence_at(&sol.state, net, 0, "f2_end");
    let diff = (i1.arg() - i2.arg()).to_degrees().rem_euclid(360.0);
    assert!((diff - 180.0).abs() <= 5.0, "angle difference {diff}");

    let one_sided = 3.0 * (v1 * i1).norm();
    assert!(sol.ripple_per_vsc["sop"] < 1e-3 * one_sided);

    let pf = power_flow::solve(net, &power_flow::zero_setpoints(net)).unwrap();
    let o = &p.objective;
    let base = derating_cost(
        &net.machines,
        &vneg_by_bus(net, &pf.state),
        o.derating_weight,
        &o.curve,
    )
    .unwrap();
    let after = derating_cost(
        &net.machines,
        &vneg_by_bus(net, &sol.state),
        o.derating_weight,
        &o.curve,
    )
    .unwrap();
    assert!(base > 0.0);
    assert!(after <= 0.1 * base, "{base} -> {after}");
}

#[test]
fn assembled_problem_matches_finite_differences() {
    for name in presets::CASES {
        let p = presets::case(name).unwrap();
        let asm = assemble(&p).unwrap();
        let x = starts(&p, &asm, None).remove(1);
        let funcs = asm
            .nlp
            .objective
            .iter()
            .chain(&asm.nlp.equalities)
            .chain(&asm.nlp.inequalities);
        for f in funcs {
            let g = f.gradient(&x);
            for (i, gi) in g.iter().enumerate() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += 1e-6;
                xm[i] -= 1e-6;
                let fd = (f.value(&xp) - f.value(&xm)) / 2e-6;
                assert!(
                    (fd - gi).abs() <= 1e-6 * fd.abs().max(1.0),
                    "{name} var {i}: {fd} vs {gi}"
                );
            }
        }
    }
}

#[test]
fn unknown_target_branch_is_rejected() {
    let mut p = presets::case("case1a").unwrap();
    p.objective.target_branch = Some("nope".into());
    assert!(matches!(solve_opf(&p, None), Err(Error::UnknownElement(_))));
}

#[test]
fn negative_ripple_weight_is_rejected() {
    let mut p = presets::case("case2").unwrap();
    p.objective.ripple_weight = -1.0;
    assert!(matches!(assemble(&p), Err(Error::InvalidParameter { .. })));
}
