use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

use ripple_opf::network::Network;
use ripple_opf::phasor::{to_phase, to_sequence, PhaseTriple, Phasor, SequenceTriple};
use ripple_opf::power_quality::{check_vneg_limit, derating_factor, DeratingCurve};
use ripple_opf::presets;
use ripple_opf::vsc::{
    capacitor_ripple_phasors, gamma_locus, ripple_phasor, DcLinkSpec, VscOperatingPoint,
};

fn phasor() -> impl Strategy<Value = Phasor> {
    (-500.0..500.0f64, -500.0..500.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn triple() -> impl Strategy<Value = PhaseTriple> {
    (phasor(), phasor(), phasor()).prop_map(|(a, b, c)| PhaseTriple::new(a, b, c))
}

fn close(a: Phasor, b: Phasor, scale: f64, rel: f64) -> bool {
    (a - b).norm() <= rel * scale.max(1e-300)
}

fn scale_of(v: &[Phasor]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Fortescue basis built from `e^{-j2π/3}` powers, columns zero, positive, negative.
fn fortescue() -> Matrix3<Complex64> {
    let a = |k: f64| Complex64::from_polar(1.0, -2.0 * PI * k / 3.0);
    let one = Complex64::new(1.0, 0.0);
    Matrix3::new(one, one, one, one, a(1.0), a(2.0), one, a(2.0), a(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sequence_transform_matches_numeric_inverse(v in triple()) {
        let t = fortescue().try_inverse().unwrap();
        let want = t * Vector3::new(v.a, v.b, v.c);
        let got = to_sequence(v);
        let s = scale_of(&[v.a, v.b, v.c]);
        prop_assert!(close(got.zero, want[0], s, 1e-12));
        prop_assert!(close(got.positive, want[1], s, 1e-12));
        prop_assert!(close(got.negative, want[2], s, 1e-12));
    }

    #[test]
    fn phase_to_sequence_round_trip(v in triple()) {
        let back = to_phase(to_sequence(v));
        let s = scale_of(&[v.a, v.b, v.c]);
        prop_assert!(close(back.a, v.a, s, 1e-12));
        prop_assert!(close(back.b, v.b, s, 1e-12));
        prop_assert!(close(back.c, v.c, s, 1e-12));
    }

    #[test]
    fn sequence_to_phase_round_trip(z in phasor(), p in phasor(), n in phasor()) {
        let s = SequenceTriple::new(z, p, n);
        let back = to_sequence(to_phase(s));
        let m = scale_of(&[z, p, n]);
        prop_assert!(close(back.zero, z, m, 1e-12));
        prop_assert!(close(back.positive, p, m, 1e-12));
        prop_assert!(close(back.negative, n, m, 1e-12));
    }

    #[test]
    fn sequence_transform_is_linear(v in triple(), k in phasor()) {
        let lhs = to_sequence(v.scale(k));
        let rhs = to_sequence(v).scale(k);
        let s = scale_of(&[v.a, v.b, v.c]) * k.norm();
        prop_assert!(close(lhs.zero, rhs.zero, s, 1e-12));
        prop_assert!(close(lhs.positive, rhs.positive, s, 1e-12));
        prop_assert!(close(lhs.negative, rhs.negative, s, 1e-12));
    }

    #[test]
    fn ripple_equals_sequence_form(v in triple(), i in triple(), vn in phasor()) {
        let op = VscOperatingPoint {
            terminal_voltages: vec![v.a, v.b, v.c, vn],
            leg_currents: vec![i.a, i.b, i.c, -(i.a + i.b + i.c)],
        };
        let p = ripple_phasor(&op).unwrap();
        let sv = to_sequence(v);
        let si = to_sequence(i);
        let seq = 3.0 * (sv.zero * si.zero + sv.positive * si.negative + sv.negative * si.positive)
            + vn * op.leg_currents[3];
        let s = scale_of(&op.terminal_voltages) * scale_of(&op.leg_currents);
        prop_assert!(close(p, seq, s, 1e-12));
    }

    #[test]
    fn gamma_locus_keeps_phase_a_magnitude(g in 0.0..=1.0f64, m in 0.0..100.0f64, v in phasor()) {
        let op = gamma_locus(g, m, v).unwrap();
        prop_assert!((op.leg_currents[0].norm() - m).abs() <= 1e-9 * m.max(1.0));
        let n = -(op.leg_currents[0] + op.leg_currents[1] + op.leg_currents[2]);
        prop_assert!((op.leg_currents[3] - n).norm() <= 1e-9 * m.max(1.0));
        prop_assert!((n.norm() - 3.0 * (1.0 - g) * m).abs() <= 1e-9 * m.max(1.0));
    }

    #[test]
    fn gamma_locus_ripple_is_linear_in_gamma(g in 0.0..=1.0f64, m in 0.1..100.0f64, v in phasor()) {
        let full = ripple_phasor(&gamma_locus(1.0, m, v).unwrap()).unwrap().norm();
        let part = ripple_phasor(&gamma_locus(g, m, v).unwrap()).unwrap().norm();
        prop_assert!((part - g * full).abs() <= 1e-9 * full.max(1.0));
        prop_assert!((full - 3.0 * v.norm() * m).abs() <= 1e-9 * full.max(1.0));
    }

    #[test]
    fn capacitor_current_and_voltage_agree(p in phasor(), c in 1e-4..0.1f64, f in 40.0..70.0f64) {
        let spec = DcLinkSpec {
            capacitance: c,
            vdc_nominal: 700.0,
            esr_coefficient: 1e-3,
            ripple_limit: None,
            dc_source_power: Default::default(),
        };
        let (vr, ir) = capacitor_ripple_phasors(&spec, p, f).unwrap();
        let want = vr.norm() * 4.0 * PI * f * c;
        prop_assert!((ir.norm() - want).abs() <= 1e-12 * want.max(1e-300));
    }

    #[test]
    fn derating_stays_in_range(v in 0.0..1.0f64) {
        let d = derating_factor(&DeratingCurve::default(), v);
        prop_assert!((0.0..=100.0).contains(&d));
    }

    #[test]
    fn derating_decreases_between_knees(a in 0.01..0.05f64, b in 0.01..0.05f64) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let c = DeratingCurve::default();
        prop_assert!(derating_factor(&c, hi) < derating_factor(&c, lo));
    }

    #[test]
    fn vneg_check_ignores_common_rotation(v in triple(), theta in -PI..PI, lim in 0.0..0.1f64) {
        let v = v.scale(Complex64::new(1.0 / 240.0, 0.0));
        let r = v.scale(Complex64::from_polar(1.0, theta));
        let a = check_vneg_limit(v, lim).unwrap_or(0.0);
        let b = check_vneg_limit(r, lim).unwrap_or(0.0);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn bilinear_identity_over_many_triples() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let v = triple().new_tree(&mut runner).unwrap().current();
        let i = triple().new_tree(&mut runner).unwrap().current();
        let lhs = v.a * i.a + v.b * i.b + v.c * i.c;
        let sv = to_sequence(v);
        let si = to_sequence(i);
        let rhs = 3.0 * (sv.zero * si.zero + sv.positive * si.negative + sv.negative * si.positive);
        let s = scale_of(&[v.a, v.b, v.c]) * scale_of(&[i.a, i.b, i.c]);
        worst = worst.max((lhs - rhs).norm() / s);
    }
    assert!(worst < 1e-12, "worst relative error {worst}");
}

#[test]
fn bundled_networks_survive_json_round_trip() {
    for name in ["statcom_toy", "demo_feeder", "sop_two_feeder"] {
        let net = presets::network(name).unwrap();
        let back = Network::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(net, back, "{name}");
    }
}
