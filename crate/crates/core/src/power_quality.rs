//! Negative-sequence voltage limits and induction-machine derating.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::phasor::{to_sequence, PhaseTriple};
use crate::{Error, Result};

/// Three-branch derating curve: no derating below `lower_knee`, `100 − g(v)`
/// with `g(v) = a0 + a1·v + a2·v²` up to `upper_knee`, full derating above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeratingCurve {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub lower_knee: f64,
    pub upper_knee: f64,
}

impl Default for DeratingCurve {
    fn default() -> Self {
        DeratingCurve {
            a0: 0.033125,
            a1: 2.75,
            a2: 56.25,
            lower_knee: 0.01,
            upper_knee: 0.05,
        }
    }
}

impl DeratingCurve {
    pub fn g(&self, v: f64) -> f64 {
        self.a0 + self.a1 * v + self.a2 * v * v
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower_knee < self.upper_knee) || self.lower_knee < 0.0 {
            return Err(Error::invalid(
                "derating_curve",
                "require 0 <= lower_knee < upper_knee",
            ));
        }
        if !(self.a0.is_finite() && self.a1.is_finite() && self.a2.is_finite()) {
            return Err(Error::invalid(
                "derating_curve",
                "coefficients must be finite",
            ));
        }
        Ok(())
    }

    /// Smooth stand-in for `100 − D(v)` used by the optimizer: `g` extended
    /// across both knees and clipped to [0, 100]. Returns the value and its
    /// first and second derivatives in `v`.
    pub fn surrogate(&self, v: f64) -> (f64, f64, f64) {
        let g = self.g(v);
        if g <= 0.0 {
            (0.0, 0.0, 0.0)
        } else if g >= 100.0 {
            (100.0, 0.0, 0.0)
        } else {
            (g, self.a1 + 2.0 * self.a2 * v, 2.0 * self.a2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionMachine {
    pub id: String,
    pub bus: String,
    pub rating_kva: f64,
    pub active_power_kw: f64,
    /// Lagging power factor.
    pub power_factor: f64,
}

impl InductionMachine {
    /// Reactive consumption implied by the power factor, kvar.
    pub fn reactive_power_kvar(&self) -> f64 {
        let pf = self.power_factor.clamp(f64::MIN_POSITIVE, 1.0);
        self.active_power_kw * (1.0 - pf * pf).sqrt() / pf
    }
}

/// Required derating in percent for a negative-sequence voltage `v_neg` in pu.
pub fn derating_factor(curve: &DeratingCurve, v_neg: f64) -> f64 {
    if v_neg < curve.lower_knee {
        100.0
    } else if v_neg < curve.upper_knee {
        100.0 - curve.g(v_neg)
    } else {
        0.0
    }
}

/// `w·Σ S·(100 − D(v_neg))` over all machines.
pub fn derating_cost(
    machines: &[InductionMachine],
    v_neg_by_bus: &BTreeMap<String, f64>,
    weight: f64,
    curve: &DeratingCurve,
) -> Result<f64> {
    let mut total = 0.0;
    for m in machines {
        let v = v_neg_by_bus.get(&m.bus).ok_or_else(|| {
            Error::UnknownElement(format!("no negative-sequence voltage for bus {}", m.bus))
        })?;
        total += m.rating_kva * (100.0 - derating_factor(curve, *v));
    }
    Ok(weight * total)
}

/// Negative-sequence magnitude of per-unit phase voltages.
pub fn vneg_magnitude(v_pu: PhaseTriple) -> f64 {
    to_sequence(v_pu).negative.norm()
}

/// Amount by which `|V⁻|` exceeds `limit` (both pu), or `None` when within it.
pub fn check_vneg_limit(v_pu: PhaseTriple, limit: f64) -> Option<f64> {
    let excess = vneg_magnitude(v_pu) - limit;
    (excess > 0.0).then_some(excess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasor::{alpha_power, polar_deg, Phasor};

    #[test]
    fn factor_branches() {
        let c = DeratingCurve::default();
        assert_eq!(derating_factor(&c, 0.005), 100.0);
        assert_eq!(derating_factor(&c, 0.06), 0.0);
        let expect = 100.0 - (56.25 * 0.0009 + 2.75 * 0.03 + 0.033125);
        assert!((derating_factor(&c, 0.03) - expect).abs() < 1e-12);
        assert!((expect - 99.83375).abs() < 1e-12);
    }

    #[test]
    fn cost_examples() {
        let c = DeratingCurve::default();
        let m = InductionMachine {
            id: "m".into(),
            bus: "b".into(),
            rating_kva: 12.0,
            active_power_kw: 10.0,
            power_factor: 0.85,
        };
        let at = |v: f64| BTreeMap::from([("b".to_string(), v)]);
        assert_eq!(
            derating_cost(std::slice::from_ref(&m), &at(0.004), 1.0, &c).unwrap(),
            0.0
        );
        let cost = derating_cost(std::slice::from_ref(&m), &at(0.03), 1.0, &c).unwrap();
        assert!((cost - 1.995).abs() < 1e-12);
        assert!(derating_cost(&[m], &BTreeMap::new(), 1.0, &c).is_err());
    }

    #[test]
    fn vneg_checks() {
        let one = Phasor::new(1.0, 0.0);
        assert!(check_vneg_limit(PhaseTriple::balanced(one), 0.02).is_none());

        let v = PhaseTriple::new(one, alpha_power(-1) * 0.97, alpha_power(-2) * 1.03);
        // V⁻ = (Va + α²Vb + αVc)/3 = (1 + 0.97α + 1.03α²)/3
        let direct = (one + alpha_power(1) * 0.97 + alpha_power(2) * 1.03) / 3.0;
        assert!((vneg_magnitude(v) - direct.norm()).abs() < 1e-15);

        let pos = PhaseTriple::balanced(polar_deg(1.0, 0.0));
        let neg =
            PhaseTriple::new(one, alpha_power(-2), alpha_power(-1)).scale(Phasor::new(0.0318, 0.0));
        let excess = check_vneg_limit(pos + neg, 0.02).unwrap();
        assert!((excess - 0.0118).abs() < 1e-12);
    }

    #[test]
    fn surrogate_matches_g_and_derivatives() {
        let c = DeratingCurve::default();
        for v in [0.0, 0.004, 0.02, 0.049, 0.2] {
            let (s, d1, d2) = c.surrogate(v);
            assert!((s - c.g(v)).abs() < 1e-15);
            let h = 1e-6;
            assert!((d1 - (c.g(v + h) - c.g(v - h)) / (2.0 * h)).abs() < 1e-6);
            assert_eq!(d2, 112.5);
        }
        assert_eq!(c.surrogate(5.0).0, 100.0);
    }

    #[test]
    fn machine_reactive_power() {
        let m = InductionMachine {
            id: "m".into(),
            bus: "b".into(),
            rating_kva: 12.0,
            active_power_kw: 8.5,
            power_factor: 0.85,
        };
        assert!((m.reactive_power_kvar() - 8.5 * (1.0f64 - 0.7225).sqrt() / 0.85).abs() < 1e-12);
    }
}
