//! Generic n-leg two-level converter: leg limits, current balance, dc power,
//! the 2ω ripple phasor and dc-link capacitor quantities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::network::Conductor;
use crate::phasor::{alpha_power, Phasor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Statcom,
    SoftOpenPoint,
    #[serde(rename = "interconnected_4w")]
    Interconnected4w,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegSpec {
    pub id: String,
    pub bus: String,
    pub conductor: Conductor,
    /// Leg ampacity in A RMS. `None` leaves the leg unconstrained; `Some(0.0)`
    /// removes the leg (for example the neutral leg of a three-wire device).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_max: Option<f64>,
}

/// Power delivered into the dc link by its source, W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DcSourcePower {
    Fixed(f64),
    Range { min: f64, max: f64 },
}

impl Default for DcSourcePower {
    fn default() -> Self {
        DcSourcePower::Fixed(0.0)
    }
}

impl DcSourcePower {
    pub fn is_consistent(&self) -> bool {
        match *self {
            DcSourcePower::Fixed(p) => p.is_finite(),
            DcSourcePower::Range { min, max } => min <= max,
        }
    }
}

fn default_esr() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcLinkSpec {
    /// F
    pub capacitance: f64,
    /// V
    pub vdc_nominal: f64,
    /// Ω·F, with ESR = k / C.
    #[serde(default = "default_esr")]
    pub esr_coefficient: f64,
    /// Bound on the 2ω ripple magnitude in W; `None` is unconstrained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ripple_limit: Option<f64>,
    #[serde(default)]
    pub dc_source_power: DcSourcePower,
}

impl DcLinkSpec {
    fn check(&self) -> Result<()> {
        if !(self.capacitance > 0.0) {
            return Err(Error::invalid("capacitance", "must be positive"));
        }
        if !(self.vdc_nominal > 0.0) {
            return Err(Error::invalid("vdc_nominal", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VscSpec {
    pub id: String,
    pub topology: Topology,
    pub legs: Vec<LegSpec>,
    pub dc_link: DcLinkSpec,
}

impl VscSpec {
    pub fn leg(&self, conductor: Conductor, bus: &str) -> Option<usize> {
        self.legs
            .iter()
            .position(|l| l.conductor == conductor && l.bus == bus)
    }
}

/// Terminal voltages (V) and injected currents (A), one per leg.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VscOperatingPoint {
    pub terminal_voltages: Vec<Phasor>,
    pub leg_currents: Vec<Phasor>,
}

impl VscOperatingPoint {
    fn check_len(&self) -> Result<()> {
        if self.terminal_voltages.len() != self.leg_currents.len() {
            return Err(Error::LengthMismatch {
                expected: self.terminal_voltages.len(),
                got: self.leg_currents.len(),
            });
        }
        Ok(())
    }

    pub fn current_sum(&self) -> Phasor {
        self.leg_currents.iter().sum()
    }
}

/// Per-leg 2ω ripple phasor `V·I` (not conjugated), W.
pub fn leg_ripple_phasor(v: Phasor, i: Phasor) -> Phasor {
    v * i
}

/// dc-side active power `Σ Re(V·I*)`, W.
pub fn dc_power(op: &VscOperatingPoint) -> Result<f64> {
    op.check_len()?;
    Ok(op
        .terminal_voltages
        .iter()
        .zip(&op.leg_currents)
        .map(|(v, i)| (v * i.conj()).re)
        .sum())
}

/// dc-link 2ω ripple phasor `Σ V·I` over every leg sharing the link, W.
pub fn ripple_phasor(op: &VscOperatingPoint) -> Result<Phasor> {
    op.check_len()?;
    Ok(op
        .terminal_voltages
        .iter()
        .zip(&op.leg_currents)
        .map(|(&v, &i)| leg_ripple_phasor(v, i))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum Violation {
    /// `|I| − i_max`, A.
    LegCurrent { leg: String, excess: f64 },
    /// `|Σ I|`, A.
    CurrentBalance { excess: f64 },
    /// `|P| − limit`, W.
    RippleLimit { excess: f64 },
}

impl Violation {
    pub fn magnitude(&self) -> f64 {
        match self {
            Violation::LegCurrent { excess, .. }
            | Violation::CurrentBalance { excess }
            | Violation::RippleLimit { excess } => *excess,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub balance: f64,
    pub current: f64,
    pub ripple: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            balance: 1e-6,
            current: 1e-6,
            ripple: 1e-6,
        }
    }
}

pub fn check_constraints(spec: &VscSpec, op: &VscOperatingPoint) -> Result<Vec<Violation>> {
    check_constraints_with(spec, op, Tolerances::default())
}

pub fn check_constraints_with(
    spec: &VscSpec,
    op: &VscOperatingPoint,
    tol: Tolerances,
) -> Result<Vec<Violation>> {
    op.check_len()?;
    if op.leg_currents.len() != spec.legs.len() {
        return Err(Error::LengthMismatch {
            expected: spec.legs.len(),
            got: op.leg_currents.len(),
        });
    }
    let mut out = Vec::new();
    for (leg, i) in spec.legs.iter().zip(&op.leg_currents) {
        if let Some(max) = leg.i_max {
            let excess = i.norm() - max;
            if excess > tol.current {
                out.push(Violation::LegCurrent {
                    leg: leg.id.clone(),
                    excess,
                });
            }
        }
    }
    let imbalance = op.current_sum().norm();
    if imbalance > tol.balance {
        out.push(Violation::CurrentBalance { excess: imbalance });
    }
    if let Some(limit) = spec.dc_link.ripple_limit {
        let excess = ripple_phasor(op)?.norm() - limit;
        if excess > tol.ripple {
            out.push(Violation::RippleLimit { excess });
        }
    }
    Ok(out)
}

/// Capacitor voltage and current ripple magnitudes `(|V_r|, |I_r|)` for a
/// ripple power of the given magnitude, with the dc source current neglected.
pub fn capacitor_ripple(
    spec: &DcLinkSpec,
    ripple_magnitude: f64,
    frequency_hz: f64,
) -> Result<(f64, f64)> {
    let (v, i) = capacitor_ripple_phasors(spec, Phasor::new(ripple_magnitude, 0.0), frequency_hz)?;
    Ok((v.norm(), i.norm()))
}

/// Phasor form of [`capacitor_ripple`]. Both results share the angle of the
/// ripple power, with the dc voltage written as `V0 − |V_r|·sin(2ωt + ∠V_r)`.
pub fn capacitor_ripple_phasors(
    spec: &DcLinkSpec,
    ripple: Phasor,
    frequency_hz: f64,
) -> Result<(Phasor, Phasor)> {
    spec.check()?;
    if ripple.norm().is_nan() {
        return Err(Error::invalid("ripple", "must be finite"));
    }
    if !(frequency_hz > 0.0) {
        return Err(Error::invalid("frequency_hz", "must be positive"));
    }
    let two_omega = 4.0 * PI * frequency_hz;
    let i_r = ripple / spec.vdc_nominal;
    let v_r = i_r / (two_omega * spec.capacitance);
    Ok((v_r, i_r))
}

/// ESR loss `(k/C)·(|P|/V0)²/2`, W.
pub fn capacitor_losses(spec: &DcLinkSpec, ripple_magnitude: f64) -> Result<f64> {
    spec.check()?;
    if !(ripple_magnitude >= 0.0) {
        return Err(Error::invalid("ripple_magnitude", "must be non-negative"));
    }
    let i_peak = ripple_magnitude / spec.vdc_nominal;
    Ok(spec.esr_coefficient / spec.capacitance * i_peak * i_peak / 2.0)
}

/// Four-leg injection `γ|I|·b⁻ + (1−γ)|I|·b⁰` with phase a aligned to `v_positive`.
///
/// Terminal voltages are the balanced set built from `v_positive` with the
/// neutral at zero; leg order is a, b, c, n.
pub fn gamma_locus(gamma: f64, i_mag: f64, v_positive: Phasor) -> Result<VscOperatingPoint> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid("gamma", "must lie in [0, 1]"));
    }
    if !(i_mag >= 0.0) {
        return Err(Error::invalid("i_mag", "must be non-negative"));
    }
    let unit = if v_positive.norm() > 0.0 {
        v_positive / v_positive.norm()
    } else {
        Phasor::new(1.0, 0.0)
    };
    let mut currents: Vec<Phasor> = (0..3)
        .map(|k| {
            let neg = alpha_power(-2 * k as i64);
            unit * i_mag * (gamma * neg + (1.0 - gamma))
        })
        .collect();
    let neutral = -currents.iter().sum::<Phasor>();
    currents.push(neutral);
    let mut voltages: Vec<Phasor> = (0..3)
        .map(|k| v_positive * alpha_power(-(k as i64)))
        .collect();
    voltages.push(Phasor::default());
    Ok(VscOperatingPoint {
        terminal_voltages: voltages,
        leg_currents: currents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasor::polar_deg;

    fn link() -> DcLinkSpec {
        DcLinkSpec {
            capacitance: 50e-3,
            vdc_nominal: 700.0,
            esr_coefficient: 1e-3,
            ripple_limit: None,
            dc_source_power: DcSourcePower::Fixed(0.0),
        }
    }

    fn three_leg(limit: Option<f64>) -> VscSpec {
        VscSpec {
            id: "x".into(),
            topology: Topology::Statcom,
            legs: Conductor::PHASES
                .iter()
                .map(|&c| LegSpec {
                    id: c.to_string(),
                    bus: "b".into(),
                    conductor: c,
                    i_max: Some(20.0),
                })
                .collect(),
            dc_link: DcLinkSpec {
                ripple_limit: limit,
                ..link()
            },
        }
    }

    #[test]
    fn leg_products() {
        let p = leg_ripple_phasor(polar_deg(240.0, 0.0), polar_deg(10.0, 0.0));
        assert!((p - Phasor::new(2400.0, 0.0)).norm() < 1e-9);
        let q = leg_ripple_phasor(polar_deg(240.0, 0.0), polar_deg(10.0, 90.0));
        assert!((q.norm() - 2400.0).abs() < 1e-9);
        let r = leg_ripple_phasor(polar_deg(240.0, -120.0), polar_deg(10.0, -120.0));
        // independent: 2400∠−240° = 2400·(cos 120°, sin 120°)
        let expect = Phasor::new(
            2400.0 * (2.0 * PI / 3.0).cos(),
            2400.0 * (2.0 * PI / 3.0).sin(),
        );
        assert!((r - expect).norm() < 1e-9);
    }

    #[test]
    fn dc_power_examples() {
        let v: Vec<Phasor> = (0..3)
            .map(|k| polar_deg(240.0, -120.0 * k as f64))
            .collect();
        let op = VscOperatingPoint {
            terminal_voltages: v.clone(),
            leg_currents: (0..3).map(|k| polar_deg(10.0, -120.0 * k as f64)).collect(),
        };
        assert!((dc_power(&op).unwrap() - 7200.0).abs() < 1e-9);
        assert!(ripple_phasor(&op).unwrap().norm() < 1e-9 * 2400.0);

        let quad = VscOperatingPoint {
            terminal_voltages: v,
            leg_currents: (0..3)
                .map(|k| polar_deg(10.0, 90.0 - 120.0 * k as f64))
                .collect(),
        };
        assert!(dc_power(&quad).unwrap().abs() < 1e-9);

        let bad = VscOperatingPoint {
            terminal_voltages: vec![Phasor::default(); 2],
            leg_currents: vec![Phasor::default(); 3],
        };
        assert!(matches!(dc_power(&bad), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn single_phase_and_negative_sequence_ripple() {
        let v: Vec<Phasor> = (0..3)
            .map(|k| polar_deg(240.2, -120.0 * k as f64))
            .collect();
        let single = VscOperatingPoint {
            terminal_voltages: v.clone(),
            leg_currents: vec![
                Phasor::new(14.14, 0.0),
                Phasor::default(),
                Phasor::default(),
            ],
        };
        assert!((ripple_phasor(&single).unwrap().norm() - 240.2 * 14.14).abs() < 1e-9);
        assert!((240.2_f64 * 14.14 - 3397.0).abs() < 1.0);

        let neg = VscOperatingPoint {
            terminal_voltages: v,
            leg_currents: (0..3).map(|k| polar_deg(14.14, 120.0 * k as f64)).collect(),
        };
        let mag = ripple_phasor(&neg).unwrap().norm();
        assert!((mag - 3.0 * 240.2 * 14.14).abs() < 1e-8);
        assert!((mag - 10190.0).abs() < 5.0);
    }

    #[test]
    fn constraint_checks() {
        let spec = three_leg(None);
        let zero = VscOperatingPoint {
            terminal_voltages: vec![Phasor::new(240.0, 0.0); 3],
            leg_currents: vec![Phasor::default(); 3],
        };
        assert!(check_constraints(&spec, &zero).unwrap().is_empty());

        let unbalanced = VscOperatingPoint {
            leg_currents: vec![Phasor::new(10.0, 0.0), Phasor::default(), Phasor::default()],
            ..zero.clone()
        };
        let v = check_constraints(&spec, &unbalanced).unwrap();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::CurrentBalance { .. }));
        assert!((v[0].magnitude() - 10.0).abs() < 1e-12);

        let over = VscOperatingPoint {
            leg_currents: vec![
                Phasor::new(25.0, 0.0),
                Phasor::new(-25.0, 0.0),
                Phasor::default(),
            ],
            ..zero
        };
        let v = check_constraints(&spec, &over).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| (x.magnitude() - 5.0).abs() < 1e-12));
    }

    #[test]
    fn zero_sequence_meets_zero_ripple_limit() {
        let mut spec = three_leg(Some(0.0));
        spec.legs.push(LegSpec {
            id: "n".into(),
            bus: "b".into(),
            conductor: Conductor::N,
            i_max: None,
        });
        for mag in [0.5, 7.0, 19.0] {
            let op = gamma_locus(0.0, mag, Phasor::new(240.0, 0.0)).unwrap();
            assert!(check_constraints(&spec, &op).unwrap().is_empty());
        }
    }

    #[test]
    fn capacitor_quantities() {
        let (v, i) = capacitor_ripple(&link(), 3458.0, 50.0).unwrap();
        assert!((i - 4.940).abs() < 5e-4);
        // |P| / (2ωC·V0) with 2ω = 628.32 rad/s
        assert!((v - 3458.0 / (628.3185 * 0.05 * 700.0)).abs() < 1e-6);
        assert!((v - 0.157).abs() < 5e-4);
        assert!((i - v * 4.0 * PI * 50.0 * 0.05).abs() < 1e-12);
        assert_eq!(capacitor_ripple(&link(), 0.0, 50.0).unwrap(), (0.0, 0.0));
        let bad = DcLinkSpec {
            capacitance: 0.0,
            ..link()
        };
        assert!(capacitor_ripple(&bad, 1.0, 50.0).is_err());

        let l1 = capacitor_losses(&link(), 1000.0).unwrap();
        assert_eq!(capacitor_losses(&link(), 0.0).unwrap(), 0.0);
        assert!((capacitor_losses(&link(), 2000.0).unwrap() / l1 - 4.0).abs() < 1e-12);
        let big = DcLinkSpec {
            capacitance: 0.1,
            ..link()
        };
        assert!((capacitor_losses(&big, 1000.0).unwrap() / l1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gamma_locus_rejects_out_of_range() {
        assert!(gamma_locus(-0.1, 1.0, Phasor::new(1.0, 0.0)).is_err());
        assert!(gamma_locus(1.1, 1.0, Phasor::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn gamma_locus_endpoints() {
        let v = polar_deg(240.0, 17.0);
        let z = gamma_locus(0.0, 10.0, v).unwrap();
        assert!((z.leg_currents[3].norm() - 30.0).abs() < 1e-9);
        assert!(ripple_phasor(&z).unwrap().norm() < 1e-9);
        let one = gamma_locus(1.0, 10.0, v).unwrap();
        assert!(one.leg_currents[3].norm() < 1e-9);
        assert!((ripple_phasor(&one).unwrap().norm() - 7200.0).abs() < 1e-9);
        let two_thirds = gamma_locus(2.0 / 3.0, 10.0, v).unwrap();
        assert!((two_thirds.leg_currents[3].norm() - 10.0).abs() < 1e-9);
    }
}
