//! Averaged time-domain model of a four-leg converter dc link: ideal leg
//! current sources behind a series filter, a capacitor and a dc source with a
//! second-order low-pass characteristic. Used to check the phasor ripple
//! model against an independent integration.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::phasor::{alpha_power, PhaseTriple, Phasor};
use crate::vsc::{
    capacitor_ripple_phasors, ripple_phasor, DcLinkSpec, DcSourcePower, VscOperatingPoint,
};
use crate::{Error, Result};

/// Series R-L element, H and Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesFilter {
    pub inductance: f64,
    pub resistance: f64,
}

/// Low-pass behaviour of the dc source, realized as a series L-R branch
/// against the link capacitance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceFilter {
    pub cutoff_hz: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    #[serde(default = "default_frequency")]
    pub frequency: f64,
    /// Integration step, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Simulated time, s.
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Grid phase-to-neutral voltages, V RMS.
    pub grid_voltage: PhaseTriple,
    /// Filter between each half-bridge leg (neutral included) and the grid.
    pub filter: SeriesFilter,
    /// Phase leg currents a, b, c in A RMS, optionally followed by the
    /// neutral leg. A missing neutral carries `−(I_a + I_b + I_c)`.
    pub leg_currents: Vec<Phasor>,
    pub dc_link: DcLinkSpec,
    pub dc_source_filter: SourceFilter,
}

fn default_frequency() -> f64 {
    50.0
}

fn default_dt() -> f64 {
    1e-5
}

fn default_duration() -> f64 {
    1.0
}

impl OracleConfig {
    fn check(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::invalid("frequency", "must be positive"));
        }
        if !(self.dt > 0.0) || self.dt > 1.0 / (200.0 * self.frequency) {
            return Err(Error::invalid("dt", "must lie in (0, 1/(200·f)]"));
        }
        if !(self.duration >= 20.0 / self.frequency) || !self.duration.is_finite() {
            return Err(Error::invalid(
                "duration",
                "must cover at least 20 fundamental periods",
            ));
        }
        if !(self.filter.inductance >= 0.0) || !(self.filter.resistance >= 0.0) {
            return Err(Error::invalid(
                "filter",
                "inductance and resistance must be non-negative",
            ));
        }
        if !(self.dc_source_filter.cutoff_hz > 0.0) || !(self.dc_source_filter.damping > 0.0) {
            return Err(Error::invalid(
                "dc_source_filter",
                "cutoff and damping must be positive",
            ));
        }
        if !matches!(self.leg_currents.len(), 3 | 4) {
            return Err(Error::invalid(
                "leg_currents",
                "need three phase legs and an optional neutral",
            ));
        }
        if !self.grid_voltage.is_finite()
            || self
                .leg_currents
                .iter()
                .any(|i| !i.re.is_finite() || !i.im.is_finite())
        {
            return Err(Error::invalid("leg_currents", "must be finite"));
        }
        if !(self.dc_link.capacitance > 0.0) || !(self.dc_link.vdc_nominal > 0.0) {
            return Err(Error::invalid(
                "dc_link",
                "capacitance and voltage must be positive",
            ));
        }
        Ok(())
    }

    /// Leg currents a, b, c, n.
    pub fn currents(&self) -> [Phasor; 4] {
        let i = &self.leg_currents;
        let n = if i.len() == 4 {
            i[3]
        } else {
            -(i[0] + i[1] + i[2])
        };
        [i[0], i[1], i[2], n]
    }

    /// Half-bridge voltages a, b, c, n: grid voltage plus the filter drop.
    pub fn terminal_voltages(&self) -> [Phasor; 4] {
        let z = Phasor::new(
            self.filter.resistance,
            2.0 * PI * self.frequency * self.filter.inductance,
        );
        let i = self.currents();
        let g = self.grid_voltage.to_array();
        [g[0] + z * i[0], g[1] + z * i[1], g[2] + z * i[2], z * i[3]]
    }

    pub fn operating_point(&self) -> VscOperatingPoint {
        VscOperatingPoint {
            terminal_voltages: self.terminal_voltages().to_vec(),
            leg_currents: self.currents().to_vec(),
        }
    }

    /// Source branch `(L, R)` giving the requested cutoff and damping with
    /// the link capacitance.
    pub fn source_branch(&self) -> (f64, f64) {
        let c = self.dc_link.capacitance;
        let wc = 2.0 * PI * self.dc_source_filter.cutoff_hz;
        let l = 1.0 / (wc * wc * c);
        let r = 2.0 * self.dc_source_filter.damping * (l / c).sqrt();
        (l, r)
    }

    /// Ideal source voltage behind the filter: the nominal link voltage.
    pub fn source_voltage(&self) -> f64 {
        self.dc_link.vdc_nominal
    }
}

/// Sampled waveforms of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub frequency: f64,
    pub dt: f64,
    pub time: Vec<f64>,
    /// Power drawn from the link by the legs, W.
    pub p_dc: Vec<f64>,
    pub v_dc: Vec<f64>,
    pub i_cap: Vec<f64>,
    pub i_src: Vec<f64>,
    /// Instantaneous half-bridge voltages a, b, c, V.
    pub v_terminal: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    PDc,
    VDc,
    ICap,
    ISrc,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn signal(&self, s: Signal) -> &[f64] {
        match s {
            Signal::PDc => &self.p_dc,
            Signal::VDc => &self.v_dc,
            Signal::ICap => &self.i_cap,
            Signal::ISrc => &self.i_src,
        }
    }

    /// Samples per fundamental period.
    fn period_samples(&self) -> usize {
        (1.0 / (self.frequency * self.dt)).round() as usize
    }
}

fn instantaneous(p: Phasor, wt: f64) -> f64 {
    SQRT_2 * (p.re * wt.cos() - p.im * wt.sin())
}

/// Power drawn by the legs at time `t`, `Σ v_j(t)·i_j(t)` over the four legs
/// with waveforms synthesized from the terminal voltage and current phasors.
pub fn instantaneous_power(cfg: &OracleConfig, t: f64) -> f64 {
    let wt = 2.0 * PI * cfg.frequency * t;
    cfg.terminal_voltages()
        .iter()
        .zip(cfg.currents())
        .map(|(v, i)| instantaneous(*v, wt) * instantaneous(i, wt))
        .sum()
}

const NEWTON_TOL: f64 = 1e-12;

/// Trapezoidal integration of
/// `C·dv/dt = i_src − p(t)/v` and `L·di_src/dt = V_src − R·i_src − v`
/// from `v = V_src`, `i_src = 0`.
pub fn simulate(cfg: &OracleConfig) -> Result<SimTrace> {
    cfg.check()?;
    let c = cfg.dc_link.capacitance;
    let (l, r) = cfg.source_branch();
    let vs = cfg.source_voltage();
    let dt = cfg.dt;
    let steps = (cfg.duration / dt).round() as usize;
    let w = 2.0 * PI * cfg.frequency;
    let vt = cfg.terminal_voltages();
    let cur = cfg.currents();

    let mut trace = SimTrace {
        frequency: cfg.frequency,
        dt,
        time: Vec::with_capacity(steps + 1),
        p_dc: Vec::with_capacity(steps + 1),
        v_dc: Vec::with_capacity(steps + 1),
        i_cap: Vec::with_capacity(steps + 1),
        i_src: Vec::with_capacity(steps + 1),
        v_terminal: Vec::with_capacity(steps + 1),
    };
    let mut push = |t: f64, p: f64, v: f64, i: f64| {
        let wt = w * t;
        trace.time.push(t);
        trace.p_dc.push(p);
        trace.v_dc.push(v);
        trace.i_cap.push(i - p / v);
        trace.i_src.push(i);
        trace.v_terminal.push([
            instantaneous(vt[0], wt),
            instantaneous(vt[1], wt),
            instantaneous(vt[2], wt),
        ]);
    };
    let power = |t: f64| -> f64 {
        let wt = w * t;
        vt.iter()
            .zip(cur)
            .map(|(v, i)| instantaneous(*v, wt) * instantaneous(i, wt))
            .sum()
    };

    let (mut v, mut i) = (vs, 0.0);
    let mut p = power(0.0);
    push(0.0, p, v, i);
    let a = l / dt + r / 2.0;
    for k in 1..=steps {
        let t = k as f64 * dt;
        let p1 = power(t);
        // i1 as an affine function of v1 from the source branch
        let i_of = |v1: f64| (l / dt * i + 0.5 * (2.0 * vs - r * i - v - v1)) / a;
        let rhs0 = i - p / v;
        let mut v1 = v;
        let mut converged = false;
        for _ in 0..30 {
            let f = c * (v1 - v) / dt - 0.5 * (i_of(v1) - p1 / v1 + rhs0);
            let df = c / dt - 0.5 * (-0.5 / a + p1 / (v1 * v1));
            let step = f / df;
            v1 -= step;
            if !v1.is_finite() || v1 <= 0.0 {
                return Err(Error::Unstable(format!(
                    "dc-link voltage collapsed at t = {t:.6} s"
                )));
            }
            if step.abs() <= NEWTON_TOL * v1 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Unstable(format!(
                "implicit step did not converge at t = {t:.6} s"
            )));
        }
        i = i_of(v1);
        v = v1;
        p = p1;
        push(t, p, v, i);
    }

    check_energy(&trace, c)?;
    Ok(trace)
}

/// Compares the change of capacitor energy with the integrated capacitor
/// power over the last ten periods, relative to the energy handled by the
/// legs; a large gap means the step is too coarse.
fn check_energy(trace: &SimTrace, c: f64) -> Result<()> {
    let m = 10 * trace.period_samples();
    let n = trace.len();
    let start = n.saturating_sub(m + 1);
    let (v, ic) = (&trace.v_dc, &trace.i_cap);
    let mut integral = 0.0;
    let mut scale = 0.0;
    for k in start + 1..n {
        integral += 0.5 * trace.dt * (v[k - 1] * ic[k - 1] + v[k] * ic[k]);
        scale += 0.5 * trace.dt * (trace.p_dc[k - 1].abs() + trace.p_dc[k].abs());
    }
    let stored = 0.5 * c * (v[n - 1] * v[n - 1] - v[start] * v[start]);
    let drift = (stored - integral).abs() / scale.max(f64::MIN_POSITIVE);
    if scale > 0.0 && drift > 1e-3 {
        return Err(Error::Unstable(format!(
            "capacitor energy drift {drift:.3e}"
        )));
    }
    Ok(())
}

/// Relative RMS difference of `v_dc` between the last two periods.
pub fn steady_state_drift(trace: &SimTrace) -> Result<f64> {
    let m = trace.period_samples();
    let n = trace.len();
    if n < 2 * m + 1 {
        return Err(Error::TraceTooShort {
            needed: 2 * m + 1,
            have: n,
        });
    }
    let v = &trace.v_dc;
    let mut ss = 0.0;
    let mut mean = 0.0;
    for k in n - m..n {
        ss += (v[k] - v[k - m]).powi(2);
        mean += v[k];
    }
    mean /= m as f64;
    Ok((ss / m as f64).sqrt() / mean.abs())
}

/// Fourier coefficient of a signal at `harmonic·f` over the last ten
/// periods, as a peak-amplitude phasor (`x(t) = Re(X·e^{jhωt})`). Harmonic 0
/// gives the mean.
pub fn extract_component(trace: &SimTrace, signal: Signal, harmonic: u32) -> Result<Phasor> {
    let m = 10 * trace.period_samples();
    let n = trace.len();
    if m == 0 || n < m {
        return Err(Error::TraceTooShort { needed: m, have: n });
    }
    let x = &trace.signal(signal)[n - m..];
    let t = &trace.time[n - m..];
    let w = 2.0 * PI * trace.frequency * harmonic as f64;
    let mut acc = Phasor::default();
    for (xk, tk) in x.iter().zip(t) {
        acc += Phasor::from_polar(*xk, -w * tk);
    }
    let scale = if harmonic == 0 { 1.0 } else { 2.0 };
    Ok(acc * (scale / m as f64))
}

/// Harmonics `0..=max_harmonic` of a signal.
pub fn spectrum(trace: &SimTrace, signal: Signal, max_harmonic: u32) -> Result<Vec<Phasor>> {
    (0..=max_harmonic)
        .map(|h| extract_component(trace, signal, h))
        .collect()
}

/// Root-sum-square of harmonic amplitudes `1..=50`.
fn lowfreq_rss(trace: &SimTrace, signal: Signal) -> Result<f64> {
    let mut ss = 0.0;
    for h in 1..=50 {
        ss += extract_component(trace, signal, h)?.norm_sqr();
    }
    Ok(ss.sqrt())
}

/// Phasor predictions next to the values extracted from a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `|Σ V·I|` at the half-bridge terminals, W.
    pub proposed_ripple_w: f64,
    /// Harmonic-2 amplitude of the simulated leg power, W.
    pub simulated_ripple_w: f64,
    /// `|P|/V_dc`, A.
    pub proposed_ir_a: f64,
    /// Harmonic-2 amplitude of the capacitor current, A.
    pub simulated_ir_a: f64,
    /// `|P|/(2ωC·V_dc)`, V.
    pub proposed_vr_v: f64,
    /// Harmonic-2 amplitude of the link voltage, V.
    pub simulated_vr_v: f64,
    /// Angle of the ripple power phasor, degrees.
    pub proposed_angle_deg: f64,
    /// Angle of the simulated voltage ripple in the `V0 − |V_r|·sin(2ωt + ∠V_r)` form, degrees.
    pub simulated_vr_angle_deg: f64,
    /// Root-sum-square of harmonics 1 to 50 of the leg power, W.
    pub lowfreq_rms_w: f64,
    /// Root-sum-square of harmonics 1 to 50 of the capacitor current, A.
    pub lowfreq_rms_a: f64,
    /// Harmonic-4 amplitude of the leg power, W.
    pub harmonic4_w: f64,
    /// Mean capacitor current over the analysis window, A.
    pub mean_icap_a: f64,
    /// Mean link voltage over the analysis window, V.
    pub mean_vdc_v: f64,
    pub steady_state_drift: f64,
}

/// Runs the simulation and sets its harmonic content beside the phasor
/// formulas evaluated at the same terminal voltages.
pub fn compare_to_bilinear(cfg: &OracleConfig) -> Result<(OracleReport, SimTrace)> {
    let trace = simulate(cfg)?;
    let drift = steady_state_drift(&trace)?;
    if drift > 1e-6 {
        return Err(Error::NotSteady(drift));
    }
    let p = ripple_phasor(&cfg.operating_point())?;
    let (vr, ir) = capacitor_ripple_phasors(&cfg.dc_link, p, cfg.frequency)?;
    let xv = extract_component(&trace, Signal::VDc, 2)?;
    let report = OracleReport {
        proposed_ripple_w: p.norm(),
        simulated_ripple_w: extract_component(&trace, Signal::PDc, 2)?.norm(),
        proposed_ir_a: ir.norm(),
        simulated_ir_a: extract_component(&trace, Signal::ICap, 2)?.norm(),
        proposed_vr_v: vr.norm(),
        simulated_vr_v: xv.norm(),
        proposed_angle_deg: p.arg().to_degrees(),
        // v = V0 + Re(X·e^{j2ωt}) = V0 − |V_r|·sin(2ωt + ∠V_r) with V_r = −j·X
        simulated_vr_angle_deg: (xv * Phasor::new(0.0, -1.0)).arg().to_degrees(),
        lowfreq_rms_w: lowfreq_rss(&trace, Signal::PDc)?,
        lowfreq_rms_a: lowfreq_rss(&trace, Signal::ICap)?,
        harmonic4_w: extract_component(&trace, Signal::PDc, 4)?.norm(),
        mean_icap_a: extract_component(&trace, Signal::ICap, 0)?.re,
        mean_vdc_v: extract_component(&trace, Signal::VDc, 0)?.re,
        steady_state_drift: drift,
    };
    Ok((report, trace))
}

/// Names accepted by [`case`].
pub const CASES: [&str; 6] = ["3a", "3b", "3c", "3d", "3e", "3f"];

/// Reference leg current, A RMS.
pub const I_REF: f64 = 14.14;

/// Bench configuration: 416 V line, 50 Hz, 700 V and 50 mF link, 5 mH /
/// 1 mΩ filter, dc source low-pass at 7.5 Hz with damping 0.89, and the
/// named per-phase current pattern in units of [`I_REF`].
pub fn case(name: &str) -> Option<OracleConfig> {
    let one = Phasor::new(1.0, 0.0);
    let zero = Phasor::default();
    let j = Phasor::new(0.0, 1.0);
    let pattern = match name.trim_start_matches("case") {
        "3a" => [one, alpha_power(-1), alpha_power(-2)],
        "3b" => [one, zero, zero],
        "3c" => [one, Phasor::new(-0.5, 0.0), Phasor::new(-0.5, 0.0)],
        "3d" => [one, alpha_power(1), alpha_power(2)],
        "3e" => [j, j * alpha_power(-1), j * alpha_power(-2)],
        "3f" => [j, zero, zero],
        _ => return None,
    };
    Some(OracleConfig {
        frequency: default_frequency(),
        dt: default_dt(),
        duration: default_duration(),
        grid_voltage: PhaseTriple::balanced(Phasor::new(416.0 / 3f64.sqrt(), 0.0)),
        filter: SeriesFilter {
            inductance: 5e-3,
            resistance: 1e-3,
        },
        leg_currents: pattern.iter().map(|k| k * I_REF).collect(),
        dc_link: DcLinkSpec {
            capacitance: 50e-3,
            vdc_nominal: 700.0,
            esr_coefficient: 1e-3,
            ripple_limit: None,
            dc_source_power: DcSourcePower::default(),
        },
        dc_source_filter: SourceFilter {
            cutoff_hz: 7.5,
            damping: 0.89,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(name: &str) -> OracleConfig {
        let mut c = case(name).unwrap();
        c.duration = 0.6;
        c
    }

    fn synthetic(f: impl Fn(f64) -> f64) -> SimTrace {
        let dt = 1e-5;
        let time: Vec<f64> = (0..=40_000).map(|k| k as f64 * dt).collect();
        let x: Vec<f64> = time.iter().map(|&t| f(t)).collect();
        SimTrace {
            frequency: 50.0,
            dt,
            p_dc: x.clone(),
            v_dc: x.clone(),
            i_cap: x.clone(),
            i_src: x,
            v_terminal: vec![[0.0; 3]; time.len()],
            time,
        }
    }

    #[test]
    fn dft_calibration() {
        let tr = synthetic(|t| 10.0 * (2.0 * PI * 100.0 * t).cos());
        let x = extract_component(&tr, Signal::PDc, 2).unwrap();
        assert!((x.norm() - 10.0).abs() < 1e-9);
        assert!(x.arg().abs() < 1e-9);
        let tr = synthetic(|_| 3.0);
        assert!(extract_component(&tr, Signal::PDc, 2).unwrap().norm() < 1e-9);
        assert!((extract_component(&tr, Signal::PDc, 0).unwrap().re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_power_gives_constant_leg_power() {
        let cfg = case("3a").unwrap();
        let p0 = instantaneous_power(&cfg, 0.0);
        for k in 0..200 {
            let p = instantaneous_power(&cfg, k as f64 * 1.3e-4);
            assert!((p - p0).abs() <= 1e-9 * p0.abs());
        }
    }

    #[test]
    fn single_leg_power_is_a_pure_second_harmonic() {
        let cfg = case("3b").unwrap();
        let op = cfg.operating_point();
        let expected = crate::vsc::leg_ripple_phasor(op.terminal_voltages[0], op.leg_currents[0])
            + crate::vsc::leg_ripple_phasor(op.terminal_voltages[3], op.leg_currents[3]);
        // least-squares fit of dc + cos(2ωt) + sin(2ωt) on one period
        let w2 = 4.0 * PI * cfg.frequency;
        let n = 400;
        let mut ata = nalgebra::Matrix3::<f64>::zeros();
        let mut atb = nalgebra::Vector3::<f64>::zeros();
        for k in 0..n {
            let t = k as f64 / (n as f64 * cfg.frequency);
            let row = nalgebra::Vector3::new(1.0, (w2 * t).cos(), -(w2 * t).sin());
            ata += row * row.transpose();
            atb += row * instantaneous_power(&cfg, t);
        }
        let sol = ata.lu().solve(&atb).unwrap();
        let fitted = Phasor::new(sol[1], sol[2]);
        assert!((fitted - expected).norm() <= 1e-9 * expected.norm());
    }

    #[test]
    fn quadrature_leg_has_no_dc_power() {
        let mut cfg = case("3f").unwrap();
        cfg.filter = SeriesFilter {
            inductance: 0.0,
            resistance: 0.0,
        };
        let n = 1000;
        let mean: f64 = (0..n)
            .map(|k| instantaneous_power(&cfg, k as f64 / (n as f64 * 50.0)))
            .sum::<f64>()
            / n as f64;
        let amp = cfg.operating_point().terminal_voltages[0].norm() * I_REF;
        assert!(mean.abs() < 1e-9 * amp);
    }

    #[test]
    fn zero_injection_leaves_the_link_at_rest() {
        let mut cfg = short("3a");
        cfg.leg_currents = vec![Phasor::default(); 3];
        let tr = simulate(&cfg).unwrap();
        assert!(tr.v_dc.iter().all(|v| (v - 700.0).abs() < 1e-9));
        assert!(tr.i_cap.iter().all(|i| i.abs() < 1e-9));
    }

    #[test]
    fn active_injection_first_discharges_the_link() {
        let tr = simulate(&short("3c")).unwrap();
        let min = tr.v_dc.iter().copied().fold(f64::INFINITY, f64::min);
        let kmin = tr.v_dc.iter().position(|&v| v == min).unwrap();
        assert!(min < 700.0 - 1.0);
        assert!(tr.v_dc[tr.len() - 1] > min);
        assert!(tr.i_src[kmin] > tr.i_src[kmin / 4]);
    }

    #[test]
    fn capacitor_current_matches_the_power_ripple() {
        let cfg = short("3c");
        let (r, _) = compare_to_bilinear(&cfg).unwrap();
        let ir = r.proposed_ripple_w / 700.0;
        assert!((r.simulated_ir_a - ir).abs() <= 0.02 * ir);
        let vr = r.proposed_ripple_w / (4.0 * PI * 50.0 * 0.05 * 700.0);
        assert!((r.simulated_vr_v - vr).abs() <= 0.02 * vr);
        let gap =
            (r.simulated_vr_angle_deg - r.proposed_angle_deg + 540.0).rem_euclid(360.0) - 180.0;
        assert!(gap.abs() <= 2.0, "{gap}");
        assert!(r.mean_icap_a.abs() < 1e-6 * r.simulated_ir_a);
    }

    #[test]
    fn coarse_or_short_runs_are_rejected() {
        let mut c = case("3b").unwrap();
        c.dt = 1e-3;
        assert!(matches!(simulate(&c), Err(Error::InvalidParameter { .. })));
        let mut c = case("3b").unwrap();
        c.duration = 0.1;
        assert!(matches!(simulate(&c), Err(Error::InvalidParameter { .. })));
        let mut c = case("3b").unwrap();
        c.leg_currents.truncate(2);
        assert!(simulate(&c).is_err());
    }

    #[test]
    fn short_trace_is_reported() {
        let mut tr = synthetic(|_| 1.0);
        tr.time.truncate(100);
        tr.p_dc.truncate(100);
        assert!(matches!(
            extract_component(&tr, Signal::PDc, 2),
            Err(Error::TraceTooShort { .. })
        ));
    }

    #[test]
    fn unknown_case_is_none() {
        assert!(case("3z").is_none());
        assert!(case("case3d").is_some());
    }
}
