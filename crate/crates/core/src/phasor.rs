//! Phasor arithmetic and the Fortescue symmetrical-component transform.
//!
//! Phasors are RMS quantities in rectangular form. The symmetrical basis has
//! columns `[1, 1, 1]`, `[1, α⁻¹, α⁻²]` and `[1, α⁻², α⁻⁴]` (zero, positive and
//! negative sequence) with `α = e^{j2π/3}`; [`to_sequence`] applies its exact
//! inverse, which is one third of the conjugate basis.
//!
//! With this normalization the phase-frame bilinear sum of two triples equals
//! three times the sequence-frame sum:
//!
//! ```text
//! Va·Ia + Vb·Ib + Vc·Ic = 3·(V⁰I⁰ + V⁺I⁻ + V⁻I⁺)
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex fundamental-frequency quantity (RMS, rectangular).
pub type Phasor = Complex64;

const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

/// Phasor from magnitude and angle in degrees.
pub fn polar_deg(magnitude: f64, angle_deg: f64) -> Phasor {
    Phasor::from_polar(magnitude, angle_deg.to_radians())
}

/// Angle of a phasor in degrees, `None` for a zero phasor.
pub fn angle_deg(p: Phasor) -> Option<f64> {
    (p.norm() > 0.0).then(|| p.arg().to_degrees())
}

/// `α^k` for the 120° rotation operator `α = e^{j2π/3}`.
///
/// Reduced modulo 3 and returned from exact constants, so `α^{-4} == α^{-1}`
/// bit for bit.
pub fn alpha_power(k: i64) -> Phasor {
    match k.rem_euclid(3) {
        0 => Phasor::new(1.0, 0.0),
        1 => Phasor::new(-0.5, HALF_SQRT3),
        _ => Phasor::new(-0.5, -HALF_SQRT3),
    }
}

/// One phasor per phase conductor, ordered a, b, c.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTriple {
    pub a: Phasor,
    pub b: Phasor,
    pub c: Phasor,
}

/// Zero, positive and negative sequence components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SequenceTriple {
    pub zero: Phasor,
    pub positive: Phasor,
    pub negative: Phasor,
}

impl PhaseTriple {
    pub fn new(a: Phasor, b: Phasor, c: Phasor) -> Self {
        Self { a, b, c }
    }

    pub fn from_array(v: [Phasor; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [Phasor; 3] {
        [self.a, self.b, self.c]
    }

    /// Balanced positive-sequence set `v·[1, α⁻¹, α⁻²]`.
    pub fn balanced(v: Phasor) -> Self {
        Self::new(v, v * alpha_power(-1), v * alpha_power(-2))
    }

    pub fn scale(self, k: Phasor) -> Self {
        Self::new(self.a * k, self.b * k, self.c * k)
    }

    pub fn sum(self) -> Phasor {
        self.a + self.b + self.c
    }

    /// `Σ_j x_j·y_j` without conjugation.
    pub fn bilinear(self, other: PhaseTriple) -> Phasor {
        self.a * other.a + self.b * other.b + self.c * other.c
    }

    pub fn is_finite(&self) -> bool {
        self.to_array()
            .iter()
            .all(|p| p.re.is_finite() && p.im.is_finite())
    }
}

impl std::ops::Add for PhaseTriple {
    type Output = PhaseTriple;
    fn add(self, o: PhaseTriple) -> PhaseTriple {
        PhaseTriple::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl std::ops::Sub for PhaseTriple {
    type Output = PhaseTriple;
    fn sub(self, o: PhaseTriple) -> PhaseTriple {
        PhaseTriple::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

impl SequenceTriple {
    pub fn new(zero: Phasor, positive: Phasor, negative: Phasor) -> Self {
        Self {
            zero,
            positive,
            negative,
        }
    }

    pub fn scale(self, k: Phasor) -> Self {
        Self::new(self.zero * k, self.positive * k, self.negative * k)
    }
}

/// Entry `(row, col)` of the symmetrical basis `α^{-row·col}`.
pub fn basis_entry(row: usize, col: usize) -> Phasor {
    alpha_power(-((row * col) as i64))
}

/// Entry `(row, col)` of the inverse basis: `α^{row·col} / 3`.
pub fn inverse_basis_entry(row: usize, col: usize) -> Phasor {
    alpha_power((row * col) as i64) / 3.0
}

/// Phase frame to sequence frame.
pub fn to_sequence(v: PhaseTriple) -> SequenceTriple {
    let x = v.to_array();
    let row = |r: usize| {
        (0..3)
            .map(|c| inverse_basis_entry(r, c) * x[c])
            .sum::<Phasor>()
    };
    SequenceTriple::new(row(0), row(1), row(2))
}

/// Sequence frame to phase frame.
pub fn to_phase(s: SequenceTriple) -> PhaseTriple {
    let x = [s.zero, s.positive, s.negative];
    let row = |r: usize| (0..3).map(|c| basis_entry(r, c) * x[c]).sum::<Phasor>();
    PhaseTriple::new(row(0), row(1), row(2))
}

/// Sequence-frame form of [`PhaseTriple::bilinear`]: `3·(V⁰I⁰ + V⁺I⁻ + V⁻I⁺)`.
pub fn sequence_bilinear(v: SequenceTriple, i: SequenceTriple) -> Phasor {
    3.0 * (v.zero * i.zero + v.positive * i.negative + v.negative * i.positive)
}
