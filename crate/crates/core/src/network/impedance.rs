use crate::phasor::{basis_entry, inverse_basis_entry, Phasor};
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::Conductor;

/// 4×4 series impedance in Ω, conductor-ordered a, b, c, n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ImpedanceSpec", into = "ImpedanceSpec")]
pub struct ImpedanceMatrix(pub [[Phasor; 4]; 4]);

/// Sequence-parameter shorthand for a four-wire element.
///
/// The phase block is `B·diag(z0, z1, z1)·B⁻¹`; the neutral is a separate
/// self impedance `zn` without mutual coupling to the phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceImpedance {
    pub z0: Phasor,
    pub z1: Phasor,
    pub zn: Phasor,
}

/// Accepted JSON forms of an impedance matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImpedanceSpec {
    Matrix {
        re: [[f64; 4]; 4],
        im: [[f64; 4]; 4],
    },
    Sequence {
        sequence: SequenceImpedance,
    },
}

impl From<ImpedanceSpec> for ImpedanceMatrix {
    fn from(spec: ImpedanceSpec) -> Self {
        match spec {
            ImpedanceSpec::Matrix { re, im } => {
                let mut z = [[Phasor::default(); 4]; 4];
                for r in 0..4 {
                    for c in 0..4 {
                        z[r][c] = Phasor::new(re[r][c], im[r][c]);
                    }
                }
                ImpedanceMatrix(z)
            }
            ImpedanceSpec::Sequence { sequence } => ImpedanceMatrix::from_sequence(sequence),
        }
    }
}

impl From<ImpedanceMatrix> for ImpedanceSpec {
    fn from(z: ImpedanceMatrix) -> Self {
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                re[r][c] = z.0[r][c].re;
                im[r][c] = z.0[r][c].im;
            }
        }
        ImpedanceSpec::Matrix { re, im }
    }
}

impl ImpedanceMatrix {
    pub fn diagonal(z: Phasor) -> Self {
        let mut m = [[Phasor::default(); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = z;
        }
        ImpedanceMatrix(m)
    }

    pub fn from_sequence(s: SequenceImpedance) -> Self {
        let d = [s.z0, s.z1, s.z1];
        let mut m = [[Phasor::default(); 4]; 4];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = (0..3)
                    .map(|k| basis_entry(r, k) * d[k] * inverse_basis_entry(k, c))
                    .sum();
            }
        }
        m[3][3] = s.zn;
        ImpedanceMatrix(m)
    }

    pub fn get(&self, r: Conductor, c: Conductor) -> Phasor {
        self.0[r.index()][c.index()]
    }

    /// Sub-block restricted to the given conductors.
    pub fn block(&self, conductors: &[Conductor]) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(conductors.len(), conductors.len(), |r, c| {
            self.get(conductors[r], conductors[c])
        })
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..4 {
            for c in 0..r {
                worst = worst.max((self.0[r][c] - self.0[c][r]).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_shorthand_is_symmetric_and_decouples() {
        let z = ImpedanceMatrix::from_sequence(SequenceImpedance {
            z0: Phasor::new(0.3, 0.9),
            z1: Phasor::new(0.1, 0.08),
            zn: Phasor::new(0.2, 0.1),
        });
        assert!(z.max_asymmetry() < 1e-15);
        // self = (z0 + 2 z1)/3, mutual = (z0 - z1)/3
        assert!((z.0[0][0] - Phasor::new(0.5 / 3.0, 1.06 / 3.0)).norm() < 1e-15);
        assert!((z.0[0][1] - Phasor::new(0.2 / 3.0, 0.82 / 3.0)).norm() < 1e-15);
        assert_eq!(z.0[3][0], Phasor::default());
    }

    #[test]
    fn json_forms() {
        let m: ImpedanceMatrix =
            serde_json::from_str(r#"{"sequence":{"z0":[0.3,0.9],"z1":[0.1,0.08],"zn":[0.2,0.1]}}"#)
                .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.starts_with("{\"re\":"));
        let back: ImpedanceMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
