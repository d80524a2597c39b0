use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::{Conductor, Grounding, ImpedanceMatrix, Network};
use crate::phasor::Phasor;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub bus: String,
    pub conductor: Conductor,
}

/// Nodal admittance over every (bus, conductor) terminal.
///
/// Series branches and neutral grounding resistors are stamped; source
/// impedances are not. Solidly grounded neutrals stay in the matrix and are
/// flagged in `solid`.
#[derive(Debug, Clone)]
pub struct NodalAdmittance {
    pub nodes: Vec<NodeRef>,
    pub solid: Vec<bool>,
    pub matrix: DMatrix<Complex<f64>>,
    index: BTreeMap<NodeRef, usize>,
}

impl NodalAdmittance {
    pub fn node(&self, bus: &str, conductor: Conductor) -> Option<usize> {
        self.index
            .get(&NodeRef {
                bus: bus.to_string(),
                conductor,
            })
            .copied()
    }

    /// Injection currents `Y·V` for a voltage per node.
    pub fn apply(&self, v: &[Phasor]) -> Result<Vec<Phasor>> {
        if v.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                got: v.len(),
            });
        }
        let x = nalgebra::DVector::from_column_slice(v);
        Ok((&self.matrix * x).iter().copied().collect())
    }

    /// Structurally nonzero entries as `(row, col, value)`, row-major.
    pub fn entries(&self) -> Vec<(usize, usize, Phasor)> {
        let n = self.nodes.len();
        let mut out = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let y = self.matrix[(r, c)];
                if y != Phasor::default() {
                    out.push((r, c, y));
                }
            }
        }
        out
    }
}

/// Inverse of the impedance block over the given conductors.
pub(crate) fn block_admittance(
    id: &str,
    z: &ImpedanceMatrix,
    conductors: &[Conductor],
) -> Result<DMatrix<Complex<f64>>> {
    let block = z.block(conductors);
    let scale = block.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let y = block
        .try_inverse()
        .ok_or_else(|| Error::SingularImpedance(id.to_string()))?;
    let growth = y.iter().map(|x| x.norm()).fold(0.0, f64::max) * scale;
    if !growth.is_finite() || growth > 1e12 {
        return Err(Error::SingularImpedance(id.to_string()));
    }
    Ok(y)
}

pub fn admittance(net: &Network) -> Result<NodalAdmittance> {
    let mut nodes = Vec::new();
    let mut solid = Vec::new();
    for bus in &net.buses {
        for c in Conductor::ALL {
            if bus.has(c) {
                nodes.push(NodeRef {
                    bus: bus.id.clone(),
                    conductor: c,
                });
                solid.push(c == Conductor::N && bus.grounding_resistance == Grounding::Solid);
            }
        }
    }
    let index: BTreeMap<NodeRef, usize> = nodes
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    let lookup = |bus: &str, c: Conductor| {
        index
            .get(&NodeRef {
                bus: bus.to_string(),
                conductor: c,
            })
            .copied()
            .ok_or_else(|| Error::UnknownElement(format!("{bus}.{c}")))
    };
    let n = nodes.len();
    let mut y = DMatrix::from_element(n, n, Phasor::default());

    for br in &net.branches {
        let conductors = net.branch_conductors(br);
        let yb = block_admittance(&br.id, &br.impedance, &conductors)?;
        let f: Vec<usize> = conductors
            .iter()
            .map(|&c| lookup(&br.from_bus, c))
            .collect::<Result<_>>()?;
        let t: Vec<usize> = conductors
            .iter()
            .map(|&c| lookup(&br.to_bus, c))
            .collect::<Result<_>>()?;
        for r in 0..conductors.len() {
            for c in 0..conductors.len() {
                let v = yb[(r, c)];
                y[(f[r], f[c])] += v;
                y[(t[r], t[c])] += v;
                y[(f[r], t[c])] -= v;
                y[(t[r], f[c])] -= v;
            }
        }
    }
    for bus in &net.buses {
        if let (true, Some(g)) = (bus.has(Conductor::N), bus.grounding_resistance.admittance()) {
            let k = lookup(&bus.id, Conductor::N)?;
            y[(k, k)] += Phasor::new(g, 0.0);
        }
    }
    Ok(NodalAdmittance {
        nodes,
        solid,
        matrix: y,
        index,
    })
}
