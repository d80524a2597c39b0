//! Dense symmetric indefinite factorization `P·A·Pᵀ = L·D·Lᵀ` with
//! Bunch–Kaufman pivoting (1×1 and 2×2 diagonal blocks).

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, Copy)]
enum Block {
    One(f64),
    Two([[f64; 2]; 2]),
}

#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    /// Unit lower triangular, stored by columns: `lt[k·n + i] = L[i][k]`.
    lt: Vec<f64>,
    blocks: Vec<(usize, Block)>,
    perm: Vec<usize>,
    inertia: Inertia,
}

const ALPHA: f64 = 0.640_388_203_202_208_4; // (1 + √17) / 8

fn swap_sym(a: &mut [f64], n: usize, from: usize, i: usize, j: usize) {
    if i == j {
        return;
    }
    for k in from..n {
        a.swap(i * n + k, j * n + k);
    }
    for k in from..n {
        a.swap(k * n + i, k * n + j);
    }
}

impl Ldl {
    /// Factorizes the symmetric matrix `a` (only its values are read; the
    /// caller is responsible for symmetry). Pivots with magnitude below
    /// `zero_tol·max|a|` count as zero eigenvalues.
    pub fn factor(a: &DMatrix<f64>, zero_tol: f64) -> Ldl {
        let n = a.nrows();
        let mut w: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
        let scale = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tiny = zero_tol * scale.max(f64::MIN_POSITIVE);
        let mut lt = vec![0.0; n * n];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::new();
        let mut inertia = Inertia::default();
        let mut k = 0;
        while k < n {
            let akk = w[k * n + k].abs();
            let (mut imax, mut colmax) = (k, 0.0);
            for i in k + 1..n {
                let v = w[i * n + k].abs();
                if v > colmax {
                    colmax = v;
                    imax = i;
                }
            }
            let (size, kp) = if akk.max(colmax) <= tiny || akk >= ALPHA * colmax {
                (1, k)
            } else {
                let mut rowmax = 0.0_f64;
                for j in k..n {
                    if j != imax {
                        rowmax = rowmax.max(w[imax * n + j].abs());
                    }
                }
                if akk * rowmax >= ALPHA * colmax * colmax {
                    (1, k)
                } else if w[imax * n + imax].abs() >= ALPHA * rowmax {
                    (1, imax)
                } else {
                    (2, imax)
                }
            };
            let target = if size == 1 { k } else { k + 1 };
            if kp != target {
                swap_sym(&mut w, n, k, target, kp);
                for c in 0..k {
                    lt.swap(c * n + target, c * n + kp);
                }
                perm.swap(target, kp);
            }
            lt[k * n + k] = 1.0;
            if size == 1 {
                let d = w[k * n + k];
                if d.abs() <= tiny {
                    inertia.zero += 1;
                    blocks.push((k, Block::One(0.0)));
                    // remaining column is negligible; leave L column empty
                    for i in k + 1..n {
                        lt[k * n + i] = 0.0;
                    }
                } else {
                    if d > 0.0 {
                        inertia.positive += 1;
                    } else {
                        inertia.negative += 1;
                    }
                    blocks.push((k, Block::One(d)));
                    for i in k + 1..n {
                        lt[k * n + i] = w[i * n + k] / d;
                    }
                    for i in k + 1..n {
                        let lik = lt[k * n + i];
                        if lik == 0.0 {
                            continue;
                        }
                        let f = lik * d;
                        for j in k + 1..=i {
                            w[i * n + j] -= f * lt[k * n + j];
                        }
                    }
                    for i in k + 1..n {
                        for j in i + 1..n {
                            w[i * n + j] = w[j * n + i];
                        }
                    }
                }
                k += 1;
            } else {
                let d11 = w[k * n + k];
                let d21 = w[(k + 1) * n + k];
                let d22 = w[(k + 1) * n + k + 1];
                let det = d11 * d22 - d21 * d21;
                if det < 0.0 {
                    inertia.positive += 1;
                    inertia.negative += 1;
                } else if d11 + d22 > 0.0 {
                    inertia.positive += 2;
                } else {
                    inertia.negative += 2;
                }
                let inv = [[d22 / det, -d21 / det], [-d21 / det, d11 / det]];
                blocks.push((k, Block::Two([[d11, d21], [d21, d22]])));
                lt[(k + 1) * n + (k + 1)] = 1.0;
                for i in k + 2..n {
                    let (a0, a1) = (w[i * n + k], w[i * n + k + 1]);
                    lt[k * n + i] = a0 * inv[0][0] + a1 * inv[1][0];
                    lt[(k + 1) * n + i] = a0 * inv[0][1] + a1 * inv[1][1];
                }
                for i in k + 2..n {
                    let (a0, a1) = (w[i * n + k], w[i * n + k + 1]);
                    if a0 == 0.0 && a1 == 0.0 {
                        continue;
                    }
                    for j in k + 2..=i {
                        w[i * n + j] -= a0 * lt[k * n + j] + a1 * lt[(k + 1) * n + j];
                    }
                }
                for i in k + 2..n {
                    for j in i + 1..n {
                        w[i * n + j] = w[j * n + i];
                    }
                }
                k += 2;
            }
        }
        Ldl {
            n,
            lt,
            blocks,
            perm,
            inertia,
        }
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for (j, yj) in y.iter().enumerate().take(i) {
                s -= self.lt[j * n + i] * yj;
            }
            y[i] = s;
        }
        for &(k, block) in &self.blocks {
            match block {
                Block::One(d) => y[k] = if d == 0.0 { 0.0 } else { y[k] / d },
                Block::Two([[a, b], [_, c]]) => {
                    let det = a * c - b * b;
                    let (u, v) = (y[k], y[k + 1]);
                    y[k] = (c * u - b * v) / det;
                    y[k + 1] = (a * v - b * u) / det;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for (j, yj) in y.iter().enumerate().skip(i + 1) {
                s -= self.lt[i * n + j] * yj;
            }
            y[i] = s;
        }
        let mut x = DVector::zeros(n);
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn solves_indefinite_systems_and_counts_inertia() {
        for seed in 0..20 {
            let n = 3 + (seed as usize % 9);
            let a = sym(n, seed);
            let b = DVector::from_fn(n, |i, _| (i as f64 * 0.37).sin());
            let f = Ldl::factor(&a, 1e-14);
            let x = f.solve(&b);
            assert!(
                (&a * &x - &b).norm() < 1e-8 * (1.0 + x.norm()),
                "seed {seed}"
            );
            let eig = a.clone().symmetric_eigen().eigenvalues;
            let pos = eig.iter().filter(|&&e| e > 0.0).count();
            let inertia = f.inertia();
            assert_eq!(inertia.positive, pos, "seed {seed}");
            assert_eq!(inertia.negative, n - pos);
        }
    }

    #[test]
    fn zero_diagonal_kkt_pattern() {
        // [[2, 1], [1, 0]] needs pivoting; eigenvalues have opposite signs
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 2.0, 1.0]);
        let f = Ldl::factor(&a, 1e-14);
        let x = f.solve(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!((&a * &x - DVector::from_vec(vec![1.0, 2.0, 3.0])).norm() < 1e-12);
        assert_eq!(f.inertia().zero, 0);
    }

    #[test]
    fn detects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = Ldl::factor(&a, 1e-12);
        assert_eq!(
            f.inertia(),
            Inertia {
                positive: 1,
                negative: 0,
                zero: 1
            }
        );
    }
}
