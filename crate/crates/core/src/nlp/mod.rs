//! Smooth nonlinear programs built from quadratic forms, and a dense
//! primal-dual interior-point solver for them.
//!
//! Every function is an outer map applied to one or more quadratic forms of
//! the variable vector, which keeps first and second derivatives exact.

mod ipm;
mod ldl;

pub use ipm::{solve, IpmOptions, IpmResult, IpmStatus};
pub use ldl::{Inertia, Ldl};

use nalgebra::{DMatrix, DVector};

/// `c + Σ a_i·x_i + Σ q·x_i·x_j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadForm {
    pub constant: f64,
    pub linear: Vec<(usize, f64)>,
    /// Monomials with `i ≤ j`.
    pub quad: Vec<(usize, usize, f64)>,
}

impl QuadForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        QuadForm {
            constant: c,
            ..Self::default()
        }
    }

    pub fn var(i: usize) -> Self {
        let mut q = Self::new();
        q.add_lin(i, 1.0);
        q
    }

    pub fn add_const(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_lin(&mut self, i: usize, a: f64) -> &mut Self {
        if a != 0.0 {
            self.linear.push((i, a));
        }
        self
    }

    pub fn add_quad(&mut self, i: usize, j: usize, q: f64) -> &mut Self {
        if q != 0.0 {
            self.quad.push((i.min(j), i.max(j), q));
        }
        self
    }

    pub fn add_scaled(&mut self, other: &QuadForm, k: f64) -> &mut Self {
        self.constant += k * other.constant;
        for &(i, a) in &other.linear {
            self.add_lin(i, k * a);
        }
        for &(i, j, q) in &other.quad {
            self.add_quad(i, j, k * q);
        }
        self
    }

    pub fn scaled(&self, k: f64) -> QuadForm {
        let mut out = QuadForm::new();
        out.add_scaled(self, k);
        out
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant
            + self.linear.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
            + self
                .quad
                .iter()
                .map(|&(i, j, q)| q * x[i] * x[j])
                .sum::<f64>()
    }

    /// `g += k·∇u(x)`.
    pub fn add_gradient(&self, x: &[f64], k: f64, g: &mut [f64]) {
        for &(i, a) in &self.linear {
            g[i] += k * a;
        }
        for &(i, j, q) in &self.quad {
            if i == j {
                g[i] += 2.0 * k * q * x[i];
            } else {
                g[i] += k * q * x[j];
                g[j] += k * q * x[i];
            }
        }
    }

    /// `h += k·∇²u`.
    pub fn add_hessian(&self, k: f64, h: &mut DMatrix<f64>) {
        for &(i, j, q) in &self.quad {
            if i == j {
                h[(i, i)] += 2.0 * k * q;
            } else {
                h[(i, j)] += k * q;
                h[(j, i)] += k * q;
            }
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        self.linear
            .iter()
            .map(|&(i, _)| i)
            .chain(self.quad.iter().map(|&(_, j, _)| j))
            .max()
    }
}

/// Outer map `F(u_1, …, u_k)` applied to the quadratic parts.
#[derive(Debug, Clone, PartialEq)]
pub enum Outer {
    /// `u_1`
    Identity,
    /// `Σ u_k² + shift`
    SumSquares { shift: f64 },
    /// `sqrt(Σ u_k² + ε²)`
    SmoothNorm { eps: f64 },
    /// `scale·s(sqrt(Σ u_k² + ε²))` with `s(r) = clip(a0 + a1·r + a2·r², 0, 100)`.
    Derating {
        scale: f64,
        curve: crate::power_quality::DeratingCurve,
        eps: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Func {
    pub outer: Outer,
    pub parts: Vec<QuadForm>,
}

impl Func {
    pub fn quad(q: QuadForm) -> Self {
        Func {
            outer: Outer::Identity,
            parts: vec![q],
        }
    }

    pub fn new(outer: Outer, parts: Vec<QuadForm>) -> Self {
        Func { outer, parts }
    }

    /// Value, `∂F/∂u` and `∂²F/∂u²` at the given parts.
    fn outer_derivatives(&self, u: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
        let k = u.len();
        let ss: f64 = u.iter().map(|v| v * v).sum();
        match &self.outer {
            Outer::Identity => (u[0], vec![1.0], DMatrix::zeros(1, 1)),
            Outer::SumSquares { shift } => (
                ss + shift,
                u.iter().map(|v| 2.0 * v).collect(),
                DMatrix::from_diagonal_element(k, k, 2.0),
            ),
            Outer::SmoothNorm { eps } => {
                let r = (ss + eps * eps).sqrt();
                let d1 = u.iter().map(|v| v / r).collect();
                let d2 = DMatrix::from_fn(k, k, |a, b| {
                    let delta = if a == b { 1.0 / r } else { 0.0 };
                    delta - u[a] * u[b] / (r * r * r)
                });
                (r, d1, d2)
            }
            Outer::Derating { scale, curve, eps } => {
                let r = (ss + eps * eps).sqrt();
                let (s, s1, s2) = curve.surrogate(r);
                let d1 = u.iter().map(|v| scale * s1 * v / r).collect();
                let d2 = DMatrix::from_fn(k, k, |a, b| {
                    let delta = if a == b { 1.0 / r } else { 0.0 };
                    scale * (s2 * u[a] * u[b] / (r * r) + s1 * (delta - u[a] * u[b] / (r * r * r)))
                });
                (scale * s, d1, d2)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let u: Vec<f64> = self.parts.iter().map(|p| p.value(x)).collect();
        self.outer_derivatives(&u).0
    }

    /// `g += k·∇f(x)`; returns `f(x)`.
    pub fn add_gradient(&self, x: &[f64], k: f64, g: &mut [f64]) -> f64 {
        let u: Vec<f64> = self.parts.iter().map(|p| p.value(x)).collect();
        let (f, d1, _) = self.outer_derivatives(&u);
        for (p, d) in self.parts.iter().zip(&d1) {
            if *d != 0.0 {
                p.add_gradient(x, k * d, g);
            }
        }
        f
    }

    /// `h += k·∇²f(x)`.
    pub fn add_hessian(&self, x: &[f64], k: f64, h: &mut DMatrix<f64>) {
        if k == 0.0 {
            return;
        }
        let u: Vec<f64> = self.parts.iter().map(|p| p.value(x)).collect();
        let (_, d1, d2) = self.outer_derivatives(&u);
        for (p, d) in self.parts.iter().zip(&d1) {
            p.add_hessian(k * d, h);
        }
        if matches!(self.outer, Outer::Identity) {
            return;
        }
        let n = x.len();
        let grads: Vec<Vec<f64>> = self
            .parts
            .iter()
            .map(|p| {
                let mut g = vec![0.0; n];
                p.add_gradient(x, 1.0, &mut g);
                g
            })
            .collect();
        for a in 0..grads.len() {
            for b in 0..grads.len() {
                let w = k * d2[(a, b)];
                if w == 0.0 {
                    continue;
                }
                let (ga, gb) = (&grads[a], &grads[b]);
                for (i, &gi) in ga.iter().enumerate() {
                    if gi == 0.0 {
                        continue;
                    }
                    for (j, &gj) in gb.iter().enumerate() {
                        if gj != 0.0 {
                            h[(i, j)] += w * gi * gj;
                        }
                    }
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.add_gradient(x, 1.0, &mut g);
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        self.add_hessian(x, 1.0, &mut h);
        h
    }
}

/// `min Σ objective  s.t.  equalities = 0,  inequalities ≤ 0`.
#[derive(Debug, Clone, Default)]
pub struct Nlp {
    pub n: usize,
    pub objective: Vec<Func>,
    pub equalities: Vec<Func>,
    pub inequalities: Vec<Func>,
}

impl Nlp {
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|f| f.value(x)).sum()
    }

    pub fn objective_gradient(&self, x: &[f64]) -> DVector<f64> {
        let mut g = vec![0.0; self.n];
        for f in &self.objective {
            f.add_gradient(x, 1.0, &mut g);
        }
        DVector::from_vec(g)
    }

    pub fn values(funcs: &[Func], x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(funcs.len(), funcs.iter().map(|f| f.value(x)))
    }

    pub fn jacobian(&self, funcs: &[Func], x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(funcs.len(), self.n);
        let mut row = vec![0.0; self.n];
        for (r, f) in funcs.iter().enumerate() {
            row.iter_mut().for_each(|v| *v = 0.0);
            f.add_gradient(x, 1.0, &mut row);
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    j[(r, c)] = v;
                }
            }
        }
        j
    }

    /// `σ·∇²f + Σ λ_i ∇²c_i + Σ z_i ∇²g_i`.
    pub fn lagrangian_hessian(
        &self,
        x: &[f64],
        sigma: f64,
        lambda: &[f64],
        z: &[f64],
    ) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for f in &self.objective {
            f.add_hessian(x, sigma, &mut h);
        }
        for (f, &l) in self.equalities.iter().zip(lambda) {
            f.add_hessian(x, l, &mut h);
        }
        for (f, &m) in self.inequalities.iter().zip(z) {
            f.add_hessian(x, m, &mut h);
        }
        h
    }
}
