//! Primal-dual interior-point method with slack variables, inertia-corrected
//! Newton steps, an ℓ1 merit line search with one second-order correction,
//! and a Levenberg–Marquardt feasibility restoration fallback.

use nalgebra::{DMatrix, DVector};

use super::ldl::{Inertia, Ldl};
use super::Nlp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmOptions {
    /// Scaled KKT error at which the run stops.
    pub tol: f64,
    /// Constraint violation required in addition to `tol`.
    pub constr_tol: f64,
    pub max_iter: usize,
    pub mu_init: f64,
    pub max_restorations: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions {
            tol: 1e-8,
            constr_tol: 1e-10,
            max_iter: 300,
            mu_init: 0.1,
            max_restorations: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IpmStatus {
    LocalOptimum,
    MaxIter,
    InfeasibleDetected,
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub z: Vec<f64>,
    pub status: IpmStatus,
    pub iterations: usize,
    pub restorations: usize,
    pub objective: f64,
    pub eq_violation: f64,
    pub ineq_violation: f64,
    /// Scaled dual infeasibility at the returned point.
    pub stationarity: f64,
}

const KAPPA_EPS: f64 = 10.0;
const KAPPA_SIGMA: f64 = 1e10;
const S_MAX: f64 = 100.0;
const ETA: f64 = 1e-4;
const RHO: f64 = 0.1;

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn one_norm(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

struct Eval {
    f: f64,
    grad: DVector<f64>,
    c: DVector<f64>,
    jc: DMatrix<f64>,
    g: DVector<f64>,
    jg: DMatrix<f64>,
}

fn evaluate(nlp: &Nlp, x: &[f64], sf: f64) -> Eval {
    Eval {
        f: sf * nlp.objective_value(x),
        grad: nlp.objective_gradient(x) * sf,
        c: Nlp::values(&nlp.equalities, x),
        jc: nlp.jacobian(&nlp.equalities, x),
        g: Nlp::values(&nlp.inequalities, x),
        jg: nlp.jacobian(&nlp.inequalities, x),
    }
}

struct Step {
    dx: DVector<f64>,
    dl: DVector<f64>,
    ds: DVector<f64>,
    dz: DVector<f64>,
}

/// Factorization of the condensed KKT matrix at one iterate.
struct Kkt {
    ldl: Scaled,
    n: usize,
    me: usize,
    k11: DMatrix<f64>,
}

/// `LDLᵀ` of `D·K·D`, with `D` a symmetric equilibration so that the zero
/// pivot tolerance is meaningful when barrier terms make `K` badly scaled.
struct Scaled {
    ldl: Ldl,
    d: DVector<f64>,
    k: DMatrix<f64>,
}

impl Scaled {
    fn factor(k0: DMatrix<f64>) -> Scaled {
        let mut k = k0.clone();
        let n = k.nrows();
        let mut d = DVector::from_element(n, 1.0);
        for _ in 0..10 {
            let r = DVector::from_fn(n, |i, _| {
                let m = k.row(i).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if m > 0.0 {
                    1.0 / m.sqrt()
                } else {
                    1.0
                }
            });
            if r.iter().all(|v| (v - 1.0).abs() < 1e-2) {
                break;
            }
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] *= r[i] * r[j];
                }
                d[i] *= r[i];
            }
        }
        Scaled {
            ldl: Ldl::factor(&k, 1e-13),
            d,
            k: k0,
        }
    }

    fn inertia(&self) -> Inertia {
        self.ldl.inertia()
    }

    fn solve_once(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self.ldl.solve(&b.component_mul(&self.d));
        y.component_mul(&self.d)
    }

    /// Solve with a few rounds of iterative refinement.
    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.solve_once(b);
        let scale = inf_norm(b).max(1e-300);
        for _ in 0..3 {
            let r = b - &self.k * &x;
            if inf_norm(&r) <= 1e-14 * scale {
                break;
            }
            x += self.solve_once(&r);
        }
        x
    }
}

impl Kkt {
    fn build(
        h: &DMatrix<f64>,
        e: &Eval,
        sigma: &DVector<f64>,
        delta_w_last: &mut f64,
        mu: f64,
    ) -> Option<Kkt> {
        let n = h.nrows();
        let me = e.c.len();
        let mut k11 = h.clone();
        if !sigma.is_empty() {
            let scaled = DMatrix::from_fn(e.jg.nrows(), n, |r, c| e.jg[(r, c)] * sigma[r]);
            k11 += e.jg.transpose() * scaled;
        }
        let assemble = |dw: f64, dc: f64| {
            let mut k = DMatrix::zeros(n + me, n + me);
            k.view_mut((0, 0), (n, n)).copy_from(&k11);
            for i in 0..n {
                k[(i, i)] += dw;
            }
            for r in 0..me {
                for c in 0..n {
                    let v = e.jc[(r, c)];
                    k[(n + r, c)] = v;
                    k[(c, n + r)] = v;
                }
                k[(n + r, n + r)] = -dc;
            }
            k
        };
        let want = |i: Inertia| i.positive == n && i.negative == me && i.zero == 0;
        let mut dc = 0.0;
        let first = Scaled::factor(assemble(0.0, 0.0));
        if want(first.inertia()) {
            return Some(Kkt {
                ldl: first,
                n,
                me,
                k11,
            });
        }
        if first.inertia().zero > 0 {
            dc = 1e-8 * mu.powf(0.25);
            let f = Scaled::factor(assemble(0.0, dc));
            if want(f.inertia()) {
                return Some(Kkt { ldl: f, n, me, k11 });
            }
        }
        let mut dw = if *delta_w_last == 0.0 {
            1e-4
        } else {
            (*delta_w_last / 3.0).max(1e-20)
        };
        let growth = if *delta_w_last == 0.0 { 100.0 } else { 8.0 };
        while dw < 1e40 {
            let f = Scaled::factor(assemble(dw, dc));
            if want(f.inertia()) {
                *delta_w_last = dw;
                for i in 0..n {
                    k11[(i, i)] += dw;
                }
                return Some(Kkt { ldl: f, n, me, k11 });
            }
            if f.inertia().zero > 0 && dc == 0.0 {
                dc = 1e-8 * mu.powf(0.25);
            }
            dw *= growth;
        }
        None
    }

    /// Newton step for constraint residuals `rc` (equalities) and `rg`
    /// (`g + s`).
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        e: &Eval,
        lambda: &DVector<f64>,
        s: &DVector<f64>,
        z: &DVector<f64>,
        sigma: &DVector<f64>,
        mu: f64,
        rc: &DVector<f64>,
        rg: &DVector<f64>,
    ) -> Step {
        let (n, me) = (self.n, self.me);
        let mut w = e.grad.clone() + e.jc.transpose() * lambda;
        if !s.is_empty() {
            let inner = DVector::from_fn(s.len(), |i, _| mu / s[i] + sigma[i] * rg[i]);
            w += e.jg.transpose() * inner;
        }
        let mut rhs = DVector::zeros(n + me);
        for i in 0..n {
            rhs[i] = -w[i];
        }
        for i in 0..me {
            rhs[n + i] = -rc[i];
        }
        let sol = self.ldl.solve(&rhs);
        let dx = sol.rows(0, n).into_owned();
        let dl = sol.rows(n, me).into_owned();
        let ds = -rg - &e.jg * &dx;
        let dz = DVector::from_fn(s.len(), |i, _| mu / s[i] - z[i] - sigma[i] * ds[i]);
        Step { dx, dl, ds, dz }
    }
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>, tau: f64) -> f64 {
    let mut a = 1.0_f64;
    for i in 0..v.len() {
        if dv[i] < 0.0 {
            a = a.min(-tau * v[i] / dv[i]);
        }
    }
    a
}

fn merit(f: f64, s: &DVector<f64>, mu: f64, nu: f64, c: &DVector<f64>, g: &DVector<f64>) -> f64 {
    let barrier: f64 = s.iter().map(|v| v.ln()).sum();
    f - mu * barrier + nu * (one_norm(c) + one_norm(&(g + s)))
}

/// Drives `½‖c‖² + ½‖max(g, 0)‖²` down with damped Gauss–Newton steps.
fn restore(nlp: &Nlp, x: &mut [f64], iterations: usize) -> bool {
    let n = nlp.n;
    let resid = |x: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let c = Nlp::values(&nlp.equalities, x);
        let g = Nlp::values(&nlp.inequalities, x);
        let jc = nlp.jacobian(&nlp.equalities, x);
        let jg = nlp.jacobian(&nlp.inequalities, x);
        let m = c.len() + g.len();
        let mut r = DVector::zeros(m);
        let mut j = DMatrix::zeros(m, n);
        for i in 0..c.len() {
            r[i] = c[i];
            j.row_mut(i).copy_from(&jc.row(i));
        }
        for i in 0..g.len() {
            if g[i] > 0.0 {
                r[c.len() + i] = g[i];
                j.row_mut(c.len() + i).copy_from(&jg.row(i));
            }
        }
        (r, j)
    };
    let (mut r, mut j) = resid(x);
    let start = r.norm();
    let mut damping = 1e-6;
    for _ in 0..iterations {
        let jt = j.transpose();
        let mut a = &jt * &j;
        for i in 0..n {
            a[(i, i)] += damping * (1.0 + a[(i, i)]);
        }
        let Some(chol) = a.cholesky() else {
            damping *= 10.0;
            continue;
        };
        let dx = chol.solve(&(-&jt * &r));
        let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();
        let (rt, jt2) = resid(&trial);
        if rt.norm() < r.norm() {
            x.copy_from_slice(&trial);
            r = rt;
            j = jt2;
            damping = (damping / 10.0).max(1e-12);
            if r.norm() <= 1e-12 || r.norm() < 1e-3 * start {
                return true;
            }
        } else {
            damping *= 10.0;
            if damping > 1e12 {
                break;
            }
        }
    }
    r.norm() < 0.9 * start
}

pub fn solve(nlp: &Nlp, x0: &[f64], opts: &IpmOptions) -> IpmResult {
    let mut x = DVector::from_column_slice(x0);
    let me = nlp.equalities.len();
    let mi = nlp.inequalities.len();

    let g0 = inf_norm(&nlp.objective_gradient(x0));
    let sf = if g0 > 100.0 { 100.0 / g0 } else { 1.0 };

    let mut mu = opts.mu_init;
    let mut e = evaluate(nlp, x.as_slice(), sf);
    let mut s = DVector::from_fn(mi, |i, _| (-e.g[i]).max(1e-2));
    let mut z = DVector::from_fn(mi, |i, _| mu / s[i]);
    let mut lambda = DVector::zeros(me);
    let mut nu = 1.0_f64;
    let mut delta_w_last = 0.0;
    // Proximal term raised while the line search keeps cutting steps short.
    let mut damping = 0.0_f64;
    let mut restorations = 0;
    let mut status = IpmStatus::MaxIter;
    let mut iterations = 0;

    let kkt_error = |e: &Eval,
                     lambda: &DVector<f64>,
                     s: &DVector<f64>,
                     z: &DVector<f64>,
                     mu: f64|
     -> (f64, f64) {
        let rd = &e.grad + e.jc.transpose() * lambda + e.jg.transpose() * z;
        let mults = one_norm(lambda) + one_norm(z);
        let sd = if me + mi > 0 {
            (mults / (me + mi) as f64).max(S_MAX) / S_MAX
        } else {
            1.0
        };
        let sc = if mi > 0 {
            (one_norm(z) / mi as f64).max(S_MAX) / S_MAX
        } else {
            1.0
        };
        let comp = (0..mi).fold(0.0_f64, |m, i| m.max((s[i] * z[i] - mu).abs()));
        let stat = inf_norm(&rd) / sd;
        let primal = inf_norm(&e.c).max(inf_norm(&(&e.g + s)));
        (stat.max(primal).max(comp / sc), stat)
    };

    for iter in 0..opts.max_iter {
        iterations = iter;
        let (err0, _) = kkt_error(&e, &lambda, &s, &z, 0.0);
        let eq_v = inf_norm(&e.c);
        let in_v = e.g.iter().fold(0.0_f64, |m, v| m.max(*v));
        if err0 <= opts.tol && eq_v <= opts.constr_tol && in_v <= opts.constr_tol {
            status = IpmStatus::LocalOptimum;
            break;
        }
        while mu > opts.tol / 10.0 && kkt_error(&e, &lambda, &s, &z, mu).0 <= KAPPA_EPS * mu {
            mu = (opts.tol / 10.0).max((0.2 * mu).min(mu.powf(1.5)));
        }
        let tau = (1.0 - mu).max(0.99);

        let mut h = nlp.lagrangian_hessian(x.as_slice(), sf, lambda.as_slice(), z.as_slice());
        for i in 0..h.nrows() {
            h[(i, i)] += damping;
        }
        let sigma = DVector::from_fn(mi, |i, _| z[i] / s[i]);
        let Some(kkt) = Kkt::build(&h, &e, &sigma, &mut delta_w_last, mu) else {
            log::debug!("ipm: inertia correction failed at iteration {iter}");
            status = IpmStatus::InfeasibleDetected;
            break;
        };
        let rg = &e.g + &s;
        let step = kkt.direction(&e, &lambda, &s, &z, &sigma, mu, &e.c, &rg);

        let alpha_max = max_step(&s, &step.ds, tau);
        let alpha_dual = max_step(&z, &step.dz, tau);

        let theta = one_norm(&e.c) + one_norm(&rg);
        let grad_dir = e.grad.dot(&step.dx) - (0..mi).map(|i| mu * step.ds[i] / s[i]).sum::<f64>();
        if theta > 0.0 {
            let curv = step.dx.dot(&(&kkt.k11 * &step.dx)).max(0.0);
            let needed = (grad_dir + 0.5 * curv) / ((1.0 - RHO) * theta);
            if needed > nu {
                nu = needed.max(2.0 * nu).min(needed + 1.0).max(needed);
            }
        }
        let phi0 = merit(e.f, &s, mu, nu, &e.c, &e.g);
        let dphi = grad_dir - nu * theta;

        let mut alpha = alpha_max;
        let mut accepted: Option<(
            DVector<f64>,
            DVector<f64>,
            Eval,
            DVector<f64>,
            DVector<f64>,
            f64,
            f64,
        )> = None;
        let mut tried_soc = false;
        while alpha > 1e-14 {
            let xt = &x + &step.dx * alpha;
            let st = &s + &step.ds * alpha;
            let et = evaluate(nlp, xt.as_slice(), sf);
            let phit = merit(et.f, &st, mu, nu, &et.c, &et.g);
            if phit.is_finite() && phit <= phi0 + ETA * alpha * dphi {
                accepted = Some((
                    xt,
                    st,
                    et,
                    step.dl.clone(),
                    step.dz.clone(),
                    alpha,
                    alpha_dual,
                ));
                break;
            }
            if !tried_soc && alpha == alpha_max {
                tried_soc = true;
                let theta_t = one_norm(&et.c) + one_norm(&(&et.g + &st));
                if theta_t >= theta {
                    let rc = &e.c * alpha + &et.c;
                    let rgs = &rg * alpha + (&et.g + &st);
                    let soc = kkt.direction(&e, &lambda, &s, &z, &sigma, mu, &rc, &rgs);
                    let a_soc = max_step(&s, &soc.ds, tau);
                    let xs = &x + &soc.dx * a_soc;
                    let ss = &s + &soc.ds * a_soc;
                    let es = evaluate(nlp, xs.as_slice(), sf);
                    let phis = merit(es.f, &ss, mu, nu, &es.c, &es.g);
                    if phis.is_finite() && phis <= phi0 + ETA * alpha * dphi {
                        let a_d = max_step(&z, &soc.dz, tau);
                        accepted = Some((xs, ss, es, soc.dl, soc.dz, a_soc, a_d));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }

        match accepted {
            Some((xt, st, et, dl, dz, ap, ad)) => {
                log::trace!(
                    "ipm {iter:3} f {:.6e} err {:.2e} mu {:.1e} alpha {:.2e}/{:.2e} theta {:.1e} damping {:.1e}",
                    e.f,
                    err0,
                    mu,
                    ap,
                    ad,
                    theta,
                    damping
                );
                if ap < 0.1 * alpha_max {
                    damping = (damping * 10.0).clamp(1e-4, 1e8);
                } else if ap == alpha_max {
                    damping = if damping > 1e-8 { damping / 10.0 } else { 0.0 };
                }
                x = xt;
                s = st;
                lambda += dl * ad;
                z += dz * ad;
                e = et;
            }
            None => {
                restorations += 1;
                log::debug!("ipm: line search failed at iteration {iter}, restoring feasibility");
                if restorations > opts.max_restorations {
                    status = IpmStatus::InfeasibleDetected;
                    break;
                }
                let mut xr: Vec<f64> = x.iter().copied().collect();
                if !restore(nlp, &mut xr, 100) {
                    status = IpmStatus::InfeasibleDetected;
                    break;
                }
                x = DVector::from_vec(xr);
                e = evaluate(nlp, x.as_slice(), sf);
                s = DVector::from_fn(mi, |i, _| (-e.g[i]).max(mu));
                z = DVector::from_fn(mi, |i, _| mu / s[i]);
                nu = nu.max(1.0);
                continue;
            }
        }

        for i in 0..mi {
            s[i] = s[i].max(-e.g[i]);
            let lo = mu / (KAPPA_SIGMA * s[i]);
            let hi = KAPPA_SIGMA * mu / s[i];
            z[i] = z[i].clamp(lo, hi);
        }
        if !x.iter().all(|v| v.is_finite()) {
            status = IpmStatus::InfeasibleDetected;
            break;
        }
        iterations = iter + 1;
    }

    let (_, stat) = kkt_error(&e, &lambda, &s, &z, 0.0);
    IpmResult {
        objective: nlp.objective_value(x.as_slice()),
        eq_violation: inf_norm(&e.c),
        ineq_violation: e.g.iter().fold(0.0_f64, |m, v| m.max(*v)),
        stationarity: stat,
        x: x.iter().copied().collect(),
        lambda: lambda.iter().map(|v| v / sf).collect(),
        z: z.iter().map(|v| v / sf).collect(),
        status,
        iterations,
        restorations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{Func, Outer, QuadForm};

    fn sq(i: usize) -> QuadForm {
        let mut q = QuadForm::new();
        q.add_quad(i, i, 1.0);
        q
    }

    #[test]
    fn equality_constrained_quadratic() {
        // min x² + y²  s.t. x + y = 1  →  (0.5, 0.5)
        let mut obj = sq(0);
        obj.add_quad(1, 1, 1.0);
        let mut eq = QuadForm::constant(-1.0);
        eq.add_lin(0, 1.0).add_lin(1, 1.0);
        let nlp = Nlp {
            n: 2,
            objective: vec![Func::quad(obj)],
            equalities: vec![Func::quad(eq)],
            inequalities: vec![],
        };
        let r = solve(&nlp, &[3.0, -1.0], &IpmOptions::default());
        assert_eq!(r.status, IpmStatus::LocalOptimum);
        assert!((r.x[0] - 0.5).abs() < 1e-8 && (r.x[1] - 0.5).abs() < 1e-8);
        assert!((r.lambda[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn nonconvex_with_circle_inequality() {
        // min −x − y  s.t. x² + y² ≤ 2  →  (1, 1)
        let mut obj = QuadForm::new();
        obj.add_lin(0, -1.0).add_lin(1, -1.0);
        let mut circle = QuadForm::constant(-2.0);
        circle.add_quad(0, 0, 1.0).add_quad(1, 1, 1.0);
        let nlp = Nlp {
            n: 2,
            objective: vec![Func::quad(obj)],
            equalities: vec![],
            inequalities: vec![Func::quad(circle)],
        };
        let r = solve(&nlp, &[0.0, 0.0], &IpmOptions::default());
        assert_eq!(r.status, IpmStatus::LocalOptimum);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-7 && (r.x[1] - 1.0).abs() < 1e-7,
            "{:?}",
            r.x
        );
        assert!((r.z[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn epigraph_max_abs() {
        // min t  s.t. (x − 3)² ≤ t²,  (x + 1)² ≤ t², −t ≤ 0  →  x = 1, t = 2
        let t = 1;
        let mk = |a: f64| {
            let mut q = QuadForm::constant(a * a);
            q.add_quad(0, 0, 1.0)
                .add_lin(0, -2.0 * a)
                .add_quad(t, t, -1.0);
            Func::quad(q)
        };
        let mut neg_t = QuadForm::new();
        neg_t.add_lin(t, -1.0);
        let nlp = Nlp {
            n: 2,
            objective: vec![Func::quad(QuadForm::var(t))],
            equalities: vec![],
            inequalities: vec![mk(3.0), mk(-1.0), Func::quad(neg_t)],
        };
        let r = solve(&nlp, &[0.0, 5.0], &IpmOptions::default());
        assert_eq!(r.status, IpmStatus::LocalOptimum);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 2.0).abs() < 1e-6,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn bilinear_equality_and_smooth_norm() {
        // min sqrt(x² + y² + ε²)  s.t. x·y = 1  →  |x| = |y| = 1
        let mut xy = QuadForm::constant(-1.0);
        xy.add_quad(0, 1, 1.0);
        let nlp = Nlp {
            n: 2,
            objective: vec![Func::new(
                Outer::SmoothNorm { eps: 1e-3 },
                vec![QuadForm::var(0), QuadForm::var(1)],
            )],
            equalities: vec![Func::quad(xy)],
            inequalities: vec![],
        };
        let r = solve(&nlp, &[2.0, 0.7], &IpmOptions::default());
        assert_eq!(r.status, IpmStatus::LocalOptimum);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn infeasible_problem_is_flagged() {
        // x² ≤ −1 has no solution
        let mut g = QuadForm::constant(1.0);
        g.add_quad(0, 0, 1.0);
        let nlp = Nlp {
            n: 1,
            objective: vec![Func::quad(QuadForm::var(0))],
            equalities: vec![],
            inequalities: vec![Func::quad(g)],
        };
        let r = solve(&nlp, &[0.5], &IpmOptions::default());
        assert_ne!(r.status, IpmStatus::LocalOptimum);
    }
}
