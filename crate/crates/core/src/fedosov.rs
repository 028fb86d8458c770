//! Fedosov resolution on `R^d`: the Koszul differential `delta`, its homotopy
//! `delta_inv`, the projection `sigma`, the connection derivation `nabla`,
//! curvature, the flat connection `D = nabla - delta + [A, .]`, the
//! exactness solver, the lift `tau` and the projection `mu`.
//!
//! All identities are exact up to the truncation order `N` of the operands.
//! [`FedosovState::valid_to`] records the y-degree through which the
//! flatness equation holds (`N - 1`); operator-valued results lose a further
//! degree per unit of derivative order.

use std::collections::BTreeMap;

use num_traits::One;

use crate::brackets::{lie_action, schouten, BracketContext};
use crate::error::{Error, Result};
use crate::graded::{dx_mul_sign, unit, Family, Graded, Key, Slots, Vars, UNBOUNDED};
use crate::poly::{falling, factorial, qi, CoeffPoly, Q};

/// Christoffel symbols `gamma[k][i][j]`, symmetric in `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionData {
    dim: usize,
    gamma: Vec<Vec<Vec<CoeffPoly>>>,
}

impl ConnectionData {
    pub fn flat(dim: usize) -> Self {
        ConnectionData { dim, gamma: vec![vec![vec![CoeffPoly::zero(dim); dim]; dim]; dim] }
    }

    /// Build from a full table; rejects a table that is not symmetric in the
    /// lower indices.
    pub fn new(dim: usize, gamma: Vec<Vec<Vec<CoeffPoly>>>) -> Result<Self> {
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..i {
                    if gamma[k][i][j] != gamma[k][j][i] {
                        return Err(Error::Validation(format!(
                            "Christoffel symbols not symmetric: G^{}_{}{} = {} but G^{}_{}{} = {}",
                            k + 1,
                            i + 1,
                            j + 1,
                            gamma[k][i][j],
                            k + 1,
                            j + 1,
                            i + 1,
                            gamma[k][j][i]
                        )));
                    }
                }
            }
        }
        Ok(ConnectionData { dim, gamma })
    }

    /// Build from sparse entries `((k, i, j), value)`, zero-based, filling
    /// in the symmetric partner of each entry.
    pub fn from_entries(dim: usize, entries: &[((usize, usize, usize), CoeffPoly)]) -> Result<Self> {
        let mut g = Self::flat(dim).gamma;
        for ((k, i, j), v) in entries {
            g[*k][*i][*j] = v.clone();
            g[*k][*j][*i] = v.clone();
        }
        Self::new(dim, g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &CoeffPoly {
        &self.gamma[k][i][j]
    }

    pub fn table(&self) -> &Vec<Vec<Vec<CoeffPoly>>> {
        &self.gamma
    }

    pub fn is_flat(&self) -> bool {
        self.gamma.iter().flatten().flatten().all(CoeffPoly::is_zero)
    }

    /// `-dx^i G^k_ij(x) y^j d/dy^k`.
    pub fn element(&self, trunc: u32) -> Graded {
        let d = self.dim;
        let mut g = Graded::zero(Family::Vec, d, trunc);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let c = &self.gamma[k][i][j];
                    if !c.is_zero() {
                        g = g.plus(&Graded::term(d, trunc, -c, unit(d, j), &[i], Slots::Vec(vec![k as u8])));
                    }
                }
            }
        }
        g
    }

    /// Curvature components `R^k_{l i j}` by the coordinate formula.
    pub fn curvature_components(&self) -> Vec<Vec<Vec<Vec<CoeffPoly>>>> {
        let d = self.dim;
        let g = &self.gamma;
        let mut r = vec![vec![vec![vec![CoeffPoly::zero(d); d]; d]; d]; d];
        for k in 0..d {
            for l in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = &g[k][j][l].deriv(i) - &g[k][i][l].deriv(j);
                        for m in 0..d {
                            v = &v + &(&g[k][i][m] * &g[m][j][l]);
                            v = &v - &(&g[k][j][m] * &g[m][i][l]);
                        }
                        r[k][l][i][j] = v;
                    }
                }
            }
        }
        r
    }
}

/// `sum_i dx^i d/dy^i`, the generator of `delta`.
pub fn theta(dim: usize, trunc: u32) -> Graded {
    let mut g = Graded::zero(Family::Vec, dim, trunc);
    for i in 0..dim {
        g = g.plus(&Graded::monomial(dim, trunc, Q::one(), vec![0; dim], &[i], Slots::Vec(vec![i as u8])));
    }
    g
}

/// `delta a = dx^i d a / dy^i` (on coefficients, for every kind).
pub fn delta(a: &Graded) -> Graded {
    let mut out = a.zero_like();
    for (k, c) in a.terms() {
        for i in 0..a.dim() {
            if k.y[i] == 0 {
                continue;
            }
            let Some(s) = dx_mul_sign(1 << i, k.dx) else { continue };
            let mut y = k.y.clone();
            y[i] -= 1;
            out.insert_scaled(Key { y, dx: k.dx | (1 << i), slots: k.slots.clone() }, c, &qi(s as i64 * k.y[i] as i64));
        }
    }
    out
}

/// Homotopy for `delta`: on a component with y-degree p and exterior degree
/// q, contract with `y^k i(d/dx^k)` and divide by `p + q`; zero on `p = q = 0`.
pub fn delta_inv(a: &Graded) -> Graded {
    let mut out = a.zero_like();
    for (k, c) in a.terms() {
        let (p, q) = (k.p(), k.q());
        if p + q == 0 {
            continue;
        }
        let w = Q::one() / qi((p + q) as i64);
        let mut pos = 0;
        for i in 0..a.dim() {
            if k.dx & (1 << i) == 0 {
                continue;
            }
            let mut y = k.y.clone();
            y[i] += 1;
            let s = if pos % 2 == 0 { w.clone() } else { -w.clone() };
            out.insert_scaled(Key { y, dx: k.dx & !(1 << i), slots: k.slots.clone() }, c, &s);
            pos += 1;
        }
    }
    out
}

/// `a` at `y = dx = 0`.
pub fn sigma(a: &Graded) -> Graded {
    a.filter(|k| k.p() == 0 && k.q() == 0)
}

/// Exterior derivative in the base variables, `dx^i d/dx^i`.
pub fn d_base(a: &Graded) -> Graded {
    let mut out = a.zero_like();
    for (k, c) in a.terms() {
        for i in 0..a.dim() {
            let dc = c.deriv(i);
            if dc.is_zero() {
                continue;
            }
            let Some(s) = dx_mul_sign(1 << i, k.dx) else { continue };
            let dc = if s < 0 { -&dc } else { dc };
            out.insert(Key { y: k.y.clone(), dx: k.dx | (1 << i), slots: k.slots.clone() }, dc);
        }
    }
    out
}

fn fiber(a: &Graded) -> BracketContext {
    BracketContext::of(Vars::Fiber, a)
}

/// `nabla a = d a + [G, a]` with `G = -dx^i G^k_ij y^j d/dy^k`.
pub fn nabla(a: &Graded, conn: &ConnectionData) -> Result<Graded> {
    let g = conn.element(a.trunc());
    Ok(d_base(a).plus(&lie_action(&fiber(a), &g, a)?))
}

/// `R = -1/2 dx^i dx^j R^k_{l i j} y^l d/dy^k`.
pub fn curvature(conn: &ConnectionData, trunc: u32) -> Graded {
    let d = conn.dim();
    let r = conn.curvature_components();
    let mut out = Graded::zero(Family::Vec, d, trunc);
    let half = -Q::one() / qi(2);
    for k in 0..d {
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let c = &r[k][l][i][j];
                    if !c.is_zero() {
                        out = out.plus(&Graded::term(d, trunc, c.scale(&half), unit(d, l), &[i, j], Slots::Vec(vec![k as u8])));
                    }
                }
            }
        }
    }
    out
}

/// Flat Fedosov data for one connection and truncation order.
#[derive(Clone, Debug)]
pub struct FedosovState {
    pub connection: ConnectionData,
    pub trunc: u32,
    pub curvature: Graded,
    pub a: Graded,
    /// `B = -theta + G + A`, so that `D = d + [B, .]`.
    pub b: Graded,
    pub valid_to: u32,
}

impl FedosovState {
    pub fn dim(&self) -> usize {
        self.connection.dim()
    }

    /// Residual `delta A - R - nabla A - 1/2 [A, A]` (zero through `valid_to`).
    pub fn flatness_residual(&self) -> Result<Graded> {
        let ctx = BracketContext::fiber(self.dim(), self.trunc);
        let aa = schouten(&ctx, &self.a, &self.a)?.scale(&(Q::one() / qi(2)));
        Ok(delta(&self.a).minus(&self.curvature).minus(&nabla(&self.a, &self.connection)?).minus(&aa))
    }

    /// `lie_action` of `B` on operands of another truncation order is not
    /// allowed; this returns `B` at the requested order.
    fn b_at(&self, trunc: u32) -> Graded {
        if trunc == self.trunc {
            self.b.clone()
        } else {
            self.b.with_trunc(trunc)
        }
    }
}

/// Iterate `A = delta_inv R + delta_inv(nabla A + 1/2 [A, A])` degree by
/// degree up to y-degree `trunc`.
pub fn solve_a(conn: &ConnectionData, trunc: u32) -> Result<FedosovState> {
    if trunc < 2 {
        return Err(Error::Precondition(format!("truncation order {trunc} < 2")));
    }
    let d = conn.dim();
    let ctx = BracketContext::fiber(d, trunc);
    let r = curvature(conn, trunc);
    let mut a = Graded::zero(Family::Vec, d, trunc);
    let half = Q::one() / qi(2);
    for _ in 0..trunc {
        let rhs = r.plus(&nabla(&a, conn)?).plus(&schouten(&ctx, &a, &a)?.scale(&half));
        let next = delta_inv(&rhs);
        if next == a {
            break;
        }
        a = next;
    }
    let b = theta(d, trunc).neg().plus(&conn.element(trunc)).plus(&a);
    Ok(FedosovState { connection: conn.clone(), trunc, curvature: r, a, b, valid_to: trunc - 1 })
}

/// `D a = nabla a - delta a + [A, a]`.
pub fn fedosov_d(a: &Graded, st: &FedosovState) -> Result<Graded> {
    Ok(d_base(a).plus(&lie_action(&fiber(a), &st.b_at(a.trunc()), a)?))
}

/// Degree through which `D a` is reliable for an operand of this shape.
pub fn d_valid(a: &Graded) -> i64 {
    a.trunc() as i64 - 1 - a.max_order() as i64
}

fn first_nonzero_degree(g: &Graded, through: i64) -> Option<(u32, String)> {
    if through < 0 {
        return None;
    }
    let t = g.truncated_to(through as u32);
    let deg = t.min_p()?;
    let witness = t.filter(|k| k.p() == deg);
    Some((deg, witness.first_term().unwrap_or_default()))
}

fn iterate(seed: &Graded, st: &FedosovState, sign_seed: bool) -> Result<Graded> {
    let a_rel = st.a.with_trunc(seed.trunc());
    let conn = &st.connection;
    let ctx = fiber(seed);
    let base = if sign_seed { delta_inv(seed).neg() } else { seed.clone() };
    let mut b = base.clone();
    let rounds = seed.trunc() + seed.max_order() + 2;
    for _ in 0..rounds {
        let rhs = nabla(&b, conn)?.plus(&lie_action(&ctx, &a_rel, &b)?);
        let next = base.plus(&delta_inv(&rhs));
        if next == b {
            break;
        }
        b = next;
    }
    Ok(b)
}

/// Solve `D b = a` for a D-closed `a` of exterior degree at least one, with
/// `sigma b = 0` and `delta_inv b = 0`.
pub fn solve_exact(a: &Graded, st: &FedosovState) -> Result<Graded> {
    if a.is_zero() {
        return Ok(a.zero_like());
    }
    if a.terms().keys().any(|k| k.q() == 0) {
        return Err(Error::Precondition("solve_exact needs exterior degree q > 0".into()));
    }
    let da = fedosov_d(a, st)?;
    if let Some((degree, detail)) = first_nonzero_degree(&da, d_valid(a)) {
        return Err(Error::Residual { degree, detail: format!("input is not D-closed: {detail}") });
    }
    iterate(a, st, true)
}

/// The unique D-closed lift with `sigma(tau a0) = a0` and `delta_inv = 0`.
pub fn tau_lift(a0: &Graded, st: &FedosovState) -> Result<Graded> {
    if let Some(k) = a0.terms().keys().find(|k| k.p() != 0 || k.q() != 0) {
        return Err(Error::Precondition(format!(
            "tau_lift needs y- and dx-free input, found degree (p={}, q={})",
            k.p(),
            k.q()
        )));
    }
    iterate(a0, st, false)
}

/// Base-level operator (slots in `x`) as an element with unbounded order.
pub fn base_op(dim: usize) -> Graded {
    Graded::zero(Family::Op, dim, UNBOUNDED)
}

/// Coefficient of a y- and dx-free section.
pub fn as_function(g: &Graded) -> Result<CoeffPoly> {
    let mut out = CoeffPoly::zero(g.dim());
    for (k, c) in g.terms() {
        if k.p() != 0 || k.q() != 0 || k.slots != Slots::None {
            return Err(Error::Structural(format!("not a function: {}", g)));
        }
        out.add_assign_ref(c);
    }
    Ok(out)
}

/// Apply a base-level operator to polynomial functions of `x`.
pub fn apply_base(op: &Graded, fns: &[CoeffPoly]) -> Result<CoeffPoly> {
    let d = op.dim();
    let args: Vec<Graded> = fns.iter().map(|f| Graded::function(d, UNBOUNDED, f.clone())).collect();
    as_function(&op.apply_op(Vars::Base, &args)?)
}

fn multi_indices(dim: usize, max_deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = vec![];
        for v in &out {
            let used: u32 = v.iter().sum();
            for e in 0..=(max_deg - used) {
                let mut w = v.clone();
                w.push(e);
                next.push(w);
            }
        }
        out = next;
    }
    out.sort_by_key(|v| (v.iter().sum::<u32>(), v.clone()));
    out
}

fn tuples(items: &[Vec<u32>], n: usize) -> Vec<Vec<Vec<u32>>> {
    let mut out: Vec<Vec<Vec<u32>>> = vec![vec![]];
    for _ in 0..n {
        let mut next = vec![];
        for t in &out {
            for it in items {
                let mut t2 = t.clone();
                t2.push(it.clone());
                next.push(t2);
            }
        }
        out = next;
    }
    out.sort_by_key(|t| t.iter().map(|v| v.iter().sum::<u32>()).sum::<u32>());
    out
}

/// `mu(P)(f_0..f_k) = sigma P(tau f_0, .., tau f_k)`, reconstructed as a base
/// operator by probing monomials and solving the triangular system.
pub fn mu_project(p: &Graded, st: &FedosovState) -> Result<Graded> {
    let d = st.dim();
    if p.family() != Family::Op {
        return Err(Error::Structural("mu_project takes an operator".into()));
    }
    if p.max_q().unwrap_or(0) != 0 {
        return Err(Error::Precondition("mu_project needs exterior degree 0".into()));
    }
    let ord = p.max_order();
    if ord + 1 > p.trunc() {
        return Err(Error::Capacity(format!(
            "derivative order {ord} needs truncation order at least {}, have {}",
            ord + 1,
            p.trunc()
        )));
    }
    let dp = fedosov_d(p, st)?;
    if let Some((degree, detail)) = first_nonzero_degree(&dp, d_valid(p)) {
        return Err(Error::Residual { degree, detail: format!("operator is not D-closed: {detail}") });
    }
    let mut out = base_op(d);
    let mut lifts: BTreeMap<Vec<u32>, Graded> = BTreeMap::new();
    let monos = multi_indices(d, ord);
    for k in p.grade_of().iter().map(|g| g.k).collect::<std::collections::BTreeSet<_>>() {
        let part = p.degree_part(k);
        let arity = (k + 1) as usize;
        let mut coeffs: BTreeMap<Vec<Vec<u32>>, CoeffPoly> = BTreeMap::new();
        for beta in tuples(&monos, arity) {
            let mut args = Vec::with_capacity(arity);
            for b in &beta {
                if !lifts.contains_key(b) {
                    let f = Graded::function(d, p.trunc(), CoeffPoly::x_monomial(b));
                    lifts.insert(b.clone(), tau_lift(&f, st)?);
                }
                args.push(lifts[b].clone());
            }
            let mut v = as_function(&sigma(&part.apply_op(Vars::Fiber, &args)?))?;
            for (alpha, c) in &coeffs {
                if alpha.iter().zip(&beta).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y)) {
                    let mut f = Q::one();
                    let mut exps = vec![0; d];
                    for (a, b) in alpha.iter().zip(&beta) {
                        for i in 0..d {
                            f *= falling(b[i], a[i]);
                            exps[i] += b[i] - a[i];
                        }
                    }
                    v = &v - &(c * &CoeffPoly::x_monomial(&exps)).scale(&f);
                }
            }
            let norm: Q = beta.iter().flatten().map(|&e| factorial(e)).product();
            let c = v.scale(&(Q::one() / norm));
            if !c.is_zero() {
                coeffs.insert(beta, c);
            }
        }
        for (beta, c) in coeffs {
            out.insert(Key { y: vec![0; d], dx: 0, slots: Slots::Op(beta) }, c);
        }
    }
    Ok(out)
}

/// Exact Taylor expansion `f(x + y)` truncated at y-degree `trunc`.
pub fn taylor(f: &CoeffPoly, trunc: u32) -> Graded {
    let d = f.dim();
    let mut out = Graded::zero(Family::Form, d, trunc);
    for alpha in multi_indices(d, trunc.min(f.x_degree())) {
        let c = f.multi_deriv(&alpha);
        if c.is_zero() {
            continue;
        }
        let norm: Q = alpha.iter().map(|&e| factorial(e)).product();
        out.insert(Key { y: alpha, dx: 0, slots: Slots::None }, c.scale(&(Q::one() / norm)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{gerstenhaber, BracketContext};
    use crate::poly::{q, qi};

    fn x(d: usize, i: usize) -> CoeffPoly {
        CoeffPoly::var(d, i)
    }

    fn curved() -> ConnectionData {
        ConnectionData::from_entries(2, &[((1, 0, 0), x(2, 1))]).unwrap()
    }

    fn mono(c: Q, y: Vec<u32>, dx: &[usize]) -> Graded {
        Graded::monomial(2, 6, c, y, dx, Slots::None)
    }

    #[test]
    fn delta_examples() {
        let y1y2 = mono(qi(1), vec![1, 1], &[]);
        assert_eq!(delta(&y1y2), mono(qi(1), vec![0, 1], &[0]).plus(&mono(qi(1), vec![1, 0], &[1])));
        let m = Graded::mult(2, 6);
        assert!(delta(&m).is_zero());
        assert!(delta(&delta(&mono(qi(3), vec![2, 3], &[]))).is_zero());
    }

    #[test]
    fn delta_inv_examples() {
        assert_eq!(delta_inv(&mono(qi(1), vec![0, 0], &[0])), mono(qi(1), vec![1, 0], &[]));
        assert!(delta_inv(&mono(qi(1), vec![1, 0], &[])).is_zero());
        assert_eq!(delta_inv(&mono(qi(1), vec![1, 0], &[1])), mono(q(1, 2), vec![1, 1], &[]));
    }

    #[test]
    fn sigma_examples() {
        let a = mono(qi(3), vec![0, 0], &[])
            .plus(&Graded::term(2, 6, x(2, 0), vec![0, 1], &[], Slots::None))
            .plus(&mono(qi(1), vec![1, 0], &[0]));
        assert_eq!(sigma(&a), mono(qi(3), vec![0, 0], &[]));
        let m = Graded::mult(2, 6);
        assert_eq!(sigma(&m), m);
        assert!(sigma(&delta_inv(&a)).is_zero());
    }

    #[test]
    fn nabla_examples() {
        let flat = ConnectionData::flat(2);
        let a = Graded::term(2, 6, x(2, 0), vec![0, 1], &[], Slots::None);
        assert_eq!(nabla(&a, &flat).unwrap(), mono(qi(1), vec![0, 1], &[0]));
        let y2 = mono(qi(1), vec![0, 1], &[]);
        let expect = Graded::term(2, 6, -&x(2, 1), vec![1, 0], &[0], Slots::None);
        assert_eq!(nabla(&y2, &curved()).unwrap(), expect);
    }

    #[test]
    fn curvature_components_oracle() {
        let r = curved().curvature_components();
        // (R_12)^2_1 in the R^k_{l i j} layout: k = 2, l = 1, i = 1, j = 2
        assert_eq!(r[1][0][0][1], CoeffPoly::constant(2, qi(-1)));
        let constant = ConnectionData::from_entries(2, &[((1, 0, 0), CoeffPoly::constant(2, qi(5)))]).unwrap();
        assert!(curvature(&constant, 6).is_zero());
        assert!(curvature(&ConnectionData::flat(2), 6).is_zero());
    }

    #[test]
    fn curvature_matches_connection_square() {
        // R = dG + 1/2 [G, G]
        let c = ConnectionData::from_entries(
            2,
            &[((1, 0, 0), x(2, 1)), ((0, 0, 1), &x(2, 0) * &x(2, 1)), ((1, 1, 1), x(2, 0))],
        )
        .unwrap();
        let g = c.element(6);
        let ctx = BracketContext::fiber(2, 6);
        let expect = d_base(&g).plus(&schouten(&ctx, &g, &g).unwrap().scale(&q(1, 2)));
        assert_eq!(curvature(&c, 6), expect);
    }

    #[test]
    fn solve_a_examples() {
        let flat = solve_a(&ConnectionData::flat(2), 6).unwrap();
        assert!(flat.a.is_zero());
        let st = solve_a(&curved(), 6).unwrap();
        let a2 = st.a.filter(|k| k.p() == 2);
        assert_eq!(a2, delta_inv(&st.curvature));
        assert_eq!(delta(&a2), st.curvature);
        assert!(st.flatness_residual().unwrap().truncated_to(5).is_zero());
        assert!(st.a.min_p().unwrap() >= 2);
        assert!(delta_inv(&st.a).is_zero());
    }

    #[test]
    fn fedosov_d_examples() {
        let flat = solve_a(&ConnectionData::flat(2), 6).unwrap();
        let y1 = mono(qi(1), vec![1, 0], &[]);
        assert_eq!(fedosov_d(&y1, &flat).unwrap(), mono(qi(-1), vec![0, 0], &[0]));
        let st = solve_a(&curved(), 6).unwrap();
        let m = Graded::mult(2, 6);
        assert!(fedosov_d(&m, &st).unwrap().is_zero());
    }

    #[test]
    fn solve_exact_examples() {
        let flat = solve_a(&ConnectionData::flat(2), 6).unwrap();
        let b = solve_exact(&mono(qi(-1), vec![0, 0], &[0]), &flat).unwrap();
        assert_eq!(b, mono(qi(1), vec![1, 0], &[]));
        let b = solve_exact(&mono(qi(1), vec![0, 0], &[0, 1]), &flat).unwrap();
        let expect = mono(qi(1), vec![1, 0], &[1]).minus(&mono(qi(1), vec![0, 1], &[0])).scale(&q(-1, 2));
        assert_eq!(b, expect);
        assert!(matches!(solve_exact(&mono(qi(1), vec![1, 0], &[]), &flat), Err(Error::Precondition(_))));
        // D(y2 dx1) = dx1 dx2
        assert!(matches!(solve_exact(&mono(qi(1), vec![0, 1], &[0]), &flat), Err(Error::Residual { .. })));
    }

    #[test]
    fn tau_examples() {
        let flat = solve_a(&ConnectionData::flat(2), 6).unwrap();
        let f = Graded::function(2, 6, x(2, 0));
        let expect = f.plus(&mono(qi(1), vec![1, 0], &[]));
        assert_eq!(tau_lift(&f, &flat).unwrap(), expect);
        let f2 = Graded::function(2, 6, &x(2, 0) * &x(2, 0));
        let t = tau_lift(&f2, &flat).unwrap();
        assert_eq!(t, taylor(&(&x(2, 0) * &x(2, 0)), 6));
        let st = solve_a(&curved(), 6).unwrap();
        let g = Graded::function(2, 6, &(&x(2, 0) * &x(2, 1)) * &x(2, 1));
        let tg = tau_lift(&g, &st).unwrap();
        assert_eq!(sigma(&tg), g);
        assert!(fedosov_d(&tg, &st).unwrap().truncated_to(5).is_zero());
        assert!(tau_lift(&mono(qi(1), vec![1, 0], &[]), &st).is_err());
    }

    #[test]
    fn mu_examples() {
        let flat = solve_a(&ConnectionData::flat(2), 6).unwrap();
        let d1 = Graded::monomial(2, 6, qi(1), vec![0, 0], &[], Slots::Op(vec![vec![1, 0]]));
        let expect = Graded::monomial(2, UNBOUNDED, qi(1), vec![0, 0], &[], Slots::Op(vec![vec![1, 0]]));
        assert_eq!(mu_project(&d1, &flat).unwrap(), expect);
        let st = solve_a(&curved(), 6).unwrap();
        let m = Graded::mult(2, 6);
        assert_eq!(mu_project(&m, &st).unwrap(), Graded::mult(2, UNBOUNDED));
        // mu(tau v) = v for a base vector field
        let v = Graded::term(2, 6, &x(2, 0) * &x(2, 1), vec![0, 0], &[], Slots::Op(vec![vec![0, 1]]));
        let tv = tau_lift(&v, &st).unwrap();
        assert!(fedosov_d(&tv, &st).unwrap().truncated_to(4).is_zero());
        assert_eq!(mu_project(&tv, &st).unwrap(), v.with_trunc(UNBOUNDED));
    }

    #[test]
    fn hodge_decomposition() {
        use crate::random::{Sampler, Shape};
        let mut s = Sampler::new(11);
        let sh = Shape { dim: 3, trunc: 5, max_p: 4, max_x: 2, terms: 4 };
        for fam in [Family::Form, Family::Vec, Family::Op] {
            for _ in 0..10 {
                let a = s.mixed(fam, sh, 1);
                let rebuilt = sigma(&a).plus(&delta(&delta_inv(&a))).plus(&delta_inv(&delta(&a)));
                assert_eq!(rebuilt, a);
                assert!(delta_inv(&delta_inv(&a)).is_zero());
            }
        }
    }

    #[test]
    fn bianchi_identities() {
        let c = ConnectionData::from_entries(
            2,
            &[((1, 0, 0), &x(2, 1) * &x(2, 0)), ((0, 1, 1), x(2, 0)), ((0, 0, 1), x(2, 1))],
        )
        .unwrap();
        let r = curvature(&c, 6);
        assert!(!r.is_zero());
        assert!(delta(&r).is_zero());
        assert!(nabla(&r, &c).unwrap().is_zero());
    }

    #[test]
    fn symmetry_enforced() {
        let mut g = ConnectionData::flat(2).table().clone();
        g[0][0][1] = x(2, 0);
        assert!(matches!(ConnectionData::new(2, g), Err(Error::Validation(_))));
    }

    #[test]
    fn nabla_squared_is_curvature_action() {
        let c = ConnectionData::from_entries(2, &[((1, 0, 0), x(2, 1)), ((0, 0, 1), x(2, 0))]).unwrap();
        let r = curvature(&c, 6);
        let ctx = BracketContext::fiber(2, 6);
        let a = Graded::term(2, 6, x(2, 1), vec![1, 1], &[], Slots::Op(vec![vec![1, 0], vec![0, 0]]));
        let lhs = nabla(&nabla(&a, &c).unwrap(), &c).unwrap();
        assert_eq!(lhs, gerstenhaber(&ctx, &r, &a).unwrap());
    }
}
