//! Gerstenhaber and Schouten–Nijenhuis brackets, the Hochschild
//! differential, the HKR map and the differential on polylinear maps.
//!
//! Form-valued elements use the tensor-product rule
//! `[w (x) P, h (x) Q] = (-1)^{k_P q_h} (w h) (x) [P, Q]`, so the total degree
//! of a term is `q + k`.
//!
//! Schouten convention. Writing a polyvector as a function of `y` and odd
//! symbols `xi_i` standing for `d/dy^i`,
//!
//! ```text
//! [P, Q] = (-1)^{k_P k_Q} sum_i (P <-d/dxi_i)(d Q/dy^i) - sum_i (Q <-d/dxi_i)(d P/dy^i)
//! ```
//!
//! with right derivatives in `xi`. On vector fields this is the Lie bracket
//! and `[v, f] = v(f)`; on `(xi_1 xi_2, y^1 y^2)` it yields
//! `y^2 xi_2 - y^1 xi_1`. With this sign HKR intertwines the Schouten and
//! Gerstenhaber brackets up to Hochschild coboundaries.

use std::sync::Arc;

use num_traits::One;

use crate::error::{Error, Result};
use crate::graded::{coef_multi_deriv, dx_mul_sign, unit, wedge_indices, Family, Graded, Key, Slots, Vars};
use crate::poly::{factorial, CoeffPoly, Q};

/// Shared data for one bracket computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BracketContext {
    pub vars: Vars,
    pub dim: usize,
    pub trunc: u32,
}

impl BracketContext {
    pub fn fiber(dim: usize, trunc: u32) -> Self {
        BracketContext { vars: Vars::Fiber, dim, trunc }
    }

    pub fn base(dim: usize, trunc: u32) -> Self {
        BracketContext { vars: Vars::Base, dim, trunc }
    }

    pub fn of(vars: Vars, g: &Graded) -> Self {
        BracketContext { vars, dim: g.dim(), trunc: g.trunc() }
    }

    fn check(&self, g: &Graded) -> Result<()> {
        if g.dim() != self.dim || g.trunc() != self.trunc {
            return Err(Error::Structural(format!(
                "operand (d={}, N={}) outside bracket context (d={}, N={})",
                g.dim(),
                g.trunc(),
                self.dim,
                self.trunc
            )));
        }
        Ok(())
    }
}

fn sgn(e: i32) -> i32 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn signed(c: CoeffPoly, s: i32) -> CoeffPoly {
    if s < 0 {
        -&c
    } else {
        c
    }
}

fn add_vec(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Schouten–Nijenhuis bracket; sections are accepted as degree -1 entries.
pub fn schouten(ctx: &BracketContext, a: &Graded, b: &Graded) -> Result<Graded> {
    ctx.check(a)?;
    ctx.check(b)?;
    let a = a.to_family(Family::Vec)?;
    let b = b.to_family(Family::Vec)?;
    let mut out = Graded::zero(Family::Vec, ctx.dim, ctx.trunc);
    for (k1, c1) in a.terms() {
        for (k2, c2) in b.terms() {
            let Some(sf) = dx_mul_sign(k1.dx, k2.dx) else { continue };
            let (Slots::Vec(s1), Slots::Vec(s2)) = (&k1.slots, &k2.slots) else { unreachable!() };
            let (ka, kb) = (k1.k(), k2.k());
            let outer = sf * sgn(ka * k2.q() as i32);
            let dx = k1.dx | k2.dx;
            half_schouten(ctx, &mut out, (c1, &k1.y, s1), (c2, &k2.y, s2), dx, outer * sgn(ka * kb));
            half_schouten(ctx, &mut out, (c2, &k2.y, s2), (c1, &k1.y, s1), dx, -outer);
        }
    }
    Ok(out)
}

type VecTerm<'a> = (&'a CoeffPoly, &'a Vec<u32>, &'a Vec<u8>);

/// Adds `sign * sum_i (P <-d/dxi_i)(dQ/dy^i)`.
fn half_schouten(ctx: &BracketContext, out: &mut Graded, p: VecTerm, qt: VecTerm, dx: u32, sign: i32) {
    let (cp, yp, sp) = p;
    let (cq, yq, sq) = qt;
    for (j, &i) in sp.iter().enumerate() {
        let Some((dc, dy)) = coef_multi_deriv(ctx.vars, cq, yq, &unit(ctx.dim, i as usize)) else { continue };
        let mut rest = sp.clone();
        rest.remove(j);
        let rsign = sgn((sp.len() - 1 - j) as i32);
        let Some((xi, wsign)) = wedge_indices(&rest, sq) else { continue };
        let c = cp * &dc;
        out.insert(Key { y: add_vec(yp, &dy), dx, slots: Slots::Vec(xi) }, signed(c, sign * rsign * wsign));
    }
}

/// All ways to split `alpha` into `parts` multi-indices, with the product of
/// multinomial coefficients.
fn distributions(alpha: &[u32], parts: usize) -> Vec<(Vec<Vec<u32>>, Q)> {
    let d = alpha.len();
    let mut acc: Vec<(Vec<Vec<u32>>, Q)> = vec![(vec![vec![0; d]; parts], Q::one())];
    for c in 0..d {
        let mut next = Vec::new();
        for (split, w) in &acc {
            for comp in compositions(alpha[c], parts) {
                let mut s = split.clone();
                let mut denom = Q::one();
                for (l, &v) in comp.iter().enumerate() {
                    s[l][c] = v;
                    denom *= factorial(v);
                }
                next.push((s, w * factorial(alpha[c]) / denom));
            }
        }
        acc = next;
    }
    acc
}

fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

type OpTerm<'a> = (&'a CoeffPoly, &'a Vec<u32>, &'a Vec<Vec<u32>>);

/// Insertion `P1 o_i P2` of fiber operators (form parts handled by caller).
fn insert_at(ctx: &BracketContext, out: &mut Graded, p1: OpTerm, i: usize, p2: OpTerm, dx: u32, sign: i32) {
    let (c1, y1, s1) = p1;
    let (c2, y2, s2) = p2;
    for (split, w) in distributions(&s1[i], s2.len() + 1) {
        let Some((dc, dy)) = coef_multi_deriv(ctx.vars, c2, y2, &split[0]) else { continue };
        let mut slots = Vec::with_capacity(s1.len() + s2.len());
        slots.extend_from_slice(&s1[..i]);
        for (l, beta) in s2.iter().enumerate() {
            slots.push(add_vec(beta, &split[l + 1]));
        }
        slots.extend_from_slice(&s1[i + 1..]);
        let c = (c1 * &dc).scale(&w);
        out.insert(Key { y: add_vec(y1, &dy), dx, slots: Slots::Op(slots) }, signed(c, sign));
    }
}

/// Gerstenhaber bracket of operator-valued forms. Vector fields and
/// sections are accepted and viewed as operators of degree 0 and -1.
pub fn gerstenhaber(ctx: &BracketContext, a: &Graded, b: &Graded) -> Result<Graded> {
    ctx.check(a)?;
    ctx.check(b)?;
    let a = a.to_family(Family::Op)?;
    let b = b.to_family(Family::Op)?;
    let mut out = Graded::zero(Family::Op, ctx.dim, ctx.trunc);
    for (k1, c1) in a.terms() {
        for (k2, c2) in b.terms() {
            let Some(sf) = dx_mul_sign(k1.dx, k2.dx) else { continue };
            let (Slots::Op(s1), Slots::Op(s2)) = (&k1.slots, &k2.slots) else { unreachable!() };
            let (ka, kb) = (k1.k(), k2.k());
            let outer = sf * sgn(ka * k2.q() as i32);
            let dx = k1.dx | k2.dx;
            for i in 0..s1.len() {
                insert_at(ctx, &mut out, (c1, &k1.y, s1), i, (c2, &k2.y, s2), dx, outer * sgn(i as i32 * kb));
            }
            for j in 0..s2.len() {
                let s = -outer * sgn(ka * kb) * sgn(j as i32 * ka);
                insert_at(ctx, &mut out, (c2, &k2.y, s2), j, (c1, &k1.y, s1), dx, s);
            }
        }
    }
    Ok(out)
}

/// Hochschild differential `[m, P]`.
pub fn hochschild_d(ctx: &BracketContext, p: &Graded) -> Result<Graded> {
    gerstenhaber(ctx, &Graded::mult(ctx.dim, ctx.trunc), p)
}

/// Antisymmetrization map with `1/(k+1)!` normalization; forms pass through.
pub fn hkr(g: &Graded) -> Result<Graded> {
    let g = g.to_family(Family::Vec)?;
    let mut out = Graded::zero(Family::Op, g.dim(), g.trunc());
    for (k, c) in g.terms() {
        let Slots::Vec(s) = &k.slots else { unreachable!() };
        let n = s.len();
        let w = Q::one() / factorial(n as u32);
        for (perm, sign) in permutations(n) {
            let slots: Vec<Vec<u32>> = perm.iter().map(|&p| unit(g.dim(), s[p] as usize)).collect();
            out.insert(Key { y: k.y.clone(), dx: k.dx, slots: Slots::Op(slots) }, signed(c.scale(&w), sign));
        }
    }
    Ok(out)
}

/// All permutations of `0..n` with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    if n == 0 {
        return vec![(vec![], 1)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        // insert n-1 at position j: it passes (n-1-j) elements
        for j in 0..=p.len() {
            let mut q = p.clone();
            q.insert(j, n - 1);
            out.push((q, s * sgn((p.len() - j) as i32)));
        }
    }
    out
}

/// Bracket dispatch: Gerstenhaber if either side is an operator,
/// otherwise Schouten. Sections on both sides bracket to zero.
pub fn bracket(ctx: &BracketContext, a: &Graded, b: &Graded) -> Result<Graded> {
    if a.family() == Family::Op || b.family() == Family::Op {
        gerstenhaber(ctx, a, b)
    } else {
        schouten(ctx, a, b)
    }
}

/// Action `[v, a]` of a vector-field-valued form, returned in the family of `a`.
pub fn lie_action(ctx: &BracketContext, v: &Graded, a: &Graded) -> Result<Graded> {
    match a.family() {
        Family::Form => schouten(ctx, v, a)?.to_family(Family::Form),
        Family::Vec => schouten(ctx, v, a),
        Family::Op => gerstenhaber(ctx, v, a),
    }
}

/// An evaluable polylinear map.
pub type PolyMap = Arc<dyn Fn(&[Graded]) -> Result<Graded> + Send + Sync>;
/// An evaluable linear map (a differential).
pub type Unary = Arc<dyn Fn(&Graded) -> Result<Graded> + Send + Sync>;

/// `d_Hom` of a map `psi : wedge^n h1 -> h2[k]`:
/// `d2 psi(g) - sum_i (-1)^{k_1+..+k_{i-1}+k} psi(.., d1 g_i, ..)`.
pub fn d_hom(psi: PolyMap, k: i32, d1: Unary, d2: Unary) -> PolyMap {
    Arc::new(move |args: &[Graded]| {
        let mut out = d2(&psi(args)?)?;
        let mut prefix = 0;
        for i in 0..args.len() {
            let mut a = args.to_vec();
            a[i] = d1(&args[i])?;
            if !a[i].is_zero() {
                let v = psi(&a)?;
                out = if sgn(prefix + k) > 0 { out.minus(&v) } else { out.plus(&v) };
            }
            prefix += args[i].degree_or(0);
        }
        Ok(out)
    })
}

/// The zero differential on a given family and shape.
pub fn zero_differential() -> Unary {
    Arc::new(|a: &Graded| Ok(a.zero_like()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::qi;

    const D: usize = 2;
    const N: u32 = 6;

    fn ctx() -> BracketContext {
        BracketContext::fiber(D, N)
    }

    fn vec_term(c: i64, y: Vec<u32>, s: Vec<u8>) -> Graded {
        Graded::monomial(D, N, qi(c), y, &[], Slots::Vec(s))
    }

    fn op_term(c: i64, y: Vec<u32>, s: Vec<Vec<u32>>) -> Graded {
        Graded::monomial(D, N, qi(c), y, &[], Slots::Op(s))
    }

    fn sec(c: i64, y: Vec<u32>) -> Graded {
        Graded::monomial(D, N, qi(c), y, &[], Slots::None)
    }

    #[test]
    fn m_m_vanishes() {
        let m = Graded::mult(D, N);
        assert!(gerstenhaber(&ctx(), &m, &m).unwrap().is_zero());
    }

    #[test]
    fn operator_commutator() {
        let d1 = op_term(1, vec![0, 0], vec![vec![1, 0]]);
        let y1d2 = op_term(1, vec![1, 0], vec![vec![0, 1]]);
        let d2 = op_term(1, vec![0, 0], vec![vec![0, 1]]);
        assert_eq!(gerstenhaber(&ctx(), &d1, &y1d2).unwrap(), d2);
    }

    #[test]
    fn vector_fields_are_hochschild_closed() {
        let v = op_term(3, vec![2, 1], vec![vec![0, 1]]).plus(&op_term(1, vec![0, 0], vec![vec![1, 0]]));
        assert!(hochschild_d(&ctx(), &v).unwrap().is_zero());
        let f = Graded::monomial(D, N, qi(2), vec![1, 1], &[], Slots::Op(vec![]));
        assert!(hochschild_d(&ctx(), &f).unwrap().is_zero());
    }

    #[test]
    fn schouten_examples() {
        let d1 = vec_term(1, vec![0, 0], vec![0]);
        let y1d2 = vec_term(1, vec![1, 0], vec![1]);
        assert_eq!(schouten(&ctx(), &d1, &y1d2).unwrap(), vec_term(1, vec![0, 0], vec![1]));
        let a = vec_term(1, vec![0, 0], vec![0, 1]);
        let f = sec(1, vec![1, 1]);
        let expect = vec_term(-1, vec![1, 0], vec![0]).plus(&vec_term(1, vec![0, 1], vec![1]));
        assert_eq!(schouten(&ctx(), &a, &f).unwrap(), expect);
        assert!(schouten(&ctx(), &a, &a).unwrap().is_zero());
    }

    #[test]
    fn schouten_vector_on_section_is_derivative() {
        // (y2 d1)(y1^2 y2) = 2 y1 y2^2
        let v = vec_term(1, vec![0, 1], vec![0]);
        let f = sec(1, vec![2, 1]);
        let r = schouten(&ctx(), &v, &f).unwrap().to_family(Family::Form).unwrap();
        assert_eq!(r, sec(2, vec![1, 2]));
    }

    #[test]
    fn hkr_examples() {
        let f = sec(5, vec![1, 0]);
        assert_eq!(hkr(&f).unwrap(), f.to_family(Family::Op).unwrap());
        let v = vec_term(1, vec![0, 2], vec![0]);
        assert_eq!(hkr(&v).unwrap(), op_term(1, vec![0, 2], vec![vec![1, 0]]));
        let a = vec_term(1, vec![0, 0], vec![0, 1]);
        let expect = Graded::monomial(D, N, qi(1) / qi(2), vec![0, 0], &[], Slots::Op(vec![vec![1, 0], vec![0, 1]]))
            .plus(&Graded::monomial(D, N, -qi(1) / qi(2), vec![0, 0], &[], Slots::Op(vec![vec![0, 1], vec![1, 0]])));
        assert_eq!(hkr(&a).unwrap(), expect);
        assert!(hochschild_d(&ctx(), &hkr(&a).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn permutation_signs() {
        let ps = permutations(3);
        assert_eq!(ps.len(), 6);
        let total: i32 = ps.iter().map(|p| p.1).sum();
        assert_eq!(total, 0);
        assert!(ps.contains(&(vec![1, 0, 2], -1)));
        assert!(ps.contains(&(vec![1, 2, 0], 1)));
    }

    #[test]
    fn d_hom_with_zero_source_differential() {
        let c = ctx();
        let psi: PolyMap = Arc::new(|a: &[Graded]| hkr(&a[0]));
        let d2: Unary = Arc::new(move |p: &Graded| hochschild_d(&c, p));
        let dpsi = d_hom(psi, 0, zero_differential(), d2);
        let a = vec_term(1, vec![1, 0], vec![0, 1]);
        assert!(dpsi(&[a]).unwrap().is_zero());
    }
}
