//! End-to-end construction: Fedosov state, globalized morphism, star product.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::One;

use crate::brackets::{hkr, Unary};
use crate::equivariance::require_invariant_connection;
use crate::error::{Error, Result};
use crate::fedosov::{apply_base, base_op, mu_project, solve_a, tau_lift, FedosovState};
use crate::graded::{Family, Graded, Key, Slots, UNBOUNDED};
use crate::kontsevich::assemble_fiber_morphism;
use crate::linfinity::{contract_to_fiber_zero, twist, DglaHandle, LinfMorphism, MaurerCartan};
use crate::poly::{factorial, CoeffPoly, Q};
use crate::spec::ManifoldSpec;

/// Arity cap of the implemented fiberwise morphism.
pub const ARITY_CAP: usize = 2;

/// Everything derived from a spec before the Poisson structure enters.
#[derive(Clone)]
pub struct Pipeline {
    pub spec: ManifoldSpec,
    pub state: FedosovState,
    /// base polyvectors to fiber operators of exterior degree 0
    pub morphism: LinfMorphism,
}

/// `tau` on base polyvector fields.
pub fn tau_map(st: &FedosovState) -> Unary {
    let st = st.clone();
    Arc::new(move |g: &Graded| tau_lift(&g.with_trunc(st.trunc), &st))
}

pub fn build_pipeline(spec: &ManifoldSpec) -> Result<Pipeline> {
    let d = spec.dim;
    let state = solve_a(&spec.connection, spec.trunc_order)?;
    let fiber = assemble_fiber_morphism(d, spec.trunc_order, ARITY_CAP)?;
    let b_src = MaurerCartan::split_affine(state.b.clone())?;
    let b_tgt = MaurerCartan::new(hkr(&state.b)?, vec![hkr(&state.b)?])?;
    let twisted = twist(&fiber, &b_src, &b_tgt)?;
    let lifted = twisted.precompose(DglaHandle::base_polyvectors(d), tau_map(&state));
    let morphism = contract_to_fiber_zero(&lifted, &state)?;
    Ok(Pipeline { spec: spec.clone(), state, morphism })
}

/// `m_0 + sum_n h^n C_n` with base-level bidifferential coefficients.
#[derive(Clone, Debug)]
pub struct StarProduct {
    pub dim: usize,
    /// `C_0 .. C_hbar_order`
    pub coefficients: Vec<Graded>,
}

impl StarProduct {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn apply(&self, n: usize, f: &CoeffPoly, g: &CoeffPoly) -> Result<CoeffPoly> {
        apply_base(&self.coefficients[n], &[f.clone(), g.clone()])
    }

    /// `f * g` as a polynomial in `x` and `h`, through `h^order`.
    pub fn product(&self, f: &CoeffPoly, g: &CoeffPoly) -> Result<CoeffPoly> {
        let mut out = CoeffPoly::zero(self.dim);
        for n in 0..self.coefficients.len() {
            out = &out + &(&self.apply(n, f, g)? * &CoeffPoly::hbar_power(self.dim, n as u32));
        }
        Ok(out)
    }

    /// Order-`n` part of `(f * g) * h - f * (g * h)`.
    pub fn associator(&self, n: usize, f: &CoeffPoly, g: &CoeffPoly, h: &CoeffPoly) -> Result<CoeffPoly> {
        let mut out = CoeffPoly::zero(self.dim);
        for i in 0..=n {
            let j = n - i;
            out = &out + &self.apply(i, &self.apply(j, f, g)?, h)?;
            out = &out - &self.apply(i, f, &self.apply(j, g, h)?)?;
        }
        Ok(out)
    }

    /// `C_1(f, g) - C_1(g, f)`.
    pub fn bracket(&self, f: &CoeffPoly, g: &CoeffPoly) -> Result<CoeffPoly> {
        Ok(&self.apply(1, f, g)? - &self.apply(1, g, f)?)
    }
}

/// `{f, g} = alpha^ij d_i f d_j g`.
pub fn poisson_bracket(spec: &ManifoldSpec, f: &CoeffPoly, g: &CoeffPoly) -> CoeffPoly {
    let d = spec.dim;
    let mut out = CoeffPoly::zero(d);
    for i in 0..d {
        for j in 0..d {
            if !spec.poisson[i][j].is_zero() {
                out = &out + &(&spec.poisson[i][j] * &(&f.deriv(i) * &g.deriv(j)));
            }
        }
    }
    out
}

/// Monomials `x^a` with `|a| <= deg`.
pub fn probe_monomials(dim: usize, deg: u32) -> Vec<CoeffPoly> {
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..dim {
        exps = exps
            .into_iter()
            .flat_map(|v| {
                let used: u32 = v.iter().sum();
                (0..=deg - used).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    exps.sort_by_key(|v| (v.iter().sum::<u32>(), v.clone()));
    exps.iter().map(|e| CoeffPoly::x_monomial(e)).collect()
}

/// Base polyvector fields `x^a d_I` with `|a| <= deg` and `|I| <= 2`;
/// functions are the `I = {}` entries.
pub fn base_probes(dim: usize, deg: u32) -> Vec<Graded> {
    let mut out = Vec::new();
    for size in 0..=dim.min(2) {
        let subsets: Vec<Vec<u8>> = (0u32..(1 << dim))
            .filter(|m| m.count_ones() as usize == size)
            .map(|m| (0..dim as u8).filter(|i| m & (1 << i) != 0).collect())
            .collect();
        for s in subsets {
            for c in probe_monomials(dim, deg) {
                let mut g = Graded::zero(Family::Vec, dim, UNBOUNDED);
                g.insert(Key { y: vec![0; dim], dx: 0, slots: Slots::Vec(s.clone()) }, c);
                out.push(g);
            }
        }
    }
    out
}

/// Pointwise multiplication as a base operator.
pub fn base_mult(dim: usize) -> Graded {
    let mut m = base_op(dim);
    m.insert(Key { y: vec![0; dim], dx: 0, slots: Slots::Op(vec![vec![0; dim]; 2]) }, CoeffPoly::one(dim));
    m
}

/// `C_n = (1/n!) mu(U_n(alpha, .., alpha))`, unverified.
pub fn star_coefficients(p: &Pipeline) -> Result<StarProduct> {
    let spec = &p.spec;
    let n_max = spec.hbar_order as usize;
    if n_max > p.morphism.arity_cap() {
        return Err(Error::Capacity(format!(
            "hbar order {n_max} needs the structure map of arity {n_max}; arities up to {} are implemented",
            p.morphism.arity_cap()
        )));
    }
    let alpha = spec.alpha();
    let mut coefficients = vec![base_mult(spec.dim)];
    for n in 1..=n_max {
        let args = vec![alpha.clone(); n];
        let un = p.morphism.eval(&args)?;
        let c = mu_project(&un, &p.state)?.scale(&(Q::one() / factorial(n as u32)));
        coefficients.push(c);
    }
    Ok(StarProduct { dim: spec.dim, coefficients })
}

/// Check the first-order condition and associativity on probe monomials.
pub fn verify_star(spec: &ManifoldSpec, star: &StarProduct) -> Result<()> {
    let probes = probe_monomials(spec.dim, spec.probe_degree);
    if star.order() >= 1 {
        for f in &probes {
            for g in &probes {
                let diff = &star.bracket(f, g)? - &poisson_bracket(spec, f, g);
                if !diff.is_zero() {
                    return Err(Error::Internal(format!("first-order condition fails on ({f}, {g}): {diff}")));
                }
            }
        }
    }
    let mut cache: BTreeMap<(usize, usize, usize), CoeffPoly> = BTreeMap::new();
    let mut c = |n: usize, i: usize, j: usize, f: &CoeffPoly, g: &CoeffPoly| -> Result<CoeffPoly> {
        if let Some(v) = cache.get(&(n, i, j)) {
            return Ok(v.clone());
        }
        let v = star.apply(n, f, g)?;
        cache.insert((n, i, j), v.clone());
        Ok(v)
    };
    for n in 1..=star.order() {
        for (a, f) in probes.iter().enumerate() {
            for (b, g) in probes.iter().enumerate() {
                for h in &probes {
                    let mut assoc = CoeffPoly::zero(spec.dim);
                    for i in 0..=n {
                        let fg = c(n - i, a, b, f, g)?;
                        assoc = &assoc + &star.apply(i, &fg, h)?;
                    }
                    for i in 0..=n {
                        let gh = star.apply(n - i, g, h)?;
                        assoc = &assoc - &star.apply(i, f, &gh)?;
                    }
                    if !assoc.is_zero() {
                        return Err(Error::Internal(format!(
                            "associativity fails at order {n} on ({f}, {g}, {h}): {assoc}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The full construction, verified.
pub fn build_star_product(spec: &ManifoldSpec) -> Result<StarProduct> {
    if spec.hbar_order as usize > ARITY_CAP {
        return Err(Error::Capacity(format!(
            "hbar order {} requested; structure maps exist up to arity {ARITY_CAP}",
            spec.hbar_order
        )));
    }
    if spec.hbar_order == 0 || spec.alpha().is_zero() {
        let mut coefficients = vec![base_mult(spec.dim)];
        coefficients.extend((0..spec.hbar_order).map(|_| base_op(spec.dim)));
        return Ok(StarProduct { dim: spec.dim, coefficients });
    }
    spec.require_poisson()?;
    if let Some(g) = &spec.group {
        require_invariant_connection(g, &spec.connection)?;
    }
    let p = build_pipeline(spec)?;
    let star = star_coefficients(&p)?;
    verify_star(spec, &star)?;
    Ok(star)
}

/// Table of a base operator: slot pattern to coefficient string.
pub fn op_table(op: &Graded) -> BTreeMap<String, String> {
    op.terms()
        .iter()
        .map(|(k, c)| {
            let s = crate::graded::fmt_term(k, &CoeffPoly::one(op.dim()));
            (s.trim_start_matches("(1)*").to_string(), c.to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn spec(text: &str) -> ManifoldSpec {
        ManifoldSpec::parse(text).unwrap()
    }

    /// Closed form for constant alpha: `sum_n h^n/n! (1/2)^n alpha^{i1 j1}..
    /// d_{i1..in} f d_{j1..jn} g`, order by order.
    fn moyal(alpha: &[Vec<Q>], n: u32, f: &CoeffPoly, g: &CoeffPoly) -> CoeffPoly {
        let d = alpha.len();
        let mut terms: Vec<(Q, CoeffPoly, CoeffPoly)> = vec![(Q::one(), f.clone(), g.clone())];
        for _ in 0..n {
            let mut next = vec![];
            for (c, a, b) in &terms {
                for i in 0..d {
                    for j in 0..d {
                        if !alpha[i][j].is_zero() {
                            next.push((c * &alpha[i][j], a.deriv(i), b.deriv(j)));
                        }
                    }
                }
            }
            terms = next;
        }
        let w = Q::one() / (factorial(n) * Q::from_integer((1i64 << n).into()));
        terms.iter().fold(CoeffPoly::zero(d), |acc, (c, a, b)| &acc + &(a * b).scale(&(c * &w)))
    }

    #[test]
    fn moyal_recovery() {
        let s = spec("version = 1\ndimension = 2\ntrunc_order = 6\nhbar_order = 2\nprobe_degree = 3\nalpha[1,2] = 1\n");
        let star = build_star_product(&s).unwrap();
        let alpha = vec![vec![Q::zero(), Q::one()], vec![-Q::one(), Q::zero()]];
        for f in probe_monomials(2, 3) {
            for g in probe_monomials(2, 3) {
                for n in 0..=2 {
                    assert_eq!(star.apply(n as usize, &f, &g).unwrap(), moyal(&alpha, n, &f, &g), "C_{n}({f}, {g})");
                }
            }
        }
        let c1 = op_table(&star.coefficients[1]);
        assert_eq!(c1.len(), 2);
        assert!(c1.values().all(|v| v == "1/2" || v == "-1/2"), "{c1:?}");
    }

    #[test]
    fn linear_poisson_structures() {
        for text in [
            "version = 1\ndimension = 2\nhbar_order = 2\nprobe_degree = 3\nalpha[1,2] = x1\n",
            "version = 1\ndimension = 3\nhbar_order = 2\nprobe_degree = 2\nalpha[1,2] = x3\n",
        ] {
            let s = spec(text);
            let star = build_star_product(&s).unwrap();
            let (f, g) = (CoeffPoly::var(s.dim, 0), CoeffPoly::var(s.dim, 1));
            assert_eq!(star.bracket(&f, &g).unwrap(), s.poisson[0][1]);
        }
    }

    #[test]
    fn curved_connection_needs_higher_arity() {
        let s = spec("version = 1\ndimension = 2\nhbar_order = 1\ngamma[2,1,1] = x2\nalpha[1,2] = 1\n");
        assert!(matches!(build_star_product(&s), Err(Error::Capacity(_))));
        let s3 = spec("version = 1\ndimension = 2\nhbar_order = 3\nalpha[1,2] = 1\n");
        assert!(matches!(build_star_product(&s3), Err(Error::Capacity(_))));
    }

    #[test]
    fn hbar_zero_is_multiplication() {
        let s = spec("version = 1\ndimension = 2\nalpha[1,2] = 1\n");
        let star = build_star_product(&s).unwrap();
        assert_eq!(star.order(), 0);
        let (f, g) = (CoeffPoly::var(2, 0), CoeffPoly::var(2, 1));
        assert_eq!(star.product(&f, &g).unwrap(), &f * &g);
    }
}
