//! Named identity suites run by the CLI `check` subcommand.

use std::sync::Arc;

use num_traits::One;

use crate::brackets::{bracket, d_hom, gerstenhaber, hkr, hochschild_d, BracketContext, PolyMap};
use crate::equivariance::check_equivariance;
use crate::error::{Error, Result};
use crate::fedosov::{
    as_function, d_valid, delta, delta_inv, fedosov_d, mu_project, sigma, solve_a, solve_exact, taylor, FedosovState,
};
use crate::graded::{Family, Graded, Key, Slots, Vars};
use crate::kontsevich::{assemble_fiber_morphism, derive_weights, u2, vanishes_beyond_cap, WeightTable};
use crate::linfinity::{
    contract_to_fiber_zero, exterior_degree, linf_defect, relation_rhs, shift, twist, LinfMorphism, MaurerCartan,
};
use crate::pipeline::{base_mult, base_probes, build_pipeline, build_star_product, probe_monomials, tau_map, StarProduct};
use crate::poly::{qi, CoeffPoly, Q};
use crate::random::{Sampler, Shape};
use crate::report::{expect_eq, expect_zero, CheckOutcome};
use crate::spec::ManifoldSpec;

pub const SUITES: [&str; 9] =
    ["algebra", "fedosov", "morphism", "linf", "twisting", "star", "equivariance", "weights", "all"];

fn sgn(e: i32) -> Q {
    if e.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn kinds() -> [Family; 3] {
    [Family::Form, Family::Vec, Family::Op]
}

/// `a = sigma a + delta delta_inv a + delta_inv delta a` and the nilpotency
/// relations, on `count` random elements per kind.
pub fn hodge_identity(dim: usize, max_p: u32, count: usize, seed: u64) -> Result<()> {
    let mut s = Sampler::new(seed);
    let sh = Shape { dim, trunc: max_p + 1, max_p, max_x: 2, terms: 3 };
    for fam in kinds() {
        for _ in 0..count {
            let a = s.mixed(fam, sh, 1);
            let rebuilt = sigma(&a).plus(&delta(&delta_inv(&a))).plus(&delta_inv(&delta(&a)));
            expect_zero("hodge decomposition", &rebuilt.minus(&a))?;
            expect_zero("delta^2", &delta(&delta(&a)))?;
            expect_zero("delta_inv^2", &delta_inv(&delta_inv(&a)))?;
            expect_zero("sigma delta_inv", &sigma(&delta_inv(&a)))?;
            expect_zero("delta_inv sigma", &delta_inv(&sigma(&a)))?;
        }
    }
    Ok(())
}

/// Graded antisymmetry and Jacobi for both brackets on homogeneous triples,
/// `[m, m] = 0`, `hochschild^2 = 0` and the derivation rule.
pub fn bracket_axioms(dim: usize, count: usize, seed: u64) -> Result<()> {
    let trunc = 16;
    let ctx = BracketContext::fiber(dim, trunc);
    let mut s = Sampler::new(seed);
    let sh = Shape { dim, trunc, max_p: 3, max_x: 1, terms: 2 };
    for fam in [Family::Vec, Family::Op] {
        let name = if fam == Family::Vec { "schouten" } else { "gerstenhaber" };
        for _ in 0..count {
            let mut el = || {
                let q = s.index(dim.min(2) + 1);
                let k = s.int(-1, 1) as i32;
                s.element(fam, sh, q, k)
            };
            let (a, b, c) = (el(), el(), el());
            let (da, db) = (a.degree_or(0), b.degree_or(0));
            let ab = bracket(&ctx, &a, &b)?;
            let ba = bracket(&ctx, &b, &a)?;
            expect_zero(&format!("{name} antisymmetry"), &ab.plus(&ba.scale(&sgn(da * db))))?;
            let lhs = bracket(&ctx, &a, &bracket(&ctx, &b, &c)?)?;
            let rhs = bracket(&ctx, &ab, &c)?.plus(&bracket(&ctx, &b, &bracket(&ctx, &a, &c)?)?.scale(&sgn(da * db)));
            expect_zero(&format!("{name} jacobi"), &lhs.minus(&rhs))?;
            if fam == Family::Op {
                expect_zero("hochschild^2", &hochschild_d(&ctx, &hochschild_d(&ctx, &a)?)?)?;
                let lhs = hochschild_d(&ctx, &ab)?;
                let rhs = bracket(&ctx, &hochschild_d(&ctx, &a)?, &b)?
                    .plus(&bracket(&ctx, &a, &hochschild_d(&ctx, &b)?)?.scale(&sgn(da)));
                expect_zero("hochschild derivation", &lhs.minus(&rhs))?;
            }
        }
    }
    let m = Graded::mult(dim, trunc);
    expect_zero("[m, m]", &gerstenhaber(&ctx, &m, &m)?)
}

/// Sections, vector fields and operators `y^a dx^I` with `|a| <= 2`,
/// coefficients `1` and `x_i`.
pub fn spanning_probes(dim: usize, trunc: u32) -> Vec<Graded> {
    let mut out = Vec::new();
    let coeffs: Vec<CoeffPoly> = std::iter::once(CoeffPoly::one(dim)).chain((0..dim).map(|i| CoeffPoly::var(dim, i))).collect();
    let ys: Vec<Vec<u32>> = probe_monomials(dim, 2).iter().map(|m| m.terms().keys().next().unwrap().x.clone()).collect();
    for mask in 0u32..(1 << dim) {
        let dx: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
        for y in &ys {
            for c in &coeffs {
                out.push(Graded::term(dim, trunc, c.clone(), y.clone(), &dx, Slots::None));
            }
            out.push(Graded::term(dim, trunc, CoeffPoly::one(dim), y.clone(), &dx, Slots::Vec(vec![0])));
            let mut e = vec![0; dim];
            e[dim - 1] = 1;
            out.push(Graded::term(dim, trunc, CoeffPoly::one(dim), y.clone(), &dx, Slots::Op(vec![e])));
        }
    }
    out
}

fn check_through(what: &str, g: &Graded, through: i64) -> Result<()> {
    if through < 0 {
        return Ok(());
    }
    let t = g.truncated_to(through as u32);
    match t.min_p() {
        None => Ok(()),
        Some(deg) => Err(Error::Internal(format!(
            "{what}: nonzero at y-degree {deg}: {}",
            t.filter(|k| k.p() == deg).first_term().unwrap_or_default()
        ))),
    }
}

/// Flatness residual through `valid_to` and `D^2 = 0` on the spanning probes.
pub fn fedosov_flatness(st: &FedosovState) -> Result<()> {
    check_through("flatness residual", &st.flatness_residual()?, st.valid_to as i64)?;
    for a in spanning_probes(st.dim(), st.trunc) {
        let dd = fedosov_d(&fedosov_d(&a, st)?, st)?;
        check_through(&format!("D^2 on {a}"), &dd, d_valid(&a) - 1 - a.max_order() as i64)?;
    }
    Ok(())
}

/// `sigma tau = id`, `D tau = 0` on monomials, the Taylor oracle for flat
/// connections, and `solve_exact` on `count` D-exact probes.
pub fn resolution(st: &FedosovState, max_x: u32, count: usize, seed: u64) -> Result<()> {
    let d = st.dim();
    let tau = tau_map(st);
    for f in probe_monomials(d, max_x) {
        let fg = Graded::function(d, st.trunc, f.clone());
        let t = tau(&fg)?;
        expect_eq(&format!("sigma tau on {f}"), &as_function(&sigma(&t))?, &f)?;
        check_through(&format!("D tau on {f}"), &fedosov_d(&t, st)?, d_valid(&t))?;
        if st.connection.is_flat() {
            expect_zero(&format!("tau vs taylor on {f}"), &t.minus(&taylor(&f, st.trunc)))?;
        }
    }
    let small = solve_a(&st.connection, st.trunc - 1)?;
    let mut s = Sampler::new(seed);
    let sh = Shape { dim: d, trunc: st.trunc, max_p: 3, max_x: 2, terms: 2 };
    for n in 0..count {
        let fam = kinds()[n % 3];
        let q = s.index(d);
        let c = s.element(fam, sh, q, 0);
        let a = fedosov_d(&c, st)?.truncated_to(st.trunc - 1).with_trunc(st.trunc - 1);
        if a.is_zero() {
            continue;
        }
        let b = solve_exact(&a, &small)?;
        check_through("D solve_exact(a) - a", &fedosov_d(&b, &small)?.minus(&a), d_valid(&b))?;
        expect_zero("sigma solve_exact", &sigma(&b))?;
        expect_zero("delta_inv solve_exact", &delta_inv(&b))?;
    }
    Ok(())
}

/// `mu(m) = m_0`, `mu(tau v) = v` and `mu(P1 P2) = mu(P1) mu(P2)` for
/// D-closed unary operators built from lifted vector fields and functions.
pub fn morphism_property(st: &FedosovState, max_x: u32) -> Result<()> {
    let d = st.dim();
    let n = st.trunc;
    expect_zero("mu(m) - m_0", &mu_project(&Graded::mult(d, n), st)?.minus(&base_mult(d)))?;
    let tau = tau_map(st);
    let mut ops = Vec::new();
    for v in base_probes(d, 1).into_iter().filter(|v| v.terms().keys().all(|k| k.k() == 0)) {
        let p = hkr(&tau(&v)?)?;
        let base = hkr(&v)?.to_family(Family::Op)?;
        expect_zero(&format!("mu(tau {v}) - {v}"), &mu_project(&p, st)?.minus(&base))?;
        ops.push(p);
    }
    // multiplication by tau(x1)
    let tx = tau(&Graded::function(d, n, CoeffPoly::var(d, 0)))?;
    let mut mult = Graded::zero(Family::Op, d, n);
    for (k, c) in tx.terms() {
        mult.insert(Key { slots: Slots::Op(vec![vec![0; d]]), ..k.clone() }, c.clone());
    }
    ops.push(mult);
    let bases: Vec<Graded> = ops.iter().map(|p| mu_project(p, st)).collect::<Result<_>>()?;
    for f in probe_monomials(d, max_x) {
        let tf = tau(&Graded::function(d, n, f.clone()))?;
        for (p1, b1) in ops.iter().zip(&bases) {
            for (p2, b2) in ops.iter().zip(&bases) {
                let inner = p2.apply_op(Vars::Fiber, &[tf.clone()])?;
                let lhs = as_function(&sigma(&p1.apply_op(Vars::Fiber, &[inner])?))?;
                let mid = Graded::function(d, crate::graded::UNBOUNDED, crate::fedosov::apply_base(b2, &[f.clone()])?);
                let rhs = as_function(&b1.apply_op(Vars::Base, &[mid])?)?;
                expect_eq(&format!("mu(P1 P2) on {f}"), &lhs, &rhs)?;
            }
        }
    }
    Ok(())
}

fn homogeneous_pair(s: &mut Sampler, sh: Shape) -> (Graded, Graded) {
    let d = sh.dim;
    let (qa, qb) = (s.index(d), s.index(d));
    let (ka, kb) = (s.int(-1, 1) as i32, s.int(-1, 1) as i32);
    (s.element(Family::Vec, sh, qa, ka), s.element(Family::Vec, sh, qb, kb))
}

/// `V_1(g) = [w, hkr g]` with a fixed function `w`, a map of degree -1.
pub fn gauge_map(w: Graded) -> PolyMap {
    let ctx = BracketContext::fiber(w.dim(), w.trunc());
    Arc::new(move |a: &[Graded]| gerstenhaber(&ctx, &w.to_family(Family::Op)?, &hkr(&a[0])?))
}

fn defects_vanish(f: &LinfMorphism, pairs: &[(Graded, Graded)], through: u32) -> Result<()> {
    for (a, b) in pairs {
        expect_zero(&format!("arity-1 defect on {a}"), &linf_defect(f, 1, &[a.clone()])?.truncated_to(through))?;
        expect_zero(&format!("arity-2 defect on ({a}, {b})"), &linf_defect(f, 2, &[a.clone(), b.clone()])?.truncated_to(through))?;
    }
    Ok(())
}

/// Defects of the fiber morphism, closedness of the relation's right side,
/// and defects after a shift by a random `V_1`.
pub fn linf_checks(dim: usize, count: usize, seed: u64) -> Result<()> {
    let trunc = 5;
    let f = assemble_fiber_morphism(dim, trunc, 2)?;
    let mut s = Sampler::new(seed);
    let sh = Shape { dim, trunc, max_p: 2, max_x: 1, terms: 2 };
    let pairs: Vec<(Graded, Graded)> = (0..count).map(|_| homogeneous_pair(&mut s, sh)).collect();
    defects_vanish(&f, &pairs, 2)?;
    let rhs = relation_rhs(&f)?;
    let closed = d_hom(rhs, 0, f.source.differential.clone(), f.target.differential.clone());
    for (a, b) in &pairs {
        expect_zero("d_hom of the relation", &closed(&[a.clone(), b.clone()])?.truncated_to(1))?;
    }
    let w = s.element(Family::Form, Shape { max_p: 2, ..sh }, 0, 0);
    let shifted = shift(&f, 1, gauge_map(w))?;
    defects_vanish(&shifted, &pairs[..count.min(10)], 1)
}

/// Twisting by zero, form-power truncation, vanishing properties on
/// `count` probes each, and contraction after a random shift.
pub fn twisting_checks(dim: usize, count: usize, seed: u64) -> Result<()> {
    let trunc = 5;
    let f = assemble_fiber_morphism(dim, trunc, 2)?;
    let zero_src = MaurerCartan::zero(&f.source.zero);
    let zero_tgt = MaurerCartan::zero(&f.target.zero);
    let t = twist(&f, &zero_src, &zero_tgt)?;
    let mut s = Sampler::new(seed);
    let sh = Shape { dim, trunc, max_p: 3, max_x: 1, terms: 2 };
    for _ in 0..count.min(20) {
        let (a, b) = homogeneous_pair(&mut s, sh);
        expect_zero("twist by 0, arity 1", &t.eval(&[a.clone()])?.minus(&f.eval(&[a.clone()])?))?;
        expect_zero("twist by 0, arity 2", &t.eval(&[a.clone(), b.clone()])?.minus(&f.eval(&[a, b])?))?;
    }

    // theta = dx^i d_i with dx and d_i odd: theta^d != 0, theta^(d+1) = 0
    let st = solve_a(&crate::fedosov::ConnectionData::flat(dim), trunc)?;
    let mc = MaurerCartan::split_affine(st.b.clone())?;
    for m in 1..=dim + 1 {
        let power = theta_power(dim, m);
        if (m <= dim) == power.is_empty() {
            return Err(Error::Internal(format!("theta^{m} on a {dim}-dimensional base: {power:?}")));
        }
    }
    expect_eq("nilpotency bound", &mc.nilpotency_bound, &(dim + 1))?;
    if !mc.form_power_support(dim + 1).is_empty() {
        return Err(Error::Internal("B-power beyond the dimension has support".into()));
    }

    let w = WeightTable::standard()?;
    let rule = vanishes_beyond_cap();
    for _ in 0..count {
        let q = s.index(dim);
        let v = s.element(Family::Vec, sh, q, 0);
        let (q2, q3) = (s.index(dim), s.index(dim));
        let v2 = s.element(Family::Vec, sh, q2, 0);
        let p = s.element(Family::Vec, sh, q3, 1);
        let lin = s.element(Family::Vec, Shape { max_p: 1, ..sh }, q, 0);
        expect_zero("U_2 on two vector fields", &u2(w, &v, &v2)?)?;
        expect_zero("U_2 with a y-linear vector field", &u2(w, &lin, &p)?)?;
        if !rule(&[v.clone(), v2.clone(), v]) || !rule(&[lin, p.clone(), p]) {
            return Err(Error::Internal("vanishing rule misses a vector-field tuple".into()));
        }
    }
    Ok(())
}

/// `V(g) = dx^1 <c, g>` pairing the bivector part of the (unlifted)
/// argument with the constant 2-covector `c_ij = 1 + i + j`; a map of
/// degree -1 whose values have exterior degree one and are not D-closed.
pub fn spoiling_map(st: &FedosovState) -> PolyMap {
    let (d, n) = (st.dim(), st.trunc);
    Arc::new(move |a: &[Graded]| {
        let mut out = Graded::zero(Family::Form, d, n);
        for (k, c) in a[0].with_trunc(n).terms() {
            if let Slots::Vec(s) = &k.slots {
                if s.len() == 2 {
                    let w = qi(1 + s[0] as i64 + s[1] as i64);
                    out.insert(Key { slots: Slots::None, ..k.clone() }, c.scale(&w));
                }
            }
        }
        let dx1 = Graded::term(d, n, CoeffPoly::one(d), vec![0; d], &[0], Slots::None);
        Graded::left_mul(&dx1, &out).to_family(Family::Op)
    })
}

/// `theta^m` for `theta = sum_i dx^i d_i` in the algebra where `dx^i` and
/// `d_i` are both odd, keyed by (form mask, slot list).
pub fn theta_power(dim: usize, m: usize) -> std::collections::BTreeMap<(u32, Vec<u8>), i64> {
    let mut acc: std::collections::BTreeMap<(u32, Vec<u8>), i64> = [((0, vec![]), 1)].into();
    for _ in 0..m {
        let mut next = std::collections::BTreeMap::new();
        for ((mask, xi), c) in &acc {
            for i in 0..dim {
                // move dx^i left past the slots of the accumulated term
                let past = if xi.len() % 2 == 0 { 1 } else { -1 };
                let Some(sf) = crate::graded::dx_mul_sign(*mask, 1 << i) else { continue };
                let Some((xi2, sw)) = crate::graded::wedge_indices(xi, &[i as u8]) else { continue };
                *next.entry((mask | (1 << i), xi2)).or_insert(0) += c * past * sf as i64 * sw as i64;
            }
        }
        next.retain(|_, v| *v != 0);
        acc = next;
    }
    acc
}

/// Contraction after a shift that spoils exterior degree 0: arity-1 values
/// come back exactly, arity-2 values have exterior degree 0, are D-closed,
/// and the arity-2 relation still holds.
pub fn contraction_checks(spec: &ManifoldSpec) -> Result<()> {
    let p = build_pipeline(spec)?;
    let st = &p.state;
    let spoiled = shift(&p.morphism, 1, spoiling_map(st))?;
    let bivectors: Vec<Graded> = base_probes(spec.dim, 1).into_iter().filter(|v| v.terms().keys().all(|k| k.k() == 1)).collect();
    let mut spoilt = false;
    for v in &bivectors {
        spoilt |= exterior_degree(&spoiled.eval(&[v.clone()])?) > 0;
    }
    if !spoilt {
        return Err(Error::Internal("spoiling shift left exterior degree 0 on every probe".into()));
    }
    let restored = contract_to_fiber_zero(&spoiled, st)?;
    for v in &bivectors {
        expect_zero(&format!("contracted U_1({v})"), &restored.eval(&[v.clone()])?.minus(&p.morphism.eval(&[v.clone()])?))?;
    }
    for a in bivectors.iter().take(3) {
        for b in bivectors.iter().take(3) {
            let got = restored.eval(&[a.clone(), b.clone()])?;
            expect_eq(&format!("exterior degree of U_2({a}, {b})"), &exterior_degree(&got), &0)?;
            check_through(&format!("D U_2({a}, {b})"), &fedosov_d(&got, st)?, d_valid(&got))?;
            let defect = linf_defect(&restored, 2, &[a.clone(), b.clone()])?;
            check_through(&format!("arity-2 defect on ({a}, {b})"), &defect, d_valid(&got))?;
        }
    }
    Ok(())
}

/// Moyal closed form `C_n = (1/n!) (1/2)^n alpha^{i1 j1}..alpha^{in jn} d_I (x) d_J`.
pub fn moyal_coefficient(spec: &ManifoldSpec, n: u32) -> Result<Graded> {
    let d = spec.dim;
    let mut terms: Vec<(CoeffPoly, Vec<u32>, Vec<u32>)> = vec![(CoeffPoly::one(d), vec![0; d], vec![0; d])];
    for _ in 0..n {
        let mut next = Vec::new();
        for (c, a, b) in &terms {
            for i in 0..d {
                for j in 0..d {
                    if spec.poisson[i][j].as_constant().is_none() {
                        return Err(Error::Precondition("Moyal form needs constant alpha".into()));
                    }
                    if !spec.poisson[i][j].is_zero() {
                        let (mut a2, mut b2) = (a.clone(), b.clone());
                        a2[i] += 1;
                        b2[j] += 1;
                        next.push((c * &spec.poisson[i][j], a2, b2));
                    }
                }
            }
        }
        terms = next;
    }
    let w = qi(1) / (crate::poly::factorial(n) * Q::from_integer((1i64 << n).into()));
    let mut out = crate::fedosov::base_op(d);
    for (c, a, b) in terms {
        out.insert(Key { y: vec![0; d], dx: 0, slots: Slots::Op(vec![a, b]) }, c.scale(&w));
    }
    Ok(out)
}

fn star_checks(spec: &ManifoldSpec, star: &StarProduct) -> Result<()> {
    let constant = spec.poisson.iter().flatten().all(|c| c.as_constant().is_some());
    if spec.connection.is_flat() && constant {
        for (n, c) in star.coefficients.iter().enumerate() {
            expect_zero(&format!("C_{n} minus Moyal"), &c.minus(&moyal_coefficient(spec, n as u32)?))?;
        }
    }
    Ok(())
}

/// Run one named suite, or all of them.
pub fn run_identity_suite(spec: &ManifoldSpec, suite: &str) -> Result<Vec<CheckOutcome>> {
    if !SUITES.contains(&suite) {
        return Err(Error::Validation(format!("unknown suite `{suite}`; expected one of {}", SUITES.join(", "))));
    }
    let want = |name: &str| suite == "all" || suite == name;
    let d = spec.dim;
    let mut out = Vec::new();
    if want("algebra") {
        out.push(CheckOutcome::from_result("algebra.hodge", hodge_identity(d, 6.min(spec.trunc_order), 20, 1))?);
        out.push(CheckOutcome::from_result("algebra.brackets", bracket_axioms(d.min(3), 10, 2))?);
    }
    let needs_state = ["fedosov", "morphism", "equivariance", "star"].iter().any(|s| want(s));
    let state = if needs_state { Some(solve_a(&spec.connection, spec.trunc_order)?) } else { None };
    if want("fedosov") {
        let st = state.as_ref().expect("state built above");
        out.push(CheckOutcome::from_result("fedosov.flatness", fedosov_flatness(st))?);
        out.push(CheckOutcome::from_result("fedosov.resolution", resolution(st, spec.probe_degree, 12, 3))?);
    }
    if want("morphism") {
        let st = state.as_ref().expect("state built above");
        out.push(CheckOutcome::from_result("morphism.mu", morphism_property(st, spec.probe_degree.min(3)))?);
    }
    if want("linf") {
        out.push(CheckOutcome::from_result("linf.defects", linf_checks(d.min(3), 10, 4))?);
        out.push(if spec.connection.is_flat() && d >= 2 {
            CheckOutcome::from_result("linf.contraction", contraction_checks(spec))?
        } else {
            CheckOutcome::skip("linf.contraction", "bivector probes need structure maps beyond the arity cap")
        });
    }
    if want("twisting") {
        out.push(CheckOutcome::from_result("twisting.properties", twisting_checks(d.min(3), 20, 6))?);
    }
    let star = if (want("star") || want("equivariance")) && spec.star_requested() {
        Some(build_star_product(spec)?)
    } else {
        None
    };
    if want("star") {
        out.push(match &star {
            Some(st) => CheckOutcome::from_result("star.moyal", star_checks(spec, st))?,
            None => CheckOutcome::skip("star.moyal", "no star product requested"),
        });
    }
    if want("equivariance") {
        match &spec.group {
            None => out.push(CheckOutcome::skip("equivariance", "no group in spec")),
            Some(g) => {
                let p = build_pipeline(spec)?;
                out.extend(check_equivariance(g, &p, star.as_ref())?);
            }
        }
    }
    if want("weights") {
        let r = (|| {
            let derived = derive_weights()?;
            let std = WeightTable::standard()?;
            expect_eq("weight table", &derived.to_json().to_string(), &std.to_json().to_string())
        })();
        out.push(CheckOutcome::from_result("weights.derivation", r)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    const FLAT: &str = "version = 1\ndimension = 2\ntrunc_order = 6\nhbar_order = 2\nprobe_degree = 2\nalpha[1,2] = 1\ngroup_element = 0 -1 ; 1 0 | 0 0\n";
    const CURVED: &str = "version = 1\ndimension = 2\ntrunc_order = 6\nprobe_degree = 2\ngamma[2,1,1] = x2\n";

    fn assert_all_pass(text: &str, suite: &str) {
        let spec = ManifoldSpec::parse(text).unwrap();
        for o in run_identity_suite(&spec, suite).unwrap() {
            assert_ne!(o.status, Status::Fail, "{suite}: {o:?}");
        }
    }

    #[test]
    fn flat_algebra_and_fedosov() {
        assert_all_pass(FLAT, "algebra");
        assert_all_pass(FLAT, "fedosov");
        assert_all_pass(FLAT, "morphism");
    }

    #[test]
    fn flat_linf_and_twisting() {
        assert_all_pass(FLAT, "linf");
        assert_all_pass(FLAT, "twisting");
    }

    #[test]
    fn flat_star_and_equivariance() {
        assert_all_pass(FLAT, "star");
        assert_all_pass(FLAT, "equivariance");
    }

    #[test]
    fn curved_suites() {
        for suite in ["fedosov", "morphism", "linf", "star", "equivariance"] {
            assert_all_pass(CURVED, suite);
        }
    }

    #[test]
    fn unknown_suite_is_a_usage_error() {
        let spec = ManifoldSpec::parse(CURVED).unwrap();
        assert!(matches!(run_identity_suite(&spec, "nope"), Err(Error::Validation(_))));
    }
}
