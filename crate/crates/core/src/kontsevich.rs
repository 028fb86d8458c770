//! The fiberwise formality morphism on formal `R^d` up to arity two.
//!
//! `U1` is the HKR map. `U2` vanishes unless both arguments are bivectors;
//! on bivectors it is a weighted sum of the term shapes of [`TermShape`],
//! symmetrized in the two arguments, with weights fixed by requiring the
//! arity-two relation on a generic probe family. Forms pass through with the
//! sign `(-1)^{q1 + q2 (1 + k1)}`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::brackets::{hkr, hochschild_d, BracketContext, PolyMap};
use crate::error::{Error, Result};
use crate::graded::{coef_multi_deriv, unit, Family, Graded, Key, Slots, Vars};
use crate::linfinity::{DglaHandle, LinfMorphism, Vanishing};
use crate::poly::{fmt_q, XMono, Q};
use crate::random::{Sampler, Shape};

/// Bidifferential term shapes built from two bivectors `p`, `r` with
/// components `p^{ij}`; `d_i` differentiates in the fiber variable `y^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TermShape {
    /// `p^{ij} r^{kl} d_ik f d_jl g`
    Moyal,
    /// `p^{ij} d_i r^{kl} d_jk f d_l g`
    LeftHeavy,
    /// `p^{ij} d_i r^{kl} d_k f d_jl g`
    RightHeavy,
    /// `d_l p^{ij} d_i r^{kl} d_j f d_k g`
    Loop,
    /// `d_l p^{ij} d_i r^{kl} d_k f d_j g`
    LoopCrossed,
    /// `d_l p^{ij} d_i r^{kl} d_jk f g`
    LoopLeft,
    /// `d_l p^{ij} d_i r^{kl} f d_jk g`
    LoopRight,
}

impl TermShape {
    pub const ALL: [TermShape; 7] = [
        TermShape::Moyal,
        TermShape::LeftHeavy,
        TermShape::RightHeavy,
        TermShape::Loop,
        TermShape::LoopCrossed,
        TermShape::LoopLeft,
        TermShape::LoopRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TermShape::Moyal => "moyal",
            TermShape::LeftHeavy => "left_heavy",
            TermShape::RightHeavy => "right_heavy",
            TermShape::Loop => "loop",
            TermShape::LoopCrossed => "loop_crossed",
            TermShape::LoopLeft => "loop_left",
            TermShape::LoopRight => "loop_right",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            TermShape::Moyal => "p^{ij} r^{kl} d_ik f d_jl g",
            TermShape::LeftHeavy => "p^{ij} d_i r^{kl} d_jk f d_l g",
            TermShape::RightHeavy => "p^{ij} d_i r^{kl} d_k f d_jl g",
            TermShape::Loop => "d_l p^{ij} d_i r^{kl} d_j f d_k g",
            TermShape::LoopCrossed => "d_l p^{ij} d_i r^{kl} d_k f d_j g",
            TermShape::LoopLeft => "d_l p^{ij} d_i r^{kl} d_jk f g",
            TermShape::LoopRight => "d_l p^{ij} d_i r^{kl} f d_jk g",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Exact weights of the arity-two term shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightTable {
    pub weights: BTreeMap<TermShape, Q>,
    pub order_cap: u32,
    /// number of linear equations and rank of the system used to fix them
    pub equations: usize,
    pub rank: usize,
}

impl WeightTable {
    pub fn weight(&self, s: TermShape) -> Q {
        self.weights.get(&s).cloned().unwrap_or_else(Q::zero)
    }

    /// Weights derived once per process by [`derive_weights`].
    pub fn standard() -> Result<&'static WeightTable> {
        static TABLE: OnceLock<std::result::Result<WeightTable, Error>> = OnceLock::new();
        TABLE.get_or_init(derive_weights).as_ref().map_err(Clone::clone)
    }

    pub fn to_json(&self) -> Value {
        let shapes: serde_json::Map<String, Value> = TermShape::ALL
            .iter()
            .map(|&s| (s.name().to_string(), json!({ "term": s.formula(), "weight": fmt_q(&self.weight(s)) })))
            .collect();
        json!({
            "order_cap": self.order_cap,
            "equations": self.equations,
            "rank": self.rank,
            "shapes": shapes,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Validation(format!("weight table: {m}"));
        let order_cap = v["order_cap"].as_u64().ok_or_else(|| bad("missing order_cap"))? as u32;
        let equations = v["equations"].as_u64().unwrap_or(0) as usize;
        let rank = v["rank"].as_u64().unwrap_or(0) as usize;
        let mut weights = BTreeMap::new();
        for (name, entry) in v["shapes"].as_object().ok_or_else(|| bad("missing shapes"))? {
            let s = TermShape::from_name(name).ok_or_else(|| bad(&format!("unknown shape {name}")))?;
            let w = entry["weight"].as_str().ok_or_else(|| bad("weight must be a string"))?;
            let w: Q = w.parse().map_err(|_| bad(&format!("bad rational {w}")))?;
            if !w.is_zero() {
                weights.insert(s, w);
            }
        }
        Ok(WeightTable { weights, order_cap, equations, rank })
    }
}

/// `d/dy^l` of a section.
pub fn y_deriv(s: &Graded, l: usize) -> Graded {
    let e = unit(s.dim(), l);
    let mut out = s.zero_like();
    for (k, c) in s.terms() {
        if let Some((dc, y)) = coef_multi_deriv(Vars::Fiber, c, &k.y, &e) {
            out.insert(Key { y, dx: k.dx, slots: Slots::None }, dc);
        }
    }
    out
}

/// Antisymmetric component table `p^{ij}` of a bivector without forms.
fn components(p: &Graded) -> Vec<Vec<Graded>> {
    let d = p.dim();
    let zero = Graded::zero(Family::Form, d, p.trunc());
    let mut out = vec![vec![zero; d]; d];
    for (k, c) in p.terms() {
        let Slots::Vec(s) = &k.slots else { unreachable!() };
        let (i, j) = (s[0] as usize, s[1] as usize);
        let t = Graded::term(d, p.trunc(), c.clone(), k.y.clone(), &[], Slots::None);
        out[i][j] = out[i][j].plus(&t);
        out[j][i] = out[j][i].minus(&t);
    }
    out
}

fn add(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// One shape evaluated on two bivectors without forms.
pub fn shape_op(shape: TermShape, p: &Graded, r: &Graded) -> Graded {
    let (d, n) = (p.dim(), p.trunc());
    let pc = components(p);
    let rc = components(r);
    let e = |i: usize| unit(d, i);
    let mut out = Graded::zero(Family::Op, d, n);
    let mut push = |coef: &Graded, a: Vec<u32>, b: Vec<u32>| {
        if coef.is_zero() {
            return;
        }
        let op = Graded::monomial(d, n, Q::one(), vec![0; d], &[], Slots::Op(vec![a, b]));
        out = out.plus(&Graded::left_mul(coef, &op));
    };
    for i in 0..d {
        for j in 0..d {
            if pc[i][j].is_zero() && shape == TermShape::Moyal {
                continue;
            }
            for k in 0..d {
                for l in 0..d {
                    match shape {
                        TermShape::Moyal => {
                            let c = Graded::left_mul(&pc[i][j], &rc[k][l]);
                            push(&c, add(&e(i), &e(k)), add(&e(j), &e(l)));
                        }
                        TermShape::LeftHeavy | TermShape::RightHeavy => {
                            let c = Graded::left_mul(&pc[i][j], &y_deriv(&rc[k][l], i));
                            if shape == TermShape::LeftHeavy {
                                push(&c, add(&e(j), &e(k)), e(l));
                            } else {
                                push(&c, e(k), add(&e(j), &e(l)));
                            }
                        }
                        _ => {
                            let c = Graded::left_mul(&y_deriv(&pc[i][j], l), &y_deriv(&rc[k][l], i));
                            let z = vec![0; d];
                            match shape {
                                TermShape::Loop => push(&c, e(j), e(k)),
                                TermShape::LoopCrossed => push(&c, e(k), e(j)),
                                TermShape::LoopLeft => push(&c, add(&e(j), &e(k)), z),
                                _ => push(&c, z, add(&e(j), &e(k))),
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn symmetric_shape(shape: TermShape, p: &Graded, r: &Graded) -> Graded {
    shape_op(shape, p, r).plus(&shape_op(shape, r, p))
}

/// Split an element into form-free pieces keyed by exterior monomial and degree.
fn split(a: &Graded) -> BTreeMap<(u32, i32), Graded> {
    let mut out: BTreeMap<(u32, i32), Graded> = BTreeMap::new();
    for (k, c) in a.terms() {
        let e = out.entry((k.dx, k.k())).or_insert_with(|| a.zero_like());
        e.insert(Key { y: k.y.clone(), dx: 0, slots: k.slots.clone() }, c.clone());
    }
    out
}

fn form_unit(dim: usize, trunc: u32, dx: u32) -> Graded {
    let idx: Vec<usize> = (0..dim).filter(|i| dx & (1 << i) != 0).collect();
    Graded::monomial(dim, trunc, Q::one(), vec![0; dim], &idx, Slots::None)
}

/// First structure map: the HKR map.
pub fn u1(g: &Graded) -> Result<Graded> {
    hkr(g)
}

/// Second structure map.
pub fn u2(w: &WeightTable, a: &Graded, b: &Graded) -> Result<Graded> {
    a.check_compatible(b)?;
    let a = a.to_family(Family::Vec)?;
    let b = b.to_family(Family::Vec)?;
    let (d, n) = (a.dim(), a.trunc());
    let mut out = Graded::zero(Family::Op, d, n);
    let (sa, sb) = (split(&a), split(&b));
    for ((dxa, ka), pa) in &sa {
        for ((dxb, kb), pb) in &sb {
            if *ka <= 0 || *kb <= 0 {
                continue;
            }
            if *ka >= 2 || *kb >= 2 {
                return Err(Error::Capacity(format!(
                    "second structure map on polyvectors of degrees ({ka}, {kb}) is not implemented"
                )));
            }
            let mut core = Graded::zero(Family::Op, d, n);
            for (&s, wt) in &w.weights {
                core = core.plus(&symmetric_shape(s, pa, pb).scale(wt));
            }
            let (qa, qb) = (dxa.count_ones() as i32, dxb.count_ones() as i32);
            let v = Graded::left_mul(&form_unit(d, n, *dxa), &Graded::left_mul(&form_unit(d, n, *dxb), &core));
            out = out.plus(&if (qa + qb * (1 + ka)) % 2 == 0 { v } else { v.neg() });
        }
    }
    Ok(out)
}

fn is_vector_field(a: &Graded) -> bool {
    a.terms().keys().all(|k| k.k() == 0)
}

/// Rule for structure maps above the implemented arity: all-vector-field
/// arguments, an affine vector field among the arguments, or an output
/// degree below that of functions.
pub fn vanishes_beyond_cap() -> Vanishing {
    Arc::new(|args: &[Graded]| {
        if args.iter().any(Graded::is_zero) {
            return true;
        }
        if args.iter().all(is_vector_field) {
            return true;
        }
        if args.iter().any(|a| is_vector_field(a) && a.max_p().unwrap_or(0) <= 1) {
            return true;
        }
        let kmax: i32 = args.iter().map(|a| a.terms().keys().map(|k| k.k()).max().unwrap_or(-1)).sum();
        kmax + 1 - (args.len() as i32) < -1
    })
}

/// The fiberwise morphism with the given arity cap.
pub fn assemble_fiber_morphism(dim: usize, trunc: u32, arity_cap: usize) -> Result<LinfMorphism> {
    if arity_cap == 0 || arity_cap > 2 {
        return Err(Error::Capacity(format!("arity cap {arity_cap} requested; weights exist for arities 1 and 2")));
    }
    let mut maps: Vec<PolyMap> = vec![Arc::new(|a: &[Graded]| u1(&a[0]))];
    if arity_cap == 2 {
        let w = WeightTable::standard()?;
        maps.push(Arc::new(move |a: &[Graded]| u2(w, &a[0], &a[1])));
    }
    let mut f = LinfMorphism::new(
        DglaHandle::fiber_polyvectors(dim, trunc),
        DglaHandle::fiber_polydiff(dim, trunc),
        maps,
    )
    .with_vanishing(vanishes_beyond_cap());
    f.hbar_order_cap = 2;
    Ok(f)
}

/// Row-reduce `[a | b]` and return one solution (free variables zero).
fn solve_linear(a: &[Vec<Q>], b: &[Q]) -> (Option<Vec<Q>>, usize) {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = Q::one() / m[row][col].clone();
        for v in m[row].iter_mut() {
            *v *= inv.clone();
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..=cols {
                    let t = m[row][c].clone() * f.clone();
                    m[r][c] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let rank = pivots.len();
    if m[rank..].iter().any(|r| !r[cols].is_zero()) {
        return (None, rank);
    }
    let mut x = vec![Q::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    (Some(x), rank)
}

fn subsets_by_size(n: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// Fix the weights by the arity-two relation
/// `hochschild(U2(p, r)) = hkr[p, r] - [hkr p, hkr r]` on generic constant-in-x
/// bivector probes in dimension 3, choosing the solution of smallest support
/// (by size, then shape order).
pub fn derive_weights() -> Result<WeightTable> {
    let (d, n) = (3, 6);
    let ctx = BracketContext::fiber(d, n);
    let mut s = Sampler::new(0x5eed);
    let sh = Shape { dim: d, trunc: n, max_p: 2, max_x: 0, terms: 4 };
    let mut columns: Vec<BTreeMap<(Key, XMono), Q>> = vec![BTreeMap::new(); TermShape::ALL.len()];
    let mut rhs: BTreeMap<(Key, XMono), Q> = BTreeMap::new();
    let collect = |g: &Graded, into: &mut BTreeMap<(Key, XMono), Q>| {
        for (k, c) in g.terms() {
            for (m, v) in c.terms() {
                *into.entry((k.clone(), m.clone())).or_insert_with(Q::zero) += v.clone();
            }
        }
    };
    for _ in 0..4 {
        let p = s.element(Family::Vec, sh, 0, 1);
        let r = s.element(Family::Vec, sh, 0, 1);
        for (idx, &shape) in TermShape::ALL.iter().enumerate() {
            let col = hochschild_d(&ctx, &symmetric_shape(shape, &p, &r))?;
            collect(&col, &mut columns[idx]);
        }
        let target = hkr(&crate::brackets::schouten(&ctx, &p, &r)?)?
            .minus(&crate::brackets::gerstenhaber(&ctx, &hkr(&p)?, &hkr(&r)?)?);
        collect(&target, &mut rhs);
    }
    let mut keys: Vec<_> = rhs.keys().cloned().collect();
    for c in &columns {
        keys.extend(c.keys().cloned());
    }
    keys.sort();
    keys.dedup();
    let full: Vec<Vec<Q>> =
        keys.iter().map(|k| columns.iter().map(|c| c.get(k).cloned().unwrap_or_else(Q::zero)).collect()).collect();
    let b: Vec<Q> = keys.iter().map(|k| rhs.get(k).cloned().unwrap_or_else(Q::zero)).collect();
    let (_, rank) = solve_linear(&full, &b);
    for subset in subsets_by_size(TermShape::ALL.len()) {
        let sub: Vec<Vec<Q>> = full.iter().map(|r| subset.iter().map(|&c| r[c].clone()).collect()).collect();
        if let (Some(x), _) = solve_linear(&sub, &b) {
            let weights = subset
                .iter()
                .zip(x)
                .filter(|(_, w)| !w.is_zero())
                .map(|(&c, w)| (TermShape::ALL[c], w))
                .collect();
            return Ok(WeightTable { weights, order_cap: 2, equations: keys.len(), rank });
        }
    }
    Err(Error::Internal("the arity-two weight system has no solution".into()))
}
