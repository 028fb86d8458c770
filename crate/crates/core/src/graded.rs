//! Sparse graded elements: exterior forms on the base with values in fiber
//! functions, fiber polyvector fields or fiber polydifferential operators.
//!
//! A term is `c(x) * y^a * dx^I (x) slots`, stored as a [`Key`] mapped to its
//! [`CoeffPoly`]. Conventions:
//! - `dx^I` is a bitmask; the canonical order is increasing and the sign of
//!   reordering is absorbed into the coefficient;
//! - `y` is even, `dx` is odd;
//! - polyvector slots are a strictly increasing index list (wedge, odd among
//!   themselves), operator slots are an ordered tuple of multi-indices;
//! - the form factor always sits to the left of the fiber object, so
//!   `dx^I (x) P` is read as `dx^I * P`;
//! - terms with y-degree above `trunc` are dropped on insertion.
//!
//! The same representation serves base-level objects: with
//! [`Vars::Base`] the slots act on `x` and the coefficient carries the whole
//! dependence, while `y` stays trivial.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{falling, CoeffPoly, Q};

pub const UNBOUNDED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Form,
    Vec,
    Op,
}

/// Which variables derivatives and slots act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Vars {
    Fiber,
    Base,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slots {
    None,
    Vec(Vec<u8>),
    Op(Vec<Vec<u32>>),
}

impl Slots {
    pub fn family(&self) -> Family {
        match self {
            Slots::None => Family::Form,
            Slots::Vec(_) => Family::Vec,
            Slots::Op(_) => Family::Op,
        }
    }

    /// Polyvector / operator degree; functions have degree -1.
    pub fn k(&self) -> i32 {
        match self {
            Slots::None => -1,
            Slots::Vec(v) => v.len() as i32 - 1,
            Slots::Op(v) => v.len() as i32 - 1,
        }
    }

    pub fn empty(f: Family) -> Slots {
        match f {
            Family::Form => Slots::None,
            Family::Vec => Slots::Vec(vec![]),
            Family::Op => Slots::Op(vec![]),
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Slots::Op(v) => v.iter().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0),
            Slots::Vec(v) => (!v.is_empty()) as u32,
            Slots::None => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub y: Vec<u32>,
    pub dx: u32,
    pub slots: Slots,
}

impl Key {
    pub fn p(&self) -> u32 {
        self.y.iter().sum()
    }

    pub fn q(&self) -> u32 {
        self.dx.count_ones()
    }

    pub fn k(&self) -> i32 {
        self.slots.k()
    }

    pub fn grading(&self) -> Grading {
        Grading { q: self.q(), k: self.k(), p: self.p() }
    }
}

/// Per-term degrees: exterior degree, polyvector/operator degree, y-degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grading {
    pub q: u32,
    pub k: i32,
    pub p: u32,
}

impl Grading {
    pub fn total(&self) -> i32 {
        self.q as i32 + self.k
    }

    pub fn parity(&self) -> u32 {
        self.total().rem_euclid(2) as u32
    }
}

/// Sign of `dx^a * dx^b` rewritten in canonical order, or `None` if they overlap.
pub fn dx_mul_sign(a: u32, b: u32) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    let mut count = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 31 { 0 } else { a & !((1u32 << (j + 1)) - 1) };
        count += above.count_ones();
    }
    Some(if count % 2 == 0 { 1 } else { -1 })
}

/// Merge two strictly increasing index lists as a wedge product.
pub fn wedge_indices(a: &[u8], b: &[u8]) -> Option<(Vec<u8>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut swaps = 0usize;
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            swaps += a.len() - i;
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some((out, if swaps % 2 == 0 { 1 } else { -1 }))
}

/// Derivative of the coefficient `c * y^a` with multi-index `alpha` in the
/// chosen variables.
pub fn coef_multi_deriv(vars: Vars, c: &CoeffPoly, y: &[u32], alpha: &[u32]) -> Option<(CoeffPoly, Vec<u32>)> {
    if alpha.iter().all(|&a| a == 0) {
        return Some((c.clone(), y.to_vec()));
    }
    match vars {
        Vars::Fiber => {
            let mut f = Q::one();
            let mut y2 = y.to_vec();
            for (i, &a) in alpha.iter().enumerate() {
                if a > y[i] {
                    return None;
                }
                f *= falling(y[i], a);
                y2[i] -= a;
            }
            Some((c.scale(&f), y2))
        }
        Vars::Base => {
            let d = c.multi_deriv(alpha);
            (!d.is_zero()).then(|| (d, y.to_vec()))
        }
    }
}

pub fn unit(dim: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

fn add_vec(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graded {
    dim: usize,
    trunc: u32,
    family: Family,
    terms: BTreeMap<Key, CoeffPoly>,
}

impl Graded {
    pub fn zero(family: Family, dim: usize, trunc: u32) -> Self {
        assert!(dim <= 31, "dimension too large for the dx bitmask");
        Graded { dim, trunc, family, terms: BTreeMap::new() }
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(self.family, self.dim, self.trunc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn terms(&self) -> &BTreeMap<Key, CoeffPoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `c` to the term at `key`; drops zeros and over-truncation degrees.
    pub fn insert(&mut self, key: Key, c: CoeffPoly) {
        debug_assert_eq!(key.slots.family(), self.family, "slot family mismatch");
        debug_assert_eq!(key.y.len(), self.dim);
        if c.is_zero() || key.p() > self.trunc {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn insert_scaled(&mut self, key: Key, c: &CoeffPoly, s: &Q) {
        if !s.is_zero() {
            self.insert(key, c.scale(s));
        }
    }

    /// A single term; the polyvector index list may be unsorted and is
    /// normalized here.
    pub fn term(dim: usize, trunc: u32, coeff: CoeffPoly, y: Vec<u32>, dx: &[usize], slots: Slots) -> Self {
        let family = slots.family();
        let mut g = Self::zero(family, dim, trunc);
        let mut sign = 1;
        let mut mask = 0u32;
        for &i in dx {
            match dx_mul_sign(mask, 1 << i) {
                Some(s) => {
                    sign *= s;
                    mask |= 1 << i;
                }
                None => return g,
            }
        }
        let slots = match slots {
            Slots::Vec(v) => {
                let mut acc: Vec<u8> = vec![];
                for i in v {
                    match wedge_indices(&acc, &[i]) {
                        Some((w, s)) => {
                            acc = w;
                            sign *= s;
                        }
                        None => return g,
                    }
                }
                Slots::Vec(acc)
            }
            s => s,
        };
        let c = if sign < 0 { -&coeff } else { coeff };
        g.insert(Key { y, dx: mask, slots }, c);
        g
    }

    /// Constant-coefficient term with rational coefficient `c`.
    pub fn monomial(dim: usize, trunc: u32, c: Q, y: Vec<u32>, dx: &[usize], slots: Slots) -> Self {
        Self::term(dim, trunc, CoeffPoly::constant(dim, c), y, dx, slots)
    }

    /// The fiber coordinate `y^{i+1}` as a section.
    pub fn y_var(dim: usize, trunc: u32, i: usize) -> Self {
        Self::monomial(dim, trunc, Q::one(), unit(dim, i), &[], Slots::None)
    }

    /// A function of `x` only, as a section.
    pub fn function(dim: usize, trunc: u32, c: CoeffPoly) -> Self {
        Self::term(dim, trunc, c, vec![0; dim], &[], Slots::None)
    }

    /// The fiberwise multiplication `m(a, b) = a b`.
    pub fn mult(dim: usize, trunc: u32) -> Self {
        let z = vec![0; dim];
        Self::monomial(dim, trunc, Q::one(), z.clone(), &[], Slots::Op(vec![z.clone(), z]))
    }

    pub fn check_compatible(&self, o: &Graded) -> Result<()> {
        if self.dim != o.dim {
            return Err(Error::Structural(format!("dimension {} vs {}", self.dim, o.dim)));
        }
        if self.trunc != o.trunc {
            return Err(Error::Structural(format!("truncation order {} vs {}", self.trunc, o.trunc)));
        }
        if self.family != o.family {
            return Err(Error::Structural(format!("container kind {:?} vs {:?}", self.family, o.family)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Graded) -> Result<Graded> {
        self.check_compatible(o)?;
        Ok(self.plus(o))
    }

    /// Unchecked sum; panics in debug builds on mismatched kinds.
    pub fn plus(&self, o: &Graded) -> Graded {
        debug_assert!(self.check_compatible(o).is_ok(), "{:?}", self.check_compatible(o));
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, o: &Graded) -> Graded {
        self.plus(&o.neg())
    }

    pub fn neg(&self) -> Graded {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, s: &Q) -> Graded {
        let mut out = self.zero_like();
        for (k, c) in &self.terms {
            out.insert_scaled(k.clone(), c, s);
        }
        out
    }

    pub fn scale_poly(&self, p: &CoeffPoly) -> Graded {
        let mut out = self.zero_like();
        for (k, c) in &self.terms {
            out.insert(k.clone(), c * p);
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&CoeffPoly) -> CoeffPoly) -> Graded {
        let mut out = self.zero_like();
        for (k, c) in &self.terms {
            out.insert(k.clone(), f(c));
        }
        out
    }

    pub fn filter(&self, pred: impl Fn(&Key) -> bool) -> Graded {
        let mut out = self.zero_like();
        for (k, c) in &self.terms {
            if pred(k) {
                out.insert(k.clone(), c.clone());
            }
        }
        out
    }

    /// Terms of y-degree at most `deg`.
    pub fn truncated_to(&self, deg: u32) -> Graded {
        self.filter(|k| k.p() <= deg)
    }

    pub fn with_trunc(&self, trunc: u32) -> Graded {
        let mut out = Graded::zero(self.family, self.dim, trunc);
        for (k, c) in &self.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn exterior_part(&self, q: u32) -> Graded {
        self.filter(|k| k.q() == q)
    }

    pub fn degree_part(&self, k: i32) -> Graded {
        self.filter(|key| key.k() == k)
    }

    pub fn max_q(&self) -> Option<u32> {
        self.terms.keys().map(Key::q).max()
    }

    pub fn max_p(&self) -> Option<u32> {
        self.terms.keys().map(Key::p).max()
    }

    pub fn min_p(&self) -> Option<u32> {
        self.terms.keys().map(Key::p).min()
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(|k| k.slots.order()).max().unwrap_or(0)
    }

    pub fn grade_of(&self) -> BTreeSet<Grading> {
        self.terms.keys().map(Key::grading).collect()
    }

    /// Total degree `q + k` if every term shares it.
    pub fn total_degree(&self) -> Option<i32> {
        let set: BTreeSet<i32> = self.terms.keys().map(|k| k.q() as i32 + k.k()).collect();
        (set.len() == 1).then(|| *set.iter().next().unwrap())
    }

    /// Total degree, with a fallback for the zero element.
    pub fn degree_or(&self, fallback: i32) -> i32 {
        self.total_degree().unwrap_or(fallback)
    }

    /// First term as a human-readable string, for failure reports.
    pub fn first_term(&self) -> Option<String> {
        self.terms.iter().next().map(|(k, c)| fmt_term(k, c))
    }

    /// Reinterpret degree -1 terms in another family.
    pub fn to_family(&self, f: Family) -> Result<Graded> {
        if f == self.family {
            return Ok(self.clone());
        }
        let mut out = Graded::zero(f, self.dim, self.trunc);
        for (k, c) in &self.terms {
            let slots = match (&k.slots, f) {
                (s, Family::Op) if s.k() == 0 && matches!(s, Slots::Vec(_)) => {
                    // a vector field is also a first-order operator
                    let Slots::Vec(v) = s else { unreachable!() };
                    Slots::Op(vec![unit(self.dim, v[0] as usize)])
                }
                (s, _) if s.k() == -1 => Slots::empty(f),
                _ => {
                    return Err(Error::Structural(format!(
                        "cannot view a {:?} term of degree {} as {:?}",
                        self.family,
                        k.k(),
                        f
                    )))
                }
            };
            out.insert(Key { y: k.y.clone(), dx: k.dx, slots }, c.clone());
        }
        Ok(out)
    }

    /// `omega * self` for a form-valued section `omega` (no fiber dependence
    /// beyond y, which multiplies the coefficient).
    pub fn left_mul(omega: &Graded, a: &Graded) -> Graded {
        let mut out = a.zero_like();
        for (k1, c1) in &omega.terms {
            for (k2, c2) in &a.terms {
                let Some(s) = dx_mul_sign(k1.dx, k2.dx) else { continue };
                let c = c1 * c2;
                let c = if s < 0 { -&c } else { c };
                out.insert(Key { y: add_vec(&k1.y, &k2.y), dx: k1.dx | k2.dx, slots: k2.slots.clone() }, c);
            }
        }
        out
    }

    /// Graded-commutative product of sections.
    pub fn wedge_mul(&self, o: &Graded) -> Result<Graded> {
        self.check_compatible(o)?;
        if self.family != Family::Form {
            return Err(Error::Structural("wedge_mul takes sections".into()));
        }
        Ok(Graded::left_mul(self, o))
    }

    /// Evaluate an operator on `k+1` sections. Each slot's derivative acts
    /// on its argument; forms are collected left to right as
    /// `dx^I dx^{J_0} ... dx^{J_k}`.
    pub fn apply_op(&self, vars: Vars, args: &[Graded]) -> Result<Graded> {
        if self.family != Family::Op {
            return Err(Error::Structural("apply_op needs an operator".into()));
        }
        let mut out = Graded::zero(Family::Form, self.dim, self.trunc);
        for a in args {
            if a.family != Family::Form || a.dim != self.dim {
                return Err(Error::Structural("apply_op arguments must be sections of the same dimension".into()));
            }
        }
        for (key, c) in &self.terms {
            let Slots::Op(slots) = &key.slots else { unreachable!() };
            if slots.len() != args.len() {
                return Err(Error::Structural(format!(
                    "operator of arity {} applied to {} arguments",
                    slots.len(),
                    args.len()
                )));
            }
            // running partial products: (coefficient, y, dx)
            let mut partial: Vec<(CoeffPoly, Vec<u32>, u32)> = vec![(c.clone(), key.y.clone(), key.dx)];
            for (alpha, arg) in slots.iter().zip(args) {
                let mut next = Vec::new();
                for (pc, py, pdx) in &partial {
                    for (ak, ac) in &arg.terms {
                        let Some((dc, dy)) = coef_multi_deriv(vars, ac, &ak.y, alpha) else { continue };
                        let Some(s) = dx_mul_sign(*pdx, ak.dx) else { continue };
                        let y = add_vec(py, &dy);
                        if y.iter().sum::<u32>() > self.trunc {
                            continue;
                        }
                        let prod = pc * &dc;
                        next.push((if s < 0 { -&prod } else { prod }, y, pdx | ak.dx));
                    }
                }
                partial = next;
            }
            for (pc, py, pdx) in partial {
                out.insert(Key { y: py, dx: pdx, slots: Slots::None }, pc);
            }
        }
        Ok(out)
    }
}

pub fn fmt_term(k: &Key, c: &CoeffPoly) -> String {
    let mut parts = vec![format!("({c})")];
    for (i, &e) in k.y.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("y{}", i + 1)),
            _ => parts.push(format!("y{}^{}", i + 1, e)),
        }
    }
    for i in 0..32 {
        if k.dx & (1 << i) != 0 {
            parts.push(format!("dx{}", i + 1));
        }
    }
    match &k.slots {
        Slots::None => {}
        Slots::Vec(v) => {
            let s: Vec<String> = v.iter().map(|i| format!("d{}", i + 1)).collect();
            parts.push(format!("[{}]", s.join("^")));
        }
        Slots::Op(v) => {
            let s: Vec<String> = v
                .iter()
                .map(|a| {
                    let f: Vec<String> = a
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| if e == 1 { format!("d{}", i + 1) } else { format!("d{}^{}", i + 1, e) })
                        .collect();
                    if f.is_empty() {
                        "1".to_string()
                    } else {
                        f.join(" ")
                    }
                })
                .collect();
            parts.push(format!("<{}>", s.join(" | ")));
        }
    }
    parts.join("*")
}

impl fmt::Display for Graded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| fmt_term(k, c)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::qi;

    fn y(i: usize) -> Graded {
        Graded::y_var(2, 4, i)
    }

    fn dx(i: usize) -> Graded {
        Graded::monomial(2, 4, qi(1), vec![0, 0], &[i], Slots::None)
    }

    #[test]
    fn add_examples() {
        assert_eq!(y(0).add(&y(0)).unwrap(), y(0).scale(&qi(2)));
        assert!(y(0).add(&y(0).neg()).unwrap().is_empty());
        let x1 = CoeffPoly::var(2, 0);
        let x2 = CoeffPoly::var(2, 1);
        let t1 = Graded::term(2, 4, x1.clone(), vec![1, 0], &[1], Slots::None);
        let t2 = Graded::term(2, 4, x2.clone(), vec![1, 0], &[1], Slots::None);
        let expect = Graded::term(2, 4, &x1 + &x2, vec![1, 0], &[1], Slots::None);
        assert_eq!(t1.add(&t2).unwrap(), expect);
    }

    #[test]
    fn add_rejects_mismatch() {
        let a = Graded::y_var(2, 4, 0);
        let b = Graded::y_var(2, 3, 0);
        assert!(matches!(a.add(&b), Err(Error::Structural(_))));
    }

    #[test]
    fn wedge_examples() {
        let p = dx(0).wedge_mul(&dx(1)).unwrap();
        let n = dx(1).wedge_mul(&dx(0)).unwrap();
        assert_eq!(p, n.neg());
        assert_eq!(y(0).wedge_mul(&y(1)).unwrap(), y(1).wedge_mul(&y(0)).unwrap());
        let a = Graded::y_var(2, 2, 0).wedge_mul(&Graded::y_var(2, 2, 1)).unwrap();
        assert!(a.wedge_mul(&Graded::y_var(2, 2, 0)).unwrap().is_empty());
    }

    #[test]
    fn apply_op_examples() {
        let p = Graded::monomial(2, 4, qi(1), vec![0, 0], &[], Slots::Op(vec![vec![1, 0], vec![0, 1]]));
        let r = p.apply_op(Vars::Fiber, &[y(0), y(1)]).unwrap();
        assert_eq!(r, Graded::monomial(2, 4, qi(1), vec![0, 0], &[], Slots::None));
        let m = Graded::mult(2, 4);
        assert_eq!(m.apply_op(Vars::Fiber, &[y(0), y(1)]).unwrap(), y(0).wedge_mul(&y(1)).unwrap());
        let euler = Graded::monomial(2, 4, qi(1), vec![1, 0], &[], Slots::Op(vec![vec![1, 0]]));
        let y1y2 = y(0).wedge_mul(&y(1)).unwrap();
        assert_eq!(euler.apply_op(Vars::Fiber, &[y1y2.clone()]).unwrap(), y1y2);
        assert!(m.apply_op(Vars::Fiber, &[y(0)]).is_err());
    }

    #[test]
    fn grade_examples() {
        let t = Graded::monomial(2, 4, qi(1), vec![1, 0], &[1], Slots::None);
        assert_eq!(t.grade_of().into_iter().collect::<Vec<_>>(), vec![Grading { q: 1, k: -1, p: 1 }]);
        let a = Graded::monomial(2, 4, qi(1), vec![0, 0], &[], Slots::Vec(vec![0, 1]));
        assert_eq!(a.grade_of().into_iter().collect::<Vec<_>>(), vec![Grading { q: 0, k: 1, p: 0 }]);
        let m = Graded::mult(2, 4);
        assert_eq!(m.grade_of().into_iter().collect::<Vec<_>>(), vec![Grading { q: 0, k: 1, p: 0 }]);
    }

    #[test]
    fn polyvector_slots_normalize_with_sign() {
        let a = Graded::monomial(3, 4, qi(1), vec![0, 0, 0], &[], Slots::Vec(vec![2, 0]));
        let b = Graded::monomial(3, 4, qi(-1), vec![0, 0, 0], &[], Slots::Vec(vec![0, 2]));
        assert_eq!(a, b);
        assert!(Graded::monomial(3, 4, qi(1), vec![0, 0, 0], &[], Slots::Vec(vec![1, 1])).is_empty());
    }

    #[test]
    fn dx_sign_table() {
        assert_eq!(dx_mul_sign(0b01, 0b10), Some(1));
        assert_eq!(dx_mul_sign(0b10, 0b01), Some(-1));
        assert_eq!(dx_mul_sign(0b110, 0b001), Some(1));
        assert_eq!(dx_mul_sign(0b011, 0b011), None);
    }
}
