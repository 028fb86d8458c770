//! L-infinity morphisms as tables of evaluable structure maps.
//!
//! Degrees are total degrees `q + k`. The relation checked at arity `n <= 2`
//! is
//!
//! ```text
//! n = 1:  d2 F1(g) - F1(d1 g) = 0
//! n = 2:  d_Hom F2 (g1, g2) = F1 [g1, g2] - [F1 g1, F1 g2]
//! ```
//!
//! with `d_Hom` from [`crate::brackets::d_hom`] at degree `-1`. With this
//! sign a morphism carries Maurer–Cartan elements (`d a + 1/2 [a, a] = 0`)
//! to Maurer–Cartan elements via `sum_n F_n(a, .., a) / n!`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::One;

use crate::brackets::{bracket, d_hom, hochschild_d, BracketContext, PolyMap, Unary};
use crate::error::{Error, Result};
use crate::fedosov::{d_base, solve_exact, FedosovState};
use crate::graded::{Family, Graded, Vars, UNBOUNDED};
use crate::poly::{factorial, qi, Q};

pub type Bracket = Arc<dyn Fn(&Graded, &Graded) -> Result<Graded> + Send + Sync>;
/// Decides that a structure map above the arity cap vanishes on given arguments.
pub type Vanishing = Arc<dyn Fn(&[Graded]) -> bool + Send + Sync>;

/// A differential graded Lie algebra given by evaluable operations.
#[derive(Clone)]
pub struct DglaHandle {
    pub name: String,
    pub differential: Unary,
    pub bracket: Bracket,
    /// zero element fixing family, dimension and truncation
    pub zero: Graded,
}

impl DglaHandle {
    pub fn new(name: impl Into<String>, zero: Graded, differential: Unary, bracket: Bracket) -> Self {
        DglaHandle { name: name.into(), differential, bracket, zero }
    }

    pub fn d(&self, a: &Graded) -> Result<Graded> {
        (self.differential)(a)
    }

    pub fn br(&self, a: &Graded, b: &Graded) -> Result<Graded> {
        (self.bracket)(a, b)
    }

    /// Fiberwise polyvector-valued forms with the de Rham differential in `x`.
    pub fn fiber_polyvectors(dim: usize, trunc: u32) -> Self {
        let ctx = BracketContext::fiber(dim, trunc);
        DglaHandle::new(
            "fiber polyvectors",
            Graded::zero(Family::Vec, dim, trunc),
            Arc::new(|a: &Graded| Ok(d_base(a))),
            Arc::new(move |a: &Graded, b: &Graded| bracket(&ctx, a, b)),
        )
    }

    /// Fiberwise polydifferential-operator-valued forms with `d + hochschild`.
    pub fn fiber_polydiff(dim: usize, trunc: u32) -> Self {
        let ctx = BracketContext::fiber(dim, trunc);
        DglaHandle::new(
            "fiber polydifferential operators",
            Graded::zero(Family::Op, dim, trunc),
            Arc::new(move |a: &Graded| Ok(d_base(a).plus(&hochschild_d(&ctx, &a.to_family(Family::Op)?)?))),
            Arc::new(move |a: &Graded, b: &Graded| bracket(&ctx, &a.to_family(Family::Op)?, &b.to_family(Family::Op)?)),
        )
    }

    /// Polyvector fields on the base with zero differential.
    pub fn base_polyvectors(dim: usize) -> Self {
        let ctx = BracketContext::base(dim, UNBOUNDED);
        DglaHandle::new(
            "base polyvectors",
            Graded::zero(Family::Vec, dim, UNBOUNDED),
            Arc::new(|a: &Graded| Ok(a.zero_like())),
            Arc::new(move |a: &Graded, b: &Graded| bracket(&ctx, a, b)),
        )
    }

    /// Same algebra with differential `d + [mc, .]`.
    pub fn twisted(&self, mc: &Graded) -> Self {
        let (d, br, mc) = (self.differential.clone(), self.bracket.clone(), mc.clone());
        DglaHandle {
            name: format!("{} twisted", self.name),
            differential: Arc::new(move |a: &Graded| Ok(d(a)?.plus(&br(&mc, a)?))),
            bracket: self.bracket.clone(),
            zero: self.zero.clone(),
        }
    }

    /// Check `d^2 = 0` and the derivation rule on samples, up to y-degree `valid`.
    pub fn check_on(&self, samples: &[Graded], valid: u32) -> Result<()> {
        for a in samples {
            let dd = self.d(&self.d(a)?)?.truncated_to(valid);
            if !dd.is_zero() {
                return Err(Error::Internal(format!("{}: d^2 != 0 on {a}: {}", self.name, dd.first_term().unwrap_or_default())));
            }
            for b in samples {
                let lhs = self.d(&self.br(a, b)?)?;
                let sign = if a.degree_or(0) % 2 == 0 { Q::one() } else { -Q::one() };
                let rhs = self.br(&self.d(a)?, b)?.plus(&self.br(a, &self.d(b)?)?.scale(&sign));
                let diff = lhs.minus(&rhs).truncated_to(valid);
                if !diff.is_zero() {
                    return Err(Error::Internal(format!(
                        "{}: d is not a derivation of the bracket: {}",
                        self.name,
                        diff.first_term().unwrap_or_default()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Cache results of a polylinear map by argument tuple.
pub fn memoize(map: PolyMap) -> PolyMap {
    let cache: Arc<Mutex<HashMap<Vec<Graded>, Result<Graded>>>> = Arc::default();
    Arc::new(move |args: &[Graded]| {
        if let Some(v) = cache.lock().expect("memo cache poisoned").get(args) {
            return v.clone();
        }
        let v = map(args);
        cache.lock().expect("memo cache poisoned").insert(args.to_vec(), v.clone());
        v
    })
}

/// Structure maps `F_1 .. F_cap` between two DGLAs.
#[derive(Clone)]
pub struct LinfMorphism {
    pub source: DglaHandle,
    pub target: DglaHandle,
    maps: Vec<PolyMap>,
    pub hbar_order_cap: u32,
    vanishing: Option<Vanishing>,
}

impl LinfMorphism {
    pub fn new(source: DglaHandle, target: DglaHandle, maps: Vec<PolyMap>) -> Self {
        let cap = maps.len() as u32;
        LinfMorphism { source, target, maps, hbar_order_cap: cap, vanishing: None }
    }

    /// A DGLA homomorphism viewed as an L-infinity morphism with `F_2 = 0`.
    pub fn from_homomorphism(source: DglaHandle, target: DglaHandle, f: Unary) -> Self {
        let zero = target.zero.clone();
        let f1: PolyMap = Arc::new(move |a: &[Graded]| f(&a[0]));
        let f2: PolyMap = Arc::new(move |_: &[Graded]| Ok(zero.clone()));
        LinfMorphism::new(source, target, vec![f1, f2])
    }

    /// Rule for maps above the cap that vanish on given arguments.
    pub fn with_vanishing(mut self, rule: Vanishing) -> Self {
        self.vanishing = Some(rule);
        self
    }

    pub fn arity_cap(&self) -> usize {
        self.maps.len()
    }

    pub fn map(&self, n: usize) -> Result<PolyMap> {
        match self.maps.get(n.wrapping_sub(1)) {
            Some(m) => Ok(m.clone()),
            None => Err(Error::Capacity(format!(
                "structure map of arity {n} requested, arity cap is {}",
                self.arity_cap()
            ))),
        }
    }

    /// `F_n(args)` with `n = args.len()`.
    pub fn eval(&self, args: &[Graded]) -> Result<Graded> {
        let n = args.len();
        if n == 0 {
            return Err(Error::Structural("structure maps take at least one argument".into()));
        }
        if n > self.arity_cap() {
            if let Some(rule) = &self.vanishing {
                if rule(args) {
                    return Ok(self.target.zero.clone());
                }
            }
            return Err(Error::Capacity(format!(
                "structure map of arity {n} is needed but only arities up to {} are implemented",
                self.arity_cap()
            )));
        }
        (self.maps[n - 1])(args)
    }

    fn with_maps(&self, maps: Vec<PolyMap>) -> Self {
        LinfMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            maps,
            hbar_order_cap: self.hbar_order_cap,
            vanishing: None,
        }
    }

    /// Precompose with a DGLA homomorphism `g : new_source -> source`.
    pub fn precompose(&self, new_source: DglaHandle, g: Unary) -> Self {
        let maps = self
            .maps
            .iter()
            .map(|f| {
                let (f, g) = (f.clone(), g.clone());
                memoize(Arc::new(move |args: &[Graded]| {
                    let lifted = args.iter().map(|a| g(a)).collect::<Result<Vec<_>>>()?;
                    f(&lifted)
                }) as PolyMap)
            })
            .collect();
        LinfMorphism { source: new_source, ..self.with_maps(maps) }
    }
}

fn d1(f: &LinfMorphism) -> Unary {
    f.source.differential.clone()
}

fn d2(f: &LinfMorphism) -> Unary {
    f.target.differential.clone()
}

/// Left side minus right side of the L-infinity relation at arity `n`.
pub fn linf_defect(f: &LinfMorphism, n: usize, args: &[Graded]) -> Result<Graded> {
    if args.len() != n {
        return Err(Error::Structural(format!("arity {n} with {} arguments", args.len())));
    }
    if n > 2 || n > f.arity_cap() {
        return Err(Error::Capacity(format!("L-infinity relation at arity {n} is beyond the implemented cap")));
    }
    if let Some(a) = args.iter().find(|a| !a.is_zero() && a.total_degree().is_none()) {
        return Err(Error::Precondition(format!("argument is not homogeneous: {a}")));
    }
    if n == 1 {
        return d_hom(f.map(1)?, 0, d1(f), d2(f))(args);
    }
    let f1 = f.map(1)?;
    let lhs = d_hom(f.map(2)?, -1, d1(f), d2(f))(args)?;
    let rhs = f1(&[f.source.br(&args[0], &args[1])?])?.minus(&f.target.br(&f1(&args[..1])?, &f1(&args[1..])?)?);
    Ok(lhs.minus(&rhs))
}

/// Right side of the arity-2 relation as a polylinear map of degree 0.
pub fn relation_rhs(f: &LinfMorphism) -> Result<PolyMap> {
    let (f1, src, tgt) = (f.map(1)?, f.source.clone(), f.target.clone());
    Ok(Arc::new(move |a: &[Graded]| {
        Ok(f1(&[src.br(&a[0], &a[1])?])?.minus(&tgt.br(&f1(&a[..1])?, &f1(&a[1..])?)?))
    }))
}

/// A Maurer–Cartan element, split into parts for polylinear expansion.
#[derive(Clone, Debug)]
pub struct MaurerCartan {
    pub value: Graded,
    pub parts: Vec<Graded>,
    /// smallest `m` such that every `m`-fold product of the form parts vanishes
    pub nilpotency_bound: usize,
}

impl MaurerCartan {
    pub fn new(value: Graded, parts: Vec<Graded>) -> Result<Self> {
        let sum = parts.iter().fold(value.zero_like(), |acc, p| acc.plus(p));
        if sum != value {
            return Err(Error::Structural("Maurer–Cartan parts do not sum to the value".into()));
        }
        let q_min = value.terms().keys().map(|k| k.q()).min();
        let nilpotency_bound = match q_min {
            None => 1,
            Some(0) => {
                return Err(Error::Precondition(
                    "twisting element has an exterior-degree-0 part; its powers do not terminate".into(),
                ))
            }
            Some(q) => value.dim() / q as usize + 1,
        };
        Ok(MaurerCartan { value, parts, nilpotency_bound })
    }

    /// Split into the part of y-degree at most one and the rest.
    pub fn split_affine(value: Graded) -> Result<Self> {
        let aff = value.filter(|k| k.p() <= 1);
        let rest = value.filter(|k| k.p() > 1);
        let parts = [aff, rest].into_iter().filter(|p| !p.is_zero()).collect();
        Self::new(value, parts)
    }

    pub fn zero(like: &Graded) -> Self {
        MaurerCartan { value: like.zero_like(), parts: vec![], nilpotency_bound: 1 }
    }

    /// Exterior monomials `dx^I` occurring in the `m`-fold product of the
    /// form parts of the value.
    pub fn form_power_support(&self, m: usize) -> Vec<u32> {
        let masks: std::collections::BTreeSet<u32> = self.value.terms().keys().map(|k| k.dx).collect();
        let mut cur: std::collections::BTreeSet<u32> = [0].into();
        for _ in 0..m {
            cur = cur
                .iter()
                .flat_map(|&s| masks.iter().filter(move |&&t| s & t == 0).map(move |&t| s | t))
                .collect();
        }
        cur.into_iter().collect()
    }
}

fn count_vectors(parts: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..parts {
        let mut next = vec![];
        for v in &out {
            let used: usize = v.iter().sum();
            for c in 0..=(max_total - used) {
                let mut w = v.clone();
                w.push(c);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// `U_n(v) = sum_m (1/m!) F_{n+m}(B, .., B, v)`, expanded over the parts of
/// `B`; differentials become `d + [B, .]` on both sides.
pub fn twist(f: &LinfMorphism, b_src: &MaurerCartan, b_tgt: &MaurerCartan) -> Result<LinfMorphism> {
    let source = f.source.twisted(&b_src.value);
    let target = f.target.twisted(&b_tgt.value);
    let counts = count_vectors(b_src.parts.len(), b_src.nilpotency_bound - 1);
    let mut maps = Vec::new();
    for _ in 1..=f.arity_cap() {
        let (base, parts, counts) = (f.clone(), b_src.parts.clone(), counts.clone());
        let map: PolyMap = Arc::new(move |args: &[Graded]| {
            let mut out = base.target.zero.clone();
            for c in &counts {
                let mut full = Vec::new();
                let mut norm = Q::one();
                for (part, &n) in parts.iter().zip(c) {
                    full.extend(std::iter::repeat(part.clone()).take(n));
                    norm *= factorial(n as u32);
                }
                full.extend_from_slice(args);
                let v = base.eval(&full)?;
                out = out.plus(&v.scale(&(Q::one() / norm)));
            }
            Ok(out)
        });
        maps.push(memoize(map));
    }
    Ok(LinfMorphism { source, target, maps, hbar_order_cap: f.hbar_order_cap, vanishing: None })
}

fn parity_sign(e: i32) -> Q {
    if e.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Shift by a polylinear map `V_n` of degree `-n`: `F_n` gains `d_Hom V_n`
/// and, for `n = 1`, `F_2` gains the induced quadratic correction.
pub fn shift(f: &LinfMorphism, n: usize, v: PolyMap) -> Result<LinfMorphism> {
    if n == 0 || n > f.arity_cap() || n > 2 {
        return Err(Error::Capacity(format!("shift at arity {n} is beyond the implemented cap")));
    }
    let v = memoize(v);
    let dv = memoize(d_hom(v.clone(), -(n as i32), d1(f), d2(f)));
    let mut maps = f.maps.clone();
    let fn_old = f.maps[n - 1].clone();
    let dv_n = dv.clone();
    maps[n - 1] = memoize(Arc::new(move |a: &[Graded]| Ok(fn_old(a)?.plus(&dv_n(a)?))));
    if n == 1 && f.arity_cap() >= 2 {
        let (f1, f2, src, tgt) = (f.maps[0].clone(), f.maps[1].clone(), f.source.clone(), f.target.clone());
        let half = Q::one() / qi(2);
        maps[1] = memoize(Arc::new(move |a: &[Graded]| {
            let (g1, g2) = (&a[..1], &a[1..]);
            let s = parity_sign(a[0].degree_or(0));
            let mut out = f2(a)?;
            out = out.minus(&tgt.br(&f1(g1)?, &v(g2)?)?.scale(&s));
            out = out.minus(&tgt.br(&v(g1)?, &f1(g2)?)?);
            let quad = tgt.br(&v(g1)?, &dv(g2)?)?.plus(&tgt.br(&dv(g1)?, &v(g2)?)?.scale(&s));
            out = out.minus(&quad.scale(&half));
            out = out.plus(&v(&[src.br(&a[0], &a[1])?])?);
            Ok(out)
        }));
    }
    Ok(f.with_maps(maps))
}

/// Kill exterior degrees `q = d, .., 1` of every structure map, lowest arity
/// first, by shifting with `V = -solve_exact(top component)`.
pub fn contract_to_fiber_zero(f: &LinfMorphism, st: &FedosovState) -> Result<LinfMorphism> {
    let d = st.dim() as u32;
    let mut cur = f.clone();
    for n in 1..=cur.arity_cap() {
        for q in (1..=d).rev() {
            let fnq = cur.map(n)?;
            let st = st.clone();
            let v: PolyMap = Arc::new(move |a: &[Graded]| {
                let top = fnq(a)?.exterior_part(q);
                match solve_exact(&top, &st) {
                    Ok(b) => Ok(b.neg()),
                    Err(Error::Residual { degree, detail }) => Err(Error::Internal(format!(
                        "exterior degree {q} component is not D-closed at y-degree {degree}: {detail}"
                    ))),
                    Err(e) => Err(e),
                }
            });
            cur = shift(&cur, n, v)?;
        }
    }
    Ok(cur)
}

/// Values of a structure map must be exterior-degree zero after contraction.
pub fn exterior_degree(g: &Graded) -> u32 {
    g.max_q().unwrap_or(0)
}

/// The fiber-level view used for brackets of base-level data.
pub fn base_context(dim: usize) -> BracketContext {
    BracketContext { vars: Vars::Base, dim, trunc: UNBOUNDED }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::hkr;
    use crate::graded::Slots;
    use crate::poly::CoeffPoly;
    use crate::random::{Sampler, Shape};

    fn hkr_morphism(dim: usize, trunc: u32) -> LinfMorphism {
        LinfMorphism::from_homomorphism(
            DglaHandle::fiber_polyvectors(dim, trunc),
            DglaHandle::fiber_polydiff(dim, trunc),
            Arc::new(hkr),
        )
    }

    #[test]
    fn hkr_is_a_chain_map() {
        let f = hkr_morphism(2, 5);
        let mut s = Sampler::new(3);
        let sh = Shape { dim: 2, trunc: 5, max_p: 3, max_x: 2, terms: 3 };
        for _ in 0..20 {
            let q = s.index(3);
            let k = s.int(-1, 1) as i32;
            let g = s.element(Family::Vec, sh, q, k);
            assert!(linf_defect(&f, 1, &[g]).unwrap().is_zero());
        }
    }

    #[test]
    fn homomorphism_defect_vanishes() {
        // the identity on polyvectors is a DGLA homomorphism
        let h = DglaHandle::fiber_polyvectors(2, 5);
        let f = LinfMorphism::from_homomorphism(h.clone(), h, Arc::new(|a: &Graded| Ok(a.clone())));
        let mut s = Sampler::new(5);
        let sh = Shape { dim: 2, trunc: 5, max_p: 3, max_x: 1, terms: 2 };
        for _ in 0..10 {
            let q = s.index(2);
            let a = s.element(Family::Vec, sh, q, 0);
            let b = s.element(Family::Vec, sh, 0, 1);
            assert!(linf_defect(&f, 2, &[a, b]).unwrap().is_zero());
        }
    }

    #[test]
    fn capacity_errors() {
        let f = hkr_morphism(2, 4);
        let g = Graded::y_var(2, 4, 0).to_family(Family::Vec).unwrap();
        assert!(matches!(f.eval(&[g.clone(), g.clone(), g.clone()]), Err(Error::Capacity(_))));
        assert!(matches!(linf_defect(&f, 3, &[g.clone(), g.clone(), g]), Err(Error::Capacity(_))));
    }

    #[test]
    fn twist_by_zero_is_identity() {
        let f = hkr_morphism(2, 4);
        let zero = MaurerCartan::zero(&Graded::zero(Family::Vec, 2, 4));
        let zt = MaurerCartan::zero(&Graded::zero(Family::Op, 2, 4));
        let t = twist(&f, &zero, &zt).unwrap();
        let v = Graded::term(2, 4, CoeffPoly::var(2, 0), vec![1, 1], &[1], Slots::Vec(vec![0]));
        assert_eq!(t.eval(&[v.clone()]).unwrap(), f.eval(&[v]).unwrap());
    }

    #[test]
    fn form_powers_terminate() {
        let theta = crate::fedosov::theta(3, 4);
        let b = MaurerCartan::split_affine(theta).unwrap();
        assert_eq!(b.nilpotency_bound, 4);
        assert_eq!(b.form_power_support(3), vec![0b111]);
        assert!(b.form_power_support(4).is_empty());
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let f = hkr_morphism(2, 4);
        let z = Graded::zero(Family::Op, 2, 4);
        let s = shift(&f, 1, Arc::new(move |_: &[Graded]| Ok(z.clone()))).unwrap();
        let v = Graded::term(2, 4, CoeffPoly::var(2, 1), vec![0, 2], &[], Slots::Vec(vec![0, 1]));
        assert_eq!(s.eval(&[v.clone()]).unwrap(), f.eval(&[v]).unwrap());
    }
}
