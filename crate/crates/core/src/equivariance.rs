//! Finite groups of affine maps `x -> M x + t` acting on every graded kind.
//!
//! The action is `(g a)(x, y, dx) = a(g^-1 x, M^-1 y, M^-1 dx)` with
//! `d/dy^i -> sum_j M_ji d/dy^j`; base-level operator slots transform like
//! fiber ones. Christoffel symbols follow
//! `G'^k_ij(x) = M_ka G^a_bc(g^-1 x) N_bi N_cj` with `N = M^-1`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fedosov::ConnectionData;
use crate::graded::{dx_mul_sign, wedge_indices, Graded, Key, Slots};
use crate::pipeline::{base_probes, probe_monomials, tau_map, Pipeline, StarProduct};
use crate::poly::{fmt_q, CoeffPoly, Q};
use crate::report::{expect_eq, expect_zero, CheckOutcome};

pub type Matrix = Vec<Vec<Q>>;

fn identity(d: usize) -> Matrix {
    (0..d).map(|i| (0..d).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| &a[i][k] * &b[k][j]).fold(Q::zero(), |s, v| s + v)).collect())
        .collect()
}

fn mat_vec(a: &Matrix, v: &[Q]) -> Vec<Q> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).fold(Q::zero(), |s, t| s + t)).collect()
}

fn mat_inverse(a: &Matrix) -> Option<Matrix> {
    let d = a.len();
    let mut m: Vec<Vec<Q>> = a.iter().zip(identity(d)).map(|(r, e)| r.iter().cloned().chain(e).collect()).collect();
    for col in 0..d {
        let p = (col..d).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = Q::one() / m[col][col].clone();
        for v in m[col].iter_mut() {
            *v *= inv.clone();
        }
        for r in 0..d {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..2 * d {
                    let t = &m[col][c] * &f;
                    m[r][c] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[d..].to_vec()).collect())
}

/// `x -> M x + t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineMap {
    pub m: Matrix,
    pub t: Vec<Q>,
    inv: Matrix,
}

impl AffineMap {
    pub fn new(m: Matrix, t: Vec<Q>) -> Result<Self> {
        let d = m.len();
        if m.iter().any(|r| r.len() != d) || t.len() != d {
            return Err(Error::Validation("group element has inconsistent dimensions".into()));
        }
        let inv = mat_inverse(&m).ok_or_else(|| Error::Validation("group element matrix is singular".into()))?;
        Ok(AffineMap { m, t, inv })
    }

    pub fn identity(d: usize) -> Self {
        AffineMap { m: identity(d), t: vec![Q::zero(); d], inv: identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// `self o other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let m = mat_mul(&self.m, &other.m);
        let t: Vec<Q> = mat_vec(&self.m, &other.t).into_iter().zip(&self.t).map(|(a, b)| a + b).collect();
        AffineMap { m, t, inv: mat_mul(&other.inv, &self.inv) }
    }

    pub fn inverse(&self) -> AffineMap {
        let t = mat_vec(&self.inv, &self.t).into_iter().map(|v| -v).collect();
        AffineMap { m: self.inv.clone(), t, inv: self.m.clone() }
    }

    /// Linear part of the inverse.
    pub fn inv_matrix(&self) -> &Matrix {
        &self.inv
    }

    /// `f(g^-1 x)`.
    pub fn pull(&self, f: &CoeffPoly) -> CoeffPoly {
        let b: Vec<Q> = mat_vec(&self.inv, &self.t).into_iter().map(|v| -v).collect();
        f.affine_substitute(&self.inv, &b)
    }

    pub fn describe(&self) -> String {
        let rows: Vec<String> = self.m.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>().join(" ")).collect();
        let t: Vec<String> = self.t.iter().map(fmt_q).collect();
        format!("{} | {}", rows.join(" ; "), t.join(" "))
    }
}

/// A finite group of affine maps, closed under composition.
#[derive(Clone, Debug)]
pub struct AffineAction {
    pub dim: usize,
    pub elements: Vec<AffineMap>,
}

/// Largest group generated before giving up.
pub const MAX_GROUP_ORDER: usize = 256;

impl AffineAction {
    /// Close a set of generators under composition.
    pub fn generate(dim: usize, generators: Vec<AffineMap>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::Validation(format!("group element of dimension {} in dimension {dim}", g.dim())));
        }
        let mut elements = vec![AffineMap::identity(dim)];
        let mut frontier = elements.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for a in &frontier {
                for g in &generators {
                    let c = g.compose(a);
                    if !elements.contains(&c) {
                        elements.push(c.clone());
                        next.push(c);
                        if elements.len() > MAX_GROUP_ORDER {
                            return Err(Error::Validation(format!(
                                "generated group exceeds {MAX_GROUP_ORDER} elements (not finite?)"
                            )));
                        }
                    }
                }
            }
            frontier = next;
        }
        elements.sort();
        let action = AffineAction { dim, elements };
        action.validate()?;
        Ok(action)
    }

    /// Check identity, closure and inverses.
    pub fn validate(&self) -> Result<()> {
        if !self.elements.contains(&AffineMap::identity(self.dim)) {
            return Err(Error::Validation("group lacks the identity".into()));
        }
        for a in &self.elements {
            if !self.elements.contains(&a.inverse()) {
                return Err(Error::Validation(format!("inverse of {} missing", a.describe())));
            }
            for b in &self.elements {
                if !self.elements.contains(&a.compose(b)) {
                    return Err(Error::Validation(format!("group not closed: {} o {}", a.describe(), b.describe())));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

fn poly_mul(a: &BTreeMap<Vec<u32>, Q>, b: &BTreeMap<Vec<u32>, Q>) -> BTreeMap<Vec<u32>, Q> {
    let mut out: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(Q::zero) += ca * cb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `prod_i (sum_j a[j][i] v_j)^{e_i}` when `transpose`, else rows `a[i][j]`.
fn linear_power(a: &Matrix, e: &[u32], transpose: bool) -> BTreeMap<Vec<u32>, Q> {
    let d = e.len();
    let mut out: BTreeMap<Vec<u32>, Q> = [(vec![0; d], Q::one())].into();
    for (i, &n) in e.iter().enumerate() {
        let mut lin: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for j in 0..d {
            let c = if transpose { &a[j][i] } else { &a[i][j] };
            if !c.is_zero() {
                let mut v = vec![0; d];
                v[j] = 1;
                lin.insert(v, c.clone());
            }
        }
        for _ in 0..n {
            out = poly_mul(&out, &lin);
        }
    }
    out
}

/// `prod_{i in mask} (sum_j n[i][j] dx^j)` as signed masks.
fn form_image(n: &Matrix, mask: u32) -> BTreeMap<u32, Q> {
    let d = n.len();
    let mut out: BTreeMap<u32, Q> = [(0u32, Q::one())].into();
    for i in (0..d).filter(|i| mask & (1 << i) != 0) {
        let mut next: BTreeMap<u32, Q> = BTreeMap::new();
        for (m, c) in &out {
            for j in 0..d {
                if n[i][j].is_zero() {
                    continue;
                }
                let Some(s) = dx_mul_sign(*m, 1 << j) else { continue };
                let v = c * &n[i][j];
                *next.entry(m | (1 << j)).or_insert_with(Q::zero) += if s < 0 { -v } else { v };
            }
        }
        next.retain(|_, v| !v.is_zero());
        out = next;
    }
    out
}

fn slot_image(m: &Matrix, slots: &Slots) -> Vec<(Slots, Q)> {
    match slots {
        Slots::None => vec![(Slots::None, Q::one())],
        Slots::Vec(idx) => {
            let d = m.len();
            let mut acc: Vec<(Vec<u8>, Q)> = vec![(vec![], Q::one())];
            for &i in idx {
                let mut next: BTreeMap<Vec<u8>, Q> = BTreeMap::new();
                for (w, c) in &acc {
                    for j in 0..d {
                        let mji = &m[j][i as usize];
                        if mji.is_zero() {
                            continue;
                        }
                        let Some((w2, s)) = wedge_indices(w, &[j as u8]) else { continue };
                        let v = c * mji;
                        *next.entry(w2).or_insert_with(Q::zero) += if s < 0 { -v } else { v };
                    }
                }
                acc = next.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            }
            acc.into_iter().map(|(w, c)| (Slots::Vec(w), c)).collect()
        }
        Slots::Op(betas) => {
            let mut acc: Vec<(Vec<Vec<u32>>, Q)> = vec![(vec![], Q::one())];
            for b in betas {
                let img = linear_power(m, b, true);
                let mut next = Vec::new();
                for (s, c) in &acc {
                    for (e, v) in &img {
                        let mut s2 = s.clone();
                        s2.push(e.clone());
                        next.push((s2, c * v));
                    }
                }
                acc = next;
            }
            acc.into_iter().map(|(s, c)| (Slots::Op(s), c)).collect()
        }
    }
}

/// Action of a group element on a graded element (fiber or base level).
pub fn act(g: &AffineMap, a: &Graded) -> Graded {
    let n = g.inv_matrix();
    let mut out = a.zero_like();
    for (k, c) in a.terms() {
        let c = g.pull(c);
        let ys = linear_power(n, &k.y, false);
        let forms = form_image(n, k.dx);
        let slots = slot_image(&g.m, &k.slots);
        for (y, cy) in &ys {
            for (dx, cf) in &forms {
                for (s, cs) in &slots {
                    let w = cy * cf * cs;
                    out.insert_scaled(Key { y: y.clone(), dx: *dx, slots: s.clone() }, &c, &w);
                }
            }
        }
    }
    out
}

/// Action on a polynomial function of `x`.
pub fn act_function(g: &AffineMap, f: &CoeffPoly) -> CoeffPoly {
    g.pull(f)
}

/// Affine transformation law of Christoffel symbols.
pub fn act_connection(g: &AffineMap, conn: &ConnectionData) -> ConnectionData {
    let d = conn.dim();
    let (m, n) = (&g.m, g.inv_matrix());
    let pulled: Vec<Vec<Vec<CoeffPoly>>> =
        conn.table().iter().map(|a| a.iter().map(|b| b.iter().map(|c| g.pull(c)).collect()).collect()).collect();
    let mut out = vec![vec![vec![CoeffPoly::zero(d); d]; d]; d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = CoeffPoly::zero(d);
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            let w = &(&m[k][a] * &n[b][i]) * &n[c][j];
                            if !w.is_zero() && !pulled[a][b][c].is_zero() {
                                acc = &acc + &pulled[a][b][c].scale(&w);
                            }
                        }
                    }
                }
                out[k][i][j] = acc;
            }
        }
    }
    ConnectionData::new(d, out).expect("the transformation law preserves symmetry")
}

/// `|G|^-1 sum_g g . conn`.
pub fn average_connection(group: &AffineAction, conn: &ConnectionData) -> ConnectionData {
    let d = conn.dim();
    let mut acc = vec![vec![vec![CoeffPoly::zero(d); d]; d]; d];
    for g in &group.elements {
        let t = act_connection(g, conn);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    acc[k][i][j] = &acc[k][i][j] + t.gamma(k, i, j);
                }
            }
        }
    }
    let w = Q::one() / Q::from_integer((group.order() as i64).into());
    let avg = acc.into_iter().map(|a| a.into_iter().map(|b| b.into_iter().map(|c| c.scale(&w)).collect()).collect()).collect();
    ConnectionData::new(d, avg).expect("averaging preserves symmetry")
}

/// Precondition for the equivariance checks: the connection is fixed by every element.
pub fn require_invariant_connection(group: &AffineAction, conn: &ConnectionData) -> Result<()> {
    for g in &group.elements {
        let t = act_connection(g, conn);
        if &t != conn {
            let d = conn.dim();
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        if t.gamma(k, i, j) != conn.gamma(k, i, j) {
                            return Err(Error::Precondition(format!(
                                "connection is not invariant under [{}]: G^{}_{}{} = {} becomes {}",
                                g.describe(),
                                k + 1,
                                i + 1,
                                j + 1,
                                conn.gamma(k, i, j),
                                t.gamma(k, i, j)
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// `g . a == a` for every element; the first violating element otherwise.
pub fn first_violation<'a>(group: &'a AffineAction, a: &Graded) -> Option<&'a AffineMap> {
    group.elements.iter().find(|g| &act(g, a) != a)
}

fn sweep(group: &AffineAction, what: &str, f: impl Fn(&AffineMap) -> Result<()>) -> Result<()> {
    for g in &group.elements {
        f(g).map_err(|e| match e {
            Error::Internal(d) => Error::Internal(format!("{what} under [{}]: {d}", g.describe())),
            e => e,
        })?;
    }
    Ok(())
}

/// The invariance assertions for an invariant connection: `g A = A`,
/// `g tau = tau g`, `g U_n = U_n g` on probe tuples and, when `alpha` is
/// invariant, `g(f * h) = g f * g h`.
pub fn check_equivariance(group: &AffineAction, p: &Pipeline, star: Option<&StarProduct>) -> Result<Vec<CheckOutcome>> {
    require_invariant_connection(group, &p.spec.connection)?;
    let d = p.spec.dim;
    let st = &p.state;
    let mut out = Vec::new();

    let r = sweep(group, "g A = A", |g| {
        expect_zero("g A - A", &act(g, &st.a).minus(&st.a))?;
        expect_zero("g B - B", &act(g, &st.b).minus(&st.b))
    });
    out.push(CheckOutcome::from_result("equivariance.fedosov_connection", r)?);

    let tau = tau_map(st);
    let probes = base_probes(d, p.spec.probe_degree.min(2));
    let r = sweep(group, "g tau = tau g", |g| {
        for f in &probes {
            expect_zero(&format!("tau on {f}"), &act(g, &tau(f)?).minus(&tau(&act(g, f))?))?;
        }
        Ok(())
    });
    out.push(CheckOutcome::from_result("equivariance.tau", r)?);

    let small = base_probes(d, 1);
    let mut tuples: Vec<Vec<Graded>> = small.iter().map(|a| vec![a.clone()]).collect();
    let bivectors: Vec<&Graded> = small.iter().filter(|a| a.terms().keys().all(|k| k.k() == 1)).collect();
    for a in &bivectors {
        for b in &bivectors {
            tuples.push(vec![(*a).clone(), (*b).clone()]);
        }
    }
    let skipped = std::sync::atomic::AtomicUsize::new(0);
    let r = sweep(group, "g U_n = U_n g", |g| {
        for t in &tuples {
            let lhs = match p.morphism.eval(t) {
                Err(Error::Capacity(_)) => {
                    skipped.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    continue;
                }
                v => act(g, &v?),
            };
            let moved: Vec<Graded> = t.iter().map(|a| act(g, a)).collect();
            expect_zero(&format!("U_{} on {}", t.len(), t[0]), &lhs.minus(&p.morphism.eval(&moved)?))?;
        }
        Ok(())
    });
    let n_skipped = skipped.into_inner();
    out.push(if r.is_ok() && n_skipped == tuples.len() * group.order() {
        CheckOutcome::skip("equivariance.morphism", "every probe tuple needs a structure map beyond the arity cap")
    } else {
        CheckOutcome::from_result("equivariance.morphism", r)?
    });

    let alpha = p.spec.alpha();
    match star {
        None => out.push(CheckOutcome::skip("equivariance.star_product", "no star product requested")),
        Some(_) if first_violation(group, &alpha).is_some() => {
            out.push(CheckOutcome::skip("equivariance.star_product", "Poisson structure is not invariant"))
        }
        Some(star) => {
            let fns = probe_monomials(d, p.spec.probe_degree);
            let r = sweep(group, "g(f * h) = g f * g h", |g| {
                for (n, c) in star.coefficients.iter().enumerate() {
                    expect_zero(&format!("g C_{n} - C_{n}"), &act(g, c).minus(c))?;
                }
                for f in &fns {
                    for h in &fns {
                        let lhs = act_function(g, &star.product(f, h)?);
                        let rhs = star.product(&act_function(g, f), &act_function(g, h))?;
                        expect_eq(&format!("g({f} * {h})"), &lhs, &rhs)?;
                    }
                }
                Ok(())
            });
            out.push(CheckOutcome::from_result("equivariance.star_product", r)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::{delta, delta_inv, sigma};
    use crate::graded::Family;
    use crate::poly::{q, qi};
    use crate::random::{Sampler, Shape};

    fn neg_id() -> AffineMap {
        AffineMap::new(vec![vec![qi(-1), qi(0)], vec![qi(0), qi(-1)]], vec![qi(0), qi(0)]).unwrap()
    }

    fn rot() -> AffineMap {
        AffineMap::new(vec![vec![qi(0), qi(-1)], vec![qi(1), qi(0)]], vec![qi(0), qi(0)]).unwrap()
    }

    #[test]
    fn group_generation() {
        assert_eq!(AffineAction::generate(2, vec![neg_id()]).unwrap().order(), 2);
        assert_eq!(AffineAction::generate(2, vec![rot()]).unwrap().order(), 4);
        let shear = AffineMap::new(vec![vec![qi(1), qi(1)], vec![qi(0), qi(1)]], vec![qi(0), qi(0)]).unwrap();
        assert!(matches!(AffineAction::generate(2, vec![shear]), Err(Error::Validation(_))));
        let sing = AffineMap::new(vec![vec![qi(1), qi(1)], vec![qi(1), qi(1)]], vec![qi(0), qi(0)]);
        assert!(sing.is_err());
    }

    #[test]
    fn pushforward_examples() {
        let d1 = Graded::monomial(2, 4, qi(1), vec![0, 0], &[], Slots::Vec(vec![0]));
        assert_eq!(act(&neg_id(), &d1), d1.neg());
        let a = Graded::monomial(2, 4, qi(1), vec![0, 0], &[], Slots::Vec(vec![0, 1]));
        assert_eq!(act(&neg_id(), &a), a);
        // rotation sends d1 to d2
        let d2 = Graded::monomial(2, 4, qi(1), vec![0, 0], &[], Slots::Vec(vec![1]));
        assert_eq!(act(&rot(), &d1), d2);
        let x1 = CoeffPoly::var(2, 0);
        // (g f)(x) = f(g^-1 x); g^-1 (x1, x2) = (x2, -x1)
        assert_eq!(act_function(&rot(), &x1), CoeffPoly::var(2, 1));
    }

    #[test]
    fn christoffel_law() {
        let x = |i| CoeffPoly::var(2, i);
        let c = ConnectionData::from_entries(2, &[((1, 0, 0), x(1))]).unwrap();
        assert_eq!(act_connection(&neg_id(), &c), c);
        let c1 = ConnectionData::from_entries(2, &[((1, 0, 0), x(0))]).unwrap();
        assert_eq!(act_connection(&neg_id(), &c1), c1);
        let k = ConnectionData::from_entries(2, &[((1, 0, 0), CoeffPoly::one(2))]).unwrap();
        let kneg = ConnectionData::from_entries(2, &[((1, 0, 0), CoeffPoly::constant(2, qi(-1)))]).unwrap();
        assert_eq!(act_connection(&neg_id(), &k), kneg);
        let g = AffineAction::generate(2, vec![neg_id()]).unwrap();
        assert!(average_connection(&g, &k).is_flat());
        assert!(matches!(require_invariant_connection(&g, &k), Err(Error::Precondition(_))));
        // the tensor law on the connection element agrees with the Christoffel law
        let w = AffineMap::new(vec![vec![qi(2), qi(1)], vec![qi(1), qi(1)]], vec![q(1, 2), qi(-3)]).unwrap();
        let c2 = ConnectionData::from_entries(2, &[((1, 0, 0), x(1)), ((0, 0, 1), &x(0) * &x(1))]).unwrap();
        assert_eq!(act(&w, &c2.element(4)), act_connection(&w, &c2).element(4));
    }

    #[test]
    fn action_axioms_and_commutation() {
        let g = AffineMap::new(vec![vec![qi(2), qi(1)], vec![qi(1), qi(1)]], vec![q(1, 2), qi(-3)]).unwrap();
        let h = AffineMap::new(vec![vec![qi(0), qi(1)], vec![qi(-1), qi(3)]], vec![qi(1), qi(0)]).unwrap();
        let mut s = Sampler::new(8);
        let sh = Shape { dim: 2, trunc: 4, max_p: 3, max_x: 2, terms: 3 };
        for fam in [Family::Form, Family::Vec, Family::Op] {
            for _ in 0..5 {
                let a = s.mixed(fam, sh, 1);
                assert_eq!(act(&g, &act(&h, &a)), act(&g.compose(&h), &a));
                assert_eq!(act(&AffineMap::identity(2), &a), a);
                assert_eq!(act(&g, &delta(&a)), delta(&act(&g, &a)));
                assert_eq!(act(&g, &delta_inv(&a)), delta_inv(&act(&g, &a)));
                assert_eq!(act(&g, &sigma(&a)), sigma(&act(&g, &a)));
            }
        }
    }

    fn pipeline_for(text: &str) -> (AffineAction, Pipeline, StarProduct) {
        let spec = crate::spec::ManifoldSpec::parse(text).unwrap();
        let star = crate::pipeline::build_star_product(&spec).unwrap();
        let p = crate::pipeline::build_pipeline(&spec).unwrap();
        (spec.group.clone().unwrap(), p, star)
    }

    #[test]
    fn invariant_star_products() {
        for gen in ["-1 0 ; 0 -1 | 0 0", "0 -1 ; 1 0 | 0 0"] {
            let text = format!("version = 1\ndimension = 2\nhbar_order = 2\nprobe_degree = 2\nalpha[1,2] = 1\ngroup_element = {gen}\n");
            let (g, p, star) = pipeline_for(&text);
            let out = check_equivariance(&g, &p, Some(&star)).unwrap();
            assert_eq!(out.len(), 4);
            for o in &out {
                assert_eq!(o.status, crate::report::Status::Pass, "{gen}: {o:?}");
            }
        }
    }

    #[test]
    fn non_invariant_connection_is_rejected() {
        let spec = crate::spec::ManifoldSpec::parse(
            "version = 1\ndimension = 2\ngamma[2,1,1] = 1\ngroup_element = -1 0 ; 0 -1 | 0 0\n",
        )
        .unwrap();
        let p = crate::pipeline::build_pipeline(&spec).unwrap();
        match check_equivariance(spec.group.as_ref().unwrap(), &p, None) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("-1 0 ; 0 -1"), "{msg}"),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn fiber_maps_commute_with_linear_substitutions() {
        use crate::kontsevich::{u1, u2, WeightTable};
        let w = WeightTable::standard().unwrap();
        let g = AffineMap::new(vec![vec![qi(2), qi(1), qi(0)], vec![qi(1), qi(1), qi(0)], vec![qi(0), q(1, 3), qi(1)]], vec![qi(0); 3]).unwrap();
        let mut s = Sampler::new(12);
        let sh = Shape { dim: 3, trunc: 5, max_p: 2, max_x: 1, terms: 2 };
        for _ in 0..8 {
            let (qa, qb) = (s.index(3), s.index(3));
            let a = s.element(Family::Vec, sh, qa, 1);
            let b = s.element(Family::Vec, sh, qb, 1);
            assert_eq!(act(&g, &u1(&a).unwrap()), u1(&act(&g, &a)).unwrap());
            assert_eq!(act(&g, &u2(w, &a, &b).unwrap()), u2(w, &act(&g, &a), &act(&g, &b)).unwrap());
        }
    }
}
