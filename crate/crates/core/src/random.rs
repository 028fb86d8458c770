//! Seeded generators of random sparse elements for identity checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graded::{Family, Graded, Slots};
use crate::poly::{qi, CoeffPoly, XMono};

/// Shape of the random elements to draw.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub dim: usize,
    pub trunc: u32,
    pub max_p: u32,
    /// maximum x-degree of coefficients (0 gives constants)
    pub max_x: u32,
    pub terms: usize,
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn nonzero(&mut self) -> i64 {
        let v = self.int(1, 3);
        if self.rng.gen_bool(0.5) {
            -v
        } else {
            v
        }
    }

    pub fn multi_index(&mut self, dim: usize, max_deg: u32) -> Vec<u32> {
        let deg = self.int(0, max_deg as i64) as u32;
        self.multi_index_exact(dim, deg)
    }

    pub fn multi_index_exact(&mut self, dim: usize, deg: u32) -> Vec<u32> {
        let mut v = vec![0; dim];
        for _ in 0..deg {
            let i = self.index(dim);
            v[i] += 1;
        }
        v
    }

    pub fn coeff(&mut self, dim: usize, max_x: u32) -> CoeffPoly {
        let mut c = CoeffPoly::zero(dim);
        let n = if max_x == 0 { 1 } else { self.int(1, 2) as usize };
        for _ in 0..n {
            let x = self.multi_index(dim, max_x);
            c.add_term(XMono { x, hbar: 0 }, qi(self.nonzero()));
        }
        c
    }

    fn subset(&mut self, dim: usize, size: usize) -> Vec<usize> {
        let mut all: Vec<usize> = (0..dim).collect();
        for i in (1..all.len()).rev() {
            let j = self.index(i + 1);
            all.swap(i, j);
        }
        let mut s: Vec<usize> = all.into_iter().take(size).collect();
        s.sort();
        s
    }

    /// Random homogeneous element with exterior degree `q` and degree `k`;
    /// `k` is ignored for sections.
    pub fn element(&mut self, family: Family, sh: Shape, q: usize, k: i32) -> Graded {
        let mut g = Graded::zero(family, sh.dim, sh.trunc);
        for _ in 0..sh.terms {
            let y = self.multi_index(sh.dim, sh.max_p);
            let dx = self.subset(sh.dim, q);
            let slots = match family {
                Family::Form => Slots::None,
                Family::Vec => {
                    let s = self.subset(sh.dim, (k + 1) as usize);
                    Slots::Vec(s.into_iter().map(|i| i as u8).collect())
                }
                Family::Op => Slots::Op((0..(k + 1)).map(|_| self.multi_index(sh.dim, 2)).collect()),
            };
            let c = self.coeff(sh.dim, sh.max_x);
            g = g.plus(&Graded::term(sh.dim, sh.trunc, c, y, &dx, slots));
        }
        g
    }

    /// Random element mixing exterior degrees and (for polyvectors and
    /// operators) degrees up to `max_k`.
    pub fn mixed(&mut self, family: Family, sh: Shape, max_k: i32) -> Graded {
        let mut g = Graded::zero(family, sh.dim, sh.trunc);
        for _ in 0..3 {
            let q = self.index(sh.dim + 1);
            let k = self.int(-1, max_k as i64) as i32;
            let k = if family == Family::Vec { k.min(sh.dim as i32 - 1) } else { k };
            g = g.plus(&self.element(family, Shape { terms: 2, ..sh }, q, k));
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{gerstenhaber, schouten, BracketContext};

    fn sgn(e: i32) -> i32 {
        if e.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn bracket_axioms_with_forms() {
        let mut s = Sampler::new(7);
        let sh = Shape { dim: 3, trunc: 5, max_p: 2, max_x: 1, terms: 2 };
        let ctx = BracketContext::fiber(3, 5);
        for fam in [Family::Vec, Family::Op] {
            for _ in 0..15 {
                let el = |s: &mut Sampler| {
                    let q = s.index(3);
                    let k = s.int(-1, 1) as i32;
                    s.element(fam, sh, q, k)
                };
                let (a, b, c) = (el(&mut s), el(&mut s), el(&mut s));
                let br = |x: &Graded, y: &Graded| match fam {
                    Family::Vec => schouten(&ctx, x, y).unwrap(),
                    _ => gerstenhaber(&ctx, x, y).unwrap(),
                };
                let (da, db) = (a.degree_or(0), b.degree_or(0));
                let ab = br(&a, &b);
                let ba = br(&b, &a);
                let anti = ab.plus(&ba.scale(&qi(sgn(da * db) as i64)));
                assert!(anti.truncated_to(2).is_zero(), "antisymmetry {fam:?}: {anti}");
                // [a,[b,c]] = [[a,b],c] + (-1)^{da db} [b,[a,c]]
                let lhs = br(&a, &br(&b, &c));
                let rhs = br(&ab, &c).plus(&br(&b, &br(&a, &c)).scale(&qi(sgn(da * db) as i64)));
                let diff = lhs.minus(&rhs).truncated_to(1);
                assert!(diff.is_zero(), "jacobi {fam:?}: {diff}");
            }
        }
    }
}
