//! Exact polynomials in the base coordinates `x1..xd` with an extra formal
//! parameter exponent (printed as `h`).
//!
//! Invariants:
//! - no stored zero coefficients;
//! - every exponent vector has length exactly `dim`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> Q {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    BigRational::from_integer(acc)
}

/// `n (n-1) ... (n-k+1)`, zero when `k > n`.
pub fn falling(n: u32, k: u32) -> Q {
    if k > n {
        return Q::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
    }
    BigRational::from_integer(acc)
}

pub fn binomial(n: u32, k: u32) -> Q {
    if k > n {
        return Q::zero();
    }
    falling(n, k) / factorial(k)
}

/// Serialize a rational as `p/q` (or `p` when integral).
pub fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XMono {
    pub x: Vec<u32>,
    pub hbar: u32,
}

impl XMono {
    pub fn one(dim: usize) -> Self {
        XMono { x: vec![0; dim], hbar: 0 }
    }

    pub fn degree(&self) -> u32 {
        self.x.iter().sum()
    }

    fn mul(&self, o: &XMono) -> XMono {
        XMono {
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            hbar: self.hbar + o.hbar,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffPoly {
    dim: usize,
    terms: BTreeMap<XMono, Q>,
}

impl CoeffPoly {
    pub fn zero(dim: usize) -> Self {
        CoeffPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Q) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(XMono::one(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Q::one())
    }

    /// The coordinate function `x_{i+1}` (indices are zero-based).
    pub fn var(dim: usize, i: usize) -> Self {
        let mut m = XMono::one(dim);
        m.x[i] = 1;
        Self::monomial(m, Q::one())
    }

    pub fn monomial(m: XMono, c: Q) -> Self {
        let mut p = Self::zero(m.x.len());
        p.add_term(m, c);
        p
    }

    pub fn x_monomial(exps: &[u32]) -> Self {
        Self::monomial(XMono { x: exps.to_vec(), hbar: 0 }, Q::one())
    }

    pub fn hbar_power(dim: usize, n: u32) -> Self {
        Self::monomial(XMono { x: vec![0; dim], hbar: n }, Q::one())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<XMono, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0 && m.hbar == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: XMono, c: Q) {
        debug_assert_eq!(m.x.len(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, o: &CoeffPoly) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn scale(&self, c: &Q) -> CoeffPoly {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        CoeffPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn deriv(&self, i: usize) -> CoeffPoly {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.x[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.x[i] -= 1;
            out.add_term(m2, c * qi(e as i64));
        }
        out
    }

    /// Mixed partial derivative with multi-index `alpha`.
    pub fn multi_deriv(&self, alpha: &[u32]) -> CoeffPoly {
        let mut out = Self::zero(self.dim);
        'terms: for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let mut f = c.clone();
            for (i, &a) in alpha.iter().enumerate() {
                if a > m.x[i] {
                    continue 'terms;
                }
                f *= falling(m.x[i], a);
                m2.x[i] -= a;
            }
            out.add_term(m2, f);
        }
        out
    }

    pub fn x_degree(&self) -> u32 {
        self.terms.keys().map(XMono::degree).max().unwrap_or(0)
    }

    pub fn max_hbar(&self) -> u32 {
        self.terms.keys().map(|m| m.hbar).max().unwrap_or(0)
    }

    /// Drop all terms with formal-parameter exponent above `n`.
    pub fn truncate_hbar(&self, n: u32) -> CoeffPoly {
        CoeffPoly {
            dim: self.dim,
            terms: self.terms.iter().filter(|(m, _)| m.hbar <= n).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Coefficient of `h^n`, as a polynomial with no formal parameter.
    pub fn hbar_coeff(&self, n: u32) -> CoeffPoly {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            if m.hbar == n {
                out.add_term(XMono { x: m.x.clone(), hbar: 0 }, c.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> CoeffPoly {
        let mut acc = Self::one(self.dim);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `x_i -> sum_j a[i][j] x_j + b[i]`.
    pub fn affine_substitute(&self, a: &[Vec<Q>], b: &[Q]) -> CoeffPoly {
        let d = self.dim;
        let images: Vec<CoeffPoly> = (0..d)
            .map(|i| {
                let mut p = CoeffPoly::constant(d, b[i].clone());
                for (j, aij) in a[i].iter().enumerate() {
                    p = &p + &CoeffPoly::var(d, j).scale(aij);
                }
                p
            })
            .collect();
        let mut out = Self::zero(d);
        for (m, c) in &self.terms {
            let mut t = CoeffPoly::monomial(XMono { x: vec![0; d], hbar: m.hbar }, c.clone());
            for (i, &e) in m.x.iter().enumerate() {
                if e > 0 {
                    t = &t * &images[i].pow(e);
                }
            }
            out.add_assign_ref(&t);
        }
        out
    }

    /// Parse the polynomial grammar: rational literals, `x1..xd`, `+ - * ^`
    /// with nonnegative integer exponents and parentheses.
    pub fn parse(src: &str, dim: usize) -> std::result::Result<CoeffPoly, String> {
        let toks = tokenize(src)?;
        let mut p = Parser { toks, pos: 0, dim };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(format!("unexpected token {:?}", p.toks[p.pos]));
        }
        Ok(e)
    }

    pub fn parse_checked(src: &str, dim: usize, line: usize) -> Result<CoeffPoly> {
        Self::parse(src, dim).map_err(|msg| Error::Parse { line, msg: format!("{msg} in `{src}`") })
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest total degree first, then lexicographic
        let mut items: Vec<(&XMono, &Q)> = self.terms.iter().collect();
        items.sort_by(|a, b| (b.0.hbar, b.0.degree(), &b.0.x).cmp(&(a.0.hbar, a.0.degree(), &a.0.x)));
        for (n, (m, c)) in items.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in m.x.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, e)),
                }
            }
            match m.hbar {
                0 => {}
                1 => factors.push("h".into()),
                e => factors.push(format!("h^{e}")),
            }
            if factors.is_empty() {
                write!(f, "{}", fmt_q(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_q(&mag), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Add for &CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, o: &CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        out.add_assign_ref(o);
        out
    }
}

impl Sub for &CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, o: &CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        self.scale(&-Q::one())
    }
}

impl Mul for &CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, o: &CoeffPoly) -> CoeffPoly {
        let mut out = CoeffPoly::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    Op(char),
}

fn tokenize(s: &str) -> std::result::Result<Vec<Tok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let lit: String = cs[st..i].iter().collect();
            out.push(Tok::Num(lit.parse().map_err(|_| format!("bad number {lit}"))?));
        } else if c == 'x' {
            i += 1;
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let lit: String = cs[st..i].iter().collect();
            let idx: usize = lit.parse().map_err(|_| "variable needs an index, e.g. x1".to_string())?;
            if idx == 0 {
                return Err("variables are numbered from x1".into());
            }
            out.push(Tok::Var(idx - 1));
        } else if "+-*^/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character '{c}'"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> std::result::Result<CoeffPoly, String> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> std::result::Result<CoeffPoly, String> {
        let mut acc = self.power()?;
        while self.eat('*') {
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> std::result::Result<CoeffPoly, String> {
        let base = self.unary()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: u32 = n.try_into().map_err(|_| "exponent too large".to_string())?;
                    Ok(base.pow(e))
                }
                _ => Err("exponent must be a nonnegative integer literal".into()),
            }
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> std::result::Result<CoeffPoly, String> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> std::result::Result<CoeffPoly, String> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let mut val = BigRational::from_integer(n);
                if self.eat('/') {
                    match self.peek().cloned() {
                        Some(Tok::Num(den)) if !den.is_zero() => {
                            self.pos += 1;
                            val /= BigRational::from_integer(den);
                        }
                        _ => return Err("division is only allowed between integer literals".into()),
                    }
                }
                Ok(CoeffPoly::constant(self.dim, val))
            }
            Some(Tok::Var(i)) => {
                self.pos += 1;
                if i >= self.dim {
                    return Err(format!("variable x{} exceeds dimension {}", i + 1, self.dim));
                }
                Ok(CoeffPoly::var(self.dim, i))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err("missing ')'".into());
                }
                Ok(e)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of input".into()),
        }
    }
}
