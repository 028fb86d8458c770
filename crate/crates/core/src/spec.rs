//! Manifold spec files.
//!
//! Line-oriented `key = value` text; `#` starts a comment. Keys:
//!
//! ```text
//! version = 1
//! dimension = 2
//! trunc_order = 6
//! hbar_order = 2
//! probe_degree = 3
//! gamma[2,1,1] = x2          # Christoffel G^k_ij, indices from 1
//! alpha[1,2] = 1             # Poisson bivector entries
//! group_element = 0 -1 ; 1 0 | 0 0
//! ```
//!
//! A Christoffel entry given once fills its symmetric partner; a Poisson
//! entry fills its antisymmetric partner.

use std::collections::BTreeMap;
use std::path::Path;

use crate::brackets::{schouten, BracketContext};
use crate::equivariance::{AffineAction, AffineMap};
use crate::error::{Error, Result};
use crate::fedosov::ConnectionData;
use crate::graded::{Family, Graded, Key, Slots, UNBOUNDED};
use crate::poly::{CoeffPoly, Q};

pub const SPEC_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct ManifoldSpec {
    pub version: u32,
    pub dim: usize,
    pub trunc_order: u32,
    pub hbar_order: u32,
    pub probe_degree: u32,
    pub connection: ConnectionData,
    /// `alpha[i][j]`, antisymmetric
    pub poisson: Vec<Vec<CoeffPoly>>,
    pub generators: Vec<AffineMap>,
    pub group: Option<AffineAction>,
}

struct Raw {
    scalars: BTreeMap<String, (usize, String)>,
    gamma: Vec<(usize, [usize; 3], String)>,
    alpha: Vec<(usize, [usize; 2], String)>,
    group: Vec<(usize, String)>,
}

fn indices<const N: usize>(key: &str, name: &str, line: usize) -> Result<Option<[usize; N]>> {
    let Some(rest) = key.strip_prefix(name) else { return Ok(None) };
    let err = |msg: &str| Error::Parse { line, msg: format!("{msg} in key `{key}`") };
    let inner = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(|| err("expected [..]"))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(err(&format!("expected {N} indices")));
    }
    let mut out = [0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| err("bad index"))?;
    }
    Ok(Some(out))
}

fn split_lines(text: &str) -> Result<Raw> {
    let mut raw = Raw { scalars: BTreeMap::new(), gamma: vec![], alpha: vec![], group: vec![] };
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected `key = value`, got `{body}`") })?;
        let (key, value) = (key.trim(), value.trim().to_string());
        if let Some(ix) = indices::<3>(key, "gamma", line_no)? {
            raw.gamma.push((line_no, ix, value));
        } else if let Some(ix) = indices::<2>(key, "alpha", line_no)? {
            raw.alpha.push((line_no, ix, value));
        } else if key == "group_element" {
            raw.group.push((line_no, value));
        } else if ["version", "dimension", "trunc_order", "hbar_order", "probe_degree"].contains(&key) {
            if raw.scalars.insert(key.to_string(), (line_no, value)).is_some() {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate key `{key}`") });
            }
        } else {
            return Err(Error::Parse { line: line_no, msg: format!("unknown key `{key}`") });
        }
    }
    Ok(raw)
}

fn scalar(raw: &Raw, key: &str, default: Option<u32>) -> Result<u32> {
    match raw.scalars.get(key) {
        Some((line, v)) => v.parse().map_err(|_| Error::Parse { line: *line, msg: format!("`{key}` must be a nonnegative integer") }),
        None => default.ok_or_else(|| Error::Validation(format!("missing required key `{key}`"))),
    }
}

fn parse_rational(s: &str, line: usize) -> Result<Q> {
    s.parse::<Q>()
        .or_else(|_| s.parse::<num_bigint::BigInt>().map(Q::from_integer))
        .map_err(|_| Error::Parse { line, msg: format!("bad rational `{s}`") })
}

fn parse_group_element(src: &str, dim: usize, line: usize) -> Result<AffineMap> {
    let (mat, trans) = src
        .split_once('|')
        .ok_or_else(|| Error::Parse { line, msg: "group_element needs `matrix | translation`".into() })?;
    let rows: Vec<Vec<Q>> = mat
        .split(';')
        .map(|r| r.split_whitespace().map(|t| parse_rational(t, line)).collect())
        .collect::<Result<_>>()?;
    let t: Vec<Q> = trans.split_whitespace().map(|t| parse_rational(t, line)).collect::<Result<_>>()?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) || t.len() != dim {
        return Err(Error::Parse { line, msg: format!("group_element must be a {dim}x{dim} matrix and {dim} translations") });
    }
    AffineMap::new(rows, t)
}

fn check_index(ix: &[usize], dim: usize, line: usize) -> Result<()> {
    if ix.iter().any(|&i| i == 0 || i > dim) {
        return Err(Error::Parse { line, msg: format!("index out of range 1..={dim}: {ix:?}") });
    }
    Ok(())
}

impl ManifoldSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = split_lines(text)?;
        let version = scalar(&raw, "version", None)?;
        if version != SPEC_VERSION {
            return Err(Error::Validation(format!("unsupported spec version {version} (expected {SPEC_VERSION})")));
        }
        let dim = scalar(&raw, "dimension", None)? as usize;
        if !(1..=6).contains(&dim) {
            return Err(Error::Validation(format!("dimension {dim} outside 1..=6")));
        }
        let trunc_order = scalar(&raw, "trunc_order", Some(6))?;
        let hbar_order = scalar(&raw, "hbar_order", Some(0))?;
        let probe_degree = scalar(&raw, "probe_degree", Some(3))?;

        let mut gamma: BTreeMap<(usize, usize, usize), (usize, CoeffPoly)> = BTreeMap::new();
        for (line, ix, src) in &raw.gamma {
            check_index(ix, dim, *line)?;
            let c = CoeffPoly::parse_checked(src, dim, *line)?;
            let key = (ix[0] - 1, ix[1] - 1, ix[2] - 1);
            if gamma.insert(key, (*line, c)).is_some() {
                return Err(Error::Parse { line: *line, msg: format!("duplicate entry gamma{ix:?}") });
            }
        }
        let mut table = vec![vec![vec![CoeffPoly::zero(dim); dim]; dim]; dim];
        for (&(k, i, j), (line, c)) in &gamma {
            if let Some((_, partner)) = gamma.get(&(k, j, i)) {
                if partner != c {
                    return Err(Error::Validation(format!(
                        "line {line}: connection not torsion free: G^{}_{}{} = {c} but G^{}_{}{} = {partner}",
                        k + 1,
                        i + 1,
                        j + 1,
                        k + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
            table[k][i][j] = c.clone();
            table[k][j][i] = c.clone();
        }
        let connection = ConnectionData::new(dim, table)?;

        let mut poisson = vec![vec![CoeffPoly::zero(dim); dim]; dim];
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (line, ix, src) in &raw.alpha {
            check_index(ix, dim, *line)?;
            let (i, j) = (ix[0] - 1, ix[1] - 1);
            let c = CoeffPoly::parse_checked(src, dim, *line)?;
            if i == j {
                if !c.is_zero() {
                    return Err(Error::Validation(format!("line {line}: alpha[{},{}] must vanish", i + 1, i + 1)));
                }
                continue;
            }
            if seen.insert((i, j), *line).is_some() {
                return Err(Error::Parse { line: *line, msg: format!("duplicate entry alpha{ix:?}") });
            }
            if seen.contains_key(&(j, i)) && poisson[j][i] != -&c {
                return Err(Error::Validation(format!(
                    "line {line}: Poisson tensor not antisymmetric: alpha[{},{}] = {c}, alpha[{},{}] = {}",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1,
                    poisson[j][i]
                )));
            }
            poisson[j][i] = -&c;
            poisson[i][j] = c;
        }

        let generators: Vec<AffineMap> =
            raw.group.iter().map(|(line, src)| parse_group_element(src, dim, *line)).collect::<Result<_>>()?;
        let group = if generators.is_empty() { None } else { Some(AffineAction::generate(dim, generators.clone())?) };

        let spec = ManifoldSpec { version, dim, trunc_order, hbar_order, probe_degree, connection, poisson, generators, group };
        if spec.star_requested() {
            spec.require_poisson()?;
        }
        Ok(spec)
    }

    pub fn star_requested(&self) -> bool {
        self.hbar_order > 0 && !self.alpha().is_zero()
    }

    /// `alpha = sum_{i<j} alpha^ij d_i ^ d_j` as a base bivector.
    pub fn alpha(&self) -> Graded {
        let d = self.dim;
        let mut g = Graded::zero(Family::Vec, d, UNBOUNDED);
        for i in 0..d {
            for j in i + 1..d {
                if !self.poisson[i][j].is_zero() {
                    g.insert(Key { y: vec![0; d], dx: 0, slots: Slots::Vec(vec![i as u8, j as u8]) }, self.poisson[i][j].clone());
                }
            }
        }
        g
    }

    /// `[alpha, alpha] = 0`, reporting the first nonzero component otherwise.
    pub fn require_poisson(&self) -> Result<()> {
        let a = self.alpha();
        let aa = schouten(&BracketContext::base(self.dim, UNBOUNDED), &a, &a)?;
        match aa.terms().iter().next() {
            None => Ok(()),
            Some((k, c)) => Err(Error::Validation(format!(
                "alpha is not Poisson: [alpha, alpha] has component {}",
                crate::graded::fmt_term(k, c)
            ))),
        }
    }

    /// Ordered echo of the validated content.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let d = self.dim;
        let mut m = BTreeMap::new();
        m.insert("version".into(), self.version.to_string());
        m.insert("dimension".into(), d.to_string());
        m.insert("trunc_order".into(), self.trunc_order.to_string());
        m.insert("hbar_order".into(), self.hbar_order.to_string());
        m.insert("probe_degree".into(), self.probe_degree.to_string());
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let c = self.connection.gamma(k, i, j);
                    if !c.is_zero() {
                        m.insert(format!("gamma[{},{},{}]", k + 1, i + 1, j + 1), c.to_string());
                    }
                }
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                if !self.poisson[i][j].is_zero() {
                    m.insert(format!("alpha[{},{}]", i + 1, j + 1), self.poisson[i][j].to_string());
                }
            }
        }
        for (n, g) in self.generators.iter().enumerate() {
            m.insert(format!("group_element[{}]", n + 1), g.describe());
        }
        if let Some(g) = &self.group {
            m.insert("group_order".into(), g.order().to_string());
        }
        m
    }
}

pub fn load_spec(path: &Path) -> Result<ManifoldSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ManifoldSpec::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_flat_spec() {
        let s = ManifoldSpec::parse("version = 1\ndimension = 2\nhbar_order = 2\nalpha[1,2] = 1\n").unwrap();
        assert!(s.connection.is_flat());
        assert_eq!(s.poisson[1][0], CoeffPoly::constant(2, Q::from_integer((-1).into())));
        assert!(s.star_requested());
    }

    #[test]
    fn validation_errors() {
        let asym = "version = 1\ndimension = 2\ngamma[1,1,2] = x1\ngamma[1,2,1] = x2\n";
        assert!(matches!(ManifoldSpec::parse(asym), Err(Error::Validation(_))));
        let bad_alpha = "version = 1\ndimension = 2\nalpha[1,2] = 1\nalpha[2,1] = 1\n";
        assert!(matches!(ManifoldSpec::parse(bad_alpha), Err(Error::Validation(_))));
        let parse = "version = 1\ndimension = 2\ngamma[1,1,1] = x1 +\n";
        assert!(matches!(ManifoldSpec::parse(parse), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(ManifoldSpec::parse("dimension = 2\n"), Err(Error::Validation(_))));
        assert!(matches!(ManifoldSpec::parse("version = 2\ndimension = 2\n"), Err(Error::Validation(_))));
        assert!(matches!(ManifoldSpec::parse("version = 1\ndimension = 2\nfoo = 1\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn poisson_check() {
        let ok = "version = 1\ndimension = 3\nhbar_order = 1\nalpha[1,2] = x3\n";
        assert!(ManifoldSpec::parse(ok).is_ok());
        let bad = "version = 1\ndimension = 3\nhbar_order = 1\nalpha[1,2] = x3\nalpha[2,3] = x2\n";
        match ManifoldSpec::parse(bad) {
            Err(Error::Validation(msg)) => assert!(msg.contains("[alpha, alpha]"), "{msg}"),
            other => panic!("{other:?}"),
        }
        // not checked when no star product is requested
        assert!(ManifoldSpec::parse(&bad.replace("hbar_order = 1", "hbar_order = 0")).is_ok());
    }

    #[test]
    fn group_elements() {
        let s = ManifoldSpec::parse("version = 1\ndimension = 2\ngroup_element = 0 -1 ; 1 0 | 0 0\n").unwrap();
        assert_eq!(s.group.unwrap().order(), 4);
        let bad = "version = 1\ndimension = 2\ngroup_element = 1 0 | 0 0\n";
        assert!(matches!(ManifoldSpec::parse(bad), Err(Error::Parse { line: 3, .. })));
    }
}
