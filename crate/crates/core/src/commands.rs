//! Report assembly for the CLI subcommands.

use serde_json::{json, Value};

use crate::equivariance::check_equivariance;
use crate::error::{Error, Result};
use crate::fedosov::solve_a;
use crate::graded::{fmt_term, Graded};
use crate::kontsevich::WeightTable;
use crate::pipeline::{build_pipeline, build_star_product, op_table, StarProduct};
use crate::report::{checks_json, CheckOutcome, Status};
use crate::spec::ManifoldSpec;
use crate::suites::run_identity_suite;

pub const REPORT_FORMAT: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Connection,
    Star,
    Equivariance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Connection => "connection",
            Command::Star => "star",
            Command::Equivariance => "equivariance",
        }
    }
}

/// Command-line overrides of spec fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<u32>,
    pub hbar: Option<u32>,
}

pub fn apply_overrides(mut spec: ManifoldSpec, o: &Overrides) -> Result<ManifoldSpec> {
    if let Some(n) = o.order {
        spec.trunc_order = n;
    }
    if let Some(h) = o.hbar {
        spec.hbar_order = h;
    }
    if spec.star_requested() {
        spec.require_poisson()?;
    }
    Ok(spec)
}

fn terms(g: &Graded) -> Value {
    json!(g.terms().iter().map(|(k, c)| fmt_term(k, c)).collect::<Vec<_>>())
}

fn star_json(spec: &ManifoldSpec, star: &StarProduct) -> Value {
    let mut m = serde_json::Map::new();
    for (n, c) in star.coefficients.iter().enumerate() {
        m.insert(format!("C{n}"), json!(op_table(c)));
    }
    json!({
        "coefficients": m,
        "hbar_order": star.order(),
        "verified": {
            "first_order_condition": star.order() >= 1,
            "associativity_mod_hbar_power": star.order() + 1,
            "probe_degree": spec.probe_degree,
        }
    })
}

fn weights_json() -> Result<Value> {
    let w = WeightTable::standard()?;
    let mut v = w.to_json();
    if let Value::Object(m) = &mut v {
        m.insert("equations".into(), json!(w.equations));
        m.insert("rank".into(), json!(w.rank));
    }
    Ok(v)
}

/// The report of one subcommand and whether every check passed.
pub fn run_command(cmd: Command, spec: &ManifoldSpec, suite: &str) -> Result<(Value, bool)> {
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!(cmd.name()));
    report.insert("report_format".into(), json!(REPORT_FORMAT));
    report.insert("spec".into(), json!(spec.echo()));
    let mut ok = true;
    match cmd {
        Command::Check => {
            let checks = run_identity_suite(spec, suite)?;
            ok = checks.iter().all(CheckOutcome::passed);
            report.insert("suite".into(), json!(suite));
            report.insert("checks".into(), checks_json(&checks));
            let st = solve_a(&spec.connection, spec.trunc_order)?;
            report.insert("valid_to".into(), json!({ "fedosov": st.valid_to, "trunc_order": st.trunc }));
            report.insert("weight_table".into(), weights_json()?);
        }
        Command::Connection => {
            let st = solve_a(&spec.connection, spec.trunc_order)?;
            let residual = st.flatness_residual()?.truncated_to(st.valid_to);
            ok = residual.is_zero();
            report.insert(
                "connection".into(),
                json!({
                    "christoffel": terms(&spec.connection.element(spec.trunc_order)),
                    "curvature": terms(&st.curvature),
                    "fedosov_a": terms(&st.a),
                    "flatness_residual": terms(&residual),
                }),
            );
            report.insert("valid_to".into(), json!({ "fedosov": st.valid_to, "trunc_order": st.trunc }));
        }
        Command::Star => {
            let star = build_star_product(spec)?;
            report.insert("star_product".into(), star_json(spec, &star));
            report.insert("weight_table".into(), weights_json()?);
        }
        Command::Equivariance => {
            let group = spec.group.as_ref().ok_or_else(|| Error::Validation("spec has no group_element entries".into()))?;
            let star = if spec.star_requested() { Some(build_star_product(spec)?) } else { None };
            let p = build_pipeline(spec)?;
            let checks = check_equivariance(group, &p, star.as_ref())?;
            ok = checks.iter().all(|c| c.status != Status::Fail);
            report.insert("group_order".into(), json!(group.order()));
            report.insert("checks".into(), checks_json(&checks));
            if let Some(s) = &star {
                report.insert("star_product".into(), star_json(spec, s));
            }
        }
    }
    Ok((Value::Object(report), ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_report_lists_half_alpha() {
        let spec = ManifoldSpec::parse("version = 1\ndimension = 2\nhbar_order = 1\nalpha[1,2] = 1\n").unwrap();
        let (v, ok) = run_command(Command::Star, &spec, "all").unwrap();
        assert!(ok);
        let c1 = &v["star_product"]["coefficients"]["C1"];
        assert_eq!(c1["<d1 | d2>"], "1/2");
        assert_eq!(c1["<d2 | d1>"], "-1/2");
    }

    #[test]
    fn overrides_revalidate() {
        let spec = ManifoldSpec::parse("version = 1\ndimension = 3\nalpha[1,2] = x3\nalpha[2,3] = x2\n").unwrap();
        let o = Overrides { order: Some(5), hbar: Some(1) };
        assert!(matches!(apply_overrides(spec, &o), Err(Error::Validation(_))));
    }
}
