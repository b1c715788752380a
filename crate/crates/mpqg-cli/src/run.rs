//! Suite orchestration and report assembly.

use mpqg::cartan::{cocycle_realization, twist_realization};
use mpqg::liebialg::{build_mplba, check_bialgebra, compare_tables, lie_cocycle_deform, lie_twist_deform};
use mpqg::report::Report;
use mpqg::semiclassical::LimitContext;
use serde_json::{json, Value};

use crate::config::{Built, ConfigError};

/// Every suite, in the order `all` runs them.
pub const SUITES: [&str; 12] = [
    "realization",
    "lie",
    "hopf",
    "serre",
    "twist",
    "cocycle",
    "pairing",
    "double",
    "rep",
    "limit",
    "square-twist",
    "square-cocycle",
];

const NEEDS_LIMIT: [&str; 3] = ["limit", "square-twist", "square-cocycle"];

/// Expands `all` and checks the names; keeps the canonical order.
pub fn select_suites(names: &[String]) -> Result<Vec<&'static str>, ConfigError> {
    let names: Vec<String> = if names.is_empty() { vec!["all".into()] } else { names.to_vec() };
    for s in &names {
        if s != "all" && !SUITES.contains(&s.as_str()) {
            return Err(ConfigError::Invalid {
                field: "suite".into(),
                msg: format!("unknown suite {s:?}; expected one of all, {}", SUITES.join(", ")),
            });
        }
    }
    Ok(SUITES.iter().copied().filter(|s| names.iter().any(|n| n == "all" || n == s)).collect())
}

fn realization_report(b: &Built) -> Report {
    let mut rep = Report::new("realization axioms", &b.p.cartan.label())
        .with_parameters(json!({"t": b.r.t, "flags": serde_json::to_value(b.r.flags).unwrap()}));
    match b.r.satisfies_axioms(&b.p, b.u.order()) {
        Ok(()) => rep.check("roots on coroots reproduce P; S_i independent", true, ""),
        Err(e) => rep.check("roots on coroots reproduce P; S_i independent", false, e),
    }
    rep
}

fn lie_report(b: &Built) -> Report {
    let cartan = &b.p.cartan;
    let mut rep = Report::new("multiparameter Lie bialgebra and its toral deformations", &cartan.label())
        .with_parameters(json!({"degree_bound": b.degree_bound()}));
    let g = match build_mplba(cartan, &b.p.reduce(), &b.r.reduce(), b.degree_bound()) {
        Ok(g) => g,
        Err(e) => {
            rep.check("structure constants", false, e.to_string());
            return rep;
        }
    };
    rep.check(format!("degree bound reaches every root (dim {})", g.dim()), !g.bound_too_small, "");
    let bad = check_bialgebra(&g);
    rep.check("Lie bialgebra axioms", bad.is_empty(), bad.join("; "));
    match twist_realization(&b.p, &b.r, &b.phi) {
        Ok((pt, rt)) => {
            let deformed = lie_twist_deform(&g, &b.phi.reduce());
            let bad = check_bialgebra(&deformed);
            rep.check("twisted cobracket satisfies the axioms", bad.is_empty(), bad.join("; "));
            match build_mplba(cartan, &pt.reduce(), &rt.reduce(), b.degree_bound()) {
                Ok(direct) => {
                    let bad = compare_tables(&deformed, &direct, true);
                    rep.check("twist deformation equals the algebra of the twisted data", bad.is_empty(), bad.join("; "));
                }
                Err(e) => rep.check("algebra of the twisted data", false, e.to_string()),
            }
        }
        Err(e) => rep.check("twisted realization", false, e.to_string()),
    }
    match cocycle_realization(&b.p, &b.r, &b.chi) {
        Ok((pc, rc)) => {
            let deformed = lie_cocycle_deform(&g, &b.chi.reduce());
            let bad = check_bialgebra(&deformed);
            rep.check("cocycle-deformed bracket satisfies the axioms", bad.is_empty(), bad.join("; "));
            match build_mplba(cartan, &pc.reduce(), &rc.reduce(), b.degree_bound()) {
                Ok(direct) => {
                    let bad = compare_tables(&deformed, &direct, true);
                    rep.check("cocycle deformation equals the algebra of the deformed data", bad.is_empty(), bad.join("; "));
                }
                Err(e) => rep.check("algebra of the deformed data", false, e.to_string()),
            }
        }
        Err(e) => rep.check("deformed realization", false, e.to_string()),
    }
    rep
}

fn hopf_report(b: &Built) -> Report {
    let u = &b.u;
    let mut rep = u.hopf_axiom_suite();
    for i in 0..u.n() {
        for j in 0..u.n() {
            if i != j {
                rep.absorb("", u.serre_skewprimitive_check(i, j));
            }
        }
    }
    rep
}

fn run_one(b: &Built, suite: &str, limit: Option<&LimitContext>) -> Report {
    let u = &b.u;
    let cfg = &b.config;
    match suite {
        "realization" => realization_report(b),
        "lie" => lie_report(b),
        "hopf" => hopf_report(b),
        "serre" => {
            let mut rep = u.confluence_check(cfg.words, 5, cfg.seed);
            rep.absorb("", u.associativity_check(cfg.triples, 3, cfg.seed.wrapping_add(1)));
            rep
        }
        "twist" => u.verify_twist_theorem(&b.phi),
        "cocycle" => {
            let mut rep = u.verify_cocycle_theorem(&b.chi);
            rep.absorb("", u.cocycle_lemma_checks(&b.chi, 3));
            rep
        }
        "pairing" => u.pairing_check(),
        "double" => u.double_relations_check(),
        "rep" => u.rep_oracle_check(4, cfg.seed),
        "limit" | "square-twist" | "square-cocycle" => {
            let lc = limit.expect("limit context built");
            match suite {
                "limit" => lc.check_limit(),
                "square-twist" => lc.check_square_twist(&b.phi),
                _ => lc.check_square_cocycle(&b.chi),
            }
        }
        _ => unreachable!("suite names are validated"),
    }
}

/// Runs the selected suites in canonical order.
pub fn run_suites(b: &Built, suites: &[&str]) -> Result<Vec<Report>, ConfigError> {
    let limit = if suites.iter().any(|s| NEEDS_LIMIT.contains(s)) {
        if b.u.order() < 2 {
            return Err(ConfigError::Invalid {
                field: "order".into(),
                msg: "the semiclassical suites need order at least 2".into(),
            });
        }
        Some(LimitContext::new(&b.u).map_err(|e| ConfigError::Invalid { field: "limit".into(), msg: e.to_string() })?)
    } else {
        None
    };
    Ok(suites.iter().map(|s| run_one(b, s, limit.as_ref())).collect())
}

pub fn violations(reports: &[Report]) -> usize {
    reports.iter().map(|r| r.failures().len()).sum()
}

/// The full JSON document written by `verify`.
pub fn reports_json(b: &Built, reports: &[Report]) -> Value {
    json!({
        "cartan": b.p.cartan.label(),
        "order": b.u.order(),
        "seed": b.config.seed,
        "realization": {"t": b.r.t, "labels": b.r.labels},
        "violations": violations(reports),
        "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    })
}

pub fn reports_text(reports: &[Report]) -> String {
    let mut s: String = reports.iter().map(|r| r.to_text()).collect();
    s.push_str(&format!("{} suites, {} violations\n", reports.len(), violations(reports)));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_selection() {
        assert_eq!(select_suites(&[]).unwrap().len(), SUITES.len());
        assert_eq!(select_suites(&["limit".into(), "hopf".into()]).unwrap(), vec!["hopf", "limit"]);
        assert!(select_suites(&["nope".into()]).is_err());
    }
}
