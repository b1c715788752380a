//! Run configuration: one JSON document describing the Cartan datum, the
//! matrix P, the realization, the truncation and the deformation inputs.

use std::path::Path;

use mpqg::cartan::{
    check_cartan_type, classify, make_small_realization, make_split_realization, make_standard_realization, random_cocycle,
    random_mp_matrix, random_twist, symmetrize, CartanDatum, CartanError, CocycleForm, MpMatrix, Realization, TwistMatrix,
};
use mpqg::linalg::SMat;
use mpqg::quea::{QueaError, UContext, UOptions};
use mpqg::series::{parse_rational, Rational, TruncLaurent};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("{field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("{field}: {source}")]
    Cartan { field: String, source: CartanError },
    #[error(transparent)]
    Quea(#[from] QueaError),
}

fn invalid(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), msg: msg.into() }
}

/// `"A2"` or explicit integer rows.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CartanSpec {
    Named(String),
    Matrix(Vec<Vec<i64>>),
}

/// A matrix entry: an integer, a polynomial in ħ such as `"1 - 1/2*hbar"`,
/// or a serialized series `{vmax, N, terms}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
    Series(TruncLaurent),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RealizationSpec {
    #[default]
    Standard,
    Split {
        ell: usize,
    },
    Small {
        ell: usize,
    },
    Explicit {
        realization: Realization,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cartan: CartanSpec,
    /// P; defaults to DA, or to a random ħ-perturbation of DA when
    /// `perturb_p` is set.
    #[serde(default)]
    pub p: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    pub perturb_p: bool,
    #[serde(default)]
    pub realization: RealizationSpec,
    #[serde(default = "default_order")]
    pub order: i32,
    #[serde(default = "default_guard")]
    pub guard: i32,
    #[serde(default)]
    pub degree_bound: Option<usize>,
    /// Toral twist; drawn from the seed when absent.
    #[serde(default)]
    pub phi: Option<Vec<Vec<Entry>>>,
    /// Toral 2-cocycle; drawn from the seed when absent.
    #[serde(default)]
    pub chi: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_words")]
    pub words: usize,
    #[serde(default = "default_triples")]
    pub triples: usize,
}

fn default_order() -> i32 {
    3
}
fn default_guard() -> i32 {
    2
}
fn default_words() -> usize {
    200
}
fn default_triples() -> usize {
    100
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax { line: e.line(), column: e.column(), msg: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// The rank-one standard configuration.
    pub fn named(cartan: &str) -> Self {
        Self::parse(&format!("{{\"cartan\": \"{cartan}\"}}")).expect("valid literal")
    }
}

/// Parses a polynomial in ħ: signed terms `c`, `c*hbar`, `c*hbar^k`, `hbar^k`.
pub fn parse_series(src: &str, order: i32) -> Result<TruncLaurent, String> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty entry".into());
    }
    let mut terms = Vec::new();
    let mut start = 0;
    for (k, ch) in s.char_indices() {
        if (ch == '+' || ch == '-') && k > 0 && !s[..k].ends_with('^') {
            terms.push(&s[start..k]);
            start = k;
        }
    }
    terms.push(&s[start..]);
    let mut out = TruncLaurent::zero(order);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1, b),
            None => (1, term.strip_prefix('+').unwrap_or(term)),
        };
        let (coef, power) = match body.find("hbar") {
            None => (body, 0),
            Some(pos) => {
                let c = body[..pos].trim_end_matches('*');
                let rest = &body[pos + 4..];
                let e = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^').and_then(|x| x.parse::<i32>().ok()).ok_or(format!("bad power in {term:?}"))?
                };
                (if c.is_empty() { "1" } else { c }, e)
            }
        };
        if power < 0 {
            return Err(format!("negative power in {term:?}"));
        }
        let c = parse_rational(coef).map_err(|e| e.to_string())? * Rational::from_integer(sign.into());
        out = &out + &TruncLaurent::monomial(c, power, order);
    }
    Ok(out)
}

fn read_matrix(field: &str, m: &[Vec<Entry>], rows: usize, order: i32) -> Result<SMat, ConfigError> {
    if m.len() != rows || m.iter().any(|r| r.len() != rows) {
        return Err(invalid(field, format!("expected a {rows} x {rows} matrix")));
    }
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        let mut r = Vec::new();
        for (j, e) in row.iter().enumerate() {
            let x = match e {
                Entry::Int(k) => TruncLaurent::from_int(*k, order),
                Entry::Text(s) => parse_series(s, order).map_err(|msg| invalid(&format!("{field}[{i}][{j}]"), msg))?,
                Entry::Series(s) => {
                    if s.valuation().is_some_and(|v| v < 0) {
                        return Err(invalid(&format!("{field}[{i}][{j}]"), "negative power of hbar"));
                    }
                    TruncLaurent::from_terms(s.terms().map(|(e, c)| (e, c.clone())), order)
                }
            };
            r.push(x);
        }
        out.push(r);
    }
    Ok(out)
}

/// Everything a run needs, validated.
pub struct Built {
    pub config: RunConfig,
    pub p: MpMatrix,
    pub r: Realization,
    pub phi: TwistMatrix,
    pub chi: CocycleForm,
    pub u: UContext,
}

impl Built {
    pub fn new(config: RunConfig) -> Result<Self, ConfigError> {
        if config.order < 0 || config.guard < 1 {
            return Err(invalid("order", "order must be nonnegative and guard at least 1"));
        }
        let cartan = match &config.cartan {
            CartanSpec::Named(s) => CartanDatum::named(s).ok_or_else(|| invalid("cartan", format!("unknown datum {s:?}")))?,
            CartanSpec::Matrix(a) => symmetrize(a).map_err(|source| ConfigError::Cartan { field: "cartan".into(), source })?,
        };
        let ord = config.order + config.guard + 1;
        let n = cartan.n();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let p = match &config.p {
            Some(m) => check_cartan_type(&read_matrix("p", m, n, ord)?, &cartan)
                .map_err(|source| ConfigError::Cartan { field: "p".into(), source })?,
            None if config.perturb_p => random_mp_matrix(&mut rng, &cartan, ord, false),
            None => MpMatrix::canonical(&cartan, ord),
        };
        let cartan_err = |field: &str| {
            let field = field.to_string();
            move |source| ConfigError::Cartan { field, source }
        };
        let r = match &config.realization {
            RealizationSpec::Standard => make_standard_realization(&p),
            RealizationSpec::Split { ell } => make_split_realization(&p, *ell).map_err(cartan_err("realization"))?,
            RealizationSpec::Small { ell } => make_small_realization(&p, *ell).map_err(cartan_err("realization"))?,
            RealizationSpec::Explicit { realization } => {
                let mut r = realization.clone();
                if r.n() != n || r.tplus.len() != n || r.tminus.len() != n {
                    return Err(invalid("realization", format!("expected {n} roots and coroots")));
                }
                r.flags = classify(&r);
                r.satisfies_axioms(&p, config.order).map_err(|msg| invalid("realization", msg))?;
                r
            }
        };
        let t = r.t;
        let phi = match &config.phi {
            Some(m) => TwistMatrix::new(read_matrix("phi", m, t, ord)?).map_err(cartan_err("phi"))?,
            None => random_twist(&mut rng, t, ord, true),
        };
        let chi = match &config.chi {
            Some(m) => {
                let chi = CocycleForm { x: read_matrix("chi", m, t, ord)? };
                chi.check_alt_s(&r).map_err(cartan_err("chi"))?;
                chi
            }
            None => random_cocycle(&mut rng, &r, ord, true),
        };
        let u = UContext::new(&p, &r, UOptions { order: config.order, guard: config.guard, serre: true })?;
        Ok(Built { config, p, r, phi, chi, u })
    }

    pub fn degree_bound(&self) -> usize {
        self.config.degree_bound.unwrap_or_else(|| self.p.cartan.default_bound())
    }
}

/// True when every entry is zero.
pub fn is_zero_matrix(m: &SMat) -> bool {
    m.iter().flatten().all(|x| x.terms().all(|(_, c)| c.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpqg::series::ratio;

    #[test]
    fn series_entries() {
        let x = parse_series("1 - 1/2*hbar + hbar^3", 4).unwrap();
        assert_eq!(x.coeff(0), ratio(1, 1));
        assert_eq!(x.coeff(1), ratio(-1, 2));
        assert_eq!(x.coeff(3), ratio(1, 1));
        assert!(parse_series("hbar^-1", 4).is_err());
        assert!(parse_series("", 4).is_err());
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let err = RunConfig::parse("{\n  \"cartan\": \"A1\",\n  \"order\": x\n}").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn non_cartan_type_is_rejected() {
        let cfg = RunConfig::parse(r#"{"cartan": "A2", "p": [[2, 0], [-1, 2]]}"#).unwrap();
        let err = Built::new(cfg).err().expect("must fail");
        assert!(matches!(err, ConfigError::Cartan { source: CartanError::NotCartanType { .. }, .. }), "{err}");
    }

    #[test]
    fn explicit_matrices() {
        let cfg = RunConfig::parse(
            r#"{"cartan": [[2,-1],[-1,2]], "p": [[2, "-1 + hbar"], ["-1 - hbar", 2]], "realization": {"kind": "split", "ell": 4}, "order": 2}"#,
        )
        .unwrap();
        let b = Built::new(cfg).unwrap();
        assert_eq!(b.p.p[0][1].coeff(1), ratio(1, 1));
        assert_eq!(b.u.order(), 2);
    }
}
