//! JSON input formats.
//!
//! Rationals and angles are strings such as `"1/3"` (integers are also
//! accepted as JSON numbers). Angles are in turns.
//!
//! * representation: `{"atoms": [{"angle": "1/3", "sp": 2}, …]}`, or a JSON
//!   string in the compact grammar `"1/3*Sp(2) + 0*Sp(1)"`
//! * tempered point: `{"blocks": [{"k": 1, "angle": "0", "twist": "1/5"}, …]}`
//! * matrix: `[["1", "-1/2"], ["0", "3"]]`
//! * orthogonal triple:
//!   `{"pairs": [{"angle", "sp", "m", "n"}], "symplectic": [{"angle", "sp", "mult"}], "orthogonal": [...]}`
//! * test function: `{"constant": 1}`, `{"cos_sum": {"c0", "c1", "freq"}}`,
//!   `{"trig_poly": {"terms": [{"coef", "freq": [..]}], "symmetrize": true}}`,
//!   `{"gaussian": {"width", "center", "terms"}}`

use std::fmt;
use std::path::Path;

use planch_core::arith::{parse_q, Q};
use planch_core::factor_algebra::TurnAngle;
use planch_core::linalg::QMat;
use planch_core::spectral_limit::TestFunction;
use planch_core::temp_spectrum::{OrthTriple, PairEntry, SelfDualEntry, TempBlock, TempPoint};
use planch_core::wd_engine::{SelfDualityType, WDAtom, WDRep};
use serde::Deserialize;
use serde_json::Value;

/// A malformed input, with its location when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub source: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}:{}: {}", self.source, self.line, self.column, self.message)
        } else {
            write!(f, "{}: {}", self.source, self.message)
        }
    }
}

impl std::error::Error for InputError {}

fn err(source: &str, message: impl Into<String>) -> InputError {
    InputError { source: source.to_string(), line: 0, column: 0, message: message.into() }
}

pub fn read_json(path: &Path) -> Result<(String, Value), InputError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| err(&name, e.to_string()))?;
    let v = serde_json::from_str(&text)
        .map_err(|e| InputError { source: name.clone(), line: e.line(), column: e.column(), message: e.to_string() })?;
    Ok((name, v))
}

fn typed<T: for<'de> Deserialize<'de>>(source: &str, v: Value) -> Result<T, InputError> {
    serde_json::from_value(v).map_err(|e| err(source, e.to_string()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn to_q(&self, source: &str) -> Result<Q, InputError> {
        match self {
            Num::Int(n) => Ok(Q::from_integer((*n).into())),
            Num::Text(s) => parse_q(s.trim()).ok_or_else(|| err(source, format!("not a rational number: {s:?}"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDto {
    angle: Num,
    sp: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepDto {
    atoms: Vec<AtomDto>,
}

fn atom(source: &str, angle: &Num, sp: u32) -> Result<WDAtom, InputError> {
    if sp == 0 {
        return Err(err(source, "sp must be at least 1"));
    }
    Ok(WDAtom::new(TurnAngle::new(angle.to_q(source)?), sp))
}

pub fn rep_from_value(source: &str, v: Value) -> Result<WDRep, InputError> {
    if let Value::String(s) = &v {
        return WDRep::parse(s).map_err(|e| err(source, e.to_string()));
    }
    let dto: RepDto = typed(source, v)?;
    let atoms = dto.atoms.iter().map(|a| atom(source, &a.angle, a.sp)).collect::<Result<Vec<_>, _>>()?;
    Ok(WDRep::new(atoms))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDto {
    k: u32,
    angle: Num,
    #[serde(default)]
    twist: Option<Num>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDto {
    blocks: Vec<BlockDto>,
}

pub fn point_from_value(source: &str, v: Value) -> Result<TempPoint, InputError> {
    let dto: PointDto = typed(source, v)?;
    if dto.blocks.is_empty() {
        return Err(err(source, "a tempered point needs at least one block"));
    }
    let mut blocks = Vec::new();
    for b in &dto.blocks {
        if b.k == 0 {
            return Err(err(source, "block size k must be at least 1"));
        }
        let twist = match &b.twist {
            Some(t) => t.to_q(source)?,
            None => Q::from_integer(0.into()),
        };
        blocks.push(TempBlock::new(b.k, TurnAngle::new(b.angle.to_q(source)?), TurnAngle::new(twist)));
    }
    Ok(TempPoint::new(blocks))
}

pub fn matrix_from_value(source: &str, v: Value) -> Result<QMat, InputError> {
    let rows: Vec<Vec<Num>> = typed(source, v)?;
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_q(source)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    QMat::from_rows(rows).ok_or_else(|| err(source, "rows have different lengths or the matrix is empty"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDto {
    angle: Num,
    sp: u32,
    m: u32,
    n: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelfDualDto {
    angle: Num,
    sp: u32,
    mult: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TripleDto {
    #[serde(default)]
    pairs: Vec<PairDto>,
    #[serde(default)]
    symplectic: Vec<SelfDualDto>,
    #[serde(default)]
    orthogonal: Vec<SelfDualDto>,
}

/// Reads a triple and checks the self-duality type of every entry.
pub fn triple_from_value(source: &str, v: Value) -> Result<OrthTriple, InputError> {
    let dto: TripleDto = typed(source, v)?;
    let mut t = OrthTriple::default();
    for p in &dto.pairs {
        let a = atom(source, &p.angle, p.sp)?;
        if a.self_duality() != SelfDualityType::None {
            return Err(err(source, format!("pair atom {a} is self-dual")));
        }
        if p.m == 0 || p.n == 0 {
            return Err(err(source, "pair multiplicities must be positive"));
        }
        t.pairs.push(PairEntry { atom: a, m: p.m, n: p.n, dim: p.sp });
    }
    for e in &dto.symplectic {
        let a = atom(source, &e.angle, e.sp)?;
        if !a.self_duality().is_symplectic() || a.self_duality().is_orthogonal() {
            return Err(err(source, format!("atom {a} is not symplectic")));
        }
        if e.mult == 0 || e.mult % 2 == 1 {
            return Err(err(source, format!("symplectic atom {a} needs an even positive multiplicity")));
        }
        t.symplectic.push(SelfDualEntry { atom: a, mult: e.mult, dim: e.sp });
    }
    for e in &dto.orthogonal {
        let a = atom(source, &e.angle, e.sp)?;
        if !a.self_duality().is_orthogonal() {
            return Err(err(source, format!("atom {a} is not orthogonal")));
        }
        if e.mult == 0 {
            return Err(err(source, "multiplicities must be positive"));
        }
        t.orthogonal.push(SelfDualEntry { atom: a, mult: e.mult, dim: e.sp });
    }
    if t.pairs.is_empty() && t.symplectic.is_empty() && t.orthogonal.is_empty() {
        return Err(err(source, "empty triple"));
    }
    Ok(t)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CosSumDto {
    c0: f64,
    c1: f64,
    #[serde(default = "one")]
    freq: i64,
}

fn one() -> i64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDto {
    coef: f64,
    freq: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrigDto {
    terms: Vec<TermDto>,
    #[serde(default)]
    symmetrize: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussDto {
    width: f64,
    #[serde(default)]
    center: f64,
    #[serde(default = "default_terms")]
    terms: u32,
}

fn default_terms() -> u32 {
    16
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum PhiDto {
    Constant(f64),
    CosSum(CosSumDto),
    TrigPoly(TrigDto),
    Gaussian(GaussDto),
}

/// Reads a test function; `k` lists the block sizes used for symmetrization.
pub fn phi_from_value(source: &str, v: Value, k: &[u32]) -> Result<TestFunction, InputError> {
    let dto: PhiDto = typed(source, v)?;
    Ok(match dto {
        PhiDto::Constant(c) => TestFunction::Constant(c),
        PhiDto::CosSum(c) => TestFunction::CosSum { c0: c.c0, c1: c.c1, freq: c.freq },
        PhiDto::TrigPoly(t) => {
            if t.terms.iter().any(|x| x.freq.len() != k.len()) {
                return Err(err(source, format!("each frequency vector needs {} entries", k.len())));
            }
            let terms: Vec<(f64, Vec<i64>)> = t.terms.into_iter().map(|x| (x.coef, x.freq)).collect();
            if t.symmetrize {
                TestFunction::symmetrize(&terms, k)
            } else {
                TestFunction::TrigPoly { terms }
            }
        }
        PhiDto::Gaussian(g) => {
            if !(g.width > 0.0) {
                return Err(err(source, "gaussian width must be positive"));
            }
            TestFunction::Gaussian { width: g.width, center: g.center, terms: g.terms }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rep_both_syntaxes() {
        let a = rep_from_value("x", json!({"atoms": [{"angle": "1/2", "sp": 1}, {"angle": 0, "sp": 2}]})).unwrap();
        let b = rep_from_value("x", json!("1/2*Sp(1) + 0*Sp(2)")).unwrap();
        assert_eq!(a, b);
        assert!(rep_from_value("x", json!({"atoms": [{"angle": "1/x", "sp": 1}]})).is_err());
        assert!(rep_from_value("x", json!({"atoms": [{"angle": "0", "sp": 0}]})).is_err());
    }

    #[test]
    fn triple_checks_types() {
        let ok = json!({"pairs": [{"angle": "1/5", "sp": 1, "m": 1, "n": 1}], "orthogonal": [{"angle": "0", "sp": 1, "mult": 1}]});
        assert_eq!(triple_from_value("t", ok).unwrap().d(), 3);
        assert!(triple_from_value("t", json!({"pairs": [{"angle": "1/2", "sp": 1, "m": 1, "n": 1}]})).is_err());
        assert!(triple_from_value("t", json!({"orthogonal": [{"angle": "0", "sp": 2, "mult": 1}]})).is_err());
        assert!(triple_from_value("t", json!({"symplectic": [{"angle": "0", "sp": 2, "mult": 1}]})).is_err());
    }

    #[test]
    fn matrices_and_phi() {
        let m = matrix_from_value("m", json!([["-1", 1], ["-1", "0"]])).unwrap();
        assert_eq!(m.rows, 2);
        assert!(matrix_from_value("m", json!([["1"], ["1", "2"]])).is_err());
        let phi = phi_from_value("p", json!({"trig_poly": {"terms": [{"coef": 1.0, "freq": [1, 0]}], "symmetrize": true}}), &[1, 1]).unwrap();
        assert!(phi.check_invariant(&[1, 1]).is_ok());
        assert_eq!(phi_from_value("p", json!({"constant": 2.0}), &[1]).unwrap(), TestFunction::Constant(2.0));
    }
}
