//! Parsing of command-line vectors, insertion files and relation files.

use serde::Deserialize;
use toricgw::fan::{CohomClass, CohomMonomial, CurveClass};
use toricgw::rational::parse_q;
use toricgw::Q;

pub fn parse_ints(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<i64>().map_err(|_| format!("not an integer: {x:?}")))
        .collect()
}

pub fn parse_u32s(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<u32>().map_err(|_| format!("not a non-negative integer: {x:?}")))
        .collect()
}

/// `"1,1,0;0,1,1"`: one exponent vector per class.
pub fn parse_monomials(s: &str, n: usize) -> Result<Vec<CohomClass>, String> {
    s.split(';')
        .map(|part| monomial(part, n).map(CohomClass::monomial))
        .collect()
}

fn monomial(s: &str, n: usize) -> Result<CohomMonomial, String> {
    let e = parse_u32s(s)?;
    if e.len() != n {
        return Err(format!("exponent vector {s:?} has length {}, expected {n}", e.len()));
    }
    Ok(CohomMonomial(e))
}

/// `"1,-1;0,2"`: one integer vector per class.
pub fn parse_classes(s: &str, n: usize) -> Result<Vec<CurveClass>, String> {
    s.split(';')
        .map(|part| {
            let v = parse_ints(part)?;
            if v.len() != n {
                return Err(format!("class {part:?} has length {}, expected {n}", v.len()));
            }
            Ok(CurveClass(v))
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    coefficient: String,
    monomial: Vec<u32>,
}

/// A class: an exponent string like `"0,1,1"` or a list of terms.
#[derive(Deserialize)]
#[serde(untagged)]
enum ClassDoc {
    Monomial(String),
    Terms(Vec<TermDoc>),
}

fn class_from_doc(doc: ClassDoc, n: usize) -> Result<CohomClass, String> {
    match doc {
        ClassDoc::Monomial(s) => monomial(&s, n).map(CohomClass::monomial),
        ClassDoc::Terms(ts) => {
            let mut c = CohomClass::zero();
            for t in ts {
                if t.monomial.len() != n {
                    return Err(format!("monomial has length {}, expected {n}", t.monomial.len()));
                }
                let x = parse_q(&t.coefficient).map_err(|e| e.to_string())?;
                c.add_term(CohomMonomial(t.monomial), x);
            }
            Ok(c)
        }
    }
}

/// JSON list of classes.
pub fn parse_insertion_file(text: &str, n: usize) -> Result<Vec<CohomClass>, String> {
    let docs: Vec<ClassDoc> = serde_json::from_str(text).map_err(|e| format!("insertion file: {e}"))?;
    docs.into_iter().map(|s| class_from_doc(s, n)).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationTermDoc {
    #[serde(default)]
    coefficient: Option<String>,
    /// Shift class as an intersection vector.
    #[serde(default)]
    shift: Option<Vec<i64>>,
    /// Shift class as exponents of the cap generators.
    #[serde(default)]
    q: Option<Vec<i64>>,
    #[serde(default)]
    factors: Vec<ClassDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationDoc {
    lhs: Vec<RelationTermDoc>,
    rhs: Vec<RelationTermDoc>,
}

pub fn parse_relation_file(
    text: &str,
    n: usize,
    generators: &[CurveClass],
) -> Result<toricgw::quantum::Relation, String> {
    let doc: RelationDoc = serde_json::from_str(text).map_err(|e| format!("relation file: {e}"))?;
    let side = |ts: Vec<RelationTermDoc>| -> Result<Vec<toricgw::quantum::RelationTerm>, String> {
        ts.into_iter()
            .map(|t| {
                let coeff = match t.coefficient {
                    Some(s) => parse_q(&s).map_err(|e| e.to_string())?,
                    None => Q::from_integer(1.into()),
                };
                let shift = match (t.shift, t.q) {
                    (Some(_), Some(_)) => return Err("give either shift or q, not both".to_string()),
                    (Some(v), None) => {
                        if v.len() != n {
                            return Err(format!("shift has length {}, expected {n}", v.len()));
                        }
                        CurveClass(v)
                    }
                    (None, Some(e)) => {
                        if e.len() != generators.len() {
                            return Err(format!("q has {} exponents for {} generators", e.len(), generators.len()));
                        }
                        let mut c = CurveClass::zero(n);
                        for (g, &k) in generators.iter().zip(&e) {
                            c = c.plus(&g.scaled(k));
                        }
                        c
                    }
                    (None, None) => CurveClass::zero(n),
                };
                let factors = t
                    .factors
                    .into_iter()
                    .map(|f| class_from_doc(f, n))
                    .collect::<Result<_, _>>()?;
                Ok(toricgw::quantum::RelationTerm { coeff, shift, factors })
            })
            .collect()
    };
    Ok(toricgw::quantum::Relation {
        lhs: side(doc.lhs)?,
        rhs: side(doc.rhs)?,
    })
}
