//! JSON system files: reading and writing linear, singular, input-affine
//! polynomial, and realized systems.  Matrix entries are JSON numbers or
//! exact "p/q" strings; everything written by this module re-parses to an
//! identical in-memory record.

use crate::error::{OrkitError, Result};
use crate::nonlin::{PolyAffineSystem, PolyVecField};
use crate::orsys::{Exactness, LinearSystem, ORSystem, OrKind, SingularSystem, TimeKind};
use crate::poly::Poly;
use crate::rat::{parse_rat, rationalize, Rat, RatMat};
use num::ToPrimitive;
use serde_json::{json, Map, Value};

/// Largest denominator used when rationalizing float entries.
pub const MAX_DEN: u64 = 1_000_000;

/// A parsed system file.
#[derive(Clone, Debug)]
pub enum SystemFile {
    Linear {
        sys: LinearSystem,
        /// Optional disturbance directions, one column per disturbance.
        disturbances: Option<RatMat>,
    },
    Singular(SingularSystem),
    PolyAffine(PolyAffineSystem),
    Or(ORSystem),
}

fn entry_from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(i.into()))
            } else if let Some(f) = n.as_f64() {
                Ok(rationalize(f, MAX_DEN))
            } else {
                Err(OrkitError::Input(format!("unrepresentable number {n}")))
            }
        }
        Value::String(s) => {
            parse_rat(s).map_err(|_| OrkitError::Input(format!("bad rational string {s:?}")))
        }
        other => Err(OrkitError::Input(format!(
            "matrix entry must be a number or \"p/q\" string, got {other}"
        ))),
    }
}

pub(crate) fn entry_to_json(r: &Rat) -> Value {
    if r.denom().to_i64() == Some(1) {
        if let Some(i) = r.numer().to_i64() {
            return json!(i);
        }
    }
    json!(r.to_string())
}

pub(crate) fn mat_from_json(v: &Value, what: &str) -> Result<RatMat> {
    let rows = v
        .as_array()
        .ok_or_else(|| OrkitError::Input(format!("{what}: expected an array of rows")))?;
    let mut data: Vec<Vec<Rat>> = Vec::with_capacity(rows.len());
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let cells = row.as_array().ok_or_else(|| {
            OrkitError::Input(format!("{what}: row {} is not an array", i + 1))
        })?;
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(OrkitError::Input(format!(
                    "{what}: row {} has {} entries, expected {w}",
                    i + 1,
                    cells.len()
                )))
            }
            _ => {}
        }
        data.push(cells.iter().map(entry_from_json).collect::<Result<_>>()?);
    }
    if data.is_empty() || width == Some(0) {
        return Err(OrkitError::Input(format!("{what}: empty matrix")));
    }
    Ok(RatMat::from_rows(data))
}

pub(crate) fn mat_to_json(m: &RatMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| entry_to_json(&m[(i, j)])).collect()))
            .collect(),
    )
}

fn field(obj: &Map<String, Value>, key: &str) -> Result<Value> {
    obj.get(key)
        .cloned()
        .ok_or_else(|| OrkitError::Input(format!("missing field {key:?}")))
}

fn time_from_json(obj: &Map<String, Value>) -> Result<TimeKind> {
    match obj.get("time").and_then(|v| v.as_str()) {
        None | Some("continuous") => Ok(TimeKind::Continuous),
        Some("discrete") => Ok(TimeKind::Discrete),
        Some(other) => Err(OrkitError::Input(format!(
            "time must be \"continuous\" or \"discrete\", got {other:?}"
        ))),
    }
}

fn time_to_json(t: TimeKind) -> Value {
    match t {
        TimeKind::Continuous => json!("continuous"),
        TimeKind::Discrete => json!("discrete"),
    }
}

fn kind_from_str(s: &str) -> Result<OrKind> {
    Ok(match s {
        "projection" => OrKind::ApproxProjection,
        "pseudoinverse" => OrKind::ApproxPseudoInverse,
        "exact" => OrKind::Exact,
        "extended" => OrKind::Extended,
        "feedback" => OrKind::Feedback,
        "singular" => OrKind::Singular,
        other => return Err(OrkitError::Input(format!("unknown realization kind {other:?}"))),
    })
}

pub fn kind_to_str(k: OrKind) -> &'static str {
    match k {
        OrKind::ApproxProjection => "projection",
        OrKind::ApproxPseudoInverse => "pseudoinverse",
        OrKind::Exact => "exact",
        OrKind::Extended => "extended",
        OrKind::Feedback => "feedback",
        OrKind::Singular => "singular",
    }
}

fn polys_from_json(v: &Value, nvars: usize, what: &str) -> Result<Vec<Poly>> {
    let arr = v
        .as_array()
        .ok_or_else(|| OrkitError::Input(format!("{what}: expected an array of strings")))?;
    arr.iter()
        .enumerate()
        .map(|(i, s)| {
            let s = s.as_str().ok_or_else(|| {
                OrkitError::Input(format!("{what}: entry {} is not a string", i + 1))
            })?;
            Poly::parse(s, nvars)
        })
        .collect()
}

fn polys_to_json(ps: &[Poly]) -> Value {
    Value::Array(ps.iter().map(|p| json!(p.to_string())).collect())
}

/// Parse a system file from its JSON text.
pub fn parse_system(text: &str) -> Result<SystemFile> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| OrkitError::Input(format!("invalid JSON: {e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| OrkitError::Input("top level must be a JSON object".into()))?;
    let ty = obj
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| OrkitError::Input("missing string field \"type\"".into()))?;
    match ty {
        "linear" => {
            let a = mat_from_json(&field(obj, "a")?, "a")?;
            let b = mat_from_json(&field(obj, "b")?, "b")?;
            let h = mat_from_json(&field(obj, "h")?, "h")?;
            let time = time_from_json(obj)?;
            let disturbances = match obj.get("disturbances") {
                Some(d) => Some(mat_from_json(d, "disturbances")?),
                None => None,
            };
            let sys = LinearSystem::new(a, b, h, time)?;
            if let Some(e) = &disturbances {
                if e.nrows() != sys.state_dim() {
                    return Err(OrkitError::ShapeMismatch {
                        expected: format!("disturbances with {} rows", sys.state_dim()),
                        got: format!("{} rows", e.nrows()),
                    });
                }
            }
            Ok(SystemFile::Linear { sys, disturbances })
        }
        "singular" => {
            let e = mat_from_json(&field(obj, "e")?, "e")?;
            let f = mat_from_json(&field(obj, "f")?, "f")?;
            let a = mat_from_json(&field(obj, "a")?, "a")?;
            let b = mat_from_json(&field(obj, "b")?, "b")?;
            let d = match obj.get("d") {
                Some(d) => Some(mat_from_json(d, "d")?),
                None => None,
            };
            Ok(SystemFile::Singular(SingularSystem::new(e, f, a, b, d)?))
        }
        "poly_affine" => {
            let nvars = obj
                .get("nvars")
                .and_then(|n| n.as_u64())
                .ok_or_else(|| OrkitError::Input("missing integer field \"nvars\"".into()))?
                as usize;
            let f = PolyVecField::new(polys_from_json(&field(obj, "f")?, nvars, "f")?);
            if f.nvars() != nvars {
                return Err(OrkitError::ShapeMismatch {
                    expected: format!("{nvars} drift components"),
                    got: format!("{}", f.components.len()),
                });
            }
            let garr = field(obj, "g")?;
            let garr = garr
                .as_array()
                .ok_or_else(|| OrkitError::Input("g: expected an array of fields".into()))?;
            let mut g = Vec::with_capacity(garr.len());
            for (i, gi) in garr.iter().enumerate() {
                let comps = polys_from_json(gi, nvars, &format!("g[{}]", i + 1))?;
                if comps.len() != nvars {
                    return Err(OrkitError::ShapeMismatch {
                        expected: format!("{nvars} components in g[{}]", i + 1),
                        got: format!("{}", comps.len()),
                    });
                }
                g.push(PolyVecField::new(comps));
            }
            let h = polys_from_json(&field(obj, "h")?, nvars, "h")?;
            Ok(SystemFile::PolyAffine(PolyAffineSystem::new(f, g, h)?))
        }
        "or" => {
            let kind = kind_from_str(
                obj.get("kind")
                    .and_then(|k| k.as_str())
                    .ok_or_else(|| OrkitError::Input("missing string field \"kind\"".into()))?,
            )?;
            let l = mat_from_json(&field(obj, "l")?, "l")?;
            let n_mat = mat_from_json(&field(obj, "n")?, "n")?;
            let observer_map = mat_from_json(&field(obj, "observer_map")?, "observer_map")?;
            let selector = mat_from_json(&field(obj, "selector")?, "selector")?;
            let feedback_f = match obj.get("feedback") {
                Some(f) => Some(mat_from_json(f, "feedback")?),
                None => None,
            };
            let exactness = match obj.get("exactness").and_then(|e| e.as_str()) {
                Some("exact") => Exactness::Exact,
                Some("approximate") | None => Exactness::Approximate,
                Some(other) => {
                    return Err(OrkitError::Input(format!(
                        "exactness must be \"exact\" or \"approximate\", got {other:?}"
                    )))
                }
            };
            let time = time_from_json(obj)?;
            if !l.is_square() || l.nrows() != n_mat.nrows() || l.nrows() != observer_map.nrows() {
                return Err(OrkitError::ShapeMismatch {
                    expected: "square l with matching n and observer_map row counts".into(),
                    got: format!(
                        "l {}x{}, n {} rows, observer_map {} rows",
                        l.nrows(),
                        l.ncols(),
                        n_mat.nrows(),
                        observer_map.nrows()
                    ),
                });
            }
            Ok(SystemFile::Or(ORSystem {
                kind,
                l,
                n_mat,
                observer_map,
                selector,
                feedback_f,
                exactness,
                time,
            }))
        }
        other => Err(OrkitError::Input(format!(
            "unknown system type {other:?}; expected linear, singular, poly_affine, or or"
        ))),
    }
}

/// Serialize a system file to pretty JSON.
pub fn system_to_string(sys: &SystemFile) -> String {
    let v = match sys {
        SystemFile::Linear { sys, disturbances } => {
            let mut m = Map::new();
            m.insert("type".into(), json!("linear"));
            m.insert("time".into(), time_to_json(sys.time));
            m.insert("a".into(), mat_to_json(&sys.a));
            m.insert("b".into(), mat_to_json(&sys.b));
            m.insert("h".into(), mat_to_json(&sys.h));
            if let Some(e) = disturbances {
                m.insert("disturbances".into(), mat_to_json(e));
            }
            Value::Object(m)
        }
        SystemFile::Singular(s) => {
            let mut m = Map::new();
            m.insert("type".into(), json!("singular"));
            m.insert("e".into(), mat_to_json(&s.e));
            m.insert("f".into(), mat_to_json(&s.f_alg));
            m.insert("a".into(), mat_to_json(&s.a));
            m.insert("b".into(), mat_to_json(&s.b));
            if let Some(d) = &s.d {
                m.insert("d".into(), mat_to_json(d));
            }
            Value::Object(m)
        }
        SystemFile::PolyAffine(s) => {
            let mut m = Map::new();
            m.insert("type".into(), json!("poly_affine"));
            m.insert("nvars".into(), json!(s.nvars()));
            m.insert("f".into(), polys_to_json(&s.f.components));
            m.insert(
                "g".into(),
                Value::Array(s.g.iter().map(|gi| polys_to_json(&gi.components)).collect()),
            );
            m.insert("h".into(), polys_to_json(&s.h));
            Value::Object(m)
        }
        SystemFile::Or(o) => {
            let mut m = Map::new();
            m.insert("type".into(), json!("or"));
            m.insert("kind".into(), json!(kind_to_str(o.kind)));
            m.insert("time".into(), time_to_json(o.time));
            m.insert("l".into(), mat_to_json(&o.l));
            m.insert("n".into(), mat_to_json(&o.n_mat));
            m.insert("observer_map".into(), mat_to_json(&o.observer_map));
            m.insert("selector".into(), mat_to_json(&o.selector));
            if let Some(f) = &o.feedback_f {
                m.insert("feedback".into(), mat_to_json(f));
            }
            m.insert(
                "exactness".into(),
                json!(match o.exactness {
                    Exactness::Exact => "exact",
                    Exactness::Approximate => "approximate",
                }),
            );
            Value::Object(m)
        }
    };
    let mut s = serde_json::to_string_pretty(&v).expect("serialization cannot fail");
    s.push('\n');
    s
}

pub fn read_system(path: &std::path::Path) -> Result<SystemFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| OrkitError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text)
}

pub fn write_system(path: &std::path::Path, sys: &SystemFile) -> Result<()> {
    std::fs::write(path, system_to_string(sys))
        .map_err(|e| OrkitError::Input(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_frac};

    fn sample_linear() -> SystemFile {
        SystemFile::Linear {
            sys: LinearSystem::new(
                RatMat::from_i64(&[&[0, 1], &[-1, 0]]),
                RatMat::from_i64(&[&[0], &[1]]),
                RatMat::from_i64(&[&[1, 0]]),
                TimeKind::Continuous,
            )
            .unwrap(),
            disturbances: Some(RatMat::from_i64(&[&[1], &[0]])),
        }
    }

    fn roundtrip(sf: &SystemFile) -> SystemFile {
        parse_system(&system_to_string(sf)).unwrap()
    }

    #[test]
    fn linear_roundtrip() {
        let sf = sample_linear();
        let back = roundtrip(&sf);
        match (sf, back) {
            (
                SystemFile::Linear { sys: a, disturbances: da },
                SystemFile::Linear { sys: b, disturbances: db },
            ) => {
                assert_eq!(a.a, b.a);
                assert_eq!(a.b, b.b);
                assert_eq!(a.h, b.h);
                assert_eq!(a.time, b.time);
                assert_eq!(da, db);
            }
            _ => panic!("type changed in roundtrip"),
        }
    }

    #[test]
    fn rational_strings_and_floats() {
        let text = r#"{
            "type": "linear",
            "a": [[0.5, "1/3"], [2, -1]],
            "b": [[1], [0]],
            "h": [["-2/7", 0]]
        }"#;
        let sf = parse_system(text).unwrap();
        let SystemFile::Linear { sys, disturbances } = sf else {
            panic!("expected linear")
        };
        assert_eq!(sys.a[(0, 0)], rat_frac(1, 2));
        assert_eq!(sys.a[(0, 1)], rat_frac(1, 3));
        assert_eq!(sys.h[(0, 0)], rat_frac(-2, 7));
        assert_eq!(sys.time, TimeKind::Continuous);
        assert!(disturbances.is_none());
        // written form re-parses identically
        let back = roundtrip(&SystemFile::Linear { sys: sys.clone(), disturbances: None });
        let SystemFile::Linear { sys: sys2, .. } = back else { panic!() };
        assert_eq!(sys.a, sys2.a);
    }

    #[test]
    fn poly_affine_roundtrip() {
        let text = r#"{
            "type": "poly_affine",
            "nvars": 3,
            "f": ["x2 + x3 + x2^2", "x1 - x3 + x3^2", "x3 + x2^2"],
            "g": [["0", "1", "0"]],
            "h": ["x1 - x3"]
        }"#;
        let sf = parse_system(text).unwrap();
        let SystemFile::PolyAffine(sys) = &sf else { panic!("expected poly_affine") };
        assert_eq!(sys.g.len(), 1);
        let back = roundtrip(&sf);
        let SystemFile::PolyAffine(sys2) = back else { panic!() };
        assert_eq!(sys.f, sys2.f);
        assert_eq!(sys.g, sys2.g);
        assert_eq!(sys.h, sys2.h);
    }

    #[test]
    fn or_roundtrip() {
        let or = ORSystem {
            kind: OrKind::Extended,
            l: RatMat::from_i64(&[&[0, 1], &[1, 0]]),
            n_mat: RatMat::from_i64(&[&[0], &[1]]),
            observer_map: RatMat::from_i64(&[&[1, 0, -1], &[0, 1, 0]]),
            selector: RatMat::from_i64(&[&[1, 0]]),
            feedback_f: Some(RatMat::from_i64(&[&[0, 0, -1]])),
            exactness: Exactness::Exact,
            time: TimeKind::Continuous,
        };
        let back = roundtrip(&SystemFile::Or(or.clone()));
        let SystemFile::Or(o2) = back else { panic!() };
        assert_eq!(o2.kind, or.kind);
        assert_eq!(o2.l, or.l);
        assert_eq!(o2.n_mat, or.n_mat);
        assert_eq!(o2.observer_map, or.observer_map);
        assert_eq!(o2.selector, or.selector);
        assert_eq!(o2.feedback_f, or.feedback_f);
        assert_eq!(o2.exactness, or.exactness);
    }

    #[test]
    fn diagnostics_for_malformed_input() {
        assert!(parse_system("not json").is_err());
        assert!(parse_system("{}").is_err());
        assert!(parse_system(r#"{"type": "linear", "a": [[1]], "b": [[1]]}"#).is_err());
        // ragged rows
        let ragged = r#"{"type":"linear","a":[[1,2],[3]],"b":[[1],[0]],"h":[[1,0]]}"#;
        let err = parse_system(ragged).unwrap_err();
        assert!(err.to_string().contains("row 2"));
        // bad entry type
        let bad = r#"{"type":"linear","a":[[1,true],[0,1]],"b":[[1],[0]],"h":[[1,0]]}"#;
        assert!(parse_system(bad).is_err());
    }

    #[test]
    fn float_entries_rationalize() {
        let text = r#"{"type":"linear","a":[[0.25,0],[0,-1.5]],"b":[[1],[0]],"h":[[1,0]]}"#;
        let SystemFile::Linear { sys, .. } = parse_system(text).unwrap() else { panic!() };
        assert_eq!(sys.a[(0, 0)], rat_frac(1, 4));
        assert_eq!(sys.a[(1, 1)], rat_frac(-3, 2));
        let _ = rat(0);
    }
}
