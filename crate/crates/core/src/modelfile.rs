//! JSON model files.
//!
//! ```json
//! {"type": "powerset", "atoms": ["1", "2"], "constants": {"c": ["1"]},
//!  "families": {"sing": {"singletons": "all"}},
//!  "witnesses": {"sing": []}}
//! ```
//!
//! A family is one of `{"singletons": N}`, `{"singletons": "all"}`,
//! `{"members": [[label, ...], ...]}` or `{"opaque": "text", "finite": bool}`,
//! optionally with `"bounded_above"`. Member `j` of a family is the model atom
//! at index `j`. Witness values are arrays of atom labels.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use thiserror::Error;

use crate::model::{ConstantFamily, Elem, FamilyMembers, FinSetElement, ModelError, PowersetModel};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model at `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl LoadError {
    fn invalid(key: impl Into<String>, message: impl fmt::Display) -> LoadError {
        LoadError::Invalid { key: key.into(), message: message.to_string() }
    }
}

/// An object whose duplicate keys are an error rather than last-wins.
#[derive(Debug)]
struct UniqueMap<V>(Vec<(String, V)>);

impl<V> Default for UniqueMap<V> {
    fn default() -> Self {
        UniqueMap(Vec::new())
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V_<V>(PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for V_<V> {
            type Value = UniqueMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<UniqueMap<V>, A::Error> {
                let mut out: Vec<(String, V)> = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, V>()? {
                    if out.iter().any(|(e, _)| *e == k) {
                        return Err(de::Error::custom(format!("duplicate key `{k}`")));
                    }
                    out.push((k, v));
                }
                Ok(UniqueMap(out))
            }
        }
        d.deserialize_map(V_(PhantomData))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(rename = "type")]
    kind: String,
    atoms: Vec<String>,
    #[serde(default)]
    constants: UniqueMap<Vec<String>>,
    #[serde(default)]
    families: UniqueMap<RawFamily>,
    #[serde(default)]
    witnesses: UniqueMap<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSingletons {
    Count(u64),
    Keyword(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    singletons: Option<RawSingletons>,
    members: Option<Vec<Vec<String>>>,
    opaque: Option<String>,
    finite: Option<bool>,
    bounded_above: Option<bool>,
}

/// A model together with its declared families and witnesses.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: PowersetModel,
    pub families: BTreeMap<String, ConstantFamily>,
    pub witnesses: BTreeMap<String, Elem>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    let first_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    if !first_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return false;
    }
    // x<digits>... is reserved for variables
    let rest = name.strip_prefix('x').unwrap_or("");
    !rest.starts_with(|c: char| c.is_ascii_digit())
}

fn labels_to_finset(m: &PowersetModel, key: &str, labels: &[String]) -> Result<FinSetElement, LoadError> {
    let e = m
        .element_from_labels(key, labels.iter().map(String::as_str))
        .map_err(|err| LoadError::invalid(key, err))?;
    Ok(FinSetElement::from_elem(e))
}

fn build_family(m: &PowersetModel, name: &str, raw: &RawFamily) -> Result<ConstantFamily, LoadError> {
    let key = format!("families.{name}");
    let given = [raw.singletons.is_some(), raw.members.is_some(), raw.opaque.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(LoadError::invalid(key, "expected exactly one of `singletons`, `members`, `opaque`"));
    }
    if raw.finite.is_some() && raw.opaque.is_none() {
        return Err(LoadError::invalid(key, "`finite` applies only to opaque families"));
    }
    let members = if let Some(s) = &raw.singletons {
        match s {
            RawSingletons::Count(n) => FamilyMembers::Singletons { limit: Some(*n) },
            RawSingletons::Keyword(k) if k == "all" => FamilyMembers::Singletons { limit: None },
            RawSingletons::Keyword(k) => {
                return Err(LoadError::invalid(key, format!("`singletons` must be a count or \"all\", got \"{k}\"")))
            }
        }
    } else if let Some(ms) = &raw.members {
        let elems = ms.iter().map(|labels| labels_to_finset(m, &key, labels)).collect::<Result<_, _>>()?;
        FamilyMembers::Explicit(elems)
    } else {
        FamilyMembers::Opaque { description: raw.opaque.clone().unwrap(), finite: raw.finite }
    };
    let mut family = ConstantFamily::new(name, members);
    if let Some(b) = raw.bounded_above {
        let derived = family.bounded_above;
        let opaque = matches!(family.members, FamilyMembers::Opaque { .. });
        if !opaque && b != derived {
            return Err(LoadError::invalid(format!("{key}.bounded_above"), format!("contradicts the members (expected {derived})")));
        }
        family.bounded_above = b;
    }
    Ok(family)
}

pub fn parse_model(text: &str) -> Result<LoadedModel, LoadError> {
    let raw: RawModel = serde_json::from_str(text)?;
    if raw.kind != "powerset" {
        return Err(LoadError::invalid("type", format!("unsupported model type \"{}\"", raw.kind)));
    }
    let mut model = PowersetModel::new(raw.atoms).map_err(|e| LoadError::invalid("atoms", e))?;
    for (name, labels) in &raw.constants.0 {
        let key = format!("constants.{name}");
        if !valid_name(name) {
            return Err(LoadError::invalid(key, "not a valid constant name"));
        }
        let e = model
            .element_from_labels(name, labels.iter().map(String::as_str))
            .map_err(|err| LoadError::invalid(&key, err))?;
        model.add_constant(name, e).map_err(|err| LoadError::invalid(&key, err))?;
    }
    let mut families = BTreeMap::new();
    for (name, rf) in &raw.families.0 {
        if !valid_name(name) {
            return Err(LoadError::invalid(format!("families.{name}"), "not a valid family name"));
        }
        if model.constant(name).is_some() {
            return Err(LoadError::invalid(format!("families.{name}"), "name already used by a constant"));
        }
        families.insert(name.clone(), build_family(&model, name, rf)?);
    }
    let mut witnesses = BTreeMap::new();
    for (name, labels) in &raw.witnesses.0 {
        let key = format!("witnesses.{name}");
        let Some(f) = families.get_mut(name) else {
            return Err(LoadError::invalid(key, "no family with this name"));
        };
        let e = model
            .element_from_labels(&key, labels.iter().map(String::as_str))
            .map_err(|err| LoadError::invalid(&key, err))?;
        f.witness_c = Some(FinSetElement::from_elem(e));
        witnesses.insert(name.clone(), e);
    }
    Ok(LoadedModel { model, families, witnesses })
}

pub fn load_model(path: &Path) -> Result<LoadedModel, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_model(&text)
}

impl From<ModelError> for LoadError {
    fn from(e: ModelError) -> LoadError {
        LoadError::invalid("model", e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let m = parse_model(r#"{"type":"powerset","atoms":["1","2"],"constants":{"c":["1"]}}"#).unwrap();
        assert_eq!(crate::model::enumerate_elements(&m.model).len(), 4);
        assert_eq!(m.model.constant("c"), Some(Elem(1)));

        let err = parse_model(r#"{"type":"powerset","atoms":["1"],"constants":{"c":["7"]}}"#).unwrap_err();
        assert!(matches!(err, LoadError::Invalid { ref key, .. } if key == "constants.c"), "{err}");

        let m = parse_model(r#"{"type":"powerset","atoms":[],"constants":{}}"#).unwrap();
        assert_eq!(crate::model::enumerate_elements(&m.model).len(), 1);
    }

    #[test]
    fn duplicates_rejected() {
        let dup = r#"{"type":"powerset","atoms":["1"],"constants":{"c":["1"],"c":[]}}"#;
        assert!(parse_model(dup).unwrap_err().to_string().contains("duplicate key `c`"));
        let dup_atoms = r#"{"type":"powerset","atoms":["1","1"]}"#;
        assert!(matches!(parse_model(dup_atoms), Err(LoadError::Invalid { ref key, .. }) if key == "atoms"));
    }

    #[test]
    fn names_checked() {
        for bad in ["x1", "1c", "x2a", ""] {
            let text = format!(r#"{{"type":"powerset","atoms":["1"],"constants":{{"{bad}":["1"]}}}}"#);
            assert!(parse_model(&text).is_err(), "{bad}");
        }
        assert!(valid_name("xa") && valid_name("c_1") && valid_name("x"));
    }

    #[test]
    fn families_and_witnesses() {
        let text = r#"{"type":"powerset","atoms":["0","1","2"],
            "families":{"sing":{"singletons":"all"},"two":{"members":[["0"],["1","2"]]},
                        "fin":{"singletons":2},"m":{"opaque":"unknown","finite":null}},
            "witnesses":{"sing":[]}}"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.families["sing"].is_finite(), Some(false));
        assert!(!m.families["sing"].bounded_above);
        assert_eq!(m.families["two"].materialize().unwrap()[1], [1u64, 2].into());
        assert_eq!(m.families["fin"].materialize().unwrap().len(), 2);
        assert_eq!(m.families["m"].is_finite(), None);
        assert_eq!(m.witnesses["sing"], Elem::ZERO);

        let bad = r#"{"type":"powerset","atoms":["0"],"families":{"f":{"singletons":"some"}}}"#;
        assert!(parse_model(bad).is_err());
        let bad = r#"{"type":"powerset","atoms":["0"],"families":{"f":{"singletons":1,"bounded_above":false}}}"#;
        assert!(parse_model(bad).is_err());
        let bad = r#"{"type":"powerset","atoms":["0"],"witnesses":{"f":[]}}"#;
        assert!(parse_model(bad).is_err());
    }
}
