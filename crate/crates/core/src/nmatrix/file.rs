use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use super::{Connective, Nmatrix, NmatrixError, Value, ValueSet};

/// On-disk form of a matrix:
///
/// ```json
/// {"name": "two", "values": ["1", "0"], "designated": ["1"],
///  "neg": {"1": ["0"], "0": ["1"]},
///  "box": {"1": ["1", "0"], "0": ["0"]},
///  "impl": {"1,1": ["1"], "1,0": ["0"], "0,1": ["1"], "0,0": ["1"]}}
/// ```
///
/// Implication cells are keyed `"a,b"`, so value names may not contain commas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    #[serde(default)]
    pub name: Option<String>,
    pub values: Vec<String>,
    pub designated: Vec<String>,
    pub neg: BTreeMap<String, Vec<String>>,
    #[serde(rename = "box")]
    pub boxed: BTreeMap<String, Vec<String>>,
    #[serde(rename = "impl")]
    pub imp: BTreeMap<String, Vec<String>>,
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<Nmatrix, NmatrixError> {
        let n = self.values.len();
        if let Some(v) = self.values.iter().find(|v| v.contains(',')) {
            return Err(NmatrixError::File(format!(
                "value name {v:?} contains a comma"
            )));
        }
        if n == 0 {
            return Err(NmatrixError::NoValues);
        }
        if n > 32 {
            return Err(NmatrixError::TooManyValues);
        }
        let index = |name: &str| -> Result<Value, NmatrixError> {
            self.values
                .iter()
                .position(|v| v == name)
                .map(|i| Value(i as u8))
                .ok_or_else(|| NmatrixError::UnknownValue(name.to_string()))
        };
        let to_set = |names: &[String]| -> Result<ValueSet, NmatrixError> {
            names
                .iter()
                .try_fold(ValueSet::EMPTY, |acc, n| Ok(acc.with(index(n)?)))
        };
        let unary = |conn: Connective, table: &BTreeMap<String, Vec<String>>| {
            for key in table.keys() {
                index(key)?;
            }
            self.values
                .iter()
                .map(|v| {
                    let cell = table.get(v).ok_or_else(|| NmatrixError::MissingCell {
                        connective: conn,
                        inputs: v.clone(),
                    })?;
                    to_set(cell)
                })
                .collect::<Result<Vec<_>, NmatrixError>>()
        };
        let neg = unary(Connective::Neg, &self.neg)?;
        let boxed = unary(Connective::Box, &self.boxed)?;
        for key in self.imp.keys() {
            let (a, b) = key.split_once(',').ok_or_else(|| {
                NmatrixError::File(format!(
                    "implication key {key:?} is not of the form \"a,b\""
                ))
            })?;
            index(a.trim())?;
            index(b.trim())?;
        }
        let imp_cells: BTreeMap<(&str, &str), &Vec<String>> = self
            .imp
            .iter()
            .filter_map(|(k, v)| k.split_once(',').map(|(a, b)| ((a.trim(), b.trim()), v)))
            .collect();
        let mut imp = Vec::with_capacity(n * n);
        for a in &self.values {
            for b in &self.values {
                let cell = imp_cells.get(&(a.as_str(), b.as_str())).ok_or_else(|| {
                    NmatrixError::MissingCell {
                        connective: Connective::Impl,
                        inputs: format!("{a},{b}"),
                    }
                })?;
                imp.push(to_set(cell)?);
            }
        }
        let designated = to_set(&self.designated)?;
        Nmatrix::new(
            self.name.clone().unwrap_or_else(|| "custom".to_string()),
            self.values.clone(),
            designated,
            neg,
            boxed,
            imp,
        )
    }
}

impl Nmatrix {
    pub fn from_json(text: &str) -> Result<Nmatrix, NmatrixError> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| NmatrixError::File(e.to_string()))?;
        file.into_matrix()
    }

    /// JSON rendering with keys in value order.
    pub fn to_json_value(&self) -> Json {
        let names = |s: ValueSet| -> Json {
            Json::Array(
                s.iter()
                    .map(|v| Json::String(self.value_name(v).to_string()))
                    .collect(),
            )
        };
        let unary = |f: &dyn Fn(Value) -> ValueSet| -> Json {
            let mut map = Map::new();
            for v in self.all_values() {
                map.insert(self.value_name(v).to_string(), names(f(v)));
            }
            Json::Object(map)
        };
        let mut imp = Map::new();
        for a in self.all_values() {
            for b in self.all_values() {
                let key = format!("{},{}", self.value_name(a), self.value_name(b));
                imp.insert(key, names(self.imp(a, b)));
            }
        }
        json!({
            "name": self.name(),
            "values": self.values(),
            "designated": names(self.designated()),
            "neg": unary(&|v| self.neg(v)),
            "box": unary(&|v| self.box_of(v)),
            "impl": Json::Object(imp),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("matrix JSON serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{builtin_matrix, Builtin};
    use super::*;

    #[test]
    fn builtins_round_trip() {
        for b in Builtin::ALL {
            let m = b.matrix();
            assert_eq!(Nmatrix::from_json(&m.to_json()).unwrap(), m);
        }
    }

    #[test]
    fn keys_follow_value_order() {
        let text = builtin_matrix("W").unwrap().to_json();
        let p = text.find("\"P\"").unwrap();
        let r = text.find("\"R\"").unwrap();
        let f = text.find("\"f\"").unwrap();
        assert!(p < f && f < r);
    }

    #[test]
    fn two_valued_example_loads() {
        let text = r#"{"name": "two", "values": ["1", "0"], "designated": ["1"],
            "neg": {"1": ["0"], "0": ["1"]},
            "box": {"1": ["1", "0"], "0": ["0"]},
            "impl": {"1,1": ["1"], "1,0": ["0"], "0,1": ["1"], "0,0": ["1"]}}"#;
        let m = Nmatrix::from_json(text).unwrap();
        assert_eq!(m.name(), "two");
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn bad_files_are_rejected() {
        let missing = r#"{"values": ["1"], "designated": ["1"], "neg": {}, "box": {"1": ["1"]},
            "impl": {"1,1": ["1"]}}"#;
        assert!(matches!(
            Nmatrix::from_json(missing),
            Err(NmatrixError::MissingCell { .. })
        ));
        let empty = r#"{"values": ["1"], "designated": ["1"], "neg": {"1": []}, "box": {"1": ["1"]},
            "impl": {"1,1": ["1"]}}"#;
        assert!(matches!(
            Nmatrix::from_json(empty),
            Err(NmatrixError::EmptyCell { .. })
        ));
        let unknown = r#"{"values": ["1"], "designated": ["2"], "neg": {"1": ["1"]}, "box": {"1": ["1"]},
            "impl": {"1,1": ["1"]}}"#;
        assert_eq!(
            Nmatrix::from_json(unknown),
            Err(NmatrixError::UnknownValue("2".into()))
        );
        let bad_key = r#"{"values": ["1"], "designated": ["1"], "neg": {"1": ["1"]}, "box": {"1": ["1"]},
            "impl": {"11": ["1"]}}"#;
        assert!(matches!(
            Nmatrix::from_json(bad_key),
            Err(NmatrixError::File(_))
        ));
        assert!(matches!(
            Nmatrix::from_json("{"),
            Err(NmatrixError::File(_))
        ));
    }
}
