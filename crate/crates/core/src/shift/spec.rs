use serde::{Deserialize, Serialize};

use super::hereditary::DensityBound;

/// JSON description of a shift space.
///
/// ```json
/// {"backend": "sft", "alphabet": 2, "forbidden": ["11"]}
/// {"backend": "hereditary", "alphabet": 2, "marked": [1], "bound": {"form": "log"}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Full {
        alphabet: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    Sft {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        forbidden: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<u8>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    Beta {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        /// Finite greedy expansion of 1 as a digit string, e.g. "11".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expansion: Option<String>,
        #[serde(default = "default_precision")]
        precision: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    Hereditary {
        alphabet: usize,
        marked: Vec<u8>,
        bound: DensityBound,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    Product {
        left: Box<SpaceSpec>,
        right: Box<SpaceSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    Union {
        left: Box<SpaceSpec>,
        right: Box<SpaceSpec>,
        /// Global symbol for each local symbol of `left` (identity if absent).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        left_symbols: Option<Vec<u8>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        right_symbols: Option<Vec<u8>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
}

fn default_precision() -> usize {
    64
}

impl SpaceSpec {
    pub fn budget(&self) -> Option<u64> {
        match self {
            SpaceSpec::Full { budget, .. }
            | SpaceSpec::Sft { budget, .. }
            | SpaceSpec::Beta { budget, .. }
            | SpaceSpec::Hereditary { budget, .. }
            | SpaceSpec::Product { budget, .. }
            | SpaceSpec::Union { budget, .. } => *budget,
        }
    }

    pub fn from_json(s: &str) -> crate::Result<SpaceSpec> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_backend() {
        let docs = [
            r#"{"backend":"full","alphabet":2}"#,
            r#"{"backend":"sft","alphabet":2,"forbidden":["11"]}"#,
            r#"{"backend":"sft","matrix":[[1,1],[1,0]]}"#,
            r#"{"backend":"beta","beta":1.5,"precision":32}"#,
            r#"{"backend":"hereditary","alphabet":2,"marked":[1],"bound":{"form":"log"}}"#,
            r#"{"backend":"hereditary","alphabet":2,"marked":[1],"bound":[1,1,2,2]}"#,
            r#"{"backend":"product","left":{"backend":"full","alphabet":2},"right":{"backend":"full","alphabet":3}}"#,
            r#"{"backend":"union","left":{"backend":"full","alphabet":2},"right":{"backend":"full","alphabet":2},"right_symbols":[0,2]}"#,
        ];
        for d in docs {
            SpaceSpec::from_json(d).unwrap_or_else(|e| panic!("{d}: {e}"));
        }
    }

    #[test]
    fn rejects_unknown_keys_and_backends() {
        assert!(SpaceSpec::from_json(r#"{"backend":"full","alphabet":2,"colour":1}"#).is_err());
        assert!(SpaceSpec::from_json(r#"{"backend":"sofic","alphabet":2}"#).is_err());
        assert!(SpaceSpec::from_json(
            r#"{"backend":"hereditary","alphabet":2,"marked":[1],"bound":{"form":"sqrt"}}"#
        )
        .is_err());
    }
}
