use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::fields::{BuiltinFields, LinearVectorFields};
use super::solve::{Method, Partition, SolveOptions};

/// Vector fields of a problem file: a named set or explicit matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Builtin { builtin: BuiltinFields },
    Matrices(LinearVectorFields),
}

impl FieldSpec {
    pub fn fields(&self) -> LinearVectorFields {
        match self {
            FieldSpec::Builtin { builtin } => builtin.fields(),
            FieldSpec::Matrices(m) => m.clone(),
        }
    }
}

fn default_method() -> Method {
    Method::LogOde
}

fn default_depth() -> usize {
    2
}

fn default_partition() -> Partition {
    Partition::PerSegment
}

fn default_ode_steps() -> usize {
    8
}

/// A CDE problem as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub fields: FieldSpec,
    /// Initial state; builtin field sets supply a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
    /// Path of the driver CSV, relative to the problem file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver: Option<String>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(rename = "N", default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_partition")]
    pub partition: Partition,
    #[serde(default = "default_ode_steps")]
    pub ode_steps: usize,
}

impl ProblemSpec {
    pub fn initial_state(&self) -> Result<Vec<f64>> {
        match (&self.y0, &self.fields) {
            (Some(y), _) => Ok(y.clone()),
            (None, FieldSpec::Builtin { builtin }) => Ok(builtin.default_initial_state()),
            (None, FieldSpec::Matrices(_)) => Err(Error::Config(
                "problems with explicit matrices need y0".into(),
            )),
        }
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions::new(self.method, self.depth, self.partition).with_ode_steps(self.ode_steps)
    }

    pub fn builtin(&self) -> Option<BuiltinFields> {
        match self.fields {
            FieldSpec::Builtin { builtin } => Some(builtin),
            FieldSpec::Matrices(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtin_and_matrix_problems() {
        let p: ProblemSpec = serde_json::from_str(
            r#"{"fields":{"builtin":"rolling_ball"},"driver":"bm.csv","method":"logode","N":2,"partition":{"every":10}}"#,
        )
        .unwrap();
        assert_eq!(p.initial_state().unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(p.options().partition, Partition::Every(10));
        assert_eq!(p.ode_steps, 8);
        let q: ProblemSpec = serde_json::from_str(
            r#"{"fields":{"matrices":[[[0.0,1.0],[-1.0,0.0]]]},"y0":[1.0,0.0],"method":"euler","N":3}"#,
        )
        .unwrap();
        assert_eq!(q.fields.fields().matrices().len(), 1);
        assert_eq!(q.partition, Partition::PerSegment);
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"fields":{"matrices":[[[0.0,1.0],[-1.0,0.0]]]}}"#)
            .unwrap()
            .initial_state()
            .is_err());
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"fields":{"builtin":"pendulum"}}"#).is_err());
    }
}
