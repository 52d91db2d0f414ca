//! Conversions between configuration values and their typed settings.

use std::path::PathBuf;

use toml::Value;

pub trait TomlValue: Sized {
    fn from_toml(v: &Value) -> Result<Self, String>;
    fn to_toml(&self) -> Value;
}

impl TomlValue for f64 {
    fn from_toml(v: &Value) -> Result<Self, String> {
        match v {
            Value::Float(x) => Ok(*x),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(format!("expected a number, found {}", other.type_str())),
        }
    }

    fn to_toml(&self) -> Value {
        Value::Float(*self)
    }
}

impl TomlValue for u64 {
    fn from_toml(v: &Value) -> Result<Self, String> {
        match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            Value::Integer(i) => Err(format!("expected a non-negative integer, found {i}")),
            other => Err(format!("expected an integer, found {}", other.type_str())),
        }
    }

    fn to_toml(&self) -> Value {
        Value::Integer(*self as i64)
    }
}

impl TomlValue for usize {
    fn from_toml(v: &Value) -> Result<Self, String> {
        u64::from_toml(v).map(|x| x as usize)
    }

    fn to_toml(&self) -> Value {
        Value::Integer(*self as i64)
    }
}

impl TomlValue for String {
    fn from_toml(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            other => Err(format!("expected a string, found {}", other.type_str())),
        }
    }

    fn to_toml(&self) -> Value {
        Value::String(self.clone())
    }
}

impl TomlValue for PathBuf {
    fn from_toml(v: &Value) -> Result<Self, String> {
        String::from_toml(v).map(PathBuf::from)
    }

    fn to_toml(&self) -> Value {
        Value::String(self.to_string_lossy().into_owned())
    }
}

impl<T: TomlValue> TomlValue for Vec<T> {
    fn from_toml(v: &Value) -> Result<Self, String> {
        match v {
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(k, x)| T::from_toml(x).map_err(|e| format!("element {k}: {e}")))
                .collect(),
            other => Err(format!("expected an array, found {}", other.type_str())),
        }
    }

    fn to_toml(&self) -> Value {
        Value::Array(self.iter().map(TomlValue::to_toml).collect())
    }
}

/// Parses an environment override as a configuration literal, falling back to a bare
/// string so `MHD_INITIAL__PRESET=decay` needs no quoting.
pub fn parse_literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse_literal("1e-3"), Value::Float(1e-3));
        assert_eq!(parse_literal("[16, 32]"), vec![16usize, 32].to_toml());
        assert_eq!(parse_literal("decay"), Value::String("decay".into()));
    }

    #[test]
    fn integers_widen_to_floats_but_not_back() {
        assert_eq!(f64::from_toml(&Value::Integer(2)), Ok(2.0));
        assert!(usize::from_toml(&Value::Float(2.0)).is_err());
        assert!(usize::from_toml(&Value::Integer(-1)).is_err());
    }
}
