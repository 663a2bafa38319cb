//! Flag values, config-file overrides and the parsers they share.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use ptorus_core::Complex;

use crate::{usage, Failure};

/// A complex number written `RE,IM`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexArg(pub Complex);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let z = Complex::new(parse(re)?, parse(im)?);
        if !z.is_finite() {
            return Err(format!("{s:?} is not finite"));
        }
        Ok(ComplexArg(z))
    }
}

impl fmt::Display for ComplexArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.re, self.0.im)
    }
}

impl Serialize for ComplexArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ComplexArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Overlays the keys of a TOML file on the parsed flags. Every key must name
/// an existing flag.
pub fn apply_overrides<T: Serialize + DeserializeOwned>(args: T, config: Option<&Path>) -> Result<(T, Value), Failure> {
    let mut value = serde_json::to_value(&args).map_err(usage)?;
    let Some(path) = config else { return Ok((args, value)) };
    let text = std::fs::read_to_string(path).map_err(|e| usage(anyhow::anyhow!("{}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| usage(anyhow::anyhow!("{}: {e}", path.display())))?;
    let Value::Object(fields) = &mut value else { unreachable!("argument structs serialize to objects") };
    for (key, v) in table {
        if !fields.contains_key(&key) {
            let known: Vec<&str> = fields.keys().map(String::as_str).collect();
            return Err(usage(anyhow::anyhow!("{}: unknown key {key:?} (expected one of {known:?})", path.display())));
        }
        fields.insert(key, serde_json::to_value(v).map_err(usage)?);
    }
    let merged: T =
        serde_json::from_value(value.clone()).map_err(|e| usage(anyhow::anyhow!("{}: {e}", path.display())))?;
    Ok((merged, value))
}
