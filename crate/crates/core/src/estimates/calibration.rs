use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{MhdError, Result};
use crate::io::write_atomic;

pub const CALIBRATION_MAGIC: &str = "MHDCAL1";

/// Multiplier applied to a measured minimal constant before it is frozen.
pub const SAFETY_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub value: f64,
    pub scenario: String,
}

/// Named checker constants with the scenario each was measured on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationStore {
    entries: BTreeMap<String, Calibration>,
}

impl CalibrationStore {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).map(|c| c.value)
    }

    pub fn entry(&self, name: &str) -> Option<&Calibration> {
        self.entries.get(name)
    }

    pub fn require(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| MhdError::Inconsistent(format!("calibration `{name}` missing")))
    }

    pub fn set(&mut self, name: &str, value: f64, scenario: &str) {
        self.entries.insert(
            name.to_owned(),
            Calibration {
                value,
                scenario: scenario.to_owned(),
            },
        );
    }

    /// Stores `SAFETY_FACTOR × minimal`.
    pub fn freeze(&mut self, name: &str, minimal: f64, scenario: &str) -> f64 {
        let v = SAFETY_FACTOR * minimal;
        self.set(name, v, scenario);
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Calibration)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{CALIBRATION_MAGIC}\n");
        for (k, c) in &self.entries {
            s.push_str(&format!("{k}\t{:e}\t{}\n", c.value, c.scenario));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CALIBRATION_MAGIC) {
            return Err(MhdError::Format(
                "calibration store: missing version line".into(),
            ));
        }
        let mut out = Self::default();
        for (k, line) in lines.enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            let bad = || MhdError::Format(format!("calibration store line {}: `{line}`", k + 2));
            if parts.len() != 3 || parts[0].is_empty() {
                return Err(bad());
            }
            let value: f64 = parts[1].parse().map_err(|_| bad())?;
            if !value.is_finite() {
                return Err(bad());
            }
            out.set(parts[0], value, parts[2]);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_exact() {
        let mut s = CalibrationStore::default();
        s.set("weak", 0.1 + 0.2, "oscillatory");
        s.freeze("gronwall", 1.0 / 3.0, "coupled_reference");
        let back = CalibrationStore::parse(&s.to_text()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.get("gronwall"), Some(2.0 / 3.0));
        assert!(CalibrationStore::parse("nope\n").is_err());
        assert!(CalibrationStore::parse("MHDCAL1\nx\tabc\ts\n").is_err());
    }
}
