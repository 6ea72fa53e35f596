//! Scenario files: flat `key=value` text describing one market and either a
//! single bandwidth or a bandwidth sweep.
//!
//! ```text
//! # symmetric market with a small overlap
//! name=symmetric_small_ab
//! m_a=0.4
//! m_ab=0.2
//! m_b=0.4
//! w_min=0.01
//! w_max=1.0
//! w_step=0.01
//! mode=both
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::analysis::SweepSpec;
use crate::error::{Error, Result};
use crate::model::MarketConfig;

/// Tolerance on `m_a + m_ab + m_b = 1` accepted in scenario files.
pub const SCENARIO_MASS_TOL: f64 = 1e-9;

const KEYS: [&str; 9] = [
    "name", "m_a", "m_ab", "m_b", "w", "w_min", "w_max", "w_step", "mode",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Competition,
    Cooperation,
    Both,
}

impl Mode {
    pub fn includes_cooperation(&self) -> bool {
        *self != Mode::Competition
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "competition" => Ok(Mode::Competition),
            "cooperation" => Ok(Mode::Cooperation),
            "both" => Ok(Mode::Both),
            other => Err(format!(
                "unknown mode `{other}` (expected competition, cooperation or both)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Competition => "competition",
            Mode::Cooperation => "cooperation",
            Mode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Single(f64),
    Sweep { w_min: f64, w_max: f64, w_step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub name: String,
    pub m_a: f64,
    pub m_ab: f64,
    pub m_b: f64,
    pub bandwidth: Bandwidth,
    pub mode: Mode,
}

fn invalid<T>(field: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::Validation {
        field: field.into(),
        message: message.into(),
    })
}

impl ScenarioFile {
    /// Checks the invariants a parsed scenario must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return invalid("name", "must be a non-empty identifier of [A-Za-z0-9_.-]");
        }
        for (field, v) in [("m_a", self.m_a), ("m_ab", self.m_ab), ("m_b", self.m_b)] {
            if !v.is_finite() || v < 0.0 {
                return invalid(
                    field,
                    format!("sizes must be finite and nonnegative, got {v}"),
                );
            }
        }
        let total = self.m_a + self.m_ab + self.m_b;
        if (total - 1.0).abs() > SCENARIO_MASS_TOL {
            return invalid(
                "m_a",
                format!("m_a + m_ab + m_b = {total}, but the total market mass is normalized to 1"),
            );
        }
        match self.bandwidth {
            Bandwidth::Single(w) if !(w.is_finite() && w > 0.0) => {
                invalid("w", format!("bandwidth must be positive, got {w}"))
            }
            Bandwidth::Single(_) => Ok(()),
            Bandwidth::Sweep {
                w_min,
                w_max,
                w_step,
            } => SweepSpec::new(self.sizes()?, w_min, w_max, w_step, false).map(|_| ()),
        }
    }

    /// Sizes rescaled onto the unit simplex, carried by a placeholder
    /// bandwidth of 1.
    pub fn sizes(&self) -> Result<MarketConfig> {
        self.market_config(1.0)
    }

    pub fn market_config(&self, w: f64) -> Result<MarketConfig> {
        let total = self.m_a + self.m_ab + self.m_b;
        if total.is_nan() || total <= 0.0 {
            return invalid("m_a", "sizes sum to zero");
        }
        let m_a = self.m_a / total;
        let m_b = self.m_b / total;
        let m_ab = (1.0 - m_a - m_b).max(0.0);
        MarketConfig::new(m_a, m_ab, m_b, w)
    }

    /// Sweep over the scenario's range; a single bandwidth becomes a
    /// one-point grid.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let sizes = self.sizes()?;
        let coop = self.mode.includes_cooperation();
        match self.bandwidth {
            Bandwidth::Single(w) => SweepSpec::new(sizes, w, w, 1.0, coop),
            Bandwidth::Sweep {
                w_min,
                w_max,
                w_step,
            } => SweepSpec::new(sizes, w_min, w_max, w_step, coop),
        }
    }

    /// Canonical text form; [`parse_scenario`] reads it back unchanged.
    pub fn to_canonical(&self) -> String {
        let mut out = format!(
            "name={}\nm_a={}\nm_ab={}\nm_b={}\n",
            self.name, self.m_a, self.m_ab, self.m_b
        );
        match self.bandwidth {
            Bandwidth::Single(w) => out.push_str(&format!("w={w}\n")),
            Bandwidth::Sweep {
                w_min,
                w_max,
                w_step,
            } => out.push_str(&format!("w_min={w_min}\nw_max={w_max}\nw_step={w_step}\n")),
        }
        out.push_str(&format!("mode={}\n", self.mode));
        out
    }
}

/// Parses and validates a scenario. Unknown or repeated keys are rejected;
/// `#` lines and blank lines are ignored; `mode` defaults to `competition`.
pub fn parse_scenario(text: &[u8]) -> Result<ScenarioFile> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse {
        line: text[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1,
        message: "invalid UTF-8".into(),
    })?;

    let mut values: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected `key=value`, got `{trimmed}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if values.insert(key, (line, value)).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let number = |key: &str| -> Result<Option<f64>> {
        match values.get(key) {
            None => Ok(None),
            Some(&(line, v)) => v.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("`{key}` is not a number: `{v}`"),
            }),
        }
    };
    let required = |key: &str| -> Result<f64> {
        number(key)?.ok_or_else(|| Error::Validation {
            field: key.into(),
            message: "missing".into(),
        })
    };

    let name = match values.get("name") {
        Some(&(_, v)) => v.to_string(),
        None => return invalid("name", "missing"),
    };
    let (m_a, m_ab, m_b) = (required("m_a")?, required("m_ab")?, required("m_b")?);

    let single = number("w")?;
    let range = [number("w_min")?, number("w_max")?, number("w_step")?];
    let bandwidth = match (single, range) {
        (Some(_), [None, None, None]) => Bandwidth::Single(single.unwrap()),
        (Some(_), _) => {
            return invalid("w", "give either `w` or `w_min`/`w_max`/`w_step`, not both")
        }
        (None, [Some(w_min), Some(w_max), Some(w_step)]) => Bandwidth::Sweep {
            w_min,
            w_max,
            w_step,
        },
        (None, [None, None, None]) => {
            return invalid("w", "missing bandwidth (`w` or a sweep range)")
        }
        (None, _) => {
            let missing = ["w_min", "w_max", "w_step"]
                .iter()
                .zip(range)
                .find(|(_, v)| v.is_none())
                .map(|(k, _)| *k)
                .unwrap_or("w_min");
            return invalid(missing, "incomplete sweep range");
        }
    };

    let mode = match values.get("mode") {
        None => Mode::Competition,
        Some(&(_, v)) => v.parse().map_err(|message| Error::Validation {
            field: "mode".into(),
            message,
        })?,
    };

    let scenario = ScenarioFile {
        name,
        m_a,
        m_ab,
        m_b,
        bandwidth,
        mode,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn preset_sweep(name: &str, m_a: f64, m_ab: f64, m_b: f64) -> ScenarioFile {
    ScenarioFile {
        name: name.into(),
        m_a,
        m_ab,
        m_b,
        bandwidth: Bandwidth::Sweep {
            w_min: 0.01,
            w_max: 1.0,
            w_step: 0.01,
        },
        mode: Mode::Both,
    }
}

/// Built-in scenarios: two symmetric markets with small and large overlap,
/// and two asymmetric markets where SP1 has the larger dedicated area.
pub fn presets() -> Vec<ScenarioFile> {
    vec![
        preset_sweep("symmetric_small_ab", 0.4, 0.2, 0.4),
        preset_sweep("symmetric_large_ab", 0.2, 0.6, 0.2),
        preset_sweep("asymmetric_small_ab", 0.5, 0.2, 0.3),
        preset_sweep("asymmetric_large_ab", 0.3, 0.5, 0.2),
    ]
}

pub fn preset(name: &str) -> Option<ScenarioFile> {
    presets().into_iter().find(|p| p.name == name)
}
