//! Flat `key = value` experiment files.
//!
//! ```text
//! # LLG body, second-order Gauss
//! [system]
//! system = llg
//! inertia = 0.5, 2, 1
//! alpha = 1
//!
//! [method]
//! method = gauss2
//! retraction = cayley
//! h = 0.01
//! t_final = 1
//! ```
//!
//! Every key lives in exactly one section and is unique across sections, so
//! `--override h=0.005` needs no section prefix. Unknown keys and keys in
//! the wrong section are errors. Blank lines and lines starting with `#` are
//! ignored. [`KEYS`] lists every key with its default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, MethodSpec, Output, ReferenceSpec, SystemSpec};
use crate::lie::RetractionKind;

/// A documented configuration key.
#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub section: &'static str,
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

const fn key(section: &'static str, name: &'static str, default: &'static str, doc: &'static str) -> Key {
    Key {
        section,
        name,
        default,
        doc,
    }
}

pub const KEYS: &[Key] = &[
    key("system", "system", "llg", "free, llg or relaxed"),
    key("system", "inertia", "0.5, 2, 1", "principal moments of inertia"),
    key("system", "alpha", "1", "LLG damping coefficient"),
    key("system", "beta", "0.1", "relaxation coefficient"),
    key("method", "method", "gauss2", "tableau name or rk4_baseline"),
    key("method", "retraction", "cayley", "cayley or exp"),
    key("method", "h", "0.01", "step size"),
    key("method", "t_final", "1", "total simulated time"),
    key("initial", "omega", "0.7071067811865476, 0, 0.7071067811865476", "initial body angular velocity"),
    key("output", "outputs", "energy, casimir", "any of energy, casimir, momentum, order_sweep"),
    key("output", "sweep_h", "", "strictly decreasing step sizes; empty for none"),
    key("output", "sweep_measure", "momentum", "momentum or energy"),
    key("reference", "reference_method", "gauss3", "method of the reference run"),
    key("reference", "reference_h", "1e-4", "step of the reference run"),
    key("reference", "reference_retraction", "cayley", "retraction of the reference run"),
];

fn lookup(name: &str) -> Result<&'static Key> {
    KEYS.iter()
        .find(|k| k.name == name)
        .ok_or_else(|| Error::Config(format!("unknown key `{name}`")))
}

/// Raw key/value settings, starting from the defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    values: BTreeMap<&'static str, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|k| (k.name, k.default.to_string())).collect(),
        }
    }
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        let mut section: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", n + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !KEYS.iter().any(|k| k.section == name) {
                    return Err(at(format!("unknown section `[{name}]`")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let k = lookup(k.trim()).map_err(|e| at(e.to_string()))?;
            match &section {
                Some(s) if s == k.section => {}
                _ => return Err(at(format!("key `{}` belongs in `[{}]`", k.name, k.section))),
            }
            out.values.insert(k.name, v.trim().to_string());
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies `key=value`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let k = lookup(k.trim())?;
        self.values.insert(k.name, v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn raw(&self, name: &str) -> &str {
        self.get(name).expect("every key has a default")
    }

    fn real(&self, name: &str) -> Result<f64> {
        parse_real(name, self.raw(name))
    }

    fn reals(&self, name: &str) -> Result<Vec<f64>> {
        let raw = self.raw(name);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',').map(|s| parse_real(name, s.trim())).collect()
    }

    fn triple(&self, name: &str) -> Result<[f64; 3]> {
        let v = self.reals(name)?;
        v.try_into()
            .map_err(|v: Vec<f64>| Error::Config(format!("`{name}` needs 3 values, got {}", v.len())))
    }

    fn method(&self, name: &str) -> Result<MethodSpec> {
        self.raw(name)
            .parse()
            .map_err(|e: Error| Error::Config(format!("`{name}`: {e}")))
    }

    fn retraction(&self, name: &str) -> Result<RetractionKind> {
        self.raw(name)
            .parse()
            .map_err(|_| Error::Config(format!("`{name}` must be cayley or exp")))
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let inertia = self.triple("inertia")?;
        let system = match self.raw("system") {
            "free" => SystemSpec::Free { inertia },
            "llg" => SystemSpec::Llg {
                inertia,
                alpha: self.real("alpha")?,
            },
            "relaxed" => SystemSpec::Relaxed {
                inertia,
                beta: self.real("beta")?,
            },
            other => return Err(Error::Config(format!("unknown system `{other}`"))),
        };
        let outputs = self
            .raw("outputs")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse::<Output>)
            .collect::<Result<Vec<_>>>()?;
        let sweep = self.reals("sweep_h")?;
        let cfg = ExperimentConfig {
            system,
            method: self.method("method")?,
            retraction: self.retraction("retraction")?,
            h: self.real("h")?,
            t_final: self.real("t_final")?,
            initial_omega: self.triple("omega")?,
            outputs,
            sweep_h: (!sweep.is_empty()).then_some(sweep),
            reference: ReferenceSpec {
                method: self.method("reference_method")?,
                h: self.real("reference_h")?,
                retraction: self.retraction("reference_retraction")?,
            },
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn sweep_measure(&self) -> Result<crate::harness::SweepMeasure> {
        use crate::harness::SweepMeasure;
        match self.raw("sweep_measure") {
            "momentum" => Ok(SweepMeasure::Momentum),
            "energy" => Ok(SweepMeasure::Energy),
            other => Err(Error::Config(format!("unknown sweep_measure `{other}`"))),
        }
    }
}

fn parse_real(name: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Config(format!("`{name}`: `{s}` is not a number")))
}
