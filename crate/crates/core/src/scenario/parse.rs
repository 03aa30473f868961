// SPDX-License-Identifier: Apache-2.0

//! `key = value` scenario text with unit suffixes.
//!
//! One assignment per line, `#` starts a comment. Numbers may carry a unit
//! suffix (`100 kHz`, `87us`); bare numbers are SI base units. Lists are
//! comma separated (`1 us, 2 us, 5 us`) or generated with
//! `linspace(a, b, n)` / `logspace(a, b, n)`.

use std::collections::HashSet;
use std::fmt;

use crate::numeric::{linspace, logspace};

/// Physical dimension expected for a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Frequency,
    Time,
    Length,
    Power,
    /// Frequency per time, e.g. spectral diffusion.
    Rate,
    Pure,
}

impl Dim {
    fn base(self) -> &'static str {
        match self {
            Dim::Frequency => "Hz",
            Dim::Time => "s",
            Dim::Length => "m",
            Dim::Power => "W",
            Dim::Rate => "Hz/s",
            Dim::Pure => "(none)",
        }
    }
}

const SUFFIXES: &[(&str, Dim, f64)] = &[
    ("Hz", Dim::Frequency, 1.0),
    ("kHz", Dim::Frequency, 1e3),
    ("MHz", Dim::Frequency, 1e6),
    ("GHz", Dim::Frequency, 1e9),
    ("THz", Dim::Frequency, 1e12),
    ("s", Dim::Time, 1.0),
    ("ms", Dim::Time, 1e-3),
    ("us", Dim::Time, 1e-6),
    ("µs", Dim::Time, 1e-6),
    ("ns", Dim::Time, 1e-9),
    ("ps", Dim::Time, 1e-12),
    ("m", Dim::Length, 1.0),
    ("mm", Dim::Length, 1e-3),
    ("um", Dim::Length, 1e-6),
    ("µm", Dim::Length, 1e-6),
    ("nm", Dim::Length, 1e-9),
    ("pm", Dim::Length, 1e-12),
    ("W", Dim::Power, 1.0),
    ("mW", Dim::Power, 1e-3),
    ("uW", Dim::Power, 1e-6),
    ("µW", Dim::Power, 1e-6),
    ("nW", Dim::Power, 1e-9),
    ("pW", Dim::Power, 1e-12),
    ("Hz/s", Dim::Rate, 1.0),
    ("Hz/us", Dim::Rate, 1e6),
    ("kHz/ms", Dim::Rate, 1e6),
    ("kHz/us", Dim::Rate, 1e9),
    ("MHz/us", Dim::Rate, 1e12),
];

/// One problem found in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

/// Parses a number with an optional unit suffix into SI units.
pub fn parse_quantity(text: &str, dim: Dim) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic() || *c == 'µ' || *c == '/')
        .last()
        .map_or(text.len(), |(i, _)| i);
    let (number, suffix) = (text[..split].trim(), &text[split..]);
    let value: f64 = number
        .parse()
        .map_err(|_| format!("`{text}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    if suffix.is_empty() {
        return Ok(value);
    }
    match SUFFIXES.iter().find(|(s, _, _)| *s == suffix) {
        Some((_, d, factor)) if *d == dim => Ok(value * factor),
        Some(_) => Err(format!(
            "unit `{suffix}` does not fit; expected a multiple of {}",
            dim.base()
        )),
        None => Err(format!("unknown unit suffix `{suffix}`")),
    }
}

/// Parses a comma list or a `linspace`/`logspace` generator.
pub fn parse_list(text: &str, dim: Dim) -> Result<Vec<f64>, String> {
    let text = text.trim();
    for (name, gen) in [
        ("linspace", linspace as fn(f64, f64, usize) -> Vec<f64>),
        ("logspace", logspace),
    ] {
        if let Some(args) = text.strip_prefix(name) {
            let args = args
                .trim()
                .strip_prefix('(')
                .and_then(|a| a.strip_suffix(')'))
                .ok_or_else(|| format!("expected {name}(start, stop, count)"))?;
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 3 {
                return Err(format!("{name} takes 3 arguments, got {}", parts.len()));
            }
            let a = parse_quantity(parts[0], dim)?;
            let b = parse_quantity(parts[1], dim)?;
            let n: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| format!("bad count `{}`", parts[2].trim()))?;
            if n < 1 {
                return Err("count must be >= 1".into());
            }
            if name == "logspace" && !(a > 0.0 && b > 0.0) {
                return Err("logspace bounds must be > 0".into());
            }
            return Ok(gen(a, b, n));
        }
    }
    if text.is_empty() {
        return Err("empty list".into());
    }
    text.split(',').map(|p| parse_quantity(p, dim)).collect()
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

/// Scenario entries plus the issues collected while reading them. Every
/// accessor marks its key as used; [`Fields::finish`] reports the rest as
/// unknown.
pub(crate) struct Fields {
    entries: Vec<Entry>,
    used: HashSet<String>,
    pub issues: Vec<Issue>,
}

impl Fields {
    pub fn parse(text: &str) -> Self {
        let mut entries: Vec<Entry> = Vec::new();
        let mut issues = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                issues.push(Issue {
                    line: Some(line),
                    key: content.into(),
                    message: "expected `key = value`".into(),
                });
                continue;
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                issues.push(Issue {
                    line: Some(line),
                    key,
                    message: "empty key".into(),
                });
                continue;
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                issues.push(Issue {
                    line: Some(line),
                    key,
                    message: format!("duplicate key (first set on line {})", prev.line),
                });
                continue;
            }
            entries.push(Entry {
                key,
                value: v.trim().to_string(),
                line,
            });
        }
        Self {
            entries,
            used: HashSet::new(),
            issues,
        }
    }

    /// Raw `(key, value)` pairs in file order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .map(|e| (e.key.clone(), e.value.clone()))
            .collect()
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.used.insert(key.to_string());
        self.entries
            .iter()
            .find(|e| e.key == key)
            .map(|e| (e.value.clone(), e.line))
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.line)
    }

    pub fn error(&mut self, key: &str, message: impl Into<String>) {
        let line = self.line_of(key);
        self.issues.push(Issue {
            line,
            key: key.into(),
            message: message.into(),
        });
    }

    fn missing(&mut self, key: &str) {
        self.error(key, "required key is missing");
    }

    fn convert<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        let (value, line) = self.take(key)?;
        match f(&value) {
            Ok(v) => Some(v),
            Err(message) => {
                self.issues.push(Issue {
                    line: Some(line),
                    key: key.into(),
                    message,
                });
                None
            }
        }
    }

    pub fn quantity(&mut self, key: &str, dim: Dim) -> Option<f64> {
        self.convert(key, |v| parse_quantity(v, dim))
    }

    pub fn req_quantity(&mut self, key: &str, dim: Dim) -> Option<f64> {
        if !self.has(key) {
            self.missing(key);
        }
        self.quantity(key, dim)
    }

    /// Required value that must be finite and > 0.
    pub fn positive(&mut self, key: &str, dim: Dim) -> Option<f64> {
        let v = self.req_quantity(key, dim)?;
        self.check(key, v, v > 0.0, "must be > 0")
    }

    pub fn opt_positive(&mut self, key: &str, dim: Dim) -> Option<f64> {
        let v = self.quantity(key, dim)?;
        self.check(key, v, v > 0.0, "must be > 0")
    }

    /// Keeps `v` if `ok`, otherwise records a constraint violation.
    pub fn check(&mut self, key: &str, v: f64, ok: bool, constraint: &str) -> Option<f64> {
        if ok {
            Some(v)
        } else {
            self.error(key, format!("{constraint}, got {v}"));
            None
        }
    }

    pub fn list(&mut self, key: &str, dim: Dim) -> Option<Vec<f64>> {
        self.convert(key, |v| parse_list(v, dim))
    }

    pub fn req_list(&mut self, key: &str, dim: Dim) -> Option<Vec<f64>> {
        if !self.has(key) {
            self.missing(key);
        }
        self.list(key, dim)
    }

    pub fn text(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|(v, _)| v)
    }

    pub fn choice(&mut self, key: &str, options: &[&'static str]) -> Option<&'static str> {
        self.convert(key, |v| {
            options
                .iter()
                .find(|o| **o == v)
                .copied()
                .ok_or_else(|| format!("`{v}` is not one of {}", options.join(", ")))
        })
    }

    pub fn count(&mut self, key: &str) -> Option<usize> {
        self.convert(key, |v| {
            v.parse()
                .map_err(|_| format!("`{v}` is not a non-negative integer"))
        })
    }

    pub fn integer(&mut self, key: &str) -> Option<u64> {
        self.convert(key, |v| {
            v.parse()
                .map_err(|_| format!("`{v}` is not a non-negative integer"))
        })
    }

    pub fn flag(&mut self, key: &str) -> Option<bool> {
        self.convert(key, |v| match v {
            "true" | "yes" | "on" => Ok(true),
            "false" | "no" | "off" => Ok(false),
            _ => Err(format!("`{v}` is not a boolean")),
        })
    }

    /// Records every key no accessor asked for.
    pub fn finish(mut self) -> Vec<Issue> {
        for e in &self.entries {
            if !self.used.contains(&e.key) {
                self.issues.push(Issue {
                    line: Some(e.line),
                    key: e.key.clone(),
                    message: "unknown key".into(),
                });
            }
        }
        self.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        self.issues
    }
}
