// SPDX-License-Identifier: Apache-2.0

//! Sampled curves and their CSV exchange format.
//!
//! Layout: `<axis>,<quantity>[,trace_0..trace_k][,env_lo,env_hi]`. For
//! transmission scans the header reads `detuning_hz,mean_T,...`; echo and
//! lifetime series reuse the layout with their own axis and quantity names.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Column name of the abscissa, e.g. `detuning_hz`.
    pub axis: String,
    /// Column name of the mean curve, e.g. `mean_T`.
    pub quantity: String,
    pub abscissa: Vec<f64>,
    pub mean: Vec<f64>,
    /// Sampled realizations, `traces[k][i]` for trace `k` at abscissa `i`.
    pub traces: Option<Vec<Vec<f64>>>,
    /// ±1σ band `(lo, hi)`.
    pub envelope: Option<(Vec<f64>, Vec<f64>)>,
}

pub const DETUNING_AXIS: &str = "detuning_hz";
pub const TRANSMISSION: &str = "mean_T";

impl Spectrum {
    pub fn new(axis: &str, quantity: &str, abscissa: Vec<f64>, mean: Vec<f64>) -> Self {
        debug_assert_eq!(abscissa.len(), mean.len());
        Self {
            axis: axis.to_owned(),
            quantity: quantity.to_owned(),
            abscissa,
            mean,
            traces: None,
            envelope: None,
        }
    }

    /// Transmission spectrum on a detuning axis in Hz.
    pub fn transmission(detunings: Vec<f64>, mean: Vec<f64>) -> Self {
        Self::new(DETUNING_AXIS, TRANSMISSION, detunings, mean)
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    /// Checks the structural invariants; `unit_interval` additionally
    /// requires every value to lie in [0, 1].
    pub fn check(&self, unit_interval: bool) -> Result<()> {
        let n = self.len();
        let mut columns: Vec<&[f64]> = vec![&self.mean];
        if let Some(tr) = &self.traces {
            columns.extend(tr.iter().map(|t| t.as_slice()));
        }
        if let Some((lo, hi)) = &self.envelope {
            columns.push(lo);
            columns.push(hi);
            for i in 0..n {
                if !(lo[i] <= self.mean[i] && self.mean[i] <= hi[i]) {
                    return Err(Error::Numerical(format!(
                        "envelope does not bracket mean at row {i}"
                    )));
                }
            }
        }
        for c in &columns {
            if c.len() != n {
                return Err(Error::Numerical("column length mismatch".into()));
            }
            if unit_interval && c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Numerical("value outside [0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn header(&self) -> String {
        let mut h = format!("{},{}", self.axis, self.quantity);
        if let Some(tr) = &self.traces {
            for k in 0..tr.len() {
                write!(h, ",trace_{k}").unwrap();
            }
        }
        if self.envelope.is_some() {
            h.push_str(",env_lo,env_hi");
        }
        h
    }

    /// Renders CSV text. Numbers use Rust's shortest round-trip format, so
    /// equal spectra render to identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for i in 0..self.len() {
            write!(out, "{},{}", self.abscissa[i], self.mean[i]).unwrap();
            if let Some(tr) = &self.traces {
                for t in tr {
                    write!(out, ",{}", t[i]).unwrap();
                }
            }
            if let Some((lo, hi)) = &self.envelope {
                write!(out, ",{},{}", lo[i], hi[i]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses CSV written by [`Spectrum::to_csv`]. Unknown extra columns are
    /// ignored; the first two columns are always abscissa and mean.
    pub fn from_csv(text: &str) -> Result<Self> {
        let table = Table::parse(text)?;
        if table.columns.len() < 2 {
            return Err(Error::Parse {
                line: 1,
                reason: "need at least two columns".into(),
            });
        }
        let col = |name: &str| table.column(name).map(|c| c.to_vec());
        let mut traces = Vec::new();
        while let Some(t) = col(&format!("trace_{}", traces.len())) {
            traces.push(t);
        }
        let envelope = match (col("env_lo"), col("env_hi")) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        };
        Ok(Self {
            axis: table.names[0].clone(),
            quantity: table.names[1].clone(),
            abscissa: table.columns[0].clone(),
            mean: table.columns[1].clone(),
            traces: (!traces.is_empty()).then_some(traces),
            envelope,
        })
    }
}

/// Numeric CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(names: &[&str]) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            columns: vec![Vec::new(); names.len()],
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        for (c, v) in self.columns.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "empty CSV".into(),
        })?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_owned()).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (i, line) in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != names.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("expected {} fields, got {}", names.len(), fields.len()),
                });
            }
            for (c, f) in columns.iter_mut().zip(fields) {
                c.push(f.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    reason: format!("bad number `{f}`"),
                })?);
            }
        }
        Ok(Self { names, columns })
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.names.join(",");
        out.push('\n');
        let rows = self.columns.first().map_or(0, Vec::len);
        for i in 0..rows {
            let row: Vec<String> = self.columns.iter().map(|c| c[i].to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let mut s = Spectrum::transmission(vec![0.0, 1.0], vec![0.5, 0.6]);
        s.traces = Some(vec![vec![0.4, 0.6], vec![0.6, 0.6]]);
        s.envelope = Some((vec![0.4, 0.5], vec![0.6, 0.7]));
        assert_eq!(
            s.header(),
            "detuning_hz,mean_T,trace_0,trace_1,env_lo,env_hi"
        );
        s.check(true).unwrap();
    }

    #[test]
    fn check_rejects_bad_envelope() {
        let mut s = Spectrum::transmission(vec![0.0], vec![0.5]);
        s.envelope = Some((vec![0.6], vec![0.7]));
        assert!(s.check(true).is_err());
    }

    #[test]
    fn malformed_csv() {
        assert!(Spectrum::from_csv("").is_err());
        assert!(Spectrum::from_csv("a,b\n1,2,3\n").is_err());
        assert!(Spectrum::from_csv("a,b\n1,x\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            rows in proptest::collection::vec((-1e12f64..1e12, 0.0f64..1.0, 0.0f64..1.0), 1..20),
            with_env in any::<bool>(),
        ) {
            let mut s = Spectrum::transmission(
                rows.iter().map(|r| r.0).collect(),
                rows.iter().map(|r| r.1).collect(),
            );
            s.traces = Some(vec![rows.iter().map(|r| r.2).collect()]);
            if with_env {
                s.envelope = Some((s.mean.clone(), s.mean.clone()));
            }
            let back = Spectrum::from_csv(&s.to_csv()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
