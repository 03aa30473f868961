// SPDX-License-Identifier: Apache-2.0

//! Least-squares extraction of physical parameters from traces.

mod lm;
mod models;

use std::fmt::{self, Write as _};

pub use models::{
    fit_biexponential, fit_dit_dip, fit_exponential, fit_gaussian, fit_linear, fit_lorentzian,
    DipModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFlag {
    /// Line narrower than about two samples.
    UnderResolved,
    /// One biexponential amplitude vanished; its time constant is unconstrained.
    Tau2Unidentifiable,
    /// Both biexponential time constants coincide.
    EqualTau,
    /// No dip: the data are flat.
    NoSignal,
}

impl fmt::Display for FitFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::UnderResolved => "under_resolved",
            Self::Tau2Unidentifiable => "tau2_unidentifiable",
            Self::EqualTau => "equal_tau",
            Self::NoSignal => "no_signal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: &'static str,
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    /// One standard error per parameter.
    pub sigmas: Vec<f64>,
    /// Quantities computed from the parameters, e.g. Q or η.
    pub derived: Vec<(&'static str, f64)>,
    /// ‖residual‖₂ / ‖y‖₂.
    pub residual_norm: f64,
    pub converged: bool,
    pub n_iter: usize,
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.params[i])
            .or_else(|| {
                self.derived
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, v)| *v)
            })
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.sigmas[i])
    }

    pub fn has_flag(&self, flag: FitFlag) -> bool {
        self.flags.contains(&flag)
    }

    fn flag_list(&self) -> String {
        self.flags
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }

    /// `key = value` lines.
    pub fn report(&self) -> String {
        let mut out = format!("model = {}\n", self.model);
        for ((n, p), s) in self.names.iter().zip(&self.params).zip(&self.sigmas) {
            writeln!(out, "{n} = {p}\n{n}_sigma = {s}").unwrap();
        }
        for (n, v) in &self.derived {
            writeln!(out, "{n} = {v}").unwrap();
        }
        writeln!(out, "residual_norm = {}", self.residual_norm).unwrap();
        writeln!(out, "converged = {}", self.converged).unwrap();
        writeln!(out, "n_iter = {}", self.n_iter).unwrap();
        writeln!(out, "flags = {}", self.flag_list()).unwrap();
        out
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["model".to_string()];
        for n in &self.names {
            cols.push(n.to_string());
            cols.push(format!("{n}_sigma"));
        }
        cols.extend(self.derived.iter().map(|(n, _)| n.to_string()));
        cols.extend(["residual_norm", "converged", "n_iter", "flags"].map(String::from));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.model.to_string()];
        for (p, s) in self.params.iter().zip(&self.sigmas) {
            cols.push(p.to_string());
            cols.push(s.to_string());
        }
        cols.extend(self.derived.iter().map(|(_, v)| v.to_string()));
        cols.push(self.residual_norm.to_string());
        cols.push(self.converged.to_string());
        cols.push(self.n_iter.to_string());
        cols.push(self.flag_list());
        cols.join(",")
    }
}
