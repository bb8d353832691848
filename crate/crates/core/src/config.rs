//! Flat `key=value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! lattice.n_spins = 5
//! disorder.b2 = 1
//! code.name = five_qubit
//! run.realizations = 400
//! ```
//!
//! Keys carry one of the prefixes `lattice.`, `disorder.`, `code.` or `run.`.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::codes::{builtin_code, LogicalState, StabilizerCode};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, parse_edge_list, DisorderParams, LatticeSpec, Topology};
use crate::pauli::Budget;
use crate::propagator::{Method, PropagationSettings};

/// Shortest decimal that reads back as the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodeChoice {
    /// `five_qubit` or `steane`.
    Builtin(String),
    /// Generator file, see [`StabilizerCode::parse`].
    File(PathBuf),
    /// Code-independent fidelity of an ideal non-degenerate code, computed
    /// from the Pauli weights of the evolution operator.
    Ideal,
    /// No code; a Haar-random initial state per realization and the plain
    /// return probability.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NSpins,
    /// `sqrt(j2 / b2)` at fixed `U`.
    JOverB,
    Kappa,
    B0,
    Tau,
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "n_spins" | "N" => SweepAxis::NSpins,
            "j_over_b" => SweepAxis::JOverB,
            "kappa" => SweepAxis::Kappa,
            "b0" => SweepAxis::B0,
            "tau" => SweepAxis::Tau,
            other => return Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        })
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::NSpins => "n_spins",
            SweepAxis::JOverB => "j_over_b",
            SweepAxis::Kappa => "kappa",
            SweepAxis::B0 => "b0",
            SweepAxis::Tau => "tau",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_spins: usize,
    pub topology: Topology,
    pub disorder: DisorderParams,
    pub code: CodeChoice,
    pub logical_state: LogicalState,
    /// Budget `K` for the ideal code; must match a concrete code's own `K`.
    pub max_errors: Option<usize>,
    /// Error rate used when `max_errors` is not given.
    pub kappa: Option<f64>,
    /// `(K_par, K_perp)` split budget.
    pub split: Option<(usize, usize)>,
    pub t_max: f64,
    pub n_times: usize,
    /// Explicit time grid; overrides `t_max` and `n_times`.
    pub times: Option<Vec<f64>>,
    pub realizations: usize,
    pub propagation: PropagationSettings,
    pub toggling: bool,
    pub output: Option<PathBuf>,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_spins: 5,
            topology: Topology::Ring,
            disorder: DisorderParams::default(),
            code: CodeChoice::Builtin("five_qubit".into()),
            logical_state: LogicalState::Zero,
            max_errors: None,
            kappa: None,
            split: None,
            t_max: 1.0,
            n_times: 21,
            times: None,
            realizations: 200,
            propagation: PropagationSettings::default(),
            toggling: false,
            output: None,
            sweep_axis: None,
            sweep_values: Vec::new(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key} expects true or false, got {value:?}"
        ))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn lift(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key; the CLI uses this for `--set key=value` overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lattice.n_spins" => self.n_spins = parse_value(key, value)?,
            "lattice.topology" => match value {
                "ring" => self.topology = Topology::Ring,
                "custom" => {
                    if !matches!(self.topology, Topology::Custom(_)) {
                        self.topology = Topology::Custom(Vec::new());
                    }
                }
                other => return Err(Error::Config(format!("unknown topology {other:?}"))),
            },
            "lattice.edges" => {
                self.topology = Topology::Custom(
                    parse_edge_list(&value.replace([',', '-'], " ")).map_err(lift)?,
                )
            }
            "disorder.b2" => self.disorder.b2 = parse_value(key, value)?,
            "disorder.j2" => self.disorder.j2 = parse_value(key, value)?,
            "disorder.b0" => self.disorder.b0 = parse_value(key, value)?,
            "disorder.tau" => {
                self.disorder.correlation_time = match value {
                    "none" | "" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "disorder.xy_symmetric" => self.disorder.xy_symmetric = parse_bool(key, value)?,
            "code.name" => {
                self.code = match value {
                    "ideal" => CodeChoice::Ideal,
                    "none" => CodeChoice::None,
                    "custom" => match &self.code {
                        CodeChoice::File(_) => self.code.clone(),
                        _ => CodeChoice::File(PathBuf::new()),
                    },
                    name => CodeChoice::Builtin(name.to_string()),
                }
            }
            "code.path" => self.code = CodeChoice::File(PathBuf::from(value)),
            "code.logical_state" => self.logical_state = value.parse().map_err(lift)?,
            "code.max_errors" => self.max_errors = Some(parse_value(key, value)?),
            "code.kappa" => self.kappa = Some(parse_value(key, value)?),
            "code.split" => {
                let v: Vec<usize> = parse_list(key, value)?;
                if v.len() != 2 {
                    return Err(Error::Config("code.split expects K_par,K_perp".into()));
                }
                self.split = Some((v[0], v[1]));
            }
            "run.t_max" => self.t_max = parse_value(key, value)?,
            "run.n_times" => self.n_times = parse_value(key, value)?,
            "run.times" => self.times = Some(parse_list(key, value)?),
            "run.realizations" => self.realizations = parse_value(key, value)?,
            "run.method" => self.propagation.method = value.parse::<Method>().map_err(lift)?,
            "run.tolerance" => self.propagation.tolerance = parse_value(key, value)?,
            "run.max_step" => {
                self.propagation.max_step = match value {
                    "none" | "" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "run.toggling" => self.toggling = parse_bool(key, value)?,
            "run.seed" => self.disorder.seed = parse_value(key, value)?,
            "run.output" => self.output = Some(PathBuf::from(value)),
            "run.sweep_axis" => self.sweep_axis = Some(value.parse()?),
            "run.sweep_values" => self.sweep_values = parse_list(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out: Vec<(&str, String)> = vec![
            ("lattice.n_spins", self.n_spins.to_string()),
            (
                "lattice.topology",
                match self.topology {
                    Topology::Ring => "ring".into(),
                    Topology::Custom(_) => "custom".into(),
                },
            ),
        ];
        if let Topology::Custom(edges) = &self.topology {
            let list: Vec<String> = edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            out.push(("lattice.edges", list.join(",")));
        }
        out.extend([
            ("disorder.b2", fmt_num(self.disorder.b2)),
            ("disorder.j2", fmt_num(self.disorder.j2)),
            ("disorder.b0", fmt_num(self.disorder.b0)),
            (
                "disorder.tau",
                self.disorder
                    .correlation_time
                    .map_or("none".into(), fmt_num),
            ),
            (
                "disorder.xy_symmetric",
                self.disorder.xy_symmetric.to_string(),
            ),
        ]);
        match &self.code {
            CodeChoice::Builtin(name) => out.push(("code.name", name.clone())),
            CodeChoice::File(p) => {
                out.push(("code.name", "custom".into()));
                out.push(("code.path", p.display().to_string()));
            }
            CodeChoice::Ideal => out.push(("code.name", "ideal".into())),
            CodeChoice::None => out.push(("code.name", "none".into())),
        }
        out.push(("code.logical_state", self.logical_state.to_string()));
        if let Some(k) = self.max_errors {
            out.push(("code.max_errors", k.to_string()));
        }
        if let Some(k) = self.kappa {
            out.push(("code.kappa", fmt_num(k)));
        }
        if let Some((a, b)) = self.split {
            out.push(("code.split", format!("{a},{b}")));
        }
        match &self.times {
            Some(ts) => out.push((
                "run.times",
                ts.iter().map(|t| fmt_num(*t)).collect::<Vec<_>>().join(","),
            )),
            None => {
                out.push(("run.t_max", fmt_num(self.t_max)));
                out.push(("run.n_times", self.n_times.to_string()));
            }
        }
        out.extend([
            ("run.realizations", self.realizations.to_string()),
            ("run.method", self.propagation.method.to_string()),
            ("run.tolerance", fmt_num(self.propagation.tolerance)),
            (
                "run.max_step",
                self.propagation.max_step.map_or("none".into(), fmt_num),
            ),
            ("run.toggling", self.toggling.to_string()),
            ("run.seed", self.disorder.seed.to_string()),
        ]);
        if let Some(p) = &self.output {
            out.push(("run.output", p.display().to_string()));
        }
        if let Some(axis) = self.sweep_axis {
            out.push(("run.sweep_axis", axis.to_string()));
            out.push((
                "run.sweep_values",
                self.sweep_values
                    .iter()
                    .map(|v| fmt_num(*v))
                    .collect::<Vec<_>>()
                    .join(","),
            ));
        }
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        build_lattice(self.n_spins, &self.topology).map_err(lift)
    }

    /// Degree of the lattice, without building it for plain rings.
    pub fn degree(&self) -> Result<usize> {
        match self.topology {
            Topology::Ring if self.n_spins == 2 => Ok(1),
            Topology::Ring if self.n_spins > 2 => Ok(2),
            _ => Ok(self.lattice()?.degree()),
        }
    }

    pub fn time_grid(&self) -> Result<Vec<f64>> {
        let times = match &self.times {
            Some(ts) => ts.clone(),
            None => {
                if self.n_times < 1 {
                    return Err(Error::Config("run.n_times must be >= 1".into()));
                }
                if !(self.t_max.is_finite() && self.t_max >= 0.0) {
                    return Err(Error::Config("run.t_max must be >= 0".into()));
                }
                if self.n_times == 1 {
                    vec![self.t_max]
                } else {
                    (0..self.n_times)
                        .map(|i| self.t_max * i as f64 / (self.n_times - 1) as f64)
                        .collect()
                }
            }
        };
        if times.is_empty() {
            return Err(Error::Config("time grid is empty".into()));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("times must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "time grid must be strictly increasing".into(),
            ));
        }
        Ok(times)
    }

    /// The concrete code, if one is selected.
    pub fn stabilizer_code(&self) -> Result<Option<StabilizerCode>> {
        let code = match &self.code {
            CodeChoice::Builtin(name) => builtin_code(name).map_err(lift)?,
            CodeChoice::File(p) if p.as_os_str().is_empty() => {
                return Err(Error::Config("code.name = custom needs code.path".into()))
            }
            CodeChoice::File(p) => StabilizerCode::load(p).map_err(lift)?,
            CodeChoice::Ideal | CodeChoice::None => return Ok(None),
        };
        if code.n_spins() != self.n_spins {
            return Err(Error::Config(format!(
                "code {} acts on {} spins but lattice.n_spins = {}",
                code.name(),
                code.n_spins(),
                self.n_spins
            )));
        }
        if let Some(k) = self.max_errors {
            if k != code.max_errors() {
                return Err(Error::Config(format!(
                    "code.max_errors = {k} differs from the code's K = {}",
                    code.max_errors()
                )));
            }
        }
        Ok(Some(code))
    }

    /// `K` for the selected code or the ideal-code budget.
    pub fn budget_size(&self, code: Option<&StabilizerCode>) -> Result<usize> {
        if let Some(c) = code {
            return Ok(c.max_errors());
        }
        if let Some(k) = self.max_errors {
            return Ok(k);
        }
        if let Some(kappa) = self.kappa {
            if !(kappa > 0.0 && kappa <= 1.0) {
                return Err(Error::Config(format!(
                    "code.kappa must lie in (0, 1], got {kappa}"
                )));
            }
            return Ok((kappa * self.n_spins as f64 + 1e-9).floor() as usize);
        }
        Ok(1)
    }

    pub fn budget(&self, code: Option<&StabilizerCode>) -> Result<Budget> {
        Ok(match self.split {
            Some((k_par, k_perp)) => Budget::Split { k_par, k_perp },
            None => Budget::Weight(self.budget_size(code)?),
        })
    }

    /// Checks everything a simulation needs without running it.
    pub fn validate(&self) -> Result<()> {
        self.lattice()?;
        self.disorder.validate().map_err(lift)?;
        self.propagation.validate()?;
        self.time_grid()?;
        if self.realizations < 1 {
            return Err(Error::Config("run.realizations must be >= 1".into()));
        }
        if self.toggling && (self.disorder.b0.is_nan() || self.disorder.b0 <= 0.0) {
            return Err(Error::Config("run.toggling needs disorder.b0 > 0".into()));
        }
        let code = self.stabilizer_code()?;
        self.budget(code.as_ref())?;
        if self.code == CodeChoice::Ideal && self.disorder.correlation_time.is_some() {
            return Err(Error::Config(
                "the ideal-code fidelity needs static disorder; drop disorder.tau".into(),
            ));
        }
        if self.code == CodeChoice::Ideal && self.n_spins > crate::diagnostics::MAX_DENSE_SPINS {
            return Err(Error::Config(format!(
                "the ideal-code fidelity needs dense diagonalization (n_spins <= {})",
                crate::diagnostics::MAX_DENSE_SPINS
            )));
        }
        if self.sweep_axis.is_some() && self.sweep_values.is_empty() {
            return Err(Error::Config("run.sweep_values is empty".into()));
        }
        Ok(())
    }
}
