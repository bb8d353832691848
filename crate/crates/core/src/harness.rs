//! Ensemble runs, sweeps and CSV output.
//!
//! Realization `r` always draws from the counter-based stream `(seed, r)`, and
//! per-time aggregates are accumulated in realization order, so results do
//! not depend on the number of workers.

use std::collections::BTreeMap;
use std::io::Write;

use crate::codes::{verify_nondegeneracy, ErrorBasis, NondegeneracyReport, StabilizerCode};
use crate::config::{fmt_num, CodeChoice, RunConfig, SweepAxis};
use crate::diagnostics::{
    census_from, mean_and_sem, median, participation_ratio, CensusReport, OperatorWeights,
};
use crate::error::{Error, Result};
use crate::exec::{CompensatedSum, Execution};
use crate::lattice::{realization_rng, sample_hamiltonian, sample_trajectory, LatticeSpec};
use crate::pauli::{Budget, PauliString};
use crate::propagator::{
    evolve_trajectory_grid, undo_uniform_field, Method, PropagationSettings, Propagator,
};
use crate::state::{inner_product, StateVector};
use crate::theory::{
    f1_erf, f1_exact_sum, f1_exact_sum_time_dependent, f1_time_dependent, overlap_x0_squared,
    TheoryParams,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stream segment reserved for random initial states.
const INITIAL_STATE_SEGMENT: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCurve {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
    /// Mean of `|<psi0|psi(t)>|^2`.
    pub overlap_mean: Vec<f64>,
    pub overlap_sem: Vec<f64>,
    pub f1_exact: Vec<f64>,
    pub f1_erf: Vec<f64>,
    pub x0_sq: Vec<f64>,
    pub t_r: f64,
    pub delta_t: f64,
    pub n_realizations: usize,
    /// Fidelity per realization and time.
    pub samples: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfTime {
    pub t: f64,
    /// Standard error from the SEM at the crossing divided by the local slope.
    pub se: f64,
}

/// First time at which `mean` falls to 1/2, by linear interpolation.
pub fn half_time(times: &[f64], mean: &[f64], sem: &[f64]) -> Option<HalfTime> {
    let i = (1..mean.len()).find(|&i| mean[i] <= 0.5 && mean[i - 1] > 0.5)?;
    let (t0, t1) = (times[i - 1], times[i]);
    let (f0, f1) = (mean[i - 1], mean[i]);
    let w = (f0 - 0.5) / (f0 - f1);
    let slope = (f1 - f0) / (t1 - t0);
    let s = sem[i - 1] + w * (sem[i] - sem[i - 1]);
    Some(HalfTime {
        t: t0 + w * (t1 - t0),
        se: s / slope.abs(),
    })
}

impl FidelityCurve {
    pub fn half_time(&self) -> Option<HalfTime> {
        half_time(&self.times, &self.mean, &self.sem)
    }

    pub const HEADER: &'static str = "t,mean_f,sem_f,overlap,overlap_sem,f1_exact,f1_erf,x0_sq";

    fn row(&self, i: usize) -> String {
        [
            self.times[i],
            self.mean[i],
            self.sem[i],
            self.overlap_mean[i],
            self.overlap_sem[i],
            self.f1_exact[i],
            self.f1_erf[i],
            self.x0_sq[i],
        ]
        .iter()
        .map(|v| fmt_num(*v))
        .collect::<Vec<_>>()
        .join(",")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_metadata(&mut w, &self.metadata)?;
        writeln!(w, "{}", Self::HEADER)?;
        for i in 0..self.times.len() {
            writeln!(w, "{}", self.row(i))?;
        }
        Ok(())
    }
}

fn write_metadata<W: Write>(w: &mut W, metadata: &[(String, String)]) -> Result<()> {
    writeln!(w, "# chaosqec {VERSION}")?;
    for (k, v) in metadata {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

enum Route {
    Code {
        basis: ErrorBasis,
        psi0: StateVector,
    },
    Ideal {
        strings: Vec<PauliString>,
    },
    Plain,
}

struct Prepared {
    lattice: LatticeSpec,
    times: Vec<f64>,
    route: Route,
    budget_size: usize,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let lattice = cfg.lattice()?;
    let code = cfg.stabilizer_code()?;
    let budget = cfg.budget(code.as_ref())?;
    let route = match (&cfg.code, code) {
        (_, Some(code)) => {
            let psi0 = cfg.logical_state.encode(&code)?;
            Route::Code {
                basis: ErrorBasis::new(&psi0, &budget)?,
                psi0,
            }
        }
        (CodeChoice::Ideal, None) => Route::Ideal {
            strings: budget.strings(cfg.n_spins),
        },
        _ => Route::Plain,
    };
    let budget_size = match route {
        Route::Plain => 0,
        _ => budget.max_weight(),
    };
    Ok(Prepared {
        lattice,
        times: cfg.time_grid()?,
        route,
        budget_size,
    })
}

fn initial_state(cfg: &RunConfig, prep: &Prepared, r: u64) -> StateVector {
    match &prep.route {
        Route::Code { psi0, .. } => psi0.clone(),
        _ => {
            let mut rng = realization_rng(cfg.disorder.seed, r, INITIAL_STATE_SEGMENT);
            StateVector::random(cfg.n_spins, &mut rng)
        }
    }
}

/// Evolved states on the time grid, in the toggling frame when requested.
fn evolve_states(
    cfg: &RunConfig,
    prep: &Prepared,
    psi0: &StateVector,
    r: u64,
) -> Result<Vec<StateVector>> {
    let states = match cfg.disorder.correlation_time {
        None => {
            let h = sample_hamiltonian(&prep.lattice, &cfg.disorder, r)?;
            Propagator::new(&h, &prep.lattice, &cfg.propagation)?.evolve_grid(psi0, &prep.times)?
        }
        Some(_) => {
            let t_last = *prep.times.last().expect("non-empty grid");
            if t_last == 0.0 {
                vec![psi0.clone(); prep.times.len()]
            } else {
                let traj = sample_trajectory(&prep.lattice, &cfg.disorder, t_last, r)?;
                evolve_trajectory_grid(&traj, &prep.lattice, psi0, &prep.times, &cfg.propagation)?
            }
        }
    };
    if !cfg.toggling {
        return Ok(states);
    }
    states
        .into_iter()
        .zip(&prep.times)
        .map(|(s, &t)| {
            let mut amps = s.into_amplitudes();
            undo_uniform_field(&mut amps, cfg.n_spins, cfg.disorder.b0, t);
            StateVector::new(amps)
        })
        .collect()
}

fn dense_weights(cfg: &RunConfig, prep: &Prepared, r: u64) -> Result<OperatorWeights> {
    let h = sample_hamiltonian(&prep.lattice, &cfg.disorder, r)?;
    let dense = PropagationSettings {
        method: Method::DenseEigen,
        ..cfg.propagation
    };
    let prop = Propagator::new(&h, &prep.lattice, &dense)?;
    Ok(OperatorWeights::new(
        prop.spectrum().expect("dense propagator"),
    ))
}

/// `(fidelity, overlap)` per time for realization `r`.
fn realization(cfg: &RunConfig, prep: &Prepared, r: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let frame = cfg.toggling.then_some(cfg.disorder.b0);
    if let Route::Ideal { strings } = &prep.route {
        let ow = dense_weights(cfg, prep, r)?;
        let identity = [PauliString::identity(cfg.n_spins)];
        let mut fid = Vec::with_capacity(prep.times.len());
        let mut overlap = Vec::with_capacity(prep.times.len());
        for &t in &prep.times {
            fid.push(
                ow.weights(t, frame, strings)
                    .iter()
                    .collect::<CompensatedSum>()
                    .value()
                    .clamp(0.0, 1.0),
            );
            overlap.push(ow.weights(t, frame, &identity)[0]);
        }
        return Ok((fid, overlap));
    }
    let psi0 = initial_state(cfg, prep, r);
    let states = evolve_states(cfg, prep, &psi0, r)?;
    let mut fid = Vec::with_capacity(states.len());
    let mut overlap = Vec::with_capacity(states.len());
    for s in &states {
        let o = inner_product(&psi0, s)?.norm_sqr();
        overlap.push(o);
        fid.push(match &prep.route {
            Route::Code { basis, .. } => basis.fidelity(s)?,
            _ => o,
        });
    }
    Ok((fid, overlap))
}

/// Analytic bound matched to a configuration.
pub fn theory_params(cfg: &RunConfig, budget_size: usize) -> Result<TheoryParams> {
    let d = cfg.degree()?;
    let mut p = TheoryParams::for_budget(
        cfg.n_spins,
        d,
        budget_size,
        cfg.disorder.b2,
        cfg.disorder.j2,
    )?;
    if cfg.toggling {
        p = p.effective();
    }
    if let Some(tau) = cfg.disorder.correlation_time {
        p = p.with_correlators(p.b2 * tau, p.j2 * tau)?;
    }
    Ok(p)
}

struct AnalyticColumns {
    f1_exact: Vec<f64>,
    f1_erf: Vec<f64>,
    x0_sq: Vec<f64>,
    t_r: f64,
    delta_t: f64,
}

fn analytic_columns(p: &TheoryParams, times: &[f64]) -> Result<AnalyticColumns> {
    let mut cols = AnalyticColumns {
        f1_exact: Vec::with_capacity(times.len()),
        f1_erf: Vec::with_capacity(times.len()),
        x0_sq: Vec::with_capacity(times.len()),
        t_r: f64::NAN,
        delta_t: f64::NAN,
    };
    for &t in times {
        let erf = match (p.b0_corr, p.j0_corr) {
            (Some(b0), Some(j0)) => {
                cols.f1_exact.push(f1_exact_sum_time_dependent(p, t)?);
                let n = p.n_spins as f64;
                cols.x0_sq
                    .push((-n * (b0 + 2.0 * p.degree as f64 * j0) * t).exp());
                f1_time_dependent(p, t)?
            }
            _ => {
                cols.f1_exact.push(f1_exact_sum(p, t)?);
                cols.x0_sq.push(overlap_x0_squared(p, t));
                f1_erf(p, t)
            }
        };
        cols.f1_erf.push(erf.fidelity);
        cols.t_r = erf.t_r;
        cols.delta_t = erf.delta_t;
    }
    Ok(cols)
}

pub fn run_simulation(cfg: &RunConfig) -> Result<FidelityCurve> {
    run_simulation_with(cfg, Execution::default())
}

pub fn run_simulation_with(cfg: &RunConfig, exec: Execution) -> Result<FidelityCurve> {
    let prep = prepare(cfg)?;
    let results = exec.map(cfg.realizations, |r| realization(cfg, &prep, r as u64));
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let n_t = prep.times.len();
    let column = |i: usize, overlap: bool| -> Vec<f64> {
        results
            .iter()
            .map(|(f, o)| if overlap { o[i] } else { f[i] })
            .collect()
    };
    let mut mean = Vec::with_capacity(n_t);
    let mut sem = Vec::with_capacity(n_t);
    let mut overlap_mean = Vec::with_capacity(n_t);
    let mut overlap_sem = Vec::with_capacity(n_t);
    for i in 0..n_t {
        let (m, s) = mean_and_sem(&column(i, false));
        mean.push(m.clamp(0.0, 1.0));
        sem.push(s);
        let (m, s) = mean_and_sem(&column(i, true));
        overlap_mean.push(m);
        overlap_sem.push(s);
    }
    let p = theory_params(cfg, prep.budget_size)?;
    let cols = analytic_columns(&p, &prep.times)?;
    let mut metadata = cfg.echo();
    metadata.push(("analytic.max_errors".into(), prep.budget_size.to_string()));
    metadata.push(("analytic.kappa".into(), fmt_num(p.kappa)));
    metadata.push(("analytic.b2".into(), fmt_num(p.b2)));
    metadata.push(("analytic.j2".into(), fmt_num(p.j2)));
    metadata.push(("analytic.t_r".into(), fmt_num(cols.t_r)));
    metadata.push(("analytic.delta_t".into(), fmt_num(cols.delta_t)));
    Ok(FidelityCurve {
        times: prep.times,
        mean,
        sem,
        overlap_mean,
        overlap_sem,
        f1_exact: cols.f1_exact,
        f1_erf: cols.f1_erf,
        x0_sq: cols.x0_sq,
        t_r: cols.t_r,
        delta_t: cols.delta_t,
        n_realizations: cfg.realizations,
        samples: results.into_iter().map(|r| r.0).collect(),
        metadata,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub config: RunConfig,
    pub curve: FidelityCurve,
    pub half_time: Option<HalfTime>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub metadata: Vec<(String, String)>,
}

/// The configuration at one point of a sweep.
pub fn sweep_config(base: &RunConfig, axis: SweepAxis, value: f64) -> Result<RunConfig> {
    let mut cfg = base.clone();
    cfg.sweep_axis = None;
    cfg.sweep_values.clear();
    match axis {
        SweepAxis::NSpins => {
            if !(value >= 2.0 && value.fract() == 0.0) {
                return Err(Error::Config(format!(
                    "n_spins sweep value {value} is not an integer >= 2"
                )));
            }
            cfg.n_spins = value as usize;
        }
        SweepAxis::JOverB => {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Config(format!("j_over_b must be >= 0, got {value}")));
            }
            let d = base.degree()? as f64;
            let u2 = base.disorder.b2 + 2.0 * d * base.disorder.j2;
            cfg.disorder.b2 = u2 / (1.0 + 2.0 * d * value * value);
            cfg.disorder.j2 = value * value * cfg.disorder.b2;
        }
        SweepAxis::Kappa => {
            cfg.kappa = Some(value);
            cfg.max_errors = None;
        }
        SweepAxis::B0 => cfg.disorder.b0 = value,
        SweepAxis::Tau => cfg.disorder.correlation_time = Some(value),
    }
    Ok(cfg)
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    let axis = cfg
        .sweep_axis
        .ok_or_else(|| Error::Config("run.sweep_axis is not set".into()))?;
    if cfg.sweep_values.is_empty() {
        return Err(Error::Config("run.sweep_values is empty".into()));
    }
    let mut points = Vec::with_capacity(cfg.sweep_values.len());
    for &value in &cfg.sweep_values {
        let point_cfg = sweep_config(cfg, axis, value)?;
        let curve = run_simulation(&point_cfg)?;
        points.push(SweepPoint {
            value,
            half_time: curve.half_time(),
            config: point_cfg,
            curve,
        });
    }
    Ok(SweepResult {
        axis,
        points,
        metadata: cfg.echo(),
    })
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_metadata(&mut w, &self.metadata)?;
        writeln!(w, "index,{},{}", self.axis, FidelityCurve::HEADER)?;
        for (k, p) in self.points.iter().enumerate() {
            for i in 0..p.curve.times.len() {
                writeln!(w, "{k},{},{}", fmt_num(p.value), p.curve.row(i))?;
            }
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,{},half_time,half_time_se,t_r,delta_t", self.axis)?;
        for (k, p) in self.points.iter().enumerate() {
            let (t, se) = p.half_time.map_or((f64::NAN, f64::NAN), |h| (h.t, h.se));
            writeln!(
                w,
                "{k},{},{},{},{},{}",
                fmt_num(p.value),
                fmt_num(t),
                fmt_num(se),
                fmt_num(p.curve.t_r),
                fmt_num(p.curve.delta_t)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryTable {
    pub params: TheoryParams,
    pub times: Vec<f64>,
    pub f1_exact: Vec<f64>,
    pub f1_erf: Vec<f64>,
    pub x0_sq: Vec<f64>,
    pub t_r: f64,
    pub delta_t: f64,
    pub metadata: Vec<(String, String)>,
}

/// Analytic curves only; `lattice.n_spins` may be far beyond simulation size.
pub fn run_theory(cfg: &RunConfig) -> Result<TheoryTable> {
    let k = if let Some(k) = cfg.max_errors {
        k
    } else if let Some(kappa) = cfg.kappa {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::Config(format!(
                "code.kappa must lie in (0, 1], got {kappa}"
            )));
        }
        (kappa * cfg.n_spins as f64 + 1e-9).floor() as usize
    } else {
        match cfg.stabilizer_code()? {
            Some(c) => c.max_errors(),
            None => 1,
        }
    };
    cfg.disorder
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    if cfg.toggling && (cfg.disorder.b0.is_nan() || cfg.disorder.b0 <= 0.0) {
        return Err(Error::Config("run.toggling needs disorder.b0 > 0".into()));
    }
    let times = cfg.time_grid()?;
    let mut p = theory_params(cfg, k)?;
    if let Some(kappa) = cfg.kappa {
        p.kappa = kappa;
    }
    let cols = analytic_columns(&p, &times)?;
    let mut metadata = cfg.echo();
    metadata.push(("analytic.max_errors".into(), k.to_string()));
    metadata.push(("analytic.degree".into(), p.degree.to_string()));
    Ok(TheoryTable {
        params: p,
        times,
        f1_exact: cols.f1_exact,
        f1_erf: cols.f1_erf,
        x0_sq: cols.x0_sq,
        t_r: cols.t_r,
        delta_t: cols.delta_t,
        metadata,
    })
}

impl TheoryTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_metadata(&mut w, &self.metadata)?;
        writeln!(w, "t,f1_exact,f1_erf,x0_sq,t_R,delta_t")?;
        for i in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_num(self.times[i]),
                fmt_num(self.f1_exact[i]),
                fmt_num(self.f1_erf[i]),
                fmt_num(self.x0_sq[i]),
                fmt_num(self.t_r),
                fmt_num(self.delta_t)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub code: StabilizerCode,
    pub nondegeneracy: NondegeneracyReport,
    pub stabilizer_residual: f64,
    /// Gram residual of `{sigma_s |0>}` over the code's weight budget, or the
    /// error when the basis is not orthonormal.
    pub gram_residual: std::result::Result<f64, f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.nondegeneracy.passed()
            && self.stabilizer_residual < 1e-10
            && self.gram_residual.is_ok()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let c = &self.code;
        writeln!(w, "# chaosqec {VERSION}")?;
        writeln!(w, "# code={}", c.name())?;
        writeln!(w, "# n_spins={}", c.n_spins())?;
        writeln!(w, "# n_logical={}", c.n_logical())?;
        writeln!(w, "# max_errors={}", c.max_errors())?;
        writeln!(w, "check,value,passed")?;
        let nd = &self.nondegeneracy;
        writeln!(
            w,
            "nondegeneracy_max_violation,{},{}",
            fmt_num(nd.max_violation),
            nd.passed()
        )?;
        writeln!(w, "strings_checked,{},true", nd.strings_checked)?;
        writeln!(
            w,
            "stabilizer_residual,{},{}",
            fmt_num(self.stabilizer_residual),
            self.stabilizer_residual < 1e-10
        )?;
        let (g, ok) = match self.gram_residual {
            Ok(g) => (g, true),
            Err(g) => (g, false),
        };
        writeln!(w, "error_basis_gram_residual,{},{ok}", fmt_num(g))?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let c = &self.code;
        let mut s = format!(
            "{} [[{}, {}]] K={}: {}\n  max violation {:e} over {} strings\n",
            c.name(),
            c.n_spins(),
            c.n_logical(),
            c.max_errors(),
            if self.passed() { "PASS" } else { "FAIL" },
            self.nondegeneracy.max_violation,
            self.nondegeneracy.strings_checked
        );
        if let Some((string, a, b)) = &self.nondegeneracy.worst {
            if !self.nondegeneracy.passed() {
                s.push_str(&format!("  worst: <{a}| {string} |{b}>\n"));
            }
        }
        s
    }
}

pub fn run_verify_code(cfg: &RunConfig) -> Result<VerifyReport> {
    let code = match &cfg.code {
        CodeChoice::Builtin(name) => crate::codes::builtin_code(name),
        CodeChoice::File(p) if !p.as_os_str().is_empty() => StabilizerCode::load(p),
        _ => return Err(Error::Config("verify-code needs a concrete code".into())),
    }
    .map_err(|e| Error::Config(e.to_string()))?;
    let psi0 = code.codeword_basis()[0].clone();
    let gram_residual = match ErrorBasis::new(&psi0, &code.budget()) {
        Ok(b) => Ok(b.gram_residual()),
        Err(Error::DegenerateErrorBasis { residual }) => Err(residual),
        Err(e) => return Err(e),
    };
    Ok(VerifyReport {
        nondegeneracy: verify_nondegeneracy(&code),
        stabilizer_residual: code.stabilizer_residual(),
        gram_residual,
        code,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosResult {
    /// Participation ratios per realization, one per eigenstate.
    pub ratios: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl ChaosResult {
    pub fn medians(&self) -> Vec<f64> {
        self.ratios.iter().map(|r| median(r)).collect()
    }

    /// Median over realizations of the per-realization median.
    pub fn ensemble_median(&self) -> f64 {
        median(&self.medians())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_metadata(&mut w, &self.metadata)?;
        writeln!(w, "realization,eigenindex,pr")?;
        for (r, row) in self.ratios.iter().enumerate() {
            for (k, pr) in row.iter().enumerate() {
                writeln!(w, "{r},{k},{}", fmt_num(*pr))?;
            }
        }
        Ok(())
    }
}

pub fn run_chaos(cfg: &RunConfig) -> Result<ChaosResult> {
    run_chaos_with(cfg, Execution::default())
}

pub fn run_chaos_with(cfg: &RunConfig, exec: Execution) -> Result<ChaosResult> {
    let lattice = cfg.lattice()?;
    cfg.disorder
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    if cfg.realizations < 1 {
        return Err(Error::Config("run.realizations must be >= 1".into()));
    }
    if lattice.n_spins() > crate::diagnostics::MAX_DENSE_SPINS {
        return Err(Error::Config(format!(
            "chaos diagnostics need n_spins <= {}",
            crate::diagnostics::MAX_DENSE_SPINS
        )));
    }
    let ratios = exec
        .map(cfg.realizations, |r| {
            let h = sample_hamiltonian(&lattice, &cfg.disorder, r as u64)?;
            participation_ratio(&h, &lattice)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ChaosResult {
        ratios,
        metadata: cfg.echo(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusTable {
    pub times: Vec<f64>,
    /// Ensemble-mean census at each time.
    pub reports: Vec<CensusReport>,
    pub metadata: Vec<(String, String)>,
}

impl CensusTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_metadata(&mut w, &self.metadata)?;
        writeln!(w, "t,z_count,xy_count,weight")?;
        for (t, rep) in self.times.iter().zip(&self.reports) {
            for ((z, xy), wgt) in &rep.weights {
                writeln!(w, "{},{z},{xy},{}", fmt_num(*t), fmt_num(*wgt))?;
            }
        }
        Ok(())
    }
}

/// Ensemble-mean error census over the configured budget.
pub fn run_census(cfg: &RunConfig) -> Result<CensusTable> {
    run_census_with(cfg, Execution::default())
}

pub fn run_census_with(cfg: &RunConfig, exec: Execution) -> Result<CensusTable> {
    let prep = prepare(cfg)?;
    if matches!(prep.route, Route::Plain) {
        return Err(Error::Config(
            "census needs a code or code.name = ideal".into(),
        ));
    }
    let frame = cfg.toggling.then_some(cfg.disorder.b0);
    let per_realization = exec
        .map(cfg.realizations, |r| -> Result<Vec<CensusReport>> {
            let r = r as u64;
            match &prep.route {
                Route::Ideal { strings } => {
                    let ow = dense_weights(cfg, &prep, r)?;
                    Ok(prep
                        .times
                        .iter()
                        .map(|&t| ow.census(t, frame, strings))
                        .collect())
                }
                Route::Code { basis, psi0 } => evolve_states(cfg, &prep, psi0, r)?
                    .iter()
                    .map(|s| Ok(census_from(basis.strings(), &basis.amplitudes(s)?)))
                    .collect(),
                Route::Plain => unreachable!(),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = cfg.realizations as f64;
    let reports = (0..prep.times.len())
        .map(|i| {
            let mut sums: BTreeMap<(usize, usize), CompensatedSum> = BTreeMap::new();
            for rep in &per_realization {
                for (k, w) in &rep[i].weights {
                    sums.entry(*k).or_default().add(*w);
                }
            }
            CensusReport {
                weights: sums.into_iter().map(|(k, s)| (k, s.value() / n)).collect(),
            }
        })
        .collect();
    Ok(CensusTable {
        times: prep.times,
        reports,
        metadata: cfg.echo(),
    })
}

/// Budget used by [`run_census`] and [`run_simulation`] for `cfg`.
pub fn resolved_budget(cfg: &RunConfig) -> Result<Budget> {
    let code = cfg.stabilizer_code()?;
    cfg.budget(code.as_ref())
}
