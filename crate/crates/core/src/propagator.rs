//! Unitary time evolution `psi(t) = exp(-iHt) psi0`.
//!
//! Two routes are available: full diagonalization of the dense matrix and a
//! matrix-free Chebyshev expansion of the exponential. [`Method::Auto`] picks
//! the dense route up to [`DENSE_DIM_LIMIT`] basis states.

use std::str::FromStr;

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;
use crate::lattice::{HamiltonianSample, LatticeSpec, Trajectory};
use crate::state::{norm, StateVector};

/// Largest Hilbert-space dimension handled by the dense route under `Auto`.
pub const DENSE_DIM_LIMIT: usize = 2048;

/// Largest value of `radius * dt` covered by one Chebyshev step.
const MAX_CHEBYSHEV_ARGUMENT: f64 = 40.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    DenseEigen,
    Polynomial,
    #[default]
    Auto,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense_eigen" | "dense" => Ok(Method::DenseEigen),
            "polynomial_matrix_free" | "polynomial" | "chebyshev" => Ok(Method::Polynomial),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Config(format!(
                "unknown propagation method {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::DenseEigen => "dense_eigen",
            Method::Polynomial => "polynomial_matrix_free",
            Method::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSettings {
    pub method: Method,
    /// Target accuracy of the propagated state; also the allowed norm drift.
    pub tolerance: f64,
    /// Longest time covered by one polynomial step.
    pub max_step: Option<f64>,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tolerance: 1e-10,
            max_step: None,
        }
    }
}

impl PropagationSettings {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(Error::Config(format!(
                "tolerance must lie in (0, 1e-4], got {}",
                self.tolerance
            )));
        }
        if let Some(step) = self.max_step {
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::Config(format!("max_step must be > 0, got {step}")));
            }
        }
        Ok(())
    }

    fn resolve(&self, dim: usize) -> Method {
        match self.method {
            Method::Auto if dim <= DENSE_DIM_LIMIT => Method::DenseEigen,
            Method::Auto => Method::Polynomial,
            m => m,
        }
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvectors stored column-major.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    values: Vec<f64>,
    vectors: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_operator(op: &HamiltonianOperator) -> Result<Self> {
        Self::from_dense(&op.to_dense())
    }

    pub fn from_dense(m: &Mat<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        let eig = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Propagation(format!("eigendecomposition failed: {e:?}")))?;
        let s = eig.S().column_vector();
        let u = eig.U();
        let values = (0..dim).map(|k| s[k].re).collect();
        let mut vectors = Vec::with_capacity(dim * dim);
        for k in 0..dim {
            for i in 0..dim {
                vectors.push(u[(i, k)]);
            }
        }
        Ok(Self {
            dim,
            values,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector `k` in the computational basis.
    pub fn vector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    /// Coefficients `<E_k|psi>`.
    pub fn project(&self, psi: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|k| {
                self.vector(k)
                    .iter()
                    .zip(psi)
                    .map(|(v, p)| v.conj() * p)
                    .sum()
            })
            .collect()
    }

    /// `sum_k exp(-i E_k t) coeffs_k |E_k>`.
    pub fn synthesize(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for (k, (&e, &c)) in self.values.iter().zip(coeffs).enumerate() {
            let w = c * Complex64::from_polar(1.0, -e * t);
            for (o, v) in out.iter_mut().zip(self.vector(k)) {
                *o += w * v;
            }
        }
        out
    }
}

/// Bessel functions `J_0(x) .. J_{n}(x)` by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = {
        let m = n.max(ax.ceil() as usize) + 30 + (ax.sqrt() * 6.0) as usize;
        m + (m % 2)
    };
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        if k - 1 <= n {
            out[k - 1] = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    norm += cur;
    let scale = 1.0 / norm;
    for (k, v) in out.iter_mut().enumerate() {
        *v *= scale;
        if x < 0.0 && k % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

fn chebyshev_step(
    op: &HamiltonianOperator,
    radius: f64,
    psi: &[Complex64],
    dt: f64,
    tolerance: f64,
) -> Vec<Complex64> {
    let x = radius * dt;
    let guess = (x + 20.0 + 4.0 * x.cbrt() * (-tolerance.log10()).max(1.0)) as usize + 10;
    let bessel = bessel_j_sequence(x, guess);
    let cutoff = tolerance * 0.05;
    let mut n_terms = bessel.len();
    for k in (x.ceil() as usize + 1)..bessel.len() - 1 {
        if bessel[k].abs() < cutoff && bessel[k + 1].abs() < cutoff {
            n_terms = k;
            break;
        }
    }
    let coefficient = |k: usize| -> Complex64 {
        let minus_i_pow = match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        let weight = if k == 0 { 1.0 } else { 2.0 };
        minus_i_pow * (weight * bessel[k])
    };
    let inv_r = 1.0 / radius;
    let dim = psi.len();
    let mut prev = psi.to_vec();
    let mut cur = op.apply(psi);
    cur.iter_mut().for_each(|v| *v *= inv_r);
    let mut out: Vec<Complex64> = psi.iter().map(|p| coefficient(0) * p).collect();
    if n_terms > 1 {
        let c1 = coefficient(1);
        out.iter_mut().zip(&cur).for_each(|(o, v)| *o += c1 * v);
    }
    let mut scratch = vec![ZERO; dim];
    for k in 2..n_terms {
        op.apply_into(&cur, &mut scratch);
        for ((s, p), _) in scratch.iter_mut().zip(&prev).zip(0..dim) {
            *s = 2.0 * inv_r * *s - p;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut scratch);
        let ck = coefficient(k);
        out.iter_mut().zip(&cur).for_each(|(o, v)| *o += ck * v);
    }
    out
}

/// A Hamiltonian prepared for repeated propagation.
#[derive(Debug, Clone)]
pub enum Propagator {
    Dense(Spectrum),
    Polynomial {
        op: HamiltonianOperator,
        radius: f64,
        settings: PropagationSettings,
    },
}

impl Propagator {
    pub fn new(
        h: &HamiltonianSample,
        lattice: &LatticeSpec,
        settings: &PropagationSettings,
    ) -> Result<Self> {
        settings.validate()?;
        let op = HamiltonianOperator::new(h, lattice)?;
        Ok(match settings.resolve(op.dim()) {
            Method::DenseEigen => Propagator::Dense(Spectrum::from_operator(&op)?),
            _ => {
                let radius = op.norm_bound() * (1.0 + 1e-12);
                Propagator::Polynomial {
                    op,
                    radius,
                    settings: *settings,
                }
            }
        })
    }

    pub fn spectrum(&self) -> Option<&Spectrum> {
        match self {
            Propagator::Dense(s) => Some(s),
            Propagator::Polynomial { .. } => None,
        }
    }

    fn raw_evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        match self {
            Propagator::Dense(s) => s.synthesize(&s.project(psi), t),
            Propagator::Polynomial {
                op,
                radius,
                settings,
            } => {
                if *radius == 0.0 || t == 0.0 {
                    return psi.to_vec();
                }
                let mut step_limit = MAX_CHEBYSHEV_ARGUMENT / radius;
                if let Some(ms) = settings.max_step {
                    step_limit = step_limit.min(ms);
                }
                let n_steps = (t / step_limit).ceil().max(1.0) as usize;
                let dt = t / n_steps as f64;
                let mut cur = psi.to_vec();
                for _ in 0..n_steps {
                    cur = chebyshev_step(op, *radius, &cur, dt, settings.tolerance);
                }
                cur
            }
        }
    }

    fn tolerance(&self) -> f64 {
        match self {
            Propagator::Dense(_) => 1e-10,
            Propagator::Polynomial { settings, .. } => settings.tolerance.max(1e-12),
        }
    }

    fn finish(&self, amplitudes: Vec<Complex64>) -> Result<StateVector> {
        let n = norm(&amplitudes);
        if !n.is_finite() || (n - 1.0).abs() > self.tolerance() {
            return Err(Error::Propagation(format!(
                "norm drifted to {n} (tolerance {:e})",
                self.tolerance()
            )));
        }
        StateVector::normalized(amplitudes)
    }

    /// `exp(-iHt) psi0`.
    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        check_time(t)?;
        if t == 0.0 {
            return Ok(psi0.clone());
        }
        self.finish(self.raw_evolve(psi0.amplitudes(), t))
    }

    /// States at each time of a non-decreasing grid.
    pub fn evolve_grid(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        match self {
            Propagator::Dense(s) => {
                let coeffs = s.project(psi0.amplitudes());
                times
                    .iter()
                    .map(|&t| {
                        check_time(t)?;
                        if t == 0.0 {
                            return Ok(psi0.clone());
                        }
                        self.finish(s.synthesize(&coeffs, t))
                    })
                    .collect()
            }
            Propagator::Polynomial { .. } => {
                let mut out = Vec::with_capacity(times.len());
                let mut cur = psi0.clone();
                let mut now = 0.0;
                for &t in times {
                    check_time(t)?;
                    if t < now {
                        return Err(Error::InvalidParameter(
                            "time grid must be non-decreasing".into(),
                        ));
                    }
                    if t > now {
                        cur = self.finish(self.raw_evolve(cur.amplitudes(), t - now))?;
                        now = t;
                    }
                    out.push(cur.clone());
                }
                Ok(out)
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be >= 0, got {t}"
        )));
    }
    Ok(())
}

/// `exp(-iHt) psi0`.
pub fn evolve(
    h: &HamiltonianSample,
    lattice: &LatticeSpec,
    psi0: &StateVector,
    t: f64,
    settings: &PropagationSettings,
) -> Result<StateVector> {
    check_time(t)?;
    if psi0.n_spins() != lattice.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: lattice.n_spins(),
            found: psi0.n_spins(),
        });
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    Propagator::new(h, lattice, settings)?.evolve(psi0, t)
}

/// Applies `exp(i b0 t sum_n sigma^z_n)` in place.
pub fn undo_uniform_field(amplitudes: &mut [Complex64], n_spins: usize, b0: f64, t: f64) {
    for (i, a) in amplitudes.iter_mut().enumerate() {
        let m = n_spins as f64 - 2.0 * (i as u64).count_ones() as f64;
        *a *= Complex64::from_polar(1.0, b0 * t * m);
    }
}

/// Toggling-frame evolution `G(t) psi0 = exp(iH0 t) exp(-i(H + H0) t) psi0`
/// with `H0 = h.b0 sum_n sigma^z_n`.
pub fn evolve_toggling(
    h: &HamiltonianSample,
    lattice: &LatticeSpec,
    psi0: &StateVector,
    t: f64,
    settings: &PropagationSettings,
) -> Result<StateVector> {
    if h.b0.is_nan() || h.b0 <= 0.0 {
        return Err(Error::InvalidParameter(
            "toggling frame needs a positive uniform field b0".into(),
        ));
    }
    let lab = evolve(h, lattice, psi0, t, settings)?;
    let mut amps = lab.into_amplitudes();
    undo_uniform_field(&mut amps, lattice.n_spins(), h.b0, t);
    StateVector::new(amps)
}

/// Time-ordered product of segment propagators, earliest segment first.
pub fn evolve_piecewise(
    schedule: &[(HamiltonianSample, f64)],
    lattice: &LatticeSpec,
    psi0: &StateVector,
    settings: &PropagationSettings,
) -> Result<StateVector> {
    let mut cur = psi0.clone();
    for (h, duration) in schedule {
        if !(duration.is_finite() && *duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "segment durations must be > 0, got {duration}"
            )));
        }
        cur = evolve(h, lattice, &cur, *duration, settings)?;
    }
    Ok(cur)
}

/// States along a piecewise-constant trajectory at each time of a
/// non-decreasing grid. Times past the end of the trajectory are rejected.
pub fn evolve_trajectory_grid(
    trajectory: &Trajectory,
    lattice: &LatticeSpec,
    psi0: &StateVector,
    times: &[f64],
    settings: &PropagationSettings,
) -> Result<Vec<StateVector>> {
    let total = trajectory.duration();
    let mut out = Vec::with_capacity(times.len());
    let mut cur = psi0.clone();
    let mut segment_start = 0.0;
    let mut next_time = 0;
    for (h, duration) in &trajectory.segments {
        let segment_end = segment_start + duration;
        let pending: Vec<f64> = times[next_time..]
            .iter()
            .take_while(|&&t| t <= segment_end + 1e-12 * segment_end.max(1.0))
            .map(|&t| (t - segment_start).max(0.0))
            .collect();
        let needs_propagator = !pending.is_empty() || *duration > 0.0;
        if needs_propagator {
            let prop = Propagator::new(h, lattice, settings)?;
            for dt in &pending {
                out.push(prop.evolve(&cur, dt.min(*duration))?);
            }
            cur = prop.evolve(&cur, *duration)?;
        }
        next_time += pending.len();
        segment_start = segment_end;
    }
    if next_time < times.len() {
        return Err(Error::InvalidParameter(format!(
            "time {} lies beyond the trajectory end {total}",
            times[next_time]
        )));
    }
    Ok(out)
}

/// The time-averaged Hamiltonian in the frame rotating with a strong known
/// z field: only `B^z`, `J^zz` and the flip-flop part `(J^xx + J^yy)/2` on
/// both transverse slots survive. The uniform field itself is dropped.
pub fn effective_hamiltonian(
    h: &HamiltonianSample,
    lattice: &LatticeSpec,
) -> Result<HamiltonianSample> {
    h.check_shape(lattice)?;
    let scale = h
        .couplings
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let asym = h.xy_asymmetry();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::AsymmetricCoupling(asym));
    }
    let fields = h.fields.iter().map(|b| [0.0, 0.0, b[2]]).collect();
    let couplings = h
        .couplings
        .iter()
        .map(|j| {
            let flip_flop = 0.5 * (j[0][0] + j[1][1]);
            let mut out = [[0.0; 3]; 3];
            out[0][0] = flip_flop;
            out[1][1] = flip_flop;
            out[2][2] = j[2][2];
            out
        })
        .collect();
    Ok(HamiltonianSample {
        fields,
        couplings,
        b0: 0.0,
    })
}
