//! Closed-form fidelity bounds and related analytic quantities.
//!
//! With `a = N B^2 t^2` single-site errors and `b = 2 N d J^2 t^2` error
//! pairs, the code-independent lower bound is the probability that
//! `M + 2R <= K` for independent `M ~ Poisson(a)`, `R ~ Poisson(b)`.

use crate::error::{Error, Result};
use crate::lattice::{sample_hamiltonian, DisorderParams, HamiltonianSample, LatticeSpec};
use crate::propagator::effective_hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub n_spins: usize,
    pub degree: usize,
    pub kappa: f64,
    pub b2: f64,
    pub j2: f64,
    /// Short-time correlator rates `b0`, `j0` of time-dependent disorder.
    pub b0_corr: Option<f64>,
    pub j0_corr: Option<f64>,
    /// Replaces `floor(kappa N)` when set.
    pub max_errors: Option<usize>,
}

impl TheoryParams {
    pub fn new(n_spins: usize, degree: usize, kappa: f64, b2: f64, j2: f64) -> Result<Self> {
        let p = Self {
            n_spins,
            degree,
            kappa,
            b2,
            j2,
            b0_corr: None,
            j0_corr: None,
            max_errors: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with the budget fixed to `k`; `kappa` is `k / N` capped at 1.
    pub fn for_budget(n_spins: usize, degree: usize, k: usize, b2: f64, j2: f64) -> Result<Self> {
        let mut p = Self::new(
            n_spins,
            degree,
            (k as f64 / n_spins as f64).clamp(f64::MIN_POSITIVE, 1.0),
            b2,
            j2,
        )?;
        p.max_errors = Some(k);
        Ok(p)
    }

    pub fn with_correlators(mut self, b0: f64, j0: f64) -> Result<Self> {
        self.b0_corr = Some(b0);
        self.j0_corr = Some(j0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::InvalidParameter("n_spins must be >= 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in (0, 1], got {}",
                self.kappa
            )));
        }
        for (name, v) in [
            ("b2", Some(self.b2)),
            ("j2", Some(self.j2)),
            ("b0", self.b0_corr),
            ("j0", self.j0_corr),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} must be >= 0, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn u(&self) -> f64 {
        (self.b2 + 2.0 * self.degree as f64 * self.j2).sqrt()
    }

    /// `K = floor(kappa N)` unless overridden.
    pub fn max_errors(&self) -> usize {
        self.max_errors
            .unwrap_or_else(|| (self.kappa * self.n_spins as f64 + 1e-9).floor() as usize)
    }

    /// The variances left after averaging in a frame rotating with a strong
    /// uniform z field.
    pub fn effective(&self) -> Self {
        let (b2, j2) = effective_variances(self.b2, self.j2);
        Self { b2, j2, ..*self }
    }

    fn correlators(&self) -> Result<(f64, f64)> {
        match (self.b0_corr, self.j0_corr) {
            (Some(b0), Some(j0)) => Ok((b0, j0)),
            _ => Err(Error::InvalidParameter(
                "time-dependent results need b0 and j0 correlator rates".into(),
            )),
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

fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

fn log_poisson(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * mean.ln() - mean - libm::lgamma(k as f64 + 1.0)
}

/// `P(M + 2R <= k)` for `M ~ Poisson(a)`, `R ~ Poisson(b)`, in log space.
pub fn poisson_pair_cdf(a: f64, b: f64, k: usize) -> f64 {
    let mut log_cdf_a = Vec::with_capacity(k + 1);
    let mut acc = f64::NEG_INFINITY;
    for m in 0..=k {
        acc = log_add_exp(acc, log_poisson(a, m));
        log_cdf_a.push(acc);
    }
    let mut total = f64::NEG_INFINITY;
    for r in 0..=k / 2 {
        total = log_add_exp(total, log_poisson(b, r) + log_cdf_a[k - 2 * r]);
    }
    total.exp().clamp(0.0, 1.0)
}

/// The exact truncated sum for static disorder.
pub fn f1_exact_sum(p: &TheoryParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let n = p.n_spins as f64;
    let a = n * p.b2 * t * t;
    let b = 2.0 * n * p.degree as f64 * p.j2 * t * t;
    Ok(poisson_pair_cdf(a, b, p.max_errors()))
}

/// The exact truncated sum with `(Bt)^2 -> b0 t` and `(Jt)^2 -> j0 t`.
pub fn f1_exact_sum_time_dependent(p: &TheoryParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let (b0, j0) = p.correlators()?;
    let n = p.n_spins as f64;
    Ok(poisson_pair_cdf(
        n * b0 * t,
        2.0 * n * p.degree as f64 * j0 * t,
        p.max_errors(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErfBound {
    pub fidelity: f64,
    pub t_r: f64,
    pub delta_t: f64,
}

fn erf_step(t: f64, t_r: f64, delta_t: f64) -> f64 {
    if delta_t == 0.0 {
        return if t < t_r {
            1.0
        } else if t > t_r {
            0.0
        } else {
            0.5
        };
    }
    0.5 + 0.5 * libm::erf((t_r - t) / delta_t)
}

/// Large-K form of the bound for static disorder.
pub fn f1_erf(p: &TheoryParams, t: f64) -> ErfBound {
    let d = p.degree as f64;
    let rate = p.b2 + 4.0 * d * p.j2;
    if rate == 0.0 {
        return ErfBound {
            fidelity: 1.0,
            t_r: f64::INFINITY,
            delta_t: 0.0,
        };
    }
    let t_r = (p.kappa / rate).sqrt();
    let delta_t = (1.0 / (2.0 * p.n_spins as f64)).sqrt() * (p.b2 + 8.0 * d * p.j2).sqrt() / rate;
    ErfBound {
        fidelity: erf_step(t, t_r, delta_t),
        t_r,
        delta_t,
    }
}

/// Large-K form of the bound for rapidly fluctuating disorder.
pub fn f1_time_dependent(p: &TheoryParams, t: f64) -> Result<ErfBound> {
    let (b0, j0) = p.correlators()?;
    let d = p.degree as f64;
    let rate = b0 + 4.0 * d * j0;
    if rate == 0.0 {
        return Ok(ErfBound {
            fidelity: 1.0,
            t_r: f64::INFINITY,
            delta_t: 0.0,
        });
    }
    let t_r = p.kappa / rate;
    let delta_t =
        (2.0 * p.kappa / p.n_spins as f64).sqrt() * (b0 + 8.0 * d * j0).sqrt() / rate.powf(1.5);
    Ok(ErfBound {
        fidelity: erf_step(t, t_r, delta_t),
        t_r,
        delta_t,
    })
}

/// Ensemble estimate `exp(-N U^2 t^2)` of the squared overlap with the initial state.
pub fn overlap_x0_squared(p: &TheoryParams, t: f64) -> f64 {
    let ut = p.u() * t;
    (-(p.n_spins as f64) * ut * ut).exp()
}

/// The squared overlap estimate for one realization, each edge counted for
/// both orderings of its sites. The known uniform field is not included.
pub fn x0_sample_exponent(h: &HamiltonianSample, lattice: &LatticeSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    h.check_shape(lattice)?;
    Ok((-t * t * (h.field_energy() + 4.0 * h.coupling_energy())).exp())
}

/// Variances `(B^2, J^2)` after toggling-frame averaging of the i.i.d.
/// Gaussian ensemble: `B^2/3` and `J^2/9 + (2 J^2/9)/4`.
pub fn effective_variances(b2: f64, j2: f64) -> (f64, f64) {
    (b2 / 3.0, j2 / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalVariances {
    pub b2_eff: f64,
    pub b2_se: f64,
    pub j2_eff: f64,
    pub j2_se: f64,
    pub n_samples: usize,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Estimates the averaged variances from `n_samples` realizations, using
/// every site and edge of each sample.
pub fn empirical_effective_variances(
    lattice: &LatticeSpec,
    params: &DisorderParams,
    n_samples: usize,
) -> Result<EmpiricalVariances> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let mut b = Vec::with_capacity(n_samples);
    let mut j = Vec::with_capacity(n_samples);
    for r in 0..n_samples as u64 {
        let eff = effective_hamiltonian(&sample_hamiltonian(lattice, params, r)?, lattice)?;
        b.push(eff.fields.iter().map(|f| f[2] * f[2]).sum::<f64>() / eff.fields.len() as f64);
        let edges = eff.couplings.len().max(1) as f64;
        j.push(
            eff.couplings
                .iter()
                .map(|c| c[2][2] * c[2][2] + 0.25 * (c[0][0] + c[1][1]).powi(2))
                .sum::<f64>()
                / edges,
        );
    }
    let (b2_eff, b2_se) = mean_se(&b);
    let (j2_eff, j2_se) = mean_se(&j);
    Ok(EmpiricalVariances {
        b2_eff,
        b2_se,
        j2_eff,
        j2_se,
        n_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptimum {
    /// Best ratio `K_perp / K_par`.
    pub ratio: f64,
    /// False when `B^2 = 0` and the ratio is infinite.
    pub defined: bool,
}

/// Best split `K_perp / K_par = 4 d J^2 / B^2`. Pass [`TheoryParams::effective`]
/// for the toggling frame.
pub fn optimal_error_split(p: &TheoryParams) -> SplitOptimum {
    if p.b2 == 0.0 {
        return SplitOptimum {
            ratio: f64::INFINITY,
            defined: false,
        };
    }
    SplitOptimum {
        ratio: 4.0 * p.degree as f64 * p.j2 / p.b2,
        defined: true,
    }
}

/// Whether the approximations behind the bound are expected to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validity {
    /// `U t < 1`.
    pub short_time: bool,
    /// `kappa <= 0.1`, so errors stay sparse.
    pub sparse_errors: bool,
    /// `K >= 10`, needed for the erf form.
    pub many_errors: bool,
}

pub fn validity(p: &TheoryParams, t: f64) -> Validity {
    Validity {
        short_time: p.u() * t < 1.0,
        sparse_errors: p.kappa <= 0.1,
        many_errors: p.max_errors() >= 10,
    }
}

/// Time at which a non-increasing function of `t` falls to `level`, by bisection on `[0, t_hi]`.
pub fn crossing_time<F>(f: F, level: f64, t_hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (0.0, t_hi);
    if f(hi)? > level {
        return Err(Error::InvalidParameter(format!(
            "value stays above {level} up to t = {t_hi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Time at which [`f1_exact_sum`] falls to `level`.
pub fn f1_crossing(p: &TheoryParams, level: f64) -> Result<f64> {
    let u = p.u();
    if u == 0.0 {
        return Err(Error::InvalidParameter(
            "no disorder, the bound never decays".into(),
        ));
    }
    let mut t_hi = 1.0 / u;
    while f1_exact_sum(p, t_hi)? > level {
        t_hi *= 2.0;
        if t_hi > 1e12 / u {
            return Err(Error::InvalidParameter(
                "bound does not reach the level".into(),
            ));
        }
    }
    crossing_time(|t| f1_exact_sum(p, t), level, t_hi)
}
