//! Interaction graphs and the random-Hamiltonian ensemble.
//!
//! A realization carries a field vector per site and a 3x3 coupling matrix per
//! unordered edge. The operator built from a sample is
//!
//! ```text
//! H = sum_n B_n . sigma_n + b0 sum_n sigma^z_n + sum_{e=(n,m)} 2 sigma_n . J_e . sigma_m
//! ```
//!
//! which equals the ordered-pair double sum over `n != m` when `J_mn = J_nm^T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Largest supported spin count; basis indices are `u64` bit masks.
pub const MAX_SPINS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Ring,
    Custom(Vec<(usize, usize)>),
}

/// A uniform-degree interaction graph on `n_spins` sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    n_spins: usize,
    edges: Vec<(usize, usize)>,
    degree: usize,
}

impl LatticeSpec {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Edges as `(lo, hi)` pairs with `lo < hi`, in construction order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_spins
    }
}

/// Builds a lattice. A ring on two sites is the single edge `(0, 1)` with
/// degree 1; larger rings have degree 2.
pub fn build_lattice(n_spins: usize, topology: &Topology) -> Result<LatticeSpec> {
    if n_spins < 2 {
        return Err(Error::InvalidLattice(format!(
            "need at least 2 spins, got {n_spins}"
        )));
    }
    if n_spins > MAX_SPINS {
        return Err(Error::InvalidLattice(format!(
            "at most {MAX_SPINS} spins are supported, got {n_spins}"
        )));
    }
    let raw: Vec<(usize, usize)> = match topology {
        Topology::Ring if n_spins == 2 => vec![(0, 1)],
        Topology::Ring => (0..n_spins).map(|i| (i, (i + 1) % n_spins)).collect(),
        Topology::Custom(edges) => edges.clone(),
    };
    let mut edges = Vec::with_capacity(raw.len());
    let mut degrees = vec![0usize; n_spins];
    for &(a, b) in &raw {
        if a >= n_spins || b >= n_spins {
            return Err(Error::InvalidLattice(format!(
                "edge ({a}, {b}) has a site outside [0, {n_spins})"
            )));
        }
        if a == b {
            return Err(Error::InvalidLattice(format!("self-loop on site {a}")));
        }
        let e = (a.min(b), a.max(b));
        if edges.contains(&e) {
            return Err(Error::InvalidLattice(format!(
                "duplicate edge ({}, {})",
                e.0, e.1
            )));
        }
        degrees[a] += 1;
        degrees[b] += 1;
        edges.push(e);
    }
    let degree = degrees[0];
    if let Some(site) = degrees.iter().position(|&d| d != degree) {
        return Err(Error::InvalidLattice(format!(
            "non-uniform degree: site 0 has {degree} neighbors, site {site} has {}",
            degrees[site]
        )));
    }
    Ok(LatticeSpec {
        n_spins,
        edges,
        degree,
    })
}

/// Parses a whitespace-separated pair list such as `"0 1  1 2  2 0"`.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::InvalidLattice(format!("bad site index {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() % 2 != 0 {
        return Err(Error::InvalidLattice(
            "edge list has an odd number of site indices".into(),
        ));
    }
    Ok(values.chunks(2).map(|p| (p[0], p[1])).collect())
}

/// Ensemble parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderParams {
    /// Mean of `|B_n|^2`.
    pub b2: f64,
    /// Mean of the squared coupling entries summed over all nine components.
    pub j2: f64,
    /// Known uniform z field.
    pub b0: f64,
    /// Disorder correlation time; `None` means static disorder.
    pub correlation_time: Option<f64>,
    pub seed: u64,
    /// Force `J^xy = J^yx` on every edge.
    pub xy_symmetric: bool,
}

impl Default for DisorderParams {
    fn default() -> Self {
        Self {
            b2: 1.0,
            j2: 0.0,
            b0: 0.0,
            correlation_time: None,
            seed: 0,
            xy_symmetric: true,
        }
    }
}

impl DisorderParams {
    pub fn new(b2: f64, j2: f64, seed: u64) -> Self {
        Self {
            b2,
            j2,
            seed,
            ..Self::default()
        }
    }

    pub fn with_b0(mut self, b0: f64) -> Self {
        self.b0 = b0;
        self
    }

    pub fn with_correlation_time(mut self, tau: f64) -> Self {
        self.correlation_time = Some(tau);
        self
    }

    pub fn with_xy_symmetric(mut self, on: bool) -> Self {
        self.xy_symmetric = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )))
            }
        };
        finite_nonneg("b2", self.b2)?;
        finite_nonneg("j2", self.j2)?;
        finite_nonneg("b0", self.b0)?;
        if let Some(tau) = self.correlation_time {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "correlation time must be > 0, got {tau}"
                )));
            }
        }
        Ok(())
    }
}

/// One disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSample {
    /// Field vector `(B^x, B^y, B^z)` per site.
    pub fields: Vec<[f64; 3]>,
    /// Coupling matrix per lattice edge, indexed `[alpha][beta]` with alpha
    /// acting on the lower site of the edge.
    pub couplings: Vec<[[f64; 3]; 3]>,
    pub b0: f64,
}

impl HamiltonianSample {
    pub fn zero(lattice: &LatticeSpec) -> Self {
        Self {
            fields: vec![[0.0; 3]; lattice.n_spins()],
            couplings: vec![[[0.0; 3]; 3]; lattice.edges().len()],
            b0: 0.0,
        }
    }

    pub fn check_shape(&self, lattice: &LatticeSpec) -> Result<()> {
        if self.fields.len() != lattice.n_spins() {
            return Err(Error::DimensionMismatch {
                expected: lattice.n_spins(),
                found: self.fields.len(),
            });
        }
        if self.couplings.len() != lattice.edges().len() {
            return Err(Error::DimensionMismatch {
                expected: lattice.edges().len(),
                found: self.couplings.len(),
            });
        }
        Ok(())
    }

    /// Largest `|J^xy - J^yx|` over all edges.
    pub fn xy_asymmetry(&self) -> f64 {
        self.couplings
            .iter()
            .map(|j| (j[0][1] - j[1][0]).abs())
            .fold(0.0, f64::max)
    }

    /// `sum_n |B_n|^2`.
    pub fn field_energy(&self) -> f64 {
        self.fields
            .iter()
            .map(|b| b.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    /// `sum_e sum_{alpha beta} (J_e^{alpha beta})^2` over unordered edges.
    pub fn coupling_energy(&self) -> f64 {
        self.couplings
            .iter()
            .map(|j| j.iter().flatten().map(|x| x * x).sum::<f64>())
            .sum()
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based generator for `(seed, realization, segment)`.
pub(crate) fn realization_rng(seed: u64, realization: u64, segment: u64) -> ChaCha8Rng {
    let key = mix64(seed ^ mix64(realization ^ mix64(segment.wrapping_add(0x5151))));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(realization);
    rng
}

fn draw(lattice: &LatticeSpec, params: &DisorderParams, rng: &mut ChaCha8Rng) -> HamiltonianSample {
    let b_sd = (params.b2 / 3.0).sqrt();
    let j_sd = (params.j2 / 9.0).sqrt();
    let mut normal = || -> f64 { StandardNormal.sample(rng) };
    let fields = (0..lattice.n_spins())
        .map(|_| [b_sd * normal(), b_sd * normal(), b_sd * normal()])
        .collect();
    let couplings = (0..lattice.edges().len())
        .map(|_| {
            let mut j = [[0.0; 3]; 3];
            for row in j.iter_mut() {
                for v in row.iter_mut() {
                    *v = j_sd * normal();
                }
            }
            if params.xy_symmetric {
                let s = (j[0][1] + j[1][0]) * std::f64::consts::FRAC_1_SQRT_2;
                j[0][1] = s;
                j[1][0] = s;
            }
            j
        })
        .collect();
    HamiltonianSample {
        fields,
        couplings,
        b0: params.b0,
    }
}

/// Draws the static realization `realization_index`.
///
/// Field components are iid `N(0, b2/3)` and coupling entries iid
/// `N(0, j2/9)`. The result is a pure function of the seed and index.
pub fn sample_hamiltonian(
    lattice: &LatticeSpec,
    params: &DisorderParams,
    realization_index: u64,
) -> Result<HamiltonianSample> {
    sample_segment(lattice, params, realization_index, 0)
}

/// Draws segment `segment` of realization `realization_index`.
pub fn sample_segment(
    lattice: &LatticeSpec,
    params: &DisorderParams,
    realization_index: u64,
    segment: u64,
) -> Result<HamiltonianSample> {
    params.validate()?;
    let mut rng = realization_rng(params.seed, realization_index, segment);
    Ok(draw(lattice, params, &mut rng))
}

/// Piecewise-constant disorder: `(sample, duration)` pairs in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub segments: Vec<(HamiltonianSample, f64)>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|(_, d)| d).sum()
    }

    /// Restriction to `[0, t]`; the segment containing `t` is shortened.
    pub fn truncated(&self, t: f64) -> Trajectory {
        let mut left = t;
        let mut segments = Vec::new();
        for (h, d) in &self.segments {
            if left <= 0.0 {
                break;
            }
            let take = d.min(left);
            segments.push((h.clone(), take));
            left -= take;
        }
        Trajectory { segments }
    }
}

/// Fresh independent samples on consecutive intervals of length `tau`
/// covering `[0, t_max]`; the last interval is shortened to end at `t_max`.
pub fn sample_trajectory(
    lattice: &LatticeSpec,
    params: &DisorderParams,
    t_max: f64,
    realization_index: u64,
) -> Result<Trajectory> {
    let tau = params.correlation_time.ok_or_else(|| {
        Error::InvalidParameter("trajectory sampling needs a correlation time".into())
    })?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_max must be > 0, got {t_max}"
        )));
    }
    let n_segments = ((t_max / tau) - 1e-9).ceil().max(1.0) as u64;
    let segments = (0..n_segments)
        .map(|s| {
            let h = sample_segment(lattice, params, realization_index, s)?;
            let start = s as f64 * tau;
            let duration = if s + 1 == n_segments {
                t_max - start
            } else {
                tau
            };
            Ok((h, duration))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { segments })
}

/// Root-mean-square energy uncertainty per spin, `sqrt(b2 + 2 d j2)`.
pub fn energy_uncertainty(params: &DisorderParams, lattice: &LatticeSpec) -> f64 {
    (params.b2 + 2.0 * lattice.degree() as f64 * params.j2).sqrt()
}
