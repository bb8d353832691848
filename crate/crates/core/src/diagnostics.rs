//! Chaos and error-structure diagnostics.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::codes::{ErrorBasis, StabilizerCode};
use crate::error::{Error, Result};
use crate::exec::CompensatedSum;
use crate::hamiltonian::HamiltonianOperator;
use crate::lattice::{HamiltonianSample, LatticeSpec};
use crate::pauli::{Budget, PauliString};
use crate::propagator::Spectrum;
use crate::state::StateVector;

/// Largest lattice accepted by [`participation_ratio`].
pub const MAX_DENSE_SPINS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenvectors `(v_up, v_down)` of `b . sigma`, or the computational basis
/// when the field vanishes.
fn site_basis(b: [f64; 3]) -> [[Complex64; 2]; 2] {
    let [bx, by, bz] = b;
    let len = (bx * bx + by * by + bz * bz).sqrt();
    if len < 1e-300 || (bx == 0.0 && by == 0.0) {
        let one = Complex64::new(1.0, 0.0);
        return if bz >= 0.0 {
            [[one, ZERO], [ZERO, one]]
        } else {
            [[ZERO, one], [one, ZERO]]
        };
    }
    let perp = Complex64::new(bx, by);
    let (up, down) = if bz >= 0.0 {
        (
            [Complex64::new(len + bz, 0.0), perp],
            [-perp.conj(), Complex64::new(len + bz, 0.0)],
        )
    } else {
        (
            [perp.conj(), Complex64::new(len - bz, 0.0)],
            [Complex64::new(len - bz, 0.0), -perp],
        )
    };
    let normalize = |v: [Complex64; 2]| {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / n, v[1] / n]
    };
    [normalize(up), normalize(down)]
}

/// `1 / sum_i |<i|E>|^4` for each eigenstate of `H`, with `|i>` the product
/// eigenbasis of the single-site terms (uniform field included).
pub fn participation_ratio(h: &HamiltonianSample, lattice: &LatticeSpec) -> Result<Vec<f64>> {
    let n = lattice.n_spins();
    if n > MAX_DENSE_SPINS {
        return Err(Error::TooLarge {
            n_spins: n,
            limit: MAX_DENSE_SPINS,
        });
    }
    let spectrum = Spectrum::from_operator(&HamiltonianOperator::new(h, lattice)?)?;
    let bases: Vec<_> = h
        .fields
        .iter()
        .map(|b| site_basis([b[0], b[1], b[2] + h.b0]))
        .collect();
    let mut buf = vec![ZERO; spectrum.dim()];
    Ok((0..spectrum.dim())
        .map(|k| {
            buf.copy_from_slice(spectrum.vector(k));
            for (site, basis) in bases.iter().enumerate() {
                let bit = 1usize << site;
                for i in 0..buf.len() {
                    if i & bit != 0 {
                        continue;
                    }
                    let (a, b) = (buf[i], buf[i | bit]);
                    buf[i] = basis[0][0].conj() * a + basis[0][1].conj() * b;
                    buf[i | bit] = basis[1][0].conj() * a + basis[1][1].conj() * b;
                }
            }
            1.0 / buf.iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>()
        })
        .collect())
}

/// Error-space weight grouped by `(z_count, xy_count)` of the strings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CensusReport {
    pub weights: BTreeMap<(usize, usize), f64>,
}

impl CensusReport {
    fn add(&mut self, s: &PauliString, w: f64) {
        *self
            .weights
            .entry((s.z_count(), s.xy_count()))
            .or_insert(0.0) += w;
    }

    pub fn weight(&self, z_count: usize, xy_count: usize) -> f64 {
        self.weights
            .get(&(z_count, xy_count))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.weights.values().collect::<CompensatedSum>().value()
    }

    /// Weight in classes without flip letters.
    pub fn phase_only(&self) -> f64 {
        self.sum_where(|_, xy| xy == 0)
    }

    /// Weight in classes with at least one `X` or `Y`.
    pub fn flip(&self) -> f64 {
        self.sum_where(|_, xy| xy > 0)
    }

    pub fn odd_xy(&self) -> f64 {
        self.sum_where(|_, xy| xy % 2 == 1)
    }

    /// The fidelity for the split budget `(max_z, max_xy)`.
    pub fn split_fidelity(&self, max_z: usize, max_xy: usize) -> f64 {
        self.sum_where(|z, xy| z <= max_z && xy <= max_xy)
    }

    fn sum_where<F: Fn(usize, usize) -> bool>(&self, keep: F) -> f64 {
        self.weights
            .iter()
            .filter(|((z, xy), _)| keep(*z, *xy))
            .map(|(_, w)| *w)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Decomposes `|P psi_t|^2` over strings with at most `max_z` `Z` letters and
/// at most `max_xy` flip letters.
pub fn error_census(
    code: &StabilizerCode,
    psi0: &StateVector,
    psi_t: &StateVector,
    max_z: usize,
    max_xy: usize,
) -> Result<CensusReport> {
    if psi0.n_spins() != code.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: code.n_spins(),
            found: psi0.n_spins(),
        });
    }
    let basis = ErrorBasis::new(
        psi0,
        &Budget::Split {
            k_par: max_z,
            k_perp: max_xy,
        },
    )?;
    Ok(census_from(basis.strings(), &basis.amplitudes(psi_t)?))
}

pub(crate) fn census_from(strings: &[PauliString], amplitudes: &[Complex64]) -> CensusReport {
    let mut report = CensusReport::default();
    for (s, a) in strings.iter().zip(amplitudes) {
        report.add(s, a.norm_sqr());
    }
    report
}

/// Cached rows of an eigendecomposition for evaluating `Tr(sigma_s G(t))`
/// with `G(t) = D(t) exp(-iHt)` and `D(t)` an optional uniform-field phase
/// `exp(i b0 t sum_n sigma^z_n)`.
#[derive(Debug, Clone)]
pub struct OperatorWeights {
    n_spins: usize,
    dim: usize,
    values: Vec<f64>,
    rows: Vec<Complex64>,
}

impl OperatorWeights {
    pub fn new(spectrum: &Spectrum) -> Self {
        let dim = spectrum.dim();
        let mut rows = vec![ZERO; dim * dim];
        for k in 0..dim {
            for (i, v) in spectrum.vector(k).iter().enumerate() {
                rows[i * dim + k] = *v;
            }
        }
        Self {
            n_spins: dim.trailing_zeros() as usize,
            dim,
            values: spectrum.values().to_vec(),
            rows,
        }
    }

    /// `|Tr(sigma_s G(t))|^2 / 4^N` for each string.
    pub fn weights(&self, t: f64, frame_b0: Option<f64>, strings: &[PauliString]) -> Vec<f64> {
        let dim = self.dim;
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * t))
            .collect();
        let frame: Option<Vec<Complex64>> = frame_b0.map(|b0| {
            (0..dim)
                .map(|a| {
                    let m = self.n_spins as f64 - 2.0 * (a as u64).count_ones() as f64;
                    Complex64::from_polar(1.0, b0 * t * m)
                })
                .collect()
        });
        let mut by_mask: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (idx, s) in strings.iter().enumerate() {
            by_mask.entry(s.x_mask()).or_default().push(idx);
        }
        let mut out = vec![0.0; strings.len()];
        let mut diag = vec![ZERO; dim];
        for (x, members) in by_mask {
            // diag[i] = G[i ^ x, i]
            for (i, d) in diag.iter_mut().enumerate() {
                let a = i ^ x as usize;
                let ra = &self.rows[a * dim..(a + 1) * dim];
                let ri = &self.rows[i * dim..(i + 1) * dim];
                let mut acc = ZERO;
                for ((va, vi), p) in ra.iter().zip(ri).zip(&phases) {
                    acc += va * p * vi.conj();
                }
                *d = match &frame {
                    Some(f) => f[a] * acc,
                    None => acc,
                };
            }
            for idx in members {
                let s = &strings[idx];
                let trace: Complex64 = diag
                    .iter()
                    .enumerate()
                    .map(|(i, g)| s.amplitude(i as u64 ^ x) * g)
                    .sum();
                out[idx] = trace.norm_sqr() / (dim * dim) as f64;
            }
        }
        out
    }

    /// Sum of the weights of all strings in `budget`: the error-space fidelity
    /// of an ideal non-degenerate code for that budget.
    pub fn budget_fidelity(&self, t: f64, frame_b0: Option<f64>, budget: &Budget) -> f64 {
        let strings = budget.strings(self.n_spins);
        self.weights(t, frame_b0, &strings)
            .iter()
            .collect::<CompensatedSum>()
            .value()
            .clamp(0.0, 1.0)
    }

    /// Operator weights over `strings`, grouped like [`error_census`].
    pub fn census(&self, t: f64, frame_b0: Option<f64>, strings: &[PauliString]) -> CensusReport {
        let mut report = CensusReport::default();
        for (s, w) in strings.iter().zip(self.weights(t, frame_b0, strings)) {
            report.add(s, w);
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub n_samples: usize,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    /// `mean (1 - mean)`.
    pub bound: f64,
    /// Three standard errors of the variance estimate.
    pub slack: f64,
    pub passed: bool,
}

/// Tests `var F <= mean F (1 - mean F)` on samples taken at one time.
pub fn variance_check(samples: &[f64]) -> Result<VarianceReport> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(
            "variance check needs >= 2 samples".into(),
        ));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().collect::<CompensatedSum>().value() / n;
    let variance = samples
        .iter()
        .map(|x| (x - mean).powi(2))
        .collect::<CompensatedSum>()
        .value()
        / n;
    let m4 = samples
        .iter()
        .map(|x| (x - mean).powi(4))
        .collect::<CompensatedSum>()
        .value()
        / n;
    let slack = 3.0 * ((m4 - variance * variance).max(0.0) / n).sqrt();
    let bound = mean * (1.0 - mean);
    Ok(VarianceReport {
        n_samples: samples.len(),
        mean,
        variance,
        bound,
        slack,
        passed: variance <= bound + slack + 1e-12,
    })
}

/// The code-dependent remainder `mean F - F1`.
pub fn empirical_f2(mean_fidelity: f64, f1: f64) -> f64 {
    mean_fidelity - f1
}

/// Mean and standard error of the mean (sample variance).
pub fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().collect::<CompensatedSum>().value() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values
        .iter()
        .map(|x| (x - mean).powi(2))
        .collect::<CompensatedSum>()
        .value()
        / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{builtin_code, error_space_fidelity, LogicalState};
    use crate::lattice::{build_lattice, sample_hamiltonian, DisorderParams, Topology};
    use crate::pauli::enumerate_error_strings;
    use crate::propagator::{evolve, PropagationSettings, Propagator};

    #[test]
    fn site_basis_diagonalizes() {
        for b in [
            [0.3f64, -0.4, 0.5],
            [0.1, 0.2, -0.9],
            [0.0, 0.0, -1.0],
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
        ] {
            let len = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            let m = [
                [Complex64::new(b[2], 0.0), Complex64::new(b[0], -b[1])],
                [Complex64::new(b[0], b[1]), Complex64::new(-b[2], 0.0)],
            ];
            let basis = site_basis(b);
            for (v, e) in basis.iter().zip([len, -len]) {
                for r in 0..2 {
                    let mv = m[r][0] * v[0] + m[r][1] * v[1];
                    assert!((mv - e * v[r]).norm() < 1e-14, "{b:?}");
                }
            }
            let overlap = basis[0][0].conj() * basis[1][0] + basis[0][1].conj() * basis[1][1];
            assert!(overlap.norm() < 1e-14);
        }
    }

    #[test]
    fn pr_is_one_without_coupling() {
        let l = build_lattice(5, &Topology::Ring).unwrap();
        let h = sample_hamiltonian(&l, &DisorderParams::new(1.0, 0.0, 3), 0).unwrap();
        for pr in participation_ratio(&h, &l).unwrap() {
            assert!((pr - 1.0).abs() < 1e-9, "{pr}");
        }
        let big = build_lattice(13, &Topology::Ring).unwrap();
        assert!(participation_ratio(&HamiltonianSample::zero(&big), &big).is_err());
    }

    #[test]
    fn pr_within_bounds() {
        let l = build_lattice(6, &Topology::Ring).unwrap();
        let h = sample_hamiltonian(&l, &DisorderParams::new(1.0, 1.0, 3), 2).unwrap();
        for pr in participation_ratio(&h, &l).unwrap() {
            assert!((1.0 - 1e-9..=64.0 + 1e-9).contains(&pr));
        }
    }

    #[test]
    fn census_examples() {
        let code = builtin_code("five_qubit").unwrap();
        let psi0 = LogicalState::Zero.encode(&code).unwrap();
        let c = error_census(&code, &psi0, &psi0, 1, 0).unwrap();
        assert!((c.weight(0, 0) - 1.0).abs() < 1e-12);
        assert!(c.flip() < 1e-12);

        let l = build_lattice(5, &Topology::Ring).unwrap();
        let h = sample_hamiltonian(&l, &DisorderParams::new(1.0, 0.2, 9), 1).unwrap();
        let psi_t = evolve(&h, &l, &psi0, 0.4, &PropagationSettings::default()).unwrap();
        let c = error_census(&code, &psi0, &psi_t, 0, 1).unwrap();
        let f = error_space_fidelity(
            &code,
            &psi0,
            &psi_t,
            Some(&Budget::Split {
                k_par: 0,
                k_perp: 1,
            }),
        )
        .unwrap();
        assert!((c.total() - f).abs() < 1e-12);
        assert!((c.split_fidelity(0, 1) - f).abs() < 1e-12);
        assert!((c.phase_only() + c.flip() - c.total()).abs() < 1e-15);
    }

    #[test]
    fn operator_weights_sum_to_one() {
        let l = build_lattice(4, &Topology::Ring).unwrap();
        let h = sample_hamiltonian(&l, &DisorderParams::new(1.0, 0.5, 2).with_b0(3.0), 0).unwrap();
        let prop = Propagator::new(&h, &l, &PropagationSettings::default()).unwrap();
        let ow = OperatorWeights::new(prop.spectrum().unwrap());
        let all = enumerate_error_strings(4, 4, None);
        for frame in [None, Some(3.0)] {
            let w = ow.weights(0.7, frame, &all);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|x| *x >= 0.0));
        }
        assert!((ow.budget_fidelity(0.0, None, &Budget::Weight(0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_weights_match_direct_trace() {
        let l = build_lattice(3, &Topology::Ring).unwrap();
        let h = sample_hamiltonian(&l, &DisorderParams::new(1.0, 0.7, 5).with_b0(2.0), 3).unwrap();
        let settings = PropagationSettings::default();
        let prop = Propagator::new(&h, &l, &settings).unwrap();
        let ow = OperatorWeights::new(prop.spectrum().unwrap());
        let t = 0.9;
        let strings = enumerate_error_strings(3, 3, None);
        let w = ow.weights(t, Some(2.0), &strings);
        // columns of G from toggling-frame evolution of basis states
        let cols: Vec<StateVector> = (0..8)
            .map(|b| {
                crate::propagator::evolve_toggling(&h, &l, &StateVector::basis(3, b), t, &settings)
                    .unwrap()
            })
            .collect();
        for (s, wi) in strings.iter().zip(&w) {
            let mut tr = ZERO;
            for (b, col) in cols.iter().enumerate() {
                let sb =
                    crate::state::apply_pauli_string(s, &StateVector::basis(3, b as u64)).unwrap();
                tr += crate::state::inner_product(&sb, col).unwrap();
            }
            assert!((tr.norm_sqr() / 64.0 - wi).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn variance_examples() {
        let same = variance_check(&[0.7; 5]).unwrap();
        assert_eq!(same.variance, 0.0);
        assert!(same.passed);
        let coin = variance_check(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!((coin.variance - 0.25).abs() < 1e-15);
        assert!(coin.passed);
        assert!(variance_check(&[0.5]).is_err());
        assert_eq!(empirical_f2(1.0, 1.0), 0.0);
    }

    #[test]
    fn stats_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let (m, s) = mean_and_sem(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
