//! Normalized state vectors over `2^N` computational basis states.
//!
//! Site `n` is bit `n` of the basis index; bit value 0 is the `sigma^z = +1`
//! eigenstate.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Allowed deviation of the norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_spins: usize,
    amplitudes: Vec<Complex64>,
}

fn spins_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "state length {len} is not a power of two"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_spins = spins_for_len(amplitudes.len())?;
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_spins = spins_for_len(amplitudes.len())?;
        let norm = norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        let inv = 1.0 / norm;
        amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    pub fn basis(n_spins: usize, index: u64) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << n_spins];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Self {
            n_spins,
            amplitudes,
        }
    }

    /// Haar-distributed random state.
    pub fn random<R: Rng + ?Sized>(n_spins: usize, rng: &mut R) -> Self {
        let amplitudes = (0..1usize << n_spins)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amplitudes).expect("gaussian vector is non-zero")
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other,
            });
        }
        Ok(())
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>`, conjugating the left argument.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.check_dim(b.dim())?;
    Ok(dot(&a.amplitudes, &b.amplitudes))
}

#[inline]
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Writes `s * psi` into `out` by bit manipulation.
pub(crate) fn apply_pauli_into(s: &PauliString, psi: &[Complex64], out: &mut [Complex64]) {
    let x = s.x_mask();
    for (i, o) in out.iter_mut().enumerate() {
        let source = (i as u64) ^ x;
        *o = s.amplitude(source) * psi[source as usize];
    }
}

/// `s * psi`, normalized like `psi`.
pub fn apply_pauli_string(s: &PauliString, psi: &StateVector) -> Result<StateVector> {
    if s.n_spins() != psi.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: psi.n_spins(),
            found: s.n_spins(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    apply_pauli_into(s, &psi.amplitudes, &mut out);
    Ok(StateVector {
        n_spins: psi.n_spins,
        amplitudes: out,
    })
}

/// `<psi| s |psi>`.
pub fn expectation(s: &PauliString, psi: &StateVector) -> Result<Complex64> {
    inner_product(psi, &apply_pauli_string(s, psi)?)
}
