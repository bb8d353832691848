//! Matrix-free action of a sampled Hamiltonian on state vectors.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{HamiltonianSample, LatticeSpec};
use crate::state::StateVector;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
struct EdgeTerm {
    lo: usize,
    hi: usize,
    j: [[f64; 3]; 3],
}

/// A sample bound to its lattice, ready to act on vectors.
///
/// For output index `i` with site signs `s_n = (-1)^{i_n}` the action is
///
/// ```text
/// (B.sigma psi)_i = B^z s_n psi_i + (B^x - i B^y s_n) psi_{i ^ n}
/// ```
///
/// and two-site terms group the same way by which of the two bits flip.
#[derive(Debug, Clone)]
pub struct HamiltonianOperator {
    n_spins: usize,
    fields: Vec<[f64; 3]>,
    edges: Vec<EdgeTerm>,
    b0: f64,
}

impl HamiltonianOperator {
    pub fn new(h: &HamiltonianSample, lattice: &LatticeSpec) -> Result<Self> {
        h.check_shape(lattice)?;
        let edges = lattice
            .edges()
            .iter()
            .zip(&h.couplings)
            .map(|(&(lo, hi), j)| EdgeTerm { lo, hi, j: *j })
            .collect();
        Ok(Self {
            n_spins: lattice.n_spins(),
            fields: h.fields.clone(),
            edges,
            b0: h.b0,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_spins
    }

    /// Calls `emit(column, coefficient)` for every non-zero entry of row `i`.
    #[inline]
    fn row<F: FnMut(usize, Complex64)>(&self, i: usize, mut emit: F) {
        let sign = |site: usize| if (i >> site) & 1 == 0 { 1.0 } else { -1.0 };
        let mut diag = 0.0;
        for (n, b) in self.fields.iter().enumerate() {
            let s = sign(n);
            diag += (b[2] + self.b0) * s;
            let flip = Complex64::new(b[0], -b[1] * s);
            if flip != ZERO {
                emit(i ^ (1 << n), flip);
            }
        }
        for e in &self.edges {
            let (sn, sm) = (sign(e.lo), sign(e.hi));
            let j = &e.j;
            diag += 2.0 * j[2][2] * sn * sm;
            let lo_only = Complex64::new(2.0 * j[0][2] * sm, -2.0 * j[1][2] * sn * sm);
            if lo_only != ZERO {
                emit(i ^ (1 << e.lo), lo_only);
            }
            let hi_only = Complex64::new(2.0 * j[2][0] * sn, -2.0 * j[2][1] * sn * sm);
            if hi_only != ZERO {
                emit(i ^ (1 << e.hi), hi_only);
            }
            let both = Complex64::new(
                2.0 * (j[0][0] - j[1][1] * sn * sm),
                -2.0 * (j[0][1] * sm + j[1][0] * sn),
            );
            if both != ZERO {
                emit(i ^ (1 << e.lo) ^ (1 << e.hi), both);
            }
        }
        if diag != 0.0 {
            emit(i, Complex64::new(diag, 0.0));
        }
    }

    /// `out = H psi`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(psi.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let fill = |offset: usize, chunk: &mut [Complex64]| {
            for (k, o) in chunk.iter_mut().enumerate() {
                let mut acc = ZERO;
                self.row(offset + k, |col, c| acc += c * psi[col]);
                *o = acc;
            }
        };
        #[cfg(feature = "parallel")]
        if self.n_spins >= 14 {
            use rayon::prelude::*;
            const CHUNK: usize = 1 << 12;
            out.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| fill(c * CHUNK, chunk));
            return;
        }
        fill(0, out);
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        self.apply_into(psi, &mut out);
        out
    }

    /// Dense matrix with `H[(row, col)]`.
    pub fn to_dense(&self) -> Mat<Complex64> {
        let d = self.dim();
        let mut m = Mat::<Complex64>::zeros(d, d);
        for i in 0..d {
            self.row(i, |col, c| m[(i, col)] += c);
        }
        m
    }

    /// Upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let fields: f64 = self
            .fields
            .iter()
            .map(|b| (b[0] * b[0] + b[1] * b[1] + (b[2] + self.b0).powi(2)).sqrt())
            .sum();
        let couplings: f64 = self
            .edges
            .iter()
            .map(|e| 2.0 * e.j.iter().flatten().map(|x| x.abs()).sum::<f64>())
            .sum();
        fields + couplings
    }
}

/// `H psi` without materializing `H`. The result is not normalized.
pub fn apply_hamiltonian(
    h: &HamiltonianSample,
    lattice: &LatticeSpec,
    psi: &StateVector,
) -> Result<Vec<Complex64>> {
    if psi.n_spins() != lattice.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: lattice.n_spins(),
            found: psi.n_spins(),
        });
    }
    Ok(HamiltonianOperator::new(h, lattice)?.apply(psi.amplitudes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, sample_hamiltonian, DisorderParams, Topology};
    use crate::state::dot;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_sample_gives_zero_vector() {
        let l = build_lattice(3, &Topology::Ring).unwrap();
        let h = HamiltonianSample::zero(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = StateVector::random(3, &mut rng);
        let out = apply_hamiltonian(&h, &l, &psi).unwrap();
        assert!(out.iter().all(|a| *a == ZERO));
    }

    #[test]
    fn z_field_eigenstate() {
        let l = build_lattice(2, &Topology::Ring).unwrap();
        let mut h = HamiltonianSample::zero(&l);
        h.fields[0] = [0.0, 0.0, 0.7];
        let out = apply_hamiltonian(&h, &l, &StateVector::basis(2, 0)).unwrap();
        assert_eq!(out[0], c(0.7, 0.0));
        assert!(out[1..].iter().all(|a| *a == ZERO));
    }

    #[test]
    fn zz_edge_uses_factor_two() {
        let l = build_lattice(2, &Topology::Ring).unwrap();
        let mut h = HamiltonianSample::zero(&l);
        h.couplings[0][2][2] = 0.3;
        let out = apply_hamiltonian(&h, &l, &StateVector::basis(2, 0)).unwrap();
        assert!((out[0] - c(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermitian_action() {
        let l = build_lattice(5, &Topology::Ring).unwrap();
        let p = DisorderParams::new(1.3, 0.8, 9).with_xy_symmetric(false);
        let h = sample_hamiltonian(&l, &p, 0).unwrap();
        let op = HamiltonianOperator::new(&h, &l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = StateVector::random(5, &mut rng);
        let b = StateVector::random(5, &mut rng);
        let ahb = dot(a.amplitudes(), &op.apply(b.amplitudes()));
        let bha = dot(b.amplitudes(), &op.apply(a.amplitudes()));
        assert!((ahb - bha.conj()).norm() < 1e-12);
    }

    #[test]
    fn dense_matches_matrix_free() {
        let l = build_lattice(4, &Topology::Ring).unwrap();
        let p = DisorderParams::new(1.0, 1.0, 3).with_b0(0.4);
        let h = sample_hamiltonian(&l, &p, 5).unwrap();
        let op = HamiltonianOperator::new(&h, &l).unwrap();
        let dense = op.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = StateVector::random(4, &mut rng);
        let mf = op.apply(psi.amplitudes());
        for (i, v) in mf.iter().enumerate() {
            let row: Complex64 = (0..16).map(|j| dense[(i, j)] * psi.amplitudes()[j]).sum();
            assert!((row - v).norm() < 1e-13);
        }
        assert!(op.norm_bound() > 0.0);
    }
}
