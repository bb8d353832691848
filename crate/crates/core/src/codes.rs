//! Stabilizer codes, encoded states and the error-space fidelity.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{enumerate_error_strings, Budget, Pauli, PauliString};
use crate::state::{apply_pauli_into, dot, norm, StateVector};

/// Threshold on `max |G_ij - delta_ij|` beyond which an error basis is rejected.
pub const GRAM_TOLERANCE: f64 = 1e-8;

/// Violations below this pass [`verify_nondegeneracy`].
pub const NONDEGENERACY_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct StabilizerCode {
    name: String,
    n_spins: usize,
    n_logical: usize,
    max_errors: usize,
    generators: Vec<PauliString>,
    codeword_basis: Vec<StateVector>,
}

impl StabilizerCode {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn n_logical(&self) -> usize {
        self.n_logical
    }

    pub fn max_errors(&self) -> usize {
        self.max_errors
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn codeword_basis(&self) -> &[StateVector] {
        &self.codeword_basis
    }

    pub fn bit_rate(&self) -> f64 {
        self.n_logical as f64 / self.n_spins as f64
    }

    pub fn error_rate(&self) -> f64 {
        self.max_errors as f64 / self.n_spins as f64
    }

    /// The weight budget `K` of the code.
    pub fn budget(&self) -> Budget {
        Budget::Weight(self.max_errors)
    }

    /// Largest deviation of any codeword from the +1 eigenspace of the generators.
    pub fn stabilizer_residual(&self) -> f64 {
        let mut scratch = vec![ZERO; 1 << self.n_spins];
        let mut worst = 0.0f64;
        for v in &self.codeword_basis {
            for g in &self.generators {
                apply_pauli_into(g, v.amplitudes(), &mut scratch);
                let r = scratch
                    .iter()
                    .zip(v.amplitudes())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Built from commuting Hermitian generators. The codeword basis is found
    /// by projecting computational basis states onto the code space in index
    /// order and orthonormalizing.
    pub fn from_generators(
        name: &str,
        n_spins: usize,
        generators: Vec<PauliString>,
        max_errors: usize,
    ) -> Result<Self> {
        check_generators(n_spins, &generators)?;
        let rank = gf2_rank(&generators);
        if rank != generators.len() {
            return Err(Error::InvalidCode(format!(
                "generators are dependent: rank {rank} of {}",
                generators.len()
            )));
        }
        let n_logical = n_spins - rank;
        let wanted = 1usize << n_logical;
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(wanted);
        for index in 0..1u64 << n_spins {
            let mut v = project_code_space(
                &generators,
                StateVector::basis(n_spins, index).into_amplitudes(),
            );
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            if norm(&v) > 1e-6 {
                basis.push(v);
                if basis.len() == wanted {
                    break;
                }
            }
        }
        if basis.len() != wanted {
            return Err(Error::InvalidCode(format!(
                "code space has dimension {} instead of {wanted}",
                basis.len()
            )));
        }
        let codeword_basis = basis
            .into_iter()
            .map(StateVector::normalized)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_string(),
            n_spins,
            n_logical,
            max_errors,
            generators,
            codeword_basis,
        })
    }

    /// One logical qubit: `|0>` is the projection of `|0...0>` and
    /// `|1> = logical_x |0>`.
    fn with_logical_pair(
        name: &str,
        generators: Vec<PauliString>,
        logical_x: &PauliString,
        max_errors: usize,
    ) -> Result<Self> {
        let n_spins = logical_x.n_spins();
        check_generators(n_spins, &generators)?;
        if gf2_rank(&generators) + 1 != n_spins {
            return Err(Error::InvalidCode(format!("{name} must encode one qubit")));
        }
        let zero = StateVector::normalized(project_code_space(
            &generators,
            StateVector::basis(n_spins, 0).into_amplitudes(),
        ))?;
        let mut one = vec![ZERO; zero.dim()];
        apply_pauli_into(logical_x, zero.amplitudes(), &mut one);
        let one = StateVector::new(one)?;
        Ok(Self {
            name: name.to_string(),
            n_spins,
            n_logical: 1,
            max_errors,
            generators,
            codeword_basis: vec![zero, one],
        })
    }

    /// Reads the text format
    ///
    /// ```text
    /// # repetition code
    /// n_spins 3
    /// max_errors 1
    /// Z0 Z1
    /// Z1 Z2
    /// ```
    ///
    /// Generator lines use the sparse text form of [`PauliString`].
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut n_spins = None;
        let mut max_errors = None;
        let mut lines = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or("");
            let numeric = |words: &mut std::str::SplitWhitespace<'_>| -> Result<usize> {
                words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::InvalidCode(format!("line {}: expected a count", no + 1)))
            };
            match key {
                "n_spins" => n_spins = Some(numeric(&mut words)?),
                "max_errors" => max_errors = Some(numeric(&mut words)?),
                _ => lines.push((no + 1, line.to_string())),
            }
        }
        let n_spins = n_spins.ok_or_else(|| Error::InvalidCode("missing n_spins line".into()))?;
        let max_errors =
            max_errors.ok_or_else(|| Error::InvalidCode("missing max_errors line".into()))?;
        let generators = lines
            .iter()
            .map(|(no, l)| {
                PauliString::parse(n_spins, l)
                    .map_err(|e| Error::InvalidCode(format!("line {no}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(name, n_spins, generators, max_errors)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::parse(&name, &text)
    }
}

fn check_generators(n_spins: usize, generators: &[PauliString]) -> Result<()> {
    if n_spins == 0 || n_spins > 20 {
        return Err(Error::InvalidCode(format!(
            "unsupported code size {n_spins}"
        )));
    }
    for g in generators {
        if g.n_spins() != n_spins {
            return Err(Error::InvalidCode(format!(
                "generator {g} has the wrong size"
            )));
        }
        if g.is_identity() {
            return Err(Error::InvalidCode(
                "identity is not a valid generator".into(),
            ));
        }
        if !g.phase().is_real() {
            return Err(Error::InvalidCode(format!(
                "generator {g} is not Hermitian"
            )));
        }
    }
    for (a, g) in generators.iter().enumerate() {
        for h in &generators[a + 1..] {
            if !g.commutes_with(h) {
                return Err(Error::InvalidCode(format!(
                    "generators {g} and {h} anticommute"
                )));
            }
        }
    }
    Ok(())
}

/// Rank over GF(2) of the symplectic vectors `(x | z)`.
fn gf2_rank(generators: &[PauliString]) -> usize {
    let mut rows: Vec<u64> = generators
        .iter()
        .map(|g| g.x_mask() | (g.z_mask() << 32))
        .collect();
    let mut rank = 0;
    for bit in 0..64 {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row >> bit & 1 == 1 {
                *row ^= p;
            }
        }
        rank += 1;
    }
    rank
}

/// Applies `prod_g (1 + g)/2`.
fn project_code_space(generators: &[PauliString], mut v: Vec<Complex64>) -> Vec<Complex64> {
    let mut scratch = vec![ZERO; v.len()];
    for g in generators {
        apply_pauli_into(g, &v, &mut scratch);
        v.iter_mut()
            .zip(&scratch)
            .for_each(|(a, b)| *a = 0.5 * (*a + b));
    }
    v
}

fn cyclic(pattern: &str) -> Result<Vec<PauliString>> {
    let n = pattern.len();
    (0..n - 1)
        .map(|shift| {
            let rotated: String = pattern[n - shift..].to_string() + &pattern[..n - shift];
            PauliString::from_dense(&rotated)
        })
        .collect()
}

fn uniform(n_spins: usize, p: Pauli) -> Result<PauliString> {
    let letters: Vec<_> = (0..n_spins).map(|s| (s, p)).collect();
    PauliString::from_letters(n_spins, &letters)
}

/// `five_qubit` (the perfect `[[5,1,3]]` code) or `steane` (`[[7,1,3]]`).
pub fn builtin_code(name: &str) -> Result<StabilizerCode> {
    match name {
        "five_qubit" => {
            StabilizerCode::with_logical_pair(name, cyclic("XZZXI")?, &uniform(5, Pauli::X)?, 1)
        }
        "steane" => {
            let generators = [
                "IIIXXXX", "IXXIIXX", "XIXIXIX", "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ",
            ]
            .iter()
            .map(|g| PauliString::from_dense(g))
            .collect::<Result<Vec<_>>>()?;
            StabilizerCode::with_logical_pair(name, generators, &uniform(7, Pauli::X)?, 1)
        }
        other => Err(Error::UnknownCode(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    pub strings_checked: usize,
    pub max_violation: f64,
    /// The string and codeword indices `(a, b)` of the largest violation.
    pub worst: Option<(PauliString, usize, usize)>,
}

impl NondegeneracyReport {
    pub fn passed(&self) -> bool {
        self.max_violation < NONDEGENERACY_TOLERANCE
    }
}

/// Checks `<a|s|b> = 0` for all codeword pairs and all strings of weight `1..=2K`.
pub fn verify_nondegeneracy(code: &StabilizerCode) -> NondegeneracyReport {
    let n = code.n_spins;
    let strings = enumerate_error_strings(n, (2 * code.max_errors).min(n), None);
    let mut scratch = vec![ZERO; 1 << n];
    let mut report = NondegeneracyReport {
        strings_checked: 0,
        max_violation: 0.0,
        worst: None,
    };
    for s in strings.iter().filter(|s| !s.is_identity()) {
        report.strings_checked += 1;
        for (b, vb) in code.codeword_basis.iter().enumerate() {
            apply_pauli_into(s, vb.amplitudes(), &mut scratch);
            for (a, va) in code.codeword_basis.iter().enumerate() {
                let v = dot(va.amplitudes(), &scratch).norm();
                if v > report.max_violation {
                    report.max_violation = v;
                    report.worst = Some((s.clone(), a, b));
                }
            }
        }
    }
    report
}

/// `sum_k amplitudes_k |k>` over the codeword basis.
pub fn encode_state(
    code: &StabilizerCode,
    logical_amplitudes: &[Complex64],
) -> Result<StateVector> {
    let k = code.codeword_basis.len();
    if logical_amplitudes.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: logical_amplitudes.len(),
        });
    }
    let n = norm(logical_amplitudes);
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n));
    }
    let mut out = vec![ZERO; 1 << code.n_spins];
    for (c, v) in logical_amplitudes.iter().zip(&code.codeword_basis) {
        out.iter_mut()
            .zip(v.amplitudes())
            .for_each(|(o, a)| *o += c * a);
    }
    StateVector::normalized(out)
}

/// Cardinal states of the first logical qubit, other logical qubits in `|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogicalState {
    #[default]
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl LogicalState {
    pub const ALL: [LogicalState; 6] = [
        LogicalState::Zero,
        LogicalState::One,
        LogicalState::Plus,
        LogicalState::Minus,
        LogicalState::PlusI,
        LogicalState::MinusI,
    ];

    pub fn amplitudes(self, n_logical: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; 1 << n_logical];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            LogicalState::Zero => (Complex64::new(1.0, 0.0), ZERO),
            LogicalState::One => (ZERO, Complex64::new(1.0, 0.0)),
            LogicalState::Plus => (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
            LogicalState::Minus => (Complex64::new(h, 0.0), Complex64::new(-h, 0.0)),
            LogicalState::PlusI => (Complex64::new(h, 0.0), Complex64::new(0.0, h)),
            LogicalState::MinusI => (Complex64::new(h, 0.0), Complex64::new(0.0, -h)),
        };
        out[0] = a;
        if n_logical > 0 {
            out[1] = b;
        }
        out
    }

    pub fn encode(self, code: &StabilizerCode) -> Result<StateVector> {
        encode_state(code, &self.amplitudes(code.n_logical))
    }
}

impl FromStr for LogicalState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "0" | "zero" => LogicalState::Zero,
            "1" | "one" => LogicalState::One,
            "+" | "plus" => LogicalState::Plus,
            "-" | "minus" => LogicalState::Minus,
            "+i" | "plus_i" => LogicalState::PlusI,
            "-i" | "minus_i" => LogicalState::MinusI,
            other => return Err(Error::Config(format!("unknown logical state {other:?}"))),
        })
    }
}

impl std::fmt::Display for LogicalState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LogicalState::Zero => "zero",
            LogicalState::One => "one",
            LogicalState::Plus => "plus",
            LogicalState::Minus => "minus",
            LogicalState::PlusI => "plus_i",
            LogicalState::MinusI => "minus_i",
        })
    }
}

/// The states `sigma_s psi0` for every string in a budget, verified orthonormal.
#[derive(Debug, Clone)]
pub struct ErrorBasis {
    strings: Vec<PauliString>,
    states: Vec<Vec<Complex64>>,
    gram_residual: f64,
}

impl ErrorBasis {
    pub fn new(psi0: &StateVector, budget: &Budget) -> Result<Self> {
        let strings = budget.strings(psi0.n_spins());
        let states: Vec<Vec<Complex64>> = strings
            .iter()
            .map(|s| {
                let mut v = vec![ZERO; psi0.dim()];
                apply_pauli_into(s, psi0.amplitudes(), &mut v);
                v
            })
            .collect();
        let mut residual = 0.0f64;
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((dot(a, b) - target).norm());
            }
        }
        if residual > GRAM_TOLERANCE {
            return Err(Error::DegenerateErrorBasis { residual });
        }
        Ok(Self {
            strings,
            states,
            gram_residual: residual,
        })
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    /// `<sigma_s psi0 | psi>` for each string, in basis order.
    pub fn amplitudes(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        let dim = self.states.first().map_or(0, Vec::len);
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            });
        }
        Ok(self
            .states
            .iter()
            .map(|s| dot(s, psi.amplitudes()))
            .collect())
    }

    /// `|P psi|^2`, clamped to `[0, 1]`.
    pub fn fidelity(&self, psi: &StateVector) -> Result<f64> {
        let total: f64 = self.amplitudes(psi)?.iter().map(|a| a.norm_sqr()).sum();
        Ok(total.clamp(0.0, 1.0))
    }

    /// `P psi = sum_s <sigma_s psi0|psi> sigma_s psi0`, not normalized.
    pub fn project(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; psi.dim()];
        for (c, s) in self.amplitudes(psi)?.iter().zip(&self.states) {
            out.iter_mut().zip(s).for_each(|(o, v)| *o += c * v);
        }
        Ok(out)
    }
}

/// Probability that ideal recovery returns `psi_t` to `psi0`. The budget
/// defaults to all strings of weight at most the code's `K`.
pub fn error_space_fidelity(
    code: &StabilizerCode,
    psi0: &StateVector,
    psi_t: &StateVector,
    budget: Option<&Budget>,
) -> Result<f64> {
    if psi0.n_spins() != code.n_spins || psi_t.n_spins() != code.n_spins {
        return Err(Error::DimensionMismatch {
            expected: code.n_spins,
            found: if psi0.n_spins() != code.n_spins {
                psi0.n_spins()
            } else {
                psi_t.n_spins()
            },
        });
    }
    let default = code.budget();
    ErrorBasis::new(psi0, budget.unwrap_or(&default))?.fidelity(psi_t)
}

/// `p` on every spin.
pub fn transversal(n_spins: usize, p: Pauli) -> Result<PauliString> {
    uniform(n_spins, p)
}
