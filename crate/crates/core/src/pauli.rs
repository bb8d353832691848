//! Pauli strings as `(x, z)` bit masks with an exact quarter-turn phase.
//!
//! Site `n` corresponds to bit `n` of both masks. A letter is `X` when only
//! the x bit is set, `Z` when only the z bit is set and `Y` when both are.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Element of `{1, i, -1, -i}` stored as a power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_quarter_turns(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A phase times a tensor product of Pauli letters on `n_spins` sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_spins: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n_spins: usize) -> Self {
        Self {
            n_spins,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        }
    }

    /// Builds a string from `(site, letter)` pairs. Sites must be distinct.
    pub fn from_letters(n_spins: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_spins);
        for &(site, p) in letters {
            if site >= n_spins || site >= 64 {
                return Err(Error::PauliParse(format!(
                    "site {site} out of range for {n_spins} spins"
                )));
            }
            let bit = 1u64 << site;
            if (s.x | s.z) & bit != 0 {
                return Err(Error::PauliParse(format!("site {site} repeated")));
            }
            let (xb, zb) = p.bits();
            if xb {
                s.x |= bit;
            }
            if zb {
                s.z |= bit;
            }
        }
        Ok(s)
    }

    /// Parses a dense letter string such as `"XZZXI"` (site 0 first).
    pub fn from_dense(letters: &str) -> Result<Self> {
        let chars: Vec<char> = letters.chars().collect();
        let pairs = chars
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 'I')
            .map(|(i, c)| parse_letter(*c).map(|p| (i, p)))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::PauliParse(letters.to_string()))?;
        Self::from_letters(chars.len(), &pairs)
    }

    /// Parses the sparse text form (`"X0 Z3"`, `"-i Y2"`, `"I"`).
    pub fn parse(n_spins: usize, text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace().peekable();
        let phase = match tokens.peek().copied() {
            Some("+") | Some("+1") => Some(Phase::ONE),
            Some("-") | Some("-1") => Some(Phase::MINUS_ONE),
            Some("i") | Some("+i") => Some(Phase::I),
            Some("-i") => Some(Phase::MINUS_I),
            _ => None,
        };
        if phase.is_some() {
            tokens.next();
        }
        let mut pairs = Vec::new();
        for tok in tokens {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let letter = chars
                .next()
                .ok_or_else(|| Error::PauliParse(text.to_string()))?;
            let p = parse_letter(letter).map_err(|_| Error::PauliParse(text.to_string()))?;
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::PauliParse(text.to_string()))?;
            pairs.push((site, p));
        }
        let mut s = Self::from_letters(n_spins, &pairs)?;
        s.phase = phase.unwrap_or(Phase::ONE);
        Ok(s)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn letter(&self, site: usize) -> Pauli {
        let bit = 1u64 << site;
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> usize {
        (self.x & self.z).count_ones() as usize
    }

    /// Number of `Z` letters.
    pub fn z_count(&self) -> usize {
        (self.z & !self.x).count_ones() as usize
    }

    /// Number of letters that flip a spin (`X` or `Y`).
    pub fn xy_count(&self) -> usize {
        self.x.count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &PauliString) -> PauliString {
        assert_eq!(
            self.n_spins, other.n_spins,
            "Pauli strings on different sizes"
        );
        // Each letter is i^{xz} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{z1.x2}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let turns = (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        PauliString {
            n_spins: self.n_spins,
            x,
            z,
            phase: self.phase * other.phase * Phase::from_quarter_turns(turns),
        }
    }

    /// Phase picked up when acting on basis state `index`:
    /// `s |index> = amplitude(index) |index ^ x_mask>`.
    #[inline]
    pub fn amplitude(&self, index: u64) -> Complex64 {
        // Y|b> = i (-1)^b |b^1>, Z|b> = (-1)^b |b>.
        let turns = self.phase.0 as u32
            + (self.x & self.z).count_ones()
            + 2 * (index & self.z).count_ones();
        Phase::from_quarter_turns(turns).to_complex()
    }

    /// Single-site letters in site order.
    pub fn letters(&self) -> Vec<(usize, Pauli)> {
        (0..self.n_spins)
            .map(|s| (s, self.letter(s)))
            .filter(|(_, p)| *p != Pauli::I)
            .collect()
    }
}

fn parse_letter(c: char) -> Result<Pauli> {
    match c {
        'I' => Ok(Pauli::I),
        'X' => Ok(Pauli::X),
        'Y' => Ok(Pauli::Y),
        'Z' => Ok(Pauli::Z),
        _ => Err(Error::PauliParse(c.to_string())),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.0 {
            0 => "",
            1 => "i ",
            2 => "- ",
            _ => "-i ",
        };
        f.write_str(prefix)?;
        if self.is_identity() {
            return f.write_str("I");
        }
        let body: Vec<String> = self
            .letters()
            .into_iter()
            .map(|(s, p)| format!("{}{}", p.letter(), s))
            .collect();
        f.write_str(&body.join(" "))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Dense letter form; the string length fixes the number of spins.
    fn from_str(s: &str) -> Result<Self> {
        PauliString::from_dense(s.trim())
    }
}

/// Which error strings make up an error space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// All strings of weight at most `k`.
    Weight(usize),
    /// At most `k_par` `Z` letters and at most `k_perp` `X`/`Y` letters.
    Split { k_par: usize, k_perp: usize },
}

impl Budget {
    pub fn max_weight(&self) -> usize {
        match *self {
            Budget::Weight(k) => k,
            Budget::Split { k_par, k_perp } => k_par + k_perp,
        }
    }

    pub fn admits(&self, s: &PauliString) -> bool {
        match *self {
            Budget::Weight(k) => s.weight() <= k,
            Budget::Split { k_par, k_perp } => s.z_count() <= k_par && s.xy_count() <= k_perp,
        }
    }

    pub fn strings(&self, n_spins: usize) -> Vec<PauliString> {
        match *self {
            Budget::Weight(k) => enumerate_error_strings(n_spins, k.min(n_spins), None),
            Budget::Split { k_par, k_perp } => enumerate_error_strings(
                n_spins,
                (k_par + k_perp).min(n_spins),
                Some((k_par, k_perp)),
            ),
        }
    }
}

/// All strings of weight `<= max_weight`, each unordered support once.
///
/// Order: by weight, then supports in lexicographic order, then letters in
/// `X < Y < Z` order. With `split_budget = (k_par, k_perp)` only strings with
/// at most `k_par` `Z` letters and at most `k_perp` flip letters are kept.
pub fn enumerate_error_strings(
    n_spins: usize,
    max_weight: usize,
    split_budget: Option<(usize, usize)>,
) -> Vec<PauliString> {
    let max_weight = max_weight.min(n_spins);
    let mut out = Vec::new();
    for w in 0..=max_weight {
        let mut sites: Vec<usize> = (0..w).collect();
        loop {
            let mut letters = vec![0usize; w];
            loop {
                let pairs: Vec<(usize, Pauli)> = sites
                    .iter()
                    .zip(&letters)
                    .map(|(&s, &l)| (s, Pauli::NON_IDENTITY[l]))
                    .collect();
                let s =
                    PauliString::from_letters(n_spins, &pairs).expect("distinct in-range sites");
                let keep = match split_budget {
                    Some((k_par, k_perp)) => s.z_count() <= k_par && s.xy_count() <= k_perp,
                    None => true,
                };
                if keep {
                    out.push(s);
                }
                if !next_letters(&mut letters) {
                    break;
                }
            }
            if !next_combination(&mut sites, n_spins) {
                break;
            }
        }
    }
    out
}

fn next_letters(letters: &mut [usize]) -> bool {
    for l in letters.iter_mut().rev() {
        if *l < 2 {
            *l += 1;
            return true;
        }
        *l = 0;
    }
    false
}

fn next_combination(sites: &mut [usize], n: usize) -> bool {
    let k = sites.len();
    for i in (0..k).rev() {
        if sites[i] < n - k + i {
            sites[i] += 1;
            for j in i + 1..k {
                sites[j] = sites[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    type M2 = [[Complex64; 2]; 2];

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn matrix(p: Pauli) -> M2 {
        let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
        match p {
            Pauli::I => [[o, z], [z, o]],
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[o, z], [z, -o]],
        }
    }

    fn matmul(a: &M2, b: &M2) -> M2 {
        let mut m = [[c(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for col in 0..2 {
                m[r][col] = a[r][0] * b[0][col] + a[r][1] * b[1][col];
            }
        }
        m
    }

    #[test]
    fn single_site_products_match_matrices() {
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for &a in &all {
            for &b in &all {
                let sa = PauliString::from_letters(1, &[(0, a)]).unwrap();
                let sb = PauliString::from_letters(1, &[(0, b)]).unwrap();
                let prod = sa.compose(&sb);
                let expect = matmul(&matrix(a), &matrix(b));
                let got_letter = matrix(prod.letter(0));
                let ph = prod.phase().to_complex();
                for r in 0..2 {
                    for col in 0..2 {
                        assert!((ph * got_letter[r][col] - expect[r][col]).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn amplitude_matches_matrices() {
        for &p in &Pauli::NON_IDENTITY {
            let s = PauliString::from_letters(1, &[(0, p)]).unwrap();
            let m = matrix(p);
            for b in 0..2u64 {
                let out = b ^ s.x_mask();
                assert!((s.amplitude(b) - m[out as usize][b as usize]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn strings_square_to_identity() {
        for s in enumerate_error_strings(4, 4, None) {
            let sq = s.compose(&s);
            assert!(sq.is_identity());
            assert_eq!(sq.phase(), Phase::ONE);
        }
    }

    #[test]
    fn text_form_round_trip() {
        let s = PauliString::parse(5, "X0 Z3").unwrap();
        assert_eq!(s.to_string(), "X0 Z3");
        assert_eq!(PauliString::identity(3).to_string(), "I");
        let neg = PauliString::parse(4, "-i Y2").unwrap();
        assert_eq!(neg.phase(), Phase::MINUS_I);
        assert_eq!(neg.to_string(), "-i Y2");
        assert_eq!(PauliString::parse(4, &neg.to_string()).unwrap(), neg);
        assert_eq!(
            "XZZXI".parse::<PauliString>().unwrap().to_string(),
            "X0 Z1 Z2 X3"
        );
        assert!(PauliString::parse(3, "X0 X0").is_err());
        assert!(PauliString::parse(3, "Q1").is_err());
        assert!(PauliString::parse(3, "X7").is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_error_strings(5, 1, None).len(), 16);
        assert_eq!(enumerate_error_strings(7, 2, None).len(), 211);
        let only_id = enumerate_error_strings(3, 0, None);
        assert_eq!(only_id.len(), 1);
        assert!(only_id[0].is_identity());
    }

    fn brute_force(n: usize, max_w: usize) -> HashSet<(u64, u64)> {
        let mut set = HashSet::new();
        for code in 0..4usize.pow(n as u32) {
            let mut pairs = Vec::new();
            let mut c = code;
            for site in 0..n {
                let l = c % 4;
                c /= 4;
                if l > 0 {
                    pairs.push((site, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][l]));
                }
            }
            if pairs.len() <= max_w {
                let s = PauliString::from_letters(n, &pairs).unwrap();
                set.insert((s.x_mask(), s.z_mask()));
            }
        }
        set
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 1..=5 {
            for w in 0..=3.min(n) {
                let strings = enumerate_error_strings(n, w, None);
                let got: HashSet<_> = strings.iter().map(|s| (s.x_mask(), s.z_mask())).collect();
                assert_eq!(got.len(), strings.len(), "duplicates for n={n} w={w}");
                assert_eq!(got, brute_force(n, w), "n={n} w={w}");
            }
        }
    }

    #[test]
    fn split_budget_filters_letter_types() {
        let strings = enumerate_error_strings(4, 2, Some((2, 0)));
        assert!(strings.iter().all(|s| s.xy_count() == 0));
        assert_eq!(strings.len(), 1 + 4 + 6);
        let mixed = Budget::Split {
            k_par: 1,
            k_perp: 1,
        }
        .strings(3);
        // identity, 3 Z, 6 single flips, and Z on one site with a flip on another
        assert_eq!(mixed.len(), 1 + 3 + 6 + 3 * 2 * 2);
    }

    #[test]
    fn commutation() {
        let a = PauliString::parse(2, "X0 X1").unwrap();
        let b = PauliString::parse(2, "Z0 Z1").unwrap();
        let c = PauliString::parse(2, "Z0").unwrap();
        assert!(a.commutes_with(&b));
        assert!(!a.commutes_with(&c));
    }
}
