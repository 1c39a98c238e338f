//! Exact Pauli-string algebra.
//!
//! Words are stored in the symplectic encoding: two bit-vectors `x`, `z`
//! (one bit per qubit) plus a phase exponent `t` mod 4, representing the
//! operator `i^t · Π_k X_k^{x_k} Z_k^{z_k}`. The letter `Y` carries the fixed
//! convention `Y = i·X·Z`, so the letterwise word `⊗_k σ^{a_k}` has intrinsic
//! exponent equal to its Y-count. Products and commutation checks are O(n/64);
//! phases stay exact (powers of `i`) end to end.
//!
//! Qubit `k` corresponds to bit `k` of a basis index; string forms print the
//! most-significant qubit (index n-1) first, with an optional phase prefix
//! from `{+, -, +i, -i}`.

use crate::error::{Error, Result};
use crate::spectral::DenseOperator;
use crate::DENSE_QUBIT_LIMIT;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

/// Single-qubit Pauli letter. `I` is permitted only where a caller says so.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// (x, z) bits of the symplectic encoding.
    #[inline]
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            _ => Err(Error::Validation(format!("unknown Pauli letter '{c}'"))),
        }
    }

    /// The standard 2x2 matrix.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Exact Gaussian integer, used for traces and matching sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };

    pub fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }

    /// Multiply by i^k.
    pub fn times_i_pow(self, k: u8) -> Self {
        match k % 4 {
            0 => self,
            1 => GaussInt::new(-self.im, self.re),
            2 => GaussInt::new(-self.re, -self.im),
            _ => GaussInt::new(self.im, -self.re),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
}

impl std::ops::Add for GaussInt {
    type Output = GaussInt;
    fn add(self, rhs: GaussInt) -> GaussInt {
        GaussInt::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl std::ops::Mul for GaussInt {
    type Output = GaussInt;
    fn mul(self, rhs: GaussInt) -> GaussInt {
        GaussInt::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

/// Global phase factor of a Pauli word, a power of i.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    /// Prefix used in string forms; empty for +1.
    pub fn prefix(self) -> &'static str {
        match self {
            Phase::PlusOne => "",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        }
    }
}

fn blocks(n: usize) -> usize {
    n.div_ceil(64)
}

fn bit(bits: &[u64], q: usize) -> bool {
    bits[q / 64] >> (q % 64) & 1 == 1
}

fn set_bit(bits: &mut [u64], q: usize, v: bool) {
    if v {
        bits[q / 64] |= 1u64 << (q % 64);
    } else {
        bits[q / 64] &= !(1u64 << (q % 64));
    }
}

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Full-length Pauli word with exact phase: `i^phase_exp · Π_k X_k^{x_k} Z_k^{z_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    n: usize,
    phase_exp: u8,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PhasedPauli {
    pub fn identity(n: usize) -> Self {
        PhasedPauli {
            n,
            phase_exp: 0,
            x: vec![0; blocks(n)],
            z: vec![0; blocks(n)],
        }
    }

    /// The operator `⊗_k σ^{a_k}` (letterwise word, coefficient +1).
    pub fn from_letters(letters: &[Pauli]) -> Self {
        let n = letters.len();
        let mut w = PhasedPauli::identity(n);
        let mut y_count = 0u32;
        for (q, &l) in letters.iter().enumerate() {
            let (xb, zb) = l.xz();
            set_bit(&mut w.x, q, xb);
            set_bit(&mut w.z, q, zb);
            if l == Pauli::Y {
                y_count += 1;
            }
        }
        w.phase_exp = (y_count % 4) as u8;
        w
    }

    /// Letterwise word on `n` qubits with `letter` placed at qubit `q`.
    pub fn single(n: usize, q: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[q] = letter;
        PhasedPauli::from_letters(&letters)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn letter_at(&self, q: usize) -> Pauli {
        Pauli::from_xz(bit(&self.x, q), bit(&self.z, q))
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n).map(|q| self.letter_at(q)).collect()
    }

    pub fn y_count(&self) -> u32 {
        popcount_and(&self.x, &self.z)
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones())
            .sum()
    }

    pub fn is_identity_word(&self) -> bool {
        self.x.iter().all(|&b| b == 0) && self.z.iter().all(|&b| b == 0)
    }

    /// Coefficient in front of the plain letterwise word `⊗ σ^{a_k}`.
    pub fn coefficient_phase(&self) -> Phase {
        let yc = (self.y_count() % 4) as u8;
        Phase::from_exponent((self.phase_exp + 4 - yc) % 4)
    }

    pub fn with_coefficient(mut self, phase: Phase) -> Self {
        let yc = (self.y_count() % 4) as u8;
        self.phase_exp = (yc + phase.exponent()) % 4;
        self
    }

    /// Exact group product including the accumulated phase.
    pub fn product(&self, rhs: &PhasedPauli) -> Result<PhasedPauli> {
        if self.n != rhs.n {
            return Err(Error::Dimension(format!(
                "pauli product on {} vs {} qubits",
                self.n, rhs.n
            )));
        }
        // X^x1 Z^z1 · X^x2 Z^z2 = (-1)^{z1·x2} X^{x1⊕x2} Z^{z1⊕z2}
        let swaps = popcount_and(&self.z, &rhs.x);
        let phase_exp = ((self.phase_exp as u32 + rhs.phase_exp as u32 + 2 * swaps) % 4) as u8;
        let x = self.x.iter().zip(&rhs.x).map(|(a, b)| a ^ b).collect();
        let z = self.z.iter().zip(&rhs.z).map(|(a, b)| a ^ b).collect();
        Ok(PhasedPauli {
            n: self.n,
            phase_exp,
            x,
            z,
        })
    }

    /// True iff the words anticommute (odd number of differing non-identity sites).
    pub fn anticommutes_with(&self, rhs: &PhasedPauli) -> Result<bool> {
        if self.n != rhs.n {
            return Err(Error::Dimension(format!(
                "commutation check on {} vs {} qubits",
                self.n, rhs.n
            )));
        }
        let s = popcount_and(&self.x, &rhs.z) + popcount_and(&self.z, &rhs.x);
        Ok(s % 2 == 1)
    }

    /// Exact trace: `2^n · i^t` when the word is the identity, else 0.
    pub fn trace(&self) -> GaussInt {
        if !self.is_identity_word() {
            return GaussInt::ZERO;
        }
        assert!(self.n < 63, "exact trace overflows i64 beyond 62 qubits");
        GaussInt::new(1i64 << self.n, 0).times_i_pow(self.phase_exp)
    }

    /// Dense 2^n x 2^n matrix. Hermitian when the coefficient phase is real.
    pub fn materialize(&self) -> Result<DenseOperator> {
        self.materialize_with_limit(DENSE_QUBIT_LIMIT)
    }

    pub fn materialize_with_limit(&self, limit: usize) -> Result<DenseOperator> {
        if self.n > limit {
            return Err(Error::Capacity(format!(
                "dense materialization of {} qubits exceeds limit {limit}",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let phase = Phase::from_exponent(self.phase_exp).to_complex();
        let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
        let xmask = if self.n == 0 {
            0
        } else {
            low_mask_u64(&self.x, self.n)
        };
        let zmask = if self.n == 0 {
            0
        } else {
            low_mask_u64(&self.z, self.n)
        };
        for b in 0..dim {
            let row = b ^ xmask as usize;
            let sign = if ((b as u64 & zmask).count_ones()).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            mat[(row, b)] = phase * sign;
        }
        DenseOperator::from_matrix(self.n, mat)
    }
}

/// Collapse a bit-vector into a single u64 (valid for n <= 64, which covers
/// every dense path in this crate).
fn low_mask_u64(bits: &[u64], n: usize) -> u64 {
    debug_assert!(n <= 64);
    bits[0]
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient_phase().prefix())?;
        for q in (0..self.n).rev() {
            write!(f, "{}", self.letter_at(q).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PhasedPauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i").or_else(|| s.strip_prefix("i")) {
            (Phase::PlusI, r)
        } else if let Some(r) = s.strip_prefix("-i").or_else(|| s.strip_prefix("\u{2212}i")) {
            (Phase::MinusI, r)
        } else if let Some(r) = s.strip_prefix('-').or_else(|| s.strip_prefix('\u{2212}')) {
            (Phase::MinusOne, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::PlusOne, r)
        } else {
            (Phase::PlusOne, s)
        };
        if rest.is_empty() {
            return Err(Error::Validation("empty Pauli word".into()));
        }
        let mut letters = Vec::with_capacity(rest.len());
        for c in rest.chars().rev() {
            letters.push(Pauli::from_char(c)?);
        }
        Ok(PhasedPauli::from_letters(&letters).with_coefficient(phase))
    }
}

/// Exact group product of two phased words.
pub fn pauli_product(a: &PhasedPauli, b: &PhasedPauli) -> Result<PhasedPauli> {
    a.product(b)
}

/// True iff the two words anticommute.
pub fn anticommutes(a: &PhasedPauli, b: &PhasedPauli) -> Result<bool> {
    a.anticommutes_with(b)
}

/// Exact trace of a product of single-qubit letters; value in {0, ±2, ±2i}.
///
/// The empty product is the identity with trace 2.
pub fn trace_of_letter_sequence(seq: &[Pauli]) -> GaussInt {
    let mut pe: u32 = 0;
    let mut x = false;
    let mut z = false;
    for &l in seq {
        let (xl, zl) = l.xz();
        if l == Pauli::Y {
            pe += 1;
        }
        if z && xl {
            pe += 2;
        }
        x ^= xl;
        z ^= zl;
    }
    if x || z {
        GaussInt::ZERO
    } else {
        GaussInt::new(2, 0).times_i_pow((pe % 4) as u8)
    }
}

/// Dense matrix of a phased word (capacity-checked).
pub fn materialize_word(word: &PhasedPauli, limit: usize) -> Result<DenseOperator> {
    word.materialize_with_limit(limit)
}

/// A p-local term: strictly increasing qubit tuple plus a letter per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliTerm {
    n: usize,
    qubits: Vec<u16>,
    letters: Vec<Pauli>,
}

impl PauliTerm {
    /// Standard-model term: all letters non-identity.
    pub fn new(n: usize, qubits: Vec<u16>, letters: Vec<Pauli>) -> Result<Self> {
        if letters.contains(&Pauli::I) {
            return Err(Error::Validation(
                "identity letter in a standard p-local term".into(),
            ));
        }
        Self::new_allowing_identity(n, qubits, letters)
    }

    /// Term permitted to carry identity letters (adjusted model).
    pub fn new_allowing_identity(n: usize, qubits: Vec<u16>, letters: Vec<Pauli>) -> Result<Self> {
        if qubits.len() != letters.len() {
            return Err(Error::Dimension(format!(
                "{} qubits vs {} letters",
                qubits.len(),
                letters.len()
            )));
        }
        if qubits.is_empty() || qubits.len() > n {
            return Err(Error::Domain(format!(
                "term locality {} out of range for n={n}",
                qubits.len()
            )));
        }
        if !qubits.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation(
                "qubit tuple not strictly increasing".into(),
            ));
        }
        if qubits.iter().any(|&q| q as usize >= n) {
            return Err(Error::Domain("qubit index out of range".into()));
        }
        Ok(PauliTerm { n, qubits, letters })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn locality(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[u16] {
        &self.qubits
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Embed into a full-length letterwise word.
    pub fn to_word(&self) -> PhasedPauli {
        let mut letters = vec![Pauli::I; self.n];
        for (&q, &l) in self.qubits.iter().zip(&self.letters) {
            letters[q as usize] = l;
        }
        PhasedPauli::from_letters(&letters)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_word())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> PhasedPauli {
        s.parse().unwrap()
    }

    #[test]
    fn product_x_times_y_is_iz() {
        let prod = word("X").product(&word("Y")).unwrap();
        assert_eq!(prod.letters(), vec![Pauli::Z]);
        assert_eq!(prod.coefficient_phase(), Phase::PlusI);
    }

    #[test]
    fn product_is_involution_on_x() {
        let prod = word("X").product(&word("X")).unwrap();
        assert!(prod.is_identity_word());
        assert_eq!(prod.coefficient_phase(), Phase::PlusOne);
    }

    #[test]
    fn product_xx_times_yy_is_minus_zz() {
        let prod = word("XX").product(&word("YY")).unwrap();
        assert_eq!(prod.letters(), vec![Pauli::Z, Pauli::Z]);
        assert_eq!(prod.coefficient_phase(), Phase::MinusOne);
    }

    #[test]
    fn product_dimension_mismatch() {
        assert!(word("X").product(&word("XX")).is_err());
    }

    #[test]
    fn anticommutation_cases() {
        // X⊗I vs Y⊗I: one overlapping anticommuting site.
        assert!(anticommutes(&word("IX"), &word("IY")).unwrap());
        // X⊗X vs Y⊗Y: two anticommuting sites, so the words commute.
        assert!(!anticommutes(&word("XX"), &word("YY")).unwrap());
        // Disjoint support commutes.
        assert!(!anticommutes(&word("IXX"), &word("ZII")).unwrap());
    }

    #[test]
    fn letter_sequence_traces() {
        assert_eq!(
            trace_of_letter_sequence(&[Pauli::X, Pauli::X]),
            GaussInt::new(2, 0)
        );
        assert_eq!(
            trace_of_letter_sequence(&[Pauli::X, Pauli::Y]),
            GaussInt::ZERO
        );
        assert_eq!(
            trace_of_letter_sequence(&[Pauli::X, Pauli::Y, Pauli::Z]),
            GaussInt::new(0, 2)
        );
        assert_eq!(trace_of_letter_sequence(&[]), GaussInt::new(2, 0));
    }

    #[test]
    fn materialize_z_and_zz() {
        let z = word("Z").materialize().unwrap();
        assert_eq!(z.matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(z.matrix()[(1, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(z.matrix()[(0, 1)], Complex64::new(0.0, 0.0));

        let zz = word("ZZ").materialize().unwrap();
        let diag: Vec<f64> = (0..4).map(|k| zz.matrix()[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn materialize_minus_x() {
        let mx = word("-X").materialize().unwrap();
        assert_eq!(mx.matrix()[(0, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(mx.matrix()[(1, 0)], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn materialize_capacity() {
        let w = PhasedPauli::identity(15);
        assert!(matches!(w.materialize(), Err(Error::Capacity(_))));
    }

    #[test]
    fn real_phase_words_materialize_hermitian() {
        for s in ["XYZ", "-YY", "IZX", "-Z"] {
            let w: PhasedPauli = s.parse().unwrap();
            let defect = w.materialize().unwrap().hermiticity_defect();
            assert_eq!(defect, 0.0, "{s}");
        }
    }

    #[test]
    fn string_round_trip() {
        for s in ["XYZ", "-XYZ", "+iZI", "-iYY", "IIII", "Z"] {
            let w: PhasedPauli = s.parse().unwrap();
            let printed = w.to_string();
            let back: PhasedPauli = printed.parse().unwrap();
            assert_eq!(w, back, "round trip failed for {s} -> {printed}");
        }
        // Normalised prefix: "+i" is kept, bare "i" is accepted on parse.
        assert_eq!(word("iX"), word("+iX"));
    }

    #[test]
    fn term_validation() {
        assert!(PauliTerm::new(4, vec![0, 2], vec![Pauli::X, Pauli::Z]).is_ok());
        assert!(PauliTerm::new(4, vec![2, 0], vec![Pauli::X, Pauli::Z]).is_err());
        assert!(PauliTerm::new(4, vec![0, 0], vec![Pauli::X, Pauli::Z]).is_err());
        assert!(PauliTerm::new(4, vec![0, 5], vec![Pauli::X, Pauli::Z]).is_err());
        assert!(PauliTerm::new(4, vec![0, 1], vec![Pauli::I, Pauli::Z]).is_err());
        assert!(PauliTerm::new_allowing_identity(4, vec![0, 1], vec![Pauli::I, Pauli::Z]).is_ok());
    }

    #[test]
    fn term_embeds_msb_first() {
        let t = PauliTerm::new(5, vec![1, 3], vec![Pauli::X, Pauli::Z]).unwrap();
        assert_eq!(t.to_string(), "IZIXI");
    }
}
