//! Exact algebra of n-qubit Pauli strings and sparse linear combinations of them.
//!
//! Phases are tracked as powers of `i`, never as floating point, so commutators
//! of commuting strings cancel exactly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn code(self) -> u8 {
        self as u8
    }

    fn from_code(c: u8) -> Pauli {
        match c {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    /// Single-site product `a·b = phase · letter`.
    pub fn product(a: Pauli, b: Pauli) -> (Pauli, Phase) {
        match (a, b) {
            (Pauli::I, x) | (x, Pauli::I) => (x, Phase::ONE),
            (x, y) if x == y => (Pauli::I, Phase::ONE),
            (x, y) => {
                let third = Pauli::from_code(6 - x.code() - y.code());
                // XY = iZ, YZ = iX, ZX = iY
                if (y.code() + 3 - x.code()) % 3 == 1 {
                    (third, Phase::I)
                } else {
                    (third, Phase::MINUS_I)
                }
            }
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A fourth root of unity `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn from_power(k: u8) -> Phase {
        Phase(k % 4)
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// Tensor product of single-site Paulis on an `n`-site chain. Identity sites are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    letters: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, letters: Vec::new() }
    }

    /// Build from `(site, letter)` pairs. Identity letters are dropped.
    pub fn new(n: usize, letters: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut out: Vec<(usize, Pauli)> = Vec::new();
        for (site, p) in letters {
            if site >= n {
                return Err(Error::Contract(format!("site {site} out of range for n = {n}")));
            }
            if p != Pauli::I {
                out.push((site, p));
            }
        }
        out.sort_by_key(|&(s, _)| s);
        if out.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Contract("duplicate site in Pauli string".into()));
        }
        Ok(PauliString { n, letters: out })
    }

    pub fn single(n: usize, site: usize, p: Pauli) -> Result<Self> {
        Self::new(n, [(site, p)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[(usize, Pauli)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    pub fn get(&self, site: usize) -> Pauli {
        match self.letters.binary_search_by_key(&site, |&(s, _)| s) {
            Ok(i) => self.letters[i].1,
            Err(_) => Pauli::I,
        }
    }

    /// `(leftmost site, width)` of the support window; `(0, 0)` for the identity.
    pub fn window(&self) -> (usize, usize) {
        match (self.letters.first(), self.letters.last()) {
            (Some(&(a, _)), Some(&(b, _))) => (a, b - a + 1),
            _ => (0, 0),
        }
    }

    fn check_same_n(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// `self · other = phase · result`.
    pub fn multiply(&self, other: &PauliString) -> Result<(PauliString, Phase)> {
        self.check_same_n(other)?;
        Ok(self.multiply_unchecked(other))
    }

    pub(crate) fn multiply_unchecked(&self, other: &PauliString) -> (PauliString, Phase) {
        let mut out = Vec::with_capacity(self.letters.len() + other.letters.len());
        let mut phase = Phase::ONE;
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.letters, &other.letters);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(&(sa, pa)), Some(&(sb, pb))) if sa == sb => {
                    let (p, ph) = Pauli::product(pa, pb);
                    phase = phase.mul(ph);
                    if p != Pauli::I {
                        out.push((sa, p));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(sa, pa)), Some(&(sb, _))) if sa < sb => {
                    out.push((sa, pa));
                    i += 1;
                }
                (Some(&(sa, pa)), None) => {
                    out.push((sa, pa));
                    i += 1;
                }
                (_, Some(&(sb, pb))) => {
                    out.push((sb, pb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        (PauliString { n: self.n, letters: out }, phase)
    }

    /// Number of sites where both strings carry different non-identity letters.
    pub fn clash_count(&self, other: &PauliString) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        let (a, b) = (&self.letters, &other.letters);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    if a[i].1 != b[j].1 {
                        count += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.clash_count(other) % 2 == 0
    }

    /// Bit masks for the computational-basis action: `p|x> = i^ny (-1)^{|x & z|} |x ^ xm>`.
    /// Site 0 is the most significant bit.
    pub fn masks(&self) -> (usize, usize, u8) {
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u8);
        for &(s, p) in &self.letters {
            let bit = 1usize << (self.n - 1 - s);
            match p {
                Pauli::X => xm |= bit,
                Pauli::Z => zm |= bit,
                Pauli::Y => {
                    xm |= bit;
                    zm |= bit;
                    ny += 1;
                }
                Pauli::I => {}
            }
        }
        (xm, zm, ny % 4)
    }

    pub fn dense_matrix(&self) -> Result<CMat> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        let (xm, zm, ny) = self.masks();
        let base = Phase::from_power(ny).to_complex();
        let mut m = CMat::zeros(dim, dim);
        for x in 0..dim {
            let sign = if (x & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(x ^ xm, x)] = base * sign;
        }
        Ok(m)
    }

    /// Parse the textual format `"X0 Y3"`, `"Z4"` or `"I"`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('I') => Pauli::I,
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                _ => return Err(Error::Parse { line: 0, message: format!("bad Pauli token `{tok}`") }),
            };
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse { line: 0, message: format!("bad site index in `{tok}`") })?;
            if site >= n {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("site {site} out of range for n = {n}"),
                });
            }
            if letters.iter().any(|&(s, _)| s == site) {
                return Err(Error::Parse { line: 0, message: format!("site {site} repeated") });
            }
            letters.push((site, letter));
        }
        PauliString::new(n, letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "I");
        }
        for (k, &(s, p)) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.letter(), s)?;
        }
        Ok(())
    }
}

/// Canonical order: identity first, then by leftmost support site, window width,
/// and letters across the window (I < X < Y < Z).
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| other.is_identity().cmp(&self.is_identity()))
            .then_with(|| self.window().cmp(&other.window()))
            .then_with(|| {
                let (left, width) = self.window();
                (left..left + width)
                    .map(|s| self.get(s))
                    .cmp((left..left + width).map(|s| other.get(s)))
            })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All strings whose support fits a contiguous window of at most `k` sites, in canonical order.
pub fn enumerate_geometric_k_local(n: usize, k: usize, include_identity: bool) -> Result<Vec<PauliString>> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::Contract(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    let mut out = Vec::new();
    if include_identity {
        out.push(PauliString::identity(n));
    }
    for left in 0..n {
        for width in 1..=k.min(n - left) {
            let interior = width.saturating_sub(2);
            for first in Pauli::NON_IDENTITY {
                let lasts: &[Pauli] = if width == 1 { &[Pauli::I] } else { &Pauli::NON_IDENTITY };
                for &last in lasts {
                    for code in 0..4usize.pow(interior as u32) {
                        let mut letters = vec![(left, first)];
                        let mut c = code;
                        let mut middle = Vec::with_capacity(interior);
                        for _ in 0..interior {
                            middle.push(Pauli::from_code((c % 4) as u8));
                            c /= 4;
                        }
                        middle.reverse();
                        letters.extend(middle.into_iter().enumerate().map(|(o, p)| (left + 1 + o, p)));
                        if width > 1 {
                            letters.push((left + width - 1, last));
                        }
                        out.push(PauliString::new(n, letters)?);
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Every Pauli string on `n` sites (4^n of them, or 4^n - 1 without identity), canonical order.
pub fn all_strings(n: usize, include_identity: bool) -> Result<Vec<PauliString>> {
    enumerate_geometric_k_local(n, n, include_identity)
}

/// Largest site count for which dense `2^n x 2^n` matrices are built.
pub fn dense_limit() -> usize {
    std::env::var("HAMLEARN_DENSE_LIMIT")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(12)
}

pub(crate) fn check_dense_limit(n: usize) -> Result<()> {
    let limit = dense_limit();
    if n > limit {
        return Err(Error::Resource(format!("n = {n} exceeds the dense limit {limit}")));
    }
    Ok(())
}

/// Sparse complex combination of Pauli strings. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliOperator {
    n: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperator {
    pub fn zero(n: usize) -> Self {
        PauliOperator { n, terms: BTreeMap::new() }
    }

    pub fn from_string(p: PauliString) -> Self {
        let n = p.n;
        let mut op = PauliOperator::zero(n);
        op.terms.insert(p, Complex64::new(1.0, 0.0));
        op
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Result<Self> {
        let mut op = PauliOperator::zero(n);
        for (p, c) in terms {
            if p.n != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n });
            }
            op.add_term(p, c);
        }
        Ok(op)
    }

    pub fn from_real_terms(n: usize, terms: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        Self::from_terms(n, terms.into_iter().map(|(p, c)| (p, Complex64::new(c, 0.0))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(p) {
            Entry::Vacant(v) => {
                if c != Complex64::new(0.0, 0.0) {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == Complex64::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_same_n(&self, other: &PauliOperator) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &PauliOperator) -> Result<Self> {
        self.check_same_n(other)?;
        let mut out = self.clone();
        for (p, &c) in &other.terms {
            out.add_term(p.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliOperator) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = PauliOperator::zero(self.n);
        for (p, &c) in &self.terms {
            out.add_term(p.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &PauliOperator) -> Result<Self> {
        self.check_same_n(other)?;
        let mut out = PauliOperator::zero(self.n);
        for (p, &a) in &self.terms {
            for (q, &b) in &other.terms {
                let (r, ph) = p.multiply_unchecked(q);
                out.add_term(r, a * b * ph.to_complex());
            }
        }
        Ok(out)
    }

    /// `[self, other]`; commuting string pairs contribute nothing, anticommuting ones `2·p·q`.
    pub fn commutator(&self, other: &PauliOperator) -> Result<Self> {
        self.check_same_n(other)?;
        let mut out = PauliOperator::zero(self.n);
        for (p, &a) in &self.terms {
            for (q, &b) in &other.terms {
                if p.commutes_with(q) {
                    continue;
                }
                let (r, ph) = p.multiply_unchecked(q);
                out.add_term(r, a * b * ph.to_complex() * 2.0);
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = PauliOperator::zero(self.n);
        for (p, &c) in &self.terms {
            out.add_term(p.clone(), c.conj());
        }
        out
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    /// Coefficients on `basis`, real parts only.
    pub fn real_coefficients(&self, basis: &[PauliString]) -> Vec<f64> {
        basis.iter().map(|p| self.coefficient(p).re).collect()
    }

    pub fn dense_matrix(&self) -> Result<CMat> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for (p, &c) in &self.terms {
            let (xm, zm, ny) = p.masks();
            let base = Phase::from_power(ny).to_complex() * c;
            for x in 0..dim {
                let sign = if (x & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(x ^ xm, x)] += base * sign;
            }
        }
        Ok(m)
    }

    /// Pauli decomposition `Σ_p tr(p·m)/2^n p`, dropping coefficients with modulus below `drop_tol`.
    pub fn from_dense(n: usize, m: &CMat, drop_tol: f64) -> Result<Self> {
        check_dense_limit(n)?;
        let dim = 1usize << n;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Contract(format!("expected a {dim}x{dim} matrix")));
        }
        let mut out = PauliOperator::zero(n);
        for p in all_strings(n, true)? {
            let (xm, zm, ny) = p.masks();
            let base = Phase::from_power(ny).to_complex();
            let mut acc = Complex64::new(0.0, 0.0);
            // tr(p m) = Σ_x <x|p m|x> = Σ_x conj-free: p[x, x^xm] m[x^xm, x]
            for x in 0..dim {
                let y = x ^ xm;
                let sign = if (y & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += base * sign * m[(y, x)];
            }
            let coeff = acc / dim as f64;
            if coeff.norm() > drop_tol {
                out.add_term(p, coeff);
            }
        }
        Ok(out)
    }
}

impl From<PauliString> for PauliOperator {
    fn from(p: PauliString) -> Self {
        PauliOperator::from_string(p)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (p, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}*({p})", c.re)?;
            } else {
                write!(f, "({}{:+}i)*({p})", c.re, c.im)?;
            }
        }
        Ok(())
    }
}
