//! Pauli-string combinatorics and the sparse k-local Hamiltonian representation.
//!
//! A Hamiltonian is stored as a map from Pauli strings to real coefficients,
//! `H = sum_P h_P P`, with absent keys meaning exactly zero. Only strings of
//! weight `1..=k` may carry a coefficient: weight 0 is excluded because
//! Hamiltonians are kept traceless, weights above `k` by the locality bound.
//!
//! Conversions to the dense backend place site 0 as the leftmost Kronecker
//! factor, so the string `ZX` maps to the matrix `Z (x) X`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, MAX_QUBITS};

/// Single-site Pauli label. The derived order `I < X < Y < Z` is the digit
/// order used everywhere strings are enumerated or compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn digit(self) -> u64 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    fn from_digit(d: u64) -> Pauli {
        match d & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// An n-site word over `{I, X, Y, Z}`. The weight (number of non-identity
/// sites) is fixed at construction; `sites` is never mutated afterwards.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    sites: Vec<Pauli>,
    weight: usize,
}

impl PauliString {
    pub fn new(sites: Vec<Pauli>) -> Self {
        let weight = sites.iter().filter(|p| **p != Pauli::I).count();
        PauliString { sites, weight }
    }

    pub fn identity(n: usize) -> Self {
        PauliString { sites: vec![Pauli::I; n], weight: 0 }
    }

    /// The string acting as `p` on `site` and as identity elsewhere.
    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        assert!(site < n, "site {site} out of range for {n} qubits");
        let mut sites = vec![Pauli::I; n];
        sites[site] = p;
        PauliString::new(sites)
    }

    pub fn sites(&self) -> &[Pauli] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Number of non-identity sites (recomputable from `sites`).
    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn is_identity(&self) -> bool {
        self.weight == 0
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(s, _)| s)
    }

    /// Base-4 integer with site 0 as the least significant digit. This is the
    /// canonical enumeration/comparison order: all strings acting on site 0
    /// come before those first acting on site 1, and so on.
    pub fn index(&self) -> u64 {
        self.sites
            .iter()
            .enumerate()
            .map(|(s, p)| p.digit() << (2 * s))
            .sum()
    }

    pub fn from_index(n: usize, index: u64) -> Self {
        let sites = (0..n).map(|s| Pauli::from_digit(index >> (2 * s))).collect();
        PauliString::new(sites)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.sites.len(), self.index()).cmp(&(other.sites.len(), other.index()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.sites {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sites = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::InvalidParameter(format!("invalid Pauli letter '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<_>>>()?;
        if sites.is_empty() {
            return Err(Error::InvalidParameter("empty Pauli word".into()));
        }
        Ok(PauliString::new(sites))
    }
}

/// All Pauli strings on `n` sites with weight `1..=k`, in index order
/// (base-4 value with site 0 least significant). For `n = 2, k = 1` this is
/// `XI, YI, ZI, IX, IY, IZ`.
pub fn enumerate_local_paulis(n: usize, k: usize) -> Result<Vec<PauliString>> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: n, max: MAX_QUBITS });
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "locality k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let mut out = Vec::with_capacity(local_pauli_count(n, k) as usize);
    for index in 1..(1u64 << (2 * n)) {
        let p = PauliString::from_index(n, index);
        if p.weight() <= k {
            out.push(p);
        }
    }
    Ok(out)
}

/// `sum_{l=1}^{k} 3^l C(n, l)`, the number of non-identity strings of weight
/// at most `k`. Including identity the count stays below `100 n^k`.
pub fn local_pauli_count(n: usize, k: usize) -> u64 {
    (1..=k.min(n)).map(|l| 3u64.pow(l as u32) * binomial(n as u64, l as u64)).sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Dense `2^n x 2^n` matrix of a Pauli string, site 0 as the leftmost tensor
/// factor. Pauli strings have one nonzero per row: row `i` holds the entry
/// `<i|P|i ^ flip>` where `flip` collects the X/Y sites.
pub fn pauli_dense(p: &PauliString) -> Result<DenseOperator> {
    let n = p.n_sites();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: n, max: MAX_QUBITS });
    }
    let mut op = DenseOperator::zeros(n)?;
    accumulate_pauli(&mut op, p, 1.0);
    Ok(op)
}

/// Adds `h * P` onto `op` entry by entry.
fn accumulate_pauli(op: &mut DenseOperator, p: &PauliString, h: f64) {
    let n = p.n_sites();
    let dim = 1usize << n;
    let mut flip = 0usize;
    for (s, pauli) in p.sites().iter().enumerate() {
        if matches!(pauli, Pauli::X | Pauli::Y) {
            flip |= 1 << (n - 1 - s);
        }
    }
    let mat = op.matrix_mut();
    for row in 0..dim {
        let col = row ^ flip;
        let mut val = Complex64::new(h, 0.0);
        for (s, pauli) in p.sites().iter().enumerate() {
            let bit = (row >> (n - 1 - s)) & 1;
            val *= match pauli {
                Pauli::I | Pauli::X => Complex64::new(1.0, 0.0),
                // <1|Y|0> = i, <0|Y|1> = -i
                Pauli::Y => {
                    if bit == 1 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    }
                }
                Pauli::Z => {
                    if bit == 1 {
                        Complex64::new(-1.0, 0.0)
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                }
            };
        }
        mat[(row, col)] += val;
    }
}

/// Normalized Pauli coefficient `Tr[P A] / 2^n` of an arbitrary operator.
pub fn pauli_coefficient(a: &DenseOperator, p: &PauliString) -> Result<Complex64> {
    let n = p.n_sites();
    if a.dim() != 1usize << n {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} does not match 2^{n} for Pauli word {p}",
            a.dim()
        )));
    }
    let dim = a.dim();
    let mut flip = 0usize;
    for (s, pauli) in p.sites().iter().enumerate() {
        if matches!(pauli, Pauli::X | Pauli::Y) {
            flip |= 1 << (n - 1 - s);
        }
    }
    let mat = a.matrix();
    let mut tr = Complex64::new(0.0, 0.0);
    for row in 0..dim {
        let col = row ^ flip;
        let mut val = Complex64::new(1.0, 0.0);
        for (s, pauli) in p.sites().iter().enumerate() {
            let bit = (row >> (n - 1 - s)) & 1;
            val *= match pauli {
                Pauli::I | Pauli::X => Complex64::new(1.0, 0.0),
                Pauli::Y => {
                    if bit == 1 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    }
                }
                Pauli::Z => {
                    if bit == 1 {
                        Complex64::new(-1.0, 0.0)
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                }
            };
        }
        // Tr[P A] picks A[col, row] against P[row, col].
        tr += val * mat[(col, row)];
    }
    Ok(tr / dim as f64)
}

/// Traceless k-local Hamiltonian as a sparse real coefficient map.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalHamiltonian {
    n: usize,
    k: usize,
    coeffs: BTreeMap<PauliString, f64>,
}

impl LocalHamiltonian {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits { qubits: n, max: MAX_QUBITS });
        }
        if k < 1 || k > n {
            return Err(Error::InvalidParameter(format!(
                "locality k = {k} must satisfy 1 <= k <= n = {n}"
            )));
        }
        Ok(LocalHamiltonian { n, k, coeffs: BTreeMap::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sets `h_P`. Zero coefficients are dropped so that absence means exactly 0.
    pub fn set_coefficient(&mut self, p: PauliString, h: f64) -> Result<()> {
        if p.n_sites() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "Pauli word {p} has {} sites, Hamiltonian has {}",
                p.n_sites(),
                self.n
            )));
        }
        if p.is_identity() {
            return Err(Error::InvalidParameter(
                "identity coefficient must stay 0 (traceless convention)".into(),
            ));
        }
        if p.weight() > self.k {
            return Err(Error::InvalidParameter(format!(
                "weight {} of {p} exceeds locality bound k = {}",
                p.weight(),
                self.k
            )));
        }
        if !h.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite coefficient for {p}")));
        }
        if h == 0.0 {
            self.coeffs.remove(&p);
        } else {
            self.coeffs.insert(p, h);
        }
        Ok(())
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    /// Stored (nonzero) terms in index order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.coeffs.iter().map(|(p, h)| (p, *h))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, h| m.max(h.abs()))
    }

    pub fn is_coefficient_bounded(&self, bound: f64) -> bool {
        self.max_abs_coefficient() <= bound
    }

    /// Coefficient-space Frobenius norm `sqrt(sum_P h_P^2)`; equals the
    /// normalized Frobenius norm of the dense operator by Parseval.
    pub fn frobenius_norm(&self) -> f64 {
        self.coeffs.values().map(|h| h * h).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(_, h)| **h * factor != 0.0)
            .map(|(p, h)| (p.clone(), h * factor))
            .collect();
        LocalHamiltonian { n: self.n, k: self.k, coeffs }
    }

    /// `self - other`; the difference is max(k, k')-local.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract Hamiltonians on {} and {} qubits",
                self.n, other.n
            )));
        }
        let mut out = LocalHamiltonian::new(self.n, self.k.max(other.k))?;
        for (p, h) in self.terms() {
            out.set_coefficient(p.clone(), h - other.coefficient(p))?;
        }
        for (p, h) in other.terms() {
            if self.coefficient(p) == 0.0 {
                out.set_coefficient(p.clone(), -h)?;
            }
        }
        Ok(out)
    }

    /// Dense matrix `sum_P h_P P`; Hermitian and traceless by construction.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let mut op = DenseOperator::zeros(self.n)?;
        for (p, h) in self.terms() {
            accumulate_pauli(&mut op, p, h);
        }
        Ok(op)
    }

    /// Random instance: every weight-`<= k` string enters independently with
    /// probability `sparsity`, coefficient uniform in `[-coeff_bound, coeff_bound]`.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        k: usize,
        coeff_bound: f64,
        sparsity: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if coeff_bound <= 0.0 || !coeff_bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coefficient bound must be positive, got {coeff_bound}"
            )));
        }
        if !(0.0..=1.0).contains(&sparsity) {
            return Err(Error::InvalidParameter(format!(
                "sparsity must lie in [0, 1], got {sparsity}"
            )));
        }
        let mut h = LocalHamiltonian::new(n, k)?;
        for p in enumerate_local_paulis(n, k)? {
            let include = rng.gen::<f64>() < sparsity;
            if include {
                let c = rng.gen_range(-coeff_bound..=coeff_bound);
                h.set_coefficient(p, c)?;
            }
        }
        Ok(h)
    }

    /// Deterministic wrapper around [`LocalHamiltonian::random`].
    pub fn random_seeded(n: usize, k: usize, coeff_bound: f64, sparsity: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        LocalHamiltonian::random(n, k, coeff_bound, sparsity, &mut rng)
    }

    /// Parses the one-term-per-line text format, e.g.
    ///
    /// ```text
    /// # transverse field
    /// XI 0.25
    /// ZZ -1.0
    /// ```
    ///
    /// `n` is taken from the word length, `k` from the largest weight.
    pub fn parse(text: &str) -> Result<Self> {
        let terms = parse_terms(text)?;
        let n = match terms.first() {
            Some((p, _)) => p.n_sites(),
            None => {
                return Err(Error::Parse {
                    line: 0,
                    msg: "no terms found; use parse_with_shape for an explicitly shaped zero Hamiltonian"
                        .into(),
                })
            }
        };
        let k = terms.iter().map(|(p, _)| p.weight()).max().unwrap_or(1).max(1);
        let mut h = LocalHamiltonian::new(n, k)?;
        for (p, c) in terms {
            h.set_coefficient(p, c)?;
        }
        Ok(h)
    }

    /// Like [`LocalHamiltonian::parse`] but with the shape fixed by the caller;
    /// an empty file yields the zero Hamiltonian.
    pub fn parse_with_shape(text: &str, n: usize, k: usize) -> Result<Self> {
        let mut h = LocalHamiltonian::new(n, k)?;
        for (p, c) in parse_terms(text)? {
            h.set_coefficient(p, c)?;
        }
        Ok(h)
    }

    /// Inverse of [`LocalHamiltonian::parse`]: one `<pauli-word> <coefficient>`
    /// line per stored term, in index order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, h) in self.terms() {
            out.push_str(&format!("{p} {h}\n"));
        }
        out
    }
}

fn parse_terms(text: &str) -> Result<Vec<(PauliString, f64)>> {
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap();
        let coeff = parts
            .next()
            .ok_or_else(|| Error::Parse { line: idx + 1, msg: format!("missing coefficient after '{word}'") })?;
        if parts.next().is_some() {
            return Err(Error::Parse { line: idx + 1, msg: "expected exactly '<pauli-word> <coefficient>'".into() });
        }
        let p: PauliString = word.parse().map_err(|e| Error::Parse { line: idx + 1, msg: format!("{e}") })?;
        let c: f64 = coeff
            .parse()
            .map_err(|_| Error::Parse { line: idx + 1, msg: format!("invalid coefficient '{coeff}'") })?;
        if !c.is_finite() {
            return Err(Error::Parse { line: idx + 1, msg: format!("non-finite coefficient '{coeff}'") });
        }
        terms.push((p, c));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, schatten_p_normalized};
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Test-side oracle: dense Pauli via an explicit Kronecker chain of 2x2s.
    fn kron_oracle(p: &PauliString) -> DMatrix<Complex64> {
        let base = |p: Pauli| -> DMatrix<Complex64> {
            let e = match p {
                Pauli::I => [c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
                Pauli::X => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
                Pauli::Y => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
                Pauli::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
            };
            DMatrix::from_row_slice(2, 2, &e)
        };
        let mut m = base(p.sites()[0]);
        for site in &p.sites()[1..] {
            m = m.kronecker(&base(*site));
        }
        m
    }

    #[test]
    fn enumeration_order_and_counts() {
        let ps = enumerate_local_paulis(2, 1).unwrap();
        let words: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        assert_eq!(words, ["XI", "YI", "ZI", "IX", "IY", "IZ"]);
        assert!(ps.len() as u64 + 1 <= 100 * 2);

        let ps1 = enumerate_local_paulis(1, 1).unwrap();
        let words1: Vec<String> = ps1.iter().map(|p| p.to_string()).collect();
        assert_eq!(words1, ["X", "Y", "Z"]);
    }

    #[test]
    fn enumeration_matches_brute_force_filter() {
        // Independent oracle: walk all 4^3 strings and filter by weight.
        let mut expected = Vec::new();
        for idx in 0..(1u64 << 6) {
            let p = PauliString::from_index(3, idx);
            if (1..=2).contains(&p.weight()) {
                expected.push(p);
            }
        }
        let got = enumerate_local_paulis(3, 2).unwrap();
        assert_eq!(got.len(), 36);
        assert_eq!(got.len() as u64, local_pauli_count(3, 2));
        assert_eq!(got, expected);
    }

    #[test]
    fn enumeration_rejects_bad_locality() {
        assert!(enumerate_local_paulis(3, 0).is_err());
        assert!(enumerate_local_paulis(3, 4).is_err());
    }

    #[test]
    fn enumeration_count_stays_below_hundred_n_to_k() {
        for n in 1..=8usize {
            for k in 1..=n {
                let with_identity = local_pauli_count(n, k) + 1;
                let bound = 100.0 * (n as f64).powi(k as i32);
                assert!(
                    (with_identity as f64) <= bound,
                    "count {with_identity} exceeds 100 n^k = {bound} at n={n}, k={k}"
                );
            }
        }
    }

    #[test]
    fn pauli_dense_matches_definitions() {
        let x = pauli_dense(&"X".parse().unwrap()).unwrap();
        assert_eq!(x.matrix()[(0, 1)], c(1., 0.));
        assert_eq!(x.matrix()[(1, 0)], c(1., 0.));
        assert_eq!(x.matrix()[(0, 0)], c(0., 0.));

        let ii = pauli_dense(&"II".parse().unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { c(1., 0.) } else { c(0., 0.) };
                assert_eq!(ii.matrix()[(i, j)], want);
            }
        }

        // Z (x) X, hand-computed Kronecker product.
        let zx = pauli_dense(&"ZX".parse().unwrap()).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.),
                c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.),
                c(0., 0.), c(0., 0.), c(0., 0.), c(-1., 0.),
                c(0., 0.), c(0., 0.), c(-1., 0.), c(0., 0.),
            ],
        );
        assert_eq!(zx.matrix(), &expected);
    }

    #[test]
    fn pauli_dense_matches_kron_oracle_on_random_strings() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=4);
            let idx = rng.gen_range(0..(1u64 << (2 * n)));
            let p = PauliString::from_index(n, idx);
            let fast = pauli_dense(&p).unwrap();
            let oracle = kron_oracle(&p);
            let diff = (fast.matrix() - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff == 0.0, "mismatch for {p}: {diff}");
        }
    }

    #[test]
    fn to_dense_basic_cases() {
        let mut h = LocalHamiltonian::new(1, 1).unwrap();
        h.set_coefficient("Z".parse().unwrap(), 1.0).unwrap();
        let d = h.to_dense().unwrap();
        assert_eq!(d.matrix()[(0, 0)], c(1., 0.));
        assert_eq!(d.matrix()[(1, 1)], c(-1., 0.));

        let zero = LocalHamiltonian::new(2, 2).unwrap().to_dense().unwrap();
        assert!(zero.max_abs_entry() == 0.0);
        assert!(zero.trace().norm() == 0.0);
    }

    #[test]
    fn to_dense_half_xi_plus_half_ix_has_expected_spectrum() {
        let mut h = LocalHamiltonian::new(2, 1).unwrap();
        h.set_coefficient("XI".parse().unwrap(), 0.5).unwrap();
        h.set_coefficient("IX".parse().unwrap(), 0.5).unwrap();
        let spec = eig_hermitian(&h.to_dense().unwrap()).unwrap();
        let expected = [-1.0, 0.0, 0.0, 1.0];
        for (got, want) in spec.eigenvalues().iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-12, "eigenvalue {got} vs {want}");
        }
    }

    #[test]
    fn pauli_coefficient_examples() {
        let mut h = LocalHamiltonian::new(1, 1).unwrap();
        h.set_coefficient("Z".parse().unwrap(), 1.0).unwrap();
        let d = h.to_dense().unwrap();
        let cz = pauli_coefficient(&d, &"Z".parse().unwrap()).unwrap();
        assert!((cz - c(1., 0.)).norm() < 1e-15);

        let id = DenseOperator::identity(1).unwrap();
        let cx = pauli_coefficient(&id, &"X".parse().unwrap()).unwrap();
        assert!(cx.norm() < 1e-15);

        let bad = pauli_coefficient(&id, &"XX".parse().unwrap());
        assert!(bad.is_err());
    }

    #[test]
    fn pauli_coefficient_round_trips_random_hamiltonians() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let k = rng.gen_range(1..=n);
            let h = LocalHamiltonian::random(n, k, 2.0, 0.7, &mut rng).unwrap();
            let dense = h.to_dense().unwrap();
            for p in enumerate_local_paulis(n, k).unwrap() {
                let got = pauli_coefficient(&dense, &p).unwrap();
                assert!((got.re - h.coefficient(&p)).abs() < 1e-10);
                assert!(got.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_generator_contract() {
        let a = LocalHamiltonian::random_seeded(1, 1, 1.0, 1.0, 42).unwrap();
        let b = LocalHamiltonian::random_seeded(1, 1, 1.0, 1.0, 42).unwrap();
        assert_eq!(a, b);

        let zero = LocalHamiltonian::random_seeded(3, 2, 1.0, 0.0, 7).unwrap();
        assert_eq!(zero.num_terms(), 0);

        let full = LocalHamiltonian::random_seeded(4, 2, 1.0, 1.0, 9).unwrap();
        assert_eq!(full.num_terms() as u64, local_pauli_count(4, 2));
        assert!(full.is_coefficient_bounded(1.0));

        assert!(LocalHamiltonian::random_seeded(2, 1, -1.0, 0.5, 0).is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        let mut h = LocalHamiltonian::new(2, 1).unwrap();
        assert!(h.set_coefficient("II".parse().unwrap(), 0.1).is_err());
        assert!(h.set_coefficient("XX".parse().unwrap(), 0.1).is_err());
        assert!(h.set_coefficient("X".parse().unwrap(), 0.1).is_err());
        assert!(h.set_coefficient("XI".parse().unwrap(), f64::NAN).is_err());
        h.set_coefficient("XI".parse().unwrap(), 0.3).unwrap();
        h.set_coefficient("XI".parse().unwrap(), 0.0).unwrap();
        assert_eq!(h.num_terms(), 0);
    }

    #[test]
    fn text_round_trip() {
        let h = LocalHamiltonian::random_seeded(3, 2, 1.0, 0.6, 13).unwrap();
        let text = h.to_text();
        let back = LocalHamiltonian::parse(&text).unwrap();
        assert_eq!(h.n(), back.n());
        for (p, coeff) in h.terms() {
            assert_eq!(back.coefficient(p), coeff);
        }

        let parsed = LocalHamiltonian::parse("# comment\nXZI 0.25\nIIZ -1 # inline\n\n").unwrap();
        assert_eq!(parsed.n(), 3);
        assert_eq!(parsed.coefficient(&"XZI".parse().unwrap()), 0.25);
        assert_eq!(parsed.coefficient(&"IIZ".parse().unwrap()), -1.0);

        assert!(LocalHamiltonian::parse("XQ 1.0").is_err());
        assert!(LocalHamiltonian::parse("XI").is_err());
        assert!(LocalHamiltonian::parse("II 0.5").is_err());
        let empty = LocalHamiltonian::parse_with_shape("# nothing\n", 2, 1).unwrap();
        assert_eq!(empty.num_terms(), 0);
    }

    #[test]
    fn parseval_identity_on_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.gen_range(1..=3);
            let k = rng.gen_range(1..=n);
            let h = LocalHamiltonian::random(n, k, 1.5, 0.8, &mut rng).unwrap();
            let spectral = schatten_p_normalized(&h.to_dense().unwrap(), 2.0).unwrap();
            let coeff = h.frobenius_norm();
            assert!((spectral - coeff).abs() < 1e-10, "Parseval defect {}", (spectral - coeff).abs());
        }
    }

    #[test]
    fn plancherel_identity_on_random_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        for _ in 0..20 {
            let n = 2usize;
            let dim = 1usize << n;
            let rand_mat = |rng: &mut ChaCha12Rng| {
                DMatrix::from_fn(dim, dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            };
            let a = DenseOperator::from_matrix(rand_mat(&mut rng)).unwrap();
            let b = DenseOperator::from_matrix(rand_mat(&mut rng)).unwrap();
            let lhs = (a.adjoint().matrix() * b.matrix()).trace() / dim as f64;
            let mut rhs = Complex64::new(0.0, 0.0);
            for idx in 0..(1u64 << (2 * n)) {
                let p = PauliString::from_index(n, idx);
                let ap = pauli_coefficient(&a, &p).unwrap();
                let bp = pauli_coefficient(&b, &p).unwrap();
                rhs += ap.conj() * bp;
            }
            assert!((lhs - rhs).norm() < 1e-10, "Plancherel defect {}", (lhs - rhs).norm());
        }
    }

    #[test]
    fn subtraction_and_scaling() {
        let a = LocalHamiltonian::random_seeded(2, 2, 1.0, 1.0, 3).unwrap();
        let b = LocalHamiltonian::random_seeded(2, 1, 1.0, 1.0, 4).unwrap();
        let d = a.sub(&b).unwrap();
        for p in enumerate_local_paulis(2, 2).unwrap() {
            assert!((d.coefficient(&p) - (a.coefficient(&p) - b.coefficient(&p))).abs() < 1e-15);
        }
        let s = a.scaled(-2.0);
        for (p, h) in a.terms() {
            assert_eq!(s.coefficient(p), -2.0 * h);
        }
        let zero = a.sub(&a).unwrap();
        assert_eq!(zero.num_terms(), 0);
    }
}
