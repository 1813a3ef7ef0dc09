//! Gibbs states and the sample-access protocols built on them: Pinsker-type
//! trace-norm bounds, covering nets over bounded k-local Hamiltonians,
//! classical-shadow estimation of local Pauli expectations, covering-net
//! hypothesis selection (learning), and coefficient-gap certification.
//!
//! States are built densely, `rho(beta) = e^{-beta H} / Tr[e^{-beta H}]`, with
//! eigenvalues shifted by their minimum before exponentiation so large `beta`
//! cannot overflow.
//!
//! Shadows use uniformly random single-qubit Pauli bases with a median-of-means
//! aggregator. A round whose bases match `P` on its support contributes
//! `prod_{s in supp(P)} 3 * (observed eigenvalue)` to the estimate of
//! `Tr[P rho]`, and 0 otherwise. The simulation draws, per batch, one
//! multinomial over the `(basis combination, outcome)` cells; those counts are
//! a sufficient statistic for every batch mean, so the distribution of the
//! returned estimates is identical to sampling round by round.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, trace_norm, DenseOperator};
use crate::pauli::{enumerate_local_paulis, pauli_coefficient, LocalHamiltonian, Pauli, PauliString};
use crate::Decision;

/// Thermal state of a Hamiltonian at inverse temperature `beta`.
#[derive(Clone, Debug)]
pub struct GibbsState {
    pub rho: DenseOperator,
    pub beta: f64,
    pub source: Option<LocalHamiltonian>,
}

impl GibbsState {
    /// Checks Hermiticity, unit trace, and positive semidefiniteness up to `tol`.
    pub fn is_valid_density(&self, tol: f64) -> bool {
        if self.rho.hermiticity_defect() > tol {
            return false;
        }
        if (self.rho.trace().re - 1.0).abs() > tol || self.rho.trace().im.abs() > tol {
            return false;
        }
        match eig_hermitian(&self.rho) {
            Ok(spec) => spec.eigenvalues().first().copied().unwrap_or(0.0) >= -tol,
            Err(_) => false,
        }
    }
}

/// `e^{-beta H} / Tr[e^{-beta H}]` via the eigendecomposition of `H`, with the
/// spectrum shifted by its minimum before exponentiating.
pub fn gibbs_state(h: &LocalHamiltonian, beta: f64) -> Result<GibbsState> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be a finite nonnegative real")));
    }
    let spec = eig_hermitian(&h.to_dense()?)?;
    let min = spec.eigenvalues().first().copied().unwrap_or(0.0);
    let weights: Vec<f64> = spec.eigenvalues().iter().map(|l| (-beta * (l - min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut i = 0;
    let rho = spec.map_eigenvalues(|_| {
        let w = weights[i] / z;
        i += 1;
        Complex64::new(w, 0.0)
    })?;
    Ok(GibbsState { rho, beta, source: Some(h.clone()) })
}

/// `|rho - sigma|_tr`, the sum of singular values of the difference (range
/// `[0, 2]` for density matrices).
pub fn trace_distance(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states have dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(trace_norm(&(rho - sigma)))
}

/// The three trace-norm upper bounds between Gibbs states of `H` and `H'`:
///
/// * `exchange_bound = sqrt(2 beta Tr[(rho - rho')(H' - H)])`,
/// * `coeff_bound    = 200 beta n^k sup_P |h_P - h'_P|`,
/// * `pauli_bound    = sqrt(400 beta n^k sup_P 2^n |rho_P - rho'_P|)`,
///
/// each of which dominates `|rho - rho'|_tr`. The last one requires both
/// coefficient vectors bounded by 1 and is `None` otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinskerBounds {
    pub trace_dist: f64,
    pub exchange_bound: f64,
    pub coeff_bound: f64,
    pub pauli_bound: Option<f64>,
}

pub fn pinsker_bounds(rho: &GibbsState, rho0: &GibbsState) -> Result<PinskerBounds> {
    let h = rho
        .source
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("first state is missing its source Hamiltonian".into()))?;
    let h0 = rho0
        .source
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("second state is missing its source Hamiltonian".into()))?;
    if h.n() != h0.n() {
        return Err(Error::DimensionMismatch("source Hamiltonians act on different qubit counts".into()));
    }
    if rho.beta != rho0.beta {
        return Err(Error::InvalidParameter(format!(
            "states live at different inverse temperatures ({} vs {})",
            rho.beta, rho0.beta
        )));
    }
    let beta = rho.beta;
    let n = h.n();
    let k = h.k().max(h0.k());
    let nk = (n as f64).powi(k as i32);

    let trace_dist = trace_distance(&rho.rho, &rho0.rho)?;

    let gap = h0.sub(h)?; // H' - H, with rho from H and rho' from H'
    let diff = &rho.rho - &rho0.rho;
    let inner = (diff.matrix() * gap.to_dense()?.matrix()).trace().re;
    let exchange_bound = (2.0 * beta * inner).max(0.0).sqrt();

    let mut sup_coeff = 0.0f64;
    for (p, c) in h.terms() {
        sup_coeff = sup_coeff.max((c - h0.coefficient(p)).abs());
    }
    for (p, c) in h0.terms() {
        sup_coeff = sup_coeff.max((h.coefficient(p) - c).abs());
    }
    let coeff_bound = 200.0 * beta * nk * sup_coeff;

    let pauli_bound = if h.is_coefficient_bounded(1.0 + 1e-12) && h0.is_coefficient_bounded(1.0 + 1e-12) {
        let mut sup_state = 0.0f64;
        let dim = rho.rho.dim() as f64;
        for p in enumerate_local_paulis(n, k)? {
            let a = pauli_coefficient(&rho.rho, &p)?;
            let b = pauli_coefficient(&rho0.rho, &p)?;
            sup_state = sup_state.max(((a - b) * dim).norm());
        }
        Some((400.0 * beta * nk * sup_state).sqrt())
    } else {
        None
    };

    Ok(PinskerBounds { trace_dist, exchange_bound, coeff_bound, pauli_bound })
}

pub const DEFAULT_NET_CAP: u128 = 10_000_000;

/// The grid of k-local Hamiltonians with every coefficient in
/// `eta Z intersect [-1, 1]`, indexed in mixed radix with the first Pauli (in
/// enumeration order) as the least significant digit.
#[derive(Clone, Debug)]
pub struct NetGrid {
    n: usize,
    k: usize,
    beta: f64,
    eps_net: f64,
    eta: f64,
    half_points: i64,
    paulis: Vec<PauliString>,
    size: u128,
}

impl NetGrid {
    /// Grid step `eta = eps_net / (200 beta n^k)`. At `beta = 0` the step is
    /// unbounded and the net degenerates to the zero Hamiltonian alone.
    pub fn new(n: usize, k: usize, beta: f64, eps_net: f64) -> Result<Self> {
        if !(eps_net > 0.0) {
            return Err(Error::InvalidParameter(format!("eps_net = {eps_net} must be positive")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta = {beta} must be a finite nonnegative real")));
        }
        let nk = (n as f64).powi(k as i32);
        let eta = if beta == 0.0 { f64::INFINITY } else { eps_net / (200.0 * beta * nk) };
        Self::from_eta_inner(n, k, beta, eps_net, eta)
    }

    /// Grid with an explicit step, for coarsened nets.
    pub fn from_eta(n: usize, k: usize, beta: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta = {eta} must be positive")));
        }
        let nk = (n as f64).powi(k as i32);
        Self::from_eta_inner(n, k, beta, eta * 200.0 * beta * nk, eta)
    }

    fn from_eta_inner(n: usize, k: usize, beta: f64, eps_net: f64, eta: f64) -> Result<Self> {
        let paulis = enumerate_local_paulis(n, k)?;
        let half_points = if eta.is_finite() && eta <= 1.0 { (1.0 / eta).floor() as i64 } else { 0 };
        let points = (2 * half_points + 1) as u128;
        let size = points
            .checked_pow(paulis.len() as u32)
            .unwrap_or(u128::MAX);
        Ok(NetGrid { n, k, beta, eps_net, eta, half_points, paulis, size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps_net(&self) -> f64 {
        self.eps_net
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Grid values available per coefficient.
    pub fn grid_points(&self) -> u64 {
        (2 * self.half_points + 1) as u64
    }

    /// Largest grid value, `floor(1/eta) * eta`.
    pub fn grid_max(&self) -> f64 {
        if self.half_points == 0 {
            0.0
        } else {
            self.half_points as f64 * self.eta
        }
    }

    /// Total member count (`u128::MAX` stands in for overflowing sizes).
    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn paulis(&self) -> &[PauliString] {
        &self.paulis
    }

    fn digit_coefficient(&self, digit: i64) -> f64 {
        let offset = digit - self.half_points;
        if offset == 0 {
            0.0
        } else {
            offset as f64 * self.eta
        }
    }

    /// Decodes a mixed-radix index into its Hamiltonian.
    pub fn member(&self, index: u128) -> Result<LocalHamiltonian> {
        if index >= self.size {
            return Err(Error::InvalidParameter(format!(
                "net index {index} out of range for {} members",
                self.size
            )));
        }
        let points = self.grid_points() as u128;
        let mut h = LocalHamiltonian::new(self.n, self.k)?;
        let mut rest = index;
        for p in &self.paulis {
            let digit = (rest % points) as i64;
            rest /= points;
            h.set_coefficient(p.clone(), self.digit_coefficient(digit))?;
        }
        Ok(h)
    }

    /// Inverse of [`NetGrid::member`]; fails unless every coefficient sits on
    /// the grid (to within a relative 1e-9).
    pub fn encode(&self, h: &LocalHamiltonian) -> Result<u128> {
        if h.n() != self.n {
            return Err(Error::DimensionMismatch("Hamiltonian does not match the net shape".into()));
        }
        let points = self.grid_points() as u128;
        let mut index = 0u128;
        let mut scale = 1u128;
        for p in &self.paulis {
            let c = h.coefficient(p);
            let offset = if self.half_points == 0 {
                if c != 0.0 {
                    return Err(Error::InvalidParameter(format!("coefficient {c} of {p} is off-grid")));
                }
                0
            } else {
                let j = (c / self.eta).round();
                if (j * self.eta - c).abs() > 1e-9 * self.eta.max(1.0) || j.abs() as i64 > self.half_points {
                    return Err(Error::InvalidParameter(format!("coefficient {c} of {p} is off-grid")));
                }
                j as i64
            };
            index += scale * (offset + self.half_points) as u128;
            scale *= points;
        }
        Ok(index)
    }

    /// Nearest net member: each coefficient rounds to the closest grid value,
    /// clamped into `[-1, 1]`.
    pub fn round_to_net(&self, h: &LocalHamiltonian) -> Result<LocalHamiltonian> {
        if h.n() != self.n {
            return Err(Error::DimensionMismatch("Hamiltonian does not match the net shape".into()));
        }
        let mut out = LocalHamiltonian::new(self.n, self.k)?;
        for (p, c) in h.terms() {
            if p.weight() > self.k {
                return Err(Error::InvalidParameter(format!(
                    "term {p} exceeds the net locality bound k = {}",
                    self.k
                )));
            }
            let digit = if self.half_points == 0 {
                self.half_points
            } else {
                (c / self.eta).round().clamp(-(self.half_points as f64), self.half_points as f64) as i64
                    + self.half_points
            };
            out.set_coefficient(p.clone(), self.digit_coefficient(digit))?;
        }
        Ok(out)
    }

    /// Lazy enumeration of every member in index order; refuses nets larger
    /// than `cap`.
    pub fn iter(&self, cap: u128) -> Result<impl Iterator<Item = (u128, LocalHamiltonian)> + '_> {
        if self.size > cap {
            return Err(Error::NetTooLarge { size: self.size, cap });
        }
        Ok((0..self.size).map(move |i| (i, self.member(i).expect("index below size"))))
    }
}

/// Median-of-means estimates of `Tr[P rho]` (equivalently `2^n rho_P`) for
/// every Pauli string of weight `1..=k`, plus the identity pinned to 1.
#[derive(Clone, Debug)]
pub struct ShadowEstimate {
    n: usize,
    k: usize,
    estimates: BTreeMap<PauliString, f64>,
    pub copies_used: u64,
    pub batches: u32,
}

impl ShadowEstimate {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Estimate of `Tr[P rho]`; exactly 1 for the identity string.
    pub fn estimate(&self, p: &PauliString) -> Result<f64> {
        if p.is_identity() {
            return Ok(1.0);
        }
        self.estimates
            .get(p)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("no shadow estimate for Pauli word {p}")))
    }

    pub fn paulis(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.estimates.iter().map(|(p, v)| (p, *v))
    }

    /// Largest `|estimate - Tr[P rho]|` against a known state.
    pub fn max_error_against(&self, rho: &DenseOperator) -> Result<f64> {
        let dim = rho.dim() as f64;
        let mut worst = 0.0f64;
        for (p, est) in self.paulis() {
            let truth = (pauli_coefficient(rho, p)? * dim).re;
            worst = worst.max((est - truth).abs());
        }
        Ok(worst)
    }
}

/// Median-of-means batch count `ceil(2 ln(2 |P-set| / delta))`.
pub fn shadow_batches(pauli_count: usize, delta: f64) -> u32 {
    ((2.0 * (2.0 * pauli_count as f64 / delta).ln()).ceil() as u32).max(1)
}

/// Copy count `ceil(C * 3^k k ln(n/delta) / eps^2)` with the empirically
/// calibrated constant frozen in [`SHADOW_SAMPLE_CONSTANT`].
pub fn shadow_copies(n: usize, k: usize, eps: f64, delta: f64) -> u64 {
    let per = SHADOW_SAMPLE_CONSTANT * 3f64.powi(k as i32) * k as f64 * (n as f64 / delta).ln().max(1.0)
        / (eps * eps);
    per.ceil() as u64
}

/// Calibrated once by binary search at the reference configuration
/// `(n = 3, k = 2, eps = 0.2, delta = 0.1)` and frozen: the smallest constant
/// holding a 0.95 all-Pauli hit rate there is ~2.2, rounded up for seed
/// robustness. See the ignored `calibrate_shadow_constant` test.
pub const SHADOW_SAMPLE_CONSTANT: f64 = 2.5;

/// Simulates `copies` random-Pauli-basis measurement rounds of `rho` and
/// aggregates snapshot estimates by median of means with
/// `shadow_batches(|P-set|, delta)` batches.
pub fn shadow_acquire<R: Rng + ?Sized>(
    rho: &DenseOperator,
    copies: u64,
    k: usize,
    delta: f64,
    rng: &mut R,
) -> Result<ShadowEstimate> {
    let paulis = enumerate_local_paulis(rho.qubits(), k)?;
    let batches = shadow_batches(paulis.len(), delta);
    shadow_acquire_with_batches(rho, copies, k, batches, rng)
}

pub fn shadow_acquire_with_batches<R: Rng + ?Sized>(
    rho: &DenseOperator,
    copies: u64,
    k: usize,
    batches: u32,
    rng: &mut R,
) -> Result<ShadowEstimate> {
    let n = rho.qubits();
    if n == 0 {
        return Err(Error::InvalidParameter("shadow acquisition needs at least one qubit".into()));
    }
    let paulis = enumerate_local_paulis(n, k)?;
    if copies < batches as u64 {
        return Err(Error::InsufficientCopies { copies, batches });
    }

    // Cell probabilities p(basis combo, outcome) = 3^-n * p_combo(outcome).
    let dim = 1usize << n;
    let combos = 3usize.pow(n as u32);
    let combo_weight = 1.0 / combos as f64;
    let mut cell_probs = Vec::with_capacity(combos * dim);
    for combo in 0..combos {
        let diag = rotated_diagonal(rho, combo)?;
        for o in 0..dim {
            cell_probs.push(combo_weight * diag[o]);
        }
    }
    let total: f64 = cell_probs.iter().sum();
    for p in cell_probs.iter_mut() {
        *p /= total;
    }

    // Snapshot value of each Pauli on each cell.
    let mut batch_means: Vec<Vec<f64>> = vec![Vec::with_capacity(batches as usize); paulis.len()];
    let base = copies / batches as u64;
    let extra = copies % batches as u64;
    for b in 0..batches as u64 {
        let m = base + if b < extra { 1 } else { 0 };
        let counts = multinomial(rng, m, &cell_probs);
        for (pi, p) in paulis.iter().enumerate() {
            let mut sum = 0.0f64;
            for (cell, &count) in counts.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let combo = cell / dim;
                let outcome = cell % dim;
                if let Some(val) = snapshot_value(p, combo, outcome, n) {
                    sum += count as f64 * val;
                }
            }
            batch_means[pi].push(sum / m as f64);
        }
    }

    let mut estimates = BTreeMap::new();
    for (pi, p) in paulis.into_iter().enumerate() {
        estimates.insert(p, median(&mut batch_means[pi]));
    }
    Ok(ShadowEstimate { n, k, estimates, copies_used: copies, batches })
}

/// Outcome distribution of `rho` measured in the product basis given by the
/// base-3 digits of `combo` (0 = X, 1 = Y, 2 = Z), clamped to be a
/// probability vector.
fn rotated_diagonal(rho: &DenseOperator, combo: usize) -> Result<Vec<f64>> {
    let n = rho.qubits();
    let u = basis_rotation(n, combo);
    let rotated = &u * rho.matrix() * u.adjoint();
    let mut diag: Vec<f64> = (0..rho.dim()).map(|i| rotated[(i, i)].re.max(0.0)).collect();
    let total: f64 = diag.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("state has no probability mass; not a density matrix".into()));
    }
    for d in diag.iter_mut() {
        *d /= total;
    }
    Ok(diag)
}

fn basis_rotation(n: usize, combo: usize) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ux = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
        ],
    );
    let uy = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, s),
        ],
    );
    let uz = DMatrix::<Complex64>::identity(2, 2);
    let mut rest = combo;
    let mut out: Option<DMatrix<Complex64>> = None;
    for _ in 0..n {
        let digit = rest % 3;
        rest /= 3;
        let factor = match digit {
            0 => &ux,
            1 => &uy,
            _ => &uz,
        };
        out = Some(match out {
            None => factor.clone(),
            Some(m) => m.kronecker(factor),
        });
    }
    out.expect("n >= 1")
}

/// Basis digit (0 = X, 1 = Y, 2 = Z) of `site` inside `combo`; site 0 is the
/// low base-3 digit and the *leftmost* Kronecker factor of the rotation, so it
/// reads the *high* bit of the outcome index.
fn combo_digit(combo: usize, site: usize) -> usize {
    (combo / 3usize.pow(site as u32)) % 3
}

fn snapshot_value(p: &PauliString, combo: usize, outcome: usize, n: usize) -> Option<f64> {
    let mut val = 1.0f64;
    for site in p.support() {
        let want = match p.sites()[site] {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
            Pauli::I => unreachable!("support excludes identity sites"),
        };
        if combo_digit(combo, site) != want {
            return None;
        }
        let bit = (outcome >> (n - 1 - site)) & 1;
        val *= if bit == 0 { 3.0 } else { -3.0 };
    }
    Some(val)
}

/// Sequential-binomial multinomial sampler; exact conditional construction.
fn multinomial<R: Rng + ?Sized>(rng: &mut R, total: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = total;
    let mut rem_p = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || rem_p <= p {
            counts[i] = remaining;
            remaining = 0;
            break;
        }
        let q = (p / rem_p).clamp(0.0, 1.0);
        let draw = if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("q in [0,1]").sample(rng)
        };
        counts[i] = draw;
        remaining -= draw;
        rem_p -= p;
    }
    if remaining > 0 {
        *counts.last_mut().expect("nonempty probs") += remaining;
    }
    counts
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Noise-free estimates (`Tr[P rho]` exactly); the dry-run stand-in for
/// [`shadow_acquire`].
pub fn exact_shadows(rho: &DenseOperator, k: usize) -> Result<ShadowEstimate> {
    let n = rho.qubits();
    let dim = rho.dim() as f64;
    let mut estimates = BTreeMap::new();
    for p in enumerate_local_paulis(n, k)? {
        let value = (pauli_coefficient(rho, &p)? * dim).re;
        estimates.insert(p, value);
    }
    Ok(ShadowEstimate { n, k, estimates, copies_used: 0, batches: 0 })
}

/// Linear combination `sum_P ((h_i)_P - (h_j)_P) * est_P`, the shadow estimate
/// of `Tr[(H_i - H_j) rho]`.
pub fn estimate_observable_gaps(
    sh: &ShadowEstimate,
    hi: &LocalHamiltonian,
    hj: &LocalHamiltonian,
) -> Result<f64> {
    if hi.n() != sh.n() || hj.n() != sh.n() {
        return Err(Error::DimensionMismatch("Hamiltonians do not match the shadow shape".into()));
    }
    let mut total = 0.0;
    for (p, c) in hi.terms() {
        total += (c - hj.coefficient(p)) * sh.estimate(p)?;
    }
    for (p, c) in hj.terms() {
        if hi.coefficient(p) == 0.0 {
            total -= c * sh.estimate(p)?;
        }
    }
    Ok(total)
}

/// Configuration of the covering-net Gibbs learner.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnConfig {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub eps: f64,
    pub delta: f64,
    /// Coarsened grid step; `None` uses the analysis value
    /// `eps' / (200 beta n^k)` with `eps' = eps^2 / (100 max(beta,1) n^k)`.
    pub eta_override: Option<f64>,
    /// Copy budget; `None` uses the shadow formula at the per-Pauli accuracy
    /// the gap observables need. Must still fill every batch.
    pub copies_override: Option<u64>,
    pub net_cap: u128,
    pub seed: u64,
}

impl LearnConfig {
    pub fn new(n: usize, k: usize, beta: f64, eps: f64, delta: f64) -> Self {
        LearnConfig {
            n,
            k,
            beta,
            eps,
            delta,
            eta_override: None,
            copies_override: None,
            net_cap: DEFAULT_NET_CAP,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.n {
            return Err(Error::InvalidParameter(format!(
                "locality k = {} must satisfy 1 <= k <= n = {}",
                self.k, self.n
            )));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be a finite nonnegative real".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if let Some(eta) = self.eta_override {
            if !(eta > 0.0) {
                return Err(Error::InvalidParameter("eta override must be positive".into()));
            }
        }
        Ok(())
    }

    fn beta_floor(&self) -> f64 {
        self.beta.max(1.0)
    }

    /// Net accuracy `eps' = eps^2 / (100 max(beta,1) n^k)`.
    pub fn eps_prime(&self) -> f64 {
        self.eps * self.eps / (100.0 * self.beta_floor() * (self.n as f64).powi(self.k as i32))
    }

    /// Gap-observable accuracy `eps~ = eps^2 / max(beta,1)`.
    pub fn gap_accuracy(&self) -> f64 {
        self.eps * self.eps / self.beta_floor()
    }

    /// Per-Pauli shadow accuracy `eps~ / (200 n^k)`.
    pub fn per_pauli_accuracy(&self) -> f64 {
        self.gap_accuracy() / (200.0 * (self.n as f64).powi(self.k as i32))
    }

    pub fn net(&self) -> Result<NetGrid> {
        match self.eta_override {
            Some(eta) => NetGrid::from_eta(self.n, self.k, self.beta, eta),
            None => NetGrid::new(self.n, self.k, self.beta, self.eps_prime()),
        }
    }

    pub fn default_copies(&self) -> u64 {
        shadow_copies(self.n, self.k, self.per_pauli_accuracy(), self.delta)
    }
}

/// Winner of the net scan.
#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub index: u128,
    pub hamiltonian: LocalHamiltonian,
    pub state: GibbsState,
    pub copies_used: u64,
    /// Max-pair gap disagreement of the winner.
    pub objective: f64,
    pub net_size: u128,
}

/// Learns a Gibbs state from sample access: acquires shadows of `rho`, then
/// returns the net member whose Gibbs state minimizes the worst gap-observable
/// disagreement. Guarantee: trace distance at most `5 eps` with probability
/// `1 - delta` when `rho` is the Gibbs state of a bounded k-local Hamiltonian.
pub fn learn_gibbs(rho: &DenseOperator, cfg: &LearnConfig) -> Result<LearnOutcome> {
    cfg.validate()?;
    if rho.qubits() != cfg.n {
        return Err(Error::DimensionMismatch(format!(
            "state acts on {} qubits, config says {}",
            rho.qubits(),
            cfg.n
        )));
    }
    if cfg.beta == 0.0 {
        return learn_gibbs_from_estimates(&exact_shadows(rho, cfg.k)?, cfg);
    }
    let copies = cfg.copies_override.unwrap_or_else(|| cfg.default_copies());
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let est = shadow_acquire(rho, copies, cfg.k, cfg.delta, &mut rng)?;
    learn_gibbs_from_estimates(&est, cfg)
}

/// The net-scan half of [`learn_gibbs`], reusable with exact estimates as a
/// dry run.
///
/// The selection objective `max_{i,j} |gap-est(i,j) - Tr[(H_i - H_j) tau]|`
/// over all ordered net pairs separates per coefficient on the symmetric grid:
/// it equals `2 g_max sum_P |est_P - Tr[P tau]|`, which is what the scan
/// evaluates. Ties go to the lowest index.
pub fn learn_gibbs_from_estimates(est: &ShadowEstimate, cfg: &LearnConfig) -> Result<LearnOutcome> {
    cfg.validate()?;
    if est.n() != cfg.n {
        return Err(Error::DimensionMismatch("estimates do not match the config shape".into()));
    }
    let net = cfg.net()?;
    if cfg.beta == 0.0 {
        let hamiltonian = LocalHamiltonian::new(cfg.n, cfg.k)?;
        let index = net.encode(&hamiltonian)?;
        let state = gibbs_state(&hamiltonian, 0.0)?;
        return Ok(LearnOutcome {
            index,
            hamiltonian,
            state,
            copies_used: est.copies_used,
            objective: 0.0,
            net_size: net.size(),
        });
    }
    if net.size() > cfg.net_cap {
        return Err(Error::NetTooLarge { size: net.size(), cap: cfg.net_cap });
    }

    let targets: Vec<f64> =
        net.paulis().iter().map(|p| est.estimate(p)).collect::<Result<_>>()?;
    let dim = (1usize << cfg.n) as f64;
    let size = net.size() as u64;
    let best = (0..size)
        .into_par_iter()
        .map(|raw| -> Result<(f64, u128)> {
            let index = raw as u128;
            let h = net.member(index).expect("index below size");
            let state = gibbs_state(&h, cfg.beta)?;
            let mut l1 = 0.0f64;
            for (p, target) in net.paulis().iter().zip(&targets) {
                let tr = (pauli_coefficient(&state.rho, p)? * dim).re;
                l1 += (target - tr).abs();
            }
            Ok((2.0 * net.grid_max() * l1, index))
        })
        .try_reduce(
            || (f64::INFINITY, u128::MAX),
            |a, b| Ok(if (b.0, b.1) < (a.0, a.1) { b } else { a }),
        )?;

    let (objective, index) = best;
    let hamiltonian = net.member(index)?;
    let state = gibbs_state(&hamiltonian, cfg.beta)?;
    Ok(LearnOutcome {
        index,
        hamiltonian,
        state,
        copies_used: est.copies_used,
        objective,
        net_size: net.size(),
    })
}

/// Configuration of Gibbs-state certification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GibbsCertifyConfig {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub eps: f64,
    pub delta: f64,
    /// Copy budget per state; must not fall below the shadow requirement.
    pub copies_override: Option<u64>,
    /// Set when the caller promises the far hypothesis can occur; rejected in
    /// the parameter regime where it cannot.
    pub far_promise: bool,
    pub seed: u64,
}

impl GibbsCertifyConfig {
    pub fn new(n: usize, k: usize, beta: f64, eps: f64, delta: f64) -> Self {
        GibbsCertifyConfig { n, k, beta, eps, delta, copies_override: None, far_promise: false, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.n {
            return Err(Error::InvalidParameter(format!(
                "locality k = {} must satisfy 1 <= k <= n = {}",
                self.k, self.n
            )));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be a finite nonnegative real".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if self.beta > 0.0 && self.far_promise && self.close_radius() >= self.far_radius() {
            return Err(Error::InvalidParameter(format!(
                "far hypothesis cannot occur: eps^2/(400 beta n^k) = {:.3e} >= 2 eps = {:.3e}",
                self.close_radius(),
                self.far_radius()
            )));
        }
        Ok(())
    }

    fn nk(&self) -> f64 {
        (self.n as f64).powi(self.k as i32)
    }

    /// Close hypothesis: trace distance at most `eps^2 / (400 beta n^k)`.
    pub fn close_radius(&self) -> f64 {
        self.eps * self.eps / (400.0 * self.beta * self.nk())
    }

    /// Far hypothesis: trace distance at least `2 eps`.
    pub fn far_radius(&self) -> f64 {
        2.0 * self.eps
    }

    /// FAR is declared when some `|est_P - est0_P| >= 3 eps^2 / (400 beta n^k)`.
    pub fn gap_threshold(&self) -> f64 {
        3.0 * self.eps * self.eps / (400.0 * self.beta * self.nk())
    }

    /// Per-Pauli shadow accuracy `eps^2 / (800 beta n^k)`.
    pub fn per_pauli_accuracy(&self) -> f64 {
        self.eps * self.eps / (800.0 * self.beta * self.nk())
    }

    /// Copies per state at confidence `delta/2` each.
    pub fn required_copies(&self) -> u64 {
        shadow_copies(self.n, self.k, self.per_pauli_accuracy(), self.delta / 2.0)
    }
}

/// Certification outcome with the witnessing coefficient gap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GibbsVerdict {
    pub decision: Decision,
    pub max_gap: f64,
    pub threshold: f64,
    pub worst_pauli: Option<String>,
    pub copies_per_state: u64,
}

/// Decides CLOSE/FAR between two Gibbs states from sampled shadows of each.
/// At `beta = 0` both states are maximally mixed under the promise and CLOSE
/// is returned without sampling.
pub fn certify_gibbs(
    rho: &DenseOperator,
    rho0: &DenseOperator,
    cfg: &GibbsCertifyConfig,
) -> Result<GibbsVerdict> {
    Ok(certify_gibbs_with_estimates(rho, rho0, cfg)?.0)
}

/// [`certify_gibbs`] that also hands back the acquired shadow estimates.
pub fn certify_gibbs_with_estimates(
    rho: &DenseOperator,
    rho0: &DenseOperator,
    cfg: &GibbsCertifyConfig,
) -> Result<(GibbsVerdict, Option<(ShadowEstimate, ShadowEstimate)>)> {
    cfg.validate()?;
    if rho.qubits() != cfg.n || rho0.qubits() != cfg.n {
        return Err(Error::DimensionMismatch("states do not match the config shape".into()));
    }
    if cfg.beta == 0.0 {
        let verdict = GibbsVerdict {
            decision: Decision::Close,
            max_gap: 0.0,
            threshold: 0.0,
            worst_pauli: None,
            copies_per_state: 0,
        };
        return Ok((verdict, None));
    }
    let required = cfg.required_copies();
    let copies = match cfg.copies_override {
        Some(c) if c < required => {
            return Err(Error::InvalidParameter(format!(
                "copy budget {c} below the shadow requirement {required}"
            )))
        }
        Some(c) => c,
        None => required,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let est = shadow_acquire(rho, copies, cfg.k, cfg.delta / 2.0, &mut rng)?;
    let est0 = shadow_acquire(rho0, copies, cfg.k, cfg.delta / 2.0, &mut rng)?;
    let verdict = certify_gibbs_from_estimates(&est, &est0, cfg)?;
    Ok((verdict, Some((est, est0))))
}

/// Threshold test on coefficient-gap estimates; deterministic given estimates.
pub fn certify_gibbs_from_estimates(
    est: &ShadowEstimate,
    est0: &ShadowEstimate,
    cfg: &GibbsCertifyConfig,
) -> Result<GibbsVerdict> {
    cfg.validate()?;
    if cfg.beta == 0.0 {
        return Ok(GibbsVerdict {
            decision: Decision::Close,
            max_gap: 0.0,
            threshold: 0.0,
            worst_pauli: None,
            copies_per_state: est.copies_used.max(est0.copies_used),
        });
    }
    if est.n() != cfg.n || est0.n() != cfg.n {
        return Err(Error::DimensionMismatch("estimates do not match the config shape".into()));
    }
    let mut max_gap = 0.0f64;
    let mut worst: Option<PauliString> = None;
    for p in enumerate_local_paulis(cfg.n, cfg.k)? {
        let gap = (est.estimate(&p)? - est0.estimate(&p)?).abs();
        if gap > max_gap {
            max_gap = gap;
            worst = Some(p);
        }
    }
    let threshold = cfg.gap_threshold();
    let decision = if max_gap >= threshold { Decision::Far } else { Decision::Close };
    Ok(GibbsVerdict {
        decision,
        max_gap,
        threshold,
        worst_pauli: worst.map(|p| p.to_string()),
        copies_per_state: est.copies_used.max(est0.copies_used),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::derive_stream_seed;

    fn single(n: usize, site: usize, p: Pauli, coeff: f64) -> LocalHamiltonian {
        let mut h = LocalHamiltonian::new(n, 1).unwrap();
        h.set_coefficient(PauliString::single(n, site, p), coeff).unwrap();
        h
    }

    /// Test-side oracle: Taylor series with scaling and squaring.
    fn exp_taylor(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = m.nrows();
        let norm: f64 = m.iter().map(|z| z.norm()).sum();
        let s = norm.log2().ceil().max(0.0) as u32;
        let scaled = m / Complex64::new(2f64.powi(s as i32), 0.0);
        let mut term = DMatrix::<Complex64>::identity(dim, dim);
        let mut acc = term.clone();
        for j in 1..=30 {
            term = &term * &scaled / Complex64::new(j as f64, 0.0);
            acc += &term;
        }
        for _ in 0..s {
            acc = &acc * &acc;
        }
        acc
    }

    #[test]
    fn gibbs_state_basic_forms() {
        let h = LocalHamiltonian::random_seeded(2, 2, 1.0, 1.0, 31).unwrap();
        let mixed = gibbs_state(&h, 0.0).unwrap();
        let id = DenseOperator::identity(2).unwrap().scaled(Complex64::new(0.25, 0.0));
        assert!(mixed.rho.max_abs_diff(&id) < 1e-12);

        let beta = 1.3;
        let z = single(1, 0, Pauli::Z, 1.0);
        let rho = gibbs_state(&z, beta).unwrap();
        let denom = 2.0 * beta.cosh();
        assert!((rho.rho.matrix()[(0, 0)].re - (-beta).exp() / denom).abs() < 1e-12);
        assert!((rho.rho.matrix()[(1, 1)].re - beta.exp() / denom).abs() < 1e-12);

        assert!(gibbs_state(&z, -1.0).is_err());
    }

    #[test]
    fn gibbs_state_matches_series_oracle() {
        let h = LocalHamiltonian::random_seeded(2, 2, 1.0, 1.0, 37).unwrap();
        let beta = 1.5;
        let dense = h.to_dense().unwrap();
        let e = exp_taylor(&(dense.matrix() * Complex64::new(-beta, 0.0)));
        let oracle = &e / e.trace();
        let rho = gibbs_state(&h, beta).unwrap();
        let defect = (rho.rho.matrix() - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-10, "two-path Gibbs defect {defect}");
    }

    #[test]
    fn gibbs_state_survives_large_beta() {
        let h = LocalHamiltonian::random_seeded(3, 2, 1.0, 1.0, 41).unwrap();
        for beta in [5.0, 20.0, 50.0] {
            let rho = gibbs_state(&h, beta).unwrap();
            assert!(rho.is_valid_density(1e-10), "invalid density at beta = {beta}");
        }
    }

    #[test]
    fn trace_distance_examples() {
        let z = single(1, 0, Pauli::Z, 1.0);
        let rho = gibbs_state(&z, 0.7).unwrap();
        assert!(trace_distance(&rho.rho, &rho.rho).unwrap() < 1e-14);

        let p0 = DenseOperator::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1., 0.),
            Complex64::new(0., 0.),
        ])))
        .unwrap();
        let p1 = DenseOperator::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0., 0.),
            Complex64::new(1., 0.),
        ])))
        .unwrap();
        assert!((trace_distance(&p0, &p1).unwrap() - 2.0).abs() < 1e-12);

        for beta in [0.3, 1.0, 2.5] {
            let hot = gibbs_state(&z, 0.0).unwrap();
            let cold = gibbs_state(&z, beta).unwrap();
            let d = trace_distance(&cold.rho, &hot.rho).unwrap();
            assert!((d - beta.tanh()).abs() < 1e-10, "tanh mismatch at beta = {beta}");
        }
    }

    #[test]
    fn pinsker_bounds_examples() {
        let z = single(1, 0, Pauli::Z, 1.0);
        let same = gibbs_state(&z, 1.0).unwrap();
        let b = pinsker_bounds(&same, &same.clone()).unwrap();
        assert!(b.trace_dist < 1e-12 && b.exchange_bound < 1e-6 && b.coeff_bound == 0.0);

        let zero = LocalHamiltonian::new(1, 1).unwrap();
        let rho = gibbs_state(&z, 1.0).unwrap();
        let rho0 = gibbs_state(&zero, 1.0).unwrap();
        let b = pinsker_bounds(&rho, &rho0).unwrap();
        assert!((b.trace_dist - 1f64.tanh()).abs() < 1e-10);
        assert!((b.coeff_bound - 200.0).abs() < 1e-9);
        assert!(b.exchange_bound >= b.trace_dist);
        assert!(b.pauli_bound.unwrap() >= b.trace_dist);

        let mismatched = gibbs_state(&z, 2.0).unwrap();
        assert!(pinsker_bounds(&rho, &mismatched).is_err());
    }

    #[test]
    fn pinsker_bounds_dominate_on_random_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for trial in 0..60 {
            let n = 1 + trial % 3;
            let k = 1 + (trial / 3) % 2.min(n);
            let k = k.min(n);
            let beta = [0.1, 1.0, 5.0][trial % 3];
            let h = LocalHamiltonian::random(n, k, 1.0, 0.9, &mut rng).unwrap();
            let h0 = LocalHamiltonian::random(n, k, 1.0, 0.9, &mut rng).unwrap();
            let rho = gibbs_state(&h, beta).unwrap();
            let rho0 = gibbs_state(&h0, beta).unwrap();
            let b = pinsker_bounds(&rho, &rho0).unwrap();
            assert!(b.exchange_bound >= b.trace_dist - 1e-9, "exchange bound failed: {b:?}");
            assert!(b.coeff_bound >= b.trace_dist - 1e-9, "coefficient bound failed: {b:?}");
            assert!(b.pauli_bound.unwrap() >= b.trace_dist - 1e-9, "pauli bound failed: {b:?}");
        }
    }

    #[test]
    fn net_grid_shapes() {
        // eta = 0.5: grid {-1, -0.5, 0, 0.5, 1}, three Paulis at n = k = 1.
        let net = NetGrid::from_eta(1, 1, 1.0, 0.5).unwrap();
        assert_eq!(net.grid_points(), 5);
        assert_eq!(net.size(), 125);

        let coarse = NetGrid::from_eta(1, 1, 1.0, 2.5).unwrap();
        assert_eq!(coarse.size(), 1);
        assert_eq!(coarse.member(0).unwrap().num_terms(), 0);

        // Degenerate beta = 0 net is the zero Hamiltonian alone.
        let frozen = NetGrid::new(1, 1, 0.0, 0.3).unwrap();
        assert_eq!(frozen.size(), 1);
    }

    #[test]
    fn net_encode_decode_round_trip() {
        let net = NetGrid::from_eta(1, 1, 1.0, 0.5).unwrap();
        for (index, member) in net.iter(DEFAULT_NET_CAP).unwrap() {
            assert_eq!(net.encode(&member).unwrap(), index);
        }
        let mut off = LocalHamiltonian::new(1, 1).unwrap();
        off.set_coefficient("X".parse().unwrap(), 0.37).unwrap();
        assert!(net.encode(&off).is_err());
    }

    #[test]
    fn net_iteration_respects_cap() {
        let net = NetGrid::from_eta(2, 2, 1.0, 0.1).unwrap();
        assert!(net.size() > 1000);
        let outcome = net.iter(1000).map(|_| ()).err();
        match outcome {
            Some(Error::NetTooLarge { size, cap }) => {
                assert_eq!(size, net.size());
                assert_eq!(cap, 1000);
            }
            Some(other) => panic!("expected NetTooLarge, got {other:?}"),
            None => panic!("expected NetTooLarge, got an iterator"),
        }
    }

    #[test]
    fn net_covering_property_exhaustive_small() {
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        for n in 1..=2usize {
            let beta = 1.0;
            let eps_net = 0.5;
            let net = NetGrid::new(n, 1, beta, eps_net).unwrap();
            for _ in 0..30 {
                let h = LocalHamiltonian::random(n, 1, 1.0, 1.0, &mut rng).unwrap();
                let rounded = net.round_to_net(&h).unwrap();
                let d = trace_distance(
                    &gibbs_state(&h, beta).unwrap().rho,
                    &gibbs_state(&rounded, beta).unwrap().rho,
                )
                .unwrap();
                assert!(d <= eps_net + 1e-9, "covering failed at n = {n}: {d} > {eps_net}");
            }
        }
    }

    #[test]
    fn shadow_single_qubit_estimates() {
        // |0><0| has Tr[Z rho] = 1.
        let z = single(1, 0, Pauli::Z, 1.0);
        let ground = gibbs_state(&z, 50.0).unwrap(); // effectively |1><1|... Tr[Z] = -1
        let mut hits = 0;
        let zp: PauliString = "Z".parse().unwrap();
        for seed in 0..100u64 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let est = shadow_acquire(&ground.rho, 10_000, 1, 0.1, &mut rng).unwrap();
            if (est.estimate(&zp).unwrap() - (-1.0)).abs() <= 0.1 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "only {hits}/100 shadow runs within 0.1");

        let mixed = gibbs_state(&LocalHamiltonian::new(1, 1).unwrap(), 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let est = shadow_acquire(&mixed.rho, 20_000, 1, 0.1, &mut rng).unwrap();
        for p in enumerate_local_paulis(1, 1).unwrap() {
            assert!(est.estimate(&p).unwrap().abs() <= 0.1, "maximally mixed estimate drifted");
        }
    }

    #[test]
    fn shadow_snapshot_estimator_is_unbiased() {
        // With one batch the median of means is the plain mean over rounds.
        let h = LocalHamiltonian::random_seeded(2, 2, 1.0, 1.0, 53).unwrap();
        let rho = gibbs_state(&h, 0.8).unwrap();
        let copies = 100_000u64;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let est = shadow_acquire_with_batches(&rho.rho, copies, 2, 1, &mut rng).unwrap();
        for (p, value) in est.paulis() {
            let truth = (pauli_coefficient(&rho.rho, p).unwrap() * 4.0).re;
            let sigma = (3f64.powi(p.weight() as i32) / copies as f64).sqrt();
            assert!(
                (value - truth).abs() <= 4.0 * sigma + 0.01,
                "biased estimate for {p}: {value} vs {truth}"
            );
        }
    }

    #[test]
    fn shadow_copies_reject_underfilled_batches() {
        let mixed = gibbs_state(&LocalHamiltonian::new(1, 1).unwrap(), 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(matches!(
            shadow_acquire(&mixed.rho, 3, 1, 0.1, &mut rng),
            Err(Error::InsufficientCopies { .. })
        ));
    }

    #[test]
    fn observable_gap_estimates() {
        let z = single(1, 0, Pauli::Z, 1.0);
        let rho = gibbs_state(&z, 1.0).unwrap();
        let est = exact_shadows(&rho.rho, 1).unwrap();

        let zero = LocalHamiltonian::new(1, 1).unwrap();
        assert_eq!(estimate_observable_gaps(&est, &z, &z).unwrap(), 0.0);

        // Exact shadows give Tr[(Hi - Hj) rho] exactly.
        let gap = estimate_observable_gaps(&est, &z, &zero).unwrap();
        assert!((gap - (-(1f64.tanh()))).abs() < 1e-10, "gap {gap} vs -tanh(1)");
    }

    #[test]
    fn learn_gibbs_exact_dry_run_recovers_planted_member() {
        let planted = single(1, 0, Pauli::Z, 0.5);
        let rho = gibbs_state(&planted, 1.0).unwrap();
        let mut cfg = LearnConfig::new(1, 1, 1.0, 0.3, 0.1);
        cfg.eta_override = Some(0.25);
        let est = exact_shadows(&rho.rho, 1).unwrap();
        let out = learn_gibbs_from_estimates(&est, &cfg).unwrap();
        assert_eq!(out.hamiltonian, planted.clone().scaled(1.0));
        assert_eq!(out.net_size, 9u128.pow(3));
        assert!(trace_distance(&rho.rho, &out.state.rho).unwrap() < 1e-10);
    }

    #[test]
    fn learn_gibbs_sampled_recovery() {
        let planted = single(1, 0, Pauli::Z, 0.5);
        let rho = gibbs_state(&planted, 1.0).unwrap();
        let mut recovered = 0;
        for run in 0..30u64 {
            let mut cfg = LearnConfig::new(1, 1, 1.0, 0.3, 0.1);
            cfg.eta_override = Some(0.25);
            cfg.copies_override = Some(200_000);
            cfg.seed = derive_stream_seed(900, run);
            let out = learn_gibbs(&rho.rho, &cfg).unwrap();
            if out.hamiltonian == planted {
                recovered += 1;
            }
            assert!(trace_distance(&rho.rho, &out.state.rho).unwrap() <= 5.0 * cfg.eps);
        }
        assert!(recovered >= 28, "recovered only {recovered}/30");
    }

    #[test]
    fn learn_gibbs_off_net_instance_stays_within_guarantee() {
        let off = single(1, 0, Pauli::X, 0.37);
        let rho = gibbs_state(&off, 1.0).unwrap();
        let mut cfg = LearnConfig::new(1, 1, 1.0, 0.3, 0.1);
        cfg.eta_override = Some(0.25);
        let est = exact_shadows(&rho.rho, 1).unwrap();
        let out = learn_gibbs_from_estimates(&est, &cfg).unwrap();
        let d = trace_distance(&rho.rho, &out.state.rho).unwrap();
        assert!(d <= 5.0 * cfg.eps, "off-net distance {d}");
        assert!(d <= 0.2, "expected a near neighbour, got {d}");
    }

    #[test]
    fn learn_gibbs_beta_zero_returns_maximally_mixed() {
        let planted = single(2, 0, Pauli::Z, 0.5);
        let rho = gibbs_state(&planted, 0.0).unwrap();
        let cfg = LearnConfig::new(2, 1, 0.0, 0.3, 0.1);
        let out = learn_gibbs(&rho.rho, &cfg).unwrap();
        assert_eq!(out.hamiltonian.num_terms(), 0);
        assert!(trace_distance(&rho.rho, &out.state.rho).unwrap() < 1e-12);
    }

    #[test]
    fn learn_gibbs_two_qubit_planted_instance() {
        let planted = single(2, 1, Pauli::Z, 0.5);
        let rho = gibbs_state(&planted, 1.0).unwrap();
        let mut cfg = LearnConfig::new(2, 1, 1.0, 0.4, 0.1);
        cfg.eta_override = Some(0.5);
        let est = exact_shadows(&rho.rho, 1).unwrap();
        let out = learn_gibbs_from_estimates(&est, &cfg).unwrap();
        assert_eq!(out.hamiltonian, planted);
        assert!(trace_distance(&rho.rho, &out.state.rho).unwrap() <= 5.0 * cfg.eps);
    }

    #[test]
    fn learn_gibbs_default_net_exceeds_cap() {
        let rho = gibbs_state(&single(1, 0, Pauli::Z, 0.5), 1.0).unwrap();
        let est = exact_shadows(&rho.rho, 1).unwrap();
        let cfg = LearnConfig::new(1, 1, 1.0, 0.3, 0.1);
        assert!(matches!(
            learn_gibbs_from_estimates(&est, &cfg),
            Err(Error::NetTooLarge { .. })
        ));
    }

    #[test]
    fn certify_gibbs_dry_runs_are_deterministic() {
        let cfg = GibbsCertifyConfig::new(1, 1, 1.0, 0.7, 0.1);
        let z = single(1, 0, Pauli::Z, 1.0);
        let minus_z = single(1, 0, Pauli::Z, -1.0);
        let rho = gibbs_state(&z, 1.0).unwrap();
        let rho0 = gibbs_state(&minus_z, 1.0).unwrap();

        let est = exact_shadows(&rho.rho, 1).unwrap();
        let est0 = exact_shadows(&rho0.rho, 1).unwrap();
        let verdict = certify_gibbs_from_estimates(&est, &est0, &cfg).unwrap();
        assert_eq!(verdict.decision, Decision::Far);
        assert!((verdict.max_gap - 2.0 * 1f64.tanh()).abs() < 1e-10);

        let same = certify_gibbs_from_estimates(&est, &est, &cfg).unwrap();
        assert_eq!(same.decision, Decision::Close);
        assert_eq!(same.max_gap, 0.0);
    }

    #[test]
    fn certify_gibbs_sampled_fixtures() {
        let cfg_base = GibbsCertifyConfig::new(1, 1, 1.0, 0.7, 0.1);
        let z = single(1, 0, Pauli::Z, 1.0);
        let minus_z = single(1, 0, Pauli::Z, -1.0);
        let rho = gibbs_state(&z, 1.0).unwrap();
        let rho0 = gibbs_state(&minus_z, 1.0).unwrap();

        let mut far = 0;
        let mut close = 0;
        for run in 0..20u64 {
            let mut cfg = cfg_base.clone();
            cfg.seed = derive_stream_seed(77, run);
            if certify_gibbs(&rho.rho, &rho0.rho, &cfg).unwrap().decision == Decision::Far {
                far += 1;
            }
            if certify_gibbs(&rho.rho, &rho.rho, &cfg).unwrap().decision == Decision::Close {
                close += 1;
            }
        }
        assert_eq!(far, 20, "far fixture missed");
        assert_eq!(close, 20, "close fixture missed");
    }

    #[test]
    fn certify_gibbs_guards() {
        let z = single(1, 0, Pauli::Z, 1.0);
        let rho = gibbs_state(&z, 1.0).unwrap();

        let cfg0 = GibbsCertifyConfig::new(1, 1, 0.0, 0.7, 0.1);
        let v = certify_gibbs(&rho.rho, &rho.rho, &cfg0).unwrap();
        assert_eq!(v.decision, Decision::Close);
        assert_eq!(v.copies_per_state, 0);

        // Tiny beta pushes the close radius past 2 eps; the far promise is
        // then contradictory.
        let mut degenerate = GibbsCertifyConfig::new(1, 1, 1e-5, 0.9, 0.1);
        degenerate.far_promise = true;
        assert!(degenerate.validate().is_err());

        let mut starved = GibbsCertifyConfig::new(1, 1, 1.0, 0.7, 0.1);
        starved.copies_override = Some(10);
        assert!(certify_gibbs(&rho.rho, &rho.rho, &starved).is_err());
    }

    /// Binary search for the smallest passing shadow constant at the reference
    /// configuration; run manually with
    /// `cargo test -p hamcert calibrate_shadow_constant -- --ignored --nocapture`.
    #[test]
    #[ignore]
    fn calibrate_shadow_constant() {
        let h = LocalHamiltonian::random_seeded(3, 2, 1.0, 1.0, 4242).unwrap();
        let rho = gibbs_state(&h, 1.0).unwrap();
        let eps = 0.2;
        let delta = 0.1;
        let runs = 200;
        let pass_rate = |constant: f64| -> f64 {
            let copies =
                (constant * 9.0 * 2.0 * (3.0f64 / delta).ln() / (eps * eps)).ceil() as u64;
            let mut ok = 0;
            for run in 0..runs {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(5000, run));
                let est = shadow_acquire(&rho.rho, copies, 2, delta, &mut rng).unwrap();
                if est.max_error_against(&rho.rho).unwrap() <= eps {
                    ok += 1;
                }
            }
            ok as f64 / runs as f64
        };
        let (mut lo, mut hi) = (0.5f64, 16.0f64);
        while hi - lo > 0.25 {
            let mid = 0.5 * (lo + hi);
            let rate = pass_rate(mid);
            println!("constant {mid:.2}: pass rate {rate:.3}");
            if rate >= 0.95 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        println!("smallest passing constant ~ {hi:.2}");
    }
}
