//! Time-evolution access model: Bell-identity probability, eigenvalue-gap
//! statistics, Trotterization, and the shot-based probability estimator.
//!
//! The only statistic the certification loop consumes is the probability of
//! the all-identity Bell outcome after evolving under `dH = H - H0` for time
//! `t`,
//!
//! ```text
//! I(t) = (1/4^n) sum_{r,s} cos((lambda_r - lambda_s) t) = |Tr e^{-i dH t}|^2 / 4^n,
//! ```
//!
//! so Bell sampling is simulated at the Bernoulli level (identity vs not) and
//! SPAM error as a bounded perturbation of that one outcome probability.
//! Resource accounting is faithful to the access model: every shot applies the
//! Trotterized unitary once, which costs `2l` evolution queries to `H` of
//! duration `t/2l` each plus `l` queries to `H0` of duration `t/l` each.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    exp_i_from_spectrum, exp_i_hermitian, operator_norm, DenseOperator, Spectrum,
};
use crate::pauli::LocalHamiltonian;

/// Cumulative resource accounting for one protocol run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Ledger {
    /// Sum of all durations for which either Hamiltonian was evolved.
    pub total_evolution_time: f64,
    /// Number of individual evolution queries.
    pub query_count: u64,
    /// Number of prepare-evolve-measure experiments (shots).
    pub experiment_count: u64,
    /// Minimum positive queried duration; `None` until the first query.
    pub time_resolution: Option<f64>,
}

impl Ledger {
    pub fn new() -> Self {
        Ledger::default()
    }

    /// One evolution query of duration `t`.
    pub fn record_query(&mut self, t: f64) {
        if t > 0.0 {
            self.total_evolution_time += t;
            self.time_resolution = Some(self.time_resolution.map_or(t, |r| r.min(t)));
        }
        self.query_count += 1;
    }

    /// `shots` applications of a Trotterized unitary, one experiment each.
    pub fn record_circuit_shots(&mut self, circuit: &TrotterCircuit, shots: u64) {
        self.experiment_count += shots;
        self.query_count += shots * circuit.queries_per_application();
        if circuit.t > 0.0 {
            self.total_evolution_time += shots as f64 * circuit.evolution_time_per_application();
            let res = circuit.t / (2.0 * circuit.l as f64);
            self.time_resolution = Some(self.time_resolution.map_or(res, |r| r.min(res)));
        }
    }

    pub fn merge(&mut self, other: &Ledger) {
        self.total_evolution_time += other.total_evolution_time;
        self.query_count += other.query_count;
        self.experiment_count += other.experiment_count;
        self.time_resolution = match (self.time_resolution, other.time_resolution) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

/// How state-preparation-and-measurement error perturbs outcome probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    None,
    /// Shift uniform in `[-spam_budget, spam_budget]`, fresh per estimate.
    RandomShift,
    /// Full-budget downward shift, the worst direction for CLOSE verdicts.
    AdversarialShift,
}

/// Per-experiment outcome-probability perturbation of magnitude at most
/// `spam_budget`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoiseModel {
    pub spam_budget: f64,
    pub mode: NoiseMode,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel { spam_budget: 0.0, mode: NoiseMode::None }
    }

    pub fn random_shift(spam_budget: f64) -> Self {
        NoiseModel { spam_budget, mode: NoiseMode::RandomShift }
    }

    pub fn adversarial_shift(spam_budget: f64) -> Self {
        NoiseModel { spam_budget, mode: NoiseMode::AdversarialShift }
    }

    /// Perturbed probability, clamped back into `[0, 1]`.
    pub fn perturb<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> f64 {
        let shift = match self.mode {
            NoiseMode::None => 0.0,
            NoiseMode::RandomShift => rng.gen_range(-self.spam_budget..=self.spam_budget),
            NoiseMode::AdversarialShift => -self.spam_budget,
        };
        (p + shift).clamp(0.0, 1.0)
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::none()
    }
}

/// `I(t)` as the explicit cosine sum over ordered eigenvalue pairs of `dH`.
/// The trace route `|Tr e^{-i dH t}|^2 / 4^n` is kept separate as an oracle.
pub fn identity_probability_spectral(spec: &Spectrum, t: f64) -> f64 {
    let lambda = spec.eigenvalues();
    let dim = lambda.len() as f64;
    let mut sum = 0.0;
    for &lr in lambda {
        for &ls in lambda {
            sum += ((lr - ls) * t).cos();
        }
    }
    (sum / (dim * dim)).clamp(0.0, 1.0)
}

/// Fraction of ordered eigenvalue pairs `(r, s)` with `|lambda_r - lambda_s| >= eps`.
pub fn separated_pair_fraction(spec: &Spectrum, eps: f64) -> f64 {
    let lambda = spec.eigenvalues();
    let dim = lambda.len() as f64;
    let mut count = 0u64;
    for &lr in lambda {
        for &ls in lambda {
            if (lr - ls).abs() >= eps {
                count += 1;
            }
        }
    }
    count as f64 / (dim * dim)
}

/// `(I(t), 1 - t^2 |dH|_F^2)`; the first component dominates the second.
pub fn frobenius_lower_bound_check(spec: &Spectrum, t: f64) -> (f64, f64) {
    let fro = spec.frobenius_normalized();
    (identity_probability_spectral(spec, t), 1.0 - t * t * fro * fro)
}

/// The symmetric product `V = (e^{-itH/2l} e^{+itH0/l} e^{-itH/2l})^l`
/// approximating `e^{-it(H - H0)}`, with its per-application query structure.
#[derive(Clone, Debug)]
pub struct TrotterCircuit {
    pub unitary: DenseOperator,
    pub t: f64,
    pub l: u32,
}

impl TrotterCircuit {
    /// `2l` queries to `H` at `t/2l` plus `l` queries to `H0` at `t/l`:
    /// evolution time `t` under each Hamiltonian.
    pub fn evolution_time_per_application(&self) -> f64 {
        2.0 * self.t
    }

    pub fn queries_per_application(&self) -> u64 {
        3 * self.l as u64
    }

    /// Exact identity-outcome probability `|Tr V|^2 / 4^n` of this unitary.
    pub fn identity_probability(&self) -> f64 {
        let dim = self.unitary.dim() as f64;
        let tr = self.unitary.trace();
        (tr.norm_sqr() / (dim * dim)).clamp(0.0, 1.0)
    }
}

/// Builds the Trotter product from precomputed spectra of `H` and `H0`.
pub fn trotter_circuit_from_spectra(
    spec_h: &Spectrum,
    spec_h0: &Spectrum,
    t: f64,
    l: u32,
) -> Result<TrotterCircuit> {
    if l < 1 {
        return Err(Error::InvalidParameter("Trotter step count l must be >= 1".into()));
    }
    if spec_h.dim() != spec_h0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "H and H0 act on different dimensions ({} vs {})",
            spec_h.dim(),
            spec_h0.dim()
        )));
    }
    let half = t / (2.0 * l as f64);
    let a = exp_i_from_spectrum(spec_h, half)?;
    let b = exp_i_from_spectrum(spec_h0, -t / l as f64)?;
    let step = &(&a * &b) * &a;
    let unitary = matrix_power(&step, l);
    Ok(TrotterCircuit { unitary, t, l })
}

/// `V = (e^{-itH/2l} e^{+itH0/l} e^{-itH/2l})^l` as a plain operator.
pub fn trotter_unitary(
    h: &LocalHamiltonian,
    h0: &LocalHamiltonian,
    t: f64,
    l: u32,
) -> Result<DenseOperator> {
    let spec_h = crate::linalg::eig_hermitian(&h.to_dense()?)?;
    let spec_h0 = crate::linalg::eig_hermitian(&h0.to_dense()?)?;
    Ok(trotter_circuit_from_spectra(&spec_h, &spec_h0, t, l)?.unitary)
}

fn matrix_power(step: &DenseOperator, mut exp: u32) -> DenseOperator {
    let mut base = step.clone();
    let mut acc = DenseOperator::identity(step.qubits()).expect("dim already validated");
    while exp > 0 {
        if exp & 1 == 1 {
            acc = &acc * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Default prefactor in the analytic step-count rule.
pub const TROTTER_CONSTANT: f64 = 1.0;

/// Analytic second-order step count `l = ceil(c0 sqrt((c_op t)^3 / eps_trott))`,
/// clamped to at least 1. `c_op` must dominate both operator norms.
pub fn trotter_steps(c_op: f64, t: f64, eps_trott: f64) -> Result<u32> {
    trotter_steps_with_constant(TROTTER_CONSTANT, c_op, t, eps_trott)
}

pub fn trotter_steps_with_constant(c0: f64, c_op: f64, t: f64, eps_trott: f64) -> Result<u32> {
    if eps_trott <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps_trott = {eps_trott} must be positive")));
    }
    if c_op < 0.0 || !c_op.is_finite() {
        return Err(Error::InvalidParameter(format!("operator-norm bound c_op = {c_op} is invalid")));
    }
    let ct = c_op * t.abs();
    let l = (c0 * (ct.powi(3) / eps_trott).sqrt()).ceil();
    Ok((l.max(1.0)).min(u32::MAX as f64) as u32)
}

/// Desk-scale variant: doubles `l` from 1 until the measured operator-norm
/// error `|e^{-it(H-H0)} - V|_op` drops below `eps_trott`, and checks that the
/// analytic count also meets the bound.
pub fn trotter_steps_checked(
    h: &LocalHamiltonian,
    h0: &LocalHamiltonian,
    c_op: f64,
    t: f64,
    eps_trott: f64,
) -> Result<u32> {
    let analytic = trotter_steps(c_op, t, eps_trott)?;
    let spec_h = crate::linalg::eig_hermitian(&h.to_dense()?)?;
    let spec_h0 = crate::linalg::eig_hermitian(&h0.to_dense()?)?;
    let delta = h.sub(h0)?;
    let exact = exp_i_hermitian(&delta.to_dense()?, t)?;
    let error_at = |l: u32| -> Result<f64> {
        let v = trotter_circuit_from_spectra(&spec_h, &spec_h0, t, l)?.unitary;
        Ok(operator_norm(&(&exact - &v)))
    };
    if error_at(analytic)? > eps_trott {
        return Err(Error::InvalidParameter(format!(
            "analytic step count l = {analytic} misses the Trotter bound {eps_trott:.3e}"
        )));
    }
    let mut l = 1u32;
    loop {
        if error_at(l)? <= eps_trott {
            return Ok(l);
        }
        l = l.checked_mul(2).ok_or_else(|| {
            Error::InvalidParameter("Trotter doubling search exceeded u32 range".into())
        })?;
    }
}

/// Hoeffding shot count: `|mean - p| <= eps` with probability `>= 1 - delta`
/// once `shots >= ln(2/delta) / (2 eps^2)`.
pub fn hoeffding_shots(eps: f64, delta: f64) -> u64 {
    ((2.0 / delta).ln() / (2.0 * eps * eps)).ceil() as u64
}

/// Shot-based estimate of the identity-outcome probability of `circuit`.
///
/// The true `p = |Tr V|^2 / 4^n` is perturbed once by the noise model, then
/// `shots` Bernoulli outcomes are drawn (as one binomial count, which has the
/// identical distribution) and averaged. Every shot is one experiment and one
/// application of the circuit in the ledger.
pub fn estimate_identity_probability<R: Rng + ?Sized>(
    circuit: &TrotterCircuit,
    shots: u64,
    noise: &NoiseModel,
    rng: &mut R,
    ledger: &mut Ledger,
) -> Result<f64> {
    if shots < 1 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    let p = noise.perturb(circuit.identity_probability(), rng);
    let successes = if p <= 0.0 {
        0
    } else if p >= 1.0 {
        shots
    } else {
        Binomial::new(shots, p)
            .map_err(|e| Error::InvalidParameter(format!("binomial sampling: {e}")))?
            .sample(rng)
    };
    ledger.record_circuit_shots(circuit, shots);
    Ok(successes as f64 / shots as f64)
}

/// Time-evolution access to a hidden Hamiltonian, with resource accounting.
///
/// The target is fixed at construction and never exposed; callers obtain
/// evolution operators and Trotterized circuits only. Every evolution query at
/// `t > 0` lands in the ledger.
pub struct EvolutionOracle {
    hidden: LocalHamiltonian,
    spectrum: Spectrum,
    ledger: Ledger,
}

impl EvolutionOracle {
    pub fn new(hidden: LocalHamiltonian) -> Result<Self> {
        let spectrum = crate::linalg::eig_hermitian(&hidden.to_dense()?)?;
        Ok(EvolutionOracle { hidden, spectrum, ledger: Ledger::new() })
    }

    pub fn qubits(&self) -> usize {
        self.hidden.n()
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut Ledger {
        &mut self.ledger
    }

    pub fn reset_ledger(&mut self) {
        self.ledger = Ledger::new();
    }

    /// One logged query to `U_H(t) = e^{-itH}`.
    pub fn evolve(&mut self, t: f64) -> Result<DenseOperator> {
        if t < 0.0 {
            return Err(Error::InvalidParameter("evolution time must be nonnegative".into()));
        }
        self.ledger.record_query(t);
        exp_i_from_spectrum(&self.spectrum, t)
    }

    /// Builds the Trotter circuit against a known reference `H0`. Query costs
    /// are charged per application, at estimation time.
    pub fn trotter_circuit(&self, spec_h0: &Spectrum, t: f64, l: u32) -> Result<TrotterCircuit> {
        trotter_circuit_from_spectra(&self.spectrum, spec_h0, t, l)
    }

    /// True whether the hidden target satisfies the promised operator-norm
    /// bound; simulator-side precondition check, not part of the access model.
    pub fn satisfies_norm_bound(&self, c_op: f64) -> bool {
        self.spectrum.operator_norm() <= c_op
    }
}
