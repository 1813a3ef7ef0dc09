//! Tolerant CLOSE/FAR certification of a hidden k-local Hamiltonian against a
//! known reference from time-evolution access, plus the battery of inequality
//! checks its analysis rests on.
//!
//! One run loops `reps` times: sample `t` uniform in `[0, 2/eps]`, Trotterize
//! `e^{-it(H - H0)}` to accuracy `1/(384 * 9^k)`, estimate the identity-outcome
//! probability to accuracy `1/(192 * 9^k)` with per-iteration failure at most
//! `0.05/reps`, and return FAR as soon as an estimate drops to
//! `1 - 7/(96 * 9^k)` or below. A run distinguishes
//! `|H - H0|_F <= eps/(8 * 3^k)` from `|H - H0|_F >= eps` with probability at
//! least 0.9; majority voting over independent runs drives the failure below
//! any requested `delta`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    estimate_identity_probability, frobenius_lower_bound_check, hoeffding_shots,
    identity_probability_spectral, separated_pair_fraction, trotter_steps, EvolutionOracle,
    Ledger, NoiseModel,
};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, exp_i_hermitian};
use crate::pauli::LocalHamiltonian;
use crate::Decision;

/// Mixes a master seed with a stream index into an independent-looking seed;
/// the same (seed, stream) pair always lands on the same value, regardless of
/// scheduling.
pub fn derive_stream_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0x9e3779b97f4a7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn nine_k(k: usize) -> f64 {
    9f64.powi(k as i32)
}

fn three_k(k: usize) -> f64 {
    3f64.powi(k as i32)
}

/// Parameters of one certification run. Thresholds are derived on demand so
/// they can never go stale against `eps` and `k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificationConfig {
    /// Distance parameter of the far hypothesis.
    pub eps: f64,
    /// Locality bound of both Hamiltonians.
    pub k: usize,
    /// Qubit count.
    pub n: usize,
    /// Outer repetitions per run.
    pub reps: u32,
    /// Operator-norm bound on both Hamiltonians; only used to size Trotter steps.
    pub c_op: f64,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl CertificationConfig {
    pub fn new(eps: f64, k: usize, n: usize) -> Self {
        CertificationConfig { eps, k, n, reps: 8, c_op: 1.0, noise: NoiseModel::none(), seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps = {} must be positive", self.eps)));
        }
        if self.k < 1 || self.k > self.n {
            return Err(Error::InvalidParameter(format!(
                "locality k = {} must satisfy 1 <= k <= n = {}",
                self.k, self.n
            )));
        }
        if self.reps < 1 {
            return Err(Error::InvalidParameter("reps must be >= 1".into()));
        }
        if !(self.c_op >= 1.0) {
            return Err(Error::InvalidParameter(format!("c_op = {} must be >= 1", self.c_op)));
        }
        if self.noise.spam_budget < 0.0 {
            return Err(Error::InvalidParameter("spam budget must be >= 0".into()));
        }
        Ok(())
    }

    /// Trotter accuracy `1/(384 * 9^k)`.
    pub fn eps_trott(&self) -> f64 {
        1.0 / (384.0 * nine_k(self.k))
    }

    /// Per-estimate accuracy `1/(192 * 9^k)`.
    pub fn estimate_accuracy(&self) -> f64 {
        1.0 / (192.0 * nine_k(self.k))
    }

    /// FAR is declared at or below `1 - 7/(96 * 9^k)`.
    pub fn decision_threshold(&self) -> f64 {
        1.0 - 7.0 / (96.0 * nine_k(self.k))
    }

    /// Close hypothesis radius `eps / (8 * 3^k)`.
    pub fn close_radius(&self) -> f64 {
        self.eps / (8.0 * three_k(self.k))
    }

    /// Evolution times are drawn uniformly from `[0, 2/eps]`.
    pub fn time_span(&self) -> f64 {
        2.0 / self.eps
    }

    /// Shots per estimate so that each estimate misses its accuracy with
    /// probability at most `0.05 / reps` (Hoeffding).
    pub fn shots_per_estimate(&self) -> u64 {
        hoeffding_shots(self.estimate_accuracy(), 0.05 / self.reps as f64)
    }
}

/// One iteration of the certification loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: f64,
    pub l: u32,
    pub shots: u64,
    pub estimate: f64,
}

/// Protocol outcome with the full per-iteration transcript and a snapshot of
/// the oracle's cumulative ledger at return time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub transcript: Vec<IterationRecord>,
    pub ledger: Ledger,
}

/// One certification run, seeded from `cfg.seed`.
pub fn certify(
    h0: &LocalHamiltonian,
    oracle: &mut EvolutionOracle,
    cfg: &CertificationConfig,
) -> Result<Verdict> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    certify_with_rng(h0, oracle, cfg, &mut rng)
}

pub fn certify_with_rng<R: Rng + ?Sized>(
    h0: &LocalHamiltonian,
    oracle: &mut EvolutionOracle,
    cfg: &CertificationConfig,
    rng: &mut R,
) -> Result<Verdict> {
    cfg.validate()?;
    if h0.n() != cfg.n || oracle.qubits() != cfg.n {
        return Err(Error::DimensionMismatch(format!(
            "config expects {} qubits, reference has {}, oracle has {}",
            cfg.n,
            h0.n(),
            oracle.qubits()
        )));
    }
    if h0.terms().any(|(p, _)| p.weight() > cfg.k) {
        return Err(Error::InvalidParameter(format!(
            "reference Hamiltonian carries terms above the locality bound k = {}",
            cfg.k
        )));
    }
    let h0_dense = h0.to_dense()?;
    let spec_h0 = eig_hermitian(&h0_dense)?;
    if spec_h0.operator_norm() > cfg.c_op + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "reference operator norm {:.6} exceeds the declared bound c_op = {}",
            spec_h0.operator_norm(),
            cfg.c_op
        )));
    }

    let shots = cfg.shots_per_estimate();
    let threshold = cfg.decision_threshold();
    let mut transcript = Vec::with_capacity(cfg.reps as usize);
    for _ in 0..cfg.reps {
        let t = rng.gen_range(0.0..cfg.time_span());
        let l = trotter_steps(cfg.c_op, t, cfg.eps_trott())?;
        let circuit = oracle.trotter_circuit(&spec_h0, t, l)?;
        let estimate =
            estimate_identity_probability(&circuit, shots, &cfg.noise, rng, oracle.ledger_mut())?;
        transcript.push(IterationRecord { t, l, shots, estimate });
        if estimate <= threshold {
            return Ok(Verdict { decision: Decision::Far, transcript, ledger: oracle.ledger().clone() });
        }
    }
    Ok(Verdict { decision: Decision::Close, transcript, ledger: oracle.ledger().clone() })
}

/// Number of majority-vote runs for failure probability `delta`, given the
/// per-run guarantee of 0.9; odd so the vote cannot tie, and 1 for
/// `delta >= 0.37` where a single run already suffices.
pub fn amplification_runs(delta: f64) -> u32 {
    let r = 2 * (1.0 / delta).ln().ceil() as u32;
    r.saturating_sub(1).max(1)
}

/// Majority vote over independent runs; run `i` is seeded with
/// `derive_stream_seed(cfg.seed, i)` and the oracle ledger accumulates across
/// all runs.
pub fn certify_amplified(
    h0: &LocalHamiltonian,
    oracle: &mut EvolutionOracle,
    cfg: &CertificationConfig,
    delta: f64,
) -> Result<Verdict> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    let runs = amplification_runs(delta);
    let mut far_votes = 0u32;
    let mut transcript = Vec::new();
    for run in 0..runs {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(cfg.seed, run as u64));
        let verdict = certify_with_rng(h0, oracle, cfg, &mut rng)?;
        if verdict.decision == Decision::Far {
            far_votes += 1;
        }
        transcript.extend(verdict.transcript);
    }
    let decision = if far_votes > runs / 2 { Decision::Far } else { Decision::Close };
    Ok(Verdict { decision, transcript, ledger: oracle.ledger().clone() })
}

/// Options for the inequality battery. `samples` instances are drawn at shape
/// `(n, k)`; the time-averaged dip check runs on the first
/// `spectral_instances` of them with `t_draws` uniform times each.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaSuiteOptions {
    pub samples: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub coeff_bound: f64,
    /// Fixed inclusion probability for instance terms; `None` draws one
    /// uniformly from `[0.3, 1]` per instance.
    pub sparsity: Option<f64>,
    pub spectral_instances: usize,
    pub t_draws: usize,
    /// Absolute slack beyond which an inequality counts as violated.
    pub slack: f64,
    /// Statistical allowance subtracted from the 1/3 dip guarantee.
    pub spectral_margin: f64,
}

impl LemmaSuiteOptions {
    pub fn new(samples: usize, n: usize, k: usize, seed: u64) -> Self {
        LemmaSuiteOptions {
            samples,
            n,
            k,
            seed,
            coeff_bound: 1.0,
            sparsity: None,
            spectral_instances: samples.min(50),
            t_draws: 10_000,
            slack: 1e-9,
            spectral_margin: 0.03,
        }
    }
}

/// Result of one inequality check: `worst_margin` is the smallest observed
/// `rhs - lhs` (negative means the inequality reversed numerically), and an
/// evaluation counts as a violation when that margin drops below `-slack`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub evaluations: u64,
    pub violations: u64,
    pub worst_margin: f64,
}

impl LemmaCheck {
    fn new(name: &str) -> Self {
        LemmaCheck { name: name.into(), evaluations: 0, violations: 0, worst_margin: f64::INFINITY }
    }

    fn record(&mut self, margin: f64, slack: f64) {
        self.evaluations += 1;
        if margin < -slack {
            self.violations += 1;
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    pub options: LemmaSuiteOptions,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaSuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }

    pub fn total_violations(&self) -> u64 {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

/// Sweeps every inequality the certification analysis uses over random k-local
/// instances: the two-path identity-probability equality, the eigenvalue-gap
/// fraction bound, the hypercontractive fourth-moment bound, the
/// Paley-Zygmund pair-moment bound, the time-averaged cosine dip, the
/// short-time floor, and the unitary-difference Frobenius chain.
pub fn verify_lemma_suite(samples: usize, n: usize, k: usize, seed: u64) -> Result<LemmaSuiteReport> {
    verify_lemma_suite_with(&LemmaSuiteOptions::new(samples, n, k, seed))
}

pub fn verify_lemma_suite_with(opts: &LemmaSuiteOptions) -> Result<LemmaSuiteReport> {
    if opts.samples == 0 {
        return Err(Error::InvalidParameter("lemma suite needs at least one sample".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let slack = opts.slack;

    let mut two_path = LemmaCheck::new("identity-probability-two-path");
    let mut gap_fraction = LemmaCheck::new("gap-fraction-lower-bound");
    let mut fourth_moment = LemmaCheck::new("hypercontractive-fourth-moment");
    let mut paley_zygmund = LemmaCheck::new("paley-zygmund-pair-moments");
    let mut cosine_dip = LemmaCheck::new("time-averaged-cosine-dip");
    let mut short_time = LemmaCheck::new("short-time-expansion-floor");
    let mut duhamel = LemmaCheck::new("unitary-difference-frobenius");
    let mut chain = LemmaCheck::new("identity-probability-frobenius-chain");

    for instance in 0..opts.samples {
        let sparsity = opts.sparsity.unwrap_or_else(|| rng.gen_range(0.3..=1.0));
        let dh = LocalHamiltonian::random(opts.n, opts.k, opts.coeff_bound, sparsity, &mut rng)?;
        let dense = dh.to_dense()?;
        let spec = eig_hermitian(&dense)?;
        let fro = spec.frobenius_normalized();
        let dim = spec.dim() as f64;

        // |cos-sum - |Tr U|^2/4^n| <= slack at a couple of random times.
        for _ in 0..2 {
            let t = rng.gen_range(0.0..10.0);
            let cosine = identity_probability_spectral(&spec, t);
            let u = exp_i_hermitian(&dense, t)?;
            let trace_route = u.trace().norm_sqr() / (dim * dim);
            two_path.record(slack - (cosine - trace_route).abs(), slack);
        }

        // Lambda(dH, |dH|_F) >= 1/(3 * 9^k); trivially 1 when dH = 0.
        let lambda_at_fro = separated_pair_fraction(&spec, fro);
        gap_fraction.record(lambda_at_fro - 1.0 / (3.0 * nine_k(opts.k)), slack);

        // |dH|_4^4 <= 9^k |dH|_2^4, relative margin.
        let m2 = spec.eigenvalues().iter().map(|l| l * l).sum::<f64>() / dim;
        let m4 = spec.eigenvalues().iter().map(|l| l.powi(4)).sum::<f64>() / dim;
        let rhs = nine_k(opts.k) * m2 * m2;
        let rel_margin = if rhs > 0.0 { (rhs - m4) / rhs } else { 0.0 };
        fourth_moment.record(rel_margin, slack);

        // Pr[Z > E[Z]/2] >= (1/4) E[Z]^2 / E[Z^2] with Z = (lambda_r - lambda_s)^2,
        // enumerated exhaustively over ordered pairs.
        let lambda = spec.eigenvalues();
        let pairs = dim * dim;
        let mut ez = 0.0;
        let mut ez2 = 0.0;
        for &lr in lambda {
            for &ls in lambda {
                let z = (lr - ls) * (lr - ls);
                ez += z;
                ez2 += z * z;
            }
        }
        ez /= pairs;
        ez2 /= pairs;
        let mut hit = 0u64;
        for &lr in lambda {
            for &ls in lambda {
                if (lr - ls) * (lr - ls) > 0.5 * ez {
                    hit += 1;
                }
            }
        }
        let pz_rhs = if ez2 > 0.0 { 0.25 * ez * ez / ez2 } else { 0.0 };
        paley_zygmund.record(hit as f64 / pairs - pz_rhs, slack);

        // Empirical Pr_t[I(t) <= 1 - Lambda/4] >= 1/3 - margin over t ~ U[0, 2/eps].
        if instance < opts.spectral_instances {
            let eps_check = if fro > 0.0 { rng.gen_range(0.3..=1.0) * fro } else { 1.0 };
            let lambda_eps = separated_pair_fraction(&spec, eps_check);
            let dip = 1.0 - lambda_eps / 4.0;
            let span = 2.0 / eps_check;
            let mut below = 0u64;
            for _ in 0..opts.t_draws {
                let t = rng.gen_range(0.0..span);
                if identity_probability_spectral(&spec, t) <= dip {
                    below += 1;
                }
            }
            let frac = below as f64 / opts.t_draws as f64;
            cosine_dip.record(frac - (1.0 / 3.0 - opts.spectral_margin), slack);
        }

        // Pointwise-in-t inequalities, on times where the bounds are active.
        for _ in 0..3 {
            let span = if fro > 0.0 { (2.0 / fro).min(10.0) } else { 10.0 };
            let t = rng.gen_range(0.0..span);
            let (it, floor) = frobenius_lower_bound_check(&spec, t);
            short_time.record(it - floor, slack);

            // |e^{-it dH} - I|_F^2 = sum (2 - 2 cos(lambda t)) / 2^n.
            let diff_sq = spec
                .eigenvalues()
                .iter()
                .map(|l| 2.0 - 2.0 * (l * t).cos())
                .sum::<f64>()
                / dim;
            duhamel.record(t * fro - diff_sq.max(0.0).sqrt(), slack);
            chain.record(it - (1.0 - diff_sq), slack);
        }
    }

    Ok(LemmaSuiteReport {
        options: opts.clone(),
        checks: vec![
            two_path,
            gap_fraction,
            fourth_moment,
            paley_zygmund,
            cosine_dip,
            short_time,
            duhamel,
            chain,
        ],
    })
}
