//! Python bindings for the hamcert simulator: the Hamiltonian type plus
//! one-call entry points for the certification, learning, and invariant
//! batteries. Results come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use hamcert::certify::{certify, certify_amplified, verify_lemma_suite, CertificationConfig};
use hamcert::dynamics::{identity_probability_spectral, separated_pair_fraction, EvolutionOracle, NoiseModel};
use hamcert::gibbs::{
    certify_gibbs as gibbs_certify, gibbs_state, learn_gibbs as gibbs_learn, trace_distance,
    GibbsCertifyConfig, LearnConfig,
};
use hamcert::linalg::eig_hermitian;
use hamcert::pauli::LocalHamiltonian;

fn err<T>(r: hamcert::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Traceless k-local Hamiltonian as a sparse Pauli-coefficient map.
#[pyclass(name = "Hamiltonian")]
#[derive(Clone)]
struct PyHamiltonian {
    inner: LocalHamiltonian,
}

#[pymethods]
impl PyHamiltonian {
    #[new]
    fn new(n: usize, k: usize) -> PyResult<Self> {
        Ok(PyHamiltonian { inner: err(LocalHamiltonian::new(n, k))? })
    }

    /// Parse the text format, one `<pauli-word> <coefficient>` per line.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyHamiltonian { inner: err(LocalHamiltonian::parse(text))? })
    }

    #[staticmethod]
    fn parse_with_shape(text: &str, n: usize, k: usize) -> PyResult<Self> {
        Ok(PyHamiltonian { inner: err(LocalHamiltonian::parse_with_shape(text, n, k))? })
    }

    /// Random instance: each weight-<=k term enters with probability
    /// `sparsity`, coefficient uniform in `[-coeff_bound, coeff_bound]`.
    #[staticmethod]
    #[pyo3(signature = (n, k, coeff_bound=1.0, sparsity=1.0, seed=0))]
    fn random(n: usize, k: usize, coeff_bound: f64, sparsity: f64, seed: u64) -> PyResult<Self> {
        Ok(PyHamiltonian { inner: err(LocalHamiltonian::random_seeded(n, k, coeff_bound, sparsity, seed))? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn set(&mut self, word: &str, coeff: f64) -> PyResult<()> {
        let p = err(word.parse())?;
        err(self.inner.set_coefficient(p, coeff))
    }

    fn coefficient(&self, word: &str) -> PyResult<f64> {
        let p = err(word.parse())?;
        Ok(self.inner.coefficient(&p))
    }

    /// Stored terms as `(word, coefficient)` pairs in canonical order.
    fn terms(&self) -> Vec<(String, f64)> {
        self.inner.terms().map(|(p, h)| (p.to_string(), h)).collect()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Coefficient-space Frobenius norm `sqrt(sum h_P^2)`.
    fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// Ascending eigenvalues of the dense operator.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        let spec = err(eig_hermitian(&err(self.inner.to_dense())?))?;
        Ok(spec.eigenvalues().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian(n={}, k={}, terms={})", self.inner.n(), self.inner.k(), self.inner.num_terms())
    }

    fn __len__(&self) -> usize {
        self.inner.num_terms()
    }
}

/// Identity-outcome probability `I(t)` of Bell sampling on `e^{-it(H - H0)}`.
#[pyfunction]
fn identity_probability(h: &PyHamiltonian, h0: &PyHamiltonian, t: f64) -> PyResult<f64> {
    let dh = err(h.inner.sub(&h0.inner))?;
    let spec = err(eig_hermitian(&err(dh.to_dense())?))?;
    Ok(identity_probability_spectral(&spec, t))
}

/// Fraction of ordered eigenvalue pairs of `H - H0` separated by at least `eps`.
#[pyfunction]
fn separated_pairs(h: &PyHamiltonian, h0: &PyHamiltonian, eps: f64) -> PyResult<f64> {
    let dh = err(h.inner.sub(&h0.inner))?;
    let spec = err(eig_hermitian(&err(dh.to_dense())?))?;
    Ok(separated_pair_fraction(&spec, eps))
}

/// Run the tolerant time-evolution certification protocol against a simulated
/// hidden target. Returns a dict with the decision and resource ledger.
#[pyfunction]
#[pyo3(signature = (h0, h, eps, k, seed=0, spam=0.0, c_op=1.0, delta=None))]
#[allow(clippy::too_many_arguments)]
fn certify_dynamics<'py>(
    py: Python<'py>,
    h0: &PyHamiltonian,
    h: &PyHamiltonian,
    eps: f64,
    k: usize,
    seed: u64,
    spam: f64,
    c_op: f64,
    delta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = CertificationConfig {
        eps,
        k,
        n: h0.inner.n(),
        reps: 8,
        c_op,
        noise: if spam > 0.0 { NoiseModel::random_shift(spam) } else { NoiseModel::none() },
        seed,
    };
    let mut oracle = err(EvolutionOracle::new(h.inner.clone()))?;
    let verdict = match delta {
        Some(d) => err(certify_amplified(&h0.inner, &mut oracle, &cfg, d))?,
        None => err(certify(&h0.inner, &mut oracle, &cfg))?,
    };
    let out = PyDict::new_bound(py);
    out.set_item("decision", verdict.decision.to_string())?;
    out.set_item("iterations", verdict.transcript.len())?;
    out.set_item("estimates", verdict.transcript.iter().map(|r| r.estimate).collect::<Vec<_>>())?;
    out.set_item("evolution_time", verdict.ledger.total_evolution_time)?;
    out.set_item("queries", verdict.ledger.query_count)?;
    out.set_item("experiments", verdict.ledger.experiment_count)?;
    Ok(out)
}

/// Trace distance between the Gibbs states of two Hamiltonians at `beta`.
#[pyfunction]
fn gibbs_trace_distance(h: &PyHamiltonian, h0: &PyHamiltonian, beta: f64) -> PyResult<f64> {
    let rho = err(gibbs_state(&h.inner, beta))?;
    let rho0 = err(gibbs_state(&h0.inner, beta))?;
    err(trace_distance(&rho.rho, &rho0.rho))
}

/// Covering-net learning of the Gibbs state of `h` from simulated shadows.
#[pyfunction]
#[pyo3(signature = (h, beta, eps, delta=0.1, eta=None, copies=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn learn_gibbs<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    beta: f64,
    eps: f64,
    delta: f64,
    eta: Option<f64>,
    copies: Option<u64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let rho = err(gibbs_state(&h.inner, beta))?;
    let cfg = LearnConfig {
        n: h.inner.n(),
        k: h.inner.k(),
        beta,
        eps,
        delta,
        eta_override: eta,
        copies_override: copies,
        net_cap: hamcert::gibbs::DEFAULT_NET_CAP,
        seed,
    };
    let outcome = err(gibbs_learn(&rho.rho, &cfg))?;
    let d = err(trace_distance(&rho.rho, &outcome.state.rho))?;
    let out = PyDict::new_bound(py);
    out.set_item(
        "coefficients",
        outcome.hamiltonian.terms().map(|(p, c)| (p.to_string(), c)).collect::<Vec<_>>(),
    )?;
    out.set_item("net_index", outcome.index.to_string())?;
    out.set_item("net_size", outcome.net_size.to_string())?;
    out.set_item("copies", outcome.copies_used)?;
    out.set_item("objective", outcome.objective)?;
    out.set_item("trace_distance", d)?;
    Ok(out)
}

/// CLOSE/FAR certification between the Gibbs states of `h` and `h0`.
#[pyfunction]
#[pyo3(signature = (h, h0, beta, eps, delta=0.1, seed=0))]
fn certify_gibbs<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    h0: &PyHamiltonian,
    beta: f64,
    eps: f64,
    delta: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let rho = err(gibbs_state(&h.inner, beta))?;
    let rho0 = err(gibbs_state(&h0.inner, beta))?;
    let cfg = GibbsCertifyConfig {
        n: h.inner.n(),
        k: h.inner.k().max(h0.inner.k()),
        beta,
        eps,
        delta,
        copies_override: None,
        far_promise: false,
        seed,
    };
    let verdict = err(gibbs_certify(&rho.rho, &rho0.rho, &cfg))?;
    let out = PyDict::new_bound(py);
    out.set_item("decision", verdict.decision.to_string())?;
    out.set_item("max_gap", verdict.max_gap)?;
    out.set_item("threshold", verdict.threshold)?;
    out.set_item("worst_pauli", verdict.worst_pauli)?;
    out.set_item("copies_per_state", verdict.copies_per_state)?;
    Ok(out)
}

/// Sweep all supporting inequalities on random instances.
#[pyfunction]
#[pyo3(signature = (n=3, k=2, samples=200, seed=0))]
fn verify_invariants<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = err(verify_lemma_suite(samples, n, k, seed))?;
    let out = PyDict::new_bound(py);
    out.set_item("passed", report.passed())?;
    let checks = PyList::empty_bound(py);
    for c in &report.checks {
        let item = PyDict::new_bound(py);
        item.set_item("name", &c.name)?;
        item.set_item("evaluations", c.evaluations)?;
        item.set_item("violations", c.violations)?;
        item.set_item("worst_margin", c.worst_margin)?;
        checks.append(item)?;
    }
    out.set_item("checks", checks)?;
    Ok(out)
}

#[pymodule]
fn hamcert_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHamiltonian>()?;
    m.add_function(wrap_pyfunction!(identity_probability, m)?)?;
    m.add_function(wrap_pyfunction!(separated_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(certify_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs_trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(learn_gibbs, m)?)?;
    m.add_function(wrap_pyfunction!(certify_gibbs, m)?)?;
    m.add_function(wrap_pyfunction!(verify_invariants, m)?)?;
    Ok(())
}
