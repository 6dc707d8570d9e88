//! Python bindings. Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use curtangent_core::dense::{self, DenseMatrix};
use curtangent_core::experiment::{self, ExperimentConfig, ExperimentRecord, StructuredFamily};
use curtangent_core::{calculus, cur, perturb, sampling, tangent, verify, Error};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Csv { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: &Rows) -> PyResult<DenseMatrix> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(PyValueError::new_err("matrix must be a non-empty list of non-empty rows"));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("all rows must have the same length"));
    }
    Ok(DenseMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

fn rows(a: &DenseMatrix) -> Rows {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

/// Sampled row and column indices of an `m × n` matrix.
#[pyclass(name = "SelectionPair", frozen)]
struct PySelectionPair(sampling::SelectionPair);

#[pymethods]
impl PySelectionPair {
    #[new]
    fn new(rows: Vec<usize>, cols: Vec<usize>, m: usize, n: usize) -> PyResult<Self> {
        sampling::SelectionPair::new(rows, cols, m, n).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn full(m: usize, n: usize) -> PyResult<Self> {
        sampling::SelectionPair::full(m, n).map(Self).map_err(to_py)
    }

    #[getter]
    fn rows(&self) -> Vec<usize> {
        self.0.rows().to_vec()
    }

    #[getter]
    fn cols(&self) -> Vec<usize> {
        self.0.cols().to_vec()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.m(), self.0.n())
    }

    fn __repr__(&self) -> String {
        format!("SelectionPair(rows={:?}, cols={:?}, m={}, n={})", self.0.rows(), self.0.cols(), self.0.m(), self.0.n())
    }
}

/// `U diag(σ) Vᵀ` with orthonormal factors and decreasing positive σ.
#[pyclass(name = "CompactSvd", frozen)]
struct PyCompactSvd(dense::CompactSvd);

#[pymethods]
impl PyCompactSvd {
    #[new]
    fn new(left: Rows, sigmas: Vec<f64>, right: Rows) -> PyResult<Self> {
        dense::CompactSvd::new(matrix(&left)?, sigmas, matrix(&right)?).map(Self).map_err(to_py)
    }

    #[getter]
    fn left(&self) -> Rows {
        rows(self.0.left())
    }

    #[getter]
    fn right(&self) -> Rows {
        rows(self.0.right())
    }

    #[getter]
    fn sigmas(&self) -> Vec<f64> {
        self.0.sigmas().to_vec()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn reconstruct(&self) -> Rows {
        rows(&self.0.reconstruct())
    }

    fn __repr__(&self) -> String {
        format!("CompactSvd({}x{}, rank {})", self.0.nrows(), self.0.ncols(), self.0.rank())
    }
}

/// Admissible base point with its oblique projectors.
#[pyclass(name = "TangentPoint", frozen)]
struct PyTangentPoint(tangent::TangentPoint);

#[pymethods]
impl PyTangentPoint {
    #[new]
    fn new(svd: &PyCompactSvd, sel: &PySelectionPair) -> PyResult<Self> {
        tangent::make_tangent_point(&svd.0, &sel.0).map(Self).map_err(to_py)
    }

    #[getter]
    fn pi_u(&self) -> Rows {
        rows(self.0.pi_u())
    }

    #[getter]
    fn pi_v(&self) -> Rows {
        rows(self.0.pi_v())
    }

    #[getter]
    fn base(&self) -> Rows {
        rows(self.0.base())
    }

    /// Oblique tangent projection of `e`.
    fn project(&self, e: Rows) -> PyResult<Rows> {
        tangent::oblique_tangent_project(&self.0, &matrix(&e)?).map(|x| rows(&x)).map_err(to_py)
    }

    /// `(δ_U, δ_V, ‖Π_V‖₂)`.
    fn obliqueness(&self) -> (f64, f64, f64) {
        let o = tangent::obliqueness(&self.0);
        (o.delta_u, o.delta_v, o.norm_pi_v)
    }
}

#[pyfunction]
#[pyo3(signature = (a, rel_tol = dense::DEFAULT_REL_TOL))]
fn compact_svd(a: Rows, rel_tol: f64) -> PyResult<PyCompactSvd> {
    dense::compact_svd(&matrix(&a)?, rel_tol).map(PyCompactSvd).map_err(to_py)
}

#[pyfunction]
fn truncate_rank(a: Rows, r: usize) -> PyResult<Rows> {
    dense::truncate_rank(&matrix(&a)?, r).map(|x| rows(&x)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (a, rel_tol = dense::DEFAULT_REL_TOL))]
fn pinv(a: Rows, rel_tol: f64) -> PyResult<Rows> {
    dense::pinv(&matrix(&a)?, rel_tol).map(|x| rows(&x)).map_err(to_py)
}

#[pyfunction]
fn pinv_truncated(a: Rows, r: usize) -> PyResult<Rows> {
    dense::pinv_truncated(&matrix(&a)?, r).map(|x| rows(&x)).map_err(to_py)
}

#[pyfunction]
fn singular_values(a: Rows) -> PyResult<Vec<f64>> {
    Ok(dense::singular_values(&matrix(&a)?))
}

#[pyfunction]
fn leverage_scores(u: Rows) -> PyResult<Vec<f64>> {
    sampling::leverage_scores(&matrix(&u)?).map_err(to_py)
}

#[pyfunction]
fn top_k_selection(scores: Vec<f64>, k: usize) -> PyResult<Vec<usize>> {
    sampling::top_k_selection(&scores, k).map_err(to_py)
}

#[pyfunction]
fn admissibility_margins(svd: &PyCompactSvd, sel: &PySelectionPair) -> PyResult<(f64, f64)> {
    sampling::admissibility_margins(&svd.0, &sel.0).map_err(to_py)
}

#[pyfunction]
#[pyo3(name = "cur", signature = (a, sel, rel_tol = dense::DEFAULT_REL_TOL))]
fn cur_plain(a: Rows, sel: &PySelectionPair, rel_tol: f64) -> PyResult<Rows> {
    cur::cur(&matrix(&a)?, &sel.0, rel_tol).map(|x| rows(&x)).map_err(to_py)
}

#[pyfunction]
fn cur_rank_truncated(a: Rows, sel: &PySelectionPair, r: usize) -> PyResult<Rows> {
    cur::cur_rank_truncated(&matrix(&a)?, &sel.0, r).map(|x| rows(&x)).map_err(to_py)
}

#[pyfunction]
fn orthogonal_tangent_project(svd: &PyCompactSvd, z: Rows) -> PyResult<Rows> {
    tangent::orthogonal_tangent_project(&svd.0, &matrix(&z)?).map(|x| rows(&x)).map_err(to_py)
}

#[pyfunction]
fn normal_project(svd: &PyCompactSvd, z: Rows) -> PyResult<Rows> {
    tangent::normal_project(&svd.0, &matrix(&z)?).map(|x| rows(&x)).map_err(to_py)
}

#[pyfunction]
fn pinv_derivative(w: Rows, wdot: Rows, r: usize) -> PyResult<Rows> {
    calculus::pinv_derivative(&matrix(&w)?, &matrix(&wdot)?, r).map(|x| rows(&x)).map_err(to_py)
}

/// `(remainder_norm, bound, gamma, satisfied)`.
#[pyfunction]
#[pyo3(signature = (w, e, r, c = calculus::DEFAULT_C))]
fn truncation_expansion(w: Rows, e: Rows, r: usize, c: f64) -> PyResult<(f64, f64, f64, bool)> {
    let rep = calculus::truncation_expansion(&matrix(&w)?, &matrix(&e)?, r, c).map_err(to_py)?;
    Ok((rep.remainder_norm, rep.bound, rep.gamma, rep.satisfied))
}

/// Unit perturbation of the given family: `generic`, `invisible`, `normal` or `visible`.
#[pyfunction]
#[pyo3(signature = (family, svd, sel, seed, alpha = None))]
fn perturbation(family: &str, svd: &PyCompactSvd, sel: &PySelectionPair, seed: u64, alpha: Option<f64>) -> PyResult<Rows> {
    let family = match (family, alpha) {
        ("generic", None) => perturb::PerturbationFamily::Generic,
        ("invisible", None) => perturb::PerturbationFamily::Invisible,
        ("normal", None) => perturb::PerturbationFamily::Normal,
        ("visible", Some(alpha)) => perturb::PerturbationFamily::Visible { alpha },
        ("visible", None) => return Err(PyValueError::new_err("visible perturbations need alpha")),
        (other, _) => return Err(PyValueError::new_err(format!("unknown or malformed family {other:?}"))),
    };
    perturb::PerturbationSpec::new(family, seed).generate(&svd.0, &sel.0).map(|x| rows(&x)).map_err(to_py)
}

/// Seeded test problem: `(svd, selection, tangent_point)`.
#[pyfunction]
#[pyo3(signature = (seed = 1, m = 80, n = 70, rank = 5, rows = 10, cols = 10))]
fn test_problem(
    seed: u64,
    m: usize,
    n: usize,
    rank: usize,
    rows: usize,
    cols: usize,
) -> PyResult<(PyCompactSvd, PySelectionPair, PyTangentPoint)> {
    let cfg = ExperimentConfig { m, n, rank, rows, cols, seed, ..ExperimentConfig::default() };
    let p = experiment::build_test_problem(&cfg).map_err(to_py)?;
    Ok((PyCompactSvd(p.svd), PySelectionPair(p.sel), PyTangentPoint(p.tangent)))
}

type RecordTuple = (f64, Option<f64>, f64, f64, f64, f64);

fn record_tuple(r: &ExperimentRecord) -> RecordTuple {
    (r.epsilon, r.alpha, r.err_cur, r.err_svd, r.pred_cur, r.pred_svd)
}

/// Runs one experiment with the default problem size and grids. Returns
/// `(epsilon, alpha, err_cur, err_svd, pred_cur, pred_svd)` tuples and writes
/// CSV to `out` when given.
#[pyfunction]
#[pyo3(signature = (kind, seed = 1, out = None))]
fn run_experiment(kind: &str, seed: u64, out: Option<PathBuf>) -> PyResult<Vec<RecordTuple>> {
    let cfg = ExperimentConfig::with_seed(seed);
    let run = match kind {
        "generic" => experiment::run_generic_experiment(&cfg),
        "invisible" => experiment::run_structured_experiment(&cfg, StructuredFamily::Invisible),
        "normal" => experiment::run_structured_experiment(&cfg, StructuredFamily::Normal),
        "visibility" => experiment::run_visibility_experiment(&cfg),
        other => return Err(PyValueError::new_err(format!("unknown experiment {other:?}"))),
    }
    .map_err(to_py)?;
    let records = run.records();
    if let Some(path) = out {
        experiment::write_csv(&records, &path).map_err(to_py)?;
    }
    Ok(records.iter().map(record_tuple).collect())
}

/// Runs a verification suite; returns `(name, passed, detail)` triples.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 1))]
fn run_verification(suite: &str, seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    let suite = match suite {
        "projectors" => verify::Suite::Projectors,
        "calculus" => verify::Suite::Calculus,
        "bounds" => verify::Suite::Bounds,
        "all" => verify::Suite::All,
        other => return Err(PyValueError::new_err(format!("unknown suite {other:?}"))),
    };
    let outcomes = verify::run_suite(suite, &ExperimentConfig::with_seed(seed), &verify::SuiteSizes::default()).map_err(to_py)?;
    Ok(outcomes.into_iter().map(|o| (o.name, o.passed, o.detail)).collect())
}

#[pymodule]
fn curtangent(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySelectionPair>()?;
    m.add_class::<PyCompactSvd>()?;
    m.add_class::<PyTangentPoint>()?;
    m.add_function(wrap_pyfunction!(compact_svd, m)?)?;
    m.add_function(wrap_pyfunction!(truncate_rank, m)?)?;
    m.add_function(wrap_pyfunction!(pinv, m)?)?;
    m.add_function(wrap_pyfunction!(pinv_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(leverage_scores, m)?)?;
    m.add_function(wrap_pyfunction!(top_k_selection, m)?)?;
    m.add_function(wrap_pyfunction!(admissibility_margins, m)?)?;
    m.add_function(wrap_pyfunction!(cur_plain, m)?)?;
    m.add_function(wrap_pyfunction!(cur_rank_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(orthogonal_tangent_project, m)?)?;
    m.add_function(wrap_pyfunction!(normal_project, m)?)?;
    m.add_function(wrap_pyfunction!(pinv_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(perturbation, m)?)?;
    m.add_function(wrap_pyfunction!(test_problem, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_verification, m)?)?;
    Ok(())
}
