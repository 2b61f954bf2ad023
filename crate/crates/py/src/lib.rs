//! Python bindings: the mechanism type and the main analysis entry
//! points, taking formulas and profiles as text and returning plain
//! Python structures.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use respgap::game::{default_controller, win_moralist};
use respgap::mechanism::DEFAULT_VAR_BUDGET;
use respgap::reduction::{parse_qbf_file, reduce, verify_reduction};
use respgap::responsibility::{compute_levels, gap_set, is_gap_free, min_gap_free_degree, MinDegree};
use respgap::{parse_formula, parse_mechanism_file, Assignment, VarName};

fn err(e: respgap::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A sequential decision-making mechanism loaded from the line-oriented
/// file format.
#[pyclass(frozen)]
struct Mechanism {
    inner: respgap::Mechanism,
    budget: u32,
}

#[pymethods]
impl Mechanism {
    /// Parse the `agents/agent/constraint` file format.
    #[new]
    #[pyo3(signature = (text, budget = DEFAULT_VAR_BUDGET))]
    fn new(text: &str, budget: u32) -> PyResult<Self> {
        Ok(Mechanism {
            inner: parse_mechanism_file(text).map_err(err)?,
            budget,
        })
    }

    #[getter]
    fn agents(&self) -> usize {
        self.inner.agent_count()
    }

    #[getter]
    fn families(&self) -> Vec<Vec<String>> {
        self.inner
            .families()
            .iter()
            .map(|f| f.iter().map(|v| v.as_str().to_string()).collect())
            .collect()
    }

    #[getter]
    fn constraint(&self) -> String {
        self.inner.gamma().to_string()
    }

    /// Truth value of the constraint under a profile literal like
    /// `"pa=1,pb=0"`.
    fn gamma_at(&self, profile: &str) -> PyResult<bool> {
        let s = self.inner.parse_profile_literal(profile).map_err(err)?;
        self.inner.substitute(self.inner.gamma(), &s).map_err(err)
    }

    /// Whether the agent is responsible of the given order under the
    /// profile.
    fn is_responsible(&self, order: usize, agent: usize, profile: &str) -> PyResult<bool> {
        let s = self.inner.parse_profile_literal(profile).map_err(err)?;
        respgap::is_responsible(&self.inner, order, agent, &s, self.budget).map_err(err)
    }

    /// The order-`degree` responsibility gap as profile literals.
    fn gap(&self, degree: usize) -> PyResult<Vec<String>> {
        let report = gap_set(&self.inner, degree, self.budget).map_err(err)?;
        report
            .gap_profiles
            .iter()
            .map(|p| self.inner.profile_literal(p).map_err(err))
            .collect()
    }

    /// `(agent, order)` pairs responsible under the profile, orders up
    /// to `degree`.
    fn responsible_pairs(&self, degree: usize, profile: &str) -> PyResult<Vec<(usize, usize)>> {
        let s = self.inner.parse_profile_literal(profile).map_err(err)?;
        let levels = compute_levels(&self.inner, degree, self.budget).map_err(err)?;
        let idx = self.inner.index_of(&s).map_err(err)?;
        Ok(levels.responsibility_pairs(idx))
    }

    /// `(gap_free, witness_literal_or_None)` at the given order.
    fn gap_free(&self, degree: usize) -> PyResult<(bool, Option<String>)> {
        let verdict = is_gap_free(&self.inner, degree, self.budget).map_err(err)?;
        let witness = verdict
            .witness
            .map(|w| self.inner.profile_literal(&w).map_err(err))
            .transpose()?;
        Ok((verdict.gap_free, witness))
    }

    /// Smallest gap-free order, or `None` when the constraint is
    /// unsatisfiable.
    fn min_gap_free_degree(&self) -> PyResult<Option<usize>> {
        match min_gap_free_degree(&self.inner, self.budget).map_err(err)? {
            MinDegree::Degree(d) => Ok(Some(d)),
            MinDegree::Never => Ok(None),
        }
    }

    /// Moralist win-set labels by depth (Devil moves for odd agents).
    fn win_moralist(&self) -> PyResult<Vec<Vec<String>>> {
        let controller = default_controller(self.inner.agent_count());
        let win = win_moralist(&self.inner, &controller, self.budget).map_err(err)?;
        Ok(win.labels())
    }

    /// Serialize back to the mechanism file format.
    fn to_file(&self) -> String {
        self.inner.to_file_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mechanism(agents={}, vars={}, constraint={:?})",
            self.inner.agent_count(),
            self.inner.var_count(),
            self.inner.gamma().to_string()
        )
    }
}

/// Evaluate a formula under an assignment given as a dict of bools.
#[pyfunction]
fn eval_formula(text: &str, assignment: std::collections::HashMap<String, bool>) -> PyResult<bool> {
    let f = parse_formula(text).map_err(err)?;
    let mut a = Assignment::new();
    for (name, value) in assignment {
        a.insert(VarName::new(&name).map_err(err)?, value);
    }
    f.eval(&a).map_err(err)
}

/// Truth of a closed formula with quantifiers.
#[pyfunction]
fn eval_qbf(text: &str) -> PyResult<bool> {
    parse_formula(text).map_err(err)?.eval_qbf().map_err(err)
}

/// Free variables of a formula, sorted.
#[pyfunction]
fn free_vars(text: &str) -> PyResult<Vec<String>> {
    Ok(parse_formula(text)
        .map_err(err)?
        .free_vars()
        .into_iter()
        .map(|v| v.as_str().to_string())
        .collect())
}

/// Reduce a QBF file to a mechanism file.
#[pyfunction]
fn reduce_qbf(text: &str) -> PyResult<String> {
    let instance = parse_qbf_file(text).map_err(err)?;
    Ok(reduce(&instance).mechanism.to_file_string())
}

/// `(qbf_truth, gap_free, agree)` for a QBF file.
#[pyfunction]
#[pyo3(signature = (text, budget = DEFAULT_VAR_BUDGET))]
fn verify_qbf_reduction(text: &str, budget: u32) -> PyResult<(bool, bool, bool)> {
    let instance = parse_qbf_file(text).map_err(err)?;
    let report = verify_reduction(&instance, budget).map_err(err)?;
    Ok((report.qbf_truth, report.gap_free, report.agree))
}

#[pymodule]
fn respgap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mechanism>()?;
    m.add_function(wrap_pyfunction!(eval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(eval_qbf, m)?)?;
    m.add_function(wrap_pyfunction!(free_vars, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_qbf, m)?)?;
    m.add_function(wrap_pyfunction!(verify_qbf_reduction, m)?)?;
    Ok(())
}
