//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! inputs may be `int`, `Fraction` or strings like `"3/2"`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use orbitq::cli::table_rows;
use orbitq::exactalg::{Ctx, Polynomial as CorePoly, VariableContext};
use orbitq::hyperg;
use orbitq::jordan::{self, sweep_ids};
use orbitq::ladder;
use orbitq::models::{self, ModelKind};
use orbitq::{Error, Rational};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rat(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let s = obj.str()?.to_string();
    s.parse().map_err(err)
}

fn frac<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

fn frac_opt<'py>(py: Python<'py>, r: &Option<Rational>) -> PyResult<Bound<'py, PyAny>> {
    match r {
        Some(x) => frac(py, x),
        None => Ok(py.None().into_bound(py)),
    }
}

fn frac_list<'py>(py: Python<'py>, rs: &[Rational]) -> PyResult<Bound<'py, PyList>> {
    let items = rs.iter().map(|r| frac(py, r)).collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

/// A registry case.
#[pyclass(name = "Case", frozen)]
struct PyCase {
    inner: jordan::JordanCase,
}

#[pymethods]
impl PyCase {
    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    /// Blocks as `(q, d, w)` tuples.
    #[getter]
    fn blocks(&self) -> Vec<(u32, u32, u32)> {
        self.inner.blocks.iter().map(|b| (b.q, b.d, b.w)).collect()
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }

    #[getter]
    fn labels<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("k", &self.inner.labels.k)?;
        d.set_item("p", &self.inner.labels.p)?;
        d.set_item("g", &self.inner.labels.g)?;
        d.set_item("group", &self.inner.labels.group)?;
        Ok(d)
    }

    /// `(v, delta)` vectors.
    fn derived_vectors(&self) -> (Vec<u32>, Vec<u32>) {
        let dv = jordan::derived_vectors(&self.inner);
        (dv.v, dv.delta)
    }

    /// List of `(identity, passed)`.
    fn validate(&self) -> Vec<(String, bool)> {
        jordan::validate_case(&self.inner)
            .into_iter()
            .map(|c| (c.name, c.passed))
            .collect()
    }

    fn bundles(&self) -> Vec<PyBundle> {
        ladder::evaluate_bundles(&self.inner)
            .into_iter()
            .map(|inner| PyBundle { inner })
            .collect()
    }

    fn pi1_order(&self) -> u32 {
        orbitq::pi1_component_order(&self.inner)
    }

    /// Capelli multipliers at multidegree `mu`.
    fn capelli_profile<'py>(&self, py: Python<'py>, mu: Vec<u32>) -> PyResult<Bound<'py, PyList>> {
        let p = ladder::capelli_profile(&self.inner, &mu).map_err(err)?;
        frac_list(py, &p.values())
    }

    /// `(a, b)` for the given `r0`; raises `ValueError` when extraction fails.
    fn extract_ab<'py>(
        &self,
        py: Python<'py>,
        r0: &Bound<'py, PyAny>,
    ) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
        let (a, b) = ladder::extract_ab(&self.inner, &to_rat(r0)?).map_err(err)?;
        Ok((frac(py, &a)?, frac(py, &b)?))
    }

    fn __repr__(&self) -> String {
        format!("Case({:?}, blocks={:?}, m={})", self.inner.id, self.blocks(), self.inner.m)
    }
}

/// A half-form bundle with its ladder parameters.
#[pyclass(name = "Bundle", frozen)]
struct PyBundle {
    inner: orbitq::BundleModel,
}

#[pymethods]
impl PyBundle {
    #[getter]
    fn case_id(&self) -> String {
        self.inner.case_id.clone()
    }

    #[getter]
    fn twist(&self) -> String {
        self.inner.twist.to_string()
    }

    #[getter]
    fn alpha(&self) -> u32 {
        self.inner.alpha
    }

    #[getter]
    fn r0<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        frac(py, &self.inner.r0)
    }

    #[getter]
    fn a<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        frac_opt(py, &self.inner.a)
    }

    #[getter]
    fn b<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        frac_opt(py, &self.inner.b)
    }

    #[getter]
    fn valid(&self) -> bool {
        self.inner.valid
    }

    #[getter]
    fn vacuum_label(&self) -> String {
        self.inner.vacuum_label.clone()
    }

    #[getter]
    fn zeta0_exponents(&self) -> Vec<u32> {
        self.inner.zeta0_exponents.clone()
    }

    fn __repr__(&self) -> String {
        let show = |x: &Option<Rational>| x.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "None".into());
        format!(
            "Bundle({} {}, r0={}, a={}, b={}, valid={})",
            self.inner.case_id,
            self.inner.twist,
            self.inner.r0,
            show(&self.inner.a),
            show(&self.inner.b),
            self.inner.valid
        )
    }
}

/// Polynomial ring over named variables.
#[pyclass(name = "Ring", frozen)]
struct PyRing {
    ctx: Ctx,
}

#[pymethods]
impl PyRing {
    #[new]
    fn new(names: Vec<String>) -> PyResult<Self> {
        Ok(PyRing {
            ctx: VariableContext::new(&names).map_err(err)?.into_ctx(),
        })
    }

    /// Builds a polynomial from `(coefficient, monomial)` pairs such as
    /// `[(1, "x^2"), ("-1/2", "x*y")]`.
    fn poly(&self, terms: Vec<(Bound<'_, PyAny>, String)>) -> PyResult<PyPoly> {
        let mut p = CorePoly::zero(&self.ctx);
        for (c, m) in terms {
            let mono = self.ctx.parse_monomial(&m).map_err(err)?;
            p.add_term(mono, to_rat(&c)?);
        }
        Ok(PyPoly { inner: p })
    }

    fn var(&self, name: &str) -> PyResult<PyPoly> {
        Ok(PyPoly {
            inner: CorePoly::var(&self.ctx, name).map_err(err)?,
        })
    }
}

/// Exact sparse polynomial.
#[pyclass(name = "Polynomial", frozen)]
struct PyPoly {
    inner: CorePoly,
}

#[pymethods]
impl PyPoly {
    fn __add__(&self, other: &PyPoly) -> PyResult<PyPoly> {
        Ok(PyPoly { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn __sub__(&self, other: &PyPoly) -> PyResult<PyPoly> {
        Ok(PyPoly { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn __mul__(&self, other: &PyPoly) -> PyResult<PyPoly> {
        Ok(PyPoly { inner: self.inner.mul(&other.inner).map_err(err)? })
    }

    fn __eq__(&self, other: &PyPoly) -> bool {
        self.inner == other.inner
    }

    fn scale(&self, c: &Bound<'_, PyAny>) -> PyResult<PyPoly> {
        Ok(PyPoly { inner: self.inner.scale(&to_rat(c)?) })
    }

    /// Iterated partial derivative along variable names.
    fn diff(&self, word: Vec<String>) -> PyResult<PyPoly> {
        let w: Vec<&str> = word.iter().map(String::as_str).collect();
        Ok(PyPoly { inner: self.inner.diff(&w).map_err(err)? })
    }

    /// Coefficient of a monomial given as text.
    fn coeff<'py>(&self, py: Python<'py>, mono: &str) -> PyResult<Bound<'py, PyAny>> {
        let m = self.inner.ctx().parse_monomial(mono).map_err(err)?;
        frac(py, &self.inner.coeff(&m))
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Polynomial({})", self.inner)
    }
}

#[pyfunction]
fn lookup_case(id: &str) -> PyResult<PyCase> {
    Ok(PyCase {
        inner: jordan::lookup_case(id).map_err(err)?,
    })
}

/// Case ids in the standard sweep.
#[pyfunction]
#[pyo3(signature = (pmax = 12, nmax = 12))]
fn case_ids(pmax: u32, nmax: u32) -> Vec<String> {
    sweep_ids(pmax, nmax)
}

/// Bundle table rows as dictionaries with fraction-string values.
#[pyfunction]
#[pyo3(signature = (pmax = 12, nmax = 12))]
fn table<'py>(py: Python<'py>, pmax: u32, nmax: u32) -> PyResult<Bound<'py, PyList>> {
    let out = PyList::empty(py);
    for id in sweep_ids(pmax, nmax) {
        let c = jordan::lookup_case(&id).map_err(err)?;
        for r in table_rows(&c) {
            let d = PyDict::new(py);
            d.set_item("case_id", &r.case_id)?;
            d.set_item("twist", r.twist.to_string())?;
            d.set_item("r0", frac(py, &r.r0)?)?;
            d.set_item("a", frac_opt(py, &r.a)?)?;
            d.set_item("b", frac_opt(py, &r.b)?)?;
            d.set_item("valid", r.valid)?;
            d.set_item("vacuum_label", &r.vacuum_label)?;
            d.set_item("alpha", r.alpha)?;
            d.set_item("pi1_order", r.pi1_order)?;
            out.append(d)?;
        }
    }
    Ok(out)
}

/// `(gammas, norm)` with `norm = ||f0^n s0 / n!||^2`.
#[pyfunction]
fn ladder_norms<'py>(
    py: Python<'py>,
    r0: &Bound<'py, PyAny>,
    a: &Bound<'py, PyAny>,
    b: &Bound<'py, PyAny>,
    n: u32,
) -> PyResult<(Bound<'py, PyList>, Bound<'py, PyAny>)> {
    let (g, norm) = ladder::ladder_norms(&to_rat(r0)?, &to_rat(a)?, &to_rat(b)?, n).map_err(err)?;
    Ok((frac_list(py, &g)?, frac(py, &norm)?))
}

#[pyfunction]
fn pochhammer<'py>(py: Python<'py>, x: &Bound<'py, PyAny>, n: u32) -> PyResult<Bound<'py, PyAny>> {
    frac(py, &hyperg::pochhammer(&to_rat(x)?, n))
}

#[pyfunction]
fn kernel_coefficients<'py>(
    py: Python<'py>,
    r0: &Bound<'py, PyAny>,
    a: &Bound<'py, PyAny>,
    b: &Bound<'py, PyAny>,
    terms: u32,
) -> PyResult<Bound<'py, PyList>> {
    let p = hyperg::kernel_coefficients(&to_rat(r0)?, &to_rat(a)?, &to_rat(b)?, terms).map_err(err)?;
    frac_list(py, &p)
}

/// `(partial_sum, remainder_bound)` of `2F1(a, b; 1+r0; -y)`.
#[pyfunction]
fn matrix_coefficient<'py>(
    py: Python<'py>,
    r0: &Bound<'py, PyAny>,
    a: &Bound<'py, PyAny>,
    b: &Bound<'py, PyAny>,
    y: &Bound<'py, PyAny>,
    terms: u32,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let v = hyperg::matrix_coefficient(&to_rat(r0)?, &to_rat(a)?, &to_rat(b)?, &to_rat(y)?, terms)
        .map_err(err)?;
    Ok((frac(py, &v.value)?, frac(py, &v.remainder_bound)?))
}

/// Bracket closure report for `so44`, `g2` or `oscillator(n)`.
#[pyfunction]
fn verify_model<'py>(py: Python<'py>, model: &str, levels: u32) -> PyResult<Bound<'py, PyDict>> {
    let kind: ModelKind = model.parse().map_err(err)?;
    let m = models::build_model(kind).map_err(err)?;
    let rep = py
        .detach(|| models::verify_brackets(&m, levels))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("count", rep.count)?;
    d.set_item("rank", rep.rank)?;
    d.set_item("closed", rep.closed)?;
    d.set_item("stable", rep.stable)?;
    d.set_item("passed", rep.passed())?;
    Ok(d)
}

/// Highest-weight norms divided by `(n!)^2` from the solved Gram matrices,
/// for levels `0..=levels`. Raises `ValueError` if any Gram check fails.
#[pyfunction]
fn gram_hw_norms<'py>(py: Python<'py>, model: &str, levels: u32) -> PyResult<Bound<'py, PyList>> {
    let kind: ModelKind = model.parse().map_err(err)?;
    let m = models::build_model(kind).map_err(err)?;
    let rep = py.detach(|| models::solve_gram(&m, levels)).map_err(err)?;
    if !rep.passed() {
        return Err(PyValueError::new_err(rep.failures.join("; ")));
    }
    let norms = (0..=levels)
        .map(|n| models::model_hw_norm(&m, &rep, n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    frac_list(py, &norms)
}

#[pymodule(name = "orbitq")]
fn orbitq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCase>()?;
    m.add_class::<PyBundle>()?;
    m.add_class::<PyRing>()?;
    m.add_class::<PyPoly>()?;
    m.add_function(wrap_pyfunction!(lookup_case, m)?)?;
    m.add_function(wrap_pyfunction!(case_ids, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(ladder_norms, m)?)?;
    m.add_function(wrap_pyfunction!(pochhammer, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(verify_model, m)?)?;
    m.add_function(wrap_pyfunction!(gram_hw_norms, m)?)?;
    Ok(())
}
