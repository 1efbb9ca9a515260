//! Python bindings for the canonflex library.
//!
//! Exposes the scheme type together with flexibility, counting,
//! validation, normalization, and generation as a `canonflex_py`
//! extension module.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use canonflex::generator::{random_canon, valid_continuations, GenOptions};
use canonflex::{count_valid_oracle, flexibility, validate, Melody, OracleOptions, Transform};

fn to_py_err(e: canonflex::Error) -> PyErr {
    if e.is_resource_limit() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn melody_from_values(values: Vec<i64>) -> Melody {
    Melody::from_values(&values)
}

fn melody_to_values(m: &Melody) -> Vec<i64> {
    m.notes().iter().map(|n| i64::from(n.value())).collect()
}

/// A canonic scheme: one time/pitch displacement per voice, with at most
/// one voice marked as the bass.
#[pyclass(frozen, name = "Scheme")]
struct PyScheme {
    inner: canonflex::Scheme,
}

#[pymethods]
impl PyScheme {
    /// Parses brace notation such as `{(0,0),(1,-8)B,(3,0)}`.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner: canonflex::Scheme = text.parse().map_err(to_py_err)?;
        Ok(PyScheme { inner })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Scheme({:?})", self.inner.to_string())
    }

    fn __eq__(&self, other: &PyScheme) -> bool {
        self.inner.to_string() == other.inner.to_string()
    }

    /// Voices as `(t, p, is_bass)` triples.
    #[getter]
    fn voices(&self) -> Vec<(i64, i64, bool)> {
        self.inner
            .voices()
            .iter()
            .map(|v| (v.t, v.p_raw, v.is_bass))
            .collect()
    }

    #[getter]
    fn span(&self) -> i64 {
        self.inner.span()
    }

    /// The canonical representative of this scheme's equivalence class.
    fn canonical(&self) -> PyScheme {
        PyScheme {
            inner: self.inner.canonical_form().0,
        }
    }

    /// True when both schemes normalize to the same canonical form.
    fn equivalent(&self, other: &PyScheme) -> bool {
        self.inner.canonical_form().0.to_string() == other.inner.canonical_form().0.to_string()
    }

    /// The dominant eigenvalue of the window-transfer graph.
    fn flexibility(&self) -> PyResult<f64> {
        Ok(flexibility(&self.inner).map_err(to_py_err)?.lambda)
    }

    /// The flexibility when it is an exact integer, else None.
    fn exact_flexibility(&self) -> PyResult<Option<i64>> {
        Ok(flexibility(&self.inner).map_err(to_py_err)?.exact_hint)
    }

    /// The number of valid n-note canons, computed from the window graph.
    fn count(&self, n: usize) -> PyResult<BigUint> {
        let g = canonflex::TransferGraph::build(&self.inner, OracleOptions::default())
            .map_err(to_py_err)?;
        Ok(g.count_valid_fast(n))
    }

    /// The same count by exhaustive depth-first enumeration (slow; for
    /// cross-checking small n).
    fn count_oracle(&self, n: usize) -> PyResult<BigUint> {
        count_valid_oracle(&self.inner, n, OracleOptions::default()).map_err(to_py_err)
    }

    /// Rule violations in a melody, as `(t, voice_i, voice_j, kind)` tuples.
    fn violations(&self, melody: Vec<i64>) -> Vec<(i64, usize, usize, String)> {
        validate(&self.inner, &melody_from_values(melody))
            .into_iter()
            .map(|v| (v.t, v.i, v.j, format!("{:?}", v.kind)))
            .collect()
    }

    /// True when the melody realizes a valid canon under this scheme.
    fn is_valid(&self, melody: Vec<i64>) -> bool {
        validate(&self.inner, &melody_from_values(melody)).is_empty()
    }

    /// Pitch classes that may legally follow the given valid prefix.
    fn continuations(&self, prefix: Vec<i64>) -> PyResult<Vec<i64>> {
        let notes = valid_continuations(&self.inner, &melody_from_values(prefix))
            .map_err(to_py_err)?;
        Ok(notes.into_iter().map(|n| i64::from(n.value())).collect())
    }

    /// A random valid canon of the requested length, grown from the seed
    /// prefix by a backtracking walk. Fixed seeds reproduce fixed output.
    #[pyo3(signature = (length, rng_seed=0, seed_prefix=Vec::new(), avoid_parallel_perfects=true))]
    fn generate(
        &self,
        length: usize,
        rng_seed: u64,
        seed_prefix: Vec<i64>,
        avoid_parallel_perfects: bool,
    ) -> PyResult<Vec<i64>> {
        let opts = GenOptions {
            length,
            rng_seed,
            avoid_parallel_perfects,
            ..GenOptions::default()
        };
        let melody = random_canon(&self.inner, &melody_from_values(seed_prefix), opts)
            .map_err(to_py_err)?;
        Ok(melody_to_values(&melody))
    }

    /// Applies an elementary transform, returning a new scheme.
    fn time_translate(&self, a: i64) -> PyResult<PyScheme> {
        self.apply(Transform::TimeTranslate(a))
    }

    fn pitch_transpose(&self, c: i64) -> PyResult<PyScheme> {
        self.apply(Transform::PitchTranspose(canonflex::PitchClass::new(c)))
    }

    fn shear(&self, m: i64) -> PyResult<PyScheme> {
        self.apply(Transform::Shear(canonflex::PitchClass::new(m)))
    }

    fn invert(&self) -> PyResult<PyScheme> {
        self.apply(Transform::Invert)
    }

    fn time_dilate(&self, num: i64, den: i64) -> PyResult<PyScheme> {
        self.apply(Transform::TimeDilate { numerator: num, denominator: den })
    }
}

impl PyScheme {
    fn apply(&self, tr: Transform) -> PyResult<PyScheme> {
        Ok(PyScheme {
            inner: self.inner.transform(tr).map_err(to_py_err)?,
        })
    }
}

/// Formats an eigenvalue the way the reference tables print it.
#[pyfunction]
fn format_lambda(x: f64) -> String {
    canonflex::format_lambda(x)
}

#[pymodule]
fn canonflex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(format_lambda, m)?)?;
    Ok(())
}
