//! Python bindings: current sources, k-space grids, photon amplitudes, state
//! summaries, field reconstruction and the classical oracles.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use photon_ledger::classical_oracle;
use photon_ledger::coherent_state::{self, Estimate};
use photon_ledger::current_model::{self, Geometry, TemporalProfile};
use photon_ledger::field_reconstruction;
use photon_ledger::quadrature::{build_kgrid, KGridSpec, RadialMap};
use photon_ledger::validate::amplitude_for;
use photon_ledger::vector::Vec3;
use photon_ledger::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Validation(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn estimate<'py>(py: Python<'py>, e: &Estimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", e.value)?;
    d.set_item("estimated_error", e.estimated_error)?;
    Ok(d)
}

#[pyclass(name = "CurrentSource", frozen)]
struct PyCurrentSource {
    inner: current_model::CurrentSource,
}

#[pymethods]
impl PyCurrentSource {
    /// Circular loop of `current` (A) and `radius` (m); `wire_radius` (m)
    /// smears the wire with a Gaussian cross-section.
    #[staticmethod]
    #[pyo3(signature = (current, radius, center = [0.0; 3], axis = [0.0, 0.0, 1.0], wire_radius = 0.0))]
    fn circular_loop(current: f64, radius: f64, center: Vec3, axis: Vec3, wire_radius: f64) -> PyResult<Self> {
        let inner = current_model::CurrentSource {
            geometry: Geometry::CircularLoop { current, radius, center, axis, wire_radius },
            profile: TemporalProfile::Static,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Point dipole with moment `I l` (A m) at `position` (m).
    #[staticmethod]
    #[pyo3(signature = (moment, position = [0.0; 3]))]
    fn hertzian_dipole(moment: Vec3, position: Vec3) -> PyResult<Self> {
        let inner = current_model::CurrentSource::hertzian_dipole(moment, position);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Copy of this source driven by `exp(-(t - t0)^2 / (2 sigma^2))`.
    fn with_gaussian_pulse(&self, t0: f64, sigma: f64) -> PyResult<Self> {
        self.with(TemporalProfile::GaussianPulse { t0, sigma })
    }

    /// Copy of this source driven by a ramped `cos(omega (t - t_on))`.
    fn with_truncated_harmonic(&self, omega: f64, t_on: f64, ramp_sigma: f64) -> PyResult<Self> {
        self.with(TemporalProfile::TruncatedHarmonic { omega, t_on, ramp_sigma })
    }

    #[getter]
    fn is_static(&self) -> bool {
        self.inner.profile.is_static()
    }

    fn __repr__(&self) -> String {
        format!("CurrentSource({})", self.inner.describe())
    }
}

impl PyCurrentSource {
    fn with(&self, profile: TemporalProfile) -> PyResult<Self> {
        let inner = self.inner.clone().with_profile(profile);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }
}

#[pyclass(name = "KGrid", frozen)]
struct PyKGrid {
    inner: Arc<photon_ledger::quadrature::KGrid>,
}

#[pymethods]
impl PyKGrid {
    #[new]
    #[pyo3(signature = (k_min, k_max, n_k = 128, n_theta = 64, n_phi = 16, radial_map = "log"))]
    fn new(k_min: f64, k_max: f64, n_k: usize, n_theta: usize, n_phi: usize, radial_map: &str) -> PyResult<Self> {
        let radial_map = match radial_map {
            "log" => RadialMap::Log,
            "linear" => RadialMap::Linear,
            other => return Err(PyValueError::new_err(format!("radial_map must be 'log' or 'linear', got {other:?}"))),
        };
        let spec = KGridSpec { k_min, k_max, n_k, n_theta, n_phi, radial_map };
        Ok(Self { inner: Arc::new(build_kgrid(spec).map_err(to_py)?) })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(k, cos_theta, phi, weight)` of node `index`.
    fn node(&self, index: usize) -> PyResult<(f64, f64, f64, f64)> {
        if index >= self.inner.len() {
            return Err(PyValueError::new_err(format!("node index {index} out of range")));
        }
        let n = self.inner.node(index);
        Ok((n.k, n.cos_theta, n.phi, n.weight))
    }

    #[getter]
    fn cutoffs(&self) -> (f64, f64) {
        let c = self.inner.cutoffs();
        (c.k_min, c.k_max)
    }
}

#[pyclass(name = "PhotonAmplitude", frozen)]
struct PyPhotonAmplitude {
    inner: coherent_state::PhotonAmplitude,
}

#[pymethods]
impl PyPhotonAmplitude {
    fn __len__(&self) -> usize {
        self.inner.values().len()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    /// Complex vector `xi` (m^(3/2)) at node `index`.
    fn at(&self, index: usize) -> PyResult<[num_complex::Complex64; 3]> {
        if index >= self.inner.values().len() {
            return Err(PyValueError::new_err(format!("node index {index} out of range")));
        }
        Ok(self.inner.at(index))
    }

    /// Photon density `|xi|^2` (m^3) at every node.
    fn density(&self) -> Vec<f64> {
        coherent_state::photon_density(&self.inner)
    }

    /// Photon number and cutoff-regulated energies (J).
    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = coherent_state::summarize(&self.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("N", estimate(py, &s.n)?)?;
        d.set_item("H_gamma", estimate(py, &s.h_gamma)?)?;
        d.set_item("V", estimate(py, &s.v)?)?;
        d.set_item("E", estimate(py, &s.e)?)?;
        d.set_item("phase_slope", estimate(py, &s.phase_slope)?)?;
        d.set_item("cutoffs", (s.cutoffs.k_min, s.cutoffs.k_max))?;
        d.set_item("energies_cutoff_regulated", s.energies_cutoff_regulated)?;
        d.set_item("stationary", s.stationary)?;
        Ok(d)
    }

    /// `A` (V s/m), `B` (T), `E_perp` (V/m) at `x` (m) and time `t` (s).
    fn fields<'py>(&self, py: Python<'py>, x: Vec3, t: f64) -> PyResult<Bound<'py, PyDict>> {
        let s = field_reconstruction::reconstruct_fields(&self.inner, &x, t).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("A", s.a)?;
        d.set_item("B", s.b)?;
        d.set_item("E_perp", s.e_perp)?;
        d.set_item("imaginary_residue", s.imaginary_residue)?;
        d.set_item("estimated_error", s.estimated_error)?;
        Ok(d)
    }
}

/// Amplitude of `source` on `grid` at time `t` (s); `eps` (1/s) damps the
/// remote past of a time-dependent drive.
#[pyfunction]
#[pyo3(signature = (source, grid, t = 0.0, eps = 0.0))]
fn amplitude(py: Python<'_>, source: &PyCurrentSource, grid: &PyKGrid, t: f64, eps: f64) -> PyResult<PyPhotonAmplitude> {
    let src = source.inner.clone();
    let g = grid.inner.clone();
    let inner = py.detach(move || amplitude_for(&src, &g, t, eps)).map_err(to_py)?;
    Ok(PyPhotonAmplitude { inner })
}

/// Accumulated phase `Phi(t)` (J s).
#[pyfunction]
#[pyo3(signature = (source, grid, t, eps = 0.0, t_start = None))]
fn phase(source: &PyCurrentSource, grid: &PyKGrid, t: f64, eps: f64, t_start: Option<f64>) -> PyResult<f64> {
    coherent_state::phase(&source.inner, t, &grid.inner, eps, t_start)
        .map(|p| p.phi)
        .map_err(to_py)
}

/// Closed-form photon number of a thin loop.
#[pyfunction]
fn loop_photon_number(current: f64, radius: f64) -> f64 {
    coherent_state::loop_photon_number(current, radius)
}

/// Static magnetic field (T) from the Biot-Savart line integral.
#[pyfunction]
fn biot_savart(source: &PyCurrentSource, x: Vec3) -> PyResult<Vec3> {
    classical_oracle::biot_savart(&source.inner, &x).map(|r| r.value).map_err(to_py)
}

/// Retarded vector potential (V s/m) at `x` (m) and `t` (s).
#[pyfunction]
fn retarded_vector_potential(source: &PyCurrentSource, x: Vec3, t: f64) -> PyResult<Vec3> {
    classical_oracle::retarded_vector_potential(&source.inner, &x, t)
        .map(|r| r.value)
        .map_err(to_py)
}

#[pymodule]
#[pyo3(name = "photon_ledger")]
fn photon_ledger_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCurrentSource>()?;
    m.add_class::<PyKGrid>()?;
    m.add_class::<PyPhotonAmplitude>()?;
    m.add_function(wrap_pyfunction!(amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(phase, m)?)?;
    m.add_function(wrap_pyfunction!(loop_photon_number, m)?)?;
    m.add_function(wrap_pyfunction!(biot_savart, m)?)?;
    m.add_function(wrap_pyfunction!(retarded_vector_potential, m)?)?;
    Ok(())
}
