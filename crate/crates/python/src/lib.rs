//! Python bindings for `qdrt`.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qdrt::geometry::Vec3;
use qdrt::montecarlo::{self, CompareOptions, McExperiment, Mode, PlacementSharing};
use qdrt::placement::PlacementRegion;
use qdrt::raytrace::{self, LogisticRcs};
use qdrt::rcs::{self, BistaticGeometry, FacetMesh, PlacementAngles};
use qdrt::scene::{self as sc, ObjectKind};
use qdrt::stats::{self, FitResult, GofResult};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_kind(kind: &str) -> PyResult<ObjectKind> {
    kind.parse().map_err(value_err)
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

#[pyclass(name = "Scene", module = "pyqdrt", skip_from_py_object)]
#[derive(Clone)]
struct PyScene {
    inner: sc::Scene,
}

#[pymethods]
impl PyScene {
    /// Default scenario, or the given TOML document.
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(text) => sc::load_scene(text).map_err(value_err)?,
            None => sc::Scene::default(),
        };
        Ok(PyScene { inner })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        Self::new(Some(&text))
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(value_err)
    }

    #[getter]
    fn frequency_hz(&self) -> f64 {
        self.inner.frequency_hz
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength()
    }

    #[getter]
    fn tx_position(&self) -> (f64, f64, f64) {
        let p = self.inner.tx_position_m;
        (p.x, p.y, p.z)
    }

    #[getter]
    fn rx_position(&self) -> (f64, f64, f64) {
        let p = self.inner.rx_position_m;
        (p.x, p.y, p.z)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scene(frequency_hz={}, street_length_m={}, street_width_m={})",
            self.inner.frequency_hz, self.inner.street_length_m, self.inner.street_width_m
        )
    }
}

fn scene_or_default(scene: Option<&PyScene>) -> sc::Scene {
    scene.map(|s| s.inner.clone()).unwrap_or_default()
}

fn path_dict<'py>(py: Python<'py>, p: &raytrace::PropagationPath) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let (r1, r2) = p.geometry.legs();
    d.set_item("kind", p.kind.as_str())?;
    d.set_item("r1", r1)?;
    d.set_item("r2", r2)?;
    d.set_item("delay_ns", p.delay_s * 1e9)?;
    d.set_item("excess_delay_ns", p.excess_delay_s * 1e9)?;
    d.set_item("path_loss_db", p.path_loss_db)?;
    d.set_item("sigma_dbsm", p.sigma_dbsm)?;
    Ok(d)
}

/// LOS path of the scene.
#[pyfunction]
#[pyo3(signature = (scene=None))]
fn trace_los<'py>(py: Python<'py>, scene: Option<&PyScene>) -> PyResult<Bound<'py, PyDict>> {
    let p = raytrace::trace_los(&scene_or_default(scene)).map_err(value_err)?;
    path_dict(py, &p)
}

/// First-order wall and ground reflections.
#[pyfunction]
#[pyo3(signature = (scene=None))]
fn trace_reflections<'py>(py: Python<'py>, scene: Option<&PyScene>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    raytrace::trace_reflections(&scene_or_default(scene))
        .iter()
        .map(|p| path_dict(py, p))
        .collect()
}

fn geometry(incident: [f64; 3], scattered: [f64; 3], wavelength: f64) -> PyResult<BistaticGeometry> {
    BistaticGeometry::new(vec3(incident).normalized(), vec3(scattered).normalized(), wavelength).map_err(value_err)
}

/// PO bistatic RCS (m²) of an axis-aligned box centred at the origin.
#[pyfunction]
fn box_rcs(length: f64, width: f64, height: f64, incident: [f64; 3], scattered: [f64; 3], wavelength: f64) -> PyResult<f64> {
    let mesh = FacetMesh::from_box_dims(length, width, height).map_err(value_err)?;
    rcs::mesh_rcs(&mesh, &geometry(incident, scattered, wavelength)?).map_err(value_err)
}

/// Closed-form bistatic RCS (m²) of a z-aligned conducting cylinder.
#[pyfunction]
fn cylinder_rcs(radius: f64, length: f64, incident: [f64; 3], scattered: [f64; 3], wavelength: f64) -> PyResult<f64> {
    let cyl = sc::Cylinder::new(radius, length, Vec3::new(0.0, 0.0, 0.0)).map_err(value_err)?;
    Ok(rcs::cylinder_rcs(&cyl, &geometry(incident, scattered, wavelength)?))
}

/// RCS samples (dBsm) of a box object over uniform placements.
#[pyfunction]
#[pyo3(signature = (kind, count, seed=0, scene=None))]
fn rcs_dataset(kind: &str, count: usize, seed: u64, scene: Option<&PyScene>) -> PyResult<Vec<f64>> {
    let scene = scene_or_default(scene);
    let kind = parse_kind(kind)?;
    let d = scene.box_dims(kind);
    let mesh = FacetMesh::from_box_dims(d.length_m, d.width_m, d.height_m).map_err(value_err)?;
    let source = PlacementAngles {
        tx: scene.tx_position_m,
        rx: scene.rx_position_m,
        region: PlacementRegion::for_kind(&scene, kind),
        wavelength_m: scene.wavelength(),
    };
    Ok(rcs::generate_rcs_dataset(&mesh, &source, count, seed).rcs_dbsm())
}

fn fit_dict<'py>(py: Python<'py>, f: &FitResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let params = PyDict::new(py);
    for (k, v) in f.distribution.params() {
        params.set_item(k, v)?;
    }
    d.set_item("family", format!("{:?}", f.family()).to_lowercase())?;
    d.set_item("params", params)?;
    d.set_item("loglik", f.log_likelihood)?;
    d.set_item("n", f.sample_count)?;
    Ok(d)
}

#[pyfunction]
fn fit_logistic<'py>(py: Python<'py>, samples: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    fit_dict(py, &stats::fit_logistic(&samples).map_err(value_err)?)
}

#[pyfunction]
fn fit_weibull<'py>(py: Python<'py>, samples: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    fit_dict(py, &stats::fit_weibull(&samples).map_err(value_err)?)
}

#[pyfunction]
fn fit_lognormal<'py>(py: Python<'py>, samples: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    fit_dict(py, &stats::fit_lognormal(&samples).map_err(value_err)?)
}

fn gof_dict<'py>(py: Python<'py>, g: &GofResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("T", g.statistic)?;
    d.set_item("p_value", g.p_value)?;
    d.set_item("p_value_asymptotic", g.p_value_asymptotic)?;
    d.set_item("n_permutations", g.n_permutations)?;
    d.set_item("alpha", g.alpha)?;
    d.set_item("passed", g.passed())?;
    Ok(d)
}

/// Two-sample Cramér–von Mises test with permutation p-value.
#[pyfunction]
#[pyo3(signature = (x, y, n_permutations=stats::DEFAULT_PERMUTATIONS, seed=0, alpha=0.01))]
fn cvm_two_sample<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    y: Vec<f64>,
    n_permutations: usize,
    seed: u64,
    alpha: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = py
        .detach(|| stats::cvm_two_sample(&x, &y, n_permutations, seed, alpha))
        .map_err(value_err)?;
    gof_dict(py, &g)
}

/// Logistic (μ, s) fitted to a deterministic RCS dataset.
#[pyfunction]
#[pyo3(signature = (kind, count=10_000, seed=0, scene=None))]
fn fit_quasi_law(py: Python<'_>, kind: &str, count: usize, seed: u64, scene: Option<&PyScene>) -> PyResult<(f64, f64)> {
    let scene = scene_or_default(scene);
    let kind = parse_kind(kind)?;
    let (law, _) = py
        .detach(|| montecarlo::fit_quasi_law(&scene, kind, count, seed))
        .map_err(value_err)?;
    Ok((law.mu_dbsm, law.scale_db))
}

fn law(mu: Option<f64>, s: Option<f64>) -> PyResult<Option<LogisticRcs>> {
    match (mu, s) {
        (Some(mu), Some(s)) => Ok(Some(LogisticRcs::new(mu, s).map_err(value_err)?)),
        (None, None) => Ok(None),
        _ => Err(PyValueError::new_err("give both law_mu and law_scale or neither")),
    }
}

/// One Monte-Carlo experiment. Quasi mode needs `law_mu` and `law_scale`.
#[pyfunction]
#[pyo3(signature = (kind, n, mode="deterministic", replications=1000, seed=0, law_mu=None, law_scale=None, scene=None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    kind: &str,
    n: usize,
    mode: &str,
    replications: usize,
    seed: u64,
    law_mu: Option<f64>,
    law_scale: Option<f64>,
    scene: Option<&PyScene>,
) -> PyResult<Bound<'py, PyDict>> {
    let mode: Mode = mode.parse().map_err(value_err)?;
    let mut exp = McExperiment::new(scene_or_default(scene), parse_kind(kind)?, n, mode, seed);
    exp.replications = replications;
    exp.quasi_law = law(law_mu, law_scale)?;
    let r = py.detach(|| montecarlo::run_experiment(&exp)).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("mode", r.mode.as_str())?;
    d.set_item("n", r.n_objects)?;
    d.set_item("seed", r.master_seed)?;
    d.set_item("path_loss_db", r.path_loss_db)?;
    d.set_item("excess_delays_ns", r.excess_delays_ns)?;
    Ok(d)
}

/// D-RT against QD-RT: CvM tests on path loss and pooled excess delay.
/// The quasi law is fitted unless `law_mu`/`law_scale` are given.
#[pyfunction]
#[pyo3(signature = (
    kind, n=5, replications=1000, seed=0, alpha=0.01, n_permutations=stats::DEFAULT_PERMUTATIONS,
    independent_placements=true, law_mu=None, law_scale=None, scene=None
))]
#[allow(clippy::too_many_arguments)]
fn compare_modes<'py>(
    py: Python<'py>,
    kind: &str,
    n: usize,
    replications: usize,
    seed: u64,
    alpha: f64,
    n_permutations: usize,
    independent_placements: bool,
    law_mu: Option<f64>,
    law_scale: Option<f64>,
    scene: Option<&PyScene>,
) -> PyResult<Bound<'py, PyDict>> {
    let scene = scene_or_default(scene);
    let kind = parse_kind(kind)?;
    let options = CompareOptions {
        replications,
        n_permutations,
        alpha,
        sharing: if independent_placements {
            PlacementSharing::Independent
        } else {
            PlacementSharing::Shared
        },
        ..CompareOptions::default()
    };
    let given = law(law_mu, law_scale)?;
    let c = py
        .detach(|| {
            let l = match given {
                Some(l) => l,
                None => montecarlo::fit_quasi_law(&scene, kind, 10_000, seed)?.0,
            };
            montecarlo::compare_modes(&scene, kind, n, l, seed, &options)
        })
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("path_loss", gof_dict(py, &c.path_loss)?)?;
    d.set_item("excess_delay", gof_dict(py, &c.excess_delay)?)?;
    d.set_item("law", (c.quasi_law.mu_dbsm, c.quasi_law.scale_db))?;
    d.set_item("passed", c.passed())?;
    d.set_item("deterministic_path_loss_db", c.deterministic.path_loss_db)?;
    d.set_item("quasi_path_loss_db", c.quasi.path_loss_db)?;
    Ok(d)
}

#[pymodule]
fn pyqdrt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SPEED_OF_LIGHT", sc::SPEED_OF_LIGHT)?;
    m.add_class::<PyScene>()?;
    m.add_function(wrap_pyfunction!(trace_los, m)?)?;
    m.add_function(wrap_pyfunction!(trace_reflections, m)?)?;
    m.add_function(wrap_pyfunction!(box_rcs, m)?)?;
    m.add_function(wrap_pyfunction!(cylinder_rcs, m)?)?;
    m.add_function(wrap_pyfunction!(rcs_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logistic, m)?)?;
    m.add_function(wrap_pyfunction!(fit_weibull, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lognormal, m)?)?;
    m.add_function(wrap_pyfunction!(cvm_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(fit_quasi_law, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(compare_modes, m)?)?;
    Ok(())
}
