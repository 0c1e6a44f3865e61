//! Python module `gridformer`: shapes, datasets, the occupancy model,
//! two-stage training, mesh extraction and metrics.
//!
//! Configs cross the boundary as plain dicts with the same keys as the
//! TOML run config; unknown keys raise `ValueError`.

use std::path::PathBuf;

use gridformer::fields::{self, Dataset as CoreDataset, ShapeSpec};
use gridformer::meshing::{self, Mesh as CoreMesh};
use gridformer::metrics::{self, EvalConfig};
use gridformer::model::{self, Checkpoint, EncodedField, ModelConfig, ModelParams};
use gridformer::tensor::primitive_suite;
use gridformer::training::{self, TrainConfig, Trainer as CoreTrainer};
use gridformer::Error;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString};
use serde::de::DeserializeOwned;
use serde::Serialize;

type Point = [f64; 3];

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::NonFinite { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::EmptyBoundary | Error::EmptyMesh => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for gridformer::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

// ------------------------------------------------------------ dict configs

fn to_toml(obj: &Bound<'_, PyAny>) -> PyResult<Option<toml::Value>> {
    if obj.is_none() {
        return Ok(None);
    }
    // bool before int: Python bools are ints
    let v = if obj.is_instance_of::<PyBool>() {
        toml::Value::Boolean(obj.extract()?)
    } else if obj.is_instance_of::<PyInt>() {
        toml::Value::Integer(obj.extract()?)
    } else if obj.is_instance_of::<PyFloat>() {
        toml::Value::Float(obj.extract()?)
    } else if obj.is_instance_of::<PyString>() {
        toml::Value::String(obj.extract()?)
    } else if let Ok(d) = obj.cast::<PyDict>() {
        toml::Value::Table(to_table(d)?)
    } else if let Ok(l) = obj.cast::<PyList>() {
        let mut out = Vec::new();
        for item in l.iter() {
            out.extend(to_toml(&item)?);
        }
        toml::Value::Array(out)
    } else {
        return Err(PyValueError::new_err(format!("unsupported config value {obj}")));
    };
    Ok(Some(v))
}

fn to_table(d: &Bound<'_, PyDict>) -> PyResult<toml::Table> {
    let mut t = toml::Table::new();
    for (k, v) in d.iter() {
        if let Some(v) = to_toml(&v)? {
            t.insert(k.extract::<String>()?, v);
        }
    }
    Ok(t)
}

fn config_from<T: DeserializeOwned + Default>(d: Option<&Bound<'_, PyDict>>) -> PyResult<T> {
    match d {
        None => Ok(T::default()),
        Some(d) => to_table(d)?
            .try_into()
            .map_err(|e: toml::de::Error| PyValueError::new_err(e.to_string())),
    }
}

fn from_toml<'py>(py: Python<'py>, v: &toml::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        toml::Value::Boolean(b) => b.into_pyobject(py)?.to_owned().into_any(),
        toml::Value::Integer(i) => i.into_pyobject(py)?.into_any(),
        toml::Value::Float(f) => f.into_pyobject(py)?.into_any(),
        toml::Value::String(s) => s.into_pyobject(py)?.into_any(),
        toml::Value::Array(a) => {
            let items = a.iter().map(|x| from_toml(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        toml::Value::Table(t) => {
            let d = PyDict::new(py);
            for (k, x) in t {
                d.set_item(k, from_toml(py, x)?)?;
            }
            d.into_any()
        }
        toml::Value::Datetime(d) => d.to_string().into_pyobject(py)?.into_any(),
    })
}

fn config_dict<'py>(py: Python<'py>, cfg: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let t = toml::Table::try_from(cfg).map_err(|e| PyValueError::new_err(e.to_string()))?;
    from_toml(py, &toml::Value::Table(t))
}

// ------------------------------------------------------------------ shapes

/// Analytic solid inside the unit cube.
#[pyclass(name = "Shape", module = "gridformer", frozen, from_py_object)]
#[derive(Clone)]
pub struct Shape {
    pub spec: ShapeSpec,
}

impl Shape {
    fn checked(spec: ShapeSpec) -> PyResult<Self> {
        spec.validate().py()?;
        Ok(Self { spec })
    }
}

#[pymethods]
impl Shape {
    #[staticmethod]
    fn sphere(center: Point, radius: f64) -> PyResult<Self> {
        Self::checked(ShapeSpec::Sphere { center, radius })
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn cuboid(center: Point, half_extents: Point) -> PyResult<Self> {
        Self::checked(ShapeSpec::Box { center, half_extents })
    }

    /// Ring in the xy-plane around the z axis through `center`.
    #[staticmethod]
    fn torus(center: Point, major: f64, minor: f64) -> PyResult<Self> {
        Self::checked(ShapeSpec::Torus { center, major, minor })
    }

    #[staticmethod]
    fn union(parts: Vec<Shape>) -> PyResult<Self> {
        Self::checked(ShapeSpec::Union(parts.into_iter().map(|s| s.spec).collect()))
    }

    /// Overlapping sphere and cube.
    #[staticmethod]
    fn toy_scene() -> Self {
        Self {
            spec: ShapeSpec::toy_scene(),
        }
    }

    /// Signed distance, negative inside.
    fn sdf(&self, points: Vec<Point>) -> Vec<f64> {
        points.iter().map(|&p| self.spec.sdf(p)).collect()
    }

    fn occupancy(&self, points: Vec<Point>) -> PyResult<Vec<bool>> {
        points
            .iter()
            .map(|&p| fields::analytic_occupancy(&self.spec, p))
            .collect::<Result<_, _>>()
            .py()
    }

    /// Surface points with Gaussian noise `sigma`.
    #[pyo3(signature = (n, sigma=0.0, seed=0))]
    fn sample_surface(&self, n: usize, sigma: f64, seed: u64) -> PyResult<Vec<Point>> {
        Ok(fields::sample_surface(&self.spec, n, sigma, seed).py()?.coords)
    }

    fn __repr__(&self) -> String {
        format!("Shape({:?})", self.spec)
    }
}

// ----------------------------------------------------------------- dataset

/// Input cloud plus labelled uniform queries.
#[pyclass(name = "Dataset", module = "gridformer", skip_from_py_object)]
#[derive(Clone)]
pub struct Dataset {
    pub inner: CoreDataset,
}

#[pymethods]
impl Dataset {
    #[staticmethod]
    #[pyo3(signature = (shape, n_points=3000, sigma=0.005, n_queries=100_000, boundary_radius=0.08, seed=0))]
    fn generate(
        shape: &Shape,
        n_points: usize,
        sigma: f64,
        n_queries: usize,
        boundary_radius: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = CoreDataset::generate(&shape.spec, n_points, sigma, n_queries, boundary_radius, seed).py()?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: CoreDataset::read(&path).py()?,
        })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(&path).py()
    }

    #[getter]
    fn points(&self) -> Vec<Point> {
        self.inner.points.coords.clone()
    }

    #[getter]
    fn queries(&self) -> Vec<Point> {
        self.inner.queries.coords.clone()
    }

    #[getter]
    fn labels(&self) -> Vec<bool> {
        self.inner.queries.labels.clone()
    }

    #[getter]
    fn boundary_mask(&self) -> Vec<bool> {
        self.inner.queries.boundary_mask.clone()
    }

    /// Re-marks boundary queries with a new radius.
    fn mark_boundary(&mut self, radius: f64) -> PyResult<usize> {
        let found = fields::extract_boundary(&self.inner.queries, radius).py()?;
        self.inner.queries = found.queries;
        Ok(found.count)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(points={}, queries={})",
            self.inner.points.len(),
            self.inner.queries.len()
        )
    }
}

// ------------------------------------------------------------------- model

/// Encoded feature grids of one point cloud.
#[pyclass(name = "Field", module = "gridformer", frozen)]
pub struct Field {
    inner: EncodedField,
}

#[pymethods]
impl Field {
    #[getter]
    fn resolutions(&self) -> [usize; 3] {
        self.inner.resolutions()
    }
}

/// Occupancy network parameters.
#[pyclass(name = "Model", module = "gridformer", skip_from_py_object)]
#[derive(Clone)]
pub struct Model {
    pub params: ModelParams,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (config=None, seed=0))]
    fn new(config: Option<&Bound<'_, PyDict>>, seed: u64) -> PyResult<Self> {
        let cfg: ModelConfig = config_from(config)?;
        Ok(Self {
            params: ModelParams::init(&cfg, seed).py()?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            params: Checkpoint::read(&path).py()?.params,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        Checkpoint::new(self.params.clone()).write(&path).py()
    }

    #[getter]
    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        config_dict(py, self.params.config())
    }

    #[getter]
    fn num_parameters(&self) -> usize {
        self.params.tensors().iter().map(|t| t.data().len()).sum()
    }

    fn encode(&self, py: Python<'_>, points: Vec<Point>) -> PyResult<Field> {
        let inner = py.detach(|| model::encode(&self.params, &points)).py()?;
        Ok(Field { inner })
    }

    /// Occupancy logits at `queries`.
    #[pyo3(signature = (field, queries, threads=1))]
    fn decode(&self, py: Python<'_>, field: &Field, queries: Vec<Point>, threads: usize) -> PyResult<Vec<f64>> {
        py.detach(|| model::decode(&self.params, &field.inner, &queries, threads))
            .py()
    }

    /// Occupancy probabilities at `queries` for the cloud `points`.
    #[pyo3(signature = (points, queries, threads=1))]
    fn occupancy(&self, py: Python<'_>, points: Vec<Point>, queries: Vec<Point>, threads: usize) -> PyResult<Vec<f64>> {
        py.detach(|| -> gridformer::Result<Vec<f64>> {
            let field = model::encode(&self.params, &points)?;
            let logits = model::decode(&self.params, &field, &queries, threads)?;
            Ok(logits.into_iter().map(model::occupancy_probability).collect())
        })
        .py()
    }

    /// Mesh of the `tau` level set, adaptively refined unless `dense`.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (points, initial_res=32, steps=2, tau=0.5, dense=false, threads=1))]
    fn reconstruct(
        &self,
        py: Python<'_>,
        points: Vec<Point>,
        initial_res: usize,
        steps: u32,
        tau: f64,
        dense: bool,
        threads: usize,
    ) -> PyResult<Mesh> {
        let out = py
            .detach(|| -> gridformer::Result<meshing::MiseOutput> {
                let field = model::encode(&self.params, &points)?;
                let mut f = |q: &[Point]| -> gridformer::Result<Vec<f64>> {
                    Ok(model::decode(&self.params, &field, q, threads)?
                        .into_iter()
                        .map(model::occupancy_probability)
                        .collect())
                };
                if dense {
                    meshing::dense_extract(&mut f, initial_res << steps, tau)
                } else {
                    meshing::mise_extract(&mut f, initial_res, steps, tau)
                }
            })
            .py()?;
        Ok(Mesh {
            inner: out.mesh,
            evaluations: out.evaluations,
        })
    }
}

// ---------------------------------------------------------------- training

/// Two-stage trainer. Stage 1 fits uniform queries; stage 2 finetunes on
/// boundary queries with the margin loss.
#[pyclass(name = "Trainer", module = "gridformer", unsendable)]
pub struct Trainer {
    inner: CoreTrainer,
}

#[pymethods]
impl Trainer {
    #[new]
    #[pyo3(signature = (model, dataset, config=None))]
    fn new(model: &Model, dataset: &Dataset, config: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let cfg: TrainConfig = config_from(config)?;
        let inner = CoreTrainer::new(model.params.clone(), dataset.inner.clone(), cfg).py()?;
        Ok(Self { inner })
    }

    /// Runs stage 1; returns the per-step losses.
    fn stage1(&mut self) -> PyResult<Vec<f64>> {
        let r = training::train_stage1(&mut self.inner).py()?;
        Ok(r.trace.records.iter().map(|r| r.loss).collect())
    }

    /// Runs stage 2; returns the per-step losses.
    fn stage2(&mut self) -> PyResult<Vec<f64>> {
        let r = training::train_stage2(&mut self.inner).py()?;
        Ok(r.trace.records.iter().map(|r| r.loss).collect())
    }

    /// Copy of the current parameters.
    #[getter]
    fn model(&self) -> Model {
        Model {
            params: self.inner.params.clone(),
        }
    }

    #[getter]
    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        config_dict(py, self.inner.config())
    }
}

// ------------------------------------------------------------------ meshes

/// Triangle mesh with per-vertex normals.
#[pyclass(name = "Mesh", module = "gridformer", skip_from_py_object)]
#[derive(Clone)]
pub struct Mesh {
    pub inner: CoreMesh,
    /// Field evaluations spent extracting it, 0 when loaded.
    #[pyo3(get)]
    pub evaluations: usize,
}

#[pymethods]
impl Mesh {
    #[staticmethod]
    fn read_obj(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: meshing::read_obj(&path).py()?,
            evaluations: 0,
        })
    }

    fn write_obj(&self, path: PathBuf) -> PyResult<()> {
        meshing::write_obj(&self.inner, &path).py()
    }

    #[getter]
    fn vertices(&self) -> Vec<Point> {
        self.inner.vertices.clone()
    }

    #[getter]
    fn triangles(&self) -> Vec<[usize; 3]> {
        self.inner.triangles.clone()
    }

    #[getter]
    fn normals(&self) -> Vec<Point> {
        self.inner.normals.clone()
    }

    fn is_closed_manifold(&self) -> bool {
        self.inner.is_closed_manifold()
    }

    fn euler_characteristic(&self) -> i64 {
        self.inner.euler_characteristic()
    }

    fn surface_area(&self) -> f64 {
        self.inner.surface_area()
    }

    fn __len__(&self) -> usize {
        self.inner.triangles.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(vertices={}, triangles={})",
            self.inner.vertices.len(),
            self.inner.triangles.len()
        )
    }
}

/// Marching cubes over `(res + 1)³` lattice values, x-major.
#[pyfunction]
#[pyo3(signature = (values, res, tau=0.5))]
fn marching_cubes(values: Vec<f64>, res: usize, tau: f64) -> PyResult<Mesh> {
    let grid = meshing::ScalarGrid::new(res, values).py()?;
    Ok(Mesh {
        inner: meshing::marching_cubes(&grid, tau).py()?,
        evaluations: 0,
    })
}

/// Adaptive extraction of the `tau` level set of `field`, a callable
/// mapping a list of points to a list of values.
#[pyfunction]
#[pyo3(signature = (field, initial_res=32, steps=2, tau=0.5))]
fn mise_extract(field: &Bound<'_, PyAny>, initial_res: usize, steps: u32, tau: f64) -> PyResult<Mesh> {
    let mut failure: Option<PyErr> = None;
    let mut f = |pts: &[Point]| -> gridformer::Result<Vec<f64>> {
        let values = field.call1((pts.to_vec(),)).and_then(|v| v.extract::<Vec<f64>>());
        values.map_err(|e| {
            let msg = e.to_string();
            failure = Some(e);
            Error::Contract(format!("field callback failed: {msg}"))
        })
    };
    let out = meshing::mise_extract(&mut f, initial_res, steps, tau);
    if let Some(e) = failure {
        return Err(e);
    }
    let out = out.py()?;
    Ok(Mesh {
        inner: out.mesh,
        evaluations: out.evaluations,
    })
}

// ----------------------------------------------------------------- metrics

/// IoU, Chamfer distances, normal consistency and F-score of `mesh`
/// against `shape`, as a dict.
#[pyfunction]
#[pyo3(signature = (mesh, shape, config=None))]
fn evaluate<'py>(
    py: Python<'py>,
    mesh: &Mesh,
    shape: &Shape,
    config: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg: EvalConfig = config_from(config)?;
    let r = py
        .detach(|| metrics::evaluate_reconstruction(&mesh.inner, &shape.spec, &cfg))
        .py()?;
    let d = PyDict::new(py);
    d.set_item("iou", r.iou)?;
    d.set_item("chamfer_l1_x100", r.chamfer_l1_x100)?;
    d.set_item("chamfer_l2_x10000", r.chamfer_l2_x10000)?;
    d.set_item("normal_consistency", r.normal_consistency)?;
    d.set_item("f_score_1pct", r.f_score_1pct)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (a, b, threshold=0.01))]
fn chamfer_and_fscore<'py>(
    py: Python<'py>,
    a: Vec<Point>,
    b: Vec<Point>,
    threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = metrics::chamfer_and_fscore(&a, &b, threshold).py()?;
    let d = PyDict::new(py);
    d.set_item("cd_l1", r.cd_l1)?;
    d.set_item("cd_l2", r.cd_l2)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("fscore", r.fscore)?;
    Ok(d)
}

#[pyfunction]
fn volumetric_iou(pred: Vec<bool>, gt: Vec<bool>) -> PyResult<f64> {
    metrics::volumetric_iou(&pred, &gt).py()
}

/// Worst relative gradient error per primitive, plus the end-to-end loss
/// checks under `loss(margin=m)` keys.
#[pyfunction]
#[pyo3(signature = (trials=3, seed=0))]
fn gradcheck<'py>(py: Python<'py>, trials: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (p, e) in primitive_suite(trials, seed).py()? {
        d.set_item(p.name(), e)?;
    }
    for margin in [0.0, 2.0] {
        let r = training::micro_loss_gradcheck(margin, seed).py()?;
        d.set_item(format!("loss(margin={margin:?})"), r.max_rel_err)?;
    }
    Ok(d)
}

#[pymodule]
#[pyo3(name = "gridformer")]
pub fn gridformer_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Shape>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<Field>()?;
    m.add_class::<Model>()?;
    m.add_class::<Trainer>()?;
    m.add_class::<Mesh>()?;
    m.add_function(wrap_pyfunction!(marching_cubes, m)?)?;
    m.add_function(wrap_pyfunction!(mise_extract, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(chamfer_and_fscore, m)?)?;
    m.add_function(wrap_pyfunction!(volumetric_iou, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    Ok(())
}
