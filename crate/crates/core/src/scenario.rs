//! Scenario files and the built-in catalog.
//!
//! A scenario is one point of a bundle `(𝒫 × F)/G`: the algebra with its
//! inner product, the isotropy of the fiber point, the orbit tensors `P` and
//! `P_F`, and the two curvature oracles. Oracles are either explicit tensors
//! or generated from the algebra (`left_invariant`, `normal_homogeneous`).
//!
//! ```json
//! {
//!   "name": "su2-full",
//!   "algebra": { "dim": 3, "c": [[[...]]], "Q": [[...]], "isotropy": [] },
//!   "P": [[...]], "P_F": [[...]],
//!   "oracle_P": { "generator": "left_invariant", "horizontal": { "dim": 0, "curvature": 0.0 } },
//!   "oracle_F": { "frame_dim": 3, "horizontal": [], "R": [...] },
//!   "capabilities": ["exact_kappa"]
//! }
//! ```

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bundle::BundleData;
use crate::cheeger::OrbitTensor;
use crate::error::Error;
use crate::lie::{isotropy_split, IsotropyDecomposition, LieAlgebraData};
use crate::linalg::{self, Mat, Vector};
use crate::oracle::{group_oracle, normal_homogeneous_oracle, CurvatureOracle, CurvatureTensor, OracleJson};
use crate::validation::ValidationReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub dim: usize,
    pub c: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<Vec<Vec<f64>>>,
}

/// Constant-curvature horizontal block of a generated oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizontalBlock {
    pub dim: usize,
    #[serde(default)]
    pub curvature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Koszul curvature of the left-invariant metric `Q(P·,·)`; free action only.
    LeftInvariant,
    /// Normal homogeneous `G/G_f` with metric `cQ`; scalar orbit tensor only.
    NormalHomogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedOracle {
    pub generator: Generator,
    pub horizontal: HorizontalBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleSpec {
    Generated(GeneratedOracle),
    Explicit(OracleJson),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    ExactKappa,
    LowerOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub algebra: AlgebraJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<Vec<Vec<f64>>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(rename = "P_F")]
    pub p_f: Vec<Vec<f64>>,
    #[serde(rename = "oracle_P")]
    pub oracle_p: OracleSpec,
    #[serde(rename = "oracle_F")]
    pub oracle_f: OracleSpec,
    #[serde(default)]
    pub capabilities: Vec<Capability>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Provenance {
    #[serde(rename = "catalog")]
    Catalog,
    #[serde(rename = "user-file")]
    File(String),
}

/// A validation failure located by a JSON pointer into the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub pointer: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    /// Unreadable file, invalid JSON, or fields of the wrong type.
    Parse { source: String, message: String },
    /// Well-typed input that violates an invariant.
    Validation {
        failures: Vec<Failure>,
        report: Option<ValidationReport>,
    },
    UnknownCatalog(String),
}

impl LoadError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LoadError::Parse { .. } => 2,
            LoadError::Validation { .. } => 3,
            LoadError::UnknownCatalog(_) => 4,
        }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Parse { source, message } => write!(f, "cannot parse {source}: {message}"),
            LoadError::Validation { failures, .. } => {
                let parts: Vec<String> = failures.iter().map(|x| format!("{}: {}", x.pointer, x.message)).collect();
                write!(f, "validation failed: {}", parts.join("; "))
            }
            LoadError::UnknownCatalog(name) => {
                write!(f, "unknown catalog scenario `{name}` (known: {})", catalog_names().join(", "))
            }
        }
    }
}

impl std::error::Error for LoadError {}

fn fail(pointer: &str, err: impl fmt::Display) -> LoadError {
    LoadError::Validation {
        failures: vec![Failure {
            pointer: pointer.to_string(),
            message: err.to_string(),
        }],
        report: None,
    }
}

/// JSON pointer for an error raised while building the bundle.
fn pointer_for(err: &Error) -> &'static str {
    let field = match err {
        Error::Malformed { field, .. } | Error::Invalid { field, .. } => field.as_str(),
        Error::NotSpd { what, .. } => what.as_str(),
        Error::DimensionMismatch { what, .. } => what.as_str(),
        _ => "",
    };
    match field {
        f if f.starts_with("oracle_P") => "/oracle_P",
        f if f.starts_with("oracle_F") => "/oracle_F",
        "P_F" => "/P_F",
        "P" => "/P",
        "Q" => "/algebra/Q",
        "c" => "/algebra/c",
        "dim" => "/algebra/dim",
        _ => "",
    }
}

/// A loaded and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub provenance: Provenance,
    pub capabilities: Vec<Capability>,
    pub algebra_report: ValidationReport,
    pub bundle: BundleData,
    pub source: ScenarioFile,
}

impl Scenario {
    pub fn exact_available(&self) -> bool {
        self.bundle.exact_model().is_some()
    }
}

fn matrix(rows: &[Vec<f64>], pointer: &str, field: &str) -> Result<Mat, LoadError> {
    linalg::mat_from_rows(rows, field).map_err(|e| fail(pointer, e))
}

fn build_oracle(
    spec: &OracleSpec,
    orbit: &OrbitTensor,
    pointer: &str,
) -> Result<CurvatureOracle, LoadError> {
    match spec {
        OracleSpec::Explicit(json) => CurvatureOracle::from_json(json).map_err(|e| fail(pointer, e)),
        OracleSpec::Generated(g) => {
            let block = CurvatureTensor::constant_curvature(g.horizontal.dim, g.horizontal.curvature);
            let built = match g.generator {
                Generator::LeftInvariant => group_oracle(orbit, &block),
                Generator::NormalHomogeneous => normal_homogeneous_oracle(orbit, &block),
            };
            built.map_err(|e| fail(&format!("{pointer}/generator"), e))
        }
    }
}

/// Validate `file` and assemble its bundle data.
pub fn build_scenario(file: ScenarioFile, provenance: Provenance, tol: f64) -> Result<Scenario, LoadError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(fail(
            "/schema_version",
            format!("unsupported schema version {} (expected {SCHEMA_VERSION})", file.schema_version),
        ));
    }
    let a = &file.algebra;
    if a.c.len() != a.dim {
        return Err(fail("/algebra/c", format!("expected {} planes for dim {}, found {}", a.dim, a.dim, a.c.len())));
    }
    let algebra = LieAlgebraData::from_nested(&a.c, &a.q).map_err(|e| fail(pointer_for(&e), e))?;
    let report = algebra.validate(tol).map_err(|e| fail(pointer_for(&e), e))?;
    if !report.passed {
        let failures = report
            .failures()
            .map(|c| Failure {
                pointer: if c.invariant.starts_with('Q') { "/algebra/Q" } else { "/algebra/c" }.to_string(),
                message: format!("{} fails (residual {:e} at {:?})", c.invariant, c.residual, c.worst_index),
            })
            .collect();
        return Err(LoadError::Validation {
            failures,
            report: Some(report),
        });
    }
    let algebra = Arc::new(algebra);

    let (iso, iso_ptr) = match (&file.isotropy, &a.isotropy) {
        (Some(_), Some(_)) => {
            return Err(fail("/isotropy", "isotropy given both at top level and inside the algebra"));
        }
        (Some(v), None) => (v.clone(), "/isotropy"),
        (None, Some(v)) => (v.clone(), "/algebra/isotropy"),
        (None, None) => (Vec::new(), "/isotropy"),
    };
    let iso: Vec<Vector> = iso.into_iter().map(Vector::from_vec).collect();
    let fiber = Arc::new(isotropy_split(algebra.clone(), &iso, tol).map_err(|e| fail(iso_ptr, e))?);
    let group = Arc::new(IsotropyDecomposition::trivial(algebra));

    let p = matrix(&file.p, "/P", "P")?;
    let p_f = matrix(&file.p_f, "/P_F", "P_F")?;
    let p_orbit = OrbitTensor::named(group, p.clone(), "P").map_err(|e| fail("/P", e))?;
    let f_orbit = OrbitTensor::named(fiber.clone(), p_f.clone(), "P_F").map_err(|e| fail("/P_F", e))?;
    let oracle_p = build_oracle(&file.oracle_p, &p_orbit, "/oracle_P")?;
    let oracle_f = build_oracle(&file.oracle_f, &f_orbit, "/oracle_F")?;

    let mut bundle = BundleData::new(fiber, p, p_f, oracle_p, oracle_f, tol).map_err(|e| fail(pointer_for(&e), e))?;
    if file.capabilities.contains(&Capability::ExactKappa) && file.capabilities.contains(&Capability::LowerOnly) {
        return Err(fail("/capabilities", "exact_kappa and lower_only are exclusive"));
    }
    if file.capabilities.contains(&Capability::ExactKappa) && bundle.exact_model().is_none() {
        return Err(fail(
            "/capabilities",
            "exact_kappa needs P on the whole group and oracle_P equal to the left-invariant curvature of P times a horizontal block",
        ));
    }
    if file.capabilities.contains(&Capability::LowerOnly) {
        bundle.disable_exact();
    }
    Ok(Scenario {
        name: file.name.clone(),
        description: file.description.clone(),
        provenance,
        capabilities: file.capabilities.clone(),
        algebra_report: report,
        bundle,
        source: file,
    })
}

pub fn parse_scenario(text: &str, source: &str) -> Result<ScenarioFile, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse {
        source: source.to_string(),
        message: e.to_string(),
    })
}

pub fn load_file(path: &Path, tol: f64) -> Result<Scenario, LoadError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Parse {
        source: display.clone(),
        message: e.to_string(),
    })?;
    let mut file = parse_scenario(&text, &display)?;
    if file.name.is_empty() {
        file.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    build_scenario(file, Provenance::File(display), tol)
}

/// A catalog name, or else a path to a scenario file.
pub fn load_scenario(name_or_path: &str, tol: f64) -> Result<Scenario, LoadError> {
    if let Some(file) = catalog_file(name_or_path) {
        return build_scenario(file, Provenance::Catalog, tol);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return load_file(path, tol);
    }
    Err(LoadError::UnknownCatalog(name_or_path.to_string()))
}

// ---- catalog ----

fn algebra_json(alg: &LieAlgebraData, isotropy: Vec<Vec<f64>>) -> AlgebraJson {
    AlgebraJson {
        dim: alg.dim(),
        c: alg.nested_constants(),
        q: linalg::mat_to_rows(alg.q()),
        isotropy: Some(isotropy),
    }
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    linalg::mat_to_rows(m)
}

fn generated(generator: Generator, dim: usize, curvature: f64) -> OracleSpec {
    OracleSpec::Generated(GeneratedOracle {
        generator,
        horizontal: HorizontalBlock { dim, curvature },
    })
}

fn unit_vector(n: usize, entries: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &(i, x) in entries {
        v[i] = x;
    }
    v
}

struct Entry {
    name: &'static str,
    description: &'static str,
    build: fn() -> ScenarioFile,
}

#[allow(clippy::too_many_arguments)]
fn scenario(
    name: &str,
    description: &str,
    alg: LieAlgebraData,
    isotropy: Vec<Vec<f64>>,
    p: Mat,
    p_f: Mat,
    oracle_p: OracleSpec,
    oracle_f: OracleSpec,
    capabilities: Vec<Capability>,
) -> ScenarioFile {
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        description: description.to_string(),
        algebra: algebra_json(&alg, isotropy),
        isotropy: None,
        p: rows(&p),
        p_f: rows(&p_f),
        oracle_p,
        oracle_f,
        capabilities,
    }
}

fn full_group(name: &str, description: &str, alg: LieAlgebraData, p: Mat) -> ScenarioFile {
    let n = alg.dim();
    scenario(
        name,
        description,
        alg,
        Vec::new(),
        p,
        Mat::identity(n, n),
        generated(Generator::LeftInvariant, 0, 0.0),
        generated(Generator::LeftInvariant, 0, 0.0),
        vec![Capability::ExactKappa],
    )
}

fn su2_full() -> ScenarioFile {
    full_group("su2-full", DESCRIPTIONS[0], LieAlgebraData::su2(), Mat::identity(3, 3))
}

fn su2_berger() -> ScenarioFile {
    let p = Mat::from_diagonal(&Vector::from_vec(vec![0.5, 1.0, 1.0]));
    full_group("su2-berger", DESCRIPTIONS[1], LieAlgebraData::su2(), p)
}

fn so3_full() -> ScenarioFile {
    full_group("so3-full", DESCRIPTIONS[2], LieAlgebraData::so(3), Mat::identity(3, 3))
}

fn so4_full() -> ScenarioFile {
    full_group("so4-full", DESCRIPTIONS[3], LieAlgebraData::so(4), Mat::identity(6, 6))
}

fn so4_so3() -> ScenarioFile {
    // so(3) on the first three coordinates: E01, E02, E12 are basis 0, 1, 3
    let iso = vec![unit_vector(6, &[(0, 1.0)]), unit_vector(6, &[(1, 1.0)]), unit_vector(6, &[(3, 1.0)])];
    scenario(
        "so4-so3",
        DESCRIPTIONS[4],
        LieAlgebraData::so(4),
        iso,
        Mat::identity(6, 6),
        Mat::identity(3, 3),
        generated(Generator::LeftInvariant, 0, 0.0),
        generated(Generator::NormalHomogeneous, 0, 0.0),
        vec![Capability::ExactKappa],
    )
}

fn su2xsu2_diag() -> ScenarioFile {
    let alg = LieAlgebraData::direct_sum(&LieAlgebraData::su2(), &LieAlgebraData::su2());
    let iso = (0..3).map(|i| unit_vector(6, &[(i, 1.0), (i + 3, 1.0)])).collect();
    scenario(
        "su2xsu2-diag",
        DESCRIPTIONS[5],
        alg,
        iso,
        Mat::identity(6, 6),
        Mat::identity(3, 3),
        generated(Generator::LeftInvariant, 0, 0.0),
        generated(Generator::NormalHomogeneous, 0, 0.0),
        vec![Capability::ExactKappa],
    )
}

fn abelian_flat() -> ScenarioFile {
    let alg = LieAlgebraData::abelian(Mat::identity(2, 2)).expect("identity inner product");
    scenario(
        "abelian-flat",
        DESCRIPTIONS[6],
        alg,
        Vec::new(),
        Mat::identity(2, 2),
        Mat::identity(2, 2),
        generated(Generator::LeftInvariant, 2, 0.0),
        generated(Generator::LeftInvariant, 0, 0.0),
        vec![Capability::ExactKappa],
    )
}

fn injected(name: &str, description: &str, curvature: f64) -> ScenarioFile {
    scenario(
        name,
        description,
        LieAlgebraData::su2(),
        vec![unit_vector(3, &[(2, 1.0)])],
        Mat::identity(3, 3),
        Mat::identity(2, 2),
        generated(Generator::LeftInvariant, 3, curvature),
        generated(Generator::NormalHomogeneous, 0, 0.0),
        vec![Capability::ExactKappa],
    )
}

fn injected_base() -> ScenarioFile {
    injected("injected-base", DESCRIPTIONS[7], 1.0)
}

fn injected_base_flat() -> ScenarioFile {
    injected("injected-base-flat", DESCRIPTIONS[8], 0.0)
}

const DESCRIPTIONS: [&str; 9] = [
    "su(2) acting on itself, fiber SU(2) with trivial isotropy, P = P_F = I, no horizontal directions",
    "su(2) with Berger orbit tensor P = diag(0.5, 1, 1), P_F = I, fiber SU(2)",
    "so(3) acting on itself, P = P_F = I, no horizontal directions",
    "so(4) acting on itself, P = P_F = I, no horizontal directions",
    "so(4) with fiber S^3 = SO(4)/SO(3) normal homogeneous, P = I on so(4)",
    "su(2)+su(2) with diagonal isotropy, fiber the normal homogeneous S^3",
    "abelian R^2 with flat oracles and two flat horizontal directions (negative control)",
    "su(2) times a 3-dimensional curvature-1 horizontal block, fiber S^2 = SU(2)/U(1)",
    "injected-base with the horizontal block zeroed (negative control for r_P)",
];

const CATALOG: [Entry; 9] = [
    Entry { name: "su2-full", description: DESCRIPTIONS[0], build: su2_full },
    Entry { name: "su2-berger", description: DESCRIPTIONS[1], build: su2_berger },
    Entry { name: "so3-full", description: DESCRIPTIONS[2], build: so3_full },
    Entry { name: "so4-full", description: DESCRIPTIONS[3], build: so4_full },
    Entry { name: "so4-so3", description: DESCRIPTIONS[4], build: so4_so3 },
    Entry { name: "su2xsu2-diag", description: DESCRIPTIONS[5], build: su2xsu2_diag },
    Entry { name: "abelian-flat", description: DESCRIPTIONS[6], build: abelian_flat },
    Entry { name: "injected-base", description: DESCRIPTIONS[7], build: injected_base },
    Entry { name: "injected-base-flat", description: DESCRIPTIONS[8], build: injected_base_flat },
];

pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

/// `(name, one-line description)` for every catalog scenario.
pub fn catalog_entries() -> Vec<(&'static str, &'static str)> {
    CATALOG.iter().map(|e| (e.name, e.description)).collect()
}

/// The scenario file of a catalog entry.
pub fn catalog_file(name: &str) -> Option<ScenarioFile> {
    CATALOG.iter().find(|e| e.name == name).map(|e| (e.build)())
}

pub fn catalog(name: &str) -> Result<Scenario, LoadError> {
    let file = catalog_file(name).ok_or_else(|| LoadError::UnknownCatalog(name.to_string()))?;
    build_scenario(file, Provenance::Catalog, crate::tol::IDENTITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalog_entry_loads() {
        for name in catalog_names() {
            let s = catalog(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(s.algebra_report.passed, "{name}");
            assert!(s.exact_available(), "{name}");
            assert!(s.bundle.preserves_complement(), "{name}");
        }
    }

    #[test]
    fn catalog_round_trips_through_json() {
        for name in catalog_names() {
            let file = catalog_file(name).unwrap();
            let text = serde_json::to_string(&file).unwrap();
            assert_eq!(parse_scenario(&text, name).unwrap(), file);
        }
    }

    #[test]
    fn so4_so3_complement() {
        let s = catalog("so4-so3").unwrap();
        assert_eq!(s.bundle.fiber_split().complement_dim(), 3);
        let pm = s.bundle.fiber_split().projector_m();
        assert!(linalg::max_abs(&(pm * pm - pm)) < 1e-12);
        assert!((s.bundle.fiber_split().bracket_gap_constant() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_name() {
        assert_eq!(load_scenario("no-such-scenario", 1e-10).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn non_symmetric_q_is_a_validation_error() {
        let mut file = catalog_file("su2-full").unwrap();
        file.algebra.q[0][1] = 0.5;
        let err = build_scenario(file, Provenance::Catalog, 1e-10).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("/algebra/Q"));
    }

    #[test]
    fn bad_json_is_a_parse_error() {
        assert_eq!(parse_scenario("{ not json", "x").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn exact_capability_requires_product_oracle() {
        let mut file = catalog_file("su2-full").unwrap();
        let s = build_scenario(file.clone(), Provenance::Catalog, 1e-10).unwrap();
        let scaled = s.bundle.principal().oracle().scaled(2.0).to_json();
        file.oracle_p = OracleSpec::Explicit(scaled);
        let err = build_scenario(file, Provenance::Catalog, 1e-10).unwrap_err();
        assert!(err.to_string().contains("/capabilities"));
    }
}
