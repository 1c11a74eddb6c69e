//! JSON documents read and written by the command-line tool.
//!
//! Complex matrices are nested row-major arrays of `[real, imaginary]` pairs.
//! Floats are written in shortest round-trip form, so a parsed file
//! re-serializes to the same bytes.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use splitmeas::constructions::EffectivePovm;
use splitmeas::generators::GenConfig;
use splitmeas::harness::VerificationReport;
use splitmeas::qcore::{CMatrix, DensityMatrix, Ensemble, OutcomeLabel, Povm, PovmElement, Scenario, Tolerances};

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "splitmeas";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub type MatrixFile = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: splitmeas::Error,
    },
}

impl FileError {
    fn invalid(path: impl Into<String>, source: splitmeas::Error) -> Self {
        FileError::Invalid {
            path: path.into(),
            source,
        }
    }
}

/// Deserializes JSON, reporting the field path of the first error.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, FileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        FileError::Parse {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn matrix_to_file(m: &CMatrix) -> MatrixFile {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_file(m: &MatrixFile, dim: usize, path: &str) -> Result<CMatrix, FileError> {
    let rows: Vec<Vec<Complex64>> = m
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    let matrix = CMatrix::from_rows(&rows).map_err(|e| FileError::invalid(path, e))?;
    if matrix.rows() != dim || matrix.cols() != dim {
        return Err(FileError::invalid(
            path,
            splitmeas::Error::DimensionMismatch {
                expected: dim,
                got: if matrix.rows() != dim { matrix.rows() } else { matrix.cols() },
            },
        ));
    }
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    pub label: OutcomeLabel,
    pub matrix: MatrixFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub dim: usize,
    pub elements: Vec<ElementFile>,
}

impl PovmFile {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: p.dim(),
            elements: p
                .elements()
                .iter()
                .map(|e| ElementFile {
                    label: e.label.clone(),
                    matrix: matrix_to_file(&e.matrix),
                })
                .collect(),
        }
    }

    pub fn to_povm(&self, path: &str) -> Result<Povm, FileError> {
        let elements = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| {
                Ok(PovmElement {
                    label: e.label.clone(),
                    matrix: matrix_from_file(&e.matrix, self.dim, &format!("{path}.elements[{i}].matrix"))?,
                })
            })
            .collect::<Result<Vec<_>, FileError>>()?;
        Povm::with_tolerances(elements, &Tolerances::default()).map_err(|e| FileError::invalid(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemFile {
    pub dim: usize,
    pub states: Vec<MatrixFile>,
    pub priors: Vec<f64>,
}

/// A scenario: per-subsystem ensembles plus the joint POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub subsystems: Vec<SubsystemFile>,
    pub joint_povm: PovmFile,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        let file: ScenarioFile = parse_json(text)?;
        if file.version != FORMAT_VERSION {
            return Err(FileError::Parse {
                path: "version".into(),
                message: format!("unsupported version {}, expected {FORMAT_VERSION}", file.version),
            });
        }
        Ok(file)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            version: FORMAT_VERSION,
            subsystems: s
                .subsystems()
                .iter()
                .map(|e| SubsystemFile {
                    dim: e.dim(),
                    states: e.states().iter().map(|st| matrix_to_file(st.matrix())).collect(),
                    priors: e.priors().to_vec(),
                })
                .collect(),
            joint_povm: PovmFile::from_povm(s.joint_povm()),
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario, FileError> {
        let mut subsystems = Vec::with_capacity(self.subsystems.len());
        for (k, sub) in self.subsystems.iter().enumerate() {
            let base = format!("subsystems[{k}]");
            let states = sub
                .states
                .iter()
                .enumerate()
                .map(|(a, m)| {
                    let path = format!("{base}.states[{a}]");
                    DensityMatrix::new(matrix_from_file(m, sub.dim, &path)?).map_err(|e| FileError::invalid(path, e))
                })
                .collect::<Result<Vec<_>, FileError>>()?;
            subsystems.push(
                Ensemble::new(states, sub.priors.clone())
                    .map_err(|e| FileError::invalid(format!("{base}.priors"), e))?,
            );
        }
        let povm = self.joint_povm.to_povm("joint_povm")?;
        Scenario::new(subsystems, povm).map_err(|e| FileError::invalid("subsystems", e))
    }
}

/// An effective POVM produced by `construct`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectivePovmFile {
    pub version: u32,
    /// One-based subsystem number.
    pub subsystem: usize,
    pub method: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_context: Option<Vec<usize>>,
    pub completeness_residual: f64,
    pub min_eigenvalue: f64,
    pub povm: PovmFile,
}

impl EffectivePovmFile {
    pub fn from_effective(e: &EffectivePovm) -> Self {
        let v = e.validation(&Tolerances::default());
        Self {
            version: FORMAT_VERSION,
            subsystem: e.subsystem + 1,
            method: e.method.number(),
            chosen_context: e.chosen_context.clone(),
            completeness_residual: v.completeness_residual,
            min_eigenvalue: v.min_eigenvalue(),
            povm: PovmFile::from_povm(&e.povm),
        }
    }
}

/// Output of `verify`: the suite configuration and its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub tool: String,
    pub tool_version: String,
    pub config: GenConfig,
    pub trials: usize,
    pub report: VerificationReport,
}

impl ReportFile {
    pub fn new(config: GenConfig, trials: usize, report: VerificationReport) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            tool_version: TOOL_VERSION.into(),
            config,
            trials,
            report,
        }
    }
}
