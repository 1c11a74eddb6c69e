use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{hermiticity_defect, hermitize, min_eigenvalue, validate_elements, CMatrix, Tolerances};
use crate::error::{Error, Result};

/// Normalized quantum state on a single Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_hermitian_psd(&matrix, tol)?;
        let matrix = hermitize(&matrix)?;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(Self { matrix })
    }

    /// Pure state |ψ⟩⟨ψ| from an unnormalized ket.
    pub fn pure(ket: &[num_complex::Complex64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidTrace(0.0));
        }
        let scaled: Vec<_> = ket.iter().map(|z| z / norm).collect();
        Self::new(CMatrix::projector(&scaled))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

fn check_hermitian_psd(m: &CMatrix, tol: &Tolerances) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > tol.herm {
        return Err(Error::NotHermitian(defect));
    }
    let min = min_eigenvalue(m)?;
    if min < -tol.psd {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

/// Identifies a POVM outcome.
///
/// Joint POVMs read from files use raw indices; the constructions label each
/// effective outcome with the context state indices of the other subsystems
/// and the joint outcome it came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutcomeLabel {
    Raw(usize),
    Composite { context: Vec<usize>, outcome: usize },
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::Raw(b) => write!(f, "{b}"),
            OutcomeLabel::Composite { context, outcome } => {
                write!(f, "(")?;
                for a in context {
                    write!(f, "{a},")?;
                }
                write!(f, "{outcome})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub label: OutcomeLabel,
    pub matrix: CMatrix,
}

/// A complete set of labelled positive operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        Self::with_tolerances(elements, &Tolerances::default())
    }

    pub fn with_tolerances(elements: Vec<PovmElement>, tol: &Tolerances) -> Result<Self> {
        let povm = Self::unchecked(elements)?;
        for e in &povm.elements {
            check_hermitian_psd(&e.matrix, tol)?;
        }
        let report = validate_elements(povm.dim, povm.matrices(), tol.psd, tol.sum);
        if report.completeness_residual > tol.sum {
            return Err(Error::Incomplete(report.completeness_residual));
        }
        Ok(povm)
    }

    /// Labels the matrices `0, 1, …` in order.
    pub fn from_matrices(matrices: Vec<CMatrix>) -> Result<Self> {
        Self::new(
            matrices
                .into_iter()
                .enumerate()
                .map(|(b, matrix)| PovmElement {
                    label: OutcomeLabel::Raw(b),
                    matrix,
                })
                .collect(),
        )
    }

    /// Checks shape and label uniqueness only; positivity and completeness
    /// are left to [`super::validate_povm`].
    pub(crate) fn unchecked(elements: Vec<PovmElement>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidScenario("POVM has no elements".into()))?;
        let dim = first.matrix.rows();
        let mut seen = HashSet::new();
        for e in &elements {
            if !e.matrix.is_square() {
                return Err(Error::NotSquare {
                    rows: e.matrix.rows(),
                    cols: e.matrix.cols(),
                });
            }
            if e.matrix.rows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.matrix.rows(),
                });
            }
            if !seen.insert(&e.label) {
                return Err(Error::DuplicateLabel(e.label.to_string()));
            }
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn matrices(&self) -> impl Iterator<Item = &CMatrix> {
        self.elements.iter().map(|e| &e.matrix)
    }

    pub fn labels(&self) -> impl Iterator<Item = &OutcomeLabel> {
        self.elements.iter().map(|e| &e.label)
    }
}

/// States one subsystem may be prepared in, with their prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    states: Vec<DensityMatrix>,
    priors: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<DensityMatrix>, priors: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(states, priors, &Tolerances::default())
    }

    pub fn with_tolerances(
        states: Vec<DensityMatrix>,
        priors: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidPriors("ensemble has no states".into()));
        }
        if states.len() != priors.len() {
            return Err(Error::InvalidPriors(format!(
                "{} states but {} priors",
                states.len(),
                priors.len()
            )));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        if let Some(p) = priors.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidPriors(format!("prior {p} is not a probability")));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > tol.prob {
            return Err(Error::InvalidPriors(format!("priors sum to {total}")));
        }
        Ok(Self { dim, states, priors })
    }

    /// A single state prepared with certainty.
    pub fn certain(state: DensityMatrix) -> Self {
        Self {
            dim: state.dim(),
            states: vec![state],
            priors: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Σ p_a φ_a.
    pub fn average_state(&self) -> CMatrix {
        self.states
            .iter()
            .zip(&self.priors)
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, (s, &p)| {
                &acc + &s.matrix().scale(p)
            })
    }
}

/// K independently prepared subsystems measured by one joint POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    subsystems: Vec<Ensemble>,
    joint_povm: Povm,
}

impl Scenario {
    pub fn new(subsystems: Vec<Ensemble>, joint_povm: Povm) -> Result<Self> {
        if subsystems.len() < 2 {
            return Err(Error::InvalidScenario(format!(
                "need at least 2 subsystems, got {}",
                subsystems.len()
            )));
        }
        let total: usize = subsystems.iter().map(Ensemble::dim).product();
        if total != joint_povm.dim() {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: joint_povm.dim(),
            });
        }
        Ok(Self {
            subsystems,
            joint_povm,
        })
    }

    pub fn num_subsystems(&self) -> usize {
        self.subsystems.len()
    }

    pub fn subsystems(&self) -> &[Ensemble] {
        &self.subsystems
    }

    pub fn subsystem(&self, k: usize) -> &Ensemble {
        &self.subsystems[k]
    }

    pub fn joint_povm(&self) -> &Povm {
        &self.joint_povm
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(Ensemble::dim).collect()
    }

    /// Number of states of each subsystem, in order.
    pub fn state_counts(&self) -> Vec<usize> {
        self.subsystems.iter().map(Ensemble::len).collect()
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn density_matrix_rejects_bad_trace_and_negativity() {
        assert!(matches!(
            DensityMatrix::new(CMatrix::diag(&[0.5, 0.6])),
            Err(Error::InvalidTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::diag(&[1.5, -0.5])),
            Err(Error::NotPsd(_))
        ));
        let non_herm = CMatrix::from_rows(&[
            vec![Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)],
        ])
        .unwrap();
        assert!(matches!(DensityMatrix::new(non_herm), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn povm_rejects_duplicate_labels() {
        let e = |b| PovmElement {
            label: OutcomeLabel::Raw(b),
            matrix: CMatrix::diag(&[0.5, 0.5]),
        };
        assert!(matches!(Povm::new(vec![e(0), e(0)]), Err(Error::DuplicateLabel(_))));
        assert!(Povm::new(vec![e(0), e(1)]).is_ok());
    }

    #[test]
    fn povm_rejects_incomplete_sets() {
        let r = Povm::from_matrices(vec![CMatrix::diag(&[0.9, 0.0]), CMatrix::diag(&[0.0, 1.0])]);
        assert!(matches!(r, Err(Error::Incomplete(_))));
    }

    #[test]
    fn ensemble_prior_checks() {
        let s = || DensityMatrix::new(CMatrix::diag(&[1.0, 0.0])).unwrap();
        assert!(Ensemble::new(vec![s(), s()], vec![0.5, 0.6]).is_err());
        assert!(Ensemble::new(vec![s(), s()], vec![1.5, -0.5]).is_err());
        assert!(Ensemble::new(vec![s()], vec![0.5, 0.5]).is_err());
        assert!(Ensemble::new(vec![], vec![]).is_err());
        assert!(Ensemble::new(vec![s(), s()], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn scenario_requires_two_subsystems_and_matching_dim() {
        let ens = Ensemble::certain(DensityMatrix::new(CMatrix::diag(&[1.0, 0.0])).unwrap());
        let id4 = Povm::from_matrices(vec![CMatrix::identity(4)]).unwrap();
        assert!(Scenario::new(vec![ens.clone()], Povm::from_matrices(vec![CMatrix::identity(2)]).unwrap())
            .is_err());
        assert!(Scenario::new(vec![ens.clone(), ens.clone(), ens.clone()], id4.clone()).is_err());
        assert!(Scenario::new(vec![ens.clone(), ens], id4).is_ok());
    }

    #[test]
    fn label_display() {
        assert_eq!(OutcomeLabel::Raw(3).to_string(), "3");
        let l = OutcomeLabel::Composite {
            context: vec![1, 0],
            outcome: 2,
        };
        assert_eq!(l.to_string(), "(1,0,2)");
    }
}
