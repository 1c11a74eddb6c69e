//! Individual measurements built from a joint POVM.
//!
//! Fixing the states of every subsystem except `k` and tracing them out of a
//! joint POVM element leaves an operator on subsystem `k`; collecting these
//! over all joint outcomes gives a projected measurement. Construction 1
//! mixes the projected measurements of every context, weighted by the
//! context's prior. Construction 2 keeps only the projected measurement whose
//! mutual information with subsystem `k` is largest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::{advance, mutual_information, real_probability, JointDistribution, MarginalSpec};
use crate::qcore::{
    hermitize, partial_trace, tensor_all, validate_povm, CMatrix, Ensemble, OutcomeLabel, Povm,
    PovmElement, PovmValidation, Scenario, Tolerances,
};

/// MI values closer than this count as a tie in construction 2.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Construction1,
    Construction2,
}

impl Method {
    pub fn number(self) -> u8 {
        match self {
            Method::Construction1 => 1,
            Method::Construction2 => 2,
        }
    }
}

/// A POVM on one subsystem derived from the scenario's joint POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePovm {
    /// Zero-based subsystem index.
    pub subsystem: usize,
    pub method: Method,
    /// Labels are `Composite { context, outcome }` where `context` lists the
    /// state indices of the other subsystems in order and `outcome` is the
    /// position of the joint POVM element.
    pub povm: Povm,
    /// The context the construction-2 sub-POVM was projected from.
    pub chosen_context: Option<Vec<usize>>,
}

impl EffectivePovm {
    pub fn validation(&self, tol: &Tolerances) -> PovmValidation {
        validate_povm(&self.povm, tol.psd, tol.sum)
    }
}

/// All state-index tuples of the subsystems other than `k`, in lexicographic order.
pub fn context_tuples(s: &Scenario, k: usize) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = (0..s.num_subsystems())
        .filter(|&l| l != k)
        .map(|l| s.subsystem(l).len())
        .collect();
    let mut out = Vec::new();
    let mut tuple = vec![0usize; sizes.len()];
    loop {
        out.push(tuple.clone());
        if !advance(&mut tuple, &sizes) {
            return out;
        }
    }
}

fn check_subsystem(s: &Scenario, k: usize) -> Result<()> {
    if k >= s.num_subsystems() {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem {k} out of range for {} subsystems",
            s.num_subsystems()
        )));
    }
    Ok(())
}

/// Projected measurement on subsystem `k` given the other subsystems' states:
/// `Tr_{ℓ≠k}[(⊗_ℓ φ^(ℓ,k)) M_b]` for every joint outcome `b`, where
/// `φ^(k,k) = I` and `context` holds the state indices of the others.
pub fn projected_povm(s: &Scenario, k: usize, context: &[usize]) -> Result<Vec<CMatrix>> {
    check_subsystem(s, k)?;
    if context.len() + 1 != s.num_subsystems() {
        return Err(Error::InvalidSubsystems(format!(
            "context has {} entries, expected {}",
            context.len(),
            s.num_subsystems() - 1
        )));
    }
    let identity = CMatrix::identity(s.subsystem(k).dim());
    let mut ctx = context.iter();
    let mut factors = Vec::with_capacity(s.num_subsystems());
    for l in 0..s.num_subsystems() {
        if l == k {
            factors.push(&identity);
        } else {
            let a = *ctx.next().expect("context length checked");
            let ens = s.subsystem(l);
            let state = ens.states().get(a).ok_or_else(|| {
                Error::InvalidSubsystems(format!("state {a} out of range for subsystem {l}"))
            })?;
            factors.push(state.matrix());
        }
    }
    let sandwich = tensor_all(factors);
    let dims = s.dims();
    s.joint_povm()
        .matrices()
        .map(|m| hermitize(&partial_trace(&(&sandwich * m), &dims, &[k])?))
        .collect()
}

fn context_prior(s: &Scenario, k: usize, context: &[usize]) -> f64 {
    (0..s.num_subsystems())
        .filter(|&l| l != k)
        .zip(context)
        .map(|(l, &a)| s.subsystem(l).priors()[a])
        .product()
}

fn composite_elements(context: &[usize], matrices: Vec<CMatrix>) -> impl Iterator<Item = PovmElement> + '_ {
    matrices.into_iter().enumerate().map(move |(b, matrix)| PovmElement {
        label: OutcomeLabel::Composite {
            context: context.to_vec(),
            outcome: b,
        },
        matrix,
    })
}

/// Prior-weighted mixture of every projected measurement, one element per
/// (context, joint outcome) pair, context-major.
pub fn construction1(s: &Scenario, k: usize) -> Result<EffectivePovm> {
    check_subsystem(s, k)?;
    let mut elements = Vec::new();
    for context in context_tuples(s, k) {
        let weight = context_prior(s, k, &context);
        let projected = projected_povm(s, k, &context)?
            .into_iter()
            .map(|m| m.scale(weight))
            .collect();
        elements.extend(composite_elements(&context, projected));
    }
    Ok(EffectivePovm {
        subsystem: k,
        method: Method::Construction1,
        povm: Povm::unchecked(elements)?,
        chosen_context: None,
    })
}

/// Mutual information between an ensemble and the outcomes of a measurement on it.
pub fn measurement_information(ensemble: &Ensemble, elements: &[CMatrix]) -> Result<f64> {
    let d = outcome_distribution(ensemble, &elements.iter().collect::<Vec<_>>())?;
    mutual_information(&d, &MarginalSpec::axis(0), &MarginalSpec::axis(1))
}

fn outcome_distribution(ensemble: &Ensemble, elements: &[&CMatrix]) -> Result<JointDistribution> {
    let n_out = elements.len();
    let mut table = Vec::with_capacity(ensemble.len() * n_out);
    for (state, &p) in ensemble.states().iter().zip(ensemble.priors()) {
        for m in elements {
            if m.rows() != state.dim() {
                return Err(Error::DimensionMismatch {
                    expected: state.dim(),
                    got: m.rows(),
                });
            }
            table.push(real_probability(state.matrix(), m)? * p);
        }
    }
    let tol = Tolerances::default();
    JointDistribution::with_tolerance(vec![ensemble.len(), n_out], table, tol.prob.max(tol.sum))
}

/// Mutual information of each context's projected measurement with subsystem `k`,
/// in [`context_tuples`] order.
pub fn candidate_informations(s: &Scenario, k: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    check_subsystem(s, k)?;
    context_tuples(s, k)
        .into_iter()
        .map(|context| {
            let mi = measurement_information(s.subsystem(k), &projected_povm(s, k, &context)?)?;
            Ok((context, mi))
        })
        .collect()
}

/// The single projected measurement with the largest mutual information;
/// ties within [`TIE_TOLERANCE`] go to the lexicographically lowest context.
///
/// Contexts with zero prior are still candidates. With more than two
/// subsystems the context is the full tuple of the other subsystems' states.
pub fn construction2(s: &Scenario, k: usize) -> Result<EffectivePovm> {
    let candidates = candidate_informations(s, k)?;
    let mut best = 0;
    for (i, (_, mi)) in candidates.iter().enumerate() {
        if *mi > candidates[best].1 + TIE_TOLERANCE {
            best = i;
        }
    }
    let context = candidates[best].0.clone();
    let elements = composite_elements(&context, projected_povm(s, k, &context)?).collect();
    Ok(EffectivePovm {
        subsystem: k,
        method: Method::Construction2,
        povm: Povm::unchecked(elements)?,
        chosen_context: Some(context),
    })
}

/// Table over (a_k, effective outcome index) with entries Tr[φ_{a_k} M_j] p_{a_k}.
pub fn induced_distribution(s: &Scenario, e: &EffectivePovm) -> Result<JointDistribution> {
    check_subsystem(s, e.subsystem)?;
    let ens = s.subsystem(e.subsystem);
    if e.povm.dim() != ens.dim() {
        return Err(Error::DimensionMismatch {
            expected: ens.dim(),
            got: e.povm.dim(),
        });
    }
    outcome_distribution(ens, &e.povm.matrices().collect::<Vec<_>>())
}
