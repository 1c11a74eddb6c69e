//! Classical joint distributions induced by a scenario, and the information
//! quantities computed from them. All information is measured in bits.

mod csiszar;

pub use csiszar::{
    check_phi_condition, conditional_csiszar_measure, csiszar_measure, log_grid, CsiszarPhi,
    PhiConditionCheck,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{tensor_all, CMatrix, Scenario, Tolerances};

/// Largest dense table this crate will allocate.
pub const MAX_TABLE_ENTRIES: usize = 10_000_000;

/// Imaginary part of a computed probability above this is an input error.
const IMAG_TOLERANCE: f64 = 1e-9;

/// Dense probability table over several discrete axes, row-major
/// (the last axis varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    axis_sizes: Vec<usize>,
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn new(axis_sizes: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(axis_sizes, table, Tolerances::default().prob)
    }

    /// Clips entries within `tol` below zero (or above one), then renormalizes.
    /// Entries further out of range, or a total further than `tol` from one,
    /// are rejected.
    pub fn with_tolerance(axis_sizes: Vec<usize>, mut table: Vec<f64>, tol: f64) -> Result<Self> {
        if axis_sizes.is_empty() || axis_sizes.contains(&0) {
            return Err(Error::InvalidDistribution(format!("bad axis sizes {axis_sizes:?}")));
        }
        let n = checked_table_size(&axis_sizes)?;
        if table.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: table.len(),
            });
        }
        for p in table.iter_mut() {
            if !p.is_finite() || *p < -tol || *p > 1.0 + tol {
                return Err(Error::InvalidDistribution(format!("entry {p} out of range")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        table.iter_mut().for_each(|p| *p /= total);
        Ok(Self { axis_sizes, table })
    }

    pub fn axis_sizes(&self) -> &[usize] {
        &self.axis_sizes
    }

    pub fn num_axes(&self) -> usize {
        self.axis_sizes.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.axis_sizes.len());
        index
            .iter()
            .zip(&self.axis_sizes)
            .fold(0, |acc, (&i, &n)| {
                assert!(i < n, "index {i} out of range for axis of size {n}");
                acc * n + i
            })
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.table[self.flat_index(index)]
    }

    /// Marginal over `axes` (sorted ascending in the result layout), unnormalized
    /// sums of the retained entries.
    pub fn marginal(&self, spec: &MarginalSpec) -> Result<Vec<f64>> {
        self.check_axes(spec.axes())?;
        let mut axes = spec.axes().to_vec();
        axes.sort_unstable();
        let out_len: usize = axes.iter().map(|&a| self.axis_sizes[a]).product();
        let mut out = vec![0.0; out_len];
        let mut digits = vec![0usize; self.axis_sizes.len()];
        for &p in &self.table {
            if p != 0.0 {
                let idx = axes
                    .iter()
                    .fold(0, |acc, &a| acc * self.axis_sizes[a] + digits[a]);
                out[idx] += p;
            }
            increment(&mut digits, &self.axis_sizes);
        }
        Ok(out)
    }

    /// Restricts to entries where every `(axis, value)` holds and renormalizes.
    /// Conditioned axes remain with size one so axis numbering is unchanged.
    pub fn condition_on(&self, fixed: &[(usize, usize)]) -> Result<Self> {
        for &(axis, value) in fixed {
            if axis >= self.num_axes() || value >= self.axis_sizes[axis] {
                return Err(Error::InvalidAxes(format!(
                    "cannot condition on axis {axis} = {value}"
                )));
            }
        }
        let mut sizes = self.axis_sizes.clone();
        for &(axis, _) in fixed {
            sizes[axis] = 1;
        }
        let mut table = Vec::with_capacity(sizes.iter().product());
        let mut digits = vec![0usize; self.axis_sizes.len()];
        for &p in &self.table {
            if fixed.iter().all(|&(a, v)| digits[a] == v) {
                table.push(p);
            }
            increment(&mut digits, &self.axis_sizes);
        }
        let mass: f64 = table.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilitySlice);
        }
        table.iter_mut().for_each(|p| *p /= mass);
        Ok(Self {
            axis_sizes: sizes,
            table,
        })
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        if let Some(&a) = axes.iter().find(|&&a| a >= self.num_axes()) {
            return Err(Error::InvalidAxes(format!(
                "axis {a} out of range for {} axes",
                self.num_axes()
            )));
        }
        Ok(())
    }
}

fn increment(digits: &mut [usize], sizes: &[usize]) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < sizes[i] {
            return;
        }
        digits[i] = 0;
    }
}

fn checked_table_size(sizes: &[usize]) -> Result<usize> {
    let mut n: usize = 1;
    for &s in sizes {
        n = n
            .checked_mul(s)
            .filter(|&n| n <= MAX_TABLE_ENTRIES)
            .ok_or(Error::TableTooLarge(n.saturating_mul(s)))?;
    }
    Ok(n)
}

/// A set of axes to retain when marginalizing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalSpec {
    axes: Vec<usize>,
}

impl MarginalSpec {
    pub fn new(axes: impl Into<Vec<usize>>) -> Result<Self> {
        let mut axes: Vec<usize> = axes.into();
        if axes.is_empty() {
            return Err(Error::InvalidAxes("marginal needs at least one axis".into()));
        }
        axes.sort_unstable();
        if let Some(w) = axes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidAxes(format!("axis {} repeated", w[0])));
        }
        Ok(Self { axes })
    }

    pub fn axis(a: usize) -> Self {
        Self { axes: vec![a] }
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn union(&self, other: &MarginalSpec) -> Result<MarginalSpec> {
        if let Some(&a) = self.axes.iter().find(|a| other.axes.contains(a)) {
            return Err(Error::OverlappingAxes(a));
        }
        let mut axes = self.axes.clone();
        axes.extend_from_slice(&other.axes);
        MarginalSpec::new(axes)
    }
}

/// Σ −p log₂ p with 0 log 0 = 0.
///
/// Clamped at zero: a lone mass of 1 + ε would otherwise give −ε.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Table over `(a_1, …, a_K, b)` with entries Tr[(φ_{a_1} ⊗ … ⊗ φ_{a_K}) M_b] Π_k p_{a_k}.
pub fn joint_distribution(s: &Scenario) -> Result<JointDistribution> {
    joint_distribution_with(s, &Tolerances::default())
}

pub fn joint_distribution_with(s: &Scenario, tol: &Tolerances) -> Result<JointDistribution> {
    let mut sizes = s.state_counts();
    sizes.push(s.joint_povm().len());
    let n = checked_table_size(&sizes)?;
    let k = s.num_subsystems();
    let mut table = Vec::with_capacity(n);
    let mut tuple = vec![0usize; k];
    let counts = s.state_counts();
    loop {
        let prior: f64 = (0..k).map(|l| s.subsystem(l).priors()[tuple[l]]).product();
        let rho = tensor_all((0..k).map(|l| s.subsystem(l).states()[tuple[l]].matrix()));
        for m in s.joint_povm().matrices() {
            table.push(real_probability(&rho, m)? * prior);
        }
        if !advance(&mut tuple, &counts) {
            break;
        }
    }
    // The total deviates from one by at most the POVM's completeness residual.
    JointDistribution::with_tolerance(sizes, table, tol.prob.max(tol.sum))
}

/// Real part of Tr(ρ M), rejecting a non-negligible imaginary part.
pub(crate) fn real_probability(rho: &CMatrix, m: &CMatrix) -> Result<f64> {
    let z = rho.trace_product(m);
    if z.im.abs() > IMAG_TOLERANCE {
        return Err(Error::ComplexProbability(z.im));
    }
    Ok(z.re)
}

/// Odometer step over a mixed-radix tuple; false once it wraps around.
pub(crate) fn advance(tuple: &mut [usize], sizes: &[usize]) -> bool {
    for i in (0..tuple.len()).rev() {
        tuple[i] += 1;
        if tuple[i] < sizes[i] {
            return true;
        }
        tuple[i] = 0;
    }
    false
}

/// Entropy of the marginal on `spec`, in bits.
pub fn entropy(d: &JointDistribution, spec: &MarginalSpec) -> Result<f64> {
    Ok(shannon_entropy(&d.marginal(spec)?))
}

/// I(left; right) = H(left) + H(right) − H(left, right).
pub fn mutual_information(
    d: &JointDistribution,
    left: &MarginalSpec,
    right: &MarginalSpec,
) -> Result<f64> {
    let both = left.union(right)?;
    Ok(entropy(d, left)? + entropy(d, right)? - entropy(d, &both)?)
}

/// I(left; right | given) = H(left,given) + H(right,given) − H(left,right,given) − H(given).
pub fn conditional_mutual_information(
    d: &JointDistribution,
    left: &MarginalSpec,
    right: &MarginalSpec,
    given: &MarginalSpec,
) -> Result<f64> {
    let lg = left.union(given)?;
    let rg = right.union(given)?;
    let all = left.union(right)?.union(given)?;
    Ok(entropy(d, &lg)? + entropy(d, &rg)? - entropy(d, &all)? - entropy(d, given)?)
}

/// I(left; right | axis = value): mutual information of the renormalized slice.
///
/// Fails with [`Error::ZeroProbabilitySlice`] when the value never occurs.
pub fn mi_given_value(
    d: &JointDistribution,
    left: &MarginalSpec,
    right: &MarginalSpec,
    axis: usize,
    value: usize,
) -> Result<f64> {
    mi_given_values(d, left, right, &[(axis, value)])
}

/// Like [`mi_given_value`] but fixing several axes at once.
pub fn mi_given_values(
    d: &JointDistribution,
    left: &MarginalSpec,
    right: &MarginalSpec,
    fixed: &[(usize, usize)],
) -> Result<f64> {
    let both = left.union(right)?;
    if let Some(&(a, _)) = fixed.iter().find(|(a, _)| both.axes().contains(a)) {
        return Err(Error::OverlappingAxes(a));
    }
    let slice = d.condition_on(fixed)?;
    mutual_information(&slice, left, right)
}
