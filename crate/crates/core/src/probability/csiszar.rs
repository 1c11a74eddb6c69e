use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{increment, JointDistribution, MarginalSpec};
use crate::error::{Error, Result};

type PhiFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Convex generator Φ of a Csiszár information measure.
#[derive(Clone)]
pub struct CsiszarPhi {
    name: String,
    phi: Arc<PhiFn>,
}

impl fmt::Debug for CsiszarPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CsiszarPhi").field("name", &self.name).finish()
    }
}

impl CsiszarPhi {
    /// Wraps `phi` after checking midpoint convexity on a logarithmic grid
    /// over [1e−6, 1e6].
    pub fn new(name: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let candidate = Self {
            name: name.into(),
            phi: Arc::new(phi),
        };
        candidate.check_convexity(&log_grid(1e-6, 1e6, 121))?;
        Ok(candidate)
    }

    /// Φ(x) = −log₂ x, which turns the measure into Shannon mutual information.
    pub fn neg_log2() -> Self {
        Self::new("neg_log2", |x: f64| -x.log2()).expect("−log₂ is convex")
    }

    /// Φ(x) = 1 − x. Convex, but fails Φ(x) + Φ(y) ≥ Φ(xy).
    pub fn one_minus() -> Self {
        Self::new("one_minus", |x: f64| 1.0 - x).expect("affine maps are convex")
    }

    /// Φ(x) = (√x − 1)², the squared Hellinger generator.
    pub fn hellinger() -> Self {
        Self::new("hellinger", |x: f64| (x.sqrt() - 1.0).powi(2)).expect("Hellinger generator is convex")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    fn check_convexity(&self, grid: &[f64]) -> Result<()> {
        for (i, &x) in grid.iter().enumerate() {
            for &y in &grid[i + 1..] {
                let (fx, fy) = (self.eval(x), self.eval(y));
                let chord = 0.5 * (fx + fy);
                let mid = self.eval(0.5 * (x + y));
                let violation = mid - chord;
                if !(violation <= 1e-9 * chord.abs().max(1.0)) {
                    return Err(Error::NonConvexPhi {
                        name: self.name.clone(),
                        x,
                        y,
                        violation,
                    });
                }
            }
        }
        Ok(())
    }
}

/// `n` points spaced evenly in log scale from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// I^C = Σ g Φ(f/g) with g the joint law of (left, right) and f the product of
/// its marginals. Points with g = 0 contribute nothing.
pub fn csiszar_measure(
    d: &JointDistribution,
    left: &MarginalSpec,
    right: &MarginalSpec,
    phi: &CsiszarPhi,
) -> Result<f64> {
    let both = left.union(right)?;
    let g = d.marginal(&both)?;
    let pl = d.marginal(left)?;
    let pr = d.marginal(right)?;
    let sizes: Vec<usize> = both.axes().iter().map(|&a| d.axis_sizes()[a]).collect();
    let mut digits = vec![0usize; sizes.len()];
    let mut total = 0.0;
    for &gx in &g {
        if gx > 0.0 {
            let (mut li, mut ri) = (0, 0);
            for (pos, &axis) in both.axes().iter().enumerate() {
                if left.axes().contains(&axis) {
                    li = li * sizes[pos] + digits[pos];
                } else {
                    ri = ri * sizes[pos] + digits[pos];
                }
            }
            let ratio = pl[li] * pr[ri] / gx;
            let value = phi.eval(ratio);
            if !value.is_finite() {
                return Err(Error::PhiEvaluation {
                    name: phi.name.clone(),
                    arg: ratio,
                    value,
                });
            }
            total += gx * value;
        }
        increment(&mut digits, &sizes);
    }
    Ok(total)
}

/// Prior-weighted sum of per-slice measures: Σ_v p(given = v) · I^C(left; right | given = v).
pub fn conditional_csiszar_measure(
    d: &JointDistribution,
    left: &MarginalSpec,
    right: &MarginalSpec,
    given: &MarginalSpec,
    phi: &CsiszarPhi,
) -> Result<f64> {
    left.union(right)?.union(given)?;
    let weights = d.marginal(given)?;
    let sizes: Vec<usize> = given.axes().iter().map(|&a| d.axis_sizes()[a]).collect();
    let mut digits = vec![0usize; sizes.len()];
    let mut total = 0.0;
    for &w in &weights {
        if w > 0.0 {
            let fixed: Vec<(usize, usize)> = given.axes().iter().copied().zip(digits.iter().copied()).collect();
            let slice = d.condition_on(&fixed)?;
            total += w * csiszar_measure(&slice, left, right, phi)?;
        }
        increment(&mut digits, &sizes);
    }
    Ok(total)
}

/// Result of scanning Φ(x) + Φ(y) − Φ(xy) over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiConditionCheck {
    pub passed: bool,
    /// Minimum of Φ(x) + Φ(y) − Φ(xy) over the scanned pairs.
    pub worst_violation: f64,
    /// The (x, y) pair attaining the minimum (first in scan order).
    pub worst_at: (f64, f64),
}

/// Scans Φ(x) + Φ(y) ≥ Φ(xy) over the Cartesian square of `grid`.
pub fn check_phi_condition(phi: &CsiszarPhi, grid: &[f64]) -> Result<PhiConditionCheck> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("Φ condition grid is empty".into()));
    }
    let mut worst = f64::INFINITY;
    let mut worst_at = (grid[0], grid[0]);
    for &x in grid {
        for &y in grid {
            let margin = phi.eval(x) + phi.eval(y) - phi.eval(x * y);
            if margin < worst || margin.is_nan() {
                worst = margin;
                worst_at = (x, y);
            }
        }
    }
    Ok(PhiConditionCheck {
        passed: worst >= -1e-9,
        worst_violation: worst,
        worst_at,
    })
}

#[cfg(test)]
mod tests {
    use super::super::mutual_information;
    use super::*;

    fn spec(a: &[usize]) -> MarginalSpec {
        MarginalSpec::new(a.to_vec()).unwrap()
    }

    #[test]
    fn rejects_concave_phi() {
        assert!(matches!(
            CsiszarPhi::new("log", |x: f64| x.ln()),
            Err(Error::NonConvexPhi { .. })
        ));
    }

    #[test]
    fn neg_log2_reduces_to_shannon_on_correlated_bits() {
        let d = JointDistribution::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let v = csiszar_measure(&d, &spec(&[0]), &spec(&[1]), &CsiszarPhi::neg_log2()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_distribution_gives_phi_of_one() {
        let px = [0.3, 0.7];
        let py = [0.2, 0.5, 0.3];
        let table: Vec<f64> = px.iter().flat_map(|x| py.iter().map(move |y| x * y)).collect();
        let d = JointDistribution::new(vec![2, 3], table).unwrap();
        for phi in [CsiszarPhi::neg_log2(), CsiszarPhi::one_minus(), CsiszarPhi::hellinger()] {
            let v = csiszar_measure(&d, &spec(&[0]), &spec(&[1]), &phi).unwrap();
            assert!(v.abs() < 1e-12, "{}: {v}", phi.name());
        }
    }

    #[test]
    fn reduction_with_non_adjacent_axes() {
        let t: Vec<f64> = (1..=12).map(|i| i as f64 / 78.0).collect();
        let d = JointDistribution::new(vec![2, 3, 2], t).unwrap();
        let (l, r) = (spec(&[0, 2]), spec(&[1]));
        let c = csiszar_measure(&d, &l, &r, &CsiszarPhi::neg_log2()).unwrap();
        let m = mutual_information(&d, &l, &r).unwrap();
        assert!((c - m).abs() < 1e-12);
    }

    #[test]
    fn phi_condition_for_neg_log2_is_tight() {
        let chk = check_phi_condition(&CsiszarPhi::neg_log2(), &log_grid(1e-3, 1e3, 25)).unwrap();
        assert!(chk.passed);
        assert!(chk.worst_violation.abs() < 1e-12);
    }

    #[test]
    fn phi_condition_fails_for_one_minus_and_reports_brute_force_worst() {
        let grid = log_grid(0.1, 10.0, 11);
        let phi = CsiszarPhi::one_minus();
        let chk = check_phi_condition(&phi, &grid).unwrap();
        assert!(!chk.passed);
        // (1 − x)(1 − y) is most negative at the grid corners with one factor above one
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for &x in &grid {
            for &y in &grid {
                let v = (1.0 - x) * (1.0 - y);
                if v < best.0 {
                    best = (v, x, y);
                }
            }
        }
        assert!((chk.worst_violation - best.0).abs() < 1e-12);
        assert_eq!(chk.worst_at, (best.1, best.2));
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(check_phi_condition(&CsiszarPhi::neg_log2(), &[]).is_err());
    }

    #[test]
    fn conditional_measure_weights_slices() {
        // (a1, a2, b): in slice a2 = 0, b copies a1; in slice a2 = 1, b is independent
        let mut t = vec![0.0; 8];
        t[0] = 0.2;
        t[4 + 1] = 0.2;
        for a1 in 0..2 {
            for b in 0..2 {
                t[a1 * 4 + 2 + b] = 0.15;
            }
        }
        let d = JointDistribution::new(vec![2, 2, 2], t).unwrap();
        let v = conditional_csiszar_measure(&d, &spec(&[0]), &spec(&[2]), &spec(&[1]), &CsiszarPhi::neg_log2())
            .unwrap();
        assert!((v - 0.4).abs() < 1e-12);
    }
}
