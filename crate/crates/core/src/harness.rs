//! Randomized verification of the individual-vs-joint information inequalities.
//!
//! Each trial builds both constructions for every subsystem, computes the
//! information each yields, and checks the probability and entropy identities
//! that tie the per-subsystem tables back to the joint table. Violations are
//! recorded per trial; a suite never stops early.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    candidate_informations, construction1, construction2, context_tuples, induced_distribution, EffectivePovm,
};
use crate::error::Result;
use crate::generators::{bb84_bell_scenario, random_scenario, GenConfig};
use crate::probability::{
    conditional_csiszar_measure, csiszar_measure, entropy, joint_distribution, mi_given_values,
    mutual_information, CsiszarPhi, JointDistribution, MarginalSpec,
};
use crate::qcore::{Scenario, Tolerances};

/// Lower bound on every inequality slack except the chain inequality.
pub const SLACK_FLOOR: f64 = -1e-9;
/// Lower bound on the chain-inequality slack.
pub const CHAIN_SLACK_FLOOR: f64 = -1e-12;
/// Upper bound on entry-wise relabeling residuals and the construction-2 slice check.
pub const EXACT_RESIDUAL_LIMIT: f64 = 1e-12;
/// Upper bound on entropy and decomposition residuals, in bits.
pub const ENTROPY_RESIDUAL_LIMIT: f64 = 1e-9;
/// A trial whose construction-1 gap exceeds this counts as strictly positive.
pub const POSITIVE_GAP_THRESHOLD: f64 = 1e-6;

/// Validity of one constructed POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmCheck {
    /// One-based subsystem number.
    pub subsystem: usize,
    pub method: u8,
    pub min_eigenvalue: f64,
    pub completeness_residual: f64,
}

impl PovmCheck {
    fn from_effective(e: &EffectivePovm) -> Self {
        let v = e.validation(&Tolerances::default());
        Self {
            subsystem: e.subsystem + 1,
            method: e.method.number(),
            min_eigenvalue: v.min_eigenvalue(),
            completeness_residual: v.completeness_residual,
        }
    }

    fn passed(&self) -> bool {
        let t = Tolerances::default();
        self.min_eigenvalue >= -t.psd && self.completeness_residual <= t.sum
    }
}

/// Every quantity checked on one scenario. Map keys carry one-based
/// subsystem numbers, e.g. `dominance_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub scenario_seed: Option<u64>,
    /// I(A_1, …, A_K; B) for the joint POVM.
    pub i_joint: f64,
    /// I(A_k; B_k) under construction 1, per subsystem.
    pub i_c1: Vec<f64>,
    /// I(A_k; B_k) under construction 2, per subsystem.
    pub i_c2: Vec<f64>,
    pub chosen_contexts: Vec<Vec<usize>>,
    pub identity_residuals: BTreeMap<String, f64>,
    pub slacks: BTreeMap<String, f64>,
    pub povm_checks: Vec<PovmCheck>,
}

fn residual_limit(name: &str) -> f64 {
    if name.starts_with("relabel") || name.starts_with("c2_slice_mi") {
        EXACT_RESIDUAL_LIMIT
    } else {
        ENTROPY_RESIDUAL_LIMIT
    }
}

fn slack_floor(name: &str) -> f64 {
    if name.starts_with("chain") {
        CHAIN_SLACK_FLOOR
    } else {
        SLACK_FLOOR
    }
}

impl TrialResult {
    /// Σ_k I_c1[k] − I_joint.
    pub fn gap(&self) -> f64 {
        self.slacks["thm1"]
    }

    pub fn sum_c1(&self) -> f64 {
        self.i_c1.iter().sum()
    }

    pub fn sum_c2(&self) -> f64 {
        self.i_c2.iter().sum()
    }

    /// Names of every check that fails its threshold.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, &r) in &self.identity_residuals {
            if !(r <= residual_limit(name)) {
                out.push(format!("residual {name} = {r:e}"));
            }
        }
        for (name, &s) in &self.slacks {
            if !(s >= slack_floor(name)) {
                out.push(format!("slack {name} = {s:e}"));
            }
        }
        for c in &self.povm_checks {
            if !c.passed() {
                out.push(format!(
                    "construction {} POVM for subsystem {}: min eigenvalue {:e}, residual {:e}",
                    c.method, c.subsystem, c.min_eigenvalue, c.completeness_residual
                ));
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Runs every check on one scenario.
pub fn run_trial(s: &Scenario, seed: Option<u64>) -> Result<TrialResult> {
    let k_count = s.num_subsystems();
    let joint = joint_distribution(s)?;
    let b_axis = k_count;
    let all_a = MarginalSpec::new((0..k_count).collect::<Vec<_>>())?;
    let b = MarginalSpec::axis(b_axis);
    let everything = all_a.union(&b)?;
    let h_all = entropy(&joint, &everything)?;
    let i_joint = mutual_information(&joint, &all_a, &b)?;

    let mut r = TrialResult {
        scenario_seed: seed,
        i_joint,
        i_c1: Vec::with_capacity(k_count),
        i_c2: Vec::with_capacity(k_count),
        chosen_contexts: Vec::with_capacity(k_count),
        identity_residuals: BTreeMap::new(),
        slacks: BTreeMap::new(),
        povm_checks: Vec::new(),
    };
    let (a0, a1) = (MarginalSpec::axis(0), MarginalSpec::axis(1));

    for k in 0..k_count {
        let n = k + 1;
        let ak = MarginalSpec::axis(k);
        let others: Vec<usize> = (0..k_count).filter(|&l| l != k).collect();
        let others_spec = MarginalSpec::new(others.clone())?;
        let others_b = others_spec.union(&b)?;

        let c1 = construction1(s, k)?;
        let c2 = construction2(s, k)?;
        r.povm_checks.push(PovmCheck::from_effective(&c1));
        r.povm_checks.push(PovmCheck::from_effective(&c2));

        let d1 = induced_distribution(s, &c1)?;
        let d2 = induced_distribution(s, &c2)?;
        let i1 = mutual_information(&d1, &a0, &a1)?;
        let i2 = mutual_information(&d2, &a0, &a1)?;

        // Pr{A_k = a, B_k = (ctx, b)} against Pr{A_k = a, A_others = ctx, B = b}
        let relabel = relabel_residual(&joint, &d1, k, &context_tuples(s, k));
        r.identity_residuals.insert(format!("relabel_{n}"), relabel);
        r.identity_residuals.insert(
            format!("joint_entropy_{n}"),
            (entropy(&d1, &MarginalSpec::new(vec![0, 1])?)? - h_all).abs(),
        );
        r.identity_residuals.insert(
            format!("output_entropy_{n}"),
            (entropy(&d1, &a1)? - entropy(&joint, &others_b)?).abs(),
        );

        // I(A_k; B_k) = Σ_ctx p(ctx) I(A_k; B | A_others = ctx)
        let mut weighted = 0.0;
        for (ctx, _) in candidate_informations(s, k)? {
            let weight: f64 = others
                .iter()
                .zip(&ctx)
                .map(|(&l, &a)| s.subsystem(l).priors()[a])
                .product();
            if weight > 0.0 {
                let fixed: Vec<(usize, usize)> = others.iter().copied().zip(ctx).collect();
                weighted += weight * mi_given_values(&joint, &ak, &b, &fixed)?;
            }
        }
        r.identity_residuals
            .insert(format!("decomposition_{n}"), (i1 - weighted).abs());

        let chosen = c2.chosen_context.clone().unwrap_or_default();
        let fixed: Vec<(usize, usize)> = others.iter().copied().zip(chosen.iter().copied()).collect();
        // a zero-prior context has no slice in the joint table to compare against
        if let Ok(slice_mi) = mi_given_values(&joint, &ak, &b, &fixed) {
            r.identity_residuals
                .insert(format!("c2_slice_mi_{n}"), (i2 - slice_mi).abs());
        }

        let h_ak_given_b = entropy(&joint, &ak.union(&b)?)? - entropy(&joint, &b)?;
        let h_ak_given_rest = h_all - entropy(&joint, &others_b)?;
        r.slacks
            .insert(format!("chain_{n}"), h_ak_given_b - h_ak_given_rest);
        r.slacks.insert(format!("dominance_{n}"), i2 - i1);

        r.i_c1.push(i1);
        r.i_c2.push(i2);
        r.chosen_contexts.push(chosen);
    }

    r.slacks.insert("thm1".into(), r.sum_c1() - i_joint);
    r.slacks.insert("thm2".into(), r.sum_c2() - i_joint);

    // I^C(A_1; B | rest) + I^C(rest; B) ≥ I^C(A_1, rest; B) with Φ = −log₂
    let phi = CsiszarPhi::neg_log2();
    let rest = MarginalSpec::new((1..k_count).collect::<Vec<_>>())?;
    let lhs = conditional_csiszar_measure(&joint, &a0, &b, &rest, &phi)? + csiszar_measure(&joint, &rest, &b, &phi)?;
    let rhs = csiszar_measure(&joint, &all_a, &b, &phi)?;
    r.slacks.insert("csiszar_chain".into(), lhs - rhs);

    Ok(r)
}

fn relabel_residual(joint: &JointDistribution, induced: &JointDistribution, k: usize, contexts: &[Vec<usize>]) -> f64 {
    let n_b = *joint.axis_sizes().last().expect("joint table has an outcome axis");
    let k_count = joint.num_axes() - 1;
    let mut worst: f64 = 0.0;
    let mut index = vec![0usize; k_count + 1];
    for a in 0..joint.axis_sizes()[k] {
        for (c, ctx) in contexts.iter().enumerate() {
            let mut ctx_iter = ctx.iter();
            for (l, slot) in index.iter_mut().enumerate().take(k_count) {
                *slot = if l == k { a } else { *ctx_iter.next().expect("context per other subsystem") };
            }
            for bi in 0..n_b {
                index[k_count] = bi;
                let diff = (joint.get(&index) - induced.get(&[a, c * n_b + bi])).abs();
                worst = worst.max(diff);
            }
        }
    }
    worst
}

/// Counts of construction-1 gaps ΣI_c1 − I_joint in fixed bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapHistogram {
    /// Upper bin edges; the last bin is open above.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Default for GapHistogram {
    fn default() -> Self {
        let edges = vec![1e-9, 1e-6, 1e-3, 1e-2, 1e-1];
        let counts = vec![0; edges.len() + 1];
        Self { edges, counts }
    }
}

impl GapHistogram {
    pub fn record(&mut self, gap: f64) {
        let bin = self.edges.iter().position(|&e| gap <= e).unwrap_or(self.edges.len());
        self.counts[bin] += 1;
    }

    fn merge(&mut self, other: &GapHistogram) {
        assert_eq!(self.edges, other.edges, "histograms must share bins");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

/// A trial that violated a check or could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial_index: u64,
    pub seed: u64,
    pub violations: Vec<String>,
    pub error: Option<String>,
    pub result: Option<TrialResult>,
}

/// Aggregate over a run of trials. Reports over consecutive trial ranges
/// combine with [`VerificationReport::merge`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub trials: usize,
    pub failures: Vec<TrialFailure>,
    pub min_slacks: BTreeMap<String, f64>,
    pub max_residuals: BTreeMap<String, f64>,
    pub povm_min_eigenvalue: Option<f64>,
    pub povm_max_completeness_residual: Option<f64>,
    pub gap_histogram: GapHistogram,
    /// Trials whose construction-1 gap exceeds [`POSITIVE_GAP_THRESHOLD`].
    pub positive_gap_trials: usize,
    /// Set when construction 2 was applied to more than two subsystems.
    pub construction2_extension: bool,
}

fn fold_min(slot: &mut Option<f64>, v: f64) {
    *slot = Some(slot.map_or(v, |s| s.min(v)));
}

fn fold_max(slot: &mut Option<f64>, v: f64) {
    *slot = Some(slot.map_or(v, |s| s.max(v)));
}

fn merge_map(into: &mut BTreeMap<String, f64>, from: &BTreeMap<String, f64>, pick: fn(f64, f64) -> f64) {
    for (k, &v) in from {
        into.entry(k.clone()).and_modify(|e| *e = pick(*e, v)).or_insert(v);
    }
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn positive_gap_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.positive_gap_trials as f64 / self.trials as f64
        }
    }

    fn absorb(&mut self, trial_index: u64, seed: u64, outcome: Result<TrialResult>) {
        self.trials += 1;
        let r = match outcome {
            Ok(r) => r,
            Err(e) => {
                self.failures.push(TrialFailure {
                    trial_index,
                    seed,
                    violations: Vec::new(),
                    error: Some(e.to_string()),
                    result: None,
                });
                return;
            }
        };
        merge_map(&mut self.min_slacks, &r.slacks, f64::min);
        merge_map(&mut self.max_residuals, &r.identity_residuals, f64::max);
        for c in &r.povm_checks {
            fold_min(&mut self.povm_min_eigenvalue, c.min_eigenvalue);
            fold_max(&mut self.povm_max_completeness_residual, c.completeness_residual);
        }
        let gap = r.gap();
        self.gap_histogram.record(gap);
        if gap > POSITIVE_GAP_THRESHOLD {
            self.positive_gap_trials += 1;
        }
        if r.i_c2.len() > 2 {
            self.construction2_extension = true;
        }
        let violations = r.violations();
        if !violations.is_empty() {
            self.failures.push(TrialFailure {
                trial_index,
                seed,
                violations,
                error: None,
                result: Some(r),
            });
        }
    }

    /// Combines with a report over the trials that follow this one's.
    pub fn merge(mut self, other: &VerificationReport) -> VerificationReport {
        self.trials += other.trials;
        self.failures.extend(other.failures.iter().cloned());
        merge_map(&mut self.min_slacks, &other.min_slacks, f64::min);
        merge_map(&mut self.max_residuals, &other.max_residuals, f64::max);
        if let Some(v) = other.povm_min_eigenvalue {
            fold_min(&mut self.povm_min_eigenvalue, v);
        }
        if let Some(v) = other.povm_max_completeness_residual {
            fold_max(&mut self.povm_max_completeness_residual, v);
        }
        self.gap_histogram.merge(&other.gap_histogram);
        self.positive_gap_trials += other.positive_gap_trials;
        self.construction2_extension |= other.construction2_extension;
        self
    }
}

/// Trial `i` runs on the scenario generated with seed `cfg.seed + i`.
pub fn run_suite(cfg: &GenConfig, trials: usize) -> VerificationReport {
    run_suite_range(cfg, 0, trials)
}

/// Trials `offset .. offset + trials` of the suite defined by `cfg`.
pub fn run_suite_range(cfg: &GenConfig, offset: u64, trials: usize) -> VerificationReport {
    let outcomes: Vec<(u64, u64, Result<TrialResult>)> = (offset..offset + trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let outcome = random_scenario(&cfg.with_seed(seed))
                .and_then(|s| run_trial(&s, Some(seed)))
                .map_err(|e| e.context(format!("scenario seed {seed}")));
            (i, seed, outcome)
        })
        .collect();
    let mut report = VerificationReport::default();
    for (i, seed, outcome) in outcomes {
        report.absorb(i, seed, outcome);
    }
    report
}

/// One named part of [`default_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuitePart {
    pub name: &'static str,
    pub config: GenConfig,
    pub trials: usize,
}

/// 1000 trials at dims 2×2, 300 at 2×3, and 200 tripartite trials at 2×2×2.
pub fn default_suite_parts(seed: u64) -> Vec<SuitePart> {
    vec![
        SuitePart {
            name: "bipartite 2x2",
            config: GenConfig::new(vec![2, 2], vec![2, 3], 4, seed),
            trials: 1000,
        },
        SuitePart {
            name: "bipartite 2x3",
            config: GenConfig::new(vec![2, 3], vec![3, 2], 4, seed),
            trials: 300,
        },
        SuitePart {
            name: "tripartite 2x2x2",
            config: GenConfig::new(vec![2, 2, 2], vec![2, 2, 2], 4, seed),
            trials: 200,
        },
    ]
}

pub fn run_default_suite(seed: u64) -> Vec<(SuitePart, VerificationReport)> {
    default_suite_parts(seed)
        .into_iter()
        .map(|part| {
            let report = run_suite(&part.config, part.trials);
            (part, report)
        })
        .collect()
}

/// The BB84 collective-vs-individual attack comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct QkdDemo {
    pub trial: TrialResult,
    pub summary: String,
}

pub fn run_qkd_demo() -> Result<QkdDemo> {
    let trial = run_trial(&bb84_bell_scenario(), None)?;
    let mut s = String::new();
    let _ = writeln!(s, "BB84 signals on two independent qubits, joint Bell-basis measurement");
    let _ = writeln!(
        s,
        "collective attack (joint POVM)     I_joint  = {} bits",
        format_sig(trial.i_joint)
    );
    for (k, (c1, c2)) in trial.i_c1.iter().zip(&trial.i_c2).enumerate() {
        let _ = writeln!(
            s,
            "subsystem {}: construction 1 I = {} bits, construction 2 I = {} bits (context {:?})",
            k + 1,
            format_sig(*c1),
            format_sig(*c2),
            trial.chosen_contexts[k]
        );
    }
    let _ = writeln!(
        s,
        "individual attack (construction 1) ΣI_k     = {} bits",
        format_sig(trial.sum_c1())
    );
    let _ = writeln!(
        s,
        "individual attack (construction 2) ΣI_k     = {} bits",
        format_sig(trial.sum_c2())
    );
    let verdict = if trial.passed() { "holds" } else { "VIOLATED" };
    let _ = writeln!(
        s,
        "ΣI_k ≥ I_joint {verdict}: slack {} bits (construction 1), {} bits (construction 2)",
        format_sig(trial.slacks["thm1"]),
        format_sig(trial.slacks["thm2"])
    );
    Ok(QkdDemo { trial, summary: s })
}

/// Formats with 12 significant digits, trimming trailing zeros.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}
