//! Seeded random scenarios and the canonical BB84 / Bell-basis scenario.
//!
//! Every random draw comes from a ChaCha8 stream seeded with a 64-bit seed
//! (`ChaCha8Rng::seed_from_u64`), so a scenario is a pure function of its
//! [`GenConfig`]. Gaussian samples use the Box–Muller transform.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{hermitize, CMatrix, DensityMatrix, Ensemble, Povm, Scenario};

pub type ScenarioRng = ChaCha8Rng;

/// Attempts before [`random_povm`] gives up on an ill-conditioned normalizer.
const POVM_RETRIES: usize = 10;
/// Eigenvalue floor applied when forming S^{−1/2}.
const EIGEN_FLOOR: f64 = 1e-12;

pub fn rng_from_seed(seed: u64) -> ScenarioRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two independent standard normal samples (Box–Muller).
pub fn standard_normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // random::<f64>() is in [0, 1); shift to (0, 1] so the log stays finite
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Complex Gaussian with independent N(0, 1) real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let (re, im) = standard_normal_pair(rng);
    Complex64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        entries.push(complex_gaussian(rng));
    }
    CMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j])
}

/// G G† / Tr(G G†) for a `dim × rank` Gaussian matrix G.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidConfig(format!("rank {rank} invalid for dimension {dim}")));
    }
    let g = gaussian_matrix(dim, rank, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(hermitize(&w.scale(1.0 / tr))?)
}

/// Random POVM with `n_outcomes` full-rank elements: S^{−1/2} G_b S^{−1/2}
/// where G_b = A_b A_b† and S = Σ G_b.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, n_outcomes: usize, rng: &mut R) -> Result<Povm> {
    if dim == 0 || n_outcomes == 0 {
        return Err(Error::InvalidConfig(format!(
            "POVM needs positive dimension and outcome count, got {dim} and {n_outcomes}"
        )));
    }
    for _ in 0..POVM_RETRIES {
        let grams: Vec<CMatrix> = (0..n_outcomes)
            .map(|_| {
                let a = gaussian_matrix(dim, dim, rng);
                &a * &a.adjoint()
            })
            .collect();
        let sum = grams
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, g| &acc + g);
        let eig = sum.hermitian_eigenvalues()?;
        let (lo, hi) = (eig[0], eig[dim - 1]);
        if !(lo > 0.0 && lo / hi > EIGEN_FLOOR) {
            continue;
        }
        let inv_sqrt = sum.hermitian_map(|x| x.max(EIGEN_FLOOR).powf(-0.5))?;
        let elements = grams
            .iter()
            .map(|g| hermitize(&(&(&inv_sqrt * g) * &inv_sqrt)))
            .collect::<Result<Vec<_>>>()?;
        return Povm::from_matrices(elements);
    }
    Err(Error::DegeneratePovm(POVM_RETRIES))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateRank {
    Full,
    Pure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    Uniform,
    /// Flat Dirichlet, drawn as normalized exponentials.
    Random,
}

pub fn random_priors<R: Rng + ?Sized>(n: usize, mode: PriorMode, rng: &mut R) -> Vec<f64> {
    match mode {
        PriorMode::Uniform => vec![1.0 / n as f64; n],
        PriorMode::Random => {
            let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = draws.iter().sum();
            draws.into_iter().map(|x| x / total).collect()
        }
    }
}

/// Parameters for [`random_scenario`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub states_per_subsystem: Vec<usize>,
    pub povm_outcomes: usize,
    pub state_rank: StateRank,
    pub prior_mode: PriorMode,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            dims: vec![2, 2],
            states_per_subsystem: vec![2, 2],
            povm_outcomes: 4,
            state_rank: StateRank::Full,
            prior_mode: PriorMode::Random,
        }
    }
}

impl GenConfig {
    pub fn new(dims: Vec<usize>, states_per_subsystem: Vec<usize>, povm_outcomes: usize, seed: u64) -> Self {
        Self {
            seed,
            dims,
            states_per_subsystem,
            povm_outcomes,
            ..Self::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 subsystems, got {}",
                self.dims.len()
            )));
        }
        if self.states_per_subsystem.len() != self.dims.len() {
            return Err(Error::InvalidConfig(format!(
                "{} state counts for {} subsystems",
                self.states_per_subsystem.len(),
                self.dims.len()
            )));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidConfig(format!("subsystem dimension {d} < 2")));
        }
        if self.states_per_subsystem.contains(&0) || self.povm_outcomes == 0 {
            return Err(Error::InvalidConfig("state and outcome counts must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Ensembles for each subsystem in order, then the joint POVM, all from one stream.
pub fn random_scenario(cfg: &GenConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut subsystems = Vec::with_capacity(cfg.dims.len());
    for (&dim, &n) in cfg.dims.iter().zip(&cfg.states_per_subsystem) {
        let rank = match cfg.state_rank {
            StateRank::Full => dim,
            StateRank::Pure => 1,
        };
        let states = (0..n)
            .map(|_| random_density(dim, rank, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let priors = random_priors(n, cfg.prior_mode, &mut rng);
        subsystems.push(Ensemble::new(states, priors)?);
    }
    let total: usize = cfg.dims.iter().product();
    let povm = random_povm(total, cfg.povm_outcomes, &mut rng)?;
    Scenario::new(subsystems, povm)
}

/// |0⟩, |1⟩, |+⟩, |−⟩ with equal priors.
pub fn bb84_ensemble() -> Ensemble {
    let r = |x: f64| Complex64::new(x, 0.0);
    let s = FRAC_1_SQRT_2;
    let kets = [[r(1.0), r(0.0)], [r(0.0), r(1.0)], [r(s), r(s)], [r(s), r(-s)]];
    let states = kets
        .iter()
        .map(|k| DensityMatrix::pure(k).expect("BB84 states are valid"))
        .collect();
    Ensemble::new(states, vec![0.25; 4]).expect("BB84 ensemble is valid")
}

/// Projectors onto Φ+, Φ−, Ψ+, Ψ− (in that order).
pub fn bell_povm() -> Povm {
    let r = |x: f64| Complex64::new(x, 0.0);
    let s = FRAC_1_SQRT_2;
    let kets = [
        [r(s), r(0.0), r(0.0), r(s)],
        [r(s), r(0.0), r(0.0), r(-s)],
        [r(0.0), r(s), r(s), r(0.0)],
        [r(0.0), r(s), r(-s), r(0.0)],
    ];
    Povm::from_matrices(kets.iter().map(|k| CMatrix::projector(k)).collect()).expect("Bell basis is complete")
}

/// Two BB84 signals measured jointly in the Bell basis.
pub fn bb84_bell_scenario() -> Scenario {
    Scenario::new(vec![bb84_ensemble(), bb84_ensemble()], bell_povm()).expect("dimensions match")
}
