//! Randomized product-formula compiler.
//!
//! One step draws a term `j` with probability `p_j` and applies
//! `e^{-i H_j τ_j}` with `τ_j = t / (N p_j)`, so that the averaged channel
//! matches the exact step to first order. The fixed strategies use a
//! state-independent `p`; the fluctuation-adaptive strategy sets
//! `p_j ∝ ΔH_j` on the current state before every step, which minimizes
//! `Σ_j ΔH_j² / p_j` over the simplex.

use std::sync::Arc;

use log::debug;
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    evolve_exact, moments, variance, CMatrix, CVector, DensityMatrix, HilbertSpace, StateVector, VARIANCE_CLAMP_TOL,
};
use crate::models::{pauli_decompose, HamiltonianTermSet};
use crate::pauli::PauliString;
use crate::shadows::{estimate_term_moments, EstimatorConfig, ShadowSet};

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-12;
/// Negative variance estimates below this are counted as inconsistencies.
pub const NEGATIVE_VARIANCE_WARN: f64 = -1e-8;
const PROBABILITY_SUM_TOL: f64 = 1e-12;

fn default_floor() -> f64 {
    DEFAULT_VARIANCE_FLOOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SamplingStrategy {
    /// `p_j = h_j / Σ h_k`. With truncated bosonic terms this is the
    /// hard-truncation sampler.
    #[serde(rename = "qdrift", alias = "hard-truncation")]
    FixedQDrift,
    #[serde(rename = "equal")]
    EqualWeight,
    /// `p_j ∝ ΔH_j`, recomputed every step. Moments are exact unless a
    /// shadow estimator is configured.
    #[serde(rename = "adaptive")]
    FluctuationAdaptive {
        #[serde(default = "default_floor")]
        variance_floor: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shadows: Option<EstimatorConfig>,
    },
}

impl SamplingStrategy {
    pub fn adaptive() -> Self {
        SamplingStrategy::FluctuationAdaptive {
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            shadows: None,
        }
    }

    pub fn adaptive_shadows(config: EstimatorConfig) -> Self {
        SamplingStrategy::FluctuationAdaptive {
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            shadows: Some(config),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SamplingStrategy::FixedQDrift => "qdrift",
            SamplingStrategy::EqualWeight => "equal",
            SamplingStrategy::FluctuationAdaptive { shadows: None, .. } => "adaptive",
            SamplingStrategy::FluctuationAdaptive { shadows: Some(_), .. } => "adaptive-shadows",
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, SamplingStrategy::FluctuationAdaptive { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if let SamplingStrategy::FluctuationAdaptive { variance_floor, shadows } = self {
            if !(variance_floor.is_finite() && *variance_floor >= 0.0) {
                return Err(Error::Config(format!("variance_floor must be >= 0, got {variance_floor}")));
            }
            if let Some(cfg) = shadows {
                cfg.validate()?;
            }
        }
        Ok(())
    }
}

/// Non-negative weights over term indices summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilities("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidProbabilities(format!("entry {p} is not a finite non-negative number")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidProbabilities(format!("entries sum to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidProbabilities(format!("weights sum to {sum}")));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn argmax(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }
}

/// First two moments of a term plus the deviation below which it is treated
/// as fluctuation-free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermMoments {
    pub mean: f64,
    pub second_moment: f64,
    /// `⟨H²⟩ − ⟨H⟩²`; may be slightly negative for estimated moments.
    pub variance: f64,
    pub noise_floor: f64,
}

impl TermMoments {
    pub fn from_raw(mean: f64, second_moment: f64) -> Self {
        Self {
            mean,
            second_moment,
            variance: second_moment - mean * mean,
            noise_floor: 0.0,
        }
    }
}

pub fn exact_moments(terms: &HamiltonianTermSet, psi: &StateVector) -> Result<Vec<TermMoments>> {
    terms
        .terms()
        .iter()
        .map(|t| {
            let m = moments(&t.operator, psi)?;
            Ok(TermMoments {
                mean: m.mean,
                second_moment: m.second_moment,
                variance: m.variance,
                noise_floor: 0.0,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct FluctuationUpdate {
    pub probabilities: ProbabilityVector,
    /// Floored standard deviations `ΔH_j`.
    pub deviations: Vec<f64>,
    /// Terms whose variance estimate fell below [`NEGATIVE_VARIANCE_WARN`].
    pub clamped: usize,
}

/// `p_j = ΔH_j / Σ_k ΔH_k`.
///
/// Deviations below `max(variance_floor, noise_floor_j)` count as exactly
/// zero. If every deviation is zero the state is a joint eigenstate and the
/// uniform distribution is returned.
pub fn fluctuation_probabilities(moments: &[TermMoments], variance_floor: f64) -> Result<FluctuationUpdate> {
    if moments.is_empty() {
        return Err(Error::InvalidProbabilities("no terms".into()));
    }
    let mut clamped = 0;
    let deviations: Vec<f64> = moments
        .iter()
        .enumerate()
        .map(|(j, m)| {
            if m.variance < NEGATIVE_VARIANCE_WARN {
                clamped += 1;
                debug!("term {j}: negative variance estimate {:.3e} clamped to 0", m.variance);
            }
            let dev = m.variance.max(0.0).sqrt();
            if dev < variance_floor.max(m.noise_floor) {
                0.0
            } else {
                dev
            }
        })
        .collect();
    let total: f64 = deviations.iter().sum();
    let probabilities = if total > 0.0 {
        ProbabilityVector::from_weights(&deviations)?
    } else {
        ProbabilityVector::uniform(deviations.len())
    };
    Ok(FluctuationUpdate {
        probabilities,
        deviations,
        clamped,
    })
}

/// State-independent distributions of the fixed strategies.
pub fn fixed_probabilities(terms: &HamiltonianTermSet, strategy: &SamplingStrategy) -> Result<ProbabilityVector> {
    match strategy {
        SamplingStrategy::FixedQDrift => {
            let weights = terms
                .terms()
                .iter()
                .map(|t| t.weight.ok_or_else(|| Error::MissingWeight { term: t.label.clone() }))
                .collect::<Result<Vec<_>>>()?;
            ProbabilityVector::from_weights(&weights)
        }
        SamplingStrategy::EqualWeight => Ok(ProbabilityVector::uniform(terms.len())),
        SamplingStrategy::FluctuationAdaptive { .. } => Err(Error::InvalidProbabilities(
            "the adaptive strategy has no state-independent distribution".into(),
        )),
    }
}

/// `ε(p) = Σ_j ΔH_j² / p_j`; zero-deviation terms contribute nothing.
pub fn cost_epsilon(deviations: &[f64], probs: &ProbabilityVector) -> Result<f64> {
    if deviations.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            found: deviations.len(),
        });
    }
    let mut cost = 0.0;
    for (j, (&d, &p)) in deviations.iter().zip(probs.as_slice()).enumerate() {
        if d == 0.0 {
            continue;
        }
        if p == 0.0 {
            return Err(Error::InfiniteCost { term: j });
        }
        cost += d * d / p;
    }
    Ok(cost)
}

/// Second-order fidelity estimate after one channel step of length `t/N`:
/// `1 + (t/N)² [ΔH² − Σ_j ΔH_j² / p_j]`.
pub fn predicted_fidelity(
    psi: &StateVector,
    terms: &HamiltonianTermSet,
    probs: &ProbabilityVector,
    t: f64,
    n_steps: usize,
) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::Config("predicted fidelity needs N >= 1".into()));
    }
    // numerically-zero variances count as exact zeros so a vanishing p_j is allowed
    let deviations: Vec<f64> = exact_moments(terms, psi)?
        .iter()
        .map(|m| if m.variance > VARIANCE_CLAMP_TOL { m.variance.sqrt() } else { 0.0 })
        .collect();
    let cost = cost_epsilon(&deviations, probs)?;
    let total_var = variance(terms.total(), psi)?;
    let dt = t / n_steps as f64;
    Ok(1.0 + dt * dt * (total_var - cost))
}

/// The averaged one-step channel `E(ρ) = Σ_j p_j U_j ρ U_j†`, with the
/// unitaries precomputed. Terms with `p_j = 0` are skipped.
pub struct ExactChannel {
    space: Arc<HilbertSpace>,
    branches: Vec<(f64, CMatrix, CMatrix)>,
}

impl ExactChannel {
    pub fn new(terms: &HamiltonianTermSet, probs: &ProbabilityVector, t: f64, n_steps: usize) -> Result<Self> {
        if probs.len() != terms.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                found: probs.len(),
            });
        }
        let branches = terms
            .terms()
            .iter()
            .zip(probs.as_slice())
            .filter(|(_, &p)| p > 0.0)
            .map(|(term, &p)| {
                let u = term.operator.unitary(t / (n_steps as f64 * p));
                let u_adj = u.adjoint();
                (p, u, u_adj)
            })
            .collect();
        Ok(Self {
            space: terms.space().clone(),
            branches,
        })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.check_space(&self.space)?;
        let d = self.space.dim();
        let mut out = CMatrix::zeros(d, d);
        for (p, u, u_adj) in &self.branches {
            out += (u * rho.matrix() * u_adj).scale(*p);
        }
        Ok(DensityMatrix::from_parts_unchecked(self.space.clone(), out))
    }
}

pub fn exact_channel_step(
    rho: &DensityMatrix,
    terms: &HamiltonianTermSet,
    probs: &ProbabilityVector,
    t: f64,
    n_steps: usize,
) -> Result<DensityMatrix> {
    ExactChannel::new(terms, probs, t, n_steps)?.apply(rho)
}

/// Draws an index restricted to the positive-probability support.
pub fn sample_index<R: Rng + ?Sized>(probs: &ProbabilityVector, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.as_slice().iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Per-trajectory generator: one ChaCha stream per trajectory index.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub sampled_index: usize,
    pub tau: f64,
    pub probabilities: ProbabilityVector,
}

#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub final_state: StateVector,
    pub fidelity: f64,
    pub step_log: Option<Vec<StepRecord>>,
    pub seed: Option<u64>,
    pub max_tau: f64,
    pub clamped_variances: usize,
}

/// Shared, read-only setup for many trajectories of one configuration.
pub struct TrajectoryRunner<'a> {
    terms: &'a HamiltonianTermSet,
    psi0: &'a StateVector,
    t: f64,
    n_steps: usize,
    strategy: SamplingStrategy,
    target: StateVector,
    fixed: Option<ProbabilityVector>,
    term_paulis: Option<Vec<Vec<PauliString>>>,
}

impl<'a> TrajectoryRunner<'a> {
    pub fn new(
        terms: &'a HamiltonianTermSet,
        psi0: &'a StateVector,
        t: f64,
        n_steps: usize,
        strategy: &SamplingStrategy,
    ) -> Result<Self> {
        strategy.validate()?;
        if !t.is_finite() {
            return Err(Error::Config(format!("evolution time must be finite, got {t}")));
        }
        terms.prepare();
        let target = evolve_exact(terms.total(), psi0, t)?;
        let fixed = match strategy {
            SamplingStrategy::FluctuationAdaptive { .. } => None,
            _ => Some(fixed_probabilities(terms, strategy)?),
        };
        let term_paulis = match strategy {
            SamplingStrategy::FluctuationAdaptive { shadows: Some(_), .. } => Some(
                terms
                    .terms()
                    .iter()
                    .map(|t| pauli_decompose(&t.operator))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        Ok(Self {
            terms,
            psi0,
            t,
            n_steps,
            strategy: strategy.clone(),
            target,
            fixed,
            term_paulis,
        })
    }

    pub fn target(&self) -> &StateVector {
        &self.target
    }

    fn adaptive_update<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<FluctuationUpdate> {
        let SamplingStrategy::FluctuationAdaptive { variance_floor, shadows } = &self.strategy else {
            unreachable!("adaptive_update on a fixed strategy");
        };
        let moments = match (shadows, &self.term_paulis) {
            (Some(cfg), Some(paulis)) => {
                let shadow = ShadowSet::collect(state, cfg.n_shots, rng, 0)?;
                paulis
                    .iter()
                    .map(|p| estimate_term_moments(&shadow, p, cfg))
                    .collect::<Result<Vec<_>>>()?
            }
            _ => exact_moments(self.terms, state)?,
        };
        fluctuation_probabilities(&moments, *variance_floor)
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R, record: bool) -> Result<TrajectoryResult> {
        let dim = self.psi0.space().dim();
        let mut state = self.psi0.clone();
        let mut scratch = CVector::from_element(dim, Complex::new(0.0, 0.0));
        let mut log = record.then(|| Vec::with_capacity(self.n_steps));
        let mut max_tau = 0.0f64;
        let mut clamped = 0;
        for step in 0..self.n_steps {
            let probs = match &self.fixed {
                Some(p) => p.clone(),
                None => {
                    let update = self.adaptive_update(&state, rng)?;
                    clamped += update.clamped;
                    update.probabilities
                }
            };
            let j = sample_index(&probs, rng);
            let tau = self.t / (self.n_steps as f64 * probs.as_slice()[j]);
            max_tau = max_tau.max(tau.abs());
            self.terms.terms()[j]
                .operator
                .exp_in_place(tau, state.amplitudes_mut(), &mut scratch);
            debug_assert!((state.norm() - 1.0).abs() < 1e-10);
            if let Some(log) = log.as_mut() {
                log.push(StepRecord {
                    step,
                    sampled_index: j,
                    tau,
                    probabilities: probs,
                });
            }
        }
        let fidelity = crate::hilbert::fidelity_pure(&state, &self.target)?;
        Ok(TrajectoryResult {
            final_state: state,
            fidelity,
            step_log: log,
            seed: None,
            max_tau,
            clamped_variances: clamped,
        })
    }

    /// Runs on stream `stream` of the ChaCha generator seeded with `seed`.
    pub fn run_seeded(&self, seed: u64, stream: u64, record: bool) -> Result<TrajectoryResult> {
        let mut rng = trajectory_rng(seed, stream);
        let mut result = self.run(&mut rng, record)?;
        result.seed = Some(seed);
        Ok(result)
    }
}

/// One randomized trajectory of `N` steps; fidelity is measured against
/// `e^{-iHt} ψ0`.
pub fn run_trajectory<R: Rng + ?Sized>(
    terms: &HamiltonianTermSet,
    psi0: &StateVector,
    t: f64,
    n_steps: usize,
    strategy: &SamplingStrategy,
    rng: &mut R,
    record: bool,
) -> Result<TrajectoryResult> {
    TrajectoryRunner::new(terms, psi0, t, n_steps, strategy)?.run(rng, record)
}
