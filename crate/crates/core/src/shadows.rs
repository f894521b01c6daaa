//! Classical-shadow estimation of term moments from random Pauli-basis
//! measurements.
//!
//! Each snapshot picks X, Y or Z uniformly per qubit and records one
//! computational-basis outcome of the rotated state. A Pauli string is
//! estimated per snapshot as the product over its non-identity letters of
//! `3·(±1)` when the measured basis matches the letter and `0` otherwise,
//! which is `Tr(P ρ̂)` for the inverted single-qubit measurement channel.
//!
//! # Record stream
//!
//! [`ShadowSet::write_to`] emits a little-endian binary stream:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4 | magic `SHDW` |
//! | 1 | version (`1`) |
//! | 4 | qubit count `n` (u32) |
//! | 8 | source seed (u64) |
//! | 8 | snapshot count (u64) |
//! | 2n per snapshot | per qubit: basis byte (`X`/`Y`/`Z`), outcome byte (0/1) |

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};

use nalgebra::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compiler::TermMoments;
use crate::error::{Error, Result};
use crate::hilbert::{StateVector, C64};
use crate::pauli::{Pauli, PauliString};

pub use crate::pauli::pauli_product;

const MAGIC: &[u8; 4] = b"SHDW";
const VERSION: u8 = 1;

fn default_batches() -> usize {
    10
}

fn default_floor_sigmas() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub n_shots: usize,
    /// Median-of-means batch count; 1 is the plain mean.
    #[serde(default = "default_batches")]
    pub mom_batches: usize,
    /// Deviations are floored at `sqrt(floor_sigmas · SE[variance])`.
    #[serde(default = "default_floor_sigmas")]
    pub floor_sigmas: f64,
}

impl EstimatorConfig {
    pub fn new(n_shots: usize, mom_batches: usize) -> Self {
        Self {
            n_shots,
            mom_batches,
            floor_sigmas: default_floor_sigmas(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_shots == 0 || self.mom_batches == 0 {
            return Err(Error::InvalidEstimator("n_shots and mom_batches must be positive".into()));
        }
        if !self.n_shots.is_multiple_of(self.mom_batches) {
            return Err(Error::InvalidEstimator(format!(
                "mom_batches {} does not divide n_shots {}",
                self.mom_batches, self.n_shots
            )));
        }
        if !(self.floor_sigmas.is_finite() && self.floor_sigmas >= 0.0) {
            return Err(Error::InvalidEstimator(format!("floor_sigmas {} < 0", self.floor_sigmas)));
        }
        Ok(())
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::new(10_000, default_batches())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub bases: Vec<Pauli>,
    pub outcomes: Vec<u8>,
}

impl Snapshot {
    /// Single-snapshot estimate of a unit-coefficient Pauli string.
    fn estimate(&self, letters: &[Pauli]) -> f64 {
        let mut v = 1.0;
        for ((&p, &b), &o) in letters.iter().zip(&self.bases).zip(&self.outcomes) {
            if p == Pauli::I {
                continue;
            }
            if p != b {
                return 0.0;
            }
            v *= if o == 0 { 3.0 } else { -3.0 };
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSet {
    pub n_qubits: usize,
    pub snapshots: Vec<Snapshot>,
    pub source_seed: u64,
}

fn qubit_count(psi: &StateVector) -> Result<usize> {
    let space = psi.space();
    if !space.is_qubit_register() {
        return Err(Error::NonQubitSpace(space.factors().to_vec()));
    }
    Ok(space.factors().len())
}

/// Applies a 2×2 gate (row-major) to qubit `q` of an `n`-qubit register.
fn apply_1q(amps: &mut [C64], n: usize, q: usize, g: [C64; 4]) {
    let stride = 1usize << (n - 1 - q);
    for i in 0..amps.len() {
        if i & stride == 0 {
            let (a0, a1) = (amps[i], amps[i | stride]);
            amps[i] = g[0] * a0 + g[1] * a1;
            amps[i | stride] = g[2] * a0 + g[3] * a1;
        }
    }
}

fn basis_rotation(basis: Pauli) -> Option<[C64; 4]> {
    let h = Complex::new(FRAC_1_SQRT_2, 0.0);
    let hi = Complex::new(0.0, FRAC_1_SQRT_2);
    match basis {
        // H
        Pauli::X => Some([h, h, h, -h]),
        // H·S†
        Pauli::Y => Some([h, -hi, h, hi]),
        _ => None,
    }
}

fn measure_in<R: Rng + ?Sized>(psi: &StateVector, n: usize, bases: Vec<Pauli>, rng: &mut R) -> Snapshot {
    let mut amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
    for (q, &b) in bases.iter().enumerate() {
        if let Some(g) = basis_rotation(b) {
            apply_1q(&mut amps, n, q, g);
        }
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut index = amps.len() - 1;
    for (i, a) in amps.iter().enumerate() {
        acc += a.norm_sqr();
        if u < acc {
            index = i;
            break;
        }
    }
    let outcomes = (0..n).map(|q| ((index >> (n - 1 - q)) & 1) as u8).collect();
    Snapshot { bases, outcomes }
}

/// Uniform random basis per qubit, then a Born-rule outcome of `U ψ`.
pub fn sample_snapshot<R: Rng + ?Sized>(psi: &StateVector, rng: &mut R) -> Result<Snapshot> {
    let n = qubit_count(psi)?;
    const BASES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    let bases = (0..n).map(|_| BASES[rng.random_range(0..3)]).collect();
    Ok(measure_in(psi, n, bases, rng))
}

/// Measurement in a fixed basis assignment (used by tests and calibration).
pub fn sample_in_bases<R: Rng + ?Sized>(psi: &StateVector, bases: Vec<Pauli>, rng: &mut R) -> Result<Snapshot> {
    let n = qubit_count(psi)?;
    if bases.len() != n || bases.contains(&Pauli::I) {
        return Err(Error::InvalidEstimator("basis assignment must be one X/Y/Z per qubit".into()));
    }
    Ok(measure_in(psi, n, bases, rng))
}

impl ShadowSet {
    pub fn collect<R: Rng + ?Sized>(psi: &StateVector, n_shots: usize, rng: &mut R, source_seed: u64) -> Result<Self> {
        let n_qubits = qubit_count(psi)?;
        let snapshots = (0..n_shots)
            .map(|_| sample_snapshot(psi, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits,
            snapshots,
            source_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    fn values(&self, letters: &[Pauli]) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.estimate(letters)).collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&(self.n_qubits as u32).to_le_bytes())?;
        w.write_all(&self.source_seed.to_le_bytes())?;
        w.write_all(&(self.snapshots.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(2 * self.n_qubits);
        for s in &self.snapshots {
            buf.clear();
            for (b, o) in s.bases.iter().zip(&s.outcomes) {
                buf.push(b.as_char() as u8);
                buf.push(*o);
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::MalformedRecord(e.to_string());
        let mut head = [0u8; 25];
        r.read_exact(&mut head).map_err(io)?;
        if &head[..4] != MAGIC {
            return Err(Error::MalformedRecord("bad magic".into()));
        }
        if head[4] != VERSION {
            return Err(Error::MalformedRecord(format!("unsupported version {}", head[4])));
        }
        let n_qubits = u32::from_le_bytes(head[5..9].try_into().unwrap()) as usize;
        let source_seed = u64::from_le_bytes(head[9..17].try_into().unwrap());
        let count = u64::from_le_bytes(head[17..25].try_into().unwrap()) as usize;
        let mut snapshots = Vec::with_capacity(count.min(1 << 24));
        let mut buf = vec![0u8; 2 * n_qubits];
        for _ in 0..count {
            r.read_exact(&mut buf).map_err(io)?;
            let mut bases = Vec::with_capacity(n_qubits);
            let mut outcomes = Vec::with_capacity(n_qubits);
            for pair in buf.chunks_exact(2) {
                let basis = match Pauli::from_char(pair[0] as char) {
                    Some(p) if p != Pauli::I => p,
                    _ => return Err(Error::MalformedRecord(format!("bad basis byte {:#x}", pair[0]))),
                };
                if pair[1] > 1 {
                    return Err(Error::MalformedRecord(format!("bad outcome byte {}", pair[1])));
                }
                bases.push(basis);
                outcomes.push(pair[1]);
            }
            snapshots.push(Snapshot { bases, outcomes });
        }
        Ok(Self {
            n_qubits,
            snapshots,
            source_seed,
        })
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Batch `b` of `k` contiguous batches over `n` items.
fn batch_range(n: usize, k: usize, b: usize) -> std::ops::Range<usize> {
    (b * n / k)..((b + 1) * n / k)
}

pub fn median_of_means(values: &[f64], batches: usize) -> f64 {
    let n = values.len();
    let k = batches.clamp(1, n.max(1));
    if k == 1 {
        return mean(values);
    }
    let mut means: Vec<f64> = (0..k).map(|b| mean(&values[batch_range(n, k, b)])).collect();
    means.sort_by(f64::total_cmp);
    if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    }
}

fn check_letters(shadow: &ShadowSet, p: &PauliString) -> Result<()> {
    if shadow.is_empty() {
        return Err(Error::EmptyShadow);
    }
    if p.n_qubits() != shadow.n_qubits {
        return Err(Error::PauliLengthMismatch {
            left: p.n_qubits(),
            right: shadow.n_qubits,
        });
    }
    Ok(())
}

/// Estimate of `⟨P⟩` (coefficient ignored); the identity string is exactly 1.
pub fn estimate_pauli(shadow: &ShadowSet, p: &PauliString, mom_batches: usize) -> Result<f64> {
    check_letters(shadow, p)?;
    if p.is_identity() {
        return Ok(1.0);
    }
    Ok(median_of_means(&shadow.values(&p.letters), mom_batches))
}

/// Linear functionals of Pauli expectations: `mean = Σ a_s ⟨s⟩`,
/// `second = Σ b_s ⟨s⟩`, keyed by string.
fn moment_functionals(term: &[PauliString]) -> Result<BTreeMap<Vec<Pauli>, (f64, C64)>> {
    let mut coeffs: BTreeMap<Vec<Pauli>, (f64, C64)> = BTreeMap::new();
    for p in term {
        coeffs.entry(p.letters.clone()).or_default().0 += p.coefficient;
    }
    for a in term {
        for b in term {
            let (phase, s) = pauli_product(a, b)?;
            coeffs.entry(s.letters).or_default().1 += phase * s.coefficient;
        }
    }
    Ok(coeffs)
}

/// `(⟨H⟩, ⟨H²⟩)` of a Pauli-decomposed term from one shadow set.
///
/// The returned `noise_floor` is `sqrt(floor_sigmas · SE)`, where `SE` is the
/// standard error of the variance estimate over contiguous batches.
pub fn estimate_term_moments(shadow: &ShadowSet, term: &[PauliString], config: &EstimatorConfig) -> Result<TermMoments> {
    if term.is_empty() {
        return Err(Error::EmptyDecomposition);
    }
    for p in term {
        check_letters(shadow, p)?;
    }
    let functionals = moment_functionals(term)?;
    let n = shadow.len();
    let se_batches = if config.mom_batches >= 2 { config.mom_batches } else { 10 }.min(n);

    let mut mean_est = 0.0;
    let mut second_est = 0.0;
    let mut batch_first = vec![0.0; se_batches];
    let mut batch_second = vec![0.0; se_batches];
    for (letters, (a, b)) in &functionals {
        // Hermitian squares: imaginary parts cancel pairwise.
        let b = b.re;
        if *a == 0.0 && b == 0.0 {
            continue;
        }
        if letters.iter().all(|&p| p == Pauli::I) {
            mean_est += a;
            second_est += b;
            for k in 0..se_batches {
                batch_first[k] += a;
                batch_second[k] += b;
            }
            continue;
        }
        let values = shadow.values(letters);
        let est = median_of_means(&values, config.mom_batches);
        mean_est += a * est;
        second_est += b * est;
        for k in 0..se_batches {
            let m = mean(&values[batch_range(n, se_batches, k)]);
            batch_first[k] += a * m;
            batch_second[k] += b * m;
        }
    }

    let noise_floor = if se_batches >= 2 {
        let vars: Vec<f64> = batch_first
            .iter()
            .zip(&batch_second)
            .map(|(m1, m2)| m2 - m1 * m1)
            .collect();
        let mu = mean(&vars);
        let sample_var = vars.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (se_batches - 1) as f64;
        let se = (sample_var / se_batches as f64).sqrt();
        (config.floor_sigmas * se).sqrt()
    } else {
        0.0
    };

    let mut moments = TermMoments::from_raw(mean_est, second_est);
    moments.noise_floor = noise_floor;
    Ok(moments)
}
