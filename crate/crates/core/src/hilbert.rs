//! Dense complex linear algebra over composite Hilbert spaces.
//!
//! Everything here is dense: the largest space used by the benchmark models is
//! a 50-level mode times one qubit (dimension 100). Matrix exponentials always
//! go through a cached spectral decomposition `A = V diag(λ) V†`, so a term is
//! decomposed once per run no matter how many different step lengths it is
//! exponentiated with.

use std::sync::{Arc, OnceLock};

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entrywise tolerance for `A == A†`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance for spectral reconstruction, unitarity and state norms.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
/// Variances in `[-VARIANCE_CLAMP_TOL, 0)` are reported as zero.
pub const VARIANCE_CLAMP_TOL: f64 = 1e-12;

const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
const ONE: C64 = Complex { re: 1.0, im: 0.0 };

/// Ordered tensor product of subsystems (2 for a qubit, `D` for a truncated mode).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HilbertSpace {
    factors: Vec<usize>,
    total_dim: usize,
}

impl HilbertSpace {
    pub fn new(factors: Vec<usize>) -> Result<Arc<Self>> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        if let Some(&d) = factors.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("factor dimension {d} < 2")));
        }
        let total_dim = factors
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("total dimension overflows".into()))?;
        Ok(Arc::new(Self { factors, total_dim }))
    }

    pub fn qubits(n: usize) -> Result<Arc<Self>> {
        Self::new(vec![2; n])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.total_dim
    }

    pub fn is_qubit_register(&self) -> bool {
        self.factors.iter().all(|&d| d == 2)
    }

    /// Flattened basis index of a per-factor index tuple; factor 0 is the most
    /// significant digit.
    pub fn flat_index(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                found: indices.len(),
            });
        }
        let mut flat = 0;
        for (&i, &d) in indices.iter().zip(&self.factors) {
            if i >= d {
                return Err(Error::FockIndexOutOfRange { index: i, dim: d });
            }
            flat = flat * d + i;
        }
        Ok(flat)
    }

    fn check_same(&self, other: &HilbertSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: self.factors.clone(),
                found: other.factors.clone(),
            })
        }
    }
}

fn same_space(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        a.check_same(b)
    }
}

/// Normalized pure state.
#[derive(Clone, Debug)]
pub struct StateVector {
    space: Arc<HilbertSpace>,
    amplitudes: CVector,
}

impl StateVector {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(space: Arc<HilbertSpace>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            space,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis(space: Arc<HilbertSpace>, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: index,
            });
        }
        let mut amplitudes = CVector::zeros(space.dim());
        amplitudes[index] = ONE;
        Ok(Self { space, amplitudes })
    }

    /// Equal-weight superposition of product basis states given as per-factor
    /// index tuples.
    pub fn equal_superposition(space: Arc<HilbertSpace>, components: &[Vec<usize>]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel("initial state has no components".into()));
        }
        let mut amplitudes = CVector::zeros(space.dim());
        for c in components {
            amplitudes[space.flat_index(c)?] += ONE;
        }
        Self::from_amplitudes(space, amplitudes)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        same_space(&self.space, &other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut CVector {
        &mut self.amplitudes
    }

    pub(crate) fn from_parts_unchecked(space: Arc<HilbertSpace>, amplitudes: CVector) -> Self {
        Self { space, amplitudes }
    }
}

/// Spectral decomposition `A = V diag(values) V†`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
    vectors_adjoint: CMatrix,
}

impl Eigen {
    pub fn vectors_adjoint(&self) -> &CMatrix {
        &self.vectors_adjoint
    }

    pub fn reconstruct(&self) -> CMatrix {
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, k| {
            self.vectors[(i, k)] * self.values[k]
        });
        scaled * &self.vectors_adjoint
    }

    /// `V diag(e^{-i λ τ}) V†`
    pub fn unitary(&self, tau: f64) -> CMatrix {
        let phases = phases(&self.values, tau);
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, k| {
            self.vectors[(i, k)] * phases[k]
        });
        scaled * &self.vectors_adjoint
    }
}

fn phases(values: &DVector<f64>, tau: f64) -> Vec<C64> {
    values
        .iter()
        .map(|&l| Complex::from_polar(1.0, -l * tau))
        .collect()
}

pub fn max_asymmetry(matrix: &CMatrix) -> f64 {
    let n = matrix.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Diagonalizes a Hermitian matrix, rejecting inputs whose asymmetry exceeds
/// [`HERMITICITY_TOL`].
pub fn hermitian_eigendecompose(matrix: &CMatrix) -> Result<Eigen> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            found: matrix.ncols(),
        });
    }
    let asym = max_asymmetry(matrix);
    if asym > HERMITICITY_TOL {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    // Symmetrize exactly so rounding-level asymmetry cannot leak into the solver.
    let sym = (matrix + matrix.adjoint()).scale(0.5);
    let decomposition = sym.symmetric_eigen();
    let vectors = decomposition.eigenvectors;
    let vectors_adjoint = vectors.adjoint();
    Ok(Eigen {
        values: decomposition.eigenvalues,
        vectors,
        vectors_adjoint,
    })
}

/// Dense Hermitian operator with a lazily populated spectral cache.
///
/// The cache is a `OnceLock`, so concurrent readers either see it fully
/// populated or race to compute identical values.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    space: Arc<HilbertSpace>,
    matrix: CMatrix,
    eigen: OnceLock<Eigen>,
}

impl HermitianOperator {
    pub fn new(space: Arc<HilbertSpace>, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let asym = max_asymmetry(&matrix);
        if asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        Ok(Self {
            space,
            matrix,
            eigen: OnceLock::new(),
        })
    }

    pub fn zeros(space: Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::zeros(d, d),
            eigen: OnceLock::new(),
        }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn has_eigen(&self) -> bool {
        self.eigen.get().is_some()
    }

    pub fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| {
            hermitian_eigendecompose(&self.matrix)
                .expect("Hermiticity is checked at construction")
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(c),
            eigen: OnceLock::new(),
        }
    }

    pub fn sum<'a>(space: Arc<HilbertSpace>, ops: impl IntoIterator<Item = &'a HermitianOperator>) -> Result<Self> {
        let mut acc = Self::zeros(space);
        for op in ops {
            same_space(&acc.space, &op.space)?;
            acc.matrix += &op.matrix;
        }
        Ok(acc)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<CVector> {
        same_space(&self.space, &psi.space)?;
        Ok(&self.matrix * &psi.amplitudes)
    }

    /// `e^{-iAτ}` as a dense matrix.
    pub fn unitary(&self, tau: f64) -> CMatrix {
        self.eigen().unitary(tau)
    }

    /// Applies `e^{-iAτ}` to `amps` in place, using `scratch` as the
    /// eigenbasis buffer.
    pub(crate) fn exp_in_place(&self, tau: f64, amps: &mut CVector, scratch: &mut CVector) {
        let eig = self.eigen();
        scratch.gemv(ONE, &eig.vectors_adjoint, amps, ZERO);
        for (c, &l) in scratch.iter_mut().zip(eig.values.iter()) {
            *c *= Complex::from_polar(1.0, -l * tau);
        }
        amps.gemv(ONE, &eig.vectors, scratch, ZERO);
    }
}

/// Returns the operator with its spectral cache populated.
pub fn eigendecomposed(op: HermitianOperator) -> HermitianOperator {
    op.eigen();
    op
}

/// `e^{-iAτ} ψ`
pub fn apply_exp(term: &HermitianOperator, tau: f64, psi: &StateVector) -> Result<StateVector> {
    same_space(&term.space, &psi.space)?;
    let mut amps = psi.amplitudes.clone();
    let mut scratch = CVector::zeros(amps.len());
    term.exp_in_place(tau, &mut amps, &mut scratch);
    Ok(StateVector::from_parts_unchecked(psi.space.clone(), amps))
}

/// `e^{-iHt} ψ0` through the spectral decomposition of the full Hamiltonian.
pub fn evolve_exact(hamiltonian: &HermitianOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    apply_exp(hamiltonian, t, psi0)
}

/// First moment, second moment and variance of an observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Computes `⟨A⟩`, `⟨A²⟩ = ‖Aψ‖²` and the variance as `‖(A − ⟨A⟩)ψ‖²`.
///
/// The centred form is used for the variance because `⟨A²⟩ − ⟨A⟩²` loses
/// all significant digits for near-eigenstates of large-norm operators.
pub fn moments(op: &HermitianOperator, psi: &StateVector) -> Result<Moments> {
    let a_psi = op.apply(psi)?;
    let mean = psi.amplitudes.dotc(&a_psi).re;
    let second_moment = a_psi.norm_squared();
    let centred = a_psi - psi.amplitudes.scale(mean);
    Ok(Moments {
        mean,
        second_moment,
        variance: centred.norm_squared(),
    })
}

pub fn expectation(op: &HermitianOperator, psi: &StateVector) -> Result<f64> {
    let a_psi = op.apply(psi)?;
    Ok(psi.amplitudes.dotc(&a_psi).re)
}

pub fn variance(op: &HermitianOperator, psi: &StateVector) -> Result<f64> {
    Ok(moments(op, psi)?.variance)
}

/// Variance from raw moments `⟨A²⟩ − ⟨A⟩²`, clamped to zero within
/// [`VARIANCE_CLAMP_TOL`] and rejected below it.
pub fn variance_from_moments(mean: f64, second_moment: f64) -> Result<f64> {
    let v = second_moment - mean * mean;
    if v >= 0.0 {
        Ok(v)
    } else if v >= -VARIANCE_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(v))
    }
}

/// Quantum Fisher information of a pure state under `e^{-iθG}`: `4 Var(G)`.
pub fn qfi(generator: &HermitianOperator, psi: &StateVector) -> Result<f64> {
    Ok(4.0 * variance(generator, psi)?)
}

/// `|⟨a|b⟩|²`, clamped to `[0, 1]`.
pub fn fidelity_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

pub fn spectral_norm(op: &HermitianOperator) -> f64 {
    op.eigen().values.iter().fold(0.0f64, |m, l| m.max(l.abs()))
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Lifts a single-factor matrix to the full space, identity elsewhere.
pub fn embed_matrix(local: &CMatrix, site: usize, space: &HilbertSpace) -> Result<CMatrix> {
    let factors = space.factors();
    if site >= factors.len() {
        return Err(Error::DimensionMismatch {
            expected: factors.len(),
            found: site,
        });
    }
    if local.nrows() != factors[site] || local.ncols() != factors[site] {
        return Err(Error::DimensionMismatch {
            expected: factors[site],
            found: local.nrows(),
        });
    }
    let before: usize = factors[..site].iter().product();
    let after: usize = factors[site + 1..].iter().product();
    Ok(identity(before).kronecker(local).kronecker(&identity(after)))
}

pub fn tensor_embed(local: &CMatrix, site: usize, space: &Arc<HilbertSpace>) -> Result<HermitianOperator> {
    HermitianOperator::new(space.clone(), embed_matrix(local, site, space)?)
}

/// Density matrix. Only used on the verification path.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: Arc<HilbertSpace>,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = &psi.amplitudes;
        Self {
            space: psi.space.clone(),
            matrix: a * a.adjoint(),
        }
    }

    pub fn new(space: Arc<HilbertSpace>, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: matrix.nrows(),
            });
        }
        let asym = max_asymmetry(&matrix);
        if asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn max_asymmetry(&self) -> f64 {
        max_asymmetry(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        sym.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, &l| m.min(l))
    }

    /// `Tr(ρ |ψ⟩⟨ψ|) = ⟨ψ|ρ|ψ⟩`
    pub fn overlap_pure(&self, psi: &StateVector) -> Result<f64> {
        same_space(&self.space, &psi.space)?;
        Ok(psi.amplitudes.dotc(&(&self.matrix * &psi.amplitudes)).re)
    }

    pub(crate) fn from_parts_unchecked(space: Arc<HilbertSpace>, matrix: CMatrix) -> Self {
        Self { space, matrix }
    }

    pub(crate) fn check_space(&self, other: &Arc<HilbertSpace>) -> Result<()> {
        same_space(&self.space, other)
    }
}

/// Seeded random instances for tests, oracles and benchmarks.
pub mod random {
    use super::*;

    fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im)
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn haar_state<R: Rng + ?Sized>(space: Arc<HilbertSpace>, rng: &mut R) -> StateVector {
        let amps = CVector::from_fn(space.dim(), |_, _| gaussian_c64(rng));
        StateVector::from_amplitudes(space, amps).expect("Gaussian vector is nonzero")
    }

    /// GUE-like random Hermitian matrix `(G + G†)/2`.
    pub fn hermitian_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
        (&g + g.adjoint()).scale(0.5)
    }

    pub fn hermitian<R: Rng + ?Sized>(space: Arc<HilbertSpace>, rng: &mut R) -> HermitianOperator {
        let m = hermitian_matrix(space.dim(), rng);
        HermitianOperator::new(space, m).expect("symmetrized matrix is Hermitian")
    }
}
