//! Benchmark Hamiltonians as grouped term sets.
//!
//! Factor ordering is fixed project-wide: for hybrid spaces the bosonic mode
//! comes first and qubits after (`|n, s⟩ ↦ 2n + s`), and within a register
//! qubit 0 is the most significant digit of the basis index.

use std::sync::Arc;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed_matrix, identity, spectral_norm, CMatrix, HermitianOperator, HilbertSpace, StateVector, C64,
};
use crate::pauli::{pauli_x, pauli_z, Pauli, PauliString};

/// Recorded in run metadata.
pub const SUBSYSTEM_ORDERING: &str = "boson-major: mode factor first, qubits after; qubit 0 most significant";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Model family and couplings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Model {
    /// `H = −J Σ [σz σz + h_x σx + h_z σz]`
    Mfim {
        chain_length: usize,
        j: f64,
        h_x: f64,
        h_z: f64,
        #[serde(default)]
        boundary: Boundary,
    },
    /// `H = Δ a†a + K/2 a†a†aa + ε(a + a†)`
    Kerr {
        delta: f64,
        kerr: f64,
        drive: f64,
        fock_dim: usize,
    },
    /// `H = ω a†a + Ω/2 σz + g(a + a†)σx`
    Rabi {
        omega: f64,
        omega_q: f64,
        g: f64,
        fock_dim: usize,
    },
}

/// A model plus an initial state, given as an equal-weight superposition of
/// product basis states (one index per factor).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Vec<usize>>>,
}

impl ModelSpec {
    pub fn new(model: Model) -> Self {
        Self { model, initial: None }
    }

    pub fn with_initial(mut self, components: Vec<Vec<usize>>) -> Self {
        self.initial = Some(components);
        self
    }

    /// `L=4, J=1, h_x=0.5, h_z=0.3`, periodic, from `|0011⟩`.
    pub fn benchmark_mfim() -> Self {
        Self::new(Model::Mfim {
            chain_length: 4,
            j: 1.0,
            h_x: 0.5,
            h_z: 0.3,
            boundary: Boundary::Periodic,
        })
    }

    /// `Δ=0.3, K=1, ε=0.5, D=50`, from `(|1⟩+|5⟩)/√2`.
    pub fn benchmark_kerr() -> Self {
        Self::new(Model::Kerr {
            delta: 0.3,
            kerr: 1.0,
            drive: 0.5,
            fock_dim: 50,
        })
    }

    /// `ω=1, Ω=1, g=0.2, D=50`, from `(|2,0⟩+|5,0⟩)/√2`.
    pub fn benchmark_rabi() -> Self {
        Self::new(Model::Rabi {
            omega: 1.0,
            omega_q: 1.0,
            g: 0.2,
            fock_dim: 50,
        })
    }

    pub fn tag(&self) -> &'static str {
        match self.model {
            Model::Mfim { .. } => "mfim",
            Model::Kerr { .. } => "kerr",
            Model::Rabi { .. } => "rabi",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} must be finite, got {v}")))
            }
        };
        match self.model {
            Model::Mfim {
                chain_length,
                j,
                h_x,
                h_z,
                boundary,
            } => {
                if chain_length < 2 {
                    return Err(Error::InvalidModel(format!("chain_length {chain_length} < 2")));
                }
                if chain_length == 2 && boundary == Boundary::Periodic {
                    return Err(Error::InvalidModel(
                        "periodic chain of length 2 counts the single bond twice; use boundary = \"open\"".into(),
                    ));
                }
                finite("j", j)?;
                finite("h_x", h_x)?;
                finite("h_z", h_z)?;
            }
            Model::Kerr {
                delta,
                kerr,
                drive,
                fock_dim,
            } => {
                if fock_dim < 2 {
                    return Err(Error::InvalidModel(format!("fock_dim {fock_dim} < 2")));
                }
                finite("delta", delta)?;
                finite("kerr", kerr)?;
                finite("drive", drive)?;
            }
            Model::Rabi {
                omega,
                omega_q,
                g,
                fock_dim,
            } => {
                if fock_dim < 2 {
                    return Err(Error::InvalidModel(format!("fock_dim {fock_dim} < 2")));
                }
                finite("omega", omega)?;
                finite("omega_q", omega_q)?;
                finite("g", g)?;
            }
        }
        Ok(())
    }

    pub fn space(&self) -> Result<Arc<HilbertSpace>> {
        match self.model {
            Model::Mfim { chain_length, .. } => HilbertSpace::qubits(chain_length),
            Model::Kerr { fock_dim, .. } => HilbertSpace::new(vec![fock_dim]),
            Model::Rabi { fock_dim, .. } => HilbertSpace::new(vec![fock_dim, 2]),
        }
    }

    fn default_initial(&self) -> Vec<Vec<usize>> {
        match self.model {
            // half up, half down: |0…01…1⟩
            Model::Mfim { chain_length, .. } => {
                vec![(0..chain_length).map(|i| usize::from(i >= chain_length / 2)).collect()]
            }
            Model::Kerr { .. } => vec![vec![1], vec![5]],
            Model::Rabi { .. } => vec![vec![2, 0], vec![5, 0]],
        }
    }

    pub fn initial_components(&self) -> Vec<Vec<usize>> {
        self.initial.clone().unwrap_or_else(|| self.default_initial())
    }

    pub fn build(&self) -> Result<HamiltonianTermSet> {
        match self.model {
            Model::Mfim { .. } => build_mfim(self),
            Model::Kerr { .. } => build_kerr(self),
            Model::Rabi { .. } => build_rabi(self),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub label: String,
    pub operator: HermitianOperator,
    /// `h_j`; `None` for terms with no meaningful strength.
    pub weight: Option<f64>,
}

/// `H = Σ_j H_j` with per-term labels and weights.
#[derive(Clone, Debug)]
pub struct HamiltonianTermSet {
    space: Arc<HilbertSpace>,
    terms: Vec<Term>,
    total: HermitianOperator,
}

impl HamiltonianTermSet {
    pub fn new(space: Arc<HilbertSpace>, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel("empty term set".into()));
        }
        for t in &terms {
            if let Some(w) = t.weight {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "term '{}' has non-positive weight {w}",
                        t.label
                    )));
                }
            }
        }
        let total = HermitianOperator::sum(space.clone(), terms.iter().map(|t| &t.operator))?;
        Ok(Self { space, terms, total })
    }

    /// Builds terms weighted by their spectral norms, dropping identically
    /// zero terms.
    pub fn from_operators(space: Arc<HilbertSpace>, ops: Vec<(String, CMatrix)>) -> Result<Self> {
        let mut terms = Vec::with_capacity(ops.len());
        for (label, m) in ops {
            if m.iter().all(|z| *z == Complex::new(0.0, 0.0)) {
                continue;
            }
            let operator = HermitianOperator::new(space.clone(), m)?;
            let weight = Some(spectral_norm(&operator));
            terms.push(Term { label, operator, weight });
        }
        Self::new(space, terms)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total(&self) -> &HermitianOperator {
        &self.total
    }

    pub fn labels(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.label.as_str()).collect()
    }

    /// Drops every `h_j`, as for terms that are unbounded before truncation.
    pub fn without_weights(mut self) -> Self {
        for t in &mut self.terms {
            t.weight = None;
        }
        self
    }

    /// Populates every spectral cache up front.
    pub fn prepare(&self) {
        self.total.eigen();
        for t in &self.terms {
            t.operator.eigen();
        }
    }
}

fn real(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

pub fn annihilation(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { real((j as f64).sqrt()) } else { real(0.0) })
}

pub fn number(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| if i == j { real(i as f64) } else { real(0.0) })
}

/// Three grouped terms `(zz, x, z)`; zero terms are dropped.
pub fn build_mfim(spec: &ModelSpec) -> Result<HamiltonianTermSet> {
    spec.validate()?;
    let Model::Mfim {
        chain_length,
        j,
        h_x,
        h_z,
        boundary,
    } = spec.model
    else {
        return Err(Error::InvalidModel("not an MFIM spec".into()));
    };
    let space = spec.space()?;
    let d = space.dim();
    let zs: Vec<CMatrix> = (0..chain_length)
        .map(|i| embed_matrix(&pauli_z(), i, &space))
        .collect::<Result<_>>()?;
    let n_bonds = match boundary {
        Boundary::Periodic => chain_length,
        Boundary::Open => chain_length - 1,
    };
    let mut zz = CMatrix::zeros(d, d);
    for i in 0..n_bonds {
        zz += &zs[i] * &zs[(i + 1) % chain_length];
    }
    let mut x = CMatrix::zeros(d, d);
    let mut z = CMatrix::zeros(d, d);
    for (i, zi) in zs.iter().enumerate() {
        x += embed_matrix(&pauli_x(), i, &space)?;
        z += zi;
    }
    HamiltonianTermSet::from_operators(
        space,
        vec![
            ("zz".into(), zz.scale(-j)),
            ("x".into(), x.scale(-j * h_x)),
            ("z".into(), z.scale(-j * h_z)),
        ],
    )
}

/// Terms `(number, kerr, drive)` on the lowest `D` Fock levels; weights are
/// the truncated spectral norms.
pub fn build_kerr(spec: &ModelSpec) -> Result<HamiltonianTermSet> {
    spec.validate()?;
    let Model::Kerr {
        delta,
        kerr,
        drive,
        fock_dim,
    } = spec.model
    else {
        return Err(Error::InvalidModel("not a Kerr spec".into()));
    };
    let space = spec.space()?;
    let a = annihilation(fock_dim);
    let ad = a.adjoint();
    let quartic = &ad * &ad * &a * &a;
    HamiltonianTermSet::from_operators(
        space,
        vec![
            ("number".into(), number(fock_dim).scale(delta)),
            ("kerr".into(), quartic.scale(kerr / 2.0)),
            ("drive".into(), (&a + &ad).scale(drive)),
        ],
    )
}

/// Terms `(field, qubit, coupling)` on `mode ⊗ qubit`.
pub fn build_rabi(spec: &ModelSpec) -> Result<HamiltonianTermSet> {
    spec.validate()?;
    let Model::Rabi {
        omega,
        omega_q,
        g,
        fock_dim,
    } = spec.model
    else {
        return Err(Error::InvalidModel("not a Rabi spec".into()));
    };
    let space = spec.space()?;
    let a = annihilation(fock_dim);
    let quad = &a + a.adjoint();
    HamiltonianTermSet::from_operators(
        space,
        vec![
            ("field".into(), number(fock_dim).kronecker(&identity(2)).scale(omega)),
            ("qubit".into(), identity(fock_dim).kronecker(&pauli_z()).scale(omega_q / 2.0)),
            ("coupling".into(), quad.kronecker(&pauli_x()).scale(g)),
        ],
    )
}

pub fn initial_state(spec: &ModelSpec) -> Result<StateVector> {
    StateVector::equal_superposition(spec.space()?, &spec.initial_components())
}

/// `P|i⟩ = phase · |j⟩`; returns `(j, phase)`.
fn pauli_action(letters: &[Pauli], i: usize) -> (usize, C64) {
    let n = letters.len();
    let mut j = i;
    let mut phase = real(1.0);
    for (q, &p) in letters.iter().enumerate() {
        let shift = n - 1 - q;
        let bit = (i >> shift) & 1;
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        match p {
            Pauli::I => {}
            Pauli::X => j ^= 1 << shift,
            Pauli::Y => {
                j ^= 1 << shift;
                phase *= Complex::new(0.0, sign);
            }
            Pauli::Z => phase *= sign,
        }
    }
    (j, phase)
}

/// Expands a qubit operator in the Pauli basis, `c_P = Tr(P A) / 2ⁿ`,
/// dropping strings with `|c_P| < 1e-12`.
pub fn pauli_decompose(term: &HermitianOperator) -> Result<Vec<PauliString>> {
    let space = term.space();
    if !space.is_qubit_register() {
        return Err(Error::NonQubitSpace(space.factors().to_vec()));
    }
    let n = space.factors().len();
    let dim = space.dim();
    let m = term.matrix();
    let mut out = Vec::new();
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    for code in 0..(1usize << (2 * n)) {
        let letters: Vec<Pauli> = (0..n).map(|q| LETTERS[(code >> (2 * (n - 1 - q))) & 3]).collect();
        // Tr(P A) = Σ_i ⟨i|P A|i⟩ = Σ_i Σ_k ⟨i|P|k⟩ A[k, i], with P|k⟩ = phase |i⟩
        let mut tr = real(0.0);
        for k in 0..dim {
            let (i, phase) = pauli_action(&letters, k);
            tr += phase * m[(k, i)];
        }
        let c = tr.re / dim as f64;
        if c.abs() >= 1e-12 {
            out.push(PauliString::new(c, letters));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random, HermitianOperator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_entry(m: &CMatrix) -> f64 {
        m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    fn mfim(l: usize, j: f64, h_x: f64, h_z: f64, boundary: Boundary) -> ModelSpec {
        ModelSpec::new(Model::Mfim {
            chain_length: l,
            j,
            h_x,
            h_z,
            boundary,
        })
    }

    fn weights(set: &HamiltonianTermSet) -> Vec<f64> {
        set.terms().iter().map(|t| t.weight.unwrap()).collect()
    }

    fn sum_consistent(set: &HamiltonianTermSet) -> bool {
        let mut acc = CMatrix::zeros(set.space().dim(), set.space().dim());
        for t in set.terms() {
            acc += t.operator.matrix();
        }
        max_entry(&(acc - set.total().matrix())) < 1e-12
    }

    #[test]
    fn benchmark_mfim_norms() {
        let set = ModelSpec::benchmark_mfim().build().unwrap();
        assert_eq!(set.labels(), vec!["zz", "x", "z"]);
        let w = weights(&set);
        // Dense-eigensolver oracle values: all-aligned saturates zz (4 bonds),
        // 4·0.5 for x, 4·0.3 for z.
        for (got, want) in w.iter().zip([4.0, 2.0, 1.2]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(sum_consistent(&set));
    }

    #[test]
    fn two_site_open_chain() {
        let set = mfim(2, 1.0, 0.0, 0.0, Boundary::Open).build().unwrap();
        assert_eq!(set.len(), 1);
        let m = set.terms()[0].operator.matrix();
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![-1.0, 1.0, 1.0, -1.0]);
        assert!(max_entry(&(m - CMatrix::from_diagonal(&m.diagonal()))) == 0.0);
    }

    #[test]
    fn periodic_two_site_rejected() {
        let err = mfim(2, 1.0, 0.5, 0.3, Boundary::Periodic).build().unwrap_err();
        assert!(err.to_string().contains("twice"));
    }

    #[test]
    fn three_site_matches_hand_built_sum() {
        let set = mfim(3, 1.0, 0.5, 0.3, Boundary::Periodic).build().unwrap();
        let i2 = identity(2);
        let (x, z) = (pauli_x(), pauli_z());
        let k3 = |a: &CMatrix, b: &CMatrix, c: &CMatrix| a.kronecker(b).kronecker(c);
        let mut h = CMatrix::zeros(8, 8);
        h -= k3(&z, &z, &i2) + k3(&i2, &z, &z) + k3(&z, &i2, &z);
        h -= (k3(&x, &i2, &i2) + k3(&i2, &x, &i2) + k3(&i2, &i2, &x)).scale(0.5);
        h -= (k3(&z, &i2, &i2) + k3(&i2, &z, &i2) + k3(&i2, &i2, &z)).scale(0.3);
        assert!(max_entry(&(h - set.total().matrix())) < 1e-12);
    }

    #[test]
    fn tfim_drops_zero_field() {
        let set = mfim(4, 1.0, 0.5, 0.0, Boundary::Periodic).build().unwrap();
        assert_eq!(set.labels(), vec!["zz", "x"]);
    }

    #[test]
    fn mfim_is_real_symmetric() {
        let set = mfim(4, 0.7, -0.4, 1.3, Boundary::Open).build().unwrap();
        let m = set.total().matrix();
        assert!(m.iter().all(|z| z.im == 0.0));
        assert!(max_entry(&(m - m.transpose())) == 0.0);
    }

    #[test]
    fn kerr_matrix_elements() {
        let set = ModelSpec::benchmark_kerr().build().unwrap();
        let h = set.total().matrix();
        assert!((h[(5, 5)].re - 11.5).abs() < 1e-12);
        assert!((h[(0, 1)].re - 0.5).abs() < 1e-12);
        let w = weights(&set);
        assert!((w[0] - 0.3 * 49.0).abs() < 1e-10);
        assert!((w[1] - 1176.0).abs() < 1e-9);
        assert!(sum_consistent(&set));
    }

    #[test]
    fn rabi_weights_and_diagonal() {
        let set = ModelSpec::benchmark_rabi().build().unwrap();
        assert_eq!(set.labels(), vec!["field", "qubit", "coupling"]);
        assert!((set.terms()[1].weight.unwrap() - 0.5).abs() < 1e-12);
        let field = set.terms()[0].operator.matrix();
        assert_eq!(field[(10, 10)].re, 5.0);
        assert_eq!(field[(11, 11)].re, 5.0);
        assert!(sum_consistent(&set));
    }

    #[test]
    fn rabi_uncoupled_is_diagonal() {
        let spec = ModelSpec::new(Model::Rabi {
            omega: 1.0,
            omega_q: 1.0,
            g: 0.0,
            fock_dim: 3,
        });
        let set = spec.build().unwrap();
        assert_eq!(set.len(), 2);
        let h = set.total().matrix();
        for r in 0..6 {
            for c in 0..6 {
                let want = if r == c {
                    let (n, s) = (r / 2, r % 2);
                    n as f64 + if s == 0 { 0.5 } else { -0.5 }
                } else {
                    0.0
                };
                assert!((h[(r, c)].re - want).abs() < 1e-15 && h[(r, c)].im == 0.0);
            }
        }
    }

    #[test]
    fn initial_states() {
        let psi = initial_state(&ModelSpec::benchmark_mfim()).unwrap();
        assert_eq!(psi.amplitudes()[3], real(1.0));
        let k = initial_state(&ModelSpec::benchmark_kerr()).unwrap();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((k.amplitudes()[1].re - r2).abs() < 1e-15 && (k.amplitudes()[5].re - r2).abs() < 1e-15);
        let r = initial_state(&ModelSpec::benchmark_rabi()).unwrap();
        assert!((r.amplitudes()[4].re - r2).abs() < 1e-15);
        assert!((r.amplitudes()[10].re - r2).abs() < 1e-15);
        assert!((r.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initial_state_out_of_range() {
        let spec = ModelSpec::new(Model::Kerr {
            delta: 0.3,
            kerr: 1.0,
            drive: 0.5,
            fock_dim: 4,
        });
        assert!(matches!(initial_state(&spec), Err(Error::FockIndexOutOfRange { index: 5, dim: 4 })));
    }

    #[test]
    fn transverse_field_decomposes_to_itself() {
        let set = mfim(2, 1.0, 0.5, 0.0, Boundary::Open).build().unwrap();
        let x_term = &set.terms()[1].operator;
        let paulis = pauli_decompose(x_term).unwrap();
        let labels: Vec<(String, f64)> = paulis.iter().map(|p| (p.label(), p.coefficient)).collect();
        assert_eq!(labels, vec![("IX".to_string(), -0.5), ("XI".to_string(), -0.5)]);
    }

    #[test]
    fn zz_decomposes_to_single_string() {
        let space = HilbertSpace::qubits(2).unwrap();
        let zz = HermitianOperator::new(space, pauli_z().kronecker(&pauli_z())).unwrap();
        let p = pauli_decompose(&zz).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].label(), "ZZ");
        assert!((p[0].coefficient - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zz_square_reconstructs() {
        let set = mfim(3, 1.0, 0.5, 0.3, Boundary::Periodic).build().unwrap();
        let zz = set.terms()[0].operator.matrix();
        let sq = HermitianOperator::new(set.space().clone(), zz * zz).unwrap();
        let rebuilt = pauli_decompose(&sq)
            .unwrap()
            .iter()
            .fold(CMatrix::zeros(8, 8), |acc, p| acc + p.to_matrix());
        assert!(max_entry(&(rebuilt - sq.matrix())) < 1e-10);
    }

    #[test]
    fn decompose_rejects_bosons() {
        let set = ModelSpec::benchmark_rabi().build().unwrap();
        assert!(matches!(pauli_decompose(&set.terms()[1].operator), Err(Error::NonQubitSpace(_))));
    }

    #[test]
    fn random_qubit_operator_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let space = HilbertSpace::qubits(3).unwrap();
        let a = random::hermitian(space, &mut rng);
        let rebuilt = pauli_decompose(&a)
            .unwrap()
            .iter()
            .fold(CMatrix::zeros(8, 8), |acc, p| acc + p.to_matrix());
        assert!(max_entry(&(rebuilt - a.matrix())) < 1e-10);
    }

    #[test]
    fn spec_roundtrips_through_toml() {
        let spec = ModelSpec::benchmark_rabi().with_initial(vec![vec![2, 0], vec![5, 0]]);
        let text = toml::to_string(&spec).unwrap();
        let back: ModelSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let parsed: ModelSpec = toml::from_str("kind = \"mfim\"\nchain_length = 4\nj = 1.0\nh_x = 0.5\nh_z = 0.3\n").unwrap();
        assert_eq!(parsed, ModelSpec::benchmark_mfim());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn builders_sum_consistently(
                l in 3usize..6, j in -2.0f64..2.0, hx in -1.0f64..1.0, hz in -1.0f64..1.0,
                d in 2usize..12, g in -1.0f64..1.0,
            ) {
                prop_assume!(j.abs() > 1e-3);
                let m = mfim(l, j, hx, hz, Boundary::Periodic).build().unwrap();
                prop_assert!(sum_consistent(&m));
                let k = ModelSpec::new(Model::Kerr { delta: hx, kerr: j, drive: hz, fock_dim: d }).build().unwrap();
                prop_assert!(sum_consistent(&k));
                let r = ModelSpec::new(Model::Rabi { omega: j, omega_q: hz, g, fock_dim: d }).build().unwrap();
                prop_assert!(sum_consistent(&r));
            }
        }
    }
}
