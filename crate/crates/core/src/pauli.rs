//! Single-qubit Pauli letters and weighted Pauli strings.

use std::fmt;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, C64};

const I1: C64 = Complex { re: 1.0, im: 0.0 };
const I0: C64 = Complex { re: 0.0, im: 0.0 };
const II: C64 = Complex { re: 0.0, im: 1.0 };

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[I0, I1, I1, I0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[I0, -II, II, I0])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[I1, I0, I0, -I1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2, 2),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    /// `self · other = phase · letter`
    pub fn times(self, other: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (I1, p),
            (a, b) if a == b => (I1, I),
            (X, Y) => (II, Z),
            (Y, X) => (-II, Z),
            (Y, Z) => (II, X),
            (Z, Y) => (-II, X),
            (Z, X) => (II, Y),
            (X, Z) => (-II, Y),
            _ => unreachable!(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// `coefficient · P_0 ⊗ P_1 ⊗ …` with qubit 0 the most significant factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub coefficient: f64,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Self {
        Self { coefficient, letters }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(1.0, vec![Pauli::I; n_qubits])
    }

    /// Parses a unit-coefficient string such as `"XZI"`.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(Pauli::from_char)
            .collect::<Option<Vec<_>>>()
            .map(|letters| Self::new(1.0, letters))
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    /// Dense `coefficient · P` by Kronecker products.
    pub fn to_matrix(&self) -> CMatrix {
        let unit = self
            .letters
            .iter()
            .fold(CMatrix::identity(1, 1), |acc, p| acc.kronecker(&p.matrix()));
        unit.scale(self.coefficient)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.coefficient, self.label())
    }
}

/// Letterwise product. The returned string carries `a.coefficient * b.coefficient`;
/// the accumulated phase in `{±1, ±i}` is returned separately.
pub fn pauli_product(a: &PauliString, b: &PauliString) -> Result<(C64, PauliString)> {
    if a.letters.len() != b.letters.len() {
        return Err(Error::PauliLengthMismatch {
            left: a.letters.len(),
            right: b.letters.len(),
        });
    }
    let mut phase = I1;
    let letters = a
        .letters
        .iter()
        .zip(&b.letters)
        .map(|(&p, &q)| {
            let (ph, r) = p.times(q);
            phase *= ph;
            r
        })
        .collect();
    Ok((phase, PauliString::new(a.coefficient * b.coefficient, letters)))
}
