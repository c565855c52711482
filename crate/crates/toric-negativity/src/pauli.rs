//! GF(2) symplectic Pauli algebra for products of σˣ and σᶻ strings.
//!
//! A `PauliString` stands for `sign · X^x · Z^z` with every X factor to the
//! left of every Z factor, so products only ever pick up a ±1 phase.

use crate::lattice::{Bits, Face, Lattice, LatticeError, Orientation, Topology, Vertex};
use bitvec::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Mul;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("length mismatch: {0} vs {1} qubits")]
    LengthMismatch(usize, usize),
    /// Planar lattices have no non-contractible loops.
    #[error("lattice has no non-contractible loops")]
    NoNonContractibleLoop,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity((self == Sign::Minus) ^ (rhs == Sign::Minus))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: Bits,
    z: Bits,
    sign: Sign,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { x: bitvec![u64, Lsb0; 0; n], z: bitvec![u64, Lsb0; 0; n], sign: Sign::Plus }
    }

    pub fn new(x: Bits, z: Bits, sign: Sign) -> Result<Self, PauliError> {
        if x.len() != z.len() {
            return Err(PauliError::LengthMismatch(x.len(), z.len()));
        }
        Ok(PauliString { x, z, sign })
    }

    /// σˣ on every listed qubit.
    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            let b = !p.x[q];
            p.x.set(q, b);
        }
        p
    }

    /// σᶻ on every listed qubit.
    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            let b = !p.z[q];
            p.z.set(q, b);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.x
    }

    pub fn z_bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.z
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn weight(&self) -> usize {
        (self.x.clone() | self.z.clone()).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x.not_any() && self.z.not_any()
    }

    pub fn is_z_type(&self) -> bool {
        self.x.not_any()
    }

    /// X and Z parts as basis-state masks (qubit k is bit k). `None` past 64 qubits.
    pub fn masks(&self) -> Option<(u64, u64)> {
        (self.n() <= 64).then(|| (to_mask(&self.x), to_mask(&self.z)))
    }
}

fn to_mask(b: &BitSlice<u64, Lsb0>) -> u64 {
    b.iter_ones().fold(0u64, |m, i| m | 1 << i)
}

fn overlap_parity(a: &BitSlice<u64, Lsb0>, b: &BitSlice<u64, Lsb0>) -> bool {
    a.iter_ones().filter(|&i| b[i]).count() % 2 == 1
}

fn check_len(p: &PauliString, q: &PauliString) -> Result<(), PauliError> {
    if p.n() != q.n() {
        Err(PauliError::LengthMismatch(p.n(), q.n()))
    } else {
        Ok(())
    }
}

/// Product `P·Q`, with the sign from moving Q's X part past P's Z part.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString, PauliError> {
    check_len(p, q)?;
    let swap = Sign::from_parity(overlap_parity(&p.z, &q.x));
    Ok(PauliString {
        x: p.x.clone() ^ q.x.clone(),
        z: p.z.clone() ^ q.z.clone(),
        sign: p.sign * q.sign * swap,
    })
}

/// Symplectic test: `x_P·z_Q + z_P·x_Q = 0 (mod 2)`.
pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool, PauliError> {
    check_len(p, q)?;
    Ok(overlap_parity(&p.x, &q.z) == overlap_parity(&p.z, &q.x))
}

/// Dense GF(2) matrix stored as bit rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Gf2Matrix {
    rows: Vec<Bits>,
    cols: usize,
}

impl Gf2Matrix {
    pub fn new(cols: usize) -> Self {
        Gf2Matrix { rows: Vec::new(), cols }
    }

    pub fn from_rows(cols: usize, rows: impl IntoIterator<Item = Bits>) -> Self {
        let mut m = Self::new(cols);
        for r in rows {
            m.push(r);
        }
        m
    }

    /// Row with ones at the listed columns.
    pub fn push_support(&mut self, support: impl IntoIterator<Item = usize>) {
        let mut r = bitvec![u64, Lsb0; 0; self.cols];
        for c in support {
            let b = !r[c];
            r.set(c, b);
        }
        self.rows.push(r);
    }

    pub fn push(&mut self, mut row: Bits) {
        row.resize(self.cols, false);
        self.rows.push(row);
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Bits] {
        &self.rows
    }

    /// Reduced basis of the row space, one row per pivot column.
    fn echelon(&self) -> Vec<(usize, Bits)> {
        let mut basis: Vec<(usize, Bits)> = Vec::new();
        for row in &self.rows {
            let mut r = row.clone();
            for (pivot, b) in &basis {
                if r[*pivot] {
                    r ^= b;
                }
            }
            if let Some(p) = r.first_one() {
                for (_, b) in basis.iter_mut() {
                    if b[p] {
                        *b ^= &r;
                    }
                }
                basis.push((p, r));
            }
        }
        basis
    }

    /// Row rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        self.echelon().len()
    }

    pub fn row_space_contains(&self, v: &BitSlice<u64, Lsb0>) -> bool {
        let mut r: Bits = v.to_bitvec();
        r.resize(self.cols, false);
        for (pivot, b) in self.echelon() {
            if r[pivot] {
                r ^= &b;
            }
        }
        r.not_any()
    }
}

pub fn gf2_rank(m: &Gf2Matrix) -> usize {
    m.rank()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    /// σᶻ along a cycle of the direct lattice.
    ZDirect,
    /// σˣ on the edges crossed by a cycle of the dual lattice.
    XDual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

impl Direction {
    pub fn other(self) -> Direction {
        match self {
            Direction::Horizontal => Direction::Vertical,
            Direction::Vertical => Direction::Horizontal,
        }
    }
}

/// Fundamental loop operator. `offset` picks the column (vertical loops) or
/// row (horizontal loops) and wraps.
pub fn loop_operator(
    lat: &Lattice,
    kind: LoopKind,
    direction: Direction,
    offset: isize,
) -> Result<PauliString, PauliError> {
    if lat.topology() != Topology::Torus {
        return Err(PauliError::NoNonContractibleLoop);
    }
    let n = lat.n();
    let support: Vec<usize> = match direction {
        Direction::Vertical => (0..lat.ly() as isize)
            .map(|y| match kind {
                LoopKind::ZDirect => lat.v(offset, y),
                LoopKind::XDual => lat.h(offset, y),
            })
            .collect::<Option<_>>()
            .expect("torus edges always exist"),
        Direction::Horizontal => (0..lat.lx() as isize)
            .map(|x| match kind {
                LoopKind::ZDirect => lat.h(x, offset),
                LoopKind::XDual => lat.v(x, offset),
            })
            .collect::<Option<_>>()
            .expect("torus edges always exist"),
    };
    Ok(match kind {
        LoopKind::ZDirect => PauliString::z_on(n, support),
        LoopKind::XDual => PauliString::x_on(n, support),
    })
}

/// Star operator A_s = Π σˣ over edges incident to `v`.
pub fn star_operator(lat: &Lattice, v: Vertex) -> PauliString {
    PauliString::x_on(lat.n(), lat.star_support(v).iter().copied())
}

/// Plaquette operator B_p = Π σᶻ around face `p`.
pub fn plaquette_operator(lat: &Lattice, p: Face) -> PauliString {
    PauliString::z_on(lat.n(), lat.plaquette_support(p).iter().copied())
}

/// All stars followed by all plaquettes.
pub fn stabilizers(lat: &Lattice) -> Vec<PauliString> {
    lat.vertices()
        .map(|v| star_operator(lat, v))
        .chain(lat.face_ids().map(|f| plaquette_operator(lat, f)))
        .collect()
}

/// Orientation helper for edges lying along a loop direction.
pub fn orientation_of(direction: Direction) -> Orientation {
    match direction {
        Direction::Horizontal => Orientation::Horizontal,
        Direction::Vertical => Orientation::Vertical,
    }
}
