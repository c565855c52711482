//! Dense toric-code ground states in the σᶻ edge basis.
//!
//! Edge `k` is bit `k` of the basis index; bit value 1 is |1⟩ (σᶻ = −1).

use crate::kernels::{self, Exec};
use crate::lattice::{Lattice, Region, Topology};
use crate::linalg::{self, LinalgError, C64, DEFAULT_ENTRY_BUDGET, DEFAULT_MAX_BLOCK};
use crate::pauli::{loop_operator, pauli_mul, plaquette_operator, star_operator, Direction, LoopKind, PauliString};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Default state-vector cap: 2^24 amplitudes (256 MB).
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Squared singular values below this are treated as zero.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroundStateError {
    #[error("{n} qubits exceeds the state-vector cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("flux basis needs a torus")]
    NotTorus,
    #[error("flux coefficients have norm² {0}, expected 1")]
    Unnormalized(f64),
    #[error("length mismatch: {0} vs {1} qubits")]
    LengthMismatch(usize, usize),
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("Schmidt spectrum needs a side with at most {cap} qubits, smaller side has {k}")]
    SidesTooLarge { k: usize, cap: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
    norm: f64,
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self, GroundStateError> {
        if amps.len() != 1usize << n {
            return Err(GroundStateError::LengthMismatch(n, amps.len().trailing_zeros() as usize));
        }
        let norm = l2(&amps);
        Ok(StateVector { n, amps, norm })
    }

    /// Uniform superposition |+…+⟩.
    pub fn plus(n: usize) -> Self {
        let a = (0.5f64).powf(n as f64 / 2.0);
        StateVector { n, amps: vec![C64::new(a, 0.0); 1 << n], norm: 1.0 }
    }

    /// Computational basis state |k⟩.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut amps = vec![C64::default(); 1 << n];
        amps[k] = C64::new(1.0, 0.0);
        StateVector { n, amps, norm: 1.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Cached ℓ2 norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn normalize(&mut self) -> Result<(), GroundStateError> {
        let norm = l2(&self.amps);
        if norm == 0.0 {
            return Err(GroundStateError::ZeroVector);
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        self.norm = l2(&self.amps);
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64, GroundStateError> {
        if self.n != other.n {
            return Err(GroundStateError::LengthMismatch(self.n, other.n));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn nonzero(&self, threshold: f64) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.amps.iter().copied().enumerate().filter(move |(_, a)| a.norm() > threshold)
    }

    /// Writes nonzero amplitudes as `index,re,im` CSV rows.
    pub fn dump_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "re", "im"])?;
        for (k, a) in self.nonzero(0.0) {
            out.write_record([k.to_string(), format!("{:.17e}", a.re), format!("{:.17e}", a.im)])?;
        }
        out.flush()?;
        Ok(())
    }

    fn check(&self, p: &PauliString) -> Result<(u64, u64, f64), GroundStateError> {
        if p.n() != self.n {
            return Err(GroundStateError::LengthMismatch(self.n, p.n()));
        }
        let (x, z) = p.masks().expect("state vectors are far below 64 qubits");
        Ok((x, z, p.sign().value()))
    }

    /// In place ψ ← (ψ + Pψ)/2, not renormalized.
    pub fn project(&mut self, p: &PauliString, exec: Exec) -> Result<(), GroundStateError> {
        let (x, z, s) = self.check(p)?;
        kernels::apply_projector(&mut self.amps, x, z, s, exec);
        self.norm = l2(&self.amps);
        Ok(())
    }

    /// ⟨ψ|P|ψ⟩.
    pub fn expectation(&self, p: &PauliString) -> Result<C64, GroundStateError> {
        let applied = apply_pauli(self, p)?;
        self.inner(&applied)
    }
}

fn l2(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Exact action of a Pauli string by bit flips and sign flips.
pub fn apply_pauli(psi: &StateVector, p: &PauliString) -> Result<StateVector, GroundStateError> {
    let (x, z, s) = psi.check(p)?;
    let mut out = psi.clone();
    kernels::apply_pauli(&mut out.amps, x, z, s, Exec::default());
    Ok(out)
}

fn check_cap(lat: &Lattice, cap: usize) -> Result<(), GroundStateError> {
    if lat.n() > cap {
        Err(GroundStateError::CapExceeded { n: lat.n(), cap })
    } else {
        Ok(())
    }
}

/// Flux sector label in the direction-1 basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Flux {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "em")]
    Em,
}

impl Flux {
    pub const ALL: [Flux; 4] = [Flux::I, Flux::E, Flux::M, Flux::Em];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Flux {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Flux::I => "I",
            Flux::E => "e",
            Flux::M => "m",
            Flux::Em => "em",
        })
    }
}

/// Which lattice direction carries the loops W₁ that label the flux basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convention {
    pub loop_direction: Direction,
}

impl Default for Convention {
    fn default() -> Self {
        Convention { loop_direction: Direction::Vertical }
    }
}

/// The four fundamental loops under a convention.
#[derive(Debug, Clone)]
pub struct Loops {
    pub wz1: PauliString,
    pub wx1: PauliString,
    pub wz2: PauliString,
    pub wx2: PauliString,
}

impl Loops {
    pub fn new(lat: &Lattice, conv: Convention) -> Result<Self, GroundStateError> {
        let d1 = conv.loop_direction;
        let d2 = d1.other();
        let l = |k, d| loop_operator(lat, k, d, 0).map_err(|_| GroundStateError::NotTorus);
        Ok(Loops {
            wz1: l(LoopKind::ZDirect, d1)?,
            wx1: l(LoopKind::XDual, d1)?,
            wz2: l(LoopKind::ZDirect, d2)?,
            wx2: l(LoopKind::XDual, d2)?,
        })
    }

    /// Operator mapping |ψ_I⟩ to the given flux state.
    pub fn shift(&self, flux: Flux) -> PauliString {
        match flux {
            Flux::I => PauliString::identity(self.wz1.n()),
            Flux::E => self.wx2.clone(),
            Flux::M => self.wz2.clone(),
            Flux::Em => pauli_mul(&self.wx2, &self.wz2).expect("same lattice"),
        }
    }
}

/// Normalized coefficients `c_i` over the flux basis, ordered I, e, m, em.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxCoefficients([C64; 4]);

impl FluxCoefficients {
    pub fn new(c: [C64; 4]) -> Result<Self, GroundStateError> {
        let norm2: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(GroundStateError::Unnormalized(norm2));
        }
        Ok(FluxCoefficients(c))
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(c: [C64; 4]) -> Result<Self, GroundStateError> {
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(GroundStateError::ZeroVector);
        }
        Ok(FluxCoefficients(c.map(|z| z / norm)))
    }

    pub fn single(flux: Flux) -> Self {
        let mut c = [C64::default(); 4];
        c[flux.index()] = C64::new(1.0, 0.0);
        FluxCoefficients(c)
    }

    pub fn uniform() -> Self {
        FluxCoefficients([C64::new(0.5, 0.0); 4])
    }

    /// Complex Gaussian direction, normalized.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        use rand_distr::{Distribution, StandardNormal};
        let mut draw = || {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        };
        let c = [draw(), draw(), draw(), draw()];
        Self::normalized(c).expect("a Gaussian draw is nonzero almost surely")
    }

    pub fn get(&self, flux: Flux) -> C64 {
        self.0[flux.index()]
    }

    pub fn as_array(&self) -> [C64; 4] {
        self.0
    }

    /// |c_i|².
    pub fn probabilities(&self) -> [f64; 4] {
        self.0.map(|z| z.norm_sqr())
    }

    pub fn abs_sum(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).sum()
    }
}

/// Projectors (1 + B_p)/2 for every face and (1 + W^z_i)/2 for every loop
/// in `z_loops`, applied to |+…+⟩ and normalized.
fn z_projected_plus(
    lat: &Lattice,
    z_loops: &[PauliString],
    cap: usize,
    exec: Exec,
) -> Result<StateVector, GroundStateError> {
    check_cap(lat, cap)?;
    let mut psi = StateVector::plus(lat.n());
    let masks: Vec<(u64, bool)> = lat
        .face_ids()
        .map(|f| plaquette_operator(lat, f))
        .chain(z_loops.iter().cloned())
        .map(|p| (p.masks().expect("small lattice").1, false))
        .collect();
    kernels::diagonal_filter(&mut psi.amps, &masks, exec);
    psi.normalize()?;
    Ok(psi)
}

/// |ψ₀⟩: the +1 eigenstate of every stabilizer and of every z-loop.
pub fn psi0(lat: &Lattice) -> Result<StateVector, GroundStateError> {
    psi0_with(lat, DEFAULT_MAX_QUBITS, Exec::default())
}

pub fn psi0_with(lat: &Lattice, cap: usize, exec: Exec) -> Result<StateVector, GroundStateError> {
    let loops = match lat.topology() {
        Topology::Torus => {
            let l = Loops::new(lat, Convention::default())?;
            vec![l.wz1, l.wz2]
        }
        Topology::Planar => Vec::new(),
    };
    z_projected_plus(lat, &loops, cap, exec)
}

/// |ψ₀⟩ built the other way: star projectors (1 + A_s)/2 on |0…0⟩.
pub fn psi0_from_stars(lat: &Lattice, cap: usize, exec: Exec) -> Result<StateVector, GroundStateError> {
    check_cap(lat, cap)?;
    let mut psi = StateVector::basis(lat.n(), 0);
    for v in lat.vertices() {
        psi.project(&star_operator(lat, v), exec)?;
    }
    psi.normalize()?;
    Ok(psi)
}

/// |ψ_I⟩, the +1 eigenstate of W^z₁ and W^x₁.
fn psi_identity(lat: &Lattice, conv: Convention, cap: usize, exec: Exec) -> Result<(StateVector, Loops), GroundStateError> {
    if lat.topology() != Topology::Torus {
        return Err(GroundStateError::NotTorus);
    }
    let loops = Loops::new(lat, conv)?;
    let psi = z_projected_plus(lat, std::slice::from_ref(&loops.wz1), cap, exec)?;
    Ok((psi, loops))
}

/// Flux-basis state: |ψ_I⟩, |ψ_e⟩ = W^x₂|ψ_I⟩, |ψ_m⟩ = W^z₂|ψ_I⟩, |ψ_em⟩ = W^x₂W^z₂|ψ_I⟩.
pub fn flux_state(lat: &Lattice, flux: Flux) -> Result<StateVector, GroundStateError> {
    flux_state_with(lat, flux, Convention::default(), DEFAULT_MAX_QUBITS)
}

pub fn flux_state_with(lat: &Lattice, flux: Flux, conv: Convention, cap: usize) -> Result<StateVector, GroundStateError> {
    let (psi, loops) = psi_identity(lat, conv, cap, Exec::default())?;
    apply_pauli(&psi, &loops.shift(flux))
}

/// Σ_i c_i |ψ_i⟩, assembled from |ψ_I⟩ in one pass.
pub fn generic_state(lat: &Lattice, c: &FluxCoefficients) -> Result<StateVector, GroundStateError> {
    generic_state_with(lat, c, Convention::default(), DEFAULT_MAX_QUBITS, Exec::default())
}

pub fn generic_state_with(
    lat: &Lattice,
    c: &FluxCoefficients,
    conv: Convention,
    cap: usize,
    exec: Exec,
) -> Result<StateVector, GroundStateError> {
    let (psi, loops) = psi_identity(lat, conv, cap, exec)?;
    let terms: Vec<(C64, u64, u64)> = Flux::ALL
        .iter()
        .filter(|f| c.get(**f) != C64::default())
        .map(|&f| {
            let p = loops.shift(f);
            let (x, z) = p.masks().expect("small lattice");
            (c.get(f) * p.sign().value(), x, z)
        })
        .collect();
    let amps = kernels::combine(&psi.amps, &terms, exec);
    StateVector::from_amplitudes(lat.n(), amps)
}

/// Descending Schmidt probabilities above the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub probabilities: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Flat spectrum of `count` equal values.
    pub fn flat(count: usize) -> Self {
        SchmidtSpectrum { probabilities: vec![1.0 / count as f64; count] }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Groups values within relative tolerance into `(value, multiplicity)` levels.
    pub fn levels(&self, rel_tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &p in &self.probabilities {
            match out.last_mut() {
                Some((v, m)) if (*v - p).abs() <= rel_tol * v.abs() => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// max/min − 1 over the nonzero values.
    pub fn flatness(&self) -> f64 {
        match (self.probabilities.first(), self.probabilities.last()) {
            (Some(hi), Some(lo)) => hi / lo - 1.0,
            _ => 0.0,
        }
    }
}

/// Schmidt spectrum across `A | rest`, from the smaller side's reduced matrix.
pub fn schmidt_spectrum(psi: &StateVector, a: &Region) -> Result<SchmidtSpectrum, GroundStateError> {
    schmidt_spectrum_with(psi, a, DEFAULT_MAX_BLOCK, DEFAULT_ENTRY_BUDGET)
}

pub fn schmidt_spectrum_with(
    psi: &StateVector,
    a: &Region,
    max_block: usize,
    budget: usize,
) -> Result<SchmidtSpectrum, GroundStateError> {
    let side_a: Vec<usize> = a.iter().filter(|&e| e < psi.n).collect();
    let side_b: Vec<usize> = (0..psi.n).filter(|e| !a.contains(*e)).collect();
    let side = if side_a.len() <= side_b.len() { side_a } else { side_b };
    let cap = max_block.trailing_zeros() as usize;
    if side.len() > cap {
        return Err(GroundStateError::SidesTooLarge { k: side.len(), cap });
    }
    let rho = linalg::reduced_sparse(&psi.amps, &side, 0, budget)?;
    let norm2 = psi.norm * psi.norm;
    let mut probabilities: Vec<f64> = rho
        .eigenvalues(max_block)?
        .values
        .into_iter()
        .map(|p| p / norm2)
        .filter(|&p| p > SCHMIDT_CUTOFF)
        .collect();
    probabilities.sort_by(|x, y| y.total_cmp(x));
    Ok(SchmidtSpectrum { probabilities })
}

/// ⟨ψ|H|ψ⟩ for H = −U Σ A_s − J Σ B_p.
pub fn energy(lat: &Lattice, psi: &StateVector, u: f64, j: f64) -> Result<f64, GroundStateError> {
    let mut e = 0.0;
    for v in lat.vertices() {
        e -= u * psi.expectation(&star_operator(lat, v))?.re;
    }
    for f in lat.face_ids() {
        e -= j * psi.expectation(&plaquette_operator(lat, f))?.re;
    }
    Ok(e)
}
