//! Reduced density matrices, partial transposes, negativities and entropies.

use crate::closedform::{classify, ClassifyError, SettingClass};
use crate::groundstate::{flux_state_with, generic_state_with, Convention, Flux, FluxCoefficients, GroundStateError, StateVector};
use crate::kernels::Exec;
use crate::lattice::{Lattice, Region};
use crate::linalg::{self, LinalgError, Spectrum, C64, DEFAULT_ENTRY_BUDGET, DEFAULT_MAX_BLOCK};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest kept set stored as a dense matrix.
pub const DENSE_CAP: usize = 13;

/// Relative eigenvalue threshold: |λ| below `ZERO_EIGEN · dim` is zero in entropy sums.
pub const ZERO_EIGEN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error("{k} kept qubits exceeds the dense cap of {cap}")]
    CapExceeded { k: usize, cap: usize },
    #[error("edges {0:?} are not kept by this density matrix")]
    NotKept(Vec<usize>),
    #[error("matrix has {len} entries, expected {dim}²")]
    Shape { len: usize, dim: usize },
    #[error("order α = {0} is singular for this quantity")]
    SingularAlpha(f64),
    #[error("state is not pure across this cut; use the partial transpose")]
    NotPure,
    #[error("setting is classified {0:?}; classical-structure check needs a no-shared-boundary setting")]
    WrongSetting(SettingClass),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    GroundState(#[from] GroundStateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Dense Hermitian matrix over an ordered list of kept edges; local bit `j`
/// of a row index is edge `kept[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    kept: Vec<usize>,
    data: Vec<C64>,
    trace: f64,
}

impl DensityMatrix {
    pub fn from_matrix(kept: Vec<usize>, data: Vec<C64>) -> Result<Self, EntanglementError> {
        if kept.len() > DENSE_CAP {
            return Err(EntanglementError::CapExceeded { k: kept.len(), cap: DENSE_CAP });
        }
        let dim = 1usize << kept.len();
        if data.len() != dim * dim {
            return Err(EntanglementError::Shape { len: data.len(), dim });
        }
        let trace = (0..dim).map(|i| data[i * dim + i].re).sum();
        Ok(DensityMatrix { kept, data, trace })
    }

    /// |ψ⟩⟨ψ| for a small state; qubit `j` becomes edge `j`.
    pub fn pure(psi: &StateVector) -> Result<Self, EntanglementError> {
        let keep = Region::new("all", 0..psi.n());
        reduce_state(psi, &keep)
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn k(&self) -> usize {
        self.kept.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.kept.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// max |M − M†|.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (self.get(i, j) - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, EntanglementError> {
        Ok(linalg::dense_eigenvalues(self.dim(), &self.data, DEFAULT_MAX_BLOCK)?)
    }

    /// Local bit mask of `sub` within the kept ordering.
    fn mask_of(&self, sub: &Region) -> Result<usize, EntanglementError> {
        let missing: Vec<usize> = sub.iter().filter(|e| !self.kept.contains(e)).collect();
        if !missing.is_empty() {
            return Err(EntanglementError::NotKept(missing));
        }
        Ok(self
            .kept
            .iter()
            .enumerate()
            .filter(|(_, e)| sub.contains(**e))
            .fold(0, |m, (j, _)| m | 1 << j))
    }

    /// ρ ⊗ σ with `self`'s qubits in the low bits.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix, EntanglementError> {
        let kept: Vec<usize> = self.kept.iter().chain(&other.kept).copied().collect();
        if kept.len() > DENSE_CAP {
            return Err(EntanglementError::CapExceeded { k: kept.len(), cap: DENSE_CAP });
        }
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut data = vec![C64::default(); d * d];
        for (r, row) in data.chunks_mut(d).enumerate() {
            let (ra, rb) = (r % da, r / da);
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.get(ra, c % da) * other.get(rb, c / da);
            }
        }
        DensityMatrix::from_matrix(kept, data)
    }

    /// Max-entry distance to another matrix on the same kept ordering.
    pub fn max_deviation(&self, other: &DensityMatrix) -> f64 {
        if self.kept != other.kept {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// tr(ρσ) on a shared kept ordering.
    pub fn overlap(&self, other: &DensityMatrix) -> C64 {
        let d = self.dim();
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.get(i, j) * other.get(j, i)).sum()
    }
}

/// ρ_keep = tr_rest |ψ⟩⟨ψ| / ⟨ψ|ψ⟩, kept edges in ascending order.
pub fn reduce_state(psi: &StateVector, keep: &Region) -> Result<DensityMatrix, EntanglementError> {
    let kept: Vec<usize> = keep.iter().collect();
    if kept.len() > DENSE_CAP {
        return Err(EntanglementError::CapExceeded { k: kept.len(), cap: DENSE_CAP });
    }
    let dim = 1usize << kept.len();
    let grouped = linalg::grouped_amplitudes(psi.amplitudes(), &kept);
    let scale = 1.0 / (psi.norm() * psi.norm());
    let mut data = vec![C64::default(); dim * dim];
    for group in linalg::environment_groups(&grouped) {
        for &(_, i, a) in group {
            let row = &mut data[i as usize * dim..(i as usize + 1) * dim];
            for &(_, j, b) in group {
                row[j as usize] += a * b.conj() * scale;
            }
        }
    }
    DensityMatrix::from_matrix(kept, data)
}

/// Partial trace of a density matrix down to `keep`, preserving the kept order.
pub fn reduce_density(rho: &DensityMatrix, keep: &Region) -> Result<DensityMatrix, EntanglementError> {
    let keep_mask = rho.mask_of(keep)?;
    let kept: Vec<usize> = rho.kept.iter().copied().filter(|&e| keep.contains(e)).collect();
    let positions: Vec<usize> = (0..rho.k()).filter(|j| keep_mask >> j & 1 == 1).collect();
    let gather = linalg::BitGather::new(&positions);
    let d = rho.dim();
    let dk = 1usize << kept.len();
    let mut data = vec![C64::default(); dk * dk];
    for i in 0..d {
        for j in 0..d {
            if i & !keep_mask == j & !keep_mask {
                let (r, c) = (gather.gather(i as u64) as usize, gather.gather(j as u64) as usize);
                data[r * dk + c] += rho.get(i, j);
            }
        }
    }
    DensityMatrix::from_matrix(kept, data)
}

/// ρ^{T_sub}: transposes the factors on `sub`, as an index permutation.
pub fn partial_transpose(rho: &DensityMatrix, sub: &Region) -> Result<DensityMatrix, EntanglementError> {
    let t = rho.mask_of(sub)?;
    let d = rho.dim();
    let mut data = vec![C64::default(); d * d];
    for i in 0..d {
        for j in 0..d {
            let (r, c) = ((i & !t) | (j & t), (j & !t) | (i & t));
            data[r * d + c] = rho.get(i, j);
        }
    }
    DensityMatrix::from_matrix(rho.kept.clone(), data)
}

/// Ascending spectrum of ρ^{T_sub}.
pub fn pt_spectrum(rho: &DensityMatrix, sub: &Region) -> Result<Vec<f64>, EntanglementError> {
    partial_transpose(rho, sub)?.eigenvalues()
}

/// log₂ of a trace norm.
pub fn log_negativity_from(spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|l| l.abs()).sum::<f64>().log2()
}

/// Σ|negative eigenvalues|.
pub fn negativity_from(spectrum: &[f64]) -> f64 {
    spectrum.iter().filter(|&&l| l < 0.0).map(|l| -l).sum()
}

/// E_N = log₂ ‖ρ^{T_sub}‖₁.
pub fn log_negativity(rho: &DensityMatrix, sub: &Region) -> Result<f64, EntanglementError> {
    Ok(log_negativity_from(&pt_spectrum(rho, sub)?))
}

pub fn negativity(rho: &DensityMatrix, sub: &Region) -> Result<f64, EntanglementError> {
    Ok(negativity_from(&pt_spectrum(rho, sub)?))
}

fn nonzero(p: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let cut = ZERO_EIGEN * p.len().max(1) as f64;
    p.iter().copied().filter(move |x| x.abs() > cut)
}

/// −Σ p log₂ p.
pub fn von_neumann_from(p: &[f64]) -> f64 {
    nonzero(p).filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

/// S_q = log₂(Σ p^q) / (1 − q); q = 1 is the von Neumann entropy.
pub fn renyi_from(p: &[f64], q: f64) -> f64 {
    if q == 1.0 {
        return von_neumann_from(p);
    }
    nonzero(p).filter(|&x| x > 0.0).map(|x| x.powf(q)).sum::<f64>().log2() / (1.0 - q)
}

pub fn renyi(rho: &DensityMatrix, q: f64) -> Result<f64, EntanglementError> {
    Ok(renyi_from(&rho.eigenvalues()?, q))
}

pub fn von_neumann(rho: &DensityMatrix) -> Result<f64, EntanglementError> {
    Ok(von_neumann_from(&rho.eigenvalues()?))
}

/// 𝒩⁺_α = log₂ tr|ρ^{T}|^{2α} / (2(1 − α)), from a partial-transpose spectrum.
pub fn extended_plus_from(spectrum: &[f64], alpha: f64) -> Result<f64, EntanglementError> {
    if alpha == 1.0 {
        return Err(EntanglementError::SingularAlpha(alpha));
    }
    let s: f64 = nonzero(spectrum).map(|l| l.abs().powf(2.0 * alpha)).sum();
    Ok(s.log2() / (2.0 * (1.0 - alpha)))
}

/// 𝒩⁻_α = log₂ tr[sign(ρ^{T}) |ρ^{T}|^{2α}] / (1 − 2α).
pub fn extended_minus_from(spectrum: &[f64], alpha: f64) -> Result<f64, EntanglementError> {
    if alpha == 0.5 {
        return Err(EntanglementError::SingularAlpha(alpha));
    }
    let s: f64 = nonzero(spectrum).map(|l| l.signum() * l.abs().powf(2.0 * alpha)).sum();
    Ok(s.log2() / (1.0 - 2.0 * alpha))
}

pub fn extended_negativity_plus(rho: &DensityMatrix, sub: &Region, alpha: f64) -> Result<f64, EntanglementError> {
    if alpha == 1.0 {
        return Err(EntanglementError::SingularAlpha(alpha));
    }
    extended_plus_from(&pt_spectrum(rho, sub)?, alpha)
}

pub fn extended_negativity_minus(rho: &DensityMatrix, sub: &Region, alpha: f64) -> Result<f64, EntanglementError> {
    if alpha == 0.5 {
        return Err(EntanglementError::SingularAlpha(alpha));
    }
    extended_minus_from(&pt_spectrum(rho, sub)?, alpha)
}

/// S(ρ_A) + S(ρ_B) − S(ρ_AB), with B the kept edges outside `sub`.
pub fn mutual_information(rho: &DensityMatrix, sub: &Region) -> Result<f64, EntanglementError> {
    rho.mask_of(sub)?;
    let rest = Region::new("B", rho.kept.iter().copied().filter(|&e| !sub.contains(e)));
    let sa = von_neumann(&reduce_density(rho, sub)?)?;
    let sb = von_neumann(&reduce_density(rho, &rest)?)?;
    Ok(sa + sb - von_neumann(rho)?)
}

/// Everything the oracle reports for one transposed side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub log_negativity: f64,
    pub negativity: f64,
    /// Rényi entropies of the transposed side's reduced state, keyed by order.
    pub renyi: BTreeMap<String, f64>,
    pub von_neumann: f64,
    /// Ascending spectrum of the partial transpose.
    pub pt_spectrum: Vec<f64>,
}

impl EntanglementReport {
    pub fn compute(rho: &DensityMatrix, sub: &Region, orders: &[f64]) -> Result<Self, EntanglementError> {
        let pt = pt_spectrum(rho, sub)?;
        let side = reduce_density(rho, sub)?.eigenvalues()?;
        Ok(EntanglementReport {
            log_negativity: log_negativity_from(&pt),
            negativity: negativity_from(&pt),
            renyi: orders.iter().map(|&q| (q.to_string(), renyi_from(&side, q))).collect(),
            von_neumann: von_neumann_from(&side),
            pt_spectrum: pt,
        })
    }
}

/// Resource limits for state-level computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCaps {
    pub max_block: usize,
    pub entry_budget: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { max_block: DEFAULT_MAX_BLOCK, entry_budget: DEFAULT_ENTRY_BUDGET }
    }
}

/// Spectrum of ρ_AB^{T_A} taken straight from the state, block by block. Handles
/// kept sets far beyond the dense cap when ρ_AB has low rank.
pub fn pt_spectrum_from_state(
    psi: &StateVector,
    a: &Region,
    b: &Region,
    caps: OracleCaps,
) -> Result<Spectrum, EntanglementError> {
    let keep: Vec<usize> = a.iter().chain(b.iter()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let t = keep.iter().enumerate().filter(|(_, e)| a.contains(**e)).fold(0u32, |m, (j, _)| m | 1 << j);
    let rho = linalg::reduced_sparse(psi.amplitudes(), &keep, t, caps.entry_budget)?;
    let mut s = rho.eigenvalues(caps.max_block)?;
    let norm2 = psi.norm() * psi.norm();
    s.values.iter_mut().for_each(|v| *v /= norm2);
    Ok(s)
}

/// How an oracle value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    PartialTranspose,
    /// Pure cut: E_N = S_{1/2}(ρ_A) from the Schmidt spectrum.
    Schmidt,
}

/// E_N(A|B) of tr_C |ψ⟩⟨ψ|. Uses the partial transpose when it fits the caps and
/// falls back to the Schmidt spectrum when A ∪ B is everything.
pub fn log_negativity_from_state(
    psi: &StateVector,
    a: &Region,
    b: &Region,
    caps: OracleCaps,
) -> Result<(f64, OracleMethod), EntanglementError> {
    match pt_spectrum_from_state(psi, a, b, caps) {
        Ok(s) => Ok((s.trace_norm().log2(), OracleMethod::PartialTranspose)),
        Err(EntanglementError::Linalg(e)) if a.len() + b.len() == psi.n() => {
            let s = crate::groundstate::schmidt_spectrum_with(psi, a, caps.max_block, caps.entry_budget)
                .map_err(|_| EntanglementError::Linalg(e))?;
            Ok((renyi_from(&s.probabilities, 0.5), OracleMethod::Schmidt))
        }
        Err(e) => Err(e),
    }
}

/// Pure-state E_N across `A | rest` as S_{1/2}(ρ_A).
pub fn pure_log_negativity(psi: &StateVector, a: &Region) -> Result<f64, EntanglementError> {
    let s = crate::groundstate::schmidt_spectrum(psi, a)?;
    Ok(renyi_from(&s.probabilities, 0.5))
}

/// Outcome of the separable-structure check for settings where A and B share no boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub class: SettingClass,
    /// max |ρ_AB − Σ|c_i|² ρ_A^{(i)} ⊗ ρ_B^{(i)}|.
    pub reconstruction_deviation: f64,
    /// max over i, j of |tr(ρ^{(i)}ρ^{(j)}) − δ_ij tr((ρ^{(i)})²)| on both sides.
    pub overlap_deviation: f64,
    /// max |ρ_AB − ρ_A ⊗ ρ_B|.
    pub product_deviation: f64,
    /// max |ρ_AB(c) − ρ_AB(c′)| for c′ a single flux sector.
    pub coefficient_dependence: f64,
    /// Minimum eigenvalue of ρ_AB^{T_A}.
    pub min_pt_eigenvalue: f64,
}

/// Reconstructs ρ_AB from flux-sector reductions and measures how far it is
/// from the classically correlated and product forms.
pub fn check_classical_structure(
    lat: &Lattice,
    a: &Region,
    b: &Region,
    c: &FluxCoefficients,
    conv: Convention,
    max_qubits: usize,
) -> Result<ClassicalReport, EntanglementError> {
    let rest = a.union(b, "AB").complement(lat, "C");
    let class = classify(lat, a, b, &rest, conv)?.class;
    if !matches!(class, SettingClass::NoSharedBoundaryClassical | SettingClass::NoSharedBoundaryProduct) {
        return Err(EntanglementError::WrongSetting(class));
    }
    let ab = a.union(b, "AB");
    let psi = generic_state_with(lat, c, conv, max_qubits, Exec::default())?;
    let rho = reduce_state(&psi, &ab)?;
    let rho_a = reduce_density(&rho, a)?;
    let rho_b = reduce_density(&rho, b)?;
    let product = align(&rho_a.tensor(&rho_b)?, rho.kept())?;
    let product_deviation = rho.max_deviation(&product);

    let sectors: Vec<(DensityMatrix, DensityMatrix)> = Flux::ALL
        .iter()
        .map(|&f| {
            let s = reduce_state(&flux_state_with(lat, f, conv, max_qubits)?, &ab)?;
            Ok((reduce_density(&s, a)?, reduce_density(&s, b)?))
        })
        .collect::<Result<_, EntanglementError>>()?;
    let dim = rho.dim();
    let mut mix = vec![C64::default(); dim * dim];
    for (f, (ra, rb)) in Flux::ALL.iter().zip(&sectors) {
        let w = c.get(*f).norm_sqr();
        let t = align(&ra.tensor(rb)?, rho.kept())?;
        mix.iter_mut().zip(t.data()).for_each(|(m, v)| *m += v * w);
    }
    let reconstruction_deviation = rho.max_deviation(&DensityMatrix::from_matrix(rho.kept().to_vec(), mix)?);
    let mut overlap_deviation: f64 = 0.0;
    for (i, (ai, bi)) in sectors.iter().enumerate() {
        for (j, (aj, bj)) in sectors.iter().enumerate() {
            let (want_a, want_b) = if i == j { (ai.overlap(ai), bi.overlap(bi)) } else { (C64::default(), C64::default()) };
            overlap_deviation = overlap_deviation
                .max((ai.overlap(aj) - want_a).norm())
                .max((bi.overlap(bj) - want_b).norm());
        }
    }
    let reference = reduce_state(&flux_state_with(lat, Flux::I, conv, max_qubits)?, &ab)?;
    let min_pt_eigenvalue = pt_spectrum(&rho, a)?.first().copied().unwrap_or(0.0);
    Ok(ClassicalReport {
        class,
        reconstruction_deviation,
        overlap_deviation,
        product_deviation,
        coefficient_dependence: rho.max_deviation(&reference),
        min_pt_eigenvalue,
    })
}

/// Reorders a density matrix's qubits to match `order`.
pub fn align(rho: &DensityMatrix, order: &[usize]) -> Result<DensityMatrix, EntanglementError> {
    if rho.kept() == order {
        return Ok(rho.clone());
    }
    let perm: Vec<usize> = order
        .iter()
        .map(|e| rho.kept().iter().position(|k| k == e).ok_or_else(|| EntanglementError::NotKept(vec![*e])))
        .collect::<Result<_, _>>()?;
    if perm.len() != rho.k() {
        return Err(EntanglementError::NotKept(rho.kept().iter().copied().filter(|e| !order.contains(e)).collect()));
    }
    let map = |i: usize| perm.iter().enumerate().fold(0, |acc, (j, &src)| acc | (i >> src & 1) << j);
    let d = rho.dim();
    let mut data = vec![C64::default(); d * d];
    for i in 0..d {
        let r = map(i);
        for j in 0..d {
            data[r * d + map(j)] = rho.get(i, j);
        }
    }
    DensityMatrix::from_matrix(order.to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_amplitudes(2, vec![C64::new(h, 0.0), C64::default(), C64::default(), C64::new(h, 0.0)]).unwrap();
        DensityMatrix::pure(&psi).unwrap()
    }

    #[test]
    fn bell_pair() {
        let rho = bell();
        let a = Region::new("A", [0]);
        let s = pt_spectrum(&rho, &a).unwrap();
        let want = [-0.5, 0.5, 0.5, 0.5];
        for (x, y) in s.iter().zip(want) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(negativity(&rho, &a).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(log_negativity(&rho, &a).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&rho, &a).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn transpose_edge_cases() {
        let rho = bell();
        assert_eq!(partial_transpose(&rho, &Region::new("A", [])).unwrap(), rho);
        let full = partial_transpose(&rho, &Region::new("A", [0, 1])).unwrap();
        let (mut x, mut y) = (full.eigenvalues().unwrap(), rho.eigenvalues().unwrap());
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        for (p, q) in x.iter().zip(&y) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
        assert_eq!(partial_transpose(&rho, &Region::new("A", [5])), Err(EntanglementError::NotKept(vec![5])));
    }

    #[test]
    fn maximally_mixed() {
        let d = 4;
        let mut data = vec![C64::default(); d * d];
        (0..d).for_each(|i| data[i * d + i] = C64::new(0.25, 0.0));
        let rho = DensityMatrix::from_matrix(vec![0, 1], data).unwrap();
        for q in [0.5, 2.0, 3.0, 1.0] {
            assert_abs_diff_eq!(renyi(&rho, q).unwrap(), 2.0, epsilon = 1e-12);
        }
        let a = Region::new("A", [0]);
        // flat spectrum 1/4: log₂(4 · 4^{−2α}) / (2(1 − α))
        for alpha in [0.3, 0.5, 2.0] {
            let want = (1.0 - 2.0 * alpha) / (1.0 - alpha);
            assert_abs_diff_eq!(extended_negativity_plus(&rho, &a, alpha).unwrap(), want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(log_negativity(&rho, &a).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(extended_negativity_plus(&rho, &a, 1.0), Err(EntanglementError::SingularAlpha(1.0)));
        assert_eq!(extended_negativity_minus(&rho, &a, 0.5), Err(EntanglementError::SingularAlpha(0.5)));
    }

    #[test]
    fn reduce_composes_and_aligns() {
        let lat = Lattice::build_torus(3, 2).unwrap();
        let psi = crate::groundstate::generic_state(&lat, &FluxCoefficients::uniform()).unwrap();
        let big = reduce_state(&psi, &Region::new("K", [0, 1, 2, 3, 4, 7])).unwrap();
        let nested = reduce_density(&reduce_density(&big, &Region::new("K", [0, 2, 3, 7])).unwrap(), &Region::new("K", [2, 7])).unwrap();
        let direct = reduce_state(&psi, &Region::new("K", [2, 7])).unwrap();
        assert!(nested.max_deviation(&direct) < 1e-12);
        let one = reduce_state(&psi, &Region::new("K", [4])).unwrap();
        assert_abs_diff_eq!(one.get(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(one.get(0, 1).norm(), 0.0, epsilon = 1e-12);
        let swapped = align(&big, &[7, 4, 3, 2, 1, 0]).unwrap();
        let back = align(&swapped, big.kept()).unwrap();
        assert!(back.max_deviation(&big) < 1e-15);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let lat = Lattice::build_torus(3, 2).unwrap();
        let c = FluxCoefficients::normalized([C64::new(0.3, 0.1), C64::new(0.5, 0.0), C64::new(0.0, -0.2), C64::new(0.4, 0.4)]).unwrap();
        let psi = crate::groundstate::generic_state(&lat, &c).unwrap();
        let a = Region::new("A", [0, 1, 5]);
        let b = Region::new("B", [2, 3, 8, 9]);
        let rho = reduce_state(&psi, &a.union(&b, "AB")).unwrap();
        let dense = log_negativity(&rho, &a).unwrap();
        let (sparse, method) = log_negativity_from_state(&psi, &a, &b, OracleCaps::default()).unwrap();
        assert_eq!(method, OracleMethod::PartialTranspose);
        assert_abs_diff_eq!(dense, sparse, epsilon = 1e-12);
    }
}
