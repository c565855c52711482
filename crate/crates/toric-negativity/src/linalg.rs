//! Hermitian spectra through exact block decomposition.
//!
//! A Hermitian matrix whose nonzero pattern splits into connected components is
//! permutation-similar to a block-diagonal matrix, so its spectrum is the union
//! of the block spectra. Each block is diagonalized densely.

use num_complex::Complex64;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub type C64 = Complex64;

/// Entries at or below this magnitude (after summation) are dropped.
pub const ZERO_ENTRY: f64 = 1e-15;

/// Largest block diagonalized densely (2^13, the dense kept-qubit cap).
pub const DEFAULT_MAX_BLOCK: usize = 1 << 13;

/// Default ceiling on accumulated matrix entries (about 0.8 GB of triplets).
pub const DEFAULT_ENTRY_BUDGET: usize = 32 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("connected block of dimension {dim} exceeds the dense cap {cap}")]
    BlockTooLarge { dim: usize, cap: usize },
    #[error("{needed} matrix entries exceed the budget of {budget}")]
    EntryBudget { needed: usize, budget: usize },
    #[error("eigensolver did not converge on a block of dimension {0}")]
    NoConvergence(usize),
}

/// Hermitian matrix stored as sorted, summed `(row, col, value)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(u32, u32, C64)>,
}

/// Eigenvalues listed explicitly plus a count of eigenvalues that are exactly
/// zero because their rows are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub implicit_zeros: usize,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len() + self.implicit_zeros
    }

    /// Σ|λ|.
    pub fn trace_norm(&self) -> f64 {
        self.values.iter().map(|l| l.abs()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Σ over negative eigenvalues of |λ|.
    pub fn negative_mass(&self) -> f64 {
        self.values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum()
    }

    pub fn min(&self) -> f64 {
        let m = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        if self.implicit_zeros > 0 {
            m.min(0.0)
        } else {
            m
        }
    }

    /// All eigenvalues in ascending order, zeros included. Allocates `dim` values.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.extend(std::iter::repeat(0.0).take(self.implicit_zeros));
        v.sort_by(f64::total_cmp);
        v
    }
}

impl SparseHermitian {
    /// Sorts, sums duplicates and drops negligible entries.
    pub fn from_triplets(dim: usize, mut entries: Vec<(u32, u32, C64)>) -> Self {
        sort_triplets(&mut entries);
        let mut out: Vec<(u32, u32, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|e| e.2.norm() > ZERO_ENTRY);
        SparseHermitian { dim, entries: out }
    }

    /// From a row-major dense matrix.
    pub fn from_dense(dim: usize, data: &[C64]) -> Self {
        let entries = data
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > ZERO_ENTRY)
            .map(|(i, &v)| ((i / dim) as u32, (i % dim) as u32, v))
            .collect();
        SparseHermitian { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, u32, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Connected components of the nonzero pattern, each as sorted indices.
    pub fn blocks(&self) -> Vec<Vec<u32>> {
        let mut ids: Vec<u32> = self.entries.iter().flat_map(|e| [e.0, e.1]).collect();
        ids.sort_unstable();
        ids.dedup();
        let pos = |i: u32| ids.binary_search(&i).expect("index collected above");
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(r, c, _) in &self.entries {
            let (a, b) = (find(&mut parent, pos(r)), find(&mut parent, pos(c)));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: Vec<Vec<u32>> = Vec::new();
        let mut slot = vec![usize::MAX; ids.len()];
        for i in 0..ids.len() {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(ids[i]);
        }
        groups
    }

    /// Full spectrum, diagonalizing each connected block densely.
    pub fn eigenvalues(&self, max_block: usize) -> Result<Spectrum, LinalgError> {
        let blocks = self.blocks();
        if let Some(b) = blocks.iter().find(|b| b.len() > max_block) {
            return Err(LinalgError::BlockTooLarge { dim: b.len(), cap: max_block });
        }
        let covered: usize = blocks.iter().map(Vec::len).sum();
        let mut block_of = std::collections::HashMap::with_capacity(covered);
        for (bi, b) in blocks.iter().enumerate() {
            for (local, &i) in b.iter().enumerate() {
                block_of.insert(i, (bi, local));
            }
        }
        let mut block_entries: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); blocks.len()];
        for &(r, c, v) in &self.entries {
            let (bi, lr) = block_of[&r];
            let (_, lc) = block_of[&c];
            block_entries[bi].push((lr, lc, v));
        }
        let solve = |(b, e): (&Vec<u32>, &Vec<(usize, usize, C64)>)| block_eigenvalues(b.len(), e);
        #[cfg(feature = "parallel")]
        let per_block: Vec<Result<Vec<f64>, LinalgError>> =
            blocks.par_iter().zip(block_entries.par_iter()).map(solve).collect();
        #[cfg(not(feature = "parallel"))]
        let per_block: Vec<Result<Vec<f64>, LinalgError>> =
            blocks.iter().zip(block_entries.iter()).map(solve).collect();
        let mut values = Vec::with_capacity(covered);
        for r in per_block {
            values.extend(r?);
        }
        Ok(Spectrum { values, implicit_zeros: self.dim - covered })
    }
}

fn sort_triplets(entries: &mut [(u32, u32, C64)]) {
    // stable, so duplicates are summed in generation order
    #[cfg(feature = "parallel")]
    entries.par_sort_by_key(|e| (e.0, e.1));
    #[cfg(not(feature = "parallel"))]
    entries.sort_by_key(|e| (e.0, e.1));
}

fn block_eigenvalues(dim: usize, entries: &[(usize, usize, C64)]) -> Result<Vec<f64>, LinalgError> {
    if dim == 1 {
        return Ok(vec![entries.iter().map(|e| e.2.re).sum()]);
    }
    let mut m = faer::Mat::<C64>::zeros(dim, dim);
    for &(r, c, v) in entries {
        m[(r, c)] += v;
    }
    m.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|_| LinalgError::NoConvergence(dim))
}

/// Dense Hermitian spectrum via the same block decomposition.
pub fn dense_eigenvalues(dim: usize, data: &[C64], max_block: usize) -> Result<Vec<f64>, LinalgError> {
    Ok(SparseHermitian::from_dense(dim, data).eigenvalues(max_block)?.sorted())
}

/// Gathers selected bits of a basis index into a compact local index:
/// bit `j` of the output is bit `positions[j]` of the input.
#[derive(Debug, Clone)]
pub struct BitGather {
    tables: Vec<[u32; 256]>,
    mask: u64,
}

impl BitGather {
    pub fn new(positions: &[usize]) -> Self {
        let top = positions.iter().max().map_or(0, |&p| p / 8 + 1);
        let mut tables = vec![[0u32; 256]; top];
        for (j, &p) in positions.iter().enumerate() {
            let (byte, bit) = (p / 8, p % 8);
            for (value, slot) in tables[byte].iter_mut().enumerate() {
                if value >> bit & 1 == 1 {
                    *slot |= 1 << j;
                }
            }
        }
        let mask = positions.iter().fold(0u64, |m, &p| m | 1 << p);
        BitGather { tables, mask }
    }

    #[inline]
    pub fn gather(&self, k: u64) -> u32 {
        self.tables
            .iter()
            .enumerate()
            .fold(0, |acc, (b, t)| acc | t[(k >> (8 * b)) as usize & 0xff])
    }

    /// Basis-index mask of the gathered positions.
    pub fn mask(&self) -> u64 {
        self.mask
    }
}

/// Nonzero amplitudes as `(environment bits, local kept index, amplitude)`,
/// sorted so that equal environments are contiguous.
pub fn grouped_amplitudes(amps: &[C64], keep: &[usize]) -> Vec<(u64, u32, C64)> {
    let g = BitGather::new(keep);
    let mut v: Vec<(u64, u32, C64)> = amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(k, &a)| ((k as u64) & !g.mask(), g.gather(k as u64), a))
        .collect();
    v.sort_unstable_by_key(|e| (e.0, e.1));
    v
}

/// Runs of equal environment in grouped amplitudes.
pub fn environment_groups(grouped: &[(u64, u32, C64)]) -> impl Iterator<Item = &[(u64, u32, C64)]> {
    grouped.chunk_by(|a, b| a.0 == b.0)
}

/// Number of `(row, col)` contributions a reduction will generate.
pub fn reduction_cost(grouped: &[(u64, u32, C64)]) -> usize {
    environment_groups(grouped).map(|g| g.len() * g.len()).sum()
}

/// Entries of the reduced density matrix on `keep`, optionally partially
/// transposed on the local bits in `transpose_mask`.
pub fn reduced_sparse(
    amps: &[C64],
    keep: &[usize],
    transpose_mask: u32,
    budget: usize,
) -> Result<SparseHermitian, LinalgError> {
    let grouped = grouped_amplitudes(amps, keep);
    let needed = reduction_cost(&grouped);
    if needed > budget {
        return Err(LinalgError::EntryBudget { needed, budget });
    }
    let t = transpose_mask;
    let mut entries = Vec::with_capacity(needed);
    for group in environment_groups(&grouped) {
        for &(_, i, a) in group {
            for &(_, j, b) in group {
                let (r, c) = ((i & !t) | (j & t), (j & !t) | (i & t));
                entries.push((r, c, a * b.conj()));
            }
        }
    }
    Ok(SparseHermitian::from_triplets(1usize << keep.len(), entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn block_spectrum_matches_known_values() {
        // diag block {0,2} = [[2,1],[1,2]] -> {1,3}; singleton 1 -> 5; index 3 empty
        let e = vec![
            (0, 0, C64::new(2.0, 0.0)),
            (0, 2, C64::new(1.0, 0.0)),
            (2, 0, C64::new(1.0, 0.0)),
            (2, 2, C64::new(2.0, 0.0)),
            (1, 1, C64::new(5.0, 0.0)),
        ];
        let m = SparseHermitian::from_triplets(4, e);
        assert_eq!(m.blocks(), vec![vec![0, 2], vec![1]]);
        let s = m.eigenvalues(8).unwrap();
        assert_eq!(s.implicit_zeros, 1);
        let v = s.sorted();
        for (a, b) in v.iter().zip([0.0, 1.0, 3.0, 5.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(matches!(m.eigenvalues(1), Err(LinalgError::BlockTooLarge { dim: 2, cap: 1 })));
    }

    #[test]
    fn duplicates_are_summed_and_cancellations_dropped() {
        let e = vec![
            (0, 1, C64::new(0.5, 0.0)),
            (0, 1, C64::new(-0.5, 0.0)),
            (1, 0, C64::new(0.25, 0.0)),
            (1, 0, C64::new(-0.25, 0.0)),
            (0, 0, C64::new(1.0, 0.0)),
        ];
        let m = SparseHermitian::from_triplets(2, e);
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn gather_compacts_bits() {
        let g = BitGather::new(&[3, 0, 17]);
        assert_eq!(g.gather(0b1000), 0b001);
        assert_eq!(g.gather(1), 0b010);
        assert_eq!(g.gather(1 << 17 | 1 << 5), 0b100);
        assert_eq!(g.mask(), 1 << 3 | 1 | 1 << 17);
    }

    #[test]
    fn bell_pair_partial_transpose() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![C64::new(s, 0.0), C64::default(), C64::default(), C64::new(s, 0.0)];
        let pt = reduced_sparse(&amps, &[0, 1], 0b01, 1 << 10).unwrap();
        let v = pt.eigenvalues(4).unwrap().sorted();
        for (a, b) in v.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let amps = vec![C64::new(0.5, 0.0); 4];
        assert_eq!(
            reduced_sparse(&amps, &[0, 1], 0, 15),
            Err(LinalgError::EntryBudget { needed: 16, budget: 15 })
        );
    }
}
