//! Amplitude-array kernels with a rayon path and a sequential fallback.
//!
//! Both paths do the same per-element arithmetic in the same order, so their
//! outputs are bitwise identical.

use crate::linalg::C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for amplitude kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Exec::Parallel;
        #[cfg(not(feature = "parallel"))]
        Exec::Sequential
    }
}

/// Minimum elements per rayon task.
#[cfg(feature = "parallel")]
const MIN_LEN: usize = 1 << 12;

#[inline]
fn parity_sign(mask: u64, k: u64) -> f64 {
    if (mask & k).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// ψ ← (ψ + Pψ)/2 for `P = sign · X^x · Z^z`.
pub fn apply_projector(amps: &mut [C64], x: u64, z: u64, sign: f64, exec: Exec) {
    if x == 0 {
        let keep = |k: usize, a: &mut C64| {
            if sign * parity_sign(z, k as u64) < 0.0 {
                *a = C64::default();
            }
        };
        match exec {
            Exec::Sequential => amps.iter_mut().enumerate().for_each(|(k, a)| keep(k, a)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => amps
                .par_iter_mut()
                .with_min_len(MIN_LEN)
                .enumerate()
                .for_each(|(k, a)| keep(k, a)),
        }
        return;
    }
    paired(amps, x, exec, |k, j, a, b| {
        let (pa, pb) = (*a, *b);
        *a = (pa + pb * sign * parity_sign(z, j)) * 0.5;
        *b = (pb + pa * sign * parity_sign(z, k)) * 0.5;
    });
}

/// ψ ← Pψ for `P = sign · X^x · Z^z`.
pub fn apply_pauli(amps: &mut [C64], x: u64, z: u64, sign: f64, exec: Exec) {
    if x == 0 {
        let f = |k: usize, a: &mut C64| *a *= sign * parity_sign(z, k as u64);
        match exec {
            Exec::Sequential => amps.iter_mut().enumerate().for_each(|(k, a)| f(k, a)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => amps
                .par_iter_mut()
                .with_min_len(MIN_LEN)
                .enumerate()
                .for_each(|(k, a)| f(k, a)),
        }
        return;
    }
    // (Pψ)[k] = sign·(−1)^{|z∧(k⊕x)|}·ψ[k⊕x]
    paired(amps, x, exec, |k, j, a, b| {
        let (pa, pb) = (*a, *b);
        *a = pb * sign * parity_sign(z, j);
        *b = pa * sign * parity_sign(z, k);
    });
}

/// Visits every pair `(k, k⊕x)` with `k` below its partner, passing global
/// indices and mutable references to both amplitudes.
fn paired<F>(amps: &mut [C64], x: u64, exec: Exec, f: F)
where
    F: Fn(u64, u64, &mut C64, &mut C64) + Sync,
{
    let h = 63 - x.leading_zeros();
    let half = 1usize << h;
    let rest = x ^ (1u64 << h);
    // partners of an aligned sub-block of the low half sit in the same
    // sub-block of the high half
    let sub = if rest == 0 { 1 } else { 1usize << (64 - rest.leading_zeros()) };
    let chunk = |ci: usize, c: &mut [C64]| {
        let base = (ci * 2 * half) as u64;
        let (lo, hi) = c.split_at_mut(half);
        for (si, (l, u)) in lo.chunks_mut(sub).zip(hi.chunks_mut(sub)).enumerate() {
            pair_sub(l, u, base + (si * sub) as u64, half as u64, rest, &f);
        }
    };
    match exec {
        Exec::Sequential => amps.chunks_mut(2 * half).enumerate().for_each(|(ci, c)| chunk(ci, c)),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            if amps.len() / (2 * half) >= 64 {
                amps.par_chunks_mut(2 * half).with_min_len(MIN_LEN / (2 * half) + 1)
                    .enumerate()
                    .for_each(|(ci, c)| chunk(ci, c));
            } else {
                amps.chunks_mut(2 * half).enumerate().for_each(|(ci, c)| {
                    let base = (ci * 2 * half) as u64;
                    let (lo, hi) = c.split_at_mut(half);
                    lo.par_chunks_mut(sub)
                        .zip(hi.par_chunks_mut(sub))
                        .enumerate()
                        .with_min_len(MIN_LEN / sub + 1)
                        .for_each(|(si, (l, u))| {
                            pair_sub(l, u, base + (si * sub) as u64, half as u64, rest, &f)
                        });
                });
            }
        }
    }
}

#[inline]
fn pair_sub<F>(lo: &mut [C64], hi: &mut [C64], base: u64, half: u64, rest: u64, f: &F)
where
    F: Fn(u64, u64, &mut C64, &mut C64),
{
    for i in 0..lo.len() {
        let j = i ^ rest as usize;
        let k = base + i as u64;
        f(k, k ^ (half | rest), &mut lo[i], &mut hi[j]);
    }
}

/// `out[k] = Σ_t coeff_t · sign_t(k) · ψ[k ⊕ x_t]` for a list of Pauli terms
/// `(coeff, x, z)` acting as `X^x Z^z`; used to assemble flux superpositions in one pass.
pub fn combine(psi: &[C64], terms: &[(C64, u64, u64)], exec: Exec) -> Vec<C64> {
    let f = |k: usize| {
        terms.iter().fold(C64::default(), |acc, &(c, x, z)| {
            let src = k as u64 ^ x;
            let a = psi[src as usize];
            if a == C64::default() {
                acc
            } else {
                acc + c * a * parity_sign(z, src)
            }
        })
    };
    match exec {
        Exec::Sequential => (0..psi.len()).map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..psi.len()).into_par_iter().with_min_len(MIN_LEN).map(f).collect(),
    }
}

/// Keeps amplitudes whose index has even parity against every mask (each
/// mask optionally required odd), zeroing the rest; a fused product of
/// diagonal projectors.
pub fn diagonal_filter(amps: &mut [C64], masks: &[(u64, bool)], exec: Exec) {
    let f = |k: usize, a: &mut C64| {
        let ok = masks.iter().all(|&(m, odd)| ((m & k as u64).count_ones() % 2 == 1) == odd);
        if !ok {
            *a = C64::default();
        }
    };
    match exec {
        Exec::Sequential => amps.iter_mut().enumerate().for_each(|(k, a)| f(k, a)),
        #[cfg(feature = "parallel")]
        Exec::Parallel => amps
            .par_iter_mut()
            .with_min_len(MIN_LEN)
            .enumerate()
            .for_each(|(k, a)| f(k, a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_pauli(psi: &[C64], x: u64, z: u64, sign: f64) -> Vec<C64> {
        let mut out = vec![C64::default(); psi.len()];
        for (k, &a) in psi.iter().enumerate() {
            let k = k as u64;
            // X^x Z^z |k> = (-1)^{|z∧k|} |k⊕x>
            out[(k ^ x) as usize] += a * sign * parity_sign(z, k);
        }
        out
    }

    fn vec_from(seed: &[(f64, f64)]) -> Vec<C64> {
        seed.iter().map(|&(r, i)| C64::new(r, i)).collect()
    }

    proptest! {
        #[test]
        fn prop_pauli_matches_naive(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256), x in 0u64..256, z in 0u64..256, neg in any::<bool>()) {
            let psi = vec_from(&seed);
            let s = if neg { -1.0 } else { 1.0 };
            let want = naive_pauli(&psi, x, z, s);
            for exec in [Exec::Sequential, Exec::default()] {
                let mut got = psi.clone();
                apply_pauli(&mut got, x, z, s, exec);
                prop_assert_eq!(&got, &want);
                let mut proj = psi.clone();
                apply_projector(&mut proj, x, z, s, exec);
                let expect: Vec<C64> = psi.iter().zip(&want).map(|(a, b)| (a + b) * 0.5).collect();
                for (g, e) in proj.iter().zip(&expect) {
                    prop_assert!((g - e).norm() < 1e-15);
                }
            }
        }

        #[test]
        fn prop_paths_bitwise_equal(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << 14), x in 1u64..(1 << 14), z in 0u64..(1 << 14)) {
            let psi = vec_from(&seed);
            let mut a = psi.clone();
            let mut b = psi.clone();
            apply_projector(&mut a, x, z, 1.0, Exec::Sequential);
            apply_projector(&mut b, x, z, 1.0, Exec::default());
            prop_assert_eq!(a, b);
            let terms = [(C64::new(0.5, 0.1), x, 0), (C64::new(-0.2, 0.3), 0, z), (C64::new(0.1, 0.0), x, z)];
            prop_assert_eq!(combine(&psi, &terms, Exec::Sequential), combine(&psi, &terms, Exec::default()));
        }
    }

    #[test]
    fn combine_matches_sum_of_paulis() {
        let psi: Vec<C64> = (0..64).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
        let terms = [(C64::new(1.0, 0.0), 0b101, 0b011), (C64::new(0.0, 2.0), 0b100000, 0)];
        let got = combine(&psi, &terms, Exec::default());
        let mut want = vec![C64::default(); 64];
        for &(c, x, z) in &terms {
            for (w, p) in want.iter_mut().zip(naive_pauli(&psi, x, z, 1.0)) {
                *w += c * p;
            }
        }
        assert_eq!(got, want);
    }
}
