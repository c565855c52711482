//! Dense brute-force cross-checks built from explicit 2^n × 2^n matrices.
//! Nothing here reuses the crate's bit-level kernels or its eigensolver; trace
//! norms come from an SVD (for Hermitian matrices the singular values are |λ|).

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use toric_negativity::entanglement::{log_negativity, negativity, reduce_state};
use toric_negativity::groundstate::{generic_state, psi0, FluxCoefficients};
use toric_negativity::lattice::{Face, Lattice, Region, Vertex};
use toric_negativity::pauli::{commutes, loop_operator, stabilizers, Direction, LoopKind, PauliString};

type M = DMatrix<C>;

fn pauli(which: char) -> M {
    let (o, i, z) = (C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 0.0));
    match which {
        'I' => M::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => M::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => M::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => M::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!(),
    }
}

/// Qubit k is bit k of the basis index, so it is the rightmost Kronecker factor for k = 0.
fn string(n: usize, letters: impl Fn(usize) -> char) -> M {
    (0..n).rev().fold(M::identity(1, 1), |acc, k| acc.kronecker(&pauli(letters(k))))
}

fn dense(p: &PauliString) -> M {
    let x = p.x_bits();
    let z = p.z_bits();
    // X^x Z^z on one qubit: X·Z = −iY.
    let m = string(p.n(), |k| match (x[k], z[k]) {
        (false, false) => 'I',
        (true, false) => 'X',
        (false, true) => 'Z',
        (true, true) => 'Y',
    });
    let ys = (0..p.n()).filter(|&k| x[k] && z[k]).count();
    let phase = C::new(0.0, -1.0).powu(ys as u32);
    m * phase * C::new(p.sign().value(), 0.0)
}

fn x_on(n: usize, support: &[usize]) -> M {
    string(n, |k| if support.contains(&k) { 'X' } else { 'I' })
}

fn z_on(n: usize, support: &[usize]) -> M {
    string(n, |k| if support.contains(&k) { 'Z' } else { 'I' })
}

/// Projects a fixed generic vector onto the +1 space of every operator given.
fn project(n: usize, ops: &[M]) -> Vec<C> {
    let dim = 1 << n;
    let mut v = nalgebra::DVector::from_iterator(dim, (0..dim).map(|k| C::new(1.0 + 0.01 * k as f64, 0.3 - 0.002 * k as f64)));
    for op in ops {
        v = (&v + op * &v) * C::new(0.5, 0.0);
    }
    let norm = v.norm();
    v.iter().map(|a| a / norm).collect()
}

fn torus_ops(lat: &Lattice) -> Vec<M> {
    let n = lat.n();
    let stars = lat.vertices().map(|s| x_on(n, lat.star_support(s)));
    let faces = lat.face_ids().map(|p| z_on(n, lat.plaquette_support(p)));
    stars.chain(faces).collect()
}

fn naive_reduce(psi: &[C], n: usize, keep: &[usize]) -> M {
    let k = keep.len();
    let env: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let mut rho = M::zeros(1 << k, 1 << k);
    for e in 0..1usize << env.len() {
        let base: usize = env.iter().enumerate().filter(|(b, _)| e >> b & 1 == 1).map(|(_, q)| 1 << q).sum();
        let amp = |i: usize| {
            let idx = base + keep.iter().enumerate().filter(|(b, _)| i >> b & 1 == 1).map(|(_, q)| 1 << q).sum::<usize>();
            psi[idx]
        };
        for i in 0..1 << k {
            for j in 0..1 << k {
                rho[(i, j)] += amp(i) * amp(j).conj();
            }
        }
    }
    rho
}

/// Transposes the qubits at local positions `sub` of a k-qubit matrix.
fn naive_pt(rho: &M, sub_mask: usize) -> M {
    let d = rho.nrows();
    M::from_fn(d, d, |i, j| {
        let (r, c) = ((i & !sub_mask) | (j & sub_mask), (j & !sub_mask) | (i & sub_mask));
        rho[(r, c)]
    })
}

fn naive_log_negativity(psi: &[C], n: usize, a: &[usize], b: &[usize]) -> f64 {
    let keep: Vec<usize> = a.iter().chain(b).copied().collect();
    let rho = naive_reduce(psi, n, &keep);
    let mask = (0..a.len()).fold(0, |m, i| m | 1 << i);
    let pt = naive_pt(&rho, mask);
    let trace_norm: f64 = pt.singular_values().sum();
    trace_norm.log2()
}

fn fidelity(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C>().norm()
}

#[test]
fn pauli_commutation_matches_dense_commutator() {
    let lat = Lattice::build_torus(2, 2).unwrap();
    let mut ops = stabilizers(&lat);
    for kind in [LoopKind::ZDirect, LoopKind::XDual] {
        for dir in [Direction::Vertical, Direction::Horizontal] {
            ops.push(loop_operator(&lat, kind, dir, 1).unwrap());
        }
    }
    ops.push(PauliString::x_on(8, [0, 3]));
    ops.push(PauliString::z_on(8, [3, 5, 6]));
    for p in &ops {
        for q in &ops {
            let (dp, dq) = (dense(p), dense(q));
            let comm = &dp * &dq - &dq * &dp;
            assert_eq!(commutes(p, q).unwrap(), comm.norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_random_paulis_commute_as_dense(xs in prop::collection::vec(0u8..4, 6), zs in prop::collection::vec(0u8..4, 6)) {
        let build = |v: &[u8]| {
            let x: Vec<usize> = (0..6).filter(|&k| v[k] & 1 == 1).collect();
            let z: Vec<usize> = (0..6).filter(|&k| v[k] & 2 == 2).collect();
            toric_negativity::pauli::pauli_mul(&PauliString::x_on(6, x), &PauliString::z_on(6, z)).unwrap()
        };
        let (p, q) = (build(&xs), build(&zs));
        let (dp, dq) = (dense(&p), dense(&q));
        prop_assert_eq!(commutes(&p, &q).unwrap(), (&dp * &dq - &dq * &dp).norm() < 1e-12);
    }
}

#[test]
fn psi0_matches_dense_projection_on_torus_2x2() {
    let lat = Lattice::build_torus(2, 2).unwrap();
    let n = lat.n();
    let mut ops = torus_ops(&lat);
    for dir in [Direction::Vertical, Direction::Horizontal] {
        ops.push(dense(&loop_operator(&lat, LoopKind::ZDirect, dir, 0).unwrap()));
    }
    let naive = project(n, &ops);
    let psi = psi0(&lat).unwrap();
    assert!((fidelity(&naive, psi.amplitudes()) - 1.0).abs() < 1e-10);
}

#[test]
fn generic_states_match_dense_flux_construction() {
    let lat = Lattice::build_torus(2, 2).unwrap();
    let n = lat.n();
    let w = |kind, dir| dense(&loop_operator(&lat, kind, dir, 0).unwrap());
    let mut ops = torus_ops(&lat);
    ops.push(w(LoopKind::ZDirect, Direction::Vertical));
    ops.push(w(LoopKind::XDual, Direction::Vertical));
    let psi_i = nalgebra::DVector::from_vec(project(n, &ops));
    let wx2 = w(LoopKind::XDual, Direction::Horizontal);
    let wz2 = w(LoopKind::ZDirect, Direction::Horizontal);
    let basis = [psi_i.clone(), &wx2 * &psi_i, &wz2 * &psi_i, &wx2 * (&wz2 * &psi_i)];
    let c = FluxCoefficients::normalized([C::new(0.3, 0.1), C::new(-0.2, 0.5), C::new(0.7, 0.0), C::new(0.1, -0.4)]).unwrap();
    let mut naive = nalgebra::DVector::<C>::zeros(1 << n);
    for (ci, v) in c.as_array().iter().zip(&basis) {
        naive += v * *ci;
    }
    let psi = generic_state(&lat, &c).unwrap();
    // Equal up to one global phase.
    let overlap: C = naive.iter().zip(psi.amplitudes()).map(|(x, y)| x.conj() * y).sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-10);
    let phase = overlap / overlap.norm();
    let dev = naive.iter().zip(psi.amplitudes()).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max);
    assert!(dev < 1e-10, "{dev}");
}

fn planar_ground_state(lat: &Lattice) -> Vec<C> {
    project(lat.n(), &torus_ops(lat))
}

/// Tripartitions on small lattices: every edge assigned to A, B or C by a base-3 code.
fn partitions(n: usize, count: usize, salt: u64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut state = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    while out.len() < count {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut code = state >> 11;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for e in 0..n {
            match code % 3 {
                0 => a.push(e),
                1 => b.push(e),
                _ => {}
            }
            code /= 3;
        }
        if !a.is_empty() && !b.is_empty() {
            out.push((a, b));
        }
    }
    out
}

#[test]
fn log_negativity_matches_dense_oracle_on_random_partitions() {
    let torus = Lattice::build_torus(2, 2).unwrap();
    let planar = Lattice::build_planar(3, 2).unwrap();
    let c = FluxCoefficients::normalized([C::new(0.5, 0.0), C::new(0.1, 0.3), C::new(-0.4, 0.2), C::new(0.0, 0.6)]).unwrap();
    let cases = [(torus.clone(), generic_state(&torus, &c).unwrap()), (planar.clone(), psi0(&planar).unwrap())];
    for (salt, (lat, psi)) in cases.iter().enumerate() {
        let naive_state = if lat.kappa() == 0 { Some(planar_ground_state(lat)) } else { None };
        if let Some(s) = &naive_state {
            assert!((fidelity(s, psi.amplitudes()) - 1.0).abs() < 1e-10);
        }
        for (a, b) in partitions(lat.n(), 30, salt as u64) {
            let ra = Region::new("A", a.iter().copied());
            let ab = Region::new("AB", a.iter().chain(&b).copied());
            let rho = reduce_state(psi, &ab).unwrap();
            let got = log_negativity(&rho, &ra).unwrap();
            let want = naive_log_negativity(psi.amplitudes(), lat.n(), &a, &b);
            assert!((got - want).abs() < 1e-9, "A={a:?} B={b:?}: {got} vs {want}");
            let neg = negativity(&rho, &ra).unwrap();
            assert!((got - (1.0 + 2.0 * neg).log2()).abs() < 1e-9);
        }
    }
}

/// E_N of ψ₀ for a few fixed cuts, frozen from the dense oracle above.
#[test]
fn frozen_small_values() {
    let lat = Lattice::build_torus(2, 2).unwrap();
    let psi = psi0(&lat).unwrap();
    let star0: Vec<usize> = lat.star_support(Vertex(0)).to_vec();
    let face0: Vec<usize> = lat.plaquette_support(Face(0)).to_vec();
    let complement = |r: &[usize]| -> Vec<usize> { (0..8).filter(|e| !r.contains(e)).collect() };
    let planar = Lattice::build_planar(3, 2).unwrap();
    let pp = psi0(&planar).unwrap();
    let cases: [(&_, Vec<usize>, Vec<usize>, f64); 6] = [
        (&psi, star0.clone(), complement(&star0), 1.0),
        (&psi, vec![0], complement(&[0]), 1.0),
        (&psi, face0.clone(), complement(&face0), 3.0),
        (&psi, star0[..2].to_vec(), complement(&star0)[..2].to_vec(), 0.0),
        (&pp, vec![0, 1, 2], vec![3, 4, 5, 6], 2.0),
        (&pp, vec![3], vec![0, 1, 2, 4, 5, 6], 1.0),
    ];
    for (state, a, b, want) in cases {
        let ab = Region::new("AB", a.iter().chain(&b).copied());
        let rho = reduce_state(state, &ab).unwrap();
        let got = log_negativity(&rho, &Region::new("A", a.iter().copied())).unwrap();
        assert!((got - want).abs() < 1e-10, "A={a:?}: {got} vs {want}");
    }
    let rank = naive_reduce(psi.amplitudes(), 8, &face0).singular_values().iter().filter(|x| x.abs() > 1e-12).count();
    assert_eq!(rank, 8);
}
