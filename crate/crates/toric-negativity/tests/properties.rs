use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toric_negativity::closedform::{classify, predict_log_negativity, predict_long_range_term, SettingClass};
use toric_negativity::entanglement::{
    align, log_negativity, pt_spectrum, reduce_density, reduce_state, DensityMatrix,
};
use toric_negativity::groundstate::{flux_state, generic_state, Convention, Flux, FluxCoefficients, StateVector};
use toric_negativity::harness::{generate_setting, rerun_row, run_sweep, write_csv, SweepConfig};
use toric_negativity::lattice::{is_contractible, Lattice, Region};

fn region(label: &str, edges: &[usize]) -> Region {
    Region::new(label, edges.iter().copied())
}

fn random_coefficients(seed: u64) -> FluxCoefficients {
    FluxCoefficients::random(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_state(n: usize, seed: u64) -> StateVector {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..1 << n)
        .map(|_| C::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let mut psi = StateVector::from_amplitudes(n, amps).unwrap();
    psi.normalize().unwrap();
    psi
}

/// Disjoint A, B drawn from the edges of torus(3,2) with |A|,|B| ≥ 1 and |A ∪ B| ≤ 8.
fn split() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    proptest::sample::subsequence((0..12).collect::<Vec<usize>>(), 2..=8)
        .prop_flat_map(|edges| {
            let k = edges.len();
            (Just(edges), proptest::collection::vec(any::<bool>(), k))
        })
        .prop_filter_map("both sides non-empty", |(edges, side)| {
            let a: Vec<usize> = edges.iter().zip(&side).filter(|(_, s)| **s).map(|(e, _)| *e).collect();
            let b: Vec<usize> = edges.iter().zip(&side).filter(|(_, s)| !**s).map(|(e, _)| *e).collect();
            (!a.is_empty() && !b.is_empty()).then_some((a, b))
        })
}

fn toric_rho(a: &[usize], b: &[usize], seed: u64) -> DensityMatrix {
    let lat = Lattice::build_torus(3, 2).unwrap();
    let psi = generic_state(&lat, &random_coefficients(seed)).unwrap();
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    reduce_state(&psi, &region("AB", &ab)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_transpose_side_symmetry((a, b) in split(), seed in any::<u64>()) {
        let rho = toric_rho(&a, &b, seed);
        let ea = log_negativity(&rho, &region("A", &a)).unwrap();
        let eb = log_negativity(&rho, &region("B", &b)).unwrap();
        prop_assert!((ea - eb).abs() < 1e-10);
    }

    #[test]
    fn prop_basis_independence((a, b) in split(), seed in any::<u64>(), shuffle in any::<u64>()) {
        let rho = toric_rho(&a, &b, seed);
        let e0 = log_negativity(&rho, &region("A", &a)).unwrap();
        let mut order = rho.kept().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let permuted = align(&rho, &order).unwrap();
        let e1 = log_negativity(&permuted, &region("A", &a)).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-10);
    }

    #[test]
    fn prop_monotone_under_discarding((a, b) in split(), seed in any::<u64>(), drop_a in any::<u64>(), drop_b in any::<u64>()) {
        let rho = toric_rho(&a, &b, seed);
        let full = log_negativity(&rho, &region("A", &a)).unwrap();
        let keep = |side: &[usize], bits: u64| -> Vec<usize> {
            let kept: Vec<usize> = side.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 0).map(|(_, e)| *e).collect();
            if kept.is_empty() { side[..1].to_vec() } else { kept }
        };
        let (a1, b1) = (keep(&a, drop_a), keep(&b, drop_b));
        let ab1: Vec<usize> = a1.iter().chain(&b1).copied().collect();
        let sub = reduce_density(&rho, &region("AB1", &ab1)).unwrap();
        let part = log_negativity(&sub, &region("A1", &a1)).unwrap();
        prop_assert!(part <= full + 1e-10, "{part} > {full}");
    }

    #[test]
    fn prop_additivity(na in 1usize..=2, nb in 1usize..=2, s1 in any::<u64>(), s2 in any::<u64>()) {
        // Two random two-sided states on disjoint qubits; each cut splits its own state in half.
        let left = DensityMatrix::pure(&random_state(2 * na, s1)).unwrap();
        let right_pure = DensityMatrix::pure(&random_state(2 * nb, s2)).unwrap();
        let offset = 2 * na;
        let right = DensityMatrix::from_matrix(
            (offset..offset + 2 * nb).collect(),
            right_pure.data().to_vec(),
        ).unwrap();
        let a_left: Vec<usize> = (0..na).collect();
        let a_right: Vec<usize> = (offset..offset + nb).collect();
        let e_left = log_negativity(&left, &region("A", &a_left)).unwrap();
        let e_right = log_negativity(&right, &region("A", &a_right)).unwrap();
        let joint = left.tensor(&right).unwrap();
        let a_joint: Vec<usize> = a_left.iter().chain(&a_right).copied().collect();
        let e_joint = log_negativity(&joint, &region("A", &a_joint)).unwrap();
        prop_assert!((e_joint - e_left - e_right).abs() < 1e-9);
    }

    #[test]
    fn prop_prediction_ignores_phases(seed in any::<u64>(), phases in proptest::array::uniform4(0.0..std::f64::consts::TAU)) {
        let lat = Lattice::build_torus(4, 2).unwrap();
        let (a, b, c) = generate_setting(&lat, "a").unwrap();
        let cl = classify(&lat, &a, &b, &c, Convention::default()).unwrap();
        let coeffs = random_coefficients(seed);
        let mut rotated = coeffs.as_array();
        for (z, p) in rotated.iter_mut().zip(phases) {
            *z *= C::from_polar(1.0, p);
        }
        let rotated = FluxCoefficients::new(rotated).unwrap();
        let p0 = predict_log_negativity(&cl, Some(&coeffs)).unwrap();
        let p1 = predict_log_negativity(&cl, Some(&rotated)).unwrap();
        prop_assert!((p0 - p1).abs() < 1e-12);
        // Boundary terms plus the long-range term.
        let decomposed = cl.boundary_term() + predict_long_range_term(&coeffs);
        prop_assert!((p0 - decomposed).abs() < 1e-12);
    }
}

fn contractible_blocks() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0usize..4, 0usize..3, 1usize..=2, 1usize..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Star unions of vertex blocks on torus(4,3) are contractible patches; the
    /// oracle must match Σ(n − 1) for any flux superposition.
    #[test]
    fn prop_oracle_matches_prediction_for_patches((x0, y0, w, h) in contractible_blocks(), seed in any::<u64>()) {
        let lat = Lattice::build_torus(4, 3).unwrap();
        let verts: Vec<(isize, isize)> = (0..w)
            .flat_map(|dx| (0..h).map(move |dy| ((x0 + dx) as isize, (y0 + dy) as isize)))
            .collect();
        let a = Region::new("A", lat.star_union(&verts));
        prop_assume!(is_contractible(&lat, &a).fully_contractible());
        let b = a.complement(&lat, "B");
        let c = Region::new("C", []);
        let cl = classify(&lat, &a, &b, &c, Convention::default()).unwrap();
        prop_assert_eq!(cl.class, SettingClass::PureContractible);
        let coeffs = random_coefficients(seed);
        let psi = generic_state(&lat, &coeffs).unwrap();
        let (oracle, _) = toric_negativity::entanglement::log_negativity_from_state(&psi, &a, &b, Default::default()).unwrap();
        let predicted = predict_log_negativity(&cl, Some(&coeffs)).unwrap();
        prop_assert!((oracle - predicted).abs() <= 1e-8, "{oracle} vs {predicted}");
    }
}

#[test]
fn peres_witness_on_partition_sequence() {
    let lat = Lattice::build_torus(4, 2).unwrap();
    let conv = Convention::default();
    for seed in 0..3 {
        let coeffs = random_coefficients(seed);
        let psi = generic_state(&lat, &coeffs).unwrap();
        let sectors: Vec<StateVector> = Flux::ALL.iter().map(|&f| flux_state(&lat, f).unwrap()).collect();
        for id in ["c", "e", "f", "g"] {
            let (a, b, _) = generate_setting(&lat, id).unwrap();
            let ab = a.union(&b, "AB");
            let rho = reduce_state(&psi, &ab).unwrap();
            let spectrum = pt_spectrum(&rho, &a).unwrap();
            let en = toric_negativity::entanglement::log_negativity_from(&spectrum);
            // Separable candidate Σ|c_i|² ρ_A^{(i)} ⊗ ρ_B^{(i)} from flux-sector reductions.
            let dim = rho.dim();
            let mut mix = vec![C::default(); dim * dim];
            for (f, s) in Flux::ALL.iter().zip(&sectors) {
                let r = reduce_state(s, &ab).unwrap();
                let t = align(&reduce_density(&r, &a).unwrap().tensor(&reduce_density(&r, &b).unwrap()).unwrap(), rho.kept()).unwrap();
                let w = coeffs.get(*f).norm_sqr();
                mix.iter_mut().zip(t.data()).for_each(|(m, v)| *m += v * w);
            }
            let deviation = rho.max_deviation(&DensityMatrix::from_matrix(rho.kept().to_vec(), mix).unwrap());
            let class = classify(&lat, &a, &b, &ab.complement(&lat, "C"), conv).unwrap().class;
            if en > 1e-9 {
                assert!(deviation > 1e-6, "setting {id}: entangled yet separable form fits");
            }
            if predict_log_negativity(&classify(&lat, &a, &b, &ab.complement(&lat, "C"), conv).unwrap(), Some(&coeffs)).unwrap() == 0.0 {
                assert!(spectrum[0] >= -1e-10, "setting {id} ({class:?}): min PT eigenvalue {}", spectrum[0]);
            }
        }
    }
}

#[test]
fn report_is_deterministic_and_rows_round_trip() {
    let cfg = SweepConfig::settings_sequence();
    let first = run_sweep(&cfg).unwrap();
    let second = run_sweep(&cfg).unwrap();
    let (mut c1, mut c2) = (Vec::new(), Vec::new());
    write_csv(&first, &mut c1).unwrap();
    write_csv(&second, &mut c2).unwrap();
    assert_eq!(c1, c2);
    let json = serde_json::to_string(&first).unwrap();
    let back: toric_negativity::harness::SweepReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, first);
    for row in &first.rows {
        let again = rerun_row(row).unwrap();
        assert_eq!(&again, row);
    }
}
