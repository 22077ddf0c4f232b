use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rodeo_core::engine::{shot_estimate, shot_product};
use rodeo_core::{
    ride, zeeman, HermitianOperator, RidePlan, SpectralDecomposition, StateVector, ZeemanParams,
    C64,
};

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
        "zero vector",
        |v| StateVector::normalized(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).ok(),
    )
}

fn hamiltonian(m: usize) -> impl Strategy<Value = SpectralDecomposition> {
    let dim = 1usize << m;
    prop::collection::vec(-1.5f64..1.5, dim * dim * 2).prop_map(move |v| {
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            h[(i, i)] = C64::new(v[2 * (i * dim + i)], 0.0);
            for j in i + 1..dim {
                let z = C64::new(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1]);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        SpectralDecomposition::of(&HermitianOperator::new(h, "random").unwrap()).unwrap()
    })
}

/// Final register amplitudes `Σ_x ⟨x|ψ⟩ ∏_k f_{b_k}(Δ_x t_k) |b⟩|x⟩` with
/// `f_0 = (1 − e^{iΔt})/2`, `f_1 = (1 + e^{iΔt})/2`, ancilla 0 most significant.
fn closed_form(dec: &SpectralDecomposition, psi: &StateVector, e: f64, times: &[f64]) -> Vec<C64> {
    let n = times.len();
    let dim = dec.dim();
    let v = dec.eigenvectors();
    let mut out = vec![C64::new(0.0, 0.0); (1 << n) * dim];
    for x in 0..dim {
        let c: C64 = (0..dim).map(|s| v[(s, x)].conj() * psi.amplitudes()[s]).sum();
        let delta = e - dec.eigenvalues()[x];
        for b in 0..1usize << n {
            let mut coef = c;
            for (k, &t) in times.iter().enumerate() {
                let rot = C64::from_polar(1.0, delta * t);
                let bit = (b >> (n - 1 - k)) & 1;
                coef *= if bit == 1 { (1.0 + rot) / 2.0 } else { (1.0 - rot) / 2.0 };
            }
            for s in 0..dim {
                out[b * dim + s] += coef * v[(s, x)];
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn final_state_matches_closed_form(
        (dec, psi) in (1usize..=2).prop_flat_map(|m| (hamiltonian(m), state(m))),
        times in prop::collection::vec(-20.0f64..20.0, 1..=4),
        e in -3.0f64..3.0,
    ) {
        let out = ride(&RidePlan::new(e, &times, &dec, &psi).unwrap()).unwrap();
        for (a, b) in out.final_state.amplitudes().iter().zip(closed_form(&dec, &psi, e, &times)) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        prop_assert!((out.final_state.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&out.success_probability()));
    }

    #[test]
    fn scores_are_invariant_under_time_permutation(
        dec in hamiltonian(2),
        psi in state(2),
        times in prop::collection::vec(-20.0f64..20.0, 2..=4),
        e in -3.0f64..3.0,
        shift in 1usize..4,
    ) {
        let mut rotated = times.clone();
        let len = rotated.len();
        rotated.rotate_left(shift % len);
        let a = ride(&RidePlan::new(e, &times, &dec, &psi).unwrap()).unwrap();
        let b = ride(&RidePlan::new(e, &rotated, &dec, &psi).unwrap()).unwrap();
        prop_assert!((a.score_mean() - b.score_mean()).abs() < 1e-10);
        prop_assert!((a.score_product() - b.score_product()).abs() < 1e-10);
        prop_assert!((a.success_probability() - b.success_probability()).abs() < 1e-10);
        let mut za = a.per_ancilla_z.clone();
        za.rotate_left(shift % len);
        for (x, y) in za.iter().zip(&b.per_ancilla_z) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn scores_ignore_basis_choice_inside_degenerate_level(
        psi in state(2),
        gamma in 0.0f64..std::f64::consts::TAU,
        phase in 0.0f64..std::f64::consts::TAU,
        times in prop::collection::vec(-20.0f64..20.0, 1..=3),
        e in -2.0f64..2.0,
    ) {
        let op = zeeman(ZeemanParams { spins: 2, field: 0.7 }).unwrap();
        let standard = SpectralDecomposition::of(&op).unwrap();
        // Rotate the |01⟩, |10⟩ pair by a unitary inside the E = 0 level.
        let (c, s) = (gamma.cos(), gamma.sin());
        let w = C64::from_polar(1.0, phase);
        let mut v = DMatrix::<C64>::identity(4, 4);
        v[(1, 1)] = C64::new(c, 0.0);
        v[(2, 1)] = w * s;
        v[(1, 2)] = -w.conj() * s;
        v[(2, 2)] = C64::new(c, 0.0);
        let rotated = SpectralDecomposition::from_parts(vec![-1.4, 0.0, 0.0, 1.4], v).unwrap();
        let a = ride(&RidePlan::new(e, &times, &standard, &psi).unwrap()).unwrap();
        let b = ride(&RidePlan::new(e, &times, &rotated, &psi).unwrap()).unwrap();
        prop_assert!((a.score_mean() - b.score_mean()).abs() < 1e-10);
        prop_assert!((a.score_product() - b.score_product()).abs() < 1e-10);
        prop_assert!((a.success_probability() - b.success_probability()).abs() < 1e-10);
    }
}

#[test]
fn shot_estimates_converge_to_exact_expectations() {
    let dec = SpectralDecomposition::of(&zeeman(ZeemanParams { spins: 2, field: 0.7 }).unwrap())
        .unwrap();
    let psi = StateVector::normalized(vec![
        C64::new(0.3, 0.1),
        C64::new(0.5, 0.0),
        C64::new(-0.2, 0.4),
        C64::new(0.6, -0.1),
    ])
    .unwrap();
    let times = [0.9, -1.7, 2.4];
    let out = ride(&RidePlan::new(0.35, &times, &dec, &psi).unwrap()).unwrap();
    let shots = 200_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let counts = shot_estimate(&out, shots, &mut rng).unwrap();
    for (c, exact) in counts.iter().zip(&out.per_ancilla_z) {
        assert_eq!(c.shots(), shots);
        let sigma = ((1.0 - exact * exact) / shots as f64).sqrt();
        assert!((c.expectation() - exact).abs() < 5.0 * sigma + 1e-12);
    }
    let parity = shot_product(&out, shots, &mut rng).unwrap();
    let sigma = ((1.0 - out.product_z.powi(2)) / shots as f64).sqrt();
    assert!((parity.expectation() - out.product_z).abs() < 5.0 * sigma + 1e-12);
}
