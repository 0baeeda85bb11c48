use microcavity_core::schmidt::{conjugate_time_grid, synthesize};
use microcavity_core::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_jsa(rows: usize, cols: usize, seed: u64) -> JsaMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..rows * cols)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    JsaMatrix::from_values(
        FrequencyGrid::new(2.0e15, 2.1e15, rows).unwrap(),
        FrequencyGrid::new(2.2e15, 2.25e15, cols).unwrap(),
        values,
    )
    .unwrap()
}

fn check_against_eigen(b: &JsaMatrix) {
    let sp = schmidt_decompose_with(b, 0.0).unwrap();
    assert!((sp.lambdas.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(sp.lambdas.windows(2).all(|w| w[0] >= w[1]));
    for side in [Polarization::Signal, Polarization::Idler] {
        let ev = reduced_density(b, side).unwrap().eigenvalues().unwrap();
        for (j, l) in sp.lambdas.iter().enumerate() {
            assert!((ev[j] - l).abs() < 1e-10, "{side:?} {j}: {} vs {l}", ev[j]);
        }
        for e in &ev[sp.len()..] {
            assert!(e.abs() < 1e-10);
        }
    }
    let norm = b.frobenius_norm();
    let rec = sp.reconstruct();
    let err: f64 = rec
        .iter()
        .zip(b.values())
        .map(|(r, v)| (r - v / norm).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-10, "reconstruction error {err}");
    let m = metrics(&sp);
    assert_eq!(m.purity * m.cooperativity, 1.0);
}

#[test]
fn svd_matches_density_eigenvalues_up_to_64() {
    for (k, (r, c)) in [(2, 2), (2, 5), (16, 16), (32, 32), (40, 23), (64, 64)]
        .into_iter()
        .enumerate()
    {
        check_against_eigen(&random_jsa(r, c, k as u64));
    }
}

#[test]
fn modes_are_orthonormal() {
    let b = random_jsa(20, 12, 99);
    let sp = schmidt_decompose_with(&b, 0.0).unwrap();
    let (ds, di) = (sp.grid_s.step(), sp.grid_i.step());
    for j in 0..sp.len() {
        for k in 0..sp.len() {
            let expected = if j == k { 1.0 } else { 0.0 };
            let ps: Complex64 = sp.psi[j]
                .iter()
                .zip(&sp.psi[k])
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                * ds;
            let pi: Complex64 = sp.phi[j]
                .iter()
                .zip(&sp.phi[k])
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                * di;
            assert!((ps - expected).norm() < 1e-10);
            assert!((pi - expected).norm() < 1e-10);
        }
    }
}

#[test]
fn threshold_drops_small_modes() {
    // Two modes with weights 1 − 1e-10 and 1e-10.
    let n = 6;
    let g = FrequencyGrid::new(1.0, 2.0, n).unwrap();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    v[0] = Complex64::new(1.0, 0.0);
    v[n + 1] = Complex64::new(1e-5, 0.0);
    let b = JsaMatrix::from_values(g, g, v).unwrap();
    let sp = schmidt_decompose(&b).unwrap();
    assert_eq!(sp.len(), 1);
    assert!((sp.discarded_weight - 1e-10).abs() < 1e-20);
    assert_eq!(schmidt_decompose_with(&b, 0.0).unwrap().len(), 2);
}

#[test]
fn exact_phase_rotations_are_bit_identical() {
    let b = random_jsa(24, 17, 5);
    let base = schmidt_decompose(&b).unwrap();
    for phase in [
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ] {
        let sp = schmidt_decompose(&b.scaled(phase)).unwrap();
        assert_eq!(sp.lambdas, base.lambdas);
        assert_eq!(metrics(&sp), metrics(&base));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_matrices_agree_with_eigen(rows in 2usize..=24, cols in 2usize..=24, seed in any::<u64>()) {
        check_against_eigen(&random_jsa(rows, cols, seed));
    }

    #[test]
    fn global_phase_leaves_spectrum(theta in 0.0f64..std::f64::consts::TAU, seed in any::<u64>()) {
        let b = random_jsa(12, 9, seed);
        let a = schmidt_decompose_with(&b, 0.0).unwrap();
        let r = schmidt_decompose_with(&b.scaled(Complex64::from_polar(1.0, theta)), 0.0).unwrap();
        for (x, y) in a.lambdas.iter().zip(&r.lambdas) {
            prop_assert!((x - y).abs() < 1e-14);
        }
        let (ma, mr) = (metrics(&a), metrics(&r));
        prop_assert!((ma.entropy - mr.entropy).abs() < 1e-13);
        prop_assert!((ma.cooperativity - mr.cooperativity).abs() < 1e-13);
    }

    #[test]
    fn purity_times_cooperativity_is_one(raw in prop::collection::vec(1e-9f64..1.0, 1..40)) {
        let total: f64 = raw.iter().sum();
        let lambdas: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let m = EntanglementMetrics::from_lambdas(&lambdas);
        prop_assert_eq!(m.purity * m.cooperativity, 1.0);
        prop_assert!(m.cooperativity >= 1.0 - 1e-12);
        prop_assert!(m.entropy >= 0.0);
    }
}

#[test]
fn time_synthesis_is_unitary() {
    let g = FrequencyGrid::new(2.3552e15, 2.3572e15, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi: Vec<Complex64> = (0..128)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let times = conjugate_time_grid(&g, -3e-11);
    let v = synthesize(&psi, &g, &times);
    let dt = times[1] - times[0];
    let et: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt;
    let ew: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.step();
    assert!((et - ew).abs() < 1e-10 * ew);
}

#[test]
fn lorentzian_line_decays_exponentially() {
    let gamma = 1e10;
    let wc = 2.3562e15;
    let g = FrequencyGrid::new(wc - 400.0 * gamma, wc + 400.0 * gamma, 16001).unwrap();
    let psi: Vec<Complex64> = g
        .values()
        .iter()
        .map(|&w| 1.0 / Complex64::new(gamma, -(w - wc)))
        .collect();
    let spectrum = SchmidtSpectrum {
        lambdas: vec![1.0],
        psi: vec![psi],
        phi: vec![vec![Complex64::new(1.0, 0.0); 2]],
        grid_s: g,
        grid_i: FrequencyGrid::new(1.0, 2.0, 2).unwrap(),
        discarded_weight: 0.0,
    };
    let times = conjugate_time_grid(&g, -0.5 / gamma);
    let v = temporal_mode(&spectrum, 0, &times).unwrap();
    let dt = times[1] - times[0];
    let energy: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt;
    assert!((energy - 1.0).abs() < 1e-12);
    // Compare against e^{−2γt}, anchored at t0 = 0.1/γ, over three decay times of |v|².
    let index = |t: f64| ((t - times[0]) / dt).round() as usize;
    let (i0, i1) = (index(0.1 / gamma), index(1.6 / gamma));
    let reference = v[i0].norm_sqr();
    for i in i0..=i1 {
        let expected = reference * (-2.0 * gamma * (times[i] - times[i0])).exp();
        let ratio = v[i].norm_sqr() / expected;
        assert!(
            (ratio - 1.0).abs() < 0.05,
            "t = {}: ratio {ratio}",
            times[i]
        );
    }
    assert!(v[index(-0.3 / gamma)].norm_sqr() < 0.01 * reference);
    assert!(temporal_mode(&spectrum, 1, &times).is_err());
}
