use perbound::channel::{fixture, population_params, random_channel, RandomKind, EXAMPLE_FIXTURES};
use perbound::numkernel::{c64, operator_norm, vec_matrix, CMatrix, ToleranceConfig};
use perbound::spectral::{
    check_peripheral_diagonalizable, peripheral_decomposition, power_space_equality, spectrum,
};
use perbound::Channel;
use proptest::prelude::*;

fn channel() -> impl Strategy<Value = Channel> {
    (0usize..5, 0usize..60, any::<u64>()).prop_map(|(k, i, seed)| {
        let kind = RandomKind::ALL[k];
        let (d, env) = population_params(kind, i);
        random_channel(kind, d, env, seed).unwrap()
    })
}

fn spectral_invariants(ch: &Channel) -> Result<(), TestCaseError> {
    let tol = ToleranceConfig::default();
    let d = ch.dim();
    let data = spectrum(ch, &tol).unwrap();
    let max_modulus = data.eigenvalues.iter().map(|c| c.raw.norm()).fold(0.0, f64::max);
    prop_assert!(max_modulus <= 1.0 + 1e-9);
    prop_assert_eq!(data.eigenvalues.iter().map(|c| c.multiplicity).sum::<usize>(), d * d);
    prop_assert!(data.peripheral.iter().any(|c| (c.value - 1.0).norm() < 1e-12));
    prop_assert!((ch.apply(&CMatrix::identity(d, d)).unwrap() - CMatrix::identity(d, d)).norm() <= tol.eq_tol);

    let dec = peripheral_decomposition(ch, &tol).unwrap();
    prop_assert_eq!(dec.dim_p() + dec.dim_n(), d * d);
    let id = vec_matrix(&CMatrix::identity(d, d));
    prop_assert!((&dec.projector * &id - &id).norm() <= 1e-8);
    for pv in &dec.p_basis {
        let v = vec_matrix(&pv.vector);
        prop_assert!((&dec.projector * &v - &v).norm() <= 1e-8);
        let gap = (ch.apply(&pv.vector).unwrap() - &pv.vector * pv.eigenvalue).norm();
        prop_assert!(gap <= 1e-8, "eigen residual {gap:e}");
    }

    // tau is isometric on P(tau) in the operator norm.
    let x = dec
        .p_basis
        .iter()
        .enumerate()
        .fold(CMatrix::zeros(d, d), |acc, (a, pv)| acc + &pv.vector * c64(1.0 + a as f64, 0.5 * a as f64));
    let before = operator_norm(&x);
    let after = operator_norm(&ch.apply(&x).unwrap());
    prop_assert!((before - after).abs() <= 1e-7 * before.max(1.0));

    prop_assert!(check_peripheral_diagonalizable(ch, &tol).unwrap().ok);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_channels_satisfy_spectral_invariants(ch in channel()) {
        spectral_invariants(&ch)?;
    }
}

#[test]
fn fixtures_satisfy_spectral_invariants() {
    for name in EXAMPLE_FIXTURES.iter().copied().chain(["identity(3)", "pinch_diag(4)"]) {
        spectral_invariants(&fixture(name).unwrap()).unwrap();
    }
}

#[test]
fn power_spaces_on_fixtures() {
    let tol = ToleranceConfig::default();
    for name in EXAMPLE_FIXTURES {
        let ch = fixture(name).unwrap();
        for m in [2, 3] {
            let r = power_space_equality(&ch, m, &tol).unwrap();
            assert!(r.p_equal && r.n_equal, "{name} m={m}: {r:?}");
        }
    }
}
