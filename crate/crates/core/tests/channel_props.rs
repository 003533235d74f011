use perbound::channel::{kraus_from_choi, population_params, random_channel, RandomKind};
use perbound::numkernel::{c64, orthonormalize_hs, vec_matrix, CMatrix, ToleranceConfig};
use perbound::Channel;
use proptest::prelude::*;

fn channel() -> impl Strategy<Value = Channel> {
    (0usize..5, 0usize..60, any::<u64>()).prop_map(|(k, i, seed)| {
        let kind = RandomKind::ALL[k];
        let (d, env) = population_params(kind, i);
        random_channel(kind, d, env, seed).unwrap()
    })
}

fn test_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| c64(1.0 + i as f64 - 0.5 * j as f64, 0.25 * (i * j) as f64 - 0.3))
}

fn span_gap(a: &[CMatrix], b: &[CMatrix], tol: &ToleranceConfig) -> f64 {
    let ba = orthonormalize_hs(a, tol);
    let bb = orthonormalize_hs(b, tol);
    let one = b.iter().map(|x| ba.residual(x)).fold(0.0, f64::max);
    let two = a.iter().map(|x| bb.residual(x)).fold(0.0, f64::max);
    if ba.len() != bb.len() {
        return f64::INFINITY;
    }
    one.max(two)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn adjoint_superop_is_conjugate_transpose(ch in channel()) {
        let gap = (ch.adjoint().superop() - ch.superop().adjoint()).norm();
        prop_assert!(gap <= 1e-10, "{gap:e}");
    }

    #[test]
    fn apply_matches_superop(ch in channel()) {
        let x = test_matrix(ch.dim());
        let direct = vec_matrix(&ch.apply(&x).unwrap());
        let via = ch.superop() * vec_matrix(&x);
        prop_assert!((direct - via).norm() <= 1e-10 * x.norm());
    }

    #[test]
    fn choi_round_trip(ch in channel()) {
        let tol = ToleranceConfig::default();
        let rebuilt = Channel::from_choi(ch.dim(), ch.choi(), &tol).unwrap();
        let x = test_matrix(ch.dim());
        prop_assert!((rebuilt.apply(&x).unwrap() - ch.apply(&x).unwrap()).norm() <= 1e-9 * x.norm());
        let recovered = kraus_from_choi(ch.dim(), ch.choi(), &tol);
        prop_assert!(span_gap(ch.kraus(), &recovered, &tol) <= 1e-9);
    }

    #[test]
    fn unital_iff_adjoint_trace_preserving(ch in channel()) {
        let report = ch.adjoint().validate(&ToleranceConfig::default());
        prop_assert!((report.tp_gap - ch.unitality_gap()).abs() <= 1e-10);
        prop_assert!(ch.validate(&ToleranceConfig::default()).is_cp);
    }

    #[test]
    fn convex_combination_is_linear(a in channel(), b in channel(), p in 0.05f64..0.95) {
        prop_assume!(a.dim() == b.dim());
        let tol = ToleranceConfig::default();
        let mix = Channel::convex_combine(&[p, 1.0 - p], &[a.clone(), b.clone()], &tol).unwrap();
        let expected = a.superop() * c64(p, 0.0) + b.superop() * c64(1.0 - p, 0.0);
        prop_assert!((mix.superop() - &expected).norm() <= 1e-13 * expected.norm().max(1.0));
    }
}
