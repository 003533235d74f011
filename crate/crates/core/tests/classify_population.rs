use perbound::channel::{fixture, random_population, RandomKind, EXAMPLE_FIXTURES};
use perbound::classify::{
    irreducible_blocks, is_peripherally_automorphic, is_stationary, PAReport, StationarityReport,
    VERDICT_TOL,
};
use perbound::numkernel::{psd_gap, CMatrix, ToleranceConfig};
use perbound::spectral::{eigenspace, peripheral_decomposition, spectrum};
use perbound::Channel;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn population() -> Vec<(String, Channel)> {
    let mut out = Vec::new();
    for name in EXAMPLE_FIXTURES.iter().copied().chain(["identity(2)", "identity(3)", "pinch_diag(3)"]) {
        out.push((name.to_string(), fixture(name).unwrap()));
    }
    for kind in RandomKind::ALL {
        for (i, ch) in random_population(kind, 50, 1000).unwrap().into_iter().enumerate() {
            out.push((format!("{}#{i}", kind.name()), ch));
        }
    }
    out
}

fn analyse(ch: &Channel) -> (PAReport, StationarityReport) {
    (
        is_peripherally_automorphic(ch, &tol()).unwrap(),
        is_stationary(ch, &tol()).unwrap(),
    )
}

#[test]
fn five_conditions_and_stationarity_agree_on_population() {
    let t = tol();
    for (name, ch) in population() {
        let (pa, st) = analyse(&ch);
        assert!(pa.agree, "{name}: {:?}", pa.conditions());
        // The multiplicative-closure characterization gives the same verdict.
        assert_eq!(pa.closure_gap <= VERDICT_TOL, pa.overall, "{name}");
        if st.stationary {
            assert!(pa.overall, "{name}: stationary but not PA");
            assert!(st.witness.is_none());
            let blocks = irreducible_blocks(&ch, 17, &t).unwrap();
            let d = ch.dim();
            let sum = blocks.projections.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
            assert!((sum - CMatrix::identity(d, d)).norm() < 1e-8, "{name}");
            for (i, p) in blocks.projections.iter().enumerate() {
                assert!((ch.apply(p).unwrap() - p).norm() < 1e-8, "{name}");
                for q in &blocks.projections[i + 1..] {
                    assert!((p * q).norm() < 1e-8, "{name}");
                }
            }
            assert!(blocks.irreducible_flags.iter().all(|&f| f), "{name}");
        } else {
            let w = st.witness.as_ref().expect("non-stationary channels carry a witness");
            let image = ch.apply(w).unwrap();
            assert!(psd_gap(&(w - &image), &t).unwrap() >= -t.eq_tol, "{name}");
            assert!((image - w).norm() > 10.0 * t.eq_tol, "{name}");
        }
        assert_eq!(st.star_closed, st.rank == ch.dim(), "{name}");
    }
}

// For a PA channel, peripheral X ∈ E_lambda and any eigenvector Y ∈ E_mu give XY ∈ E_{lambda mu}.
#[test]
fn eigenvalue_products_for_pa_channels() {
    let t = tol();
    for (name, ch) in population() {
        if !is_peripherally_automorphic(&ch, &t).unwrap().overall {
            continue;
        }
        let dec = peripheral_decomposition(&ch, &t).unwrap();
        let data = spectrum(&ch, &t).unwrap();
        for c in &data.eigenvalues {
            let ys = eigenspace(&ch, c.raw, &t).unwrap();
            for x in &dec.p_basis {
                for y in ys.elements() {
                    let xy = &x.vector * y;
                    let gap = (ch.apply(&xy).unwrap() - &xy * (x.eigenvalue * c.raw)).norm();
                    assert!(gap <= 1e-7, "{name}: {gap:e}");
                }
            }
        }
    }
}
