use perbound::channel::{diag_real, fixture, random_block_channel};
use perbound::classify::{
    gns_orthogonality_gap, is_peripherally_automorphic, is_stationary, kraus_algebra,
};
use perbound::numkernel::{c64, CMatrix, ToleranceConfig};
use perbound::spectral::{eigenspace, peripheral_decomposition, peripheral_space_on_blocks, subspace_gap};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
    (a - b).norm() <= eps
}

#[test]
fn station3_peripheral_basis_is_canonical() {
    let dec = peripheral_decomposition(&fixture("station3").unwrap(), &tol()).unwrap();
    assert_eq!(dec.dim_p(), 2);
    let third = c64(1.0 / 3f64.sqrt(), 0.0);
    let minus = dec.p_basis.iter().find(|p| (p.eigenvalue + 1.0).norm() < 1e-12).unwrap();
    let plus = dec.p_basis.iter().find(|p| (p.eigenvalue - 1.0).norm() < 1e-12).unwrap();
    assert!(close(&plus.vector, &(CMatrix::identity(3, 3) * third), 1e-12));
    assert!(close(&minus.vector, &(diag_real(&[1.0, 1.0, -1.0]) * third), 1e-12));
}

#[test]
fn avg3_fixed_basis_is_echelon() {
    let dec = peripheral_decomposition(&fixture("avg3").unwrap(), &tol()).unwrap();
    let norm = c64(1.0 / 1.25f64.sqrt(), 0.0);
    assert!(close(&dec.p_basis[0].vector, &(diag_real(&[1.0, 0.0, 0.5]) * norm), 1e-12));
    assert!(close(&dec.p_basis[1].vector, &(diag_real(&[0.0, 1.0, 0.5]) * norm), 1e-12));
}

#[test]
fn shemesh_counterexample() {
    let ch = fixture("shemesh2").unwrap();
    assert_eq!(eigenspace(&ch, c64(1.0, 0.0), &tol()).unwrap().len(), 1);
    assert_eq!(peripheral_decomposition(&ch, &tol()).unwrap().dim_p(), 1);
    assert!(!is_stationary(&ch, &tol()).unwrap().stationary);
    let alg = kraus_algebra(&ch, &tol()).unwrap();
    assert_eq!(alg.dim(), 3);
    assert!(!alg.star_closed);
    assert!(is_peripherally_automorphic(&ch, &tol()).unwrap().overall);
    // tau*(X) = [[x11/2, 0], [0, x22 + x11/2]]
    let x = CMatrix::from_fn(2, 2, |i, j| c64(1.0 + i as f64 + 2.0 * j as f64, j as f64 - i as f64));
    let mut expected = CMatrix::zeros(2, 2);
    expected[(0, 0)] = x[(0, 0)] * 0.5;
    expected[(1, 1)] = x[(1, 1)] + x[(0, 0)] * 0.5;
    assert!(close(&ch.adjoint().apply(&x).unwrap(), &expected, 1e-12));
}

#[test]
fn station3_restriction_is_not_inner() {
    let ch = fixture("station3").unwrap();
    let p = diag_real(&[1.0, 1.0, 0.0]);
    let image = ch.apply(&p).unwrap();
    assert!(close(&image, &diag_real(&[0.0, 0.0, 1.0]), 1e-12));
    assert!((image.trace().re - 1.0).abs() < 1e-12 && (p.trace().re - 2.0).abs() < 1e-12);
    let dec = peripheral_decomposition(&ch, &tol()).unwrap();
    assert!(dec.peripheral_residual(&p) < 1e-12);
    let st = is_stationary(&ch, &tol()).unwrap();
    assert!(close(st.rho0.rho(), &diag_real(&[0.25, 0.25, 0.5]), 1e-10));
    assert!(gns_orthogonality_gap(&ch, &tol()).unwrap() <= 1e-8);
}

#[test]
fn pinching_compression_keeps_peripheral_space() {
    for seed in 0..10 {
        let blocks = [1, 2, 1];
        let ch = random_block_channel(&blocks, 2, seed).unwrap();
        let compressed = ch.pinch_compress(&blocks).unwrap();
        let embedded = peripheral_space_on_blocks(&ch, &blocks, &tol()).unwrap();
        let dec = peripheral_decomposition(&compressed, &tol()).unwrap();
        let gap = subspace_gap(&dec.p_span.as_columns(), &embedded.as_columns());
        assert!(gap <= 1e-7, "seed {seed}: {gap:e}");
    }
}
