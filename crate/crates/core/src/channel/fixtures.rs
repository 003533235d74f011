//! Explicit maps used as regression fixtures.

use super::{matrix_unit, Channel};
use crate::error::{Error, Result};
use crate::numkernel::{c64, CMatrix, ToleranceConfig};

/// The literal example maps (every name accepted by [`fixture`] except the parametrized ones).
pub const EXAMPLE_FIXTURES: [&str; 9] = [
    "shemesh2",
    "tau1_avg",
    "tau2_avg",
    "avg3",
    "tau1_comp",
    "tau2_comp",
    "comp3",
    "station3",
    "faithful3",
];

/// Every accepted fixture name; `identity(d)` and `pinch_diag(d)` take a dimension.
pub const FIXTURE_NAMES: [&str; 11] = [
    "shemesh2",
    "tau1_avg",
    "tau2_avg",
    "avg3",
    "tau1_comp",
    "tau2_comp",
    "comp3",
    "station3",
    "faithful3",
    "identity(d)",
    "pinch_diag(d)",
];

fn scaled_unit(d: usize, i: usize, j: usize, s: f64) -> CMatrix {
    matrix_unit(d, i, j) * c64(s, 0.0)
}

/// Channel with the given Kraus family; fixtures are exact, so construction cannot fail.
fn build(kraus: Vec<CMatrix>) -> Channel {
    Channel::from_kraus(kraus).expect("fixture Kraus family is well formed")
}

/// `X -> diag(X)` on `M_d`.
pub fn pinch_diag(d: usize) -> Channel {
    build((0..d).map(|i| matrix_unit(d, i, i)).collect())
}

/// `X -> U† X U`.
pub fn unitary_channel(u: CMatrix) -> Result<Channel> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch("unitary must be square".into()));
    }
    let n = u.nrows();
    let defect = (u.adjoint() * &u - CMatrix::identity(n, n)).norm();
    if defect > 1e-9 {
        return Err(Error::BadParams(format!("matrix is not unitary (defect {defect:e})")));
    }
    Channel::from_kraus(vec![u])
}

fn parse_dim(name: &str, prefix: &str) -> Option<Result<usize>> {
    let rest = name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(
        rest.trim()
            .parse::<usize>()
            .ok()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::UnknownFixture(name.to_string())),
    )
}

/// Looks up a named fixture.
pub fn fixture(name: &str) -> Result<Channel> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    let ch = match name {
        // X -> [[(x11 + x22)/2, 0], [0, x22]]
        "shemesh2" => build(vec![
            scaled_unit(2, 0, 0, s2),
            scaled_unit(2, 1, 0, s2),
            matrix_unit(2, 1, 1),
        ]),
        // diag(x11, x22, x11)
        "tau1_avg" => build(vec![
            matrix_unit(3, 0, 0),
            matrix_unit(3, 1, 1),
            matrix_unit(3, 0, 2),
        ]),
        // diag(x11, x22, x22)
        "tau2_avg" => build(vec![
            matrix_unit(3, 0, 0),
            matrix_unit(3, 1, 1),
            matrix_unit(3, 1, 2),
        ]),
        "avg3" => Channel::convex_combine(
            &[0.5, 0.5],
            &[fixture("tau1_avg")?, fixture("tau2_avg")?],
            &ToleranceConfig::default(),
        )?,
        // diag(x11, x22, (x11 + x33)/2)
        "tau1_comp" => build(vec![
            matrix_unit(3, 0, 0),
            matrix_unit(3, 1, 1),
            scaled_unit(3, 0, 2, s2),
            scaled_unit(3, 2, 2, s2),
        ]),
        // diag(x11, x22, (x22 + x33)/2)
        "tau2_comp" => build(vec![
            matrix_unit(3, 0, 0),
            matrix_unit(3, 1, 1),
            scaled_unit(3, 1, 2, s2),
            scaled_unit(3, 2, 2, s2),
        ]),
        "comp3" => Channel::compose(&fixture("tau2_comp")?, &fixture("tau1_comp")?)?,
        // diag(x33, x33, (x11 + x22)/2)
        "station3" => build(vec![
            matrix_unit(3, 2, 0),
            matrix_unit(3, 2, 1),
            scaled_unit(3, 0, 2, s2),
            scaled_unit(3, 1, 2, s2),
        ]),
        // diag(x11, x22, (x11 + x22 + x33)/3)
        "faithful3" => build(vec![
            matrix_unit(3, 0, 0),
            matrix_unit(3, 1, 1),
            scaled_unit(3, 0, 2, s3),
            scaled_unit(3, 1, 2, s3),
            scaled_unit(3, 2, 2, s3),
        ]),
        _ => {
            if let Some(d) = parse_dim(name, "identity") {
                let d = d?;
                return Channel::from_kraus(vec![CMatrix::identity(d, d)]);
            }
            if let Some(d) = parse_dim(name, "pinch_diag") {
                return Ok(pinch_diag(d?));
            }
            return Err(Error::UnknownFixture(name.to_string()));
        }
    };
    Ok(ch)
}
