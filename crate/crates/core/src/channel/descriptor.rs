//! JSON channel descriptors. Matrices are row-major lists of `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use super::{fixture, random_channel, unitary_channel, Channel, RandomKind};
use crate::error::{Error, Result};
use crate::numkernel::{c64, CMatrix, ToleranceConfig};

/// Row-major matrix of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub kind: RandomKind,
    pub d: usize,
    #[serde(default = "default_env_rank")]
    pub env_rank: usize,
    pub seed: u64,
}

fn default_env_rank() -> usize {
    1
}

/// One channel as accepted on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelDescriptor {
    Kraus {
        dim: usize,
        kraus: Vec<JsonMatrix>,
    },
    Choi {
        dim: usize,
        choi: JsonMatrix,
    },
    /// A named fixture; `unitary` additionally takes `matrix`.
    Fixture {
        fixture: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<JsonMatrix>,
    },
    Random {
        random: RandomSpec,
    },
}

/// Converts a row-major JSON matrix, checking that it is `rows x cols`.
pub fn parse_matrix(m: &JsonMatrix, rows: usize, cols: usize) -> Result<CMatrix> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {rows}x{cols} matrix"
        )));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c64(m[i][j][0], m[i][j][1])))
}

fn square_json(m: &JsonMatrix) -> Result<CMatrix> {
    let n = m.len();
    parse_matrix(m, n, n)
}

impl ChannelDescriptor {
    /// A short human-readable label.
    pub fn label(&self) -> String {
        match self {
            ChannelDescriptor::Kraus { dim, kraus } => format!("kraus(d={dim}, r={})", kraus.len()),
            ChannelDescriptor::Choi { dim, .. } => format!("choi(d={dim})"),
            ChannelDescriptor::Fixture { fixture, .. } => fixture.clone(),
            ChannelDescriptor::Random { random } => format!(
                "random({}, d={}, r={}, seed={})",
                random.kind.name(),
                random.d,
                random.env_rank,
                random.seed
            ),
        }
    }

    pub fn to_channel(&self, tol: &ToleranceConfig) -> Result<Channel> {
        match self {
            ChannelDescriptor::Kraus { dim, kraus } => {
                if kraus.is_empty() {
                    return Err(Error::DimensionMismatch("empty Kraus list".into()));
                }
                let ops = kraus
                    .iter()
                    .map(|k| parse_matrix(k, *dim, *dim))
                    .collect::<Result<Vec<_>>>()?;
                Channel::from_kraus(ops)
            }
            ChannelDescriptor::Choi { dim, choi } => {
                let n = dim * dim;
                Channel::from_choi(*dim, &parse_matrix(choi, n, n)?, tol)
            }
            ChannelDescriptor::Fixture { fixture: name, matrix } => match (name.as_str(), matrix) {
                ("unitary", Some(m)) => unitary_channel(square_json(m)?),
                ("unitary", None) => Err(Error::BadParams("fixture unitary needs a matrix".into())),
                (_, Some(_)) => Err(Error::BadParams(format!("fixture {name} takes no matrix"))),
                (_, None) => fixture(name),
            },
            ChannelDescriptor::Random { random } => {
                random_channel(random.kind, random.d, random.env_rank, random.seed)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ChannelDescriptor {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn kraus_descriptor() {
        let d = parse(r#"{"dim":2,"kraus":[[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#);
        let ch = d.to_channel(&ToleranceConfig::default()).unwrap();
        assert_eq!(ch.dim(), 2);
        assert!(!ch.is_unital(&ToleranceConfig::default()));
    }

    #[test]
    fn row_major_layout() {
        let m: JsonMatrix = vec![vec![[1.0, 0.0], [2.0, 0.0]], vec![[3.0, 0.0], [4.0, 1.0]]];
        let a = parse_matrix(&m, 2, 2).unwrap();
        assert_eq!(a[(0, 1)], c64(2.0, 0.0));
        assert_eq!(a[(1, 1)], c64(4.0, 1.0));
        assert!(parse_matrix(&m, 2, 3).is_err());
    }

    #[test]
    fn fixture_and_random_descriptors() {
        let tol = ToleranceConfig::default();
        assert_eq!(parse(r#"{"fixture":"station3"}"#).to_channel(&tol).unwrap().dim(), 3);
        let r = parse(r#"{"random":{"kind":"mixed_unitary","d":3,"env_rank":2,"seed":4}}"#);
        assert_eq!(r.to_channel(&tol).unwrap().kraus().len(), 2);
        let u = parse(r#"{"fixture":"unitary","matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#);
        assert!(u.to_channel(&tol).unwrap().is_unital(&tol));
        assert!(matches!(
            parse(r#"{"fixture":"bogus"}"#).to_channel(&tol),
            Err(Error::UnknownFixture(_))
        ));
    }

    #[test]
    fn choi_descriptor_round_trip() {
        let tol = ToleranceConfig::default();
        let ch = fixture("shemesh2").unwrap();
        let choi: JsonMatrix = (0..4)
            .map(|i| (0..4).map(|j| [ch.choi()[(i, j)].re, ch.choi()[(i, j)].im]).collect())
            .collect();
        let back = ChannelDescriptor::Choi { dim: 2, choi }.to_channel(&tol).unwrap();
        assert!((back.superop() - ch.superop()).norm() < 1e-12);
    }

    #[test]
    fn unknown_shape_rejected() {
        assert!(serde_json::from_str::<ChannelDescriptor>(r#"{"foo":1}"#).is_err());
    }
}
