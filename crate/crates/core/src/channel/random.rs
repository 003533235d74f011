//! Seeded random UCP maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Channel;
use crate::error::{Error, Result};
use crate::numkernel::{c64, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    /// Kraus blocks of a Haar isometry `C^d -> C^d ⊗ C^env_rank`.
    HaarStinespring,
    /// Conjugation by one Haar unitary.
    Unitary,
    /// `env_rank` Haar unitaries with flat-Dirichlet weights.
    MixedUnitary,
    /// Pinching onto `env_rank` blocks of a Haar-random basis.
    Pinching,
    /// Conjugation by a finite-order block-cyclic unitary over `env_rank` equal blocks.
    BlockPermutation,
}

impl RandomKind {
    pub const ALL: [RandomKind; 5] = [
        RandomKind::HaarStinespring,
        RandomKind::Unitary,
        RandomKind::MixedUnitary,
        RandomKind::Pinching,
        RandomKind::BlockPermutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RandomKind::HaarStinespring => "haar_stinespring",
            RandomKind::Unitary => "unitary",
            RandomKind::MixedUnitary => "mixed_unitary",
            RandomKind::Pinching => "pinching",
            RandomKind::BlockPermutation => "block_permutation",
        }
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re * s, im * s)
    })
}

/// Haar isometry `rows x cols` (`rows >= cols`): QR of a Ginibre matrix with phases fixed by `R`.
fn haar_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c64(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    haar_isometry(d, d, rng)
}

/// Deterministic random channel of the given kind.
pub fn random_channel(kind: RandomKind, d: usize, env_rank: usize, seed: u64) -> Result<Channel> {
    if d == 0 || env_rank == 0 {
        return Err(Error::BadParams("d and env_rank must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let kraus = match kind {
        RandomKind::HaarStinespring => {
            let v = haar_isometry(d * env_rank, d, &mut rng);
            (0..env_rank)
                .map(|i| v.rows(i * d, d).into_owned())
                .collect()
        }
        RandomKind::Unitary => vec![haar_unitary(d, &mut rng)],
        RandomKind::MixedUnitary => {
            let raw: Vec<f64> = (0..env_rank).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = raw.iter().sum();
            raw.iter()
                .map(|&w| haar_unitary(d, &mut rng) * c64((w / total).sqrt(), 0.0))
                .collect()
        }
        RandomKind::Pinching => {
            if env_rank > d {
                return Err(Error::BadParams(format!(
                    "pinching into {env_rank} blocks needs d >= {env_rank}"
                )));
            }
            let sizes = random_composition(d, env_rank, &mut rng);
            let u = haar_unitary(d, &mut rng);
            let mut start = 0;
            sizes
                .iter()
                .map(|&size| {
                    let cols = u.columns(start, size).into_owned();
                    start += size;
                    &cols * cols.adjoint()
                })
                .collect()
        }
        RandomKind::BlockPermutation => {
            if !d.is_multiple_of(env_rank) {
                return Err(Error::BadParams(format!(
                    "{env_rank} equal blocks do not tile dimension {d}"
                )));
            }
            vec![block_cyclic_unitary(d, env_rank, &mut rng)]
        }
    };
    Channel::from_kraus(kraus)
}

/// Random UCP map with range in the block-diagonal algebra `A = ⊕ M_{d_j}`.
///
/// Every Kraus operator is supported on the columns of a single block, with rows anywhere, so
/// `tau(X)` depends on off-diagonal blocks of `X` while `tau(M_d) ⊆ A`.
pub fn random_block_channel(block_dims: &[usize], env_rank: usize, seed: u64) -> Result<Channel> {
    if env_rank == 0 {
        return Err(Error::BadParams("env_rank must be at least 1".into()));
    }
    let d: usize = block_dims.iter().sum();
    super::block_projections(d, block_dims)?;
    let mut rng = rng(seed);
    let mut kraus = Vec::with_capacity(block_dims.len() * env_rank);
    let mut start = 0;
    for &size in block_dims {
        let v = haar_isometry(d * env_rank, size, &mut rng);
        for e in 0..env_rank {
            let mut k = CMatrix::zeros(d, d);
            k.view_mut((0, start), (d, size)).copy_from(&v.rows(e * d, d));
            kraus.push(k);
        }
        start += size;
    }
    Channel::from_kraus(kraus)
}

/// Parameters `(d, env_rank)` valid for `kind`, cycling `d` through 2, 3, 4 with `index`.
pub fn population_params(kind: RandomKind, index: usize) -> (usize, usize) {
    let d = 2 + index % 3;
    let env_rank = match kind {
        RandomKind::HaarStinespring => 1 + (index / 3) % 3,
        RandomKind::Unitary => 1,
        RandomKind::MixedUnitary => 2 + (index / 3) % 3,
        RandomKind::Pinching => 1 + (index / 3) % d,
        RandomKind::BlockPermutation => {
            let divisors: Vec<usize> = (2..=d).filter(|&b| d.is_multiple_of(b)).collect();
            divisors[(index / 3) % divisors.len()]
        }
    };
    (d, env_rank)
}

/// `count` channels of one kind with seeds `seed, seed + 1, ...` and parameters from
/// [`population_params`].
pub fn random_population(kind: RandomKind, count: usize, seed: u64) -> Result<Vec<Channel>> {
    (0..count)
        .map(|i| {
            let (d, env_rank) = population_params(kind, i);
            random_channel(kind, d, env_rank, seed + i as u64)
        })
        .collect()
}

/// Sizes of `parts` non-empty consecutive blocks summing to `total`.
fn random_composition<R: Rng>(total: usize, parts: usize, rng: &mut R) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..total).collect();
    // Partial Fisher-Yates: the first `parts - 1` entries are a uniform sample of cut points.
    for i in 0..parts.saturating_sub(1) {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut chosen: Vec<usize> = cuts[..parts - 1].to_vec();
    chosen.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in chosen.into_iter().chain(std::iter::once(total)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// `W = sum_j E_{j+1, j} ⊗ U_j` over `blocks` equal blocks, with `U_k ... U_1 = I` so `W^k = I`.
fn block_cyclic_unitary<R: Rng>(d: usize, blocks: usize, rng: &mut R) -> CMatrix {
    let b = d / blocks;
    let mut factors: Vec<CMatrix> = (0..blocks.saturating_sub(1))
        .map(|_| haar_unitary(b, rng))
        .collect();
    let product = factors
        .iter()
        .fold(CMatrix::identity(b, b), |acc, u| u * acc);
    factors.push(product.adjoint());
    let mut w = CMatrix::zeros(d, d);
    for (j, u) in factors.iter().enumerate() {
        let target = (j + 1) % blocks;
        w.view_mut((target * b, j * b), (b, b)).copy_from(u);
    }
    w
}
