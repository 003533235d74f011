//! Benchmark inputs shared by the criterion targets.

use perbound::channel::{random_channel, RandomKind};
use perbound::Channel;

/// A Haar-Stinespring channel on `M_d` with Kraus rank 2.
pub fn generic(d: usize) -> Channel {
    random_channel(RandomKind::HaarStinespring, d, 2, 17).expect("valid parameters")
}

/// A block-permutation channel on `M_d` (`d` even): every eigenvalue is peripheral.
pub fn permutation(d: usize) -> Channel {
    random_channel(RandomKind::BlockPermutation, d, 2, 17).expect("valid parameters")
}
