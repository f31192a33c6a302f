//! Counter-based retention randomness.
//!
//! Every node of the construction tree owns a 64-bit key obtained by
//! chaining a bijective mixer down its address, starting from a key derived
//! from the seed. The retention draw of a node is a further mix of its key.
//! Draws therefore depend only on `(seed, word)`: they do not depend on the
//! traversal order, and two probability tables sampled with the same seed are
//! monotonically coupled.

const ROOT_SALT: u64 = 0x243f_6a88_85a3_08d3;
const LETTER_STEP: u64 = 0x9e37_79b9_7f4a_7c15;
const DRAW_SALT: u64 = 0xd1b5_4a32_d192_ed03;
const DERIVE_SALT: u64 = 0x5851_f42d_4c95_7f2d;

/// SplitMix64 finaliser. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key of a node in the construction tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeKey(u64);

impl NodeKey {
    #[inline]
    pub fn root(seed: u64) -> Self {
        NodeKey(mix64(seed ^ ROOT_SALT))
    }

    #[inline]
    pub fn child(self, letter: u32) -> Self {
        NodeKey(mix64(
            self.0
                .rotate_left(17)
                .wrapping_add((letter as u64 + 1).wrapping_mul(LETTER_STEP)),
        ))
    }

    /// Uniform draw in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn draw(self) -> f64 {
        (mix64(self.0 ^ DRAW_SALT) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}

/// Retention draw for the node addressed by `letters` (root first).
pub fn retention_draw(seed: u64, letters: &[u32]) -> f64 {
    letters
        .iter()
        .fold(NodeKey::root(seed), |k, &l| k.child(l))
        .draw()
}

/// Derived seed for the `index`-th replicate or attempt stemming from `seed`.
/// Index 0 returns `seed` unchanged.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    if index == 0 {
        seed
    } else {
        mix64(seed ^ mix64(index.wrapping_mul(DERIVE_SALT)))
    }
}
