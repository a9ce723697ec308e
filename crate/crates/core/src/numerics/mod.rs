//! Deterministic numerical building blocks shared by every bound.

pub mod grid;
pub mod quadrature;
pub mod search;
pub mod special;

pub use grid::{suffix_max, GridSpec, Spacing};
pub use quadrature::{integrate_1d, integrate_pieces, pairwise_sum, Quadrature, QuadratureConfig};
pub use search::{maximize_1d, maximize_over, Maximum, SearchConfig};
pub use special::{q_function, phi_cdf, phi_pdf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded stream `stream` derived from a 64-bit master seed. Streams with
/// different indices are independent; the same `(seed, stream)` always
/// reproduces the same draws.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
