//! Seeded random sampling of valid gas states.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::euler::PrimState;

pub const RHO_RANGE: (f64, f64) = (0.1, 10.0);
pub const VELOCITY_RANGE: (f64, f64) = (-2.0, 2.0);
pub const PRESSURE_RANGE: (f64, f64) = (0.1, 10.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the sampling box: rho and p in [0.1, 10], each velocity
/// component in [-2, 2].
pub fn random_prim<R: Rng + ?Sized>(rng: &mut R) -> PrimState {
    PrimState {
        rho: rng.gen_range(RHO_RANGE.0..RHO_RANGE.1),
        u: rng.gen_range(VELOCITY_RANGE.0..VELOCITY_RANGE.1),
        v: rng.gen_range(VELOCITY_RANGE.0..VELOCITY_RANGE.1),
        w: rng.gen_range(VELOCITY_RANGE.0..VELOCITY_RANGE.1),
        p: rng.gen_range(PRESSURE_RANGE.0..PRESSURE_RANGE.1),
    }
}
