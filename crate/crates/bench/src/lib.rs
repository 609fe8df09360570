//! Shared setup for the workbench benchmarks: deterministic desk-scale
//! systems at the top of the supported size range.

use relay_frames::model::RelaySystem;
use relay_frames::testkit;

/// Largest desk-scale configuration: ambient dimension 16, regenerated
/// deterministically from a fixed seed.
pub fn desk_scale_system() -> RelaySystem {
    let mut rng = testkit::rng(4242);
    testkit::random_frame_system(&mut rng, 16, 1e4)
}
