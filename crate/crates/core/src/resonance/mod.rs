//! The number-theoretic and harmonic-analysis side of the problem: the
//! resonance function of the cubic convolution, lattice counting sets and
//! their growth in N, space-time (Strichartz) norm probes for the free flow
//! e^{it|D|^α}, and a discrete Bourgain-norm diagnostic for sampled
//! trajectories.
//!
//! Everything is a pure function of its inputs; scans parallelize over
//! queries or samples and aggregate with order-independent operations (max,
//! counts) or fixed-order sums, so results do not depend on the thread pool.

mod bourgain;
mod counting;
mod strichartz;

pub use bourgain::{bourgain_norm, bourgain_norm_with, modulation_profile, tukey_taper, Taper};
pub use counting::{
    count_set, counting_bound_scan, is_degenerate_pairing, resonance_lower_bound_scan,
    resonance_phi, CountingQuery, CountingRow, CountingScan, LowerBoundScan,
};
pub use strichartz::{
    proba_strichartz_tail, strichartz_bilinear_probe, strichartz_l4_probe, StrichartzRow,
    StrichartzScan, TailRow, TailScan,
};
