//! Hurricane-driven transmission failure sampling and preventive unit commitment.

pub mod analysis;
pub mod correlation;
pub mod fragility;
pub mod grid;
pub mod ingest;
pub mod rng;
pub mod sampler;
pub mod ucmodel;
pub mod windfield;
