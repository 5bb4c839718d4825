pub mod bench;
pub mod datasets;
pub mod gan;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod sample;
pub mod tensor;
