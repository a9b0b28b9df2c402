pub mod error;
pub mod model;
pub mod numerics;
pub mod channel;
pub mod sop;
pub mod montecarlo;
pub mod experiment;
