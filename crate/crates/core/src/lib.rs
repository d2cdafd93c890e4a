//! Choquet quantiles, Choquet Expected Shortfall and risk sharing among
//! agents with capacity-based (ambiguous) risk measures on finite spaces.

pub mod capacity;
pub mod choquet;
pub mod distortion;
pub mod error;
pub mod lp;
pub mod rv;
pub mod space;
pub mod es;
pub mod extended;
pub mod infconv;
pub mod data;
pub mod fixtures;
pub mod oracle;

pub use capacity::{
    BinaryCapacity, Capacity, Combine, DistortedProbability, ExplicitCapacity, ProbabilityVector, Side,
    SupProbability, TIE_EPS,
};
pub use distortion::Distortion;
pub use error::{Error, Result};
pub use es::EsMethod;
pub use extended::ExtendedReal;
pub use infconv::{AgentSpec, Composition, MeasureKind, ShareOptions, SharingResult};
pub use rv::{IncreasingMap, SimpleRandomVariable};
pub use space::{Event, FiniteSpace};
