pub mod agent;
pub mod baseline;
pub mod cards;
pub mod engine;
pub mod observation;
pub mod rng;
pub mod tournament;
