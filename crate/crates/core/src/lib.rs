pub mod circle;
pub mod clt;
pub mod config;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod homeo;
pub mod ifs;
pub mod measure;
pub mod observable;
pub mod rng;
pub mod runner;
pub mod stats;
