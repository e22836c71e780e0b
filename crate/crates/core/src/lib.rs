pub mod bath;
pub mod config;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod master;
pub mod model;
pub mod run;
pub mod rwa;
pub mod sweep;

pub use error::{LzsError, Result};
