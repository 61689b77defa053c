pub mod alternates;
pub mod baselines;
pub mod cache;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod harvest;
pub mod linalg;
pub mod matrix;
pub mod pair;
pub mod pattern;
pub mod pipeline;
pub mod projection;
pub mod similarity;
pub mod synth;
pub mod thesaurus;

pub use error::{LraError, Result};
