//! Generation, labelling and classification of bipartite quantum states by
//! separability.

pub mod classifier;
pub mod criteria;
pub mod dataset;
pub mod datagen;
pub mod error;
pub mod features;
pub mod fw;
pub mod par;
pub mod qcore;
pub mod seed;

pub use error::{QsepError, Result};
