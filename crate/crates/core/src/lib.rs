pub mod brown;
pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod separation;
pub mod synthetic;
pub mod text;
pub mod tmodel;

pub use error::{Error, Result};
