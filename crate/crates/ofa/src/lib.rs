//! Storage formats, pipeline stages and the `ofa` command-line tool built on
//! [`ofa_core`].

pub mod config;
mod error;
pub mod json;
pub mod manifest;
pub mod ofat;
pub mod pipeline;
pub mod report;
pub mod store;
pub mod text;

pub use error::{Error, Result};
pub use ofa_core;
