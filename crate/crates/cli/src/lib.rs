//! Command-line tools and the review service for `ocsr`.

pub mod cli;
pub mod commands;
pub mod service;
pub mod session;
