//! Library surface of the `bench` binary, exposed so integration tests can
//! reuse the config, record, and runner plumbing directly.

pub mod config;
pub mod expr_cmd;
pub mod record;
pub mod runner;
