//! Library side of the `resbem` command line tool.

pub mod config;
pub mod oracle;
pub mod output;
pub mod run;
pub mod validate;
