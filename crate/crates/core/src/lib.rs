pub mod analysis;
pub mod cli;
pub mod dynamical;
pub mod error;
pub mod hp;
pub mod numeric;
pub mod simple;
pub mod source;
pub mod tameness;
pub mod transfer;
pub mod trees;
