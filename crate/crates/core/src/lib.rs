pub mod dptable;
pub mod chainwalk;
pub mod cli;
pub mod error;
pub mod exact;
pub mod oracle;
pub mod prawitz;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
