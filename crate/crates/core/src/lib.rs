pub mod channels;
pub mod error;
pub mod fixtures;
pub mod formats;
pub mod linalg;
pub mod measures;
pub mod qpt;
pub mod quantum;
pub mod random;
pub mod sdp;
pub mod sweep;

pub use error::{Error, Result};
