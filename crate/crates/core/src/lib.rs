pub mod error;
pub mod experiment;
pub mod learner;
pub mod linalg;
pub mod models;
pub mod moments;
pub mod pauli;
pub mod precise;
pub mod sdp;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
