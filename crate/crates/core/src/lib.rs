pub mod alg;
pub mod corpus;
pub mod error;
pub mod fell;
pub mod gpd;
pub mod interchange;
pub mod linalg;
pub mod rep;
pub mod report;
pub mod zsb;

pub use error::{Error, Result};
