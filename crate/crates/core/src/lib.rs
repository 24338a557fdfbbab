pub mod bounds;
pub mod decoders;
pub mod error;
pub mod harness;
pub mod items;
pub mod milp;
pub mod prior;
pub mod seed;
pub mod testing;

pub use error::{Error, Result};
