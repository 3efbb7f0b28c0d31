//! CVRP-to-QUBO toolkit: parse CVRPLIB instances, build the flow-based
//! constrained model with MTZ subtour elimination, compile it to a QUBO via
//! the penalty method, drive classical or remote samplers over it, decode the
//! samples back into routes, and benchmark the whole pipeline.

pub mod bench;
pub mod decode;
pub mod error;
pub mod instance;
pub mod model;
pub mod qubo;
pub mod remote;
pub mod report;
pub mod sampler;

#[doc(hidden)]
pub mod testutil;

pub use error::{Error, Result};
