//! Linear flows on the torus `T^d = R^d / Z^d`: Diophantine certificates,
//! the cohomological equation, piecewise curves with retraced-arc excision,
//! currents along curves, and the linearization of the flow.

pub mod currents;
pub mod curves;
pub mod error;
pub mod io;
pub mod linearization;
pub mod measure;
pub mod precise;
pub mod sampling;
pub mod spectral;
pub mod torus_flow;

pub use error::{Error, Result};
pub use torus_flow::{DirectionVector, LiftPoint, TorusPoint};
