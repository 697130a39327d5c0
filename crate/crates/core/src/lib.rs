//! Time-domain Maxwell solver for a laterally periodic slab closed by exact
//! transparent boundary conditions, with a verification suite.

pub mod error;
pub mod num;
pub mod spectral;
pub mod symbols;
pub mod cq;
pub mod band;
pub mod sdomain;
pub mod stepper;
pub mod verify;

pub use error::{Error, Result};
pub use num::{Mat2, Real, C};

pub type LateralGridF64 = spectral::LateralGrid<f64>;
pub type TangentialTraceF64 = spectral::TangentialTrace<f64>;
pub type ComplexFrequencyF64 = symbols::ComplexFrequency<f64>;
pub type ExteriorMediumF64 = symbols::ExteriorMedium<f64>;
pub type CapacitySymbolF64 = symbols::CapacitySymbol<f64>;
