//! Leapfrog integrator on a staggered Yee grid inside the slab, closed by
//! perfect conductors or by the convolution-quadrature transparent
//! condition, with energy and divergence diagnostics.

pub mod energy;
pub mod io;
pub mod kernel;
pub mod layout;
pub mod medium;
pub mod ops;
pub mod run;
pub mod source;
pub mod state;

pub use energy::{divergence_residual, energies, EnergyEntry, EnergyMonitor, EnergyReport};
pub use kernel::{BoundaryKernel, ExteriorModel, TbcKernels};
pub use layout::{Comp, Triple, YeeLayout};
pub use medium::SlabMedium;
pub use source::{Bump, LateralShape, SourceTerm, SupportBox, TemporalProfile, VerticalPulse};
pub use state::{boundary_drive, init, step_pec, step_tbc, BoundaryDrive, FieldState, TraceHistory};
pub use run::{run, RunOutput, RunPlan, Snapshot};
