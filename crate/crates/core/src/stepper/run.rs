use serde::{Deserialize, Serialize};

use super::energy::{EnergyMonitor, EnergyReport};
use super::kernel::{ExteriorModel, TbcKernels};
use super::layout::Triple;
use super::medium::SlabMedium;
use super::source::SourceTerm;
use super::state::{init, step_pec, step_tbc, FieldState};
use crate::cq::Generator;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::sdomain::Closure;

/// What a driven run does besides stepping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub closure: Closure,
    pub steps: usize,
    pub generator: Generator,
    pub exterior: ExteriorModel,
    /// Keep a copy of `(E, H)` every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl RunPlan {
    pub fn new(closure: Closure, steps: usize) -> Self {
        RunPlan { closure, steps, generator: Generator::Bdf2, exterior: ExteriorModel::default(), snapshot_every: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    pub e: Triple<T>,
    pub h: Triple<T>,
}

#[derive(Clone, Debug)]
pub struct RunOutput<T> {
    pub report: EnergyReport,
    /// Final state; its trace histories are the per-mode boundary archives.
    pub state: FieldState<T>,
    pub snapshots: Vec<Snapshot<T>>,
}

fn at_step(step: usize) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::AtStep { .. } => e,
        e => Error::AtStep { step, source: Box::new(e) },
    }
}

/// Runs `plan.steps` steps from the initial data in `source`, recording one
/// energy row per step (step 0 included). Deterministic for fixed inputs.
pub fn run<T: Real>(medium: &SlabMedium<T>, source: &SourceTerm<T>, dt: T, plan: &RunPlan) -> Result<RunOutput<T>> {
    let mut state = init(medium, source, dt, plan.closure)?;
    let kernels = match plan.closure {
        Closure::Transparent => {
            Some(TbcKernels::with_model(medium, plan.exterior, plan.generator, dt, plan.steps.max(1))?)
        }
        Closure::Pec => None,
    };
    let mut monitor = EnergyMonitor::new();
    let mut report = EnergyReport::default();
    let mut snapshots = Vec::new();
    let keep = |state: &FieldState<T>, snaps: &mut Vec<Snapshot<T>>| {
        if plan.snapshot_every > 0 && state.step % plan.snapshot_every == 0 {
            snaps.push(Snapshot { step: state.step, e: state.e.clone(), h: state.h_mean() });
        }
    };
    report.push(monitor.observe(&state, medium));
    keep(&state, &mut snapshots);
    for n in 0..plan.steps {
        match &kernels {
            Some(k) => step_tbc(&mut state, medium, source, k, None),
            None => step_pec(&mut state, medium, source),
        }
        .map_err(at_step(n + 1))?;
        report.push(monitor.observe(&state, medium));
        keep(&state, &mut snapshots);
    }
    Ok(RunOutput { report, state, snapshots })
}
