//! Particle trajectories beneath small-amplitude deep-water gravity waves.
//!
//! The crate evaluates the linear deep-water wave field, the closed-form
//! particle paths built on it (the peakon-like path and the two Jacobi
//! elliptic families obtained from a cubic truncation of the vertical
//! equation of motion), the stagnation depths, and an independent ODE
//! integrator used to validate every closed form.
//!
//! Elliptic functions throughout take the parameter `m` (the squared
//! modulus), never the modulus itself.

pub mod cli_io;
pub mod cubic_analysis;
pub mod error;
pub mod ode_oracle;
pub mod special_functions;
pub mod stagnation;
pub mod trajectories;
pub mod wave_field;

pub use cubic_analysis::{
    build_cubic, classify_roots, reduce_case1, reduce_case2, Case1Reduction, Case2Reduction,
    CubicCoeffs, CubicReduction,
};
pub use error::{Result, WaveError};
pub use ode_oracle::{
    integrate_full, integrate_moving_frame, integrate_truncated, residual_full_z_ode,
    IntegratorConfig, Method, ResidualReport,
};
pub use special_functions::{agm, complete_k, jacobi_sn_cn_dn, EllipticParameter, JacobiTriple};
pub use stagnation::{
    dense_scan, solve_stagnation, stagnation_on_trajectory, StagnationProblem, StagnationReport,
    StagnationSolution,
};
pub use trajectories::{
    assemble_xz, asymptote_times, beta_from_initial, case1_z, case2_z, peakon_path,
    peakon_residuals, period_case1, CaseTag, EllipticPath, PeakonParams, Stitching,
    TrajectorySample, TrajectorySeries,
};
pub use wave_field::{
    dispersion_speed, evaluate_field, trajectory_constant, Direction, FieldSample, WaveParams,
};
