//! Displaced elliptical vortex states: wavefunctions, two-mode couplers,
//! closed-form and numerical Wigner functions, and field serialization.

pub mod coupling;
pub mod error;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod special;
pub mod state;
pub mod wigner;

pub use coupling::{
    bs_coupler, coupler_to_ellipticity, dcdc_coupler, dcdc_time_for_ratio, DcdcParams, ModeCoupler,
};
pub use error::{Error, Result};
pub use grid::{Axis, AxisLabel, Field2D, GridSpec};
pub use io::{read_csv, write_csv, write_pgm, Clamp};
pub use oracle::{adjudicate, calibrate_constant, oracle_marginal_xy, oracle_wigner, QuadratureSpec};
pub use report::{write_report, DiscrepancyReport, Verdict};
pub use state::{circular_decomposition, intensity_field, DeevParams, Displacement, VortexSign};
pub use wigner::{sit, sit_field, wigner4d, wigner_slice, ClosedForm, PhasePoint, SitForm, SlicePlane, WignerModel};
