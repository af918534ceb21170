//! Metric measure spaces, point configurations, ball quadrature, density
//! estimates and the geometric axiom checkers.

mod axioms;
mod density;
mod pointset;
mod quadrature;
mod radial;
mod space;

pub use axioms::{
    annular_variants, check_locally_doubling, check_ndb, check_wad, default_wad_radii, AnnularReport,
    DoublingReport, NdbReport, WadReport, DEFAULT_NDB_FLOOR, DEFAULT_WAD_TOL,
};
pub use density::{
    beurling_density, candidate_centers, count_in_ball, inverse_radius_slope, relative_separation,
    shell_count_bound, BallCount, DensityReport, DensityRow, SeparationReport, ShellBound,
};
pub use pointset::{PointSet, Provenance, Window};
pub use radial::{point_at_distance, radial_tail_integral};
pub use quadrature::{BallGrid, QuadratureRule, MAX_QUADRATURE_NODES};
pub use space::{unit_ball_volume, Point, Space};
