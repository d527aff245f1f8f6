//! Estimate tags attached to every report record and assumption violation.
//! They name the identity or bound a check corresponds to.

pub const ZERO_MEAN: &str = "eq:con-u";
pub const L2_BALANCE: &str = "eq:120";
pub const ENERGY_L4_P2: &str = "eq:u-4-p-2";
pub const P_INFTY: &str = "eq:p-infty";
pub const U_INFTY: &str = "eq:linfty-u";
pub const STABILITY: &str = "eq:stability";
pub const ENTROPY: &str = "eq:ent2";
pub const VANISHING_VISCOSITY: &str = "lm:conv-u";
pub const SCALING: &str = "eq:change3";
pub const FAR_FIELD_F: &str = "eq:lim-infty-f";
pub const INITIAL_ZERO_MEAN: &str = "eq:assinit";
pub const INITIAL_PRIMITIVE_L2: &str = "eq:l-2-di-P0";
pub const BOUNDARY_BOUNDED: &str = "eq:ass-g";
