//! Monodromic tangential singularities of planar Filippov fields: Lyapunov
//! data, the polynomial unfolding into two-folds, and the limit cycles it
//! produces.

// `!(x < tol)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cycles;
pub mod field;
pub mod flow;
pub mod format;
pub mod ode;
pub mod poly;
pub mod portrait;
pub mod roots;
pub mod scenario;
pub mod unfold;
