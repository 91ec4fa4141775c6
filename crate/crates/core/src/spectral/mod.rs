//! Nodal sets and orders of vanishing of computed eigenfunctions.

mod nodal;
mod order;

pub use nodal::{extract_nodal_set, nodal_set_of, EndKind, NodalSet, Polyline};
pub use order::{
    cut_angle, fem_vanishing_order, order_from_samples, vanishing_order, vanishing_order_with, OrderOptions, PointKind,
    VanishingOrder,
};
