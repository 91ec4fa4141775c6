//! Domains, graded triangulations and the branch cut of the double covering.

mod domain;
mod mesh;
mod mesher;

pub use domain::{DomainSpec, Outline, Piece};
pub use mesh::{build_mesh, build_mesh_with, build_outline_mesh, insert_cut, Locator, Mesh, MeshPolicy, MeshRecipe, PoleConfig};
pub use mesher::{BoundaryEdge, SizeField, SizeSource};

