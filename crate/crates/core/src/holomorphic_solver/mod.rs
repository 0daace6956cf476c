//! Holomorphic spheres in `S² × T²` and local holomorphic discs in balls.

mod energy;
mod jet;
mod newton;
mod sphere_map;
mod target;

pub use energy::*;
pub use jet::*;
pub use newton::*;
pub use sphere_map::*;
pub use target::*;
