//! Tree-restricted shortcuts, their quality metrics, and BlockRoute.

pub mod block_route;
mod shortcut;

pub use block_route::{broadcast, convergecast, RouteError, RouteMode, RouteTask};
pub use shortcut::{Block, BlockStructure, Shortcut};
