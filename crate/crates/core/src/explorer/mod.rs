//! Design-space exploration: sweep a (precision × scale) grid, train each
//! point (both activation functions, keeping the better), join accuracy
//! with hardware estimates, extract Pareto frontiers, and persist results
//! as CSV or structured JSON.

mod export;
mod grid;
mod pareto;

pub use export::{
    export, import_points, read_csv, read_json, write_csv, write_json, ExplorerDoc, ExportFormat,
    EXPLORER_FORMAT_VERSION,
};
pub use grid::{run_grid, DesignPoint, GridSpec, TrainPolicy};
pub use pareto::{dominates, non_dominated, pareto_front, Direction, ParetoFront, PointObjective};
