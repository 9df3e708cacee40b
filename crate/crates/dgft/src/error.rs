//! Error type shared across the solver.
//!
//! Configuration problems (bad mesh sizes, invalid flux data, malformed
//! run descriptions) are reported before any time stepping begins.
//! Runtime failures distinguish a degenerate shock, solution values
//! escaping the admissible interval, and a shock that outruns its
//! safety band within a single step, because callers react differently
//! to each: the first two indicate a blown-up computation, the last a
//! time step that is far too large.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input value outside the interval on which the flux is defined.
    #[error("value {value} outside admissible interval [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    /// Derivative order not supported by the flux evaluator.
    #[error("unsupported flux derivative order {0} (supported: 0..=3)")]
    UnsupportedOrder(usize),

    /// Flux fails the west-wind requirement f'(u) > 0 on the admissible interval.
    #[error("flux is not west-wind on [{lo}, {hi}]: f'({at}) = {slope}")]
    NotWestWind { lo: f64, hi: f64, at: f64, slope: f64 },

    /// Invalid argument to a numerical kernel.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Invalid run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Shock height fell below the floor; the two-piece description is meaningless.
    #[error("degenerate shock at t = {time}: height {height} below floor {floor}")]
    DegenerateShock { time: f64, height: f64, floor: f64 },

    /// Solution value escaped the admissible interval during evaluation.
    #[error("solution blowup in cell {cell} at x = {x}: u = {value} outside [{lo}, {hi}]")]
    Blowup {
        cell: usize,
        x: f64,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A Runge-Kutta stage moved the shock beyond its safety band.
    #[error("step {step}: shock left its safety band ({detail})")]
    FatalStep { step: usize, detail: String },

    /// The shock advanced into the outflow region; the run ends cleanly.
    #[error("step {step}: shock reached outflow region")]
    ShockReachedOutflow { step: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
