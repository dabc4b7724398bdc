//! Shared run configuration for the command-line tools.

use crate::error::{Error, Result};
use crate::words::{DEFAULT_BALL_CAP, MAX_RANK};

/// Knobs shared by the CLI subcommands; the defaults match the library
/// defaults so a bare invocation is always valid.
#[derive(Clone, Debug)]
pub struct Config {
    pub rank: u32,
    /// Gauss quadrature size.
    pub quad: usize,
    /// Plot / scan grid resolution.
    pub grid: usize,
    /// Verification tolerance override (per-check defaults when `None`).
    pub tol: Option<f64>,
    pub seed: u64,
    /// Hard cap on enumerated ball sizes.
    pub ball_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            rank: 2,
            quad: 64,
            grid: 512,
            tol: None,
            seed: 0,
            ball_cap: DEFAULT_BALL_CAP,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 || self.rank > MAX_RANK {
            return Err(Error::RankOutOfRange(self.rank));
        }
        if self.quad == 0 || self.quad > crate::spherical::MAX_QUADRATURE_SIZE {
            return Err(Error::QuadratureSize(
                self.quad,
                "must be between 1 and the quadrature cap",
            ));
        }
        if self.grid < 2 {
            return Err(Error::Precondition("grid must be at least 2".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Precondition("tolerance must be positive".into()));
            }
        }
        if self.ball_cap == 0 {
            return Err(Error::Precondition("ball cap must be positive".into()));
        }
        Ok(())
    }
}
