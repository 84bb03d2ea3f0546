//! Vehicle-to-infrastructure channel simulation with two engines: a direct
//! single-bounce reference and a fast ambit-integral engine built on 2D
//! convolutions.
//!
//! ```no_run
//! use ambit_channel::ambit_sim::simulate_ambit;
//! use ambit_channel::levy_field::sample_field;
//! use ambit_channel::scene::{GridSteps, Scenario};
//!
//! let s = Scenario::v2i_reference(100.0, 100.0, 0.0, GridSteps::default())?;
//! let field = sample_field(&s.grid, &s.geo, &s.traj, 42);
//! let h = simulate_ambit(&s.params, &s.geo, &s.traj, &s.grid, &field, false)?;
//! assert_eq!(h.values.dim(), (s.grid.p_count, s.grid.d_count));
//! # Ok::<(), ambit_channel::Error>(())
//! ```

pub mod ambit_sim;
pub mod direct_sim;
pub mod error;
pub mod harness;
pub mod levy_field;
pub mod scene;
pub mod stats;

pub use error::{Error, Result};
