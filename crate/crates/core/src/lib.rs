pub mod acceptance;
pub mod asymptotics;
pub mod config;
pub mod error;
pub mod io;
pub mod ode;
pub mod profile;
pub mod radial;
pub mod series;
pub mod shooting;
pub mod tasks;
pub mod tail;
pub mod tridiag;
pub mod params;
pub mod verify;

pub use error::{Error, Result};
pub use params::{Exponents, Params, Regime};
