//! Dissipative Landau-Zener sweeps with engineered ohmic baths.
//!
//! A qubit with tunneling gap Δ is driven linearly through its avoided
//! crossing while coupled to longitudinal (σ_z) and transverse (σ_x) heat
//! baths. In the adiabatic rotating frame the reduced dynamics is a set of
//! Bloch equations whose relaxation, dephasing and cross rates follow from
//! the two ohmic spectral densities; integrating them yields the final
//! ground-state population as a function of sweep velocity, couplings and
//! temperature. The transverse bath relaxes excitations left behind by the
//! crossing, which can raise the final ground population well above the
//! coherent value.
//!
//! Everything is expressed in units of Δ (ħ = k_B = 1): velocities in Δ²,
//! temperatures in Δ, times in 1/Δ.
//!
//! ```
//! use lzcool::{analysis, bath, dynamics, model};
//!
//! let p = model::SweepProtocol::with_velocity(10.0)?;
//! let env = bath::Environment::with_couplings(5.0, 0.0, 0.0)?;
//! let traj = dynamics::integrate(&p, &env, &dynamics::IntegratorConfig::default())?;
//! let p_g = analysis::final_ground_population(&traj);
//! // Without coupling the fast sweep lands on the closed-form asymptote.
//! assert!((p_g - analysis::lz_asymptote(10.0, 1.0)).abs() < 1e-2);
//! # Ok::<(), lzcool::Error>(())
//! ```

pub mod analysis;
pub mod bath;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod ode;
pub mod output;

pub use error::{Error, Result};
