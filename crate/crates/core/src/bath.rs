//! Ohmic heat baths and the rotating-frame dissipation rates.
//!
//! Two independent baths couple through σ_x (transverse) and σ_z
//! (longitudinal), each with ohmic spectral density J_ν(ω) = α_ν ω e^{−ω/ω_c,ν}
//! and a shared temperature. In the rotating frame the couplings mix with the
//! weights f1 = ε/E and f2 = Δ/E, producing four rates:
//!
//!   γ_r  = 2π coth(βE/2) (f1² J_x(E) + f2² J_z(E))      relaxation
//!   γ_d  = 4π (α_z + α_x)/β                              pure dephasing
//!   γ_xz = 4π f1 f2 (α_x − α_z)/β                        cross-dephasing
//!   γ_zx = 2π f1 f2 coth(βE/2) (J_x(E) − J_z(E))         cross term
//!
//! together with the thermal target r̄_x = tanh(βE/2). The dephasing terms
//! sample the baths at ω → 0, where the occupation-weighted density has the
//! analytic limit n̄(ω)J(ω) → α/β; it is substituted in closed form rather
//! than evaluated numerically.
//!
//! T = 0 is supported as a limit: β = ∞ makes coth → 1, the α/β terms → 0
//! and r̄_x → 1, which IEEE arithmetic produces without special-casing.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::model::FrameQuantities;

/// Default spectral cutoff ω_c in units of Δ.
pub const DEFAULT_CUTOFF: f64 = 10.0;

/// Which Pauli operator a bath couples to in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathAxis {
    TransverseX,
    LongitudinalZ,
}

/// One ohmic bath: J(ω) = α ω e^{−ω/ω_c}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub axis: BathAxis,
    alpha: f64,
    cutoff: f64,
}

impl BathSpec {
    pub fn new(axis: BathAxis, alpha: f64, cutoff: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::validation(
                "alpha",
                format!("must be non-negative and finite, got {alpha}"),
            ));
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::validation(
                "cutoff",
                format!("must be positive and finite, got {cutoff}"),
            ));
        }
        Ok(BathSpec { axis, alpha, cutoff })
    }

    /// σ_x bath with the default cutoff.
    pub fn transverse(alpha: f64) -> Result<Self> {
        BathSpec::new(BathAxis::TransverseX, alpha, DEFAULT_CUTOFF)
    }

    /// σ_z bath with the default cutoff.
    pub fn longitudinal(alpha: f64) -> Result<Self> {
        BathSpec::new(BathAxis::LongitudinalZ, alpha, DEFAULT_CUTOFF)
    }

    /// σ_x bath with an explicit cutoff.
    pub fn transverse_with_cutoff(alpha: f64, cutoff: f64) -> Result<Self> {
        BathSpec::new(BathAxis::TransverseX, alpha, cutoff)
    }

    /// σ_z bath with an explicit cutoff.
    pub fn longitudinal_with_cutoff(alpha: f64, cutoff: f64) -> Result<Self> {
        BathSpec::new(BathAxis::LongitudinalZ, alpha, cutoff)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// J(ω) = α ω e^{−ω/ω_c} for ω ≥ 0.
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::Domain(format!(
                "spectral density evaluated at negative frequency {omega}"
            )));
        }
        Ok(self.j(omega))
    }

    /// Unchecked spectral density for the integrator hot path; callers
    /// guarantee ω ≥ 0 (the splitting E is always ≥ Δ).
    fn j(&self, omega: f64) -> f64 {
        self.alpha * omega * (-omega / self.cutoff).exp()
    }

    /// Analytic ω → 0 limit of n̄(ω)J(ω), equal to α/β. Returns 0 at T = 0
    /// (β = ∞).
    pub fn zero_frequency_weight(&self, beta: f64) -> f64 {
        self.alpha / beta
    }
}

/// Bose occupation n̄(ω) = 1/(e^{βω} − 1) for ω > 0.
///
/// The ω → 0 case is deliberately excluded; the only place the dynamics
/// needs it is through [`BathSpec::zero_frequency_weight`].
pub fn bose_occupation(beta: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "Bose occupation requires omega > 0, got {omega}"
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "Bose occupation requires beta > 0, got {beta}"
        )));
    }
    Ok(1.0 / ((beta * omega).exp_m1()))
}

/// coth(x) for x > 0, safe against overflow of cosh/sinh at large x.
///
/// For x > 20 the expansion 1 + 2e^{−2x} is exact to f64 precision
/// (the neglected term 2e^{−4x} is below 1e−34).
pub fn coth_safe(x: f64) -> f64 {
    if x > 20.0 {
        1.0 + 2.0 * (-2.0 * x).exp()
    } else {
        1.0 / x.tanh()
    }
}

/// Both baths plus the shared temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    temperature: f64,
    bath_x: BathSpec,
    bath_z: BathSpec,
}

impl Environment {
    pub fn new(temperature: f64, bath_x: BathSpec, bath_z: BathSpec) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::validation(
                "temperature",
                format!("must be non-negative and finite, got {temperature}"),
            ));
        }
        if bath_x.axis != BathAxis::TransverseX {
            return Err(Error::validation("bath_x", "axis must be transverse (x)"));
        }
        if bath_z.axis != BathAxis::LongitudinalZ {
            return Err(Error::validation("bath_z", "axis must be longitudinal (z)"));
        }
        Ok(Environment {
            temperature,
            bath_x,
            bath_z,
        })
    }

    /// Environment with default cutoffs on both baths.
    pub fn with_couplings(temperature: f64, alpha_x: f64, alpha_z: f64) -> Result<Self> {
        Environment::new(
            temperature,
            BathSpec::transverse(alpha_x)?,
            BathSpec::longitudinal(alpha_z)?,
        )
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn bath_x(&self) -> &BathSpec {
        &self.bath_x
    }

    pub fn bath_z(&self) -> &BathSpec {
        &self.bath_z
    }

    /// Inverse temperature; +∞ at T = 0.
    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// Evaluate all four rates and the thermal target at one frame point.
    pub fn rates_at(&self, fq: &FrameQuantities) -> RateSet {
        let beta = self.beta();
        let e = fq.splitting;
        let half_beta_e = 0.5 * beta * e;
        let coth = coth_safe(half_beta_e);
        let jx = self.bath_x.j(e);
        let jz = self.bath_z.j(e);
        let f1 = fq.f1;
        let f2 = fq.f2;
        let wx = self.bath_x.zero_frequency_weight(beta);
        let wz = self.bath_z.zero_frequency_weight(beta);
        RateSet {
            gamma_r: TAU * coth * (f1 * f1 * jx + f2 * f2 * jz),
            gamma_d: 4.0 * PI * (wz + wx),
            gamma_xz: 4.0 * PI * f1 * f2 * (wx - wz),
            gamma_zx: TAU * f1 * f2 * coth * (jx - jz),
            r_bar_x: half_beta_e.tanh(),
            splitting: e,
            phi_dot: fq.phi_dot,
        }
    }
}

/// All rate coefficients entering the Bloch equations at one instant,
/// with the splitting and inertial term carried along.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub gamma_r: f64,
    pub gamma_d: f64,
    /// May be negative; vanishes for identical baths or f1·f2 = 0.
    pub gamma_xz: f64,
    /// May be negative; vanishes for identical baths or f1·f2 = 0.
    pub gamma_zx: f64,
    /// Thermal target tanh(βE/2) pulled on r_x by γ_r.
    pub r_bar_x: f64,
    pub splitting: f64,
    pub phi_dot: f64,
}

impl RateSet {
    /// Rate set of a closed system: precession only.
    pub fn coherent(splitting: f64, phi_dot: f64) -> Self {
        RateSet {
            gamma_r: 0.0,
            gamma_d: 0.0,
            gamma_xz: 0.0,
            gamma_zx: 0.0,
            r_bar_x: 0.0,
            splitting,
            phi_dot,
        }
    }
}
