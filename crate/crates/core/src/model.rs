//! Drive protocol and rotating-frame quantities.
//!
//! Units: the tunneling amplitude Δ sets the scale, with ħ = k_B = 1 and
//! Δ = 1 numerically. Velocities are quoted in Δ², temperatures in Δ and
//! times in 1/Δ. No dimensional constants appear in any formula.
//!
//! The lab-frame Hamiltonian is H = −(ε(t)/2)σ_z − (Δ/2)σ_x with the
//! linear drive ε(t) = v·t + ε₀. Rotating by R(t) = exp(iφ(t)σ_y/2) with
//! mixing angle φ = atan(ε/Δ) diagonalizes the instantaneous part and
//! leaves H̃ = −(E/2)σ_x + (φ̇/2)σ_y, where E = sqrt(Δ² + ε²) is the
//! instantaneous splitting and φ̇ = vΔ/E² the inertial term.

use crate::error::{Error, Result};

/// Tunneling amplitude Δ; the unit of energy throughout.
pub const DELTA: f64 = 1.0;

/// Default half-window drive extent v·t₀ in units of Δ.
pub const DEFAULT_SPAN_PRODUCT: f64 = 80.0;

/// Linear sweep ε(t) = v·t + ε₀ over the window t ∈ [−t₀, t₀] with
/// t₀ = span_product / v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepProtocol {
    velocity: f64,
    offset: f64,
    span_product: f64,
}

impl SweepProtocol {
    /// Validated constructor; `velocity` and `span_product` must be positive
    /// and finite, `offset` finite.
    pub fn new(velocity: f64, offset: f64, span_product: f64) -> Result<Self> {
        if !(velocity > 0.0) || !velocity.is_finite() {
            return Err(Error::validation(
                "velocity",
                format!("must be positive and finite, got {velocity}"),
            ));
        }
        if !(span_product > 0.0) || !span_product.is_finite() {
            return Err(Error::validation(
                "span_product",
                format!("must be positive and finite, got {span_product}"),
            ));
        }
        if !offset.is_finite() {
            return Err(Error::validation(
                "offset",
                format!("must be finite, got {offset}"),
            ));
        }
        Ok(SweepProtocol {
            velocity,
            offset,
            span_product,
        })
    }

    /// Sweep with default window (v·t₀ = 80Δ) and zero offset.
    pub fn with_velocity(velocity: f64) -> Result<Self> {
        SweepProtocol::new(velocity, 0.0, DEFAULT_SPAN_PRODUCT)
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn span_product(&self) -> f64 {
        self.span_product
    }

    /// Half-duration of the sweep window, t₀ = span_product / v.
    pub fn t0(&self) -> f64 {
        self.span_product / self.velocity
    }

    /// Largest splitting over the window, reached at an edge. Sets the
    /// fastest precession timescale and hence the integrator step cap.
    pub fn max_splitting(&self) -> f64 {
        let lo = self.evaluate_drive(-self.t0()).abs();
        let hi = self.evaluate_drive(self.t0()).abs();
        DELTA.hypot(lo.max(hi))
    }

    /// Drive value ε(t) = v·t + ε₀.
    pub fn evaluate_drive(&self, t: f64) -> f64 {
        self.velocity * t + self.offset
    }

    /// All rotating-frame quantities at time t.
    pub fn frame_at(&self, t: f64) -> FrameQuantities {
        frame_from_drive(t, self.evaluate_drive(t), self.velocity)
    }
}

/// Instantaneous rotating-frame quantities at one time.
///
/// f1 = sinφ = ε/E and f2 = cosφ = Δ/E weight the longitudinal and
/// transverse bath couplings; φ̇ = vΔ/E² is the inertial term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameQuantities {
    pub t: f64,
    /// Drive ε(t).
    pub eps: f64,
    /// Splitting E = sqrt(Δ² + ε²) ≥ Δ.
    pub splitting: f64,
    /// Mixing angle φ = atan(ε/Δ) ∈ (−π/2, π/2).
    pub phi: f64,
    /// Analytic dφ/dt = ε̇·Δ/E².
    pub phi_dot: f64,
    /// sinφ = ε/E.
    pub f1: f64,
    /// cosφ = Δ/E.
    pub f2: f64,
}

/// Frame quantities for an arbitrary drive value and rate of change.
/// `eps_dot` is dε/dt (the sweep velocity for a linear drive).
pub fn frame_from_drive(t: f64, eps: f64, eps_dot: f64) -> FrameQuantities {
    let splitting = DELTA.hypot(eps);
    FrameQuantities {
        t,
        eps,
        splitting,
        phi: (eps / DELTA).atan(),
        phi_dot: eps_dot * DELTA / (splitting * splitting),
        f1: eps / splitting,
        f2: DELTA / splitting,
    }
}

/// Frame quantities for a drive pinned at a fixed ε (φ̇ = 0). Used to probe
/// the static fixed point of the dissipative dynamics.
pub fn frame_static(eps: f64) -> FrameQuantities {
    frame_from_drive(0.0, eps, 0.0)
}
