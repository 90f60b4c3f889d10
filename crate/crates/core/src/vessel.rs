//! Longitudinal vessel physics.
//!
//! The follower (and, in validation, dynamic leaders) obey a one-dimensional
//! momentum balance
//!
//! ```text
//! m_eff * a = T_prop - W_hyd - W_hull - W_g
//! ```
//!
//! with every force evaluated at the speed relative to the water,
//! `v_rel = speed - stream_speed`. The effective mass is constant and the
//! stream/slope transfer term `W_g` is zero; the stream enters only through
//! `v_rel`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Density of fresh water in kg/m³.
pub const WATER_DENSITY: f64 = 1000.0;

/// Bracket searched by [`equilibrium_speed`] for the relative speed, m/s.
const EQUILIBRIUM_BRACKET: (f64, f64) = (0.0, 20.0);
const EQUILIBRIUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VesselError {
    #[error("degenerate geometry: blockage ratio {blockage:.4} >= 1 (vessel section {vessel_section:.2} m², channel {cross_section:.2} m²)")]
    DegenerateGeometry {
        blockage: f64,
        vessel_section: f64,
        cross_section: f64,
    },
    #[error("no equilibrium speed in [{lo}, {hi}] m/s for power {power} W")]
    NoEquilibrium { power: f64, lo: f64, hi: f64 },
}

/// Physical constants of one vessel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VesselParams {
    /// Displacement mass, kg.
    pub mass: f64,
    /// Length overall, m.
    pub length: f64,
    /// Beam (width), m.
    pub beam: f64,
    /// Draft, m.
    pub draft: f64,
    /// Maximum engine power, W.
    pub max_power: f64,
    /// Hydrodynamic added mass as a fraction of `mass`.
    pub added_mass_fraction: f64,
    /// Power-to-thrust conversion efficiency.
    pub prop_efficiency: f64,
    /// Frontal (pressure) drag coefficient on the submerged midship section.
    pub drag_coeff_frontal: f64,
    /// Skin friction coefficient on the wetted hull surface.
    pub friction_coeff_hull: f64,
    /// Shallow-water friction amplification constant.
    pub shallow_water_coeff: f64,
    /// Relative speed below which thrust saturates (bollard condition), m/s.
    pub thrust_speed_floor: f64,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            mass: 3.174e6,
            length: 110.0,
            beam: 11.4,
            draft: 2.8,
            max_power: 1.0e6,
            added_mass_fraction: 0.05,
            prop_efficiency: 0.6,
            drag_coeff_frontal: 0.15,
            friction_coeff_hull: 0.002,
            shallow_water_coeff: 1.0,
            thrust_speed_floor: 1.0,
        }
    }
}

impl VesselParams {
    pub fn effective_mass(&self) -> f64 {
        self.mass * (1.0 + self.added_mass_fraction)
    }

    /// Submerged midship section `beam * draft`, m².
    pub fn submerged_section(&self) -> f64 {
        self.beam * self.draft
    }

    /// Wetted hull surface of a box-shaped hull, m².
    pub fn wetted_surface(&self) -> f64 {
        self.length * (self.beam + 2.0 * self.draft)
    }

    /// Checks the positivity constraints on every field.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("mass", self.mass),
            ("length", self.length),
            ("beam", self.beam),
            ("draft", self.draft),
            ("max_power", self.max_power),
            ("prop_efficiency", self.prop_efficiency),
            ("drag_coeff_frontal", self.drag_coeff_frontal),
            ("friction_coeff_hull", self.friction_coeff_hull),
            ("thrust_speed_floor", self.thrust_speed_floor),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("vessel.{name} must be positive, got {value}"));
            }
        }
        if !(self.added_mass_fraction >= 0.0) {
            return Err("vessel.added_mass_fraction must be >= 0".into());
        }
        if !(self.shallow_water_coeff >= 0.0) {
            return Err("vessel.shallow_water_coeff must be >= 0".into());
        }
        Ok(())
    }
}

/// Kinematic state of a vessel. `position` is the bow position along the
/// river axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VesselState {
    pub position: f64,
    pub speed: f64,
    pub power: f64,
}

/// River at a vessel's position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiverConditions {
    /// Clearance between keel and riverbed, m.
    pub depth_below_keel: f64,
    /// Wetted channel cross-section, m².
    pub cross_section: f64,
    /// Current along the axis of travel, m/s (positive = downstream travel).
    pub stream_speed: f64,
}

impl RiverConditions {
    pub fn new(depth_below_keel: f64, cross_section: f64, stream_speed: f64) -> Self {
        Self {
            depth_below_keel,
            cross_section,
            stream_speed,
        }
    }
}

/// Forces acting on a vessel, N. Drag terms carry the sign of `v_rel`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceBreakdown {
    pub thrust: f64,
    pub drag_hydro: f64,
    pub drag_hull: f64,
    pub stream_transfer: f64,
}

impl ForceBreakdown {
    pub fn net(&self) -> f64 {
        self.thrust - self.drag_hydro - self.drag_hull - self.stream_transfer
    }
}

/// Propeller thrust for a delivered engine power.
pub fn thrust(power: f64, v_rel: f64, params: &VesselParams) -> f64 {
    let power = power.max(0.0);
    params.prop_efficiency * power / v_rel.max(params.thrust_speed_floor)
}

/// Frontal drag (with channel blockage) and hull friction (with shallow-water
/// amplification), both odd in `v_rel`.
pub fn resistance(
    v_rel: f64,
    river: &RiverConditions,
    params: &VesselParams,
) -> Result<(f64, f64), VesselError> {
    let section = params.submerged_section();
    let blockage = section / river.cross_section;
    if !(0.0..1.0).contains(&blockage) {
        return Err(VesselError::DegenerateGeometry {
            blockage,
            vessel_section: section,
            cross_section: river.cross_section,
        });
    }
    let dynamic = 0.5 * WATER_DENSITY * v_rel * v_rel.abs();
    let drag_hydro =
        dynamic * params.drag_coeff_frontal * section / ((1.0 - blockage) * (1.0 - blockage));
    let shallow =
        1.0 + params.shallow_water_coeff / (1.0 + river.depth_below_keel.max(0.0) / params.draft);
    let drag_hull = dynamic * params.friction_coeff_hull * params.wetted_surface() * shallow;
    Ok((drag_hydro, drag_hull))
}

/// Full force balance at the given state.
pub fn forces(
    state: &VesselState,
    river: &RiverConditions,
    params: &VesselParams,
) -> Result<ForceBreakdown, VesselError> {
    let v_rel = state.speed - river.stream_speed;
    let (drag_hydro, drag_hull) = resistance(v_rel, river, params)?;
    Ok(ForceBreakdown {
        thrust: thrust(state.power, v_rel, params),
        drag_hydro,
        drag_hull,
        stream_transfer: 0.0,
    })
}

/// Longitudinal acceleration, m/s².
pub fn net_acceleration(
    state: &VesselState,
    river: &RiverConditions,
    params: &VesselParams,
) -> Result<f64, VesselError> {
    Ok(forces(state, river, params)?.net() / params.effective_mass())
}

/// Euler update of speed, ballistic update of position. Power is carried over.
pub fn step(state: &VesselState, accel: f64, dt: f64) -> VesselState {
    let speed = state.speed + accel * dt;
    VesselState {
        position: state.position + 0.5 * (state.speed + speed) * dt,
        speed,
        power: state.power,
    }
}

/// Ground speed at which the vessel holds `power` without accelerating.
pub fn equilibrium_speed(
    power: f64,
    river: &RiverConditions,
    params: &VesselParams,
) -> Result<f64, VesselError> {
    let accel_at = |v_rel: f64| -> Result<f64, VesselError> {
        let state = VesselState {
            position: 0.0,
            speed: v_rel + river.stream_speed,
            power,
        };
        net_acceleration(&state, river, params)
    };
    let (mut lo, mut hi) = EQUILIBRIUM_BRACKET;
    let a_lo = accel_at(lo)?;
    if a_lo == 0.0 {
        return Ok(lo + river.stream_speed);
    }
    let a_hi = accel_at(hi)?;
    if !(a_lo > 0.0 && a_hi < 0.0) {
        return Err(VesselError::NoEquilibrium { power, lo, hi });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let a = accel_at(mid)?;
        if a.abs() < EQUILIBRIUM_TOLERANCE {
            break;
        }
        if a > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid + river.stream_speed)
}

/// Engine power that holds ground speed `speed` steady, clamped to
/// `[0, max_power]`.
pub fn equilibrium_power(
    speed: f64,
    river: &RiverConditions,
    params: &VesselParams,
) -> Result<f64, VesselError> {
    let v_rel = speed - river.stream_speed;
    let (hydro, hull) = resistance(v_rel, river, params)?;
    let power = (hydro + hull) * v_rel.max(params.thrust_speed_floor) / params.prop_efficiency;
    Ok(power.clamp(0.0, params.max_power))
}
