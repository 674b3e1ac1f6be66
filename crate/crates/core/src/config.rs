//! Gains, limits and tolerances for motion and simulation, with partial
//! overrides for scenario files and config files. All values SI.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::motion::{AdjustParams, ApproachParams, FollowParams, Limits};

/// `motion.*` keys: controller gains, speed limits and alignment tolerances.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotionConfig {
    /// Navigation speed limit (m/s).
    pub v_max: f64,
    /// Angular speed limit (rad/s).
    pub omega_max: f64,
    /// Constant approach speed while docking (m/s).
    pub v_dock: f64,
    /// Linear saturation during pose adjustment; the alignment law needs
    /// more headroom than grid driving, see `k_adjust`.
    pub adjust_v_max: f64,
    pub adjust_omega_max: f64,
    /// Diagonal of the 2x2 alignment gain.
    pub k_adjust: [f64; 2],
    /// Singular band on |sin th'| below which the law saturates.
    pub eps_singular: f64,
    /// Rotation rate injected inside the singular band (rad/s).
    pub nudge_omega: f64,
    /// Heading feedback for path following, pre-rotation and approach.
    pub heading_gain: f64,
    /// Waypoint capture radius (m).
    pub capture_radius: f64,
    /// Tighter capture for the final standoff point before docking (m).
    pub standoff_capture_m: f64,
    /// Turn in place above this heading error (rad).
    pub turn_threshold: f64,
    /// Alignment complete below these offsets.
    pub align_tol_m: f64,
    pub align_tol_rad: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            v_max: 0.1,
            omega_max: 1.0,
            v_dock: 0.03,
            adjust_v_max: 0.5,
            adjust_omega_max: 1.0,
            k_adjust: [2.0, 1.0],
            eps_singular: 0.02,
            nudge_omega: 0.2,
            heading_gain: 2.0,
            capture_radius: 0.02,
            standoff_capture_m: 0.005,
            turn_threshold: 0.3,
            align_tol_m: 0.001,
            align_tol_rad: 0.01,
        }
    }
}

/// `sim.*` keys: docking acceptance, retries, grid extent and safety checks.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Cells of free margin around the covered extent.
    pub grid_padding_cells: i32,
    /// Magnetic area of acceptance: normal gap, lateral offset, face angle.
    pub dock_normal_tol_m: f64,
    pub dock_lateral_tol_m: f64,
    pub dock_angle_tol_rad: f64,
    /// Pose adjustment reruns after an aborted approach, then the run fails.
    pub dock_retries: u32,
    pub wave_timeout_s: f64,
    /// Body overlap beyond this is a collision (m).
    pub contact_tol_m: f64,
    /// Obstacle clearance radius while a helper carries a module (m).
    pub carrier_clearance_m: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid_padding_cells: 2,
            dock_normal_tol_m: 0.004,
            dock_lateral_tol_m: 0.007,
            dock_angle_tol_rad: 0.1,
            dock_retries: 3,
            wave_timeout_s: 240.0,
            contact_tol_m: 0.001,
            carrier_clearance_m: 0.20,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Config {
    pub motion: MotionConfig,
    pub sim: SimConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl core::error::Error for ConfigError {}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.motion;
        let s = &self.sim;
        let positives = [
            ("motion.v_max", m.v_max),
            ("motion.omega_max", m.omega_max),
            ("motion.v_dock", m.v_dock),
            ("motion.adjust_v_max", m.adjust_v_max),
            ("motion.adjust_omega_max", m.adjust_omega_max),
            ("motion.k_adjust[0]", m.k_adjust[0]),
            ("motion.k_adjust[1]", m.k_adjust[1]),
            ("motion.eps_singular", m.eps_singular),
            ("motion.nudge_omega", m.nudge_omega),
            ("motion.heading_gain", m.heading_gain),
            ("motion.capture_radius", m.capture_radius),
            ("motion.standoff_capture_m", m.standoff_capture_m),
            ("motion.turn_threshold", m.turn_threshold),
            ("motion.align_tol_m", m.align_tol_m),
            ("motion.align_tol_rad", m.align_tol_rad),
            ("sim.dock_normal_tol_m", s.dock_normal_tol_m),
            ("sim.dock_lateral_tol_m", s.dock_lateral_tol_m),
            ("sim.dock_angle_tol_rad", s.dock_angle_tol_rad),
            ("sim.wave_timeout_s", s.wave_timeout_s),
            ("sim.contact_tol_m", s.contact_tol_m),
            ("sim.carrier_clearance_m", s.carrier_clearance_m),
        ];
        for (name, value) in positives {
            if !value.is_finite() || value <= 0.0 {
                return Err(ConfigError(format!("{name} must be positive, got {value}")));
            }
        }
        if s.grid_padding_cells < 0 {
            return Err(ConfigError(String::from(
                "sim.grid_padding_cells must be non-negative",
            )));
        }
        if s.dock_retries == 0 {
            return Err(ConfigError(String::from(
                "sim.dock_retries must be at least 1",
            )));
        }
        Ok(())
    }

    pub fn adjust_params(&self) -> AdjustParams {
        let m = &self.motion;
        AdjustParams {
            k: [[m.k_adjust[0], 0.0], [0.0, m.k_adjust[1]]],
            eps_singular: m.eps_singular,
            nudge_omega: m.nudge_omega,
            align_tol: m.align_tol_m,
            limits: Limits {
                v_max: m.adjust_v_max,
                omega_max: m.adjust_omega_max,
            },
        }
    }

    pub fn approach_params(&self) -> ApproachParams {
        ApproachParams {
            v_dock: self.motion.v_dock,
            heading_gain: self.motion.heading_gain,
            lateral_band: self.sim.dock_lateral_tol_m,
            omega_max: self.motion.omega_max,
        }
    }

    pub fn follow_params(&self) -> FollowParams {
        let m = &self.motion;
        FollowParams {
            capture_radius: m.capture_radius,
            turn_threshold: m.turn_threshold,
            heading_gain: m.heading_gain,
            limits: Limits {
                v_max: m.v_max,
                omega_max: m.omega_max,
            },
        }
    }
}

macro_rules! apply_fields {
    ($src:expr, $dst:expr, [$($field:ident),* $(,)?]) => {
        $(if let Some(v) = $src.$field {
            $dst.$field = v;
        })*
    };
}

/// Sparse override of [`MotionConfig`].
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PartialMotionConfig {
    pub v_max: Option<f64>,
    pub omega_max: Option<f64>,
    pub v_dock: Option<f64>,
    pub adjust_v_max: Option<f64>,
    pub adjust_omega_max: Option<f64>,
    pub k_adjust: Option<[f64; 2]>,
    pub eps_singular: Option<f64>,
    pub nudge_omega: Option<f64>,
    pub heading_gain: Option<f64>,
    pub capture_radius: Option<f64>,
    pub standoff_capture_m: Option<f64>,
    pub turn_threshold: Option<f64>,
    pub align_tol_m: Option<f64>,
    pub align_tol_rad: Option<f64>,
}

/// Sparse override of [`SimConfig`].
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PartialSimConfig {
    pub grid_padding_cells: Option<i32>,
    pub dock_normal_tol_m: Option<f64>,
    pub dock_lateral_tol_m: Option<f64>,
    pub dock_angle_tol_rad: Option<f64>,
    pub dock_retries: Option<u32>,
    pub wave_timeout_s: Option<f64>,
    pub contact_tol_m: Option<f64>,
    pub carrier_clearance_m: Option<f64>,
}

/// Sparse override of a whole [`Config`], as found in scenario files and
/// `--config` files.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PartialConfig {
    pub motion: Option<PartialMotionConfig>,
    pub sim: Option<PartialSimConfig>,
}

impl PartialConfig {
    pub fn apply_to(&self, config: &mut Config) {
        if let Some(m) = &self.motion {
            apply_fields!(
                m.clone(),
                config.motion,
                [
                    v_max,
                    omega_max,
                    v_dock,
                    adjust_v_max,
                    adjust_omega_max,
                    k_adjust,
                    eps_singular,
                    nudge_omega,
                    heading_gain,
                    capture_radius,
                    standoff_capture_m,
                    turn_threshold,
                    align_tol_m,
                    align_tol_rad,
                ]
            );
        }
        if let Some(s) = &self.sim {
            apply_fields!(
                s.clone(),
                config.sim,
                [
                    grid_padding_cells,
                    dock_normal_tol_m,
                    dock_lateral_tol_m,
                    dock_angle_tol_rad,
                    dock_retries,
                    wave_timeout_s,
                    contact_tol_m,
                    carrier_clearance_m,
                ]
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn partial_override_touches_only_named_fields() {
        let mut cfg = Config::default();
        let partial = PartialConfig {
            motion: Some(PartialMotionConfig {
                v_max: Some(0.25),
                ..Default::default()
            }),
            sim: Some(PartialSimConfig {
                dock_retries: Some(5),
                ..Default::default()
            }),
        };
        partial.apply_to(&mut cfg);
        assert_eq!(cfg.motion.v_max, 0.25);
        assert_eq!(cfg.sim.dock_retries, 5);
        assert_eq!(cfg.motion.v_dock, MotionConfig::default().v_dock);
    }

    #[test]
    fn validation_rejects_nonpositive_values() {
        let mut cfg = Config::default();
        cfg.motion.v_max = 0.0;
        assert!(cfg.validate().is_err());
    }
}
