//! Scenario description: initial module poses, helper ids, target topology
//! and optional configuration overrides.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::assignment::ModuleSet;
use crate::config::{Config, PartialConfig};
use crate::layout::{check_unfoldable, MODULE_WIDTH};
use crate::math::Pose2;
use crate::topology::{ConfigGraph, ModuleId};

/// A self-assembly task: world poses of all modules (helpers included),
/// which of them are helpers, and the target topology. The `seed` is carried
/// for randomized scenario generators only; execution is deterministic.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scenario {
    pub modules: BTreeMap<ModuleId, Pose2>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub helpers: Vec<ModuleId>,
    pub target: ConfigGraph,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub config: Option<PartialConfig>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub seed: Option<u64>,
}

/// One validation failure with the offending field path.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioIssues(pub Vec<ScenarioIssue>);

impl fmt::Display for ScenarioIssues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for issue in &self.0 {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
            first = false;
        }
        Ok(())
    }
}

impl core::error::Error for ScenarioIssues {}

impl Scenario {
    /// The assembly team: all modules except helpers.
    pub fn assembly_module_set(&self) -> ModuleSet {
        ModuleSet::from_poses(
            self.modules
                .iter()
                .filter(|(id, _)| !self.helpers.contains(id))
                .map(|(&id, &p)| (id, p))
                .collect(),
        )
    }

    /// Effective configuration: scenario overrides applied on a base. Apply
    /// any `--config` file overrides afterwards, they take precedence.
    pub fn apply_overrides(&self, mut base: Config) -> Config {
        if let Some(partial) = &self.config {
            partial.apply_to(&mut base);
        }
        base
    }

    /// Validate against the effective configuration; every failure carries
    /// the offending field path.
    pub fn validate(&self, config: &Config) -> Result<(), ScenarioIssues> {
        let mut issues = Vec::new();

        for (i, helper) in self.helpers.iter().enumerate() {
            if !self.modules.contains_key(helper) {
                issues.push(ScenarioIssue {
                    path: format!("helpers[{i}]"),
                    message: format!("helper {helper} has no pose in modules"),
                });
            }
            if self.helpers[..i].contains(helper) {
                issues.push(ScenarioIssue {
                    path: format!("helpers[{i}]"),
                    message: format!("helper {helper} listed twice"),
                });
            }
        }

        let team = self.modules.len()
            - self
                .helpers
                .iter()
                .filter(|h| self.modules.contains_key(h))
                .count();
        if team != self.target.len() {
            issues.push(ScenarioIssue {
                path: String::from("modules"),
                message: format!(
                    "{team} assembly modules, but the target has {} vertices",
                    self.target.len()
                ),
            });
        }

        let entries: Vec<(&ModuleId, &Pose2)> = self.modules.iter().collect();
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                let d = entries[i].1.position().distance(entries[j].1.position());
                if d <= MODULE_WIDTH {
                    issues.push(ScenarioIssue {
                        path: format!("modules.{}/{}", entries[i].0, entries[j].0),
                        message: format!(
                            "initial spacing {d:.3} m must exceed the module width {MODULE_WIDTH} m"
                        ),
                    });
                }
            }
        }

        let report = check_unfoldable(&self.target);
        for violation in &report.topology.violations {
            issues.push(ScenarioIssue {
                path: String::from("target"),
                message: format!("{violation}"),
            });
        }
        for (a, b) in &report.overlaps {
            issues.push(ScenarioIssue {
                path: String::from("target"),
                message: format!("unfolding places modules {a} and {b} on the same location"),
            });
        }

        if let Err(e) = config.validate() {
            issues.push(ScenarioIssue {
                path: String::from("config"),
                message: format!("{e}"),
            });
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ScenarioIssues(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Face;

    fn chain_target(n: u32) -> ConfigGraph {
        ConfigGraph::from_edges(
            0..n,
            (0..n - 1).map(|i| (i, Face::Top, i + 1, Face::Bottom)),
        )
        .unwrap()
    }

    fn scenario(poses: &[(u32, f64, f64)], helpers: &[u32], n_target: u32) -> Scenario {
        Scenario {
            modules: poses
                .iter()
                .map(|&(id, x, y)| (ModuleId(id), Pose2::new(x, y, 0.0)))
                .collect(),
            helpers: helpers.iter().map(|&h| ModuleId(h)).collect(),
            target: chain_target(n_target),
            config: None,
            seed: None,
        }
    }

    #[test]
    fn valid_scenario_passes() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.5, 0.0), (2, 1.0, 0.0)], &[], 3);
        s.validate(&Config::default()).unwrap();
    }

    #[test]
    fn count_mismatch_is_reported_with_path() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.5, 0.0)], &[], 3);
        let err = s.validate(&Config::default()).unwrap_err();
        assert!(err.0.iter().any(|i| i.path == "modules"));
    }

    #[test]
    fn close_spacing_is_reported() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.05, 0.0), (2, 1.0, 0.0)], &[], 3);
        let err = s.validate(&Config::default()).unwrap_err();
        assert!(err.0.iter().any(|i| i.path == "modules.0/1"));
    }

    #[test]
    fn helpers_do_not_count_toward_the_team() {
        let s = scenario(
            &[(0, 0.0, 0.0), (1, 0.5, 0.0), (2, 1.0, 0.0), (9, 2.0, 0.0)],
            &[9],
            3,
        );
        s.validate(&Config::default()).unwrap();
        assert_eq!(s.assembly_module_set().len(), 3);

        let unknown_helper = scenario(&[(0, 0.0, 0.0)], &[7], 1);
        let err = unknown_helper.validate(&Config::default()).unwrap_err();
        assert!(err.0.iter().any(|i| i.path == "helpers[0]"));
    }

    #[cfg(feature = "serde")]
    #[test]
    fn scenario_json_round_trip() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.5, 0.25)], &[], 2);
        let json = serde_json::to_string_pretty(&s).unwrap();
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }
}
