//! A complete planning input and its TOML document form.
//!
//! ```toml
//! root = "mission"
//!
//! [criteria]          # optional
//! alpha = 0.0
//! beta = 0.5
//! gamma = 0.5
//!
//! [[nodes]]
//! id = "mission"
//! kind = "task"
//! qaf = "and"
//! children = ["a", "b"]
//!
//! [[nodes]]
//! id = "a"
//! kind = "action"
//! location = [1.0, 2.0]  # origin when omitted
//!
//! [[precedence]]
//! before = "a"
//! after = "b"
//!
//! [[robots]]
//! id = "r1"
//! start = [0.0, 0.0]
//! speed = 0.5
//! drive_power = 30.0
//! [robots.actions.a]
//! quality = 1.0
//! duration = 10.0
//! cost = 0.3
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decomposition::{Alternative, Criteria};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::schedule::SchedulingProblem;
use crate::task_model::{
    induced_action_precedence, validate_tree, MissionTree, Node, NodeId, NodeKind, Precedence, Qaf, RobotProfile,
};

#[derive(Debug, Clone)]
pub struct Mission {
    pub tree: MissionTree,
    pub robots: Vec<RobotProfile>,
    /// Service location of each action.
    pub locations: BTreeMap<NodeId, Point>,
    /// Criteria suggested by the mission author.
    pub criteria: Option<Criteria>,
}

impl Mission {
    /// Checks the tree and robot profiles.
    pub fn validate(&self) -> Result<()> {
        let report = validate_tree(&self.tree);
        if !report.is_empty() {
            return Err(Error::Validation(report));
        }
        let mut ids = BTreeSet::new();
        for r in &self.robots {
            if !ids.insert(r.id.as_str()) {
                return Err(Error::InvalidProblem(format!("duplicate robot `{}`", r.id)));
            }
            for a in r.capable_actions() {
                if !self.tree.is_action(a) {
                    return Err(Error::InvalidProblem(format!(
                        "robot `{}` lists `{a}`, which is not an action of the mission",
                        r.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn location(&self, action: &NodeId) -> Point {
        self.locations.get(action).copied().unwrap_or(Point::ORIGIN)
    }

    /// Scheduling problem for the actions of one decomposition.
    pub fn scheduling_problem(&self, alternative: &Alternative) -> Result<SchedulingProblem> {
        let precedence = induced_action_precedence(&self.tree, &alternative.actions);
        let locations: BTreeMap<NodeId, Point> = alternative
            .actions
            .iter()
            .map(|a| (a.clone(), self.location(a)))
            .collect();
        SchedulingProblem::new(
            self.robots.clone(),
            alternative.actions.iter().cloned(),
            &precedence,
            &locations,
        )
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: MissionDoc = toml::from_str(text)?;
        doc.into_mission()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&MissionDoc::from_mission(self)).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MissionDoc {
    root: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    criteria: Option<Criteria>,
    nodes: Vec<NodeDoc>,
    #[serde(default)]
    precedence: Vec<Precedence>,
    #[serde(default)]
    robots: Vec<RobotProfile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: NodeId,
    kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qaf: Option<Qaf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    location: Option<Point>,
}

impl MissionDoc {
    fn into_mission(self) -> Result<Mission> {
        let mut locations = BTreeMap::new();
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| {
                if let Some(p) = n.location {
                    if n.kind == NodeKind::Task {
                        return Err(Error::Parse(format!("task `{}` cannot have a location", n.id)));
                    }
                    locations.insert(n.id.clone(), p);
                }
                Ok(Node {
                    id: n.id,
                    kind: n.kind,
                    qaf: n.qaf,
                    children: n.children,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(c) = &self.criteria {
            c.check()?;
        }
        Ok(Mission {
            tree: MissionTree::new(self.root, nodes, self.precedence),
            robots: self.robots,
            locations,
            criteria: self.criteria,
        })
    }

    fn from_mission(m: &Mission) -> Self {
        Self {
            root: m.tree.root().clone(),
            criteria: m.criteria,
            nodes: m
                .tree
                .nodes()
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    kind: n.kind,
                    qaf: n.qaf,
                    children: n.children.clone(),
                    location: m.locations.get(&n.id).copied(),
                })
                .collect(),
            precedence: m.tree.precedence().to_vec(),
            robots: m.robots.clone(),
        }
    }
}
