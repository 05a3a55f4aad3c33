//! Greenhouse maintenance benchmark.
//!
//! Eight tables on a 4 x 2 grid hold 20 plants in five batches. Each plant
//! is processed either at the workspace by the stationary arm, with a UGV
//! carrying it there and back, or in place by a mobile manipulator working
//! from both sides of its table.
//!
//! Layout, in meters: table `k` is centered at
//! `(2.5 + 3.5 * (k % 4), 4.0 + 5.0 * (k / 4))`. A plant at row `r`, column
//! `c` of its table sits at `(cx + (c - 0.5) * 0.6, cy + (0.5 - r) * 0.8)`,
//! and the mobile manipulator serves it from `cx -/+ 1.0` at the plant's `y`.
//! The workspace is at `(8.0, 0.5)`.
//!
//! Action model:
//! - `o` and `i` (UGV): fetch to and return from the workspace. Duration is
//!   the round trip plant/workspace at UGV speed plus a handling time; cost
//!   is duration times UGV drive power. Both are located at the workspace, so
//!   the UGV's route only moves it there from its depot.
//! - `prep`, `ready` (stationary arm): a fixed synchronization duration.
//! - `op` (stationary arm): all unit operations of the plant.
//! - `l`, `r` (mobile manipulator): the unit operations of one side, costed
//!   at the mobile base power.
//!
//! Stationary arm work is costed at a manipulation power that defaults to 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomposition::{Alternative, Criteria};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mission::Mission;
use crate::task_model::{MissionTree, Node, NodeId, Outcome, Precedence, Qaf, RobotProfile};

pub const ROOT: &str = "greenhouse";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    /// `table.row.column`
    pub id: String,
    pub batch: String,
    pub left: u32,
    pub right: u32,
}

impl PlantSpec {
    fn new(id: &str, batch: &str, left: u32, right: u32) -> Self {
        Self {
            id: id.into(),
            batch: batch.into(),
            left,
            right,
        }
    }

    pub fn units(&self) -> u32 {
        self.left + self.right
    }

    fn slot(&self) -> Result<(usize, usize, usize)> {
        let parts: Vec<&str> = self.id.split('.').collect();
        let bad = || Error::InvalidParameter(format!("plant id `{}` is not table.row.column", self.id));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n = |s: &str| s.parse::<usize>().map_err(|_| bad());
        Ok((n(parts[0])?, n(parts[1])?, n(parts[2])?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreenhouseConfig {
    pub n_tables: usize,
    pub plants_per_table: usize,
    pub batch_labels: Vec<String>,
    /// s
    pub unit_op_duration: f64,
    /// s, added to every transport
    pub handling_time: f64,
    /// s, duration of `prep` and `ready`
    pub sync_duration: f64,
    /// W drawn by the stationary arm while working
    pub manipulation_power: f64,
    /// W drawn by the mobile manipulator while working on a plant
    pub mobile_work_power: f64,
    pub ugv_speed: f64,
    pub ugv_power: f64,
    pub mobile_speed: f64,
    pub mobile_power: f64,
    /// Table centers.
    pub tables: Vec<Point>,
    pub column_spacing: f64,
    pub row_spacing: f64,
    /// Distance from a table center to the mobile manipulator's work points.
    pub side_offset: f64,
    pub workspace: Point,
    pub ugv_depots: Vec<Point>,
    pub mobile_depots: Vec<Point>,
    pub plants: Vec<PlantSpec>,
}

impl Default for GreenhouseConfig {
    fn default() -> Self {
        let tables = (0..8)
            .map(|k| Point::new(2.5 + 3.5 * (k % 4) as f64, 4.0 + 5.0 * (k / 4) as f64))
            .collect();
        let plants = [
            ("0.0.0", "A", 5, 1),
            ("0.0.1", "A", 3, 4),
            ("0.1.0", "B", 2, 6),
            ("1.0.0", "A", 8, 7),
            ("1.0.1", "B", 4, 3),
            ("1.1.1", "C", 6, 9),
            ("2.0.0", "C", 9, 6),
            ("2.1.0", "B", 3, 3),
            ("2.1.1", "D", 7, 8),
            ("3.0.1", "C", 2, 5),
            ("3.1.0", "D", 4, 4),
            ("3.1.1", "E", 1, 3),
            ("4.0.0", "A", 6, 2),
            ("4.1.1", "B", 3, 5),
            ("5.0.0", "D", 5, 5),
            ("5.1.0", "E", 2, 2),
            ("6.0.1", "E", 4, 6),
            ("6.1.0", "C", 3, 7),
            ("7.0.0", "D", 6, 3),
            ("7.1.1", "E", 5, 4),
        ]
        .into_iter()
        .map(|(id, b, l, r)| PlantSpec::new(id, b, l, r))
        .collect();
        Self {
            n_tables: 8,
            plants_per_table: 4,
            batch_labels: ["A", "B", "C", "D", "E"].map(String::from).to_vec(),
            unit_op_duration: 10.0,
            handling_time: 5.0,
            sync_duration: 5.0,
            manipulation_power: 0.0,
            mobile_work_power: 400.0,
            ugv_speed: 0.5,
            ugv_power: 30.0,
            mobile_speed: 0.5,
            mobile_power: 400.0,
            tables,
            column_spacing: 0.6,
            row_spacing: 0.8,
            side_offset: 1.0,
            workspace: Point::new(8.0, 0.5),
            ugv_depots: vec![Point::new(7.0, 0.5), Point::new(9.0, 0.5)],
            mobile_depots: vec![Point::new(1.0, 0.5), Point::new(15.0, 0.5)],
            plants,
        }
    }
}

impl GreenhouseConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.tables.len() != self.n_tables {
            return bad(format!(
                "{} table centers for {} tables",
                self.tables.len(),
                self.n_tables
            ));
        }
        if self.plants_per_table == 0 || !self.plants_per_table.is_multiple_of(2) {
            return bad("plants_per_table must be a positive even number".into());
        }
        for v in [
            self.unit_op_duration,
            self.handling_time,
            self.sync_duration,
            self.manipulation_power,
            self.mobile_work_power,
            self.ugv_power,
            self.mobile_power,
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("durations and powers must be nonnegative, got {v}"));
            }
        }
        if !(self.ugv_speed > 0.0 && self.mobile_speed > 0.0) {
            return bad("speeds must be positive".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.plants {
            let (t, r, c) = p.slot()?;
            if t >= self.n_tables || r * 2 + c >= self.plants_per_table || c >= 2 {
                return bad(format!("plant `{}` is outside the greenhouse", p.id));
            }
            if !seen.insert(&p.id) {
                return bad(format!("plant `{}` listed twice", p.id));
            }
            if !self.batch_labels.contains(&p.batch) {
                return bad(format!("plant `{}` has unknown batch `{}`", p.id, p.batch));
            }
        }
        Ok(())
    }

    pub fn plant(&self, id: &str) -> Option<&PlantSpec> {
        self.plants.iter().find(|p| p.id == id)
    }

    pub fn plant_location(&self, plant: &PlantSpec) -> Result<Point> {
        let (t, r, c) = plant.slot()?;
        let center = self.tables[t];
        Ok(Point::new(
            center.x + (c as f64 - 0.5) * self.column_spacing,
            center.y + (0.5 - r as f64) * self.row_spacing,
        ))
    }

    /// Mobile manipulator work points on the left and right of the plant.
    pub fn side_points(&self, plant: &PlantSpec) -> Result<(Point, Point)> {
        let (t, ..) = plant.slot()?;
        let y = self.plant_location(plant)?.y;
        let cx = self.tables[t].x;
        Ok((
            Point::new(cx - self.side_offset, y),
            Point::new(cx + self.side_offset, y),
        ))
    }

    /// Duration of one UGV transport between the plant and the workspace.
    pub fn transport_duration(&self, plant: &PlantSpec) -> Result<f64> {
        let d = self.plant_location(plant)?.distance(&self.workspace);
        Ok(2.0 * d / self.ugv_speed + self.handling_time)
    }
}

/// Robot team and makespan/cost importance (percent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub mobile: usize,
    pub stationary: usize,
    pub ugv: usize,
    pub importance: (f64, f64),
}

impl FleetSpec {
    pub fn criteria(&self) -> Result<Criteria> {
        Criteria::from_importance(self.importance.0, self.importance.1)
    }

    pub fn n_robots(&self) -> usize {
        self.mobile + self.stationary + self.ugv
    }
}

/// The five benchmark teams. Setups 1 and 2 carry no importance of their
/// own and use an even split.
pub fn setup(n: usize) -> Result<FleetSpec> {
    let f = |mobile, stationary, ugv, m, c| FleetSpec {
        mobile,
        stationary,
        ugv,
        importance: (m, c),
    };
    match n {
        1 => Ok(f(0, 1, 2, 50.0, 50.0)),
        2 => Ok(f(2, 0, 0, 50.0, 50.0)),
        3 => Ok(f(1, 1, 1, 0.0, 100.0)),
        4 => Ok(f(1, 1, 1, 50.0, 50.0)),
        5 => Ok(f(1, 1, 1, 100.0, 0.0)),
        _ => Err(Error::InvalidParameter(format!("no setup {n}; expected 1 to 5"))),
    }
}

/// Node ids of one plant's fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantNodes {
    pub process: NodeId,
    pub stationary: NodeId,
    pub mobile: NodeId,
    pub deliver: NodeId,
    pub prep: NodeId,
    pub op: NodeId,
    pub ready: NodeId,
    pub collect: NodeId,
    pub left: NodeId,
    pub right: NodeId,
}

impl PlantNodes {
    pub fn new(plant: &PlantSpec) -> Self {
        let (p, b) = (&plant.id, &plant.batch);
        let id = |s: String| NodeId::new(s);
        Self {
            process: id(format!("{p}/process_{b}")),
            stationary: id(format!("{p}/stationary")),
            mobile: id(format!("{p}/mobile")),
            deliver: id(format!("{p}/o_{b}")),
            prep: id(format!("{p}/{b}_prep")),
            op: id(format!("{p}/{b}")),
            ready: id(format!("{p}/{b}_ready")),
            collect: id(format!("{p}/i_{b}")),
            left: id(format!("{p}/l_{b}")),
            right: id(format!("{p}/r_{b}")),
        }
    }

    pub fn stationary_actions(&self) -> [&NodeId; 5] {
        [&self.deliver, &self.prep, &self.op, &self.ready, &self.collect]
    }
}

/// `XOR` over the stationary chain and the two-sided mobile treatment.
pub fn build_plant_tree(plant: &PlantSpec) -> (Vec<Node>, Vec<Precedence>) {
    let n = PlantNodes::new(plant);
    let mut nodes = vec![
        Node::task(n.process.clone(), Qaf::Xor, [n.stationary.clone(), n.mobile.clone()]),
        Node::task(n.stationary.clone(), Qaf::And, n.stationary_actions().map(Clone::clone)),
        Node::task(n.mobile.clone(), Qaf::And, [n.left.clone(), n.right.clone()]),
    ];
    nodes.extend(n.stationary_actions().map(|a| Node::action(a.clone())));
    nodes.push(Node::action(n.left.clone()));
    nodes.push(Node::action(n.right.clone()));
    let chain = n.stationary_actions();
    let precedence = chain
        .windows(2)
        .map(|w| Precedence::new(w[0].clone(), w[1].clone()))
        .collect();
    (nodes, precedence)
}

/// Mission over every configured plant, with the robots of `fleet`.
pub fn build_mission(config: &GreenhouseConfig, fleet: &FleetSpec) -> Result<Mission> {
    config.check()?;
    if fleet.n_robots() == 0 {
        return Err(Error::InvalidParameter("the fleet has no robots".into()));
    }
    let mut nodes = vec![Node::task(
        ROOT,
        Qaf::And,
        config.plants.iter().map(|p| PlantNodes::new(p).process),
    )];
    let mut precedence = Vec::new();
    let mut locations = BTreeMap::new();
    let mut ugv_actions = Vec::new();
    let mut arm_actions = Vec::new();
    let mut mobile_actions = Vec::new();
    let kj = |seconds: f64, watts: f64| seconds * watts / 1000.0;
    for plant in &config.plants {
        let (n, p) = build_plant_tree(plant);
        nodes.extend(n);
        precedence.extend(p);
        let ids = PlantNodes::new(plant);
        let transport = config.transport_duration(plant)?;
        let transport_outcome = Outcome::new(1.0, transport, kj(transport, config.ugv_power));
        ugv_actions.push((ids.deliver.clone(), transport_outcome));
        ugv_actions.push((ids.collect.clone(), transport_outcome));
        let sync = Outcome::new(
            1.0,
            config.sync_duration,
            kj(config.sync_duration, config.manipulation_power),
        );
        let op_time = plant.units() as f64 * config.unit_op_duration;
        arm_actions.push((ids.prep.clone(), sync));
        arm_actions.push((
            ids.op.clone(),
            Outcome::new(1.0, op_time, kj(op_time, config.manipulation_power)),
        ));
        arm_actions.push((ids.ready.clone(), sync));
        for a in ids.stationary_actions() {
            locations.insert(a.clone(), config.workspace);
        }
        let (lp, rp) = config.side_points(plant)?;
        for (id, units, at) in [(&ids.left, plant.left, lp), (&ids.right, plant.right, rp)] {
            let t = units as f64 * config.unit_op_duration;
            mobile_actions.push((id.clone(), Outcome::new(1.0, t, kj(t, config.mobile_work_power))));
            locations.insert(id.clone(), at);
        }
    }

    let mut robots = Vec::new();
    let with = |mut r: RobotProfile, actions: &[(NodeId, Outcome)]| {
        for (a, o) in actions {
            r = r.with_action(a.clone(), *o);
        }
        r
    };
    let depot = |list: &[Point], i: usize| list.get(i % list.len().max(1)).copied().unwrap_or(config.workspace);
    for i in 0..fleet.mobile {
        let r = RobotProfile::new(
            format!("mobile_{i}"),
            depot(&config.mobile_depots, i),
            config.mobile_speed,
            config.mobile_power,
        );
        robots.push(with(r, &mobile_actions));
    }
    for i in 0..fleet.stationary {
        // Never moves: every action it can do is at the workspace.
        let r = RobotProfile::new(format!("stationary_{i}"), config.workspace, 1.0, 0.0);
        robots.push(with(r, &arm_actions));
    }
    for i in 0..fleet.ugv {
        let r = RobotProfile::new(
            format!("ugv_{i}"),
            depot(&config.ugv_depots, i),
            config.ugv_speed,
            config.ugv_power,
        );
        robots.push(with(r, &ugv_actions));
    }
    Ok(Mission {
        tree: MissionTree::new(ROOT, nodes, precedence),
        robots,
        locations,
        criteria: Some(fleet.criteria()?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Stationary,
    Mobile,
}

/// Branch each plant takes in `alternative`, keyed by plant id.
pub fn branch_selection(config: &GreenhouseConfig, alternative: &Alternative) -> BTreeMap<String, Branch> {
    let mut out = BTreeMap::new();
    for plant in &config.plants {
        let ids = PlantNodes::new(plant);
        if alternative.branches.contains(&ids.stationary) {
            out.insert(plant.id.clone(), Branch::Stationary);
        } else if alternative.branches.contains(&ids.mobile) {
            out.insert(plant.id.clone(), Branch::Mobile);
        }
    }
    out
}
