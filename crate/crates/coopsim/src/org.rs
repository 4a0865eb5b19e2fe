//! Static organization model: robots, relations, and recursive team
//! structures.
//!
//! A [`CooperativeRobot`] bundles an id, a six-dimensional capability
//! profile, resources, and interface tags. Robots assemble into an
//! [`OrgNode`] tree: leaves are individual robots, teams hold an ordered
//! list of children whose first element always represents the team leader
//! (the member with the strongest communicating + organizing ability).
//! Goal sets partition exactly from parent to children at every level.
//!
//! All types are immutable values; operations return new structures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from organization-model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrgError {
    #[error("robot id must be nonempty")]
    EmptyId,
    #[error("robot id `{0}` already registered")]
    DuplicateId(String),
    #[error("capability score {name} = {value} outside [0,1]")]
    InvalidCapability { name: &'static str, value: f64 },
    #[error("resource `{name}` has invalid quantity {value}")]
    InvalidResource { name: String, value: f64 },
    #[error("cannot form a team from an empty robot list")]
    EmptyTeam,
    #[error("cannot form a team with an empty goal set")]
    EmptyGoals,
    #[error("robot `{0}` is already a member")]
    AlreadyMember(String),
    #[error("robot `{0}` is not a member")]
    NotAMember(String),
    #[error("robot `{0}` is not in the registry")]
    UnknownRobot(String),
    #[error("operation requires a team node, got a leaf")]
    NotATeam,
    #[error("invalid goal partition: {0}")]
    InvalidPartition(String),
}

/// The six capability dimensions, each a dimensionless score in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityProfile {
    pub moving: f64,
    pub acting: f64,
    pub sensing: f64,
    pub communicating: f64,
    pub organizing: f64,
    pub learning: f64,
}

impl CapabilityProfile {
    pub fn new(
        moving: f64,
        acting: f64,
        sensing: f64,
        communicating: f64,
        organizing: f64,
        learning: f64,
    ) -> Result<Self, OrgError> {
        let profile = CapabilityProfile {
            moving,
            acting,
            sensing,
            communicating,
            organizing,
            learning,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// All six dimensions set to the same score.
    pub fn uniform(score: f64) -> Result<Self, OrgError> {
        CapabilityProfile::new(score, score, score, score, score, score)
    }

    fn dimensions(&self) -> [(&'static str, f64); 6] {
        [
            ("moving", self.moving),
            ("acting", self.acting),
            ("sensing", self.sensing),
            ("communicating", self.communicating),
            ("organizing", self.organizing),
            ("learning", self.learning),
        ]
    }

    pub fn validate(&self) -> Result<(), OrgError> {
        for (name, value) in self.dimensions() {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(OrgError::InvalidCapability { name, value });
            }
        }
        Ok(())
    }

    /// Leader-election criterion: organizing plus communicating ability.
    pub fn leadership_score(&self) -> f64 {
        self.organizing + self.communicating
    }

    /// Per-dimension maximum of two profiles.
    pub fn max_with(&self, other: &CapabilityProfile) -> CapabilityProfile {
        CapabilityProfile {
            moving: self.moving.max(other.moving),
            acting: self.acting.max(other.acting),
            sensing: self.sensing.max(other.sensing),
            communicating: self.communicating.max(other.communicating),
            organizing: self.organizing.max(other.organizing),
            learning: self.learning.max(other.learning),
        }
    }

    /// Per-dimension maximum over a set of members: the team can do
    /// whatever any member can do. `None` on an empty iterator.
    pub fn max_over<'a, I>(profiles: I) -> Option<CapabilityProfile>
    where
        I: IntoIterator<Item = &'a CapabilityProfile>,
    {
        profiles.into_iter().copied().reduce(|a, b| a.max_with(&b))
    }
}

/// The cooperative-robot tuple: id, capabilities, resources, interfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooperativeRobot {
    pub id: String,
    pub capability: CapabilityProfile,
    #[serde(default)]
    pub resources: BTreeMap<String, f64>,
    #[serde(default)]
    pub interface: BTreeSet<String>,
}

impl CooperativeRobot {
    pub fn new(
        id: impl Into<String>,
        capability: CapabilityProfile,
        resources: BTreeMap<String, f64>,
        interface: BTreeSet<String>,
    ) -> Result<Self, OrgError> {
        let robot = CooperativeRobot {
            id: id.into(),
            capability,
            resources,
            interface,
        };
        robot.validate()?;
        Ok(robot)
    }

    pub fn validate(&self) -> Result<(), OrgError> {
        if self.id.is_empty() {
            return Err(OrgError::EmptyId);
        }
        self.capability.validate()?;
        for (name, &value) in &self.resources {
            if value < 0.0 || !value.is_finite() {
                return Err(OrgError::InvalidResource {
                    name: name.clone(),
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Set of robots with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CooperativeRobot>", into = "Vec<CooperativeRobot>")]
pub struct RobotRegistry {
    robots: BTreeMap<String, CooperativeRobot>,
}

impl RobotRegistry {
    pub fn new() -> Self {
        RobotRegistry::default()
    }

    pub fn from_robots<I>(robots: I) -> Result<Self, OrgError>
    where
        I: IntoIterator<Item = CooperativeRobot>,
    {
        let mut registry = RobotRegistry::new();
        for robot in robots {
            registry.insert(robot)?;
        }
        Ok(registry)
    }

    /// Validate and register a new robot.
    pub fn create_robot(
        &mut self,
        id: impl Into<String>,
        capability: CapabilityProfile,
        resources: BTreeMap<String, f64>,
        interface: BTreeSet<String>,
    ) -> Result<CooperativeRobot, OrgError> {
        let robot = CooperativeRobot::new(id, capability, resources, interface)?;
        self.insert(robot.clone())?;
        Ok(robot)
    }

    pub fn insert(&mut self, robot: CooperativeRobot) -> Result<(), OrgError> {
        robot.validate()?;
        if self.robots.contains_key(&robot.id) {
            return Err(OrgError::DuplicateId(robot.id));
        }
        self.robots.insert(robot.id.clone(), robot);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&CooperativeRobot> {
        self.robots.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.robots.contains_key(id)
    }

    pub fn robots(&self) -> impl Iterator<Item = &CooperativeRobot> {
        self.robots.values()
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }
}

impl TryFrom<Vec<CooperativeRobot>> for RobotRegistry {
    type Error = OrgError;

    fn try_from(robots: Vec<CooperativeRobot>) -> Result<Self, OrgError> {
        RobotRegistry::from_robots(robots)
    }
}

impl From<RobotRegistry> for Vec<CooperativeRobot> {
    fn from(registry: RobotRegistry) -> Vec<CooperativeRobot> {
        registry.robots.into_values().collect()
    }
}

/// Kind of a pairwise relation: control runs vertically between levels,
/// cooperation runs horizontally inside a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    VerticalControl,
    HorizontalCooperation,
}

/// Directed relation between two registered robots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub from: String,
    pub to: String,
}

/// Node of the recursive team structure: either an individual robot or a
/// team whose children may themselves be teams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrgNode {
    Leaf {
        #[serde(rename = "robot")]
        robot_id: String,
        #[serde(default)]
        goals: BTreeSet<String>,
        #[serde(default)]
        constraints: BTreeSet<String>,
        #[serde(default)]
        rules: BTreeSet<String>,
        #[serde(default)]
        benefit: f64,
    },
    Team {
        id: String,
        #[serde(rename = "leader")]
        leader_id: String,
        level: u32,
        position: u32,
        #[serde(default)]
        goals: BTreeSet<String>,
        capability: CapabilityProfile,
        #[serde(default)]
        constraints: BTreeSet<String>,
        #[serde(default)]
        rules: BTreeSet<String>,
        #[serde(default)]
        benefit: f64,
        children: Vec<OrgNode>,
    },
}

impl OrgNode {
    pub fn leaf(robot_id: impl Into<String>) -> OrgNode {
        OrgNode::Leaf {
            robot_id: robot_id.into(),
            goals: BTreeSet::new(),
            constraints: BTreeSet::new(),
            rules: BTreeSet::new(),
            benefit: 0.0,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, OrgNode::Leaf { .. })
    }

    /// The robot standing for this node: the robot itself for a leaf, the
    /// team leader for a team.
    pub fn representative_id(&self) -> &str {
        match self {
            OrgNode::Leaf { robot_id, .. } => robot_id,
            OrgNode::Team { leader_id, .. } => leader_id,
        }
    }

    pub fn goals(&self) -> &BTreeSet<String> {
        match self {
            OrgNode::Leaf { goals, .. } | OrgNode::Team { goals, .. } => goals,
        }
    }

    pub fn benefit(&self) -> f64 {
        match self {
            OrgNode::Leaf { benefit, .. } | OrgNode::Team { benefit, .. } => *benefit,
        }
    }

    pub fn children(&self) -> &[OrgNode] {
        match self {
            OrgNode::Leaf { .. } => &[],
            OrgNode::Team { children, .. } => children,
        }
    }

    /// All robot ids in this subtree, in traversal order. Duplicates are
    /// preserved so that validation can spot them.
    pub fn member_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_member_ids(&mut out);
        out
    }

    fn collect_member_ids(&self, out: &mut Vec<String>) {
        match self {
            OrgNode::Leaf { robot_id, .. } => out.push(robot_id.clone()),
            OrgNode::Team { children, .. } => {
                for child in children {
                    child.collect_member_ids(out);
                }
            }
        }
    }

    pub fn member_count(&self) -> usize {
        match self {
            OrgNode::Leaf { .. } => 1,
            OrgNode::Team { children, .. } => children.iter().map(OrgNode::member_count).sum(),
        }
    }

    pub fn contains_robot(&self, id: &str) -> bool {
        match self {
            OrgNode::Leaf { robot_id, .. } => robot_id == id,
            OrgNode::Team { children, .. } => children.iter().any(|c| c.contains_robot(id)),
        }
    }

    /// Rebuild the tree with leaf benefits taken from `leaf_benefit` and
    /// each team's benefit set to the sum of its children's.
    pub fn with_benefits(&self, leaf_benefit: &dyn Fn(&str) -> f64) -> OrgNode {
        match self {
            OrgNode::Leaf {
                robot_id,
                goals,
                constraints,
                rules,
                ..
            } => OrgNode::Leaf {
                robot_id: robot_id.clone(),
                goals: goals.clone(),
                constraints: constraints.clone(),
                rules: rules.clone(),
                benefit: leaf_benefit(robot_id),
            },
            OrgNode::Team {
                id,
                leader_id,
                level,
                position,
                goals,
                capability,
                constraints,
                rules,
                children,
                ..
            } => {
                let children: Vec<OrgNode> = children
                    .iter()
                    .map(|c| c.with_benefits(leaf_benefit))
                    .collect();
                let benefit = children.iter().map(OrgNode::benefit).sum();
                OrgNode::Team {
                    id: id.clone(),
                    leader_id: leader_id.clone(),
                    level: *level,
                    position: *position,
                    goals: goals.clone(),
                    capability: *capability,
                    constraints: constraints.clone(),
                    rules: rules.clone(),
                    benefit,
                    children,
                }
            }
        }
    }
}

/// Result of removing a member: the remaining team, or dissolution when
/// the last member left (an empty team has no representation).
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum LeaveOutcome {
    Remaining(OrgNode),
    Dissolved,
}

/// Pick the leader among `(id, leadership_score)` candidates: highest
/// score, ties broken by lexicographically smallest id.
fn elect_leader<'a, I>(candidates: I) -> Option<&'a str>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut best: Option<(&str, f64)> = None;
    for (id, score) in candidates {
        let better = match best {
            None => true,
            Some((best_id, best_score)) => {
                score > best_score || (score == best_score && id < best_id)
            }
        };
        if better {
            best = Some((id, score));
        }
    }
    best.map(|(id, _)| id)
}

/// Leadership score of a node's representative, resolved through `lookup`.
fn representative_score(
    node: &OrgNode,
    lookup: &dyn Fn(&str) -> Option<CapabilityProfile>,
) -> Result<f64, OrgError> {
    let id = node.representative_id();
    lookup(id)
        .map(|c| c.leadership_score())
        .ok_or_else(|| OrgError::UnknownRobot(id.to_string()))
}

/// Re-elect the leader among the children's representatives and move the
/// winning child to the front. Other children keep their relative order.
fn reelect_and_reorder(
    mut children: Vec<OrgNode>,
    lookup: &dyn Fn(&str) -> Option<CapabilityProfile>,
) -> Result<(String, Vec<OrgNode>), OrgError> {
    let mut scored = Vec::with_capacity(children.len());
    for child in &children {
        scored.push((
            child.representative_id(),
            representative_score(child, lookup)?,
        ));
    }
    let leader = elect_leader(scored.iter().map(|(id, s)| (*id, *s)))
        .expect("children list is nonempty")
        .to_string();
    let leader_pos = children
        .iter()
        .position(|c| c.representative_id() == leader)
        .expect("leader is a child representative");
    let leader_child = children.remove(leader_pos);
    children.insert(0, leader_child);
    Ok((leader, children))
}

/// Merge `goals` into the subtree's leader chain: a leaf absorbs them
/// directly, a team adds them to its own set and recurses into the leader
/// child so the parent-child partition stays exact.
fn assign_goals_to_leader(node: &mut OrgNode, extra: BTreeSet<String>) {
    if extra.is_empty() {
        return;
    }
    match node {
        OrgNode::Leaf { goals, .. } => goals.extend(extra),
        OrgNode::Team {
            goals, children, ..
        } => {
            goals.extend(extra.iter().cloned());
            assign_goals_to_leader(&mut children[0], extra);
        }
    }
}

/// Replace the subtree's goal set with `goals`: the team keeps the whole
/// set, its leader child carries it until further decomposition, and all
/// other children are cleared.
fn replace_goals(node: &mut OrgNode, new_goals: BTreeSet<String>) {
    match node {
        OrgNode::Leaf { goals, .. } => *goals = new_goals,
        OrgNode::Team {
            goals, children, ..
        } => {
            *goals = new_goals.clone();
            let mut iter = children.iter_mut();
            if let Some(first) = iter.next() {
                replace_goals(first, new_goals);
            }
            for rest in iter {
                replace_goals(rest, BTreeSet::new());
            }
        }
    }
}

pub(crate) fn assemble_team(
    members: &[CooperativeRobot],
    goals: BTreeSet<String>,
    level: u32,
    position: u32,
    team_id: String,
) -> Result<OrgNode, OrgError> {
    if members.is_empty() {
        return Err(OrgError::EmptyTeam);
    }
    for (i, robot) in members.iter().enumerate() {
        robot.validate()?;
        if members[..i].iter().any(|r| r.id == robot.id) {
            return Err(OrgError::DuplicateId(robot.id.clone()));
        }
    }
    let leader = elect_leader(
        members
            .iter()
            .map(|r| (r.id.as_str(), r.capability.leadership_score())),
    )
    .expect("members list is nonempty")
    .to_string();
    let capability = CapabilityProfile::max_over(members.iter().map(|r| &r.capability))
        .expect("members list is nonempty");

    // Leader leaf first; it also carries the whole goal set until
    // decompose_goal distributes it.
    let mut children = Vec::with_capacity(members.len());
    children.push(OrgNode::Leaf {
        robot_id: leader.clone(),
        goals: goals.clone(),
        constraints: BTreeSet::new(),
        rules: BTreeSet::new(),
        benefit: 0.0,
    });
    for robot in members.iter().filter(|r| r.id != leader) {
        children.push(OrgNode::leaf(robot.id.clone()));
    }

    Ok(OrgNode::Team {
        id: team_id,
        leader_id: leader,
        level,
        position,
        goals,
        capability,
        constraints: BTreeSet::new(),
        rules: BTreeSet::new(),
        benefit: 0.0,
        children,
    })
}

/// Form a team from the given robots. The leader is the member with the
/// highest organizing + communicating score (ties to the smallest id) and
/// occupies child slot 0; the team capability is the per-dimension maximum
/// over members.
pub fn form_team(
    members: &[CooperativeRobot],
    goals: BTreeSet<String>,
    level: u32,
    position: u32,
) -> Result<OrgNode, OrgError> {
    if members.is_empty() {
        return Err(OrgError::EmptyTeam);
    }
    if goals.is_empty() {
        return Err(OrgError::EmptyGoals);
    }
    let team_id = format!("team-{level}-{position}");
    assemble_team(members, goals, level, position, team_id)
}

/// Add a robot to a team as a new leaf member (with no goals assigned yet)
/// and re-evaluate leadership. Member capabilities are resolved through
/// `registry`.
pub fn join(
    team: &OrgNode,
    robot: &CooperativeRobot,
    registry: &RobotRegistry,
) -> Result<OrgNode, OrgError> {
    robot.validate()?;
    let OrgNode::Team {
        id,
        level,
        position,
        goals,
        capability,
        constraints,
        rules,
        benefit,
        children,
        ..
    } = team
    else {
        return Err(OrgError::NotATeam);
    };
    if team.contains_robot(&robot.id) {
        return Err(OrgError::AlreadyMember(robot.id.clone()));
    }

    let mut new_children = children.clone();
    new_children.push(OrgNode::leaf(robot.id.clone()));

    let lookup = |id: &str| -> Option<CapabilityProfile> {
        if id == robot.id {
            Some(robot.capability)
        } else {
            registry.get(id).map(|r| r.capability)
        }
    };
    let (leader, new_children) = reelect_and_reorder(new_children, &lookup)?;

    Ok(OrgNode::Team {
        id: id.clone(),
        leader_id: leader,
        level: *level,
        position: *position,
        goals: goals.clone(),
        capability: capability.max_with(&robot.capability),
        constraints: constraints.clone(),
        rules: rules.clone(),
        benefit: *benefit,
        children: new_children,
    })
}

/// Remove a member from the team (searching sub-teams recursively). The
/// departing member's goals pass to the re-elected leader so the goal
/// partition stays exact; a sub-team whose last member leaves disappears,
/// and removing the overall last member dissolves the team.
pub fn leave(
    team: &OrgNode,
    robot_id: &str,
    registry: &RobotRegistry,
) -> Result<LeaveOutcome, OrgError> {
    let OrgNode::Team {
        id,
        level,
        position,
        goals,
        constraints,
        rules,
        benefit,
        children,
        ..
    } = team
    else {
        return Err(OrgError::NotATeam);
    };
    if !team.contains_robot(robot_id) {
        return Err(OrgError::NotAMember(robot_id.to_string()));
    }

    let mut new_children = Vec::with_capacity(children.len());
    let mut orphaned_goals = BTreeSet::new();
    for child in children {
        if !child.contains_robot(robot_id) {
            new_children.push(child.clone());
            continue;
        }
        match child {
            OrgNode::Leaf {
                goals: leaf_goals, ..
            } => {
                orphaned_goals.extend(leaf_goals.iter().cloned());
            }
            OrgNode::Team { .. } => match leave(child, robot_id, registry)? {
                LeaveOutcome::Remaining(sub) => new_children.push(sub),
                LeaveOutcome::Dissolved => {
                    orphaned_goals.extend(child.goals().iter().cloned());
                }
            },
        }
    }

    if new_children.is_empty() {
        return Ok(LeaveOutcome::Dissolved);
    }

    let lookup = |id: &str| registry.get(id).map(|r| r.capability);
    let (leader, mut new_children) = reelect_and_reorder(new_children, &lookup)?;
    assign_goals_to_leader(&mut new_children[0], orphaned_goals);

    // The aggregate is a maximum, so it must be recomputed from the
    // remaining members rather than adjusted.
    let mut capability: Option<CapabilityProfile> = None;
    for child in &new_children {
        for member in child.member_ids() {
            let profile = registry
                .get(&member)
                .map(|r| r.capability)
                .ok_or(OrgError::UnknownRobot(member))?;
            capability = Some(match capability {
                None => profile,
                Some(existing) => existing.max_with(&profile),
            });
        }
    }

    Ok(LeaveOutcome::Remaining(OrgNode::Team {
        id: id.clone(),
        leader_id: leader,
        level: *level,
        position: *position,
        goals: goals.clone(),
        capability: capability.expect("team has at least one member"),
        constraints: constraints.clone(),
        rules: rules.clone(),
        benefit: *benefit,
        children: new_children,
    }))
}

/// Redistribute the team's goal set over its children. `assignment` maps
/// every child index to its goal subset; the subsets must partition the
/// team's goals exactly. A team child passes its new set down its leader
/// chain.
pub fn decompose_goal(
    team: &OrgNode,
    assignment: &BTreeMap<usize, BTreeSet<String>>,
) -> Result<OrgNode, OrgError> {
    let OrgNode::Team {
        id,
        leader_id,
        level,
        position,
        goals,
        capability,
        constraints,
        rules,
        benefit,
        children,
    } = team
    else {
        return Err(OrgError::NotATeam);
    };

    for &index in assignment.keys() {
        if index >= children.len() {
            return Err(OrgError::InvalidPartition(format!(
                "child index {index} out of range for {} children",
                children.len()
            )));
        }
    }
    for index in 0..children.len() {
        if !assignment.contains_key(&index) {
            return Err(OrgError::InvalidPartition(format!(
                "child index {index} has no assigned goal subset"
            )));
        }
    }

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (&index, subset) in assignment {
        for goal in subset {
            if let Some(other) = seen.insert(goal.as_str(), index) {
                return Err(OrgError::InvalidPartition(format!(
                    "goal `{goal}` assigned to both child {other} and child {index}"
                )));
            }
            if !goals.contains(goal) {
                return Err(OrgError::InvalidPartition(format!(
                    "goal `{goal}` is not a goal of this team"
                )));
            }
        }
    }
    for goal in goals {
        if !seen.contains_key(goal.as_str()) {
            return Err(OrgError::InvalidPartition(format!(
                "goal `{goal}` is not assigned to any child"
            )));
        }
    }

    let mut new_children = children.clone();
    for (index, child) in new_children.iter_mut().enumerate() {
        replace_goals(child, assignment[&index].clone());
    }

    Ok(OrgNode::Team {
        id: id.clone(),
        leader_id: leader_id.clone(),
        level: *level,
        position: *position,
        goals: goals.clone(),
        capability: *capability,
        constraints: constraints.clone(),
        rules: rules.clone(),
        benefit: *benefit,
        children: new_children,
    })
}

/// A broken invariant found by [`TeamStructure::validate`], naming the node
/// path and what failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: {}", self.path, self.message)
    }
}

/// A complete organization: robot registry, relation set, and one root
/// structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamStructure {
    pub registry: RobotRegistry,
    #[serde(default)]
    pub relations: Vec<Relation>,
    pub root: OrgNode,
}

impl TeamStructure {
    /// Check every structural invariant; an empty list means the structure
    /// is sound. Violations are data, not errors.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        for robot in self.registry.robots() {
            if let Err(e) = robot.validate() {
                violations.push(Violation {
                    path: format!("registry/{}", robot.id),
                    message: e.to_string(),
                });
            }
        }

        for (i, relation) in self.relations.iter().enumerate() {
            let path = format!("relations[{i}]");
            if relation.from == relation.to {
                violations.push(Violation {
                    path: path.clone(),
                    message: format!("relation endpoints are both `{}`", relation.from),
                });
            }
            for endpoint in [&relation.from, &relation.to] {
                if !self.registry.contains(endpoint) {
                    violations.push(Violation {
                        path: path.clone(),
                        message: format!("endpoint `{endpoint}` is not in the registry"),
                    });
                }
            }
        }

        let mut seen_members = BTreeSet::new();
        self.validate_node(&self.root, "root", None, &mut seen_members, &mut violations);
        violations
    }

    fn validate_node(
        &self,
        node: &OrgNode,
        path: &str,
        parent_level: Option<u32>,
        seen_members: &mut BTreeSet<String>,
        violations: &mut Vec<Violation>,
    ) {
        match node {
            OrgNode::Leaf { robot_id, .. } => {
                if !self.registry.contains(robot_id) {
                    violations.push(Violation {
                        path: path.to_string(),
                        message: format!("robot `{robot_id}` is not in the registry"),
                    });
                }
                if !seen_members.insert(robot_id.clone()) {
                    violations.push(Violation {
                        path: path.to_string(),
                        message: format!("robot `{robot_id}` appears more than once"),
                    });
                }
            }
            OrgNode::Team {
                leader_id,
                level,
                goals,
                capability,
                children,
                ..
            } => {
                match parent_level {
                    None => {
                        if *level != 0 {
                            violations.push(Violation {
                                path: path.to_string(),
                                message: format!("root team has level {level}, expected 0"),
                            });
                        }
                    }
                    Some(parent) => {
                        if *level != parent + 1 {
                            violations.push(Violation {
                                path: path.to_string(),
                                message: format!(
                                    "team at level {level} under parent level {parent}, \
                                     expected {}",
                                    parent + 1
                                ),
                            });
                        }
                    }
                }

                if let Err(e) = capability.validate() {
                    violations.push(Violation {
                        path: path.to_string(),
                        message: format!("team capability invalid: {e}"),
                    });
                }

                if children.is_empty() {
                    violations.push(Violation {
                        path: path.to_string(),
                        message: "team has no children".to_string(),
                    });
                    return;
                }

                if children[0].representative_id() != leader_id {
                    violations.push(Violation {
                        path: path.to_string(),
                        message: format!(
                            "leader `{leader_id}` is not represented by child 0 \
                             (found `{}`)",
                            children[0].representative_id()
                        ),
                    });
                }

                // Leader optimality among the children's representatives,
                // checkable only when every representative is registered.
                let scores: Option<Vec<(&str, f64)>> = children
                    .iter()
                    .map(|c| {
                        let id = c.representative_id();
                        self.registry
                            .get(id)
                            .map(|r| (id, r.capability.leadership_score()))
                    })
                    .collect();
                if let Some(scores) = scores {
                    let expected = elect_leader(scores).expect("children nonempty");
                    if expected != leader_id {
                        violations.push(Violation {
                            path: path.to_string(),
                            message: format!(
                                "leader `{leader_id}` does not have the strongest \
                                 organizing + communicating score (expected `{expected}`)"
                            ),
                        });
                    }
                }

                let mut union: BTreeSet<&String> = BTreeSet::new();
                let mut overlap = false;
                for child in children {
                    for goal in child.goals() {
                        if !union.insert(goal) {
                            overlap = true;
                        }
                    }
                }
                if overlap {
                    violations.push(Violation {
                        path: path.to_string(),
                        message: "children goal sets overlap".to_string(),
                    });
                }
                if union != goals.iter().collect() {
                    violations.push(Violation {
                        path: path.to_string(),
                        message: "children goal sets do not union to the team's goals".to_string(),
                    });
                }

                for (i, child) in children.iter().enumerate() {
                    let child_path = format!("{path}/children[{i}]");
                    self.validate_node(child, &child_path, Some(*level), seen_members, violations);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot(id: &str, organizing: f64, communicating: f64) -> CooperativeRobot {
        CooperativeRobot::new(
            id,
            CapabilityProfile::new(0.5, 0.5, 0.5, communicating, organizing, 0.5).unwrap(),
            BTreeMap::new(),
            BTreeSet::new(),
        )
        .unwrap()
    }

    fn goals(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn registry_of(robots: &[CooperativeRobot]) -> RobotRegistry {
        RobotRegistry::from_robots(robots.iter().cloned()).unwrap()
    }

    fn structure(robots: &[CooperativeRobot], root: OrgNode) -> TeamStructure {
        TeamStructure {
            registry: registry_of(robots),
            relations: Vec::new(),
            root,
        }
    }

    #[test]
    fn create_robot_valid() {
        let mut registry = RobotRegistry::new();
        let r = registry
            .create_robot(
                "r1",
                CapabilityProfile::uniform(0.5).unwrap(),
                BTreeMap::new(),
                BTreeSet::new(),
            )
            .unwrap();
        assert_eq!(r.id, "r1");
        assert!(registry.contains("r1"));
    }

    #[test]
    fn create_robot_rejects_out_of_range_capability() {
        assert_eq!(
            CapabilityProfile::new(0.5, 0.5, 0.5, 0.5, 1.2, 0.5),
            Err(OrgError::InvalidCapability {
                name: "organizing",
                value: 1.2
            })
        );
    }

    #[test]
    fn create_robot_rejects_duplicate_id() {
        let mut registry = RobotRegistry::new();
        let capability = CapabilityProfile::uniform(0.5).unwrap();
        registry
            .create_robot("r1", capability, BTreeMap::new(), BTreeSet::new())
            .unwrap();
        assert_eq!(
            registry
                .create_robot("r1", capability, BTreeMap::new(), BTreeSet::new())
                .unwrap_err(),
            OrgError::DuplicateId("r1".into())
        );
    }

    #[test]
    fn create_robot_rejects_negative_resources() {
        let result = CooperativeRobot::new(
            "r1",
            CapabilityProfile::uniform(0.5).unwrap(),
            [("fuel".to_string(), -1.0)].into(),
            BTreeSet::new(),
        );
        assert!(matches!(result, Err(OrgError::InvalidResource { .. })));
    }

    #[test]
    fn form_team_elects_strongest_leader() {
        let members = [
            robot("a", 0.2, 0.2),
            robot("b", 0.9, 0.8),
            robot("c", 0.5, 0.5),
        ];
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        assert_eq!(team.representative_id(), "b");
        assert_eq!(team.children()[0].representative_id(), "b");
    }

    #[test]
    fn form_team_singleton() {
        let members = [robot("solo", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        assert_eq!(team.children().len(), 1);
        assert_eq!(team.representative_id(), "solo");
        assert!(team.children()[0].is_leaf());
    }

    #[test]
    fn form_team_breaks_ties_by_smallest_id() {
        let members = [robot("b", 0.5, 0.5), robot("a", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        assert_eq!(team.representative_id(), "a");
    }

    #[test]
    fn form_team_rejects_empty_inputs() {
        assert_eq!(
            form_team(&[], goals(&["g1"]), 0, 0),
            Err(OrgError::EmptyTeam)
        );
        assert_eq!(
            form_team(&[robot("a", 0.5, 0.5)], BTreeSet::new(), 0, 0),
            Err(OrgError::EmptyGoals)
        );
    }

    #[test]
    fn form_team_aggregates_capability_per_dimension_max() {
        let mut a = robot("a", 0.9, 0.1);
        a.capability.moving = 0.3;
        let mut b = robot("b", 0.1, 0.8);
        b.capability.moving = 0.7;
        let team = form_team(&[a, b], goals(&["g1"]), 0, 0).unwrap();
        let OrgNode::Team { capability, .. } = team else {
            panic!("expected team");
        };
        assert_eq!(capability.organizing, 0.9);
        assert_eq!(capability.communicating, 0.8);
        assert_eq!(capability.moving, 0.7);
    }

    #[test]
    fn join_then_leave_restores_membership() {
        let members = [robot("a", 0.5, 0.5), robot("b", 0.4, 0.4)];
        let newcomer = robot("c", 0.3, 0.3);
        let mut all = members.to_vec();
        all.push(newcomer.clone());
        let registry = registry_of(&all);

        let team = form_team(&members, goals(&["g1", "g2"]), 0, 0).unwrap();
        let joined = join(&team, &newcomer, &registry).unwrap();
        assert!(joined.contains_robot("c"));
        let LeaveOutcome::Remaining(left) = leave(&joined, "c", &registry).unwrap() else {
            panic!("team should remain");
        };

        let mut before: Vec<String> = team.member_ids();
        let mut after: Vec<String> = left.member_ids();
        before.sort();
        after.sort();
        assert_eq!(before, after);
    }

    #[test]
    fn join_stronger_robot_takes_leadership() {
        let members = [robot("a", 0.5, 0.5), robot("b", 0.4, 0.4)];
        let strong = robot("z", 0.9, 0.9);
        let mut all = members.to_vec();
        all.push(strong.clone());
        let registry = registry_of(&all);

        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        let joined = join(&team, &strong, &registry).unwrap();
        assert_eq!(joined.representative_id(), "z");
        assert_eq!(joined.children()[0].representative_id(), "z");
    }

    #[test]
    fn join_existing_member_fails() {
        let members = [robot("a", 0.5, 0.5)];
        let registry = registry_of(&members);
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        assert_eq!(
            join(&team, &members[0], &registry),
            Err(OrgError::AlreadyMember("a".into()))
        );
    }

    #[test]
    fn leave_non_leader_keeps_leader() {
        let members = [
            robot("a", 0.9, 0.9),
            robot("b", 0.5, 0.5),
            robot("c", 0.4, 0.4),
        ];
        let registry = registry_of(&members);
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        let LeaveOutcome::Remaining(left) = leave(&team, "c", &registry).unwrap() else {
            panic!("team should remain");
        };
        assert_eq!(left.representative_id(), "a");
        assert_eq!(left.member_count(), 2);
    }

    #[test]
    fn leader_leaving_forces_reelection() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let registry = registry_of(&members);
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        assert_eq!(team.representative_id(), "a");
        let LeaveOutcome::Remaining(left) = leave(&team, "a", &registry).unwrap() else {
            panic!("team should remain");
        };
        assert_eq!(left.representative_id(), "b");
    }

    #[test]
    fn last_member_leaving_dissolves() {
        let members = [robot("a", 0.5, 0.5)];
        let registry = registry_of(&members);
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        assert_eq!(
            leave(&team, "a", &registry).unwrap(),
            LeaveOutcome::Dissolved
        );
    }

    #[test]
    fn leave_unknown_member_fails() {
        let members = [robot("a", 0.5, 0.5)];
        let registry = registry_of(&members);
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        assert_eq!(
            leave(&team, "zzz", &registry),
            Err(OrgError::NotAMember("zzz".into()))
        );
    }

    #[test]
    fn departing_member_goals_move_to_leader() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let registry = registry_of(&members);
        let team = form_team(&members, goals(&["g1", "g2"]), 0, 0).unwrap();
        let team =
            decompose_goal(&team, &[(0, goals(&["g1"])), (1, goals(&["g2"]))].into()).unwrap();
        let LeaveOutcome::Remaining(left) = leave(&team, "b", &registry).unwrap() else {
            panic!("team should remain");
        };
        assert_eq!(left.goals(), &goals(&["g1", "g2"]));
        assert_eq!(left.children()[0].goals(), &goals(&["g1", "g2"]));
        assert!(structure(&members, left).validate().is_empty());
    }

    #[test]
    fn decompose_goal_valid_partition() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1", "g2", "g3"]), 0, 0).unwrap();
        let split = decompose_goal(
            &team,
            &[(0, goals(&["g1"])), (1, goals(&["g2", "g3"]))].into(),
        )
        .unwrap();
        assert_eq!(split.children()[0].goals(), &goals(&["g1"]));
        assert_eq!(split.children()[1].goals(), &goals(&["g2", "g3"]));
        assert!(structure(&members, split).validate().is_empty());
    }

    #[test]
    fn decompose_goal_rejects_overlap() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1", "g2", "g3"]), 0, 0).unwrap();
        let result = decompose_goal(
            &team,
            &[(0, goals(&["g1", "g2"])), (1, goals(&["g2", "g3"]))].into(),
        );
        assert!(matches!(result, Err(OrgError::InvalidPartition(_))));
    }

    #[test]
    fn decompose_goal_rejects_uncovered_goal() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1", "g2", "g3"]), 0, 0).unwrap();
        let result = decompose_goal(&team, &[(0, goals(&["g1"])), (1, goals(&["g2"]))].into());
        assert!(matches!(result, Err(OrgError::InvalidPartition(_))));
    }

    #[test]
    fn validate_passes_on_constructed_team() {
        let members = [
            robot("a", 0.2, 0.2),
            robot("b", 0.9, 0.8),
            robot("c", 0.5, 0.5),
        ];
        let team = form_team(&members, goals(&["g1", "g2"]), 0, 0).unwrap();
        assert_eq!(structure(&members, team).validate(), Vec::new());
    }

    #[test]
    fn validate_flags_misplaced_leader() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        let OrgNode::Team {
            id,
            leader_id,
            level,
            position,
            goals,
            capability,
            constraints,
            rules,
            benefit,
            mut children,
        } = team
        else {
            panic!("expected team");
        };
        children.reverse();
        let broken = OrgNode::Team {
            id,
            leader_id,
            level,
            position,
            goals,
            capability,
            constraints,
            rules,
            benefit,
            children,
        };
        let violations = structure(&members, broken).validate();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].message.contains("child 0"));
        assert_eq!(violations[0].path, "root");
    }

    #[test]
    fn validate_flags_wrong_child_level() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let inner = form_team(&members[1..], goals(&["g2"]), 5, 0).unwrap();
        let root = OrgNode::Team {
            id: "root".into(),
            leader_id: "a".into(),
            level: 0,
            position: 0,
            goals: goals(&["g1", "g2"]),
            capability: CapabilityProfile::uniform(0.9).unwrap(),
            constraints: BTreeSet::new(),
            rules: BTreeSet::new(),
            benefit: 0.0,
            children: vec![
                OrgNode::Leaf {
                    robot_id: "a".into(),
                    goals: goals(&["g1"]),
                    constraints: BTreeSet::new(),
                    rules: BTreeSet::new(),
                    benefit: 0.0,
                },
                inner,
            ],
        };
        let violations = structure(&members, root).validate();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].message.contains("level 5"));
    }

    #[test]
    fn validate_flags_duplicate_membership_and_unknown_robot() {
        let members = [robot("a", 0.9, 0.9)];
        let root = OrgNode::Team {
            id: "t".into(),
            leader_id: "a".into(),
            level: 0,
            position: 0,
            goals: BTreeSet::new(),
            capability: CapabilityProfile::uniform(0.9).unwrap(),
            constraints: BTreeSet::new(),
            rules: BTreeSet::new(),
            benefit: 0.0,
            children: vec![
                OrgNode::leaf("a"),
                OrgNode::leaf("a"),
                OrgNode::leaf("ghost"),
            ],
        };
        let violations = structure(&members, root).validate();
        assert!(violations
            .iter()
            .any(|v| v.message.contains("more than once")));
        assert!(violations
            .iter()
            .any(|v| v.message.contains("`ghost` is not in the registry")));
    }

    #[test]
    fn validate_flags_bad_relations() {
        let members = [robot("a", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        let mut s = structure(&members, team);
        s.relations.push(Relation {
            kind: RelationKind::HorizontalCooperation,
            from: "a".into(),
            to: "a".into(),
        });
        s.relations.push(Relation {
            kind: RelationKind::VerticalControl,
            from: "a".into(),
            to: "nobody".into(),
        });
        let violations = s.validate();
        assert_eq!(violations.len(), 2);
    }

    #[test]
    fn org_node_json_round_trip() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1", "g2"]), 0, 0).unwrap();
        let json = serde_json::to_string(&team).unwrap();
        assert!(json.contains("\"kind\":\"team\""));
        let back: OrgNode = serde_json::from_str(&json).unwrap();
        assert_eq!(team, back);
    }

    #[test]
    fn with_benefits_sums_up_the_tree() {
        let members = [robot("a", 0.9, 0.9), robot("b", 0.5, 0.5)];
        let team = form_team(&members, goals(&["g1"]), 0, 0).unwrap();
        let valued = team.with_benefits(&|id| if id == "a" { 2.5 } else { 1.0 });
        assert_eq!(valued.benefit(), 3.5);
        assert_eq!(valued.children()[0].benefit(), 2.5);
    }
}
