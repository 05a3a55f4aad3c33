use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    MissingRoot,
    DuplicateId,
    DanglingChild,
    TaskWithoutChildren,
    ActionWithChildren,
    ActionWithQaf,
    TaskWithoutQaf,
    MultipleParents,
    RootHasParent,
    Unreachable,
    DanglingPrecedence,
    SelfPrecedence,
    OverlappingPrecedence,
    CyclicPrecedence,
    // schedule-level checks
    Assignment,
    Capability,
    Duration,
    Travel,
    Precedence,
    NotSemiActive,
    Objective,
}

impl ViolationKind {
    pub fn describe(&self) -> &'static str {
        match self {
            ViolationKind::MissingRoot => "root node missing",
            ViolationKind::DuplicateId => "duplicate node id",
            ViolationKind::DanglingChild => "child references unknown node",
            ViolationKind::TaskWithoutChildren => "task without children",
            ViolationKind::ActionWithChildren => "action with children",
            ViolationKind::ActionWithQaf => "action with quality accumulation function",
            ViolationKind::TaskWithoutQaf => "task without quality accumulation function",
            ViolationKind::MultipleParents => "node with more than one parent",
            ViolationKind::RootHasParent => "root node has a parent",
            ViolationKind::Unreachable => "node not reachable from root",
            ViolationKind::DanglingPrecedence => "precedence references unknown node",
            ViolationKind::SelfPrecedence => "node precedes itself",
            ViolationKind::OverlappingPrecedence => "precedence between a node and its own ancestor",
            ViolationKind::CyclicPrecedence => "cyclic precedence",
            ViolationKind::Assignment => "assignment",
            ViolationKind::Capability => "capability",
            ViolationKind::Duration => "duration",
            ViolationKind::Travel => "travel",
            ViolationKind::Precedence => "precedence",
            ViolationKind::NotSemiActive => "not semi-active",
            ViolationKind::Objective => "objective",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Ids of the nodes, actions or robots involved.
    pub subjects: Vec<String>,
    pub detail: String,
}

/// Collected invariant violations. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn push<S: ToString>(
        &mut self,
        kind: ViolationKind,
        subjects: impl IntoIterator<Item = S>,
        detail: impl Into<String>,
    ) {
        self.violations.push(Violation {
            kind,
            subjects: subjects.into_iter().map(|s| s.to_string()).collect(),
            detail: detail.into(),
        });
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn contains(&self, kind: ViolationKind) -> bool {
        self.count(kind) > 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            write!(f, "  {}: [{}]", v.kind.describe(), v.subjects.join(", "))?;
            if !v.detail.is_empty() {
                write!(f, " {}", v.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
