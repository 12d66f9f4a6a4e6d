use std::fmt::Write as _;

use super::{Node, Tree};
use crate::comm::MessageRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    LeftGroup,
    Middle,
    RightGroup,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::LeftGroup => "left-group",
            Role::Middle => "middle",
            Role::RightGroup => "right-group",
        }
    }
}

/// One rank's part in one level of a solve. Levels and ranks are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub level: usize,
    pub rank: usize,
    pub role: Role,
    pub scalars_sent: usize,
}

/// Roles from the tree, traffic from the message log of a solve.
pub fn trace_rows(tree: &Tree, log: &[MessageRecord]) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for (s, nodes) in tree.levels().iter().enumerate() {
        let level = s + 1;
        let sent = |r: usize| -> usize { log.iter().filter(|m| m.level == level && m.from == r).map(|m| m.scalars).sum() };
        for node in nodes {
            let roles: Vec<(usize, Role)> = match *node {
                Node::Split { lo, mid, hi } => (lo..=hi)
                    .map(|r| {
                        let role = match r.cmp(&mid) {
                            std::cmp::Ordering::Less => Role::LeftGroup,
                            std::cmp::Ordering::Equal => Role::Middle,
                            std::cmp::Ordering::Greater => Role::RightGroup,
                        };
                        (r, role)
                    })
                    .collect(),
                Node::Pair { a, b } => vec![(a, Role::Middle), (b, Role::Middle)],
                Node::Single(r) => vec![(r, Role::Middle)],
            };
            for (r, role) in roles {
                rows.push(TraceRow {
                    level,
                    rank: r + 1,
                    role,
                    scalars_sent: sent(r),
                });
            }
        }
    }
    rows
}

/// CSV with columns `level,rank,role,scalars_sent`.
pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("level,rank,role,scalars_sent\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.level, r.rank, r.role.as_str(), r.scalars_sent);
    }
    s
}

/// CSV of the message log: `level,from,to,tag,scalars`, ranks 1-based.
pub fn messages_to_csv(log: &[MessageRecord]) -> String {
    let mut s = String::from("level,from,to,tag,scalars\n");
    for m in log {
        let _ = writeln!(s, "{},{},{},{},{}", m.level, m.from + 1, m.to + 1, m.tag, m.scalars);
    }
    s
}
