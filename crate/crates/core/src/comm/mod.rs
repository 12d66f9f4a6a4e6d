//! Message-passing contract for SPMD rank programs.
//!
//! A rank program is an async function of a [`RankCtx`]. Two executors run
//! it: [`Executor::Sim`] polls all ranks round-robin on the calling thread
//! and detects deadlock deterministically, [`Executor::Threads`] gives each
//! rank its own OS thread. Both share the same mailbox and the same reduce
//! tree, so numerical results are bit-identical between them.
//!
//! Ranks are 0-based in the API. The stats CSV reports them 1-based.

mod ctx;
mod exec;

pub use ctx::RankCtx;
pub use exec::{run, RunOutput};

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

pub type Rank = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommError {
    #[error("rank {rank} out of range for world of size {p}")]
    InvalidRank { rank: Rank, p: usize },
    #[error("world size must be at least 1")]
    EmptyWorld,
    #[error("rank {0} cannot send to itself")]
    SelfSend(Rank),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("deadlock: ranks {0:?} blocked on receives that can never complete")]
    Deadlock(Vec<Rank>),
    #[error("reduce is missing participants: ranks {0:?} wait inside a reduce that cannot complete")]
    MissingParticipant(Vec<Rank>),
    #[error("reduce payload length mismatch: expected {expected}, found {found}")]
    MismatchedLength { expected: usize, found: usize },
    #[error("{0} messages were sent but never received")]
    UndeliveredMessages(usize),
    #[error("another rank failed; this rank was aborted")]
    Aborted,
    #[error("rank thread panicked")]
    Panicked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Executor {
    #[default]
    Sim,
    Threads,
}

impl FromStr for Executor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sim" => Ok(Executor::Sim),
            "threads" => Ok(Executor::Threads),
            other => Err(format!("unknown executor '{other}' (expected sim or threads)")),
        }
    }
}

impl std::fmt::Display for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Executor::Sim => "sim",
            Executor::Threads => "threads",
        })
    }
}

/// An ordered set of ranks with a designated root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    members: Vec<Rank>,
    root: Rank,
}

impl Group {
    /// Members are sorted and deduplicated; the root must be a member.
    pub fn new(mut members: Vec<Rank>, root: Rank) -> Result<Self, CommError> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(CommError::InvalidGroup("empty member list".into()));
        }
        if members.binary_search(&root).is_err() {
            return Err(CommError::InvalidGroup(format!("root {root} is not a member")));
        }
        Ok(Self { members, root })
    }

    /// Contiguous ranks `lo..=hi`.
    pub fn span(lo: Rank, hi: Rank, root: Rank) -> Result<Self, CommError> {
        if lo > hi {
            return Err(CommError::InvalidGroup(format!("empty span {lo}..={hi}")));
        }
        Self::new((lo..=hi).collect(), root)
    }

    pub fn members(&self) -> &[Rank] {
        &self.members
    }

    pub fn root(&self) -> Rank {
        self.root
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, rank: Rank) -> bool {
        self.members.binary_search(&rank).is_ok()
    }

    /// Number of tree levels a reduce over this group traverses.
    pub fn tree_depth(&self) -> u32 {
        ceil_log2(self.members.len())
    }
}

/// `⌈log₂ n⌉`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RankStats {
    pub msgs_sent: u64,
    pub scalars_sent: u64,
    pub reduces: u64,
    pub levels: u64,
}

/// Per-rank communication counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommStats {
    pub ranks: Vec<RankStats>,
}

impl CommStats {
    pub fn zeros(p: usize) -> Self {
        Self {
            ranks: vec![RankStats::default(); p],
        }
    }

    pub fn total_msgs(&self) -> u64 {
        self.ranks.iter().map(|r| r.msgs_sent).sum()
    }

    pub fn total_scalars(&self) -> u64 {
        self.ranks.iter().map(|r| r.scalars_sent).sum()
    }

    pub fn total_reduces(&self) -> u64 {
        self.ranks.iter().map(|r| r.reduces).sum()
    }

    /// World level count: the deepest any rank went.
    pub fn levels(&self) -> u64 {
        self.ranks.iter().map(|r| r.levels).max().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &CommStats) {
        if self.ranks.len() < other.ranks.len() {
            self.ranks.resize(other.ranks.len(), RankStats::default());
        }
        for (a, b) in self.ranks.iter_mut().zip(&other.ranks) {
            a.msgs_sent += b.msgs_sent;
            a.scalars_sent += b.scalars_sent;
            a.reduces += b.reduces;
            a.levels += b.levels;
        }
    }

    /// CSV with columns `rank,msgs_sent,scalars_sent,reduces,levels`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rank,msgs_sent,scalars_sent,reduces,levels\n");
        for (i, r) in self.ranks.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{},{}", i + 1, r.msgs_sent, r.scalars_sent, r.reduces, r.levels);
        }
        s
    }
}

/// One point-to-point message, as recorded by the communicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageRecord {
    pub from: Rank,
    pub to: Rank,
    pub scalars: usize,
    pub tag: &'static str,
    pub level: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_ceiling() {
        let got: Vec<u32> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn group_validation() {
        assert!(Group::new(vec![], 0).is_err());
        assert!(Group::new(vec![1, 2], 0).is_err());
        let g = Group::new(vec![3, 1, 2, 2], 2).unwrap();
        assert_eq!(g.members(), &[1, 2, 3]);
        assert_eq!(g.tree_depth(), 2);
    }

    #[test]
    fn stats_csv_is_one_based() {
        let mut st = CommStats::zeros(2);
        st.ranks[1].msgs_sent = 4;
        assert_eq!(st.to_csv(), "rank,msgs_sent,scalars_sent,reduces,levels\n1,0,0,0,0\n2,4,0,0,0\n");
    }
}
