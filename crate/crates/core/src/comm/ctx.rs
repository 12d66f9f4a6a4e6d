use std::collections::VecDeque;
use std::future::Future;
use std::pin::Pin;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::task::{Context, Poll};

use super::{CommError, Executor, Group, MessageRecord, Rank, RankStats};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Channel {
    PointToPoint = 0,
    Collective = 1,
}

pub(crate) struct State<T> {
    queues: Vec<VecDeque<Vec<T>>>,
    pub(crate) stats: Vec<RankStats>,
    pub(crate) log: Vec<MessageRecord>,
    /// Bumped on every send and every completed receive.
    pub(crate) events: u64,
    /// Per rank: the mailbox slot it is blocked on, and whether inside a
    /// reduce.
    pub(crate) waiting: Vec<Option<(usize, bool)>>,
    pub(crate) live: usize,
    pub(crate) deadlock: Option<CommError>,
    pub(crate) aborted: bool,
}

impl<T> State<T> {
    pub(crate) fn pending_messages(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }
}

pub(crate) struct Shared<T> {
    p: usize,
    executor: Executor,
    state: Mutex<State<T>>,
    cv: Condvar,
}

impl<T> Shared<T> {
    pub(crate) fn new(p: usize, executor: Executor) -> Self {
        Self {
            p,
            executor,
            state: Mutex::new(State {
                queues: (0..2 * p * p).map(|_| VecDeque::new()).collect(),
                stats: vec![RankStats::default(); p],
                log: Vec::new(),
                events: 0,
                waiting: vec![None; p],
                live: p,
                deadlock: None,
                aborted: false,
            }),
            cv: Condvar::new(),
        }
    }

    pub(crate) fn lock(&self) -> MutexGuard<'_, State<T>> {
        // a panicking rank poisons the lock; the data is still consistent
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn slot(&self, from: Rank, to: Rank, ch: Channel) -> usize {
        (ch as usize * self.p + from) * self.p + to
    }

    pub(crate) fn notify(&self) {
        self.cv.notify_all();
    }

    /// Marks one thread-executor rank as finished.
    pub(crate) fn retire(&self, failed: bool) {
        let mut st = self.lock();
        st.live -= 1;
        if failed {
            st.aborted = true;
        }
        drop(st);
        self.cv.notify_all();
    }
}

/// Handle a rank program uses to talk to the rest of the world.
pub struct RankCtx<T> {
    shared: Arc<Shared<T>>,
    rank: Rank,
}

impl<T> Clone for RankCtx<T> {
    fn clone(&self) -> Self {
        Self {
            shared: Arc::clone(&self.shared),
            rank: self.rank,
        }
    }
}

impl<T: Scalar> RankCtx<T> {
    pub(crate) fn new(shared: Arc<Shared<T>>, rank: Rank) -> Self {
        Self { shared, rank }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.shared.p
    }

    pub fn executor(&self) -> Executor {
        self.shared.executor
    }

    fn check_peer(&self, peer: Rank) -> Result<(), CommError> {
        if peer >= self.shared.p {
            return Err(CommError::InvalidRank { rank: peer, p: self.shared.p });
        }
        if peer == self.rank {
            return Err(CommError::SelfSend(peer));
        }
        Ok(())
    }

    /// Buffered send; never blocks.
    pub fn send(&self, to: Rank, payload: Vec<T>) -> Result<(), CommError> {
        self.send_tagged(to, payload, "p2p", 0)
    }

    /// Send that is recorded in the message log under `tag` and `level`.
    pub fn send_tagged(&self, to: Rank, payload: Vec<T>, tag: &'static str, level: usize) -> Result<(), CommError> {
        self.push(to, payload, Channel::PointToPoint, tag, level)
    }

    fn push(&self, to: Rank, payload: Vec<T>, ch: Channel, tag: &'static str, level: usize) -> Result<(), CommError> {
        self.check_peer(to)?;
        let slot = self.shared.slot(self.rank, to, ch);
        let mut st = self.shared.lock();
        let s = &mut st.stats[self.rank];
        s.msgs_sent += 1;
        s.scalars_sent += payload.len() as u64;
        st.log.push(MessageRecord {
            from: self.rank,
            to,
            scalars: payload.len(),
            tag,
            level,
        });
        st.queues[slot].push_back(payload);
        st.events += 1;
        drop(st);
        if self.shared.executor == Executor::Threads {
            self.shared.notify();
        }
        Ok(())
    }

    /// Receives the next message on the `from → self` channel, in send order.
    pub async fn recv(&self, from: Rank) -> Result<Vec<T>, CommError> {
        self.check_peer(from)?;
        Recv {
            ctx: self,
            from,
            ch: Channel::PointToPoint,
            in_reduce: false,
        }
        .await
    }

    /// Adds one to this rank's level counter.
    pub fn count_level(&self) {
        self.shared.lock().stats[self.rank].levels += 1;
    }

    /// Elementwise sum of every member's `contribution`, delivered to the
    /// group root (`Some`); other members get `None`.
    ///
    /// Members are paired by recursive doubling on their rank-sorted
    /// positions, rotated so that the root sits at position 0: at distance
    /// `d = 1, 2, 4, …` the member at virtual position `v` with
    /// `v mod 2d = d` sends its partial sum to `v − d`, which adds it as
    /// `own + received`. The order depends only on the member list.
    pub async fn reduce_sum(&self, group: &Group, contribution: Vec<T>) -> Result<Option<Vec<T>>, CommError> {
        let out = self.reduce_with_tag(group, contribution, "reduce", 0).await?;
        self.shared.lock().stats[self.rank].levels += u64::from(group.tree_depth());
        Ok(out)
    }

    /// Reduce without touching the level counter; used by solvers that
    /// account levels themselves.
    pub(crate) async fn reduce_with_tag(&self, group: &Group, contribution: Vec<T>, tag: &'static str, level: usize) -> Result<Option<Vec<T>>, CommError> {
        let members = group.members();
        let q = members.len();
        let pos = members
            .binary_search(&self.rank)
            .map_err(|_| CommError::InvalidGroup(format!("rank {} is not a member", self.rank)))?;
        let root_pos = members.binary_search(&group.root()).expect("validated group");
        self.shared.lock().stats[self.rank].reduces += 1;
        let k = contribution.len();
        let v = (pos + q - root_pos) % q;
        let member_at = |vp: usize| members[(vp + root_pos) % q];
        let mut acc = contribution;
        let mut d = 1;
        while d < q {
            if v % (2 * d) == d {
                self.push(member_at(v - d), acc, Channel::Collective, tag, level)?;
                return Ok(None);
            }
            if v + d < q {
                let from = member_at(v + d);
                let part = Recv {
                    ctx: self,
                    from,
                    ch: Channel::Collective,
                    in_reduce: true,
                }
                .await?;
                if part.len() != k {
                    return Err(CommError::MismatchedLength {
                        expected: k,
                        found: part.len(),
                    });
                }
                for (a, b) in acc.iter_mut().zip(part) {
                    *a = a.clone() + b;
                }
            }
            d *= 2;
        }
        Ok(Some(acc))
    }
}

struct Recv<'a, T> {
    ctx: &'a RankCtx<T>,
    from: Rank,
    ch: Channel,
    in_reduce: bool,
}

impl<T> Future for Recv<'_, T> {
    type Output = Result<Vec<T>, CommError>;

    fn poll(self: Pin<&mut Self>, _cx: &mut Context<'_>) -> Poll<Self::Output> {
        let sh = &self.ctx.shared;
        let me = self.ctx.rank;
        let slot = sh.slot(self.from, me, self.ch);
        let mut st = sh.lock();
        loop {
            if let Some(m) = st.queues[slot].pop_front() {
                st.events += 1;
                st.waiting[me] = None;
                return Poll::Ready(Ok(m));
            }
            if let Some(e) = &st.deadlock {
                return Poll::Ready(Err(e.clone()));
            }
            if st.aborted {
                return Poll::Ready(Err(CommError::Aborted));
            }
            st.waiting[me] = Some((slot, self.in_reduce));
            match sh.executor {
                // the simulator notices a stalled round and reports it
                Executor::Sim => return Poll::Pending,
                Executor::Threads => {
                    // woken ranks still count as waiting until they run, so
                    // a stall also requires every awaited mailbox to be empty
                    let waiting = st.waiting.iter().flatten().count();
                    let stalled = waiting == st.live && st.waiting.iter().flatten().all(|&(q, _)| st.queues[q].is_empty());
                    if stalled {
                        let e = stall_error(&st.waiting);
                        st.deadlock = Some(e.clone());
                        drop(st);
                        sh.notify();
                        return Poll::Ready(Err(e));
                    }
                    st = sh.cv.wait(st).unwrap_or_else(|e| e.into_inner());
                }
            }
        }
    }
}

/// Error describing a world in which every live rank is blocked.
pub(crate) fn stall_error(waiting: &[Option<(usize, bool)>]) -> CommError {
    let blocked: Vec<Rank> = (0..waiting.len()).filter(|&r| waiting[r].is_some()).collect();
    let in_reduce: Vec<Rank> = blocked.iter().copied().filter(|&r| matches!(waiting[r], Some((_, true)))).collect();
    if in_reduce.is_empty() {
        CommError::Deadlock(blocked)
    } else {
        CommError::MissingParticipant(in_reduce)
    }
}
