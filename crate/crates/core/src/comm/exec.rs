use std::future::Future;
use std::pin::Pin;
use std::sync::Arc;
use std::task::{Context, Poll};

use futures::task::noop_waker_ref;

use super::ctx::{stall_error, Shared};
use super::{CommError, CommStats, Executor, MessageRecord, RankCtx};
use crate::scalar::Scalar;

/// Per-rank results plus the communication record of one run.
#[derive(Debug, Clone)]
pub struct RunOutput<R> {
    pub results: Vec<R>,
    pub stats: CommStats,
    pub log: Vec<MessageRecord>,
}

/// Runs `program` once per rank on a world of `p` ranks.
///
/// The first failing rank (lowest rank under the simulator) determines the
/// error. Messages left undelivered when every rank has finished are an
/// error as well.
pub fn run<T, R, E, F, Fut>(executor: Executor, p: usize, program: F) -> Result<RunOutput<R>, E>
where
    T: Scalar,
    R: Send,
    E: From<CommError> + Send,
    F: Fn(RankCtx<T>) -> Fut + Sync,
    Fut: Future<Output = Result<R, E>>,
{
    if p == 0 {
        return Err(CommError::EmptyWorld.into());
    }
    let shared = Arc::new(Shared::<T>::new(p, executor));
    let results = match executor {
        Executor::Sim => run_sim(&shared, p, &program)?,
        Executor::Threads => run_threads(&shared, p, &program)?,
    };
    let mut st = shared.lock();
    let pending = st.pending_messages();
    if pending > 0 {
        return Err(CommError::UndeliveredMessages(pending).into());
    }
    Ok(RunOutput {
        results,
        stats: CommStats {
            ranks: std::mem::take(&mut st.stats),
        },
        log: std::mem::take(&mut st.log),
    })
}

fn run_sim<T, R, E, F, Fut>(shared: &Arc<Shared<T>>, p: usize, program: &F) -> Result<Vec<R>, E>
where
    T: Scalar,
    E: From<CommError>,
    F: Fn(RankCtx<T>) -> Fut,
    Fut: Future<Output = Result<R, E>>,
{
    let mut tasks: Vec<Option<Pin<Box<Fut>>>> = (0..p).map(|r| Some(Box::pin(program(RankCtx::new(Arc::clone(shared), r))))).collect();
    let mut results: Vec<Option<R>> = (0..p).map(|_| None).collect();
    let mut cx = Context::from_waker(noop_waker_ref());
    let mut remaining = p;
    while remaining > 0 {
        let before = shared.lock().events;
        let mut finished = false;
        for r in 0..p {
            let Some(task) = tasks[r].as_mut() else { continue };
            if let Poll::Ready(out) = task.as_mut().poll(&mut cx) {
                tasks[r] = None;
                remaining -= 1;
                finished = true;
                results[r] = Some(out?);
            }
        }
        if remaining > 0 && !finished && shared.lock().events == before {
            let st = shared.lock();
            return Err(stall_error(&st.waiting).into());
        }
    }
    Ok(results.into_iter().map(|r| r.expect("every rank finished")).collect())
}

fn run_threads<T, R, E, F, Fut>(shared: &Arc<Shared<T>>, p: usize, program: &F) -> Result<Vec<R>, E>
where
    T: Scalar,
    R: Send,
    E: From<CommError> + Send,
    F: Fn(RankCtx<T>) -> Fut + Sync,
    Fut: Future<Output = Result<R, E>>,
{
    let outcomes: Vec<Result<R, E>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..p)
            .map(|r| {
                let ctx = RankCtx::new(Arc::clone(shared), r);
                let shared = Arc::clone(shared);
                s.spawn(move || {
                    let out = futures::executor::block_on(program(ctx));
                    shared.retire(out.is_err());
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CommError::Panicked.into())))
            .collect()
    });
    // report the root cause rather than the ranks that were aborted by it
    let mut first_err = None;
    let mut results = Vec::with_capacity(p);
    for out in outcomes {
        match out {
            Ok(v) => results.push(v),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    match first_err {
        None => Ok(results),
        Some(e) => {
            let st = shared.lock();
            if let Some(d) = st.deadlock.clone() {
                return Err(d.into());
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::Group;
    use super::*;

    fn both() -> [Executor; 2] {
        [Executor::Sim, Executor::Threads]
    }

    #[test]
    fn loopback_and_fifo() {
        for ex in both() {
            let out = run(ex, 5, |ctx: RankCtx<f64>| async move {
                match ctx.rank() {
                    2 => {
                        ctx.send(3, vec![1.5])?;
                        ctx.send(3, vec![2.5, 3.5])?;
                        Ok::<_, CommError>(vec![])
                    }
                    3 => {
                        let mut got = ctx.recv(2).await?;
                        got.extend(ctx.recv(2).await?);
                        Ok(got)
                    }
                    _ => Ok(vec![]),
                }
            })
            .unwrap();
            assert_eq!(out.results[3], vec![1.5, 2.5, 3.5]);
            assert_eq!(out.stats.ranks[2].msgs_sent, 2);
            assert_eq!(out.stats.ranks[2].scalars_sent, 3);
        }
    }

    #[test]
    fn unmatched_recv_is_deadlock() {
        for ex in both() {
            let err = run(ex, 2, |ctx: RankCtx<f64>| async move {
                if ctx.rank() == 1 {
                    ctx.recv(0).await?;
                }
                Ok::<_, CommError>(())
            })
            .unwrap_err();
            assert_eq!(err, CommError::Deadlock(vec![1]));
        }
    }

    #[test]
    fn undelivered_message_is_error() {
        let err = run(Executor::Sim, 2, |ctx: RankCtx<f64>| async move {
            if ctx.rank() == 0 {
                ctx.send(1, vec![1.0])?;
            }
            Ok::<_, CommError>(())
        })
        .unwrap_err();
        assert_eq!(err, CommError::UndeliveredMessages(1));
    }

    #[test]
    fn reduce_sums_to_root() {
        for ex in both() {
            let out = run(ex, 3, |ctx: RankCtx<f64>| async move {
                let g = Group::span(0, 2, 0)?;
                ctx.reduce_sum(&g, vec![ctx.rank() as f64 + 1.0]).await
            })
            .unwrap();
            assert_eq!(out.results, vec![Some(vec![6.0]), None, None]);
        }
    }

    #[test]
    fn single_member_reduce_is_identity() {
        let out = run(Executor::Sim, 2, |ctx: RankCtx<f64>| async move {
            let g = Group::span(ctx.rank(), ctx.rank(), ctx.rank())?;
            ctx.reduce_sum(&g, vec![0.1 * ctx.rank() as f64, 7.0]).await
        })
        .unwrap();
        assert_eq!(out.results, vec![Some(vec![0.0, 7.0]), Some(vec![0.1, 7.0])]);
        assert_eq!(out.stats.total_msgs(), 0);
    }

    #[test]
    fn reduce_over_seven_records_three_levels() {
        for ex in both() {
            let out = run(ex, 7, |ctx: RankCtx<f64>| async move {
                let g = Group::span(0, 6, 3)?;
                ctx.reduce_sum(&g, vec![ctx.rank() as f64 + 1.0]).await
            })
            .unwrap();
            assert_eq!(out.results[3], Some(vec![28.0]));
            assert_eq!(out.stats.levels(), 3);
            assert_eq!(out.stats.total_msgs(), 6);
        }
    }

    #[test]
    fn reduce_over_four_sends_three_scalars() {
        let out = run(Executor::Sim, 4, |ctx: RankCtx<f64>| async move {
            ctx.reduce_sum(&Group::span(0, 3, 0)?, vec![1.0]).await
        })
        .unwrap();
        assert_eq!(out.stats.total_scalars(), 3);
        assert_eq!(out.stats.total_reduces(), 4);
    }

    #[test]
    fn missing_reduce_participant() {
        for ex in both() {
            let err = run(ex, 3, |ctx: RankCtx<f64>| async move {
                if ctx.rank() != 2 {
                    ctx.reduce_sum(&Group::span(0, 2, 0)?, vec![1.0]).await?;
                }
                Ok::<_, CommError>(())
            })
            .unwrap_err();
            assert_eq!(err, CommError::MissingParticipant(vec![0]));
        }
    }

    #[test]
    fn mismatched_reduce_lengths() {
        let err = run(Executor::Sim, 2, |ctx: RankCtx<f64>| async move {
            let k = ctx.rank() + 1;
            ctx.reduce_sum(&Group::span(0, 1, 0)?, vec![1.0; k]).await?;
            Ok::<_, CommError>(())
        })
        .unwrap_err();
        assert_eq!(err, CommError::MismatchedLength { expected: 1, found: 2 });
    }

    #[test]
    fn fresh_world_has_zero_stats() {
        let out = run(Executor::Sim, 3, |_ctx: RankCtx<f64>| async move { Ok::<_, CommError>(()) }).unwrap();
        assert_eq!(out.stats, CommStats::zeros(3));
    }

    #[test]
    fn executors_agree_bitwise_on_reduce_order() {
        let vals = [0.1, 1e16, -1e16, 0.3, 1e-3, 7.0, -0.2, 2.5, 1e8];
        let mut sums = Vec::new();
        for ex in both() {
            let out = run(ex, vals.len(), |ctx: RankCtx<f64>| async move {
                let g = Group::span(0, vals.len() - 1, 4)?;
                ctx.reduce_sum(&g, vec![vals[ctx.rank()]]).await
            })
            .unwrap();
            sums.push(out.results[4].clone().unwrap()[0].to_bits());
        }
        assert_eq!(sums[0], sums[1]);
    }
}
