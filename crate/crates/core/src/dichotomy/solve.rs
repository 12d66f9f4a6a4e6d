use super::{DichotomyError, DichotomyPlan, Node, Partition};
use crate::comm::{run, CommStats, Executor, Group, MessageRecord, RankCtx};
use crate::scalar::Scalar;

/// Solutions of a batch plus the communication record that produced them.
#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub x: Vec<Vec<T>>,
    pub stats: CommStats,
    pub log: Vec<MessageRecord>,
}

impl<T: Scalar> DichotomyPlan<T> {
    /// Solves `A x = f`.
    pub fn solve(&self, executor: Executor, f: &[T]) -> Result<Solution<T>, DichotomyError> {
        self.solve_many(executor, std::slice::from_ref(&f))
    }

    /// Solves one system per right-hand side. Every reduce and message
    /// carries one scalar per right-hand side.
    pub fn solve_many<V>(&self, executor: Executor, batch: &[V]) -> Result<Solution<T>, DichotomyError>
    where
        V: AsRef<[T]> + Sync,
    {
        let plans = vec![self; batch.len()];
        solve_systems(executor, &plans, batch)
    }
}

/// Solves `plans[j] x_j = rhs[j]` for all `j` in one SPMD run. The plans
/// may belong to different matrices but must share one partition.
pub fn solve_systems<T, V>(executor: Executor, plans: &[&DichotomyPlan<T>], rhs: &[V]) -> Result<Solution<T>, DichotomyError>
where
    T: Scalar,
    V: AsRef<[T]> + Sync,
{
    if plans.len() != rhs.len() {
        return Err(DichotomyError::DimensionMismatch {
            expected: plans.len(),
            found: rhs.len(),
        });
    }
    let Some(first) = plans.first() else {
        return Ok(Solution {
            x: Vec::new(),
            stats: CommStats::default(),
            log: Vec::new(),
        });
    };
    let part = first.partition();
    if plans.iter().any(|p| p.partition() != part) {
        return Err(DichotomyError::PlanMismatch);
    }
    for f in rhs {
        if f.as_ref().len() != part.order() {
            return Err(DichotomyError::DimensionMismatch {
                expected: part.order(),
                found: f.as_ref().len(),
            });
        }
    }
    if part.ranks() == 1 {
        let x = plans
            .iter()
            .zip(rhs)
            .map(|(plan, f)| {
                let fac = plan.full_factorization().expect("single-rank plan keeps its factorization");
                Ok(fac.solve(f.as_ref())?)
            })
            .collect::<Result<Vec<_>, DichotomyError>>()?;
        return Ok(Solution {
            x,
            stats: CommStats::zeros(1),
            log: Vec::new(),
        });
    }
    let out = run(executor, part.ranks(), |ctx: RankCtx<T>| async move {
        let m = ctx.rank();
        let locals = rhs.iter().map(|f| f.as_ref()[part.range(m)].to_vec()).collect();
        rank_solve(&ctx, plans, locals).await
    })?;
    let mut parts = out.results.into_iter();
    let mut x: Vec<Vec<T>> = parts.next().expect("at least two ranks");
    for rank_x in parts {
        for (xj, pj) in x.iter_mut().zip(rank_x) {
            xj.extend(pj);
        }
    }
    Ok(Solution {
        x,
        stats: out.stats,
        log: out.log,
    })
}

/// The per-rank solve, for use inside an SPMD program. `locals[j]` is this
/// rank's slice of the `j`-th right-hand side; the owned slices of the
/// solutions are returned.
pub async fn rank_solve<T: Scalar>(ctx: &RankCtx<T>, plans: &[&DichotomyPlan<T>], locals: Vec<Vec<T>>) -> Result<Vec<Vec<T>>, DichotomyError> {
    let me = ctx.rank();
    let part: &Partition = plans[0].partition();
    let tree = plans[0].tree();
    let rp: Vec<_> = plans.iter().map(|p| p.rank(me)).collect();
    let mut bl = Vec::with_capacity(rp.len());
    let mut br = Vec::with_capacity(rp.len());
    for (plan, f) in rp.iter().zip(&locals) {
        let (l, r) = plan.local_betas(f)?;
        bl.push(l);
        br.push(r);
    }
    let mut bounds: Option<(Vec<T>, Vec<T>)> = None;
    for s in 0..tree.depth() {
        let Some(node) = tree.node_of(s, me) else { continue };
        let level = s + 1;
        ctx.count_level();
        match node {
            Node::Single(_) => {
                bounds = Some((bl, br));
                break;
            }
            Node::Pair { a, b } => {
                let (peer, sent) = if me == a {
                    let k = part.first(b);
                    (b, rp.iter().zip(&br).map(|(p, v)| v.clone() * p.z_right_at(k)).collect())
                } else {
                    let k = part.last(a);
                    (a, rp.iter().zip(&bl).map(|(p, v)| v.clone() * p.z_left_at(k)).collect())
                };
                ctx.send_tagged(peer, sent, "pair", level)?;
                let got = ctx.recv(peer).await?;
                let mut xf = Vec::with_capacity(rp.len());
                let mut xl = Vec::with_capacity(rp.len());
                for j in 0..rp.len() {
                    let g = got[j].clone();
                    if me == a {
                        xl.push(br[j].clone() + g.clone());
                        xf.push(bl[j].clone() + g * rp[j].left_ratio().clone());
                    } else {
                        xf.push(bl[j].clone() + g.clone());
                        xl.push(br[j].clone() + g * rp[j].right_ratio().clone());
                    }
                }
                bounds = Some((xf, xl));
                break;
            }
            Node::Split { lo, mid, hi } => {
                let k1 = part.first(mid);
                let k2 = part.last(mid);
                if me < mid {
                    let group = Group::span(lo, mid - 1, mid - 1)?;
                    let w = rp.iter().zip(&br).map(|(p, v)| v.clone() * p.z_right_at(k1)).collect();
                    if let Some(chi1) = ctx.reduce_with_tag(&group, w, "reduce", level).await? {
                        ctx.send_tagged(mid, chi1, "chi", level)?;
                        let delta = ctx.recv(mid).await?;
                        for j in 0..rp.len() {
                            br[j] = br[j].clone() + delta[j].clone();
                            bl[j] = bl[j].clone() + delta[j].clone() * rp[j].left_ratio().clone();
                        }
                    }
                } else if me > mid {
                    let group = Group::span(mid + 1, hi, mid + 1)?;
                    let w = rp.iter().zip(&bl).map(|(p, v)| v.clone() * p.z_left_at(k2)).collect();
                    if let Some(chi2) = ctx.reduce_with_tag(&group, w, "reduce", level).await? {
                        ctx.send_tagged(mid, chi2, "chi", level)?;
                        let delta = ctx.recv(mid).await?;
                        for j in 0..rp.len() {
                            bl[j] = bl[j].clone() + delta[j].clone();
                            br[j] = br[j].clone() + delta[j].clone() * rp[j].right_ratio().clone();
                        }
                    }
                } else {
                    let chi1 = ctx.recv(mid - 1).await?;
                    let chi2 = ctx.recv(mid + 1).await?;
                    let mut xf = Vec::with_capacity(rp.len());
                    let mut xl = Vec::with_capacity(rp.len());
                    let mut dl = Vec::with_capacity(rp.len());
                    let mut dr = Vec::with_capacity(rp.len());
                    for j in 0..rp.len() {
                        let p = rp[j];
                        // load right of `mid` seen at k1, and left of it seen at k2
                        let from_right = chi2[j].clone() * p.left_ratio().clone() + bl[j].clone();
                        let from_left = chi1[j].clone() * p.right_ratio().clone() + br[j].clone();
                        xf.push(chi1[j].clone() + from_right.clone());
                        xl.push(from_left.clone() + chi2[j].clone());
                        dl.push(from_right * p.z_left_at(k1 - 1));
                        dr.push(from_left * p.z_right_at(k2 + 1));
                    }
                    ctx.send_tagged(mid - 1, dl, "delta", level)?;
                    ctx.send_tagged(mid + 1, dr, "delta", level)?;
                    bounds = Some((xf, xl));
                    break;
                }
            }
        }
    }
    let (xf, xl) = bounds.expect("every rank is resolved by some tree node");
    Ok(rp
        .iter()
        .zip(locals)
        .zip(xf.into_iter().zip(xl))
        .map(|((p, f), (a, b))| p.finish(&f, a, b))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tridiag::{thomas_solve, TridiagonalMatrix};
    use num_rational::BigRational;
    use num_traits::FromPrimitive;
    use rand::{Rng, SeedableRng};

    fn random_system(n: usize, rng: &mut impl Rng) -> (TridiagonalMatrix<f64>, Vec<f64>) {
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag = (0..n)
            .map(|i| {
                let off = if i > 0 { lower[i - 1].abs() } else { 0.0 } + if i + 1 < n { upper[i].abs() } else { 0.0 };
                off + rng.gen_range(0.1..1.0)
            })
            .collect();
        let f = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (TridiagonalMatrix::new(lower, diag, upper).unwrap(), f)
    }

    fn max_rel(x: &[f64], y: &[f64]) -> f64 {
        let e = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        e / y.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn single_rank_is_bit_identical_to_thomas() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let (a, f) = random_system(40, &mut rng);
        let plan = DichotomyPlan::build(&a, Partition::new(vec![40]).unwrap()).unwrap();
        let sol = plan.solve(Executor::Sim, &f).unwrap();
        assert_eq!(sol.x[0], thomas_solve(&a, &f).unwrap());
    }

    #[test]
    fn matches_thomas_for_several_rank_counts() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for p in [2usize, 3, 4, 5, 6, 7, 8, 16] {
            let n = 3 * p + 5;
            let (a, f) = random_system(n, &mut rng);
            let plan = DichotomyPlan::build(&a, Partition::uniform(n, p).unwrap()).unwrap();
            for ex in [Executor::Sim, Executor::Threads] {
                let sol = plan.solve(ex, &f).unwrap();
                let x = thomas_solve(&a, &f).unwrap();
                assert!(max_rel(&sol.x[0], &x) < 1e-12, "p={p}");
                assert_eq!(sol.stats.levels(), plan.tree().depth() as u64);
            }
        }
    }

    #[test]
    fn exact_arithmetic_gives_exact_solution() {
        let q = |x: i64| BigRational::from_i64(x).unwrap();
        let n = 14;
        let a = TridiagonalMatrix::new(
            (0..n - 1).map(|i| q(-1 - (i as i64 % 3))).collect(),
            (0..n).map(|i| q(7 + i as i64 % 2)).collect(),
            (0..n - 1).map(|i| q(2 - i as i64 % 5)).collect(),
        )
        .unwrap();
        let f: Vec<BigRational> = (0..n).map(|i| q(i as i64 * i as i64 - 5)).collect();
        let expect = thomas_solve(&a, &f).unwrap();
        for p in [2usize, 3, 4, 7] {
            let plan = DichotomyPlan::build(&a, Partition::uniform(n, p).unwrap()).unwrap();
            assert_eq!(plan.solve(Executor::Sim, &f).unwrap().x[0], expect, "p={p}");
        }
    }
}
