use std::hash::{DefaultHasher, Hasher};

use super::{DichotomyError, Partition};
use crate::scalar::Scalar;
use crate::tridiag::{thomas_solve, ThomasFactorization, TridiagonalMatrix};

/// One node of the dichotomy tree. Ranks are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    /// Ranks `lo..=hi` with at least three members: `mid` is resolved from
    /// reductions over `lo..mid` and `mid+1..=hi`.
    Split { lo: usize, mid: usize, hi: usize },
    /// Two ranks resolve each other by a single exchange.
    Pair { a: usize, b: usize },
    /// A lone rank already knows its boundary values.
    Single(usize),
}

impl Node {
    pub fn contains(&self, r: usize) -> bool {
        match *self {
            Node::Split { lo, hi, .. } => (lo..=hi).contains(&r),
            Node::Pair { a, b } => r == a || r == b,
            Node::Single(s) => r == s,
        }
    }

    fn span(&self) -> (usize, usize) {
        match *self {
            Node::Split { lo, hi, .. } => (lo, hi),
            Node::Pair { a, b } => (a, b),
            Node::Single(s) => (s, s),
        }
    }
}

/// The dichotomy tree, level by level. Level `s` (0-based here) holds
/// disjoint nodes covering every rank not yet resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    levels: Vec<Vec<Node>>,
}

impl Tree {
    /// Splits `0..p` recursively at `mid = ⌈(lo + hi) / 2⌉`. With `p = 7`
    /// the middles are 3, then 1 and 5 (0-based).
    pub fn new(p: usize) -> Self {
        let mut levels = Vec::new();
        if p < 2 {
            return Self { levels };
        }
        let mut frontier = vec![(0, p - 1)];
        while !frontier.is_empty() {
            let mut nodes = Vec::new();
            let mut next = Vec::new();
            for (lo, hi) in frontier {
                match hi - lo {
                    0 => nodes.push(Node::Single(lo)),
                    1 => nodes.push(Node::Pair { a: lo, b: hi }),
                    _ => {
                        let mid = (lo + hi).div_ceil(2);
                        nodes.push(Node::Split { lo, mid, hi });
                        next.push((lo, mid - 1));
                        next.push((mid + 1, hi));
                    }
                }
            }
            levels.push(nodes);
            frontier = next;
        }
        Self { levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<Node>] {
        &self.levels
    }

    /// Node containing rank `r` at level `s`, if `r` is still active there.
    pub fn node_of(&self, s: usize, r: usize) -> Option<Node> {
        let nodes = &self.levels[s];
        let i = nodes.partition_point(|n| n.span().1 < r);
        nodes.get(i).copied().filter(|n| n.contains(r))
    }

    /// Middle ranks of split nodes at level `s`.
    pub fn middles(&self, s: usize) -> Vec<usize> {
        self.levels[s]
            .iter()
            .filter_map(|n| match *n {
                Node::Split { mid, .. } => Some(mid),
                _ => None,
            })
            .collect()
    }
}

/// Everything one rank precomputes for one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RankPlan<T> {
    first: usize,
    last: usize,
    g_left: Vec<T>,
    g_right: Vec<T>,
    z_left: Vec<T>,
    z_right: Vec<T>,
    left_ratio: T,
    right_ratio: T,
    interior: Option<ThomasFactorization<T>>,
    c_first: T,
    a_last: T,
}

impl<T: Scalar> RankPlan<T> {
    fn build(a: &TridiagonalMatrix<T>, fac: &ThomasFactorization<T>, rank: usize, first: usize, last: usize) -> Result<Self, DichotomyError> {
        let n = a.order();
        let mut e = vec![T::zero(); n];
        e[first] = T::one();
        let g_left = fac.solve_transpose(&e)?;
        e[first] = T::zero();
        e[last] = T::one();
        let g_right = fac.solve_transpose(&e)?;

        // leading rows 0..first with X[first] = 1: the factors of A's
        // leading block are a prefix of A's factors
        let mut z_left = vec![T::zero(); first];
        if first > 0 {
            z_left[first - 1] = -a.upper()[first - 1].clone();
            fac.solve_leading_in_place(&mut z_left);
        }
        z_left.push(T::one());

        let mut z_right = vec![T::one()];
        if last + 1 < n {
            let trailing = a.submatrix(last + 1, n - 1)?;
            let mut rhs = vec![T::zero(); n - 1 - last];
            rhs[0] = -a.lower()[last].clone();
            z_right.extend(thomas_solve(&trailing, &rhs)?);
        }

        let floor = T::ratio_floor();
        if g_right[last].is_negligible(&floor) || g_left[first].is_negligible(&floor) {
            return Err(DichotomyError::SingularPlan { rank });
        }
        let left_ratio = g_left[last].clone() / g_right[last].clone();
        let right_ratio = g_right[first].clone() / g_left[first].clone();

        let interior = if last >= first + 2 {
            Some(a.submatrix(first + 1, last - 1)?.factorize()?)
        } else {
            None
        };
        let (c_first, a_last) = if last > first {
            (a.lower()[first].clone(), a.upper()[last - 1].clone())
        } else {
            (T::zero(), T::zero())
        };
        Ok(Self {
            first,
            last,
            g_left,
            g_right,
            z_left,
            z_right,
            left_ratio,
            right_ratio,
            interior,
            c_first,
            a_last,
        })
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        self.last
    }

    /// Row `first` of `A⁻¹`.
    pub fn g_left(&self) -> &[T] {
        &self.g_left
    }

    /// Row `last` of `A⁻¹`.
    pub fn g_right(&self) -> &[T] {
        &self.g_right
    }

    /// Response on indices `0..=first` to a unit value at `first` with no
    /// load to the left; the last entry is 1.
    pub fn z_left(&self) -> &[T] {
        &self.z_left
    }

    /// Response on indices `last..n` to a unit value at `last` with no load
    /// to the right; the first entry is 1.
    pub fn z_right(&self) -> &[T] {
        &self.z_right
    }

    pub(crate) fn z_left_at(&self, k: usize) -> T {
        self.z_left[k].clone()
    }

    pub(crate) fn z_right_at(&self, k: usize) -> T {
        self.z_right[k - self.last].clone()
    }

    /// `G^L[last] / G^R[last]`: value at `first` per unit value at `last`
    /// for any load at or right of `last`.
    pub fn left_ratio(&self) -> &T {
        &self.left_ratio
    }

    /// `G^R[first] / G^L[first]`: value at `last` per unit value at
    /// `first` for any load at or left of `first`.
    pub fn right_ratio(&self) -> &T {
        &self.right_ratio
    }

    /// `(β^L, β^R)`: the owned slice of `F` dotted with the owned slices of
    /// `G^L` and `G^R`.
    pub fn local_betas(&self, f_local: &[T]) -> Result<(T, T), DichotomyError> {
        let len = self.last - self.first + 1;
        if f_local.len() != len {
            return Err(DichotomyError::DimensionMismatch {
                expected: len,
                found: f_local.len(),
            });
        }
        let mut bl = T::zero();
        let mut br = T::zero();
        for (i, f) in f_local.iter().enumerate() {
            bl = bl + f.clone() * self.g_left[self.first + i].clone();
            br = br + f.clone() * self.g_right[self.first + i].clone();
        }
        Ok((bl, br))
    }

    /// Solves the owned block once both boundary values are known.
    pub(crate) fn finish(&self, f_local: &[T], x_first: T, x_last: T) -> Vec<T> {
        let len = f_local.len();
        let mut x = Vec::with_capacity(len);
        x.push(x_first.clone());
        if let Some(fac) = &self.interior {
            let mut g = f_local[1..len - 1].to_vec();
            g[0] = g[0].clone() - self.c_first.clone() * x_first;
            let k = g.len() - 1;
            g[k] = g[k].clone() - self.a_last.clone() * x_last.clone();
            fac.solve_leading_in_place(&mut g);
            x.extend(g);
        }
        if len > 1 {
            x.push(x_last);
        }
        x
    }

    fn hash_into(&self, h: &mut DefaultHasher) {
        h.write_usize(self.first);
        h.write_usize(self.last);
        for v in self.g_left.iter().chain(&self.g_right).chain(&self.z_left).chain(&self.z_right).chain([
            &self.left_ratio,
            &self.right_ratio,
            &self.c_first,
            &self.a_last,
        ]) {
            h.write_u64(v.to_f64().unwrap_or(f64::NAN).to_bits());
        }
        if let Some(fac) = &self.interior {
            for v in fac.pivots() {
                h.write_u64(v.to_f64().unwrap_or(f64::NAN).to_bits());
            }
        }
    }
}

/// Immutable per-matrix preparation for all ranks of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyPlan<T> {
    partition: Partition,
    tree: Tree,
    ranks: Vec<RankPlan<T>>,
    full: Option<ThomasFactorization<T>>,
}

impl<T: Scalar> DichotomyPlan<T> {
    /// Builds every rank's plan. Each rank only needs the replicated bands
    /// of `a`; no communication is involved.
    pub fn build(a: &TridiagonalMatrix<T>, partition: Partition) -> Result<Self, DichotomyError> {
        if partition.order() != a.order() {
            return Err(DichotomyError::InvalidPartition(format!(
                "partition covers {} unknowns, matrix has order {}",
                partition.order(),
                a.order()
            )));
        }
        let fac = a.factorize()?;
        let ranks = (0..partition.ranks())
            .map(|m| RankPlan::build(a, &fac, m, partition.first(m), partition.last(m)))
            .collect::<Result<Vec<_>, _>>()?;
        let p = partition.ranks();
        Ok(Self {
            tree: Tree::new(p),
            full: (p == 1).then_some(fac),
            partition,
            ranks,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn rank(&self, m: usize) -> &RankPlan<T> {
        &self.ranks[m]
    }

    pub fn order(&self) -> usize {
        self.partition.order()
    }

    pub fn local_betas(&self, m: usize, f_local: &[T]) -> Result<(T, T), DichotomyError> {
        self.ranks[m].local_betas(f_local)
    }

    pub(crate) fn full_factorization(&self) -> Option<&ThomasFactorization<T>> {
        self.full.as_ref()
    }

    /// Hash of every stored number, to check that solves never mutate a plan.
    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for r in &self.ranks {
            r.hash_into(&mut h);
        }
        h.finish()
    }
}
