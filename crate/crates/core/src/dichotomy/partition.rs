use std::ops::RangeInclusive;

use super::DichotomyError;

/// Contiguous ownership of unknowns by ranks.
///
/// Rank `m` (0-based) owns global indices `first(m)..=last(m)` (0-based).
/// Every block holds at least two unknowns when `p > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    sizes: Vec<usize>,
    starts: Vec<usize>,
}

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Result<Self, DichotomyError> {
        if sizes.is_empty() {
            return Err(DichotomyError::InvalidPartition("no ranks".into()));
        }
        let min = if sizes.len() == 1 { 1 } else { 2 };
        if let Some(m) = sizes.iter().position(|&s| s < min) {
            return Err(DichotomyError::InvalidPartition(format!(
                "rank {m} owns {} unknowns, at least {min} required",
                sizes[m]
            )));
        }
        let mut starts = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            starts.push(acc);
            acc += s;
        }
        Ok(Self { sizes, starts })
    }

    /// Near-equal blocks; the first `n mod p` ranks get one extra unknown.
    pub fn uniform(n: usize, p: usize) -> Result<Self, DichotomyError> {
        if p == 0 {
            return Err(DichotomyError::InvalidPartition("no ranks".into()));
        }
        let (q, r) = (n / p, n % p);
        Self::new((0..p).map(|m| q + usize::from(m < r)).collect())
    }

    pub fn ranks(&self) -> usize {
        self.sizes.len()
    }

    pub fn order(&self) -> usize {
        self.starts.last().copied().unwrap_or(0) + self.sizes.last().copied().unwrap_or(0)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, m: usize) -> usize {
        self.sizes[m]
    }

    pub fn first(&self, m: usize) -> usize {
        self.starts[m]
    }

    pub fn last(&self, m: usize) -> usize {
        self.starts[m] + self.sizes[m] - 1
    }

    pub fn range(&self, m: usize) -> RangeInclusive<usize> {
        self.first(m)..=self.last(m)
    }

    /// Rank owning global index `i`.
    pub fn owner(&self, i: usize) -> Option<usize> {
        if i >= self.order() {
            return None;
        }
        Some(self.starts.partition_point(|&s| s <= i) - 1)
    }

    pub fn scatter<T: Clone>(&self, x: &[T]) -> Result<Vec<Vec<T>>, DichotomyError> {
        if x.len() != self.order() {
            return Err(DichotomyError::DimensionMismatch {
                expected: self.order(),
                found: x.len(),
            });
        }
        Ok((0..self.ranks()).map(|m| x[self.range(m)].to_vec()).collect())
    }

    pub fn gather<T>(&self, parts: Vec<Vec<T>>) -> Vec<T> {
        parts.into_iter().flatten().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_follow_prefix_sums() {
        let p = Partition::new(vec![2, 3, 4]).unwrap();
        assert_eq!(p.order(), 9);
        assert_eq!((p.first(1), p.last(1)), (2, 4));
        assert_eq!((p.first(2), p.last(2)), (5, 8));
        assert_eq!(p.owner(4), Some(1));
        assert_eq!(p.owner(5), Some(2));
        assert_eq!(p.owner(9), None);
    }

    #[test]
    fn blocks_need_two_unknowns() {
        assert!(Partition::new(vec![2, 1]).is_err());
        assert!(Partition::new(vec![1]).is_ok());
        assert!(Partition::uniform(7, 4).is_err());
        assert_eq!(Partition::uniform(10, 4).unwrap().sizes(), &[3, 3, 2, 2]);
    }

    #[test]
    fn scatter_gather_round_trip() {
        let p = Partition::new(vec![2, 2, 3]).unwrap();
        let x: Vec<i32> = (0..7).collect();
        let parts = p.scatter(&x).unwrap();
        assert_eq!(parts[2], vec![4, 5, 6]);
        assert_eq!(p.gather(parts), x);
    }
}
