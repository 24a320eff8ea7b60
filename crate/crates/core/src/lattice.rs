//! Cycle and periodic-lattice descriptions.
//!
//! Vertices of `Z_{n1} x ... x Z_{nd}` are flattened in row-major order: the
//! first coordinate is the most significant digit.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest vertex count for which dense per-vertex columns are allocated.
pub const MAX_DENSE_VERTICES: usize = 1 << 24;

/// The cycle `Z_n`, `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleSpec {
    n: usize,
    is_odd: bool,
}

impl CycleSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("cycle needs n >= 2, got {n}")));
        }
        Ok(Self {
            n,
            is_odd: n % 2 == 1,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_odd(&self) -> bool {
        self.is_odd
    }

    /// Number of distinct eigenvalues `cos(2 pi j / n)`, i.e. `floor(n/2) + 1`.
    pub fn eigenvalue_classes(&self) -> usize {
        self.n / 2 + 1
    }

    /// Offset that is farthest from 0 on the cycle.
    pub fn antipode(&self) -> usize {
        self.n / 2
    }
}

/// The periodic lattice `Z_{n1} x Z_{n2} x ... x Z_{nd}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    dims: Vec<usize>,
    len: usize,
    all_odd: bool,
    pairwise_coprime: bool,
    theorem3_eligible: bool,
}

impl LatticeSpec {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(invalid("lattice needs at least one dimension"));
        }
        if let Some(&bad) = dims.iter().find(|&&n| n < 2) {
            return Err(invalid(format!("every cycle needs n >= 2, got {bad}")));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Size(format!("vertex count of {dims:?} overflows usize")))?;
        let all_odd = dims.iter().all(|n| n % 2 == 1);
        let pairwise_coprime = dims
            .iter()
            .enumerate()
            .all(|(i, &a)| dims[i + 1..].iter().all(|&b| gcd(a, b) == 1));
        let theorem3_eligible = dims.len() == 2 && dims[0] > dims[1] && all_odd && pairwise_coprime;
        Ok(Self {
            dims: dims.to_vec(),
            len,
            all_odd,
            pairwise_coprime,
            theorem3_eligible,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of coordinates `d`.
    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    /// Number of vertices `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_dim(&self) -> usize {
        *self.dims.iter().max().expect("non-empty dims")
    }

    pub fn all_odd(&self) -> bool {
        self.all_odd
    }

    pub fn pairwise_coprime(&self) -> bool {
        self.pairwise_coprime
    }

    /// `d = 2`, `n1 > n2`, both odd and coprime.
    pub fn theorem3_eligible(&self) -> bool {
        self.theorem3_eligible
    }

    pub fn cycles(&self) -> impl Iterator<Item = CycleSpec> + '_ {
        self.dims.iter().map(|&n| CycleSpec {
            n,
            is_odd: n % 2 == 1,
        })
    }

    pub fn ensure_dense(&self) -> Result<()> {
        if self.len > MAX_DENSE_VERTICES {
            return Err(Error::Size(format!(
                "{} vertices exceed the dense limit of {MAX_DENSE_VERTICES}",
                self.len
            )));
        }
        Ok(())
    }

    /// Flat index of a coordinate tuple. Coordinates are reduced modulo each `n_i`.
    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &n)| acc * n + c % n)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % n;
            index /= n;
        }
        out
    }

    /// Flat index of `a - b` in the group.
    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for &n in self.dims.iter().rev() {
            let (ai, bi) = (a % n, b % n);
            out += ((ai + n - bi) % n) * place;
            place *= n;
            a /= n;
            b /= n;
        }
        out
    }

    /// Flat index of `a + b` in the group.
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for &n in self.dims.iter().rev() {
            out += ((a % n + b % n) % n) * place;
            place *= n;
            a /= n;
            b /= n;
        }
        out
    }

    /// Flat index of `-a`.
    pub fn neg_index(&self, a: usize) -> usize {
        self.sub_index(0, a)
    }
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_cycles() {
        assert!(CycleSpec::new(1).is_err());
        assert!(CycleSpec::new(0).is_err());
        let c = CycleSpec::new(7).unwrap();
        assert!(c.is_odd());
        assert_eq!(c.eigenvalue_classes(), 4);
        assert!(!CycleSpec::new(8).unwrap().is_odd());
    }

    #[test]
    fn lattice_validation() {
        assert!(LatticeSpec::new(&[]).is_err());
        assert!(LatticeSpec::new(&[5, 1]).is_err());
        let huge = [usize::MAX / 2, 4];
        assert!(matches!(LatticeSpec::new(&huge), Err(Error::Size(_))));
    }

    #[test]
    fn theorem3_flag() {
        assert!(LatticeSpec::new(&[95, 93]).unwrap().theorem3_eligible());
        assert!(LatticeSpec::new(&[19, 5]).unwrap().theorem3_eligible());
        // order, parity and coprimality all matter
        assert!(!LatticeSpec::new(&[5, 19]).unwrap().theorem3_eligible());
        assert!(!LatticeSpec::new(&[9, 3]).unwrap().theorem3_eligible());
        assert!(!LatticeSpec::new(&[10, 3]).unwrap().theorem3_eligible());
        assert!(!LatticeSpec::new(&[7, 5, 3]).unwrap().theorem3_eligible());
    }

    #[test]
    fn index_arithmetic() {
        let l = LatticeSpec::new(&[4, 3, 5]).unwrap();
        assert_eq!(l.len(), 60);
        for i in 0..l.len() {
            assert_eq!(l.index(&l.coords(i)), i);
            for j in 0..l.len() {
                let s = l.sub_index(i, j);
                assert_eq!(l.add_index(s, j), i);
            }
        }
        assert_eq!(l.coords(l.neg_index(l.index(&[1, 1, 1]))), vec![3, 2, 4]);
    }
}
