use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest site count accepted by paths that enumerate all `2^N` configurations.
pub const MAX_SITES: usize = 20;

/// Largest site count accepted by paths that build dense `2^N x 2^N` operators.
pub const MAX_DENSE_SITES: usize = 14;

/// A classical configuration of `N` spins, stored as an index into `[0, 2^N)`.
///
/// Bit `b` of the index holds spin `b`: a cleared bit is spin `+1`, a set bit is
/// spin `-1`. Every module uses this encoding, so index arithmetic (bit flips,
/// complements, Hamming distances) can be done directly on the integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinConfiguration {
    index: usize,
    n: usize,
}

impl SpinConfiguration {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(invalid(format!("site count {n} must be in 1..=63")));
        }
        if index >= 1usize << n {
            return Err(invalid(format!("index {index} out of range for N={n}")));
        }
        Ok(Self { index, n })
    }

    /// Encodes a `±1` spin vector.
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut index = 0usize;
        for (b, &s) in spins.iter().enumerate() {
            match s {
                1 => {}
                -1 => index |= 1 << b,
                other => return Err(invalid(format!("spin value {other} is not ±1"))),
            }
        }
        Self::new(index, spins.len())
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spin(&self, site: usize) -> i8 {
        spin_of(self.index, site)
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.n).map(|b| self.spin(b)).collect()
    }

    pub fn flipped(&self, site: usize) -> Self {
        Self { index: self.index ^ (1 << site), n: self.n }
    }

    /// The globally flipped configuration.
    pub fn complement(&self) -> Self {
        Self { index: self.index ^ ((1 << self.n) - 1), n: self.n }
    }
}

/// Spin value (`+1` or `-1`) of `site` in configuration `index`.
#[inline]
pub fn spin_of(index: usize, site: usize) -> i8 {
    1 - 2 * ((index >> site) & 1) as i8
}

/// Number of configurations for `n` sites.
#[inline]
pub fn dimension(n: usize) -> usize {
    1usize << n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bit_zero_is_spin_up() {
        let x = SpinConfiguration::new(0b10, 2).unwrap();
        assert_eq!(x.spins(), vec![1, -1]);
        assert_eq!(x.complement().index(), 0b01);
        assert_eq!(x.flipped(1).index(), 0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SpinConfiguration::new(4, 2).is_err());
        assert!(SpinConfiguration::from_spins(&[1, 0]).is_err());
    }

    proptest! {
        #[test]
        fn spin_vector_round_trip(n in 1usize..20, raw in any::<u64>()) {
            let index = (raw as usize) & ((1 << n) - 1);
            let x = SpinConfiguration::new(index, n).unwrap();
            let back = SpinConfiguration::from_spins(&x.spins()).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
