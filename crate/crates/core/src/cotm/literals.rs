use crate::error::{Error, Result};

/// Binary input over the literal space: positions `[0, V)` are the original
/// features, `[V, 2V)` their negations. Bit-packed into `u64` blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiteralVector {
    num_features: usize,
    blocks: Vec<u64>,
}

pub(crate) fn block_count(num_literals: usize) -> usize {
    num_literals.div_ceil(64)
}

impl LiteralVector {
    /// All-zero vector over `2 * num_features` literals.
    pub fn zeros(num_features: usize) -> Self {
        Self {
            num_features,
            blocks: vec![0; block_count(2 * num_features)],
        }
    }

    /// Sets the given features, then fills the negation half so that
    /// `bit[i + V] == !bit[i]`.
    pub fn from_features<I>(num_features: usize, present: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut x = Self::zeros(num_features);
        for f in present {
            if f >= num_features {
                return Err(Error::OutOfRange {
                    index: f,
                    limit: num_features,
                });
            }
            x.set(f);
        }
        for f in 0..num_features {
            if !x.get(f) {
                x.set(f + num_features);
            }
        }
        Ok(x)
    }

    /// Activates exactly the given literal indices. No negation closure.
    pub fn from_literals<I>(num_features: usize, literals: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut x = Self::zeros(num_features);
        let limit = 2 * num_features;
        for l in literals {
            if l >= limit {
                return Err(Error::OutOfRange { index: l, limit });
            }
            x.set(l);
        }
        Ok(x)
    }

    /// From a dense bit list of even length `2V`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: bits.len() + 1,
                actual: bits.len(),
            });
        }
        let mut x = Self::zeros(bits.len() / 2);
        for (l, &b) in bits.iter().enumerate() {
            if b {
                x.set(l);
            }
        }
        Ok(x)
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Number of literals, `2V`.
    pub fn len(&self) -> usize {
        2 * self.num_features
    }

    pub fn is_empty(&self) -> bool {
        self.num_features == 0
    }

    #[inline]
    pub fn get(&self, literal: usize) -> bool {
        debug_assert!(literal < self.len());
        self.blocks[literal / 64] >> (literal % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, literal: usize) {
        debug_assert!(literal < self.len());
        self.blocks[literal / 64] |= 1 << (literal % 64);
    }

    pub(crate) fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn count_ones(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Indices of active literals in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            BitIter(block).map(move |bit| bi * 64 + bit)
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len()).map(|l| self.get(l) as u8).collect()
    }

    pub fn is_negation_closed(&self) -> bool {
        let v = self.num_features;
        (0..v).all(|i| self.get(i) != self.get(i + v))
    }
}

/// Iterates set bit positions of a single word.
pub(crate) struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(bit)
    }
}
