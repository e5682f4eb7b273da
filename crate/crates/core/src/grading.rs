//! Multi-indices and the canonical graded-lex enumeration of monomials.
//!
//! Every coefficient table in the crate is laid out in the order produced by
//! [`enumerate`]: monomials sorted by total degree, and within one degree by
//! descending lexicographic comparison of exponents (`z1` before `z2`). Each
//! degree therefore occupies a contiguous ordinal range.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradingError {
    #[error("multi-index arity mismatch: {left} vs {right} variables")]
    ArityMismatch { left: usize, right: usize },
    #[error("a monomial order needs at least one variable")]
    NoVariables,
}

/// Exponent tuple `m` of the monomial `z^m = z1^m1 ... zn^mn`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// The exponent of the coordinate function `z_{var+1}`.
    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|m| = m1 + ... + mn`.
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// Exponent of the monomial product `z^self * z^other`.
    pub fn checked_add(&self, other: &MultiIndex) -> Result<MultiIndex, GradingError> {
        if self.nvars() != other.nvars() {
            return Err(GradingError::ArityMismatch {
                left: self.nvars(),
                right: other.nvars(),
            });
        }
        Ok(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if self.0.len() == 1 {
                write!(f, "z")?;
            } else {
                write!(f, "z{}", i + 1)?;
            }
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

pub fn degree(m: &MultiIndex) -> usize {
    m.degree()
}

pub fn add_indices(a: &MultiIndex, b: &MultiIndex) -> Result<MultiIndex, GradingError> {
    a.checked_add(b)
}

/// Bijection between multi-indices of degree `<= max_degree` and `0..len()`.
#[derive(Clone, Debug)]
pub struct MonomialOrder {
    nvars: usize,
    max_degree: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    // block_starts[k]..block_starts[k + 1] is the ordinal range of degree k
    block_starts: Vec<usize>,
}

impl MonomialOrder {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> &MultiIndex {
        &self.indices[ordinal]
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    /// Ordinals of the monomials of total degree exactly `k`.
    pub fn degree_range(&self, k: usize) -> Range<usize> {
        if k > self.max_degree {
            let end = self.indices.len();
            return end..end;
        }
        self.block_starts[k]..self.block_starts[k + 1]
    }

    /// Ordinals of all monomials of degree `< k`.
    pub fn below(&self, k: usize) -> Range<usize> {
        0..self.block_starts[k.min(self.max_degree + 1)]
    }

    pub fn degree_of(&self, ordinal: usize) -> usize {
        // block_starts is sorted; the block containing `ordinal` is the last start <= ordinal
        self.block_starts.partition_point(|&s| s <= ordinal) - 1
    }
}

/// Enumerates all multi-indices in `n` variables with degree `<= max_degree`.
pub fn enumerate(n: usize, max_degree: usize) -> Result<MonomialOrder, GradingError> {
    if n == 0 {
        return Err(GradingError::NoVariables);
    }
    let mut indices = Vec::new();
    let mut block_starts = Vec::with_capacity(max_degree + 2);
    for k in 0..=max_degree {
        block_starts.push(indices.len());
        let mut current = vec![0u32; n];
        compositions(k as u32, 0, &mut current, &mut indices);
    }
    block_starts.push(indices.len());
    let lookup = indices
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    Ok(MonomialOrder {
        nvars: n,
        max_degree,
        indices,
        lookup,
        block_starts,
    })
}

// Pushes every composition of `remaining` into positions `pos..` in descending lex order.
fn compositions(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    let n = current.len();
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        compositions(remaining - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// Binomial coefficient, used for table-size bookkeeping.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
