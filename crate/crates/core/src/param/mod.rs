//! Multi-indices, index sets, detail sets and the Legendre coupling structure.

mod legendre;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

pub use legendre::{coupling_coeff, legendre_eval};

/// Finitely supported sequence `ν ∈ ℕ₀^ℕ`, stored as sorted `(m, νₘ)` pairs
/// with `νₘ ≥ 1` and parameters numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex::default()
    }

    /// Unit index `εₘ`.
    pub fn unit(m: u32) -> Self {
        assert!(m >= 1, "parameters are numbered from 1");
        MultiIndex { entries: vec![(m, 1)] }
    }

    /// From dense components `(ν₁, ν₂, …)`.
    pub fn from_dense(nu: &[u32]) -> Self {
        let entries = nu
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, &v)| (i as u32 + 1, v))
            .collect();
        MultiIndex { entries }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn get(&self, m: u32) -> u32 {
        self.entries
            .binary_search_by_key(&m, |e| e.0)
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total degree `|ν|`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Largest active parameter, 0 for the zero index.
    pub fn max_param(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.0)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// `ν + εₘ`
    pub fn plus(&self, m: u32) -> Self {
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&m, |e| e.0) {
            Ok(i) => entries[i].1 += 1,
            Err(i) => entries.insert(i, (m, 1)),
        }
        MultiIndex { entries }
    }

    /// `ν - εₘ`, if nonnegative.
    pub fn minus(&self, m: u32) -> Option<Self> {
        let i = self.entries.binary_search_by_key(&m, |e| e.0).ok()?;
        let mut entries = self.entries.clone();
        if entries[i].1 == 1 {
            entries.remove(i);
        } else {
            entries[i].1 -= 1;
        }
        Some(MultiIndex { entries })
    }

    pub fn to_dense(&self, width: usize) -> Vec<u32> {
        let mut d = vec![0; width.max(self.max_param() as usize)];
        for &(m, v) in &self.entries {
            d[m as usize - 1] = v;
        }
        d
    }

    /// Tensor Legendre polynomial `P_ν(y) = Π Pₙ(yₘ)`; missing components of
    /// `y` are treated as outside the support and must not be referenced.
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(m, n)| legendre_eval(n as usize, y[m as usize - 1]))
            .product()
    }
}

impl Ord for MultiIndex {
    /// Graded order: total degree first, then larger leading components first,
    /// giving `0, ε₁, ε₂, …, 2ε₁, ε₁+ε₂, …`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (a, b) = (&self.entries, &other.entries);
            for (x, y) in a.iter().zip(b) {
                if x.0 != y.0 {
                    // the index with the earlier nonzero component is larger
                    return x.0.cmp(&y.0);
                }
                if x.1 != y.1 {
                    return y.1.cmp(&x.1);
                }
            }
            b.len().cmp(&a.len()).reverse()
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.to_dense(1);
        let parts: Vec<String> = d.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Finite set of multi-indices containing the zero index, kept in graded order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<MultiIndex>,
}

impl Default for IndexSet {
    fn default() -> Self {
        IndexSet { indices: vec![MultiIndex::zero()] }
    }
}

impl IndexSet {
    /// `{0}`
    pub fn new() -> Self {
        Self::default()
    }

    /// The zero index is always added.
    pub fn from_indices(indices: impl IntoIterator<Item = MultiIndex>) -> Self {
        let mut set: BTreeSet<MultiIndex> = indices.into_iter().collect();
        set.insert(MultiIndex::zero());
        IndexSet { indices: set.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn as_slice(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, nu: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(nu).ok()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.position(nu).is_some()
    }

    /// `M_P = #supp(P)`, the number of active parameters.
    pub fn n_active(&self) -> u32 {
        let s: BTreeSet<u32> = self.indices.iter().flat_map(|n| n.support()).collect();
        s.len() as u32
    }

    /// Largest active parameter.
    pub fn max_param(&self) -> u32 {
        self.indices.iter().map(|n| n.max_param()).max().unwrap_or(0)
    }

    pub fn union(&self, extra: &[MultiIndex]) -> IndexSet {
        IndexSet::from_indices(self.indices.iter().cloned().chain(extra.iter().cloned()))
    }

    /// Detail set `Q = {ν ± εₘ ∉ P : ν ∈ P, 1 ≤ m ≤ M_P + 1}` in graded order.
    pub fn detail_set(&self) -> Vec<MultiIndex> {
        let mp = self.n_active();
        let mut q = BTreeSet::new();
        for nu in &self.indices {
            for m in 1..=mp + 1 {
                let up = nu.plus(m);
                if !self.contains(&up) {
                    q.insert(up);
                }
                if let Some(down) = nu.minus(m) {
                    if !self.contains(&down) {
                        q.insert(down);
                    }
                }
            }
        }
        q.into_iter().collect()
    }
}

/// Entry of the stochastic Galerkin coupling pattern `∫ yₘ P_ν P_μ dπ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// `ν = μ`: only the mean term `a₀` couples.
    Diagonal,
    /// `μ = ν ± εₘ` with Legendre weight.
    Mode { m: u32, weight: f64 },
    None,
}

pub fn coupling_weight(nu: &MultiIndex, mu: &MultiIndex) -> Coupling {
    if nu == mu {
        return Coupling::Diagonal;
    }
    let (lo, hi) = match nu.degree() as i64 - mu.degree() as i64 {
        -1 => (nu, mu),
        1 => (mu, nu),
        _ => return Coupling::None,
    };
    // hi = lo + εₘ for exactly one m
    for &(m, v) in hi.entries() {
        if lo.get(m) + 1 == v && hi.minus(m).as_ref() == Some(lo) {
            let weight = coupling_coeff(v as usize).expect("v >= 1");
            return Coupling::Mode { m, weight };
        }
    }
    Coupling::None
}
