//! Multi-indices in `Z^n`, boxes `Q_N = {α : |α|∞ ≤ N}` and the shell
//! enumeration `σ`.
//!
//! `σ` lists `Q_0`, then `Q_1 ∖ Q_0`, then `Q_2 ∖ Q_1`, and so on. Inside a
//! shell the order is lexicographic on tuples, so that `σ` (and everything
//! serialised in σ-order) is reproducible. With zero-based indices, shell `N`
//! occupies the index range `[(2N-1)^n, (2N+1)^n)` and the image of
//! `{0, …, (2N+1)^n - 1}` is exactly `Q_N`.

use std::fmt;
use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};

/// A point of `Z^n`, the exponent of a Laurent monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(entries: Vec<i64>) -> Self {
        assert!(!entries.is_empty(), "multi-index must have dimension >= 1");
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex::new(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// `|α|∞ = max_j |α_j|`.
    pub fn linf_norm(&self) -> u64 {
        linf_norm(&self.0)
    }

    /// `[α] = Σ α_j`.
    pub fn length(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&a| a >= 0)
    }

    /// Entries as derivative orders; `None` if any entry is negative.
    pub fn as_orders(&self) -> Option<Vec<u32>> {
        self.0.iter().map(|&a| u32::try_from(a).ok()).collect()
    }

    pub fn from_orders(orders: &[u32]) -> Self {
        MultiIndex::new(orders.iter().map(|&g| g as i64).collect())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex::new(v)
    }
}

impl Index<usize> for MultiIndex {
    type Output = i64;

    fn index(&self, j: usize) -> &i64 {
        &self.0[j]
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;

    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `max_j |α_j|` on a raw slice.
pub fn linf_norm(alpha: &[i64]) -> u64 {
    alpha.iter().map(|a| a.unsigned_abs()).max().unwrap_or(0)
}

fn pow(base: u64, n: usize) -> u64 {
    base.checked_pow(n as u32)
        .expect("box size overflows u64")
}

/// `|Q_N| = (2N+1)^n`.
pub fn box_size(big_n: u64, n: usize) -> usize {
    pow(2 * big_n + 1, n) as usize
}

/// First σ-index of shell `N`: `0` for `N = 0`, else `(2N-1)^n`.
pub fn shell_start(big_n: u64, n: usize) -> usize {
    if big_n == 0 {
        0
    } else {
        pow(2 * big_n - 1, n) as usize
    }
}

/// Largest `M_1` with `(2M_1+1)^n ≤ M`, by exact integer search.
///
/// Equivalent to `⌊(M^{1/n} - 1)/2⌋` without a floating-point root.
pub fn box_index_bound(m: u64, n: usize) -> u64 {
    assert!(m >= 1, "box_index_bound needs M >= 1");
    assert!(n >= 1);
    let fits = |k: u64| -> bool {
        match (2 * k + 1).checked_pow(n as u32) {
            Some(v) => v <= m,
            None => false,
        }
    };
    // (2k+1)^n <= M implies k <= M/2.
    let (mut lo, mut hi) = (0u64, m / 2 + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Shell number `|σ(j)|∞` of a σ-index.
pub fn shell_of(j: usize, n: usize) -> u64 {
    if j == 0 {
        0
    } else {
        box_index_bound(j as u64, n) + 1
    }
}

/// Number of tuples in `[-N, N]^rest` that complete a prefix into the shell
/// `|α|∞ = N`. `prefix_on_shell` says whether the prefix already has an
/// entry of modulus `N`.
fn completions(big_n: u64, rest: usize, prefix_on_shell: bool) -> u64 {
    let full = pow(2 * big_n + 1, rest);
    if prefix_on_shell {
        full
    } else if big_n == 0 {
        // Q_{-1} is empty.
        full
    } else {
        full - pow(2 * big_n - 1, rest)
    }
}

/// `σ(j)` in dimension `n`, by direct unranking inside the shell.
pub fn sigma(j: usize, n: usize) -> MultiIndex {
    assert!(n >= 1);
    let big_n = shell_of(j, n);
    let mut offset = (j - shell_start(big_n, n)) as u64;
    let bn = big_n as i64;
    let mut entries = Vec::with_capacity(n);
    let mut on_shell = big_n == 0;
    for p in 0..n {
        let rest = n - p - 1;
        let mut chosen = None;
        for v in -bn..=bn {
            let hit = on_shell || v.unsigned_abs() == big_n;
            let c = completions(big_n, rest, hit);
            if offset < c {
                chosen = Some((v, hit));
                break;
            }
            offset -= c;
        }
        let (v, hit) = chosen.expect("offset within shell");
        entries.push(v);
        on_shell = hit;
    }
    MultiIndex::new(entries)
}

/// Inverse of [`sigma`]: the σ-index of `α`.
pub fn sigma_inverse(alpha: &MultiIndex) -> usize {
    let n = alpha.dim();
    let big_n = alpha.linf_norm();
    let bn = big_n as i64;
    let mut rank = 0u64;
    let mut on_shell = big_n == 0;
    for (p, &a) in alpha.entries().iter().enumerate() {
        let rest = n - p - 1;
        for v in -bn..a {
            let hit = on_shell || v.unsigned_abs() == big_n;
            rank += completions(big_n, rest, hit);
        }
        on_shell = on_shell || a.unsigned_abs() == big_n;
    }
    shell_start(big_n, n) + rank as usize
}

/// All points of the shell `Q_N ∖ Q_{N-1}` in lexicographic order.
pub fn shell_points(big_n: u64, n: usize) -> Vec<MultiIndex> {
    let bn = big_n as i64;
    let mut out = Vec::new();
    let mut cur = vec![-bn; n];
    loop {
        if linf_norm(&cur) == big_n {
            out.push(MultiIndex::new(cur.clone()));
        }
        // odometer over [-N, N]^n, last coordinate fastest
        let mut p = n;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            if cur[p] < bn {
                cur[p] += 1;
                for q in cur.iter_mut().skip(p + 1) {
                    *q = -bn;
                }
                break;
            }
        }
    }
}

/// All `α` with `|α|∞ ≤ N`, shell by shell, lexicographic within a shell.
pub fn box_points(big_n: u64, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(box_size(big_n, n));
    for s in 0..=big_n {
        out.extend(shell_points(s, n));
    }
    out
}

/// Incrementally cached σ-enumeration.
///
/// Build it sequentially with [`BoxShellEnumeration::extend_to`]; afterwards
/// `get` only reads, so a warmed-up enumeration can be shared across threads.
#[derive(Clone, Debug)]
pub struct BoxShellEnumeration {
    dim: usize,
    cache: Vec<MultiIndex>,
    shells: Option<u64>,
}

impl BoxShellEnumeration {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        BoxShellEnumeration {
            dim,
            cache: Vec::new(),
            shells: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ensures the cache covers `Q_N`.
    pub fn extend_to(&mut self, big_n: u64) {
        let start = self.shells.map_or(0, |s| s + 1);
        for s in start..=big_n {
            self.cache.extend(shell_points(s, self.dim));
            self.shells = Some(s);
        }
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }

    pub fn get(&self, j: usize) -> Option<&MultiIndex> {
        self.cache.get(j)
    }

    /// `σ(j)`, extending the cache as needed.
    pub fn sigma(&mut self, j: usize) -> &MultiIndex {
        if j >= self.cache.len() {
            self.extend_to(shell_of(j, self.dim));
        }
        &self.cache[j]
    }

    pub fn as_slice(&self) -> &[MultiIndex] {
        &self.cache
    }
}
