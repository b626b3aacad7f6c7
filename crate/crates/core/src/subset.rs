//! Subsets of `{0..n−1}` as bitmasks, with the lexicographic order on
//! their sorted element lists used for exterior-power bases.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subset {
    n: usize,
    mask: u32,
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl serde::Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl Ord for Subset {
    /// By size, then lexicographically on the sorted members.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.len(), self.members()).cmp(&(other.n, other.len(), other.members()))
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Subset {
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &m in members {
            if m >= n {
                return Err(Error::Range(format!("element {m} outside 0..{n}")));
            }
            if mask >> m & 1 == 1 {
                return Err(Error::Parse(format!("repeated element {m}")));
            }
            mask |= 1 << m;
        }
        Ok(Subset { n, mask })
    }

    pub fn from_mask(n: usize, mask: u32) -> Self {
        debug_assert!(n >= 32 || mask >> n == 0);
        Subset { n, mask }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.n && self.mask >> x & 1 == 1
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.n).filter(|&x| self.contains(x)).collect()
    }

    pub fn complement(&self) -> Subset {
        let full = if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        Subset { n: self.n, mask: full & !self.mask }
    }

    /// `"0,2"`, the key format of serialized wedge vectors.
    pub fn key(&self) -> String {
        let m: Vec<String> = self.members().iter().map(|x| x.to_string()).collect();
        m.join(",")
    }

    pub fn parse_key(n: usize, s: &str) -> Result<Subset> {
        if s.trim().is_empty() {
            return Subset::new(n, &[]);
        }
        let members: std::result::Result<Vec<usize>, _> =
            s.split(',').map(|x| x.trim().parse::<usize>()).collect();
        Subset::new(n, &members.map_err(|_| Error::Parse(format!("bad subset key {s:?}")))?)
    }
}

/// All `k`-subsets of `{0..n−1}` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Subset> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Subset>) {
        if cur.len() == k {
            out.push(Subset::new(n, cur).expect("in range"));
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(n, k, x + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// The proper nonempty subsets, by size then lexicographically. This order
/// indexes the subset coordinates of the t-map domain.
pub fn proper_subsets(n: usize) -> Vec<Subset> {
    (1..n).flat_map(|k| k_subsets(n, k)).collect()
}

/// Position of a `k`-subset in [`k_subsets`] order.
pub fn lex_index(s: &Subset) -> usize {
    // Count the k-subsets that precede s: combinatorial number system on
    // the lexicographic order of sorted lists.
    let n = s.n();
    let k = s.len();
    let members = s.members();
    let mut idx = 0;
    let mut prev: usize = 0;
    for (pos, &m) in members.iter().enumerate() {
        let start = if pos == 0 { 0 } else { prev + 1 };
        for x in start..m {
            idx += binomial(n - x - 1, k - pos - 1);
        }
        prev = m;
    }
    idx
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sign of the shuffle putting the concatenation of two disjoint sorted
/// lists into sorted order.
pub fn shuffle_sign(a: &Subset, b: &Subset) -> i32 {
    let mut inversions = 0;
    for x in a.members() {
        inversions += b.members().iter().filter(|&&y| y < x).count();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_order_and_index() {
        let s = k_subsets(4, 2);
        let keys: Vec<String> = s.iter().map(|x| x.key()).collect();
        assert_eq!(keys, ["0,1", "0,2", "0,3", "1,2", "1,3", "2,3"]);
        for n in 0..=6 {
            for k in 0..=n {
                let all = k_subsets(n, k);
                assert_eq!(all.len(), binomial(n, k));
                for (i, x) in all.iter().enumerate() {
                    assert_eq!(lex_index(x), i);
                }
            }
        }
    }

    #[test]
    fn proper_subset_count() {
        for n in 2..=6 {
            assert_eq!(proper_subsets(n).len(), (1 << n) - 2);
        }
        let p = proper_subsets(3);
        assert_eq!(p[0].key(), "0");
        assert_eq!(p[3].key(), "0,1");
    }

    #[test]
    fn complements_and_signs() {
        let a = Subset::new(4, &[0, 2]).unwrap();
        assert_eq!(a.complement().key(), "1,3");
        // e_0∧e_2∧e_1∧e_3 = −e_{0123}
        assert_eq!(shuffle_sign(&a, &a.complement()), -1);
        let b = Subset::new(4, &[0, 1]).unwrap();
        assert_eq!(shuffle_sign(&b, &b.complement()), 1);
        assert!(Subset::new(3, &[3]).is_err());
        assert!(Subset::new(3, &[1, 1]).is_err());
        assert_eq!(Subset::parse_key(3, "2,0").unwrap(), Subset::new(3, &[0, 2]).unwrap());
    }
}
