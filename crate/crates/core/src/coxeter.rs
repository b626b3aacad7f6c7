//! The symmetric group S_n as a Coxeter group.
//!
//! Permutations are windows: `window[j] = w(j)`. Composition is
//! `(u∘w)(x) = u(w(x))` and the generator `s_i` (1 ≤ i ≤ n−1) swaps the
//! positions `i−1` and `i`. A word `[a, b, c]` is the product `s_a∘s_b∘s_c`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation {
    window: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.window)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.window.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub type Word = Vec<usize>;

/// Largest rank accepted by the operations that enumerate reduced words.
pub const MAX_ENUMERATION_RANK: usize = 7;
/// Stop enumerating reduced words beyond this many (S_7's longest element
/// alone has over a billion).
pub const MAX_REDUCED_WORDS: usize = 2_000_000;

impl Permutation {
    pub fn new(window: Vec<usize>) -> Result<Self> {
        let n = window.len();
        let mut seen = vec![false; n];
        for &x in &window {
            if x >= n || seen[x] {
                return Err(Error::Parse(format!("{window:?} is not a permutation window")));
            }
            seen[x] = true;
        }
        Ok(Permutation { window })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { window: (0..n).collect() }
    }

    /// The reversal `[n−1, …, 0]`.
    pub fn longest(n: usize) -> Self {
        Permutation { window: (0..n).rev().collect() }
    }

    pub fn generator(n: usize, i: usize) -> Result<Self> {
        check_generator(n, i)?;
        let mut w = Self::identity(n);
        w.window.swap(i - 1, i);
        Ok(w)
    }

    pub fn from_word(n: usize, word: &[usize]) -> Result<Self> {
        let mut w = Self::identity(n);
        // s_a∘s_b∘… : right-multiplying by s_i swaps the window positions i−1, i
        for &i in word {
            check_generator(n, i)?;
            w.window.swap(i - 1, i);
        }
        Ok(w)
    }

    /// All of S_n in lexicographic window order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if cur.len() == n {
                out.push(Permutation { window: cur.clone() });
                return;
            }
            for x in 0..n {
                if !used[x] {
                    used[x] = true;
                    cur.push(x);
                    rec(n, cur, used, out);
                    cur.pop();
                    used[x] = false;
                }
            }
        }
        rec(n, &mut cur, &mut used, &mut out);
        out
    }

    pub fn n(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn apply(&self, x: usize) -> usize {
        self.window[x]
    }

    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.n(), other.n(), "composing permutations of different sizes");
        Permutation { window: other.window.iter().map(|&x| self.window[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (j, &x) in self.window.iter().enumerate() {
            inv[x] = j;
        }
        Permutation { window: inv }
    }

    pub fn length(&self) -> usize {
        let w = &self.window;
        let mut c = 0;
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                if w[a] > w[b] {
                    c += 1;
                }
            }
        }
        c
    }

    /// Generators `i` with `w∘s_i < w`, i.e. `w(i−1) > w(i)`.
    pub fn right_descents(&self) -> Vec<usize> {
        (1..self.n()).filter(|&i| self.window[i - 1] > self.window[i]).collect()
    }

    /// Generators occurring in one (equivalently every) reduced word.
    pub fn support(&self) -> BTreeSet<usize> {
        (1..self.n()).filter(|&i| !self.stabilizes_prefix(i)).collect()
    }

    /// Whether `w({0..i−1}) = {0..i−1}`.
    pub fn stabilizes_prefix(&self, i: usize) -> bool {
        self.window[..i].iter().all(|&x| x < i)
    }

    /// `d_i(w) = #{k ≥ i : w(k) < i}`.
    pub fn crossing_number(&self, i: usize) -> Result<usize> {
        check_generator(self.n(), i)?;
        Ok(self.window[i..].iter().filter(|&&x| x < i).count())
    }

    /// `#{(j,k) ∈ {0..i−1}×{i..n−1} : w(k) < w(j)}`.
    pub fn pair_count(&self, i: usize) -> Result<usize> {
        check_generator(self.n(), i)?;
        let w = &self.window;
        let mut c = 0;
        for j in 0..i {
            for k in i..w.len() {
                if w[k] < w[j] {
                    c += 1;
                }
            }
        }
        Ok(c)
    }

    /// Every reduced word, found breadth-first by peeling right descents
    /// off the end.
    pub fn reduced_words(&self) -> Result<BTreeSet<Word>> {
        check_enumerable(self.n())?;
        let mut memo: HashMap<Permutation, BTreeSet<Word>> = HashMap::new();
        memo.insert(Permutation::identity(self.n()), BTreeSet::from([Vec::new()]));
        // Layer the prefixes below w by length and fill them shortest first.
        let mut layers: Vec<BTreeSet<Permutation>> = vec![BTreeSet::new(); self.length() + 1];
        let mut queue = VecDeque::from([self.clone()]);
        layers[self.length()].insert(self.clone());
        while let Some(w) = queue.pop_front() {
            for i in w.right_descents() {
                let mut v = w.clone();
                v.window.swap(i - 1, i);
                if layers[v.length()].insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
        for layer in layers.iter().skip(1) {
            for w in layer {
                let mut words = BTreeSet::new();
                for i in w.right_descents() {
                    let mut v = w.clone();
                    v.window.swap(i - 1, i);
                    for pre in &memo[&v] {
                        let mut word = pre.clone();
                        word.push(i);
                        words.insert(word);
                    }
                }
                if words.len() > MAX_REDUCED_WORDS {
                    return Err(Error::TooLarge(format!(
                        "more than {MAX_REDUCED_WORDS} reduced words below {w:?}"
                    )));
                }
                memo.insert(w.clone(), words);
            }
        }
        Ok(memo.remove(self).expect("w is in its own top layer"))
    }

    /// Minimum number of occurrences of `s_i` over all reduced words
    /// (exhaustive; an oracle for [`Self::crossing_number`]).
    pub fn min_generator_multiplicity(&self, i: usize) -> Result<usize> {
        check_generator(self.n(), i)?;
        let words = self.reduced_words()?;
        Ok(words.iter().map(|w| w.iter().filter(|&&x| x == i).count()).min().unwrap_or(0))
    }

    /// Rank matrix `r(a,b) = #{c ≤ b : w(c) ≤ a}`.
    pub fn rank_matrix(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut r = vec![vec![0; n]; n];
        for a in 0..n {
            let mut acc = 0;
            for b in 0..n {
                if self.window[b] <= a {
                    acc += 1;
                }
                r[a][b] = acc;
            }
        }
        r
    }

    pub fn bruhat_leq(&self, other: &Permutation) -> Result<bool> {
        if self.n() != other.n() {
            return Err(Error::Dimension(format!(
                "permutations of sizes {} and {}",
                self.n(),
                other.n()
            )));
        }
        let (ru, rw) = (self.rank_matrix(), other.rank_matrix());
        Ok(ru.iter().flatten().zip(rw.iter().flatten()).all(|(a, b)| a >= b))
    }

    /// Number of transpositions `t` with `s_i ∉ support(t∘w)`. The Schubert
    /// smoothness predicate used with the multiplicity-free forms is
    /// `reflections_dropping(w, i) == 1`.
    pub fn reflections_dropping(&self, i: usize) -> Result<usize> {
        check_generator(self.n(), i)?;
        let n = self.n();
        let mut count = 0;
        for a in 0..n {
            for b in a + 1..n {
                // t∘w relabels the values a and b
                let tw: Vec<usize> = self
                    .window
                    .iter()
                    .map(|&x| if x == a { b } else if x == b { a } else { x })
                    .collect();
                if tw[..i].iter().all(|&x| x < i) {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Finds `w'` with `s_i ∉ support(w')` such that `w'∘w` is one of the
    /// multiplicity-free forms `s_i`, `s_i s_{i−1}…`, `s_i s_{i+1}…` or
    /// `s_i s_{i−1}… s_{i+1}…`. The search runs over `s_i`-free permutations
    /// by increasing length.
    pub fn multfree_decompose(&self, i: usize) -> Result<(Permutation, WeilForm)> {
        let n = self.n();
        if self.crossing_number(i)? != 1 {
            return Err(Error::Precondition(format!(
                "s_{i} must occur exactly once in some reduced word of {self:?}"
            )));
        }
        let forms: Vec<(WeilForm, Permutation)> = WeilForm::all(n, i)
            .into_iter()
            .map(|f| {
                let p = Permutation::from_word(n, &f.word()).expect("forms use valid generators");
                (f, p)
            })
            .collect();
        let mut candidates: Vec<Permutation> =
            Permutation::all(n).into_iter().filter(|w| w.stabilizes_prefix(i)).collect();
        candidates.sort_by_key(|w| (w.length(), w.window.clone()));
        for wp in candidates {
            let prod = wp.compose(self);
            if let Some((f, _)) = forms.iter().find(|(_, p)| *p == prod) {
                return Ok((wp, f.clone()));
            }
        }
        Err(Error::Invariant(format!("no multiplicity-free form reachable from {self:?} at s_{i}")))
    }
}

/// The four multiplicity-free shapes, with the generator runs they use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum WeilForm {
    Single { i: usize },
    Down { i: usize, down: usize },
    Up { i: usize, up: usize },
    DownUp { i: usize, down: usize, up: usize },
}

impl WeilForm {
    pub fn all(n: usize, i: usize) -> Vec<WeilForm> {
        let mut v = vec![WeilForm::Single { i }];
        let max_down = i - 1;
        let max_up = n - 1 - i;
        for down in 1..=max_down {
            v.push(WeilForm::Down { i, down });
        }
        for up in 1..=max_up {
            v.push(WeilForm::Up { i, up });
        }
        for down in 1..=max_down {
            for up in 1..=max_up {
                v.push(WeilForm::DownUp { i, down, up });
            }
        }
        v
    }

    pub fn tag(&self) -> usize {
        match self {
            WeilForm::Single { .. } => 1,
            WeilForm::Down { .. } => 2,
            WeilForm::Up { .. } => 3,
            WeilForm::DownUp { .. } => 4,
        }
    }

    pub fn word(&self) -> Word {
        let (i, down, up) = match *self {
            WeilForm::Single { i } => (i, 0, 0),
            WeilForm::Down { i, down } => (i, down, 0),
            WeilForm::Up { i, up } => (i, 0, up),
            WeilForm::DownUp { i, down, up } => (i, down, up),
        };
        let mut w = vec![i];
        w.extend((1..=down).map(|d| i - d));
        w.extend((1..=up).map(|u| i + u));
        w
    }
}

fn check_generator(n: usize, i: usize) -> Result<()> {
    if i == 0 || i >= n {
        return Err(Error::Range(format!("generator s_{i} outside 1..{}", n.saturating_sub(1))));
    }
    Ok(())
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_RANK {
        return Err(Error::TooLarge(format!(
            "reduced-word enumeration is limited to n ≤ {MAX_ENUMERATION_RANK}, got {n}"
        )));
    }
    Ok(())
}

pub fn parse_window(s: &str) -> Result<Permutation> {
    let v: std::result::Result<Vec<usize>, _> =
        s.split(',').map(|x| x.trim().parse::<usize>()).collect();
    Permutation::new(v.map_err(|_| Error::Parse(format!("bad window {s:?}")))?)
}

/// `"1-2-1"` → `[1, 2, 1]`; the empty string is the empty word.
pub fn parse_word(s: &str) -> Result<Word> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split('-')
        .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad word {s:?}"))))
        .collect()
}
