//! Filtered φ^f-modules written in a Frobenius eigenbasis.
//!
//! The flag is a list `v_0..v_{n−1}` of coordinate vectors and
//! `Fil_j := span(v_j..v_{n−1})`, so `Fil_0 = D` and `dim Fil_j = n − j`.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coxeter::Permutation;
use crate::error::{Error, Result};
use crate::linalg::{fmt_q, parse_q, q, qf, Matrix, Subspace, Q};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredPhiModule {
    pub n: usize,
    pub p: u64,
    pub f: u32,
    pub eigenvalues: Vec<Q>,
    pub weights: Vec<i64>,
    pub flag: Vec<Vec<Q>>,
}

/// An ordering `(φ_{τ(0)}, …, φ_{τ(n−1)})` of the eigenvalues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub tau: Permutation,
}

impl Refinement {
    pub fn identity(n: usize) -> Self {
        Refinement { tau: Permutation::identity(n) }
    }

    /// `I` occupies the first `|I|` slots.
    pub fn is_compatible(&self, i: &Subset) -> bool {
        (0..i.len()).all(|j| i.contains(self.tau.apply(j)))
    }
}

/// `I` in increasing order, then its complement in increasing order.
pub fn canonical_refinement(i: &Subset) -> Refinement {
    let mut w = i.members();
    w.extend(i.complement().members());
    Refinement { tau: Permutation::new(w).expect("a subset and its complement") }
}

/// Every refinement compatible with `I`.
pub fn compatible_refinements(i: &Subset) -> Vec<Refinement> {
    let n = i.n();
    let k = i.len();
    Permutation::all(n)
        .into_iter()
        .filter(|t| (0..k).all(|j| i.contains(t.apply(j))))
        .map(|tau| Refinement { tau })
        .collect()
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FilteredPhiModule {
    /// Every violated invariant, in a fixed order. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let n = self.n;
        let mut v = Vec::new();
        if n < 2 {
            v.push(format!("rank {n} is below 2"));
        }
        if !is_prime(self.p) {
            v.push(format!("p = {} is not prime", self.p));
        }
        if self.f == 0 {
            v.push("f must be at least 1".into());
        }
        if self.eigenvalues.len() != n {
            v.push(format!("{} eigenvalues for rank {n}", self.eigenvalues.len()));
        }
        if self.weights.len() != n {
            v.push(format!("{} weights for rank {n}", self.weights.len()));
        }
        if self.flag.len() != n || self.flag.iter().any(|r| r.len() != n) {
            v.push(format!("flag must be {n} vectors of length {n}"));
        }
        if !v.is_empty() {
            return v;
        }
        let pf = Q::from_integer(BigInt::from(self.p).pow(self.f));
        for (j, e) in self.eigenvalues.iter().enumerate() {
            if e.is_zero() {
                v.push(format!("eigenvalue {j} is zero"));
            }
        }
        if v.is_empty() {
            for j in 0..n {
                for k in 0..n {
                    if j == k {
                        continue;
                    }
                    let r = &self.eigenvalues[j] / &self.eigenvalues[k];
                    if r.is_one() {
                        v.push(format!("eigenvalues {j} and {k} coincide"));
                    } else if r == pf {
                        v.push(format!("ratio of eigenvalues {j} and {k} equals p^f"));
                    }
                }
            }
        }
        if self.weights.windows(2).any(|w| w[0] <= w[1]) {
            v.push("weights not strictly decreasing".into());
        }
        if self.flag_matrix().rank() != n {
            v.push("flag vectors are linearly dependent".into());
        }
        v
    }

    pub fn checked(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidModule(v.join("; ")))
        }
    }

    /// Columns are the flag vectors `v_0..v_{n−1}`.
    pub fn flag_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.flag)
    }

    pub fn filtration_subspace(&self, j: usize) -> Result<Subspace> {
        if j >= self.n {
            return Err(Error::Range(format!("filtration index {j} outside 0..{}", self.n)));
        }
        Ok(Subspace::span(self.n, &self.flag[j..]))
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Q> {
        let mut e = vec![Q::zero(); self.n];
        e[k] = Q::one();
        e
    }

    /// The permutation `w_R` with `g ∈ B w_R B` (B upper triangular), where
    /// column `c` of `g` holds the coordinates of `v_{n−1−c}` in the
    /// reordered eigenbasis `(e_{τ(0)}, …, e_{τ(n−1)})`.
    ///
    /// Left and right multiplication by B preserve the ranks of the
    /// lower-left blocks (rows `a..n`, columns `0..=b`), which equal
    /// `#{c ≤ b : w(c) ≥ a}` on the permutation matrix of `w`.
    pub fn relative_position(&self, r: &Refinement) -> Permutation {
        let n = self.n;
        let mut g = Matrix::zeros(n, n);
        for row in 0..n {
            for c in 0..n {
                g[(row, c)] = self.flag[n - 1 - c][r.tau.apply(row)].clone();
            }
        }
        let rank = |a: usize, b: usize| -> usize {
            // rows a..n, columns 0..b (exclusive); out-of-range blocks are empty
            if a >= n || b == 0 {
                0
            } else {
                g.submatrix(a, n, 0, b).rank()
            }
        };
        let mut table = vec![vec![0usize; n + 1]; n + 1];
        for (a, row) in table.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = rank(a, b);
            }
        }
        let mut window = vec![0; n];
        for (c, slot) in window.iter_mut().enumerate() {
            // the unique a with a one in position (a, c) of the permutation matrix
            *slot = (0..n)
                .find(|&a| {
                    table[a][c + 1] + table[a + 1][c] - table[a][c] - table[a + 1][c + 1] == 1
                })
                .expect("a flag has a well-defined relative position");
        }
        Permutation::new(window).expect("rank differences form a permutation")
    }

    /// `w_R·w_0` for the refinement.
    pub fn position_times_longest(&self, r: &Refinement) -> Permutation {
        self.relative_position(r).compose(&Permutation::longest(self.n))
    }

    pub fn with_flag(&self, flag: Vec<Vec<Q>>) -> Self {
        FilteredPhiModule { flag, ..self.clone() }
    }

    /// Replace each `v_j` by `c_j·v_j`; the filtration is unchanged.
    pub fn rescale_flag(&self, c: &[Q]) -> Self {
        let flag = self
            .flag
            .iter()
            .zip(c)
            .map(|(v, s)| v.iter().map(|x| x * s).collect())
            .collect();
        self.with_flag(flag)
    }

    /// Coordinates in the rescaled eigenbasis `e'_k = d_k·e_k`.
    pub fn rescale_basis(&self, d: &[Q]) -> Self {
        let flag = self
            .flag
            .iter()
            .map(|v| v.iter().zip(d).map(|(x, s)| x / s).collect())
            .collect();
        self.with_flag(flag)
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            n: self.n,
            p: self.p,
            f: self.f,
            eigenvalues: self.eigenvalues.iter().map(fmt_q).collect(),
            weights: self.weights.clone(),
            flag: self.flag.iter().map(|v| v.iter().map(fmt_q).collect()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("instance documents serialize")
    }

    /// Parses without validating; see [`Self::validate`].
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("instance JSON: {e}")))?;
        doc.to_module()
    }
}

/// The on-disk instance document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub n: usize,
    pub p: u64,
    pub f: u32,
    pub eigenvalues: Vec<String>,
    pub weights: Vec<i64>,
    pub flag: Vec<Vec<String>>,
}

impl InstanceDoc {
    pub fn to_module(&self) -> Result<FilteredPhiModule> {
        let eigenvalues = self.eigenvalues.iter().map(|s| parse_q(s)).collect::<Result<_>>()?;
        let flag = self
            .flag
            .iter()
            .map(|v| v.iter().map(|s| parse_q(s)).collect::<Result<Vec<Q>>>())
            .collect::<Result<_>>()?;
        Ok(FilteredPhiModule {
            n: self.n,
            p: self.p,
            f: self.f,
            eigenvalues,
            weights: self.weights.clone(),
            flag,
        })
    }
}

/// One document or a list of documents sharing `(n, p, f, eigenvalues)`.
pub fn parse_instances(s: &str) -> Result<Vec<FilteredPhiModule>> {
    let value: serde_json::Value =
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("instance JSON: {e}")))?;
    let docs: Vec<InstanceDoc> = if value.is_array() {
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("instance list: {e}")))?
    } else {
        vec![serde_json::from_value(value).map_err(|e| Error::Parse(format!("instance: {e}")))?]
    };
    if docs.is_empty() {
        return Err(Error::Parse("empty instance list".into()));
    }
    docs.iter().map(InstanceDoc::to_module).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlagMode {
    /// Every Plücker coordinate of every flag step is nonzero.
    Generic,
    /// Entries drawn from a pool with many zeros; only validity is enforced,
    /// so all relative positions occur.
    Sparse,
    /// `v_j = e_{π(j)}` for a random permutation `π`.
    Permutation,
    Given(Vec<Vec<Q>>),
}

const RETRY_BUDGET: usize = 10_000;

fn pool() -> Vec<Q> {
    vec![q(1), q(-1), q(2), q(-2), q(3), q(-3), qf(1, 2), qf(-1, 2), qf(2, 3), qf(-3, 2), q(5)]
}

fn random_eigenvalues(n: usize, p: u64, f: u32, rng: &mut ChaCha8Rng) -> Result<Vec<Q>> {
    let vals = pool();
    for _ in 0..RETRY_BUDGET {
        let e: Vec<Q> = (0..n).map(|_| vals[rng.gen_range(0..vals.len())].clone()).collect();
        let probe = FilteredPhiModule {
            n,
            p,
            f,
            eigenvalues: e.clone(),
            weights: (0..n as i64).rev().collect(),
            flag: (0..n).map(|j| unit(n, j)).collect(),
        };
        if probe.validate().is_empty() {
            return Ok(e);
        }
    }
    Err(Error::Precondition("retry budget exhausted drawing eigenvalues".into()))
}

fn unit(n: usize, j: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[j] = Q::one();
    v
}

/// Whether every Plücker coordinate of every `Fil_j` is nonzero.
pub fn has_generic_flag(d: &FilteredPhiModule) -> bool {
    let m = d.flag_matrix();
    (1..d.n).all(|j| {
        let cols: Vec<usize> = (j..d.n).collect();
        let sub = m.select_columns(&cols);
        crate::subset::k_subsets(d.n, d.n - j).iter().all(|s| {
            let rows = s.members();
            let mut minor = Matrix::zeros(rows.len(), rows.len());
            for (a, &r) in rows.iter().enumerate() {
                for b in 0..rows.len() {
                    minor[(a, b)] = sub[(r, b)].clone();
                }
            }
            !minor.determinant().is_zero()
        })
    })
}

/// A deterministic pseudorandom valid instance.
pub fn random_module(n: usize, p: u64, f: u32, seed: u64, mode: &FlagMode) -> Result<FilteredPhiModule> {
    if n < 2 {
        return Err(Error::Range(format!("rank {n} is below 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eigenvalues = random_eigenvalues(n, p, f, &mut rng)?;
    let weights: Vec<i64> = {
        let mut w: Vec<i64> = (0..n as i64).collect();
        let mut acc = 0;
        for x in w.iter_mut().rev() {
            acc += rng.gen_range(1..=3);
            *x = acc;
        }
        w
    };
    let base = FilteredPhiModule { n, p, f, eigenvalues, weights, flag: Vec::new() };
    let vals = pool();
    for _ in 0..RETRY_BUDGET {
        let flag: Vec<Vec<Q>> = match mode {
            FlagMode::Given(fl) => fl.clone(),
            FlagMode::Permutation => {
                let mut pi: Vec<usize> = (0..n).collect();
                pi.shuffle(&mut rng);
                pi.iter().map(|&k| unit(n, k)).collect()
            }
            FlagMode::Generic => (0..n)
                .map(|_| (0..n).map(|_| vals[rng.gen_range(0..vals.len())].clone()).collect())
                .collect(),
            FlagMode::Sparse => (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.gen_bool(0.55) {
                                Q::zero()
                            } else {
                                vals[rng.gen_range(0..vals.len())].clone()
                            }
                        })
                        .collect()
                })
                .collect(),
        };
        let d = base.with_flag(flag);
        if !d.validate().is_empty() {
            if matches!(mode, FlagMode::Given(_)) {
                return Err(Error::InvalidModule(d.validate().join("; ")));
            }
            continue;
        }
        if *mode == FlagMode::Generic && !has_generic_flag(&d) {
            continue;
        }
        return Ok(d);
    }
    Err(Error::Precondition("retry budget exhausted drawing a flag".into()))
}

/// Every flag `v_j = e_{π(j)}` with the given eigenvalues and weights.
pub fn permutation_flags(base: &FilteredPhiModule) -> Vec<FilteredPhiModule> {
    Permutation::all(base.n)
        .into_iter()
        .map(|pi| base.with_flag((0..base.n).map(|j| unit(base.n, pi.apply(j))).collect()))
        .collect()
}

/// `v_j = e_j`.
pub fn aligned_flag(n: usize) -> Vec<Vec<Q>> {
    (0..n).map(|j| unit(n, j)).collect()
}

/// `v_j = e_{n−1−j}`.
pub fn reversed_flag(n: usize) -> Vec<Vec<Q>> {
    (0..n).map(|j| unit(n, n - 1 - j)).collect()
}

/// A fixed valid module of rank `n` with eigenvalues `1, 3, 5, …` (p = 2,
/// f = 1: no ratio is 1 or 2) and weights `n−1, …, 0`.
pub fn standard_module(n: usize, flag: Vec<Vec<Q>>) -> FilteredPhiModule {
    FilteredPhiModule {
        n,
        p: 2,
        f: 1,
        eigenvalues: (0..n as i64).map(|j| q(2 * j + 1)).collect(),
        weights: (0..n as i64).rev().collect(),
        flag,
    }
}
