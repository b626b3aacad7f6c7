//! Exterior powers `∧^k E^n` in the basis `e_J`, `J` a sorted `k`-subset in
//! lexicographic order, with `e_J = e_{j_1} ∧ … ∧ e_{j_k}` for `j_1 < … < j_k`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fmt_q, parse_q, solve, Matrix, Subspace, Q};
use crate::phi_module::FilteredPhiModule;
use crate::subset::{binomial, k_subsets, lex_index, shuffle_sign, Subset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeVector {
    n: usize,
    degree: usize,
    coords: Vec<Q>,
}

impl WedgeVector {
    pub fn zero(n: usize, degree: usize) -> Self {
        WedgeVector { n, degree, coords: vec![Q::zero(); binomial(n, degree)] }
    }

    pub fn basis(n: usize, j: &Subset) -> Self {
        let mut w = Self::zero(n, j.len());
        w.coords[lex_index(j)] = Q::one();
        w
    }

    pub fn from_coords(n: usize, degree: usize, coords: Vec<Q>) -> Result<Self> {
        if coords.len() != binomial(n, degree) {
            return Err(Error::Dimension(format!(
                "{} coordinates for ∧^{degree} of rank {n}",
                coords.len()
            )));
        }
        Ok(WedgeVector { n, degree, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn coeff(&self, j: &Subset) -> &Q {
        debug_assert_eq!(j.len(), self.degree);
        &self.coords[lex_index(j)]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Q) -> Self {
        WedgeVector { coords: self.coords.iter().map(|x| x * s).collect(), ..self.clone() }
    }

    pub fn to_doc(&self) -> WedgeDoc {
        let coords = k_subsets(self.n, self.degree)
            .iter()
            .zip(&self.coords)
            .map(|(j, x)| (j.key(), fmt_q(x)))
            .collect();
        WedgeDoc { degree: self.degree, coords }
    }

    /// Every coordinate must be present, which pins down the rank.
    pub fn from_doc(n: usize, doc: &WedgeDoc) -> Result<Self> {
        let mut w = Self::zero(n, doc.degree);
        if doc.coords.len() != w.coords.len() {
            return Err(Error::Parse(format!(
                "expected {} coordinates, found {}",
                w.coords.len(),
                doc.coords.len()
            )));
        }
        for (key, val) in &doc.coords {
            let j = Subset::parse_key(n, key)?;
            if j.len() != doc.degree {
                return Err(Error::Parse(format!("key {key:?} has the wrong size")));
            }
            w.coords[lex_index(&j)] = parse_q(val)?;
        }
        Ok(w)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WedgeDoc {
    pub degree: usize,
    pub coords: BTreeMap<String, String>,
}

/// `v_1 ∧ … ∧ v_k`: the coordinate at `e_J` is the minor on rows `J` of the
/// matrix with columns `v_1..v_k`. The empty wedge is `1 ∈ ∧^0`.
pub fn wedge(n: usize, vectors: &[Vec<Q>]) -> WedgeVector {
    let k = vectors.len();
    let coords = k_subsets(n, k)
        .iter()
        .map(|j| {
            let rows = j.members();
            let mut m = Matrix::zeros(k, k);
            for (a, &r) in rows.iter().enumerate() {
                for (b, v) in vectors.iter().enumerate() {
                    m[(a, b)] = v[r].clone();
                }
            }
            m.determinant()
        })
        .collect();
    WedgeVector { n, degree: k, coords }
}

pub fn wedge_mul(x: &WedgeVector, y: &WedgeVector) -> Result<WedgeVector> {
    if x.n != y.n {
        return Err(Error::Dimension(format!("ranks {} and {}", x.n, y.n)));
    }
    let n = x.n;
    if x.degree + y.degree > n {
        return Err(Error::Dimension(format!("degree {} exceeds rank {n}", x.degree + y.degree)));
    }
    let mut out = WedgeVector::zero(n, x.degree + y.degree);
    let ys = k_subsets(n, y.degree);
    for (a, xa) in k_subsets(n, x.degree).iter().zip(&x.coords) {
        if xa.is_zero() {
            continue;
        }
        for (b, yb) in ys.iter().zip(&y.coords) {
            if yb.is_zero() || a.mask() & b.mask() != 0 {
                continue;
            }
            let union = Subset::from_mask(n, a.mask() | b.mask());
            let term = xa * yb;
            let slot = &mut out.coords[lex_index(&union)];
            if shuffle_sign(a, b) > 0 {
                *slot += term;
            } else {
                *slot -= term;
            }
        }
    }
    Ok(out)
}

/// The coefficient of `e_{0..n−1}` in `x ∧ y`.
pub fn wedge_pairing(x: &WedgeVector, y: &WedgeVector) -> Result<Q> {
    if x.n != y.n || x.degree + y.degree != x.n {
        return Err(Error::Dimension(format!(
            "degrees {} and {} are not complementary in rank {}",
            x.degree, y.degree, x.n
        )));
    }
    Ok(wedge_mul(x, y)?.coords[0].clone())
}

fn check_step(d: &FilteredPhiModule, i: usize) -> Result<()> {
    if i == 0 || i >= d.n {
        return Err(Error::Range(format!("step {i} outside 1..{}", d.n)));
    }
    Ok(())
}

/// `v_i ∧ … ∧ v_{n−1}`, spanning the line `∧^{n−i} Fil_i`.
pub fn fil_max(d: &FilteredPhiModule, i: usize) -> Result<WedgeVector> {
    check_step(d, i)?;
    Ok(wedge(d.n, &d.flag[i..]))
}

/// Span of all wedges `x_1 ∧ … ∧ x_r` where each factor group takes
/// `count` distinct vectors from the flag tail `v_start..v_{n−1}`.
fn span_of_products(d: &FilteredPhiModule, factors: &[(usize, usize)]) -> Subspace {
    let n = d.n;
    let degree: usize = factors.iter().map(|f| f.1).sum();
    let mut out = Vec::new();
    let mut chosen: Vec<Vec<Q>> = Vec::new();
    fn rec(
        d: &FilteredPhiModule,
        factors: &[(usize, usize)],
        chosen: &mut Vec<Vec<Q>>,
        out: &mut Vec<Vec<Q>>,
    ) {
        let Some(&(start, count)) = factors.first() else {
            let w = wedge(d.n, chosen);
            if !w.is_zero() {
                out.push(w.coords);
            }
            return;
        };
        for s in k_subsets(d.n - start, count) {
            let before = chosen.len();
            chosen.extend(s.members().iter().map(|&k| d.flag[start + k].clone()));
            rec(d, &factors[1..], chosen, out);
            chosen.truncate(before);
        }
    }
    rec(d, factors, &mut chosen, &mut out);
    Subspace::span(binomial(n, degree), &out)
}

/// Sorted members of `S ⊆ {1..n−1}`, rejecting anything else.
pub fn check_steps(n: usize, s: &[usize]) -> Result<Vec<usize>> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != s.len() {
        return Err(Error::Parse(format!("repeated step in {s:?}")));
    }
    if let Some(&bad) = v.iter().find(|&&x| x == 0 || x >= n) {
        return Err(Error::Range(format!("step {bad} outside 1..{n}")));
    }
    Ok(v)
}

fn position_in(s: &[usize], i: usize) -> Result<usize> {
    s.iter()
        .position(|&x| x == i)
        .ok_or_else(|| Error::Precondition(format!("step {i} not in {s:?}")))
}

/// The one-but-last step of the filtration that `S` induces on `∧^{n−i}`.
pub fn fil_2nd_max(d: &FilteredPhiModule, s: &[usize], i: usize) -> Result<Subspace> {
    let s = check_steps(d.n, s)?;
    let j = position_in(&s, i)?;
    let n = d.n;
    let prev = if j == 0 { 0 } else { s[j - 1] };
    let factors = if j + 1 == s.len() {
        vec![(i, n - i - 1), (prev, 1)]
    } else {
        let next = s[j + 1];
        vec![(next, n - next), (i, next - i - 1), (prev, 1)]
    };
    Ok(span_of_products(d, &factors))
}

pub fn fil_2nd_max_expected_dim(n: usize, s: &[usize], i: usize) -> Result<usize> {
    let s = check_steps(n, s)?;
    let j = position_in(&s, i)?;
    let prev = if j == 0 { 0 } else { s[j - 1] };
    Ok(if j + 1 == s.len() { 1 + (n - i) * (i - prev) } else { 1 + (i - prev) * (s[j + 1] - i) })
}

/// The last step of the filtration that `S` induces on `∧^{n−i}`.
pub fn fil_max_induced(d: &FilteredPhiModule, s: &[usize], i: usize) -> Result<Subspace> {
    let s = check_steps(d.n, s)?;
    let j = position_in(&s, i)?;
    let n = d.n;
    let factors =
        if j + 1 == s.len() { vec![(i, n - i)] } else { vec![(s[j + 1], n - s[j + 1]), (i, s[j + 1] - i)] };
    Ok(span_of_products(d, &factors))
}

/// A linear map `F : ∧^{n−i} → Fil_i^max`, stored as `F(x) = ⟨phi, x⟩·L`
/// with `L = fil_max(D, i)` and `⟨,⟩` the coordinate dot product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineFunctional {
    pub i: usize,
    pub phi: Vec<Q>,
}

/// The map sending `e_{I^c}` into the line and killing every other `e_J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Estar {
    pub functional: LineFunctional,
    pub split: bool,
    /// The `e_{I^c}` coefficient of `fil_max(D, |I|)`.
    pub lambda: Q,
}

pub fn estar(d: &FilteredPhiModule, i_set: &Subset) -> Result<Estar> {
    let i = i_set.len();
    check_step(d, i)?;
    let l = fil_max(d, i)?;
    let comp = i_set.complement();
    let lambda = l.coeff(&comp).clone();
    let split = lambda.is_zero();
    let mut phi = vec![Q::zero(); binomial(d.n, d.n - i)];
    phi[lex_index(&comp)] = if split { Q::one() } else { lambda.recip() };
    Ok(Estar { functional: LineFunctional { i, phi }, split, lambda })
}

/// Basis of `∧^{n−i−1} Fil_i`: wedges of `(n−i−1)`-subsets of `v_i..v_{n−1}`.
pub fn fil_wedge_basis(d: &FilteredPhiModule, i: usize) -> Vec<WedgeVector> {
    let n = d.n;
    k_subsets(n - i, n - i - 1)
        .iter()
        .map(|s| {
            let vs: Vec<Vec<Q>> = s.members().iter().map(|&k| d.flag[i + k].clone()).collect();
            wedge(n, &vs)
        })
        .collect()
}

/// Matrices (in the eigenbasis) of the `1 + i(n−i)` parameters of maps
/// `f : D → Fil_i` that are scalar on `Fil_i`: first the scalar, then
/// `v_k ↦ v_l` for `k < i ≤ l` in row-major order.
pub fn transfer_parameters(d: &FilteredPhiModule, i: usize) -> Vec<Matrix> {
    let n = d.n;
    let vinv = d.flag_matrix().inverse().expect("flag vectors are independent");
    let build = |images: Vec<Vec<Q>>| Matrix::from_columns(&images).mul(&vinv);
    let mut out = Vec::with_capacity(1 + i * (n - i));
    out.push(build((0..n).map(|k| if k >= i { d.flag[k].clone() } else { vec![Q::zero(); n] }).collect()));
    for k in 0..i {
        for l in i..n {
            out.push(build(
                (0..n).map(|c| if c == k { d.flag[l].clone() } else { vec![Q::zero(); n] }).collect(),
            ));
        }
    }
    out
}

/// The unique `f ∈ Hom(D, Fil_i)`, scalar on `Fil_i`, with
/// `x ∧ f(d) = F(x ∧ d)` for all `x ∈ ∧^{n−i−1} Fil_i` and `d ∈ D`.
pub fn transfer_solve(d: &FilteredPhiModule, f: &LineFunctional) -> Result<Matrix> {
    let n = d.n;
    let i = f.i;
    check_step(d, i)?;
    if f.phi.len() != binomial(n, n - i) {
        return Err(Error::Dimension(format!("functional of length {} on ∧^{}", f.phi.len(), n - i)));
    }
    let l = fil_max(d, i)?;
    let params = transfer_parameters(d, i);
    let xs = fil_wedge_basis(d, i);
    let width = binomial(n, n - i);
    let mut system = Matrix::with_cols(params.len());
    let mut rhs = Vec::new();
    for x in &xs {
        for k in 0..n {
            let ek = d.eigenvector(k);
            let target = {
                let xd = wedge_mul(x, &wedge(n, &[ek]))?;
                let s: Q = xd.coords.iter().zip(&f.phi).map(|(a, b)| a * b).sum();
                l.scale(&s)
            };
            let columns: Vec<WedgeVector> = params
                .iter()
                .map(|m| wedge_mul(x, &wedge(n, &[m.column(k)])))
                .collect::<Result<_>>()?;
            for c in 0..width {
                system.push_row(columns.iter().map(|w| w.coords[c].clone()).collect());
                rhs.push(target.coords[c].clone());
            }
        }
    }
    if system.rank() != params.len() {
        return Err(Error::Invariant(format!("transfer system for step {i} is not injective")));
    }
    let u = solve(&system, &rhs)?
        .ok_or_else(|| Error::Invariant(format!("transfer system for step {i} is inconsistent")))?;
    let mut out = Matrix::zeros(n, n);
    for (m, c) in params.iter().zip(&u) {
        if !c.is_zero() {
            out = out.add(&m.scale(c));
        }
    }
    Ok(out)
}
