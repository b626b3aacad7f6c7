//! The linear map `t` from extension coordinates onto eigenvalue
//! deformations plus filtration-preserving endomorphisms.
//!
//! Domain coordinates: `ψ_0..ψ_{n−1}`, then `μ`, then one `c_I` per proper
//! nonempty subset in [`proper_subsets`] order. The map sends a vector to
//! `(ψ, μ·Id + Σ c_I·T_I)`, with `T_I` the transfer of the map that sends
//! `e_{I^c}` onto the line `Fil_{|I|}^max`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::coxeter::Permutation;
use crate::error::{Error, Result};
use crate::exterior::{
    check_steps, estar, fil_2nd_max, fil_max, fil_wedge_basis, transfer_solve, wedge, wedge_mul,
    Estar, LineFunctional, WedgeVector,
};
use crate::linalg::{is_zero_vec, kernel, Matrix, Subspace, Q};
use crate::phi_module::{canonical_refinement, FilteredPhiModule, Refinement};
use crate::subset::{binomial, proper_subsets, Subset};

/// `{M : M·Fil_j ⊆ Fil_j for all j}` as row-major `n²` vectors: the
/// conjugates `V·E_{rc}·V⁻¹` (`r ≥ c`) by the flag matrix `V`.
pub fn homfil_basis(d: &FilteredPhiModule) -> Subspace {
    let n = d.n;
    let v = d.flag_matrix();
    let vinv = v.inverse().expect("flag vectors are independent");
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..=r {
            let mut e = Matrix::zeros(n, n);
            e[(r, c)] = Q::one();
            out.push(v.mul(&e).mul(&vinv).to_vec());
        }
    }
    Subspace::span(n * n, &out)
}

/// `Σ_{s_i∈S} C(n,i) + 1 − dim r_{P_{S^c}}`, where the parabolic has Levi
/// blocks cut at the steps of `S`.
pub fn kernel_formula(n: usize, s: &[usize]) -> Result<usize> {
    let s = check_steps(n, s)?;
    let mut cuts = vec![0];
    cuts.extend(&s);
    cuts.push(n);
    let blocks: Vec<usize> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    let parabolic = blocks.len() + (n * n - blocks.iter().map(|b| b * b).sum::<usize>()) / 2;
    let total: usize = s.iter().map(|&i| binomial(n, i)).sum::<usize>() + 1;
    Ok(total - parabolic)
}

/// Every step `1..n−1`.
pub fn all_steps(n: usize) -> Vec<usize> {
    (1..n).collect()
}

/// Every subset of `1..n−1`, the empty one first.
pub fn step_sets(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << (n - 1)).map(|m| (1..n).filter(|&i| m >> (i - 1) & 1 == 1).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct TMap {
    pub module: FilteredPhiModule,
    pub subsets: Vec<Subset>,
    pub estars: Vec<Estar>,
    /// Extra factor applied to each `T_I`.
    pub scales: Vec<Q>,
    /// The scaled operators `T_I`.
    pub ops: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetClass {
    pub subset: Subset,
    pub split: bool,
    pub cosplit: bool,
    pub critical: bool,
    pub very_critical: bool,
    pub crossing: usize,
    pub pair_count: usize,
}

/// Maps commuting with a refinement's partial eigenbasis flag at step `i`,
/// with the induced pair of scalars.
#[derive(Clone, Debug)]
pub struct HomfilR {
    pub tau: Permutation,
    pub i: usize,
    pub space: Subspace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CritCheck {
    pub nonzero: bool,
    pub in_homfil_r: bool,
    pub f_vanishes: bool,
    pub kernel_dim: usize,
    pub spans_kernel: bool,
}

impl CritCheck {
    pub fn ok(&self) -> bool {
        self.nonzero && self.in_homfil_r && self.f_vanishes && self.spans_kernel
    }
}

impl TMap {
    pub fn new(d: &FilteredPhiModule) -> Result<Self> {
        let n = d.n;
        Self::with_scales(d, vec![Q::one(); (1 << n) - 2])
    }

    pub fn with_scales(d: &FilteredPhiModule, scales: Vec<Q>) -> Result<Self> {
        let violations = d.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidModule(violations.join("; ")));
        }
        let subsets = proper_subsets(d.n);
        if scales.len() != subsets.len() || scales.iter().any(Zero::is_zero) {
            return Err(Error::Precondition(format!(
                "need {} nonzero scales, got {}",
                subsets.len(),
                scales.len()
            )));
        }
        let mut estars = Vec::with_capacity(subsets.len());
        let mut ops = Vec::with_capacity(subsets.len());
        for (i_set, s) in subsets.iter().zip(&scales) {
            let es = estar(d, i_set)?;
            ops.push(transfer_solve(d, &es.functional)?.scale(s));
            estars.push(es);
        }
        Ok(TMap { module: d.clone(), subsets, estars, scales, ops })
    }

    pub fn n(&self) -> usize {
        self.module.n
    }

    pub fn domain_dim(&self) -> usize {
        self.n() + 1 + self.subsets.len()
    }

    pub fn mu_index(&self) -> usize {
        self.n()
    }

    pub fn c_index(&self, k: usize) -> usize {
        self.n() + 1 + k
    }

    pub fn subset_index(&self, i_set: &Subset) -> usize {
        self.subsets.iter().position(|s| s == i_set).expect("a proper nonempty subset")
    }

    pub fn op(&self, i_set: &Subset) -> &Matrix {
        &self.ops[self.subset_index(i_set)]
    }

    /// `(ψ, μ·Id + Σ c_I·T_I)`.
    pub fn apply(&self, v: &[Q]) -> Result<(Vec<Q>, Matrix)> {
        let n = self.n();
        if v.len() != self.domain_dim() {
            return Err(Error::Dimension(format!("domain vector of length {}", v.len())));
        }
        let mut fil = Matrix::identity(n).scale(&v[self.mu_index()]);
        for (k, t) in self.ops.iter().enumerate() {
            let c = &v[self.c_index(k)];
            if !c.is_zero() {
                fil = fil.add(&t.scale(c));
            }
        }
        Ok((v[..n].to_vec(), fil))
    }

    /// Domain coordinates allowed by `S`: all `ψ`, `μ`, and `c_I` with `|I| ∈ S`.
    fn allowed(&self, s: &[usize]) -> Vec<usize> {
        let mut cols: Vec<usize> = (0..=self.n()).collect();
        for (k, i_set) in self.subsets.iter().enumerate() {
            if s.contains(&i_set.len()) {
                cols.push(self.c_index(k));
            }
        }
        cols
    }

    /// The full map as an `(n + n²) × domain` matrix.
    pub fn matrix(&self) -> Matrix {
        let n = self.n();
        let mut cols = Vec::with_capacity(self.domain_dim());
        for k in 0..n {
            let mut c = vec![Q::zero(); n + n * n];
            c[k] = Q::one();
            cols.push(c);
        }
        let mut push_fil = |m: &Matrix| {
            let mut c = vec![Q::zero(); n];
            c.extend(m.to_vec());
            cols.push(c);
        };
        push_fil(&Matrix::identity(n));
        for t in &self.ops {
            push_fil(t);
        }
        Matrix::from_columns(&cols)
    }

    /// Kernel of the restriction to the coordinates allowed by `S`, embedded
    /// in the full domain.
    pub fn kernel(&self, s: &[usize]) -> Result<Subspace> {
        self.kernel_without(s, &[])
    }

    /// As [`Self::kernel`], with the subset coordinates listed in `dropped`
    /// (indices into `subsets`) also forced to zero.
    pub fn kernel_without(&self, s: &[usize], dropped: &[usize]) -> Result<Subspace> {
        let s = check_steps(self.n(), s)?;
        let cols: Vec<usize> = self
            .allowed(&s)
            .into_iter()
            .filter(|&c| c <= self.n() || !dropped.contains(&(c - self.n() - 1)))
            .collect();
        let restricted = kernel(&self.matrix().select_columns(&cols));
        let embedded: Vec<Vec<Q>> = restricted
            .basis_vecs()
            .into_iter()
            .map(|v| {
                let mut full = vec![Q::zero(); self.domain_dim()];
                for (&c, x) in cols.iter().zip(v) {
                    full[c] = x;
                }
                full
            })
            .collect();
        Ok(Subspace::span(self.domain_dim(), &embedded))
    }

    /// [`Self::kernel`], failing when its dimension disagrees with
    /// [`kernel_formula`].
    pub fn checked_kernel(&self, s: &[usize]) -> Result<Subspace> {
        let k = self.kernel(s)?;
        let want = kernel_formula(self.n(), s)?;
        if k.dim() != want {
            return Err(Error::Invariant(format!(
                "kernel for S = {s:?} has dimension {}, formula gives {want}",
                k.dim()
            )));
        }
        Ok(k)
    }

    /// `{Σ_{|I|=i} c_I·T_I : c ∈ U}`.
    pub fn size_part_image(&self, u: &Subspace, i: usize) -> Subspace {
        let n = self.n();
        let vs: Vec<Vec<Q>> = u
            .basis_vecs()
            .iter()
            .map(|v| {
                let mut m = Matrix::zeros(n, n);
                for (k, i_set) in self.subsets.iter().enumerate() {
                    let c = &v[self.c_index(k)];
                    if i_set.len() == i && !c.is_zero() {
                        m = m.add(&self.ops[k].scale(c));
                    }
                }
                m.to_vec()
            })
            .collect();
        Subspace::span(n * n, &vs)
    }

    /// `{Σ_{|I|=i} c_I·scale_I·φ_I : c ∈ U}` where `φ_I` is the functional
    /// of `estar(I)`: the maps `∧^{n−i} → Fil_i^max` before transfer.
    pub fn size_part_functionals(&self, u: &Subspace, i: usize) -> Subspace {
        let width = binomial(self.n(), self.n() - i);
        let vs: Vec<Vec<Q>> = u
            .basis_vecs()
            .iter()
            .map(|v| {
                let mut phi = vec![Q::zero(); width];
                for (k, i_set) in self.subsets.iter().enumerate() {
                    let c = &v[self.c_index(k)];
                    if i_set.len() == i && !c.is_zero() {
                        let f = c * &self.scales[k];
                        for (a, b) in phi.iter_mut().zip(&self.estars[k].functional.phi) {
                            *a += &f * b;
                        }
                    }
                }
                phi
            })
            .collect();
        Subspace::span(width, &vs)
    }

    /// Transfers of a basis of functionals.
    pub fn transfer_span(&self, i: usize, functionals: &Subspace) -> Result<Subspace> {
        let n = self.n();
        let ms = functionals
            .basis_vecs()
            .into_iter()
            .map(|phi| transfer_solve(&self.module, &LineFunctional { i, phi }).map(|m| m.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subspace::span(n * n, &ms))
    }

    pub fn kernel_image(&self, s: &[usize], i: usize) -> Result<Subspace> {
        Ok(self.size_part_image(&self.kernel(s)?, i))
    }

    /// Functionals on `∧^{n−i}` vanishing on `fil_2nd_max(S, i)`.
    pub fn expected_kernel_functionals(&self, s: &[usize], i: usize) -> Result<Subspace> {
        Ok(fil_2nd_max(&self.module, s, i)?.annihilator())
    }

    /// Checks, at the level of functionals and of matrices, that the kernel
    /// image at step `i` is the transfer of the maps killing `fil_2nd_max`.
    pub fn check_kernel_image(&self, s: &[usize], i: usize) -> Result<Subspace> {
        let k = self.kernel(s)?;
        let expected = self.expected_kernel_functionals(s, i)?;
        let got = self.size_part_functionals(&k, i);
        if got != expected {
            return Err(Error::Invariant(format!(
                "kernel functionals at step {i} for S = {s:?}: dim {} against {}",
                got.dim(),
                expected.dim()
            )));
        }
        let image = self.size_part_image(&k, i);
        let want = self.transfer_span(i, &expected)?;
        if image != want {
            return Err(Error::Invariant(format!(
                "kernel image at step {i} for S = {s:?}: dim {} against {}",
                image.dim(),
                want.dim()
            )));
        }
        Ok(image)
    }

    /// The scalar by which `T_I` acts on `Fil_{|I|}`.
    pub fn scalar_on_fil(&self, k: usize) -> Q {
        let last = &self.module.flag[self.n() - 1];
        let image = self.ops[k].mul_vec(last);
        let p = last.iter().position(|x| !x.is_zero()).expect("flag vectors are nonzero");
        &image[p] / &last[p]
    }

    /// `μ = 0`, `c_I = 0` for `|I| ∉ S`, and `Σ_{|I|=j} a_I·c_I = 0` for each
    /// `j ∈ S`, with `a_I` the scalar of `T_I` on `Fil_j` (zero for split
    /// `I`). The `ψ` coordinates are free.
    pub fn inf_domain(&self, s: &[usize]) -> Result<Subspace> {
        let s = check_steps(self.n(), s)?;
        let dim = self.domain_dim();
        let mut rows = Matrix::with_cols(dim);
        let unit = |c: usize| {
            let mut r = vec![Q::zero(); dim];
            r[c] = Q::one();
            r
        };
        rows.push_row(unit(self.mu_index()));
        for (k, i_set) in self.subsets.iter().enumerate() {
            if !s.contains(&i_set.len()) {
                rows.push_row(unit(self.c_index(k)));
            }
        }
        for &j in &s {
            let mut r = vec![Q::zero(); dim];
            for (k, i_set) in self.subsets.iter().enumerate() {
                if i_set.len() == j {
                    r[self.c_index(k)] = self.scalar_on_fil(k);
                }
            }
            if !is_zero_vec(&r) {
                rows.push_row(r);
            }
        }
        Ok(kernel(&rows))
    }

    pub fn inf_image(&self, s: &[usize], i: usize) -> Result<Subspace> {
        Ok(self.size_part_image(&self.inf_domain(s)?, i))
    }

    /// Checks that the image of [`Self::inf_domain`] at step `i` is the
    /// transfer of the maps killing the line `Fil_i^max`.
    pub fn check_inf_image(&self, s: &[usize], i: usize) -> Result<Subspace> {
        let s = check_steps(self.n(), s)?;
        if !s.contains(&i) {
            return Err(Error::Precondition(format!("step {i} not in {s:?}")));
        }
        let dom = self.inf_domain(&s)?;
        let l = fil_max(&self.module, i)?;
        let killers = Subspace::span(l.coords().len(), &[l.coords().to_vec()]).annihilator();
        let got = self.size_part_functionals(&dom, i);
        if got != killers {
            return Err(Error::Invariant(format!(
                "inf functionals at step {i} for S = {s:?}: dim {} against {}",
                got.dim(),
                killers.dim()
            )));
        }
        let image = self.size_part_image(&dom, i);
        let want = self.transfer_span(i, &killers)?;
        if image != want {
            return Err(Error::Invariant(format!(
                "inf image at step {i} for S = {s:?}: dim {} against {}",
                image.dim(),
                want.dim()
            )));
        }
        Ok(image)
    }

    /// `span{T_I} ⊕ span{Id}` is all of the filtration-preserving maps.
    pub fn check_surjective(&self) -> Result<()> {
        let n = self.n();
        let ts = Subspace::span(n * n, &self.ops.iter().map(Matrix::to_vec).collect::<Vec<_>>());
        let id = Matrix::identity(n).to_vec();
        if ts.contains(&id)? {
            return Err(Error::Invariant("the identity lies in the span of the T_I".into()));
        }
        let total = ts.sum(&Subspace::span(n * n, &[id]))?;
        if total != homfil_basis(&self.module) {
            return Err(Error::Invariant(format!(
                "span of T_I and Id has dimension {}, expected {}",
                total.dim(),
                n * (n + 1) / 2
            )));
        }
        Ok(())
    }

    /// Whether every `x ∧ e_k` (`x ∈ ∧^{n−i−1} Fil_i`) has zero `e_{I^c}`
    /// coefficient.
    pub fn coefficient_criterion(&self, i_set: &Subset) -> Result<bool> {
        let d = &self.module;
        let i = i_set.len();
        let comp = i_set.complement();
        for x in fil_wedge_basis(d, i) {
            for k in 0..d.n {
                let xe = wedge_mul(&x, &wedge(d.n, &[d.eigenvector(k)]))?;
                if !xe.coeff(&comp).is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Classification of every proper nonempty subset, with every redundant
    /// criterion cross-checked.
    pub fn classify(&self) -> Result<Vec<SubsetClass>> {
        let n = self.n();
        let all = all_steps(n);
        let ker = self.kernel(&all)?;
        let mut out = Vec::with_capacity(self.subsets.len());
        for (k, i_set) in self.subsets.iter().enumerate() {
            let i = i_set.len();
            let split = self.estars[k].split;
            let w = self.module.position_times_longest(&canonical_refinement(i_set));
            let critical = w.support().contains(&i);
            let crossing = w.crossing_number(i)?;
            let pair_count = w.pair_count(i)?;
            let by_word = crossing >= 2;
            let by_operator = self.ops[k].is_zero();
            let by_coefficient = self.coefficient_criterion(i_set)?;
            if by_word != by_operator || by_word != by_coefficient {
                return Err(Error::Invariant(format!(
                    "very-critical criteria disagree for {i_set:?}: crossing {crossing}, T_I zero {by_operator}, coefficient test {by_coefficient}"
                )));
            }
            if critical != split {
                return Err(Error::Invariant(format!(
                    "{i_set:?}: critical = {critical} but split = {split}"
                )));
            }
            let comp = WedgeVector::basis(n, &i_set.complement()).coords().to_vec();
            let cosplit = fil_2nd_max(&self.module, &all, i)?.contains(&comp)?;
            let coordinate_vanishes = ker.basis_vecs().iter().all(|v| v[self.c_index(k)].is_zero());
            if cosplit != coordinate_vanishes {
                return Err(Error::Invariant(format!(
                    "{i_set:?}: cosplit = {cosplit} but kernel coordinate vanishing = {coordinate_vanishes}"
                )));
            }
            out.push(SubsetClass {
                subset: *i_set,
                split,
                cosplit,
                critical,
                very_critical: by_word,
                crossing,
                pair_count,
            });
        }
        Ok(out)
    }

    /// `{M ∈ homfil : M = a on e_{τ(0..i−1)}, M ≡ b on the rest modulo
    /// span(e_{τ(0..i−1)})}`.
    pub fn homfil_r(&self, r: &Refinement, i: usize) -> Result<HomfilR> {
        let n = self.n();
        if i == 0 || i >= n {
            return Err(Error::Range(format!("step {i} outside 1..{n}")));
        }
        let hf = homfil_basis(&self.module).basis_vecs();
        // unknowns: homfil coefficients, then a, then b
        let cols = hf.len() + 2;
        let head: Vec<usize> = (0..i).map(|j| r.tau.apply(j)).collect();
        let mut rows = Matrix::with_cols(cols);
        for j in 0..n {
            let col = r.tau.apply(j);
            for row in 0..n {
                if j >= i && head.contains(&row) {
                    continue;
                }
                let mut eq: Vec<Q> = hf.iter().map(|m| m[row * n + col].clone()).collect();
                eq.push(if j < i && row == col { -Q::one() } else { Q::zero() });
                eq.push(if j >= i && row == col { -Q::one() } else { Q::zero() });
                rows.push_row(eq);
            }
        }
        let sol = kernel(&rows);
        let ms: Vec<Vec<Q>> = sol
            .basis_vecs()
            .iter()
            .map(|x| {
                let mut m = vec![Q::zero(); n * n];
                for (c, h) in x.iter().zip(&hf) {
                    if !c.is_zero() {
                        for (a, b) in m.iter_mut().zip(h) {
                            *a += c * b;
                        }
                    }
                }
                m
            })
            .collect();
        Ok(HomfilR { tau: r.tau.clone(), i, space: Subspace::span(n * n, &ms) })
    }

    /// `f_i(M) = (a, b)`.
    pub fn f_i(&self, h: &HomfilR, m: &Matrix) -> Result<(Q, Q)> {
        if !h.space.contains(&m.to_vec())? {
            return Err(Error::Precondition("matrix outside the refined homfil space".into()));
        }
        let a = h.tau.apply(0);
        let b = h.tau.apply(h.i);
        Ok((m[(a, a)].clone(), m[(b, b)].clone()))
    }

    /// Rank of `f_i` on the refined space and its dimension.
    pub fn f_i_rank(&self, h: &HomfilR) -> Result<(usize, usize)> {
        let n = self.n();
        let mut img = Matrix::with_cols(2);
        for v in h.space.basis_vecs() {
            let (a, b) = self.f_i(h, &Matrix::from_vec(n, n, v))?;
            img.push_row(vec![a, b]);
        }
        Ok((img.rank(), h.space.dim()))
    }

    /// For `I` whose canonical refinement has crossing number 1 at `|I|`:
    /// `T_I` is nonzero, lies in the refined space, is killed by `f_{|I|}`
    /// and spans the kernel of `f_{|I|}`.
    pub fn crit_kernel_check(&self, i_set: &Subset) -> Result<CritCheck> {
        let n = self.n();
        let i = i_set.len();
        let r = canonical_refinement(i_set);
        let w = self.module.position_times_longest(&r);
        let crossing = w.crossing_number(i)?;
        if crossing != 1 {
            return Err(Error::Precondition(format!(
                "{i_set:?} has crossing number {crossing}, not 1"
            )));
        }
        let t = self.op(i_set);
        let h = self.homfil_r(&r, i)?;
        let in_space = h.space.contains(&t.to_vec())?;
        let f_vanishes = in_space && {
            let (a, b) = self.f_i(&h, t)?;
            a.is_zero() && b.is_zero()
        };
        // ker f_i: the a and b entries vanish
        let a = r.tau.apply(0);
        let b = r.tau.apply(i);
        let mut eqs = Matrix::with_cols(n * n);
        let mut unit = vec![Q::zero(); n * n];
        unit[a * n + a] = Q::one();
        eqs.push_row(unit.clone());
        unit[a * n + a] = Q::zero();
        unit[b * n + b] = Q::one();
        eqs.push_row(unit);
        let ker_f = h.space.intersect(&kernel(&eqs))?;
        let spans = in_space && ker_f == Subspace::span(n * n, &[t.to_vec()]);
        Ok(CritCheck {
            nonzero: !t.is_zero(),
            in_homfil_r: in_space,
            f_vanishes,
            kernel_dim: ker_f.dim(),
            spans_kernel: spans,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qf};
    use crate::phi_module::{
        aligned_flag, compatible_refinements, permutation_flags, random_module, reversed_flag,
        standard_module, FlagMode,
    };

    fn v(x: &[i64]) -> Vec<Q> {
        x.iter().map(|&a| q(a)).collect()
    }

    fn key(n: usize, s: &str) -> Subset {
        Subset::parse_key(n, s).unwrap()
    }

    fn swapped2() -> FilteredPhiModule {
        standard_module(2, vec![v(&[0, 1]), v(&[1, 0])])
    }

    fn sheared2() -> FilteredPhiModule {
        standard_module(2, vec![v(&[1, 0]), v(&[1, 1])])
    }

    /// Filtration-preserving maps found by solving `ann(Fil_j)·M·v_k = 0`.
    fn homfil_by_constraints(d: &FilteredPhiModule) -> Subspace {
        let n = d.n;
        let mut rows = Matrix::with_cols(n * n);
        for j in 1..n {
            let ann = d.filtration_subspace(j).unwrap().annihilator();
            for y in ann.basis_vecs() {
                for vk in &d.flag[j..] {
                    // y·M·v = Σ_{r,c} y_r M_rc v_c
                    let mut eq = vec![q(0); n * n];
                    for r in 0..n {
                        for c in 0..n {
                            eq[r * n + c] = &y[r] * &vk[c];
                        }
                    }
                    rows.push_row(eq);
                }
            }
        }
        kernel(&rows)
    }

    #[test]
    fn homfil_examples() {
        let h = homfil_basis(&swapped2());
        assert_eq!(h.dim(), 3);
        // Fil_1 = span{e_0}: maps with M[1][0] = 0
        assert_eq!(h, kernel(&Matrix::from_i64(&[&[0, 0, 1, 0]])));
        for seed in 0..10 {
            let n = 2 + seed as usize % 4;
            let d = random_module(n, 2, 1, seed, &FlagMode::Sparse).unwrap();
            let h = homfil_basis(&d);
            assert_eq!(h.dim(), n * (n + 1) / 2);
            assert!(h.contains(&Matrix::identity(n).to_vec()).unwrap());
            assert_eq!(h, homfil_by_constraints(&d));
        }
    }

    #[test]
    fn operator_examples() {
        let t = TMap::new(&sheared2()).unwrap();
        assert_eq!(t.op(&key(2, "0")), &Matrix::from_i64(&[&[0, 1], &[0, 1]]));
        let t = TMap::new(&swapped2()).unwrap();
        assert_eq!(t.op(&key(2, "1")), &Matrix::from_i64(&[&[1, 0], &[0, 0]]));
        let t = TMap::new(&standard_module(4, reversed_flag(4))).unwrap();
        assert!(t.op(&key(4, "0,1")).is_zero());
    }

    #[test]
    fn apply_examples() {
        let t = TMap::new(&standard_module(3, aligned_flag(3))).unwrap();
        let zero = vec![q(0); t.domain_dim()];
        let (phi, fil) = t.apply(&zero).unwrap();
        assert!(is_zero_vec(&phi) && fil.is_zero());
        let mut mu = zero.clone();
        mu[t.mu_index()] = q(1);
        assert_eq!(t.apply(&mu).unwrap().1, Matrix::identity(3));
        let mut c = zero;
        c[t.c_index(4)] = q(1);
        assert_eq!(t.apply(&c).unwrap().1, t.ops[4]);
    }

    #[test]
    fn kernel_formula_examples() {
        assert_eq!(kernel_formula(2, &[1]).unwrap(), 0);
        assert_eq!(kernel_formula(3, &[1, 2]).unwrap(), 1);
        assert_eq!(kernel_formula(4, &[1, 2, 3]).unwrap(), 5);
        assert_eq!(kernel_formula(5, &all_steps(5)).unwrap(), 16);
        assert_eq!(kernel_formula(4, &[2]).unwrap(), 1);
        for n in 2..=7 {
            assert_eq!(kernel_formula(n, &[1]).unwrap(), 0);
            assert_eq!(kernel_formula(n, &[n - 1]).unwrap(), 0);
            assert_eq!(kernel_formula(n, &[]).unwrap(), 0);
            for j in 1..n {
                assert_eq!(kernel_formula(n, &[j]).unwrap(), binomial(n, j) - 1 - j * (n - j));
            }
            let full = (1usize << n) - 1 - n * (n + 1) / 2;
            assert_eq!(kernel_formula(n, &all_steps(n)).unwrap(), full);
        }
    }

    #[test]
    fn kernels_match_formula() {
        for seed in 0..8 {
            let n = 2 + seed as usize % 4;
            let mode = if seed % 2 == 0 { FlagMode::Generic } else { FlagMode::Sparse };
            let t = TMap::new(&random_module(n, 2, 1, seed, &mode).unwrap()).unwrap();
            for s in step_sets(n) {
                t.checked_kernel(&s).unwrap();
            }
            t.check_surjective().unwrap();
        }
    }

    #[test]
    fn kernel_image_examples() {
        let t = TMap::new(&sheared2()).unwrap();
        assert!(t.check_kernel_image(&[1], 1).unwrap().is_zero());
        let t = TMap::new(&standard_module(3, reversed_flag(3))).unwrap();
        assert_eq!(t.check_kernel_image(&[1, 2], 2).unwrap().dim(), 1);
        let g = TMap::new(&random_module(3, 2, 1, 5, &FlagMode::Generic).unwrap()).unwrap();
        assert_eq!(g.check_kernel_image(&[1, 2], 2).unwrap().dim(), 1);
    }

    #[test]
    fn images_match_on_every_step_set() {
        for seed in 0..6 {
            let n = 2 + seed as usize % 3;
            let t = TMap::new(&random_module(n, 3, 1, seed, &FlagMode::Sparse).unwrap()).unwrap();
            for s in step_sets(n) {
                for &i in &s {
                    t.check_kernel_image(&s, i).unwrap();
                    let inf = t.check_inf_image(&s, i).unwrap();
                    assert_eq!(inf.dim(), i * (n - i));
                }
            }
        }
    }

    #[test]
    fn inf_domain_examples() {
        let t = TMap::new(&sheared2()).unwrap();
        assert!(t.estars.iter().all(|e| !e.split));
        // μ = 0 and c_{0} + c_{1} = 0
        assert_eq!(t.inf_domain(&[1]).unwrap().dim(), t.domain_dim() - 2);
        let s = TMap::new(&swapped2()).unwrap();
        // {0} split: only c_{1} is constrained
        let dom = s.inf_domain(&[1]).unwrap();
        assert_eq!(dom.dim(), s.domain_dim() - 2);
        let mut x = vec![q(0); s.domain_dim()];
        x[s.c_index(0)] = q(1);
        assert!(dom.contains(&x).unwrap());
        // S = ∅ leaves only the ψ coordinates
        assert_eq!(s.inf_domain(&[]).unwrap().dim(), 2);
    }

    #[test]
    fn classification_examples() {
        let t = TMap::new(&swapped2()).unwrap();
        let c = t.classify().unwrap();
        assert!(c[0].split && !c[1].split);
        assert!(c.iter().all(|x| !x.very_critical));
        let t = TMap::new(&standard_module(4, reversed_flag(4))).unwrap();
        let vc: Vec<Subset> = t.classify().unwrap().iter().filter(|c| c.very_critical).map(|c| c.subset).collect();
        assert_eq!(vc, vec![key(4, "0,1")]);
        for n in 2..=3 {
            for d in permutation_flags(&standard_module(n, aligned_flag(n))) {
                let c = TMap::new(&d).unwrap().classify().unwrap();
                assert!(c.iter().all(|x| !x.very_critical));
            }
        }
    }

    /// An independent oracle for the n = 4 reversed flag: the coefficient
    /// test, evaluated by hand-rolled minors, flags only {0,1}.
    #[test]
    fn reversed_gl4_coefficient_oracle() {
        let n = 4;
        let d = standard_module(n, reversed_flag(n));
        for i_set in proper_subsets(n) {
            let i = i_set.len();
            let comp = i_set.complement().members();
            // x ∧ e_k for x a wedge of n−i−1 of the vectors v_i..v_{n−1}, i.e. of
            // e_0..e_{n−1−i}; the e_{I^c} coefficient is nonzero iff the chosen
            // indices together with k are exactly I^c.
            let tail: Vec<usize> = (0..n - i).collect();
            let mut hit = false;
            for skip in 0..tail.len() {
                let chosen: Vec<usize> = tail.iter().copied().filter(|&x| x != tail[skip]).collect();
                for k in 0..n {
                    let mut all = chosen.clone();
                    all.push(k);
                    all.sort_unstable();
                    all.dedup();
                    if all == comp {
                        hit = true;
                    }
                }
            }
            let t = TMap::new(&d).unwrap();
            assert_eq!(t.coefficient_criterion(&i_set).unwrap(), !hit, "{i_set:?}");
            assert_eq!(!hit, i_set == key(4, "0,1"), "{i_set:?}");
        }
    }

    #[test]
    fn classification_is_refinement_independent() {
        for d in permutation_flags(&standard_module(4, aligned_flag(4))).into_iter().step_by(3) {
            let t = TMap::new(&d).unwrap();
            for c in t.classify().unwrap() {
                let i = c.subset.len();
                for r in compatible_refinements(&c.subset) {
                    let w = d.position_times_longest(&r);
                    assert_eq!(w.support().contains(&i), c.critical);
                    assert_eq!(w.crossing_number(i).unwrap() >= 2, c.very_critical);
                }
            }
        }
    }

    #[test]
    fn cosplit_duality() {
        for seed in 0..12 {
            let n = 3 + seed as usize % 3;
            let mode = if seed % 2 == 0 { FlagMode::Permutation } else { FlagMode::Sparse };
            let t = TMap::new(&random_module(n, 2, 1, seed, &mode).unwrap()).unwrap();
            let c = t.classify().unwrap();
            for x in &c {
                let dual = c.iter().find(|y| y.subset == x.subset.complement()).unwrap();
                if x.cosplit {
                    assert!(dual.split);
                }
                if n == 3 {
                    assert_eq!(x.cosplit, dual.split);
                }
            }
        }
        for d in [sheared2(), swapped2()] {
            assert!(TMap::new(&d).unwrap().classify().unwrap().iter().all(|x| x.cosplit));
        }
    }

    #[test]
    fn refined_homfil_examples() {
        let t = TMap::new(&sheared2()).unwrap();
        let h = t.homfil_r(&Refinement::identity(2), 1).unwrap();
        assert_eq!(t.f_i_rank(&h).unwrap(), (2, 2));
        assert_eq!(t.f_i(&h, &Matrix::identity(2)).unwrap(), (q(1), q(1)));
        let t = TMap::new(&swapped2()).unwrap();
        let h = t.homfil_r(&Refinement::identity(2), 1).unwrap();
        let (rank, dim) = t.f_i_rank(&h).unwrap();
        assert_eq!(rank, 2);
        assert_ne!(dim, 2);
    }

    /// `f_i` is surjective; it is injective exactly when `s_i` is outside
    /// the support of `u = w_R·w_0`. The refined space is
    /// `Ad_b(z ⊕ (n_P ∩ Ad_{w_R} n))`, and `Ad_w` sends `E_{ab}` to
    /// `E_{w(a)w(b)}`, so its dimension is `2 + pair_count(u⁻¹, i)`.
    #[test]
    fn refined_homfil_dimensions() {
        for n in 2..=4 {
            for d in permutation_flags(&standard_module(n, aligned_flag(n))) {
                let t = TMap::new(&d).unwrap();
                for tau in Permutation::all(n) {
                    let r = Refinement { tau };
                    let w = d.position_times_longest(&r);
                    for i in 1..n {
                        let h = t.homfil_r(&r, i).unwrap();
                        let (rank, dim) = t.f_i_rank(&h).unwrap();
                        assert_eq!(rank, 2);
                        assert_eq!(dim == 2, !w.support().contains(&i));
                        assert_eq!(dim, 2 + w.inverse().pair_count(i).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn crit_kernel_examples() {
        let t = TMap::new(&swapped2()).unwrap();
        let c = t.crit_kernel_check(&key(2, "0")).unwrap();
        assert!(c.ok(), "{c:?}");
        assert_eq!(t.op(&key(2, "0")), &Matrix::from_i64(&[&[0, 1], &[0, 0]]));
        let t = TMap::new(&standard_module(3, reversed_flag(3))).unwrap();
        let c = t.crit_kernel_check(&key(3, "0")).unwrap();
        assert!(c.nonzero && c.in_homfil_r && c.f_vanishes);
        assert_eq!(c.kernel_dim, 2);
        assert!(!c.spans_kernel);
        let t = TMap::new(&standard_module(4, reversed_flag(4))).unwrap();
        assert!(t.crit_kernel_check(&key(4, "0,1")).is_err());
        let t = TMap::new(&sheared2()).unwrap();
        assert!(t.crit_kernel_check(&key(2, "0")).is_err());
    }

    /// The kernel of `f_i` has dimension `pair_count(u⁻¹, i)`, so `T_I`
    /// spans it only when that count is 1. Crossing number 1 alone is not
    /// enough: `u = w_0` in S_3 has crossing number 1 and two pairs.
    #[test]
    fn crit_kernel_tracks_pair_count() {
        for n in 2..=4 {
            for d in permutation_flags(&standard_module(n, aligned_flag(n))) {
                let t = TMap::new(&d).unwrap();
                for i_set in proper_subsets(n) {
                    let Ok(c) = t.crit_kernel_check(&i_set) else { continue };
                    assert!(c.nonzero && c.in_homfil_r && c.f_vanishes);
                    let w = d.position_times_longest(&canonical_refinement(&i_set));
                    let pairs = w.inverse().pair_count(i_set.len()).unwrap();
                    assert_eq!(c.kernel_dim, pairs);
                    assert_eq!(c.spans_kernel, pairs == 1);
                }
            }
        }
    }

    #[test]
    fn rescaled_operators_give_the_same_answers() {
        for seed in 0..6 {
            let n = 3 + seed as usize % 2;
            let d = random_module(n, 2, 1, seed, &FlagMode::Sparse).unwrap();
            let base = TMap::new(&d).unwrap();
            let scales: Vec<Q> = (0..base.subsets.len()).map(|k| qf(k as i64 % 5 - 2, 1 + k as i64 % 3)).map(|x| if x.is_zero() { q(7) } else { x }).collect();
            let t = TMap::with_scales(&d, scales).unwrap();
            assert_eq!(t.classify().unwrap(), base.classify().unwrap());
            for s in step_sets(n) {
                assert_eq!(t.kernel(&s).unwrap().dim(), base.kernel(&s).unwrap().dim());
                for &i in &s {
                    assert_eq!(t.kernel_image(&s, i).unwrap(), base.kernel_image(&s, i).unwrap());
                    assert_eq!(t.inf_image(&s, i).unwrap(), base.inf_image(&s, i).unwrap());
                }
            }
        }
    }
}
