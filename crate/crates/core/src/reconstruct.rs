//! Recovering the Hodge filtration from the images of kernels of the t-map.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::check_steps;
use crate::linalg::{kernel, Matrix, Subspace, Q};
use crate::phi_module::FilteredPhiModule;
use crate::tmap::TMap;

/// Matrices `M` with `M(A) = 0` and image inside `B`, as a subspace of
/// row-major `n×n` matrices.
pub fn hom_between(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    let n = a.ambient();
    if b.ambient() != n {
        return Err(Error::Dimension(format!("ambient dimensions {n} and {}", b.ambient())));
    }
    let mut gens = Vec::new();
    for col in b.basis_vecs() {
        for f in a.annihilator().basis_vecs() {
            let mut m = Vec::with_capacity(n * n);
            for x in &col {
                m.extend(f.iter().map(|y| x * y));
            }
            gens.push(m);
        }
    }
    Ok(Subspace::span(n * n, &gens))
}

/// Reads `(A, B)` back from `U = Hom(D/A, B)`: `A` is the common kernel and
/// `B` the sum of the column spaces.
pub fn recover_from_hom(n: usize, u: &Subspace) -> Result<(Subspace, Subspace)> {
    if u.ambient() != n * n {
        return Err(Error::Dimension(format!("expected {n}×{n} matrices, got ambient {}", u.ambient())));
    }
    if u.is_zero() {
        return Err(Error::Precondition("cannot recover from the zero space".into()));
    }
    let mut a = Subspace::full(n);
    let mut b = Subspace::zero(n);
    for v in u.basis_vecs() {
        let m = Matrix::from_vec(n, n, v);
        a = a.intersect(&kernel(&m))?;
        let cols: Vec<Vec<Q>> = (0..n).map(|c| m.column(c)).collect();
        b = b.sum(&Subspace::span(n, &cols))?;
    }
    Ok((a, b))
}

#[derive(Clone, Debug)]
pub struct ChainMember {
    pub steps: Vec<usize>,
    /// `{Σ_{|I|=i_m} c_I·T_I : c ∈ ker(steps)}`.
    pub u: Subspace,
}

#[derive(Clone, Debug)]
pub struct RecoveryInput {
    pub n: usize,
    pub weights: Vec<i64>,
    pub eigenvalues: Vec<Q>,
    pub steps: Vec<usize>,
    /// `S_j = {i_1..i_j, i_m}` for `j = 0..m−1`.
    pub chain: Vec<ChainMember>,
    pub u_inf: Subspace,
}

impl RecoveryInput {
    pub fn from_tmap(t: &TMap, s: &[usize]) -> Result<Self> {
        let s = check_steps(t.n(), s)?;
        let &last = s.last().ok_or_else(|| Error::Precondition("S must be nonempty".into()))?;
        let mut chain = Vec::new();
        for j in 0..s.len() {
            let mut sj = s[..j].to_vec();
            sj.push(last);
            chain.push(ChainMember { u: t.kernel_image(&sj, last)?, steps: sj });
        }
        Ok(RecoveryInput {
            n: t.n(),
            weights: t.module.weights.clone(),
            eigenvalues: t.module.eigenvalues.clone(),
            u_inf: t.inf_image(&s, last)?,
            steps: s,
            chain,
        })
    }
}

/// Recovered filtration steps, in the order of `steps`.
pub fn recover_filtration(input: &RecoveryInput) -> Result<Vec<(usize, Subspace)>> {
    let n = input.n;
    let s = check_steps(n, &input.steps)?;
    let &last = s.last().ok_or_else(|| Error::Precondition("S must be nonempty".into()))?;
    let (a_inf, b_inf) = recover_from_hom(n, &input.u_inf)?;
    if a_inf != b_inf {
        return Err(Error::Invariant(format!(
            "step {last}: kernel part (dim {}) and image part (dim {}) differ",
            a_inf.dim(),
            b_inf.dim()
        )));
    }
    let mut out = Vec::new();
    for (j, &i) in s.iter().enumerate().take(s.len() - 1) {
        let member = input
            .chain
            .get(j + 1)
            .ok_or_else(|| Error::Precondition(format!("missing chain member for step {i}")))?;
        let (a, _) = recover_from_hom(n, &member.u)?;
        out.push((i, a));
    }
    out.push((last, b_inf));
    for (i, f) in &out {
        if f.dim() != n - i {
            return Err(Error::Invariant(format!(
                "recovered step {i} has dimension {}, expected {}",
                f.dim(),
                n - i
            )));
        }
    }
    for w in out.windows(2) {
        if !w[0].1.contains_subspace(&w[1].1)? {
            return Err(Error::Invariant(format!(
                "recovered steps {} and {} are not nested",
                w[0].0, w[1].0
            )));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub recovered: Vec<Vec<String>>,
    pub expected: Vec<Vec<String>>,
    pub hom_identity: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub steps: Vec<usize>,
    pub reports: Vec<StepReport>,
    pub first_member_zero: bool,
    pub inf_identity: bool,
    pub pass: bool,
}

/// Runs the recovery on data assembled from `t` and compares with the flag.
/// The `Hom` identities for each chain member and for `U_inf` are checked
/// along the way.
pub fn roundtrip_report(t: &TMap, s: &[usize]) -> Result<RoundTrip> {
    let d = &t.module;
    let input = RecoveryInput::from_tmap(t, s)?;
    let s = input.steps.clone();
    let last = *s.last().expect("checked nonempty");
    let fil_last = d.filtration_subspace(last)?;
    let inf_identity = input.u_inf == hom_between(&fil_last, &fil_last)?;
    let mut identities = Vec::new();
    for (j, member) in input.chain.iter().enumerate().skip(1) {
        let source = d.filtration_subspace(s[j - 1])?;
        identities.push(member.u == hom_between(&source, &fil_last)?);
    }
    identities.push(inf_identity);
    let recovered = recover_filtration(&input)?;
    let mut reports = Vec::new();
    for ((i, got), hom_identity) in recovered.iter().zip(identities) {
        let want = d.filtration_subspace(*i)?;
        reports.push(StepReport {
            step: *i,
            recovered: got.to_strings(),
            expected: want.to_strings(),
            hom_identity,
            pass: *got == want && hom_identity,
        });
    }
    let first_member_zero = input.chain[0].u.is_zero();
    let pass = first_member_zero && reports.iter().all(|r| r.pass);
    Ok(RoundTrip { steps: s, reports, first_member_zero, inf_identity, pass })
}

pub fn roundtrip(d: &FilteredPhiModule, s: &[usize]) -> bool {
    TMap::new(d).and_then(|t| roundtrip_report(&t, s)).map(|r| r.pass).unwrap_or(false)
}
