//! Symbolic shapes of the representations attached to a module: which
//! constituents sit in the socle, which hang nonsplit over the locally
//! algebraic one, how many locally algebraic copies sit on top, and which
//! very critical pieces split off as direct summands.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{check_steps, fil_2nd_max, WedgeVector};
use crate::linalg::{Subspace, Q};
use crate::phi_module::FilteredPhiModule;
use crate::subset::Subset;
use crate::tmap::{all_steps, homfil_basis, kernel_formula, TMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constituent {
    Alg,
    C(Subset),
}

impl fmt::Display for Constituent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constituent::Alg => write!(f, "ALG"),
            Constituent::C(i) => write!(f, "C{{{}}}", i.key()),
        }
    }
}

impl Serialize for Constituent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiSkeleton {
    pub n: usize,
    pub steps: Vec<usize>,
    pub flat: bool,
    pub socle: Vec<Constituent>,
    pub middle_nonsplit: Vec<Constituent>,
    pub top_alg_multiplicity: usize,
    pub very_critical_summands: Vec<Subset>,
    /// With multiplicity: `ALG` repeated, then the cosplit constituents.
    pub cosocle: Vec<Constituent>,
}

fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v
}

impl PiSkeleton {
    /// Re-derives the structural invariants from the stored fields.
    pub fn verify(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(m));
        if self.socle.first() != Some(&Constituent::Alg) {
            return fail("the socle must contain ALG".into());
        }
        for i in &self.very_critical_summands {
            if !self.socle.contains(&Constituent::C(*i)) {
                return fail(format!("very critical {i:?} is not in the socle"));
            }
            if self.middle_nonsplit.contains(&Constituent::C(*i)) {
                return fail(format!("very critical {i:?} is nonsplit"));
            }
        }
        if self.flat && !self.very_critical_summands.is_empty() {
            return fail("a flat skeleton keeps no very critical summands".into());
        }
        for c in &self.socle {
            if c != &Constituent::Alg && self.middle_nonsplit.contains(c) {
                return fail(format!("{c} is both split and nonsplit"));
            }
        }
        let algs = self.cosocle.iter().filter(|c| **c == Constituent::Alg).count();
        let want = if self.steps.is_empty() { 1 } else { self.top_alg_multiplicity };
        if algs != want {
            return fail(format!("cosocle has ALG^{algs}, expected ALG^{want}"));
        }
        Ok(())
    }

    /// A layered diagram, top layer first.
    pub fn diagram(&self) -> String {
        let join = |v: &[Constituent]| {
            if v.is_empty() {
                "-".to_string()
            } else {
                v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("  ")
            }
        };
        let mut out = String::new();
        let steps: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        out += &format!(
            "skeleton n={} S={{{}}}{}\n",
            self.n,
            steps.join(","),
            if self.flat { " (flat)" } else { "" }
        );
        out += &format!("  top     ALG^{}\n", self.top_alg_multiplicity);
        out += &format!("  middle  {}\n", join(&self.middle_nonsplit));
        out += &format!("  socle   {}\n", join(&self.socle));
        let vc: Vec<String> =
            self.very_critical_summands.iter().map(|i| format!("[C{{{}}} - ALG]", i.key())).collect();
        out += &format!("  summands {}\n", if vc.is_empty() { "-".into() } else { vc.join("  ") });
        out += &format!("  cosocle {}\n", join(&self.cosocle));
        out
    }
}

/// Skeleton of the representation cut down to the steps in `S`.
pub fn build_pi_s(t: &TMap, s: &[usize]) -> Result<PiSkeleton> {
    build(t, s, false)
}

pub fn build_pi(t: &TMap) -> Result<PiSkeleton> {
    build(t, &all_steps(t.n()), false)
}

pub fn build_pi_flat(t: &TMap) -> Result<PiSkeleton> {
    build(t, &all_steps(t.n()), true)
}

pub fn build_pi_s_flat(t: &TMap, s: &[usize]) -> Result<PiSkeleton> {
    build(t, s, true)
}

fn build(t: &TMap, s: &[usize], flat: bool) -> Result<PiSkeleton> {
    let n = t.n();
    let s = check_steps(n, s)?;
    let classes = t.classify()?;
    let ker = t.checked_kernel(&s)?;
    let in_s: Vec<bool> = t.subsets.iter().map(|i| s.contains(&i.len())).collect();
    let vc: Vec<usize> =
        (0..t.subsets.len()).filter(|&k| in_s[k] && classes[k].very_critical).collect();
    for &k in &vc {
        if !classes[k].split {
            return Err(Error::Invariant(format!("very critical {:?} is not split", t.subsets[k])));
        }
    }
    let mut socle = vec![Constituent::Alg];
    let mut middle = Vec::new();
    let mut cosplit = Vec::new();
    for (k, i_set) in t.subsets.iter().enumerate() {
        if !in_s[k] || (flat && vc.contains(&k)) {
            continue;
        }
        if classes[k].split {
            socle.push(Constituent::C(*i_set));
        } else {
            middle.push(Constituent::C(*i_set));
        }
        let by_kernel = ker.basis_vecs().iter().all(|v| v[t.c_index(k)].is_zero());
        let unit = WedgeVector::basis(n, &i_set.complement()).coords().to_vec();
        let by_wedge = fil_2nd_max(&t.module, &s, i_set.len())?.contains(&unit)?;
        if by_kernel != by_wedge {
            return Err(Error::Invariant(format!(
                "cosplit tests disagree for {i_set:?} with S = {s:?}"
            )));
        }
        if by_kernel {
            cosplit.push(Constituent::C(*i_set));
        }
    }
    let mut top = ker.dim();
    if flat {
        let ker_flat = t.kernel_without(&s, &vc)?;
        let units: Vec<Vec<Q>> = vc
            .iter()
            .map(|&k| {
                let mut v = vec![Q::zero(); t.domain_dim()];
                v[t.c_index(k)] = Q::from_integer(1.into());
                v
            })
            .collect();
        let split_off = Subspace::span(t.domain_dim(), &units);
        if ker_flat.dim() + vc.len() != ker.dim() || ker_flat.sum(&split_off)? != ker {
            return Err(Error::Invariant(
                "kernel is not the flat kernel plus the very critical coordinates".into(),
            ));
        }
        top = ker_flat.dim();
    }
    let mut cosocle = vec![Constituent::Alg; if s.is_empty() { 1 } else { top }];
    cosocle.extend(sorted(cosplit));
    let sk = PiSkeleton {
        n,
        steps: s,
        flat,
        socle: sorted(socle),
        middle_nonsplit: sorted(middle),
        top_alg_multiplicity: top,
        very_critical_summands: if flat { Vec::new() } else { vc.iter().map(|&k| t.subsets[k]).collect() },
        cosocle,
    };
    sk.verify()?;
    Ok(sk)
}

pub fn skeleton_equal(a: &PiSkeleton, b: &PiSkeleton) -> bool {
    a == b
}

/// The kernel blocks that cannot be split further: connected components of
/// the coordinates that occur together in a row of the canonical basis.
/// The returned blocks are verified to reassemble `U` as a direct sum.
pub fn decompose_by_support(u: &Subspace) -> Result<Vec<Vec<usize>>> {
    let dim = u.ambient();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut used = vec![false; dim];
    for row in u.basis_vecs() {
        let support: Vec<usize> = (0..dim).filter(|&c| !row[c].is_zero()).collect();
        for &c in &support {
            used[c] = true;
        }
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for c in 0..dim {
        if used[c] {
            let r = find(&mut parent, c);
            blocks.entry(r).or_default().push(c);
        }
    }
    let mut blocks: Vec<Vec<usize>> = blocks.into_values().collect();
    blocks.sort();
    let mut total = Subspace::zero(dim);
    let mut dims = 0;
    for b in &blocks {
        let coords: Vec<Vec<Q>> = b
            .iter()
            .map(|&c| {
                let mut v = vec![Q::zero(); dim];
                v[c] = Q::from_integer(1.into());
                v
            })
            .collect();
        let piece = u.intersect(&Subspace::span(dim, &coords))?;
        dims += piece.dim();
        total = total.sum(&piece)?;
    }
    if total != *u || dims != u.dim() {
        return Err(Error::Invariant("support blocks do not reassemble the subspace".into()));
    }
    Ok(blocks)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtDims {
    pub n: usize,
    pub embeddings: usize,
    /// `n + dim Hom_Fil` for each embedding.
    pub per_embedding: Vec<usize>,
    /// Rank of the t-map for each embedding.
    pub per_embedding_by_rank: Vec<usize>,
    pub aggregate_closed: usize,
    pub aggregate_amalgam: usize,
}

/// Extension counts for one or several embeddings sharing `(n, p, f, φ)`.
pub fn ext_dims(modules: &[FilteredPhiModule]) -> Result<ExtDims> {
    let first = modules.first().ok_or_else(|| Error::Precondition("no embeddings given".into()))?;
    for d in modules {
        if d.n != first.n || d.p != first.p || d.f != first.f || d.eigenvalues != first.eigenvalues {
            return Err(Error::Precondition(
                "embeddings must share rank, p, f and eigenvalues".into(),
            ));
        }
    }
    let n = first.n;
    let d = modules.len();
    let mut per = Vec::new();
    let mut by_rank = Vec::new();
    for m in modules {
        per.push(n + homfil_basis(m).dim());
        let t = TMap::new(m)?;
        let rank = t.domain_dim() - t.kernel(&all_steps(n))?.dim();
        by_rank.push(rank);
    }
    let closed = n + d * n * (n + 1) / 2;
    let amalgam = per.iter().sum::<usize>() - (d - 1) * n;
    let single = n + n * (n + 1) / 2;
    let out = ExtDims {
        n,
        embeddings: d,
        per_embedding: per,
        per_embedding_by_rank: by_rank,
        aggregate_closed: closed,
        aggregate_amalgam: amalgam,
    };
    if out.per_embedding.iter().chain(&out.per_embedding_by_rank).any(|&x| x != single)
        || closed != amalgam
    {
        return Err(Error::Invariant(format!("extension counts disagree: {out:?}")));
    }
    Ok(out)
}

/// Per-embedding skeletons with their shared counts.
#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub skeletons: Vec<PiSkeleton>,
    pub ext: ExtDims,
}

pub fn aggregate(modules: &[FilteredPhiModule], s: Option<&[usize]>, flat: bool) -> Result<Aggregate> {
    let ext = ext_dims(modules)?;
    let skeletons = modules
        .iter()
        .map(|d| {
            let t = TMap::new(d)?;
            let steps = s.map(<[usize]>::to_vec).unwrap_or_else(|| all_steps(d.n));
            build(&t, &steps, flat)
        })
        .collect::<Result<_>>()?;
    Ok(Aggregate { skeletons, ext })
}

/// Expected top multiplicity of the cut-down skeleton.
pub fn expected_top(n: usize, s: &[usize]) -> Result<usize> {
    kernel_formula(n, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use crate::phi_module::{
        aligned_flag, permutation_flags, random_module, reversed_flag, standard_module, FlagMode,
    };
    use crate::tmap::step_sets;

    fn v(x: &[i64]) -> Vec<Q> {
        x.iter().map(|&a| q(a)).collect()
    }

    fn c(n: usize, k: &str) -> Constituent {
        Constituent::C(Subset::parse_key(n, k).unwrap())
    }

    #[test]
    fn swapped_rank_two() {
        let d = standard_module(2, vec![v(&[0, 1]), v(&[1, 0])]);
        let sk = build_pi(&TMap::new(&d).unwrap()).unwrap();
        assert_eq!(sk.socle, vec![Constituent::Alg, c(2, "0")]);
        assert_eq!(sk.middle_nonsplit, vec![c(2, "1")]);
        assert_eq!(sk.top_alg_multiplicity, 0);
        assert_eq!(sk.cosocle, vec![c(2, "0"), c(2, "1")]);
        let sheared = standard_module(2, vec![v(&[1, 0]), v(&[1, 1])]);
        let other = build_pi(&TMap::new(&sheared).unwrap()).unwrap();
        assert!(!skeleton_equal(&sk, &other));
        assert!(skeleton_equal(&sk, &sk.clone()));
    }

    #[test]
    fn reversed_rank_four() {
        let t = TMap::new(&standard_module(4, reversed_flag(4))).unwrap();
        let sk = build_pi(&t).unwrap();
        assert_eq!(sk.very_critical_summands, vec![Subset::new(4, &[0, 1]).unwrap()]);
        assert_eq!(sk.top_alg_multiplicity, 5);
        let flat = build_pi_flat(&t).unwrap();
        assert_eq!(flat.top_alg_multiplicity, 4);
        assert!(flat.very_critical_summands.is_empty());
        assert!(!flat.socle.contains(&c(4, "0,1")));
        assert!(sk.diagram().contains("[C{0,1} - ALG]"));
    }

    #[test]
    fn empty_step_set_is_the_algebraic_piece() {
        let t = TMap::new(&random_module(3, 2, 1, 1, &FlagMode::Generic).unwrap()).unwrap();
        let sk = build_pi_s(&t, &[]).unwrap();
        assert_eq!(sk.socle, vec![Constituent::Alg]);
        assert!(sk.middle_nonsplit.is_empty());
        assert_eq!(sk.top_alg_multiplicity, 0);
        assert_eq!(sk.cosocle, vec![Constituent::Alg]);
    }

    #[test]
    fn top_multiplicities() {
        for seed in 0..10 {
            let n = 2 + seed as usize % 4;
            let mode = if seed % 2 == 0 { FlagMode::Sparse } else { FlagMode::Generic };
            let t = TMap::new(&random_module(n, 2, 1, seed, &mode).unwrap()).unwrap();
            assert_eq!(build_pi(&t).unwrap().top_alg_multiplicity, (1 << n) - 1 - n * (n + 1) / 2);
            for s in step_sets(n) {
                assert_eq!(build_pi_s(&t, &s).unwrap().top_alg_multiplicity, expected_top(n, &s).unwrap());
                build_pi_s_flat(&t, &s).unwrap();
            }
            assert_eq!(build_pi_s(&t, &[1]).unwrap().top_alg_multiplicity, 0);
            assert_eq!(build_pi_s(&t, &[n - 1]).unwrap().top_alg_multiplicity, 0);
        }
    }

    #[test]
    fn rank_three_is_always_flat() {
        for d in permutation_flags(&standard_module(3, aligned_flag(3))) {
            let t = TMap::new(&d).unwrap();
            let mut a = build_pi(&t).unwrap();
            let b = build_pi_flat(&t).unwrap();
            a.flat = true;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn support_blocks() {
        let e = |i: usize| {
            let mut x = vec![q(0); 4];
            x[i] = q(1);
            x
        };
        let u = Subspace::span(4, &[e(0), e(1)]);
        assert_eq!(decompose_by_support(&u).unwrap(), vec![vec![0], vec![1]]);
        let u = Subspace::span(4, &[v(&[1, 1, 0, 0])]);
        assert_eq!(decompose_by_support(&u).unwrap(), vec![vec![0, 1]]);
        let u = Subspace::span(4, &[v(&[1, 1, 0, 0]), v(&[0, 0, 2, 0]), v(&[0, 1, 0, 3])]);
        assert_eq!(decompose_by_support(&u).unwrap(), vec![vec![0, 1, 3], vec![2]]);
        for seed in 0..6 {
            let n = 3 + seed as usize % 3;
            let t = TMap::new(&random_module(n, 2, 1, seed, &FlagMode::Sparse).unwrap()).unwrap();
            decompose_by_support(&t.kernel(&all_steps(n)).unwrap()).unwrap();
        }
    }

    #[test]
    fn extension_counts() {
        let d = random_module(3, 2, 1, 0, &FlagMode::Generic).unwrap();
        assert_eq!(ext_dims(std::slice::from_ref(&d)).unwrap().aggregate_closed, 9);
        let e = d.with_flag(reversed_flag(3));
        let two = ext_dims(&[d.clone(), e.clone()]).unwrap();
        assert_eq!(two.aggregate_closed, 15);
        assert_eq!(two.aggregate_amalgam, 15);
        let three = ext_dims(&[d.clone(), e, d.clone()]).unwrap();
        assert_eq!(three.aggregate_closed, 3 + 3 * 6);
        let other = random_module(3, 3, 1, 0, &FlagMode::Generic).unwrap();
        assert!(ext_dims(&[d, other]).is_err());
    }
}
