//! The invariant suite behind `phimod check`: every cross-check the library
//! knows about, run over one instance or a seeded campaign.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coxeter::Permutation;
use crate::error::{Error, Result};
use crate::exterior::{fil_2nd_max, fil_2nd_max_expected_dim};
use crate::linalg::Q;
use crate::phi_module::{
    aligned_flag, canonical_refinement, compatible_refinements, permutation_flags, random_module,
    standard_module, FilteredPhiModule, FlagMode, Refinement,
};
use crate::reconstruct::{recover_filtration, roundtrip_report, RecoveryInput};
use crate::skeleton::{build_pi_s, build_pi_s_flat, decompose_by_support, ext_dims};
use crate::tmap::{all_steps, step_sets, TMap};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

fn run(name: &str, f: impl FnOnce() -> Result<()>) -> Outcome {
    match f() {
        Ok(()) => Outcome { name: name.into(), pass: true, detail: String::new() },
        Err(e) => Outcome { name: name.into(), pass: false, detail: e.to_string() },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Invariant(msg()))
    }
}

fn nonzero_rationals(rng: &mut ChaCha8Rng, count: usize) -> Vec<Q> {
    (0..count)
        .map(|_| {
            let num = rng.gen_range(1..=9i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
            Q::new(num.into(), rng.gen_range(1..=7i64).into())
        })
        .collect()
}

/// Refinements examined for the refined Hom spaces: all of them up to
/// rank 4, the canonical ones beyond.
fn refinements_to_check(d: &FilteredPhiModule, t: &TMap) -> Vec<Refinement> {
    if d.n <= 4 {
        Permutation::all(d.n).into_iter().map(|tau| Refinement { tau }).collect()
    } else {
        let set: BTreeSet<Permutation> =
            t.subsets.iter().map(|i| canonical_refinement(i).tau).collect();
        set.into_iter().map(|tau| Refinement { tau }).collect()
    }
}

/// Every per-instance invariant. `salt` seeds the random rescalings.
pub fn instance_checks(d: &FilteredPhiModule, salt: u64) -> Vec<Outcome> {
    let problems = d.validate();
    if !problems.is_empty() {
        return vec![Outcome { name: "valid".into(), pass: false, detail: problems.join("; ") }];
    }
    let t = match TMap::new(d) {
        Ok(t) => t,
        Err(e) => return vec![Outcome { name: "t_map".into(), pass: false, detail: e.to_string() }],
    };
    let n = d.n;
    let sets = step_sets(n);
    let mut out = vec![Outcome { name: "valid".into(), pass: true, detail: String::new() }];

    out.push(run("kernel_dimensions", || {
        for s in &sets {
            t.checked_kernel(s)?;
        }
        Ok(())
    }));
    out.push(run("surjective", || t.check_surjective()));
    let classes = t.classify();
    out.push(run("classification", || classes.as_ref().map(|_| ()).map_err(Clone::clone)));
    out.push(run("refinement_independence", || {
        for c in classes.as_ref().map_err(Clone::clone)? {
            let i = c.subset.len();
            for r in compatible_refinements(&c.subset) {
                let w = d.position_times_longest(&r);
                ensure(
                    w.support().contains(&i) == c.critical
                        && (w.crossing_number(i)? >= 2) == c.very_critical,
                    || format!("{:?} depends on the refinement {:?}", c.subset, r.tau),
                )?;
            }
        }
        Ok(())
    }));
    out.push(run("cosocle_duality", || {
        let cs = classes.as_ref().map_err(Clone::clone)?;
        for x in cs {
            let dual = cs.iter().find(|y| y.subset == x.subset.complement()).expect("complement");
            ensure(n == 2 || !x.cosplit || dual.split, || format!("{:?} cosplit, complement not split", x.subset))?;
            ensure(n != 3 || x.cosplit == dual.split, || format!("{:?} duality fails", x.subset))?;
            ensure(n != 2 || x.cosplit, || format!("{:?} not cosplit in rank 2", x.subset))?;
        }
        Ok(())
    }));
    out.push(run("image_characterizations", || {
        for s in &sets {
            for &i in s {
                let f = fil_2nd_max(d, s, i)?;
                let want = fil_2nd_max_expected_dim(n, s, i)?;
                ensure(f.dim() == want, || format!("fil_2nd_max({s:?}, {i}) has dim {}, expected {want}", f.dim()))?;
                t.check_kernel_image(s, i)?;
                t.check_inf_image(s, i)?;
            }
        }
        Ok(())
    }));
    out.push(run("refined_hom_spaces", || {
        for r in refinements_to_check(d, &t) {
            let u = d.position_times_longest(&r);
            for i in 1..n {
                let (rank, dim) = t.f_i_rank(&t.homfil_r(&r, i)?)?;
                let pairs = u.inverse().pair_count(i)?;
                ensure(rank == 2 && dim == 2 + pairs, || {
                    format!("refinement {:?}, i = {i}: rank {rank}, dim {dim}, pairs {pairs}", r.tau)
                })?;
                ensure((dim == 2) == !u.support().contains(&i), || {
                    format!("refinement {:?}, i = {i}: bijectivity against support", r.tau)
                })?;
            }
        }
        Ok(())
    }));
    out.push(run("crossing_one_kernels", || {
        for i_set in &t.subsets {
            let Ok(c) = t.crit_kernel_check(i_set) else { continue };
            let u = d.position_times_longest(&canonical_refinement(i_set));
            let pairs = u.inverse().pair_count(i_set.len())?;
            ensure(c.nonzero && c.in_homfil_r && c.f_vanishes, || format!("{i_set:?}: {c:?}"))?;
            ensure(c.kernel_dim == pairs && c.spans_kernel == (pairs == 1), || {
                format!("{i_set:?}: kernel dim {} with {pairs} pairs", c.kernel_dim)
            })?;
        }
        Ok(())
    }));
    out.push(run("skeletons", || {
        for s in &sets {
            let sk = build_pi_s(&t, s)?;
            ensure(sk.top_alg_multiplicity == crate::tmap::kernel_formula(n, s)?, || {
                format!("top multiplicity for {s:?}")
            })?;
            build_pi_s_flat(&t, s)?;
            decompose_by_support(&t.kernel(s)?)?;
        }
        Ok(())
    }));
    out.push(run("reconstruction", || {
        for s in sets.iter().filter(|s| !s.is_empty()) {
            let r = roundtrip_report(&t, s)?;
            ensure(r.pass, || format!("round trip fails for S = {s:?}"))?;
        }
        Ok(())
    }));
    out.push(run("choice_invariance", || choice_invariance(d, &t, salt)));
    out
}

/// Kernel dimensions, classification, image subspaces, skeletons and
/// recovered filtrations do not see the auxiliary choices.
fn choice_invariance(d: &FilteredPhiModule, base: &TMap, salt: u64) -> Result<()> {
    let n = d.n;
    let mut rng = ChaCha8Rng::seed_from_u64(salt ^ 0x5eed);
    let all = all_steps(n);
    let classes = base.classify()?;
    let base_sk = build_pi_s(base, &all)?;

    let scaled = TMap::with_scales(d, nonzero_rationals(&mut rng, base.subsets.len()))?;
    ensure(scaled.classify()? == classes, || "classification moved under rescaled T_I".into())?;
    ensure(build_pi_s(&scaled, &all)? == base_sk, || "skeleton moved under rescaled T_I".into())?;
    for s in step_sets(n) {
        ensure(scaled.kernel(&s)?.dim() == base.kernel(&s)?.dim(), || format!("kernel dim for {s:?}"))?;
        for &i in &s {
            ensure(scaled.kernel_image(&s, i)? == base.kernel_image(&s, i)?, || {
                format!("kernel image for {s:?} at {i}")
            })?;
            ensure(scaled.inf_image(&s, i)? == base.inf_image(&s, i)?, || {
                format!("inf image for {s:?} at {i}")
            })?;
        }
        if !s.is_empty() {
            let a = recover_filtration(&RecoveryInput::from_tmap(base, &s)?)?;
            let b = recover_filtration(&RecoveryInput::from_tmap(&scaled, &s)?)?;
            ensure(a == b, || format!("recovery for {s:?} moved under rescaled T_I"))?;
        }
    }

    let flag_scaled = TMap::new(&d.rescale_flag(&nonzero_rationals(&mut rng, n)))?;
    ensure(flag_scaled.classify()? == classes, || "classification moved under flag rescaling".into())?;
    ensure(build_pi_s(&flag_scaled, &all)? == base_sk, || "skeleton moved under flag rescaling".into())?;
    for s in step_sets(n).into_iter().filter(|s| !s.is_empty()) {
        let a = recover_filtration(&RecoveryInput::from_tmap(base, &s)?)?;
        let b = recover_filtration(&RecoveryInput::from_tmap(&flag_scaled, &s)?)?;
        ensure(a == b, || format!("recovery for {s:?} moved under flag rescaling"))?;
    }

    let basis_scaled_module = d.rescale_basis(&nonzero_rationals(&mut rng, n));
    let basis_scaled = TMap::new(&basis_scaled_module)?;
    ensure(basis_scaled.classify()? == classes, || "classification moved under basis rescaling".into())?;
    ensure(build_pi_s(&basis_scaled, &all)? == base_sk, || "skeleton moved under basis rescaling".into())?;
    for s in step_sets(n).into_iter().filter(|s| !s.is_empty()) {
        ensure(roundtrip_report(&basis_scaled, &s)?.pass, || {
            format!("recovery for {s:?} fails after basis rescaling")
        })?;
    }
    Ok(())
}

/// Checks that depend only on the rank: word combinatorics, the
/// permutation-flag corpus and the extension counts.
pub fn rank_checks(n: usize, seed: u64) -> Vec<Outcome> {
    let mut out = Vec::new();
    if n <= 5 {
        out.push(run("coxeter_classes", || {
            for w in Permutation::all(n) {
                let words = w.reduced_words()?;
                let support: BTreeSet<usize> = words.iter().flatten().copied().collect();
                ensure(support == w.support(), || format!("{w:?}: support"))?;
                for i in 1..n {
                    let m = w.min_generator_multiplicity(i)?;
                    let c = w.crossing_number(i)?;
                    ensure(m.min(2) == c.min(2), || format!("{w:?} at s_{i}: multiplicity {m}, crossing {c}"))?;
                    if c == 1 {
                        w.multfree_decompose(i)?;
                    }
                    w.reflections_dropping(i)?;
                }
            }
            Ok(())
        }));
    }
    if n <= 4 {
        let flags = permutation_flags(&standard_module(n, aligned_flag(n)));
        let failures: Vec<String> = flags
            .par_iter()
            .enumerate()
            .flat_map(|(k, d)| {
                instance_checks(d, seed.wrapping_add(k as u64))
                    .into_iter()
                    .filter(|o| !o.pass)
                    .map(|o| format!("flag {k}: {}: {}", o.name, o.detail))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.push(Outcome {
            name: "permutation_flags".into(),
            pass: failures.is_empty(),
            detail: failures.join("; "),
        });
    }
    out.push(run("extension_counts", || {
        let ds = (0..3)
            .map(|k| random_module(n, 2, 1, seed.wrapping_add(k), &FlagMode::Sparse))
            .collect::<Result<Vec<_>>>()?;
        let first = ds[0].clone();
        let ds: Vec<FilteredPhiModule> = ds.into_iter().map(|d| first.with_flag(d.flag)).collect();
        for k in 1..=3 {
            ext_dims(&ds[..k])?;
        }
        Ok(())
    }));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub mode: String,
    pub outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub rank_checks: Vec<Outcome>,
    pub trial_reports: Vec<TrialReport>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

pub fn mode_for(k: u64) -> FlagMode {
    match k % 3 {
        0 => FlagMode::Generic,
        1 => FlagMode::Sparse,
        _ => FlagMode::Permutation,
    }
}

fn tally(rank: &[Outcome], trials: &[TrialReport]) -> (usize, usize) {
    let all = rank.iter().chain(trials.iter().flat_map(|t| &t.outcomes));
    all.fold((0, 0), |(p, f), o| if o.pass { (p + 1, f) } else { (p, f + 1) })
}

/// A seeded campaign of `trials` random instances of rank `n`. Trial `k`
/// uses seed `seed + k`; results are sorted by seed.
pub fn run_campaign(n: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    if !(2..=6).contains(&n) {
        return Err(Error::Range(format!("rank {n} outside 2..=6")));
    }
    let mut trial_reports: Vec<TrialReport> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let s = seed.wrapping_add(k);
            let mode = mode_for(k);
            let outcomes = match random_module(n, 2, 1, s, &mode) {
                Ok(d) => instance_checks(&d, s),
                Err(e) => vec![Outcome { name: "generate".into(), pass: false, detail: e.to_string() }],
            };
            TrialReport { seed: s, mode: format!("{mode:?}").to_lowercase(), outcomes }
        })
        .collect();
    trial_reports.sort_by_key(|t| t.seed);
    let rank_checks = rank_checks(n, seed);
    let (passed, failed) = tally(&rank_checks, &trial_reports);
    Ok(SuiteReport { n, trials, seed, rank_checks, trial_reports, passed, failed })
}

/// The suite on given instances, plus the rank checks for their rank.
pub fn run_on(modules: &[FilteredPhiModule], seed: u64) -> Result<SuiteReport> {
    let n = modules.first().ok_or_else(|| Error::Precondition("no instances".into()))?.n;
    let mut trial_reports: Vec<TrialReport> = modules
        .par_iter()
        .enumerate()
        .map(|(k, d)| TrialReport {
            seed: k as u64,
            mode: "given".into(),
            outcomes: instance_checks(d, seed.wrapping_add(k as u64)),
        })
        .collect();
    trial_reports.sort_by_key(|t| t.seed);
    let mut rank_checks = rank_checks(n, seed);
    if modules.len() > 1 {
        rank_checks.push(run("given_extension_counts", || ext_dims(modules).map(|_| ())));
    }
    let (passed, failed) = tally(&rank_checks, &trial_reports);
    Ok(SuiteReport { n, trials: modules.len(), seed, rank_checks, trial_reports, passed, failed })
}
