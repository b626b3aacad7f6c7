//! JSON reports for the command-line tool. Objects are `serde_json` maps,
//! which keep keys sorted, so equal inputs give byte-identical output.

use serde::Serialize;
use serde_json::{json, Value};

use crate::coxeter::{Permutation, MAX_REDUCED_WORDS};
use crate::error::Result;
use crate::exterior::{check_steps, fil_2nd_max};
use crate::phi_module::{canonical_refinement, FilteredPhiModule};
use crate::reconstruct::{roundtrip_report, RoundTrip};
use crate::skeleton::{aggregate, Aggregate};
use crate::subset::Subset;
use crate::suite::Outcome;
use crate::tmap::{kernel_formula, SubsetClass, TMap};

pub const SCHEMA_VERSION: u32 = 1;

/// Adds the `schema` key naming the report kind and version.
pub fn with_schema(kind: &str, body: impl Serialize) -> Value {
    let mut v = serde_json::to_value(body).expect("reports serialize");
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), json!(format!("phimod/{kind}/v{SCHEMA_VERSION}")));
    }
    v
}

#[derive(Serialize)]
pub struct ValidateReport {
    pub instances: usize,
    pub valid: bool,
    pub problems: Vec<String>,
}

pub fn validate(modules: &[FilteredPhiModule]) -> ValidateReport {
    let mut problems = Vec::new();
    for (k, d) in modules.iter().enumerate() {
        for p in d.validate() {
            problems.push(if modules.len() > 1 { format!("instance {k}: {p}") } else { p });
        }
    }
    if let Some(first) = modules.first() {
        if modules.iter().any(|d| {
            d.n != first.n || d.p != first.p || d.f != first.f || d.eigenvalues != first.eigenvalues
        }) {
            problems.push("instances must share n, p, f and eigenvalues".into());
        }
    }
    ValidateReport { instances: modules.len(), valid: problems.is_empty(), problems }
}

#[derive(Serialize)]
pub struct ClassifyReport {
    pub n: usize,
    pub subsets: Vec<ClassEntry>,
    pub split: Vec<Subset>,
    pub cosplit: Vec<Subset>,
    pub very_critical: Vec<Subset>,
}

#[derive(Serialize)]
pub struct ClassEntry {
    #[serde(flatten)]
    pub class: SubsetClass,
    /// `w_R·w_0` for the canonical refinement of the subset.
    pub position: String,
}

pub fn classify(t: &TMap) -> Result<ClassifyReport> {
    let classes = t.classify()?;
    let pick = |f: fn(&SubsetClass) -> bool| classes.iter().filter(|c| f(c)).map(|c| c.subset).collect();
    Ok(ClassifyReport {
        n: t.n(),
        split: pick(|c| c.split),
        cosplit: pick(|c| c.cosplit),
        very_critical: pick(|c| c.very_critical),
        subsets: classes
            .iter()
            .map(|c| ClassEntry {
                class: c.clone(),
                position: t.module.position_times_longest(&canonical_refinement(&c.subset)).to_string(),
            })
            .collect(),
    })
}

#[derive(Serialize)]
pub struct StepImages {
    pub step: usize,
    pub kernel_image_dim: usize,
    pub inf_image_dim: usize,
    pub fil_2nd_max_dim: usize,
}

#[derive(Serialize)]
pub struct TMapReport {
    pub n: usize,
    pub steps: Vec<usize>,
    pub domain_dim: usize,
    pub operators: Vec<Operator>,
    pub classification: Option<Vec<SubsetClass>>,
    pub kernel_basis: Vec<Vec<String>>,
    pub kernel_dim: usize,
    pub formula_dim: usize,
    pub images: Vec<StepImages>,
    pub invariants: Vec<Outcome>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct Operator {
    pub subset: Subset,
    pub matrix: Vec<Vec<String>>,
}

pub fn tmap(t: &TMap, s: &[usize]) -> Result<TMapReport> {
    let n = t.n();
    let s = check_steps(n, s)?;
    let kernel = t.kernel(&s)?;
    let formula_dim = kernel_formula(n, &s)?;
    let mut invariants = vec![Outcome {
        name: "kernel_dimension".into(),
        pass: kernel.dim() == formula_dim,
        detail: String::new(),
    }];
    let mut push = |name: String, r: Result<()>| {
        invariants.push(match r {
            Ok(()) => Outcome { name, pass: true, detail: String::new() },
            Err(e) => Outcome { name, pass: false, detail: e.to_string() },
        })
    };
    push("surjective".into(), t.check_surjective());
    let classification = t.classify();
    push("classification".into(), classification.as_ref().map(|_| ()).map_err(Clone::clone));
    let mut images = Vec::new();
    for &i in &s {
        let k = t.check_kernel_image(&s, i);
        let inf = t.check_inf_image(&s, i);
        images.push(StepImages {
            step: i,
            kernel_image_dim: t.kernel_image(&s, i)?.dim(),
            inf_image_dim: t.inf_image(&s, i)?.dim(),
            fil_2nd_max_dim: fil_2nd_max(&t.module, &s, i)?.dim(),
        });
        push(format!("kernel_image_{i}"), k.map(|_| ()));
        push(format!("inf_image_{i}"), inf.map(|_| ()));
    }
    let pass = invariants.iter().all(|o| o.pass);
    Ok(TMapReport {
        n,
        domain_dim: t.domain_dim(),
        operators: t
            .subsets
            .iter()
            .zip(&t.ops)
            .map(|(i, m)| Operator { subset: *i, matrix: m.to_strings() })
            .collect(),
        classification: classification.ok(),
        kernel_basis: kernel.to_strings(),
        kernel_dim: kernel.dim(),
        formula_dim,
        images,
        invariants,
        pass,
        steps: s,
    })
}

pub fn skeleton(modules: &[FilteredPhiModule], s: Option<&[usize]>, flat: bool) -> Result<Aggregate> {
    aggregate(modules, s, flat)
}

pub fn reconstruct(t: &TMap, s: &[usize]) -> Result<RoundTrip> {
    roundtrip_report(t, s)
}

#[derive(Serialize)]
pub struct GeneratorReport {
    pub i: usize,
    pub crossing_number: usize,
    pub pair_count: usize,
    pub min_multiplicity: Option<usize>,
    pub reflections_dropping: usize,
    pub multfree: Option<Value>,
}

#[derive(Serialize)]
pub struct WeylReport {
    pub window: String,
    pub word: Option<Vec<usize>>,
    pub length: usize,
    pub inverse: String,
    pub support: Vec<usize>,
    pub right_descents: Vec<usize>,
    pub reduced_word_count: Option<usize>,
    pub sample_reduced_word: Option<String>,
    pub generators: Vec<GeneratorReport>,
}

pub fn weyl(w: &Permutation, word: Option<Vec<usize>>) -> Result<WeylReport> {
    let n = w.n();
    let words = w.reduced_words().ok();
    let mut generators = Vec::new();
    for i in 1..n {
        let multfree = if w.crossing_number(i)? == 1 {
            let (wp, form) = w.multfree_decompose(i)?;
            Some(json!({ "prefix": wp.to_string(), "form": form, "word": form.word() }))
        } else {
            None
        };
        generators.push(GeneratorReport {
            i,
            crossing_number: w.crossing_number(i)?,
            pair_count: w.pair_count(i)?,
            min_multiplicity: words.as_ref().map(|ws| {
                ws.iter().map(|x| x.iter().filter(|&&g| g == i).count()).min().unwrap_or(0)
            }),
            reflections_dropping: w.reflections_dropping(i)?,
            multfree,
        });
    }
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-");
    Ok(WeylReport {
        window: w.to_string(),
        word,
        length: w.length(),
        inverse: w.inverse().to_string(),
        support: w.support().into_iter().collect(),
        right_descents: w.right_descents(),
        reduced_word_count: words.as_ref().map(|ws| ws.len()).filter(|&c| c < MAX_REDUCED_WORDS),
        sample_reduced_word: words.as_ref().and_then(|ws| ws.iter().next().map(|x| join(x))),
        generators,
    })
}
