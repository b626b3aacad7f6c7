use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use phimod::coxeter::{parse_window, parse_word, Permutation};
use phimod::phi_module::{parse_instances, random_module, FlagMode};
use phimod::report::{self, with_schema};
use phimod::suite::{run_campaign, run_on, SuiteReport};
use phimod::tmap::{all_steps, TMap};
use phimod::{Error, FilteredPhiModule};

#[derive(Parser)]
#[command(name = "phimod", version, about = "Exact computations on regular filtered phi-modules")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that an instance file describes valid modules.
    Validate { file: PathBuf },
    /// Split / cosplit / critical / very critical status of every subset.
    Classify { file: PathBuf },
    /// Operators, kernel and image checks of the t-map.
    Tmap {
        file: PathBuf,
        /// Filtration steps, e.g. `1,3`. Defaults to all of them.
        #[arg(long = "S", value_name = "STEPS")]
        steps: Option<String>,
    },
    /// Representation skeleton, per embedding when given a list.
    Skeleton {
        file: PathBuf,
        #[arg(long = "S", value_name = "STEPS")]
        steps: Option<String>,
        #[arg(long)]
        flat: bool,
    },
    /// Recover the filtration steps in S from kernel data.
    Reconstruct {
        file: PathBuf,
        #[arg(long = "S", value_name = "STEPS")]
        steps: String,
    },
    /// Invariants of a permutation, as a window `2,0,1` or a word `1-2` with `--n`.
    Weyl {
        w: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Print a random instance document.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Generic)]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: u32,
    },
    /// Run the invariant suite on a file or on random instances.
    Check {
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Generic,
    Sparse,
    Permutation,
}

enum Failure {
    Invariant(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn parse_steps(s: &str) -> Result<Vec<usize>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| Failure::Input(format!("bad step list {s:?}"))))
        .collect()
}

fn load(path: &Path) -> Result<Vec<FilteredPhiModule>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(parse_instances(&text)?)
}

fn load_valid(path: &Path) -> Result<Vec<FilteredPhiModule>, Failure> {
    let modules = load(path)?;
    let r = report::validate(&modules);
    if !r.valid {
        return Err(Failure::Input(r.problems.join("; ")));
    }
    Ok(modules)
}

fn emit(
    out: &mut dyn Write,
    json: bool,
    kind: &str,
    body: impl serde::Serialize,
    text: impl FnOnce() -> String,
) -> Result<(), Failure> {
    let s = if json {
        let v: Value = with_schema(kind, body);
        serde_json::to_string_pretty(&v).expect("reports serialize") + "\n"
    } else {
        text()
    };
    out.write_all(s.as_bytes()).map_err(|e| Failure::Input(format!("writing output: {e}")))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn rows(r: &[Vec<String>]) -> String {
    if r.is_empty() {
        return "    (zero)\n".into();
    }
    r.iter().map(|v| format!("    [{}]\n", v.join(", "))).collect()
}

fn suite_text(r: &SuiteReport) -> String {
    let mut out = String::new();
    for o in &r.rank_checks {
        out += &format!("{} rank {}: {}\n", verdict(o.pass), r.n, o.name);
        if !o.pass {
            out += &format!("  {}\n", o.detail);
        }
    }
    for t in &r.trial_reports {
        let bad: Vec<_> = t.outcomes.iter().filter(|o| !o.pass).collect();
        out += &format!("{} seed {} ({})\n", verdict(bad.is_empty()), t.seed, t.mode);
        for o in bad {
            out += &format!("  {}: {}\n", o.name, o.detail);
        }
    }
    out += &format!("{} passed, {} failed\n", r.passed, r.failed);
    out
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let json = cli.json;
    match cli.command {
        Command::Validate { file } => {
            let modules = load(&file)?;
            let r = report::validate(&modules);
            let valid = r.valid;
            emit(out, json, "validate", &r, || {
                let mut s = format!("{}: {} instance(s)\n", if valid { "valid" } else { "invalid" }, r.instances);
                for p in &r.problems {
                    s += &format!("  {p}\n");
                }
                s
            })?;
            if !valid {
                return Err(Failure::Invariant(String::new()));
            }
        }
        Command::Classify { file } => {
            let modules = load_valid(&file)?;
            let reports = modules
                .iter()
                .map(|d| report::classify(&TMap::new(d)?))
                .collect::<phimod::Result<Vec<_>>>()?;
            let body = if reports.len() == 1 { serde_json::to_value(&reports[0]) } else { serde_json::to_value(&reports) }
                .expect("reports serialize");
            emit(out, json, "classify", body, || {
                let mut s = String::new();
                for r in &reports {
                    s += "subset      split  cosplit  critical  very_critical  crossing  position\n";
                    for e in &r.subsets {
                        let c = &e.class;
                        s += &format!(
                            "{:<11} {:<6} {:<8} {:<9} {:<14} {:<9} {}\n",
                            format!("{{{}}}", c.subset.key()),
                            c.split,
                            c.cosplit,
                            c.critical,
                            c.very_critical,
                            c.crossing,
                            e.position
                        );
                    }
                    let vc: Vec<String> = r.very_critical.iter().map(|i| format!("{{{}}}", i.key())).collect();
                    s += &format!("very critical: {}\n", if vc.is_empty() { "none".into() } else { vc.join(" ") });
                }
                s
            })?;
        }
        Command::Tmap { file, steps } => {
            let modules = load_valid(&file)?;
            let d = &modules[0];
            let s = match steps {
                Some(s) => parse_steps(&s)?,
                None => all_steps(d.n),
            };
            let r = report::tmap(&TMap::new(d)?, &s)?;
            let pass = r.pass;
            emit(out, json, "tmap", &r, || {
                let mut out = format!("S = {:?}, domain dimension {}\n", r.steps, r.domain_dim);
                out += &format!("kernel dimension {} (formula {})\n", r.kernel_dim, r.formula_dim);
                out += &rows(&r.kernel_basis);
                for im in &r.images {
                    out += &format!(
                        "step {}: kernel image {}, inf image {}, fil_2nd_max {}\n",
                        im.step, im.kernel_image_dim, im.inf_image_dim, im.fil_2nd_max_dim
                    );
                }
                for o in &r.invariants {
                    out += &format!("{} {}\n", verdict(o.pass), o.name);
                }
                out
            })?;
            if !pass {
                return Err(Failure::Invariant("t-map invariants failed".into()));
            }
        }
        Command::Skeleton { file, steps, flat } => {
            let modules = load_valid(&file)?;
            let s = steps.map(|s| parse_steps(&s)).transpose()?;
            let agg = report::skeleton(&modules, s.as_deref(), flat)?;
            if json {
                emit(out, true, "skeleton", &agg, String::new)?;
            } else {
                let mut text: String = agg.skeletons.iter().map(|sk| sk.diagram()).collect();
                text += &format!(
                    "ext dims: {:?} per embedding, {} total\n",
                    agg.ext.per_embedding, agg.ext.aggregate_closed
                );
                let canonical = with_schema("skeleton", &agg);
                text += &serde_json::to_string(&canonical).expect("reports serialize");
                emit(out, false, "skeleton", (), || text + "\n")?;
            }
        }
        Command::Reconstruct { file, steps } => {
            let modules = load_valid(&file)?;
            let s = parse_steps(&steps)?;
            let r = report::reconstruct(&TMap::new(&modules[0])?, &s)?;
            let pass = r.pass;
            emit(out, json, "reconstruct", &r, || {
                let mut out = String::new();
                for step in &r.reports {
                    out += &format!("{} step {}\n", verdict(step.pass), step.step);
                    out += &rows(&step.recovered);
                }
                out += &format!("{}\n", verdict(pass));
                out
            })?;
            if !pass {
                return Err(Failure::Invariant("recovery does not match the filtration".into()));
            }
        }
        Command::Weyl { w, n } => {
            let (perm, word) = if w.contains(',') {
                (parse_window(&w)?, None)
            } else {
                let n = n.ok_or_else(|| Failure::Input("a word needs --n".into()))?;
                let word = parse_word(&w)?;
                (Permutation::from_word(n, &word)?, Some(word))
            };
            let r = report::weyl(&perm, word)?;
            emit(out, json, "weyl", &r, || {
                let mut s = format!("w = {} (length {}), support {:?}\n", r.window, r.length, r.support);
                for g in &r.generators {
                    s += &format!(
                        "s_{}: crossing {}, pairs {}, reflections dropping {}{}\n",
                        g.i,
                        g.crossing_number,
                        g.pair_count,
                        g.reflections_dropping,
                        if g.multfree.is_some() { ", multiplicity free" } else { "" }
                    );
                }
                s
            })?;
        }
        Command::Random { n, seed, mode, p, f } => {
            let mode = match mode {
                Mode::Generic => FlagMode::Generic,
                Mode::Sparse => FlagMode::Sparse,
                Mode::Permutation => FlagMode::Permutation,
            };
            let d = random_module(n, p, f, seed, &mode)?;
            emit(out, false, "random", (), || d.to_json() + "\n")?;
        }
        Command::Check { file, n, trials, seed } => {
            let r = match file {
                Some(path) => run_on(&load_valid(&path)?, seed)?,
                None => run_campaign(n, trials, seed)?,
            };
            let pass = r.pass();
            emit(out, json, "check", &r, || suite_text(&r))?;
            if !pass {
                return Err(Failure::Invariant(format!("{} checks failed", r.failed)));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code: 0 on success, 1 on an invariant failure, 2 on bad input.
fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{e}");
            return code;
        }
    };
    let (code, message) = match run(cli, out) {
        Ok(()) => (0, String::new()),
        Err(Failure::Invariant(m)) => (1, m),
        Err(Failure::Input(m)) => (2, m),
    };
    if !message.is_empty() {
        let _ = writeln!(err, "error: {message}");
    }
    code
}

fn main() -> ExitCode {
    let code = execute(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr());
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Output {
        code: u8,
        stdout: Vec<u8>,
        stderr: Vec<u8>,
    }

    impl Output {
        fn ok(&self) -> bool {
            self.code == 0
        }
    }

    fn data(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
    }

    fn phimod(args: &[&str]) -> Output {
        let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
        let argv = std::iter::once("phimod").chain(args.iter().copied());
        let code = execute(argv, &mut stdout, &mut stderr);
        Output { code, stdout, stderr }
    }

    fn json(args: &[&str]) -> Value {
        let mut all = vec!["--json"];
        all.extend_from_slice(args);
        let out = phimod(&all);
        assert!(out.ok(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).expect("valid JSON")
    }

    fn scratch(name: &str, contents: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("phimod-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn validate_exit_codes() {
        let gl4 = data("gl4_reversed.json");
        assert_eq!(phimod(&["validate", gl4.to_str().unwrap()]).code, 0);
        let bad_weights = std::fs::read_to_string(&gl4).unwrap().replace("[3, 2, 1, 0]", "[0, 1, 2, 3]");
        let path = scratch("bad_weights.json", &bad_weights);
        assert_eq!(phimod(&["validate", path.to_str().unwrap()]).code, 1);
        let path = scratch("garbage.json", "{\"n\": 3,");
        assert_eq!(phimod(&["validate", path.to_str().unwrap()]).code, 2);
        assert_eq!(phimod(&["validate", "/no/such/file.json"]).code, 2);
    }

    #[test]
    fn classify_gl4() {
        let v = json(&["classify", data("gl4_reversed.json").to_str().unwrap()]);
        assert_eq!(v["schema"], "phimod/classify/v1");
        assert_eq!(v["very_critical"], serde_json::json!(["0,1"]));
        assert_eq!(v["subsets"].as_array().unwrap().len(), 14);
    }

    #[test]
    fn tmap_gl4() {
        let gl4 = data("gl4_reversed.json");
        let v = json(&["tmap", gl4.to_str().unwrap()]);
        assert_eq!(v["kernel_dim"], 5);
        assert_eq!(v["formula_dim"], 5);
        assert_eq!(v["pass"], true);
        let v = json(&["tmap", gl4.to_str().unwrap(), "--S", "2"]);
        assert_eq!(v["kernel_dim"], 1);
        let v = json(&["tmap", gl4.to_str().unwrap(), "--S", "1"]);
        assert_eq!(v["kernel_dim"], 0);
        let out = phimod(&["tmap", gl4.to_str().unwrap(), "--S", "1,7"]);
        assert_eq!(out.code, 2);
    }

    #[test]
    fn skeleton_text_and_json() {
        let gl4 = data("gl4_reversed.json");
        let out = phimod(&["skeleton", gl4.to_str().unwrap()]);
        assert!(out.ok());
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("ALG^5"));
        assert!(text.contains("[C{0,1} - ALG]"));
        let last = text.lines().last().unwrap();
        let v: Value = serde_json::from_str(last).unwrap();
        assert_eq!(v["schema"], "phimod/skeleton/v1");
        let v = json(&["skeleton", gl4.to_str().unwrap(), "--flat"]);
        assert_eq!(v["skeletons"][0]["top_alg_multiplicity"], 4);
        assert_eq!(v["skeletons"][0]["very_critical_summands"], serde_json::json!([]));
    }

    #[test]
    fn skeleton_of_several_embeddings() {
        let one = std::fs::read_to_string(data("gl4_reversed.json")).unwrap();
        let other = one.replace(
            "[\"0\", \"0\", \"0\", \"1\"],\n    [\"0\", \"0\", \"1\", \"0\"]",
            "[\"0\", \"0\", \"1\", \"0\"],\n    [\"0\", \"0\", \"0\", \"1\"]",
        );
        assert_ne!(one, other);
        let path = scratch("pair.json", &format!("[{one}, {other}]"));
        let v = json(&["skeleton", path.to_str().unwrap()]);
        assert_eq!(v["ext"]["aggregate_closed"], 4 + 2 * 10);
        assert_eq!(v["skeletons"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn reconstruct_round_trip() {
        let gl4 = data("gl4_reversed.json");
        let out = phimod(&["reconstruct", gl4.to_str().unwrap(), "--S", "1,2,3"]);
        assert!(out.ok());
        assert!(String::from_utf8(out.stdout).unwrap().trim_end().ends_with("PASS"));
        let v = json(&["reconstruct", gl4.to_str().unwrap(), "--S", "2"]);
        assert_eq!(v["pass"], true);
        assert_eq!(v["reports"][0]["recovered"], serde_json::json!([["1", "0", "0", "0"], ["0", "1", "0", "0"]]));
    }

    #[test]
    fn weyl_reports() {
        let v = json(&["weyl", "2,1,0"]);
        assert_eq!(v["length"], 3);
        assert_eq!(v["generators"][0]["crossing_number"], 1);
        assert_eq!(v["generators"][0]["pair_count"], 2);
        let w = json(&["weyl", "1-2-1", "--n", "3"]);
        assert_eq!(w["window"], "2,1,0");
        assert_eq!(phimod(&["weyl", "1-2"]).code, 2);
        assert_eq!(phimod(&["weyl", "0,0,1"]).code, 2);
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        let a = phimod(&["random", "--n", "4", "--seed", "9", "--mode", "sparse"]);
        let b = phimod(&["random", "--n", "4", "--seed", "9", "--mode", "sparse"]);
        assert_eq!(a.stdout, b.stdout);
        let path = scratch("random.json", &String::from_utf8(a.stdout).unwrap());
        assert_eq!(phimod(&["validate", path.to_str().unwrap()]).code, 0);
        let c = phimod(&["random", "--n", "4", "--seed", "10", "--mode", "sparse"]);
        assert_ne!(b.stdout, c.stdout);
    }

    #[test]
    fn check_campaign() {
        let out = phimod(&["check", "--n", "3", "--trials", "50", "--seed", "7"]);
        assert_eq!(out.code, 0, "{}", String::from_utf8_lossy(&out.stdout));
        let a = phimod(&["--json", "check", "--n", "3", "--trials", "6", "--seed", "7"]);
        let b = phimod(&["--json", "check", "--n", "3", "--trials", "6", "--seed", "7"]);
        assert_eq!(a.stdout, b.stdout);
        let v: Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(v["schema"], "phimod/check/v1");
        assert_eq!(v["failed"], 0);
        let out = phimod(&["check", data("gl4_reversed.json").to_str().unwrap()]);
        assert_eq!(out.code, 0);
    }
}
