//! `modsep` command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use modsep::construct::check_separator;
use modsep::decide::{
    decide_craig_separability, decide_definability, decide_graded_separability, decide_interpolant_existence,
    decide_mu_definability_graded, decide_separability, Bounds, Evidence,
};
use modsep::formula::{gadget, normalize, parse_formula};
use modsep::games::model_check;
use modsep::kripke::parse_tree;
use modsep::{Error, Formula, KripkeTree, ModelClass, Signature, Verdict};

#[derive(Parser)]
#[command(name = "modsep", version, about = "Modal definability, separability and interpolant existence for the modal mu-calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model-check a formula on a finite tree.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Run a decision procedure.
    Decide {
        problem: Problem,
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: Option<PathBuf>,
        /// Separator signature, e.g. `a,b` (default: joint signature).
        #[arg(long)]
        sig: Option<String>,
        /// Allow graded modalities in the separator (graded-sep only).
        #[arg(long)]
        graded_separator: bool,
        /// Directory receiving witness models and separators.
        #[arg(long)]
        witness_dir: Option<PathBuf>,
    },
    /// Build a separator for a separable pair.
    Construct {
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        sig: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a formula separates two formulas.
    Verify {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        separator: PathBuf,
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long)]
        witness_dir: Option<PathBuf>,
    },
    /// Print the lower-bound formula pair ψ_i, ψ′_i.
    Gadget {
        #[arg(long)]
        i: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Definability,
    Separability,
    Interpolant,
    CraigSep,
    GradedSep,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Budget(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::BudgetExhausted(_)) => Failure::Budget(e),
            _ => Failure::Usage(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn read_formula(path: &Path) -> anyhow::Result<Formula> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_formula(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_model(path: &Path) -> anyhow::Result<KripkeTree> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_tree(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_class(text: &str) -> anyhow::Result<ModelClass> {
    ModelClass::parse(text).with_context(|| format!("unknown class {text:?}"))
}

fn need_right(right: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    right.ok_or_else(|| anyhow!("this problem needs --right"))
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Check { model, formula } => {
            let t = read_model(&model)?;
            let phi = read_formula(&formula)?;
            let holds = model_check(&t, &phi)?;
            let mut out = String::new();
            block(&mut out, "decision", if holds { "SATISFIED" } else { "NOT_SATISFIED" });
            block(&mut out, "problem", "model-check");
            out.push_str("--\n");
            let _ = writeln!(out, "The formula {} at the root of the {}-node model.", if holds { "holds" } else { "fails" }, t.len());
            Ok(out)
        }
        Command::Decide { problem, class, left, right, sig, graded_separator, witness_dir } => {
            let class = parse_class(&class)?;
            let phi = read_formula(&left)?;
            let sigma = sig.as_deref().map(Signature::parse_list);
            let (name, yes, no, v, sigma_shown) = match problem {
                Problem::Definability => {
                    if phi.is_graded() {
                        let v = decide_mu_definability_graded(&phi)?;
                        ("mu-definability", "DEFINABLE", "NOT_DEFINABLE", v, phi.sig())
                    } else {
                        let v = decide_definability(&phi, &class)?;
                        ("definability", "DEFINABLE", "NOT_DEFINABLE", v, phi.sig())
                    }
                }
                Problem::Separability => {
                    let phi2 = read_formula(&need_right(right)?)?;
                    let shown = sigma.clone().unwrap_or_else(|| phi.sig().union(&phi2.sig()));
                    let v = decide_separability(&phi, &phi2, &class, sigma.as_ref())?;
                    ("separability", "SEPARABLE", "NOT_SEPARABLE", v, shown)
                }
                Problem::CraigSep => {
                    let phi2 = read_formula(&need_right(right)?)?;
                    let shown = phi.sig().intersection(&phi2.sig());
                    let v = decide_craig_separability(&phi, &phi2, &class)?;
                    ("craig-separability", "SEPARABLE", "NOT_SEPARABLE", v, shown)
                }
                Problem::Interpolant => {
                    let phi2 = read_formula(&need_right(right)?)?;
                    let shown = phi.sig().intersection(&phi2.sig());
                    let neg = normalize(&Formula::not(phi2))?;
                    let d = class
                        .bound()
                        .ok_or_else(|| anyhow!("interpolant existence needs a bounded class (words, binary or dary:<d>)"))?;
                    let v = decide_interpolant_existence(&phi, &neg, d)?;
                    ("interpolant", "INTERPOLABLE", "NOT_INTERPOLABLE", v, shown)
                }
                Problem::GradedSep => {
                    let phi2 = read_formula(&need_right(right)?)?;
                    if class != ModelClass::All {
                        return Err(Failure::Usage(anyhow!("graded separability is decided over all models only")));
                    }
                    let shown = phi.sig().union(&phi2.sig());
                    let v = decide_graded_separability(&phi, &phi2, graded_separator)?;
                    ("graded-separability", "SEPARABLE", "NOT_SEPARABLE", v, shown)
                }
            };
            let files = write_witnesses(witness_dir.as_deref(), &v)?;
            Ok(render(name, if v.decision { yes } else { no }, &class, &sigma_shown, &v, &files))
        }
        Command::Construct { class, left, right, sig, out } => {
            let class = parse_class(&class)?;
            let phi = read_formula(&left)?;
            let phi2 = read_formula(&right)?;
            let sigma = sig.as_deref().map(Signature::parse_list);
            let v = decide_separability(&phi, &phi2, &class, sigma.as_ref())?;
            let shown = sigma.unwrap_or_else(|| phi.sig().union(&phi2.sig()));
            let mut files = Vec::new();
            if let (Some(path), Some(psi)) = (&out, &v.separator) {
                std::fs::write(path, format!("{psi}\n")).with_context(|| format!("writing {}", path.display()))?;
                files.push(("separator_file", path.clone()));
            }
            let decision = match (&v.separator, v.decision) {
                (Some(_), _) => "SEPARABLE",
                (None, true) => "SEPARABLE_NO_SEPARATOR",
                (None, false) => "NOT_SEPARABLE",
            };
            Ok(render("construct", decision, &class, &shown, &v, &files))
        }
        Command::Verify { left, right, separator, class, witness_dir } => {
            let class = parse_class(&class)?;
            let phi = read_formula(&left)?;
            let phi2 = read_formula(&right)?;
            let psi = read_formula(&separator)?;
            let check = check_separator(&phi, &phi2, &psi, &class)?;
            let mut files = Vec::new();
            if let (Some(dir), Some(m)) = (&witness_dir, &check.countermodel) {
                files.push(("countermodel", write_tree(dir, "countermodel.tree", m)?));
            }
            let mut out = String::new();
            block(&mut out, "decision", if check.valid() { "VALID" } else { "INVALID" });
            block(&mut out, "problem", "verify");
            block(&mut out, "class", &class.to_string());
            block(&mut out, "left_entails", &check.left_entails.to_string());
            block(&mut out, "right_excluded", &check.right_excluded.to_string());
            for (key, path) in &files {
                block(&mut out, key, &path.display().to_string());
            }
            out.push_str("--\n");
            if check.valid() {
                let _ = writeln!(out, "{psi} separates the two formulas over {class}.");
            } else {
                let which = if !check.left_entails { "is not implied by the left formula" } else { "is consistent with the right formula" };
                let _ = writeln!(out, "{psi} {which} over {class}.");
                if let Some(m) = &check.countermodel {
                    let _ = writeln!(out, "Counter-model prefix: {}", m.to_sexpr());
                }
            }
            Ok(out)
        }
        Command::Gadget { i } => {
            let (psi, psi2) = gadget(i);
            let mut out = String::new();
            block(&mut out, "left", &psi.to_string());
            block(&mut out, "right", &psi2.to_string());
            block(&mut out, "left_size", &psi.size().to_string());
            block(&mut out, "right_size", &psi2.size().to_string());
            Ok(out)
        }
    }
}

fn block(out: &mut String, key: &str, value: &str) {
    let _ = writeln!(out, "{key}: {value}");
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn write_tree(dir: &Path, name: &str, t: &KripkeTree) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, format!("{}\n", t.to_sexpr())).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_witnesses(dir: Option<&Path>, v: &Verdict) -> anyhow::Result<Vec<(&'static str, PathBuf)>> {
    let Some(dir) = dir else { return Ok(Vec::new()) };
    let mut files = Vec::new();
    if let Some(Evidence { left, right, .. }) = &v.evidence {
        files.push(("witness_left", write_tree(dir, "witness-left.tree", left)?));
        files.push(("witness_right", write_tree(dir, "witness-right.tree", right)?));
    }
    if let Some(psi) = &v.separator {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("separator.ml");
        std::fs::write(&path, format!("{psi}\n")).with_context(|| format!("writing {}", path.display()))?;
        files.push(("separator_file", path));
    }
    Ok(files)
}

fn render(
    problem: &str,
    decision: &str,
    class: &ModelClass,
    sigma: &Signature,
    v: &Verdict,
    files: &[(&str, PathBuf)],
) -> String {
    let mut out = String::new();
    let Bounds { d, m, first_failure, stable_index, depth } = &v.bounds;
    block(&mut out, "decision", decision);
    block(&mut out, "problem", problem);
    block(&mut out, "class", &class.to_string());
    block(&mut out, "sigma", &sigma.to_string());
    block(&mut out, "bound_d", &opt(*d));
    block(&mut out, "bound_m", &opt(*m));
    block(&mut out, "first_failure", &opt(*first_failure));
    block(&mut out, "stable_index", &opt(*stable_index));
    block(&mut out, "depth", &opt(*depth));
    if let Some(psi) = &v.separator {
        block(&mut out, "separator", &psi.to_string());
    }
    if let Some(e) = &v.evidence {
        block(&mut out, "evidence_depth", &e.n.to_string());
    }
    for (key, path) in files {
        block(&mut out, key, &path.display().to_string());
    }
    out.push_str("--\n");
    match (&v.separator, &v.evidence) {
        (Some(psi), _) => {
            let _ = writeln!(out, "Answer {decision} over {class} with separator {psi}.");
        }
        (None, Some(e)) => {
            let _ = writeln!(out, "Answer {decision} over {class}; the following models agree up to depth {} over {sigma}:", e.n);
            let _ = writeln!(out, "  left:  {}", e.left.to_sexpr());
            let _ = writeln!(out, "  right: {}", e.right.to_sexpr());
        }
        (None, None) => {
            let _ = writeln!(out, "Answer {decision} over {class}.");
        }
    }
    for note in &v.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}
