use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ershov::model::{enumerate_elements, verify_ershov_axioms, FinSetElement};
use ershov::modelfile::{load_model, LoadError, LoadedModel};
use ershov::noetherian::{compact_equations, is_equationally_noetherian, NoetherError, NoetherianVerdict, SubalgebraDescriptor};
use ershov::parser::{parse_system, parse_term};
use ershov::render::{render_cnf, render_dnf, render_normal, render_term};
use ershov::rewrite::{normalize_term_cnf_traced, normalize_term_dnf_traced, rule_catalogue, RewriteStep};
use ershov::semantics::{equivalent, solve_over, EvalError, ModelProbe, Verdict, DEFAULT_BUDGET};
use ershov::sysnf::{normalize_system, normalize_system_traced, NormalInequality, SysError};
use ershov::terms::EqSystem;
use ershov::PowersetModel;

const EXIT_PARSE: u8 = 2;
const EXIT_SEMANTIC: u8 = 3;
const EXIT_GROUND_FALSE: u8 = 4;
const EXIT_BUDGET: u8 = 5;
const EXIT_INDETERMINATE: u8 = 6;
const EXIT_NOT_EQUIVALENT: u8 = 1;

#[derive(Parser)]
#[command(name = "ershov", version, about = "Normal forms and solution sets for equations over Ershov algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the disjunctive (or conjunctive) normal form of a term.
    NormalizeTerm {
        #[arg(long)]
        model: PathBuf,
        term: String,
        #[arg(long)]
        cnf: bool,
        /// Print each rewrite step.
        #[arg(long)]
        trace: bool,
    },
    /// Rewrite a system into normal inequalities.
    NormalizeSystem {
        #[arg(long)]
        model: PathBuf,
        file: PathBuf,
        #[arg(long)]
        trace: bool,
    },
    /// Enumerate the solutions of a system in the model.
    Solve {
        #[arg(long)]
        model: PathBuf,
        file: PathBuf,
        #[arg(long)]
        count_only: bool,
        /// Solve for x1..xN even if the system mentions fewer variables.
        #[arg(long, default_value_t = 0)]
        vars: u32,
    },
    /// Compare the solution sets of two systems on probe models.
    Equiv {
        #[arg(long)]
        model: PathBuf,
        file1: PathBuf,
        file2: PathBuf,
        /// Probe with 0..=N fresh atoms.
        #[arg(long, default_value_t = 2)]
        fresh_atoms: usize,
    },
    /// Normalize a system and merge inequalities that differ only in their constant.
    Compact {
        #[arg(long)]
        model: PathBuf,
        file: PathBuf,
    },
    /// Decide whether the model's constants generate a finite subalgebra.
    CheckNoetherian {
        #[arg(long)]
        model: PathBuf,
    },
    /// Check the Ershov algebra laws on the model.
    VerifyAxioms {
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the rewrite rule catalogue.
    Rules,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Failure {
        let code = match e {
            LoadError::Invalid { .. } => EXIT_SEMANTIC,
            _ => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Failure {
        let code = match e {
            EvalError::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_SEMANTIC,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SysError> for Failure {
    fn from(e: SysError) -> Failure {
        Failure::new(EXIT_SEMANTIC, e.to_string())
    }
}

impl From<NoetherError> for Failure {
    fn from(e: NoetherError) -> Failure {
        match e {
            NoetherError::Eval(e) => e.into(),
            other => Failure::new(EXIT_SEMANTIC, other.to_string()),
        }
    }
}

type Output = Result<(String, u8), Failure>;

fn budget() -> Result<u64, Failure> {
    match std::env::var("ERSHOV_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::new(EXIT_PARSE, format!("ERSHOV_BUDGET must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn read_system(path: &Path) -> Result<EqSystem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn check_constants(s: &EqSystem, m: &PowersetModel) -> Result<(), Failure> {
    match s.constants().into_iter().find(|c| m.constant(c).is_none()) {
        Some(c) => Err(Failure::new(EXIT_SEMANTIC, format!("unknown constant `{c}`"))),
        None => Ok(()),
    }
}

fn render_listing(items: &[NormalInequality], m: &PowersetModel) -> (String, u8) {
    let mut out = String::new();
    for ni in items {
        let note = if ni.is_contradiction() { "ground false".to_string() } else { format!("shape {}", ni.shape().label()) };
        out.push_str(&format!("{}  # {note}\n", render_normal(ni, m)));
    }
    let code = if items.iter().any(NormalInequality::is_contradiction) { EXIT_GROUND_FALSE } else { 0 };
    (out, code)
}

fn render_steps(steps: &[RewriteStep]) -> String {
    steps
        .iter()
        .map(|s| format!("[{}] {}  =>  {}\n", s.rule, render_term(&s.before), render_term(&s.after)))
        .collect()
}

fn normalize_term(loaded: &LoadedModel, text: &str, cnf: bool, trace: bool) -> Output {
    let t = parse_term(text).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    if let Some(c) = t.constants().into_iter().find(|c| loaded.model.constant(c).is_none()) {
        return Err(Failure::new(EXIT_SEMANTIC, format!("unknown constant `{c}`")));
    }
    let (rendered, steps) = if cnf {
        let (n, steps) = normalize_term_cnf_traced(&t);
        (render_cnf(&n), steps)
    } else {
        let (n, steps) = normalize_term_dnf_traced(&t);
        (render_dnf(&n), steps)
    };
    let mut out = if trace { render_steps(&steps) } else { String::new() };
    out.push_str(&rendered);
    out.push('\n');
    Ok((out, 0))
}

fn normalize_sys(loaded: &LoadedModel, file: &Path, trace: bool) -> Output {
    let s = read_system(file)?;
    let m = &loaded.model;
    if trace {
        let (items, lines) = normalize_system_traced(&s, m)?;
        let (listing, code) = render_listing(&items, m);
        let mut out: String = lines.iter().map(|l| format!("{l}\n")).collect();
        out.push_str(&listing);
        Ok((out, code))
    } else {
        Ok(render_listing(&normalize_system(&s, m)?, m))
    }
}

fn solve_cmd(loaded: &LoadedModel, file: &Path, count_only: bool, vars: u32) -> Output {
    let s = read_system(file)?;
    check_constants(&s, &loaded.model)?;
    // the unknowns are x1..xn for the largest index n in use
    let n = s.free_vars().last().copied().unwrap_or(0).max(vars);
    let sols = solve_over(&s.equations, &(1..=n).collect(), &loaded.model, budget()?)?;
    let mut out = format!("count: {}\n", sols.len());
    if !count_only {
        for a in &sols.solutions {
            let line = a.display(&loaded.model).to_string();
            out.push_str(if line.is_empty() { "(no variables)" } else { &line });
            out.push('\n');
        }
    }
    Ok((out, 0))
}

fn equiv_cmd(loaded: &LoadedModel, f1: &Path, f2: &Path, fresh: usize) -> Output {
    let (s1, s2) = (read_system(f1)?, read_system(f2)?);
    check_constants(&s1, &loaded.model)?;
    check_constants(&s2, &loaded.model)?;
    let probe = ModelProbe::up_to(fresh).with_budget(budget()?);
    match equivalent(&s1.equations, &s2.equations, &loaded.model, &probe)? {
        Verdict::Equivalent => Ok(("equivalent\n".into(), 0)),
        Verdict::Counterexample { model, assignment, first_holds } => {
            let (holds, fails) = if first_holds { (f1, f2) } else { (f2, f1) };
            let line = assignment.display(&model).to_string();
            let out = format!(
                "not equivalent\nmodel atoms: {{{}}}\nassignment: {}\nholds in {}, fails in {}\n",
                model.atoms().join(","),
                if line.is_empty() { "(no variables)" } else { &line },
                holds.display(),
                fails.display()
            );
            Ok((out, EXIT_NOT_EQUIVALENT))
        }
    }
}

fn compact_cmd(loaded: &LoadedModel, file: &Path) -> Output {
    let s = read_system(file)?;
    let items = compact_equations(&s, &loaded.model, &loaded.families, &loaded.witnesses)?;
    Ok(render_listing(&items, &loaded.model))
}

fn check_noetherian(loaded: &LoadedModel) -> Output {
    let descriptor = SubalgebraDescriptor {
        generators: loaded.model.constants().values().map(|&c| FinSetElement::from_elem(c)).collect(),
        families: loaded.families.values().cloned().collect(),
        declared_finite: None,
    };
    let verdict = is_equationally_noetherian(&descriptor)?;
    let code = if matches!(verdict, NoetherianVerdict::Indeterminate { .. }) { EXIT_INDETERMINATE } else { 0 };
    Ok((format!("equationally Noetherian: {verdict}\n"), code))
}

fn verify_axioms(loaded: &LoadedModel) -> Output {
    let m = &loaded.model;
    match verify_ershov_axioms(m) {
        Ok(()) => Ok((
            format!("axioms hold: {} atoms, {} elements\n", m.atom_count(), enumerate_elements(m).len()),
            0,
        )),
        Err(v) => {
            let tuple: Vec<String> = v.tuple.iter().map(|&e| m.format_elem(e)).collect();
            Ok((format!("axiom violated: {} at ({})\n", v.law, tuple.join(", ")), 1))
        }
    }
}

fn rules() -> Output {
    let mut out = String::new();
    for r in rule_catalogue() {
        let law = if r.rhs.is_empty() { r.lhs.to_string() } else { format!("{}  <=>  {}", r.lhs, r.rhs) };
        out.push_str(&format!("{:<6} {:<9} {}\n", r.name, r.status.as_str(), law));
        out.push_str(&format!("       {}\n", r.description));
        if let Some(p) = r.uncorrected {
            out.push_str(&format!("       uncorrected: {p}\n"));
        }
    }
    Ok((out, 0))
}

fn run(cli: Cli) -> Output {
    let load = |p: &Path| load_model(p).map_err(Failure::from);
    match cli.command {
        Command::NormalizeTerm { model, term, cnf, trace } => normalize_term(&load(&model)?, &term, cnf, trace),
        Command::NormalizeSystem { model, file, trace } => normalize_sys(&load(&model)?, &file, trace),
        Command::Solve { model, file, count_only, vars } => solve_cmd(&load(&model)?, &file, count_only, vars),
        Command::Equiv { model, file1, file2, fresh_atoms } => equiv_cmd(&load(&model)?, &file1, &file2, fresh_atoms),
        Command::Compact { model, file } => compact_cmd(&load(&model)?, &file),
        Command::CheckNoetherian { model } => check_noetherian(&load(&model)?),
        Command::VerifyAxioms { model } => verify_axioms(&load(&model)?),
        Command::Rules => rules(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
