use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use mvzero::algebra::{
    builtin, builtin_names, demorgan_check, format_rational, parse_rational, validate_algebra, AlgebraSpec, Rational,
};
use mvzero::asymptotic::{almost_sure_set_demorgan, demorgan_witnesses, qe_demorgan, Decider};
use mvzero::continuum::{self, ValueInterval};
use mvzero::montecarlo::{AtomDistribution, RandomModel};
use mvzero::semantics::{describe_value, evaluate, WeightedStructure};
use mvzero::syntax::{infer_vocabulary, parse_formula, parse_modal, parse_sentence, parse_term, s5_translate};
use mvzero::translator::{partition_axioms, translate, ConstraintProfile};
use mvzero::{Budget, Error, Formula, LatticeAlgebra, Vocabulary};

/// Almost-sure values of many-valued first-order sentences.
/// `println!` that exits quietly once stdout is closed.
macro_rules! out {
    ($($t:tt)*) => {
        if writeln!(std::io::stdout(), $($t)*).is_err() {
            std::process::exit(0)
        }
    };
}

#[derive(Parser)]
#[command(name = "mvzero", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List, show or check algebras.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Parse a formula, term or modal formula and print it back.
    Parse(ParseArgs),
    /// Evaluate a formula on a structure file.
    Eval(EvalArgs),
    /// Translate a formula into one classical formula per truth value.
    Translate(TranslateArgs),
    /// Decide almost-sure values.
    Asymptotic(AsymptoticArgs),
    /// Eliminate quantifiers over an algebra passing the De Morgan check.
    Qe(QeArgs),
    /// The almost-sure value set of an algebra passing the De Morgan check.
    Asymset(AsymsetArgs),
    /// Sample random structures and report value frequencies.
    Montecarlo(MonteCarloArgs),
    /// The [0,1]-valued Łukasiewicz case.
    #[command(subcommand)]
    Continuum(ContinuumCmd),
    /// Translate a modal formula into one-variable first-order logic.
    S5(S5Args),
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Print the builtin algebra names.
    List,
    /// Print an algebra's tables.
    Show {
        /// Builtin name or JSON file.
        algebra: String,
        /// Print the JSON file format instead.
        #[arg(long)]
        json: bool,
    },
    /// Validate an algebra and run the De Morgan check.
    Check {
        /// Builtin name or JSON file.
        algebra: String,
    },
}

#[derive(Args)]
struct Source {
    /// Formula text; may be repeated.
    #[arg(long = "sentence", short = 's', alias = "formula")]
    sentences: Vec<String>,
    /// File with one formula per line; lines starting with "# " are comments.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Vocabulary such as "P/1,R/2,~"; inferred from the formulas when absent.
    #[arg(long)]
    vocab: Option<String>,
}

#[derive(Args)]
struct ProfileArgs {
    /// none, crisp-id, graph, or a "+"-joined combination.
    #[arg(long, default_value = "none")]
    profile: String,
    /// Values a relation never takes, as REL=label[,label...]; may be repeated.
    #[arg(long)]
    forbid: Vec<String>,
}

#[derive(Args)]
struct ParseArgs {
    /// Builtin name or JSON file; fixes the connectives.
    #[arg(long, default_value = "L3")]
    algebra: String,
    #[command(flatten)]
    source: Source,
    /// Parse a term over v, v1, v2, ... instead.
    #[arg(long, conflicts_with = "sentences")]
    term: Option<String>,
    /// Parse a modal formula instead.
    #[arg(long, conflicts_with_all = ["sentences", "term"])]
    modal: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Structure JSON file.
    #[arg(long)]
    structure: PathBuf,
    /// Overrides the algebra named in the structure file.
    #[arg(long)]
    algebra: Option<String>,
    #[command(flatten)]
    source: Source,
    /// Free variable values as x=ELEMENT, 1-based; may be repeated.
    #[arg(long)]
    assign: Vec<String>,
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    algebra: String,
    #[command(flatten)]
    source: Source,
    /// Also print the partition axioms and the profile axioms.
    #[arg(long)]
    axioms: bool,
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long)]
    algebra: String,
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Disable the memo table.
    #[arg(long)]
    no_memo: bool,
    /// Print the achieved values at each quantifier.
    #[arg(long)]
    explain: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct QeArgs {
    #[arg(long)]
    algebra: String,
    #[command(flatten)]
    source: Source,
}

#[derive(Args)]
struct AsymsetArgs {
    #[arg(long)]
    algebra: String,
    /// Also print a witness sentence for each value.
    #[arg(long)]
    witnesses: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[arg(long)]
    algebra: String,
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Domain sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 20, 50])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative weight of each carrier element, comma separated; uniform when absent.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<u32>>,
    /// Enumerate all structures instead of sampling.
    #[arg(long)]
    exact: bool,
    /// Print the convergence report against the decided value.
    #[arg(long, conflicts_with = "exact")]
    report: bool,
    /// Frequency the decided value must reach in the report.
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum ContinuumCmd {
    /// Sample uniform structures and summarize the sentence's values.
    Estimate {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        samples: u64,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Closed interval LOW,HIGH whose sample mass is reported.
        #[arg(long)]
        interval: Option<String>,
        /// Print the histogram as CSV.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        json: bool,
    },
    /// Certified infimum and supremum of a term on [0,1]^k.
    Extremum {
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Build an interval extension axiom and optionally sample it.
    ExtAxiom {
        #[arg(long)]
        k: usize,
        /// Grid size N: cells are [j/N, (j+1)/N].
        #[arg(long)]
        grid: i64,
        /// Cell index for each extension atom, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        cells: Vec<i64>,
        #[arg(long, default_value = "P/1")]
        vocab: String,
        /// Domain sizes to sample at, comma separated.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct S5Args {
    /// Modal formula over propositional letters.
    #[arg(long)]
    modal: String,
    /// Also decide the translation's almost-sure value over this algebra.
    #[arg(long)]
    algebra: Option<String>,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Budget(_) => 2,
                Error::Internal(_) => 3,
                _ => 1,
            })
        }
    }
}

fn run(cmd: Command) -> Outcome {
    let budget = Budget::from_env()?;
    match cmd {
        Command::Algebra(a) => algebra_cmd(a),
        Command::Parse(a) => parse_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Translate(a) => translate_cmd(a),
        Command::Asymptotic(a) => asymptotic_cmd(a, &budget),
        Command::Qe(a) => qe_cmd(a),
        Command::Asymset(a) => asymset_cmd(a, &budget),
        Command::Montecarlo(a) => montecarlo_cmd(a, &budget),
        Command::Continuum(c) => continuum_cmd(c, &budget),
        Command::S5(a) => s5_cmd(a, &budget),
    }
}

fn load_algebra(name: &str) -> Outcome<LatticeAlgebra> {
    let path = Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        let mut spec: AlgebraSpec = serde_json::from_str(&text).map_err(Error::from)?;
        if spec.name.is_none() {
            spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        return validate_algebra(&spec).map_err(|d| Error::InvalidAlgebra(d).into());
    }
    Ok(builtin(name)?)
}

fn texts(src: &Source) -> Outcome<Vec<String>> {
    let mut out = src.sentences.clone();
    if let Some(path) = &src.file {
        let body = std::fs::read_to_string(path).map_err(Error::from)?;
        out.extend(
            body.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && *l != "#" && !l.starts_with("# "))
                .map(str::to_string),
        );
    }
    if out.is_empty() {
        return usage("give a formula with --sentence or --file");
    }
    Ok(out)
}

fn vocabulary(src: &Source, texts: &[String], sig: &mvzero::algebra::Signature) -> Outcome<Vocabulary> {
    if let Some(v) = &src.vocab {
        return Ok(Vocabulary::parse(v)?);
    }
    let joined = texts.iter().map(|t| format!("({t})")).collect::<Vec<_>>().join(" & ");
    Ok(infer_vocabulary(&joined, sig)?)
}

fn profile(args: &ProfileArgs) -> Outcome<ConstraintProfile> {
    let mut p = ConstraintProfile::parse(&args.profile)?;
    for f in &args.forbid {
        let Some((rel, labels)) = f.split_once('=') else {
            return usage(format!("--forbid expects REL=label[,label...], got `{f}`"));
        };
        p = p.with_forbidden(rel.trim(), labels.split(',').map(|l| l.trim().to_string()));
    }
    Ok(p)
}

/// Sentences parsed against a common vocabulary.
fn sentences(
    src: &Source,
    alg: &LatticeAlgebra,
    prof: &ConstraintProfile,
    closed: bool,
) -> Outcome<(Vocabulary, Vec<Formula>)> {
    let sig = alg.signature();
    let texts = texts(src)?;
    let mut vocab = vocabulary(src, &texts, &sig)?;
    if prof.crisp_identity {
        vocab = vocab.with_crisp_identity(true);
    }
    let fs = texts
        .iter()
        .map(|t| if closed { parse_sentence(t, &vocab, &sig) } else { parse_formula(t, &vocab, &sig) })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((vocab, fs))
}

fn algebra_cmd(cmd: AlgebraCmd) -> Outcome {
    match cmd {
        AlgebraCmd::List => {
            for n in builtin_names() {
                out!("{n}");
            }
        }
        AlgebraCmd::Show { algebra, json } => {
            let a = load_algebra(&algebra)?;
            if json {
                out!("{}", serde_json::to_string_pretty(&a.to_spec()).map_err(Error::from)?);
                return Ok(());
            }
            out!("{a}");
            if let (Some(b), Some(t)) = (a.bottom(), a.top()) {
                out!("bottom {}, top {}", a.label(b), a.label(t));
            }
            let ops = ["and", "or"].into_iter().map(str::to_string).chain(a.extra_ops().keys().cloned());
            for name in ops {
                let op = a.operation(&name).expect("listed");
                out!("{name}:");
                match op.arity() {
                    1 => {
                        for e in a.elements() {
                            out!("  {} -> {}", a.label(e), a.label(op.apply(a.size(), &[e])));
                        }
                    }
                    2 => {
                        for x in a.elements() {
                            let row: Vec<&str> = a.elements().map(|y| a.label(op.apply(a.size(), &[x, y]))).collect();
                            out!("  {}: {}", a.label(x), row.join(" "));
                        }
                    }
                    k => out!("  ({k}-ary table omitted)"),
                }
            }
        }
        AlgebraCmd::Check { algebra } => {
            let a = load_algebra(&algebra)?;
            out!("{a}: valid");
            let report = demorgan_check(&a)?;
            let witness = |w: &Option<Vec<mvzero::Elem>>| match w {
                Some(w) => format!(" at ({})", w.iter().map(|e| a.label(*e)).collect::<Vec<_>>().join(", ")),
                None => String::new(),
            };
            let mark = |ok: bool| if ok { "ok  " } else { "FAIL" };
            out!("{} distributive{}", mark(report.distributive.holds), witness(&report.distributive.witness));
            for law in report.conditions.iter().chain(&report.derived) {
                out!("{} {}{}", mark(law.holds), law.name, witness(&law.witness));
            }
            match report.constants {
                Some(k) => out!(
                    "eps = {}, eps' = {}, delta = {}, delta' = {}",
                    a.label(k.eps),
                    a.label(k.eps_prime),
                    a.label(k.delta),
                    a.label(k.delta_prime)
                ),
                None => out!("De Morgan conditions fail"),
            }
        }
    }
    Ok(())
}

fn parse_cmd(args: ParseArgs) -> Outcome {
    let alg = load_algebra(&args.algebra)?;
    let sig = alg.signature();
    if let Some(t) = &args.term {
        let term = parse_term(t, &sig)?;
        out!("{term}");
        out!("variables {}, depth {}", term.arity(), term.depth());
        return Ok(());
    }
    if let Some(m) = &args.modal {
        let f = parse_modal(m, &sig)?;
        out!("{f}");
        return Ok(());
    }
    let (vocab, fs) = sentences(&args.source, &alg, &ConstraintProfile::none(), false)?;
    out!("vocabulary {vocab}");
    for f in fs {
        let free = f.free_variables();
        out!("{f}");
        out!("  free [{}], quantifier depth {}, size {}", free.join(", "), f.quantifier_depth(), f.size());
    }
    Ok(())
}

fn eval_cmd(args: EvalArgs) -> Outcome {
    let prof = profile(&args.profile)?;
    let text = std::fs::read_to_string(&args.structure).map_err(Error::from)?;
    let alg = args.algebra.as_deref().map(load_algebra).transpose()?.map(Arc::new);
    let m = WeightedStructure::from_json(&text, alg, None, &prof)?;
    let sig = m.algebra().signature();
    let texts = texts(&args.source)?;
    let mut asg = BTreeMap::new();
    for a in &args.assign {
        let Some((var, val)) = a.split_once('=') else {
            return usage(format!("--assign expects x=ELEMENT, got `{a}`"));
        };
        let d: usize = val.trim().parse().map_err(|_| Failure::Usage(format!("`{val}` is not an element")))?;
        if d == 0 || d > m.n() {
            return usage(format!("element {d} is outside 1..={}", m.n()));
        }
        asg.insert(var.trim().to_string(), d - 1);
    }
    for t in texts {
        let f = parse_formula(&t, m.vocabulary(), &sig)?;
        if asg.is_empty() && f.is_sentence() {
            out!("{}", describe_value(&m, &f)?);
        } else {
            out!("{}", m.algebra().describe(evaluate(&m, &f, &asg)?));
        }
    }
    Ok(())
}

fn translate_cmd(args: TranslateArgs) -> Outcome {
    let alg = load_algebra(&args.algebra)?;
    let prof = profile(&args.profile)?;
    let (vocab, fs) = sentences(&args.source, &alg, &prof, false)?;
    for f in fs {
        if write!(std::io::stdout(), "{}", translate(&f, &alg)?).is_err() {
            std::process::exit(0)
        }
    }
    if args.axioms {
        for ax in partition_axioms(&vocab, &alg).into_iter().chain(prof.axioms(&vocab, &alg)) {
            out!("axiom: {ax}");
        }
    }
    Ok(())
}

fn asymptotic_cmd(args: AsymptoticArgs, budget: &Budget) -> Outcome {
    let alg = load_algebra(&args.algebra)?;
    let prof = profile(&args.profile)?;
    let (vocab, fs) = sentences(&args.source, &alg, &prof, true)?;
    let dec = Decider::new(&alg, &vocab, &prof)?.with_budget(budget.clone()).with_memo(!args.no_memo);
    let mut rows = Vec::new();
    for f in &fs {
        if args.explain {
            let (v, traces) = dec.explain(f)?;
            out!("{}", alg.describe(v));
            for t in traces {
                let set = |s: &std::collections::BTreeSet<mvzero::Elem>| {
                    s.iter().map(|e| alg.label(*e)).collect::<Vec<_>>().join(", ")
                };
                out!("  {}", t.formula);
                out!("    achieved {{{}}}, results {{{}}}, {} evaluation(s)", set(&t.achieved), set(&t.results), t.evaluations);
            }
        } else {
            let v = dec.almost_sure_value(f)?;
            if args.json {
                rows.push(serde_json::json!({
                    "sentence": f.to_string(),
                    "value": alg.label(v),
                    "rational": alg.value(v).map(format_rational),
                }));
            } else {
                out!("{}", alg.describe(v));
            }
        }
    }
    if args.json && !args.explain {
        out!("{}", serde_json::to_string_pretty(&rows).map_err(Error::from)?);
    }
    Ok(())
}

fn qe_cmd(args: QeArgs) -> Outcome {
    let alg = load_algebra(&args.algebra)?;
    let (_, fs) = sentences(&args.source, &alg, &ConstraintProfile::none(), false)?;
    for f in fs {
        out!("{}", qe_demorgan(&f, &alg)?);
    }
    Ok(())
}

fn asymset_cmd(args: AsymsetArgs, budget: &Budget) -> Outcome {
    let alg = load_algebra(&args.algebra)?;
    let set = almost_sure_set_demorgan(&alg)?;
    let labels: Vec<&str> = set.iter().map(|e| alg.label(*e)).collect();
    if args.json {
        out!("{}", serde_json::to_string(&labels).map_err(Error::from)?);
    } else {
        out!("{{{}}}", labels.join(", "));
    }
    if args.witnesses {
        let vocab = Vocabulary::unary("P");
        let none = ConstraintProfile::none();
        let dec = Decider::new(&alg, &vocab, &none)?.with_budget(budget.clone());
        for (name, (f, _)) in ["0", "eps", "eps'", "delta", "delta'", "1"].iter().zip(demorgan_witnesses(&alg, "P")?) {
            out!("{name:>6} = {:<6} {f}", alg.label(dec.almost_sure_value(&f)?));
        }
    }
    Ok(())
}

fn montecarlo_cmd(args: MonteCarloArgs, budget: &Budget) -> Outcome {
    let alg = load_algebra(&args.algebra)?;
    let prof = profile(&args.profile)?;
    let (vocab, fs) = sentences(&args.source, &alg, &prof, true)?;
    let dist = match &args.weights {
        Some(w) => AtomDistribution::weighted(&vocab, &alg, &prof, w)?,
        None => AtomDistribution::uniform(&vocab, &alg, &prof)?,
    };
    let model = RandomModel::new(Arc::new(alg), vocab, dist, prof)?;
    if args.exact {
        out!("n,value_label,probability,frequency");
        for f in &fs {
            for &n in &args.n {
                let d = model.exact_mu_small(f, n, budget)?;
                for r in &d.rows {
                    out!("{n},{},{},{:.6}", r.label, r.probability, r.approx());
                }
            }
        }
        return Ok(());
    }
    if args.report {
        for f in &fs {
            let r = model.convergence_report(f, &args.n, args.samples, args.seed, args.threshold, budget)?;
            if args.json {
                out!("{}", serde_json::to_string_pretty(&r).map_err(Error::from)?);
            } else {
                out!("{f}");
                out!("{r}");
            }
        }
        return Ok(());
    }
    let mut all = Vec::new();
    if !args.json {
        out!("n,value_label,frequency,ci_low,ci_high");
    }
    for f in &fs {
        for &n in &args.n {
            let d = model.estimate_distribution(f, n, args.samples, args.seed)?;
            if args.json {
                all.push(d);
            } else {
                for r in &d.rows {
                    out!("{n},{},{:.6},{:.6},{:.6}", r.label, r.frequency, r.ci_low, r.ci_high);
                }
            }
        }
    }
    if args.json {
        out!("{}", serde_json::to_string_pretty(&all).map_err(Error::from)?);
    }
    Ok(())
}

fn parse_interval(text: &str) -> Outcome<ValueInterval> {
    let parts: Vec<Option<Rational>> = text.split(',').map(parse_rational).collect();
    match parts.as_slice() {
        [Some(lo), Some(hi)] => Ok(ValueInterval::new(*lo, *hi)?),
        _ => usage(format!("--interval expects LOW,HIGH, got `{text}`")),
    }
}

fn continuum_cmd(cmd: ContinuumCmd, budget: &Budget) -> Outcome {
    let sig = continuum::signature();
    match cmd {
        ContinuumCmd::Estimate { source, n, samples, bins, seed, interval, csv, json } => {
            let texts = texts(&source)?;
            let vocab = vocabulary(&source, &texts, &sig)?;
            let interval = interval.as_deref().map(parse_interval).transpose()?;
            for t in texts {
                let f = parse_sentence(&t, &vocab, &sig)?;
                let r = continuum::estimate_concentration(&f, &vocab, n, samples, bins, seed, interval)?;
                if json {
                    out!("{}", serde_json::to_string_pretty(&r).map_err(Error::from)?);
                } else if csv {
                    out!("bin_low,bin_high,frequency");
                    for b in &r.histogram {
                        out!("{:.6},{:.6},{:.6}", b.low, b.high, b.frequency);
                    }
                } else {
                    if write!(std::io::stdout(), "{r}").is_err() {
                        std::process::exit(0)
                    }
                }
            }
        }
        ContinuumCmd::Extremum { term, tol, json } => {
            let t = parse_term(&term, &sig)?;
            let r = continuum::term_extremum_interval(&t, tol, budget)?;
            if json {
                out!("{}", serde_json::to_string_pretty(&r).map_err(Error::from)?);
            } else {
                out!("{r}");
            }
        }
        ContinuumCmd::ExtAxiom { k, grid, cells, vocab, n, samples, seed } => {
            let vocab = Vocabulary::parse(&vocab)?;
            let f = continuum::extension_axiom_interval(k, grid, &cells, &vocab)?;
            out!("{f}");
            let full = ValueInterval::new(Rational::new(9, 10), Rational::from_integer(1))?;
            for size in n {
                let r = continuum::estimate_concentration(&f, &vocab, size, samples, 10, seed, Some(full))?;
                out!("n = {size}: {:.4}", r.in_interval.unwrap_or(0.0));
            }
        }
    }
    Ok(())
}

fn s5_cmd(args: S5Args, budget: &Budget) -> Outcome {
    let sig = match &args.algebra {
        Some(a) => load_algebra(a)?.signature(),
        None => builtin("L3")?.signature(),
    };
    let m = parse_modal(&args.modal, &sig)?;
    let f = s5_translate(&m);
    out!("{f}");
    if let Some(a) = &args.algebra {
        let alg = load_algebra(a)?;
        let vocab = m.vocabulary();
        let closed = f.free_variables().iter().fold(f.clone(), |acc, v| Formula::forall(v, acc));
        let v = Decider::new(&alg, &vocab, &ConstraintProfile::none())?
            .with_budget(budget.clone())
            .almost_sure_value(&closed)?;
        out!("{closed}: {}", alg.describe(v));
    }
    Ok(())
}
