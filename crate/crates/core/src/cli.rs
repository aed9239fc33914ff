//! Commands over a parsed document and their reports.
//!
//! Every command yields a [`Report`] whose status maps to the exit code:
//! pass 0, fail 1, input error 2. Reports contain no timing or
//! scheduling-dependent data, so output is byte-stable.

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::algebra::{verify_dga, CheckMode};
use crate::bimodule::Bimodule;
use crate::boxtensor::{box_bimodules, box_morphisms};
use crate::clf::{self, AbstractClf, ClfError, CycleLabel};
use crate::doc::{emit_bimodule, emit_morphism, DocError, Document, Item};
use crate::morphism::{compose, induced_on_homology, is_homotopic, HomotopyError, Morphism};

pub const DEFAULT_CAP: usize = 4;
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }

    fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub status: Status,
    /// Payload in display order; JSON output sorts keys.
    pub fields: Vec<(String, Value)>,
    pub diagnostics: Vec<String>,
}

impl Report {
    fn new(command: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            status: Status::Pass,
            fields: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    fn error(command: impl Into<String>, message: impl Into<String>) -> Report {
        let mut r = Report::new(command);
        r.status = Status::Error;
        r.diagnostics.push(message.into());
        r
    }

    fn field(mut self, key: &str, value: impl Into<Value>) -> Report {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    fn status(mut self, s: Status) -> Report {
        self.status = s;
        self
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("status".into(), json!(self.status.as_str()));
        m.insert("diagnostics".into(), json!(self.diagnostics));
        let mut payload = Map::new();
        for (k, v) in &self.fields {
            payload.insert(k.clone(), v.clone());
        }
        m.insert("payload".into(), Value::Object(payload));
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("== {}\nstatus: {}\n", self.command, self.status.as_str());
        for (k, v) in &self.fields {
            match v {
                Value::Array(items) => {
                    s.push_str(&format!("{k}:\n"));
                    for item in items {
                        s.push_str(&format!("  - {}\n", scalar(item)));
                    }
                }
                Value::String(text) if text.contains('\n') => {
                    s.push_str(&format!("{k}:\n"));
                    for line in text.lines() {
                        s.push_str(&format!("  | {line}\n"));
                    }
                }
                other => s.push_str(&format!("{k}: {}\n", scalar(other))),
            }
        }
        for d in &self.diagnostics {
            s.push_str(&format!("error: {d}\n"));
        }
        s
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "bfcalc", no_binary_name = true)]
pub struct Invocation {
    #[command(subcommand)]
    pub op: Op,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Op {
    /// Pointed matched circle checks.
    Pmc {
        #[command(subcommand)]
        cmd: PmcCmd,
    },
    /// Strand and explicit DG algebras.
    Algebra {
        #[command(subcommand)]
        cmd: AlgebraCmd,
    },
    /// Type DA bimodules.
    Bimodule {
        #[command(subcommand)]
        cmd: BimoduleCmd,
    },
    /// Box tensor product `N ⊠ M`, printed as a BIMODULE block.
    Boxtensor {
        n: String,
        m: String,
        #[arg(short = 'o', long = "output")]
        output: Option<String>,
    },
    /// Bimodule morphisms.
    Morphism {
        #[command(subcommand)]
        cmd: MorphismCmd,
    },
    /// Arity-zero homology of a bimodule, or the map a morphism induces.
    Homology { name: String },
    /// Cornered Lefschetz fibration expressions.
    Clf {
        #[command(subcommand)]
        cmd: ClfCmd,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum PmcCmd {
    Check { name: String },
}

#[derive(Debug, Clone, Subcommand)]
pub enum AlgebraCmd {
    Build {
        name: String,
    },
    Verify {
        name: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum BimoduleCmd {
    Verify { name: String },
}

#[derive(Debug, Clone, Subcommand)]
pub enum MorphismCmd {
    Verify {
        name: String,
    },
    /// `G ∘ F`.
    Compose {
        g: String,
        f: String,
        #[arg(short = 'o', long = "output")]
        output: Option<String>,
    },
    /// `F ⊠ G`.
    Box {
        f: String,
        g: String,
        #[arg(short = 'o', long = "output")]
        output: Option<String>,
    },
    Homotopic {
        f: String,
        g: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum ClfCmd {
    Normalize {
        name: String,
    },
    Hurwitz {
        name: String,
        #[arg(long)]
        at: usize,
    },
    Standard {
        name: String,
        /// Cycle label of the designated pure-twist leaf.
        #[arg(long)]
        wg: String,
    },
    /// Evaluates the expression and compares it with its horizontal normal form.
    Evaluate {
        name: String,
        #[arg(long)]
        assign: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

/// Parses command arguments, as given on a `RUN` line.
pub fn parse_args(args: &[String]) -> Result<Op, String> {
    Invocation::try_parse_from(args).map(|i| i.op).map_err(|e| e.to_string().trim_end().to_string())
}

pub fn execute_args(doc: &Document, args: &[String]) -> Report {
    match parse_args(args) {
        Ok(op) => execute(doc, &op),
        Err(e) => Report::error(args.join(" "), e),
    }
}

pub fn command_line(op: &Op) -> String {
    match op {
        Op::Pmc { cmd: PmcCmd::Check { name } } => format!("pmc check {name}"),
        Op::Algebra { cmd: AlgebraCmd::Build { name } } => format!("algebra build {name}"),
        Op::Algebra {
            cmd: AlgebraCmd::Verify { name, budget },
        } => format!("algebra verify {name} --budget {budget}"),
        Op::Bimodule { cmd: BimoduleCmd::Verify { name } } => format!("bimodule verify {name}"),
        Op::Boxtensor { n, m, output } => format!("boxtensor {n} {m}{}", out_suffix(output)),
        Op::Morphism { cmd } => match cmd {
            MorphismCmd::Verify { name } => format!("morphism verify {name}"),
            MorphismCmd::Compose { g, f, output } => format!("morphism compose {g} {f}{}", out_suffix(output)),
            MorphismCmd::Box { f, g, output } => format!("morphism box {f} {g}{}", out_suffix(output)),
            MorphismCmd::Homotopic { f, g, cap } => format!("morphism homotopic {f} {g} --cap {cap}"),
        },
        Op::Homology { name } => format!("homology {name}"),
        Op::Clf { cmd } => match cmd {
            ClfCmd::Normalize { name } => format!("clf normalize {name}"),
            ClfCmd::Hurwitz { name, at } => format!("clf hurwitz {name} --at {at}"),
            ClfCmd::Standard { name, wg } => format!("clf standard {name} --wg {wg}"),
            ClfCmd::Evaluate { name, assign, cap } => format!("clf evaluate {name} --assign {assign} --cap {cap}"),
        },
    }
}

fn out_suffix(o: &Option<String>) -> String {
    o.as_ref().map(|n| format!(" -o {n}")).unwrap_or_default()
}

pub fn execute(doc: &Document, op: &Op) -> Report {
    let command = command_line(op);
    match run(doc, op, &command) {
        Ok(r) => r,
        Err(message) => Report::error(command, message),
    }
}

fn doc_err(e: DocError) -> String {
    e.to_string()
}

fn run(doc: &Document, op: &Op, command: &str) -> Result<Report, String> {
    let r = Report::new(command);
    Ok(match op {
        Op::Pmc { cmd: PmcCmd::Check { name } } => {
            let c = doc.pmc(name).map_err(doc_err)?;
            let v = c.validation_report();
            let pairs: Vec<String> = c.pairs().iter().map(|p| p.to_string()).collect();
            let mut r = r;
            if v.diverges() {
                r.diagnostics.push("warning: surgery and handleslide criteria disagree".into());
            }
            r.field("genus", c.genus())
                .field("pairs", pairs.join(" "))
                .field("surgery_components", v.surgery_components)
                .field("surgery_valid", v.surgery_valid)
                .field("handleslide_valid", v.handleslide_valid)
                .field("handleslide_orbit", v.handleslide_orbit)
                .field("criteria_diverge", v.diverges())
                .status(Status::of(v.surgery_valid))
        }
        Op::Algebra { cmd: AlgebraCmd::Build { name } } => {
            let a = doc.algebra(name).map_err(doc_err)?;
            let diff_terms: usize = (0..a.dim()).map(|x| a.diff(x).weight()).sum();
            let products = a.products().filter(|((x, y), _)| !a.is_idempotent(*x) && !a.is_idempotent(*y)).count();
            r.field("dim", a.dim())
                .field("idempotents", a.idempotents().len())
                .field("nontrivial_products", products)
                .field("differential_terms", diff_terms)
        }
        Op::Algebra {
            cmd: AlgebraCmd::Verify { name, budget },
        } => {
            let a = doc.algebra(name).map_err(doc_err)?;
            let report = verify_dga(&a, *budget);
            let checks: Vec<Value> = report
                .checks
                .iter()
                .map(|c| {
                    let mode = match c.mode {
                        CheckMode::Exhaustive { instances } => format!("exhaustive, {instances} instances"),
                        CheckMode::Sampled { instances, population } => {
                            format!("sampled, {instances} of {population} composable instances")
                        }
                    };
                    let verdict = match &c.witness {
                        None => "pass".to_string(),
                        Some(w) => format!("FAIL at [{}]", w.join(", ")),
                    };
                    json!(format!("{}: {verdict} ({mode})", c.name))
                })
                .collect();
            r.field("dim", a.dim())
                .field("budget", *budget)
                .field("checks", checks)
                .status(Status::of(report.passed()))
        }
        Op::Bimodule { cmd: BimoduleCmd::Verify { name } } => {
            let m = doc.bimodule(name).map_err(doc_err)?;
            structure_fields(r, &m)
        }
        Op::Boxtensor { n, m, output } => {
            let nb = doc.bimodule(n).map_err(doc_err)?;
            let mb = doc.bimodule(m).map_err(doc_err)?;
            let mut p = box_bimodules(&nb, &mb).map_err(|e| e.to_string())?;
            if let Some(o) = output {
                p = p.renamed(o.clone());
            }
            let text = emit_bimodule(&p);
            structure_fields(r, &p).field("bimodule", text)
        }
        Op::Morphism { cmd } => morphism_command(doc, cmd, r)?,
        Op::Homology { name } => match doc.get(name) {
            Some(Item::Bimodule(m)) => r.field("kind", "bimodule").field("dimension", m.homology().map_err(|e| e.to_string())?),
            Some(Item::Morphism(f)) => {
                let h = induced_on_homology(f).map_err(|e| e.to_string())?;
                let iso = h.rows() == h.cols() && h.is_invertible();
                r.field("kind", "morphism")
                    .field("source_dimension", h.cols())
                    .field("target_dimension", h.rows())
                    .field("rank", h.rank())
                    .field("naive_quasi_isomorphism", iso)
                    .status(Status::of(iso))
            }
            _ => return Err(format!("no BIMODULE or MORPHISM named `{name}`")),
        },
        Op::Clf { cmd } => clf_command(doc, cmd, r)?,
    })
}

fn structure_fields(r: Report, m: &Bimodule) -> Report {
    let s = m.check_structure();
    let show = |w: &Option<(crate::table::Key, crate::table::Span)>| match w {
        None => Value::Null,
        Some((k, span)) => json!(format!("{} -> {}", m.display_key(k), Bimodule::display_span(m.left_algebra(), m, span))),
    };
    r.field("name", m.name())
        .field("generators", m.generators().len())
        .field("terms", m.table().term_count())
        .field("arity", m.arity())
        .field("bound", s.bound)
        .field("relation_witness", show(&s.relation))
        .field("unitality_witness", show(&s.unitality))
        .status(Status::of(s.passed()))
}

fn closed_fields(r: Report, f: &Morphism) -> Report {
    let witness = f
        .closedness_witness()
        .map(|(k, span)| json!(format!("{} -> {}", f.source().display_key(&k), f.display_span(&span))))
        .unwrap_or(Value::Null);
    r.field("source", f.source().name())
        .field("target", f.target().name())
        .field("terms", f.table().term_count())
        .field("arity", f.arity())
        .field("closed", f.is_closed())
        .field("closedness_witness", witness)
}

fn morphism_command(doc: &Document, cmd: &MorphismCmd, r: Report) -> Result<Report, String> {
    let get = |n: &str| doc.morphism(n).map_err(doc_err);
    Ok(match cmd {
        MorphismCmd::Verify { name } => {
            let f = get(name)?;
            closed_fields(r, &f).status(Status::of(f.is_closed()))
        }
        MorphismCmd::Compose { g, f, output } => {
            let h = compose(&*get(g)?, &*get(f)?).map_err(|e| e.to_string())?;
            let h = h.renamed(output.clone().unwrap_or_else(|| format!("{g}.{f}")));
            let text = emit_morphism(&h);
            closed_fields(r, &h).field("morphism", text)
        }
        MorphismCmd::Box { f, g, output } => {
            let h = box_morphisms(&*get(f)?, &*get(g)?).map_err(|e| e.to_string())?;
            let h = h.renamed(output.clone().unwrap_or_else(|| format!("{f}*{g}")));
            let mut text = emit_bimodule(h.source());
            if !crate::morphism::same_bimodule(h.source(), h.target()) || h.source().name() != h.target().name() {
                text.push_str(&emit_bimodule(h.target()));
            }
            text.push_str(&emit_morphism(&h));
            closed_fields(r, &h).field("morphism", text)
        }
        MorphismCmd::Homotopic { f, g, cap } => {
            let (f, g) = (get(f)?, get(g)?);
            let r = r.field("cap", *cap);
            match is_homotopic(&f, &g, *cap) {
                Ok(w) => r
                    .field("result", "homotopic")
                    .field("unknowns", w.unknowns)
                    .field("witness_terms", w.h.table().term_count())
                    .field("witness_arity", w.h.arity())
                    .field("witness", emit_morphism(&w.h.renamed("H"))),
                Err(HomotopyError::NotWithinCap { cap }) => r
                    .field("result", format!("not within cap {cap}"))
                    .status(Status::Fail),
                Err(HomotopyError::Morphism(e)) => return Err(e.to_string()),
            }
        }
    })
}

fn clf_command(doc: &Document, cmd: &ClfCmd, r: Report) -> Result<Report, String> {
    let get = |n: &str| doc.clf(n).map_err(doc_err);
    let words = |r: Report, e: &clf::ClfExpr| r.field("initial", e.initial().to_string()).field("resulting", e.resulting().to_string());
    Ok(match cmd {
        ClfCmd::Normalize { name } => {
            let e = get(name)?;
            let (n, rewrites) = clf::normalize_horizontal(&e);
            let preserved = n.initial().equivalent(&e.initial()) && n.resulting().equivalent(&e.resulting());
            words(r, &e)
                .field("rewrites", rewrites)
                .field("expression", n.to_string())
                .field("boundaries_preserved", preserved)
                .status(Status::of(preserved && n.vcomp_count() == 0))
        }
        ClfCmd::Hurwitz { name, at } => {
            let e = get(name)?;
            let h = clf::hurwitz(&e, *at).map_err(|e| e.to_string())?;
            let preserved = h.initial().equivalent(&e.initial()) && h.resulting().equivalent(&e.resulting());
            words(r, &e)
                .field("expression", h.to_string())
                .field("boundaries_preserved", preserved)
                .status(Status::of(preserved && h.crit_count() == e.crit_count()))
        }
        ClfCmd::Standard { name, wg } => {
            let e = get(name)?;
            let label = CycleLabel::parse(wg).map_err(|e| e.to_string())?;
            let wg = AbstractClf::pure(label);
            match clf::standard_form(&e, &wg) {
                Ok(s) => {
                    let conj: Vec<Value> = s.conjugators.iter().map(|w| json!(w.to_string())).collect();
                    words(r, &e).field("expression", s.expr.to_string()).field("conjugators", conj)
                }
                Err(err @ ClfError::IncompatibleCycle { .. }) => words(r, &e).field("result", err.to_string()).status(Status::Fail),
                Err(err) => return Err(err.to_string()),
            }
        }
        ClfCmd::Evaluate { name, assign, cap } => {
            let e = get(name)?;
            let a = doc.assignment(assign).map_err(doc_err)?;
            let f = clf::evaluate(&e, &a).map_err(|e| e.to_string())?;
            let (n, _) = clf::normalize_horizontal(&e);
            let g = clf::evaluate(&n, &a).map_err(|e| e.to_string())?;
            let r = closed_fields(r, &f).field("cap", *cap);
            match is_homotopic(&f, &g, *cap) {
                Ok(w) => {
                    let closed = f.is_closed();
                    r.field("normal_form", "homotopic")
                        .field("witness_terms", w.h.table().term_count())
                        .status(Status::of(closed))
                }
                Err(HomotopyError::NotWithinCap { cap }) => {
                    r.field("normal_form", format!("not within cap {cap}")).status(Status::Fail)
                }
                Err(HomotopyError::Morphism(e)) => return Err(e.to_string()),
            }
        }
    })
}

/// Text reports joined by blank lines, or one JSON value: the report itself
/// for a single command, `{status, reports}` otherwise.
pub fn render(reports: &[Report], status: Status, json: bool) -> String {
    if !json {
        let texts: Vec<String> = reports.iter().map(Report::to_text).collect();
        return texts.join("\n");
    }
    let value = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        json!({
            "status": status.as_str(),
            "reports": reports.iter().map(Report::to_json).collect::<Vec<_>>(),
        })
    };
    let mut out = serde_json::to_string_pretty(&value).expect("reports serialize");
    out.push('\n');
    out
}

/// Reports of every `RUN` line and whether each met its expectation.
pub fn run_document(doc: &Document) -> (Vec<Report>, Status) {
    let mut overall = Status::Pass;
    let mut reports = Vec::new();
    for line in doc.runs() {
        let mut r = execute_args(doc, &line.args);
        let expected = if line.expect_fail { Status::Fail } else { Status::Pass };
        if line.expect_fail {
            r.fields.push(("expected".into(), json!("fail")));
        }
        let worst = if r.status == expected {
            Status::Pass
        } else if r.status == Status::Error {
            Status::Error
        } else {
            Status::Fail
        };
        if worst != Status::Pass {
            r.diagnostics.push(format!("{}: expected {}, got {}", line.loc, expected.as_str(), r.status.as_str()));
        }
        overall = overall.max(worst);
        reports.push(r);
    }
    (reports, overall)
}
