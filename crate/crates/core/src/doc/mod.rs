//! The text document format: declarations, `RUN` lines, and emitters that
//! print bimodules and morphisms back in parseable form.

pub mod lexer;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{AlgebraTables, DgAlgebra};
use crate::bimodule::{identity_bimodule, Bimodule, Generator};
use crate::boxtensor::{box_bimodules, box_morphisms};
use crate::clf::{Assignment, ClfError, ClfExpr, CycleLabel, Word};
use crate::f2::F2Vector;
use crate::morphism::{compose, identity_morphism, mapping_cone, Morphism};
use crate::pmc::PointedMatchedCircle;
use crate::strand::build_dga;
use crate::table::{Key, Out, Table};

use lexer::{lex, Loc, Tok, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocErrorKind {
    Parse,
    DuplicateName,
    UnresolvedReference,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{message}", loc.map(|l| format!("{l}: ")).unwrap_or_default())]
pub struct DocError {
    pub kind: DocErrorKind,
    pub loc: Option<Loc>,
    pub message: String,
}

impl DocError {
    fn at(kind: DocErrorKind, loc: Loc, message: impl Into<String>) -> DocError {
        DocError {
            kind,
            loc: Some(loc),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Item {
    Pmc(Arc<PointedMatchedCircle>),
    Algebra(Arc<DgAlgebra>),
    Bimodule(Arc<Bimodule>),
    Morphism(Arc<Morphism>),
    Clf(ClfExpr),
    Assignment(Arc<Assignment>),
}

impl Item {
    fn kind(&self) -> &'static str {
        match self {
            Item::Pmc(_) => "PMC",
            Item::Algebra(_) => "ALGEBRA",
            Item::Bimodule(_) => "BIMODULE",
            Item::Morphism(_) => "MORPHISM",
            Item::Clf(_) => "CLF",
            Item::Assignment(_) => "ASSIGN",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub loc: Loc,
    pub item: Item,
}

/// A `RUN` line: command arguments and the expected status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLine {
    pub loc: Loc,
    pub args: Vec<String>,
    pub expect_fail: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    entries: Vec<Entry>,
    index: HashMap<String, usize>,
    runs: Vec<RunLine>,
}

macro_rules! getter {
    ($fn:ident, $variant:ident, $ty:ty, $kind:literal) => {
        pub fn $fn(&self, name: &str) -> Result<$ty, DocError> {
            match self.get(name) {
                Some(Item::$variant(x)) => Ok(x.clone()),
                Some(other) => Err(DocError {
                    kind: DocErrorKind::UnresolvedReference,
                    loc: None,
                    message: format!("`{name}` is a {}, not a {}", other.kind(), $kind),
                }),
                None => Err(DocError {
                    kind: DocErrorKind::UnresolvedReference,
                    loc: None,
                    message: format!("no {} named `{name}`", $kind),
                }),
            }
        }
    };
}

impl Document {
    pub fn new() -> Document {
        Document::default()
    }

    pub fn parse(text: &str) -> Result<Document, DocError> {
        let tokens = lex(text, Loc { line: 1, col: 1 }).map_err(|(loc, m)| DocError::at(DocErrorKind::Parse, loc, m))?;
        let mut doc = Document::new();
        for decl in tokens.split(|t| t.tok == Tok::Newline).filter(|d| !d.is_empty()) {
            doc.declare(decl)?;
        }
        Ok(doc)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn runs(&self) -> &[RunLine] {
        &self.runs
    }

    pub fn get(&self, name: &str) -> Option<&Item> {
        self.index.get(name).map(|&i| &self.entries[i].item)
    }

    pub fn insert(&mut self, name: &str, loc: Loc, item: Item) -> Result<(), DocError> {
        if let Some(&i) = self.index.get(name) {
            return Err(DocError::at(
                DocErrorKind::DuplicateName,
                loc,
                format!("`{name}` is already declared at {}", self.entries[i].loc),
            ));
        }
        self.index.insert(name.to_string(), self.entries.len());
        self.entries.push(Entry {
            name: name.to_string(),
            loc,
            item,
        });
        Ok(())
    }

    getter!(pmc, Pmc, Arc<PointedMatchedCircle>, "PMC");
    getter!(algebra, Algebra, Arc<DgAlgebra>, "ALGEBRA");
    getter!(bimodule, Bimodule, Arc<Bimodule>, "BIMODULE");
    getter!(morphism, Morphism, Arc<Morphism>, "MORPHISM");
    getter!(clf, Clf, ClfExpr, "CLF");
    getter!(assignment, Assignment, Arc<Assignment>, "ASSIGN");

    fn declare(&mut self, toks: &[Token]) -> Result<(), DocError> {
        let mut p = Cursor::new(toks);
        let (head, loc) = p.sym()?;
        if head == "RUN" {
            let mut args: Vec<String> = p.rest_as_args()?;
            let expect_fail = args.len() >= 2 && args[0] == "EXPECT" && args[1] == "fail";
            if expect_fail {
                args.drain(..2);
            }
            if args.is_empty() {
                return Err(DocError::at(DocErrorKind::Parse, loc, "RUN needs a command"));
            }
            self.runs.push(RunLine { loc, args, expect_fail });
            return Ok(());
        }
        let (name, name_loc) = p.sym()?;
        let item = match head.as_str() {
            "PMC" => Item::Pmc(Arc::new(parse_pmc(&mut p)?)),
            "ALGEBRA" => Item::Algebra(Arc::new(self.parse_algebra(&name, &mut p)?)),
            "BIMODULE" => Item::Bimodule(Arc::new(self.parse_bimodule(&name, &mut p)?)),
            "MORPHISM" => Item::Morphism(Arc::new(self.parse_morphism(&name, &mut p)?)),
            "CLF" => {
                p.expect(&Tok::Eq)?;
                let (text, at) = p.sym()?;
                let expr = ClfExpr::parse(&text).map_err(|e| clf_error(e, at))?;
                expr.validate().map_err(|e| clf_error(e, at))?;
                Item::Clf(expr)
            }
            "ASSIGN" => Item::Assignment(Arc::new(self.parse_assignment(&mut p)?)),
            other => {
                return Err(DocError::at(
                    DocErrorKind::Parse,
                    loc,
                    format!("expected PMC, ALGEBRA, BIMODULE, MORPHISM, CLF, ASSIGN or RUN, found `{other}`"),
                ))
            }
        };
        p.finish()?;
        self.insert(&name, name_loc, item)
    }

    fn resolve<T>(&self, name: &str, loc: Loc, f: impl Fn(&Document, &str) -> Result<T, DocError>) -> Result<T, DocError> {
        f(self, name).map_err(|e| DocError { loc: Some(loc), ..e })
    }

    fn parse_algebra(&self, name: &str, p: &mut Cursor) -> Result<DgAlgebra, DocError> {
        if p.eat_keyword("STRANDS") {
            let (pmc_name, loc) = p.sym()?;
            let c = self.resolve(&pmc_name, loc, Document::pmc)?;
            if !c.validate() {
                return Err(DocError::at(DocErrorKind::Invalid, loc, format!("`{pmc_name}` is not a valid pointed matched circle")));
            }
            return Ok(build_dga(&c, name));
        }
        let loc = p.loc();
        let mut tables = AlgebraTables::default();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut pending: Vec<(Loc, String, String, String)> = Vec::new();
        let mut relations: Vec<(Loc, String, Vec<String>, Vec<String>)> = Vec::new();
        for stmt in p.block()? {
            let mut s = Cursor::new(stmt);
            let (kw, at) = s.sym()?;
            match kw.as_str() {
                "IDEM" => {
                    while !s.done() {
                        let (n, nloc) = s.sym()?;
                        let i = add_basis(&mut tables, &mut index, &n, nloc)?;
                        tables.idempotents.push(i);
                        tables.left.push(i);
                        tables.right.push(i);
                    }
                }
                "ELEM" => {
                    let (n, nloc) = s.sym()?;
                    let l = s.field("L")?;
                    let r = s.field("R")?;
                    add_basis(&mut tables, &mut index, &n, nloc)?;
                    tables.left.push(usize::MAX);
                    tables.right.push(usize::MAX);
                    pending.push((nloc, n, l, r));
                }
                "DIFF" | "MUL" => {
                    let mut lhs = Vec::new();
                    while !s.at(&Tok::Eq) {
                        lhs.push(s.sym()?.0);
                    }
                    s.expect(&Tok::Eq)?;
                    let rhs = s.sum_of_syms()?;
                    let arity = if kw == "DIFF" { 1 } else { 2 };
                    if lhs.len() != arity {
                        return Err(DocError::at(DocErrorKind::Parse, at, format!("{kw} takes {arity} element(s) on the left")));
                    }
                    relations.push((at, kw, lhs, rhs));
                }
                other => return Err(DocError::at(DocErrorKind::Parse, at, format!("expected IDEM, ELEM, DIFF or MUL, found `{other}`"))),
            }
            s.finish()?;
        }
        let lookup = |n: &str, at: Loc| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| DocError::at(DocErrorKind::UnresolvedReference, at, format!("no basis element `{n}`")))
        };
        for (at, n, l, r) in &pending {
            let i = index[n];
            tables.left[i] = lookup(l, *at)?;
            tables.right[i] = lookup(r, *at)?;
        }
        tables.diff = vec![F2Vector::zero(); tables.names.len()];
        for (at, kw, lhs, rhs) in relations {
            let mut v = F2Vector::zero();
            for r in &rhs {
                v.toggle(lookup(r, at)?);
            }
            if kw == "DIFF" {
                let a = lookup(&lhs[0], at)?;
                tables.diff[a].add_assign(&v);
            } else {
                tables.mult.push(((lookup(&lhs[0], at)?, lookup(&lhs[1], at)?), v));
            }
        }
        for x in 0..tables.names.len() {
            if tables.idempotents.contains(&x) {
                tables.mult.push(((x, x), F2Vector::unit(x)));
            } else {
                tables.mult.push(((tables.left[x], x), F2Vector::unit(x)));
                tables.mult.push(((x, tables.right[x]), F2Vector::unit(x)));
            }
        }
        DgAlgebra::new(name, tables).map_err(|e| DocError::at(DocErrorKind::Invalid, loc, e.to_string()))
    }

    fn parse_bimodule(&self, name: &str, p: &mut Cursor) -> Result<Bimodule, DocError> {
        let (kw, at) = p.sym()?;
        match kw.as_str() {
            "IDENTITY" => {
                p.keyword("OVER")?;
                let (a, loc) = p.sym()?;
                let a = self.resolve(&a, loc, Document::algebra)?;
                Ok(identity_bimodule(&a).renamed(name))
            }
            "CONE" => {
                let (f, loc) = p.sym()?;
                let f = self.resolve(&f, loc, Document::morphism)?;
                if !f.is_closed() {
                    return Err(DocError::at(DocErrorKind::Invalid, loc, format!("`{}` is not closed", f.name())));
                }
                mapping_cone(&f, name).map_err(|e| DocError::at(DocErrorKind::Invalid, at, e.to_string()))
            }
            "BOX" => {
                let (n, nloc) = p.sym()?;
                let (m, mloc) = p.sym()?;
                let n = self.resolve(&n, nloc, Document::bimodule)?;
                let m = self.resolve(&m, mloc, Document::bimodule)?;
                Ok(box_bimodules(&n, &m)
                    .map_err(|e| DocError::at(DocErrorKind::Invalid, at, e.to_string()))?
                    .renamed(name))
            }
            "OVER" => {
                let (a1, l1) = p.sym()?;
                let (a2, l2) = p.sym()?;
                let a1 = self.resolve(&a1, l1, Document::algebra)?;
                let a2 = self.resolve(&a2, l2, Document::algebra)?;
                let mut gens = Vec::new();
                let mut gen_index: HashMap<String, usize> = HashMap::new();
                let mut table = Table::new();
                for stmt in p.block()? {
                    let mut s = Cursor::new(stmt);
                    let (kw, at) = s.sym()?;
                    match kw.as_str() {
                        "GEN" => {
                            let (g, gloc) = s.sym()?;
                            let l = s.field("L")?;
                            let r = s.field("R")?;
                            let left = idempotent(&a1, &l, gloc)?;
                            let right = idempotent(&a2, &r, gloc)?;
                            if gen_index.insert(g.clone(), gens.len()).is_some() {
                                return Err(DocError::at(DocErrorKind::DuplicateName, gloc, format!("duplicate generator `{g}`")));
                            }
                            gens.push(Generator { name: g, left, right });
                        }
                        "D1" => {
                            let (key, outs) = parse_entry(&mut s, &a1, &a2, &gen_index, &gen_index)?;
                            for o in outs {
                                table.toggle(key.clone(), o);
                            }
                        }
                        other => return Err(DocError::at(DocErrorKind::Parse, at, format!("expected GEN or D1, found `{other}`"))),
                    }
                    s.finish()?;
                }
                Bimodule::new(name, a1, a2, gens, table).map_err(|e| DocError::at(DocErrorKind::Invalid, at, e.to_string()))
            }
            other => Err(DocError::at(DocErrorKind::Parse, at, format!("expected OVER, IDENTITY, CONE or BOX, found `{other}`"))),
        }
    }

    fn parse_morphism(&self, name: &str, p: &mut Cursor) -> Result<Morphism, DocError> {
        let (kw, at) = p.sym()?;
        let invalid = |e: String| DocError::at(DocErrorKind::Invalid, at, e);
        let operand = |p: &mut Cursor| -> Result<Arc<Morphism>, DocError> {
            let (f, loc) = p.sym()?;
            self.resolve(&f, loc, Document::morphism)
        };
        let f = match kw.as_str() {
            "IDENTITY" => {
                p.keyword("OF")?;
                let (m, loc) = p.sym()?;
                identity_morphism(&self.resolve(&m, loc, Document::bimodule)?)
            }
            "DIFF" => operand(p)?.differential(),
            "SUM" => {
                let (f, g) = (operand(p)?, operand(p)?);
                f.sum(&g).map_err(|e| invalid(e.to_string()))?
            }
            "COMPOSE" => {
                let (g, f) = (operand(p)?, operand(p)?);
                compose(&g, &f).map_err(|e| invalid(e.to_string()))?
            }
            "BOX" => {
                let (f, g) = (operand(p)?, operand(p)?);
                box_morphisms(&f, &g).map_err(|e| invalid(e.to_string()))?
            }
            "FROM" => {
                let (m, ml) = p.sym()?;
                p.keyword("TO")?;
                let (n, nl) = p.sym()?;
                let m = self.resolve(&m, ml, Document::bimodule)?;
                let n = self.resolve(&n, nl, Document::bimodule)?;
                let src: HashMap<String, usize> = names_of(&m);
                let tgt: HashMap<String, usize> = names_of(&n);
                let mut table = Table::new();
                for stmt in p.block()? {
                    let mut s = Cursor::new(stmt);
                    let (kw, at) = s.sym()?;
                    if kw != "F" {
                        return Err(DocError::at(DocErrorKind::Parse, at, format!("expected F, found `{kw}`")));
                    }
                    let (key, outs) = parse_entry(&mut s, m.left_algebra(), m.right_algebra(), &src, &tgt)?;
                    for o in outs {
                        table.toggle(key.clone(), o);
                    }
                    s.finish()?;
                }
                Morphism::new(name, m, n, table).map_err(|e| invalid(e.to_string()))?
            }
            other => {
                return Err(invalid(format!(
                    "expected FROM, IDENTITY, DIFF, SUM, COMPOSE or BOX, found `{other}`"
                )))
            }
        };
        Ok(f.renamed(name))
    }

    fn parse_assignment(&self, p: &mut Cursor) -> Result<Assignment, DocError> {
        p.keyword("UNIT")?;
        let (u, uloc) = p.sym()?;
        let mut a = Assignment::new(self.resolve(&u, uloc, Document::bimodule)?);
        for stmt in p.block()? {
            let mut s = Cursor::new(stmt);
            let (kw, at) = s.sym()?;
            let (key, kloc) = s.sym()?;
            s.expect(&Tok::Eq)?;
            let (target, tloc) = s.sym()?;
            s.finish()?;
            match kw.as_str() {
                "LETTER" => {
                    let m = self.resolve(&target, tloc, Document::bimodule)?;
                    if key == "*" {
                        a.default_letter = Some(m);
                    } else {
                        let w = Word::parse(&key).map_err(|e| clf_error(e, kloc))?;
                        let [letter] = w.letters() else {
                            return Err(DocError::at(DocErrorKind::Parse, kloc, "expected a single letter"));
                        };
                        a.letters.insert(letter.to_string(), m);
                    }
                }
                "CRIT" => {
                    let f = (*self.resolve(&target, tloc, Document::morphism)?).clone();
                    if key == "*" {
                        a.default_crit = Some(f);
                    } else {
                        let label = CycleLabel::parse(&key).map_err(|e| clf_error(e, kloc))?;
                        a.crits.insert(label.to_string(), f);
                    }
                }
                other => return Err(DocError::at(DocErrorKind::Parse, at, format!("expected LETTER or CRIT, found `{other}`"))),
            }
        }
        Ok(a)
    }
}

fn clf_error(e: ClfError, at: Loc) -> DocError {
    match e {
        ClfError::Syntax { pos, msg } => DocError::at(
            DocErrorKind::Parse,
            Loc {
                line: at.line,
                col: at.col + pos,
            },
            msg,
        ),
        other => DocError::at(DocErrorKind::Invalid, at, other.to_string()),
    }
}

fn add_basis(t: &mut AlgebraTables, index: &mut HashMap<String, usize>, n: &str, at: Loc) -> Result<usize, DocError> {
    if index.insert(n.to_string(), t.names.len()).is_some() {
        return Err(DocError::at(DocErrorKind::DuplicateName, at, format!("duplicate basis element `{n}`")));
    }
    t.names.push(n.to_string());
    Ok(t.names.len() - 1)
}

fn idempotent(a: &DgAlgebra, n: &str, at: Loc) -> Result<usize, DocError> {
    match a.lookup(n) {
        Ok(i) if a.is_idempotent(i) => Ok(i),
        Ok(_) => Err(DocError::at(DocErrorKind::Invalid, at, format!("`{n}` is not an idempotent of {}", a.name()))),
        Err(_) => Err(DocError::at(DocErrorKind::UnresolvedReference, at, format!("no element `{n}` in {}", a.name()))),
    }
}

fn names_of(m: &Bimodule) -> HashMap<String, usize> {
    m.generators().iter().enumerate().map(|(i, g)| (g.name.clone(), i)).collect()
}

/// `x [a1 .. an] = b : y + ...` or `... = 0`.
fn parse_entry(
    s: &mut Cursor,
    a1: &DgAlgebra,
    a2: &DgAlgebra,
    src: &HashMap<String, usize>,
    tgt: &HashMap<String, usize>,
) -> Result<(Key, Vec<Out>), DocError> {
    let gen = |names: &HashMap<String, usize>, n: &str, at: Loc| {
        names
            .get(n)
            .copied()
            .ok_or_else(|| DocError::at(DocErrorKind::UnresolvedReference, at, format!("no generator `{n}`")))
    };
    let elem = |a: &DgAlgebra, n: &str, at: Loc| {
        a.lookup(n)
            .map_err(|_| DocError::at(DocErrorKind::UnresolvedReference, at, format!("no element `{n}` in {}", a.name())))
    };
    let (x, xl) = s.sym()?;
    let x = gen(src, &x, xl)?;
    let (inner, il) = s.group('[')?;
    let seq_toks = lex(&inner, Loc { line: il.line, col: il.col + 1 }).map_err(|(l, m)| DocError::at(DocErrorKind::Parse, l, m))?;
    let mut seq = Vec::new();
    for t in seq_toks {
        match t.tok {
            Tok::Sym(n) => seq.push(elem(a2, &n, t.loc)?),
            Tok::Newline => {}
            other => return Err(DocError::at(DocErrorKind::Parse, t.loc, format!("expected an algebra element, found {other}"))),
        }
    }
    s.expect(&Tok::Eq)?;
    let mut outs = Vec::new();
    if s.eat_keyword("0") {
        return Ok((Key::new(x, seq), outs));
    }
    loop {
        let (b, bl) = s.sym()?;
        s.expect(&Tok::Colon)?;
        let (y, yl) = s.sym()?;
        outs.push(Out {
            alg: elem(a1, &b, bl)?,
            gen: gen(tgt, &y, yl)?,
        });
        if !s.eat(&Tok::Plus) {
            break;
        }
    }
    Ok((Key::new(x, seq), outs))
}

fn parse_pmc(p: &mut Cursor) -> Result<PointedMatchedCircle, DocError> {
    p.keyword("GENUS")?;
    let (g, gloc) = p.sym()?;
    let genus: usize = g
        .parse()
        .map_err(|_| DocError::at(DocErrorKind::Parse, gloc, format!("expected a genus, found `{g}`")))?;
    let at = p.keyword("PAIRS")?;
    let mut pairs = Vec::new();
    while !p.done() {
        let (inner, loc) = p.group('(')?;
        let nums: Vec<u8> = inner
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| DocError::at(DocErrorKind::Parse, loc, format!("expected a pair of points, found `({inner})`")))?;
        let [a, b] = nums[..] else {
            return Err(DocError::at(DocErrorKind::Parse, loc, format!("expected a pair of points, found `({inner})`")));
        };
        pairs.push((a, b));
    }
    PointedMatchedCircle::from_matching(genus, &pairs).map_err(|e| DocError::at(DocErrorKind::Invalid, at, e.to_string()))
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token]) -> Self {
        Cursor { toks, pos: 0 }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn loc(&self) -> Loc {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map(|t| t.loc)
            .unwrap_or(Loc { line: 0, col: 0 })
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, DocError> {
        let found = match self.toks.get(self.pos) {
            Some(t) => t.tok.to_string(),
            None => "end of declaration".to_string(),
        };
        Err(DocError::at(DocErrorKind::Parse, self.loc(), format!("expected {expected}, found {found}")))
    }

    fn at(&self, t: &Tok) -> bool {
        self.toks.get(self.pos).is_some_and(|x| x.tok == *t)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        let hit = self.at(t);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect(&mut self, t: &Tok) -> Result<(), DocError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&t.to_string())
        }
    }

    fn sym(&mut self) -> Result<(String, Loc), DocError> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Sym(s), loc }) => {
                self.pos += 1;
                Ok((s.clone(), *loc))
            }
            _ => self.unexpected("a name"),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.eat(&Tok::Sym(kw.to_string()))
    }

    fn keyword(&mut self, kw: &str) -> Result<Loc, DocError> {
        let loc = self.loc();
        if self.eat_keyword(kw) {
            Ok(loc)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    /// `NAME=value` written as `NAME = value`.
    fn field(&mut self, name: &str) -> Result<String, DocError> {
        self.keyword(name)?;
        self.expect(&Tok::Eq)?;
        Ok(self.sym()?.0)
    }

    fn group(&mut self, open: char) -> Result<(String, Loc), DocError> {
        match self.toks.get(self.pos) {
            Some(Token {
                tok: Tok::Group { open: o, inner },
                loc,
            }) if *o == open => {
                self.pos += 1;
                Ok((inner.clone(), *loc))
            }
            _ => self.unexpected(if open == '(' { "`( .. )`" } else { "`[ .. ]`" }),
        }
    }

    fn sum_of_syms(&mut self) -> Result<Vec<String>, DocError> {
        if self.eat_keyword("0") {
            return Ok(Vec::new());
        }
        let mut out = vec![self.sym()?.0];
        while self.eat(&Tok::Plus) {
            out.push(self.sym()?.0);
        }
        Ok(out)
    }

    /// Statements of a `{ .. }` block, split on `;`.
    fn block(&mut self) -> Result<Vec<&'a [Token]>, DocError> {
        self.expect(&Tok::LBrace)?;
        let start = self.pos;
        let mut depth = 1;
        while depth > 0 {
            match self.toks.get(self.pos).map(|t| &t.tok) {
                Some(Tok::LBrace) => depth += 1,
                Some(Tok::RBrace) => depth -= 1,
                Some(_) => {}
                None => return self.unexpected("`}`"),
            }
            self.pos += 1;
        }
        let body = &self.toks[start..self.pos - 1];
        Ok(body.split(|t| t.tok == Tok::Semi).filter(|s| !s.is_empty()).collect())
    }

    fn rest_as_args(&mut self) -> Result<Vec<String>, DocError> {
        let mut out = Vec::new();
        while let Some(t) = self.toks.get(self.pos) {
            match &t.tok {
                Tok::Sym(s) => out.push(s.clone()),
                Tok::Group { open: '(', inner } => out.push(format!("({inner})")),
                Tok::Group { inner, .. } => out.push(format!("[{inner}]")),
                _ => return self.unexpected("a command argument"),
            }
            self.pos += 1;
        }
        Ok(out)
    }

    fn finish(&self) -> Result<(), DocError> {
        if self.done() {
            Ok(())
        } else {
            self.unexpected("end of declaration")
        }
    }
}

/// Prints `m` as a `BIMODULE .. OVER .. { .. }` block.
pub fn emit_bimodule(m: &Bimodule) -> String {
    let a1 = m.left_algebra();
    let a2 = m.right_algebra();
    let mut s = format!("BIMODULE {} OVER {} {} {{\n", m.name(), a1.name(), a2.name());
    for g in m.generators() {
        let _ = writeln!(s, "  GEN {} L={} R={};", g.name, a1.basis_name(g.left), a2.basis_name(g.right));
    }
    for (k, span) in m.table().iter() {
        let _ = writeln!(s, "  D1 {} = {};", m.display_key(k), Bimodule::display_span(a1, m, span));
    }
    s.push_str("}\n");
    s
}

/// Prints `f` as a `MORPHISM .. FROM .. TO .. { .. }` block.
pub fn emit_morphism(f: &Morphism) -> String {
    let mut s = format!("MORPHISM {} FROM {} TO {} {{\n", f.name(), f.source().name(), f.target().name());
    for (k, span) in f.table().iter() {
        let _ = writeln!(s, "  F {} = {};", f.source().display_key(k), f.display_span(span));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests;
