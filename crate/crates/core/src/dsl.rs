//! The `.wf` protocol language: declarations, a numbered narration, and
//! optional hand-written generalized roles.
//!
//! ```text
//! protocol NS;
//! agents A, B, S;            # intruder I is implicit
//! key kas shared(A,S); key kbs shared(B,S);
//! key kab readers(A,B,S) fresh by S at 2;
//! nonce Na level bottom fresh by A at 1;
//! nonce Nb level {A,B} fresh by B at 4;
//! steps {
//!   1. A -> S : A.B.Na
//!   2. S -> A : {Na.kab.B.{kab.A}kbs}kas
//!   3. A -> B : {kab.A}kbs
//!   4. B -> A : {Nb}kab
//!   5. A -> B : {pred(Nb)}kab
//! }
//! roles override A {
//!   recv - ; send A.B.Na^i
//!   recv {Na^i.X.B.Y}kas ; send Y
//!   recv {Z}X ; send {pred(Z)}X
//! }
//! ```
//!
//! Names not declared in the header are variables inside `roles` blocks and
//! errors everywhere else. A variable used as an encryption key gets the
//! `key` sort; other sorts can be written explicitly as `Q:nonce`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::context::{Context, Freshness, KeySpec, LevelSpec};
use crate::lattice::INTRUDER;
use crate::roles::Direction;
use crate::term::{atoms, AtomKind, AtomName, Sort, Term, Var, OPAQUE_SYMBOLS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: {}{msg}", step.map(|s| format!("step {s}: ")).unwrap_or_default())]
    Semantic {
        line: usize,
        col: usize,
        step: Option<u32>,
        msg: String,
    },
}

impl DslError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            DslError::Syntax { line, col, .. } | DslError::Semantic { line, col, .. } => {
                (*line, *col)
            }
        }
    }

    pub fn step(&self) -> Option<u32> {
        match self {
            DslError::Semantic { step, .. } => *step,
            DslError::Syntax { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyReaders {
    Shared(Vec<String>),
    Readers(Vec<String>),
    Public,
}

impl KeyReaders {
    fn level(&self) -> LevelSpec {
        match self {
            KeyReaders::Shared(a) | KeyReaders::Readers(a) => LevelSpec::Agents(a.clone()),
            KeyReaders::Public => LevelSpec::Bottom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Agents(Vec<String>),
    Key {
        name: String,
        readers: KeyReaders,
        inverse: Option<String>,
        level: Option<LevelSpec>,
        fresh: Option<Freshness>,
    },
    Nonce {
        name: String,
        level: Option<LevelSpec>,
        fresh: Option<Freshness>,
    },
    Const {
        name: String,
        level: Option<LevelSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub number: u32,
    pub sender: String,
    pub receiver: String,
    pub message: Term,
}

/// A generalized role transcribed by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleOverride {
    pub principal: String,
    pub session: Option<String>,
    pub events: Vec<(Direction, Term)>,
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub name: String,
    pub decls: Vec<Decl>,
    pub steps: Vec<Step>,
    pub context: Context,
    pub role_overrides: Vec<RoleOverride>,
}

/// The context is derived from the declarations, so it takes no part in
/// equality.
impl PartialEq for ProtocolSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.decls == other.decls
            && self.steps == other.steps
            && self.role_overrides == other.role_overrides
    }
}

impl Eq for ProtocolSpec {}

impl ProtocolSpec {
    pub fn role_override(&self, principal: &str) -> Option<&RoleOverride> {
        self.role_overrides
            .iter()
            .find(|r| r.principal == principal)
    }

    /// Agents that send or receive in at least one step, in declaration
    /// order.
    pub fn participants(&self) -> Vec<String> {
        self.context
            .agents()
            .iter()
            .filter(|a| {
                self.steps
                    .iter()
                    .any(|s| &s.sender == *a || &s.receiver == *a)
            })
            .cloned()
            .collect()
    }
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u32),
    Dot,
    Comma,
    Semi,
    Colon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Caret,
    Arrow,
    Dash,
    Bottom,
    Top,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Dash => f.write_str("`-`"),
            Tok::Bottom => f.write_str("`⊥`"),
            Tok::Top => f.write_str("`⊤`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            let n = s.parse().map_err(|_| DslError::Syntax {
                line: pos.line,
                col: pos.col,
                msg: format!("number `{s}` is too large"),
            })?;
            out.push((Tok::Int(n), pos));
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            '.' => Tok::Dot,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '^' => Tok::Caret,
            '→' | '⟶' => Tok::Arrow,
            '⊥' => Tok::Bottom,
            '⊤' => Tok::Top,
            '□' => Tok::Dash,
            '-' => {
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    Tok::Dash
                }
            }
            other => {
                return Err(DslError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

/// How identifiers that are not declared atoms are treated inside terms.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Names {
    DeclaredOnly,
    AllowVariables,
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    kinds: &'a dyn Fn(&str) -> Option<AtomKind>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, kinds: &'a dyn Fn(&str) -> Option<AtomKind>) -> Result<Self, DslError> {
        Ok(Parser {
            toks: lex(text)?,
            i: 0,
            kinds,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.i + n).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        let p = self.pos();
        Err(DslError::Syntax {
            line: p.line,
            col: p.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), DslError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        if self.is_keyword(kw) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected a name, found {other}")),
        }
    }

    fn int(&mut self) -> Result<u32, DslError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            other => self.err(format!("expected a number, found {other}")),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, DslError> {
        let mut out = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn level(&mut self) -> Result<LevelSpec, DslError> {
        match self.peek().clone() {
            Tok::Bottom => {
                self.next();
                Ok(LevelSpec::Bottom)
            }
            Tok::Top => {
                self.next();
                Ok(LevelSpec::Top)
            }
            Tok::Ident(s) if s == "bottom" => {
                self.next();
                Ok(LevelSpec::Bottom)
            }
            Tok::Ident(s) if s == "top" => {
                self.next();
                Ok(LevelSpec::Top)
            }
            Tok::LBrace => {
                self.next();
                let agents = if *self.peek() == Tok::RBrace {
                    Vec::new()
                } else {
                    self.ident_list()?
                };
                self.expect(Tok::RBrace)?;
                Ok(LevelSpec::Agents(agents))
            }
            other => self.err(format!(
                "expected a level (`bottom`, `top` or `{{A,B}}`), found {other}"
            )),
        }
    }

    fn fresh(&mut self) -> Result<Freshness, DslError> {
        self.keyword("fresh")?;
        self.keyword("by")?;
        let creator = self.ident()?;
        self.keyword("at")?;
        let step = self.int()?;
        Ok(Freshness { creator, step })
    }

    // terms -----------------------------------------------------------------

    fn term(&mut self, names: Names) -> Result<Term, DslError> {
        let mut parts = vec![self.primary(names)?];
        while *self.peek() == Tok::Dot {
            self.next();
            parts.push(self.primary(names)?);
        }
        Ok(Term::concat(parts))
    }

    fn primary(&mut self, names: Names) -> Result<Term, DslError> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.next();
                let body = self.term(names)?;
                self.expect(Tok::RBrace)?;
                let pos = self.pos();
                let key = self.name_term(names, true)?;
                match &key {
                    Term::Atom(a) if a.kind == AtomKind::Key => {}
                    Term::Var(_) => {}
                    other => {
                        return Err(DslError::Syntax {
                            line: pos.line,
                            col: pos.col,
                            msg: format!("`{other}` is not a key"),
                        })
                    }
                }
                Ok(Term::enc(body, key))
            }
            Tok::LParen => {
                self.next();
                let t = self.term(names)?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if *self.peek_at(1) == Tok::LParen => {
                if !OPAQUE_SYMBOLS.contains(&s.as_str()) {
                    return self.err(format!("unknown function symbol `{s}`"));
                }
                self.next();
                self.next();
                let mut args = vec![self.term(names)?];
                while self.eat(&Tok::Comma) {
                    args.push(self.term(names)?);
                }
                self.expect(Tok::RParen)?;
                Ok(Term::Apply(s, args))
            }
            Tok::Ident(_) => self.name_term(names, false),
            other => self.err(format!("expected a message, found {other}")),
        }
    }

    fn name_term(&mut self, names: Names, key_position: bool) -> Result<Term, DslError> {
        let pos = self.pos();
        let name = self.ident()?;
        let fail = |msg: String| DslError::Syntax {
            line: pos.line,
            col: pos.col,
            msg,
        };
        match (self.kinds)(&name) {
            Some(kind) => {
                let mut atom = AtomName::new(kind, name.clone());
                if self.eat(&Tok::Caret) {
                    if names == Names::DeclaredOnly {
                        return Err(fail(format!(
                            "session index on `{name}`: only generalized roles carry session indices"
                        )));
                    }
                    if !kind.is_fresh_capable() {
                        return Err(fail(format!(
                            "`{name}` is a {} and cannot carry a session index",
                            kind.as_str()
                        )));
                    }
                    let s = match self.next() {
                        Tok::Ident(s) => s,
                        Tok::Int(n) => n.to_string(),
                        other => {
                            return Err(fail(format!("expected a session index, found {other}")))
                        }
                    };
                    atom = atom.in_session(s);
                }
                Ok(Term::Atom(atom))
            }
            None if names == Names::AllowVariables => {
                let mut sort = if key_position { Sort::Key } else { Sort::Any };
                if *self.peek() == Tok::Colon {
                    if let Tok::Ident(s) = self.peek_at(1).clone() {
                        if let Some(explicit) = Sort::parse(&s) {
                            self.next();
                            self.next();
                            sort = explicit;
                        }
                    }
                }
                Ok(Term::Var(Var::new(name, sort)))
            }
            None => Err(DslError::Semantic {
                line: pos.line,
                col: pos.col,
                step: None,
                msg: format!("undeclared atom `{name}`"),
            }),
        }
    }
}

/// Gives every occurrence of a variable name the one non-`any` sort it is
/// used with.
fn unify_variable_sorts(terms: &mut [Term], pos: Pos) -> Result<(), DslError> {
    let mut sorts: BTreeMap<String, BTreeSet<Sort>> = BTreeMap::new();
    for t in terms.iter() {
        for v in t.variables() {
            let entry = sorts.entry(v.name.clone()).or_default();
            if v.sort != Sort::Any {
                entry.insert(v.sort);
            }
        }
    }
    let mut resolved = BTreeMap::new();
    for (name, s) in sorts {
        if s.len() > 1 {
            let list: Vec<_> = s.iter().map(|s| s.as_str()).collect();
            return Err(DslError::Semantic {
                line: pos.line,
                col: pos.col,
                step: None,
                msg: format!(
                    "variable `{name}` is used with conflicting sorts: {}",
                    list.join(", ")
                ),
            });
        }
        resolved.insert(name, s.into_iter().next().unwrap_or(Sort::Any));
    }
    for t in terms.iter_mut() {
        *t = t.map_vars(&|v| Term::Var(Var::new(v.name.clone(), resolved[&v.name])));
    }
    Ok(())
}

/// Parses a standalone message. `kinds` classifies declared atoms; with
/// `allow_variables`, any other name becomes a variable.
pub fn parse_term(
    text: &str,
    kinds: &dyn Fn(&str) -> Option<AtomKind>,
    allow_variables: bool,
) -> Result<Term, DslError> {
    let mut p = Parser::new(text, kinds)?;
    let names = if allow_variables {
        Names::AllowVariables
    } else {
        Names::DeclaredOnly
    };
    let t = p.term(names)?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after message", p.peek()));
    }
    let mut ts = [t];
    unify_variable_sorts(&mut ts, Pos { line: 1, col: 1 })?;
    let [t] = ts;
    Ok(t)
}

fn semantic(pos: Pos, step: Option<u32>, msg: impl Into<String>) -> DslError {
    DslError::Semantic {
        line: pos.line,
        col: pos.col,
        step,
        msg: msg.into(),
    }
}

/// Parses and validates a protocol description.
pub fn parse(text: &str) -> Result<ProtocolSpec, DslError> {
    // Declarations fix the atom kinds used when parsing messages, so the
    // header is parsed first with an empty symbol table.
    let no_symbols = |_: &str| None;
    let mut header = Parser::new(text, &no_symbols)?;
    if *header.peek() == Tok::Eof {
        return header.err("empty input: expected `protocol <name>;`");
    }
    header.keyword("protocol")?;
    let name = header.ident()?;
    header.expect(Tok::Semi)?;

    let mut decls = Vec::new();
    let mut decl_pos = Vec::new();
    let mut kinds: BTreeMap<String, AtomKind> = BTreeMap::new();
    let declare = |kinds: &mut BTreeMap<String, AtomKind>, n: &str, k: AtomKind, pos: Pos| {
        if n == INTRUDER {
            return Err(semantic(
                pos,
                None,
                format!("`{INTRUDER}` is reserved for the intruder"),
            ));
        }
        if OPAQUE_SYMBOLS.contains(&n) {
            return Err(semantic(
                pos,
                None,
                format!("`{n}` is a reserved function symbol"),
            ));
        }
        if kinds.insert(n.to_string(), k).is_some() {
            return Err(semantic(pos, None, format!("`{n}` is declared twice")));
        }
        Ok(())
    };
    loop {
        let pos = header.pos();
        let decl = if header.is_keyword("agents") {
            header.next();
            let names = header.ident_list()?;
            for n in &names {
                declare(&mut kinds, n, AtomKind::Identity, pos)?;
            }
            Decl::Agents(names)
        } else if header.is_keyword("key") {
            header.next();
            let key = header.ident()?;
            declare(&mut kinds, &key, AtomKind::Key, pos)?;
            let (mut readers, mut inverse, mut level, mut fresh) = (None, None, None, None);
            loop {
                let clause_pos = header.pos();
                let dup = |what: &str| {
                    semantic(
                        clause_pos,
                        None,
                        format!("duplicate `{what}` clause for key `{key}`"),
                    )
                };
                if header.is_keyword("shared") || header.is_keyword("readers") {
                    let shared = header.is_keyword("shared");
                    header.next();
                    header.expect(Tok::LParen)?;
                    let agents = header.ident_list()?;
                    header.expect(Tok::RParen)?;
                    let r = if shared {
                        KeyReaders::Shared(agents)
                    } else {
                        KeyReaders::Readers(agents)
                    };
                    if readers.replace(r).is_some() {
                        return Err(dup("readers"));
                    }
                } else if header.is_keyword("public") {
                    header.next();
                    if readers.replace(KeyReaders::Public).is_some() {
                        return Err(dup("readers"));
                    }
                } else if header.is_keyword("inverse") {
                    header.next();
                    if inverse.replace(header.ident()?).is_some() {
                        return Err(dup("inverse"));
                    }
                } else if header.is_keyword("level") {
                    header.next();
                    if level.replace(header.level()?).is_some() {
                        return Err(dup("level"));
                    }
                } else if header.is_keyword("fresh") {
                    if fresh.replace(header.fresh()?).is_some() {
                        return Err(dup("fresh"));
                    }
                } else {
                    break;
                }
            }
            let Some(readers) = readers else {
                return Err(semantic(
                    pos,
                    None,
                    format!("key `{key}` needs `shared(..)`, `readers(..)` or `public`"),
                ));
            };
            Decl::Key {
                name: key,
                readers,
                inverse,
                level,
                fresh,
            }
        } else if header.is_keyword("nonce") {
            header.next();
            let n = header.ident()?;
            declare(&mut kinds, &n, AtomKind::Nonce, pos)?;
            let level = if header.is_keyword("level") {
                header.next();
                Some(header.level()?)
            } else {
                None
            };
            let fresh = if header.is_keyword("fresh") {
                Some(header.fresh()?)
            } else {
                None
            };
            Decl::Nonce {
                name: n,
                level,
                fresh,
            }
        } else if header.is_keyword("const") {
            header.next();
            let n = header.ident()?;
            declare(&mut kinds, &n, AtomKind::Constant, pos)?;
            let level = if header.is_keyword("level") {
                header.next();
                Some(header.level()?)
            } else {
                None
            };
            Decl::Const { name: n, level }
        } else {
            break;
        };
        header.expect(Tok::Semi)?;
        decls.push(decl);
        decl_pos.push(pos);
    }
    if !header.is_keyword("steps") {
        return header.err(format!(
            "expected a declaration or `steps`, found {}",
            header.peek()
        ));
    }
    let body_start = header.i;
    let toks = header.toks;

    let lookup = |n: &str| kinds.get(n).copied();
    let mut p = Parser {
        toks,
        i: body_start,
        kinds: &lookup,
    };

    p.keyword("steps")?;
    p.expect(Tok::LBrace)?;
    let mut steps = Vec::new();
    let mut step_pos = Vec::new();
    while *p.peek() != Tok::RBrace {
        let pos = p.pos();
        let number = p.int()?;
        if let Some(prev) = steps.last().map(|s: &Step| s.number) {
            if number <= prev {
                return Err(semantic(
                    pos,
                    Some(number),
                    format!("duplicate or out-of-order step {number}"),
                ));
            }
        }
        if number != steps.len() as u32 + 1 {
            return Err(semantic(
                pos,
                Some(number),
                format!("expected step {}, found step {number}", steps.len() + 1),
            ));
        }
        p.expect(Tok::Dot)?;
        let sender_pos = p.pos();
        let sender = p.ident()?;
        p.expect(Tok::Arrow)?;
        let receiver_pos = p.pos();
        let receiver = p.ident()?;
        p.expect(Tok::Colon)?;
        let message = p.term(Names::DeclaredOnly).map_err(|e| match e {
            DslError::Semantic { line, col, msg, .. } => DslError::Semantic {
                line,
                col,
                step: Some(number),
                msg,
            },
            e => e,
        })?;
        p.eat(&Tok::Semi);
        for (who, at) in [(&sender, sender_pos), (&receiver, receiver_pos)] {
            if kinds.get(who.as_str()) != Some(&AtomKind::Identity) {
                return Err(semantic(
                    at,
                    Some(number),
                    format!("`{who}` is not a declared agent"),
                ));
            }
        }
        if sender == receiver {
            return Err(semantic(
                sender_pos,
                Some(number),
                "sender and receiver must differ",
            ));
        }
        steps.push(Step {
            number,
            sender,
            receiver,
            message,
        });
        step_pos.push(pos);
    }
    p.expect(Tok::RBrace)?;

    let mut role_overrides: Vec<RoleOverride> = Vec::new();
    while p.is_keyword("roles") {
        let pos = p.pos();
        p.next();
        p.keyword("override")?;
        let principal = p.ident()?;
        if kinds.get(principal.as_str()) != Some(&AtomKind::Identity) {
            return Err(semantic(
                pos,
                None,
                format!("`{principal}` is not a declared agent"),
            ));
        }
        if role_overrides.iter().any(|r| r.principal == principal) {
            return Err(semantic(
                pos,
                None,
                format!("role of `{principal}` is overridden twice"),
            ));
        }
        let session = if p.is_keyword("session") {
            p.next();
            Some(p.ident()?)
        } else {
            None
        };
        p.expect(Tok::LBrace)?;
        let mut dirs = Vec::new();
        let mut terms = Vec::new();
        while *p.peek() != Tok::RBrace {
            let dir = if p.is_keyword("recv") {
                Direction::Recv
            } else if p.is_keyword("send") {
                Direction::Send
            } else {
                return p.err(format!("expected `recv` or `send`, found {}", p.peek()));
            };
            p.next();
            if p.eat(&Tok::Dash) {
                p.eat(&Tok::Semi);
                continue;
            }
            let t = p.term(Names::AllowVariables)?;
            p.eat(&Tok::Semi);
            dirs.push(dir);
            terms.push(t);
        }
        p.expect(Tok::RBrace)?;
        unify_variable_sorts(&mut terms, pos)?;
        role_overrides.push(RoleOverride {
            principal,
            session,
            events: dirs.into_iter().zip(terms).collect(),
        });
    }
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after protocol body", p.peek()));
    }

    let context = build_context(&decls, steps.len() as u32)
        .map_err(|e| semantic(Pos { line: 1, col: 1 }, None, e.to_string()))?;
    let diags = context.validate();
    if let Some(d) = diags.first() {
        let pos = locate_decl(&decls, &decl_pos, &d.to_string());
        return Err(semantic(pos, None, d.to_string()));
    }
    check_freshness(&context, &steps, &step_pos)?;

    Ok(ProtocolSpec {
        name,
        decls,
        steps,
        context,
        role_overrides,
    })
}

fn locate_decl(decls: &[Decl], positions: &[Pos], diagnostic: &str) -> Pos {
    decls
        .iter()
        .zip(positions)
        .find(|(d, _)| {
            let name = match d {
                Decl::Agents(_) => return false,
                Decl::Key { name, .. } | Decl::Nonce { name, .. } | Decl::Const { name, .. } => {
                    name
                }
            };
            diagnostic.contains(&format!("`{name}`")) || diagnostic.contains(&format!("{name} ->"))
        })
        .map(|(_, p)| *p)
        .unwrap_or_else(|| {
            positions
                .first()
                .copied()
                .unwrap_or(Pos { line: 1, col: 1 })
        })
}

fn check_freshness(ctx: &Context, steps: &[Step], positions: &[Pos]) -> Result<(), DslError> {
    let mut seen = BTreeSet::new();
    for (step, pos) in steps.iter().zip(positions) {
        for a in atoms(&step.message, true) {
            if !seen.insert(a.base.clone()) {
                continue;
            }
            let Some(f) = ctx.freshness(&a.base) else {
                continue;
            };
            if step.number < f.step {
                return Err(semantic(
                    *pos,
                    Some(step.number),
                    format!("`{}` is used before its creating step {}", a.base, f.step),
                ));
            }
            if step.sender != f.creator {
                return Err(semantic(
                    *pos,
                    Some(step.number),
                    format!(
                        "`{}` is first sent by `{}` but created by `{}`",
                        a.base, step.sender, f.creator
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Builds the verification context described by `decls`.
pub fn build_context(
    decls: &[Decl],
    step_count: u32,
) -> Result<Context, crate::lattice::LatticeError> {
    let mut b = Context::builder().step_count(step_count);
    for d in decls {
        b = match d {
            Decl::Agents(a) => b.agents(a.iter().cloned()),
            Decl::Key {
                name,
                readers,
                inverse,
                level,
                fresh,
            } => b.key(
                name.clone(),
                KeySpec {
                    readers: readers.level(),
                    level: level.clone(),
                    inverse: inverse.clone(),
                    fresh: fresh.clone(),
                },
            ),
            Decl::Nonce { name, level, fresh } => {
                b.nonce(name.clone(), level.clone(), fresh.clone())
            }
            Decl::Const { name, level } => b.constant(name.clone(), level.clone()),
        };
    }
    b.build()
}

// ---------------------------------------------------------------------------
// printer

fn write_fresh(out: &mut String, f: &Option<Freshness>) {
    if let Some(f) = f {
        let _ = write!(out, " fresh by {} at {}", f.creator, f.step);
    }
}

/// Canonical text of `spec`: declarations in order, then steps, then role
/// overrides. `parse(&print(&s))` equals `s`.
pub fn print(spec: &ProtocolSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "protocol {};", spec.name);
    for d in &spec.decls {
        match d {
            Decl::Agents(a) => {
                let _ = writeln!(out, "agents {};", a.join(", "));
            }
            Decl::Key {
                name,
                readers,
                inverse,
                level,
                fresh,
            } => {
                let _ = write!(out, "key {name}");
                match readers {
                    KeyReaders::Shared(a) => {
                        let _ = write!(out, " shared({})", a.join(","));
                    }
                    KeyReaders::Readers(a) => {
                        let _ = write!(out, " readers({})", a.join(","));
                    }
                    KeyReaders::Public => out.push_str(" public"),
                }
                if let Some(i) = inverse {
                    let _ = write!(out, " inverse {i}");
                }
                if let Some(l) = level {
                    let _ = write!(out, " level {l}");
                }
                write_fresh(&mut out, fresh);
                out.push_str(";\n");
            }
            Decl::Nonce { name, level, fresh } => {
                let _ = write!(out, "nonce {name}");
                if let Some(l) = level {
                    let _ = write!(out, " level {l}");
                }
                write_fresh(&mut out, fresh);
                out.push_str(";\n");
            }
            Decl::Const { name, level } => {
                let _ = write!(out, "const {name}");
                if let Some(l) = level {
                    let _ = write!(out, " level {l}");
                }
                out.push_str(";\n");
            }
        }
    }
    out.push_str("steps {\n");
    for s in &spec.steps {
        let _ = writeln!(
            out,
            "  {}. {} -> {} : {}",
            s.number, s.sender, s.receiver, s.message
        );
    }
    out.push_str("}\n");
    for r in &spec.role_overrides {
        let _ = write!(out, "roles override {}", r.principal);
        if let Some(s) = &r.session {
            let _ = write!(out, " session {s}");
        }
        out.push_str(" {\n");
        for (dir, t) in &r.events {
            let _ = writeln!(out, "  {dir} {}", t.annotated());
        }
        out.push_str("}\n");
    }
    out
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}
