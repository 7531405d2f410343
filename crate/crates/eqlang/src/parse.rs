//! Lexer and recursive-descent parser for programs, terms and proof
//! scripts. Application is juxtaposition and left-associative; `#` starts
//! a line comment; statements are `;`-terminated.

use num_bigint::BigInt;
use thiserror::Error;

use crate::signature::{DataDecl, Signature, Type};
use crate::term::{infer_type, Term, TypeEnv};

pub const KEYWORDS: [&str; 5] = ["data", "sig", "def", "case", "of"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Pipe,
    Colon,
    Arrow,
    Equals,
    EqEq,
    Int(BigInt),
    Lower(String),
    Upper(String),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::EqEq => write!(f, "`==`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let mut toks = Vec::new();
    let mut line = first_line;
    let mut col = 1;
    let mut chars = src.chars().peekable();
    macro_rules! err {
        ($($arg:tt)*) => {
            return Err(ParseError { line, col, message: format!($($arg)*) })
        };
    }
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| {
            toks.push(Token {
                tok,
                line: tline,
                col: tcol,
            })
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                push(Tok::LParen);
            }
            ')' => {
                chars.next();
                col += 1;
                push(Tok::RParen);
            }
            '{' => {
                chars.next();
                col += 1;
                push(Tok::LBrace);
            }
            '}' => {
                chars.next();
                col += 1;
                push(Tok::RBrace);
            }
            ',' => {
                chars.next();
                col += 1;
                push(Tok::Comma);
            }
            ';' => {
                chars.next();
                col += 1;
                push(Tok::Semi);
            }
            '|' => {
                chars.next();
                col += 1;
                push(Tok::Pipe);
            }
            ':' => {
                chars.next();
                col += 1;
                push(Tok::Colon);
            }
            '=' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push(Tok::EqEq);
                } else {
                    push(Tok::Equals);
                }
            }
            '-' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        col += 1;
                        push(Tok::Arrow);
                    }
                    Some(d) if d.is_ascii_digit() => {
                        let mut digits = String::from("-");
                        while let Some(&d) = chars.peek() {
                            if !d.is_ascii_digit() {
                                break;
                            }
                            digits.push(d);
                            chars.next();
                            col += 1;
                        }
                        push(Tok::Int(digits.parse().unwrap()));
                    }
                    _ => err!("stray `-` (expected `->` or a negative integer literal)"),
                }
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    digits.push(d);
                    chars.next();
                    col += 1;
                }
                push(Tok::Int(digits.parse().unwrap()));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    word.push(d);
                    chars.next();
                    col += 1;
                }
                if c.is_ascii_uppercase() {
                    push(Tok::Upper(word));
                } else {
                    push(Tok::Lower(word));
                }
            }
            c => err!("unexpected character `{c}`"),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end_line: usize,
}

impl Parser {
    fn new(src: &str, first_line: usize) -> Result<Parser, ParseError> {
        let toks = lex(src, first_line)?;
        let end_line = toks.last().map(|t| t.line).unwrap_or(first_line);
        Ok(Parser {
            toks,
            pos: 0,
            end_line,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or((self.end_line, 0))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => Err(self.error(format!("unexpected end of input, expected {what}"))),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let got = self.next(&want.to_string())?;
        if got == want {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.error(format!("expected {want}, found {got}")))
        }
    }

    fn lower(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next(what)? {
            Tok::Lower(s) if !KEYWORDS.contains(&s.as_str()) => Ok(s),
            got => {
                self.pos -= 1;
                Err(self.error(format!("expected {what}, found {got}")))
            }
        }
    }

    fn upper(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next(what)? {
            Tok::Upper(s) => Ok(s),
            got => {
                self.pos -= 1;
                Err(self.error(format!("expected {what}, found {got}")))
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::Upper(_)) | Some(Tok::LParen) => true,
            Some(Tok::Lower(s)) => s == "case" || !KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            acc = match acc {
                Term::App(h, mut args) => {
                    args.push(arg);
                    Term::App(h, args)
                }
                Term::Ctor(c, mut args) => {
                    args.push(arg);
                    Term::Ctor(c, args)
                }
                Term::Int(_) | Term::Case(..) => {
                    return Err(self.error("this term cannot be applied to an argument"))
                }
            };
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.next("a term")? {
            Tok::Int(n) => Ok(Term::Int(n)),
            Tok::Upper(c) => Ok(Term::Ctor(c, vec![])),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Lower(s) if s == "case" => self.case_tail(),
            Tok::Lower(s) if !KEYWORDS.contains(&s.as_str()) => Ok(Term::name(s)),
            got => {
                self.pos -= 1;
                Err(self.error(format!("expected a term, found {got}")))
            }
        }
    }

    fn case_tail(&mut self) -> Result<Term, ParseError> {
        let scrutinee = self.term()?;
        match self.next("`of`")? {
            Tok::Lower(s) if s == "of" => {}
            got => {
                self.pos -= 1;
                return Err(self.error(format!("expected `of`, found {got}")));
            }
        }
        self.expect(Tok::LBrace)?;
        let mut branches = Vec::new();
        loop {
            let ctor = self.upper("a constructor name")?;
            self.expect(Tok::Arrow)?;
            let body = self.term()?;
            branches.push((ctor, body));
            match self.next("`,` or `}`")? {
                Tok::Comma => continue,
                Tok::RBrace => break,
                got => {
                    self.pos -= 1;
                    return Err(self.error(format!("expected `,` or `}}`, found {got}")));
                }
            }
        }
        Ok(Term::case_of(scrutinee, branches))
    }

    /// Type syntax: a sequence of atoms optionally followed by an arrow and
    /// a ground result type; functional arguments are parenthesised.
    fn sig_type(&mut self) -> Result<Type, ParseError> {
        let mut atoms = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Lower(s)) if !KEYWORDS.contains(&s.as_str()) => {
                    let s = s.clone();
                    self.pos += 1;
                    atoms.push(Type::Ground(s));
                }
                Some(Tok::LParen) => {
                    self.pos += 1;
                    let t = self.sig_type()?;
                    self.expect(Tok::RParen)?;
                    atoms.push(t);
                }
                _ => break,
            }
        }
        if atoms.is_empty() {
            return Err(self.error("expected a type"));
        }
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let result = self.lower("a ground result type")?;
            Ok(Type::func(atoms, result))
        } else if atoms.len() == 1 {
            Ok(atoms.pop().unwrap())
        } else {
            Err(self.error("expected `->` after argument types"))
        }
    }
}

/// A raw program statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Data(DataDecl),
    Sig {
        name: String,
        ty: Type,
    },
    Def {
        name: String,
        params: Vec<String>,
        body: Term,
        line: usize,
    },
}

pub fn parse_statements(src: &str) -> Result<Vec<Stmt>, ParseError> {
    let mut p = Parser::new(src, 1)?;
    let mut stmts = Vec::new();
    while !p.at_end() {
        let (line, _) = p.here();
        let stmt = match p.next("`data`, `sig` or `def`")? {
            Tok::Lower(s) if s == "data" => {
                let name = p.lower("a type name")?;
                p.expect(Tok::Equals)?;
                let mut ctors = Vec::new();
                loop {
                    let ctor = p.upper("a constructor name")?;
                    let mut args = Vec::new();
                    while let Some(Tok::Lower(s)) = p.peek() {
                        if KEYWORDS.contains(&s.as_str()) {
                            break;
                        }
                        args.push(s.clone());
                        p.pos += 1;
                    }
                    ctors.push((ctor, args));
                    match p.next("`|` or `;`")? {
                        Tok::Pipe => continue,
                        Tok::Semi => break,
                        got => {
                            p.pos -= 1;
                            return Err(p.error(format!("expected `|` or `;`, found {got}")));
                        }
                    }
                }
                Stmt::Data(DataDecl { name, ctors })
            }
            Tok::Lower(s) if s == "sig" => {
                let name = p.lower("an equation name")?;
                p.expect(Tok::Colon)?;
                let ty = p.sig_type()?;
                p.expect(Tok::Semi)?;
                Stmt::Sig { name, ty }
            }
            Tok::Lower(s) if s == "def" => {
                let name = p.lower("an equation name")?;
                let mut params = Vec::new();
                while p.peek() != Some(&Tok::Equals) {
                    params.push(p.lower("a parameter name")?);
                }
                p.expect(Tok::Equals)?;
                let body = p.term()?;
                p.expect(Tok::Semi)?;
                Stmt::Def {
                    name,
                    params,
                    body,
                    line,
                }
            }
            got => {
                p.pos -= 1;
                return Err(p.error(format!("expected `data`, `sig` or `def`, found {got}")));
            }
        };
        stmts.push(stmt);
    }
    Ok(stmts)
}

/// Sort every case's branches into constructor-declaration order and
/// reject duplicate branch labels. Unknown labels are left for the type
/// checker to report.
pub fn canonicalize(t: &mut Term, sig: &Signature) -> Result<(), ParseError> {
    match t {
        Term::Int(_) => Ok(()),
        Term::Ctor(_, args) | Term::App(_, args) => {
            for a in args {
                canonicalize(a, sig)?;
            }
            Ok(())
        }
        Term::Case(scrutinee, branches) => {
            canonicalize(scrutinee, sig)?;
            for (_, b) in branches.iter_mut() {
                canonicalize(b, sig)?;
            }
            for (i, (c, _)) in branches.iter().enumerate() {
                if branches.iter().skip(i + 1).any(|(d, _)| d == c) {
                    return Err(ParseError {
                        line: 0,
                        col: 0,
                        message: format!("duplicate case branch for `{c}`"),
                    });
                }
            }
            branches.sort_by_key(|(c, _)| sig.ctor_order(c).unwrap_or(usize::MAX));
            Ok(())
        }
    }
}

/// Parse, canonicalise and type-check a single term.
pub fn parse_term(text: &str, env: &TypeEnv, sig: &Signature) -> Result<Term, crate::Error> {
    let mut t = parse_term_raw(text, 1)?;
    canonicalize(&mut t, sig)?;
    infer_type(&t, env, sig)?;
    Ok(t)
}

pub(crate) fn parse_term_raw(text: &str, first_line: usize) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, first_line)?;
    let t = p.term()?;
    if !p.at_end() {
        return Err(p.error("trailing input after term"));
    }
    Ok(t)
}

/// One line of a proof script, before checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptLine {
    Universal { name: String, ty: String },
    AssumeGrounded { name: String, value: Term },
    AssumeDefined { name: String },
    Step { rule: String, lhs: Term, rhs: Term },
    Conclude { lhs: Term, rhs: Term },
}

pub fn parse_script(src: &str) -> Result<Vec<(usize, ScriptLine)>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let lineno = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut p = Parser::new(text, lineno)?;
        let head = p.lower("`universal`, `assume`, `step` or `conclude`")?;
        let item = match head.as_str() {
            "universal" => {
                let name = p.lower("a universal name")?;
                p.expect(Tok::Colon)?;
                let ty = p.lower("a ground type name")?;
                ScriptLine::Universal { name, ty }
            }
            "assume" => match p.lower("`grounded` or `defined`")?.as_str() {
                "grounded" => {
                    let name = p.lower("a universal name")?;
                    p.expect(Tok::Equals)?;
                    let value = p.term()?;
                    ScriptLine::AssumeGrounded { name, value }
                }
                "defined" => ScriptLine::AssumeDefined {
                    name: p.lower("a universal name")?,
                },
                other => {
                    return Err(ParseError {
                        line: lineno,
                        col: 1,
                        message: format!("expected `grounded` or `defined`, found `{other}`"),
                    })
                }
            },
            "step" => {
                let rule = p.upper("a rule name")?;
                p.expect(Tok::Colon)?;
                let lhs = p.term()?;
                p.expect(Tok::EqEq)?;
                let rhs = p.term()?;
                ScriptLine::Step { rule, lhs, rhs }
            }
            "conclude" => {
                let lhs = p.term()?;
                p.expect(Tok::EqEq)?;
                let rhs = p.term()?;
                ScriptLine::Conclude { lhs, rhs }
            }
            other => {
                return Err(ParseError {
                    line: lineno,
                    col: 1,
                    message: format!(
                        "expected `universal`, `assume`, `step` or `conclude`, found `{other}`"
                    ),
                })
            }
        };
        if !p.at_end() {
            return Err(p.error("trailing input on script line"));
        }
        out.push((lineno, item));
    }
    Ok(out)
}

/// Entries of a custom core file: `core { Cons = strict(1) ; Pair = anyof }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreEntrySpec {
    StrictAll,
    StrictNone,
    StrictIn(Vec<usize>),
    AnyOf,
}

pub fn parse_core_entries(src: &str) -> Result<Vec<(String, CoreEntrySpec)>, ParseError> {
    let mut p = Parser::new(src, 1)?;
    match p.next("`core`")? {
        Tok::Lower(s) if s == "core" => {}
        got => {
            p.pos -= 1;
            return Err(p.error(format!("expected `core`, found {got}")));
        }
    }
    p.expect(Tok::LBrace)?;
    let mut entries = Vec::new();
    loop {
        if p.peek() == Some(&Tok::RBrace) {
            p.pos += 1;
            break;
        }
        let ctor = p.upper("a constructor name")?;
        p.expect(Tok::Equals)?;
        let spec = match p.next("`strict`, `anyof` or `lazy`")? {
            Tok::Lower(s) if s == "anyof" => CoreEntrySpec::AnyOf,
            Tok::Lower(s) if s == "lazy" => CoreEntrySpec::StrictNone,
            Tok::Lower(s) if s == "strict" => {
                p.expect(Tok::LParen)?;
                let spec = match p.next("`all` or argument positions")? {
                    Tok::Lower(s) if s == "all" => CoreEntrySpec::StrictAll,
                    Tok::Int(n) => {
                        let mut positions = vec![int_position(&p, n)?];
                        while p.peek() == Some(&Tok::Comma) {
                            p.pos += 1;
                            match p.next("an argument position")? {
                                Tok::Int(n) => positions.push(int_position(&p, n)?),
                                got => {
                                    p.pos -= 1;
                                    return Err(p.error(format!(
                                        "expected an argument position, found {got}"
                                    )));
                                }
                            }
                        }
                        CoreEntrySpec::StrictIn(positions)
                    }
                    got => {
                        p.pos -= 1;
                        return Err(p.error(format!("expected `all` or positions, found {got}")));
                    }
                };
                p.expect(Tok::RParen)?;
                spec
            }
            got => {
                p.pos -= 1;
                return Err(p.error(format!("expected `strict`, `anyof` or `lazy`, found {got}")));
            }
        };
        entries.push((ctor, spec));
        if p.peek() == Some(&Tok::Semi) {
            p.pos += 1;
        }
    }
    if !p.at_end() {
        return Err(p.error("trailing input after core block"));
    }
    Ok(entries)
}

fn int_position(p: &Parser, n: BigInt) -> Result<usize, ParseError> {
    use num_bigint::Sign;
    if n.sign() == Sign::Plus {
        if let Ok(i) = usize::try_from(u64::try_from(&n).unwrap_or(u64::MAX)) {
            return Ok(i);
        }
    }
    Err(p.error(format!(
        "argument position must be a positive integer, found {n}"
    )))
}
