//! Parser for the core concrete syntax (`.olaf` files).
//!
//! The grammar is bijective with the printer in `syntax::pretty` up to
//! alpha-equivalence. Runtime-only forms (`reset`, `cont`) are rejected with a
//! dedicated diagnostic.

use std::collections::HashMap;
use std::sync::Arc;

use crate::syntax::*;

#[derive(Debug, Clone, thiserror::Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub msg: String,
    pub line: u32,
    pub col: u32,
}

type PResult<T> = Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LifeVar(String),
    Label(u32),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Dot,
    Comma,
    Colon,
    Bang,
    At,
    Arrow,
    DArrow,
    Eq,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{}`", s),
            Tok::LifeVar(s) => write!(f, "`'{}`", s),
            Tok::Label(n) => write!(f, "`L{}`", n),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::At => write!(f, "`@`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::DArrow => write!(f, "`=>`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer;

impl Lexer {
    fn lex(src: &str) -> PResult<Vec<(Tok, Span)>> {
        let mut toks = Vec::new();
        let mut line: u32 = 1;
        let mut col: u32 = 1;
        let mut chars = src.chars().peekable();
        while let Some(&c) = chars.peek() {
            let span = Span::new(line, col);
            let advance = |chars: &mut std::iter::Peekable<std::str::Chars>,
                               line: &mut u32,
                               col: &mut u32| {
                let c = chars.next().unwrap();
                if c == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
                c
            };
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    advance(&mut chars, &mut line, &mut col);
                }
                '/' => {
                    advance(&mut chars, &mut line, &mut col);
                    if chars.peek() == Some(&'/') {
                        while let Some(&c2) = chars.peek() {
                            if c2 == '\n' {
                                break;
                            }
                            advance(&mut chars, &mut line, &mut col);
                        }
                    } else {
                        return Err(ParseError {
                            msg: "unexpected `/`".into(),
                            line: span.line,
                            col: span.col,
                        });
                    }
                }
                '(' | ')' | '{' | '}' | '[' | ']' | '.' | ',' | ':' | '!' | '@' => {
                    advance(&mut chars, &mut line, &mut col);
                    let t = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '.' => Tok::Dot,
                        ',' => Tok::Comma,
                        ':' => Tok::Colon,
                        '!' => Tok::Bang,
                        _ => Tok::At,
                    };
                    toks.push((t, span));
                }
                '-' => {
                    advance(&mut chars, &mut line, &mut col);
                    if chars.peek() == Some(&'>') {
                        advance(&mut chars, &mut line, &mut col);
                        toks.push((Tok::Arrow, span));
                    } else {
                        return Err(ParseError {
                            msg: "expected `->`".into(),
                            line: span.line,
                            col: span.col,
                        });
                    }
                }
                '=' => {
                    advance(&mut chars, &mut line, &mut col);
                    if chars.peek() == Some(&'>') {
                        advance(&mut chars, &mut line, &mut col);
                        toks.push((Tok::DArrow, span));
                    } else {
                        toks.push((Tok::Eq, span));
                    }
                }
                '\'' => {
                    advance(&mut chars, &mut line, &mut col);
                    let mut name = String::new();
                    while let Some(&c2) = chars.peek() {
                        if c2.is_alphanumeric() || c2 == '_' {
                            name.push(advance(&mut chars, &mut line, &mut col));
                        } else {
                            break;
                        }
                    }
                    if name.is_empty() {
                        return Err(ParseError {
                            msg: "expected lifetime variable after `'`".into(),
                            line: span.line,
                            col: span.col,
                        });
                    }
                    toks.push((Tok::LifeVar(name), span));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    while let Some(&c2) = chars.peek() {
                        if c2.is_alphanumeric() || c2 == '_' {
                            name.push(advance(&mut chars, &mut line, &mut col));
                        } else {
                            break;
                        }
                    }
                    if let Some(rest) = name.strip_prefix('L') {
                        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                            toks.push((Tok::Label(rest.parse().unwrap()), span));
                            continue;
                        }
                    }
                    toks.push((Tok::Ident(name), span));
                }
                other => {
                    return Err(ParseError {
                        msg: format!("unexpected character `{}`", other),
                        line: span.line,
                        col: span.col,
                    });
                }
            }
        }
        toks.push((Tok::Eof, Span::new(line, col)));
        Ok(toks)
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    next_id: u32,
    term_scope: Vec<Ident>,
    eff_scope: Vec<Ident>,
    life_scope: Vec<Ident>,
    free_names: HashMap<(String, u8), Ident>,
}

const NS_TERM: u8 = 0;
const NS_EFF: u8 = 1;
const NS_LIFE: u8 = 2;

impl Parser {
    fn new(toks: Vec<(Tok, Span)>) -> Parser {
        Parser {
            toks,
            pos: 0,
            next_id: 1,
            term_scope: Vec::new(),
            eff_scope: Vec::new(),
            life_scope: Vec::new(),
            free_names: HashMap::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }


    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = self.span();
        Err(ParseError { msg: msg.into(), line: s.line, col: s.col })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {}, found {}", t, self.peek()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => self.err(format!("expected `{}`, found {}", kw, other)),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident_name(&mut self) -> PResult<String> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            other => {
                self.pos -= 1;
                self.err(format!("expected identifier, found {}", other))
            }
        }
    }

    fn fresh(&mut self, name: String) -> Ident {
        let id = self.next_id;
        self.next_id += 1;
        Ident::new(name, id)
    }

    fn bind_term(&mut self, name: String) -> Ident {
        let x = self.fresh(name);
        self.term_scope.push(x.clone());
        x
    }

    fn bind_eff(&mut self, name: String) -> Ident {
        let x = self.fresh(name);
        self.eff_scope.push(x.clone());
        x
    }

    fn bind_life(&mut self, name: String) -> Ident {
        let x = self.fresh(name);
        self.life_scope.push(x.clone());
        x
    }

    fn resolve(&mut self, name: &str, ns: u8) -> Ident {
        let scope = match ns {
            NS_TERM => &self.term_scope,
            NS_EFF => &self.eff_scope,
            _ => &self.life_scope,
        };
        if let Some(x) = scope.iter().rev().find(|x| x.name == name) {
            return x.clone();
        }
        // Unbound names parse as free identifiers so the checker can report
        // them; repeated occurrences share one id.
        if let Some(x) = self.free_names.get(&(name.to_string(), ns)) {
            return x.clone();
        }
        let x = self.fresh(name.to_string());
        self.free_names.insert((name.to_string(), ns), x.clone());
        x
    }

    // -- types and signatures -------------------------------------------

    fn lifetime(&mut self) -> PResult<Lifetime> {
        match self.bump() {
            Tok::LifeVar(n) => Ok(Lifetime::Var(self.resolve(&n, NS_LIFE))),
            Tok::Label(n) => Ok(Lifetime::Label(Label(n))),
            other => {
                self.pos -= 1;
                self.err(format!("expected lifetime, found {}", other))
            }
        }
    }

    fn effset(&mut self) -> PResult<EffectSet> {
        self.expect(Tok::LBrace)?;
        let mut elems = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                match self.peek().clone() {
                    Tok::Ident(n) => {
                        self.bump();
                        elems.push(AtomicEffect::Var(self.resolve(&n, NS_EFF)));
                    }
                    Tok::LifeVar(_) | Tok::Label(_) => {
                        let l = self.lifetime()?;
                        elems.push(AtomicEffect::Life(l));
                    }
                    other => return self.err(format!("expected effect, found {}", other)),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(EffectSet::from_vec(elems))
    }

    fn ty(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "unit" => {
                self.bump();
                Ok(TypeExpr::Unit)
            }
            Tok::Ident(s) if s == "op" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let sig = self.sig()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::At)?;
                let life = self.lifetime()?;
                Ok(TypeExpr::Op { sig: Box::new(sig), life })
            }
            Tok::Ident(s) if s == "cont" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let in_ty = self.ty()?;
                self.expect(Tok::Bang)?;
                let in_eff = self.effset()?;
                self.expect(Tok::DArrow)?;
                let out_ty = self.ty()?;
                self.expect(Tok::Bang)?;
                let out_eff = self.effset()?;
                self.expect(Tok::RParen)?;
                Ok(TypeExpr::Cont {
                    in_ty: Box::new(in_ty),
                    in_eff,
                    out_ty: Box::new(out_ty),
                    out_eff,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                let args = self.iface_args()?;
                self.expect(Tok::At)?;
                let life = self.lifetime()?;
                Ok(TypeExpr::Iface { name, args, life })
            }
            other => self.err(format!("expected type, found {}", other)),
        }
    }

    fn iface_args(&mut self) -> PResult<Vec<EffectSet>> {
        self.expect(Tok::LBracket)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                args.push(self.effset()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(args)
    }

    fn sig(&mut self) -> PResult<OpSignature> {
        if self.at_kw("eff") {
            self.bump();
            let name = self.ident_name()?;
            let var = self.bind_eff(name);
            self.expect(Tok::Dot)?;
            let body = self.sig()?;
            self.eff_scope.pop();
            return Ok(OpSignature::ForallEffect(var, Box::new(body)));
        }
        if self.at_kw("life") {
            self.bump();
            let name = match self.bump() {
                Tok::LifeVar(n) => n,
                other => {
                    self.pos -= 1;
                    return self.err(format!("expected lifetime variable, found {}", other));
                }
            };
            let var = self.bind_life(name);
            self.expect(Tok::Dot)?;
            let body = self.sig()?;
            self.life_scope.pop();
            return Ok(OpSignature::ForallLife(var, Box::new(body)));
        }
        let t = self.ty()?;
        match self.bump() {
            Tok::Arrow => {
                let rest = self.sig()?;
                Ok(OpSignature::Arrow(Box::new(t), Box::new(rest)))
            }
            Tok::Bang => {
                self.pos -= 1;
                self.expect(Tok::Bang)?;
                let es = self.effset()?;
                Ok(OpSignature::Result(Box::new(t), es))
            }
            other => {
                self.pos -= 1;
                self.err(format!("expected `->` or `!` in signature, found {}", other))
            }
        }
    }

    // -- terms -----------------------------------------------------------

    fn term(&mut self) -> PResult<Term> {
        let span = self.span();
        if self.at_kw("let") {
            self.bump();
            let name = self.ident_name()?;
            self.expect(Tok::Eq)?;
            let bound = self.term()?;
            self.expect_kw("in")?;
            let var = self.bind_term(name);
            let body = self.term()?;
            self.term_scope.pop();
            return Ok(Term::at(
                TermK::Let(var, Arc::new(bound), Arc::new(body)),
                span,
            ));
        }
        self.prefix_term()
    }

    fn prefix_term(&mut self) -> PResult<Term> {
        let span = self.span();
        if self.at_kw("unroll") {
            self.bump();
            let s = self.prefix_term()?;
            return Ok(Term::at(TermK::Unroll(Arc::new(s)), span));
        }
        if self.at_kw("raise") {
            self.bump();
            let s = self.prefix_term()?;
            return Ok(Term::at(TermK::Up(Arc::new(s)), span));
        }
        self.postfix_term()
    }

    fn postfix_term(&mut self) -> PResult<Term> {
        let mut t = self.atom_term()?;
        loop {
            let span = self.span();
            match self.peek() {
                Tok::LBracket => {
                    self.bump();
                    if *self.peek() == Tok::LBrace {
                        let es = self.effset()?;
                        self.expect(Tok::RBracket)?;
                        t = Term::at(TermK::EApp(Arc::new(t), es), span);
                    } else {
                        let l = self.lifetime()?;
                        self.expect(Tok::RBracket)?;
                        t = Term::at(TermK::LApp(Arc::new(t), l), span);
                    }
                }
                Tok::LParen => {
                    self.bump();
                    if *self.peek() == Tok::RParen {
                        self.bump();
                        t = Term::at(TermK::App(Arc::new(t), Arc::new(Term::unit())), span);
                    } else {
                        let arg = self.term()?;
                        self.expect(Tok::RParen)?;
                        t = Term::at(TermK::App(Arc::new(t), Arc::new(arg)), span);
                    }
                }
                _ => break,
            }
        }
        Ok(t)
    }

    fn atom_term(&mut self) -> PResult<Term> {
        let span = self.span();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(Term::at(TermK::Unit, span));
                }
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "region" => {
                self.bump();
                let l = match self.bump() {
                    Tok::Label(n) => Label(n),
                    other => {
                        self.pos -= 1;
                        return self.err(format!("expected label, found {}", other));
                    }
                };
                self.expect(Tok::LBrace)?;
                let body = self.term()?;
                self.expect(Tok::RBrace)?;
                Ok(Term::at(TermK::Region(l, Arc::new(body)), span))
            }
            Tok::Ident(s) if s == "reset" => {
                self.err("`reset` is a runtime-only form and cannot appear in source programs")
            }
            Tok::Ident(s) if s == "cont" => {
                self.err("`cont` is a runtime-only form and cannot appear in source programs")
            }
            Tok::Ident(s) if s == "throw" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let subj = self.term()?;
                self.expect(Tok::Comma)?;
                let arg = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Term::at(
                    TermK::Throw(Arc::new(subj), Arc::new(arg)),
                    span,
                ))
            }
            Tok::Ident(s) if s == "fix" => {
                self.bump();
                let self_name = self.ident_name()?;
                self.expect(Tok::Colon)?;
                let iface_name = self.ident_name()?;
                let args = self.iface_args()?;
                self.expect(Tok::At)?;
                let life = self.lifetime()?;
                let self_var = self.bind_term(self_name);
                self.expect(Tok::LBrace)?;
                let body = self.op_body()?;
                self.expect(Tok::RBrace)?;
                self.term_scope.pop();
                Ok(Term::at(
                    TermK::Fix(FixV {
                        self_var,
                        iface: IfaceRef { name: iface_name, args },
                        body,
                        life,
                    }),
                    span,
                ))
            }
            Tok::Ident(s) if s == "opval" => {
                self.bump();
                self.expect(Tok::Colon)?;
                let sig = self.sig()?;
                self.expect(Tok::At)?;
                let life = self.lifetime()?;
                self.expect(Tok::LBrace)?;
                let body = self.op_body()?;
                self.expect(Tok::RBrace)?;
                Ok(Term::at(
                    TermK::Op(OpV { sig, body, life, iface_name: None }),
                    span,
                ))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Term::at(TermK::Var(self.resolve(&name, NS_TERM)), span))
            }
            other => self.err(format!("expected term, found {}", other)),
        }
    }

    fn op_body(&mut self) -> PResult<OpBody> {
        if self.at_kw("eff") {
            self.bump();
            let name = self.ident_name()?;
            let var = self.bind_eff(name);
            self.expect(Tok::Dot)?;
            let body = self.op_body()?;
            self.eff_scope.pop();
            return Ok(OpBody::ELam(var, Arc::new(body)));
        }
        if self.at_kw("life") {
            self.bump();
            let name = match self.bump() {
                Tok::LifeVar(n) => n,
                other => {
                    self.pos -= 1;
                    return self.err(format!("expected lifetime variable, found {}", other));
                }
            };
            let var = self.bind_life(name);
            self.expect(Tok::Dot)?;
            let body = self.op_body()?;
            self.life_scope.pop();
            return Ok(OpBody::LLam(var, Arc::new(body)));
        }
        if self.at_kw("fn") {
            self.bump();
            let name = self.ident_name()?;
            let var = self.bind_term(name);
            self.expect(Tok::Dot)?;
            let body = self.op_body()?;
            self.term_scope.pop();
            return Ok(OpBody::VLam(var, Arc::new(body)));
        }
        if self.at_kw("resume") {
            self.bump();
            let name = self.ident_name()?;
            let var = self.bind_term(name);
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            self.term_scope.pop();
            return Ok(OpBody::KLam(var, Arc::new(body)));
        }
        self.err(format!(
            "expected operation body (`eff`, `life`, `fn`, or `resume`), found {}",
            self.peek()
        ))
    }

    // -- programs ---------------------------------------------------------

    fn program(&mut self) -> PResult<Program> {
        let mut interfaces = InterfaceTable::new();
        while self.at_kw("interface") {
            self.bump();
            let name = self.ident_name()?;
            self.expect(Tok::LBracket)?;
            let mut params = Vec::new();
            if *self.peek() != Tok::RBracket {
                loop {
                    let pname = self.ident_name()?;
                    params.push(self.bind_eff(pname));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Eq)?;
            let sig = self.sig()?;
            for _ in 0..params.len() {
                self.eff_scope.pop();
            }
            if interfaces.get(&name).is_some() {
                return self.err(format!("duplicate interface `{}`", name));
            }
            interfaces.insert(name, InterfaceDef { effect_params: params, sig });
        }
        self.expect_kw("region")?;
        let main_label = match self.bump() {
            Tok::Label(n) => Label(n),
            other => {
                self.pos -= 1;
                return self.err(format!("expected label, found {}", other));
            }
        };
        self.expect(Tok::LBrace)?;
        let main = self.term()?;
        self.expect(Tok::RBrace)?;
        if *self.peek() != Tok::Eof {
            return self.err(format!("unexpected {} after program end", self.peek()));
        }
        Ok(Program { interfaces, main_label, main: Arc::new(main) })
    }
}

/// Parses a whole core program.
pub fn parse_program(src: &str) -> PResult<Program> {
    let toks = Lexer::lex(src)?;
    Parser::new(toks).program()
}

/// Parses a single core term against an empty scope (used by tests).
pub fn parse_term(src: &str) -> PResult<Term> {
    let toks = Lexer::lex(src)?;
    let mut p = Parser::new(toks);
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after term end", p.peek()));
    }
    Ok(t)
}
