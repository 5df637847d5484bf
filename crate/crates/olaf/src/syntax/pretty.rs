//! Printer for the core concrete syntax. `parse ∘ print` is the identity up
//! to alpha-equivalence on source programs; runtime-only forms (`reset`,
//! `cont`, operation values tagged by the machine) print for inspection but
//! are rejected by the parser.

use std::fmt::Write;

use super::*;

pub fn print_term(t: &Term) -> String {
    let mut p = Printer::new();
    p.term(t);
    p.out
}

pub fn print_type(t: &TypeExpr) -> String {
    let mut p = Printer::new();
    p.ty(t);
    p.out
}

pub fn print_sig(s: &OpSignature) -> String {
    let mut p = Printer::new();
    p.sig(s);
    p.out
}

pub fn print_program(prog: &Program) -> String {
    let mut p = Printer::new();
    for (name, def) in &prog.interfaces.entries {
        p.push("interface ");
        p.push(name);
        p.push("[");
        for (i, a) in def.effect_params.iter().enumerate() {
            if i > 0 {
                p.push(", ");
            }
            p.push(&a.name);
        }
        p.push("] = ");
        p.sig(&def.sig);
        p.push("\n");
    }
    write!(p.out, "region {} ", prog.main_label).unwrap();
    p.block(&prog.main);
    p.push("\n");
    p.out
}

/// A shallow one-line rendering for trace output, truncated at `depth`.
pub fn summarize_term(t: &Term, depth: usize) -> String {
    if depth == 0 {
        return "…".to_string();
    }
    let d = depth - 1;
    match &t.kind {
        TermK::Var(x) => x.name.clone(),
        TermK::Unit => "()".to_string(),
        TermK::Fix(f) => format!("fix {} : {} @ {} {{…}}", f.self_var, f.iface.name, f.life),
        TermK::Op(o) => match &o.iface_name {
            Some(n) => format!("opval<{}> @ {}", n, o.life),
            None => format!("opval @ {}", o.life),
        },
        TermK::Cont(_) => "cont{…}".to_string(),
        TermK::Unroll(s) => format!("unroll {}", summarize_term(s, d)),
        TermK::EApp(s, es) => format!("{}[{}]", summarize_term(s, d), es),
        TermK::LApp(s, l) => format!("{}[{}]", summarize_term(s, d), l),
        TermK::App(f, a) => format!("{}({})", summarize_term(f, d), summarize_term(a, d)),
        TermK::Region(l, s) => format!("region {} {{ {} }}", l, summarize_term(s, d)),
        TermK::Up(s) => format!("raise {}", summarize_term(s, d)),
        TermK::Let(x, s, _) => format!("let {} = {} in …", x, summarize_term(s, d)),
        TermK::Throw(f, a) => format!(
            "throw({}, {})",
            summarize_term(f, d),
            summarize_term(a, d)
        ),
        TermK::Reset(l, s) => format!("reset {} {{ {} }}", l, summarize_term(s, d)),
    }
}

struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn new() -> Printer {
        Printer { out: String::new(), indent: 0 }
    }

    fn push(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    fn term(&mut self, t: &Term) {
        match &t.kind {
            TermK::Let(x, s, body) => {
                self.push("let ");
                self.push(&x.name);
                self.push(" = ");
                self.term_inline(s);
                self.push(" in");
                self.newline();
                self.term(body);
            }
            _ => self.prefix(t),
        }
    }

    /// A term in a position where a multi-line `let` chain would be noisy.
    fn term_inline(&mut self, t: &Term) {
        match &t.kind {
            TermK::Let(..) => {
                self.push("(");
                self.indent += 1;
                self.newline();
                self.term(t);
                self.indent -= 1;
                self.newline();
                self.push(")");
            }
            _ => self.prefix(t),
        }
    }

    fn prefix(&mut self, t: &Term) {
        match &t.kind {
            TermK::Unroll(s) => {
                self.push("unroll ");
                self.prefix(s);
            }
            TermK::Up(s) => {
                self.push("raise ");
                self.prefix(s);
            }
            _ => self.postfix(t),
        }
    }

    fn postfix(&mut self, t: &Term) {
        match &t.kind {
            TermK::EApp(s, es) => {
                self.postfix(s);
                self.push("[");
                self.effs(es);
                self.push("]");
            }
            TermK::LApp(s, l) => {
                self.postfix(s);
                self.push("[");
                self.life(l);
                self.push("]");
            }
            TermK::App(f, a) => {
                self.postfix(f);
                self.push("(");
                self.term_inline(a);
                self.push(")");
            }
            _ => self.atom(t),
        }
    }

    fn atom(&mut self, t: &Term) {
        match &t.kind {
            TermK::Var(x) => self.push(&x.name),
            TermK::Unit => self.push("()"),
            TermK::Fix(f) => {
                self.push("fix ");
                self.push(&f.self_var.name);
                self.push(" : ");
                self.push(&f.iface.name);
                self.push("[");
                for (i, a) in f.iface.args.iter().enumerate() {
                    if i > 0 {
                        self.push(", ");
                    }
                    self.effs(a);
                }
                self.push("] @ ");
                self.life(&f.life);
                self.push(" ");
                self.body_block(&f.body);
            }
            TermK::Op(o) => {
                self.push("opval : ");
                self.sig(&o.sig);
                self.push(" @ ");
                self.life(&o.life);
                self.push(" ");
                self.body_block(&o.body);
            }
            TermK::Cont(c) => {
                self.push("cont{");
                self.ctx(&c.ctx);
                self.push("}");
            }
            TermK::Region(l, s) => {
                write!(self.out, "region {} ", l).unwrap();
                self.block(s);
            }
            TermK::Reset(l, s) => {
                write!(self.out, "reset {} ", l).unwrap();
                self.block(s);
            }
            TermK::Throw(f, a) => {
                self.push("throw(");
                self.term_inline(f);
                self.push(", ");
                self.term_inline(a);
                self.push(")");
            }
            TermK::Let(..) | TermK::Unroll(_) | TermK::Up(_) | TermK::EApp(..)
            | TermK::LApp(..) | TermK::App(..) => {
                self.push("(");
                if matches!(t.kind, TermK::Let(..)) {
                    self.indent += 1;
                    self.newline();
                    self.term(t);
                    self.indent -= 1;
                    self.newline();
                } else {
                    self.term(t);
                }
                self.push(")");
            }
        }
    }

    fn block(&mut self, t: &Term) {
        self.push("{");
        self.indent += 1;
        self.newline();
        self.term(t);
        self.indent -= 1;
        self.newline();
        self.push("}");
    }

    fn body_block(&mut self, m: &OpBody) {
        self.push("{");
        self.indent += 1;
        self.newline();
        self.body(m);
        self.indent -= 1;
        self.newline();
        self.push("}");
    }

    fn body(&mut self, m: &OpBody) {
        match m {
            OpBody::ELam(a, b) => {
                self.push("eff ");
                self.push(&a.name);
                self.push(" . ");
                self.body(b);
            }
            OpBody::LLam(p, b) => {
                self.push("life '");
                self.push(&p.name);
                self.push(" . ");
                self.body(b);
            }
            OpBody::VLam(x, b) => {
                self.push("fn ");
                self.push(&x.name);
                self.push(" . ");
                self.body(b);
            }
            OpBody::KLam(k, t) => {
                self.push("resume ");
                self.push(&k.name);
                self.push(" .");
                self.indent += 1;
                self.newline();
                self.term(t);
                self.indent -= 1;
            }
        }
    }

    fn sig(&mut self, s: &OpSignature) {
        match s {
            OpSignature::ForallEffect(a, b) => {
                self.push("eff ");
                self.push(&a.name);
                self.push(" . ");
                self.sig(b);
            }
            OpSignature::ForallLife(p, b) => {
                self.push("life '");
                self.push(&p.name);
                self.push(" . ");
                self.sig(b);
            }
            OpSignature::Arrow(t, b) => {
                self.ty(t);
                self.push(" -> ");
                self.sig(b);
            }
            OpSignature::Result(t, es) => {
                self.ty(t);
                self.push(" ! ");
                self.effs_braced(es);
            }
        }
    }

    fn ty(&mut self, t: &TypeExpr) {
        match t {
            TypeExpr::Unit => self.push("unit"),
            TypeExpr::Iface { name, args, life } => {
                self.push(name);
                self.push("[");
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.push(", ");
                    }
                    self.effs_braced(a);
                }
                self.push("] @ ");
                self.life(life);
            }
            TypeExpr::Op { sig, life } => {
                self.push("op(");
                self.sig(sig);
                self.push(") @ ");
                self.life(life);
            }
            TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
                self.push("cont(");
                self.ty(in_ty);
                self.push(" ! ");
                self.effs_braced(in_eff);
                self.push(" => ");
                self.ty(out_ty);
                self.push(" ! ");
                self.effs_braced(out_eff);
                self.push(")");
            }
        }
    }

    fn effs(&mut self, es: &EffectSet) {
        self.effs_braced(es)
    }

    fn effs_braced(&mut self, es: &EffectSet) {
        self.push("{");
        for (i, e) in es.iter().enumerate() {
            if i > 0 {
                self.push(", ");
            }
            match e {
                AtomicEffect::Var(x) => self.push(&x.name),
                AtomicEffect::Life(l) => self.life(l),
            }
        }
        self.push("}");
    }

    fn life(&mut self, l: &Lifetime) {
        match l {
            Lifetime::Var(x) => {
                self.push("'");
                self.push(&x.name);
            }
            Lifetime::Label(lbl) => write!(self.out, "{}", lbl).unwrap(),
        }
    }

    fn ctx(&mut self, e: &EvalCtx) {
        let t = plug(e, Term::var(Ident::new("#", u32::MAX)));
        self.term(&t);
    }
}
