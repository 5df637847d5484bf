//! The type-and-effect system: well-formedness, subtyping, subeffecting, term
//! typing, and evaluation-context typing.
//!
//! The checker is algorithmic: it synthesizes minimal types and effects and
//! applies subsumption at elimination sites (application arguments, throw
//! operands, resumption-body results). Typing a resumption parameter needs the
//! signature of its region label, which for a source region is the synthesized
//! type of the region's own body; those checks are deferred as obligations and
//! discharged once every region has completed, so no region ascriptions are
//! required in source programs.
//!
//! Runtime mode additionally types `reset` delimiters and reified
//! continuations against the machine's label signatures. Source checking is
//! exactly the declarative system.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::syntax::subst::*;
use crate::syntax::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    UnboundVar,
    UnboundLabel,
    ArityMismatch,
    NotAnOperation,
    NotAContinuation,
    EffectEscape,
    SubtypeFailure,
    SubeffectFailure,
    IllFormedType,
    SelfTypeMismatch,
    ResumeTypeMismatch,
}

impl std::fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ErrorCode::UnboundVar => "UnboundVar",
            ErrorCode::UnboundLabel => "UnboundLabel",
            ErrorCode::ArityMismatch => "ArityMismatch",
            ErrorCode::NotAnOperation => "NotAnOperation",
            ErrorCode::NotAContinuation => "NotAContinuation",
            ErrorCode::EffectEscape => "EffectEscape",
            ErrorCode::SubtypeFailure => "SubtypeFailure",
            ErrorCode::SubeffectFailure => "SubeffectFailure",
            ErrorCode::IllFormedType => "IllFormedType",
            ErrorCode::SelfTypeMismatch => "SelfTypeMismatch",
            ErrorCode::ResumeTypeMismatch => "ResumeTypeMismatch",
        };
        write!(f, "{}", s)
    }
}

/// A rejection with exactly one primary code, the violated rule, and a span.
#[derive(Debug, Clone, thiserror::Error)]
#[error("error[{code}] at {span} — {detail} (rule: {rule})")]
pub struct TypeError {
    pub code: ErrorCode,
    pub span: Span,
    pub rule: &'static str,
    pub detail: String,
}

impl TypeError {
    fn new(code: ErrorCode, span: Span, rule: &'static str, detail: impl Into<String>) -> TypeError {
        TypeError { code, span, rule, detail: detail.into() }
    }

    /// Machine-readable rendering used behind the CLI `--json` flag.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "code": self.code.to_string(),
            "line": self.span.line,
            "col": self.span.col,
            "rule": self.rule,
            "detail": self.detail,
        })
    }
}

type TResult<T> = Result<T, TypeError>;

/// The signature `T ! ε` recorded for a region label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSig {
    pub ty: TypeExpr,
    pub eff: EffectSet,
}

/// The four binding contexts. Interfaces live on the `Checker`.
#[derive(Debug, Clone, Default)]
pub struct TypingEnv {
    pub effect_vars: Vec<Ident>,
    pub life_vars: Vec<Ident>,
    pub term_vars: Vec<(Ident, TypeExpr)>,
    /// In-scope labels in binding order (a telescope).
    pub labels: Vec<Label>,
}

impl TypingEnv {
    pub fn empty() -> TypingEnv {
        TypingEnv::default()
    }

    fn lookup_term(&self, x: &Ident) -> Option<&TypeExpr> {
        self.term_vars.iter().rev().find(|(y, _)| y.id == x.id).map(|(_, t)| t)
    }

    fn has_effect_var(&self, x: &Ident) -> bool {
        self.effect_vars.iter().any(|y| y.id == x.id)
    }

    fn has_life_var(&self, x: &Ident) -> bool {
        self.life_vars.iter().any(|y| y.id == x.id)
    }

    fn has_label(&self, l: Label) -> bool {
        self.labels.contains(&l)
    }
}

/// A resumption-typing check deferred until its region's signature is known.
struct Obligation {
    env: TypingEnv,
    resume_var: Ident,
    body: Arc<Term>,
    label: Label,
    in_ty: TypeExpr,
    in_eff: EffectSet,
    span: Span,
}

#[derive(Debug, Clone)]
pub struct TypingResult {
    pub ty: TypeExpr,
    pub eff: EffectSet,
}

pub struct Checker<'a> {
    interfaces: &'a InterfaceTable,
    /// Signatures of completed (or machine-generated) labels.
    store: HashMap<Label, LabelSig>,
    obligations: VecDeque<Obligation>,
    /// Accepts runtime-only forms (`reset`, generated labels) when set.
    runtime: bool,
    next_label: u32,
}

impl<'a> Checker<'a> {
    pub fn new(interfaces: &'a InterfaceTable) -> Checker<'a> {
        Checker {
            interfaces,
            store: HashMap::new(),
            obligations: VecDeque::new(),
            runtime: false,
            next_label: 0,
        }
    }

    /// A checker for machine states: `label_sigs` holds the signature recorded
    /// for every label generated so far.
    pub fn new_runtime(
        interfaces: &'a InterfaceTable,
        label_sigs: &HashMap<Label, LabelSig>,
    ) -> Checker<'a> {
        let mut c = Checker::new(interfaces);
        c.runtime = true;
        c.store = label_sigs.clone();
        c
    }

    fn fresh_label(&mut self) -> Label {
        let l = Label(self.next_label);
        self.next_label += 1;
        l
    }

    /// Type-checks a whole program: the main term wrapped in its region must
    /// synthesize a type with empty effects.
    pub fn check_program(prog: &Program) -> TResult<TypingResult> {
        let mut checker = Checker::new(&prog.interfaces);
        let main = prog.main_term();
        let mut labels = HashSet::new();
        labels_in_term(&main, &mut labels);
        checker.next_label = labels.iter().map(|l| l.0 + 1).max().unwrap_or(0);
        let mut env = TypingEnv::empty();
        let res = checker.infer(&mut env, &main)?;
        checker.drain_obligations()?;
        Ok(res)
    }

    /// Type-checks a term; used directly by tests and by preservation checking.
    pub fn check_term(&mut self, env: &mut TypingEnv, t: &Term) -> TResult<TypingResult> {
        let mut labels = HashSet::new();
        labels_in_term(t, &mut labels);
        let floor = labels.iter().map(|l| l.0 + 1).max().unwrap_or(0);
        self.next_label = self.next_label.max(floor);
        if self.runtime {
            let mut known: Vec<Label> = self.store.keys().copied().collect();
            known.sort();
            for l in known {
                if !env.has_label(l) {
                    env.labels.push(l);
                }
            }
        }
        let res = self.infer(env, t)?;
        self.drain_obligations()?;
        Ok(res)
    }

    /// Re-infers the signature a region redex installs for its fresh label:
    /// the synthesized type and effects of the body, minus the bound label.
    pub fn region_signature(&mut self, env: &mut TypingEnv, t: &Term) -> TResult<LabelSig> {
        match &t.kind {
            TermK::Region(l, body) => {
                let (sig, _) = self.check_region(env, *l, body, t.span)?;
                self.drain_obligations()?;
                Ok(sig)
            }
            _ => Err(TypeError::new(
                ErrorCode::IllFormedType,
                t.span,
                "t-down",
                "expected a region term",
            )),
        }
    }

    fn drain_obligations(&mut self) -> TResult<()> {
        while let Some(ob) = self.obligations.pop_front() {
            let out = match self.store.get(&ob.label) {
                Some(sig) => sig.clone(),
                None => {
                    return Err(TypeError::new(
                        ErrorCode::UnboundLabel,
                        ob.span,
                        "t-klam",
                        format!("no signature recorded for label {}", ob.label),
                    ))
                }
            };
            let mut env = ob.env;
            let k_ty = TypeExpr::Cont {
                in_ty: Box::new(ob.in_ty.clone()),
                in_eff: ob.in_eff.insert(AtomicEffect::Life(Lifetime::Label(ob.label))),
                out_ty: Box::new(out.ty.clone()),
                out_eff: out.eff.clone(),
            };
            env.term_vars.push((ob.resume_var.clone(), k_ty));
            let res = self.infer(&mut env, &ob.body)?;
            if !self.sub_type(&env, &res.ty, &out.ty) {
                return Err(TypeError::new(
                    ErrorCode::ResumeTypeMismatch,
                    ob.body.span,
                    "t-klam",
                    format!(
                        "operation body has type {} but the handler's region requires {}",
                        pretty::print_type(&res.ty),
                        pretty::print_type(&out.ty)
                    ),
                ));
            }
            if !self.sub_effect(&env, &res.eff, &out.eff) {
                return Err(TypeError::new(
                    ErrorCode::ResumeTypeMismatch,
                    ob.body.span,
                    "t-klam",
                    format!(
                        "operation body has effects {} but the handler's region admits {}",
                        res.eff, out.eff
                    ),
                ));
            }
        }
        Ok(())
    }

    // -- well-formedness ---------------------------------------------------

    pub fn wf_life(&self, env: &TypingEnv, l: &Lifetime, span: Span) -> TResult<()> {
        match l {
            Lifetime::Var(x) => {
                if env.has_life_var(x) {
                    Ok(())
                } else {
                    Err(TypeError::new(
                        ErrorCode::IllFormedType,
                        span,
                        "wf-life",
                        format!("lifetime variable '{} is not in scope", x.name),
                    ))
                }
            }
            Lifetime::Label(lbl) => {
                if env.has_label(*lbl) {
                    Ok(())
                } else {
                    Err(TypeError::new(
                        ErrorCode::UnboundLabel,
                        span,
                        "wf-life",
                        format!("label {} is not in scope", lbl),
                    ))
                }
            }
        }
    }

    pub fn wf_effs(&self, env: &TypingEnv, es: &EffectSet, span: Span) -> TResult<()> {
        for e in es.iter() {
            match e {
                AtomicEffect::Var(x) => {
                    if !env.has_effect_var(x) {
                        return Err(TypeError::new(
                            ErrorCode::IllFormedType,
                            span,
                            "wf-eff",
                            format!("effect variable {} is not in scope", x.name),
                        ));
                    }
                }
                AtomicEffect::Life(l) => self.wf_life(env, l, span)?,
            }
        }
        Ok(())
    }

    pub fn wf_type(&self, env: &TypingEnv, ty: &TypeExpr, span: Span) -> TResult<()> {
        match ty {
            TypeExpr::Unit => Ok(()),
            TypeExpr::Iface { name, args, life } => {
                let def = self.interfaces.get(name).ok_or_else(|| {
                    TypeError::new(
                        ErrorCode::IllFormedType,
                        span,
                        "wf-ty",
                        format!("interface {} is not declared", name),
                    )
                })?;
                if def.effect_params.len() != args.len() {
                    return Err(TypeError::new(
                        ErrorCode::ArityMismatch,
                        span,
                        "wf-ty",
                        format!(
                            "interface {} expects {} effect arguments, got {}",
                            name,
                            def.effect_params.len(),
                            args.len()
                        ),
                    ));
                }
                for a in args {
                    self.wf_effs(env, a, span)?;
                }
                self.wf_life(env, life, span)
            }
            TypeExpr::Op { sig, life } => {
                self.wf_sig_in(env, sig, span)?;
                self.wf_life(env, life, span)
            }
            TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
                self.wf_type(env, in_ty, span)?;
                self.wf_effs(env, in_eff, span)?;
                self.wf_type(env, out_ty, span)?;
                self.wf_effs(env, out_eff, span)
            }
        }
    }

    fn wf_sig_in(&self, env: &TypingEnv, sig: &OpSignature, span: Span) -> TResult<()> {
        // Binder scopes are threaded through a scratch env clone.
        let mut env = env.clone();
        self.wf_sig_rec(&mut env, sig, span)
    }

    fn wf_sig_rec(&self, env: &mut TypingEnv, sig: &OpSignature, span: Span) -> TResult<()> {
        match sig {
            OpSignature::ForallEffect(a, b) => {
                env.effect_vars.push(a.clone());
                let r = self.wf_sig_rec(env, b, span);
                env.effect_vars.pop();
                r
            }
            OpSignature::ForallLife(p, b) => {
                env.life_vars.push(p.clone());
                let r = self.wf_sig_rec(env, b, span);
                env.life_vars.pop();
                r
            }
            OpSignature::Arrow(t, b) => {
                self.wf_type(env, t, span)?;
                self.wf_sig_rec(env, b, span)
            }
            OpSignature::Result(t, es) => {
                self.wf_type(env, t, span)?;
                self.wf_effs(env, es, span)
            }
        }
    }

    /// Environment well-formedness: every label-signature and term binding is
    /// well-formed under the bindings preceding it, and no label signature
    /// mentions its own key.
    pub fn wf_env(&self, env: &TypingEnv) -> TResult<()> {
        for (i, l) in env.labels.iter().enumerate() {
            if let Some(sig) = self.store.get(l) {
                let prefix = TypingEnv {
                    effect_vars: env.effect_vars.clone(),
                    life_vars: env.life_vars.clone(),
                    term_vars: Vec::new(),
                    labels: env.labels[..i].to_vec(),
                };
                self.wf_type(&prefix, &sig.ty, Span::SYNTH)?;
                self.wf_effs(&prefix, &sig.eff, Span::SYNTH)?;
                let mut mentioned = HashSet::new();
                labels_in_type(&sig.ty, &mut mentioned);
                labels_in_effs(&sig.eff, &mut mentioned);
                if mentioned.contains(l) {
                    return Err(TypeError::new(
                        ErrorCode::IllFormedType,
                        Span::SYNTH,
                        "wf-lenv",
                        format!("signature of label {} mentions the label itself", l),
                    ));
                }
            }
        }
        for (x, t) in &env.term_vars {
            self.wf_type(env, t, Span::SYNTH).map_err(|mut e| {
                e.detail = format!("binding {}: {}", x.name, e.detail);
                e.rule = "wf-tmenv";
                e
            })?;
        }
        Ok(())
    }

    // -- subtyping and subeffecting -----------------------------------------

    /// Subeffecting: subset inclusion.
    pub fn sub_effect(&self, _env: &TypingEnv, e1: &EffectSet, e2: &EffectSet) -> bool {
        e1.subset_of(e2)
    }

    pub fn sub_type(&self, env: &TypingEnv, t1: &TypeExpr, t2: &TypeExpr) -> bool {
        match (t1, t2) {
            (TypeExpr::Unit, TypeExpr::Unit) => true,
            (
                TypeExpr::Iface { name: n1, args: a1, life: l1 },
                TypeExpr::Iface { name: n2, args: a2, life: l2 },
            ) => n1 == n2 && a1 == a2 && l1 == l2,
            (TypeExpr::Op { sig: s1, life: l1 }, TypeExpr::Op { sig: s2, life: l2 }) => {
                l1 == l2 && self.sub_sig(env, s1, s2)
            }
            (
                TypeExpr::Cont { in_ty: i1, in_eff: ie1, out_ty: o1, out_eff: oe1 },
                TypeExpr::Cont { in_ty: i2, in_eff: ie2, out_ty: o2, out_eff: oe2 },
            ) => {
                self.sub_type(env, i2, i1)
                    && self.sub_effect(env, ie2, ie1)
                    && self.sub_type(env, o1, o2)
                    && self.sub_effect(env, oe1, oe2)
            }
            _ => false,
        }
    }

    pub fn sub_sig(&self, env: &TypingEnv, s1: &OpSignature, s2: &OpSignature) -> bool {
        match (s1, s2) {
            (OpSignature::ForallEffect(a1, b1), OpSignature::ForallEffect(a2, b2)) => {
                let b2r = if a1.id == a2.id {
                    (**b2).clone()
                } else {
                    subst_effect_sig(b2, a2, &EffectSet::singleton(AtomicEffect::Var(a1.clone())))
                };
                self.sub_sig(env, b1, &b2r)
            }
            (OpSignature::ForallLife(p1, b1), OpSignature::ForallLife(p2, b2)) => {
                let b2r = if p1.id == p2.id {
                    (**b2).clone()
                } else {
                    subst_life_sig(b2, p2, &Lifetime::Var(p1.clone()))
                };
                self.sub_sig(env, b1, &b2r)
            }
            (OpSignature::Arrow(t1, b1), OpSignature::Arrow(t2, b2)) => {
                self.sub_type(env, t2, t1) && self.sub_sig(env, b1, b2)
            }
            (OpSignature::Result(t1, e1), OpSignature::Result(t2, e2)) => {
                self.sub_type(env, t1, t2) && self.sub_effect(env, e1, e2)
            }
            _ => false,
        }
    }

    // -- term typing ---------------------------------------------------------

    pub fn infer(&mut self, env: &mut TypingEnv, t: &Term) -> TResult<TypingResult> {
        match &t.kind {
            TermK::Unit => Ok(TypingResult { ty: TypeExpr::Unit, eff: EffectSet::empty() }),
            TermK::Var(x) => match env.lookup_term(x) {
                Some(ty) => Ok(TypingResult { ty: ty.clone(), eff: EffectSet::empty() }),
                None => Err(TypeError::new(
                    ErrorCode::UnboundVar,
                    t.span,
                    "t-var",
                    format!("variable {} is not in scope", x.name),
                )),
            },
            TermK::Fix(fx) => {
                let def = self.interfaces.get(&fx.iface.name).ok_or_else(|| {
                    TypeError::new(
                        ErrorCode::IllFormedType,
                        t.span,
                        "t-fix",
                        format!("interface {} is not declared", fx.iface.name),
                    )
                })?;
                if def.effect_params.len() != fx.iface.args.len() {
                    return Err(TypeError::new(
                        ErrorCode::ArityMismatch,
                        t.span,
                        "t-fix",
                        format!(
                            "interface {} expects {} effect arguments, got {}",
                            fx.iface.name,
                            def.effect_params.len(),
                            fx.iface.args.len()
                        ),
                    ));
                }
                for a in &fx.iface.args {
                    self.wf_effs(env, a, t.span)?;
                }
                self.wf_life(env, &fx.life, t.span)?;
                let sig = instantiate_sig(&def.sig.clone(), &def.effect_params.clone(), &fx.iface.args);
                let self_ty = TypeExpr::Iface {
                    name: fx.iface.name.clone(),
                    args: fx.iface.args.clone(),
                    life: fx.life.clone(),
                };
                env.term_vars.push((fx.self_var.clone(), self_ty.clone()));
                let res = self.check_op_body(env, &fx.body, &sig, &fx.life, t.span);
                env.term_vars.pop();
                res?;
                Ok(TypingResult { ty: self_ty, eff: EffectSet::empty() })
            }
            TermK::Op(op) => {
                self.wf_sig_in(env, &op.sig, t.span)?;
                self.wf_life(env, &op.life, t.span)?;
                self.check_op_body(env, &op.body, &op.sig, &op.life, t.span)?;
                Ok(TypingResult {
                    ty: TypeExpr::Op { sig: Box::new(op.sig.clone()), life: op.life.clone() },
                    eff: EffectSet::empty(),
                })
            }
            TermK::Cont(c) => {
                self.wf_type(env, &c.in_ty, t.span)?;
                self.wf_effs(env, &c.in_eff, t.span)?;
                let (out_ty, out_eff) =
                    self.check_ctx(env, &c.ctx, c.in_ty.clone(), c.in_eff.clone(), t.span)?;
                Ok(TypingResult {
                    ty: TypeExpr::Cont {
                        in_ty: Box::new(c.in_ty.clone()),
                        in_eff: c.in_eff.clone(),
                        out_ty: Box::new(out_ty),
                        out_eff,
                    },
                    eff: EffectSet::empty(),
                })
            }
            TermK::Unroll(s) => {
                let sub = self.infer(env, s)?;
                match sub.ty {
                    TypeExpr::Iface { name, args, life } => {
                        let def = self.interfaces.get(&name).ok_or_else(|| {
                            TypeError::new(
                                ErrorCode::IllFormedType,
                                t.span,
                                "t-op",
                                format!("interface {} is not declared", name),
                            )
                        })?;
                        let sig =
                            instantiate_sig(&def.sig.clone(), &def.effect_params.clone(), &args);
                        Ok(TypingResult {
                            ty: TypeExpr::Op { sig: Box::new(sig), life },
                            eff: sub.eff,
                        })
                    }
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        t.span,
                        "t-op",
                        format!(
                            "unroll expects a handler of interface type, got {}",
                            pretty::print_type(&other)
                        ),
                    )),
                }
            }
            TermK::EApp(s, args) => {
                let sub = self.infer(env, s)?;
                self.wf_effs(env, args, t.span)?;
                match sub.ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::ForallEffect(a, body) => Ok(TypingResult {
                            ty: TypeExpr::Op {
                                sig: Box::new(subst_effect_sig(&body, &a, args)),
                                life,
                            },
                            eff: sub.eff,
                        }),
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            t.span,
                            "t-eapp",
                            format!(
                                "effect application expects an effect-polymorphic operation, got op({}) ",
                                pretty::print_sig(&other)
                            ),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        t.span,
                        "t-eapp",
                        format!("effect application expects an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            TermK::LApp(s, arg) => {
                let sub = self.infer(env, s)?;
                self.wf_life(env, arg, t.span)?;
                match sub.ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::ForallLife(p, body) => Ok(TypingResult {
                            ty: TypeExpr::Op {
                                sig: Box::new(subst_life_sig(&body, &p, arg)),
                                life,
                            },
                            eff: sub.eff,
                        }),
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            t.span,
                            "t-lapp",
                            format!(
                                "lifetime application expects a lifetime-polymorphic operation, got op({})",
                                pretty::print_sig(&other)
                            ),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        t.span,
                        "t-lapp",
                        format!("lifetime application expects an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            TermK::App(f, a) => {
                let fres = self.infer(env, f)?;
                match fres.ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::Arrow(param, body) => {
                            let ares = self.infer(env, a)?;
                            if !self.sub_type(env, &ares.ty, &param) {
                                return Err(TypeError::new(
                                    ErrorCode::SubtypeFailure,
                                    a.span,
                                    "t-app",
                                    format!(
                                        "argument has type {} but the operation expects {}",
                                        pretty::print_type(&ares.ty),
                                        pretty::print_type(&param)
                                    ),
                                ));
                            }
                            Ok(TypingResult {
                                ty: TypeExpr::Op { sig: body, life },
                                eff: fres.eff.union(&ares.eff),
                            })
                        }
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            t.span,
                            "t-app",
                            format!(
                                "application expects a value-taking operation, got op({})",
                                pretty::print_sig(&other)
                            ),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        t.span,
                        "t-app",
                        format!("application expects an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            TermK::Up(s) => {
                let sub = self.infer(env, s)?;
                match sub.ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::Result(ty, eff1) => {
                            let eff = eff1
                                .union(&sub.eff)
                                .insert(AtomicEffect::Life(life.clone()));
                            Ok(TypingResult { ty: *ty, eff })
                        }
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            t.span,
                            "t-up",
                            format!(
                                "raise expects a fully applied operation, got op({})",
                                pretty::print_sig(&other)
                            ),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        t.span,
                        "t-up",
                        format!("raise expects an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            TermK::Region(l, body) => {
                let (sig, _fresh) = self.check_region(env, *l, body, t.span)?;
                Ok(TypingResult { ty: sig.ty, eff: sig.eff })
            }
            TermK::Let(x, bound, body) => {
                let bres = self.infer(env, bound)?;
                env.term_vars.push((x.clone(), bres.ty));
                let res = self.infer(env, body);
                env.term_vars.pop();
                let res = res?;
                Ok(TypingResult { ty: res.ty, eff: bres.eff.union(&res.eff) })
            }
            TermK::Throw(subj, arg) => {
                let sres = self.infer(env, subj)?;
                match sres.ty {
                    TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
                        let ares = self.infer(env, arg)?;
                        if !self.sub_type(env, &ares.ty, &in_ty) {
                            return Err(TypeError::new(
                                ErrorCode::ResumeTypeMismatch,
                                arg.span,
                                "t-throw",
                                format!(
                                    "thrown computation has type {} but the continuation accepts {}",
                                    pretty::print_type(&ares.ty),
                                    pretty::print_type(&in_ty)
                                ),
                            ));
                        }
                        if !self.sub_effect(env, &ares.eff, &in_eff) {
                            return Err(TypeError::new(
                                ErrorCode::ResumeTypeMismatch,
                                arg.span,
                                "t-throw",
                                format!(
                                    "thrown computation has effects {} but the continuation admits {}",
                                    ares.eff, in_eff
                                ),
                            ));
                        }
                        if !self.sub_effect(env, &sres.eff, &out_eff) {
                            return Err(TypeError::new(
                                ErrorCode::SubeffectFailure,
                                subj.span,
                                "t-throw",
                                format!(
                                    "continuation subject has effects {} exceeding the output effects {}",
                                    sres.eff, out_eff
                                ),
                            ));
                        }
                        Ok(TypingResult { ty: *out_ty, eff: out_eff })
                    }
                    other => Err(TypeError::new(
                        ErrorCode::NotAContinuation,
                        t.span,
                        "t-throw",
                        format!("throw expects a continuation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            TermK::Reset(l, body) => {
                if !self.runtime {
                    return Err(TypeError::new(
                        ErrorCode::IllFormedType,
                        t.span,
                        "t-reset",
                        "reset is a runtime-only form",
                    ));
                }
                let sig = self.store.get(l).cloned().ok_or_else(|| {
                    TypeError::new(
                        ErrorCode::UnboundLabel,
                        t.span,
                        "t-reset",
                        format!("no signature recorded for label {}", l),
                    )
                })?;
                let bres = self.infer(env, body)?;
                if !self.sub_type(env, &bres.ty, &sig.ty) {
                    return Err(TypeError::new(
                        ErrorCode::SubtypeFailure,
                        body.span,
                        "t-reset",
                        format!(
                            "delimited body has type {} but the delimiter requires {}",
                            pretty::print_type(&bres.ty),
                            pretty::print_type(&sig.ty)
                        ),
                    ));
                }
                let allowed = sig.eff.insert(AtomicEffect::Life(Lifetime::Label(*l)));
                if !self.sub_effect(env, &bres.eff, &allowed) {
                    return Err(TypeError::new(
                        ErrorCode::SubeffectFailure,
                        body.span,
                        "t-reset",
                        format!(
                            "delimited body has effects {} exceeding {}",
                            bres.eff, allowed
                        ),
                    ));
                }
                Ok(TypingResult { ty: sig.ty, eff: sig.eff })
            }
        }
    }

    /// Types `region l { body }` (rule t-down): synthesizes the body under the
    /// extended label context, removes the label from the effects, and checks
    /// that the label does not escape through the type.
    fn check_region(
        &mut self,
        env: &mut TypingEnv,
        l: Label,
        body: &Arc<Term>,
        span: Span,
    ) -> TResult<(LabelSig, Label)> {
        // Region binders alpha-rename away from any label already in use so
        // the signature store stays keyed by distinct labels.
        let (l, body) = if env.has_label(l) || self.store.contains_key(&l) {
            let fresh = self.fresh_label();
            (fresh, Arc::new(subst_label(body, l, fresh)))
        } else {
            (l, body.clone())
        };
        env.labels.push(l);
        let res = self.infer(env, &body);
        env.labels.pop();
        let res = res?;
        let mut mentioned = HashSet::new();
        labels_in_type(&res.ty, &mut mentioned);
        if mentioned.contains(&l) {
            return Err(TypeError::new(
                ErrorCode::EffectEscape,
                span,
                "t-down side condition",
                format!(
                    "label {} must not occur free in the region's type {}",
                    l,
                    pretty::print_type(&res.ty)
                ),
            ));
        }
        let sig = LabelSig {
            ty: res.ty,
            eff: res.eff.remove(&AtomicEffect::Life(Lifetime::Label(l))),
        };
        self.store.insert(l, sig.clone());
        Ok((sig, l))
    }

    /// Checks an operation body against a signature at a given lifetime.
    /// Resumption bodies are deferred when the lifetime's region signature is
    /// not yet known.
    fn check_op_body(
        &mut self,
        env: &mut TypingEnv,
        body: &OpBody,
        sig: &OpSignature,
        life: &Lifetime,
        span: Span,
    ) -> TResult<()> {
        match (body, sig) {
            (OpBody::ELam(a, b), OpSignature::ForallEffect(a2, s2)) => {
                let s2 = if a.id == a2.id {
                    (**s2).clone()
                } else {
                    subst_effect_sig(s2, a2, &EffectSet::singleton(AtomicEffect::Var(a.clone())))
                };
                env.effect_vars.push(a.clone());
                let r = self.check_op_body(env, b, &s2, life, span);
                env.effect_vars.pop();
                r
            }
            (OpBody::LLam(p, b), OpSignature::ForallLife(p2, s2)) => {
                let s2 = if p.id == p2.id {
                    (**s2).clone()
                } else {
                    subst_life_sig(s2, p2, &Lifetime::Var(p.clone()))
                };
                env.life_vars.push(p.clone());
                let r = self.check_op_body(env, b, &s2, life, span);
                env.life_vars.pop();
                r
            }
            (OpBody::VLam(x, b), OpSignature::Arrow(ty, s2)) => {
                env.term_vars.push((x.clone(), (**ty).clone()));
                let r = self.check_op_body(env, b, s2, life, span);
                env.term_vars.pop();
                r
            }
            (OpBody::KLam(k, t), OpSignature::Result(ty, eff1)) => {
                let label = match life {
                    Lifetime::Label(l) => *l,
                    Lifetime::Var(x) => {
                        return Err(TypeError::new(
                            ErrorCode::UnboundLabel,
                            span,
                            "t-klam",
                            format!(
                                "resumption typing requires a label lifetime, got '{}",
                                x.name
                            ),
                        ))
                    }
                };
                if !env.has_label(label) {
                    return Err(TypeError::new(
                        ErrorCode::UnboundLabel,
                        span,
                        "t-klam",
                        format!("label {} is not in scope", label),
                    ));
                }
                if let Some(out) = self.store.get(&label).cloned() {
                    let k_ty = TypeExpr::Cont {
                        in_ty: ty.clone(),
                        in_eff: eff1.insert(AtomicEffect::Life(Lifetime::Label(label))),
                        out_ty: Box::new(out.ty.clone()),
                        out_eff: out.eff.clone(),
                    };
                    env.term_vars.push((k.clone(), k_ty));
                    let res = self.infer(env, t);
                    env.term_vars.pop();
                    let res = res?;
                    if !self.sub_type(env, &res.ty, &out.ty) {
                        return Err(TypeError::new(
                            ErrorCode::ResumeTypeMismatch,
                            t.span,
                            "t-klam",
                            format!(
                                "operation body has type {} but the handler's region requires {}",
                                pretty::print_type(&res.ty),
                                pretty::print_type(&out.ty)
                            ),
                        ));
                    }
                    if !self.sub_effect(env, &res.eff, &out.eff) {
                        return Err(TypeError::new(
                            ErrorCode::ResumeTypeMismatch,
                            t.span,
                            "t-klam",
                            format!(
                                "operation body has effects {} but the handler's region admits {}",
                                res.eff, out.eff
                            ),
                        ));
                    }
                } else {
                    self.obligations.push_back(Obligation {
                        env: env.clone(),
                        resume_var: k.clone(),
                        body: t.clone(),
                        label,
                        in_ty: (**ty).clone(),
                        in_eff: eff1.clone(),
                        span,
                    });
                }
                Ok(())
            }
            (b, s) => Err(TypeError::new(
                ErrorCode::SelfTypeMismatch,
                span,
                body_rule_name(b),
                format!(
                    "operation body shape does not match its signature {}",
                    pretty::print_sig(s)
                ),
            )),
        }
    }

    /// Types an evaluation context against a hole type and effect, returning
    /// the type and effect of the plugged whole.
    pub fn check_ctx(
        &mut self,
        env: &mut TypingEnv,
        ctx: &EvalCtx,
        hole_ty: TypeExpr,
        hole_eff: EffectSet,
        span: Span,
    ) -> TResult<(TypeExpr, EffectSet)> {
        match ctx {
            EvalCtx::Hole => Ok((hole_ty, hole_eff)),
            EvalCtx::Unroll(inner) => {
                let (ty, eff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                match ty {
                    TypeExpr::Iface { name, args, life } => {
                        let def = self.interfaces.get(&name).ok_or_else(|| {
                            TypeError::new(
                                ErrorCode::IllFormedType,
                                span,
                                "ktx-op",
                                format!("interface {} is not declared", name),
                            )
                        })?;
                        let sig =
                            instantiate_sig(&def.sig.clone(), &def.effect_params.clone(), &args);
                        Ok((TypeExpr::Op { sig: Box::new(sig), life }, eff))
                    }
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        span,
                        "ktx-op",
                        format!("unroll context expects an interface type, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            EvalCtx::EApp(inner, args) => {
                let (ty, eff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                self.wf_effs(env, args, span)?;
                match ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::ForallEffect(a, body) => Ok((
                            TypeExpr::Op {
                                sig: Box::new(subst_effect_sig(&body, &a, args)),
                                life,
                            },
                            eff,
                        )),
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            span,
                            "ktx-eapp",
                            format!("expected an effect-polymorphic operation, got op({})", pretty::print_sig(&other)),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        span,
                        "ktx-eapp",
                        format!("expected an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            EvalCtx::LApp(inner, arg) => {
                let (ty, eff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                self.wf_life(env, arg, span)?;
                match ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::ForallLife(p, body) => Ok((
                            TypeExpr::Op {
                                sig: Box::new(subst_life_sig(&body, &p, arg)),
                                life,
                            },
                            eff,
                        )),
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            span,
                            "ktx-lapp",
                            format!("expected a lifetime-polymorphic operation, got op({})", pretty::print_sig(&other)),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        span,
                        "ktx-lapp",
                        format!("expected an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            EvalCtx::AppFun(inner, arg) => {
                let (ty, eff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                match ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::Arrow(param, body) => {
                            let ares = self.infer(env, arg)?;
                            if !self.sub_type(env, &ares.ty, &param) {
                                return Err(TypeError::new(
                                    ErrorCode::SubtypeFailure,
                                    arg.span,
                                    "ktx-app",
                                    format!(
                                        "argument has type {} but the operation expects {}",
                                        pretty::print_type(&ares.ty),
                                        pretty::print_type(&param)
                                    ),
                                ));
                            }
                            Ok((TypeExpr::Op { sig: body, life }, eff.union(&ares.eff)))
                        }
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            span,
                            "ktx-app",
                            format!("expected a value-taking operation, got op({})", pretty::print_sig(&other)),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        span,
                        "ktx-app",
                        format!("expected an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            EvalCtx::AppArg(fun, inner) => {
                let fres = self.infer(env, fun)?;
                match fres.ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::Arrow(param, bodysig) => {
                            let (aty, aeff) =
                                self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                            if !self.sub_type(env, &aty, &param) {
                                return Err(TypeError::new(
                                    ErrorCode::SubtypeFailure,
                                    span,
                                    "ktx-arg",
                                    format!(
                                        "argument context produces {} but the operation expects {}",
                                        pretty::print_type(&aty),
                                        pretty::print_type(&param)
                                    ),
                                ));
                            }
                            Ok((TypeExpr::Op { sig: bodysig, life }, aeff))
                        }
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            span,
                            "ktx-arg",
                            format!("expected a value-taking operation, got op({})", pretty::print_sig(&other)),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        span,
                        "ktx-arg",
                        format!("expected an operation value, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            EvalCtx::Up(inner) => {
                let (ty, eff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                match ty {
                    TypeExpr::Op { sig, life } => match *sig {
                        OpSignature::Result(ty, eff1) => {
                            let eff = eff1.union(&eff).insert(AtomicEffect::Life(life));
                            Ok((*ty, eff))
                        }
                        other => Err(TypeError::new(
                            ErrorCode::NotAnOperation,
                            span,
                            "ktx-up",
                            format!("expected a fully applied operation, got op({})", pretty::print_sig(&other)),
                        )),
                    },
                    other => Err(TypeError::new(
                        ErrorCode::NotAnOperation,
                        span,
                        "ktx-up",
                        format!("expected an operation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            EvalCtx::Let(x, inner, body) => {
                let (bty, beff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                env.term_vars.push((x.clone(), bty));
                let res = self.infer(env, body);
                env.term_vars.pop();
                let res = res?;
                Ok((res.ty, beff.union(&res.eff)))
            }
            EvalCtx::Throw(inner, arg) => {
                let (ty, eff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                match ty {
                    TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
                        let ares = self.infer(env, arg)?;
                        if !self.sub_type(env, &ares.ty, &in_ty) {
                            return Err(TypeError::new(
                                ErrorCode::ResumeTypeMismatch,
                                arg.span,
                                "ktx-throw",
                                format!(
                                    "thrown computation has type {} but the continuation accepts {}",
                                    pretty::print_type(&ares.ty),
                                    pretty::print_type(&in_ty)
                                ),
                            ));
                        }
                        if !self.sub_effect(env, &ares.eff, &in_eff) {
                            return Err(TypeError::new(
                                ErrorCode::ResumeTypeMismatch,
                                arg.span,
                                "ktx-throw",
                                format!(
                                    "thrown computation has effects {} but the continuation admits {}",
                                    ares.eff, in_eff
                                ),
                            ));
                        }
                        if !self.sub_effect(env, &eff, &out_eff) {
                            return Err(TypeError::new(
                                ErrorCode::SubeffectFailure,
                                span,
                                "ktx-throw",
                                format!(
                                    "continuation-subject context has effects {} exceeding {}",
                                    eff, out_eff
                                ),
                            ));
                        }
                        Ok((*out_ty, out_eff))
                    }
                    other => Err(TypeError::new(
                        ErrorCode::NotAContinuation,
                        span,
                        "ktx-throw",
                        format!("expected a continuation, got {}", pretty::print_type(&other)),
                    )),
                }
            }
            EvalCtx::Reset(l, inner) => {
                if !self.runtime {
                    return Err(TypeError::new(
                        ErrorCode::IllFormedType,
                        span,
                        "ktx-reset",
                        "reset contexts are runtime-only",
                    ));
                }
                let sig = self.store.get(l).cloned().ok_or_else(|| {
                    TypeError::new(
                        ErrorCode::UnboundLabel,
                        span,
                        "ktx-reset",
                        format!("no signature recorded for label {}", l),
                    )
                })?;
                let (ty, eff) = self.check_ctx(env, inner, hole_ty, hole_eff, span)?;
                if !self.sub_type(env, &ty, &sig.ty) {
                    return Err(TypeError::new(
                        ErrorCode::SubtypeFailure,
                        span,
                        "ktx-reset",
                        format!(
                            "delimited context produces {} but the delimiter requires {}",
                            pretty::print_type(&ty),
                            pretty::print_type(&sig.ty)
                        ),
                    ));
                }
                let allowed = sig.eff.insert(AtomicEffect::Life(Lifetime::Label(*l)));
                if !self.sub_effect(env, &eff, &allowed) {
                    return Err(TypeError::new(
                        ErrorCode::SubeffectFailure,
                        span,
                        "ktx-reset",
                        format!("delimited context has effects {} exceeding {}", eff, allowed),
                    ));
                }
                Ok((sig.ty, sig.eff))
            }
        }
    }
}

fn body_rule_name(b: &OpBody) -> &'static str {
    match b {
        OpBody::ELam(..) => "t-elam",
        OpBody::LLam(..) => "t-llam",
        OpBody::VLam(..) => "t-lam",
        OpBody::KLam(..) => "t-klam",
    }
}

/// Substitutes effect arguments for an interface's effect parameters in its
/// operation signature.
pub fn instantiate_sig(sig: &OpSignature, params: &[Ident], args: &[EffectSet]) -> OpSignature {
    let mut out = sig.clone();
    for (p, a) in params.iter().zip(args) {
        out = subst_effect_sig(&out, p, a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_parse::{parse_program, parse_term};

    fn ping_table() -> InterfaceTable {
        let mut t = InterfaceTable::new();
        t.insert(
            "Ping",
            InterfaceDef {
                effect_params: vec![],
                sig: OpSignature::Arrow(
                    Box::new(TypeExpr::Unit),
                    Box::new(OpSignature::Result(Box::new(TypeExpr::Unit), EffectSet::empty())),
                ),
            },
        );
        t
    }

    #[test]
    fn wf_type_examples() {
        let table = ping_table();
        let checker = Checker::new(&table);
        let env = TypingEnv::empty();
        assert!(checker.wf_type(&env, &TypeExpr::Unit, Span::SYNTH).is_ok());

        let phi = Ident::new("p", 1);
        let mut env2 = TypingEnv::empty();
        env2.life_vars.push(phi.clone());
        let op_ty = TypeExpr::Op {
            sig: Box::new(OpSignature::Result(
                Box::new(TypeExpr::Unit),
                EffectSet::singleton(AtomicEffect::Life(Lifetime::Var(phi.clone()))),
            )),
            life: Lifetime::Var(phi),
        };
        assert!(checker.wf_type(&env2, &op_ty, Span::SYNTH).is_ok());

        // Unbound effect argument and label.
        let bad = TypeExpr::Iface {
            name: "Ping".into(),
            args: vec![],
            life: Lifetime::Label(Label(9)),
        };
        let err = checker.wf_type(&env, &bad, Span::SYNTH).unwrap_err();
        assert_eq!(err.code, ErrorCode::UnboundLabel);
    }

    #[test]
    fn sub_effect_is_subset() {
        let table = InterfaceTable::new();
        let checker = Checker::new(&table);
        let env = TypingEnv::empty();
        let l1 = EffectSet::of_label(Label(1));
        let l1a = l1.insert(AtomicEffect::Var(Ident::new("a", 1)));
        let a = EffectSet::singleton(AtomicEffect::Var(Ident::new("a", 1)));
        assert!(checker.sub_effect(&env, &l1, &l1a));
        assert!(checker.sub_effect(&env, &EffectSet::empty(), &a));
        assert!(!checker.sub_effect(&env, &a, &EffectSet::empty()));
    }

    #[test]
    fn sub_type_examples() {
        let table = InterfaceTable::new();
        let checker = Checker::new(&table);
        let env = TypingEnv::empty();
        assert!(checker.sub_type(&env, &TypeExpr::Unit, &TypeExpr::Unit));

        // Continuations: contravariant input, covariant output.
        let c1 = TypeExpr::Cont {
            in_ty: Box::new(TypeExpr::Unit),
            in_eff: EffectSet::from_vec(vec![
                AtomicEffect::Life(Lifetime::Label(Label(1))),
                AtomicEffect::Life(Lifetime::Label(Label(2))),
            ]),
            out_ty: Box::new(TypeExpr::Unit),
            out_eff: EffectSet::of_label(Label(3)),
        };
        let c2 = TypeExpr::Cont {
            in_ty: Box::new(TypeExpr::Unit),
            in_eff: EffectSet::of_label(Label(1)),
            out_ty: Box::new(TypeExpr::Unit),
            out_eff: EffectSet::from_vec(vec![
                AtomicEffect::Life(Lifetime::Label(Label(3))),
                AtomicEffect::Life(Lifetime::Label(Label(4))),
            ]),
        };
        assert!(checker.sub_type(&env, &c1, &c2));
        assert!(!checker.sub_type(&env, &c2, &c1));

        // Interface types are invariant in their effect arguments.
        let i1 = TypeExpr::Iface {
            name: "Ping".into(),
            args: vec![EffectSet::empty()],
            life: Lifetime::Label(Label(1)),
        };
        let i2 = TypeExpr::Iface {
            name: "Ping".into(),
            args: vec![EffectSet::singleton(AtomicEffect::Var(Ident::new("a", 1)))],
            life: Lifetime::Label(Label(1)),
        };
        assert!(!checker.sub_type(&env, &i1, &i2));
        assert!(checker.sub_type(&env, &i1, &i1));
    }

    #[test]
    fn check_term_examples() {
        let table = InterfaceTable::new();
        let mut checker = Checker::new(&table);
        let mut env = TypingEnv::empty();
        let res = checker.check_term(&mut env, &Term::unit()).unwrap();
        assert_eq!(res.ty, TypeExpr::Unit);
        assert!(res.eff.is_empty());

        // region with an unused label synthesizes (unit, {})
        let t = parse_term("region L1 { () }").unwrap();
        let res = checker.check_term(&mut env, &t).unwrap();
        assert_eq!(res.ty, TypeExpr::Unit);
        assert!(res.eff.is_empty());

        // unbound variable
        let t = parse_term("nope").unwrap();
        let err = checker.check_term(&mut env, &t).unwrap_err();
        assert_eq!(err.code, ErrorCode::UnboundVar);
    }

    #[test]
    fn region_label_escape_is_rejected() {
        // The region's value is a handler at the region's own label, so the
        // label occurs free in the region's type.
        let src = r#"
            interface Ping[] = unit -> unit ! {}
            region L0 {
                region L1 { fix s : Ping[] @ L1 { fn x . resume k . throw(k, ()) } }
            }
        "#;
        let prog = parse_program(src).unwrap();
        let err = Checker::check_program(&prog).unwrap_err();
        assert_eq!(err.code, ErrorCode::EffectEscape);
        assert_eq!(err.rule, "t-down side condition");
    }

    #[test]
    fn smoke_handler_program_typechecks() {
        let src = r#"
            interface Ping[] = unit -> unit ! {}
            region L0 {
                let h = fix s : Ping[] @ L0 { fn x . resume k . throw(k, ()) } in
                raise (unroll h)(())
            }
        "#;
        let prog = parse_program(src).unwrap();
        let res = Checker::check_program(&prog).unwrap();
        assert_eq!(res.ty, TypeExpr::Unit);
        assert!(res.eff.is_empty());
    }

    #[test]
    fn check_ctx_examples() {
        let table = InterfaceTable::new();
        let mut checker = Checker::new(&table);
        let mut env = TypingEnv::empty();
        let (ty, eff) = checker
            .check_ctx(&mut env, &EvalCtx::Hole, TypeExpr::Unit, EffectSet::empty(), Span::SYNTH)
            .unwrap();
        assert_eq!(ty, TypeExpr::Unit);
        assert!(eff.is_empty());

        // let x = [] in x, with a labelled hole effect
        let x = Ident::new("x", 1);
        let ctx = EvalCtx::Let(
            x.clone(),
            Arc::new(EvalCtx::Hole),
            Arc::new(Term::var(x)),
        );
        let mut env = TypingEnv::empty();
        env.labels.push(Label(1));
        let (ty, eff) = checker
            .check_ctx(&mut env, &ctx, TypeExpr::Unit, EffectSet::of_label(Label(1)), Span::SYNTH)
            .unwrap();
        assert_eq!(ty, TypeExpr::Unit);
        assert_eq!(eff, EffectSet::of_label(Label(1)));

        // applying a non-operation value to an argument context
        let ctx = EvalCtx::AppArg(Arc::new(Term::unit()), Arc::new(EvalCtx::Hole));
        let err = checker
            .check_ctx(&mut env, &ctx, TypeExpr::Unit, EffectSet::empty(), Span::SYNTH)
            .unwrap_err();
        assert_eq!(err.code, ErrorCode::NotAnOperation);
    }

    #[test]
    fn wf_env_examples() {
        let table = ping_table();
        let mut checker = Checker::new(&table);
        let env = TypingEnv::empty();
        assert!(checker.wf_env(&env).is_ok());

        let mut env = TypingEnv::empty();
        env.labels.push(Label(1));
        checker.store.insert(
            Label(1),
            LabelSig { ty: TypeExpr::Unit, eff: EffectSet::empty() },
        );
        env.term_vars.push((
            Ident::new("x", 1),
            TypeExpr::Iface { name: "Ping".into(), args: vec![], life: Lifetime::Label(Label(1)) },
        ));
        assert!(checker.wf_env(&env).is_ok());

        // An unbound lifetime variable in a binding type is rejected.
        let mut env = TypingEnv::empty();
        env.term_vars.push((
            Ident::new("x", 1),
            TypeExpr::Op {
                sig: Box::new(OpSignature::Result(
                    Box::new(TypeExpr::Unit),
                    EffectSet::singleton(AtomicEffect::Life(Lifetime::Var(Ident::new("p", 2)))),
                )),
                life: Lifetime::Var(Ident::new("p", 2)),
            },
        ));
        let err = checker.wf_env(&env).unwrap_err();
        assert_eq!(err.code, ErrorCode::IllFormedType);
    }
}
