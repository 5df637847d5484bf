//! Abstract syntax of the core language: terms, operation bodies, types,
//! signatures, effects, lifetimes, evaluation contexts, and programs.
//!
//! Effect sets are canonicalized (sorted, deduplicated) at construction so
//! structural equality coincides with set equality. Identifiers carry a
//! globally unique id assigned at parse time; binders are freshened during
//! substitution only when capture would occur.

pub mod alpha;
pub mod pretty;
pub mod subst;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A source position. Synthetic (machine-generated) syntax uses `Span::SYNTH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const SYNTH: Span = Span { line: 0, col: 0 };

    pub fn new(line: u32, col: u32) -> Span {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A named identifier with a unique id. Two identifiers are the same binding
/// occurrence iff their ids match; the name is kept for printing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ident {
    pub name: String,
    pub id: u32,
}

impl Ident {
    pub fn new(name: impl Into<String>, id: u32) -> Ident {
        Ident { name: name.into(), id }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// A lifetime label, allocated monotonically by the machine and written `L<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

/// A lifetime: either a lifetime variable or a lifetime label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lifetime {
    Var(Ident),
    Label(Label),
}

impl fmt::Display for Lifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifetime::Var(v) => write!(f, "'{}", v.name),
            Lifetime::Label(l) => write!(f, "{}", l),
        }
    }
}

/// An atomic effect: an effect variable or a lifetime.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomicEffect {
    Var(Ident),
    Life(Lifetime),
}

impl fmt::Display for AtomicEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicEffect::Var(v) => write!(f, "{}", v.name),
            AtomicEffect::Life(l) => write!(f, "{}", l),
        }
    }
}

/// A composite effect: a finite set of atomic effects. Kept sorted and
/// duplicate-free, so `==` is set equality and union is idempotent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EffectSet {
    elems: Vec<AtomicEffect>,
}

impl EffectSet {
    pub fn empty() -> EffectSet {
        EffectSet { elems: Vec::new() }
    }

    pub fn from_vec(mut elems: Vec<AtomicEffect>) -> EffectSet {
        elems.sort();
        elems.dedup();
        EffectSet { elems }
    }

    pub fn singleton(e: AtomicEffect) -> EffectSet {
        EffectSet { elems: vec![e] }
    }

    pub fn of_label(l: Label) -> EffectSet {
        EffectSet::singleton(AtomicEffect::Life(Lifetime::Label(l)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &AtomicEffect> {
        self.elems.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn contains(&self, e: &AtomicEffect) -> bool {
        self.elems.binary_search(e).is_ok()
    }

    pub fn union(&self, other: &EffectSet) -> EffectSet {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mut elems = self.elems.clone();
        elems.extend(other.elems.iter().cloned());
        EffectSet::from_vec(elems)
    }

    pub fn insert(&self, e: AtomicEffect) -> EffectSet {
        if self.contains(&e) {
            self.clone()
        } else {
            let mut elems = self.elems.clone();
            elems.push(e);
            EffectSet::from_vec(elems)
        }
    }

    pub fn remove(&self, e: &AtomicEffect) -> EffectSet {
        EffectSet {
            elems: self.elems.iter().filter(|x| *x != e).cloned().collect(),
        }
    }

    /// Subset test; the subeffecting relation is exactly this.
    pub fn subset_of(&self, other: &EffectSet) -> bool {
        self.elems.iter().all(|e| other.contains(e))
    }

    pub fn mentions_label(&self, l: Label) -> bool {
        self.contains(&AtomicEffect::Life(Lifetime::Label(l)))
    }
}

impl FromIterator<AtomicEffect> for EffectSet {
    fn from_iter<T: IntoIterator<Item = AtomicEffect>>(iter: T) -> Self {
        EffectSet::from_vec(iter.into_iter().collect())
    }
}

impl fmt::Display for EffectSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, "}}")
    }
}

/// An operation signature: zero or more effect/lifetime/value quantifiers
/// terminating in exactly one result node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpSignature {
    ForallEffect(Ident, Box<OpSignature>),
    ForallLife(Ident, Box<OpSignature>),
    Arrow(Box<TypeExpr>, Box<OpSignature>),
    Result(Box<TypeExpr>, EffectSet),
}

/// A type: unit, an interface type, an operation type, or a continuation type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExpr {
    Unit,
    Iface {
        name: String,
        args: Vec<EffectSet>,
        life: Lifetime,
    },
    Op {
        sig: Box<OpSignature>,
        life: Lifetime,
    },
    Cont {
        in_ty: Box<TypeExpr>,
        in_eff: EffectSet,
        out_ty: Box<TypeExpr>,
        out_eff: EffectSet,
    },
}

/// Reference to an interface at particular effect arguments; annotates `fix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfaceRef {
    pub name: String,
    pub args: Vec<EffectSet>,
}

/// An operation implementation. The final parameter is the handler resumption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpBody {
    ELam(Ident, Arc<OpBody>),
    LLam(Ident, Arc<OpBody>),
    VLam(Ident, Arc<OpBody>),
    KLam(Ident, Arc<Term>),
}

/// A fixpoint handler value `fix self : F[args] @ life { body }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixV {
    pub self_var: Ident,
    pub iface: IfaceRef,
    pub body: OpBody,
    pub life: Lifetime,
}

/// An operation value, annotated with its signature. `iface_name` records the
/// interface of the handler it was unrolled from, when known; invocations of
/// `Out_*` interfaces emit tokens to the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpV {
    pub sig: OpSignature,
    pub body: OpBody,
    pub life: Lifetime,
    pub iface_name: Option<String>,
}

/// A reified continuation. The input type and effect annotation is recorded by
/// the machine when the continuation is captured, so runtime terms can be
/// re-typechecked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContV {
    pub ctx: Arc<EvalCtx>,
    pub in_ty: TypeExpr,
    pub in_eff: EffectSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermK {
    Var(Ident),
    Unit,
    Fix(FixV),
    Op(OpV),
    Cont(ContV),
    Unroll(Arc<Term>),
    EApp(Arc<Term>, EffectSet),
    LApp(Arc<Term>, Lifetime),
    App(Arc<Term>, Arc<Term>),
    /// `region L { t }`: lexically binds the label L in t.
    Region(Label, Arc<Term>),
    Up(Arc<Term>),
    Let(Ident, Arc<Term>, Arc<Term>),
    Throw(Arc<Term>, Arc<Term>),
    /// Runtime-only stack delimiter; non-binding.
    Reset(Label, Arc<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub kind: TermK,
    pub span: Span,
}

impl Term {
    pub fn new(kind: TermK) -> Term {
        Term { kind, span: Span::SYNTH }
    }

    pub fn at(kind: TermK, span: Span) -> Term {
        Term { kind, span }
    }

    pub fn unit() -> Term {
        Term::new(TermK::Unit)
    }

    pub fn var(x: Ident) -> Term {
        Term::new(TermK::Var(x))
    }

    /// Values are exactly: variables, unit, fixpoint handlers, operation
    /// values, and continuations.
    pub fn is_value(&self) -> bool {
        matches!(
            self.kind,
            TermK::Var(_) | TermK::Unit | TermK::Fix(_) | TermK::Op(_) | TermK::Cont(_)
        )
    }
}

/// An evaluation context. The nested context is the part closer to the hole;
/// e.g. `Let(x, E, t)` is the context `let x = E in t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalCtx {
    Hole,
    Unroll(Arc<EvalCtx>),
    EApp(Arc<EvalCtx>, EffectSet),
    LApp(Arc<EvalCtx>, Lifetime),
    AppFun(Arc<EvalCtx>, Arc<Term>),
    AppArg(Arc<Term>, Arc<EvalCtx>),
    Up(Arc<EvalCtx>),
    Let(Ident, Arc<EvalCtx>, Arc<Term>),
    Throw(Arc<EvalCtx>, Arc<Term>),
    Reset(Label, Arc<EvalCtx>),
}

/// One layer of evaluation context. The machine works with a stack of frames;
/// `EvalCtx` is the reified recursive form used by continuation values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Unroll,
    EApp(EffectSet),
    LApp(Lifetime),
    AppFun(Arc<Term>),
    AppArg(Arc<Term>),
    Up,
    Let(Ident, Arc<Term>),
    Throw(Arc<Term>),
    Reset(Label),
}

impl Frame {
    pub fn plug(self, t: Term) -> Term {
        let t = Arc::new(t);
        Term::new(match self {
            Frame::Unroll => TermK::Unroll(t),
            Frame::EApp(es) => TermK::EApp(t, es),
            Frame::LApp(l) => TermK::LApp(t, l),
            Frame::AppFun(arg) => TermK::App(t, arg),
            Frame::AppArg(f) => TermK::App(f, t),
            Frame::Up => TermK::Up(t),
            Frame::Let(x, body) => TermK::Let(x, t, body),
            Frame::Throw(s) => TermK::Throw(t, s),
            Frame::Reset(l) => TermK::Reset(l, t),
        })
    }
}

/// Plugs a term into the hole of a context: E[t].
pub fn plug(ctx: &EvalCtx, t: Term) -> Term {
    match ctx {
        EvalCtx::Hole => t,
        EvalCtx::Unroll(e) => Term::new(TermK::Unroll(Arc::new(plug(e, t)))),
        EvalCtx::EApp(e, es) => Term::new(TermK::EApp(Arc::new(plug(e, t)), es.clone())),
        EvalCtx::LApp(e, l) => Term::new(TermK::LApp(Arc::new(plug(e, t)), l.clone())),
        EvalCtx::AppFun(e, s) => Term::new(TermK::App(Arc::new(plug(e, t)), s.clone())),
        EvalCtx::AppArg(v, e) => Term::new(TermK::App(v.clone(), Arc::new(plug(e, t)))),
        EvalCtx::Up(e) => Term::new(TermK::Up(Arc::new(plug(e, t)))),
        EvalCtx::Let(x, e, body) => {
            Term::new(TermK::Let(x.clone(), Arc::new(plug(e, t)), body.clone()))
        }
        EvalCtx::Throw(e, s) => Term::new(TermK::Throw(Arc::new(plug(e, t)), s.clone())),
        EvalCtx::Reset(l, e) => Term::new(TermK::Reset(*l, Arc::new(plug(e, t)))),
    }
}

/// Builds the reified context from a stack of frames. `frames[0]` is the
/// outermost frame.
pub fn ctx_of_frames(frames: &[Frame]) -> EvalCtx {
    let mut ctx = EvalCtx::Hole;
    for f in frames.iter().rev() {
        let inner = Arc::new(ctx);
        ctx = match f {
            Frame::Unroll => EvalCtx::Unroll(inner),
            Frame::EApp(es) => EvalCtx::EApp(inner, es.clone()),
            Frame::LApp(l) => EvalCtx::LApp(inner, l.clone()),
            Frame::AppFun(arg) => EvalCtx::AppFun(inner, arg.clone()),
            Frame::AppArg(v) => EvalCtx::AppArg(v.clone(), inner),
            Frame::Up => EvalCtx::Up(inner),
            Frame::Let(x, body) => EvalCtx::Let(x.clone(), inner, body.clone()),
            Frame::Throw(s) => EvalCtx::Throw(inner, s.clone()),
            Frame::Reset(l) => EvalCtx::Reset(*l, inner),
        };
    }
    ctx
}

/// Flattens a reified context into a frame stack, outermost first.
pub fn frames_of_ctx(ctx: &EvalCtx) -> Vec<Frame> {
    let mut frames = Vec::new();
    let mut cur = ctx;
    loop {
        match cur {
            EvalCtx::Hole => break,
            EvalCtx::Unroll(e) => {
                frames.push(Frame::Unroll);
                cur = e;
            }
            EvalCtx::EApp(e, es) => {
                frames.push(Frame::EApp(es.clone()));
                cur = e;
            }
            EvalCtx::LApp(e, l) => {
                frames.push(Frame::LApp(l.clone()));
                cur = e;
            }
            EvalCtx::AppFun(e, s) => {
                frames.push(Frame::AppFun(s.clone()));
                cur = e;
            }
            EvalCtx::AppArg(v, e) => {
                frames.push(Frame::AppArg(v.clone()));
                cur = e;
            }
            EvalCtx::Up(e) => {
                frames.push(Frame::Up);
                cur = e;
            }
            EvalCtx::Let(x, e, body) => {
                frames.push(Frame::Let(x.clone(), body.clone()));
                cur = e;
            }
            EvalCtx::Throw(e, s) => {
                frames.push(Frame::Throw(s.clone()));
                cur = e;
            }
            EvalCtx::Reset(l, e) => {
                frames.push(Frame::Reset(*l));
                cur = e;
            }
        }
    }
    frames
}

/// An interface definition `interface F[a1, .., an] = sig`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceDef {
    pub effect_params: Vec<Ident>,
    pub sig: OpSignature,
}

/// The global interface table. Entries may be mutually recursive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InterfaceTable {
    pub entries: BTreeMap<String, InterfaceDef>,
}

impl InterfaceTable {
    pub fn new() -> InterfaceTable {
        InterfaceTable::default()
    }

    pub fn get(&self, name: &str) -> Option<&InterfaceDef> {
        self.entries.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, def: InterfaceDef) {
        self.entries.insert(name.into(), def);
    }
}

/// A whole program: interface definitions plus a main term guarded by a
/// top-level region binding the program lifetime.
#[derive(Debug, Clone)]
pub struct Program {
    pub interfaces: InterfaceTable,
    pub main_label: Label,
    pub main: Arc<Term>,
}

impl Program {
    /// The main term wrapped in its top-level region, as the machine runs it.
    pub fn main_term(&self) -> Term {
        Term::new(TermK::Region(self.main_label, self.main.clone()))
    }
}

/// Interfaces whose name carries this prefix are emission interfaces: each
/// handler entry for one appends the suffix to the token trace.
pub const OUT_PREFIX: &str = "Out_";

pub fn out_token(iface_name: &str) -> Option<&str> {
    iface_name.strip_prefix(OUT_PREFIX)
}

#[cfg(test)]
mod tests {
    use super::subst::*;
    use super::*;

    fn ev(name: &str, id: u32) -> AtomicEffect {
        AtomicEffect::Var(Ident::new(name, id))
    }

    fn lab(n: u32) -> AtomicEffect {
        AtomicEffect::Life(Lifetime::Label(Label(n)))
    }

    #[test]
    fn effect_sets_are_canonical() {
        let a = EffectSet::from_vec(vec![lab(1), ev("a", 7), lab(1)]);
        let b = EffectSet::from_vec(vec![ev("a", 7), lab(1)]);
        assert_eq!(a, b);
        assert_eq!(a.union(&b), a);
        assert_eq!(a.union(&EffectSet::empty()), a);
    }

    #[test]
    fn subst_effect_flattens_into_sets() {
        // {a, L1}[{L2, L3}/a] = {L1, L2, L3}
        let alpha = Ident::new("a", 7);
        let es = EffectSet::from_vec(vec![ev("a", 7), lab(1)]);
        let repl = EffectSet::from_vec(vec![lab(2), lab(3)]);
        let out = subst_effect_effs(&es, &alpha, &repl);
        assert_eq!(out, EffectSet::from_vec(vec![lab(1), lab(2), lab(3)]));
    }

    #[test]
    fn subst_effect_ignores_non_free_vars() {
        let alpha = Ident::new("a", 7);
        let es = EffectSet::from_vec(vec![lab(1)]);
        assert_eq!(subst_effect_effs(&es, &alpha, &EffectSet::from_vec(vec![lab(2)])), es);
    }

    #[test]
    fn subst_effect_respects_shadowing_binders() {
        // (eff a . unit ! {a})[{L1}/a] is unchanged
        let alpha = Ident::new("a", 7);
        let sig = OpSignature::ForallEffect(
            alpha.clone(),
            Box::new(OpSignature::Result(
                Box::new(TypeExpr::Unit),
                EffectSet::singleton(ev("a", 7)),
            )),
        );
        let out = subst_effect_sig(&sig, &alpha, &EffectSet::from_vec(vec![lab(1)]));
        assert_eq!(out, sig);
    }

    #[test]
    fn subst_life_replaces_variables_not_labels() {
        let phi = Ident::new("p", 9);
        let ty = TypeExpr::Op {
            sig: Box::new(OpSignature::Result(
                Box::new(TypeExpr::Unit),
                EffectSet::singleton(AtomicEffect::Life(Lifetime::Var(phi.clone()))),
            )),
            life: Lifetime::Var(phi.clone()),
        };
        let out = subst_life_type(&ty, &phi, &Lifetime::Label(Label(7)));
        assert_eq!(
            out,
            TypeExpr::Op {
                sig: Box::new(OpSignature::Result(
                    Box::new(TypeExpr::Unit),
                    EffectSet::of_label(Label(7)),
                )),
                life: Lifetime::Label(Label(7)),
            }
        );
        assert_eq!(subst_life_type(&TypeExpr::Unit, &phi, &Lifetime::Label(Label(1))), TypeExpr::Unit);

        // Reset labels are not variables: reset L1 { x } is unchanged.
        let x = Ident::new("x", 3);
        let t = Term::new(TermK::Reset(Label(1), Arc::new(Term::var(x))));
        assert_eq!(subst_life(&t, &phi, &Lifetime::Label(Label(2))), t);
    }

    #[test]
    fn subst_value_examples() {
        let x = Ident::new("x", 1);
        let y = Ident::new("y", 2);
        // (let y = x in y)[()/x] = let y = () in y
        let t = Term::new(TermK::Let(
            y.clone(),
            Arc::new(Term::var(x.clone())),
            Arc::new(Term::var(y.clone())),
        ));
        let out = subst_value(&t, &x, &Term::unit());
        let expected = Term::new(TermK::Let(
            y.clone(),
            Arc::new(Term::unit()),
            Arc::new(Term::var(y.clone())),
        ));
        assert_eq!(out, expected);

        // fix s { resume k . s }[()/s] is unchanged: the self binder shadows.
        let s = Ident::new("s", 5);
        let k = Ident::new("k", 6);
        let fix = Term::new(TermK::Fix(FixV {
            self_var: s.clone(),
            iface: IfaceRef { name: "I".into(), args: vec![] },
            body: OpBody::KLam(k, Arc::new(Term::var(s.clone()))),
            life: Lifetime::Label(Label(1)),
        }));
        assert_eq!(subst_value(&fix, &s, &Term::unit()), fix);

        // throw(k0, x)[cont(Hole)/x]
        let k0 = Ident::new("k0", 8);
        let cont = Term::new(TermK::Cont(ContV {
            ctx: Arc::new(EvalCtx::Hole),
            in_ty: TypeExpr::Unit,
            in_eff: EffectSet::empty(),
        }));
        let t = Term::new(TermK::Throw(
            Arc::new(Term::var(k0.clone())),
            Arc::new(Term::var(x.clone())),
        ));
        let out = subst_value(&t, &x, &cont);
        assert_eq!(
            out,
            Term::new(TermK::Throw(Arc::new(Term::var(k0)), Arc::new(cont)))
        );
    }

    #[test]
    fn subst_value_freshens_on_capture() {
        // (let y = () in app(y, x))[y/x] must not capture the free y.
        let x = Ident::new("x", 1);
        let free_y = Ident::new("y", 2);
        let bound_y = Ident::new("y", 3);
        let t = Term::new(TermK::Let(
            bound_y.clone(),
            Arc::new(Term::unit()),
            Arc::new(Term::new(TermK::App(
                Arc::new(Term::var(bound_y.clone())),
                Arc::new(Term::var(x.clone())),
            ))),
        ));
        // Substituting y#2 for x under a binder y#3 is fine (distinct ids).
        let out = subst_value(&t, &x, &Term::var(free_y.clone()));
        match &out.kind {
            TermK::Let(b, _, body) => match &body.kind {
                TermK::App(f, a) => {
                    assert_eq!(f.kind, TermK::Var(b.clone()));
                    assert_eq!(a.kind, TermK::Var(free_y.clone()));
                }
                _ => panic!("shape"),
            },
            _ => panic!("shape"),
        }
        // Now force an actual collision: binder and replacement share id.
        let clash = Ident::new("y", 2);
        let t2 = Term::new(TermK::Let(
            clash.clone(),
            Arc::new(Term::unit()),
            Arc::new(Term::new(TermK::App(
                Arc::new(Term::var(clash.clone())),
                Arc::new(Term::var(x.clone())),
            ))),
        ));
        let out2 = subst_value(&t2, &x, &Term::var(free_y.clone()));
        match &out2.kind {
            TermK::Let(b, _, body) => {
                assert_ne!(b.id, free_y.id, "binder must be freshened");
                match &body.kind {
                    TermK::App(f, a) => {
                        assert_eq!(f.kind, TermK::Var(b.clone()));
                        assert_eq!(a.kind, TermK::Var(free_y.clone()));
                    }
                    _ => panic!("shape"),
                }
            }
            _ => panic!("shape"),
        }
    }

    #[test]
    fn plug_examples() {
        assert_eq!(plug(&EvalCtx::Hole, Term::unit()), Term::unit());
        let x = Ident::new("x", 1);
        let ctx = EvalCtx::Let(
            x.clone(),
            Arc::new(EvalCtx::Hole),
            Arc::new(Term::var(x.clone())),
        );
        assert_eq!(
            plug(&ctx, Term::unit()),
            Term::new(TermK::Let(
                x.clone(),
                Arc::new(Term::unit()),
                Arc::new(Term::var(x))
            ))
        );
        let ctx = EvalCtx::Reset(Label(3), Arc::new(EvalCtx::Up(Arc::new(EvalCtx::Hole))));
        assert_eq!(
            plug(&ctx, Term::unit()),
            Term::new(TermK::Reset(
                Label(3),
                Arc::new(Term::new(TermK::Up(Arc::new(Term::unit()))))
            ))
        );
    }

    #[test]
    fn frames_roundtrip_contexts() {
        let x = Ident::new("x", 1);
        let ctx = EvalCtx::Reset(
            Label(1),
            Arc::new(EvalCtx::Let(
                x.clone(),
                Arc::new(EvalCtx::Up(Arc::new(EvalCtx::Hole))),
                Arc::new(Term::var(x)),
            )),
        );
        assert_eq!(ctx_of_frames(&frames_of_ctx(&ctx)), ctx);
    }

    #[test]
    fn alpha_eq_examples() {
        use super::alpha::alpha_eq;
        // fix s { resume k . s } vs fix z { resume q . z } at the same label
        let mk = |sv: (&str, u32), kv: (&str, u32)| {
            Term::new(TermK::Fix(FixV {
                self_var: Ident::new(sv.0, sv.1),
                iface: IfaceRef { name: "I".into(), args: vec![] },
                body: OpBody::KLam(
                    Ident::new(kv.0, kv.1),
                    Arc::new(Term::var(Ident::new(sv.0, sv.1))),
                ),
                life: Lifetime::Label(Label(1)),
            }))
        };
        assert!(alpha_eq(&mk(("s", 1), ("k", 2)), &mk(("z", 3), ("q", 4))));
        assert!(!alpha_eq(&Term::unit(), &Term::var(Ident::new("x", 1))));

        // region binders bind their labels
        let h = Ident::new("h", 9);
        let ra = Term::new(TermK::Region(Label(10), Arc::new(Term::var(h.clone()))));
        let rb = Term::new(TermK::Region(Label(11), Arc::new(Term::var(h.clone()))));
        assert!(alpha_eq(&ra, &rb));

        // reset labels are literal
        let sa = Term::new(TermK::Reset(Label(10), Arc::new(Term::unit())));
        let sb = Term::new(TermK::Reset(Label(11), Arc::new(Term::unit())));
        assert!(!alpha_eq(&sa, &sb));
    }

    #[test]
    fn subst_label_respects_region_shadowing() {
        // (region L1 { reset L1 { () } })[L5/L1]: the binder shadows.
        let inner = Term::new(TermK::Reset(Label(1), Arc::new(Term::unit())));
        let t = Term::new(TermK::Region(Label(1), Arc::new(inner.clone())));
        assert_eq!(subst_label(&t, Label(1), Label(5)), t);
        // But a free reset label is replaced.
        assert_eq!(
            subst_label(&inner, Label(1), Label(5)),
            Term::new(TermK::Reset(Label(5), Arc::new(Term::unit())))
        );
    }
}
