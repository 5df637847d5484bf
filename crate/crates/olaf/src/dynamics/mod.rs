//! The deterministic small-step machine: redex decomposition over an explicit
//! frame stack, the nine reduction rules, the tunneling delimiter search,
//! generative fresh labels, the tail-resumption fast path, and per-run
//! instrumentation counters.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::statics::{Checker, LabelSig, TypeError, TypingEnv};
use crate::syntax::alpha::alpha_eq_type;
use crate::syntax::pretty::summarize_term;
use crate::syntax::subst::*;
use crate::syntax::*;

/// A machine state: the set of generated lifetime labels and the current term.
#[derive(Debug, Clone)]
pub struct Config {
    pub labels: BTreeSet<Label>,
    pub term: Term,
}

impl Config {
    pub fn initial(p: &Program) -> Config {
        Config { labels: BTreeSet::new(), term: p.main_term() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum RuleName {
    /// Congruence; realized by decomposition, so steps report the axiom below.
    Ktx,
    Let,
    Op,
    EApp,
    LApp,
    App,
    Throw,
    Down,
    DownVal,
    DownUp,
    TailFast,
}

impl std::fmt::Display for RuleName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RuleName::Ktx => "ktx",
            RuleName::Let => "let",
            RuleName::Op => "op",
            RuleName::EApp => "eapp",
            RuleName::LApp => "lapp",
            RuleName::App => "app",
            RuleName::Throw => "throw",
            RuleName::Down => "down",
            RuleName::DownVal => "downval",
            RuleName::DownUp => "downup",
            RuleName::TailFast => "tailFast",
        };
        write!(f, "{}", s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Counters {
    pub steps: u64,
    pub fresh_labels: u64,
    /// Times a continuation value is materialized by a downup step.
    pub context_reifications: u64,
    /// Frames traversed by delimiter searches.
    pub delimiter_crossings: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StuckReason {
    /// A raise with no enclosing delimiter carrying the operation's label.
    UnmatchedDelimiter(Label),
    /// An ill-shaped redex (cannot occur on checked programs).
    BadRedex(String),
}

impl std::fmt::Display for StuckReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StuckReason::UnmatchedDelimiter(l) => {
                write!(f, "no enclosing delimiter for label {}", l)
            }
            StuckReason::BadRedex(m) => write!(f, "bad redex: {}", m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StuckInfo {
    pub reason: StuckReason,
    pub redex: String,
}

#[derive(Debug)]
pub enum StepOutcome {
    Stepped {
        config: Config,
        rule: RuleName,
        token: Option<String>,
        /// Label and interface of the handler entered, for downup/tailFast.
        handler_entry: Option<(Label, Option<String>)>,
    },
    Finished(Term),
    Stuck(StuckInfo),
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Finished(Term),
    Stuck(StuckInfo),
    FuelExhausted,
}

impl Outcome {
    pub fn is_finished(&self) -> bool {
        matches!(self, Outcome::Finished(_))
    }
}

#[derive(Debug, Clone)]
pub struct EvalOpts {
    pub fuel: u64,
    pub tail_fast: bool,
    pub check_preservation: bool,
}

impl Default for EvalOpts {
    fn default() -> EvalOpts {
        EvalOpts { fuel: 10_000_000, tail_fast: false, check_preservation: false }
    }
}

pub const DEFAULT_FUEL: u64 = 10_000_000;

#[derive(Debug)]
pub struct EvalReport {
    pub outcome: Outcome,
    pub counters: Counters,
    /// Tokens emitted by `Out_*` handler entries, in order.
    pub tokens: Vec<String>,
    /// One entry per downup/tailFast step: delimiter label and handler interface.
    pub handler_entries: Vec<(Label, Option<String>)>,
    pub label_sigs: HashMap<Label, LabelSig>,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("program does not typecheck: {0}")]
    IllTyped(#[from] TypeError),
    #[error("preservation violated at step {step}: {detail}")]
    Preservation { step: u64, detail: String },
}

/// One emitted trace line. Serialization order is fixed, so re-running a
/// program yields byte-identical traces.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TraceLine<'a> {
    step: u64,
    rule: String,
    label_count: usize,
    redex_summary: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    tok: Option<&'a str>,
    counters: Counters,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TraceFinal<'a> {
    outcome: &'a str,
    steps: u64,
    counters: Counters,
}

/// The `tunnels` judgment: true iff the context contains no delimiter for the
/// label on the path to the hole; every other frame is transparent.
pub fn tunnels(label: Label, ctx: &EvalCtx) -> bool {
    match ctx {
        EvalCtx::Hole => true,
        EvalCtx::Reset(l, inner) => *l != label && tunnels(label, inner),
        EvalCtx::Unroll(inner)
        | EvalCtx::EApp(inner, _)
        | EvalCtx::LApp(inner, _)
        | EvalCtx::AppFun(inner, _)
        | EvalCtx::AppArg(_, inner)
        | EvalCtx::Up(inner)
        | EvalCtx::Let(_, inner, _)
        | EvalCtx::Throw(inner, _) => tunnels(label, inner),
    }
}

fn tunnels_frames(label: Label, frames: &[Frame]) -> bool {
    frames.iter().all(|f| !matches!(f, Frame::Reset(l) if *l == label))
}

/// Decomposes a term into the unique evaluation context (as a frame stack,
/// outermost first) and innermost non-value subterm, following left-to-right
/// call-by-value order. Returns `None` when the term is a value.
pub fn decompose(t: &Term) -> Option<(Vec<Frame>, Term)> {
    if t.is_value() {
        return None;
    }
    let mut frames = Vec::new();
    let mut cur = t.clone();
    loop {
        let next = match &cur.kind {
            TermK::Unroll(s) if !s.is_value() => {
                frames.push(Frame::Unroll);
                (**s).clone()
            }
            TermK::EApp(s, es) if !s.is_value() => {
                frames.push(Frame::EApp(es.clone()));
                (**s).clone()
            }
            TermK::LApp(s, l) if !s.is_value() => {
                frames.push(Frame::LApp(l.clone()));
                (**s).clone()
            }
            TermK::App(f, a) if !f.is_value() => {
                frames.push(Frame::AppFun(a.clone()));
                (**f).clone()
            }
            TermK::App(f, a) if !a.is_value() => {
                frames.push(Frame::AppArg(f.clone()));
                (**a).clone()
            }
            TermK::Up(s) if !s.is_value() => {
                frames.push(Frame::Up);
                (**s).clone()
            }
            TermK::Let(x, s, body) if !s.is_value() => {
                frames.push(Frame::Let(x.clone(), body.clone()));
                (**s).clone()
            }
            TermK::Throw(subj, arg) if !subj.is_value() => {
                frames.push(Frame::Throw(arg.clone()));
                (**subj).clone()
            }
            TermK::Reset(l, s) if !s.is_value() => {
                frames.push(Frame::Reset(*l));
                (**s).clone()
            }
            _ => return Some((frames, cur)),
        };
        cur = next;
    }
}

pub fn recompose(frames: &[Frame], t: Term) -> Term {
    frames.iter().rev().fold(t, |acc, f| f.clone().plug(acc))
}

pub struct Machine<'a> {
    interfaces: &'a InterfaceTable,
    next_label: u32,
    pub counters: Counters,
    pub tokens: Vec<String>,
    pub handler_entries: Vec<(Label, Option<String>)>,
    /// Signature recorded for each generated label (preservation mode).
    pub label_sigs: HashMap<Label, LabelSig>,
    tail_fast: bool,
    record_sigs: bool,
}

impl<'a> Machine<'a> {
    pub fn new(interfaces: &'a InterfaceTable, start: &Term) -> Machine<'a> {
        let mut labels = HashSet::new();
        labels_in_term(start, &mut labels);
        let next_label = labels.iter().map(|l| l.0 + 1).max().unwrap_or(0);
        Machine {
            interfaces,
            next_label,
            counters: Counters::default(),
            tokens: Vec::new(),
            handler_entries: Vec::new(),
            label_sigs: HashMap::new(),
            tail_fast: false,
            record_sigs: false,
        }
    }

    pub fn with_tail_fast(mut self, on: bool) -> Machine<'a> {
        self.tail_fast = on;
        self
    }

    fn stuck(&self, reason: StuckReason, redex: &Term) -> StepOutcome {
        StepOutcome::Stuck(StuckInfo { reason, redex: summarize_term(redex, 4) })
    }

    /// Performs one reduction step. At most one rule applies to any
    /// configuration; `Finished` is returned exactly on values.
    pub fn step(&mut self, c: &Config) -> StepOutcome {
        let (frames, redex) = match decompose(&c.term) {
            None => return StepOutcome::Finished(c.term.clone()),
            Some(d) => d,
        };
        let mut labels = c.labels.clone();
        let mut token = None;
        let mut handler_entry = None;
        let (reduced, rule) = match &redex.kind {
            TermK::Let(x, bound, body) => {
                debug_assert!(bound.is_value());
                (subst_value(body, x, bound), RuleName::Let)
            }
            TermK::Unroll(v) => match &v.kind {
                TermK::Fix(fx) => {
                    let def = match self.interfaces.get(&fx.iface.name) {
                        Some(d) if d.effect_params.len() == fx.iface.args.len() => d,
                        Some(_) => {
                            return self.stuck(
                                StuckReason::BadRedex(format!(
                                    "interface {} applied at wrong arity",
                                    fx.iface.name
                                )),
                                &redex,
                            )
                        }
                        None => {
                            return self.stuck(
                                StuckReason::BadRedex(format!(
                                    "unknown interface {}",
                                    fx.iface.name
                                )),
                                &redex,
                            )
                        }
                    };
                    let sig = crate::statics::instantiate_sig(
                        &def.sig,
                        &def.effect_params,
                        &fx.iface.args,
                    );
                    let body = subst_value_body(&fx.body, &fx.self_var, v);
                    (
                        Term::new(TermK::Op(OpV {
                            sig,
                            body,
                            life: fx.life.clone(),
                            iface_name: Some(fx.iface.name.clone()),
                        })),
                        RuleName::Op,
                    )
                }
                _ => {
                    return self.stuck(
                        StuckReason::BadRedex("unroll of a non-handler value".into()),
                        &redex,
                    )
                }
            },
            TermK::EApp(v, args) => match &v.kind {
                TermK::Op(op) => match (&op.sig, &op.body) {
                    (OpSignature::ForallEffect(a_sig, sig_rest), OpBody::ELam(a_body, m)) => {
                        let sig = subst_effect_sig(sig_rest, a_sig, args);
                        let body = subst_effect_body(m, a_body, args);
                        (
                            Term::new(TermK::Op(OpV {
                                sig,
                                body,
                                life: op.life.clone(),
                                iface_name: op.iface_name.clone(),
                            })),
                            RuleName::EApp,
                        )
                    }
                    _ => {
                        return self.stuck(
                            StuckReason::BadRedex(
                                "effect application to a non-effect-polymorphic operation".into(),
                            ),
                            &redex,
                        )
                    }
                },
                _ => {
                    return self.stuck(
                        StuckReason::BadRedex("effect application to a non-operation".into()),
                        &redex,
                    )
                }
            },
            TermK::LApp(v, arg) => match &v.kind {
                TermK::Op(op) => match (&op.sig, &op.body) {
                    (OpSignature::ForallLife(p_sig, sig_rest), OpBody::LLam(p_body, m)) => {
                        let sig = subst_life_sig(sig_rest, p_sig, arg);
                        let body = subst_life_body(m, p_body, arg);
                        (
                            Term::new(TermK::Op(OpV {
                                sig,
                                body,
                                life: op.life.clone(),
                                iface_name: op.iface_name.clone(),
                            })),
                            RuleName::LApp,
                        )
                    }
                    _ => {
                        return self.stuck(
                            StuckReason::BadRedex(
                                "lifetime application to a non-lifetime-polymorphic operation"
                                    .into(),
                            ),
                            &redex,
                        )
                    }
                },
                _ => {
                    return self.stuck(
                        StuckReason::BadRedex("lifetime application to a non-operation".into()),
                        &redex,
                    )
                }
            },
            TermK::App(f, a) => {
                debug_assert!(f.is_value() && a.is_value());
                match &f.kind {
                    TermK::Op(op) => match (&op.sig, &op.body) {
                        (OpSignature::Arrow(_, sig_rest), OpBody::VLam(x, m)) => {
                            let body = subst_value_body(m, x, a);
                            (
                                Term::new(TermK::Op(OpV {
                                    sig: (**sig_rest).clone(),
                                    body,
                                    life: op.life.clone(),
                                    iface_name: op.iface_name.clone(),
                                })),
                                RuleName::App,
                            )
                        }
                        _ => {
                            return self.stuck(
                                StuckReason::BadRedex(
                                    "application of an operation with no value parameter".into(),
                                ),
                                &redex,
                            )
                        }
                    },
                    _ => {
                        return self.stuck(
                            StuckReason::BadRedex("application of a non-operation value".into()),
                            &redex,
                        )
                    }
                }
            }
            TermK::Throw(subj, arg) => match &subj.kind {
                TermK::Cont(c) => (plug(&c.ctx, (**arg).clone()), RuleName::Throw),
                _ => {
                    return self.stuck(
                        StuckReason::BadRedex("throw to a non-continuation".into()),
                        &redex,
                    )
                }
            },
            TermK::Region(bound, body) => {
                let fresh = Label(self.next_label);
                self.next_label += 1;
                debug_assert!(!labels.contains(&fresh));
                labels.insert(fresh);
                self.counters.fresh_labels += 1;
                if self.record_sigs {
                    if let Err(e) = self.record_region_sig(&redex, fresh) {
                        return self.stuck(
                            StuckReason::BadRedex(format!(
                                "region signature inference failed: {}",
                                e
                            )),
                            &redex,
                        );
                    }
                }
                let renamed = subst_label(body, *bound, fresh);
                (Term::new(TermK::Reset(fresh, Arc::new(renamed))), RuleName::Down)
            }
            TermK::Reset(_, v) if v.is_value() => ((**v).clone(), RuleName::DownVal),
            TermK::Up(v) => {
                debug_assert!(v.is_value());
                let op = match &v.kind {
                    TermK::Op(op) => op,
                    _ => {
                        return self.stuck(
                            StuckReason::BadRedex("raise of a non-operation value".into()),
                            &redex,
                        )
                    }
                };
                let label = match &op.life {
                    Lifetime::Label(l) => *l,
                    Lifetime::Var(x) => {
                        return self.stuck(
                            StuckReason::BadRedex(format!(
                                "raise at unresolved lifetime '{}",
                                x.name
                            )),
                            &redex,
                        )
                    }
                };
                let (k, hbody, in_ty, in_eff) = match (&op.body, &op.sig) {
                    (OpBody::KLam(k, hbody), OpSignature::Result(ty, eff)) => {
                        (k, hbody, (**ty).clone(), eff.clone())
                    }
                    _ => {
                        return self.stuck(
                            StuckReason::BadRedex("raise of a partially applied operation".into()),
                            &redex,
                        )
                    }
                };
                // Scan outward from the raise for the nearest enclosing
                // delimiter with the operation's label. Intervening frames
                // tunnel by construction.
                let mut found = None;
                for i in (0..frames.len()).rev() {
                    if matches!(&frames[i], Frame::Reset(l) if *l == label) {
                        found = Some(i);
                        break;
                    }
                    self.counters.delimiter_crossings += 1;
                }
                let i = match found {
                    Some(i) => i,
                    None => {
                        return self.stuck(StuckReason::UnmatchedDelimiter(label), &redex)
                    }
                };
                debug_assert!(tunnels_frames(label, &frames[i + 1..]));
                if let Some(name) = &op.iface_name {
                    if let Some(tok) = out_token(name) {
                        token = Some(tok.to_string());
                    }
                }
                handler_entry = Some((label, op.iface_name.clone()));
                let tail_shape = match &hbody.kind {
                    TermK::Throw(subj, arg) => match &subj.kind {
                        TermK::Var(kv) if kv.id == k.id && !free_term_vars(arg).contains(&k.id) => {
                            Some((**arg).clone())
                        }
                        _ => None,
                    },
                    _ => None,
                };
                if self.tail_fast {
                    if let Some(arg) = tail_shape {
                        // Fused downup+throw: the delimiter and context stay in
                        // place; no continuation value is constructed.
                        let whole = recompose(&frames, arg);
                        self.counters.steps += 1;
                        let config = Config { labels, term: whole };
                        return StepOutcome::Stepped {
                            config,
                            rule: RuleName::TailFast,
                            token,
                            handler_entry,
                        };
                    }
                }
                let resumption_ctx = ctx_of_frames(&frames[i..]);
                debug_assert!(matches!(resumption_ctx, EvalCtx::Reset(l, _) if l == label));
                let cont = Term::new(TermK::Cont(ContV {
                    ctx: Arc::new(resumption_ctx),
                    in_ty,
                    in_eff: in_eff.insert(AtomicEffect::Life(Lifetime::Label(label))),
                }));
                self.counters.context_reifications += 1;
                let new_inner = subst_value(hbody, k, &cont);
                let whole = recompose(&frames[..i], new_inner);
                self.counters.steps += 1;
                let config = Config { labels, term: whole };
                return StepOutcome::Stepped {
                    config,
                    rule: RuleName::DownUp,
                    token,
                    handler_entry,
                };
            }
            TermK::Var(_) | TermK::Unit | TermK::Fix(_) | TermK::Op(_) | TermK::Cont(_)
            | TermK::Reset(..) => {
                return self.stuck(
                    StuckReason::BadRedex("non-reducible subterm in redex position".into()),
                    &redex,
                )
            }
        };
        self.counters.steps += 1;
        let whole = recompose(&frames, reduced);
        StepOutcome::Stepped {
            config: Config { labels, term: whole },
            rule,
            token,
            handler_entry,
        }
    }

    /// Records the signature a region installs for its fresh label, by
    /// re-inferring the (fully substituted) region redex under the current
    /// label signatures. The signature cannot mention the bound label, so it
    /// transfers to the fresh copy unchanged.
    fn record_region_sig(&mut self, region: &Term, fresh: Label) -> Result<(), TypeError> {
        let mut checker = Checker::new_runtime(self.interfaces, &self.label_sigs);
        let mut env = TypingEnv::empty();
        let sig = checker.region_signature(&mut env, region)?;
        self.label_sigs.insert(fresh, sig);
        Ok(())
    }
}

/// Runs a program to a value, a stuck state, or fuel exhaustion.
///
/// With `check_preservation`, the program is first typechecked, and after
/// every step the machine state is re-typechecked under the recorded label
/// signatures, asserting the type is unchanged (up to alpha) and the effects
/// stay empty.
pub fn eval(
    p: &Program,
    opts: &EvalOpts,
    mut trace_out: Option<&mut dyn Write>,
) -> Result<EvalReport, EvalError> {
    let expected = if opts.check_preservation {
        Some(Checker::check_program(p)?)
    } else {
        None
    };
    let mut machine = Machine::new(&p.interfaces, &p.main_term()).with_tail_fast(opts.tail_fast);
    machine.record_sigs = opts.check_preservation;
    let mut config = Config::initial(p);
    let mut outcome = None;
    while machine.counters.steps < opts.fuel {
        match machine.step(&config) {
            StepOutcome::Finished(v) => {
                outcome = Some(Outcome::Finished(v));
                break;
            }
            StepOutcome::Stuck(info) => {
                outcome = Some(Outcome::Stuck(info));
                break;
            }
            StepOutcome::Stepped { config: next, rule, token, handler_entry } => {
                if let Some(tok) = &token {
                    machine.tokens.push(tok.clone());
                }
                if let Some(he) = handler_entry {
                    machine.handler_entries.push(he);
                }
                if let Some(w) = trace_out.as_deref_mut() {
                    let summary = summarize_term(&next.term, 3);
                    let line = TraceLine {
                        step: machine.counters.steps,
                        rule: rule.to_string(),
                        label_count: next.labels.len(),
                        redex_summary: &summary,
                        tok: token.as_deref(),
                        counters: machine.counters,
                    };
                    serde_json::to_writer(&mut *w, &line).expect("trace write");
                    writeln!(w).expect("trace write");
                }
                if let Some(expected) = &expected {
                    let mut checker = Checker::new_runtime(&p.interfaces, &machine.label_sigs);
                    let mut env = TypingEnv::empty();
                    match checker.check_term(&mut env, &next.term) {
                        Err(e) => {
                            return Err(EvalError::Preservation {
                                step: machine.counters.steps,
                                detail: format!("state no longer typechecks: {}", e),
                            })
                        }
                        Ok(res) => {
                            if !alpha_eq_type(&res.ty, &expected.ty) {
                                return Err(EvalError::Preservation {
                                    step: machine.counters.steps,
                                    detail: format!(
                                        "type changed from {} to {}",
                                        crate::syntax::pretty::print_type(&expected.ty),
                                        crate::syntax::pretty::print_type(&res.ty)
                                    ),
                                });
                            }
                            if !(res.eff.subset_of(&expected.eff)
                                && expected.eff.subset_of(&res.eff))
                            {
                                return Err(EvalError::Preservation {
                                    step: machine.counters.steps,
                                    detail: format!(
                                        "effects changed from {} to {}",
                                        expected.eff, res.eff
                                    ),
                                });
                            }
                        }
                    }
                }
                config = next;
            }
        }
    }
    let outcome = outcome.unwrap_or(Outcome::FuelExhausted);
    if let Some(w) = trace_out.as_deref_mut() {
        let name = match &outcome {
            Outcome::Finished(_) => "finished",
            Outcome::Stuck(_) => "stuck",
            Outcome::FuelExhausted => "fuelExhausted",
        };
        let line = TraceFinal { outcome: name, steps: machine.counters.steps, counters: machine.counters };
        serde_json::to_writer(&mut *w, &line).expect("trace write");
        writeln!(w).expect("trace write");
    }
    Ok(EvalReport {
        outcome,
        counters: machine.counters,
        tokens: machine.tokens,
        handler_entries: machine.handler_entries,
        label_sigs: machine.label_sigs,
    })
}

// ---------------------------------------------------------------------------
// Exhaustive rule-applicability enumeration (determinism checking)
// ---------------------------------------------------------------------------

/// Enumerates every (context position, rule) pair at which a reduction axiom
/// applies anywhere in the term, following the evaluation-context grammar.
/// Determinism means this returns at most one entry, and exactly one for
/// closed well-typed non-values.
pub fn applicable_rules(t: &Term) -> Vec<RuleName> {
    let mut found = Vec::new();
    enumerate(t, &mut Vec::new(), &mut found);
    found
}

fn axiom_for(t: &Term) -> Option<RuleName> {
    match &t.kind {
        TermK::Let(_, bound, _) if bound.is_value() => Some(RuleName::Let),
        TermK::Unroll(v) if matches!(v.kind, TermK::Fix(_)) => Some(RuleName::Op),
        TermK::EApp(v, _) => match &v.kind {
            TermK::Op(op)
                if matches!(op.body, OpBody::ELam(..))
                    && matches!(op.sig, OpSignature::ForallEffect(..)) =>
            {
                Some(RuleName::EApp)
            }
            _ => None,
        },
        TermK::LApp(v, _) => match &v.kind {
            TermK::Op(op)
                if matches!(op.body, OpBody::LLam(..))
                    && matches!(op.sig, OpSignature::ForallLife(..)) =>
            {
                Some(RuleName::LApp)
            }
            _ => None,
        },
        TermK::App(f, a) if f.is_value() && a.is_value() => match &f.kind {
            TermK::Op(op)
                if matches!(op.body, OpBody::VLam(..))
                    && matches!(op.sig, OpSignature::Arrow(..)) =>
            {
                Some(RuleName::App)
            }
            _ => None,
        },
        TermK::Throw(subj, _) if matches!(subj.kind, TermK::Cont(_)) => Some(RuleName::Throw),
        TermK::Region(..) => Some(RuleName::Down),
        TermK::Reset(_, v) if v.is_value() => Some(RuleName::DownVal),
        _ => None,
    }
}

fn enumerate(t: &Term, path: &mut Vec<Frame>, found: &mut Vec<RuleName>) {
    if let Some(rule) = axiom_for(t) {
        found.push(rule);
    }
    // A downup redex is a delimiter enclosing a raise of its own label, with
    // the intervening context tunneling the label.
    if let TermK::Reset(l, body) = &t.kind {
        let mut inner_path = Vec::new();
        find_raises(body, *l, &mut inner_path, found);
    }
    match &t.kind {
        TermK::Unroll(s) => descend(s, Frame::Unroll, path, found),
        TermK::EApp(s, es) => descend(s, Frame::EApp(es.clone()), path, found),
        TermK::LApp(s, l) => descend(s, Frame::LApp(l.clone()), path, found),
        TermK::App(f, a) => {
            descend(f, Frame::AppFun(a.clone()), path, found);
            if f.is_value() {
                descend(a, Frame::AppArg(f.clone()), path, found);
            }
        }
        TermK::Up(s) => descend(s, Frame::Up, path, found),
        TermK::Let(x, s, body) => descend(s, Frame::Let(x.clone(), body.clone()), path, found),
        TermK::Throw(subj, arg) => descend(subj, Frame::Throw(arg.clone()), path, found),
        TermK::Reset(l, s) => descend(s, Frame::Reset(*l), path, found),
        _ => {}
    }
}

fn descend(s: &Arc<Term>, f: Frame, path: &mut Vec<Frame>, found: &mut Vec<RuleName>) {
    path.push(f);
    enumerate(s, path, found);
    path.pop();
}

/// Finds raise redexes under a delimiter for `label`, at positions whose path
/// from the delimiter tunnels the label.
fn find_raises(t: &Term, label: Label, path: &mut Vec<Frame>, found: &mut Vec<RuleName>) {
    if !tunnels_frames(label, path) {
        return;
    }
    if let TermK::Up(v) = &t.kind {
        if let TermK::Op(op) = &v.kind {
            if matches!(op.body, OpBody::KLam(..))
                && matches!(op.sig, OpSignature::Result(..))
                && op.life == Lifetime::Label(label)
            {
                found.push(RuleName::DownUp);
            }
        }
    }
    match &t.kind {
        TermK::Unroll(s) => find_in(s, Frame::Unroll, label, path, found),
        TermK::EApp(s, es) => find_in(s, Frame::EApp(es.clone()), label, path, found),
        TermK::LApp(s, l) => find_in(s, Frame::LApp(l.clone()), label, path, found),
        TermK::App(f, a) => {
            find_in(f, Frame::AppFun(a.clone()), label, path, found);
            if f.is_value() {
                find_in(a, Frame::AppArg(f.clone()), label, path, found);
            }
        }
        TermK::Up(s) => find_in(s, Frame::Up, label, path, found),
        TermK::Let(x, s, body) => {
            find_in(s, Frame::Let(x.clone(), body.clone()), label, path, found)
        }
        TermK::Throw(subj, arg) => find_in(subj, Frame::Throw(arg.clone()), label, path, found),
        TermK::Reset(l, s) => find_in(s, Frame::Reset(*l), label, path, found),
        _ => {}
    }
}

fn find_in(
    s: &Arc<Term>,
    f: Frame,
    label: Label,
    path: &mut Vec<Frame>,
    found: &mut Vec<RuleName>,
) {
    path.push(f);
    find_raises(s, label, path, found);
    path.pop();
}
