//! Capture-avoiding substitution for values, effect sequences, lifetimes, and
//! labels, plus free-variable queries.
//!
//! Internal helpers return `None` when the input is unchanged so that shared
//! subtrees keep their `Arc` identity.

use std::collections::HashSet;
use std::sync::Arc;

use super::*;

// ---------------------------------------------------------------------------
// Free variables and id supplies
// ---------------------------------------------------------------------------

pub fn free_term_vars(t: &Term) -> HashSet<u32> {
    let mut acc = HashSet::new();
    collect_term_vars(t, &mut Vec::new(), &mut acc);
    acc
}

fn collect_term_vars(t: &Term, bound: &mut Vec<u32>, acc: &mut HashSet<u32>) {
    match &t.kind {
        TermK::Var(x) => {
            if !bound.contains(&x.id) {
                acc.insert(x.id);
            }
        }
        TermK::Unit => {}
        TermK::Fix(fx) => {
            bound.push(fx.self_var.id);
            collect_body_vars(&fx.body, bound, acc);
            bound.pop();
        }
        TermK::Op(op) => collect_body_vars(&op.body, bound, acc),
        TermK::Cont(c) => collect_ctx_vars(&c.ctx, bound, acc),
        TermK::Unroll(s) | TermK::EApp(s, _) | TermK::LApp(s, _) | TermK::Up(s) => {
            collect_term_vars(s, bound, acc)
        }
        TermK::App(f, a) | TermK::Throw(f, a) => {
            collect_term_vars(f, bound, acc);
            collect_term_vars(a, bound, acc);
        }
        TermK::Region(_, s) | TermK::Reset(_, s) => collect_term_vars(s, bound, acc),
        TermK::Let(x, s, body) => {
            collect_term_vars(s, bound, acc);
            bound.push(x.id);
            collect_term_vars(body, bound, acc);
            bound.pop();
        }
    }
}

fn collect_body_vars(m: &OpBody, bound: &mut Vec<u32>, acc: &mut HashSet<u32>) {
    match m {
        OpBody::ELam(_, b) | OpBody::LLam(_, b) => collect_body_vars(b, bound, acc),
        OpBody::VLam(x, b) => {
            bound.push(x.id);
            collect_body_vars(b, bound, acc);
            bound.pop();
        }
        OpBody::KLam(k, t) => {
            bound.push(k.id);
            collect_term_vars(t, bound, acc);
            bound.pop();
        }
    }
}

fn collect_ctx_vars(e: &EvalCtx, bound: &mut Vec<u32>, acc: &mut HashSet<u32>) {
    match e {
        EvalCtx::Hole => {}
        EvalCtx::Unroll(e) | EvalCtx::EApp(e, _) | EvalCtx::LApp(e, _) | EvalCtx::Up(e) => {
            collect_ctx_vars(e, bound, acc)
        }
        EvalCtx::AppFun(e, s) | EvalCtx::Throw(e, s) => {
            collect_ctx_vars(e, bound, acc);
            collect_term_vars(s, bound, acc);
        }
        EvalCtx::AppArg(v, e) => {
            collect_term_vars(v, bound, acc);
            collect_ctx_vars(e, bound, acc);
        }
        EvalCtx::Let(x, e, body) => {
            collect_ctx_vars(e, bound, acc);
            bound.push(x.id);
            collect_term_vars(body, bound, acc);
            bound.pop();
        }
        EvalCtx::Reset(_, e) => collect_ctx_vars(e, bound, acc),
    }
}

/// Largest identifier id occurring anywhere in the term, or 0.
pub fn max_ident_id(t: &Term) -> u32 {
    let mut m = 0;
    walk_ids_term(t, &mut m);
    m
}

fn bump(m: &mut u32, x: &Ident) {
    if x.id > *m {
        *m = x.id;
    }
}

fn walk_ids_term(t: &Term, m: &mut u32) {
    match &t.kind {
        TermK::Var(x) => bump(m, x),
        TermK::Unit => {}
        TermK::Fix(fx) => {
            bump(m, &fx.self_var);
            walk_ids_body(&fx.body, m);
        }
        TermK::Op(op) => {
            walk_ids_sig(&op.sig, m);
            walk_ids_body(&op.body, m);
        }
        TermK::Cont(c) => walk_ids_ctx(&c.ctx, m),
        TermK::Unroll(s) | TermK::Up(s) | TermK::Region(_, s) | TermK::Reset(_, s) => {
            walk_ids_term(s, m)
        }
        TermK::EApp(s, es) => {
            walk_ids_term(s, m);
            walk_ids_effs(es, m);
        }
        TermK::LApp(s, l) => {
            walk_ids_term(s, m);
            walk_ids_life(l, m);
        }
        TermK::App(f, a) | TermK::Throw(f, a) => {
            walk_ids_term(f, m);
            walk_ids_term(a, m);
        }
        TermK::Let(x, s, body) => {
            bump(m, x);
            walk_ids_term(s, m);
            walk_ids_term(body, m);
        }
    }
}

fn walk_ids_body(b: &OpBody, m: &mut u32) {
    match b {
        OpBody::ELam(x, b) | OpBody::LLam(x, b) | OpBody::VLam(x, b) => {
            bump(m, x);
            walk_ids_body(b, m);
        }
        OpBody::KLam(k, t) => {
            bump(m, k);
            walk_ids_term(t, m);
        }
    }
}

fn walk_ids_sig(s: &OpSignature, m: &mut u32) {
    match s {
        OpSignature::ForallEffect(x, b) | OpSignature::ForallLife(x, b) => {
            bump(m, x);
            walk_ids_sig(b, m);
        }
        OpSignature::Arrow(t, b) => {
            walk_ids_type(t, m);
            walk_ids_sig(b, m);
        }
        OpSignature::Result(t, es) => {
            walk_ids_type(t, m);
            walk_ids_effs(es, m);
        }
    }
}

fn walk_ids_type(t: &TypeExpr, m: &mut u32) {
    match t {
        TypeExpr::Unit => {}
        TypeExpr::Iface { args, life, .. } => {
            for a in args {
                walk_ids_effs(a, m);
            }
            walk_ids_life(life, m);
        }
        TypeExpr::Op { sig, life } => {
            walk_ids_sig(sig, m);
            walk_ids_life(life, m);
        }
        TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
            walk_ids_type(in_ty, m);
            walk_ids_effs(in_eff, m);
            walk_ids_type(out_ty, m);
            walk_ids_effs(out_eff, m);
        }
    }
}

fn walk_ids_effs(es: &EffectSet, m: &mut u32) {
    for e in es.iter() {
        match e {
            AtomicEffect::Var(x) => bump(m, x),
            AtomicEffect::Life(l) => walk_ids_life(l, m),
        }
    }
}

fn walk_ids_life(l: &Lifetime, m: &mut u32) {
    if let Lifetime::Var(x) = l {
        bump(m, x);
    }
}

fn walk_ids_ctx(e: &EvalCtx, m: &mut u32) {
    match e {
        EvalCtx::Hole => {}
        EvalCtx::Unroll(e) | EvalCtx::Up(e) | EvalCtx::Reset(_, e) => walk_ids_ctx(e, m),
        EvalCtx::EApp(e, es) => {
            walk_ids_ctx(e, m);
            walk_ids_effs(es, m);
        }
        EvalCtx::LApp(e, l) => {
            walk_ids_ctx(e, m);
            walk_ids_life(l, m);
        }
        EvalCtx::AppFun(e, s) | EvalCtx::Throw(e, s) => {
            walk_ids_ctx(e, m);
            walk_ids_term(s, m);
        }
        EvalCtx::AppArg(v, e) => {
            walk_ids_term(v, m);
            walk_ids_ctx(e, m);
        }
        EvalCtx::Let(x, e, body) => {
            bump(m, x);
            walk_ids_ctx(e, m);
            walk_ids_term(body, m);
        }
    }
}

pub fn free_effect_vars_type(t: &TypeExpr) -> HashSet<u32> {
    let mut acc = HashSet::new();
    let mut bound = Vec::new();
    fev_type(t, &mut bound, &mut acc);
    acc
}

pub fn free_effect_vars_effs(es: &EffectSet) -> HashSet<u32> {
    es.iter()
        .filter_map(|e| match e {
            AtomicEffect::Var(x) => Some(x.id),
            AtomicEffect::Life(_) => None,
        })
        .collect()
}

fn fev_type(t: &TypeExpr, bound: &mut Vec<u32>, acc: &mut HashSet<u32>) {
    match t {
        TypeExpr::Unit => {}
        TypeExpr::Iface { args, .. } => {
            for a in args {
                fev_effs(a, bound, acc);
            }
        }
        TypeExpr::Op { sig, .. } => fev_sig(sig, bound, acc),
        TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
            fev_type(in_ty, bound, acc);
            fev_effs(in_eff, bound, acc);
            fev_type(out_ty, bound, acc);
            fev_effs(out_eff, bound, acc);
        }
    }
}

fn fev_sig(s: &OpSignature, bound: &mut Vec<u32>, acc: &mut HashSet<u32>) {
    match s {
        OpSignature::ForallEffect(x, b) => {
            bound.push(x.id);
            fev_sig(b, bound, acc);
            bound.pop();
        }
        OpSignature::ForallLife(_, b) => fev_sig(b, bound, acc),
        OpSignature::Arrow(t, b) => {
            fev_type(t, bound, acc);
            fev_sig(b, bound, acc);
        }
        OpSignature::Result(t, es) => {
            fev_type(t, bound, acc);
            fev_effs(es, bound, acc);
        }
    }
}

fn fev_effs(es: &EffectSet, bound: &mut Vec<u32>, acc: &mut HashSet<u32>) {
    for e in es.iter() {
        if let AtomicEffect::Var(x) = e {
            if !bound.contains(&x.id) {
                acc.insert(x.id);
            }
        }
    }
}

pub fn free_life_vars_effs(es: &EffectSet) -> HashSet<u32> {
    es.iter()
        .filter_map(|e| match e {
            AtomicEffect::Life(Lifetime::Var(x)) => Some(x.id),
            _ => None,
        })
        .collect()
}

/// Labels occurring in a type (used for the region freeness side condition).
pub fn labels_in_type(t: &TypeExpr, acc: &mut HashSet<Label>) {
    match t {
        TypeExpr::Unit => {}
        TypeExpr::Iface { args, life, .. } => {
            for a in args {
                labels_in_effs(a, acc);
            }
            labels_in_life(life, acc);
        }
        TypeExpr::Op { sig, life } => {
            labels_in_sig(sig, acc);
            labels_in_life(life, acc);
        }
        TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
            labels_in_type(in_ty, acc);
            labels_in_effs(in_eff, acc);
            labels_in_type(out_ty, acc);
            labels_in_effs(out_eff, acc);
        }
    }
}

pub fn labels_in_sig(s: &OpSignature, acc: &mut HashSet<Label>) {
    match s {
        OpSignature::ForallEffect(_, b) | OpSignature::ForallLife(_, b) => labels_in_sig(b, acc),
        OpSignature::Arrow(t, b) => {
            labels_in_type(t, acc);
            labels_in_sig(b, acc);
        }
        OpSignature::Result(t, es) => {
            labels_in_type(t, acc);
            labels_in_effs(es, acc);
        }
    }
}

pub fn labels_in_effs(es: &EffectSet, acc: &mut HashSet<Label>) {
    for e in es.iter() {
        if let AtomicEffect::Life(l) = e {
            labels_in_life(l, acc);
        }
    }
}

fn labels_in_life(l: &Lifetime, acc: &mut HashSet<Label>) {
    if let Lifetime::Label(lbl) = l {
        acc.insert(*lbl);
    }
}

/// All labels mentioned anywhere in a term (free occurrences and binders).
pub fn labels_in_term(t: &Term, acc: &mut HashSet<Label>) {
    match &t.kind {
        TermK::Var(_) | TermK::Unit => {}
        TermK::Fix(fx) => {
            for a in &fx.iface.args {
                labels_in_effs(a, acc);
            }
            labels_in_life(&fx.life, acc);
            labels_in_body(&fx.body, acc);
        }
        TermK::Op(op) => {
            labels_in_sig(&op.sig, acc);
            labels_in_life(&op.life, acc);
            labels_in_body(&op.body, acc);
        }
        TermK::Cont(c) => {
            labels_in_type(&c.in_ty, acc);
            labels_in_effs(&c.in_eff, acc);
            labels_in_ctx(&c.ctx, acc);
        }
        TermK::Unroll(s) | TermK::Up(s) => labels_in_term(s, acc),
        TermK::EApp(s, es) => {
            labels_in_term(s, acc);
            labels_in_effs(es, acc);
        }
        TermK::LApp(s, l) => {
            labels_in_term(s, acc);
            labels_in_life(l, acc);
        }
        TermK::App(f, a) | TermK::Throw(f, a) => {
            labels_in_term(f, acc);
            labels_in_term(a, acc);
        }
        TermK::Region(l, s) | TermK::Reset(l, s) => {
            acc.insert(*l);
            labels_in_term(s, acc);
        }
        TermK::Let(_, s, body) => {
            labels_in_term(s, acc);
            labels_in_term(body, acc);
        }
    }
}

fn labels_in_body(b: &OpBody, acc: &mut HashSet<Label>) {
    match b {
        OpBody::ELam(_, b) | OpBody::LLam(_, b) | OpBody::VLam(_, b) => labels_in_body(b, acc),
        OpBody::KLam(_, t) => labels_in_term(t, acc),
    }
}

fn labels_in_ctx(e: &EvalCtx, acc: &mut HashSet<Label>) {
    match e {
        EvalCtx::Hole => {}
        EvalCtx::Unroll(e) | EvalCtx::Up(e) => labels_in_ctx(e, acc),
        EvalCtx::EApp(e, es) => {
            labels_in_ctx(e, acc);
            labels_in_effs(es, acc);
        }
        EvalCtx::LApp(e, l) => {
            labels_in_ctx(e, acc);
            labels_in_life(l, acc);
        }
        EvalCtx::AppFun(e, s) | EvalCtx::Throw(e, s) => {
            labels_in_ctx(e, acc);
            labels_in_term(s, acc);
        }
        EvalCtx::AppArg(v, e) => {
            labels_in_term(v, acc);
            labels_in_ctx(e, acc);
        }
        EvalCtx::Let(_, e, body) => {
            labels_in_ctx(e, acc);
            labels_in_term(body, acc);
        }
        EvalCtx::Reset(l, e) => {
            acc.insert(*l);
            labels_in_ctx(e, acc);
        }
    }
}

// ---------------------------------------------------------------------------
// Value substitution t[v/x]
// ---------------------------------------------------------------------------

struct ValueSubst<'a> {
    x: u32,
    v: &'a Term,
    v_free: HashSet<u32>,
    next_fresh: u32,
}

/// Capture-avoiding substitution of value `v` for variable `x` in `t`.
pub fn subst_value(t: &Term, x: &Ident, v: &Term) -> Term {
    debug_assert!(v.is_value(), "substituted term must be a value");
    let mut s = ValueSubst {
        x: x.id,
        v,
        v_free: free_term_vars(v),
        next_fresh: 0,
    };
    s.term(t).unwrap_or_else(|| t.clone())
}

pub fn subst_value_body(m: &OpBody, x: &Ident, v: &Term) -> OpBody {
    let mut s = ValueSubst {
        x: x.id,
        v,
        v_free: free_term_vars(v),
        next_fresh: 0,
    };
    s.body(m).unwrap_or_else(|| m.clone())
}

pub fn subst_value_ctx(e: &EvalCtx, x: &Ident, v: &Term) -> EvalCtx {
    let mut s = ValueSubst {
        x: x.id,
        v,
        v_free: free_term_vars(v),
        next_fresh: 0,
    };
    s.ctx(e).unwrap_or_else(|| e.clone())
}

impl<'a> ValueSubst<'a> {
    fn fresh(&mut self, base: &Ident, around: &Term) -> Ident {
        if self.next_fresh == 0 {
            let mut m = max_ident_id(around).max(max_ident_id(self.v));
            for id in &self.v_free {
                m = m.max(*id);
            }
            self.next_fresh = m + 1;
        }
        let id = self.next_fresh;
        self.next_fresh += 1;
        Ident::new(base.name.clone(), id)
    }

    fn term(&mut self, t: &Term) -> Option<Term> {
        let kind = match &t.kind {
            TermK::Var(y) => {
                if y.id == self.x {
                    return Some(self.v.clone());
                }
                return None;
            }
            TermK::Unit => return None,
            TermK::Fix(fx) => {
                if fx.self_var.id == self.x {
                    return None;
                }
                let (self_var, body) = self.under_binder_body(&fx.self_var, &fx.body)?;
                TermK::Fix(FixV {
                    self_var,
                    iface: fx.iface.clone(),
                    body,
                    life: fx.life.clone(),
                })
            }
            TermK::Op(op) => {
                let body = self.body(&op.body)?;
                TermK::Op(OpV {
                    sig: op.sig.clone(),
                    body,
                    life: op.life.clone(),
                    iface_name: op.iface_name.clone(),
                })
            }
            TermK::Cont(c) => {
                let ctx = self.ctx(&c.ctx)?;
                TermK::Cont(ContV {
                    ctx: Arc::new(ctx),
                    in_ty: c.in_ty.clone(),
                    in_eff: c.in_eff.clone(),
                })
            }
            TermK::Unroll(s) => TermK::Unroll(Arc::new(self.term(s)?)),
            TermK::EApp(s, es) => TermK::EApp(Arc::new(self.term(s)?), es.clone()),
            TermK::LApp(s, l) => TermK::LApp(Arc::new(self.term(s)?), l.clone()),
            TermK::App(f, a) => {
                let nf = self.term(f);
                let na = self.term(a);
                if nf.is_none() && na.is_none() {
                    return None;
                }
                TermK::App(
                    nf.map(Arc::new).unwrap_or_else(|| f.clone()),
                    na.map(Arc::new).unwrap_or_else(|| a.clone()),
                )
            }
            TermK::Region(l, s) => TermK::Region(*l, Arc::new(self.term(s)?)),
            TermK::Up(s) => TermK::Up(Arc::new(self.term(s)?)),
            TermK::Let(y, s, body) => {
                let ns = self.term(s);
                if y.id == self.x {
                    let ns = ns?;
                    TermK::Let(y.clone(), Arc::new(ns), body.clone())
                } else if self.v_free.contains(&y.id) {
                    let y2 = self.fresh(y, body);
                    let renamed = rename_term_var(body, y, &y2);
                    let nb = self.term(&renamed).unwrap_or(renamed);
                    TermK::Let(
                        y2,
                        ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                        Arc::new(nb),
                    )
                } else {
                    let nb = self.term(body);
                    if ns.is_none() && nb.is_none() {
                        return None;
                    }
                    TermK::Let(
                        y.clone(),
                        ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                        nb.map(Arc::new).unwrap_or_else(|| body.clone()),
                    )
                }
            }
            TermK::Throw(f, a) => {
                let nf = self.term(f);
                let na = self.term(a);
                if nf.is_none() && na.is_none() {
                    return None;
                }
                TermK::Throw(
                    nf.map(Arc::new).unwrap_or_else(|| f.clone()),
                    na.map(Arc::new).unwrap_or_else(|| a.clone()),
                )
            }
            TermK::Reset(l, s) => TermK::Reset(*l, Arc::new(self.term(s)?)),
        };
        Some(Term::at(kind, t.span))
    }

    /// Substitutes under a binder that binds a term variable in an OpBody,
    /// freshening if the binder would capture a free variable of `v`.
    fn under_binder_body(&mut self, bind: &Ident, body: &OpBody) -> Option<(Ident, OpBody)> {
        if self.v_free.contains(&bind.id) {
            let holder = Term::new(TermK::Op(OpV {
                sig: OpSignature::Result(Box::new(TypeExpr::Unit), EffectSet::empty()),
                body: body.clone(),
                life: Lifetime::Label(Label(0)),
                iface_name: None,
            }));
            let b2 = self.fresh(bind, &holder);
            let renamed = rename_term_var_body(body, bind, &b2);
            let nb = self.body(&renamed).unwrap_or(renamed);
            Some((b2, nb))
        } else {
            Some((bind.clone(), self.body(body)?))
        }
    }

    fn body(&mut self, m: &OpBody) -> Option<OpBody> {
        match m {
            OpBody::ELam(a, b) => Some(OpBody::ELam(a.clone(), Arc::new(self.body(b)?))),
            OpBody::LLam(p, b) => Some(OpBody::LLam(p.clone(), Arc::new(self.body(b)?))),
            OpBody::VLam(y, b) => {
                if y.id == self.x {
                    return None;
                }
                let (y2, nb) = self.under_binder_body(y, b)?;
                Some(OpBody::VLam(y2, Arc::new(nb)))
            }
            OpBody::KLam(k, t) => {
                if k.id == self.x {
                    return None;
                }
                if self.v_free.contains(&k.id) {
                    let k2 = self.fresh(k, t);
                    let renamed = rename_term_var(t, k, &k2);
                    let nt = self.term(&renamed).unwrap_or(renamed);
                    Some(OpBody::KLam(k2, Arc::new(nt)))
                } else {
                    Some(OpBody::KLam(k.clone(), Arc::new(self.term(t)?)))
                }
            }
        }
    }

    fn ctx(&mut self, e: &EvalCtx) -> Option<EvalCtx> {
        match e {
            EvalCtx::Hole => None,
            EvalCtx::Unroll(i) => Some(EvalCtx::Unroll(Arc::new(self.ctx(i)?))),
            EvalCtx::EApp(i, es) => Some(EvalCtx::EApp(Arc::new(self.ctx(i)?), es.clone())),
            EvalCtx::LApp(i, l) => Some(EvalCtx::LApp(Arc::new(self.ctx(i)?), l.clone())),
            EvalCtx::AppFun(i, s) => {
                let ni = self.ctx(i);
                let ns = self.term(s);
                if ni.is_none() && ns.is_none() {
                    return None;
                }
                Some(EvalCtx::AppFun(
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                ))
            }
            EvalCtx::AppArg(v, i) => {
                let nv = self.term(v);
                let ni = self.ctx(i);
                if nv.is_none() && ni.is_none() {
                    return None;
                }
                Some(EvalCtx::AppArg(
                    nv.map(Arc::new).unwrap_or_else(|| v.clone()),
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                ))
            }
            EvalCtx::Up(i) => Some(EvalCtx::Up(Arc::new(self.ctx(i)?))),
            EvalCtx::Let(y, i, body) => {
                let ni = self.ctx(i);
                if y.id == self.x {
                    let ni = ni?;
                    Some(EvalCtx::Let(y.clone(), Arc::new(ni), body.clone()))
                } else if self.v_free.contains(&y.id) {
                    let y2 = self.fresh(y, body);
                    let renamed = rename_term_var(body, y, &y2);
                    let nb = self.term(&renamed).unwrap_or(renamed);
                    Some(EvalCtx::Let(
                        y2,
                        ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                        Arc::new(nb),
                    ))
                } else {
                    let nb = self.term(body);
                    if ni.is_none() && nb.is_none() {
                        return None;
                    }
                    Some(EvalCtx::Let(
                        y.clone(),
                        ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                        nb.map(Arc::new).unwrap_or_else(|| body.clone()),
                    ))
                }
            }
            EvalCtx::Throw(i, s) => {
                let ni = self.ctx(i);
                let ns = self.term(s);
                if ni.is_none() && ns.is_none() {
                    return None;
                }
                Some(EvalCtx::Throw(
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                ))
            }
            EvalCtx::Reset(l, i) => Some(EvalCtx::Reset(*l, Arc::new(self.ctx(i)?))),
        }
    }
}

fn rename_term_var(t: &Term, old: &Ident, new: &Ident) -> Term {
    subst_value(t, old, &Term::var(new.clone()))
}

fn rename_term_var_body(m: &OpBody, old: &Ident, new: &Ident) -> OpBody {
    subst_value_body(m, old, &Term::var(new.clone()))
}

// ---------------------------------------------------------------------------
// Effect, lifetime, and label substitution
// ---------------------------------------------------------------------------

enum TyOp {
    /// [effs / alpha]: flattened into surrounding effect sets.
    Effect { var: u32, repl: EffectSet },
    /// [life / phi]
    Life { var: u32, repl: Lifetime },
    /// [to / from]: labels are not variables; region binders shadow.
    Label { from: Label, to: Label },
}

struct TySubst {
    op: TyOp,
    /// Effect/lifetime variable ids free in the replacement, for capture checks.
    repl_vars: HashSet<u32>,
    next_fresh: u32,
}

impl TySubst {
    fn for_effect(var: &Ident, repl: &EffectSet) -> TySubst {
        TySubst {
            repl_vars: free_effect_vars_effs(repl),
            op: TyOp::Effect { var: var.id, repl: repl.clone() },
            next_fresh: 0,
        }
    }

    fn for_life(var: &Ident, repl: &Lifetime) -> TySubst {
        let mut repl_vars = HashSet::new();
        if let Lifetime::Var(x) = repl {
            repl_vars.insert(x.id);
        }
        TySubst {
            op: TyOp::Life { var: var.id, repl: repl.clone() },
            repl_vars,
            next_fresh: 0,
        }
    }

    fn for_label(from: Label, to: Label) -> TySubst {
        TySubst {
            op: TyOp::Label { from, to },
            repl_vars: HashSet::new(),
            next_fresh: 0,
        }
    }

    fn fresh_id(&mut self, floor: u32) -> u32 {
        if self.next_fresh <= floor {
            self.next_fresh = floor + 1;
        }
        let id = self.next_fresh;
        self.next_fresh += 1;
        id
    }

    fn effs(&mut self, es: &EffectSet) -> Option<EffectSet> {
        match &self.op {
            TyOp::Effect { var, repl } => {
                let hit = es.iter().any(|e| matches!(e, AtomicEffect::Var(x) if x.id == *var));
                if !hit {
                    return None;
                }
                let mut out: Vec<AtomicEffect> = es
                    .iter()
                    .filter(|e| !matches!(e, AtomicEffect::Var(x) if x.id == *var))
                    .cloned()
                    .collect();
                out.extend(repl.iter().cloned());
                Some(EffectSet::from_vec(out))
            }
            TyOp::Life { var, repl } => {
                let hit = es
                    .iter()
                    .any(|e| matches!(e, AtomicEffect::Life(Lifetime::Var(x)) if x.id == *var));
                if !hit {
                    return None;
                }
                Some(
                    es.iter()
                        .map(|e| match e {
                            AtomicEffect::Life(Lifetime::Var(x)) if x.id == *var => {
                                AtomicEffect::Life(repl.clone())
                            }
                            other => other.clone(),
                        })
                        .collect(),
                )
            }
            TyOp::Label { from, to } => {
                if !es.mentions_label(*from) {
                    return None;
                }
                Some(
                    es.iter()
                        .map(|e| match e {
                            AtomicEffect::Life(Lifetime::Label(l)) if l == from => {
                                AtomicEffect::Life(Lifetime::Label(*to))
                            }
                            other => other.clone(),
                        })
                        .collect(),
                )
            }
        }
    }

    fn life(&mut self, l: &Lifetime) -> Option<Lifetime> {
        match (&self.op, l) {
            (TyOp::Life { var, repl }, Lifetime::Var(x)) if x.id == *var => Some(repl.clone()),
            (TyOp::Label { from, to }, Lifetime::Label(lbl)) if lbl == from => {
                Some(Lifetime::Label(*to))
            }
            _ => None,
        }
    }

    fn ty(&mut self, t: &TypeExpr) -> Option<TypeExpr> {
        match t {
            TypeExpr::Unit => None,
            TypeExpr::Iface { name, args, life } => {
                let nargs: Vec<Option<EffectSet>> = args.iter().map(|a| self.effs(a)).collect();
                let nlife = self.life(life);
                if nargs.iter().all(|a| a.is_none()) && nlife.is_none() {
                    return None;
                }
                Some(TypeExpr::Iface {
                    name: name.clone(),
                    args: nargs
                        .into_iter()
                        .zip(args)
                        .map(|(n, o)| n.unwrap_or_else(|| o.clone()))
                        .collect(),
                    life: nlife.unwrap_or_else(|| life.clone()),
                })
            }
            TypeExpr::Op { sig, life } => {
                let nsig = self.sig(sig);
                let nlife = self.life(life);
                if nsig.is_none() && nlife.is_none() {
                    return None;
                }
                Some(TypeExpr::Op {
                    sig: Box::new(nsig.unwrap_or_else(|| (**sig).clone())),
                    life: nlife.unwrap_or_else(|| life.clone()),
                })
            }
            TypeExpr::Cont { in_ty, in_eff, out_ty, out_eff } => {
                let a = self.ty(in_ty);
                let b = self.effs(in_eff);
                let c = self.ty(out_ty);
                let d = self.effs(out_eff);
                if a.is_none() && b.is_none() && c.is_none() && d.is_none() {
                    return None;
                }
                Some(TypeExpr::Cont {
                    in_ty: Box::new(a.unwrap_or_else(|| (**in_ty).clone())),
                    in_eff: b.unwrap_or_else(|| in_eff.clone()),
                    out_ty: Box::new(c.unwrap_or_else(|| (**out_ty).clone())),
                    out_eff: d.unwrap_or_else(|| out_eff.clone()),
                })
            }
        }
    }

    /// Does this substitution bind at an effect-forall (resp. life-forall)?
    fn stops_at_effect_binder(&self, b: &Ident) -> bool {
        matches!(&self.op, TyOp::Effect { var, .. } if *var == b.id)
    }

    fn stops_at_life_binder(&self, b: &Ident) -> bool {
        matches!(&self.op, TyOp::Life { var, .. } if *var == b.id)
    }

    fn captures(&self, b: &Ident) -> bool {
        match &self.op {
            TyOp::Effect { .. } | TyOp::Life { .. } => self.repl_vars.contains(&b.id),
            TyOp::Label { .. } => false,
        }
    }

    fn sig(&mut self, s: &OpSignature) -> Option<OpSignature> {
        match s {
            OpSignature::ForallEffect(a, b) => {
                if self.stops_at_effect_binder(a) {
                    return None;
                }
                if self.captures(a) {
                    let mut m = 0;
                    walk_ids_sig(b, &mut m);
                    let a2 = Ident::new(a.name.clone(), self.fresh_id(m));
                    let renamed = subst_effect_sig(b, a, &EffectSet::singleton(AtomicEffect::Var(a2.clone())));
                    let nb = self.sig(&renamed).unwrap_or(renamed);
                    return Some(OpSignature::ForallEffect(a2, Box::new(nb)));
                }
                Some(OpSignature::ForallEffect(a.clone(), Box::new(self.sig(b)?)))
            }
            OpSignature::ForallLife(p, b) => {
                if self.stops_at_life_binder(p) {
                    return None;
                }
                if self.captures(p) {
                    let mut m = 0;
                    walk_ids_sig(b, &mut m);
                    let p2 = Ident::new(p.name.clone(), self.fresh_id(m));
                    let renamed = subst_life_sig(b, p, &Lifetime::Var(p2.clone()));
                    let nb = self.sig(&renamed).unwrap_or(renamed);
                    return Some(OpSignature::ForallLife(p2, Box::new(nb)));
                }
                Some(OpSignature::ForallLife(p.clone(), Box::new(self.sig(b)?)))
            }
            OpSignature::Arrow(t, b) => {
                let nt = self.ty(t);
                let nb = self.sig(b);
                if nt.is_none() && nb.is_none() {
                    return None;
                }
                Some(OpSignature::Arrow(
                    Box::new(nt.unwrap_or_else(|| (**t).clone())),
                    Box::new(nb.unwrap_or_else(|| (**b).clone())),
                ))
            }
            OpSignature::Result(t, es) => {
                let nt = self.ty(t);
                let ne = self.effs(es);
                if nt.is_none() && ne.is_none() {
                    return None;
                }
                Some(OpSignature::Result(
                    Box::new(nt.unwrap_or_else(|| (**t).clone())),
                    ne.unwrap_or_else(|| es.clone()),
                ))
            }
        }
    }

    fn body(&mut self, m: &OpBody) -> Option<OpBody> {
        match m {
            OpBody::ELam(a, b) => {
                if self.stops_at_effect_binder(a) {
                    return None;
                }
                if self.captures(a) {
                    let mut mx = 0;
                    walk_ids_body(b, &mut mx);
                    let a2 = Ident::new(a.name.clone(), self.fresh_id(mx));
                    let renamed =
                        subst_effect_body(b, a, &EffectSet::singleton(AtomicEffect::Var(a2.clone())));
                    let nb = self.body(&renamed).unwrap_or(renamed);
                    return Some(OpBody::ELam(a2, Arc::new(nb)));
                }
                Some(OpBody::ELam(a.clone(), Arc::new(self.body(b)?)))
            }
            OpBody::LLam(p, b) => {
                if self.stops_at_life_binder(p) {
                    return None;
                }
                if self.captures(p) {
                    let mut mx = 0;
                    walk_ids_body(b, &mut mx);
                    let p2 = Ident::new(p.name.clone(), self.fresh_id(mx));
                    let renamed = subst_life_body(b, p, &Lifetime::Var(p2.clone()));
                    let nb = self.body(&renamed).unwrap_or(renamed);
                    return Some(OpBody::LLam(p2, Arc::new(nb)));
                }
                Some(OpBody::LLam(p.clone(), Arc::new(self.body(b)?)))
            }
            OpBody::VLam(x, b) => Some(OpBody::VLam(x.clone(), Arc::new(self.body(b)?))),
            OpBody::KLam(k, t) => Some(OpBody::KLam(k.clone(), Arc::new(self.term(t)?))),
        }
    }

    fn term(&mut self, t: &Term) -> Option<Term> {
        let kind = match &t.kind {
            TermK::Var(_) | TermK::Unit => return None,
            TermK::Fix(fx) => {
                let nargs: Vec<Option<EffectSet>> =
                    fx.iface.args.iter().map(|a| self.effs(a)).collect();
                let nlife = self.life(&fx.life);
                let nbody = self.body(&fx.body);
                if nargs.iter().all(|a| a.is_none()) && nlife.is_none() && nbody.is_none() {
                    return None;
                }
                TermK::Fix(FixV {
                    self_var: fx.self_var.clone(),
                    iface: IfaceRef {
                        name: fx.iface.name.clone(),
                        args: nargs
                            .into_iter()
                            .zip(&fx.iface.args)
                            .map(|(n, o)| n.unwrap_or_else(|| o.clone()))
                            .collect(),
                    },
                    body: nbody.unwrap_or_else(|| fx.body.clone()),
                    life: nlife.unwrap_or_else(|| fx.life.clone()),
                })
            }
            TermK::Op(op) => {
                let nsig = self.sig(&op.sig);
                let nlife = self.life(&op.life);
                let nbody = self.body(&op.body);
                if nsig.is_none() && nlife.is_none() && nbody.is_none() {
                    return None;
                }
                TermK::Op(OpV {
                    sig: nsig.unwrap_or_else(|| op.sig.clone()),
                    body: nbody.unwrap_or_else(|| op.body.clone()),
                    life: nlife.unwrap_or_else(|| op.life.clone()),
                    iface_name: op.iface_name.clone(),
                })
            }
            TermK::Cont(c) => {
                let nctx = self.ctx(&c.ctx);
                let nty = self.ty(&c.in_ty);
                let neff = self.effs(&c.in_eff);
                if nctx.is_none() && nty.is_none() && neff.is_none() {
                    return None;
                }
                TermK::Cont(ContV {
                    ctx: nctx.map(Arc::new).unwrap_or_else(|| c.ctx.clone()),
                    in_ty: nty.unwrap_or_else(|| c.in_ty.clone()),
                    in_eff: neff.unwrap_or_else(|| c.in_eff.clone()),
                })
            }
            TermK::Unroll(s) => TermK::Unroll(Arc::new(self.term(s)?)),
            TermK::EApp(s, es) => {
                let ns = self.term(s);
                let ne = self.effs(es);
                if ns.is_none() && ne.is_none() {
                    return None;
                }
                TermK::EApp(
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                    ne.unwrap_or_else(|| es.clone()),
                )
            }
            TermK::LApp(s, l) => {
                let ns = self.term(s);
                let nl = self.life(l);
                if ns.is_none() && nl.is_none() {
                    return None;
                }
                TermK::LApp(
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                    nl.unwrap_or_else(|| l.clone()),
                )
            }
            TermK::App(f, a) => {
                let nf = self.term(f);
                let na = self.term(a);
                if nf.is_none() && na.is_none() {
                    return None;
                }
                TermK::App(
                    nf.map(Arc::new).unwrap_or_else(|| f.clone()),
                    na.map(Arc::new).unwrap_or_else(|| a.clone()),
                )
            }
            TermK::Region(l, s) => {
                if let TyOp::Label { from, to } = &self.op {
                    if l == from {
                        return None; // inner region shadows the label
                    }
                    if l == to {
                        // Rename the binder away from the incoming label.
                        let mut labels = HashSet::new();
                        labels_in_term(s, &mut labels);
                        let mx = labels.iter().map(|x| x.0).max().unwrap_or(0);
                        let fresh = Label(mx.max(to.0).max(from.0) + 1);
                        let renamed = subst_label(s, *l, fresh);
                        let ns = self.term(&renamed).unwrap_or(renamed);
                        return Some(Term::at(TermK::Region(fresh, Arc::new(ns)), t.span));
                    }
                }
                TermK::Region(*l, Arc::new(self.term(s)?))
            }
            TermK::Up(s) => TermK::Up(Arc::new(self.term(s)?)),
            TermK::Let(x, s, body) => {
                let ns = self.term(s);
                let nb = self.term(body);
                if ns.is_none() && nb.is_none() {
                    return None;
                }
                TermK::Let(
                    x.clone(),
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                    nb.map(Arc::new).unwrap_or_else(|| body.clone()),
                )
            }
            TermK::Throw(f, a) => {
                let nf = self.term(f);
                let na = self.term(a);
                if nf.is_none() && na.is_none() {
                    return None;
                }
                TermK::Throw(
                    nf.map(Arc::new).unwrap_or_else(|| f.clone()),
                    na.map(Arc::new).unwrap_or_else(|| a.clone()),
                )
            }
            TermK::Reset(l, s) => {
                let nl = match &self.op {
                    TyOp::Label { from, to } if l == from => Some(*to),
                    _ => None,
                };
                let ns = self.term(s);
                if nl.is_none() && ns.is_none() {
                    return None;
                }
                TermK::Reset(
                    nl.unwrap_or(*l),
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                )
            }
        };
        Some(Term::at(kind, t.span))
    }

    fn ctx(&mut self, e: &EvalCtx) -> Option<EvalCtx> {
        match e {
            EvalCtx::Hole => None,
            EvalCtx::Unroll(i) => Some(EvalCtx::Unroll(Arc::new(self.ctx(i)?))),
            EvalCtx::EApp(i, es) => {
                let ni = self.ctx(i);
                let ne = self.effs(es);
                if ni.is_none() && ne.is_none() {
                    return None;
                }
                Some(EvalCtx::EApp(
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                    ne.unwrap_or_else(|| es.clone()),
                ))
            }
            EvalCtx::LApp(i, l) => {
                let ni = self.ctx(i);
                let nl = self.life(l);
                if ni.is_none() && nl.is_none() {
                    return None;
                }
                Some(EvalCtx::LApp(
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                    nl.unwrap_or_else(|| l.clone()),
                ))
            }
            EvalCtx::AppFun(i, s) => {
                let ni = self.ctx(i);
                let ns = self.term(s);
                if ni.is_none() && ns.is_none() {
                    return None;
                }
                Some(EvalCtx::AppFun(
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                ))
            }
            EvalCtx::AppArg(v, i) => {
                let nv = self.term(v);
                let ni = self.ctx(i);
                if nv.is_none() && ni.is_none() {
                    return None;
                }
                Some(EvalCtx::AppArg(
                    nv.map(Arc::new).unwrap_or_else(|| v.clone()),
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                ))
            }
            EvalCtx::Up(i) => Some(EvalCtx::Up(Arc::new(self.ctx(i)?))),
            EvalCtx::Let(x, i, body) => {
                let ni = self.ctx(i);
                let nb = self.term(body);
                if ni.is_none() && nb.is_none() {
                    return None;
                }
                Some(EvalCtx::Let(
                    x.clone(),
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                    nb.map(Arc::new).unwrap_or_else(|| body.clone()),
                ))
            }
            EvalCtx::Throw(i, s) => {
                let ni = self.ctx(i);
                let ns = self.term(s);
                if ni.is_none() && ns.is_none() {
                    return None;
                }
                Some(EvalCtx::Throw(
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                    ns.map(Arc::new).unwrap_or_else(|| s.clone()),
                ))
            }
            EvalCtx::Reset(l, i) => {
                let nl = match &self.op {
                    TyOp::Label { from, to } if l == from => Some(*to),
                    _ => None,
                };
                let ni = self.ctx(i);
                if nl.is_none() && ni.is_none() {
                    return None;
                }
                Some(EvalCtx::Reset(
                    nl.unwrap_or(*l),
                    ni.map(Arc::new).unwrap_or_else(|| i.clone()),
                ))
            }
        }
    }
}

pub fn subst_effect(t: &Term, var: &Ident, repl: &EffectSet) -> Term {
    TySubst::for_effect(var, repl).term(t).unwrap_or_else(|| t.clone())
}

pub fn subst_effect_type(t: &TypeExpr, var: &Ident, repl: &EffectSet) -> TypeExpr {
    TySubst::for_effect(var, repl).ty(t).unwrap_or_else(|| t.clone())
}

pub fn subst_effect_sig(s: &OpSignature, var: &Ident, repl: &EffectSet) -> OpSignature {
    TySubst::for_effect(var, repl).sig(s).unwrap_or_else(|| s.clone())
}

pub fn subst_effect_body(m: &OpBody, var: &Ident, repl: &EffectSet) -> OpBody {
    TySubst::for_effect(var, repl).body(m).unwrap_or_else(|| m.clone())
}

pub fn subst_effect_effs(es: &EffectSet, var: &Ident, repl: &EffectSet) -> EffectSet {
    TySubst::for_effect(var, repl).effs(es).unwrap_or_else(|| es.clone())
}

pub fn subst_life(t: &Term, var: &Ident, repl: &Lifetime) -> Term {
    TySubst::for_life(var, repl).term(t).unwrap_or_else(|| t.clone())
}

pub fn subst_life_type(t: &TypeExpr, var: &Ident, repl: &Lifetime) -> TypeExpr {
    TySubst::for_life(var, repl).ty(t).unwrap_or_else(|| t.clone())
}

pub fn subst_life_sig(s: &OpSignature, var: &Ident, repl: &Lifetime) -> OpSignature {
    TySubst::for_life(var, repl).sig(s).unwrap_or_else(|| s.clone())
}

pub fn subst_life_body(m: &OpBody, var: &Ident, repl: &Lifetime) -> OpBody {
    TySubst::for_life(var, repl).body(m).unwrap_or_else(|| m.clone())
}

pub fn subst_life_effs(es: &EffectSet, var: &Ident, repl: &Lifetime) -> EffectSet {
    TySubst::for_life(var, repl).effs(es).unwrap_or_else(|| es.clone())
}

pub fn subst_label(t: &Term, from: Label, to: Label) -> Term {
    TySubst::for_label(from, to).term(t).unwrap_or_else(|| t.clone())
}

pub fn subst_label_type(t: &TypeExpr, from: Label, to: Label) -> TypeExpr {
    TySubst::for_label(from, to).ty(t).unwrap_or_else(|| t.clone())
}

pub fn subst_label_effs(es: &EffectSet, from: Label, to: Label) -> EffectSet {
    TySubst::for_label(from, to).effs(es).unwrap_or_else(|| es.clone())
}
