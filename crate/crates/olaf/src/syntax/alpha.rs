//! Alpha-equivalence for terms, types, and programs. Bound variables (term,
//! effect, lifetime) and region-bound labels are compared up to consistent
//! renaming; reset labels and other free labels are compared literally.

use super::*;

#[derive(Default)]
struct AlphaCtx {
    term: Vec<(u32, u32)>,
    eff: Vec<(u32, u32)>,
    life: Vec<(u32, u32)>,
    label: Vec<(Label, Label)>,
}

fn lookup(pairs: &[(u32, u32)], l: u32, r: u32) -> bool {
    for (a, b) in pairs.iter().rev() {
        match (*a == l, *b == r) {
            (true, true) => return true,
            (true, false) | (false, true) => return false,
            (false, false) => {}
        }
    }
    l == r
}

fn lookup_label(pairs: &[(Label, Label)], l: Label, r: Label) -> bool {
    for (a, b) in pairs.iter().rev() {
        match (*a == l, *b == r) {
            (true, true) => return true,
            (true, false) | (false, true) => return false,
            (false, false) => {}
        }
    }
    l == r
}

macro_rules! scoped {
    ($stack:expr, $pair:expr, $body:expr) => {{
        $stack.push($pair);
        let r = $body;
        $stack.pop();
        r
    }};
}

impl AlphaCtx {
    fn term_eq(&mut self, a: &Term, b: &Term) -> bool {
        match (&a.kind, &b.kind) {
            (TermK::Var(x), TermK::Var(y)) => lookup(&self.term, x.id, y.id),
            (TermK::Unit, TermK::Unit) => true,
            (TermK::Fix(f1), TermK::Fix(f2)) => {
                f1.iface.name == f2.iface.name
                    && f1.iface.args.len() == f2.iface.args.len()
                    && f1
                        .iface
                        .args
                        .iter()
                        .zip(&f2.iface.args)
                        .all(|(x, y)| self.effs_eq(x, y))
                    && self.life_eq(&f1.life, &f2.life)
                    && scoped!(
                        self.term,
                        (f1.self_var.id, f2.self_var.id),
                        self.body_eq(&f1.body, &f2.body)
                    )
            }
            (TermK::Op(o1), TermK::Op(o2)) => {
                self.sig_eq(&o1.sig, &o2.sig)
                    && self.life_eq(&o1.life, &o2.life)
                    && o1.iface_name == o2.iface_name
                    && self.body_eq(&o1.body, &o2.body)
            }
            (TermK::Cont(c1), TermK::Cont(c2)) => {
                self.ty_eq(&c1.in_ty, &c2.in_ty)
                    && self.effs_eq(&c1.in_eff, &c2.in_eff)
                    && self.ctx_eq(&c1.ctx, &c2.ctx)
            }
            (TermK::Unroll(s1), TermK::Unroll(s2)) | (TermK::Up(s1), TermK::Up(s2)) => {
                self.term_eq(s1, s2)
            }
            (TermK::EApp(s1, e1), TermK::EApp(s2, e2)) => {
                self.term_eq(s1, s2) && self.effs_eq(e1, e2)
            }
            (TermK::LApp(s1, l1), TermK::LApp(s2, l2)) => {
                self.term_eq(s1, s2) && self.life_eq(l1, l2)
            }
            (TermK::App(f1, a1), TermK::App(f2, a2))
            | (TermK::Throw(f1, a1), TermK::Throw(f2, a2)) => {
                self.term_eq(f1, f2) && self.term_eq(a1, a2)
            }
            (TermK::Region(l1, s1), TermK::Region(l2, s2)) => {
                scoped!(self.label, (*l1, *l2), self.term_eq(s1, s2))
            }
            (TermK::Reset(l1, s1), TermK::Reset(l2, s2)) => {
                lookup_label(&self.label, *l1, *l2) && self.term_eq(s1, s2)
            }
            (TermK::Let(x1, s1, b1), TermK::Let(x2, s2, b2)) => {
                self.term_eq(s1, s2)
                    && scoped!(self.term, (x1.id, x2.id), self.term_eq(b1, b2))
            }
            _ => false,
        }
    }

    fn body_eq(&mut self, a: &OpBody, b: &OpBody) -> bool {
        match (a, b) {
            (OpBody::ELam(x1, b1), OpBody::ELam(x2, b2)) => {
                scoped!(self.eff, (x1.id, x2.id), self.body_eq(b1, b2))
            }
            (OpBody::LLam(x1, b1), OpBody::LLam(x2, b2)) => {
                scoped!(self.life, (x1.id, x2.id), self.body_eq(b1, b2))
            }
            (OpBody::VLam(x1, b1), OpBody::VLam(x2, b2)) => {
                scoped!(self.term, (x1.id, x2.id), self.body_eq(b1, b2))
            }
            (OpBody::KLam(k1, t1), OpBody::KLam(k2, t2)) => {
                scoped!(self.term, (k1.id, k2.id), self.term_eq(t1, t2))
            }
            _ => false,
        }
    }

    fn sig_eq(&mut self, a: &OpSignature, b: &OpSignature) -> bool {
        match (a, b) {
            (OpSignature::ForallEffect(x1, s1), OpSignature::ForallEffect(x2, s2)) => {
                scoped!(self.eff, (x1.id, x2.id), self.sig_eq(s1, s2))
            }
            (OpSignature::ForallLife(x1, s1), OpSignature::ForallLife(x2, s2)) => {
                scoped!(self.life, (x1.id, x2.id), self.sig_eq(s1, s2))
            }
            (OpSignature::Arrow(t1, s1), OpSignature::Arrow(t2, s2)) => {
                self.ty_eq(t1, t2) && self.sig_eq(s1, s2)
            }
            (OpSignature::Result(t1, e1), OpSignature::Result(t2, e2)) => {
                self.ty_eq(t1, t2) && self.effs_eq(e1, e2)
            }
            _ => false,
        }
    }

    fn ty_eq(&mut self, a: &TypeExpr, b: &TypeExpr) -> bool {
        match (a, b) {
            (TypeExpr::Unit, TypeExpr::Unit) => true,
            (
                TypeExpr::Iface { name: n1, args: a1, life: l1 },
                TypeExpr::Iface { name: n2, args: a2, life: l2 },
            ) => {
                n1 == n2
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| self.effs_eq(x, y))
                    && self.life_eq(l1, l2)
            }
            (TypeExpr::Op { sig: s1, life: l1 }, TypeExpr::Op { sig: s2, life: l2 }) => {
                self.sig_eq(s1, s2) && self.life_eq(l1, l2)
            }
            (
                TypeExpr::Cont { in_ty: i1, in_eff: ie1, out_ty: o1, out_eff: oe1 },
                TypeExpr::Cont { in_ty: i2, in_eff: ie2, out_ty: o2, out_eff: oe2 },
            ) => {
                self.ty_eq(i1, i2)
                    && self.effs_eq(ie1, ie2)
                    && self.ty_eq(o1, o2)
                    && self.effs_eq(oe1, oe2)
            }
            _ => false,
        }
    }

    fn effs_eq(&mut self, a: &EffectSet, b: &EffectSet) -> bool {
        if a.len() != b.len() {
            return false;
        }
        a.iter().all(|x| b.iter().any(|y| self.atomic_eq(x, y)))
            && b.iter().all(|y| a.iter().any(|x| self.atomic_eq(x, y)))
    }

    fn atomic_eq(&mut self, a: &AtomicEffect, b: &AtomicEffect) -> bool {
        match (a, b) {
            (AtomicEffect::Var(x), AtomicEffect::Var(y)) => lookup(&self.eff, x.id, y.id),
            (AtomicEffect::Life(l1), AtomicEffect::Life(l2)) => self.life_eq(l1, l2),
            _ => false,
        }
    }

    fn life_eq(&mut self, a: &Lifetime, b: &Lifetime) -> bool {
        match (a, b) {
            (Lifetime::Var(x), Lifetime::Var(y)) => lookup(&self.life, x.id, y.id),
            (Lifetime::Label(l1), Lifetime::Label(l2)) => lookup_label(&self.label, *l1, *l2),
            _ => false,
        }
    }

    fn ctx_eq(&mut self, a: &EvalCtx, b: &EvalCtx) -> bool {
        match (a, b) {
            (EvalCtx::Hole, EvalCtx::Hole) => true,
            (EvalCtx::Unroll(e1), EvalCtx::Unroll(e2)) | (EvalCtx::Up(e1), EvalCtx::Up(e2)) => {
                self.ctx_eq(e1, e2)
            }
            (EvalCtx::EApp(e1, s1), EvalCtx::EApp(e2, s2)) => {
                self.ctx_eq(e1, e2) && self.effs_eq(s1, s2)
            }
            (EvalCtx::LApp(e1, l1), EvalCtx::LApp(e2, l2)) => {
                self.ctx_eq(e1, e2) && self.life_eq(l1, l2)
            }
            (EvalCtx::AppFun(e1, s1), EvalCtx::AppFun(e2, s2))
            | (EvalCtx::Throw(e1, s1), EvalCtx::Throw(e2, s2)) => {
                self.ctx_eq(e1, e2) && self.term_eq(s1, s2)
            }
            (EvalCtx::AppArg(v1, e1), EvalCtx::AppArg(v2, e2)) => {
                self.term_eq(v1, v2) && self.ctx_eq(e1, e2)
            }
            (EvalCtx::Let(x1, e1, b1), EvalCtx::Let(x2, e2, b2)) => {
                self.ctx_eq(e1, e2)
                    && scoped!(self.term, (x1.id, x2.id), self.term_eq(b1, b2))
            }
            (EvalCtx::Reset(l1, e1), EvalCtx::Reset(l2, e2)) => {
                lookup_label(&self.label, *l1, *l2) && self.ctx_eq(e1, e2)
            }
            _ => false,
        }
    }
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    AlphaCtx::default().term_eq(a, b)
}

pub fn alpha_eq_type(a: &TypeExpr, b: &TypeExpr) -> bool {
    AlphaCtx::default().ty_eq(a, b)
}

pub fn alpha_eq_sig(a: &OpSignature, b: &OpSignature) -> bool {
    AlphaCtx::default().sig_eq(a, b)
}

pub fn alpha_eq_ctx(a: &EvalCtx, b: &EvalCtx) -> bool {
    AlphaCtx::default().ctx_eq(a, b)
}

pub fn alpha_eq_program(a: &Program, b: &Program) -> bool {
    if a.interfaces.entries.len() != b.interfaces.entries.len() {
        return false;
    }
    for ((n1, d1), (n2, d2)) in a.interfaces.entries.iter().zip(b.interfaces.entries.iter()) {
        if n1 != n2 || d1.effect_params.len() != d2.effect_params.len() {
            return false;
        }
        let mut cx = AlphaCtx::default();
        for (p1, p2) in d1.effect_params.iter().zip(&d2.effect_params) {
            cx.eff.push((p1.id, p2.id));
        }
        if !cx.sig_eq(&d1.sig, &d2.sig) {
            return false;
        }
    }
    alpha_eq(&a.main_term(), &b.main_term())
}
