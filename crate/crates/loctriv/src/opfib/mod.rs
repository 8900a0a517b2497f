//! Monoidal opfibrations presented as indexed data.
//!
//! The total category of the construction has objects `(B, X)` with `X` in
//! the fibre over `B`, and morphisms `(f, m)` where `f: A -> B` is a base
//! morphism and `m: f_* X -> Y` lives in the fibre over `B`. Hom-sets are
//! graded by base morphisms and indexed positionally, so opcartesianness
//! sweeps can run over very large fibres without materializing anything.
//!
//! Transitions are normalized: identity base morphisms carry the identity
//! transition, and composites of the canonical backend transitions are
//! strictly functorial, so composition in the total category needs no
//! correction isos; explicitly tabulated transitions may supply them.

pub mod verify;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::backend::Fibre;
use crate::cat::Category;
use crate::errors::{EngineError, Result};
use crate::fincat::FinCat;
use crate::val::{Mor, Obj, Val};

/// A direct-image assignment between two fibres.
pub enum Transition {
    /// Identity functor between identical fibres (identity base morphisms).
    Identity,
    /// Canonical quotient between modular fibres: keep the primes of the
    /// target modulus. Requires squarefree moduli.
    ModularQuotient {
        src: Arc<crate::backend::modular::ModularFibre>,
        tgt: Arc<crate::backend::modular::ModularFibre>,
    },
    /// Explicit tables for enumerated fibres.
    Table {
        src: Arc<dyn Fibre>,
        tgt: Arc<dyn Fibre>,
        obj: BTreeMap<Obj, Obj>,
        mor: BTreeMap<Val, Val>,
    },
}

impl std::fmt::Debug for Transition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Transition::Identity => write!(f, "Identity"),
            Transition::ModularQuotient { .. } => write!(f, "ModularQuotient"),
            Transition::Table { .. } => write!(f, "Table"),
        }
    }
}

impl Transition {
    pub fn on_obj(&self, x: &Obj) -> Option<Obj> {
        match self {
            Transition::Identity => Some(x.clone()),
            Transition::ModularQuotient { src, tgt } => {
                let shape = src.shape(x)?;
                let mut per_prime = Vec::new();
                for (p, es) in &shape.per_prime {
                    if tgt.modulus() % p == 0 {
                        per_prime.push((*p, es.clone()));
                    }
                }
                let out = crate::backend::modular::Shape { per_prime }.to_obj();
                tgt.has_object(&out).then_some(out)
            }
            Transition::Table { obj, .. } => obj.get(x).cloned(),
        }
    }

    pub fn on_mor(&self, m: &Mor) -> Option<Mor> {
        match self {
            Transition::Identity => Some(m.clone()),
            Transition::ModularQuotient { src, tgt } => {
                let sx = self.on_obj(&m.src)?;
                let sy = self.on_obj(&m.tgt)?;
                if src.is_identity(m) {
                    return tgt.identity(&sx);
                }
                // Surviving primes keep their digit blocks verbatim: the
                // digit layout per prime is unchanged by dropping others.
                let src_radices = hom_radices_of(src.as_ref(), &m.src, &m.tgt)?;
                let digits = crate::backend::val_to_digits(&m.val, &src_radices)?;
                let keep: Vec<bool> = prime_of_digits(src.as_ref(), &m.src, &m.tgt)?
                    .into_iter()
                    .map(|p| tgt.modulus() % p == 0)
                    .collect();
                let kept: Vec<u64> = digits
                    .iter()
                    .zip(&keep)
                    .filter(|(_, k)| **k)
                    .map(|(d, _)| *d)
                    .collect();
                let tgt_radices = hom_radices_of(tgt.as_ref(), &sx, &sy)?;
                if kept.len() != tgt_radices.len() {
                    return None;
                }
                let src_kept: Vec<u64> = src_radices
                    .iter()
                    .zip(&keep)
                    .filter(|(_, k)| **k)
                    .map(|(r, _)| *r)
                    .collect();
                if src_kept != tgt_radices {
                    return None; // verbatim transfer needs squarefree moduli
                }
                Some(Mor::new(
                    sx,
                    sy,
                    crate::backend::digits_to_val(&kept, &tgt_radices),
                ))
            }
            Transition::Table { mor, tgt, .. } => {
                let v = mor.get(&m.val)?;
                let sx = self.on_obj(&m.src)?;
                let sy = self.on_obj(&m.tgt)?;
                let out = Mor::new(sx, sy, v.clone());
                tgt.has_object(&out.src).then_some(out)
            }
        }
    }

    /// Comparison `f_* X (x) f_* Y -> f_* (X (x) Y)`; identity for the
    /// canonical transitions, user-supplied for tables (not yet supported
    /// there, which restricts tables to strict cases).
    pub fn tensor_comparison(
        &self,
        tgt_fibre: &dyn Fibre,
        x: &Obj,
        y: &Obj,
    ) -> Option<Mor> {
        let tx = self.on_obj(x)?;
        let ty = self.on_obj(y)?;
        let prod = tgt_fibre.tensor_obj(&tx, &ty)?;
        // Canonical transitions are strong monoidal on the nose.
        tgt_fibre.identity(&prod)
    }

    /// Comparison `f_*(I_A) -> I_B`; identity for canonical transitions.
    pub fn unit_comparison(&self, src_fibre: &dyn Fibre, tgt_fibre: &dyn Fibre) -> Option<Mor> {
        let img = self.on_obj(&src_fibre.unit_obj())?;
        if img != tgt_fibre.unit_obj() {
            return None;
        }
        tgt_fibre.identity(&img)
    }
}

fn hom_radices_of(
    fib: &crate::backend::modular::ModularFibre,
    x: &Obj,
    y: &Obj,
) -> Option<Vec<u64>> {
    let n = fib.hom_size(x, y);
    let _ = n;
    crate::backend::modular::hom_radices_pub(fib, x, y)
}

fn prime_of_digits(
    fib: &crate::backend::modular::ModularFibre,
    x: &Obj,
    y: &Obj,
) -> Option<Vec<u64>> {
    crate::backend::modular::digit_primes_pub(fib, x, y)
}

/// The assembled opfibration with its monoidal data. Overrides replace the
/// canonical data pointwise; the verifiers read through the accessors, so a
/// mutated presentation is checked exactly as given.
pub struct MonoidalOpfib {
    pub label: String,
    pub base: Arc<FinCat>,
    fibres: BTreeMap<String, Arc<dyn Fibre>>,
    transitions: BTreeMap<String, Transition>,
    /// Cleavage overrides: (base morphism, source object) -> total morphism.
    pub cleavage_overrides: BTreeMap<(String, Obj), Mor>,
    /// Unit functor overrides.
    pub unit_obj_overrides: BTreeMap<String, Obj>,
    pub unit_mor_overrides: BTreeMap<String, Mor>,
    /// Natural-transformation component overrides, keyed in the fibre.
    pub assoc_overrides: BTreeMap<(String, Obj, Obj, Obj), Mor>,
    pub lunit_overrides: BTreeMap<(String, Obj), Mor>,
    pub runit_overrides: BTreeMap<(String, Obj), Mor>,
    pub braid_overrides: BTreeMap<(String, Obj, Obj), Mor>,
    pub claims_symmetric: bool,
    /// Positive opcartesianness results, keyed by the morphism.
    opcart_cache: Mutex<BTreeMap<Mor, bool>>,
}

impl std::fmt::Debug for MonoidalOpfib {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MonoidalOpfib({})", self.label)
    }
}

impl MonoidalOpfib {
    pub fn new(
        label: impl Into<String>,
        base: Arc<FinCat>,
        fibres: BTreeMap<String, Arc<dyn Fibre>>,
        transitions: BTreeMap<String, Transition>,
    ) -> Result<Self> {
        let label = label.into();
        for b in base.object_names() {
            if !fibres.contains_key(b) {
                return Err(EngineError::Invalid(format!(
                    "base object {b} has no fibre"
                )));
            }
        }
        for m in base.morphism_records() {
            let is_id = base
                .identity_map()
                .get(&m.src)
                .map(|n| *n == m.name)
                .unwrap_or(false);
            match transitions.get(m.name.as_ref()) {
                None if is_id => {}
                None => {
                    return Err(EngineError::Invalid(format!(
                        "base morphism {} has no transition",
                        m.name
                    )))
                }
                Some(Transition::Identity) => {}
                Some(_) if is_id => {
                    return Err(EngineError::Invalid(format!(
                        "identity base morphism {} must carry the identity transition",
                        m.name
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(MonoidalOpfib {
            label,
            base,
            fibres,
            transitions,
            cleavage_overrides: BTreeMap::new(),
            unit_obj_overrides: BTreeMap::new(),
            unit_mor_overrides: BTreeMap::new(),
            assoc_overrides: BTreeMap::new(),
            lunit_overrides: BTreeMap::new(),
            runit_overrides: BTreeMap::new(),
            braid_overrides: BTreeMap::new(),
            claims_symmetric: false,
            opcart_cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn fibre(&self, base_obj: &str) -> Option<&Arc<dyn Fibre>> {
        self.fibres.get(base_obj)
    }

    pub fn fibres(&self) -> &BTreeMap<String, Arc<dyn Fibre>> {
        &self.fibres
    }

    pub fn transition(&self, base_mor: &str) -> Option<&Transition> {
        self.transitions.get(base_mor)
    }

    fn base_mor_rec(&self, name: &str) -> Option<&crate::fincat::MorRec> {
        self.base.mor_rec(name)
    }

    /// Direct image of a fibre object along a base morphism.
    pub fn push_obj(&self, base_mor: &str, x: &Obj) -> Option<Obj> {
        match self.transitions.get(base_mor) {
            Some(t) => t.on_obj(x),
            None => {
                // Identity base morphism without an explicit entry.
                let rec = self.base_mor_rec(base_mor)?;
                (rec.src == rec.tgt).then(|| x.clone())
            }
        }
    }

    /// Direct image of a fibre morphism along a base morphism.
    pub fn push_mor(&self, base_mor: &str, m: &Mor) -> Option<Mor> {
        match self.transitions.get(base_mor) {
            Some(t) => t.on_mor(m),
            None => {
                let rec = self.base_mor_rec(base_mor)?;
                (rec.src == rec.tgt).then(|| m.clone())
            }
        }
    }

    /// Total-category object.
    pub fn total_obj(&self, base_obj: &str, x: &Obj) -> Obj {
        Obj(Val::pair(Val::name(base_obj), x.0.clone()))
    }

    pub fn split_obj(&self, o: &Obj) -> Option<(String, Obj)> {
        let (b, x) = o.0.as_pair()?;
        Some((b.as_name()?.to_string(), Obj(x.clone())))
    }

    pub fn split_mor(&self, m: &Mor) -> Option<(String, Mor)> {
        let (f, v) = m.val.as_pair()?;
        let f = f.as_name()?.to_string();
        let (_, sx) = self.split_obj(&m.src)?;
        let (tb, ty) = self.split_obj(&m.tgt)?;
        let fx = self.push_obj(&f, &sx)?;
        let _ = tb;
        Some((f.clone(), Mor::new(fx, ty, v.clone())))
    }

    /// The chosen opcartesian lift of (f, X): canonical `(f, id_{f_* X})`
    /// unless overridden.
    pub fn lift(&self, base_mor: &str, x: &Obj) -> Option<Mor> {
        if let Some(m) = self
            .cleavage_overrides
            .get(&(base_mor.to_string(), x.clone()))
        {
            return Some(m.clone());
        }
        let rec = self.base_mor_rec(base_mor)?;
        let fx = self.push_obj(base_mor, x)?;
        let tgt_fibre = self.fibres.get(rec.tgt.as_ref())?;
        let id = tgt_fibre.identity(&fx)?;
        Some(Mor::new(
            self.total_obj(rec.src.as_ref(), x),
            self.total_obj(rec.tgt.as_ref(), &fx),
            Val::pair(Val::name(base_mor), id.val),
        ))
    }

    /// The unit section object at a base object.
    pub fn unit_at(&self, base_obj: &str) -> Option<Obj> {
        if let Some(o) = self.unit_obj_overrides.get(base_obj) {
            return Some(o.clone());
        }
        Some(self.fibres.get(base_obj)?.unit_obj())
    }

    /// The unit section on a base morphism, as a total-category morphism.
    pub fn unit_mor(&self, base_mor: &str) -> Option<Mor> {
        let rec = self.base_mor_rec(base_mor)?;
        let src_unit = self.unit_at(rec.src.as_ref())?;
        let tgt_unit = self.unit_at(rec.tgt.as_ref())?;
        let fibre_part = if let Some(m) = self.unit_mor_overrides.get(base_mor) {
            m.clone()
        } else {
            // Canonical comparison f_*(I_A) -> I_B.
            let pushed = self.push_obj(base_mor, &src_unit)?;
            let tgt_fibre = self.fibres.get(rec.tgt.as_ref())?;
            if pushed != tgt_unit {
                return None;
            }
            tgt_fibre.identity(&pushed)?
        };
        Some(Mor::new(
            self.total_obj(rec.src.as_ref(), &src_unit),
            self.total_obj(rec.tgt.as_ref(), &tgt_unit),
            Val::pair(Val::name(base_mor), fibre_part.val),
        ))
    }

    /// Associator component in the fibre over `base_obj`.
    pub fn assoc_at(&self, base_obj: &str, x: &Obj, y: &Obj, z: &Obj) -> Option<Mor> {
        if let Some(m) = self.assoc_overrides.get(&(
            base_obj.to_string(),
            x.clone(),
            y.clone(),
            z.clone(),
        )) {
            return Some(m.clone());
        }
        self.fibres.get(base_obj)?.assoc(x, y, z)
    }

    pub fn lunit_at(&self, base_obj: &str, x: &Obj) -> Option<Mor> {
        if let Some(m) = self.lunit_overrides.get(&(base_obj.to_string(), x.clone())) {
            return Some(m.clone());
        }
        self.fibres.get(base_obj)?.lunit(x)
    }

    pub fn runit_at(&self, base_obj: &str, x: &Obj) -> Option<Mor> {
        if let Some(m) = self.runit_overrides.get(&(base_obj.to_string(), x.clone())) {
            return Some(m.clone());
        }
        self.fibres.get(base_obj)?.runit(x)
    }

    pub fn braid_at(&self, base_obj: &str, x: &Obj, y: &Obj) -> Option<Mor> {
        if let Some(m) =
            self.braid_overrides
                .get(&(base_obj.to_string(), x.clone(), y.clone()))
        {
            return Some(m.clone());
        }
        self.fibres.get(base_obj)?.braid(x, y)
    }

    /// Tensor of two total objects over the same base object.
    pub fn tensor_total_obj(&self, a: &Obj, b: &Obj) -> Option<Obj> {
        let (ba, xa) = self.split_obj(a)?;
        let (bb, xb) = self.split_obj(b)?;
        if ba != bb {
            return None;
        }
        let t = self.fibres.get(&ba)?.tensor_obj(&xa, &xb)?;
        Some(self.total_obj(&ba, &t))
    }

    /// Tensor of two total morphisms over the same base morphism.
    pub fn tensor_total_mor(&self, m1: &Mor, m2: &Mor) -> Option<Mor> {
        let (f1, p1) = self.split_mor(m1)?;
        let (f2, p2) = self.split_mor(m2)?;
        if f1 != f2 {
            return None;
        }
        let rec = self.base_mor_rec(&f1)?;
        let tgt_fibre = self.fibres.get(rec.tgt.as_ref())?;
        let (_, sx1) = self.split_obj(&m1.src)?;
        let (_, sx2) = self.split_obj(&m2.src)?;
        // fibre part: (p1 (x) p2) . nu^{-1} on f_*(X1 (x) X2).
        let t = self.transitions.get(&f1);
        let comparison = match t {
            Some(t) => t.tensor_comparison(tgt_fibre.as_ref(), &sx1, &sx2)?,
            None => {
                let prod = tgt_fibre.tensor_obj(&sx1, &sx2)?;
                tgt_fibre.identity(&prod)?
            }
        };
        let inv = tgt_fibre.inverse(&comparison)?;
        let tens = tgt_fibre.tensor_mor(&p1, &p2)?;
        let part = tgt_fibre.compose(&tens, &inv)?;
        let src = self.tensor_total_obj(&m1.src, &m2.src)?;
        let tgt = self.tensor_total_obj(&m1.tgt, &m2.tgt)?;
        Some(Mor::new(src, tgt, Val::pair(Val::name(&f1), part.val)))
    }

    pub fn opcart_cache_get(&self, m: &Mor) -> Option<bool> {
        self.opcart_cache.lock().unwrap().get(m).copied()
    }

    pub fn opcart_cache_put(&self, m: Mor, ok: bool) {
        let mut c = self.opcart_cache.lock().unwrap();
        if c.len() < 100_000 {
            c.insert(m, ok);
        }
    }
}

/// The total category of the opfibration.
pub struct TotalCat {
    pub opf: Arc<MonoidalOpfib>,
}

impl TotalCat {
    pub fn new(opf: Arc<MonoidalOpfib>) -> Arc<Self> {
        Arc::new(TotalCat { opf })
    }

    /// Base morphisms A -> B in canonical order.
    fn base_mors_between(&self, a: &str, b: &str) -> Vec<String> {
        self.opf
            .base
            .morphism_records()
            .iter()
            .filter(|m| m.src.as_ref() == a && m.tgt.as_ref() == b)
            .map(|m| m.name.to_string())
            .collect()
    }

    /// |Hom_f(X, Y)| for a single base morphism.
    pub fn hom_over_size(&self, base_mor: &str, x: &Obj, y: &Obj) -> u64 {
        let Some(rec) = self.opf.base_mor_rec(base_mor) else {
            return 0;
        };
        let Some((bx, xf)) = self.opf.split_obj(x) else {
            return 0;
        };
        let Some((by, yf)) = self.opf.split_obj(y) else {
            return 0;
        };
        if bx != rec.src.as_ref() || by != rec.tgt.as_ref() {
            return 0;
        }
        let Some(fx) = self.opf.push_obj(base_mor, &xf) else {
            return 0;
        };
        let Some(fib) = self.opf.fibre(&by) else {
            return 0;
        };
        fib.hom_size(&fx, &yf)
    }

    pub fn hom_over_nth(&self, base_mor: &str, x: &Obj, y: &Obj, i: u64) -> Option<Mor> {
        let (_, xf) = self.opf.split_obj(x)?;
        let (by, yf) = self.opf.split_obj(y)?;
        let fx = self.opf.push_obj(base_mor, &xf)?;
        let fib = self.opf.fibre(&by)?;
        let part = fib.hom_nth(&fx, &yf, i)?;
        Some(Mor::new(
            x.clone(),
            y.clone(),
            Val::pair(Val::name(base_mor), part.val),
        ))
    }
}

impl Category for TotalCat {
    fn label(&self) -> String {
        format!("total({})", self.opf.label)
    }

    fn objects(&self) -> Vec<Obj> {
        let mut out = Vec::new();
        for b in self.opf.base.object_names() {
            if let Some(fib) = self.opf.fibre(b) {
                for x in fib.objects() {
                    out.push(self.opf.total_obj(b, &x));
                }
            }
        }
        out.sort();
        out
    }

    fn has_object(&self, o: &Obj) -> bool {
        match self.opf.split_obj(o) {
            Some((b, x)) => self
                .opf
                .fibre(&b)
                .map(|f| f.has_object(&x))
                .unwrap_or(false),
            None => false,
        }
    }

    fn hom_size(&self, x: &Obj, y: &Obj) -> u64 {
        let (Some((bx, _)), Some((by, _))) = (self.opf.split_obj(x), self.opf.split_obj(y))
        else {
            return 0;
        };
        self.base_mors_between(&bx, &by)
            .iter()
            .map(|f| self.hom_over_size(f, x, y))
            .fold(0u64, |a, b| a.saturating_add(b))
    }

    fn hom_nth(&self, x: &Obj, y: &Obj, mut i: u64) -> Option<Mor> {
        let (bx, _) = self.opf.split_obj(x)?;
        let (by, _) = self.opf.split_obj(y)?;
        for f in self.base_mors_between(&bx, &by) {
            let n = self.hom_over_size(&f, x, y);
            if i < n {
                return self.hom_over_nth(&f, x, y, i);
            }
            i -= n;
        }
        None
    }

    fn identity(&self, o: &Obj) -> Option<Mor> {
        let (b, x) = self.opf.split_obj(o)?;
        let id_name = self.opf.base.identity_map().get(b.as_str())?.to_string();
        let fib = self.opf.fibre(&b)?;
        let id = fib.identity(&x)?;
        Some(Mor::new(
            o.clone(),
            o.clone(),
            Val::pair(Val::name(id_name), id.val),
        ))
    }

    fn compose(&self, g: &Mor, f: &Mor) -> Option<Mor> {
        if f.tgt != g.src {
            return None;
        }
        if self.is_identity(f) {
            return Some(Mor::new(f.src.clone(), g.tgt.clone(), g.val.clone()));
        }
        if self.is_identity(g) {
            return Some(Mor::new(f.src.clone(), g.tgt.clone(), f.val.clone()));
        }
        let (fb, fm) = self.opf.split_mor(f)?;
        let (gb, gm) = self.opf.split_mor(g)?;
        let gf_name = self
            .opf
            .base
            .compose_table()
            .get(&(Arc::from(gb.as_str()), Arc::from(fb.as_str())))?
            .to_string();
        // fibre part: gm . g_*(fm), using strict transition composition.
        let pushed = self.opf.push_mor(&gb, &fm)?;
        let tgt_b = self.opf.split_obj(&g.tgt)?.0;
        let fib = self.opf.fibre(&tgt_b)?;
        let part = fib.compose(&gm, &pushed)?;
        Some(Mor::new(
            f.src.clone(),
            g.tgt.clone(),
            Val::pair(Val::name(gf_name), part.val),
        ))
    }

    fn is_identity(&self, m: &Mor) -> bool {
        if m.src != m.tgt {
            return false;
        }
        let Some((f, _)) = m.val.as_pair() else {
            return false;
        };
        let Some(fname) = f.as_name() else {
            return false;
        };
        let Some((b, x)) = self.opf.split_obj(&m.src) else {
            return false;
        };
        if self.opf.base.identity_map().get(b.as_str()).map(|n| n.as_ref()) != Some(fname) {
            return false;
        }
        match (self.opf.fibre(&b), m.val.as_pair()) {
            (Some(fib), Some((_, part))) => fib
                .identity(&x)
                .map(|id| id.val == *part)
                .unwrap_or(false),
            _ => false,
        }
    }

    fn render_obj(&self, o: &Obj) -> String {
        match self.opf.split_obj(o) {
            Some((b, x)) => {
                let fx = self
                    .opf
                    .fibre(&b)
                    .map(|f| f.render_obj(&x))
                    .unwrap_or_else(|| x.to_string());
                format!("({b},{fx})")
            }
            None => o.to_string(),
        }
    }

    fn render_mor(&self, m: &Mor) -> String {
        match self.opf.split_mor(m) {
            Some((f, part)) => {
                let (b, _) = self.opf.split_obj(&m.tgt).unwrap_or(("?".into(), part.src.clone()));
                let body = self
                    .opf
                    .fibre(&b)
                    .map(|fib| fib.render_mor(&part))
                    .unwrap_or_else(|| part.to_string());
                format!(
                    "({f},{body}):{}->{}",
                    self.render_obj(&m.src),
                    self.render_obj(&m.tgt)
                )
            }
            None => m.to_string(),
        }
    }
}

/// The projection functor of the opfibration as a checkable functor.
pub fn projection_functor(total: Arc<TotalCat>) -> crate::functor::DynFunctor {
    let base = total.opf.base.clone();
    let opf = total.opf.clone();
    let base2 = base.clone();
    crate::functor::DynFunctor::new(
        format!("proj({})", total.opf.label),
        total.clone(),
        base.clone(),
        move |o| {
            let (b, _) = opf.split_obj(o)?;
            base.obj(&b)
        },
        move |m| {
            let (f, _) = m.val.as_pair()?;
            base2.mor(f.as_name()?)
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::finset::FinSetFibre;
    use crate::budget::RunCtx;
    use crate::cat::validate_category_lazy;

    fn finset_over_terminal(bound: u64) -> Arc<MonoidalOpfib> {
        let base = Arc::new(FinCat::terminal("pt"));
        let mut fibres: BTreeMap<String, Arc<dyn Fibre>> = BTreeMap::new();
        fibres.insert("pt".to_string(), FinSetFibre::new("finset", bound));
        Arc::new(MonoidalOpfib::new("finset-terminal", base, fibres, BTreeMap::new()).unwrap())
    }

    #[test]
    fn total_category_over_terminal_is_the_fibre() {
        let ctx = RunCtx::default();
        let opf = finset_over_terminal(3);
        let total = TotalCat::new(opf.clone());
        assert_eq!(total.objects().len(), 4);
        let rep = validate_category_lazy(&ctx, total.as_ref());
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn z6_total_category_is_lawful_in_a_small_window ()  {
        let ctx = RunCtx::default();
        let opf = super::verify::tests::z6_opfib(6);
        let total = TotalCat::new(opf);
        let rep = validate_category_lazy(&ctx, total.as_ref());
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn lifts_are_over_their_base_morphism() {
        let opf = super::verify::tests::z6_opfib(36);
        let fib = opf.fibre("Z6").unwrap().clone();
        for x in fib.objects() {
            let lift = opf.lift("q2", &x).unwrap();
            let (f, part) = opf.split_mor(&lift).unwrap();
            assert_eq!(f, "q2");
            let tgt_fib = opf.fibre("Z2").unwrap();
            assert!(tgt_fib.is_identity(&part));
        }
    }
}
