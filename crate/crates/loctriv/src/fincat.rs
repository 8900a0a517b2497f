//! Explicit finite categories: object/morphism lists plus a dense
//! composition table.
//!
//! The representation deliberately admits malformed data (dangling ids,
//! missing composites) so that [`validate_category`] can report structural
//! errors instead of panicking. All enumeration orders are the lexicographic
//! order of identifiers, so searches and reports are reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::budget::RunCtx;
use crate::cat::Category;
use crate::errors::{EngineError, Result};
use crate::report::ValidationReport;
use crate::val::{Mor, Obj, Val};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorRec {
    pub name: Arc<str>,
    pub src: Arc<str>,
    pub tgt: Arc<str>,
}

/// A finite category presentation. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCat {
    label: String,
    objects: Vec<Arc<str>>,
    morphisms: Vec<MorRec>,
    identity: BTreeMap<Arc<str>, Arc<str>>,
    /// (g, f) -> g.f keyed by morphism names; dense over composable pairs.
    compose: BTreeMap<(Arc<str>, Arc<str>), Arc<str>>,
}

pub struct FinCatBuilder {
    label: String,
    objects: BTreeSet<Arc<str>>,
    morphisms: BTreeMap<Arc<str>, MorRec>,
    identity: BTreeMap<Arc<str>, Arc<str>>,
    compose: BTreeMap<(Arc<str>, Arc<str>), Arc<str>>,
}

impl FinCatBuilder {
    pub fn object(&mut self, name: &str) -> &mut Self {
        self.objects.insert(Arc::from(name));
        self
    }

    pub fn morphism(&mut self, name: &str, src: &str, tgt: &str) -> &mut Self {
        let name: Arc<str> = Arc::from(name);
        self.morphisms.insert(
            name.clone(),
            MorRec {
                name,
                src: Arc::from(src),
                tgt: Arc::from(tgt),
            },
        );
        self
    }

    pub fn set_identity(&mut self, obj: &str, mor: &str) -> &mut Self {
        self.identity.insert(Arc::from(obj), Arc::from(mor));
        self
    }

    pub fn set_compose(&mut self, g: &str, f: &str, gf: &str) -> &mut Self {
        self.compose
            .insert((Arc::from(g), Arc::from(f)), Arc::from(gf));
        self
    }

    /// Add `id_<obj>` morphisms and the identity map for objects lacking one.
    pub fn auto_identities(&mut self) -> &mut Self {
        let objs: Vec<Arc<str>> = self.objects.iter().cloned().collect();
        for o in objs {
            if !self.identity.contains_key(&o) {
                let id_name = format!("id_{o}");
                self.morphism(&id_name, &o, &o);
                self.set_identity(&o, &id_name);
            }
        }
        self
    }

    /// Fill every composite involving an identity. Other composites must be
    /// given explicitly.
    pub fn auto_identity_composites(&mut self) -> &mut Self {
        let morphs: Vec<MorRec> = self.morphisms.values().cloned().collect();
        for m in &morphs {
            if let Some(id_src) = self.identity.get(&m.src).cloned() {
                self.compose
                    .entry((m.name.clone(), id_src))
                    .or_insert_with(|| m.name.clone());
            }
            if let Some(id_tgt) = self.identity.get(&m.tgt).cloned() {
                self.compose
                    .entry((id_tgt, m.name.clone()))
                    .or_insert_with(|| m.name.clone());
            }
        }
        self
    }

    pub fn build(self) -> FinCat {
        FinCat {
            label: self.label,
            objects: self.objects.into_iter().collect(),
            morphisms: self.morphisms.into_values().collect(),
            identity: self.identity,
            compose: self.compose,
        }
    }
}

impl FinCat {
    pub fn builder(label: &str) -> FinCatBuilder {
        FinCatBuilder {
            label: label.to_string(),
            objects: BTreeSet::new(),
            morphisms: BTreeMap::new(),
            identity: BTreeMap::new(),
            compose: BTreeMap::new(),
        }
    }

    /// One object, one (identity) morphism.
    pub fn terminal(obj: &str) -> FinCat {
        let mut b = FinCat::builder("terminal");
        b.object(obj);
        b.auto_identities().auto_identity_composites();
        b.build()
    }

    /// No objects at all.
    pub fn empty(label: &str) -> FinCat {
        FinCat::builder(label).build()
    }

    /// Only identities.
    pub fn discrete(label: &str, objects: &[&str]) -> FinCat {
        let mut b = FinCat::builder(label);
        for o in objects {
            b.object(o);
        }
        b.auto_identities().auto_identity_composites();
        b.build()
    }

    /// A finite monoid as a one-object category. `table[i][j]` is the index
    /// of element_i * element_j; `unit` indexes the neutral element.
    pub fn one_object_monoid(
        label: &str,
        obj: &str,
        elements: &[&str],
        table: &[Vec<usize>],
        unit: usize,
    ) -> FinCat {
        let mut b = FinCat::builder(label);
        b.object(obj);
        for e in elements {
            b.morphism(e, obj, obj);
        }
        b.set_identity(obj, elements[unit]);
        for (i, row) in table.iter().enumerate() {
            for (j, &k) in row.iter().enumerate() {
                // table is in application order: element_i after element_j.
                b.set_compose(elements[i], elements[j], elements[k]);
            }
        }
        b.build()
    }

    /// Exactly one morphism between every ordered pair of objects.
    pub fn codiscrete(label: &str, objects: &[&str]) -> FinCat {
        let mut b = FinCat::builder(label);
        let name = |x: &str, y: &str| format!("e_{x}_{y}");
        for o in objects {
            b.object(o);
        }
        for x in objects {
            for y in objects {
                b.morphism(&name(x, y), x, y);
            }
            b.set_identity(x, &name(x, x));
        }
        for x in objects {
            for y in objects {
                for z in objects {
                    b.set_compose(&name(y, z), &name(x, y), &name(x, z));
                }
            }
        }
        b.build()
    }

    pub fn object_names(&self) -> Vec<&str> {
        self.objects.iter().map(|o| o.as_ref()).collect()
    }

    pub fn morphism_records(&self) -> &[MorRec] {
        &self.morphisms
    }

    pub fn identity_map(&self) -> &BTreeMap<Arc<str>, Arc<str>> {
        &self.identity
    }

    pub fn compose_table(&self) -> &BTreeMap<(Arc<str>, Arc<str>), Arc<str>> {
        &self.compose
    }

    pub fn mor_rec(&self, name: &str) -> Option<&MorRec> {
        self.morphisms.iter().find(|m| m.name.as_ref() == name)
    }

    pub fn mor(&self, name: &str) -> Option<Mor> {
        self.mor_rec(name).map(|r| {
            Mor::new(
                Obj(Val::Name(r.src.clone())),
                Obj(Val::Name(r.tgt.clone())),
                Val::Name(r.name.clone()),
            )
        })
    }

    pub fn obj(&self, name: &str) -> Option<Obj> {
        self.objects
            .iter()
            .find(|o| o.as_ref() == name)
            .map(|o| Obj(Val::Name(o.clone())))
    }

    fn rec_to_mor(&self, r: &MorRec) -> Mor {
        Mor::new(
            Obj(Val::Name(r.src.clone())),
            Obj(Val::Name(r.tgt.clone())),
            Val::Name(r.name.clone()),
        )
    }
}

impl Category for FinCat {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn objects(&self) -> Vec<Obj> {
        self.objects
            .iter()
            .map(|o| Obj(Val::Name(o.clone())))
            .collect()
    }

    fn has_object(&self, x: &Obj) -> bool {
        match x.0.as_name() {
            Some(n) => self.objects.iter().any(|o| o.as_ref() == n),
            None => false,
        }
    }

    fn hom_size(&self, x: &Obj, y: &Obj) -> u64 {
        let (Some(xn), Some(yn)) = (x.0.as_name(), y.0.as_name()) else {
            return 0;
        };
        self.morphisms
            .iter()
            .filter(|m| m.src.as_ref() == xn && m.tgt.as_ref() == yn)
            .count() as u64
    }

    fn hom_nth(&self, x: &Obj, y: &Obj, i: u64) -> Option<Mor> {
        let (xn, yn) = (x.0.as_name()?, y.0.as_name()?);
        self.morphisms
            .iter()
            .filter(|m| m.src.as_ref() == xn && m.tgt.as_ref() == yn)
            .nth(i as usize)
            .map(|r| self.rec_to_mor(r))
    }

    fn identity(&self, x: &Obj) -> Option<Mor> {
        let xn = x.0.as_name()?;
        let id_name = self.identity.get(xn)?;
        let rec = self.mor_rec(id_name)?;
        Some(self.rec_to_mor(rec))
    }

    fn compose(&self, g: &Mor, f: &Mor) -> Option<Mor> {
        if f.tgt != g.src {
            return None;
        }
        let (gn, fn_) = (g.val.as_name()?, f.val.as_name()?);
        let key = (Arc::from(gn), Arc::from(fn_));
        let gf = self.compose.get(&key)?;
        let rec = self.mor_rec(gf)?;
        Some(self.rec_to_mor(rec))
    }
}

/// Structural and law validation of an explicit presentation. Fail-slow:
/// every violation is reported with its witnessing morphisms.
pub fn validate_category(ctx: &RunCtx, cat: &FinCat) -> ValidationReport {
    ctx.log("fincat.validate_category");
    let mut rep = ValidationReport::new(format!("validate-category({})", cat.label));
    let obj_set: BTreeSet<&str> = cat.objects.iter().map(|o| o.as_ref()).collect();
    let mor_names: BTreeSet<&str> = cat.morphisms.iter().map(|m| m.name.as_ref()).collect();

    for m in &cat.morphisms {
        if !obj_set.contains(m.src.as_ref()) {
            rep.structural(
                "morphism.dangling-source",
                "source object does not exist",
                vec![m.name.to_string(), m.src.to_string()],
            );
        }
        if !obj_set.contains(m.tgt.as_ref()) {
            rep.structural(
                "morphism.dangling-target",
                "target object does not exist",
                vec![m.name.to_string(), m.tgt.to_string()],
            );
        }
    }

    for o in &cat.objects {
        match cat.identity.get(o) {
            None => rep.structural(
                "identity.missing",
                "object has no identity entry",
                vec![o.to_string()],
            ),
            Some(idn) => match cat.mor_rec(idn) {
                None => rep.structural(
                    "identity.dangling",
                    "identity entry names a missing morphism",
                    vec![o.to_string(), idn.to_string()],
                ),
                Some(rec) => {
                    if rec.src != *o || rec.tgt != *o {
                        rep.structural(
                            "identity.endpoints",
                            "identity morphism is not an endomorphism of its object",
                            vec![o.to_string(), idn.to_string()],
                        );
                    }
                }
            },
        }
    }

    // Composition table coverage: dense over composable pairs, nothing else.
    for g in &cat.morphisms {
        for f in &cat.morphisms {
            let key = (g.name.clone(), f.name.clone());
            let entry = cat.compose.get(&key);
            if f.tgt == g.src {
                match entry {
                    None => rep.structural(
                        "compose.missing",
                        "composable pair has no table entry",
                        vec![g.name.to_string(), f.name.to_string()],
                    ),
                    Some(gf) => {
                        if !mor_names.contains(gf.as_ref()) {
                            rep.structural(
                                "compose.dangling",
                                "composite names a missing morphism",
                                vec![g.name.to_string(), f.name.to_string(), gf.to_string()],
                            );
                        }
                    }
                }
            } else if entry.is_some() {
                rep.structural(
                    "compose.spurious",
                    "table entry for a non-composable pair",
                    vec![g.name.to_string(), f.name.to_string()],
                );
            }
        }
    }

    // Law checks on the structurally sound part.
    let lookup = |g: &MorRec, f: &MorRec| -> Option<&MorRec> {
        cat.compose
            .get(&(g.name.clone(), f.name.clone()))
            .and_then(|gf| cat.mor_rec(gf))
    };
    for g in &cat.morphisms {
        for f in &cat.morphisms {
            if f.tgt != g.src {
                continue;
            }
            if let Some(gf) = lookup(g, f) {
                if gf.src != f.src || gf.tgt != g.tgt {
                    rep.law(
                        "compose.endpoints",
                        "composite endpoints are wrong",
                        vec![
                            g.name.to_string(),
                            f.name.to_string(),
                            gf.name.to_string(),
                        ],
                    );
                }
            }
        }
    }
    for f in &cat.morphisms {
        if let Some(id_src) = cat.identity.get(&f.src).and_then(|n| cat.mor_rec(n)) {
            if let Some(c) = lookup(f, id_src) {
                if c.name != f.name {
                    rep.law(
                        "identity.right",
                        "f . id != f",
                        vec![f.name.to_string(), id_src.name.to_string()],
                    );
                }
            }
        }
        if let Some(id_tgt) = cat.identity.get(&f.tgt).and_then(|n| cat.mor_rec(n)) {
            if let Some(c) = lookup(id_tgt, f) {
                if c.name != f.name {
                    rep.law(
                        "identity.left",
                        "id . f != f",
                        vec![id_tgt.name.to_string(), f.name.to_string()],
                    );
                }
            }
        }
    }
    for h in &cat.morphisms {
        for g in &cat.morphisms {
            if g.tgt != h.src {
                continue;
            }
            for f in &cat.morphisms {
                if f.tgt != g.src {
                    continue;
                }
                let gf = lookup(g, f);
                let hg = lookup(h, g);
                let left = gf.and_then(|gf| lookup(h, gf));
                let right = hg.and_then(|hg| lookup(hg, f));
                if let (Some(l), Some(r)) = (left, right) {
                    if l.name != r.name {
                        rep.law(
                            "assoc",
                            "h.(g.f) != (h.g).f",
                            vec![
                                h.name.to_string(),
                                g.name.to_string(),
                                f.name.to_string(),
                            ],
                        );
                    }
                }
            }
        }
    }
    rep.finish()
}

/// An isomorphism of explicit categories: bijective maps on objects and
/// morphisms commuting with source, target, identity and composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatIso {
    pub obj_map: BTreeMap<Arc<str>, Arc<str>>,
    pub mor_map: BTreeMap<Arc<str>, Arc<str>>,
}

/// Backtracking search for an isomorphism of categories. With
/// `fix_objects`, the object map is forced to be the identity, which is the
/// "equality of categories" notion used by the fibre-restriction check.
pub fn find_category_isomorphism(c: &FinCat, d: &FinCat, fix_objects: bool) -> Option<CatIso> {
    if c.objects.len() != d.objects.len() || c.morphisms.len() != d.morphisms.len() {
        return None;
    }
    let cn = c.objects.len();

    // Candidate object images filtered by hom-size signatures.
    let sig = |cat: &FinCat, o: &Arc<str>| -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = cat
            .objects
            .iter()
            .map(|p| {
                (
                    cat.morphisms
                        .iter()
                        .filter(|m| m.src == *o && m.tgt == *p)
                        .count(),
                    cat.morphisms
                        .iter()
                        .filter(|m| m.src == *p && m.tgt == *o)
                        .count(),
                )
            })
            .collect();
        v.sort();
        v
    };

    let mut obj_candidates: Vec<Vec<usize>> = Vec::with_capacity(cn);
    for o in &c.objects {
        if fix_objects {
            match d.objects.iter().position(|p| p == o) {
                Some(j) => obj_candidates.push(vec![j]),
                None => return None,
            }
        } else {
            let so = sig(c, o);
            obj_candidates.push(
                d.objects
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| sig(d, p) == so)
                    .map(|(j, _)| j)
                    .collect(),
            );
        }
    }

    let mut obj_assign: Vec<Option<usize>> = vec![None; cn];
    let mut used_obj = vec![false; d.objects.len()];

    fn assign_objects(
        i: usize,
        c: &FinCat,
        d: &FinCat,
        cands: &[Vec<usize>],
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == assign.len() {
            return try_morphisms(c, d, assign);
        }
        for &j in &cands[i] {
            if used[j] {
                continue;
            }
            assign[i] = Some(j);
            used[j] = true;
            if assign_objects(i + 1, c, d, cands, assign, used) {
                return true;
            }
            assign[i] = None;
            used[j] = false;
        }
        false
    }

    // Checks whether some morphism bijection exists for a fixed object map;
    // leaves the witness in MOR_WITNESS (thread local, small categories only).
    thread_local! {
        static MOR_WITNESS: std::cell::RefCell<Option<Vec<usize>>> =
            const { std::cell::RefCell::new(None) };
    }

    fn try_morphisms(c: &FinCat, d: &FinCat, obj_assign: &[Option<usize>]) -> bool {
        let obj_of = |name: &Arc<str>, cat: &FinCat| cat.objects.iter().position(|o| o == name);
        let mut cand: Vec<Vec<usize>> = Vec::with_capacity(c.morphisms.len());
        for m in &c.morphisms {
            let (Some(si), Some(ti)) = (obj_of(&m.src, c), obj_of(&m.tgt, c)) else {
                return false;
            };
            let (Some(sj), Some(tj)) = (obj_assign[si], obj_assign[ti]) else {
                return false;
            };
            let want_src = &d.objects[sj];
            let want_tgt = &d.objects[tj];
            let is_id = c.identity.get(&m.src).map(|n| *n == m.name).unwrap_or(false);
            let v: Vec<usize> = d
                .morphisms
                .iter()
                .enumerate()
                .filter(|(_, r)| {
                    r.src == *want_src
                        && r.tgt == *want_tgt
                        && is_id
                            == d.identity
                                .get(&r.src)
                                .map(|n| *n == r.name)
                                .unwrap_or(false)
                })
                .map(|(k, _)| k)
                .collect();
            if v.is_empty() {
                return false;
            }
            cand.push(v);
        }
        let mut assign: Vec<Option<usize>> = vec![None; c.morphisms.len()];
        let mut used = vec![false; d.morphisms.len()];
        fn complete_ok(c: &FinCat, d: &FinCat, assign: &[Option<usize>]) -> bool {
            let img = |name: &Arc<str>| -> Option<usize> {
                let i = c.morphisms.iter().position(|m| m.name == *name)?;
                assign[i]
            };
            for ((g, f), gf) in &c.compose {
                let (Some(gi), Some(fi), Some(gfi)) = (img(g), img(f), img(gf)) else {
                    return false;
                };
                let key = (d.morphisms[gi].name.clone(), d.morphisms[fi].name.clone());
                if d.compose.get(&key) != Some(&d.morphisms[gfi].name) {
                    return false;
                }
            }
            // The reverse direction: every D-composite of assigned images is hit.
            for ((g, f), gf) in &d.compose {
                let pre = |name: &Arc<str>| -> Option<usize> {
                    let j = d.morphisms.iter().position(|m| m.name == *name)?;
                    assign.iter().position(|a| *a == Some(j))
                };
                let (Some(gi), Some(fi), Some(gfi)) = (pre(g), pre(f), pre(gf)) else {
                    return false;
                };
                let key = (c.morphisms[gi].name.clone(), c.morphisms[fi].name.clone());
                if c.compose.get(&key) != Some(&c.morphisms[gfi].name) {
                    return false;
                }
            }
            true
        }
        fn rec(
            i: usize,
            c: &FinCat,
            d: &FinCat,
            cand: &[Vec<usize>],
            assign: &mut Vec<Option<usize>>,
            used: &mut Vec<bool>,
        ) -> bool {
            if i == assign.len() {
                return complete_ok(c, d, assign);
            }
            'next: for &j in &cand[i] {
                if used[j] {
                    continue;
                }
                // Compose-compatibility with everything assigned so far:
                // both composites must exist or both be absent; images of
                // already-determined composites must line up.
                for (k, ak) in assign.iter().enumerate().take(i) {
                    let Some(jk) = *ak else { continue };
                    for (a, b, aj, bj) in [(i, k, j, jk), (k, i, jk, j)] {
                        let key_c = (c.morphisms[a].name.clone(), c.morphisms[b].name.clone());
                        let key_d = (d.morphisms[aj].name.clone(), d.morphisms[bj].name.clone());
                        match (c.compose.get(&key_c), d.compose.get(&key_d)) {
                            (None, None) => {}
                            (Some(x), Some(y)) => {
                                let xi = c.morphisms.iter().position(|m| m.name == *x);
                                let yi = d.morphisms.iter().position(|m| m.name == *y);
                                let (Some(xi), Some(yi)) = (xi, yi) else {
                                    continue 'next;
                                };
                                let known = if xi == i { Some(j) } else { assign[xi] };
                                if let Some(img) = known {
                                    if img != yi {
                                        continue 'next;
                                    }
                                }
                            }
                            _ => continue 'next,
                        }
                    }
                }
                assign[i] = Some(j);
                used[j] = true;
                if rec(i + 1, c, d, cand, assign, used) {
                    return true;
                }
                assign[i] = None;
                used[j] = false;
            }
            false
        }
        let ok = rec(0, c, d, &cand, &mut assign, &mut used);
        if ok {
            MOR_WITNESS.with(|w| {
                *w.borrow_mut() = Some(assign.iter().map(|a| a.unwrap()).collect());
            });
        }
        ok
    }

    if !assign_objects(0, c, d, &obj_candidates, &mut obj_assign, &mut used_obj) {
        return None;
    }
    let mor_assign = MOR_WITNESS.with(|w| w.borrow_mut().take())?;
    let mut obj_map = BTreeMap::new();
    for (i, j) in obj_assign.iter().enumerate() {
        obj_map.insert(c.objects[i].clone(), d.objects[(*j)?].clone());
    }
    let mut mor_map = BTreeMap::new();
    for (i, &j) in mor_assign.iter().enumerate() {
        mor_map.insert(c.morphisms[i].name.clone(), d.morphisms[j].name.clone());
    }
    // Post-verification: the witness must commute with the full tables.
    let iso = CatIso { obj_map, mor_map };
    if iso_commutes(c, d, &iso) {
        Some(iso)
    } else {
        None
    }
}

fn iso_commutes(c: &FinCat, d: &FinCat, iso: &CatIso) -> bool {
    for m in &c.morphisms {
        let Some(img) = iso.mor_map.get(&m.name).and_then(|n| d.mor_rec(n)) else {
            return false;
        };
        if iso.obj_map.get(&m.src) != Some(&img.src) || iso.obj_map.get(&m.tgt) != Some(&img.tgt) {
            return false;
        }
    }
    for ((g, f), gf) in &c.compose {
        let (Some(gi), Some(fi), Some(gfi)) = (
            iso.mor_map.get(g),
            iso.mor_map.get(f),
            iso.mor_map.get(gf),
        ) else {
            return false;
        };
        if d.compose.get(&(gi.clone(), fi.clone())) != Some(gfi) {
            return false;
        }
    }
    for (o, id) in &c.identity {
        let (Some(oi), Some(idi)) = (iso.obj_map.get(o), iso.mor_map.get(id)) else {
            return false;
        };
        if d.identity.get(oi) != Some(idi) {
            return false;
        }
    }
    true
}

/// Materialize any small lazy category into an explicit presentation.
/// Morphism names are the rendered canonical values.
pub fn materialize(ctx: &RunCtx, cat: &dyn Category) -> Result<FinCat> {
    let mors = crate::cat::all_morphisms(cat, ctx.budgets.materialize_limit)?;
    let mut b = FinCat::builder(&format!("materialized({})", cat.label()));
    let obj_name = |o: &Obj| o.to_string();
    let mor_name = |m: &Mor| format!("{}|{}>{}", m.val, m.src, m.tgt);
    for o in cat.objects() {
        b.object(&obj_name(&o));
    }
    for m in &mors {
        b.morphism(&mor_name(m), &obj_name(&m.src), &obj_name(&m.tgt));
    }
    for o in cat.objects() {
        let id = cat.identity(&o).ok_or_else(|| {
            EngineError::Invalid(format!("object {o} has no identity during materialization"))
        })?;
        b.set_identity(&obj_name(&o), &mor_name(&id));
    }
    for f in &mors {
        for g in &mors {
            if g.src == f.tgt {
                if let Some(gf) = cat.compose(g, f) {
                    b.set_compose(&mor_name(g), &mor_name(f), &mor_name(&gf));
                }
            }
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_category() -> FinCat {
        FinCat::one_object_monoid(
            "Z2",
            "pt",
            &["e", "s"],
            &[vec![0, 1], vec![1, 0]],
            0,
        )
    }

    #[test]
    fn terminal_is_valid() {
        let ctx = RunCtx::default();
        let rep = validate_category(&ctx, &FinCat::terminal("pt"));
        assert!(rep.clean(), "{rep}");
    }

    #[test]
    fn z2_as_category_is_valid() {
        let ctx = RunCtx::default();
        let rep = validate_category(&ctx, &z2_category());
        assert!(rep.clean(), "{rep}");
    }

    #[test]
    fn codiscrete_is_valid() {
        let ctx = RunCtx::default();
        let rep = validate_category(&ctx, &FinCat::codiscrete("co", &["a", "b", "c"]));
        assert!(rep.clean(), "{rep}");
    }

    #[test]
    fn missing_composite_is_structural() {
        let ctx = RunCtx::default();
        let mut b = FinCat::builder("bad");
        b.object("x").object("y");
        b.morphism("f", "x", "y");
        b.auto_identities();
        // deliberately skip auto_identity_composites
        let rep = validate_category(&ctx, &b.build());
        assert!(!rep.passed());
        assert!(rep.issues.iter().any(|i| i.code == "compose.missing"));
    }

    #[test]
    fn iso_search_finds_renaming() {
        let c = z2_category();
        let d = FinCat::one_object_monoid(
            "Z2'",
            "obj",
            &["one", "tau"],
            &[vec![0, 1], vec![1, 0]],
            0,
        );
        let iso = find_category_isomorphism(&c, &d, false).expect("iso exists");
        assert_eq!(iso.obj_map.get("pt").map(|s| s.as_ref()), Some("obj"));
        assert_eq!(iso.mor_map.get("e").map(|s| s.as_ref()), Some("one"));
        // Different monoid: no iso.
        let semilattice = FinCat::one_object_monoid(
            "meet",
            "pt",
            &["e", "s"],
            &[vec![0, 1], vec![1, 1]],
            0,
        );
        assert!(find_category_isomorphism(&c, &semilattice, false).is_none());
    }
}
