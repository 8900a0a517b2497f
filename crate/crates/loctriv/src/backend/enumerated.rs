//! Explicitly tabulated monoidal fibres.
//!
//! Wraps an explicit category with tensor/unit tables. Meant for small,
//! hand-written fibres; coequalizers are found by exhaustive search over
//! candidate quotients.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::backend::{Coeq, Fibre};
use crate::cat::Category;
use crate::errors::{EngineError, Result};
use crate::fincat::FinCat;
use crate::val::{Mor, Obj};

#[derive(Clone, Debug)]
pub enum ComponentTable {
    /// All components are identities.
    Strict,
    /// Component per key (object names joined in order).
    Table(BTreeMap<Vec<String>, String>),
}

#[derive(Debug)]
pub struct EnumeratedFibre {
    label: String,
    pub cat: Arc<FinCat>,
    pub unit: String,
    pub tensor_obj_table: BTreeMap<(String, String), String>,
    pub tensor_mor_table: BTreeMap<(String, String), String>,
    pub assoc_table: ComponentTable,
    pub lunit_table: ComponentTable,
    pub runit_table: ComponentTable,
    pub braid_table: Option<ComponentTable>,
}

impl EnumeratedFibre {
    pub fn new(
        label: impl Into<String>,
        cat: Arc<FinCat>,
        unit: impl Into<String>,
    ) -> EnumeratedFibre {
        EnumeratedFibre {
            label: label.into(),
            cat,
            unit: unit.into(),
            tensor_obj_table: BTreeMap::new(),
            tensor_mor_table: BTreeMap::new(),
            assoc_table: ComponentTable::Strict,
            lunit_table: ComponentTable::Strict,
            runit_table: ComponentTable::Strict,
            braid_table: None,
        }
    }

    /// Structural check: tables are total over the window and closed.
    pub fn check_closed(&self) -> Result<()> {
        let names: Vec<&str> = self.cat.object_names();
        for x in &names {
            for y in &names {
                let Some(t) = self
                    .tensor_obj_table
                    .get(&(x.to_string(), y.to_string()))
                else {
                    return Err(EngineError::Invalid(format!(
                        "tensor table misses object pair ({x},{y})"
                    )));
                };
                if self.cat.obj(t).is_none() {
                    return Err(EngineError::Invalid(format!(
                        "tensor of ({x},{y}) names a missing object {t}"
                    )));
                }
            }
        }
        if self.cat.obj(&self.unit).is_none() {
            return Err(EngineError::Invalid(format!(
                "unit object {} does not exist",
                self.unit
            )));
        }
        for m in self.cat.morphism_records() {
            for n in self.cat.morphism_records() {
                let key = (m.name.to_string(), n.name.to_string());
                let Some(t) = self.tensor_mor_table.get(&key) else {
                    return Err(EngineError::Invalid(format!(
                        "tensor table misses morphism pair ({},{})",
                        m.name, n.name
                    )));
                };
                if self.cat.mor(t).is_none() {
                    return Err(EngineError::Invalid(format!(
                        "tensor of ({},{}) names a missing morphism {t}",
                        m.name, n.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn component(&self, table: &ComponentTable, key: Vec<String>, at: &Obj) -> Option<Mor> {
        match table {
            ComponentTable::Strict => self.cat.identity(at),
            ComponentTable::Table(t) => self.cat.mor(t.get(&key)?),
        }
    }
}

impl Category for EnumeratedFibre {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn objects(&self) -> Vec<Obj> {
        self.cat.objects()
    }

    fn has_object(&self, x: &Obj) -> bool {
        self.cat.has_object(x)
    }

    fn hom_size(&self, x: &Obj, y: &Obj) -> u64 {
        self.cat.hom_size(x, y)
    }

    fn hom_nth(&self, x: &Obj, y: &Obj, i: u64) -> Option<Mor> {
        self.cat.hom_nth(x, y, i)
    }

    fn identity(&self, x: &Obj) -> Option<Mor> {
        self.cat.identity(x)
    }

    fn compose(&self, g: &Mor, f: &Mor) -> Option<Mor> {
        self.cat.compose(g, f)
    }
}

impl Fibre for EnumeratedFibre {
    fn unit_obj(&self) -> Obj {
        Obj::named(&self.unit)
    }

    fn tensor_obj(&self, x: &Obj, y: &Obj) -> Option<Obj> {
        let key = (x.0.as_name()?.to_string(), y.0.as_name()?.to_string());
        self.cat.obj(self.tensor_obj_table.get(&key)?)
    }

    fn tensor_mor(&self, f: &Mor, g: &Mor) -> Option<Mor> {
        let key = (f.val.as_name()?.to_string(), g.val.as_name()?.to_string());
        self.cat.mor(self.tensor_mor_table.get(&key)?)
    }

    fn assoc(&self, x: &Obj, y: &Obj, z: &Obj) -> Option<Mor> {
        let xy = self.tensor_obj(x, y)?;
        let at = self.tensor_obj(&xy, z)?;
        let key = vec![x.to_string(), y.to_string(), z.to_string()];
        self.component(&self.assoc_table, key, &at)
    }

    fn lunit(&self, x: &Obj) -> Option<Mor> {
        let at = self.tensor_obj(&self.unit_obj(), x)?;
        self.component(&self.lunit_table, vec![x.to_string()], &at)
    }

    fn runit(&self, x: &Obj) -> Option<Mor> {
        let at = self.tensor_obj(x, &self.unit_obj())?;
        self.component(&self.runit_table, vec![x.to_string()], &at)
    }

    fn braid(&self, x: &Obj, y: &Obj) -> Option<Mor> {
        let table = self.braid_table.as_ref()?;
        let at = self.tensor_obj(x, y)?;
        self.component(table, vec![x.to_string(), y.to_string()], &at)
    }

    fn coequalizer(&self, f: &Mor, g: &Mor) -> Result<Coeq> {
        if f.src != g.src || f.tgt != g.tgt {
            return Err(EngineError::Invalid(
                "coequalizer needs a parallel pair".into(),
            ));
        }
        let y = &f.tgt;
        // Exhaustive search in canonical order: first (Q, q) with q.f = q.g
        // that satisfies the universal property within the window.
        for q_obj in self.objects() {
            for qi in 0..self.hom_size(y, &q_obj) {
                let Some(q) = self.hom_nth(y, &q_obj, qi) else {
                    continue;
                };
                if self.compose(&q, f) != self.compose(&q, g)
                    || self.compose(&q, f).is_none()
                {
                    continue;
                }
                let mut universal = true;
                'outer: for w_obj in self.objects() {
                    for wi in 0..self.hom_size(y, &w_obj) {
                        let Some(w) = self.hom_nth(y, &w_obj, wi) else {
                            continue;
                        };
                        if self.compose(&w, f) != self.compose(&w, g)
                            || self.compose(&w, f).is_none()
                        {
                            continue;
                        }
                        let mut fillers = 0;
                        for ui in 0..self.hom_size(&q_obj, &w_obj) {
                            let Some(u) = self.hom_nth(&q_obj, &w_obj, ui) else {
                                continue;
                            };
                            if self.compose(&u, &q).as_ref() == Some(&w) {
                                fillers += 1;
                            }
                        }
                        if fillers != 1 {
                            universal = false;
                            break 'outer;
                        }
                    }
                }
                if universal {
                    return Ok(Coeq {
                        object: q_obj,
                        projection: q,
                    });
                }
            }
        }
        Err(EngineError::UnsupportedBackend(format!(
            "no coequalizer of ({}, {}) exists within the window",
            self.render_mor(f),
            self.render_mor(g)
        )))
    }

    fn factor_through_epi(&self, q: &Mor, w: &Mor) -> Option<Mor> {
        if q.src != w.src {
            return None;
        }
        let mut found = None;
        for ui in 0..self.hom_size(&q.tgt, &w.tgt) {
            let u = self.hom_nth(&q.tgt, &w.tgt, ui)?;
            if self.compose(&u, q).as_ref() == Some(w) {
                if found.is_some() {
                    return None;
                }
                found = Some(u);
            }
        }
        found
    }
}
