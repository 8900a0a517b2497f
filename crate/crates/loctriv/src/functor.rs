//! Functors between categories, explicit or computed.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::budget::{sample_indices, RunCtx};
use crate::cat::{all_morphisms, Category};
use crate::fincat::FinCat;
use crate::report::ValidationReport;
use crate::val::{Mor, Obj, Val};

pub trait Functorial: Send + Sync {
    fn label(&self) -> String;
    fn src(&self) -> &dyn Category;
    fn tgt(&self) -> &dyn Category;
    fn on_obj(&self, x: &Obj) -> Option<Obj>;
    fn on_mor(&self, m: &Mor) -> Option<Mor>;
}

/// An explicit functor presentation between explicit categories.
#[derive(Clone, Debug)]
pub struct FinFunctor {
    pub label: String,
    pub source: Arc<FinCat>,
    pub target: Arc<FinCat>,
    pub obj_map: BTreeMap<Arc<str>, Arc<str>>,
    pub mor_map: BTreeMap<Arc<str>, Arc<str>>,
}

impl FinFunctor {
    pub fn identity(cat: Arc<FinCat>) -> FinFunctor {
        let obj_map = cat
            .object_names()
            .iter()
            .map(|o| (Arc::from(*o), Arc::from(*o)))
            .collect();
        let mor_map = cat
            .morphism_records()
            .iter()
            .map(|m| (m.name.clone(), m.name.clone()))
            .collect();
        FinFunctor {
            label: format!("Id({})", cat.label()),
            source: cat.clone(),
            target: cat,
            obj_map,
            mor_map,
        }
    }

    /// The constant functor onto `obj` and its identity.
    pub fn constant(source: Arc<FinCat>, target: Arc<FinCat>, obj: &str) -> FinFunctor {
        let id_name = target
            .identity_map()
            .get(obj)
            .cloned()
            .unwrap_or_else(|| Arc::from(format!("id_{obj}")));
        let obj_map = source
            .object_names()
            .iter()
            .map(|o| (Arc::from(*o), Arc::from(obj)))
            .collect();
        let mor_map = source
            .morphism_records()
            .iter()
            .map(|m| (m.name.clone(), id_name.clone()))
            .collect();
        FinFunctor {
            label: format!("const({obj})"),
            source,
            target,
            obj_map,
            mor_map,
        }
    }
}

impl Functorial for FinFunctor {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn src(&self) -> &dyn Category {
        self.source.as_ref()
    }

    fn tgt(&self) -> &dyn Category {
        self.target.as_ref()
    }

    fn on_obj(&self, x: &Obj) -> Option<Obj> {
        let name = x.0.as_name()?;
        let img = self.obj_map.get(name)?;
        self.target.obj(img)
    }

    fn on_mor(&self, m: &Mor) -> Option<Mor> {
        let name = m.val.as_name()?;
        let img = self.mor_map.get(name)?;
        self.target.mor(img)
    }
}

/// Accumulator for building explicit functors map by map.
#[derive(Default, Clone, Debug)]
pub struct FinFunctorParts {
    pub obj: BTreeMap<String, String>,
    pub mor: BTreeMap<String, String>,
}

impl FinFunctorParts {
    pub fn into_functor(self, label: &str, source: Arc<FinCat>, target: Arc<FinCat>) -> FinFunctor {
        FinFunctor {
            label: label.to_string(),
            source,
            target,
            obj_map: self
                .obj
                .into_iter()
                .map(|(k, v)| (Arc::from(k.as_str()), Arc::from(v.as_str())))
                .collect(),
            mor_map: self
                .mor
                .into_iter()
                .map(|(k, v)| (Arc::from(k.as_str()), Arc::from(v.as_str())))
                .collect(),
        }
    }
}

/// A functor given by closures over trait-object categories.
pub struct DynFunctor {
    pub label: String,
    pub source: Arc<dyn Category>,
    pub target: Arc<dyn Category>,
    #[allow(clippy::type_complexity)]
    pub obj_fn: Box<dyn Fn(&Obj) -> Option<Obj> + Send + Sync>,
    #[allow(clippy::type_complexity)]
    pub mor_fn: Box<dyn Fn(&Mor) -> Option<Mor> + Send + Sync>,
}

impl DynFunctor {
    pub fn new(
        label: impl Into<String>,
        source: Arc<dyn Category>,
        target: Arc<dyn Category>,
        obj_fn: impl Fn(&Obj) -> Option<Obj> + Send + Sync + 'static,
        mor_fn: impl Fn(&Mor) -> Option<Mor> + Send + Sync + 'static,
    ) -> Self {
        DynFunctor {
            label: label.into(),
            source,
            target,
            obj_fn: Box::new(obj_fn),
            mor_fn: Box::new(mor_fn),
        }
    }
}

impl Functorial for DynFunctor {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn src(&self) -> &dyn Category {
        self.source.as_ref()
    }

    fn tgt(&self) -> &dyn Category {
        self.target.as_ref()
    }

    fn on_obj(&self, x: &Obj) -> Option<Obj> {
        (self.obj_fn)(x)
    }

    fn on_mor(&self, m: &Mor) -> Option<Mor> {
        (self.mor_fn)(m)
    }
}

/// Functor laws: total structure-preserving maps. Exact on small categories,
/// sampled beyond the tuple budget.
pub fn validate_functor(ctx: &RunCtx, f: &dyn Functorial) -> ValidationReport {
    ctx.log("fincat.validate_functor");
    let mut rep = ValidationReport::new(format!("validate-functor({})", f.label()));
    let src = f.src();
    let tgt = f.tgt();

    for x in src.objects() {
        match f.on_obj(&x) {
            None => rep.structural(
                "object-map.partial",
                "object has no image",
                vec![src.render_obj(&x)],
            ),
            Some(y) => {
                if !tgt.has_object(&y) {
                    rep.structural(
                        "object-map.dangling",
                        "image object is not in the target",
                        vec![src.render_obj(&x), y.to_string()],
                    );
                } else {
                    match (f.on_mor(&src.identity(&x).unwrap_or_else(|| {
                        Mor::new(x.clone(), x.clone(), Val::name("?missing-id"))
                    })), tgt.identity(&y)) {
                        (Some(img), Some(idy)) if img == idy => {}
                        (img, _) => rep.law(
                            "identity.broken",
                            "identity is not preserved",
                            vec![
                                src.render_obj(&x),
                                img.map(|m| tgt.render_mor(&m)).unwrap_or("<none>".into()),
                            ],
                        ),
                    }
                }
            }
        }
    }

    let mors = match all_morphisms(src, ctx.budgets.tuple_limit) {
        Ok(m) => m,
        Err(e) => {
            rep.truncated("law-sweep.skipped", format!("{e}"), vec![]);
            return rep.finish();
        }
    };

    for m in &mors {
        match f.on_mor(m) {
            None => rep.structural(
                "morphism-map.partial",
                "morphism has no image",
                vec![src.render_mor(m)],
            ),
            Some(img) => {
                let (sx, sy) = (f.on_obj(&m.src), f.on_obj(&m.tgt));
                if sx.as_ref() != Some(&img.src) || sy.as_ref() != Some(&img.tgt) {
                    rep.law(
                        "endpoints.broken",
                        "image endpoints differ from endpoint images",
                        vec![src.render_mor(m), tgt.render_mor(&img)],
                    );
                }
            }
        }
    }

    let pairs: Vec<(usize, usize)> = (0..mors.len())
        .flat_map(|i| (0..mors.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| mors[j].src == mors[i].tgt)
        .collect();
    let sample = sample_indices(
        pairs.len() as u64,
        ctx.budgets.tuple_limit,
        ctx.budgets.sample_size,
        &format!("functor:{}", f.label()),
    );
    if sample.is_some() {
        rep.note(format!(
            "composition preservation sampled on {} of {} pairs",
            ctx.budgets.sample_size.min(pairs.len() as u64),
            pairs.len()
        ));
    }
    let visit: Box<dyn Iterator<Item = usize>> = match &sample {
        None => Box::new(0..pairs.len()),
        Some(s) => Box::new(s.iter().map(|&i| i as usize).collect::<Vec<_>>().into_iter()),
    };
    for k in visit {
        let (i, j) = pairs[k];
        let (g, f0) = (&mors[j], &mors[i]);
        let lhs = src.compose(g, f0).and_then(|gf| f.on_mor(&gf));
        let rhs = match (f.on_mor(g), f.on_mor(f0)) {
            (Some(gi), Some(fi)) => tgt.compose(&gi, &fi),
            _ => None,
        };
        if lhs != rhs || lhs.is_none() {
            rep.law(
                "compose.broken",
                "F(g.f) != F(g).F(f)",
                vec![src.render_mor(g), src.render_mor(f0)],
            );
        }
    }
    rep.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_functor_is_valid() {
        let ctx = RunCtx::default();
        let c = Arc::new(FinCat::codiscrete("co", &["a", "b"]));
        let rep = validate_functor(&ctx, &FinFunctor::identity(c));
        assert!(rep.clean(), "{rep}");
    }

    #[test]
    fn constant_functor_is_valid() {
        let ctx = RunCtx::default();
        let c = Arc::new(FinCat::codiscrete("co", &["a", "b"]));
        let t = Arc::new(FinCat::terminal("pt"));
        let rep = validate_functor(&ctx, &FinFunctor::constant(c, t, "pt"));
        assert!(rep.clean(), "{rep}");
    }

    #[test]
    fn broken_composite_is_reported() {
        let ctx = RunCtx::default();
        let c = Arc::new(FinCat::codiscrete("co", &["a", "b"]));
        let mut f = FinFunctor::identity(c);
        // Redirect one composite-relevant morphism: swap images of e_a_b.
        f.mor_map.insert(Arc::from("e_a_b"), Arc::from("e_a_a"));
        let rep = validate_functor(&ctx, &f);
        assert!(!rep.passed());
        assert!(rep.mentions("e_a_b"));
    }
}
