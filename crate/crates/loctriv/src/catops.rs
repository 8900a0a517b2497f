//! Pullbacks and fibres of explicit categories.

use std::sync::Arc;

use crate::budget::RunCtx;
use crate::cat::Category;
use crate::errors::{EngineError, Result};
use crate::fincat::FinCat;
use crate::functor::{FinFunctor, FinFunctorParts};

fn pair_name(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// The pullback C x_B D of two explicit functors with common target,
/// together with the two projections. Objects are pairs agreeing in B;
/// morphisms are pairs of morphisms with the same image.
pub fn pullback_category(
    ctx: &RunCtx,
    f: &FinFunctor,
    g: &FinFunctor,
) -> Result<(Arc<FinCat>, FinFunctor, FinFunctor)> {
    ctx.log("fincat.pullback_category");
    if f.target.as_ref() != g.target.as_ref() {
        return Err(EngineError::Invalid(
            "pullback requires functors with the same target".into(),
        ));
    }
    let c = &f.source;
    let d = &g.source;
    let mut b = FinCat::builder(&format!("({}x{})", c.label(), d.label()));
    let mut proj1 = FinFunctorParts::default();
    let mut proj2 = FinFunctorParts::default();

    for x in c.object_names() {
        for y in d.object_names() {
            if f.obj_map.get(x) == g.obj_map.get(y) && f.obj_map.contains_key(x) {
                let name = pair_name(x, y);
                b.object(&name);
                proj1.obj.insert(name.clone(), x.to_string());
                proj2.obj.insert(name, y.to_string());
            }
        }
    }
    for m in c.morphism_records() {
        for n in d.morphism_records() {
            if f.mor_map.get(&m.name) == g.mor_map.get(&n.name) && f.mor_map.contains_key(&m.name)
            {
                let name = pair_name(&m.name, &n.name);
                b.morphism(
                    &name,
                    &pair_name(&m.src, &n.src),
                    &pair_name(&m.tgt, &n.tgt),
                );
                proj1.mor.insert(name.clone(), m.name.to_string());
                proj2.mor.insert(name, n.name.to_string());
            }
        }
    }
    for (x, idx) in c.identity_map() {
        for (y, idy) in d.identity_map() {
            if f.obj_map.get(x) == g.obj_map.get(y) && f.obj_map.contains_key(x) {
                b.set_identity(&pair_name(x, y), &pair_name(idx, idy));
            }
        }
    }
    // Componentwise composition, restricted to pairs present above.
    for ((gm, fm), gfm) in c.compose_table() {
        for ((gn, fn_), gfn) in d.compose_table() {
            let left_ok = f.mor_map.get(gm) == g.mor_map.get(gn) && f.mor_map.contains_key(gm);
            let right_ok = f.mor_map.get(fm) == g.mor_map.get(fn_) && f.mor_map.contains_key(fm);
            if left_ok && right_ok {
                b.set_compose(
                    &pair_name(gm, gn),
                    &pair_name(fm, fn_),
                    &pair_name(gfm, gfn),
                );
            }
        }
    }
    let pb = Arc::new(b.build());
    let p1 = proj1.into_functor("proj1", pb.clone(), c.clone());
    let p2 = proj2.into_functor("proj2", pb.clone(), d.clone());
    Ok((pb, p1, p2))
}

/// The unique mediating functor into a pullback for a cone (h, k) with
/// f.h = g.k. Joint injectivity of the projections makes it unique by
/// construction; this builds it and leaves verification to the caller.
pub fn pullback_mediator(
    pb: Arc<FinCat>,
    h: &FinFunctor,
    k: &FinFunctor,
) -> Result<FinFunctor> {
    if h.source.as_ref() != k.source.as_ref() {
        return Err(EngineError::Invalid("cone legs must share a source".into()));
    }
    let mut parts = FinFunctorParts::default();
    for x in h.source.object_names() {
        let hx = h.obj_map.get(x).ok_or_else(|| {
            EngineError::Invalid(format!("cone leg is partial at object {x}"))
        })?;
        let kx = k.obj_map.get(x).ok_or_else(|| {
            EngineError::Invalid(format!("cone leg is partial at object {x}"))
        })?;
        parts.obj.insert(x.to_string(), pair_name(hx, kx));
    }
    for m in h.source.morphism_records() {
        let hm = h.mor_map.get(&m.name).ok_or_else(|| {
            EngineError::Invalid(format!("cone leg is partial at morphism {}", m.name))
        })?;
        let km = k.mor_map.get(&m.name).ok_or_else(|| {
            EngineError::Invalid(format!("cone leg is partial at morphism {}", m.name))
        })?;
        parts.mor.insert(m.name.to_string(), pair_name(hm, km));
    }
    Ok(parts.into_functor("mediator", h.source.clone(), pb))
}

/// The fibre of an explicit functor at a base object: the full subcategory
/// of objects over `base_obj` and morphisms over its identity, with the
/// inclusion functor. Names are preserved.
pub fn fibre_category(
    ctx: &RunCtx,
    p: &FinFunctor,
    base_obj: &str,
) -> Result<(Arc<FinCat>, FinFunctor)> {
    ctx.log("fincat.fibre_category");
    if p.target.obj(base_obj).is_none() {
        return Err(EngineError::NotFound(format!(
            "base object {base_obj} is not in {}",
            p.target.label()
        )));
    }
    let id_base = p.target.identity_map().get(base_obj).cloned();
    let mut b = FinCat::builder(&format!("{}|{}", p.source.label(), base_obj));
    let mut incl = FinFunctorParts::default();
    let over: Vec<&str> = p
        .source
        .object_names()
        .into_iter()
        .filter(|o| p.obj_map.get(*o).map(|i| i.as_ref()) == Some(base_obj))
        .collect();
    for o in &over {
        b.object(o);
        incl.obj.insert(o.to_string(), o.to_string());
    }
    let kept: Vec<_> = p
        .source
        .morphism_records()
        .iter()
        .filter(|m| {
            over.contains(&m.src.as_ref())
                && over.contains(&m.tgt.as_ref())
                && p.mor_map.get(&m.name) == id_base.as_ref()
        })
        .collect();
    for m in &kept {
        b.morphism(&m.name, &m.src, &m.tgt);
        incl.mor.insert(m.name.to_string(), m.name.to_string());
    }
    for (o, id) in p.source.identity_map() {
        if over.contains(&o.as_ref()) {
            b.set_identity(o, id);
        }
    }
    let kept_names: std::collections::BTreeSet<&str> =
        kept.iter().map(|m| m.name.as_ref()).collect();
    for ((g, f), gf) in p.source.compose_table() {
        if kept_names.contains(g.as_ref()) && kept_names.contains(f.as_ref()) {
            b.set_compose(g, f, gf);
        }
    }
    let fc = Arc::new(b.build());
    Ok((
        fc.clone(),
        incl.into_functor(&format!("incl@{base_obj}"), fc, p.source.clone()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::Category;
    use crate::fincat::validate_category;
    use crate::functor::{validate_functor, Functorial};

    #[test]
    fn pullback_of_identities_is_diagonal() {
        let ctx = RunCtx::default();
        let b = Arc::new(FinCat::codiscrete("B", &["u", "v"]));
        let idb = FinFunctor::identity(b.clone());
        let (pb, p1, p2) = pullback_category(&ctx, &idb, &idb).unwrap();
        assert_eq!(pb.objects().len(), 2);
        assert!(validate_category(&ctx, &pb).clean());
        assert!(validate_functor(&ctx, &p1).clean());
        assert!(validate_functor(&ctx, &p2).clean());
        let iso = crate::fincat::find_category_isomorphism(&pb, &b, false);
        assert!(iso.is_some(), "diagonal pullback is isomorphic to B");
    }

    #[test]
    fn pullback_over_terminal_is_product() {
        let ctx = RunCtx::default();
        let c = Arc::new(FinCat::discrete("C", &["a", "b", "c"]));
        let d = Arc::new(FinCat::codiscrete("D", &["x", "y"]));
        let t = Arc::new(FinCat::terminal("pt"));
        let fc = FinFunctor::constant(c.clone(), t.clone(), "pt");
        let fd = FinFunctor::constant(d.clone(), t, "pt");
        let (pb, _, _) = pullback_category(&ctx, &fc, &fd).unwrap();
        assert_eq!(pb.objects().len(), 6);
        assert!(validate_category(&ctx, &pb).clean());
    }

    #[test]
    fn fibre_of_projection_recovers_factor() {
        let ctx = RunCtx::default();
        let c = Arc::new(FinCat::codiscrete("C", &["a", "b"]));
        let d = Arc::new(FinCat::discrete("D", &["x", "y"]));
        let t = Arc::new(FinCat::terminal("pt"));
        let fc = FinFunctor::constant(c.clone(), t.clone(), "pt");
        let fd = FinFunctor::constant(d.clone(), t, "pt");
        let (pb, _p1, p2) = pullback_category(&ctx, &fc, &fd).unwrap();
        // Fibre of proj2 at x should be isomorphic to C.
        let (fx, incl) = fibre_category(&ctx, &p2, "x").unwrap();
        assert!(validate_functor(&ctx, &incl).clean());
        assert!(crate::fincat::find_category_isomorphism(&fx, &c, false).is_some());
        // Together the fibres partition the objects over identities.
        let (fy, _) = fibre_category(&ctx, &p2, "y").unwrap();
        assert_eq!(
            fx.objects().len() + fy.objects().len(),
            pb.objects().len()
        );
    }

    #[test]
    fn mediator_commutes_with_projections() {
        let ctx = RunCtx::default();
        let b = Arc::new(FinCat::codiscrete("B", &["u"]));
        let c = Arc::new(FinCat::codiscrete("C", &["p", "q"]));
        let f = FinFunctor::constant(c.clone(), b.clone(), "u");
        let (pb, p1, p2) = pullback_category(&ctx, &f, &f).unwrap();
        let h = FinFunctor::identity(c.clone());
        let m = pullback_mediator(pb, &h, &h).unwrap();
        assert!(validate_functor(&ctx, &m).clean());
        for x in c.object_names() {
            let xc = c.obj(x).unwrap();
            let through = m.on_obj(&xc).and_then(|y| p1.on_obj(&y));
            assert_eq!(through, h.on_obj(&xc));
            let through2 = m.on_obj(&xc).and_then(|y| p2.on_obj(&y));
            assert_eq!(through2, h.on_obj(&xc));
        }
    }
}
