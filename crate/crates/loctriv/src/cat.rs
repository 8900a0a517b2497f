//! The category interface and generic law checks.
//!
//! Categories come in two flavours: explicit presentations with dense
//! composition tables ([`crate::fincat::FinCat`]) and generated ("backend")
//! categories whose hom-sets are enumerated on demand by index. Both expose
//! the same trait so that verification code is written once. Hom-sets are
//! addressed positionally (`hom_nth`) so sweeps over very large hom-sets can
//! run without materializing them.

use crate::budget::{sample_indices, RunCtx};
use crate::errors::{EngineError, Result};
use crate::report::ValidationReport;
use crate::val::{Mor, Obj};

pub trait Category: Send + Sync {
    /// Human-readable label used in reports.
    fn label(&self) -> String;

    /// All objects, in canonical order.
    fn objects(&self) -> Vec<Obj>;

    fn has_object(&self, x: &Obj) -> bool {
        self.objects().contains(x)
    }

    /// Exact size of Hom(x, y). Saturating; never enumerates.
    fn hom_size(&self, x: &Obj, y: &Obj) -> u64;

    /// The `i`-th element of Hom(x, y) in canonical order.
    fn hom_nth(&self, x: &Obj, y: &Obj, i: u64) -> Option<Mor>;

    /// Materialize Hom(x, y). Only call when `hom_size` is small.
    fn hom(&self, x: &Obj, y: &Obj) -> Vec<Mor> {
        (0..self.hom_size(x, y))
            .map_while(|i| self.hom_nth(x, y, i))
            .collect()
    }

    fn identity(&self, x: &Obj) -> Option<Mor>;

    /// Composite g after f; `None` when not composable or not defined.
    fn compose(&self, g: &Mor, f: &Mor) -> Option<Mor>;

    fn is_identity(&self, m: &Mor) -> bool {
        m.src == m.tgt && self.identity(&m.src).as_ref() == Some(m)
    }

    /// Exact two-sided inverse, if present. The default searches the whole
    /// reverse hom-set; generated backends override with closed-form tests.
    fn inverse(&self, m: &Mor) -> Option<Mor> {
        let id_src = self.identity(&m.src)?;
        let id_tgt = self.identity(&m.tgt)?;
        let n = self.hom_size(&m.tgt, &m.src);
        for i in 0..n {
            let g = self.hom_nth(&m.tgt, &m.src, i)?;
            if self.compose(&g, m).as_ref() == Some(&id_src)
                && self.compose(m, &g).as_ref() == Some(&id_tgt)
            {
                return Some(g);
            }
        }
        None
    }

    /// Some isomorphism x -> y with its inverse, if one exists. Must be
    /// exact; backends with large hom-sets override via canonical forms.
    fn first_iso(&self, x: &Obj, y: &Obj) -> Option<(Mor, Mor)> {
        let n = self.hom_size(x, y);
        for i in 0..n {
            let f = self.hom_nth(x, y, i)?;
            if let Some(g) = self.inverse(&f) {
                return Some((f, g));
            }
        }
        None
    }

    fn are_isomorphic(&self, x: &Obj, y: &Obj) -> bool {
        x == y || self.first_iso(x, y).is_some()
    }

    fn render_obj(&self, x: &Obj) -> String {
        x.to_string()
    }

    fn render_mor(&self, m: &Mor) -> String {
        m.to_string()
    }
}

/// Total number of morphisms, saturating.
pub fn total_morphisms(cat: &dyn Category) -> u64 {
    let obs = cat.objects();
    let mut n: u64 = 0;
    for x in &obs {
        for y in &obs {
            n = n.saturating_add(cat.hom_size(x, y));
        }
    }
    n
}

/// Every morphism of a small category, in canonical object-pair order.
pub fn all_morphisms(cat: &dyn Category, limit: u64) -> Result<Vec<Mor>> {
    let total = total_morphisms(cat);
    if total > limit {
        return Err(EngineError::Truncation(format!(
            "category {} has {} morphisms, over the limit {}",
            cat.label(),
            total,
            limit
        )));
    }
    let obs = cat.objects();
    let mut out = Vec::with_capacity(total as usize);
    for x in &obs {
        for y in &obs {
            out.extend(cat.hom(x, y));
        }
    }
    Ok(out)
}

/// All isomorphisms x -> y with their inverses, exhaustively.
pub fn find_isomorphisms(
    ctx: &RunCtx,
    cat: &dyn Category,
    x: &Obj,
    y: &Obj,
) -> Result<Vec<(Mor, Mor)>> {
    ctx.log("fincat.find_isomorphisms");
    let n = cat.hom_size(x, y);
    if n > ctx.budgets.tuple_limit {
        return Err(EngineError::Truncation(format!(
            "iso search over |Hom({x},{y})| = {n} exceeds tuple limit {}",
            ctx.budgets.tuple_limit
        )));
    }
    let mut out = Vec::new();
    for i in 0..n {
        let f = cat.hom_nth(x, y, i).ok_or_else(|| {
            EngineError::Invalid(format!("hom_nth({x},{y},{i}) missing"))
        })?;
        if let Some(g) = cat.inverse(&f) {
            out.push((f, g));
        }
    }
    Ok(out)
}

/// Law check for a lazily presented category: identities exist and are
/// neutral, composites exist for composable pairs with the right endpoints,
/// and composition is associative. Sweeps are budgeted.
pub fn validate_category_lazy(ctx: &RunCtx, cat: &dyn Category) -> ValidationReport {
    let mut rep = ValidationReport::new(format!("category-laws({})", cat.label()));
    let obs = cat.objects();
    for x in &obs {
        match cat.identity(x) {
            None => rep.structural("identity.missing", "object has no identity", vec![cat.render_obj(x)]),
            Some(id) => {
                if id.src != *x || id.tgt != *x {
                    rep.structural(
                        "identity.endpoints",
                        "identity endpoints differ from the object",
                        vec![cat.render_obj(x), cat.render_mor(&id)],
                    );
                }
            }
        }
    }

    let mors = match all_morphisms(cat, ctx.budgets.tuple_limit) {
        Ok(ms) => ms,
        Err(e) => {
            rep.truncated(
                "laws.skipped",
                format!("law sweep skipped: {e}"),
                vec![],
            );
            return rep.finish();
        }
    };

    for m in &mors {
        if let Some(id) = cat.identity(&m.src) {
            if cat.compose(m, &id).as_ref() != Some(m) {
                rep.law("identity.right", "f . id != f", vec![cat.render_mor(m)]);
            }
        }
        if let Some(id) = cat.identity(&m.tgt) {
            if cat.compose(&id, m).as_ref() != Some(m) {
                rep.law("identity.left", "id . f != f", vec![cat.render_mor(m)]);
            }
        }
    }

    // Composable pairs, then triples on top of each pair.
    let mut pairs = Vec::new();
    for f in &mors {
        for g in &mors {
            if g.src == f.tgt {
                match cat.compose(g, f) {
                    None => rep.structural(
                        "compose.missing",
                        "composable pair has no composite",
                        vec![cat.render_mor(g), cat.render_mor(f)],
                    ),
                    Some(gf) => {
                        if gf.src != f.src || gf.tgt != g.tgt {
                            rep.law(
                                "compose.endpoints",
                                "composite has wrong endpoints",
                                vec![cat.render_mor(g), cat.render_mor(f), cat.render_mor(&gf)],
                            );
                        }
                        pairs.push((g.clone(), f.clone(), gf));
                    }
                }
            }
        }
    }

    let triple_total = pairs
        .iter()
        .map(|(g, _, _)| mors.iter().filter(|h| h.src == g.tgt).count() as u64)
        .sum::<u64>();
    let sample = sample_indices(
        triple_total,
        ctx.budgets.tuple_limit,
        ctx.budgets.sample_size,
        &format!("assoc:{}", cat.label()),
    );
    if sample.is_some() {
        rep.note(format!(
            "associativity: sampled {} of {} triples",
            ctx.budgets.sample_size.min(triple_total),
            triple_total
        ));
    }
    let mut idx: u64 = 0;
    let mut cursor = 0usize;
    for (g, f, gf) in &pairs {
        for h in mors.iter().filter(|h| h.src == g.tgt) {
            let visit = match &sample {
                None => true,
                Some(s) => {
                    let hit = cursor < s.len() && s[cursor] == idx;
                    if hit {
                        cursor += 1;
                    }
                    hit
                }
            };
            idx += 1;
            if !visit {
                continue;
            }
            let hg = cat.compose(h, g);
            let left = hg.as_ref().and_then(|hg| cat.compose(hg, f));
            let right = cat.compose(h, gf);
            if left != right || left.is_none() {
                rep.law(
                    "assoc",
                    "h.(g.f) != (h.g).f",
                    vec![cat.render_mor(h), cat.render_mor(g), cat.render_mor(f)],
                );
            }
        }
    }
    rep.finish()
}

/// Equality of categories: identical object sets and identical hom-sets
/// (element-by-element in canonical order), identities and composition
/// agreeing. The object map is the identity by definition; see
/// [`crate::fincat::find_category_isomorphism`] for the weaker notion.
pub fn equality_of_categories(
    ctx: &RunCtx,
    left: &dyn Category,
    right: &dyn Category,
) -> ValidationReport {
    let mut rep = ValidationReport::new(format!(
        "category-equality({} vs {})",
        left.label(),
        right.label()
    ));
    let lo = left.objects();
    let ro = right.objects();
    if lo != ro {
        let lset: std::collections::BTreeSet<_> = lo.iter().collect();
        let rset: std::collections::BTreeSet<_> = ro.iter().collect();
        for x in lset.difference(&rset) {
            rep.law("objects.left-only", "object missing on the right", vec![x.to_string()]);
        }
        for x in rset.difference(&lset) {
            rep.law("objects.right-only", "object missing on the left", vec![x.to_string()]);
        }
        return rep.finish();
    }

    for x in &lo {
        if left.identity(x) != right.identity(x) {
            rep.law("identity.mismatch", "identities differ", vec![x.to_string()]);
        }
    }

    let mut small_homs: Vec<(Obj, Obj)> = Vec::new();
    for x in &lo {
        for y in &lo {
            let nl = left.hom_size(x, y);
            let nr = right.hom_size(x, y);
            if nl != nr {
                rep.law(
                    "hom.size",
                    format!("|Hom| differs: {nl} vs {nr}"),
                    vec![x.to_string(), y.to_string()],
                );
                continue;
            }
            let sample = sample_indices(
                nl,
                ctx.budgets.equality_hom_limit,
                ctx.budgets.sample_size,
                &format!("eq:{}:{x}:{y}", left.label()),
            );
            match sample {
                None => {
                    for i in 0..nl {
                        if left.hom_nth(x, y, i) != right.hom_nth(x, y, i) {
                            rep.law(
                                "hom.element",
                                format!("hom element {i} differs"),
                                vec![x.to_string(), y.to_string()],
                            );
                            break;
                        }
                    }
                    if nl <= 64 {
                        small_homs.push((x.clone(), y.clone()));
                    }
                }
                Some(idxs) => {
                    rep.note(format!(
                        "hom({x},{y}): compared sizes exactly, elements on {} of {} indices",
                        idxs.len(),
                        nl
                    ));
                    for i in idxs {
                        if left.hom_nth(x, y, i) != right.hom_nth(x, y, i) {
                            rep.law(
                                "hom.element",
                                format!("hom element {i} differs"),
                                vec![x.to_string(), y.to_string()],
                            );
                            break;
                        }
                    }
                }
            }
        }
    }

    // Composition agreement on the small hom-pairs (budgeted).
    let mut checked: u64 = 0;
    'outer: for (x, y) in &small_homs {
        for (y2, z) in &small_homs {
            if y2 != y {
                continue;
            }
            for f in left.hom(x, y) {
                for g in left.hom(y2, z) {
                    if checked >= ctx.budgets.tuple_limit {
                        rep.note(format!("composition agreement: stopped after {checked} pairs"));
                        break 'outer;
                    }
                    checked += 1;
                    if left.compose(&g, &f) != right.compose(&g, &f) {
                        rep.law(
                            "compose.mismatch",
                            "composites differ",
                            vec![left.render_mor(&g), left.render_mor(&f)],
                        );
                    }
                }
            }
        }
    }
    rep.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::FinCat;

    #[test]
    fn terminal_category_is_lawful() {
        let ctx = RunCtx::default();
        let c = FinCat::terminal("pt");
        let rep = validate_category_lazy(&ctx, &c);
        assert!(rep.clean(), "{rep}");
    }

    #[test]
    fn equality_detects_itself() {
        let ctx = RunCtx::default();
        let c = FinCat::terminal("pt");
        let d = FinCat::terminal("pt");
        assert!(equality_of_categories(&ctx, &c, &d).passed());
        let e = FinCat::terminal("qt");
        assert!(!equality_of_categories(&ctx, &c, &e).passed());
    }
}
