//! Finite sets with cartesian product as tensor.
//!
//! Objects are skeletal: `S0, S1, ...` for each cardinality. A morphism
//! `Sm -> Sk` is the map recorded by its image digits (element j of the
//! source maps to digit j), packed as a mixed-radix index. The product
//! tensor is strict with the encoding `(i, j) -> i * |y| + j`.

use std::sync::Arc;

use crate::backend::{digits_to_val, val_to_digits, Coeq, Fibre};
use crate::cat::Category;
use crate::errors::{EngineError, Result};
use crate::val::{Mor, Obj};

/// Cap on ambient set size: keeps every decode cheap.
const AMBIENT_CAP: u64 = 1 << 16;

#[derive(Debug)]
pub struct FinSetFibre {
    label: String,
    /// Window bound: `objects()` lists S0..=Sbound.
    bound: u64,
    /// When false, `coequalizer` reports an unsupported-backend error; used
    /// to exercise the forced-failure path of the tower verifier.
    coequalizers_enabled: bool,
}

pub fn obj(n: u64) -> Obj {
    Obj::named(format!("S{n}"))
}

pub fn size_of(o: &Obj) -> Option<u64> {
    let name = o.0.as_name()?;
    name.strip_prefix('S')?.parse().ok()
}

/// Decode a map morphism to its image vector.
pub fn images_of(m: &Mor) -> Option<Vec<u64>> {
    let src = size_of(&m.src)?;
    let tgt = size_of(&m.tgt)?;
    val_to_digits(&m.val, &vec![tgt; src as usize])
}

/// Build a map morphism from explicit images.
pub fn map_mor(src: u64, tgt: u64, images: &[u64]) -> Option<Mor> {
    if images.len() != src as usize || images.iter().any(|&i| i >= tgt) {
        return None;
    }
    let radices = vec![tgt; src as usize];
    Some(Mor::new(obj(src), obj(tgt), digits_to_val(images, &radices)))
}

impl FinSetFibre {
    pub fn new(label: impl Into<String>, bound: u64) -> Arc<Self> {
        Arc::new(FinSetFibre {
            label: label.into(),
            bound,
            coequalizers_enabled: true,
        })
    }

    pub fn with_coequalizers_disabled(label: impl Into<String>, bound: u64) -> Arc<Self> {
        Arc::new(FinSetFibre {
            label: label.into(),
            bound,
            coequalizers_enabled: false,
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }
}

impl Category for FinSetFibre {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn objects(&self) -> Vec<Obj> {
        (0..=self.bound).map(obj).collect()
    }

    fn has_object(&self, x: &Obj) -> bool {
        size_of(x).map(|n| n <= AMBIENT_CAP).unwrap_or(false)
    }

    fn hom_size(&self, x: &Obj, y: &Obj) -> u64 {
        let (Some(m), Some(k)) = (size_of(x), size_of(y)) else {
            return 0;
        };
        if m == 0 {
            return 1;
        }
        if k == 0 {
            return 0;
        }
        let mut acc: u64 = 1;
        for _ in 0..m {
            acc = acc.saturating_mul(k);
        }
        acc
    }

    fn hom_nth(&self, x: &Obj, y: &Obj, i: u64) -> Option<Mor> {
        let (m, k) = (size_of(x)?, size_of(y)?);
        if m > 0 && k == 0 {
            return None;
        }
        let radices = vec![k; m as usize];
        let digits = crate::backend::mixed_radix_decode(i, &radices)?;
        Some(Mor::new(x.clone(), y.clone(), digits_to_val(&digits, &radices)))
    }

    fn identity(&self, x: &Obj) -> Option<Mor> {
        let m = size_of(x)?;
        let images: Vec<u64> = (0..m).collect();
        map_mor(m, m, &images)
    }

    fn compose(&self, g: &Mor, f: &Mor) -> Option<Mor> {
        if f.tgt != g.src {
            return None;
        }
        // Identity shortcuts keep large sweeps cheap.
        if self.is_identity(f) {
            return Some(g.clone());
        }
        if self.is_identity(g) {
            return Some(f.clone());
        }
        let fi = images_of(f)?;
        let gi = images_of(g)?;
        let images: Vec<u64> = fi.iter().map(|&x| gi[x as usize]).collect();
        map_mor(size_of(&f.src)?, size_of(&g.tgt)?, &images)
    }

    fn inverse(&self, m: &Mor) -> Option<Mor> {
        let (a, b) = (size_of(&m.src)?, size_of(&m.tgt)?);
        if a != b {
            return None;
        }
        let img = images_of(m)?;
        let mut inv = vec![u64::MAX; b as usize];
        for (j, &i) in img.iter().enumerate() {
            if inv[i as usize] != u64::MAX {
                return None;
            }
            inv[i as usize] = j as u64;
        }
        if inv.iter().any(|&v| v == u64::MAX) {
            return None;
        }
        map_mor(b, a, &inv)
    }

    fn first_iso(&self, x: &Obj, y: &Obj) -> Option<(Mor, Mor)> {
        if size_of(x)? != size_of(y)? {
            return None;
        }
        let id = self.identity(x)?;
        Some((
            Mor::new(x.clone(), y.clone(), id.val.clone()),
            Mor::new(y.clone(), x.clone(), id.val),
        ))
    }

    fn render_mor(&self, m: &Mor) -> String {
        match images_of(m) {
            Some(img) => format!(
                "map[{}]:{}->{}",
                img.iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                m.src,
                m.tgt
            ),
            None => m.to_string(),
        }
    }
}

impl Fibre for FinSetFibre {
    fn unit_obj(&self) -> Obj {
        obj(1)
    }

    fn tensor_obj(&self, x: &Obj, y: &Obj) -> Option<Obj> {
        let (m, n) = (size_of(x)?, size_of(y)?);
        let p = m.checked_mul(n)?;
        (p <= AMBIENT_CAP).then(|| obj(p))
    }

    fn tensor_mor(&self, f: &Mor, g: &Mor) -> Option<Mor> {
        let (ms, mt) = (size_of(&f.src)?, size_of(&f.tgt)?);
        let (ns, nt) = (size_of(&g.src)?, size_of(&g.tgt)?);
        self.tensor_obj(&f.src, &g.src)?;
        self.tensor_obj(&f.tgt, &g.tgt)?;
        let fi = images_of(f)?;
        let gi = images_of(g)?;
        let mut images = Vec::with_capacity((ms * ns) as usize);
        for i in 0..ms {
            for j in 0..ns {
                images.push(fi[i as usize] * nt + gi[j as usize]);
            }
        }
        map_mor(ms * ns, mt * nt, &images)
    }

    fn assoc(&self, x: &Obj, y: &Obj, z: &Obj) -> Option<Mor> {
        // (x*y)*z and x*(y*z) share the flattened encoding: strict.
        let xy = self.tensor_obj(x, y)?;
        let xyz = self.tensor_obj(&xy, z)?;
        self.identity(&xyz)
    }

    fn lunit(&self, x: &Obj) -> Option<Mor> {
        self.identity(x)
    }

    fn runit(&self, x: &Obj) -> Option<Mor> {
        self.identity(x)
    }

    fn braid(&self, x: &Obj, y: &Obj) -> Option<Mor> {
        let (m, n) = (size_of(x)?, size_of(y)?);
        self.tensor_obj(x, y)?;
        let mut images = Vec::with_capacity((m * n) as usize);
        for i in 0..m {
            for j in 0..n {
                images.push(j * m + i);
            }
        }
        map_mor(m * n, n * m, &images)
    }

    fn coequalizer(&self, f: &Mor, g: &Mor) -> Result<Coeq> {
        if !self.coequalizers_enabled {
            return Err(EngineError::UnsupportedBackend(format!(
                "{}: coequalizer computation is disabled",
                self.label
            )));
        }
        if f.src != g.src || f.tgt != g.tgt {
            return Err(EngineError::Invalid(
                "coequalizer needs a parallel pair".into(),
            ));
        }
        let y = size_of(&f.tgt)
            .ok_or_else(|| EngineError::Invalid("bad finset object".into()))?;
        let fi = images_of(f).ok_or_else(|| EngineError::Invalid("bad map".into()))?;
        let gi = images_of(g).ok_or_else(|| EngineError::Invalid("bad map".into()))?;

        // Union-find over the target, merging f(x) ~ g(x).
        let mut parent: Vec<usize> = (0..y as usize).collect();
        fn find(parent: &mut Vec<usize>, a: usize) -> usize {
            if parent[a] != a {
                let r = find(parent, parent[a]);
                parent[a] = r;
            }
            parent[a]
        }
        for (a, b) in fi.iter().zip(&gi) {
            let (ra, rb) = (
                find(&mut parent, *a as usize),
                find(&mut parent, *b as usize),
            );
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        // Classes indexed by least element, in ascending order.
        let mut class_of = vec![u64::MAX; y as usize];
        let mut next = 0u64;
        for a in 0..y as usize {
            let r = find(&mut parent, a);
            if class_of[r] == u64::MAX {
                class_of[r] = next;
                next += 1;
            }
            class_of[a] = class_of[r];
        }
        let proj = map_mor(y, next, &class_of)
            .ok_or_else(|| EngineError::Invalid("bad projection".into()))?;
        Ok(Coeq {
            object: obj(next),
            projection: proj,
        })
    }

    fn factor_through_epi(&self, q: &Mor, w: &Mor) -> Option<Mor> {
        if q.src != w.src {
            return None;
        }
        let qn = size_of(&q.tgt)?;
        let wi = images_of(w)?;
        let qi = images_of(q)?;
        let mut u = vec![u64::MAX; qn as usize];
        for (x, &c) in qi.iter().enumerate() {
            let want = wi[x];
            if u[c as usize] == u64::MAX {
                u[c as usize] = want;
            } else if u[c as usize] != want {
                return None;
            }
        }
        if u.iter().any(|&v| v == u64::MAX) {
            return None; // q not surjective: no unique factorization
        }
        map_mor(qn, size_of(&w.tgt)?, &u)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::RunCtx;
    use crate::cat::validate_category_lazy;

    #[test]
    fn small_finset_is_lawful() {
        let ctx = RunCtx::default();
        let f = FinSetFibre::new("finset", 3);
        let rep = validate_category_lazy(&ctx, f.as_ref());
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn hom_counts() {
        let f = FinSetFibre::new("finset", 4);
        assert_eq!(f.hom_size(&obj(3), &obj(2)), 8);
        assert_eq!(f.hom_size(&obj(0), &obj(2)), 1);
        assert_eq!(f.hom_size(&obj(2), &obj(0)), 0);
        assert_eq!(f.hom_size(&obj(0), &obj(0)), 1);
    }

    #[test]
    fn tensor_is_strict_product() {
        let f = FinSetFibre::new("finset", 4);
        assert_eq!(f.tensor_obj(&obj(2), &obj(3)), Some(obj(6)));
        let a = f.assoc(&obj(2), &obj(3), &obj(4)).unwrap();
        assert!(f.is_identity(&a));
        // braid is a real permutation
        let b = f.braid(&obj(2), &obj(3)).unwrap();
        assert!(!f.is_identity(&b));
        let b2 = f.braid(&obj(3), &obj(2)).unwrap();
        let round = f.compose(&b2, &b).unwrap();
        assert!(f.is_identity(&round));
    }

    #[test]
    fn coequalizer_merges_orbits() {
        let f = FinSetFibre::new("finset", 4);
        // f, g: S2 -> S2 with common section; f = id, g = swap.
        let fm = map_mor(2, 2, &[0, 1]).unwrap();
        let gm = map_mor(2, 2, &[1, 0]).unwrap();
        let c = f.coequalizer(&fm, &gm).unwrap();
        assert_eq!(c.object, obj(1));
        // Spec example: two maps {a,b} -> {x,y}, f(a)=x, f(b)=y, g = const x.
        let fm = map_mor(2, 2, &[0, 1]).unwrap();
        let gm = map_mor(2, 2, &[0, 0]).unwrap();
        let c = f.coequalizer(&fm, &gm).unwrap();
        assert_eq!(c.object, obj(1), "one-point quotient");
        // Pair (f, f): the codomain itself.
        let c = f.coequalizer(&fm, &fm).unwrap();
        assert_eq!(c.object, obj(2));
        assert!(f.is_identity(&c.projection));
    }

    #[test]
    fn factorization_through_projection() {
        let f = FinSetFibre::new("finset", 4);
        let q = map_mor(3, 2, &[0, 0, 1]).unwrap();
        let w = map_mor(3, 2, &[1, 1, 0]).unwrap();
        let u = f.factor_through_epi(&q, &w).unwrap();
        assert_eq!(images_of(&u), Some(vec![1, 0]));
        let w_bad = map_mor(3, 2, &[0, 1, 1]).unwrap();
        assert!(f.factor_through_epi(&q, &w_bad).is_none());
    }

    #[test]
    fn empty_set_edge_cases() {
        let f = FinSetFibre::new("finset", 3);
        let e = f.identity(&obj(0)).unwrap();
        assert!(f.is_identity(&e));
        assert_eq!(f.hom(&obj(0), &obj(3)).len(), 1);
        assert!(f.hom(&obj(2), &obj(0)).is_empty());
        assert_eq!(f.tensor_obj(&obj(0), &obj(3)), Some(obj(0)));
    }
}
