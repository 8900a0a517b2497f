//! Fibre backends: monoidal categories generated from compact descriptions.
//!
//! A backend exposes the *ambient* category (all objects it can describe,
//! e.g. every finite module over Z/n) while `objects()` enumerates only the
//! *window* fixed by the universe bound. Checks may pass through ambient
//! objects transiently (a tensor of window objects can leave the window);
//! only constructions that would introduce an out-of-window object as a
//! category object report truncation.

pub mod enumerated;
pub mod finset;
pub mod modular;

use std::sync::Arc;

use crate::cat::Category;
use crate::errors::Result;
use crate::val::{Mor, Obj, Val};

/// A reflexive coequalizer: the quotient object and the projection onto it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coeq {
    pub object: Obj,
    pub projection: Mor,
}

/// Which side of a tensor the unknown morphism sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorSide {
    Left,
    Right,
}

/// A context applied to an unknown morphism `a`: optionally tensor with a
/// fixed morphism, then pre- and post-compose with fixed morphisms.
#[derive(Clone, Debug)]
pub struct HomContext {
    pub tensor: Option<(TensorSide, Mor)>,
    pub pre: Option<Mor>,
    pub post: Option<Mor>,
}

impl HomContext {
    pub fn plain() -> Self {
        HomContext {
            tensor: None,
            pre: None,
            post: None,
        }
    }

    pub fn tensored(side: TensorSide, with: Mor) -> Self {
        HomContext {
            tensor: Some((side, with)),
            pre: None,
            post: None,
        }
    }

    pub fn then_pre(mut self, pre: Mor) -> Self {
        self.pre = Some(pre);
        self
    }

    pub fn then_post(mut self, post: Mor) -> Self {
        self.post = Some(post);
        self
    }

    /// Apply the context to a concrete morphism.
    pub fn apply(&self, fib: &dyn Fibre, a: &Mor) -> Option<Mor> {
        let mut m = a.clone();
        if let Some((side, t)) = &self.tensor {
            m = match side {
                TensorSide::Left => fib.tensor_mor(t, &m)?,
                TensorSide::Right => fib.tensor_mor(&m, t)?,
            };
        }
        if let Some(p) = &self.pre {
            m = fib.compose(&m, p)?;
        }
        if let Some(q) = &self.post {
            m = fib.compose(q, &m)?;
        }
        Some(m)
    }
}

/// An equation `lhs(a) = rhs(a)` linear in the unknown `a`.
#[derive(Clone, Debug)]
pub struct HomConstraint {
    pub lhs: HomContext,
    pub rhs: HomContext,
}

/// An indexable set of morphisms x -> y, used for filtered hom-sets.
pub trait IndexedMorSet: Send + Sync {
    fn size(&self) -> u64;
    fn nth(&self, i: u64) -> Option<Mor>;
    /// Membership test.
    fn contains(&self, m: &Mor) -> bool;
}

pub type MorSet = Arc<dyn IndexedMorSet>;

/// The full hom-set of a fibre, indexed directly.
pub struct FullHom {
    pub fibre: Arc<dyn Fibre>,
    pub x: Obj,
    pub y: Obj,
}

impl IndexedMorSet for FullHom {
    fn size(&self) -> u64 {
        self.fibre.hom_size(&self.x, &self.y)
    }

    fn nth(&self, i: u64) -> Option<Mor> {
        self.fibre.hom_nth(&self.x, &self.y, i)
    }

    fn contains(&self, m: &Mor) -> bool {
        m.src == self.x && m.tgt == self.y
    }
}

/// An explicitly listed set, canonically sorted.
pub struct ListedMors {
    pub mors: Vec<Mor>,
}

impl IndexedMorSet for ListedMors {
    fn size(&self) -> u64 {
        self.mors.len() as u64
    }

    fn nth(&self, i: u64) -> Option<Mor> {
        self.mors.get(i as usize).cloned()
    }

    fn contains(&self, m: &Mor) -> bool {
        self.mors.binary_search(m).is_ok()
    }
}

/// A monoidal fibre category generated by a backend.
pub trait Fibre: Category {
    /// The monoidal unit object.
    fn unit_obj(&self) -> Obj;

    /// Tensor of ambient objects. `None` only for invalid objects.
    fn tensor_obj(&self, x: &Obj, y: &Obj) -> Option<Obj>;

    /// Tensor of morphisms, matching `tensor_obj` on endpoints.
    fn tensor_mor(&self, f: &Mor, g: &Mor) -> Option<Mor>;

    /// Canonical associator component (x @ y) @ z -> x @ (y @ z).
    fn assoc(&self, x: &Obj, y: &Obj, z: &Obj) -> Option<Mor>;

    /// Canonical left unitor I @ x -> x.
    fn lunit(&self, x: &Obj) -> Option<Mor>;

    /// Canonical right unitor x @ I -> x.
    fn runit(&self, x: &Obj) -> Option<Mor>;

    /// Canonical braiding x @ y -> y @ x.
    fn braid(&self, x: &Obj, y: &Obj) -> Option<Mor>;

    fn has_coequalizers(&self) -> bool {
        true
    }

    /// Coequalizer of a parallel pair (reflexivity is the caller's business;
    /// the backends compute general coequalizers of the shapes they support).
    fn coequalizer(&self, f: &Mor, g: &Mor) -> Result<Coeq>;

    /// The unique `u` with `u . q = w` when `q` is the projection of a
    /// coequalizer (or any epi the backend recognizes); `None` when no
    /// factorization exists.
    fn factor_through_epi(&self, q: &Mor, w: &Mor) -> Option<Mor>;

    /// The subset of Hom(x, y) satisfying affine constraints. `this` is the
    /// caller's Arc of this same fibre, handed through so the result can
    /// reference it. Backends solve linearly where they can; the default
    /// filters by enumeration within `budget`.
    fn constrained_homs(
        &self,
        this: &Arc<dyn Fibre>,
        x: &Obj,
        y: &Obj,
        constraints: &[HomConstraint],
        budget: u64,
    ) -> Result<MorSet> {
        let n = self.hom_size(x, y);
        if constraints.is_empty() {
            return Ok(Arc::new(FullHom {
                fibre: this.clone(),
                x: x.clone(),
                y: y.clone(),
            }));
        }
        if n > budget {
            return Err(crate::errors::EngineError::Truncation(format!(
                "constrained hom filter over |Hom({x},{y})| = {n} exceeds budget {budget}"
            )));
        }
        let mut mors = Vec::new();
        'cand: for i in 0..n {
            let Some(a) = self.hom_nth(x, y, i) else {
                continue;
            };
            for c in constraints {
                let l = c.lhs.apply(this.as_ref(), &a);
                let r = c.rhs.apply(this.as_ref(), &a);
                if l != r || l.is_none() {
                    continue 'cand;
                }
            }
            mors.push(a);
        }
        Ok(Arc::new(ListedMors { mors }))
    }
}

/// Convenience: the cached identity value of an object, for fast
/// identity-composition shortcuts inside backends.
pub fn is_identity_val(fib: &dyn Fibre, m: &Mor) -> bool {
    m.src == m.tgt
        && fib
            .identity(&m.src)
            .map(|id| id.val == m.val)
            .unwrap_or(false)
}

/// Shared helper: mixed-radix decode of index `i` over the given radices
/// (first radix least significant). Returns `None` if `i` is out of range.
pub fn mixed_radix_decode(mut i: u64, radices: &[u64]) -> Option<Vec<u64>> {
    let mut digits = Vec::with_capacity(radices.len());
    for &r in radices {
        if r == 0 {
            return None;
        }
        digits.push(i % r);
        i /= r;
    }
    (i == 0).then_some(digits)
}

/// Mixed-radix encode; `None` on radix overflow of u64.
pub fn mixed_radix_encode(digits: &[u64], radices: &[u64]) -> Option<u64> {
    let mut acc: u64 = 0;
    let mut mult: u64 = 1;
    let mut overflowed = false;
    for (d, &r) in digits.iter().zip(radices) {
        if *d >= r {
            return None;
        }
        if overflowed && *d > 0 {
            return None;
        }
        acc = acc.checked_add(d.checked_mul(mult)?)?;
        match mult.checked_mul(r) {
            Some(m) => mult = m,
            None => overflowed = true,
        }
    }
    Some(acc)
}

/// Product of radices, saturating at u64::MAX.
pub fn radix_product(radices: &[u64]) -> u64 {
    radices
        .iter()
        .fold(1u64, |acc, &r| acc.saturating_mul(r))
}

/// Morphism value wrapping for encodings: `Nat` when the hom-set fits in a
/// machine word, `Seq` of digits otherwise.
pub fn digits_to_val(digits: &[u64], radices: &[u64]) -> Val {
    if radix_product(radices) != u64::MAX {
        if let Some(packed) = mixed_radix_encode(digits, radices) {
            return Val::Nat(packed);
        }
    }
    Val::seq(digits.iter().map(|&d| Val::Nat(d)).collect())
}

/// Inverse of [`digits_to_val`].
pub fn val_to_digits(v: &Val, radices: &[u64]) -> Option<Vec<u64>> {
    match v {
        Val::Nat(i) => mixed_radix_decode(*i, radices),
        Val::Seq(items) => {
            if items.len() != radices.len() {
                return None;
            }
            let mut out = Vec::with_capacity(items.len());
            for (it, &r) in items.iter().zip(radices) {
                let d = it.as_nat()?;
                if d >= r {
                    return None;
                }
                out.push(d);
            }
            Some(out)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_radix_roundtrip() {
        let radices = [3, 4, 2];
        for i in 0..24 {
            let d = mixed_radix_decode(i, &radices).unwrap();
            assert_eq!(mixed_radix_encode(&d, &radices), Some(i));
        }
        assert!(mixed_radix_decode(24, &radices).is_none());
    }

    #[test]
    fn digit_val_forms_agree() {
        let radices = [5, 5];
        let v = digits_to_val(&[3, 4], &radices);
        assert_eq!(v, Val::Nat(23));
        assert_eq!(val_to_digits(&v, &radices), Some(vec![3, 4]));
    }
}
