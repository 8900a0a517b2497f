//! Value terms naming objects and morphisms.
//!
//! Every category in this crate names its objects and morphisms with a
//! [`Val`]: either an interned identifier, a packed machine word (used by the
//! generated backends to index hom-set elements), or a pair/sequence of
//! smaller values (used by pullbacks, total categories and the algebra
//! constructions). `Ord` on `Val` is the canonical enumeration order used
//! everywhere a deterministic order is required.

use std::fmt;
use std::sync::Arc;

/// A structured identifier. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Val {
    /// Interned name; explicit presentations and backend object names.
    Name(Arc<str>),
    /// Packed payload, e.g. the mixed-radix index of a backend morphism.
    Nat(u64),
    /// Ordered pair, e.g. (base morphism, fibre part).
    Pair(Arc<(Val, Val)>),
    /// Fixed tuple, e.g. a monoid object (carrier, mul, unit).
    Seq(Arc<[Val]>),
}

impl Val {
    pub fn name(s: impl AsRef<str>) -> Self {
        Val::Name(Arc::from(s.as_ref()))
    }

    pub fn pair(a: Val, b: Val) -> Self {
        Val::Pair(Arc::new((a, b)))
    }

    pub fn seq(items: Vec<Val>) -> Self {
        Val::Seq(Arc::from(items))
    }

    pub fn as_name(&self) -> Option<&str> {
        match self {
            Val::Name(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Val::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Val, &Val)> {
        match self {
            Val::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    pub fn as_seq(&self) -> Option<&[Val]> {
        match self {
            Val::Seq(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Name(s) => write!(f, "{s}"),
            Val::Nat(n) => write!(f, "#{n}"),
            Val::Pair(p) => write!(f, "({},{})", p.0, p.1),
            Val::Seq(s) => {
                write!(f, "[")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Debug for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An object of some category.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Obj(pub Val);

impl Obj {
    pub fn named(s: impl AsRef<str>) -> Self {
        Obj(Val::name(s))
    }
}

impl fmt::Display for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A morphism of some category: a value plus explicit endpoints.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mor {
    pub src: Obj,
    pub tgt: Obj,
    pub val: Val,
}

impl Mor {
    pub fn new(src: Obj, tgt: Obj, val: Val) -> Self {
        Mor { src, tgt, val }
    }

    pub fn is_endo(&self) -> bool {
        self.src == self.tgt
    }
}

impl fmt::Display for Mor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}->{}", self.val, self.src, self.tgt)
    }
}

impl fmt::Debug for Mor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn val_order_is_by_variant_then_content() {
        let a = Val::name("a");
        let b = Val::name("b");
        assert!(a < b);
        assert!(Val::Nat(3) < Val::Nat(10));
        let p = Val::pair(a.clone(), b.clone());
        let q = Val::pair(b, a);
        assert!(p < q);
    }

    #[test]
    fn display_forms() {
        let m = Mor::new(
            Obj::named("X"),
            Obj::named("Y"),
            Val::pair(Val::name("f"), Val::Nat(4)),
        );
        assert_eq!(m.to_string(), "(f,#4):X->Y");
        assert_eq!(Val::seq(vec![Val::Nat(1), Val::Nat(2)]).to_string(), "[#1;#2]");
    }
}
