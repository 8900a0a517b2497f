//! Builders for the bundled examples, shared by the presentation corpus,
//! the integration tests and the benchmarks.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::backend::finset::FinSetFibre;
use crate::backend::modular::ModularFibre;
use crate::backend::Fibre;
use crate::fincat::FinCat;
use crate::opfib::{MonoidalOpfib, Transition};

/// Base of the z6 cover: three objects, two quotient arrows.
pub fn z6_base() -> Arc<FinCat> {
    let mut b = FinCat::builder("z6-base");
    b.object("Z6").object("Z2").object("Z3");
    b.morphism("q2", "Z6", "Z2");
    b.morphism("q3", "Z6", "Z3");
    b.auto_identities().auto_identity_composites();
    Arc::new(b.build())
}

/// Modules over Z/6, Z/2, Z/3 with tensor-down transitions.
pub fn z6_opfib(bound: u64) -> Arc<MonoidalOpfib> {
    let base = z6_base();
    let f6 = ModularFibre::new("mod-Z6", 6, bound).unwrap();
    let f2 = ModularFibre::new("mod-Z2", 2, bound).unwrap();
    let f3 = ModularFibre::new("mod-Z3", 3, bound).unwrap();
    let mut fibres: BTreeMap<String, Arc<dyn Fibre>> = BTreeMap::new();
    fibres.insert("Z6".into(), f6.clone());
    fibres.insert("Z2".into(), f2.clone());
    fibres.insert("Z3".into(), f3.clone());
    let mut transitions = BTreeMap::new();
    transitions.insert(
        "q2".to_string(),
        Transition::ModularQuotient {
            src: f6.clone(),
            tgt: f2,
        },
    );
    transitions.insert(
        "q3".to_string(),
        Transition::ModularQuotient { src: f6, tgt: f3 },
    );
    let mut opf = MonoidalOpfib::new("z6-cover", base, fibres, transitions).unwrap();
    opf.claims_symmetric = true;
    Arc::new(opf)
}

/// Finite sets with cartesian product over the terminal base.
pub fn finset_terminal(bound: u64) -> Arc<MonoidalOpfib> {
    let base = Arc::new(FinCat::terminal("pt"));
    let mut fibres: BTreeMap<String, Arc<dyn Fibre>> = BTreeMap::new();
    fibres.insert("pt".to_string(), FinSetFibre::new("finset", bound));
    let mut opf = MonoidalOpfib::new("finset-terminal", base, fibres, BTreeMap::new()).unwrap();
    opf.claims_symmetric = true;
    Arc::new(opf)
}

/// F2 vector spaces over the terminal base, by cardinality bound 2^dims.
pub fn f2_vect(dim_bound: u32) -> Arc<MonoidalOpfib> {
    let base = Arc::new(FinCat::terminal("pt"));
    let fib = ModularFibre::new("f2-vect", 2, 1u64 << dim_bound).unwrap();
    let mut fibres: BTreeMap<String, Arc<dyn Fibre>> = BTreeMap::new();
    fibres.insert("pt".to_string(), fib);
    let mut opf = MonoidalOpfib::new("f2-vect", base, fibres, BTreeMap::new()).unwrap();
    opf.claims_symmetric = true;
    Arc::new(opf)
}
