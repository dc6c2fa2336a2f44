//! Seeded property suites over the pairing, the Ψ map and the φ-reduction,
//! shared by the self-test command and the acceptance run.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ahpairing::{ClassSpace, PairingContext, PairingError, UnitClass};
use crate::ffield::FieldElem;
use crate::psi::{PsiError, Reducer};
use crate::series::{Base, TensorRing, TensorSeries};
use crate::weights::Setting;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    fn new(name: &str) -> CheckOutcome {
        CheckOutcome { name: name.to_string(), cases: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

/// A random argument supported in [1, N0].
pub fn random_arg(ctx: &PairingContext, rng: &mut ChaCha8Rng, density: f64) -> TensorSeries {
    let t = &ctx.tower;
    let mut x = TensorSeries::zero(t, Base::L, 1, ctx.class_prec());
    for c in 0..x.ncomp() {
        for i in 1..ctx.class_prec() {
            if rng.gen_bool(density) {
                x.set_coeff(c, i, t.e.random(rng));
            }
        }
    }
    x
}

pub fn random_class(ctx: &PairingContext, rng: &mut ChaCha8Rng) -> UnitClass {
    UnitClass { varpi_exp: ctx.tower.e.random(rng), ah_arg: random_arg(ctx, rng, 0.5) }
}

/// Bilinearity, scaling and skew-symmetry on random triples, and c(ϖ, ϖ) = 0.
pub fn pairing_laws(ctx: &PairingContext, rng: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome, PairingError> {
    let e = &ctx.tower.e;
    let mut out = CheckOutcome::new("pairing_laws");
    for k in 0..n {
        let (a, b, c) = (random_class(ctx, rng), random_class(ctx, rng), random_class(ctx, rng));
        let s = e.random(rng);
        let lhs = ctx.pair(&ctx.add(&a, &b)?, &c)?;
        let rhs = e.add(&ctx.pair(&a, &c)?, &ctx.pair(&b, &c)?);
        out.record(lhs == rhs, || format!("additivity, case {k}"));
        let lhs = ctx.pair(&a, &ctx.add(&b, &c)?)?;
        let rhs = e.add(&ctx.pair(&a, &b)?, &ctx.pair(&a, &c)?);
        out.record(lhs == rhs, || format!("additivity in the second slot, case {k}"));
        out.record(ctx.pair(&ctx.scale(&a, &s), &b)? == e.mul(&s, &ctx.pair(&a, &b)?), || format!("scaling, case {k}"));
        out.record(ctx.pair(&a, &b)? == e.neg(&ctx.pair(&b, &a)?), || format!("skew-symmetry, case {k}"));
        out.record(ctx.pair(&a, &a)?.is_zero(), || format!("c(a, a) = 0, case {k}"));
    }
    let w = ctx.varpi_class();
    out.record(ctx.pair(&w, &w)?.is_zero(), || "c(ϖ, ϖ) ≠ 0".into());
    Ok(out)
}

/// Ψ((φ - 1)H) has zero coordinates for finite-tailed H of valuation at
/// least -⌊(N0 - 1)/p⌋.
pub fn coboundary_law(cs: &ClassSpace, rng: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome, PairingError> {
    let t = cs.tower();
    let ring = TensorRing::new(t);
    let lo = -((cs.ctx.n0 - 1) / t.p as i64);
    let hi = 6;
    let mut out = CheckOutcome::new("coboundary_law");
    for k in 0..n {
        let mut h = TensorSeries::zero(t, Base::L, lo, hi);
        for c in 0..h.ncomp() {
            for i in lo..hi {
                if rng.gen_bool(0.6) {
                    h.set_coeff(c, i, t.e.random(rng));
                }
            }
        }
        let d = ring.sub(&ring.phi(&h, 1), &h)?;
        let coords = cs.coordinates(&cs.ctx.psi_class(&d)?)?;
        out.record(coords.iter().all(|x| x.is_zero()), || format!("case {k}"));
    }
    Ok(out)
}

/// log ∘ exp = id below v^N, and E(x + y) = E(x) E(y) for x, y with
/// disjoint supports.
pub fn ah_laws(ctx: &PairingContext, rng: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome, PairingError> {
    let t = &ctx.tower;
    let ring = TensorRing::new(t);
    let prec = ctx.class_prec();
    let mut out = CheckOutcome::new("artin_hasse_laws");
    for k in 0..n {
        let x = random_arg(ctx, rng, 0.4);
        let u = ctx.ah_exp(&x, prec)?;
        out.record(ctx.ah_log(&u, prec)? == x, || format!("round trip, case {k}"));
        let mut a = TensorSeries::zero(t, Base::L, 1, prec);
        let mut b = TensorSeries::zero(t, Base::L, 1, prec);
        for (c, i, v) in x.terms() {
            if rng.gen_bool(0.5) {
                a.set_coeff(c, i, v);
            } else {
                b.set_coeff(c, i, v);
            }
        }
        let prod = ring.mul_trunc(&ctx.ah_exp(&a, prec)?, &ctx.ah_exp(&b, prec)?, prec)?;
        out.record(prod == u, || format!("product, case {k}"));
    }
    Ok(out)
}

/// Reductions of random admissible y for random non-degenerate (σ, J, x, ψ):
/// each ends with a verdict, and Ψ(h(y)) = Ψ(h(z)) in coordinates.
pub fn trichotomy(
    cs: &ClassSpace,
    st: &Setting,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Result<(CheckOutcome, BTreeMap<String, usize>), PsiError> {
    let t = cs.tower();
    let e = &t.e;
    let g = e.primitive_element();
    let z = e.pow(&g, (e.order() - 1) / t.e_l as u128);
    let weights = st.all_weights();
    let pairs = st.all_pairs();
    let mut out = CheckOutcome::new("trichotomy");
    let mut cases = BTreeMap::new();
    let mut k = 0;
    while k < n {
        let s = &weights[rng.gen_range(0..weights.len())];
        let pr = &pairs[rng.gen_range(0..pairs.len())];
        if st.is_degenerate(s, pr) {
            continue;
        }
        let psi = e.pow(&z, rng.gen_range(0..t.e_l) as u128);
        let red = Reducer::new(t, st, s, pr, &psi)?;
        let mut y = TensorSeries::zero(t, Base::K, -pr.x.iter().max().unwrap(), 4);
        for _ in 0..rng.gen_range(1..=3) {
            let r = rng.gen_range(0..t.f);
            let d = rng.gen_range(-pr.x[r]..4);
            let c: FieldElem = e.random(rng);
            y.set_coeff(r, d, c);
        }
        k += 1;
        match red.reduce(&y) {
            Ok(r) => {
                for c in &r.cases {
                    *cases.entry(c.name().to_string()).or_insert(0) += 1;
                }
                let a = cs.coordinates(&cs.ctx.psi_class(&red.h_of(&y))?)?;
                let b = cs.coordinates(&cs.ctx.psi_class(&red.h_of(&r.z))?)?;
                out.record(a == b, || format!("coordinates differ for {s:?} {pr:?}"));
            }
            Err(err) => out.record(false, || err.to_string()),
        }
    }
    Ok((out, cases))
}
