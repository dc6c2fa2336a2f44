//! Truncated Laurent series over l ⊗ E and k ⊗ E in idempotent coordinates.
//!
//! An element of l((v)) ⊗ E is stored as one E-valued Laurent series per
//! embedding τ'_c : l → E.  Component c + 1 is component c composed with
//! Frobenius, so φ shifts components and dilates exponents.

use serde_json::{json, Value};
use thiserror::Error;

use crate::ffield::{Field, FieldElem, Tower};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("series is not invertible")]
    NotInvertible,
    #[error("precision {have} is below the required {need}")]
    PrecisionLoss { need: i64, have: i64 },
    #[error("component index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("unsupported support: {0}")]
    BadSupport(String),
    #[error("malformed serialized series: {0}")]
    Malformed(String),
}

/// Which residue field the series has coefficients in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    K,
    L,
}

impl Base {
    pub fn name(self) -> &'static str {
        match self {
            Base::K => "k",
            Base::L => "l",
        }
    }
}

/// Number of components of the tensor ring over `base`.
pub fn component_count(t: &Tower, base: Base) -> usize {
    match base {
        Base::K => t.f,
        Base::L => t.dl(),
    }
}

/// A truncated Laurent series in v over base ⊗ E.
///
/// Coefficients of v^n are stored for `min_support <= n < prec`; terms at or
/// above `prec` are unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSeries {
    pub base: Base,
    pub min_support: i64,
    pub prec: i64,
    pub comps: Vec<Vec<FieldElem>>,
}

/// An element (s, ζ) of Gal(L/K): s is the power of the residue Frobenius
/// x -> x^{p^f} on l, ζ = ω(g) ∈ μ_{p^f-1} ⊂ k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GalElem {
    pub s: i64,
    pub zeta: FieldElem,
}

impl GalElem {
    pub fn identity(t: &Tower) -> GalElem {
        GalElem { s: 0, zeta: t.k.one() }
    }

    pub fn compose(&self, t: &Tower, other: &GalElem) -> GalElem {
        GalElem { s: (self.s + other.s).rem_euclid(t.e_l as i64), zeta: t.k.mul(&self.zeta, &other.zeta) }
    }

    /// The element (s, γ^j) for the fixed generator γ of k^x.
    pub fn from_exponents(t: &Tower, s: i64, j: i64) -> GalElem {
        GalElem { s: s.rem_euclid(t.e_l as i64), zeta: t.k.pow_i(&t.k_gen, j as i128) }
    }

    /// All (p^f - 1)^2 elements, ordered by (s, j).
    pub fn all(t: &Tower) -> Vec<GalElem> {
        let n = t.e_l as i64;
        let mut out = Vec::with_capacity((n * n) as usize);
        for s in 0..n {
            for j in 0..n {
                out.push(GalElem::from_exponents(t, s, j));
            }
        }
        out
    }
}

impl TensorSeries {
    pub fn zero(t: &Tower, base: Base, min_support: i64, prec: i64) -> TensorSeries {
        let m = component_count(t, base);
        let len = (prec - min_support).max(0) as usize;
        TensorSeries { base, min_support, prec: prec.max(min_support), comps: vec![vec![FieldElem::ZERO; len]; m] }
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    /// The single-component monomial c·e_comp·v^exp.
    pub fn monomial(t: &Tower, base: Base, comp: usize, exp: i64, c: FieldElem, prec: i64) -> TensorSeries {
        let mut x = TensorSeries::zero(t, base, exp.min(prec), prec);
        if exp < prec {
            x.comps[comp][(exp - x.min_support) as usize] = c;
        }
        x
    }

    /// The series with constant component values `vals` times v^exp.
    pub fn from_component_values(base: Base, vals: &[FieldElem], exp: i64, prec: i64) -> TensorSeries {
        let len = (prec - exp).max(0) as usize;
        let comps = vals
            .iter()
            .map(|v| {
                let mut c = vec![FieldElem::ZERO; len];
                if len > 0 {
                    c[0] = *v;
                }
                c
            })
            .collect();
        TensorSeries { base, min_support: exp.min(prec), prec, comps }
    }

    /// The image of a ∈ base times v^exp, i.e. components τ_c(a) v^exp.
    pub fn from_base_elem(t: &Tower, base: Base, a: &FieldElem, exp: i64, prec: i64) -> TensorSeries {
        let vals: Vec<FieldElem> = (0..component_count(t, base))
            .map(|c| match base {
                Base::L => t.tau_l_apply(c, a),
                Base::K => t.tau_k_apply(c, a),
            })
            .collect();
        TensorSeries::from_component_values(base, &vals, exp, prec)
    }

    /// Series from base-field coefficients a_n of v^n, n = min_support, ...
    pub fn from_base_coeffs(t: &Tower, base: Base, min_support: i64, coeffs: &[FieldElem], prec: i64) -> TensorSeries {
        let mut x = TensorSeries::zero(t, base, min_support, prec);
        for (i, a) in coeffs.iter().enumerate() {
            let n = min_support + i as i64;
            if n >= prec || a.is_zero() {
                continue;
            }
            for c in 0..x.ncomp() {
                x.comps[c][i] = match base {
                    Base::L => t.tau_l_apply(c, a),
                    Base::K => t.tau_k_apply(c, a),
                };
            }
        }
        x
    }

    /// Coefficient of v^n in component c; zero below the support.
    pub fn coeff(&self, c: usize, n: i64) -> FieldElem {
        if n < self.min_support || n >= self.prec {
            return FieldElem::ZERO;
        }
        self.comps[c][(n - self.min_support) as usize]
    }

    pub fn set_coeff(&mut self, c: usize, n: i64, x: FieldElem) {
        assert!(n >= self.min_support && n < self.prec, "exponent outside stored range");
        self.comps[c][(n - self.min_support) as usize] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|x| x.is_zero()))
    }

    /// Least exponent carrying a nonzero coefficient in any component.
    pub fn valuation(&self) -> Option<i64> {
        let mut best: Option<i64> = None;
        for comp in &self.comps {
            if let Some(i) = comp.iter().position(|x| !x.is_zero()) {
                let n = self.min_support + i as i64;
                best = Some(best.map_or(n, |b: i64| b.min(n)));
            }
        }
        best
    }

    /// Nonzero terms (component, exponent, coefficient).
    pub fn terms(&self) -> Vec<(usize, i64, FieldElem)> {
        let mut out = Vec::new();
        for (c, comp) in self.comps.iter().enumerate() {
            for (i, x) in comp.iter().enumerate() {
                if !x.is_zero() {
                    out.push((c, self.min_support + i as i64, *x));
                }
            }
        }
        out
    }

    /// Re-stores the series on [min_support, prec) with the given bounds.
    /// Nonzero terms below the new support are an error.
    pub fn reshape(&self, min_support: i64, prec: i64) -> Result<TensorSeries, SeriesError> {
        if prec > self.prec {
            return Err(SeriesError::PrecisionLoss { need: prec, have: self.prec });
        }
        if let Some(v) = self.valuation() {
            if v < min_support && v < prec {
                return Err(SeriesError::BadSupport(format!("term v^{v} below {min_support}")));
            }
        }
        let mut out = TensorSeries {
            base: self.base,
            min_support,
            prec,
            comps: vec![vec![FieldElem::ZERO; (prec - min_support).max(0) as usize]; self.ncomp()],
        };
        for c in 0..self.ncomp() {
            for n in min_support.max(self.min_support)..prec {
                out.comps[c][(n - min_support) as usize] = self.coeff(c, n);
            }
        }
        Ok(out)
    }

    /// Drops everything at or above `prec`.
    pub fn truncate(&self, prec: i64) -> TensorSeries {
        let p = prec.min(self.prec).max(self.min_support);
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            c.truncate((p - self.min_support) as usize);
        }
        out.prec = p;
        out
    }

    /// Multiplication by v^k.
    pub fn shift(&self, k: i64) -> TensorSeries {
        let mut out = self.clone();
        out.min_support += k;
        out.prec += k;
        out
    }

    /// Errors unless the series is known below `floor`.
    pub fn require_prec(&self, floor: i64) -> Result<(), SeriesError> {
        if self.prec < floor {
            Err(SeriesError::PrecisionLoss { need: floor, have: self.prec })
        } else {
            Ok(())
        }
    }
}

/// Ring operations on `TensorSeries` with coefficients in a fixed E.
pub struct TensorRing<'a> {
    pub tower: &'a Tower,
}

impl<'a> TensorRing<'a> {
    pub fn new(tower: &'a Tower) -> TensorRing<'a> {
        TensorRing { tower }
    }

    fn e(&self) -> &Field {
        &self.tower.e
    }

    fn check(&self, x: &TensorSeries, y: &TensorSeries) -> Result<(), SeriesError> {
        if x.base != y.base || x.ncomp() != y.ncomp() {
            Err(SeriesError::RingMismatch)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, x: &TensorSeries, y: &TensorSeries) -> Result<TensorSeries, SeriesError> {
        self.check(x, y)?;
        let e = self.e();
        let lo = x.min_support.min(y.min_support);
        let hi = x.prec.min(y.prec);
        let mut out = TensorSeries { base: x.base, min_support: lo, prec: hi.max(lo), comps: Vec::new() };
        for c in 0..x.ncomp() {
            out.comps.push((lo..out.prec).map(|n| e.add(&x.coeff(c, n), &y.coeff(c, n))).collect());
        }
        Ok(out)
    }

    pub fn neg(&self, x: &TensorSeries) -> TensorSeries {
        let e = self.e();
        let mut out = x.clone();
        for comp in out.comps.iter_mut() {
            for a in comp.iter_mut() {
                *a = e.neg(a);
            }
        }
        out
    }

    pub fn sub(&self, x: &TensorSeries, y: &TensorSeries) -> Result<TensorSeries, SeriesError> {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, x: &TensorSeries, s: &FieldElem) -> TensorSeries {
        let e = self.e();
        let mut out = x.clone();
        for comp in out.comps.iter_mut() {
            for a in comp.iter_mut() {
                if !a.is_zero() {
                    *a = e.mul(a, s);
                }
            }
        }
        out
    }

    /// Multiplies component c by `s[c]`.
    pub fn scale_components(&self, x: &TensorSeries, s: &[FieldElem]) -> TensorSeries {
        let e = self.e();
        let mut out = x.clone();
        for (c, comp) in out.comps.iter_mut().enumerate() {
            for a in comp.iter_mut() {
                if !a.is_zero() {
                    *a = e.mul(a, &s[c]);
                }
            }
        }
        out
    }

    /// Product; precision min(prec x + min_support y, prec y + min_support x).
    pub fn mul(&self, x: &TensorSeries, y: &TensorSeries) -> Result<TensorSeries, SeriesError> {
        self.check(x, y)?;
        let e = self.e();
        let lo = x.min_support + y.min_support;
        let hi = (x.prec + y.min_support).min(y.prec + x.min_support).max(lo);
        let len = (hi - lo) as usize;
        let mut out = TensorSeries { base: x.base, min_support: lo, prec: hi, comps: Vec::new() };
        for c in 0..x.ncomp() {
            let mut acc = vec![FieldElem::ZERO; len];
            for (i, a) in x.comps[c].iter().enumerate() {
                if a.is_zero() || i >= len {
                    continue;
                }
                for (j, b) in y.comps[c].iter().enumerate() {
                    if i + j >= len {
                        break;
                    }
                    if !b.is_zero() {
                        acc[i + j] = e.add(&acc[i + j], &e.mul(a, b));
                    }
                }
            }
            out.comps.push(acc);
        }
        Ok(out)
    }

    /// Product truncated at `prec` (never above the propagated precision).
    pub fn mul_trunc(&self, x: &TensorSeries, y: &TensorSeries, prec: i64) -> Result<TensorSeries, SeriesError> {
        let xs = x.truncate(prec - y.min_support);
        let ys = y.truncate(prec - x.min_support);
        Ok(self.mul(&xs, &ys)?.truncate(prec))
    }

    /// Inverse of a series whose coefficient at `min_support` is a unit in
    /// every component.
    pub fn inv(&self, x: &TensorSeries) -> Result<TensorSeries, SeriesError> {
        let e = self.e();
        let v = x.min_support;
        let rel = x.prec - v;
        if rel <= 0 {
            return Err(SeriesError::NotInvertible);
        }
        let mut out = TensorSeries { base: x.base, min_support: -v, prec: -v + rel, comps: Vec::new() };
        for comp in &x.comps {
            if comp[0].is_zero() {
                return Err(SeriesError::NotInvertible);
            }
            let a0inv = e.inv(&comp[0]);
            let n = rel as usize;
            let mut b = vec![FieldElem::ZERO; n];
            b[0] = a0inv;
            for k in 1..n {
                let mut s = FieldElem::ZERO;
                for j in 1..=k {
                    if !comp[j].is_zero() && !b[k - j].is_zero() {
                        s = e.add(&s, &e.mul(&comp[j], &b[k - j]));
                    }
                }
                b[k] = e.neg(&e.mul(&s, &a0inv));
            }
            out.comps.push(b);
        }
        Ok(out)
    }

    /// φ^m: component c of the result is component c + m of the input and
    /// v^j becomes v^{p^m j}.
    pub fn phi(&self, x: &TensorSeries, m: u32) -> TensorSeries {
        let pm = (self.tower.p as i64).pow(m);
        let nc = x.ncomp();
        let lo = x.min_support * pm;
        let hi = (x.prec * pm).max(lo);
        let mut out = TensorSeries { base: x.base, min_support: lo, prec: hi, comps: vec![vec![FieldElem::ZERO; (hi - lo) as usize]; nc] };
        for c in 0..nc {
            let src = &x.comps[(c + m as usize) % nc];
            for (i, a) in src.iter().enumerate() {
                let n = (x.min_support + i as i64) * pm;
                if n < hi {
                    out.comps[c][(n - lo) as usize] = *a;
                }
            }
        }
        out
    }

    /// v d/dv: the coefficient of v^j is multiplied by j mod p.
    pub fn vddv(&self, x: &TensorSeries) -> TensorSeries {
        let e = self.e();
        let p = self.tower.p as i64;
        let mut out = x.clone();
        for comp in out.comps.iter_mut() {
            for (i, a) in comp.iter_mut().enumerate() {
                let j = (x.min_support + i as i64).rem_euclid(p) as u32;
                *a = e.scale(a, j);
            }
        }
        out
    }

    /// Sum over components of the constant term.
    pub fn const_trace(&self, x: &TensorSeries) -> Result<FieldElem, SeriesError> {
        if x.prec <= 0 {
            return Err(SeriesError::PrecisionLoss { need: 1, have: x.prec });
        }
        let e = self.e();
        let mut s = FieldElem::ZERO;
        for c in 0..x.ncomp() {
            s = e.add(&s, &x.coeff(c, 0));
        }
        Ok(s)
    }

    /// The Gal(L/K)-action g·Σ f_i v^i = Σ g(f_i) ω(g)^i v^i.
    pub fn gal_act(&self, g: &GalElem, x: &TensorSeries) -> Result<TensorSeries, SeriesError> {
        if x.base != Base::L {
            return Err(SeriesError::RingMismatch);
        }
        let t = self.tower;
        let e = self.e();
        let nc = x.ncomp();
        let shift = (g.s.rem_euclid(t.e_l as i64) as usize) * t.f;
        let mut out = x.clone();
        for c in 0..nc {
            let z = t.tau_k_apply(c % t.f, &g.zeta);
            let src = &x.comps[(c + shift) % nc];
            let mut zp = e.pow_i(&z, x.min_support as i128);
            for (i, a) in src.iter().enumerate() {
                out.comps[c][i] = if a.is_zero() { *a } else { e.mul(a, &zp) };
                zp = e.mul(&zp, &z);
            }
        }
        Ok(out)
    }

    /// Projection onto component c (other components zeroed).
    pub fn idempotent_component(&self, x: &TensorSeries, c: usize) -> Result<TensorSeries, SeriesError> {
        if c >= x.ncomp() {
            return Err(SeriesError::IndexOutOfRange(c));
        }
        let mut out = x.clone();
        for (i, comp) in out.comps.iter_mut().enumerate() {
            if i != c {
                comp.iter_mut().for_each(|a| *a = FieldElem::ZERO);
            }
        }
        Ok(out)
    }

    /// The idempotent e_c of base ⊗ E.
    pub fn e_tau(&self, base: Base, c: usize, prec: i64) -> Result<TensorSeries, SeriesError> {
        let m = component_count(self.tower, base);
        if c >= m {
            return Err(SeriesError::IndexOutOfRange(c));
        }
        Ok(TensorSeries::monomial(self.tower, base, c, 0, self.e().one(), prec))
    }

    /// The constant 1.
    pub fn one(&self, base: Base, prec: i64) -> TensorSeries {
        let m = component_count(self.tower, base);
        TensorSeries::from_component_values(base, &vec![self.e().one(); m], 0, prec)
    }

    /// Serializes as {ring, min_support, prec, components: [[[exp, coeff], ...], ...]}.
    pub fn to_json(&self, x: &TensorSeries) -> Value {
        let e = self.e();
        let comps: Vec<Value> = x
            .comps
            .iter()
            .enumerate()
            .map(|(_, comp)| {
                Value::Array(
                    comp.iter()
                        .enumerate()
                        .filter(|(_, a)| !a.is_zero())
                        .map(|(i, a)| json!([x.min_support + i as i64, e.to_coeff_string(a)]))
                        .collect(),
                )
            })
            .collect();
        json!({
            "ring": x.base.name(),
            "min_support": x.min_support,
            "prec": x.prec,
            "components": comps,
        })
    }

    /// Inverse of `to_json`; rejects anything malformed.
    pub fn from_json(&self, v: &Value) -> Result<TensorSeries, SeriesError> {
        let bad = |s: &str| SeriesError::Malformed(s.to_string());
        let base = match v.get("ring").and_then(Value::as_str) {
            Some("k") => Base::K,
            Some("l") => Base::L,
            _ => return Err(bad("ring")),
        };
        let min_support = v.get("min_support").and_then(Value::as_i64).ok_or_else(|| bad("min_support"))?;
        let prec = v.get("prec").and_then(Value::as_i64).ok_or_else(|| bad("prec"))?;
        if prec < min_support || prec - min_support > 1 << 16 || min_support < -(1 << 20) || prec > 1 << 20 {
            return Err(bad("support range"));
        }
        let comps = v.get("components").and_then(Value::as_array).ok_or_else(|| bad("components"))?;
        let m = component_count(self.tower, base);
        if comps.len() != m {
            return Err(bad("component count"));
        }
        let mut x = TensorSeries::zero(self.tower, base, min_support, prec);
        for (c, comp) in comps.iter().enumerate() {
            let terms = comp.as_array().ok_or_else(|| bad("component"))?;
            for term in terms {
                let pair = term.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("term"))?;
                let n = pair[0].as_i64().ok_or_else(|| bad("exponent"))?;
                let s = pair[1].as_str().ok_or_else(|| bad("coefficient"))?;
                let a = self.e().from_coeff_string(s).ok_or_else(|| bad("coefficient"))?;
                if n < min_support || n >= prec || a.is_zero() {
                    return Err(bad("term out of range"));
                }
                if !x.coeff(c, n).is_zero() {
                    return Err(bad("duplicate term"));
                }
                x.set_coeff(c, n, a);
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tower31() -> Tower {
        Tower::new(3, 1, 1).unwrap()
    }

    fn random_series(t: &Tower, rng: &mut ChaCha8Rng, lo: i64, prec: i64) -> TensorSeries {
        let mut x = TensorSeries::zero(t, Base::L, lo, prec);
        for c in 0..x.ncomp() {
            for n in lo..prec {
                if rng.gen_bool(0.6) {
                    x.set_coeff(c, n, t.e.random(rng));
                }
            }
        }
        x
    }

    #[test]
    fn ring_examples() {
        let t = tower31();
        let r = TensorRing::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_series(&t, &mut rng, 0, 8);
        let z = TensorSeries::zero(&t, Base::L, 0, 8);
        assert_eq!(r.add(&x, &z).unwrap(), x);
        let mut u = x.clone();
        for c in 0..u.ncomp() {
            u.set_coeff(c, 0, t.e.one());
        }
        let prod = r.mul(&u, &r.inv(&u).unwrap()).unwrap();
        assert_eq!(prod, r.one(Base::L, 8));
        let a = random_series(&t, &mut rng, 0, 5).shift(-3);
        let b = random_series(&t, &mut rng, 0, 5).shift(3);
        assert_eq!(r.mul(&a, &b).unwrap().min_support, 0);
    }

    #[test]
    fn phi_examples() {
        let t = Tower::new(5, 1, 1).unwrap();
        let r = TensorRing::new(&t);
        let vals: Vec<FieldElem> = (0..4).map(|i| t.e.from_u64(i + 1)).collect();
        let x = TensorSeries::from_component_values(Base::L, &vals, 1, 3);
        let y = r.phi(&x, 1);
        assert_eq!(y.min_support, 5);
        for c in 0..4 {
            assert_eq!(y.coeff(c, 5), vals[(c + 1) % 4]);
        }
        let a = t.l.gen_t();
        let cst = TensorSeries::from_base_elem(&t, Base::L, &a, 0, 4);
        assert_eq!(r.phi(&cst, 4).truncate(1), cst.truncate(1));
        // Component shift agrees with the coefficient Frobenius.
        let ap = TensorSeries::from_base_elem(&t, Base::L, &t.l.frobenius(&a), 0, 1);
        assert_eq!(r.phi(&cst, 1).truncate(1), ap);
    }

    #[test]
    fn phi_multiplicative() {
        let t = Tower::new(3, 2, 1).unwrap();
        let r = TensorRing::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let x = random_series(&t, &mut rng, -2, 4);
            let y = random_series(&t, &mut rng, 1, 6);
            let lhs = r.phi(&r.mul(&x, &y).unwrap(), 1);
            let rhs = r.mul(&r.phi(&x, 1), &r.phi(&y, 1)).unwrap();
            let p = lhs.prec.min(rhs.prec);
            assert_eq!(lhs.truncate(p), rhs.truncate(p).reshape(lhs.min_support, p).unwrap());
        }
    }

    #[test]
    fn vddv_examples() {
        let t = tower31();
        let r = TensorRing::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = r.one(Base::L, 5);
        assert!(r.vddv(&c).is_zero());
        let a = TensorSeries::monomial(&t, Base::L, 0, 3, t.e.one(), 6);
        assert!(r.vddv(&a).is_zero());
        let x = random_series(&t, &mut rng, -4, 6);
        assert!(r.vddv(&r.phi(&x, 1)).is_zero());
        // Leibniz rule.
        let y = random_series(&t, &mut rng, -2, 5);
        let lhs = r.vddv(&r.mul(&x, &y).unwrap());
        let rhs = r.add(&r.mul(&r.vddv(&x), &y).unwrap(), &r.mul(&x, &r.vddv(&y)).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn const_trace_examples() {
        let t = Tower::new(3, 2, 1).unwrap();
        let r = TensorRing::new(&t);
        assert_eq!(r.const_trace(&r.one(Base::L, 3)).unwrap(), t.e.from_u64(16));
        let x = TensorSeries::monomial(&t, Base::L, 2, 1, t.e.one(), 4);
        assert!(r.const_trace(&x).unwrap().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let a = t.l.random(&mut rng);
            let x = TensorSeries::from_base_elem(&t, Base::L, &a, 0, 2);
            let mut s = t.e.zero();
            for c in 0..t.dl() {
                s = t.e.add(&s, &t.tau_l_apply(c, &a));
            }
            assert_eq!(r.const_trace(&x).unwrap(), s);
            // The component sum of an element of l is its absolute trace.
            assert_eq!(s, t.e.from_u64(t.l.trace_value(&a) as u64));
        }
        assert!(matches!(r.const_trace(&x.truncate(0).shift(-3)), Err(SeriesError::PrecisionLoss { .. })));
    }

    #[test]
    fn gal_examples() {
        let t = Tower::new(3, 2, 1).unwrap();
        let r = TensorRing::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_series(&t, &mut rng, -3, 5);
        assert_eq!(r.gal_act(&GalElem::identity(&t), &x).unwrap(), x);
        let g = GalElem::from_exponents(&t, 0, 1);
        let v = TensorSeries::from_base_elem(&t, Base::L, &t.l.one(), 1, 3);
        let zeta_l = t.k_in_l.apply(&t.l, &t.k_gen);
        let zv = TensorSeries::from_base_elem(&t, Base::L, &zeta_l, 1, 3);
        assert_eq!(r.gal_act(&g, &v).unwrap(), zv);
        for _ in 0..5 {
            let g = GalElem::from_exponents(&t, rng.gen_range(0..8), rng.gen_range(0..8));
            let h = GalElem::from_exponents(&t, rng.gen_range(0..8), rng.gen_range(0..8));
            let gh = g.compose(&t, &h);
            let lhs = r.gal_act(&gh, &x).unwrap();
            let rhs = r.gal_act(&g, &r.gal_act(&h, &x).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(r.gal_act(&g, &r.phi(&x, 1)).unwrap(), r.phi(&r.gal_act(&g, &x).unwrap(), 1));
            let y = random_series(&t, &mut rng, 0, 5);
            assert_eq!(
                r.gal_act(&g, &r.mul(&x, &y).unwrap()).unwrap(),
                r.mul(&r.gal_act(&g, &x).unwrap(), &r.gal_act(&g, &y).unwrap()).unwrap()
            );
        }
        // Residue action matches Frobenius on coefficients.
        let a = t.l.random(&mut rng);
        let xa = TensorSeries::from_base_elem(&t, Base::L, &a, 0, 1);
        let g = GalElem::from_exponents(&t, 1, 0);
        let fa = TensorSeries::from_base_elem(&t, Base::L, &t.l.frobenius_iter(&a, 2), 0, 1);
        assert_eq!(r.gal_act(&g, &xa).unwrap(), fa);
    }

    #[test]
    fn idempotents() {
        let t = Tower::new(3, 2, 1).unwrap();
        let r = TensorRing::new(&t);
        let mut s = TensorSeries::zero(&t, Base::K, 0, 2);
        for c in 0..2 {
            let ec = r.e_tau(Base::K, c, 2).unwrap();
            s = r.add(&s, &ec).unwrap();
            for d in 0..2 {
                let prod = r.mul(&ec, &r.e_tau(Base::K, d, 2).unwrap()).unwrap();
                assert_eq!(prod.is_zero(), c != d);
            }
        }
        assert_eq!(s, r.one(Base::K, 2));
        let a = t.k.gen_t();
        let x = TensorSeries::from_base_elem(&t, Base::K, &a, 0, 1);
        for c in 0..2 {
            let comp = r.idempotent_component(&x, c).unwrap();
            assert_eq!(comp.coeff(c, 0), t.tau_k[c].apply(&t.e, &a));
        }
        assert!(r.e_tau(Base::K, 2, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = Tower::new(3, 2, 1).unwrap();
        let r = TensorRing::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_series(&t, &mut rng, -5, 7);
        let v = r.to_json(&x);
        let s = serde_json::to_string(&v).unwrap();
        let back = r.from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, x);
        assert!(r.from_json(&json!({"ring": "k"})).is_err());
    }

    #[test]
    fn precision_is_sound() {
        let t = tower31();
        let r = TensorRing::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_series(&t, &mut rng, -2, 12);
        let y = random_series(&t, &mut rng, 1, 12);
        let full = r.mul(&x, &y).unwrap();
        let short = r.mul(&x.truncate(7), &y.truncate(7)).unwrap();
        assert_eq!(full.truncate(short.prec), short);
    }
}
