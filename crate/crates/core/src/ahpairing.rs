//! The Artin-Hasse exponential mod p on l[[v]] ⊗ E, classes in L^× ⊗ E, the
//! Vostokov residue formula for the Hilbert pairing, and coordinates of
//! classes against a fixed Shafarevich-type basis.
//!
//! A class is stored as ϖ^a · E^AH(x)(ϖ) with a ∈ E and x ∈ v l[[v]] ⊗ E;
//! Teichmüller factors are dropped because they die after tensoring with E.

use std::sync::OnceLock;

use serde_json::{json, Value};
use thiserror::Error;

use crate::ffield::{FieldElem, Tower};
use crate::linalg::{self, Matrix, Vector};
use crate::localfield::{
    ah_coefficients, hensel_zeta_p_with_seed, log_precision, unit_decomposition, z_precision, LocalError, OLElem,
    OLRing, WittSeriesRing,
};
use crate::series::{Base, GalElem, SeriesError, TensorRing, TensorSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("bad support: {0}")]
    BadSupport(String),
    #[error("not a principal unit")]
    NotPrincipalUnit,
    #[error("support {have} below the admissible bound {bound}")]
    SupportTooNegative { have: i64, bound: i64 },
    #[error("precision {have} below the required {need}")]
    PrecisionLoss { need: i64, have: i64 },
    #[error("Gram matrix is singular (rank {rank} of {size})")]
    SingularGram { rank: usize, size: usize },
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A class ϖ^{varpi_exp} · E^AH(ah_arg)(ϖ) in L^× ⊗ E.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitClass {
    pub varpi_exp: FieldElem,
    pub ah_arg: TensorSeries,
}

/// Labels of the Shafarevich basis elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BasisLabel {
    /// The uniformiser ϖ.
    Varpi,
    /// E^AH([t^j] v^i) with p ∤ i < N0.
    Monomial { i: i64, j: usize },
    /// E^AH([b] v^{N0}) with Tr(b) ≠ 0.
    Cyc,
}

impl BasisLabel {
    pub fn name(&self) -> String {
        match self {
            BasisLabel::Varpi => "varpi".to_string(),
            BasisLabel::Monomial { i, j } => format!("E(t^{j} v^{i})"),
            BasisLabel::Cyc => "cyc".to_string(),
        }
    }
}

/// Cached data for one (p, f): z(v) mod p and R = 1/(z^p - 1).
#[derive(Clone, Debug)]
pub struct PairingContext {
    pub tower: Tower,
    pub n0: i64,
    pub seed: u32,
    /// p-adic precision used for the Hensel lift of ζ_p.
    pub zeta_prec: u32,
    /// v-precision of the stored z(v).
    pub z_prec: i64,
    pub z: TensorSeries,
    /// z^p - 1, stored from v^{N0}.
    pub zp1: TensorSeries,
    /// `r[c][k]` is the coefficient of v^{-k} in component c of R, 1 ≤ k ≤ N0.
    r: Vec<Vec<FieldElem>>,
    ah: Vec<u64>,
}

impl PairingContext {
    pub fn new(t: &Tower, seed: u32) -> Result<PairingContext, PairingError> {
        PairingContext::with_extra_precision(t, seed, 0, 0)
    }

    /// Builds the context with `extra_v` more v-digits of z and `extra_m`
    /// more p-adic digits in the Hensel lift than the certified minimum.
    pub fn with_extra_precision(t: &Tower, seed: u32, extra_v: i64, extra_m: u32) -> Result<PairingContext, PairingError> {
        let n0 = t.n0();
        let z_prec = 2 * n0 + 1 + extra_v;
        let zeta_prec = z_precision(t, z_prec) + extra_m;
        let zeta = hensel_zeta_p_with_seed(t, zeta_prec, seed)?;
        let olr = OLRing::new(t, zeta_prec);
        let mut digits = olr.teich_digits(&zeta);
        digits.truncate(z_prec as usize);
        let z = TensorSeries::from_base_coeffs(t, Base::L, 0, &digits, z_prec);
        let ring = TensorRing::new(t);
        let mut zp = z.clone();
        for _ in 1..t.p {
            zp = ring.mul(&zp, &z)?;
        }
        let zp1 = ring.sub(&zp, &ring.one(Base::L, zp.prec))?;
        let zp1 = zp1.reshape(n0, zp1.prec)?;
        let inv = ring.inv(&zp1)?;
        inv.require_prec(0)?;
        let r = (0..t.dl())
            .map(|c| {
                let mut row = vec![FieldElem::ZERO; n0 as usize + 1];
                for k in 1..=n0 {
                    row[k as usize] = inv.coeff(c, -k);
                }
                row
            })
            .collect();
        let ah = ah_coefficients(t.p as u64, 1, 2 * z_prec as usize);
        Ok(PairingContext { tower: t.clone(), n0, seed, zeta_prec, z_prec, z, zp1, r, ah })
    }

    fn ring(&self) -> TensorRing<'_> {
        TensorRing::new(&self.tower)
    }

    /// Storage precision of class arguments: degrees 1..=N0.
    pub fn class_prec(&self) -> i64 {
        self.n0 + 1
    }

    /// Coefficient of v^{-k} in component c of 1/(z^p - 1).
    pub fn r_coeff(&self, c: usize, k: i64) -> FieldElem {
        self.r[c % self.r.len()][k as usize]
    }

    fn ah_series(&self, a: &FieldElem, i: i64, prec: i64, out: &mut [FieldElem], lo: i64) {
        // out (a component of a series with min_support lo) *= E(a v^i)
        let e = &self.tower.e;
        let coeffs: Vec<(i64, FieldElem)> = {
            let mut v = Vec::new();
            let mut pw = e.one();
            let mut n = 0i64;
            while n * i < prec - lo.max(0) || n == 0 {
                if (n as usize) >= self.ah.len() {
                    break;
                }
                if n > 0 {
                    pw = e.mul(&pw, a);
                }
                let c = self.ah[n as usize];
                if c != 0 {
                    v.push((n * i, e.scale(&pw, c as u32)));
                }
                n += 1;
            }
            v
        };
        let len = out.len();
        for k in (0..len).rev() {
            let cur = out[k];
            if cur.is_zero() {
                continue;
            }
            for &(shift, ref c) in coeffs.iter().skip(1) {
                let t = k + shift as usize;
                if t >= len {
                    break;
                }
                out[t] = e.add(&out[t], &e.mul(&cur, c));
            }
        }
    }

    fn ah_needed(&self, n: i64) -> Result<(), PairingError> {
        if n > self.ah.len() as i64 {
            Err(PairingError::PrecisionLoss { need: n, have: self.ah.len() as i64 })
        } else {
            Ok(())
        }
    }

    /// E^AH(x) mod p below v^n, as Π E(a v^i) over the terms of x.
    pub fn ah_exp(&self, x: &TensorSeries, n: i64) -> Result<TensorSeries, PairingError> {
        if let Some(v) = x.valuation() {
            if v < 1 {
                return Err(PairingError::BadSupport(format!("term v^{v} in an Artin-Hasse argument")));
            }
        }
        if x.prec < n {
            return Err(PairingError::PrecisionLoss { need: n, have: x.prec });
        }
        self.ah_needed(n)?;
        let mut out = self.ring().one(x.base, n);
        for (c, i, a) in x.terms() {
            if i < n {
                self.ah_series(&a, i, n, &mut out.comps[c], 0);
            }
        }
        Ok(out)
    }

    /// Inverse of `ah_exp` below v^n, by peeling the lowest term.
    pub fn ah_log(&self, u: &TensorSeries, n: i64) -> Result<TensorSeries, PairingError> {
        let e = &self.tower.e;
        if u.prec < n {
            return Err(PairingError::PrecisionLoss { need: n, have: u.prec });
        }
        self.ah_needed(n)?;
        let u = u.reshape(0, n).map_err(|_| PairingError::NotPrincipalUnit)?;
        let mut x = TensorSeries::zero(&self.tower, u.base, 1, n.max(1));
        for c in 0..u.ncomp() {
            if !e.is_one(&u.comps[c][0]) {
                return Err(PairingError::NotPrincipalUnit);
            }
            let mut cur = u.comps[c].clone();
            for i in 1..n {
                let a = cur[i as usize];
                if a.is_zero() {
                    continue;
                }
                x.set_coeff(c, i, a);
                self.ah_series(&e.neg(&a), i, n, &mut cur, 0);
            }
        }
        Ok(x)
    }

    pub fn zero_class(&self) -> UnitClass {
        UnitClass {
            varpi_exp: FieldElem::ZERO,
            ah_arg: TensorSeries::zero(&self.tower, Base::L, 1, self.class_prec()),
        }
    }

    /// The class of ϖ.
    pub fn varpi_class(&self) -> UnitClass {
        UnitClass { varpi_exp: self.tower.e.one(), ..self.zero_class() }
    }

    /// The class of E^AH(x)(ϖ) for x ∈ v l[[v]] ⊗ E.
    pub fn ah_class(&self, x: &TensorSeries) -> Result<UnitClass, PairingError> {
        Ok(UnitClass { varpi_exp: FieldElem::ZERO, ah_arg: self.normalize_arg(x)? })
    }

    fn normalize_arg(&self, x: &TensorSeries) -> Result<TensorSeries, PairingError> {
        if x.base != Base::L {
            return Err(PairingError::BadSupport("class arguments live over l".into()));
        }
        if let Some(v) = x.valuation() {
            if v < 1 {
                return Err(PairingError::BadSupport(format!("term v^{v} in a class argument")));
            }
        }
        if x.prec < self.class_prec() {
            return Err(PairingError::PrecisionLoss { need: self.class_prec(), have: x.prec });
        }
        Ok(x.reshape(1, self.class_prec())?)
    }

    /// Ψ₀: x = c + x₊ maps to the class with ϖ-exponent Tr(c) and argument x₊.
    pub fn psi0_class(&self, x: &TensorSeries) -> Result<UnitClass, PairingError> {
        if let Some(v) = x.valuation() {
            if v < 0 {
                return Err(PairingError::BadSupport(format!("term v^{v} in a Ψ₀ argument")));
            }
        }
        let varpi_exp = self.ring().const_trace(x)?;
        let mut pos = x.reshape(0, x.prec.min(self.class_prec()).max(0))?;
        if pos.prec < self.class_prec() {
            return Err(PairingError::PrecisionLoss { need: self.class_prec(), have: pos.prec });
        }
        for c in 0..pos.ncomp() {
            pos.set_coeff(c, 0, FieldElem::ZERO);
        }
        Ok(UnitClass { varpi_exp, ah_arg: pos.reshape(1, self.class_prec())? })
    }

    /// Ψ(h) = Ψ₀(h · (z^p - 1)).
    pub fn psi_class(&self, h: &TensorSeries) -> Result<UnitClass, PairingError> {
        let Some(v) = h.valuation() else {
            return Ok(self.zero_class());
        };
        if v < -self.n0 {
            return Err(PairingError::SupportTooNegative { have: v, bound: -self.n0 });
        }
        if v > 0 {
            return Ok(self.zero_class());
        }
        let need = self.class_prec() - self.n0;
        if h.prec < need {
            return Err(PairingError::PrecisionLoss { need, have: h.prec });
        }
        let hs = h.reshape(v, need)?;
        let zp1 = self.zp1.truncate(self.class_prec() - v);
        if zp1.prec < self.class_prec() - v {
            return Err(PairingError::PrecisionLoss { need: self.class_prec() - v, have: zp1.prec });
        }
        let y = self.ring().mul_trunc(&hs, &zp1, self.class_prec())?;
        self.psi0_class(&y)
    }

    /// The class of a nonzero x ∈ O_L, through its digit expansion and L^AH
    /// over W(l).
    pub fn class_of_ol(&self, r: &OLRing, x: &OLElem) -> Result<UnitClass, PairingError> {
        let t = &self.tower;
        let (a, _theta, eps) = unit_decomposition(r, x)?;
        let need = self.class_prec() as usize;
        if eps.len() < need {
            return Err(PairingError::PrecisionLoss { need: need as i64, have: eps.len() as i64 });
        }
        let m = log_precision(t.p, self.n0 + 1);
        let wsr = WittSeriesRing::new(&t.l, m, need);
        let lg = wsr.ah_log(&wsr.from_digits(&eps[..need]))?;
        let res = wsr.residues(&lg);
        let arg = TensorSeries::from_base_coeffs(t, Base::L, 0, &res, need as i64).reshape(1, need as i64)?;
        Ok(UnitClass { varpi_exp: t.e.from_u64(a as u64), ah_arg: arg })
    }

    pub fn add(&self, a: &UnitClass, b: &UnitClass) -> Result<UnitClass, PairingError> {
        Ok(UnitClass {
            varpi_exp: self.tower.e.add(&a.varpi_exp, &b.varpi_exp),
            ah_arg: self.ring().add(&self.normalize_arg(&a.ah_arg)?, &self.normalize_arg(&b.ah_arg)?)?,
        })
    }

    pub fn scale(&self, a: &UnitClass, s: &FieldElem) -> UnitClass {
        UnitClass { varpi_exp: self.tower.e.mul(&a.varpi_exp, s), ah_arg: self.ring().scale(&a.ah_arg, s) }
    }

    /// g·α: the argument is moved by the series action, ϖ is fixed.
    pub fn gal_act_class(&self, g: &GalElem, a: &UnitClass) -> Result<UnitClass, PairingError> {
        Ok(UnitClass { varpi_exp: a.varpi_exp, ah_arg: self.ring().gal_act(g, &a.ah_arg)? })
    }

    fn dense(&self, x: &TensorSeries) -> Result<Vec<Vec<FieldElem>>, PairingError> {
        let n0 = self.n0;
        if let Some(v) = x.valuation() {
            if v < 1 {
                return Err(PairingError::BadSupport(format!("term v^{v} in a class argument")));
            }
        }
        if x.prec < n0 + 1 {
            return Err(PairingError::PrecisionLoss { need: n0 + 1, have: x.prec });
        }
        Ok((0..x.ncomp()).map(|c| (0..=n0).map(|i| x.coeff(c, i)).collect()).collect())
    }

    /// The E-bilinear Hilbert pairing c(A, B): the constant term, summed over
    /// components, of R · [X_B S₀(X_A) - X_A S₁(X_B) - b X_A + a X_B], where
    /// S₀(X) = Σ_{m≥0} φ^m(v d/dv X) and S₁ omits m = 0.
    pub fn pair(&self, a: &UnitClass, b: &UnitClass) -> Result<FieldElem, PairingError> {
        let xa = self.dense(&a.ah_arg)?;
        let xb = self.dense(&b.ah_arg)?;
        Ok(self.pair_dense(&a.varpi_exp, &xa, &b.varpi_exp, &xb))
    }

    fn pair_dense(&self, a: &FieldElem, xa: &[Vec<FieldElem>], b: &FieldElem, xb: &[Vec<FieldElem>]) -> FieldElem {
        let e = &self.tower.e;
        let n0 = self.n0;
        let nc = xa.len();
        let p = self.tower.p as i64;
        let mut acc = FieldElem::ZERO;
        // X_B S_0(X_A) - X_A S_1(X_B)
        for (sign, xs, xt, m0) in [(false, xa, xb, 0u32), (true, xb, xa, 1u32)] {
            for c in 0..nc {
                for i in 1..n0 {
                    let al = xs[c][i as usize];
                    if al.is_zero() || i % p == 0 {
                        continue;
                    }
                    let w = e.scale(&al, (i % p) as u32);
                    let mut m = m0;
                    let mut pm = p.pow(m);
                    while pm * i < n0 {
                        let c2 = (c + nc * (m as usize / nc + 1) - m as usize) % nc;
                        let mut inner = FieldElem::ZERO;
                        for j in 1..=(n0 - pm * i) {
                            let be = xt[c2][j as usize];
                            if !be.is_zero() {
                                inner = e.add(&inner, &e.mul(&be, &self.r_coeff(c2, pm * i + j)));
                            }
                        }
                        if !inner.is_zero() {
                            let term = e.mul(&w, &inner);
                            acc = if sign { e.sub(&acc, &term) } else { e.add(&acc, &term) };
                        }
                        m += 1;
                        pm *= p;
                    }
                }
            }
        }
        // - b X_A + a X_B
        for (coef, xs, neg) in [(b, xa, true), (a, xb, false)] {
            if coef.is_zero() {
                continue;
            }
            let mut s = FieldElem::ZERO;
            for c in 0..nc {
                for i in 1..=n0 {
                    let al = xs[c][i as usize];
                    if !al.is_zero() {
                        s = e.add(&s, &e.mul(&al, &self.r_coeff(c, i)));
                    }
                }
            }
            let term = e.mul(coef, &s);
            acc = if neg { e.sub(&acc, &term) } else { e.add(&acc, &term) };
        }
        acc
    }

    pub fn class_to_json(&self, a: &UnitClass) -> Value {
        json!({
            "varpi_exp": self.tower.e.to_coeff_string(&a.varpi_exp),
            "ah_arg": self.ring().to_json(&a.ah_arg),
        })
    }

    pub fn class_from_json(&self, v: &Value) -> Result<UnitClass, PairingError> {
        let bad = || PairingError::BadSupport("malformed class".into());
        let s = v.get("varpi_exp").and_then(Value::as_str).ok_or_else(bad)?;
        let varpi_exp = self.tower.e.from_coeff_string(s).ok_or_else(bad)?;
        let arg = self.ring().from_json(v.get("ah_arg").ok_or_else(bad)?)?;
        Ok(UnitClass { varpi_exp, ah_arg: self.normalize_arg(&arg)? })
    }

    pub fn provenance(&self) -> Value {
        let t = &self.tower;
        let digits: Vec<String> =
            (0..self.z_prec.min(2 * self.n0 + 1)).map(|i| t.e.to_coeff_string(&self.z.coeff(0, i))).collect();
        json!({
            "p": t.p,
            "f": t.f,
            "poly_l": t.l.spec().poly,
            "poly_e": t.e.spec().poly,
            "zeta_seed": self.seed,
            "zeta_precision": self.zeta_prec,
            "z_precision": self.z_prec,
            "z_digits_tau0": digits,
        })
    }
}

/// A spanning family of L^× ⊗ E with its Gram matrix and inverse.
#[derive(Clone, Debug)]
pub struct GramBasis {
    pub labels: Vec<BasisLabel>,
    pub elements: Vec<UnitClass>,
    pub gram: Matrix,
    pub gram_inverse: Matrix,
    dense: Vec<Vec<Vec<FieldElem>>>,
}

impl GramBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn to_json(&self, ctx: &PairingContext) -> Value {
        let e = &ctx.tower.e;
        let gram: Vec<Vec<String>> =
            (0..self.gram.rows).map(|i| self.gram.row(i).iter().map(|x| e.to_coeff_string(x)).collect()).collect();
        json!({
            "labels": self.labels.iter().map(|l| l.name()).collect::<Vec<_>>(),
            "elements": self.elements.iter().map(|a| ctx.class_to_json(a)).collect::<Vec<_>>(),
            "gram": gram,
            "provenance": ctx.provenance(),
        })
    }
}

/// The least element of l, in index order, with nonzero trace.
pub fn trace_nonzero_element(t: &Tower) -> FieldElem {
    let mut n = 1u128;
    loop {
        let b = t.l.from_index(n);
        if t.l.trace_value(&b) != 0 {
            return b;
        }
        n += 1;
    }
}

/// The family {ϖ} ∪ {E^AH([t^j] v^i) : p ∤ i < N0} ∪ {E^AH([b] v^{N0})} and its
/// Gram matrix.
pub fn shafarevich_basis(ctx: &PairingContext) -> Result<GramBasis, PairingError> {
    let t = &ctx.tower;
    let p = t.p as i64;
    let prec = ctx.class_prec();
    let mut labels = vec![BasisLabel::Varpi];
    let mut elements = vec![ctx.varpi_class()];
    for i in 1..ctx.n0 {
        if i % p == 0 {
            continue;
        }
        let mut th = t.l.one();
        for j in 0..t.dl() {
            let x = TensorSeries::from_base_elem(t, Base::L, &th, i, prec).reshape(1, prec)?;
            labels.push(BasisLabel::Monomial { i, j });
            elements.push(ctx.ah_class(&x)?);
            th = t.l.mul(&th, &t.l.gen_t());
        }
    }
    let b = trace_nonzero_element(t);
    let x = TensorSeries::from_base_elem(t, Base::L, &b, ctx.n0, prec).reshape(1, prec)?;
    labels.push(BasisLabel::Cyc);
    elements.push(ctx.ah_class(&x)?);
    let dense: Vec<_> = elements.iter().map(|a| ctx.dense(&a.ah_arg)).collect::<Result<_, _>>()?;
    let n = elements.len();
    let e = &t.e;
    let mut gram = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = ctx.pair_dense(&elements[i].varpi_exp, &dense[i], &elements[j].varpi_exp, &dense[j]);
            gram.set(i, j, v);
            gram.set(j, i, e.neg(&v));
        }
    }
    let gram_inverse = linalg::inverse(e, &gram).ok_or(PairingError::SingularGram { rank: linalg::rank(e, &gram), size: n })?;
    Ok(GramBasis { labels, elements, gram, gram_inverse, dense })
}

/// A pairing context together with its basis and the matrices of the two
/// generators (1, 1) and (0, γ) of Gal(L/K) in basis coordinates.
#[derive(Clone, Debug)]
pub struct ClassSpace {
    pub ctx: PairingContext,
    pub basis: GramBasis,
    gens: OnceLock<(Matrix, Matrix)>,
}

impl ClassSpace {
    pub fn new(t: &Tower, seed: u32) -> Result<ClassSpace, PairingError> {
        ClassSpace::from_context(PairingContext::new(t, seed)?)
    }

    pub fn from_context(ctx: PairingContext) -> Result<ClassSpace, PairingError> {
        let basis = shafarevich_basis(&ctx)?;
        Ok(ClassSpace { basis, gens: OnceLock::new(), ctx })
    }

    /// Matrices of (1, 1) and (0, γ), computed on first use.
    pub fn generator_matrices(&self) -> Result<&(Matrix, Matrix), PairingError> {
        if let Some(m) = self.gens.get() {
            return Ok(m);
        }
        let t = self.tower();
        let frob = self.gal_matrix(&GalElem::from_exponents(t, 1, 0))?;
        let rot = self.gal_matrix(&GalElem::from_exponents(t, 0, 1))?;
        Ok(self.gens.get_or_init(|| (frob, rot)))
    }

    pub fn tower(&self) -> &Tower {
        &self.ctx.tower
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Pairings of every basis element against α.
    pub fn pairing_vector(&self, a: &UnitClass) -> Result<Vector, PairingError> {
        let xa = self.ctx.dense(&a.ah_arg)?;
        Ok((0..self.dim())
            .map(|k| self.ctx.pair_dense(&self.basis.elements[k].varpi_exp, &self.basis.dense[k], &a.varpi_exp, &xa))
            .collect())
    }

    /// Coordinates of α in the basis: G^{-1} (c(b_k, α))_k.
    pub fn coordinates(&self, a: &UnitClass) -> Result<Vector, PairingError> {
        let w = self.pairing_vector(a)?;
        Ok(self.basis.gram_inverse.mul_vec(&self.tower().e, &w))
    }

    /// The matrix of g in basis coordinates.
    pub fn gal_matrix(&self, g: &GalElem) -> Result<Matrix, PairingError> {
        let cols: Vec<Vector> = self
            .basis
            .elements
            .iter()
            .map(|b| self.coordinates(&self.ctx.gal_act_class(g, b)?))
            .collect::<Result<_, _>>()?;
        Ok(Matrix::from_cols(&cols, self.dim()))
    }

    /// Coordinates of g·v, through the generator matrices.
    pub fn act_on_coords(&self, g: &GalElem, v: &[FieldElem]) -> Result<Vector, PairingError> {
        let e = &self.tower().e;
        let t = self.tower();
        let (frob, rot) = self.generator_matrices()?;
        let mut out = v.to_vec();
        for _ in 0..g.s.rem_euclid(t.e_l as i64) {
            out = frob.mul_vec(e, &out);
        }
        for _ in 0..discrete_log(t, &g.zeta) {
            out = rot.mul_vec(e, &out);
        }
        Ok(out)
    }

    /// Basis of {v : g v = χ(g) v for all g}, with χ given on the two
    /// generators.
    pub fn eigenspace_basis(&self, chi_frob: &FieldElem, chi_rot: &FieldElem) -> Result<Vec<Vector>, PairingError> {
        let e = &self.tower().e;
        let n = self.dim();
        let (frob, rot) = self.generator_matrices()?;
        let mut stacked = Matrix::zeros(2 * n, n);
        for (off, (m, x)) in [(frob, chi_frob), (rot, chi_rot)].into_iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let mut v = m.get(i, j);
                    if i == j {
                        v = e.sub(&v, x);
                    }
                    stacked.set(off * n + i, j, v);
                }
            }
        }
        Ok(linalg::kernel(e, &stacked))
    }

    /// The projector (1/|G|) Σ_g χ(g)^{-1} g applied to a coordinate vector,
    /// landing in the χ-eigenspace.
    pub fn project(&self, v: &[FieldElem], chi_frob: &FieldElem, chi_rot: &FieldElem) -> Result<Vector, PairingError> {
        let e = &self.tower().e;
        let (frob, rot) = self.generator_matrices()?;
        let n = self.tower().e_l;
        let avg = |m: &Matrix, x: &FieldElem, v: &[FieldElem]| -> Vector {
            let xinv = e.inv(x);
            let mut acc = vec![FieldElem::ZERO; v.len()];
            let mut cur = v.to_vec();
            let mut w = e.one();
            for _ in 0..n {
                for (a, c) in acc.iter_mut().zip(&cur) {
                    *a = e.add(a, &e.mul(&w, c));
                }
                cur = m.mul_vec(e, &cur);
                w = e.mul(&w, &xinv);
            }
            let inv_n = e.inv(&e.from_u64(n as u64));
            acc.iter().map(|a| e.mul(a, &inv_n)).collect()
        };
        let w = avg(frob, chi_frob, v);
        Ok(avg(rot, chi_rot, &w))
    }
}

/// The exponent j with ζ = γ^j for the fixed generator γ of k^×.
pub fn discrete_log(t: &Tower, zeta: &FieldElem) -> usize {
    let mut cur = t.k.one();
    for j in 0..t.e_l {
        if cur == *zeta {
            return j;
        }
        cur = t.k.mul(&cur, &t.k_gen);
    }
    panic!("element is not a unit of k");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::WittElem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_arg(ctx: &PairingContext, rng: &mut ChaCha8Rng, density: f64) -> TensorSeries {
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

    fn random_class(ctx: &PairingContext, rng: &mut ChaCha8Rng) -> UnitClass {
        UnitClass { varpi_exp: ctx.tower.e.random(rng), ah_arg: random_arg(ctx, rng, 0.5) }
    }

    fn random_unit(r: &OLRing, rng: &mut ChaCha8Rng) -> OLElem {
        let mut x = OLElem {
            coeffs: (0..r.e_l).map(|_| WittElem((0..r.w.d).map(|_| rng.gen_range(0..r.w.q)).collect())).collect(),
        };
        if r.w.residue(&x.coeffs[0]).is_zero() {
            x.coeffs[0] = r.w.add(&x.coeffs[0], &r.w.from_int(1));
        }
        x
    }

    /// Coefficients of exp(X + X^3/3 + X^9/9) over Q, from n e_n = Σ k s_k e_{n-k}.
    fn rational_ah(n: usize) -> Vec<(i128, i128)> {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let mut s = vec![(0i128, 1i128); n];
        for (k, den) in [(1usize, 1i128), (3, 3), (9, 9)] {
            if k < n {
                s[k] = (1, den);
            }
        }
        let mut e = vec![(0i128, 1i128); n];
        e[0] = (1, 1);
        for m in 1..n {
            let (mut num, mut den) = (0i128, 1i128);
            for k in 1..=m {
                let (a, b) = s[k];
                if a == 0 {
                    continue;
                }
                let (c, d) = e[m - k];
                let (tn, td) = (k as i128 * a * c, b * d);
                num = num * td + tn * den;
                den *= td;
                let g = gcd(num, den);
                num /= g;
                den /= g;
            }
            den *= m as i128;
            let g = gcd(num, den);
            e[m] = (num / g, den / g);
        }
        e
    }

    #[test]
    fn ah_low_coefficients_mod_3() {
        let t = Tower::new(3, 1, 1).unwrap();
        let ctx = PairingContext::new(&t, 1).unwrap();
        let n = 12;
        let x = TensorSeries::from_base_elem(&t, Base::L, &t.l.one(), 1, n);
        let u = ctx.ah_exp(&x, n as i64).unwrap();
        for (k, (num, den)) in rational_ah(n as usize).into_iter().enumerate() {
            assert_ne!(den % 3, 0);
            let inv = if den.rem_euclid(3) == 1 { 1 } else { 2 };
            let val = (num.rem_euclid(3) * inv) % 3;
            assert_eq!(u.coeff(0, k as i64), t.e.from_u64(val as u64), "coefficient {k}");
        }
        assert_eq!((0..4).map(|k| u.coeff(0, k)).collect::<Vec<_>>(), [1u64, 1, 2, 2].map(|c| t.e.from_u64(c)));
    }

    #[test]
    fn ah_round_trip_and_disjoint_supports() {
        let t = Tower::new(3, 1, 1).unwrap();
        let ctx = PairingContext::new(&t, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        for _ in 0..20 {
            let mut x = TensorSeries::zero(&t, Base::L, 1, n);
            for c in 0..x.ncomp() {
                for i in 1..n {
                    if rng.gen_bool(0.5) {
                        x.set_coeff(c, i, t.e.random(&mut rng));
                    }
                }
            }
            let u = ctx.ah_exp(&x, n).unwrap();
            assert_eq!(ctx.ah_log(&u, n).unwrap(), x.reshape(1, n).unwrap());
            let mut lo = x.clone();
            let mut hi = x.clone();
            for c in 0..x.ncomp() {
                for i in 1..n {
                    if i % 2 == 0 {
                        lo.set_coeff(c, i, FieldElem::ZERO);
                    } else {
                        hi.set_coeff(c, i, FieldElem::ZERO);
                    }
                }
            }
            let ring = TensorRing::new(&t);
            let prod = ring.mul(&ctx.ah_exp(&lo, n).unwrap(), &ctx.ah_exp(&hi, n).unwrap()).unwrap();
            assert_eq!(prod, u);
        }
        let one = ctx.ring().one(Base::L, n);
        assert!(ctx.ah_log(&one, n).unwrap().is_zero());
    }

    #[test]
    fn pairing_laws_at_3_1() {
        let t = Tower::new(3, 1, 1).unwrap();
        let ctx = PairingContext::new(&t, 1).unwrap();
        let e = &t.e;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = ctx.varpi_class();
        assert!(ctx.pair(&w, &w).unwrap().is_zero());
        for _ in 0..30 {
            let a = random_class(&ctx, &mut rng);
            let b = random_class(&ctx, &mut rng);
            let b2 = random_class(&ctx, &mut rng);
            let ab = ctx.pair(&a, &b).unwrap();
            assert_eq!(e.add(&ab, &ctx.pair(&b, &a).unwrap()), FieldElem::ZERO);
            let s = ctx.add(&b, &b2).unwrap();
            assert_eq!(ctx.pair(&a, &s).unwrap(), e.add(&ab, &ctx.pair(&a, &b2).unwrap()));
            let k = e.random(&mut rng);
            assert_eq!(ctx.pair(&a, &ctx.scale(&b, &k)).unwrap(), e.mul(&k, &ab));
        }
    }

    #[test]
    fn steinberg_relations_on_actual_units() {
        for (p, f) in [(3u32, 1usize), (5, 1)] {
            let t = Tower::new(p, f, 1).unwrap();
            let ctx = PairingContext::new(&t, 1).unwrap();
            let m = log_precision(p, ctx.n0 + 1).max(((ctx.n0 as usize + 2) / t.e_l + 2) as u32);
            let r = OLRing::new(&t, m);
            let mut rng = ChaCha8Rng::seed_from_u64(p as u64);
            let mut nonzero = 0;
            for _ in 0..10 {
                let mut a = random_unit(&r, &mut rng);
                // make 1 - a a unit as well, then also try a ϖ-multiple
                let one = r.from_int(1);
                if r.residue(&r.sub(&one, &a)).is_zero() {
                    a = r.add(&a, &one);
                }
                let b = r.sub(&one, &a);
                let ca = ctx.class_of_ol(&r, &a).unwrap();
                let cb = ctx.class_of_ol(&r, &b).unwrap();
                assert!(ctx.pair(&ca, &cb).unwrap().is_zero(), "c(a, 1-a) != 0");
                let na = r.sub(&r.zero(), &a);
                assert!(ctx.pair(&ca, &ctx.class_of_ol(&r, &na).unwrap()).unwrap().is_zero(), "c(a, -a) != 0");
                let wa = r.mul_varpi(&a);
                let cwa = ctx.class_of_ol(&r, &wa).unwrap();
                let w1 = r.sub(&one, &wa);
                let cw1 = ctx.class_of_ol(&r, &w1).unwrap();
                assert!(ctx.pair(&cwa, &cw1).unwrap().is_zero(), "c(ϖa, 1-ϖa) != 0");
                if !ctx.pair(&ca, &cw1).unwrap().is_zero() {
                    nonzero += 1;
                }
            }
            assert!(nonzero > 0, "pairing vanished identically");
        }
    }

    #[test]
    fn gram_basis_at_3_1_is_nondegenerate() {
        let t = Tower::new(3, 1, 1).unwrap();
        let cs = ClassSpace::new(&t, 1).unwrap();
        assert_eq!(cs.dim(), 6);
        assert_eq!(linalg::rank(&t.e, &cs.basis.gram), 6);
        let e = &t.e;
        for k in 0..cs.dim() {
            let c = cs.coordinates(&cs.basis.elements[k]).unwrap();
            for (i, x) in c.iter().enumerate() {
                assert_eq!(*x, if i == k { e.one() } else { FieldElem::ZERO });
            }
        }
        assert!(cs.coordinates(&cs.ctx.zero_class()).unwrap().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn galois_action_and_equivariance() {
        let t = Tower::new(3, 1, 1).unwrap();
        let cs = ClassSpace::new(&t, 1).unwrap();
        let e = &t.e;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for g in GalElem::all(&t) {
            let chi = crate::weights::CharData { n: vec![1], lambda: e.one() }.eval(&t, &g);
            let m = cs.gal_matrix(&g).unwrap();
            // c(gA, gB) = χ_cyc(g) c(A, B), as the matrix identity M^T G M = χ_cyc G
            let lhs = m.transpose().mul(e, &cs.basis.gram).mul(e, &m);
            let mut rhs = cs.basis.gram.clone();
            rhs.data.iter_mut().for_each(|x| *x = e.mul(x, &chi));
            assert_eq!(lhs, rhs);
            let a = random_class(&cs.ctx, &mut rng);
            let ga = cs.ctx.gal_act_class(&g, &a).unwrap();
            assert_eq!(cs.coordinates(&ga).unwrap(), m.mul_vec(e, &cs.coordinates(&a).unwrap()));
            assert_eq!(cs.act_on_coords(&g, &cs.coordinates(&a).unwrap()).unwrap(), cs.coordinates(&ga).unwrap());
        }
    }

    #[test]
    fn coboundaries_vanish() {
        let t = Tower::new(3, 1, 1).unwrap();
        let cs = ClassSpace::new(&t, 1).unwrap();
        let ring = TensorRing::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let lo = -((cs.ctx.n0 - 1) / t.p as i64);
        for _ in 0..40 {
            let mut h = TensorSeries::zero(&t, Base::L, lo, 6);
            for c in 0..h.ncomp() {
                for n in lo..6 {
                    if rng.gen_bool(0.6) {
                        h.set_coeff(c, n, t.e.random(&mut rng));
                    }
                }
            }
            let d = ring.sub(&ring.phi(&h, 1), &h).unwrap();
            let cls = cs.ctx.psi_class(&d).unwrap();
            assert!(cs.coordinates(&cls).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn psi_of_positive_part_and_bottom_term() {
        let t = Tower::new(3, 1, 1).unwrap();
        let cs = ClassSpace::new(&t, 1).unwrap();
        let e = &t.e;
        let h = TensorSeries::from_base_elem(&t, Base::L, &t.l.gen_t(), 1, 4);
        assert!(cs.coordinates(&cs.ctx.psi_class(&h).unwrap()).unwrap().iter().all(|x| x.is_zero()));
        let bottom = TensorSeries::from_base_elem(&t, Base::L, &t.l.one(), -cs.ctx.n0, 1);
        let cls = cs.ctx.psi_class(&bottom).unwrap();
        assert!(!cls.varpi_exp.is_zero());
        let c = cs.coordinates(&cls).unwrap();
        assert_eq!(c[0], cls.varpi_exp);
        let _ = e;
    }

    #[test]
    fn precision_and_seed_invariance() {
        let t = Tower::new(3, 1, 1).unwrap();
        let a = PairingContext::new(&t, 1).unwrap();
        let b = PairingContext::with_extra_precision(&t, 1, 5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let x = random_class(&a, &mut rng);
            let y = random_class(&a, &mut rng);
            assert_eq!(a.pair(&x, &y).unwrap(), b.pair(&x, &y).unwrap());
        }
        let alt = ClassSpace::from_context(PairingContext::new(&t, 2).unwrap()).unwrap();
        assert_eq!(linalg::rank(&t.e, &alt.basis.gram), 6);
    }
}
