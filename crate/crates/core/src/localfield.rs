//! Finite-precision arithmetic in W(l)/p^M and O_L = W(l)[ϖ]/(ϖ^{e_L} + p),
//! Teichmüller digit expansions, Hensel lifting of a primitive p-th root of
//! unity, the series z(v), and the Artin-Hasse exponential over W(l).
//!
//! The base field is K = W(k)[1/p] and its uniformiser is π = -p, so that
//! ϖ^{e_L} = -p with e_L = p^f - 1.

use thiserror::Error;

use crate::ffield::{Field, FieldElem, Tower, MAX_DEG};
use crate::series::{Base, GalElem, TensorSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("Newton iteration did not converge")]
    NoConvergence,
    #[error("p-adic precision {0} is too low")]
    PrecisionTooLow(u32),
    #[error("element is not a unit")]
    NotUnit,
    #[error("element is zero to the working precision")]
    Zero,
}

/// An element of W(l)/p^M: integer coordinates in the basis 1, t, ..., t^{d-1}
/// of Z/p^M[t]/(lift of the modulus of l).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittElem(pub Vec<u64>);

/// Arithmetic in W(l)/p^M.
#[derive(Clone, Debug)]
pub struct WittRing {
    pub p: u64,
    pub d: usize,
    pub m: u32,
    pub q: u64,
    poly: Vec<u64>,
    field: Field,
}

impl WittRing {
    pub fn new(l: &Field, m: u32) -> WittRing {
        let p = l.p() as u64;
        WittRing {
            p,
            d: l.degree(),
            m,
            q: p.pow(m),
            poly: l.spec().poly.iter().map(|&c| c as u64).collect(),
            field: l.clone(),
        }
    }

    pub fn residue_field(&self) -> &Field {
        &self.field
    }

    pub fn zero(&self) -> WittElem {
        WittElem(vec![0; self.d])
    }

    pub fn from_int(&self, n: i64) -> WittElem {
        let mut w = self.zero();
        w.0[0] = n.rem_euclid(self.q as i64) as u64;
        w
    }

    pub fn is_zero(&self, a: &WittElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &WittElem, b: &WittElem) -> WittElem {
        WittElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.q).collect())
    }

    pub fn sub(&self, a: &WittElem, b: &WittElem) -> WittElem {
        WittElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + self.q - y) % self.q).collect())
    }

    pub fn neg(&self, a: &WittElem) -> WittElem {
        self.sub(&self.zero(), a)
    }

    pub fn scale(&self, a: &WittElem, n: i64) -> WittElem {
        let n = n.rem_euclid(self.q as i64) as u128;
        WittElem(a.0.iter().map(|&x| ((x as u128 * n) % self.q as u128) as u64).collect())
    }

    pub fn mul(&self, a: &WittElem, b: &WittElem) -> WittElem {
        let d = self.d;
        let q = self.q as u128;
        let mut acc = vec![0u128; 2 * d];
        for i in 0..d {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..d {
                acc[i + j] = (acc[i + j] + a.0[i] as u128 * b.0[j] as u128) % q;
            }
        }
        for k in (d..2 * d - 1).rev() {
            let c = acc[k] % q;
            if c == 0 {
                continue;
            }
            for i in 0..d {
                acc[k - d + i] = (acc[k - d + i] + (q - self.poly[i] as u128 % q) * c) % q;
            }
            acc[k] = 0;
        }
        WittElem(acc[..d].iter().map(|&x| (x % q) as u64).collect())
    }

    pub fn pow(&self, a: &WittElem, mut e: u128) -> WittElem {
        let mut base = a.clone();
        let mut r = self.from_int(1);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    /// Reduction modulo p.
    pub fn residue(&self, a: &WittElem) -> FieldElem {
        let mut e = FieldElem::ZERO;
        for i in 0..self.d {
            e.0[i] = (a.0[i] % self.p) as u8;
        }
        e
    }

    /// The naive lift with coordinates in [0, p).
    pub fn lift(&self, a: &FieldElem) -> WittElem {
        WittElem((0..self.d).map(|i| a.0[i] as u64).collect())
    }

    /// Teichmüller representative [a] = lift(a)^{|l|^{M-1}}.
    pub fn teich(&self, a: &FieldElem) -> WittElem {
        let mut x = self.lift(a);
        for _ in 0..(self.d as u32 * (self.m - 1)) {
            x = self.pow(&x, self.p as u128);
        }
        x
    }

    /// Exact division by p of an element divisible by p.
    pub fn div_p(&self, a: &WittElem) -> WittElem {
        debug_assert!(a.0.iter().all(|c| c % self.p == 0));
        WittElem(a.0.iter().map(|c| c / self.p).collect())
    }

    /// Teichmüller digits (a_0, ..., a_{M-1}) with a = Σ p^k [a_k].
    pub fn teich_expansion(&self, a: &WittElem) -> Vec<FieldElem> {
        let mut x = a.clone();
        let mut out = Vec::with_capacity(self.m as usize);
        for _ in 0..self.m {
            let r = self.residue(&x);
            out.push(r);
            x = self.div_p(&self.sub(&x, &self.teich(&r)));
        }
        out
    }
}

/// An element of O_L / p^M as Σ_{j < e_L} w_j ϖ^j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OLElem {
    pub coeffs: Vec<WittElem>,
}

/// Arithmetic in O_L / p^M.
#[derive(Clone, Debug)]
pub struct OLRing {
    pub w: WittRing,
    pub e_l: usize,
    /// e_L / (p - 1).
    pub s: usize,
    /// p^f, the order of the residue field of K.
    pub q_k: u64,
    tower_f: usize,
}

impl OLRing {
    pub fn new(t: &Tower, m: u32) -> OLRing {
        OLRing {
            w: WittRing::new(&t.l, m),
            e_l: t.e_l,
            s: t.e_l / (t.p as usize - 1),
            q_k: (t.p as u64).pow(t.f as u32),
            tower_f: t.f,
        }
    }

    pub fn m(&self) -> u32 {
        self.w.m
    }

    pub fn zero(&self) -> OLElem {
        OLElem { coeffs: vec![self.w.zero(); self.e_l] }
    }

    pub fn from_witt(&self, a: WittElem) -> OLElem {
        let mut x = self.zero();
        x.coeffs[0] = a;
        x
    }

    pub fn from_int(&self, n: i64) -> OLElem {
        self.from_witt(self.w.from_int(n))
    }

    /// ϖ^n for n ≥ 0.
    pub fn varpi_pow(&self, n: usize) -> OLElem {
        let mut x = self.zero();
        let k = n / self.e_l;
        let j = n % self.e_l;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let pk = (self.w.p as i64).pow(k.min(63) as u32);
        if k < self.w.m as usize {
            x.coeffs[j] = self.w.from_int(sign * pk);
        }
        x
    }

    pub fn add(&self, a: &OLElem, b: &OLElem) -> OLElem {
        OLElem { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| self.w.add(x, y)).collect() }
    }

    pub fn sub(&self, a: &OLElem, b: &OLElem) -> OLElem {
        OLElem { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| self.w.sub(x, y)).collect() }
    }

    pub fn scale(&self, a: &OLElem, n: i64) -> OLElem {
        OLElem { coeffs: a.coeffs.iter().map(|x| self.w.scale(x, n)).collect() }
    }

    pub fn mul_witt(&self, a: &OLElem, c: &WittElem) -> OLElem {
        OLElem { coeffs: a.coeffs.iter().map(|x| self.w.mul(x, c)).collect() }
    }

    pub fn mul(&self, a: &OLElem, b: &OLElem) -> OLElem {
        let e = self.e_l;
        let mut acc = vec![self.w.zero(); 2 * e];
        for i in 0..e {
            if self.w.is_zero(&a.coeffs[i]) {
                continue;
            }
            for j in 0..e {
                if self.w.is_zero(&b.coeffs[j]) {
                    continue;
                }
                let t = self.w.mul(&a.coeffs[i], &b.coeffs[j]);
                acc[i + j] = self.w.add(&acc[i + j], &t);
            }
        }
        let mut out = self.zero();
        for j in 0..e {
            let wrapped = self.w.scale(&acc[e + j], -(self.w.p as i64));
            out.coeffs[j] = self.w.add(&acc[j], &wrapped);
        }
        out
    }

    /// Multiplication by ϖ.
    pub fn mul_varpi(&self, a: &OLElem) -> OLElem {
        let mut out = self.zero();
        for j in 1..self.e_l {
            out.coeffs[j] = a.coeffs[j - 1].clone();
        }
        out.coeffs[0] = self.w.scale(&a.coeffs[self.e_l - 1], -(self.w.p as i64));
        out
    }

    pub fn pow(&self, a: &OLElem, mut e: u64) -> OLElem {
        let mut base = a.clone();
        let mut r = self.from_int(1);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    pub fn residue(&self, a: &OLElem) -> FieldElem {
        self.w.residue(&a.coeffs[0])
    }

    /// Inverse of a unit by Newton iteration w <- w (2 - u w).
    pub fn inv_unit(&self, u: &OLElem) -> Result<OLElem, LocalError> {
        let r = self.residue(u);
        if r.is_zero() {
            return Err(LocalError::NotUnit);
        }
        let l = self.w.residue_field();
        let mut w = self.from_witt(self.w.teich(&l.inv(&r)));
        let two = self.from_int(2);
        let digits = self.e_l * self.w.m as usize;
        let mut prec = 1usize;
        while prec < digits {
            w = self.mul(&w, &self.sub(&two, &self.mul(u, &w)));
            prec *= 2;
        }
        if self.mul(u, &w) != self.from_int(1) {
            return Err(LocalError::NoConvergence);
        }
        Ok(w)
    }

    /// Digits (a_0, ..., a_{M e_L - 1}) with x = Σ [a_i] ϖ^i mod p^M.
    pub fn teich_digits(&self, x: &OLElem) -> Vec<FieldElem> {
        let n = self.e_l * self.w.m as usize;
        let mut cur = x.clone();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let a = self.residue(&cur);
            out.push(a);
            let c0 = self.w.sub(&cur.coeffs[0], &self.w.teich(&a));
            let c0p = self.w.div_p(&c0);
            let mut next = self.zero();
            for j in 0..self.e_l - 1 {
                next.coeffs[j] = cur.coeffs[j + 1].clone();
            }
            next.coeffs[self.e_l - 1] = self.w.neg(&c0p);
            cur = next;
        }
        out
    }

    /// Σ [a_i] ϖ^i for the given digits (higher digits beyond the precision vanish).
    pub fn resum(&self, digits: &[FieldElem]) -> OLElem {
        let mut x = self.zero();
        for a in digits.iter().rev() {
            x = self.mul_varpi(&x);
            if !a.is_zero() {
                x.coeffs[0] = self.w.add(&x.coeffs[0], &self.w.teich(a));
            }
        }
        x
    }

    /// The Gal(L/K)-action on digit expansions: [a_i] ϖ^i -> [Frob^{fs}(a_i) ζ^i] ϖ^i.
    pub fn gal_act(&self, t: &Tower, g: &GalElem, x: &OLElem) -> OLElem {
        let digits = self.teich_digits(x);
        let zeta = t.k_in_l.apply(&t.l, &g.zeta);
        let l = &t.l;
        let mut zp = l.one();
        let moved: Vec<FieldElem> = digits
            .iter()
            .map(|a| {
                let b = l.mul(&l.frobenius_iter(a, g.s * self.tower_f as i64), &zp);
                zp = l.mul(&zp, &zeta);
                b
            })
            .collect();
        self.resum(&moved)
    }

    /// Φ_p(x) = 1 + x + ... + x^{p-1}.
    pub fn cyclotomic(&self, x: &OLElem) -> OLElem {
        let mut s = self.zero();
        let mut xp = self.from_int(1);
        for _ in 0..self.w.p {
            s = self.add(&s, &xp);
            xp = self.mul(&xp, x);
        }
        s
    }

    /// ϖ-adic valuation (None for zero at working precision).
    pub fn valuation(&self, x: &OLElem) -> Option<usize> {
        self.teich_digits(x).iter().position(|a| !a.is_zero())
    }
}

/// Primitive p-th root of unity ζ = 1 + ϖ^s Y, where Y is the Newton lift of
/// the root `seed` ∈ F_p^x of Y^{p-1} - 1 (the reduction of Φ_p(1 + ϖ^s Y)/(-p)).
pub fn hensel_zeta_p_with_seed(t: &Tower, m: u32, seed: u32) -> Result<OLElem, LocalError> {
    if m < 2 {
        return Err(LocalError::PrecisionTooLow(m));
    }
    let r = OLRing::new(t, m);
    let p = t.p as i64;
    let s = r.s;
    // G(Y) = Y^{p-1} - Σ_{k=1}^{p-1} (C(p,k)/p) ϖ^{s(k-1)} Y^{k-1}
    let mut binom = vec![1i64; p as usize + 1];
    for k in 1..=p as usize {
        binom[k] = binom[k - 1] * (p - k as i64 + 1) / k as i64;
    }
    let coeffs: Vec<OLElem> = (1..p as usize)
        .map(|k| r.scale(&r.varpi_pow(s * (k - 1)), -(binom[k] / p)))
        .collect();
    let g = |y: &OLElem| -> (OLElem, OLElem) {
        // value and derivative by Horner
        let mut val = r.from_int(1);
        let mut der = r.zero();
        for k in (0..p as usize - 1).rev() {
            der = r.add(&r.mul(&der, y), &val);
            val = r.add(&r.mul(&val, y), &coeffs[k]);
        }
        (val, der)
    };
    let mut y = r.from_int(seed as i64);
    let digits = r.e_l * m as usize;
    let mut iters = 0;
    loop {
        let (val, der) = g(&y);
        if val == r.zero() {
            break;
        }
        let step = r.mul(&val, &r.inv_unit(&der)?);
        y = r.sub(&y, &step);
        iters += 1;
        if iters > 2 * (usize::BITS - digits.leading_zeros()) as usize + 4 {
            return Err(LocalError::NoConvergence);
        }
    }
    let zeta = r.add(&r.from_int(1), &r.mul(&r.varpi_pow(s), &y));
    if r.cyclotomic(&zeta) != r.zero() {
        return Err(LocalError::NoConvergence);
    }
    Ok(zeta)
}

/// The deterministic primitive p-th root of unity: seed digit 1.
pub fn hensel_zeta_p(t: &Tower, m: u32) -> Result<OLElem, LocalError> {
    hensel_zeta_p_with_seed(t, m, 1)
}

/// p-adic precision used for z(v) to v-precision n.
pub fn z_precision(t: &Tower, n: i64) -> u32 {
    let e = t.e_l as i64;
    (((n + 1) + e - 1) / e + 1).max(2) as u32
}

/// Digits of z(v) = Σ a_i v^i mod p below v^n, with z(ϖ) = ε_1.
pub fn z_digits(t: &Tower, n: i64, seed: u32) -> Result<Vec<FieldElem>, LocalError> {
    let m = z_precision(t, n);
    let zeta = hensel_zeta_p_with_seed(t, m, seed)?;
    let r = OLRing::new(t, m);
    let mut d = r.teich_digits(&zeta);
    d.truncate(n.max(0) as usize);
    Ok(d)
}

/// z(v) mod p as a series over l ⊗ E with precision n.
pub fn z_series(t: &Tower, n: i64, seed: u32) -> Result<TensorSeries, LocalError> {
    if n < 1 {
        return Err(LocalError::PrecisionTooLow(0));
    }
    let d = z_digits(t, n, seed)?;
    Ok(TensorSeries::from_base_coeffs(t, Base::L, 0, &d, n))
}

/// Power series Σ_{i<n} c_i v^i with coefficients in W(l)/p^M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittSeries {
    pub coeffs: Vec<WittElem>,
}

fn vp_factorial(p: u64, n: u64) -> u32 {
    let mut v = 0;
    let mut k = p;
    while k <= n {
        v += (n / k) as u32;
        k *= p;
    }
    v
}

fn inv_mod(a: u128, m: u128) -> u128 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u128
}

/// Coefficients e_0, ..., e_{n-1} of the Artin-Hasse series
/// exp(Σ_k X^{p^k}/p^k), reduced modulo p^m.
///
/// Uses b_j = j! e_j ∈ Z with b_j = Σ_k b_{j-p^k} (j-1)!/(j-p^k)!.
pub fn ah_coefficients(p: u64, m: u32, n: usize) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    let extra = vp_factorial(p, n as u64);
    let big = (p as u128).pow(m + extra);
    let mut b = vec![0u128; n];
    b[0] = 1;
    for j in 1..n {
        let mut s = 0u128;
        let mut pk = 1usize;
        while pk <= j {
            // (j-1)!/(j-pk)! = (j-1)(j-2)...(j-pk+1)
            let mut f = 1u128;
            for t in (j - pk + 1)..j {
                f = f * t as u128 % big;
            }
            s = (s + b[j - pk] * f) % big;
            pk *= p as usize;
        }
        b[j] = s;
    }
    let target = (p as u128).pow(m);
    (0..n)
        .map(|j| {
            let v = vp_factorial(p, j as u64);
            let mut unit = 1u128;
            for t in 1..=j as u128 {
                let mut x = t;
                while x % p as u128 == 0 {
                    x /= p as u128;
                }
                unit = unit * x % target;
            }
            let pv = (p as u128).pow(v);
            let reduced = (b[j] / pv) % target;
            debug_assert_eq!(b[j] % pv, 0);
            (reduced * inv_mod(unit, target) % target) as u64
        })
        .collect()
}

/// Power series arithmetic over W(l)/p^M truncated below v^n.
#[derive(Clone, Debug)]
pub struct WittSeriesRing {
    pub w: WittRing,
    pub n: usize,
    ah: Vec<u64>,
}

impl WittSeriesRing {
    pub fn new(l: &Field, m: u32, n: usize) -> WittSeriesRing {
        let w = WittRing::new(l, m);
        let ah = ah_coefficients(w.p, m, n);
        WittSeriesRing { w, n, ah }
    }

    pub fn zero(&self) -> WittSeries {
        WittSeries { coeffs: vec![self.w.zero(); self.n] }
    }

    pub fn one(&self) -> WittSeries {
        let mut s = self.zero();
        if self.n > 0 {
            s.coeffs[0] = self.w.from_int(1);
        }
        s
    }

    pub fn add(&self, a: &WittSeries, b: &WittSeries) -> WittSeries {
        WittSeries { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| self.w.add(x, y)).collect() }
    }

    pub fn neg(&self, a: &WittSeries) -> WittSeries {
        WittSeries { coeffs: a.coeffs.iter().map(|x| self.w.neg(x)).collect() }
    }

    pub fn mul(&self, a: &WittSeries, b: &WittSeries) -> WittSeries {
        let mut out = self.zero();
        for i in 0..self.n {
            if self.w.is_zero(&a.coeffs[i]) {
                continue;
            }
            for j in 0..self.n - i {
                if self.w.is_zero(&b.coeffs[j]) {
                    continue;
                }
                let t = self.w.mul(&a.coeffs[i], &b.coeffs[j]);
                out.coeffs[i + j] = self.w.add(&out.coeffs[i + j], &t);
            }
        }
        out
    }

    pub fn pow(&self, a: &WittSeries, mut e: u64) -> WittSeries {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    /// E([a] v^i) = Σ_j e_j [a]^j v^{ij} for a Teichmüller coefficient.
    fn ah_teich_monomial(&self, ta: &WittElem, i: usize) -> WittSeries {
        let mut out = self.zero();
        let mut pw = self.w.from_int(1);
        let mut j = 0;
        while i * j < self.n {
            out.coeffs[i * j] = self.w.scale(&pw, self.ah[j] as i64);
            pw = self.w.mul(&pw, ta);
            j += 1;
        }
        out
    }

    /// E^AH(c v^i) = Π_k E([c_k] v^i)^{p^k} for c = Σ p^k [c_k].
    pub fn ah_exp_monomial(&self, c: &WittElem, i: usize) -> WittSeries {
        assert!(i >= 1);
        let mut out = self.one();
        for (k, ck) in self.w.teich_expansion(c).iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            let base = self.ah_teich_monomial(&self.w.teich(ck), i);
            out = self.mul(&out, &self.pow(&base, self.w.p.pow(k as u32)));
        }
        out
    }

    /// E^AH(x) for x ∈ v W(l)[[v]].
    pub fn ah_exp(&self, x: &WittSeries) -> WittSeries {
        assert!(self.w.is_zero(&x.coeffs[0]), "argument must lie in v W(l)[[v]]");
        let mut out = self.one();
        for i in 1..self.n {
            if !self.w.is_zero(&x.coeffs[i]) {
                out = self.mul(&out, &self.ah_exp_monomial(&x.coeffs[i], i));
            }
        }
        out
    }

    /// L^AH(u) for u ∈ 1 + v W(l)[[v]], by peeling the lowest term.
    pub fn ah_log(&self, u: &WittSeries) -> Result<WittSeries, LocalError> {
        if u.coeffs[0] != self.w.from_int(1) {
            return Err(LocalError::NotUnit);
        }
        let mut cur = u.clone();
        let mut x = self.zero();
        for i in 1..self.n {
            let c = cur.coeffs[i].clone();
            if self.w.is_zero(&c) {
                continue;
            }
            x.coeffs[i] = c.clone();
            cur = self.mul(&cur, &self.ah_exp_monomial(&self.w.neg(&c), i));
        }
        Ok(x)
    }

    /// Digit truncation mod p^M makes E^AH exact only up to terms p^a v^b with
    /// b p^a ≥ p^M; the coefficient of v^b is therefore reliable modulo the
    /// returned power of p.
    pub fn reliable_modulus(&self, b: usize) -> u64 {
        let mut m = 1u64;
        while m < self.w.q && (m as u128) * (b.max(1) as u128) < self.w.q as u128 {
            m *= self.w.p;
        }
        m
    }

    /// Equality of two series up to the truncation error of E^AH.
    pub fn congruent(&self, x: &WittSeries, y: &WittSeries) -> bool {
        (0..self.n).all(|b| {
            let m = self.reliable_modulus(b);
            x.coeffs[b].0.iter().zip(&y.coeffs[b].0).all(|(a, c)| a % m == c % m)
        })
    }

    /// The series Σ [a_i] v^i of a digit expansion.
    pub fn from_digits(&self, digits: &[FieldElem]) -> WittSeries {
        let mut s = self.zero();
        for (i, a) in digits.iter().enumerate().take(self.n) {
            if !a.is_zero() {
                s.coeffs[i] = self.w.teich(a);
            }
        }
        s
    }

    /// Reduction mod p of the coefficients.
    pub fn residues(&self, x: &WittSeries) -> Vec<FieldElem> {
        x.coeffs.iter().map(|c| self.w.residue(c)).collect()
    }
}

/// Smallest p-adic precision M ≥ 2 with p^M > n, enough for L^AH mod p below v^n.
pub fn log_precision(p: u32, n: i64) -> u32 {
    let mut m = 1u32;
    while (p as i64).pow(m) <= n {
        m += 1;
    }
    m.max(2)
}

/// Unit part of a nonzero x ∈ O_L: returns (ϖ-valuation a, residue θ of the
/// leading digit, digits of ε) with x = ϖ^a [θ] ε and ε ≡ 1 mod ϖ.
pub fn unit_decomposition(r: &OLRing, x: &OLElem) -> Result<(usize, FieldElem, Vec<FieldElem>), LocalError> {
    let digits = r.teich_digits(x);
    let a = digits.iter().position(|d| !d.is_zero()).ok_or(LocalError::Zero)?;
    let theta = digits[a];
    let shifted = r.resum(&digits[a..]);
    let l = r.w.residue_field();
    let unit = r.mul_witt(&shifted, &r.w.teich(&l.inv(&theta)));
    let mut eps = r.teich_digits(&unit);
    eps.truncate(digits.len() - a);
    Ok((a, theta, eps))
}

/// Fixed-size coordinates are convenient for hashing digits in tests.
pub fn digit_key(d: &[FieldElem]) -> Vec<[u8; MAX_DEG]> {
    d.iter().map(|x| x.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ol(r: &OLRing, rng: &mut ChaCha8Rng) -> OLElem {
        OLElem {
            coeffs: (0..r.e_l)
                .map(|_| WittElem((0..r.w.d).map(|_| rng.gen_range(0..r.w.q)).collect()))
                .collect(),
        }
    }

    #[test]
    fn varpi_power_is_minus_p() {
        let t = Tower::new(3, 2, 1).unwrap();
        let r = OLRing::new(&t, 3);
        let mut x = r.from_int(1);
        for _ in 0..r.e_l {
            x = r.mul_varpi(&x);
        }
        assert_eq!(x, r.from_int(-3));
        assert_eq!(r.pow(&r.varpi_pow(1), 8), r.from_int(-3));
    }

    #[test]
    fn digits_examples() {
        let t = Tower::new(3, 1, 1).unwrap();
        let r = OLRing::new(&t, 3);
        // p = -ϖ^{e_L} = [-1] ϖ^{e_L}
        let d = r.teich_digits(&r.from_int(3));
        for (i, a) in d.iter().enumerate() {
            if i == r.e_l {
                assert_eq!(*a, t.l.from_i64(-1));
            } else if i < r.e_l {
                assert!(a.is_zero());
            }
        }
        let a = t.l.gen_t();
        let ta = r.from_witt(r.w.teich(&a));
        let d = r.teich_digits(&ta);
        assert_eq!(d[0], a);
        assert!(d[1..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn digits_round_trip() {
        for (p, f, m) in [(3, 1, 3), (5, 1, 2), (3, 2, 2)] {
            let t = Tower::new(p, f, 1).unwrap();
            let r = OLRing::new(&t, m);
            let mut rng = ChaCha8Rng::seed_from_u64(p as u64 + f as u64);
            for _ in 0..5 {
                let x = random_ol(&r, &mut rng);
                let d = r.teich_digits(&x);
                assert_eq!(d.len(), r.e_l * m as usize);
                assert_eq!(r.resum(&d), x);
            }
        }
    }

    #[test]
    fn teichmuller_is_multiplicative_root_of_unity() {
        let t = Tower::new(3, 2, 1).unwrap();
        let w = WittRing::new(&t.l, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let a = t.l.random(&mut rng);
            let b = t.l.random(&mut rng);
            assert_eq!(w.mul(&w.teich(&a), &w.teich(&b)), w.teich(&t.l.mul(&a, &b)));
            let ta = w.teich(&a);
            assert_eq!(w.pow(&ta, t.l.order()), ta);
        }
    }

    #[test]
    fn zeta_valuation_and_cyclotomic() {
        for (p, f) in [(3, 1), (5, 1), (3, 2), (7, 1)] {
            let t = Tower::new(p, f, 1).unwrap();
            for m in [2u32, 3] {
                let r = OLRing::new(&t, m);
                let z = hensel_zeta_p(&t, m).unwrap();
                assert_eq!(r.cyclotomic(&z), r.zero());
                let zm1 = r.sub(&z, &r.from_int(1));
                assert_eq!(r.valuation(&zm1), Some(t.e_l / (p as usize - 1)));
                assert_eq!(r.pow(&z, p as u64), r.from_int(1));
            }
        }
        let t = Tower::new(3, 1, 1).unwrap();
        assert_eq!(hensel_zeta_p(&t, 1).unwrap_err(), LocalError::PrecisionTooLow(1));
    }

    #[test]
    fn zeta_p3_digits_mod_9() {
        // Newton in O_L mod 9, then expand: z ≡ 1 + c1 v + c2 v^2 with c1 ≠ 0,
        // and (z - 1)^3 has v-valuation 3.
        let t = Tower::new(3, 1, 1).unwrap();
        let r = OLRing::new(&t, 2);
        let z = hensel_zeta_p(&t, 2).unwrap();
        let d = r.teich_digits(&z);
        assert_eq!(d[0], t.l.one());
        assert!(!d[1].is_zero());
        let y = r.sub(&z, &r.from_int(1));
        assert_eq!(r.valuation(&r.pow(&y, 3)), Some(3));
    }

    #[test]
    fn z_series_properties() {
        for (p, f) in [(3, 1), (5, 1), (3, 2)] {
            let t = Tower::new(p, f, 1).unwrap();
            let rr = crate::series::TensorRing::new(&t);
            let n = 3 * t.n0();
            let z = z_series(&t, n, 1).unwrap();
            let zm1 = rr.sub(&z, &rr.one(Base::L, n)).unwrap();
            assert_eq!(zm1.valuation(), Some(t.s()));
            let mut zp = rr.one(Base::L, n);
            let mut zm1p = rr.one(Base::L, n);
            for _ in 0..p {
                zp = rr.mul(&zp, &z).unwrap();
                zm1p = rr.mul(&zm1p, &zm1).unwrap();
            }
            let lhs = rr.sub(&zp, &rr.one(Base::L, n)).unwrap();
            assert_eq!(lhs.truncate(zm1p.prec), zm1p.truncate(lhs.prec));
            assert_eq!(lhs.valuation(), Some(t.n0()));
            // M-overshoot does not change the digits.
            let m = z_precision(&t, n);
            let r = OLRing::new(&t, m + 1);
            let d = r.teich_digits(&hensel_zeta_p(&t, m + 1).unwrap());
            assert_eq!(&d[..n as usize], &z_digits(&t, n, 1).unwrap()[..]);
        }
    }

    #[test]
    fn ah_coefficients_match_known_values() {
        // p = 3: 1, 1, 1/2, 1/2, ... reduce to 1, 1, 2, 2 mod 3.
        let c = ah_coefficients(3, 1, 4);
        assert_eq!(c, vec![1, 1, 2, 2]);
        let c9 = ah_coefficients(3, 2, 4);
        assert_eq!(c9, vec![1, 1, 5, 5]);
    }

    #[test]
    fn witt_ah_is_homomorphism_and_log_inverts() {
        let t = Tower::new(3, 2, 1).unwrap();
        let ring = WittSeriesRing::new(&t.l, 3, 14);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rand_arg = |rng: &mut ChaCha8Rng| {
            let mut x = ring.zero();
            for i in 1..ring.n {
                if rng.gen_bool(0.4) {
                    x.coeffs[i] = WittElem((0..ring.w.d).map(|_| rng.gen_range(0..ring.w.q)).collect());
                }
            }
            x
        };
        for _ in 0..3 {
            let x = rand_arg(&mut rng);
            let y = rand_arg(&mut rng);
            let lhs = ring.ah_exp(&ring.add(&x, &y));
            let rhs = ring.mul(&ring.ah_exp(&x), &ring.ah_exp(&y));
            assert!(ring.congruent(&lhs, &rhs));
            assert!(ring.congruent(&ring.ah_log(&ring.ah_exp(&x)).unwrap(), &x));
            assert_eq!(ring.residues(&lhs), ring.residues(&rhs));
        }
    }

    #[test]
    fn ah_log_closed_form_for_teichmuller_unit() {
        // L^AH(1 + T) = Σ_{p∤k} (-1)^{k+1} T^k / k for T = -v^2 at p = 3.
        let t = Tower::new(3, 1, 1).unwrap();
        let ring = WittSeriesRing::new(&t.l, 3, 20);
        let mut u = ring.one();
        u.coeffs[2] = ring.w.from_int(-1);
        let x = ring.ah_log(&u).unwrap();
        let q = ring.w.q as i64;
        for n in 1..20 {
            let expect = if n % 2 == 0 && (n / 2) % 3 != 0 {
                let k = (n / 2) as i64;
                // (-1)^{k+1} (-1)^k / k = -1/k
                let kinv = inv_mod(k as u128, q as u128) as i64;
                (-kinv).rem_euclid(q)
            } else {
                0
            };
            let m = ring.reliable_modulus(n) as i64;
            assert_eq!(x.coeffs[n].0[0] as i64 % m, expect % m, "degree {n}");
        }
    }

    #[test]
    fn galois_action_on_zeta_is_cyclotomic() {
        let t = Tower::new(3, 2, 1).unwrap();
        let r = OLRing::new(&t, 2);
        let z = hensel_zeta_p(&t, 2).unwrap();
        for g in GalElem::all(&t).into_iter().step_by(7) {
            let gz = r.gal_act(&t, &g, &z);
            // N(ζ) = Π_τ τ(ζ) as an element of F_p^x
            let n = t.k.pow(&g.zeta, (t.k.order() - 1) / (t.p as u128 - 1));
            let a = t.k.prime_value(&n).unwrap();
            assert_eq!(gz, r.pow(&z, a as u64));
        }
    }

    #[test]
    fn unit_decomposition_round_trip() {
        let t = Tower::new(5, 1, 1).unwrap();
        let r = OLRing::new(&t, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let x = r.mul(&random_ol(&r, &mut rng), &r.varpi_pow(rng.gen_range(0..4)));
            let (a, theta, eps) = unit_decomposition(&r, &x).unwrap();
            assert_eq!(eps[0], t.l.one());
            let back = r.mul(&r.mul(&r.varpi_pow(a), &r.from_witt(r.w.teich(&theta))), &r.resum(&eps));
            let keep = r.e_l * 3 - a;
            assert_eq!(r.teich_digits(&back)[..keep], r.teich_digits(&x)[..keep]);
        }
    }
}
