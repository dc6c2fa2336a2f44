//! Finite fields F_{p^d} in a fixed polynomial basis, with Frobenius, trace,
//! deterministic default moduli and embeddings found by root-finding.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree over F_p.
pub const MAX_DEG: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("p = 2 is not supported")]
    EvenPrime,
    #[error("polynomial is reducible over F_p")]
    ReduciblePoly,
    #[error("polynomial is not monic of degree {0}")]
    BadPoly(usize),
    #[error("field F_{{{p}^{d}}} exceeds the supported size")]
    FieldTooLarge { p: u32, d: usize },
    #[error("no embedding of F_{{p^{src}}} into F_{{p^{dst}}}")]
    NoEmbedding { src: usize, dst: usize },
}

/// An element of F_{p^d}: coordinates in the power basis 1, t, ..., t^{d-1}.
///
/// Coordinates beyond the field degree are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(pub [u8; MAX_DEG]);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem([0; MAX_DEG]);

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn coords(&self, d: usize) -> &[u8] {
        &self.0[..d]
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).map_or(1, |i| i + 1);
        write!(f, "[")?;
        for (i, c) in self.0[..last].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Validated description of F_{p^d} = F_p[t]/(poly).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub d: usize,
    /// Monic modulus, low degree first, length d + 1.
    pub poly: Vec<u32>,
}

/// Arithmetic context for one finite field.
#[derive(Clone, Debug)]
pub struct Field {
    spec: FieldSpec,
    p: u32,
    d: usize,
    /// `red[k]` is t^{d+k} reduced modulo the modulus.
    red: Vec<[u32; MAX_DEG]>,
    /// `frob[i]` is t^{p i} reduced modulo the modulus.
    frob: Vec<FieldElem>,
    order: u128,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

/// Distinct prime factors of `n`.
pub fn prime_factors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut q = 2u128;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Validates `(p, d, poly)` and builds the field.  Without `poly` the
/// irreducible with least index `sum c_i p^i` over its lower coefficients is used.
pub fn build_field(p: u32, d: usize, poly: Option<&[u32]>) -> Result<Field, FieldError> {
    if p == 2 {
        return Err(FieldError::EvenPrime);
    }
    if !is_prime(p as u64) {
        return Err(FieldError::NotPrime(p));
    }
    if p > 251 || d == 0 || d > MAX_DEG || (p as f64).powi(d as i32) > 9.0e18 {
        return Err(FieldError::FieldTooLarge { p, d });
    }
    match poly {
        Some(c) => {
            if c.len() != d + 1 || c[d] % p != 1 {
                return Err(FieldError::BadPoly(d));
            }
            let c: Vec<u32> = c.iter().map(|&x| x % p).collect();
            let f = Field::from_modulus(p, d, c);
            if f.modulus_irreducible() {
                Ok(f)
            } else {
                Err(FieldError::ReduciblePoly)
            }
        }
        None => {
            let mut n: u64 = 0;
            loop {
                let mut c = vec![0u32; d + 1];
                let mut m = n;
                for slot in c.iter_mut().take(d) {
                    *slot = (m % p as u64) as u32;
                    m /= p as u64;
                }
                c[d] = 1;
                let f = Field::from_modulus(p, d, c);
                if f.modulus_irreducible() {
                    return Ok(f);
                }
                n += 1;
            }
        }
    }
}

impl Field {
    fn from_modulus(p: u32, d: usize, poly: Vec<u32>) -> Field {
        let mut red = Vec::with_capacity(d);
        let mut cur = [0u32; MAX_DEG];
        for i in 0..d {
            cur[i] = (p - poly[i]) % p;
        }
        for _ in 0..d {
            red.push(cur);
            let top = cur[d - 1];
            let mut next = [0u32; MAX_DEG];
            for i in (1..d).rev() {
                next[i] = cur[i - 1];
            }
            for i in 0..d {
                next[i] = (next[i] + top * ((p - poly[i]) % p)) % p;
            }
            cur = next;
        }
        let mut f = Field {
            spec: FieldSpec { p, d, poly },
            p,
            d,
            red,
            frob: Vec::new(),
            order: (p as u128).pow(d as u32),
        };
        let tp = f.pow(&f.gen_t(), p as u128);
        let mut frob = Vec::with_capacity(d);
        let mut cur = f.one();
        for _ in 0..d {
            frob.push(cur);
            cur = f.mul(&cur, &tp);
        }
        f.frob = frob;
        f
    }

    /// Rabin-style check: t^{p^d} = t and gcd(t^{p^i} - t, P) = 1 for 0 < i < d.
    fn modulus_irreducible(&self) -> bool {
        let prime = Field::prime(self.p);
        let modulus: Vec<FieldElem> = self.spec.poly.iter().map(|&c| prime.from_u64(c as u64)).collect();
        let t = self.gen_t();
        let mut x = t;
        for i in 1..=self.d {
            x = self.frobenius(&x);
            let diff = self.sub(&x, &t);
            if i == self.d {
                return diff.is_zero();
            }
            let g: Vec<FieldElem> = (0..self.d).map(|j| prime.from_u64(diff.0[j] as u64)).collect();
            let g = poly::gcd(&prime, &modulus, &g);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }

    /// The prime field F_p.
    pub fn prime(p: u32) -> Field {
        Field::from_modulus(p, 1, vec![0, 1])
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> usize {
        self.d
    }
    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }
    pub fn one(&self) -> FieldElem {
        let mut e = FieldElem::ZERO;
        e.0[0] = 1;
        e
    }
    /// The class of t in the power basis (equal to `from_u64(t)` when d = 1).
    pub fn gen_t(&self) -> FieldElem {
        let mut e = FieldElem::ZERO;
        if self.d == 1 {
            e.0[0] = ((self.p - self.spec.poly[0]) % self.p) as u8;
        } else {
            e.0[1] = 1;
        }
        e
    }
    pub fn from_u64(&self, n: u64) -> FieldElem {
        let mut e = FieldElem::ZERO;
        e.0[0] = (n % self.p as u64) as u8;
        e
    }
    pub fn from_i64(&self, n: i64) -> FieldElem {
        self.from_u64(n.rem_euclid(self.p as i64) as u64)
    }
    pub fn from_coords(&self, c: &[u32]) -> FieldElem {
        let mut e = FieldElem::ZERO;
        for (i, &x) in c.iter().enumerate().take(self.d) {
            e.0[i] = (x % self.p) as u8;
        }
        e
    }

    /// Element with index `n = sum c_i p^i`.
    pub fn from_index(&self, mut n: u128) -> FieldElem {
        let mut e = FieldElem::ZERO;
        for i in 0..self.d {
            e.0[i] = (n % self.p as u128) as u8;
            n /= self.p as u128;
        }
        e
    }
    pub fn index(&self, x: &FieldElem) -> u128 {
        let mut n = 0u128;
        for i in (0..self.d).rev() {
            n = n * self.p as u128 + x.0[i] as u128;
        }
        n
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let mut r = FieldElem::ZERO;
        let p = self.p as u16;
        for i in 0..self.d {
            let s = a.0[i] as u16 + b.0[i] as u16;
            r.0[i] = if s >= p { (s - p) as u8 } else { s as u8 };
        }
        r
    }
    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let mut r = FieldElem::ZERO;
        let p = self.p as u16;
        for i in 0..self.d {
            let s = a.0[i] as u16 + p - b.0[i] as u16;
            r.0[i] = if s >= p { (s - p) as u8 } else { s as u8 };
        }
        r
    }
    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        self.sub(&FieldElem::ZERO, a)
    }
    pub fn scale(&self, a: &FieldElem, c: u32) -> FieldElem {
        let c = c % self.p;
        let mut r = FieldElem::ZERO;
        for i in 0..self.d {
            r.0[i] = ((a.0[i] as u32 * c) % self.p) as u8;
        }
        r
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let d = self.d;
        let p = self.p;
        if d == 1 {
            let mut r = FieldElem::ZERO;
            r.0[0] = ((a.0[0] as u32 * b.0[0] as u32) % p) as u8;
            return r;
        }
        let mut prod = [0u32; 2 * MAX_DEG];
        for i in 0..d {
            let ai = a.0[i] as u32;
            if ai == 0 {
                continue;
            }
            for j in 0..d {
                prod[i + j] += ai * b.0[j] as u32;
            }
        }
        let mut acc = [0u32; MAX_DEG];
        for i in 0..d {
            acc[i] = prod[i] % p;
        }
        for k in d..2 * d - 1 {
            let c = prod[k] % p;
            if c == 0 {
                continue;
            }
            let row = &self.red[k - d];
            for i in 0..d {
                acc[i] += c * row[i];
            }
        }
        let mut r = FieldElem::ZERO;
        for i in 0..d {
            r.0[i] = (acc[i] % p) as u8;
        }
        r
    }

    pub fn square(&self, a: &FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &FieldElem, mut e: u128) -> FieldElem {
        let mut base = *a;
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

    /// Power with a signed exponent; `a` must be nonzero when `e < 0`.
    pub fn pow_i(&self, a: &FieldElem, e: i128) -> FieldElem {
        let m = (self.order - 1) as i128;
        self.pow(a, e.rem_euclid(m) as u128)
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: &FieldElem) -> FieldElem {
        assert!(!a.is_zero(), "inverse of zero");
        self.pow(a, self.order - 2)
    }

    /// The absolute Frobenius x -> x^p.
    pub fn frobenius(&self, a: &FieldElem) -> FieldElem {
        let mut acc = [0u32; MAX_DEG];
        for i in 0..self.d {
            let c = a.0[i] as u32;
            if c == 0 {
                continue;
            }
            let row = &self.frob[i];
            for j in 0..self.d {
                acc[j] += c * row.0[j] as u32;
            }
        }
        let mut r = FieldElem::ZERO;
        for j in 0..self.d {
            r.0[j] = (acc[j] % self.p) as u8;
        }
        r
    }

    /// x^{p^m}, with m reduced modulo the degree.
    pub fn frobenius_iter(&self, a: &FieldElem, m: i64) -> FieldElem {
        let m = m.rem_euclid(self.d as i64);
        let mut x = *a;
        for _ in 0..m {
            x = self.frobenius(&x);
        }
        x
    }

    /// Absolute trace to F_p, returned as an element of this field.
    pub fn trace_to_prime(&self, a: &FieldElem) -> FieldElem {
        let mut s = FieldElem::ZERO;
        let mut x = *a;
        for _ in 0..self.d {
            s = self.add(&s, &x);
            x = self.frobenius(&x);
        }
        s
    }

    /// Absolute trace as an integer in [0, p).
    pub fn trace_value(&self, a: &FieldElem) -> u32 {
        self.trace_to_prime(a).0[0] as u32
    }

    /// Least element (by index) generating the multiplicative group.
    pub fn primitive_element(&self) -> FieldElem {
        let m = self.order - 1;
        let primes = prime_factors(m);
        let mut n = 1u128;
        loop {
            let x = self.from_index(n);
            if primes.iter().all(|&r| self.pow(&x, m / r) != self.one()) {
                return x;
            }
            n += 1;
        }
    }

    pub fn is_one(&self, a: &FieldElem) -> bool {
        *a == self.one()
    }

    /// Value in F_p of an element known to lie in the prime field.
    pub fn prime_value(&self, a: &FieldElem) -> Option<u32> {
        if a.0[1..self.d.max(1)].iter().all(|&c| c == 0) {
            Some(a.0[0] as u32)
        } else {
            None
        }
    }

    /// Coefficient string used in serialized output, e.g. "0,2,1".
    pub fn to_coeff_string(&self, a: &FieldElem) -> String {
        a.0[..self.d].iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn from_coeff_string(&self, s: &str) -> Option<FieldElem> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != self.d {
            return None;
        }
        let mut e = FieldElem::ZERO;
        for (i, part) in parts.iter().enumerate() {
            let v: u32 = part.trim().parse().ok()?;
            if v >= self.p {
                return None;
            }
            e.0[i] = v as u8;
        }
        Some(e)
    }

    pub fn random<R: rand::Rng>(&self, rng: &mut R) -> FieldElem {
        let mut e = FieldElem::ZERO;
        for i in 0..self.d {
            e.0[i] = rng.gen_range(0..self.p) as u8;
        }
        e
    }
}

/// A field homomorphism F_{p^a} -> F_{p^b} determined by the image of t.
#[derive(Clone, Debug)]
pub struct Embedding {
    src_deg: usize,
    powers: Vec<FieldElem>,
}

impl Embedding {
    pub fn apply(&self, target: &Field, x: &FieldElem) -> FieldElem {
        let mut acc = [0u32; MAX_DEG];
        for i in 0..self.src_deg {
            let c = x.0[i] as u32;
            if c == 0 {
                continue;
            }
            for j in 0..target.d {
                acc[j] += c * self.powers[i].0[j] as u32;
            }
        }
        let mut r = FieldElem::ZERO;
        for j in 0..target.d {
            r.0[j] = (acc[j] % target.p) as u8;
        }
        r
    }

    pub fn image_of_t(&self) -> FieldElem {
        if self.src_deg == 1 {
            self.powers[0]
        } else {
            self.powers[1]
        }
    }

    /// The embedding followed by the m-th power of Frobenius on the target.
    pub fn compose_frobenius(&self, target: &Field, m: i64) -> Embedding {
        Embedding {
            src_deg: self.src_deg,
            powers: self.powers.iter().map(|x| target.frobenius_iter(x, m)).collect(),
        }
    }
}

/// The embedding sending t to the least root (by index) of the source modulus.
pub fn embedding(src: &Field, target: &Field) -> Result<Embedding, FieldError> {
    if src.p != target.p || target.d % src.d != 0 {
        return Err(FieldError::NoEmbedding { src: src.d, dst: target.d });
    }
    let modulus: Vec<FieldElem> = src.spec.poly.iter().map(|&c| target.from_u64(c as u64)).collect();
    let mut roots = poly::roots(target, &modulus);
    roots.sort_by_key(|r| target.index(r));
    let r = *roots.first().ok_or(FieldError::NoEmbedding { src: src.d, dst: target.d })?;
    let mut powers = Vec::with_capacity(src.d);
    let mut cur = target.one();
    for _ in 0..src.d {
        powers.push(cur);
        cur = target.mul(&cur, &r);
    }
    if src.d == 1 {
        powers[0] = target.one();
    }
    Ok(Embedding { src_deg: src.d, powers })
}

impl Embedding {
    /// The embedding of F_{p^src_deg} sending t to `img`.
    pub fn from_image(target: &Field, src_deg: usize, img: &FieldElem) -> Embedding {
        let mut powers = Vec::with_capacity(src_deg);
        let mut cur = target.one();
        for _ in 0..src_deg {
            powers.push(cur);
            cur = target.mul(&cur, img);
        }
        Embedding { src_deg, powers }
    }
}

/// The tower F_p ⊂ k = F_{p^f} ⊂ l = F_{p^{f(p^f-1)}} ⊂ E together with the
/// ordered embeddings of k and l into E.
///
/// `tau_l[c]` is `tau_l[0]` followed by the c-th power of Frobenius, and
/// `tau_k[r]` is the restriction of `tau_l[r]` to k.
#[derive(Clone, Debug)]
pub struct Tower {
    pub p: u32,
    pub f: usize,
    /// p^f - 1, the ramification index of L over K.
    pub e_l: usize,
    pub k: Field,
    pub l: Field,
    pub e: Field,
    pub k_in_l: Embedding,
    pub tau_l: Vec<Embedding>,
    pub tau_k: Vec<Embedding>,
    /// Least generator of k^x.
    pub k_gen: FieldElem,
}

impl Tower {
    /// Builds the tower with E of degree `mult * f * (p^f - 1)`.
    pub fn new(p: u32, f: usize, mult: usize) -> Result<Tower, FieldError> {
        if p == 2 {
            return Err(FieldError::EvenPrime);
        }
        if !is_prime(p as u64) {
            return Err(FieldError::NotPrime(p));
        }
        let q = (p as u64).checked_pow(f as u32).ok_or(FieldError::FieldTooLarge { p, d: f })?;
        let e_l = (q - 1) as usize;
        let dl = f.checked_mul(e_l).ok_or(FieldError::FieldTooLarge { p, d: f })?;
        let de = dl.checked_mul(mult.max(1)).ok_or(FieldError::FieldTooLarge { p, d: dl })?;
        if de > MAX_DEG {
            return Err(FieldError::FieldTooLarge { p, d: de });
        }
        let k = build_field(p, f, None)?;
        let l = build_field(p, dl, None)?;
        let e = build_field(p, de, None)?;
        let k_in_l = embedding(&k, &l)?;
        let tau0 = embedding(&l, &e)?;
        let tau_l: Vec<Embedding> = (0..dl).map(|c| tau0.compose_frobenius(&e, c as i64)).collect();
        let tau_k: Vec<Embedding> = (0..f)
            .map(|r| {
                let img = tau_l[r].apply(&e, &k_in_l.image_of_t());
                Embedding::from_image(&e, f, &img)
            })
            .collect();
        let k_gen = k.primitive_element();
        Ok(Tower { p, f, e_l, k, l, e, k_in_l, tau_l, tau_k, k_gen })
    }

    /// [l : F_p], the number of components of l ⊗ E.
    pub fn dl(&self) -> usize {
        self.l.degree()
    }

    /// p e_L / (p - 1), the level above which principal units are p-th powers.
    pub fn n0(&self) -> i64 {
        (self.p as i64) * (self.e_l as i64) / (self.p as i64 - 1)
    }

    /// e_L / (p - 1), the valuation of a primitive p-th root of unity minus one.
    pub fn s(&self) -> i64 {
        self.e_l as i64 / (self.p as i64 - 1)
    }

    /// Image of `x` in E under the c-th embedding of l (c taken cyclically).
    pub fn tau_l_apply(&self, c: usize, x: &FieldElem) -> FieldElem {
        self.tau_l[c % self.dl()].apply(&self.e, x)
    }

    /// Image of `x` in E under the r-th embedding of k (r taken cyclically).
    pub fn tau_k_apply(&self, r: usize, x: &FieldElem) -> FieldElem {
        self.tau_k[r % self.f].apply(&self.e, x)
    }
}

/// Embeds `x` along the fixed embedding into `target`.
pub fn embed(src: &Field, x: &FieldElem, target: &Field) -> Result<FieldElem, FieldError> {
    Ok(embedding(src, target)?.apply(target, x))
}

/// Dense univariate polynomials over a `Field`, low degree first, no trailing zeros.
pub mod poly {
    use super::{Field, FieldElem};

    pub type Poly = Vec<FieldElem>;

    pub fn trim(mut a: Poly) -> Poly {
        while a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
        a
    }

    pub fn sub(f: &Field, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        let n = a.len().max(b.len());
        let z = FieldElem::ZERO;
        trim((0..n)
            .map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect())
    }

    pub fn mul(f: &Field, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![FieldElem::ZERO; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                r[i + j] = f.add(&r[i + j], &f.mul(x, y));
            }
        }
        trim(r)
    }

    /// Remainder of `a` modulo nonzero `m`.
    pub fn rem(f: &Field, a: &[FieldElem], m: &[FieldElem]) -> Poly {
        let m = trim(m.to_vec());
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let lead_inv = f.inv(&m[dm]);
        while r.len() > dm {
            let k = r.len() - 1;
            let c = f.mul(&r[k], &lead_inv);
            for i in 0..=dm {
                let t = f.mul(&c, &m[i]);
                r[k - dm + i] = f.sub(&r[k - dm + i], &t);
            }
            r = trim(r);
        }
        r
    }

    pub fn monic(f: &Field, a: &[FieldElem]) -> Poly {
        let a = trim(a.to_vec());
        if a.is_empty() {
            return a;
        }
        let li = f.inv(a.last().unwrap());
        a.iter().map(|c| f.mul(c, &li)).collect()
    }

    pub fn gcd(f: &Field, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(f, &x, &y);
            x = y;
            y = r;
        }
        monic(f, &x)
    }

    pub fn powmod(f: &Field, a: &[FieldElem], mut e: u128, m: &[FieldElem]) -> Poly {
        let mut base = rem(f, a, m);
        let mut r = vec![f.one()];
        while e > 0 {
            if e & 1 == 1 {
                r = rem(f, &mul(f, &r, &base), m);
            }
            base = rem(f, &mul(f, &base, &base), m);
            e >>= 1;
        }
        r
    }

    /// All roots in `f` of `a`, found by equal-degree splitting with a
    /// deterministic sequence of shifts.
    pub fn roots(f: &Field, a: &[FieldElem]) -> Vec<FieldElem> {
        let a = monic(f, a);
        if a.len() <= 1 {
            return Vec::new();
        }
        let x = vec![FieldElem::ZERO, f.one()];
        let xq = powmod(f, &x, f.order(), &a);
        let g = gcd(f, &a, &sub(f, &xq, &x));
        let mut out = Vec::new();
        split(f, &g, &mut out, 0);
        out
    }

    fn split(f: &Field, g: &[FieldElem], out: &mut Vec<FieldElem>, mut shift: u128) {
        if g.len() <= 1 {
            return;
        }
        if g.len() == 2 {
            out.push(f.neg(&g[0]));
            return;
        }
        let e = (f.order() - 1) / 2;
        loop {
            let h = vec![f.from_index(shift % f.order()), f.one()];
            shift += 1;
            let t = powmod(f, &h, e, g);
            let t = sub(f, &t, &[f.one()]);
            let d = gcd(f, g, &t);
            if d.len() > 1 && d.len() < g.len() {
                let q = div_exact(f, g, &d);
                split(f, &d, out, shift);
                split(f, &q, out, shift);
                return;
            }
        }
    }

    fn div_exact(f: &Field, a: &[FieldElem], b: &[FieldElem]) -> Poly {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        let li = f.inv(&b[db]);
        let mut q = vec![FieldElem::ZERO; a.len() - db];
        for k in (db..r.len()).rev() {
            let c = f.mul(&r[k], &li);
            q[k - db] = c;
            for i in 0..=db {
                let t = f.mul(&c, &b[i]);
                r[k - db + i] = f.sub(&r[k - db + i], &t);
            }
        }
        trim(q)
    }
}
