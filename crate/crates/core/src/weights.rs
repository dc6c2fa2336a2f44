//! Characters of G_K restricted to inertia, Serre weights σ_{a,b}, the
//! exponents Ω, and the (J, x) combinatorics behind the weight sets and the
//! subspaces Ψ_{σ,J,x}.
//!
//! Embeddings k -> F̄_p are indexed by r ∈ [0, f) with τ_r = τ_0 ∘ φ^r, so
//! ω_{τ_{r+1}} = ω_{τ_r}^p.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{FieldElem, Tower};
use crate::series::GalElem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("malformed descriptor: {0}")]
    MalformedDescriptor(String),
    #[error("no valid (J, x) pairs")]
    NoValidPairs,
    #[error("maximal pairs have distinct s-profiles: {0:?}")]
    NonUniqueMaxProfile(Vec<Vec<i64>>),
    #[error("invalid Serre weight: {0}")]
    InvalidWeight(String),
}

/// The numerical setting (p, f, e) of the combinatorics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Setting {
    pub p: u32,
    pub f: usize,
    pub e: usize,
}

/// A character χ with χ|_I = Π_τ ω_τ^{n_τ} and unramified part given by its
/// value `lambda` ∈ E^x on the arithmetic Frobenius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharData {
    pub n: Vec<i64>,
    pub lambda: FieldElem,
}

/// The Serre weight σ_{a,b}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SerreWeight {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

/// A pair (J, x): `j[r]` records τ_r ∈ J.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairJX {
    pub j: Vec<bool>,
    pub x: Vec<i64>,
}

impl PairJX {
    pub fn j_indices(&self) -> Vec<usize> {
        (0..self.j.len()).filter(|&r| self.j[r]).collect()
    }

    pub fn card_j(&self) -> usize {
        self.j.iter().filter(|&&b| b).count()
    }
}

/// Result of the maximality analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxPairs {
    pub profile: Vec<i64>,
    pub representative: PairJX,
    pub maximal: Vec<PairJX>,
    /// Whether every valid pair is ≤ the representative.
    pub greatest: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DimPsi {
    pub dimension: usize,
    pub nu_prime: usize,
    pub nu: usize,
    pub degenerate: bool,
}

/// Input to the semisimple weight recipe.
#[derive(Clone, Debug)]
pub enum Semisimple {
    Split(CharData, CharData),
    /// Exponents m over the 2f embeddings of k_2, so r̄|_I = ω'^{Ω(m)} ⊕ ω'^{p^f Ω(m)}.
    Irreducible(Vec<i64>),
}

impl Setting {
    pub fn new(p: u32, f: usize, e: usize) -> Setting {
        Setting { p, f, e }
    }

    pub fn pi(&self) -> i64 {
        self.p as i64
    }

    /// p^f - 1.
    pub fn q1(&self) -> i64 {
        self.pi().pow(self.f as u32) - 1
    }

    /// Ω_{τ_r, n} = Σ_i p^i n_{r+i}.
    pub fn omega_exp(&self, n: &[i64], r: usize) -> i64 {
        (0..self.f).map(|i| self.pi().pow(i as u32) * n[(r + i) % self.f]).sum()
    }

    /// Exponent of ω_{τ_0} describing Π_τ ω_τ^{n_τ}, reduced mod p^f - 1.
    pub fn inertial_class(&self, n: &[i64]) -> i64 {
        self.omega_exp(n, 0).rem_euclid(self.q1())
    }

    /// The unique n with entries in [1, p], not all p, and the same inertial class.
    pub fn normalize_exps(&self, n: &[i64]) -> Vec<i64> {
        let q1 = self.q1();
        let ones = q1 / (self.pi() - 1);
        let mut rest = (self.inertial_class(n) - ones).rem_euclid(q1);
        (0..self.f)
            .map(|_| {
                let d = rest % self.pi();
                rest /= self.pi();
                d + 1
            })
            .collect()
    }

    pub fn normalize_char(&self, n: &[i64], lambda: FieldElem) -> CharData {
        CharData { n: self.normalize_exps(n), lambda }
    }

    pub fn inertially_equal(&self, n1: &[i64], n2: &[i64]) -> bool {
        self.inertial_class(n1) == self.inertial_class(n2)
    }

    /// The mod p cyclotomic character, Π_τ ω_τ^e.
    pub fn cyclotomic(&self, one: FieldElem) -> CharData {
        self.normalize_char(&vec![self.e as i64; self.f], one)
    }

    pub fn trivial(&self, one: FieldElem) -> CharData {
        self.normalize_char(&vec![0; self.f], one)
    }

    /// χ1 / χ2 (requires the tower for the division of unramified parts).
    pub fn ratio(&self, t: &Tower, c1: &CharData, c2: &CharData) -> CharData {
        let n: Vec<i64> = c1.n.iter().zip(&c2.n).map(|(x, y)| x - y).collect();
        self.normalize_char(&n, t.e.mul(&c1.lambda, &t.e.inv(&c2.lambda)))
    }

    pub fn inverse(&self, t: &Tower, c: &CharData) -> CharData {
        let n: Vec<i64> = c.n.iter().map(|x| -x).collect();
        self.normalize_char(&n, t.e.inv(&c.lambda))
    }

    pub fn is_trivial(&self, t: &Tower, c: &CharData) -> bool {
        self.inertial_class(&c.n) == 0 && t.e.is_one(&c.lambda)
    }

    pub fn check_weight(&self, s: &SerreWeight) -> Result<(), WeightError> {
        let p = self.pi();
        if s.a.len() != self.f || s.b.len() != self.f {
            return Err(WeightError::InvalidWeight(format!("expected {} entries", self.f)));
        }
        for r in 0..self.f {
            if !(0..p).contains(&s.b[r]) || !(0..p).contains(&(s.a[r] - s.b[r])) {
                return Err(WeightError::InvalidWeight(format!("entry {r} out of range")));
            }
        }
        if s.b.iter().all(|&b| b == p - 1) {
            return Err(WeightError::InvalidWeight("all b equal p-1".into()));
        }
        Ok(())
    }

    /// All Serre weights for k.
    pub fn all_weights(&self) -> Vec<SerreWeight> {
        let p = self.pi();
        let mut out = Vec::new();
        let total = (p * p).pow(self.f as u32);
        for code in 0..total {
            let mut c = code;
            let mut a = vec![0; self.f];
            let mut b = vec![0; self.f];
            for r in 0..self.f {
                b[r] = c % p;
                c /= p;
                a[r] = b[r] + c % p;
                c /= p;
            }
            let w = SerreWeight { a, b };
            if self.check_weight(&w).is_ok() {
                out.push(w);
            }
        }
        out.sort();
        out
    }

    /// All pairs (J, x) with x_τ ∈ [0, e-1].
    pub fn all_pairs(&self) -> Vec<PairJX> {
        let mut out = Vec::new();
        let ex = (self.e as i64).pow(self.f as u32);
        for mask in 0..(1u32 << self.f) {
            for code in 0..ex {
                let mut c = code;
                let x = (0..self.f)
                    .map(|_| {
                        let d = c % self.e as i64;
                        c /= self.e as i64;
                        d
                    })
                    .collect();
                out.push(PairJX { j: (0..self.f).map(|r| mask >> r & 1 == 1).collect(), x });
            }
        }
        out.sort();
        out
    }

    /// Exponents of the two diagonal characters attached to (σ, J, x).
    pub fn diagonal_exps(&self, s: &SerreWeight, pr: &PairJX) -> (Vec<i64>, Vec<i64>) {
        let e = self.e as i64;
        let first = (0..self.f)
            .map(|r| if pr.j[r] { s.a[r] + 1 + pr.x[r] } else { s.b[r] + pr.x[r] })
            .collect();
        let second = (0..self.f)
            .map(|r| if pr.j[r] { s.b[r] + e - 1 - pr.x[r] } else { s.a[r] + e - pr.x[r] })
            .collect();
        (first, second)
    }

    /// Pairs (J, x) realizing (χ1|_I, χ2|_I) in the given order.
    pub fn valid_pairs(&self, s: &SerreWeight, c1: &CharData, c2: &CharData) -> Vec<PairJX> {
        self.all_pairs()
            .into_iter()
            .filter(|pr| {
                let (a, b) = self.diagonal_exps(s, pr);
                self.inertially_equal(&a, &c1.n) && self.inertially_equal(&b, &c2.n)
            })
            .collect()
    }

    /// s_τ = x_τ for τ ∉ J and a_τ - b_τ + 1 + x_τ for τ ∈ J.
    pub fn s_profile(&self, s: &SerreWeight, pr: &PairJX) -> Vec<i64> {
        (0..self.f)
            .map(|r| if pr.j[r] { s.a[r] - s.b[r] + 1 + pr.x[r] } else { pr.x[r] })
            .collect()
    }

    /// Ω_{τ_r,σ,J,x}.
    pub fn omega_sigma(&self, s: &SerreWeight, pr: &PairJX, r: usize) -> i64 {
        let e = self.e as i64;
        (0..self.f)
            .map(|i| {
                let k = (r + i) % self.f;
                let sign = if pr.j[k] { -1 } else { 1 };
                self.pi().pow(i as u32) * ((s.a[k] - s.b[k] + 1) * sign + (e - 1 - 2 * pr.x[k]))
            })
            .sum()
    }

    /// Ω_{τ_r,σ,J,x} - (p^f - 1) x_{τ_r}, the v-exponent generating Ψ_{σ,J,x}.
    pub fn psi_exponent(&self, s: &SerreWeight, pr: &PairJX, r: usize) -> i64 {
        self.omega_sigma(s, pr, r) - self.q1() * pr.x[r]
    }

    /// -(e + p - 1)(p^f - 1)/(p - 1), the least possible Ω.
    pub fn omega_floor(&self) -> i64 {
        -(self.e as i64 + self.pi() - 1) * self.q1() / (self.pi() - 1)
    }

    /// (J, x) ≤ (J', x'): Ω - Ω' ∈ 2(p^f - 1) Z_{≥0} for every τ.
    pub fn pair_leq(&self, s: &SerreWeight, lhs: &PairJX, rhs: &PairJX) -> bool {
        (0..self.f).all(|r| {
            let d = self.omega_sigma(s, lhs, r) - self.omega_sigma(s, rhs, r);
            d >= 0 && d % (2 * self.q1()) == 0
        })
    }

    /// Maximal valid pairs; they must share a single s-profile.
    pub fn max_pairs(&self, s: &SerreWeight, c1: &CharData, c2: &CharData) -> Result<MaxPairs, WeightError> {
        let valid = self.valid_pairs(s, c1, c2);
        if valid.is_empty() {
            return Err(WeightError::NoValidPairs);
        }
        let maximal: Vec<PairJX> = valid
            .iter()
            .filter(|p| valid.iter().all(|q| !self.pair_leq(s, p, q) || self.pair_leq(s, q, p)))
            .cloned()
            .collect();
        let mut profiles: Vec<Vec<i64>> = maximal.iter().map(|p| self.s_profile(s, p)).collect();
        profiles.sort();
        profiles.dedup();
        if profiles.len() != 1 {
            return Err(WeightError::NonUniqueMaxProfile(profiles));
        }
        let representative = maximal.iter().min().unwrap().clone();
        let greatest = valid.iter().all(|q| self.pair_leq(s, q, &representative));
        Ok(MaxPairs { profile: profiles.remove(0), representative, maximal, greatest })
    }

    /// Whether (σ, J, x) is the degenerate configuration: all a - b = p - 1,
    /// J everything, every x = e - 1.
    pub fn is_degenerate(&self, s: &SerreWeight, pr: &PairJX) -> bool {
        (0..self.f).all(|r| s.a[r] - s.b[r] == self.pi() - 1 && pr.j[r] && pr.x[r] == self.e as i64 - 1)
    }

    /// ν' + Card(J_max) + Σ x_max, with ν and ν' reported separately.
    pub fn dim_psi(&self, t: &Tower, s: &SerreWeight, c1: &CharData, c2: &CharData) -> Result<DimPsi, WeightError> {
        let mp = self.max_pairs(s, c1, c2)?;
        let rep = &mp.representative;
        let chi = self.ratio(t, c1, c2);
        let trivial = self.is_trivial(t, &chi);
        let nu_prime = trivial as usize;
        let om = self.omega_sigma(s, rep, 0);
        let nu = (trivial && -om >= 0 && (-om) % self.q1() == 0) as usize;
        let sum_x: i64 = rep.x.iter().sum();
        Ok(DimPsi {
            dimension: nu_prime + rep.card_j() + sum_x as usize,
            nu_prime,
            nu,
            degenerate: self.is_degenerate(s, rep),
        })
    }

    /// (σ_{a,b}, χ1, χ2) -> (σ_{a-b,0}, χ1 Π ω_τ^{-b_τ}, χ2 Π ω_τ^{-b_τ}).
    pub fn twist_normalize(&self, s: &SerreWeight, c1: &CharData, c2: &CharData) -> (SerreWeight, CharData, CharData) {
        let a = s.a.iter().zip(&s.b).map(|(a, b)| a - b).collect();
        let sub = |c: &CharData| {
            let n: Vec<i64> = c.n.iter().zip(&s.b).map(|(x, b)| x - b).collect();
            self.normalize_char(&n, c.lambda)
        };
        (SerreWeight { a, b: vec![0; self.f] }, sub(c1), sub(c2))
    }

    /// W^exp of a semisimple representation.
    pub fn wexp_semisimple(&self, d: &Semisimple) -> Result<Vec<SerreWeight>, WeightError> {
        match d {
            Semisimple::Split(c1, c2) => {
                if c1.n.len() != self.f || c2.n.len() != self.f {
                    return Err(WeightError::MalformedDescriptor("character length".into()));
                }
                Ok(self
                    .all_weights()
                    .into_iter()
                    .filter(|w| !self.valid_pairs(w, c1, c2).is_empty() || !self.valid_pairs(w, c2, c1).is_empty())
                    .collect())
            }
            Semisimple::Irreducible(m) => self.wexp_irreducible(m),
        }
    }

    fn wexp_irreducible(&self, m: &[i64]) -> Result<Vec<SerreWeight>, WeightError> {
        let f2 = 2 * self.f;
        if m.len() != f2 {
            return Err(WeightError::MalformedDescriptor(format!("expected {f2} exponents")));
        }
        let p = self.pi();
        let qq = p.pow(f2 as u32) - 1;
        let om2 = |n: &[i64]| (0..f2).map(|i| p.pow(i as u32) * n[i]).sum::<i64>().rem_euclid(qq);
        let w = om2(m);
        let conj = (w * p.pow(self.f as u32)).rem_euclid(qq);
        if conj == w {
            return Err(WeightError::MalformedDescriptor("character has niveau 1".into()));
        }
        let e = self.e as i64;
        let mut out = Vec::new();
        for s in self.all_weights() {
            let mut hit = false;
            'pairs: for mask in 0..(1u32 << self.f) {
                // J contains τ'_i for i < f with bit set, τ'_{i+f} otherwise.
                let in_j: Vec<bool> = (0..f2)
                    .map(|i| if i < self.f { mask >> i & 1 == 1 } else { mask >> (i - self.f) & 1 == 0 })
                    .collect();
                for code in 0..e.pow(self.f as u32) {
                    let mut c = code;
                    let x: Vec<i64> = (0..self.f)
                        .map(|_| {
                            let d = c % e;
                            c /= e;
                            d
                        })
                        .collect();
                    let first: Vec<i64> = (0..f2)
                        .map(|i| {
                            let r = i % self.f;
                            if in_j[i] { s.a[r] + 1 + x[r] } else { s.b[r] + x[r] }
                        })
                        .collect();
                    let second: Vec<i64> = (0..f2)
                        .map(|i| {
                            let r = i % self.f;
                            if in_j[i] { s.b[r] + e - 1 - x[r] } else { s.a[r] + e + x[r] }
                        })
                        .collect();
                    let (u, v) = (om2(&first), om2(&second));
                    if (u == w && v == conj) || (u == conj && v == w) {
                        hit = true;
                        break 'pairs;
                    }
                }
            }
            if hit {
                out.push(s);
            }
        }
        Ok(out)
    }
}

impl CharData {
    /// χ(g) = λ^s Π_τ τ(ζ)^{n_τ} for g = (s, ζ) ∈ Gal(L/K).
    pub fn eval(&self, t: &Tower, g: &GalElem) -> FieldElem {
        let ef = &t.e;
        let mut v = ef.pow_i(&self.lambda, g.s as i128);
        for (r, &n) in self.n.iter().enumerate() {
            let z = t.tau_k_apply(r, &g.zeta);
            v = ef.mul(&v, &ef.pow_i(&z, n as i128));
        }
        v
    }
}
