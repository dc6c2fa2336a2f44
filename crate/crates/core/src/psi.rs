//! The subspaces Ψ_{σ,J,x} of L^× ⊗ E: eigen-generators attached to a
//! maximal pair, their classes, the eigenspace decomposition of L^× ⊗ E, and
//! the φ-reduction of the series defining a class.
//!
//! Only e = 1 is supported here, since the classes live over the field L
//! built from an unramified K.

use serde_json::{json, Value};
use thiserror::Error;

use crate::ahpairing::{BasisLabel, ClassSpace, PairingError, UnitClass};
use crate::ffield::{FieldElem, Tower};
use crate::linalg::{self, Vector};
use crate::series::{Base, GalElem, SeriesError, TensorSeries};
use crate::weights::{CharData, DimPsi, PairJX, SerreWeight, Setting, WeightError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PsiError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("ψ value is not a (p^f - 1)-th root of unity")]
    NotRootOfUnity,
    #[error("no verdict for the reduction: {0}")]
    NoVerdict(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// λ_ψ ∈ l ⊗ E with g λ_ψ = ψ(g) λ_ψ, stored by component: λ_{r + f j} = ψ^j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenVector {
    pub psi: FieldElem,
    pub comps: Vec<FieldElem>,
}

pub fn lambda_psi(t: &Tower, psi: &FieldElem) -> Result<EigenVector, PsiError> {
    let e = &t.e;
    if psi.is_zero() || !e.is_one(&e.pow(psi, t.e_l as u128)) {
        return Err(PsiError::NotRootOfUnity);
    }
    let comps = (0..t.dl()).map(|c| e.pow(psi, (c / t.f) as u128)).collect();
    Ok(EigenVector { psi: *psi, comps })
}

impl EigenVector {
    /// λ_ψ e_r: the components c ≡ r (mod f) kept, the rest zero.
    pub fn restricted(&self, f: usize, r: usize) -> Vec<FieldElem> {
        self.comps
            .iter()
            .enumerate()
            .map(|(c, x)| if c % f == r { *x } else { FieldElem::ZERO })
            .collect()
    }
}

/// μ_ψ = φ(λ_ψ)/λ_ψ ∈ k ⊗ E, by k-component.
pub fn mu_psi(t: &Tower, psi: &FieldElem) -> Result<Vec<FieldElem>, PsiError> {
    let lam = lambda_psi(t, psi)?;
    let e = &t.e;
    let dl = t.dl();
    let mu: Vec<FieldElem> = (0..dl).map(|c| e.mul(&lam.comps[(c + 1) % dl], &e.inv(&lam.comps[c]))).collect();
    for c in t.f..dl {
        if mu[c] != mu[c % t.f] {
            return Err(PsiError::BadInput("φ(λ)/λ is not in k ⊗ E".into()));
        }
    }
    Ok(mu[..t.f].to_vec())
}

/// Values of a character on the generators (1, 1) and (0, γ).
pub fn char_on_generators(t: &Tower, c: &CharData) -> (FieldElem, FieldElem) {
    (c.eval(t, &GalElem::from_exponents(t, 1, 0)), c.eval(t, &GalElem::from_exponents(t, 0, 1)))
}

/// Labels of the eigen-basis of L^× ⊗ E.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EigenLabel {
    Varpi,
    /// E^AH(λ_ψ e_r v^i).
    Mono { i: i64, r: usize },
    Cyc,
}

impl EigenLabel {
    pub fn name(&self) -> String {
        match self {
            EigenLabel::Varpi => "varpi".into(),
            EigenLabel::Mono { i, r } => format!("E(lambda e_{r} v^{i})"),
            EigenLabel::Cyc => "cyc".into(),
        }
    }
}

/// A χ-eigenspace of L^× ⊗ E, read off from the basis of eigenvectors
/// ϖ, E^AH(λ_ψ e_r v^i) (p ∤ i < N0) and E^AH(b v^{N0}).
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub chi: CharData,
    pub labels: Vec<EigenLabel>,
    pub classes: Vec<UnitClass>,
    pub coords: Vec<Vector>,
}

pub fn eigenspace(space: &ClassSpace, st: &Setting, chi: &CharData) -> Result<Eigenspace, PsiError> {
    check_setting(space.tower(), st)?;
    let t = space.tower();
    let ctx = &space.ctx;
    let p = t.p as i64;
    let mut labels = Vec::new();
    let mut classes = Vec::new();
    let one = t.e.one();
    if st.is_trivial(t, chi) {
        labels.push(EigenLabel::Varpi);
        classes.push(ctx.varpi_class());
    }
    if t.e.pow(&chi.lambda, t.e_l as u128) == one {
        let lam = lambda_psi(t, &chi.lambda)?;
        for i in 1..ctx.n0 {
            if i % p == 0 {
                continue;
            }
            for r in 0..t.f {
                let mut n = vec![0; t.f];
                n[r] = i;
                if !st.inertially_equal(&n, &chi.n) {
                    continue;
                }
                let x = TensorSeries::from_component_values(Base::L, &lam.restricted(t.f, r), i, ctx.class_prec())
                    .reshape(1, ctx.class_prec())?;
                labels.push(EigenLabel::Mono { i, r });
                classes.push(ctx.ah_class(&x)?);
            }
        }
    }
    if *chi == st.cyclotomic(one) {
        let k = space.basis.labels.iter().position(|l| *l == BasisLabel::Cyc).expect("basis has a cyc element");
        labels.push(EigenLabel::Cyc);
        classes.push(space.basis.elements[k].clone());
    }
    let coords = classes.iter().map(|a| space.coordinates(a)).collect::<Result<_, _>>()?;
    Ok(Eigenspace { chi: chi.clone(), labels, classes, coords })
}

fn check_setting(t: &Tower, st: &Setting) -> Result<(), PsiError> {
    if st.e != 1 {
        return Err(PsiError::Unsupported(format!("e = {} (classes are computed for e = 1)", st.e)));
    }
    if st.p != t.p || st.f != t.f {
        return Err(PsiError::BadInput("setting does not match the tower".into()));
    }
    Ok(())
}

/// The character χ_cyc χ^{-1} on L^× ⊗ E matching the eigenspace
/// Gal = χ^{-1} of Ψ.
pub fn target_char(t: &Tower, st: &Setting, chi: &CharData) -> CharData {
    st.ratio(t, &st.cyclotomic(t.e.one()), chi)
}

/// ψ = χ^{-1} ω_{σ,J,x}^{-1} on the Frobenius (1, 1); ω_{σ,J,x} is 1 there.
pub fn psi_value(t: &Tower, st: &Setting, chi: &CharData) -> FieldElem {
    st.inverse(t, chi).lambda
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GenLabel {
    /// Ψ(v^{Ω_τ - e_L x_τ} λ_ψ e_τ u^n).
    Tau { r: usize, n: i64 },
    /// Ψ(λ_ψ e_{τ_0} v^{-e_L x_{τ_0}}) when ψ = 1 and -Ω_{τ_0} ∈ e_L Z_{≥0}.
    Extra,
    /// A vector of the full eigenspace (degenerate configuration).
    Eigen(EigenLabel),
}

impl GenLabel {
    pub fn name(&self) -> String {
        match self {
            GenLabel::Tau { r, n } => format!("tau{r}:u^{n}"),
            GenLabel::Extra => "extra".into(),
            GenLabel::Eigen(l) => l.name(),
        }
    }
}

/// The series h = λ_ψ e_r v^{exp}.
fn eigen_monomial(lam: &EigenVector, f: usize, r: usize, exp: i64) -> TensorSeries {
    TensorSeries::from_component_values(Base::L, &lam.restricted(f, r), exp, exp.max(0) + 1)
}

/// The series whose Ψ-images generate the ψ-eigenspace of Ψ_{σ,J,x} for a
/// non-degenerate pair.
pub fn pair_generator_series(
    t: &Tower,
    st: &Setting,
    s: &SerreWeight,
    pr: &PairJX,
    psi: &FieldElem,
) -> Result<Vec<(GenLabel, TensorSeries)>, PsiError> {
    check_setting(t, st)?;
    if st.is_degenerate(s, pr) {
        return Err(PsiError::BadInput("degenerate pair".into()));
    }
    let lam = lambda_psi(t, psi)?;
    let q1 = st.q1();
    let f = st.f;
    let mut out = Vec::new();
    for r in 0..f {
        let prev_in_j = pr.j[(r + f - 1) % f];
        let top = if prev_in_j { pr.x[r] } else { pr.x[r] - 1 };
        let base = st.psi_exponent(s, pr, r);
        for n in 0..=top {
            out.push((GenLabel::Tau { r, n }, eigen_monomial(&lam, f, r, base + q1 * n)));
        }
    }
    let om0 = st.omega_sigma(s, pr, 0);
    if t.e.is_one(psi) && om0 <= 0 && om0 % q1 == 0 {
        out.push((GenLabel::Extra, eigen_monomial(&lam, f, 0, -q1 * pr.x[0])));
    }
    Ok(out)
}

/// Monomials e_c v^{Ω - e_L x + e_L n} spanning Ψ_{σ,J,x} modulo series with
/// positive valuation, whose image is zero.
pub fn direct_series(t: &Tower, st: &Setting, s: &SerreWeight, pr: &PairJX) -> Result<Vec<TensorSeries>, PsiError> {
    check_setting(t, st)?;
    let q1 = st.q1();
    let mut out = Vec::new();
    for c in 0..t.dl() {
        let mut exp = st.psi_exponent(s, pr, c % t.f);
        while exp <= 0 {
            out.push(TensorSeries::monomial(t, Base::L, c, exp, t.e.one(), exp.max(0) + 1));
            exp += q1;
        }
    }
    Ok(out)
}

/// Coordinates of the classes Ψ(h).
pub fn psi_coords(space: &ClassSpace, hs: &[TensorSeries]) -> Result<Vec<Vector>, PsiError> {
    hs.iter().map(|h| Ok(space.coordinates(&space.ctx.psi_class(h)?)?)).collect()
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub label: GenLabel,
    pub series: Option<TensorSeries>,
    pub class: UnitClass,
    pub coords: Vector,
}

/// The χ^{-1}-eigenspace of Ψ_σ(χ1, χ2) in L^× ⊗ E.
#[derive(Clone, Debug)]
pub struct PsiSubspace {
    pub sigma: SerreWeight,
    pub chi1: CharData,
    pub chi2: CharData,
    /// The eigencharacter χ_cyc χ^{-1} on L^× ⊗ E.
    pub target: CharData,
    pub psi_value: FieldElem,
    pub pair: PairJX,
    pub profile: Vec<i64>,
    pub degenerate: bool,
    pub expected: DimPsi,
    pub generators: Vec<Generator>,
    pub rank: usize,
}

impl PsiSubspace {
    pub fn coords(&self) -> Vec<Vector> {
        self.generators.iter().map(|g| g.coords.clone()).collect()
    }

    pub fn to_json(&self, space: &ClassSpace) -> Value {
        let t = space.tower();
        let e = &t.e;
        json!({
            "sigma": {"a": self.sigma.a, "b": self.sigma.b},
            "chi1": char_json(t, &self.chi1),
            "chi2": char_json(t, &self.chi2),
            "eigencharacter": char_json(t, &self.target),
            "psi_value": e.to_coeff_string(&self.psi_value),
            "pair": pair_json(&self.pair),
            "profile": self.profile,
            "degenerate": self.degenerate,
            "expected": self.expected,
            "rank": self.rank,
            "generators": self.generators.iter().map(|g| json!({
                "label": g.label.name(),
                "class": space.ctx.class_to_json(&g.class),
                "coordinates": g.coords.iter().map(|x| e.to_coeff_string(x)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "provenance": space.ctx.provenance(),
        })
    }
}

pub fn char_json(t: &Tower, c: &CharData) -> Value {
    json!({"n": c.n, "lambda": t.e.to_coeff_string(&c.lambda)})
}

pub fn pair_json(pr: &PairJX) -> Value {
    json!({"J": pr.j_indices(), "x": pr.x})
}

/// Generators of the ψ-part of Ψ_{σ,J,x} for one pair, with classes: the
/// listed series for a non-degenerate pair, the whole eigenspace otherwise.
pub fn pair_generators(
    space: &ClassSpace,
    st: &Setting,
    s: &SerreWeight,
    pr: &PairJX,
    chi: &CharData,
) -> Result<Vec<Generator>, PsiError> {
    let t = space.tower();
    if st.is_degenerate(s, pr) {
        let es = eigenspace(space, st, &target_char(t, st, chi))?;
        return Ok(es
            .labels
            .into_iter()
            .zip(es.classes)
            .zip(es.coords)
            .map(|((l, class), coords)| Generator { label: GenLabel::Eigen(l), series: None, class, coords })
            .collect());
    }
    let psi = psi_value(t, st, chi);
    pair_generator_series(t, st, s, pr, &psi)?
        .into_iter()
        .map(|(label, h)| {
            let class = space.ctx.psi_class(&h)?;
            let coords = space.coordinates(&class)?;
            Ok(Generator { label, series: Some(h), class, coords })
        })
        .collect()
}

/// Ψ_σ(χ1, χ2) through the representative maximal pair.
pub fn psi_subspace(
    space: &ClassSpace,
    st: &Setting,
    s: &SerreWeight,
    chi1: &CharData,
    chi2: &CharData,
) -> Result<PsiSubspace, PsiError> {
    let t = space.tower();
    check_setting(t, st)?;
    st.check_weight(s)?;
    let chi = st.ratio(t, chi1, chi2);
    if !t.e.is_one(&t.e.pow(&chi.lambda, t.e_l as u128)) {
        return Err(PsiError::NotRootOfUnity);
    }
    let mp = st.max_pairs(s, chi1, chi2)?;
    let expected = st.dim_psi(t, s, chi1, chi2)?;
    let pair = mp.representative;
    let generators = pair_generators(space, st, s, &pair, &chi)?;
    let coords: Vec<Vector> = generators.iter().map(|g| g.coords.clone()).collect();
    let rank = linalg::rank_of(&t.e, &coords, space.dim());
    Ok(PsiSubspace {
        sigma: s.clone(),
        chi1: chi1.clone(),
        chi2: chi2.clone(),
        target: target_char(t, st, &chi),
        psi_value: psi_value(t, st, &chi),
        degenerate: st.is_degenerate(s, &pair),
        profile: mp.profile,
        pair,
        expected,
        generators,
        rank,
    })
}

/// Coordinates of the generators of every valid pair, for comparison with
/// the maximal-pair span.
pub fn union_over_valid_pairs(
    space: &ClassSpace,
    st: &Setting,
    s: &SerreWeight,
    chi1: &CharData,
    chi2: &CharData,
) -> Result<Vec<Vector>, PsiError> {
    let chi = st.ratio(space.tower(), chi1, chi2);
    let mut out = Vec::new();
    for pr in st.valid_pairs(s, chi1, chi2) {
        out.extend(pair_generators(space, st, s, &pr, &chi)?.into_iter().map(|g| g.coords));
    }
    Ok(out)
}

/// Outcome of the φ-reduction of a monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CobCase {
    /// Some y_n lies in (u^{-x_τ}) U_{J,x,ψ}.
    InU,
    /// The v-valuation of (v^{Ω_τ}) λ_ψ y_n became positive.
    TendsToZero,
    /// y_{n+f} = ξ y_n with ξ ≠ 1.
    Periodic { xi: FieldElem },
}

impl CobCase {
    pub fn name(&self) -> &'static str {
        match self {
            CobCase::InU => "in_u",
            CobCase::TendsToZero => "tends_to_zero",
            CobCase::Periodic { .. } => "periodic",
        }
    }
}

/// A reduction y_0 -> z with Ψ(h(y_0)) = Ψ(h(z)).
#[derive(Clone, Debug)]
pub struct Reduction {
    /// One verdict per monomial of y_0, in term order.
    pub cases: Vec<CobCase>,
    pub steps: Vec<usize>,
    /// The sum of the reduced monomials from the `InU` cases.
    pub z: TensorSeries,
}

/// The φ-reduction for (σ, J, x, ψ) of y_0 ∈ (u^{-x_τ}) k[[u]] ⊗ E, a Base::K
/// series in u = v^{e_L}.
pub struct Reducer<'a> {
    pub tower: &'a Tower,
    pub setting: Setting,
    pub sigma: SerreWeight,
    pub pair: PairJX,
    pub psi: FieldElem,
    pub omega: Vec<i64>,
    /// y_n = φ(y_{n-1}) u^{α} μ_ψ componentwise.
    pub alpha: Vec<i64>,
    pub mu: Vec<FieldElem>,
    lam: EigenVector,
}

impl<'a> Reducer<'a> {
    pub fn new(t: &'a Tower, st: &Setting, s: &SerreWeight, pr: &PairJX, psi: &FieldElem) -> Result<Reducer<'a>, PsiError> {
        check_setting(t, st)?;
        if st.is_degenerate(s, pr) {
            return Err(PsiError::BadInput("degenerate pair".into()));
        }
        let f = st.f;
        let q1 = st.q1();
        let omega: Vec<i64> = (0..f).map(|r| st.omega_sigma(s, pr, r)).collect();
        let alpha = (0..f)
            .map(|r| {
                let num = st.pi() * omega[(r + 1) % f] - omega[r];
                debug_assert_eq!(num % q1, 0);
                num / q1
            })
            .collect();
        Ok(Reducer {
            tower: t,
            setting: *st,
            sigma: s.clone(),
            pair: pr.clone(),
            psi: *psi,
            omega,
            alpha,
            mu: mu_psi(t, psi)?,
            lam: lambda_psi(t, psi)?,
        })
    }

    /// Whether e_r u^d lies in (u^{-x}) U_{J,x,ψ}.
    pub fn in_u(&self, r: usize, d: i64) -> bool {
        let f = self.setting.f;
        let x = self.pair.x[r];
        let top = if self.pair.j[(r + f - 1) % f] { 0 } else { -1 };
        if (-x..=top).contains(&d) {
            return true;
        }
        let q1 = self.setting.q1();
        let om0 = self.omega[0];
        r == 0 && self.tower.e.is_one(&self.psi) && om0 <= 0 && om0 % q1 == 0 && d == -om0 / q1 - x
    }

    /// The v-degree of (v^{Ω_r}) u^d.
    fn v_degree(&self, r: usize, d: i64) -> i64 {
        self.omega[r] + self.setting.q1() * d
    }

    /// Reduce the monomial c e_r u^d; returns the verdict, the step count and
    /// the reduced monomial for `InU`.
    pub fn reduce_monomial(&self, r: usize, d: i64, c: FieldElem) -> Result<(CobCase, usize, Option<(usize, i64, FieldElem)>), PsiError> {
        let f = self.setting.f;
        let e = &self.tower.e;
        let p = self.setting.pi();
        let gap = (1 - self.v_degree(r, d)).max(0);
        let cap = f * (2 + gap as usize);
        let mut hist: Vec<(usize, i64, FieldElem)> = Vec::new();
        let (mut r, mut d, mut c) = (r, d, c);
        for n in 0..=cap {
            if self.in_u(r, d) {
                return Ok((CobCase::InU, n, Some((r, d, c))));
            }
            if d < -self.pair.x[r] {
                return Err(PsiError::NoVerdict(format!("y_{n} left (u^-x) k[[u]] at e_{r} u^{d}")));
            }
            if self.v_degree(r, d) > 0 {
                return Ok((CobCase::TendsToZero, n, None));
            }
            if n >= f && n % f == 0 {
                let (r0, d0, c0) = hist[n - f];
                if (r0, d0) == (r, d) {
                    let xi = e.mul(&c, &e.inv(&c0));
                    if e.is_one(&xi) {
                        return Err(PsiError::NoVerdict(format!("periodic with ξ = 1 at e_{r} u^{d}")));
                    }
                    return Ok((CobCase::Periodic { xi }, n, None));
                }
            }
            hist.push((r, d, c));
            let r1 = (r + f - 1) % f;
            d = p * d + self.alpha[r1];
            c = e.mul(&c, &self.mu[r1]);
            r = r1;
        }
        Err(PsiError::NoVerdict(format!("iteration cap {cap} reached")))
    }

    pub fn reduce(&self, y: &TensorSeries) -> Result<Reduction, PsiError> {
        if y.base != Base::K {
            return Err(PsiError::BadInput("y must be a k ⊗ E series".into()));
        }
        let mut cases = Vec::new();
        let mut steps = Vec::new();
        let mut zterms = Vec::new();
        for (r, d, c) in y.terms() {
            let (case, n, z) = self.reduce_monomial(r, d, c)?;
            cases.push(case);
            steps.push(n);
            zterms.extend(z);
        }
        let lo = zterms.iter().map(|z| z.1).min().unwrap_or(0);
        let hi = zterms.iter().map(|z| z.1).max().unwrap_or(0);
        let mut z = TensorSeries::zero(self.tower, Base::K, lo, hi + 1);
        let e = &self.tower.e;
        for (r, d, c) in zterms {
            let old = z.coeff(r, d);
            z.set_coeff(r, d, e.add(&old, &c));
        }
        Ok(Reduction { cases, steps, z })
    }

    /// h(y) = (v^{Ω_τ}) λ_ψ y(v^{e_L}), truncated above v^0.
    pub fn h_of(&self, y: &TensorSeries) -> TensorSeries {
        let t = self.tower;
        let e = &t.e;
        let q1 = self.setting.q1();
        let terms: Vec<(usize, i64, FieldElem)> = y
            .terms()
            .into_iter()
            .flat_map(|(r, d, c)| {
                (0..t.dl())
                    .filter(move |cc| cc % t.f == r)
                    .map(move |cc| (cc, self.omega[r] + q1 * d, e.mul(&c, &self.lam.comps[cc])))
            })
            .filter(|x| x.1 <= 0)
            .collect();
        let lo = terms.iter().map(|x| x.1).min().unwrap_or(1).min(1);
        let mut h = TensorSeries::zero(t, Base::L, lo, 1);
        for (cc, n, c) in terms {
            let old = h.coeff(cc, n);
            h.set_coeff(cc, n, e.add(&old, &c));
        }
        h
    }
}
