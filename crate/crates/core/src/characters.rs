//! Multiplicative and additive characters of a finite field, evaluated in
//! complex doubles through the embedding `psi_1(x) = exp(2 pi i Tr(x) / p)`,
//! and Gauss sums `g(chi, psi) = -sum_{a != 0} chi(a) psi(a)`.

use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gcd, FieldElement, FiniteField, SubfieldEmbedding};

pub type Complex = Complex64;

/// Tolerance for comparing a sum of `terms` unit-modulus values.
pub fn sum_tolerance(terms: usize) -> f64 {
    1e-12 * terms as f64 + 1e-10
}

/// `chi(g^j) = exp(2 pi i k j / (q - 1))` for the field generator `g`.
///
/// Serialized as `{q, k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultChar {
    pub q: u32,
    pub k: u32,
}

impl MultChar {
    pub fn new(field: &FiniteField, k: i64) -> Self {
        let n = field.unit_order() as i64;
        MultChar { q: field.q(), k: k.rem_euclid(n) as u32 }
    }

    pub fn trivial(field: &FiniteField) -> Self {
        MultChar { q: field.q(), k: 0 }
    }

    /// The character of order two; requires odd characteristic.
    pub fn quadratic(field: &FiniteField) -> Result<Self> {
        if field.p() == 2 {
            return Err(Error::Characteristic { p: 2, what: "the quadratic character".into() });
        }
        Ok(MultChar { q: field.q(), k: field.unit_order() / 2 })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.q - 1
    }

    pub fn is_trivial(&self) -> bool {
        self.k == 0
    }

    pub fn order(&self) -> u32 {
        let n = self.modulus() as u64;
        (n / gcd(self.k as u64, n)) as u32
    }

    pub fn inverse(&self) -> Self {
        MultChar { q: self.q, k: (self.modulus() - self.k) % self.modulus() }
    }

    pub fn mul(&self, other: &MultChar) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::FieldMismatch(self.q as u64, other.q as u64));
        }
        Ok(MultChar { q: self.q, k: (self.k + other.k) % self.modulus() })
    }

    pub fn pow(&self, e: i64) -> Self {
        let n = self.modulus() as i64;
        MultChar { q: self.q, k: ((self.k as i64 * e.rem_euclid(n)) % n) as u32 }
    }

    /// `chi ∘ N` for the norm down to `emb.sub()`.
    pub fn pullback(&self, emb: &SubfieldEmbedding<'_>) -> Result<Self> {
        let sub = emb.sub();
        if sub.q() != self.q {
            return Err(Error::FieldMismatch(sub.q() as u64, self.q as u64));
        }
        let big = emb.ambient().unit_order() as u64;
        let small = sub.unit_order() as u64;
        let k = self.k as u64 * emb.norm_log_factor() as u64 % small * (big / small) % big;
        Ok(MultChar { q: emb.ambient().q(), k: k as u32 })
    }

    /// The character of `emb.sub()` whose norm pullback is `self`, if any.
    pub fn descend(&self, emb: &SubfieldEmbedding<'_>) -> Option<Self> {
        let big = emb.ambient().unit_order() as u64;
        let small = emb.sub().unit_order() as u64;
        if self.q != emb.ambient().q() {
            return None;
        }
        let step = big / small;
        if !(self.k as u64).is_multiple_of(step) {
            return None;
        }
        let linv = crate::field::mod_inverse(emb.norm_log_factor() as u64, small)?;
        let k = (self.k as u64 / step) * linv % small;
        Some(MultChar { q: emb.sub().q(), k: k as u32 })
    }
}

impl fmt::Display for MultChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.k, self.modulus())
    }
}

/// `psi_b(x) = exp(2 pi i Tr(b x) / p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddChar {
    pub q: u32,
    pub b: FieldElement,
}

impl AddChar {
    pub fn standard(field: &FiniteField) -> Self {
        AddChar { q: field.q(), b: FieldElement::ONE }
    }

    pub fn is_trivial(&self) -> bool {
        self.b.is_zero()
    }
}

/// Roots of unity and trace tables for evaluating characters of one field.
pub struct CharacterContext {
    field: Arc<FiniteField>,
    unit_roots: Vec<Complex>,
    p_roots: Vec<Complex>,
}

impl CharacterContext {
    pub fn new(field: Arc<FiniteField>) -> Self {
        let n = field.unit_order() as usize;
        let p = field.p() as usize;
        let unit_roots = (0..n).map(|j| Complex::from_polar(1.0, TAU * j as f64 / n as f64)).collect();
        let p_roots = (0..p).map(|j| Complex::from_polar(1.0, TAU * j as f64 / p as f64)).collect();
        CharacterContext { field, unit_roots, p_roots }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FiniteField> {
        &self.field
    }

    /// `exp(2 pi i j / (q - 1))`.
    #[inline]
    pub fn unit_root(&self, j: u64) -> Complex {
        self.unit_roots[(j % self.unit_roots.len() as u64) as usize]
    }

    /// `exp(2 pi i j / p)`.
    #[inline]
    pub fn p_root(&self, j: u64) -> Complex {
        self.p_roots[(j % self.p_roots.len() as u64) as usize]
    }

    fn check(&self, q: u32) -> Result<()> {
        if q != self.field.q() {
            return Err(Error::FieldMismatch(q as u64, self.field.q() as u64));
        }
        Ok(())
    }

    /// `chi(x)`, with `chi(0) = 0`.
    #[inline]
    pub fn chi(&self, chi: MultChar, x: FieldElement) -> Complex {
        match self.field.log(x) {
            None => Complex::new(0.0, 0.0),
            Some(l) => self.unit_root(chi.k as u64 * l as u64),
        }
    }

    #[inline]
    pub fn psi(&self, psi: AddChar, x: FieldElement) -> Complex {
        self.p_root(self.field.abs_trace(self.field.mul(psi.b, x)) as u64)
    }

    /// `psi_1(x)`.
    #[inline]
    pub fn psi1(&self, x: FieldElement) -> Complex {
        self.p_root(self.field.abs_trace(x) as u64)
    }

    pub fn all_chars(&self) -> impl Iterator<Item = MultChar> + '_ {
        let q = self.field.q();
        (0..self.field.unit_order()).map(move |k| MultChar { q, k })
    }

    /// Direct summation of `-sum_{a != 0} chi(a) psi(a)`.
    pub fn gauss_sum(&self, chi: MultChar, psi: AddChar) -> Result<Complex> {
        self.check(chi.q)?;
        self.check(psi.q)?;
        if psi.is_trivial() {
            return Err(Error::TrivialAdditiveCharacter);
        }
        let s: Complex = self
            .field
            .nonzero_elements()
            .map(|a| self.chi(chi, a) * self.psi(psi, a))
            .sum();
        Ok(-s)
    }
}

/// Gauss sums `g(chi_k, psi_1)` for every `k`, computed once per field.
#[derive(Clone, Debug)]
pub struct GaussTable {
    q: u32,
    sqrt_q: f64,
    values: Vec<Complex>,
}

#[derive(Serialize, Deserialize)]
struct GaussCacheFile {
    p: u32,
    e: u32,
    modulus: Vec<u32>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl GaussTable {
    pub fn new(ctx: &CharacterContext) -> Self {
        let field = ctx.field();
        let n = field.unit_order() as u64;
        // psi_1(g^j) for j = 0..n
        let psi_pows: Vec<Complex> = (0..n).map(|j| ctx.psi1(field.exp(j))).collect();
        let values = (0..n)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    // -sum_{x != 0} psi_1(x) = 1
                    return Complex::new(1.0, 0.0);
                }
                let s: Complex = psi_pows
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| ctx.unit_root(k * j as u64) * v)
                    .sum();
                -s
            })
            .collect();
        GaussTable { q: field.q(), sqrt_q: (field.q() as f64).sqrt(), values }
    }

    fn cache_path(dir: &Path, field: &FiniteField) -> PathBuf {
        let m: Vec<String> = field.modulus().iter().map(|c| c.to_string()).collect();
        dir.join(format!("gauss_p{}_e{}_m{}.json", field.p(), field.e(), m.join("-")))
    }

    /// Reads the table from `dir` when a matching cache file exists, and
    /// writes it there otherwise.
    pub fn load_or_build(ctx: &CharacterContext, dir: Option<&Path>) -> Result<Self> {
        let Some(dir) = dir else {
            return Ok(Self::new(ctx));
        };
        let field = ctx.field();
        let path = Self::cache_path(dir, field);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(file) = serde_json::from_str::<GaussCacheFile>(&text) {
                if file.p == field.p()
                    && file.e == field.e()
                    && file.modulus == field.modulus()
                    && file.re.len() == field.unit_order() as usize
                    && file.im.len() == file.re.len()
                {
                    let values = file.re.iter().zip(&file.im).map(|(&r, &i)| Complex::new(r, i)).collect();
                    return Ok(GaussTable { q: field.q(), sqrt_q: (field.q() as f64).sqrt(), values });
                }
            }
        }
        let table = Self::new(ctx);
        std::fs::create_dir_all(dir)?;
        let file = GaussCacheFile {
            p: field.p(),
            e: field.e(),
            modulus: field.modulus().to_vec(),
            re: table.values.iter().map(|c| c.re).collect(),
            im: table.values.iter().map(|c| c.im).collect(),
        };
        std::fs::write(&path, serde_json::to_string(&file)?)?;
        Ok(table)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn get(&self, chi: MultChar) -> Complex {
        debug_assert_eq!(chi.q, self.q);
        self.values[chi.k as usize]
    }

    /// `g(chi) / sqrt(q)`.
    #[inline]
    pub fn normalized(&self, chi: MultChar) -> Complex {
        self.get(chi) / self.sqrt_q
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }
}

/// `|(1 - q) psi(a) lambda(a) - sum_nu g(lambda nu) nu^{-1}(a)|`.
pub fn check_eqsim(
    ctx: &CharacterContext,
    gauss: &GaussTable,
    lambda: MultChar,
    a: FieldElement,
) -> Result<f64> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    ctx.check(lambda.q)?;
    let q = ctx.field().q() as f64;
    let lhs = ctx.psi1(a) * ctx.chi(lambda, a) * (1.0 - q);
    let rhs: Complex = ctx
        .all_chars()
        .map(|nu| gauss.get(lambda.mul(&nu).unwrap()) * ctx.chi(nu.inverse(), a))
        .sum();
    Ok((lhs - rhs).norm())
}

/// `prod_i g(chi lambda_i)/sqrt(q) * prod_j g(chi^{-1} mu_j)/sqrt(q)` with
/// every character already on the field of `gauss`.
pub fn gauss_product_local(
    gauss: &GaussTable,
    chi: MultChar,
    lambdas: &[MultChar],
    mus: &[MultChar],
) -> Result<Complex> {
    let mut acc = Complex::new(1.0, 0.0);
    for l in lambdas {
        acc *= gauss.normalized(chi.mul(l)?);
    }
    let chi_inv = chi.inverse();
    for m in mus {
        acc *= gauss.normalized(chi_inv.mul(m)?);
    }
    Ok(acc)
}

/// The Gauss-sum product with `lambdas` and `mus` given as characters of the
/// subfield `emb.sub()` and pulled back along the norm.
pub fn gauss_product(
    gauss: &GaussTable,
    chi: MultChar,
    lambdas: &[MultChar],
    mus: &[MultChar],
    emb: &SubfieldEmbedding<'_>,
) -> Result<Complex> {
    if gauss.q() != emb.ambient().q() {
        return Err(Error::FieldMismatch(gauss.q() as u64, emb.ambient().q() as u64));
    }
    let lam: Vec<MultChar> = lambdas.iter().map(|l| l.pullback(emb)).collect::<Result<_>>()?;
    let mu: Vec<MultChar> = mus.iter().map(|m| m.pullback(emb)).collect::<Result<_>>()?;
    gauss_product_local(gauss, chi, &lam, &mu)
}

/// Outcome of one identity in the character suite.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub q: u32,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Gauss-sum moduli, `g(chi) g(chi^{-1}) = chi(-1) q`, orthogonality,
/// `psi_b` covariance and the `(1 - q) psi(a) lambda(a)` identity over one
/// field.
pub fn identity_suite(ctx: &CharacterContext, gauss: &GaussTable) -> Vec<IdentityCheck> {
    let field = ctx.field();
    let q = field.q();
    let n = field.unit_order() as usize;
    let sqrt_q = (q as f64).sqrt();
    let minus_one = field.neg(FieldElement::ONE);
    let mut out = Vec::new();
    let mut push = |name: &str, r: f64, tol: f64| {
        out.push(IdentityCheck { name: name.into(), q, max_residual: r, tolerance: tol, passed: r <= tol });
    };

    let triv = MultChar::trivial(field);
    push("gauss_trivial_is_one", (gauss.get(triv) - Complex::new(1.0, 0.0)).norm(), 0.0);

    let modulus = ctx
        .all_chars()
        .filter(|c| !c.is_trivial())
        .map(|c| (gauss.get(c).norm() - sqrt_q).abs())
        .fold(0.0, f64::max);
    push("gauss_modulus_sqrt_q", modulus, 1e-8);

    let reflection = ctx
        .all_chars()
        .filter(|c| !c.is_trivial())
        .map(|c| (gauss.get(c) * gauss.get(c.inverse()) - ctx.chi(c, minus_one) * q as f64).norm())
        .fold(0.0, f64::max);
    push("gauss_reflection", reflection, 1e-8);

    let direct = ctx
        .all_chars()
        .map(|c| (ctx.gauss_sum(c, AddChar::standard(field)).unwrap() - gauss.get(c)).norm())
        .fold(0.0, f64::max);
    push("gauss_table_matches_direct_sum", direct, sum_tolerance(n) * sqrt_q.max(1.0));

    let b = field.generator();
    let shift = ctx
        .all_chars()
        .map(|c| {
            let gb = ctx.gauss_sum(c, AddChar { q, b }).unwrap();
            (gb - ctx.chi(c.inverse(), b) * gauss.get(c)).norm()
        })
        .fold(0.0, f64::max);
    push("gauss_psi_shift_covariance", shift, 1e-8);

    // Orthogonality is O(q^3); keep it to small fields.
    if q <= 64 {
        let mut worst = 0.0f64;
        for c1 in ctx.all_chars() {
            for c2 in ctx.all_chars() {
                let s: Complex = field
                    .nonzero_elements()
                    .map(|a| ctx.chi(c1, a) * ctx.chi(c2, a).conj())
                    .sum();
                let expected = if c1 == c2 { n as f64 } else { 0.0 };
                worst = worst.max((s - Complex::new(expected, 0.0)).norm());
            }
        }
        push("character_orthogonality", worst, sum_tolerance(n));
    }

    let eqsim = ctx
        .all_chars()
        .flat_map(|l| field.nonzero_elements().map(move |a| (l, a)))
        .map(|(l, a)| check_eqsim(ctx, gauss, l, a).unwrap())
        .fold(0.0, f64::max);
    push("eqsim_identity", eqsim, 1e-8);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: u64) -> (CharacterContext, GaussTable) {
        let f = Arc::new(FiniteField::of_order(q).unwrap());
        let c = CharacterContext::new(f);
        let g = GaussTable::new(&c);
        (c, g)
    }

    #[test]
    fn trivial_gauss_sum_is_one() {
        let (c, g) = ctx(5);
        let t = MultChar::trivial(c.field());
        let v = c.gauss_sum(t, AddChar::standard(c.field())).unwrap();
        assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!((g.get(t) - v).norm() < 1e-12);
    }

    #[test]
    fn quadratic_gauss_sum_f5() {
        // -(chi2(1) w + chi2(2) w^2 + chi2(3) w^3 + chi2(4) w^4), w = e^{2 pi i / 5}
        let (c, _) = ctx(5);
        let w = |j: f64| Complex::from_polar(1.0, TAU * j / 5.0);
        let oracle = -(w(1.0) - w(2.0) - w(3.0) + w(4.0));
        assert!((oracle - Complex::new(-5f64.sqrt(), 0.0)).norm() < 1e-12);
        let chi2 = MultChar::quadratic(c.field()).unwrap();
        let v = c.gauss_sum(chi2, AddChar::standard(c.field())).unwrap();
        assert!((v - oracle).norm() < 1e-12);
    }

    #[test]
    fn reflection_over_f7() {
        let (c, g) = ctx(7);
        let minus_one = c.field().from_int(-1);
        for chi in c.all_chars().filter(|x| !x.is_trivial()) {
            let lhs = g.get(chi) * g.get(chi.inverse());
            let rhs = c.chi(chi, minus_one) * 7.0;
            assert!((lhs - rhs).norm() < 1e-9, "{chi}");
        }
    }

    #[test]
    fn rejects_trivial_psi_and_zero_argument() {
        let (c, g) = ctx(5);
        let t = MultChar::trivial(c.field());
        let zero = AddChar { q: 5, b: FieldElement::ZERO };
        assert!(matches!(c.gauss_sum(t, zero), Err(Error::TrivialAdditiveCharacter)));
        assert!(matches!(check_eqsim(&c, &g, t, FieldElement::ZERO), Err(Error::ZeroArgument)));
    }

    #[test]
    fn eqsim_trivial_lambda_f5() {
        let (c, g) = ctx(5);
        let t = MultChar::trivial(c.field());
        let lhs = c.psi1(FieldElement::ONE) * -4.0;
        let rhs: Complex = c.all_chars().map(|nu| g.get(nu)).sum();
        assert!((lhs - rhs).norm() < 1e-9);
        assert!(check_eqsim(&c, &g, t, FieldElement::ONE).unwrap() < 1e-9);
    }

    #[test]
    fn eqsim_quadratic_all_a_f7() {
        let (c, g) = ctx(7);
        let chi2 = MultChar::quadratic(c.field()).unwrap();
        for a in c.field().nonzero_elements() {
            assert!(check_eqsim(&c, &g, chi2, a).unwrap() < 1e-9);
        }
    }

    #[test]
    fn gauss_product_cases() {
        let f7 = Arc::new(FiniteField::prime(7).unwrap());
        let c = CharacterContext::new(f7.clone());
        let g = GaussTable::new(&c);
        let emb = SubfieldEmbedding::new(&f7, &f7).unwrap();
        let triv = MultChar::trivial(&f7);
        let chi = MultChar::new(&f7, 1);
        let v = gauss_product(&g, chi, &[triv], &[], &emb).unwrap();
        assert!((v - g.get(chi) / 7f64.sqrt()).norm() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let v = gauss_product(&g, triv, &[triv], &[], &emb).unwrap();
        assert!((v - Complex::new(1.0 / 7f64.sqrt(), 0.0)).norm() < 1e-12);

        let f5 = Arc::new(FiniteField::prime(5).unwrap());
        let c5 = CharacterContext::new(f5.clone());
        let g5 = GaussTable::new(&c5);
        let emb5 = SubfieldEmbedding::new(&f5, &f5).unwrap();
        let chi2 = MultChar::quadratic(&f5).unwrap();
        let v = gauss_product(&g5, chi2, &[chi2, chi2], &[], &emb5).unwrap();
        assert!((v.norm() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn hasse_davenport_lifting() {
        for (q0, q1) in [(3u64, 9u64), (5, 25)] {
            let k0 = Arc::new(FiniteField::of_order(q0).unwrap());
            let k1 = Arc::new(FiniteField::of_order(q1).unwrap());
            let c0 = CharacterContext::new(k0.clone());
            let c1 = CharacterContext::new(k1.clone());
            let emb = SubfieldEmbedding::new(&k1, &k0).unwrap();
            for chi in c0.all_chars() {
                let g0 = c0.gauss_sum(chi, AddChar::standard(&k0)).unwrap();
                let lifted = chi.pullback(&emb).unwrap();
                // direct sum of chi(N x) psi(T x) over k1
                let direct: Complex = -k1
                    .nonzero_elements()
                    .map(|x| c0.chi(chi, emb.norm(x)) * c0.psi1(emb.trace(x)))
                    .sum::<Complex>();
                let g1 = c1.gauss_sum(lifted, AddChar::standard(&k1)).unwrap();
                // with g = -sum, Hasse-Davenport reads g(chi∘N) = g(chi)^r
                let expected = g0.powu(emb.degree());
                assert!((direct - expected).norm() < 1e-9);
                assert!((g1 - expected).norm() < 1e-9);
                assert_eq!(lifted.descend(&emb), Some(chi));
            }
        }
    }

    #[test]
    fn identity_suite_passes() {
        for q in [5, 7, 9, 13, 25] {
            let (c, g) = ctx(q);
            for check in identity_suite(&c, &g) {
                assert!(check.passed, "{check:?}");
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (c, g) = ctx(9);
        let built = GaussTable::load_or_build(&c, Some(dir.path())).unwrap();
        let loaded = GaussTable::load_or_build(&c, Some(dir.path())).unwrap();
        assert_eq!(built.values(), g.values());
        assert_eq!(loaded.values(), g.values());
    }
}
