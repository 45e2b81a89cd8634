//! Regular prehomogeneous vector spaces: relative invariant, its dual,
//! closed-form component-group trace functions, dual-twist candidates and a
//! group sampler for invariance tests.
//!
//! Instances are built for a characteristic `p` and can then be evaluated
//! over any field of that characteristic.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::Rng;

use crate::characters::Complex;
use crate::duality::{check_dual_inverse, check_critical_point, ExactCheck, Sampling};
use crate::error::{Error, Result};
use crate::field::{mod_inverse, FieldElement, FiniteField};
use crate::grid::GridShape;
use crate::poly::{determinant, grad_log, GradientMap, Pairing, Polynomial};

/// `scalar * prod chi_2(P_i(x))`, optionally times a Frobenius root of unity
/// `exp(2 pi i num / order)` raised to the extension degree over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFormula {
    pub scalar: i64,
    pub chi2_args: Vec<Polynomial>,
    pub frobenius: Option<(u32, u32)>,
}

impl TraceFormula {
    pub fn one() -> Self {
        TraceFormula { scalar: 1, chi2_args: Vec::new(), frobenius: None }
    }

    pub fn chi2(p: Polynomial) -> Self {
        TraceFormula { scalar: 1, chi2_args: vec![p], frobenius: None }
    }

    pub fn product(&self, other: &TraceFormula) -> Self {
        let frobenius = match (self.frobenius, other.frobenius) {
            (None, f) | (f, None) => f,
            (Some((a, m)), Some((b, n))) => {
                let l = m as u64 * n as u64 / crate::field::gcd(m as u64, n as u64);
                let num = (a as u64 * (l / m as u64) + b as u64 * (l / n as u64)) % l;
                Some((num as u32, l as u32))
            }
        };
        TraceFormula {
            scalar: self.scalar * other.scalar,
            chi2_args: self.chi2_args.iter().chain(&other.chi2_args).cloned().collect(),
            frobenius,
        }
    }

    pub fn is_constant_one(&self) -> bool {
        self.scalar == 1 && self.chi2_args.is_empty() && self.frobenius.is_none()
    }

    /// Value at `x`; zero when some `chi_2` argument vanishes.
    pub fn eval(&self, field: &FiniteField, x: &[FieldElement]) -> Complex {
        let mut sign = self.scalar as f64;
        for arg in &self.chi2_args {
            let v = arg.eval(field, x);
            if v.is_zero() {
                return Complex::new(0.0, 0.0);
            }
            if !field.is_square(v) {
                sign = -sign;
            }
        }
        match self.frobenius {
            None => Complex::new(sign, 0.0),
            Some((num, order)) => {
                let turns = (num as u64 * field.e() as u64) % order as u64;
                Complex::from_polar(sign, TAU * turns as f64 / order as f64)
            }
        }
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut out = TraceFormula::one();
        for factor in split_top_level(&s, '*')? {
            if let Some(inner) = factor.strip_prefix("chi2(").and_then(|r| r.strip_suffix(')')) {
                out.chi2_args.push(Polynomial::parse(inner, nvars)?);
            } else if let Some(inner) = factor.strip_prefix("frob(").and_then(|r| r.strip_suffix(')')) {
                let (a, b) = inner
                    .split_once('/')
                    .ok_or_else(|| Error::Parse(format!("frob expects num/order, got `{inner}`")))?;
                let num: u32 = a.parse().map_err(|_| Error::Parse(format!("bad frob `{inner}`")))?;
                let order: u32 = b.parse().map_err(|_| Error::Parse(format!("bad frob `{inner}`")))?;
                if order == 0 {
                    return Err(Error::Parse("frob order must be positive".into()));
                }
                out = out.product(&TraceFormula { scalar: 1, chi2_args: vec![], frobenius: Some((num % order, order)) });
            } else {
                let c: i64 = factor
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad trace factor `{factor}`")))?;
                if c != 1 && c != -1 {
                    return Err(Error::Parse(format!("trace constants must be ±1, got {c}")));
                }
                out.scalar *= c;
            }
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut parts = Vec::new();
        if self.scalar != 1 || (self.chi2_args.is_empty() && self.frobenius.is_none()) {
            parts.push(self.scalar.to_string());
        }
        parts.extend(self.chi2_args.iter().map(|p| format!("chi2({p})")));
        if let Some((a, b)) = self.frobenius {
            parts.push(format!("frob({a}/{b})"));
        }
        parts.join(" * ")
    }
}

fn split_top_level(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
                }
            }
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
    }
    out.push(&s[start..]);
    if out.iter().any(|f| f.is_empty()) {
        return Err(Error::Parse(format!("empty factor in `{s}`")));
    }
    Ok(out)
}

/// The group actions the sampler knows about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupAction {
    /// `t · x = t x`, `alpha(t) = t^d`.
    Scalar,
    /// `t · x = t^2 x`, `alpha(t) = t^{2d}`.
    ScalarSquare,
    /// Similitudes of `sum x_i^2`: products of reflections times a scalar,
    /// `alpha = t^2`.
    OrthogonalSimilitude,
    /// `(g, h) · x = g x h^T` on row-major `m x m` matrices,
    /// `alpha = det g det h`.
    MatrixPair(usize),
    /// `g · x = g x g^T` on upper-triangle coordinates of symmetric
    /// matrices, `alpha = det(g)^2`.
    SymCongruence(usize),
}

/// A sampled group element acting on `V(k)`.
#[derive(Clone, Debug)]
pub struct GroupElement {
    action: GroupAction,
    scalar: FieldElement,
    reflections: Vec<Vec<FieldElement>>,
    left: Vec<Vec<FieldElement>>,
    right: Vec<Vec<FieldElement>>,
}

fn random_invertible<R: Rng>(field: &FiniteField, m: usize, rng: &mut R) -> Vec<Vec<FieldElement>> {
    loop {
        let g: Vec<Vec<FieldElement>> = (0..m)
            .map(|_| (0..m).map(|_| FieldElement(rng.gen_range(0..field.q()))).collect())
            .collect();
        if !det_of(field, &g).is_zero() {
            return g;
        }
    }
}

fn det_of(field: &FiniteField, a: &[Vec<FieldElement>]) -> FieldElement {
    let m = a.len();
    let det = determinant(m * m, m, |i, j| m * i + j);
    let flat: Vec<FieldElement> = a.iter().flatten().copied().collect();
    det.eval(field, &flat)
}

fn matmul(field: &FiniteField, a: &[Vec<FieldElement>], b: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let m = a.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..m).fold(FieldElement::ZERO, |acc, k| field.add(acc, field.mul(a[i][k], b[k][j])))
                })
                .collect()
        })
        .collect()
}

fn transpose(a: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let m = a.len();
    (0..m).map(|i| (0..m).map(|j| a[j][i]).collect()).collect()
}

/// Upper-triangle coordinate index of entry `(i, j)` of a symmetric `m x m`
/// matrix, rows first.
pub fn sym_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * i.saturating_sub(1) / 2 + (j - i)
}

fn sym_to_matrix(m: usize, x: &[FieldElement]) -> Vec<Vec<FieldElement>> {
    (0..m).map(|i| (0..m).map(|j| x[sym_index(m, i, j)]).collect()).collect()
}

fn matrix_to_sym(m: usize, a: &[Vec<FieldElement>]) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; m * (m + 1) / 2];
    for i in 0..m {
        for j in i..m {
            out[sym_index(m, i, j)] = a[i][j];
        }
    }
    out
}

impl GroupAction {
    pub fn sample<R: Rng>(&self, field: &FiniteField, n: usize, rng: &mut R) -> GroupElement {
        let scalar = FieldElement(rng.gen_range(1..field.q()));
        let mut el = GroupElement {
            action: self.clone(),
            scalar,
            reflections: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        };
        match self {
            GroupAction::Scalar | GroupAction::ScalarSquare => {}
            GroupAction::OrthogonalSimilitude => {
                let count = rng.gen_range(0..=3);
                while el.reflections.len() < count {
                    let v: Vec<FieldElement> = (0..n).map(|_| FieldElement(rng.gen_range(0..field.q()))).collect();
                    let qv = v.iter().fold(FieldElement::ZERO, |acc, &c| field.add(acc, field.mul(c, c)));
                    if !qv.is_zero() {
                        el.reflections.push(v);
                    }
                }
            }
            GroupAction::MatrixPair(m) => {
                el.left = random_invertible(field, *m, rng);
                el.right = random_invertible(field, *m, rng);
            }
            GroupAction::SymCongruence(m) => {
                el.left = random_invertible(field, *m, rng);
            }
        }
        el
    }

    pub fn to_text(&self) -> String {
        match self {
            GroupAction::Scalar => "scalar".into(),
            GroupAction::ScalarSquare => "scalar_square".into(),
            GroupAction::OrthogonalSimilitude => "orthogonal_similitude".into(),
            GroupAction::MatrixPair(m) => format!("matrix_pair {m}"),
            GroupAction::SymCongruence(m) => format!("sym_congruence {m}"),
        }
    }

    pub fn parse(text: &str) -> Result<Option<Self>> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let size = |w: &[&str]| -> Result<usize> {
            w.get(1)
                .and_then(|s| s.parse().ok())
                .filter(|&m: &usize| m >= 1)
                .ok_or_else(|| Error::Parse(format!("group `{text}` needs a matrix size")))
        };
        Ok(Some(match words.first().copied() {
            Some("none") | None => return Ok(None),
            Some("scalar") => GroupAction::Scalar,
            Some("scalar_square") => GroupAction::ScalarSquare,
            Some("orthogonal_similitude") => GroupAction::OrthogonalSimilitude,
            Some("matrix_pair") => GroupAction::MatrixPair(size(&words)?),
            Some("sym_congruence") => GroupAction::SymCongruence(size(&words)?),
            Some(other) => return Err(Error::Parse(format!("unknown group action `{other}`"))),
        }))
    }
}

impl GroupElement {
    pub fn act(&self, field: &FiniteField, x: &[FieldElement]) -> Vec<FieldElement> {
        match &self.action {
            GroupAction::Scalar => x.iter().map(|&c| field.mul(self.scalar, c)).collect(),
            GroupAction::ScalarSquare => {
                let t2 = field.mul(self.scalar, self.scalar);
                x.iter().map(|&c| field.mul(t2, c)).collect()
            }
            GroupAction::OrthogonalSimilitude => {
                let mut y = x.to_vec();
                for v in &self.reflections {
                    let dot = |a: &[FieldElement], b: &[FieldElement]| {
                        a.iter().zip(b).fold(FieldElement::ZERO, |acc, (&s, &t)| field.add(acc, field.mul(s, t)))
                    };
                    let coef = field.div(field.mul(field.from_int(2), dot(&y, v)), dot(v, v)).unwrap();
                    y = y.iter().zip(v).map(|(&yi, &vi)| field.sub(yi, field.mul(coef, vi))).collect();
                }
                y.into_iter().map(|c| field.mul(self.scalar, c)).collect()
            }
            GroupAction::MatrixPair(m) => {
                let xm: Vec<Vec<FieldElement>> = x.chunks(*m).map(|r| r.to_vec()).collect();
                let r = matmul(field, &matmul(field, &self.left, &xm), &transpose(&self.right));
                r.into_iter().flatten().collect()
            }
            GroupAction::SymCongruence(m) => {
                let xm = sym_to_matrix(*m, x);
                let r = matmul(field, &matmul(field, &self.left, &xm), &transpose(&self.left));
                matrix_to_sym(*m, &r)
            }
        }
    }

    /// The character `alpha(g)` with `f(g x) = alpha(g) f(x)` for an
    /// invariant of degree `d`.
    pub fn alpha(&self, field: &FiniteField, d: usize) -> FieldElement {
        match &self.action {
            GroupAction::Scalar => field.pow(self.scalar, d as u64),
            GroupAction::ScalarSquare => field.pow(self.scalar, 2 * d as u64),
            GroupAction::OrthogonalSimilitude => field.mul(self.scalar, self.scalar),
            GroupAction::MatrixPair(_) => {
                field.mul(det_of(field, &self.left), det_of(field, &self.right))
            }
            GroupAction::SymCongruence(_) => {
                let dg = det_of(field, &self.left);
                field.mul(dg, dg)
            }
        }
    }
}

/// A representation of the component group, by name and trace function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoTrace {
    pub name: String,
    pub trace: TraceFormula,
}

/// Which characteristics an instance accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharacteristicConstraint {
    Any,
    Odd,
}

/// A regular prehomogeneous vector space over a fixed characteristic.
#[derive(Clone, Debug)]
pub struct PvsInstance {
    pub name: String,
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub f: Polynomial,
    pub f_dual: Polynomial,
    pub pairing: Pairing,
    pub m_hint: usize,
    pub characteristic: CharacteristicConstraint,
    /// Trace functions on `U`.
    pub rho: Vec<RhoTrace>,
    /// The same representations as trace functions on `U^∨`.
    pub dual_rho: Vec<RhoTrace>,
    /// Names (from `dual_rho`) of the characters of the component group that
    /// may appear as the dual twist.
    pub epsilon_candidates: Vec<String>,
    pub group: Option<GroupAction>,
    pub exceptional_hint: Vec<u32>,
}

/// A named candidate trace function on the dual side.
#[derive(Clone, Debug)]
pub struct DualTwist {
    pub name: String,
    pub trace: TraceFormula,
}

impl PvsInstance {
    pub fn rho_names(&self) -> Vec<&str> {
        self.rho.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn rho_trace(&self, name: &str) -> Result<&TraceFormula> {
        self.rho
            .iter()
            .find(|r| r.name == name)
            .map(|r| &r.trace)
            .ok_or_else(|| Error::UnknownRho(name.into()))
    }

    fn dual_rho_trace(&self, name: &str) -> Result<&TraceFormula> {
        self.dual_rho
            .iter()
            .find(|r| r.name == name)
            .map(|r| &r.trace)
            .ok_or_else(|| Error::UnknownRho(name.into()))
    }

    /// `t_ρ^∨ · t_ε^∨` for every candidate `ε`, named by `ε`.
    pub fn dual_twist_candidates(&self, rho_name: &str) -> Result<Vec<DualTwist>> {
        let base = self.dual_rho_trace(rho_name)?;
        self.epsilon_candidates
            .iter()
            .map(|eps| {
                Ok(DualTwist { name: eps.clone(), trace: base.product(self.dual_rho_trace(eps)?) })
            })
            .collect()
    }

    pub fn check_field(&self, field: &FiniteField) -> Result<()> {
        if field.p() != self.p {
            return Err(Error::Characteristic {
                p: field.p(),
                what: format!("instance {} built for p = {}", self.name, self.p),
            });
        }
        Ok(())
    }

    pub fn gradient_map(&self, field: &FiniteField) -> Result<GradientMap> {
        grad_log(&self.f, &self.pairing, field)
    }

    pub fn dual_gradient_map(&self, field: &FiniteField) -> Result<GradientMap> {
        grad_log(&self.f_dual, &self.pairing, field)
    }

    /// `Tr(ρ_x)` for `x ∈ U(k)`. The Frobenius action on every built-in
    /// representation is trivial.
    pub fn trace_rho(&self, rho_name: &str, x: &[FieldElement], field: &FiniteField) -> Result<Complex> {
        self.check_field(field)?;
        let t = self.rho_trace(rho_name)?;
        if self.f.eval(field, x).is_zero() {
            return Err(Error::OutsideOrbit);
        }
        Ok(t.eval(field, x))
    }

    pub fn to_config(&self) -> CatalogConfig {
        let mut s = String::new();
        let _ = writeln!(s, "name: {}", self.name);
        let _ = writeln!(
            s,
            "characteristic: {}",
            match self.characteristic {
                CharacteristicConstraint::Any => "any",
                CharacteristicConstraint::Odd => "odd",
            }
        );
        let _ = writeln!(s, "n: {}", self.n);
        let _ = writeln!(s, "f: {}", self.f);
        let _ = writeln!(s, "f_dual: {}", self.f_dual);
        let _ = writeln!(s, "f_dual_scale: 1");
        let pairing = match self.pairing.diagonal_entries() {
            Some(d) if d.iter().all(|&v| v == 1) => "identity".to_string(),
            Some(d) => format!("diag {}", d.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")),
            None => format!(
                "rows {}",
                self.pairing
                    .matrix()
                    .iter()
                    .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
                    .collect::<Vec<_>>()
                    .join(";")
            ),
        };
        let _ = writeln!(s, "pairing: {pairing}");
        for r in &self.rho {
            let _ = writeln!(s, "rho: {} = {}", r.name, r.trace.to_text());
        }
        for r in &self.dual_rho {
            let _ = writeln!(s, "dual_rho: {} = {}", r.name, r.trace.to_text());
        }
        let _ = writeln!(s, "epsilon: {}", self.epsilon_candidates.join(", "));
        let _ = writeln!(
            s,
            "group: {}",
            self.group.as_ref().map(|g| g.to_text()).unwrap_or_else(|| "none".into())
        );
        let _ = writeln!(s, "m_hint: {}", self.m_hint);
        CatalogConfig { text: s }
    }
}

fn require_odd(name: &str, p: u32) -> Result<()> {
    if p == 2 {
        return Err(Error::Characteristic { p, what: name.into() });
    }
    Ok(())
}

fn inverse_mod_p(v: i64, p: u32) -> Result<i64> {
    mod_inverse(v.rem_euclid(p as i64) as u64, p as u64)
        .map(|x| x as i64)
        .ok_or(Error::Characteristic { p, what: format!("inverting {v}") })
}

fn trivial_only() -> Vec<RhoTrace> {
    vec![RhoTrace { name: "trivial".into(), trace: TraceFormula::one() }]
}

pub fn gl1_line(p: u32) -> Result<PvsInstance> {
    let x = Polynomial::var(1, 0);
    Ok(PvsInstance {
        name: "gl1_line".into(),
        p,
        n: 1,
        d: 1,
        f: x.clone(),
        f_dual: x,
        pairing: Pairing::identity(1),
        m_hint: 0,
        characteristic: CharacteristicConstraint::Any,
        rho: trivial_only(),
        dual_rho: trivial_only(),
        epsilon_candidates: vec!["trivial".into()],
        group: Some(GroupAction::Scalar),
        exceptional_hint: vec![0],
    })
}

pub fn gl1_square(p: u32) -> Result<PvsInstance> {
    require_odd("gl1_square", p)?;
    let x = Polynomial::var(1, 0);
    let with_sign = vec![
        RhoTrace { name: "trivial".into(), trace: TraceFormula::one() },
        RhoTrace { name: "sign".into(), trace: TraceFormula::chi2(x.clone()) },
    ];
    Ok(PvsInstance {
        name: "gl1_square".into(),
        p,
        n: 1,
        d: 1,
        f: x.clone(),
        f_dual: x,
        pairing: Pairing::identity(1),
        m_hint: 0,
        characteristic: CharacteristicConstraint::Odd,
        rho: with_sign.clone(),
        dual_rho: with_sign,
        epsilon_candidates: vec!["trivial".into(), "sign".into()],
        group: Some(GroupAction::ScalarSquare),
        exceptional_hint: Vec::new(),
    })
}

/// `sum x_i^2` on `k^n` with `f^∨ = Q / 4`.
///
/// For even `n` the similitudes act transitively on `U(k)` and only the
/// trivial representation has a non-constant trace; for odd `n` the
/// multiplier is a square, the two orbits are the square classes of `Q(x)`
/// and the sign representation has trace `chi_2(Q(x))`.
pub fn quadratic(n: usize, p: u32) -> Result<PvsInstance> {
    let name = format!("quadratic_{n}");
    require_odd(&name, p)?;
    if n == 0 {
        return Err(Error::UnknownInstance(name));
    }
    let q = Polynomial::new(n, (0..n).map(|i| {
        let mut e = vec![0; n];
        e[i] = 2;
        (1, e)
    }));
    let quarter = inverse_mod_p(4, p)?;
    let f_dual = q.scale(quarter).reduce_mod(p);
    let (rho, dual_rho, epsilon) = if n % 2 == 1 {
        let with_sign = |f: &Polynomial| {
            vec![
                RhoTrace { name: "trivial".into(), trace: TraceFormula::one() },
                RhoTrace { name: "sign".into(), trace: TraceFormula::chi2(f.clone()) },
            ]
        };
        (with_sign(&q), with_sign(&f_dual), vec!["trivial".into(), "sign".into()])
    } else {
        (trivial_only(), trivial_only(), vec!["trivial".into()])
    };
    Ok(PvsInstance {
        name,
        p,
        n,
        d: 2,
        f_dual,
        f: q,
        pairing: Pairing::identity(n),
        m_hint: 0,
        characteristic: CharacteristicConstraint::Odd,
        rho,
        dual_rho,
        epsilon_candidates: epsilon,
        group: Some(GroupAction::OrthogonalSimilitude),
        exceptional_hint: Vec::new(),
    })
}

/// `det` on `m x m` matrices, row-major coordinates, `<x, y> = tr(x y^T)`.
pub fn matrix_det(m: usize, p: u32) -> Result<PvsInstance> {
    if m == 0 {
        return Err(Error::UnknownInstance("matrix_det_0".into()));
    }
    let n = m * m;
    let det = determinant(n, m, |i, j| m * i + j).reduce_mod(p);
    Ok(PvsInstance {
        name: format!("matrix_det_{m}"),
        p,
        n,
        d: m,
        f: det.clone(),
        f_dual: det,
        pairing: Pairing::identity(n),
        m_hint: 0,
        characteristic: CharacteristicConstraint::Any,
        rho: trivial_only(),
        dual_rho: trivial_only(),
        epsilon_candidates: vec!["trivial".into()],
        group: Some(GroupAction::MatrixPair(m)),
        exceptional_hint: Vec::new(),
    })
}

/// `det` on symmetric `m x m` matrices (upper-triangle coordinates),
/// `<x, y> = tr(x y)`.
pub fn sym_det(m: usize, p: u32) -> Result<PvsInstance> {
    let name = format!("sym_det_{m}");
    require_odd(&name, p)?;
    if m == 0 {
        return Err(Error::UnknownInstance(name));
    }
    let n = m * (m + 1) / 2;
    let det = determinant(n, m, |i, j| sym_index(m, i, j)).reduce_mod(p);
    let mut weights = vec![0i64; n];
    for i in 0..m {
        for j in i..m {
            weights[sym_index(m, i, j)] = if i == j { 1 } else { 2 };
        }
    }
    let reps = vec![
        RhoTrace { name: "trivial".into(), trace: TraceFormula::one() },
        RhoTrace { name: "sign".into(), trace: TraceFormula::chi2(det.clone()) },
    ];
    Ok(PvsInstance {
        name,
        p,
        n,
        d: m,
        f: det.clone(),
        f_dual: det,
        pairing: Pairing::diagonal(&weights),
        m_hint: 0,
        characteristic: CharacteristicConstraint::Odd,
        rho: reps.clone(),
        dual_rho: reps,
        epsilon_candidates: vec!["trivial".into(), "sign".into()],
        group: Some(GroupAction::SymCongruence(m)),
        exceptional_hint: Vec::new(),
    })
}

/// Looks up a built-in by name: `gl1_line`, `gl1_square`, `quadratic_<n>`,
/// `matrix_det_<m>`, `sym_det_<m>`.
pub fn builtin(name: &str, p: u32) -> Result<PvsInstance> {
    let suffix = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix)?.parse().ok() };
    if name == "gl1_line" {
        gl1_line(p)
    } else if name == "gl1_square" {
        gl1_square(p)
    } else if let Some(n) = suffix("quadratic_") {
        quadratic(n, p)
    } else if let Some(m) = suffix("matrix_det_") {
        matrix_det(m, p)
    } else if let Some(m) = suffix("sym_det_") {
        sym_det(m, p)
    } else {
        Err(Error::UnknownInstance(name.into()))
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "gl1_line",
    "gl1_square",
    "quadratic_2",
    "quadratic_3",
    "matrix_det_2",
    "matrix_det_3",
    "sym_det_2",
    "sym_det_3",
];

/// Every built-in compatible with the characteristic of `field`.
pub fn builtin_instances(field: &FiniteField) -> Vec<PvsInstance> {
    BUILTIN_NAMES.iter().filter_map(|n| builtin(n, field.p()).ok()).collect()
}

/// Textual instance description: `key: value` lines, `#` comments.
///
/// Keys: `name`, `characteristic` (`any`/`odd`), `n`, `f`, `f_dual`
/// (polynomial or `solve`), `f_dual_scale` (integer or `solve`), `pairing`
/// (`identity`, `diag a b ...`, `rows a,b;c,d`), repeated `rho: name =
/// formula` and `dual_rho: name = formula`, `epsilon` (comma list), `group`,
/// `m_hint`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogConfig {
    pub text: String,
}

impl CatalogConfig {
    pub fn new(text: impl Into<String>) -> Self {
        CatalogConfig { text: text.into() }
    }

    /// Builds the instance without validating it. The normalization of
    /// `f^∨` is solved at a witness point when `f_dual_scale` is `solve`.
    pub fn parse(&self, field: &FiniteField) -> Result<PvsInstance> {
        let p = field.p();
        let mut name = None;
        let mut characteristic = CharacteristicConstraint::Any;
        let mut n = None;
        let mut f_text = None;
        let mut f_dual_text = None;
        let mut scale_text = "solve".to_string();
        let mut pairing_text = "identity".to_string();
        let mut rho_lines = Vec::new();
        let mut dual_lines = Vec::new();
        let mut epsilon = Vec::new();
        let mut group = None;
        let mut m_hint = 0;

        for (lineno, raw) in self.text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key: value`", lineno + 1)))?;
            let value = value.trim();
            match key.trim() {
                "name" => name = Some(value.to_string()),
                "characteristic" => {
                    characteristic = match value {
                        "any" => CharacteristicConstraint::Any,
                        "odd" => CharacteristicConstraint::Odd,
                        other => return Err(Error::Parse(format!("unknown characteristic `{other}`"))),
                    }
                }
                "n" => {
                    n = Some(value.parse::<usize>().map_err(|_| Error::Parse(format!("bad n `{value}`")))?)
                }
                "f" => f_text = Some(value.to_string()),
                "f_dual" => f_dual_text = Some(value.to_string()),
                "f_dual_scale" => scale_text = value.to_string(),
                "pairing" => pairing_text = value.to_string(),
                "rho" => rho_lines.push(value.to_string()),
                "dual_rho" => dual_lines.push(value.to_string()),
                "epsilon" => {
                    epsilon = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
                "group" => group = GroupAction::parse(value)?,
                "m_hint" => {
                    m_hint = value.parse().map_err(|_| Error::Parse(format!("bad m_hint `{value}`")))?
                }
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            }
        }

        let name = name.ok_or_else(|| Error::Parse("missing `name`".into()))?;
        if characteristic == CharacteristicConstraint::Odd {
            require_odd(&name, p)?;
        }
        let n = n.ok_or_else(|| Error::Parse("missing `n`".into()))?;
        let f = Polynomial::parse(&f_text.ok_or_else(|| Error::Parse("missing `f`".into()))?, n)?;
        if f.nvars() != n {
            return Err(Error::Parse(format!("f uses {} variables, n = {n}", f.nvars())));
        }
        let f = f.reduce_mod(p);
        let d = f
            .homogeneous_degree()
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::Parse("f must be homogeneous of positive degree mod p".into()))?
            as usize;

        let dual_base = match f_dual_text.as_deref() {
            None => return Err(Error::Parse("missing `f_dual`".into())),
            Some("solve") => {
                if n != 1 || d != 1 {
                    return Err(Error::Parse(
                        "f_dual = solve is only available for n = d = 1; give the dual invariant".into(),
                    ));
                }
                Polynomial::var(1, 0)
            }
            Some(t) => Polynomial::parse(t, n)?,
        };
        if dual_base.nvars() != n {
            return Err(Error::Parse(format!("f_dual uses {} variables, n = {n}", dual_base.nvars())));
        }
        let pairing = parse_pairing(&pairing_text, n)?;

        let scale = if scale_text == "solve" {
            solve_dual_scale(&f, &dual_base.reduce_mod(p), &pairing, field)?
        } else {
            scale_text.parse::<i64>().map_err(|_| Error::Parse(format!("bad f_dual_scale `{scale_text}`")))?
        };
        let f_dual = dual_base.scale(scale).reduce_mod(p);
        if f_dual.is_zero() {
            return Err(Error::Parse("f_dual vanishes mod p".into()));
        }

        let parse_reps = |lines: &[String]| -> Result<Vec<RhoTrace>> {
            lines
                .iter()
                .map(|l| {
                    let (nm, formula) = l
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected `name = formula`, got `{l}`")))?;
                    Ok(RhoTrace { name: nm.trim().to_string(), trace: TraceFormula::parse(formula, n)? })
                })
                .collect()
        };
        let mut rho = parse_reps(&rho_lines)?;
        let mut dual_rho = parse_reps(&dual_lines)?;
        if rho.is_empty() {
            rho = trivial_only();
        }
        if dual_rho.is_empty() {
            dual_rho = trivial_only();
        }
        if epsilon.is_empty() {
            epsilon.push("trivial".to_string());
        }
        for r in &rho {
            if !dual_rho.iter().any(|d| d.name == r.name) {
                return Err(Error::Parse(format!("rho `{}` has no dual_rho entry", r.name)));
            }
        }
        for e in &epsilon {
            if !dual_rho.iter().any(|d| &d.name == e) {
                return Err(Error::Parse(format!("epsilon `{e}` has no dual_rho entry")));
            }
        }

        Ok(PvsInstance {
            name,
            p,
            n,
            d,
            f,
            f_dual,
            pairing,
            m_hint,
            characteristic,
            rho,
            dual_rho,
            epsilon_candidates: epsilon,
            group,
            exceptional_hint: Vec::new(),
        })
    }
}

fn parse_pairing(text: &str, n: usize) -> Result<Pairing> {
    let text = text.trim();
    let pairing = if text == "identity" {
        Pairing::identity(n)
    } else if let Some(rest) = text.strip_prefix("diag") {
        let d: Vec<i64> = rest
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| Error::Parse(format!("bad diag entry `{v}`"))))
            .collect::<Result<_>>()?;
        Pairing::diagonal(&d)
    } else if let Some(rest) = text.strip_prefix("rows") {
        let rows: Vec<Vec<i64>> = rest
            .trim()
            .split(';')
            .map(|r| {
                r.split(',')
                    .map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad pairing entry `{v}`"))))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        Pairing::new(rows)?
    } else {
        return Err(Error::Parse(format!("unknown pairing `{text}`")));
    };
    if pairing.dim() != n {
        return Err(Error::Parse(format!("pairing has dimension {}, n = {n}", pairing.dim())));
    }
    Ok(pairing)
}

/// The scalar `s ∈ F_p` with `s f^∨(F(x)) = f(x)^{-1}` at the first point
/// of `U(F_p)` in grid order (falling back to `U(k)`).
pub fn solve_dual_scale(f: &Polynomial, f_dual: &Polynomial, pairing: &Pairing, field: &FiniteField) -> Result<i64> {
    let grad = grad_log(f, pairing, field)?;
    let shape = GridShape::new(field.q(), f.nvars(), u64::MAX)?;
    for idx in 0..shape.size() {
        let x = shape.point(idx);
        let Some(fx_vec) = grad.eval(field, &x) else { continue };
        let fx = f.eval(field, &x);
        let v = f_dual.eval(field, &fx_vec);
        let Some(s) = field.inv(field.mul(fx, v)) else { continue };
        if !field.is_in_prime_field(s) {
            return Err(Error::Validation(format!(
                "dual normalization at witness {:?} is not in the prime field",
                x.iter().map(|c| c.0).collect::<Vec<_>>()
            )));
        }
        return Ok(s.0 as i64);
    }
    Err(Error::Validation("no witness point with f(x) f^∨(F(x)) ≠ 0".into()))
}

/// Catalog-level validation results for one instance over one field.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ValidationReport {
    pub instance: String,
    pub q: u32,
    pub checks: Vec<ExactCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn first_failure(&self) -> Option<&ExactCheck> {
        self.checks.iter().find(|c| !c.passed())
    }
}

/// Runs the dual-invariant identity, the critical-point inverse and value,
/// relative invariance, trace-function invariance, homogeneity, and the
/// hypersurface size bound.
pub fn validate_instance<R: Rng>(
    inst: &PvsInstance,
    field: &FiniteField,
    samples: usize,
    rng: &mut R,
) -> Result<ValidationReport> {
    inst.check_field(field)?;
    let shape = GridShape::new(field.q(), inst.n, u64::MAX)?;
    let exhaustive = shape.size() <= 4096;
    let sampling = if exhaustive { Sampling::Exhaustive } else { Sampling::Random { count: samples.max(500) } };
    let mut checks = vec![
        check_dual_inverse(inst, field, sampling, rng)?,
        check_critical_point(inst, field, Sampling::Random { count: samples.max(200) }, rng)?,
    ];

    let sample_u = |rng: &mut R| loop {
        let x: Vec<FieldElement> = (0..inst.n).map(|_| FieldElement(rng.gen_range(0..field.q()))).collect();
        if !inst.f.eval(field, &x).is_zero() {
            return x;
        }
    };
    let witness = |x: &[FieldElement]| x.iter().map(|c| c.0).collect::<Vec<_>>();

    let mut homog = ExactCheck::new("homogeneity");
    let grad = inst.gradient_map(field)?;
    let mut f_degree = ExactCheck::new("gradient_degree_minus_one");
    for _ in 0..samples.max(100) {
        let x = sample_u(rng);
        let lambda = FieldElement(rng.gen_range(1..field.q()));
        let lx: Vec<FieldElement> = x.iter().map(|&c| field.mul(lambda, c)).collect();
        let ok = inst.f.eval(field, &lx) == field.mul(field.pow(lambda, inst.d as u64), inst.f.eval(field, &x));
        homog.record(ok, || witness(&x));
        let fl = grad.eval(field, &lx).unwrap();
        let linv = field.inv(lambda).unwrap();
        let expect: Vec<FieldElement> = grad.eval(field, &x).unwrap().into_iter().map(|c| field.mul(linv, c)).collect();
        f_degree.record(fl == expect, || witness(&x));
    }
    checks.push(homog);
    checks.push(f_degree);

    if let Some(group) = &inst.group {
        let mut rel = ExactCheck::new("relative_invariance");
        let mut traces = ExactCheck::new("trace_invariance");
        for _ in 0..samples.max(100) {
            let g = group.sample(field, inst.n, rng);
            let x = sample_u(rng);
            let gx = g.act(field, &x);
            let ok = inst.f.eval(field, &gx) == field.mul(g.alpha(field, inst.d), inst.f.eval(field, &x));
            rel.record(ok, || witness(&x));
            for r in &inst.rho {
                let same = (r.trace.eval(field, &gx) - r.trace.eval(field, &x)).norm() < 1e-12;
                traces.record(same, || witness(&x));
            }
        }
        checks.push(rel);
        checks.push(traces);
    }

    if exhaustive {
        let mut zeros = 0usize;
        let mut unit_traces = ExactCheck::new("trace_unit_modulus");
        for idx in 0..shape.size() {
            let x = shape.point(idx);
            if inst.f.eval(field, &x).is_zero() {
                zeros += 1;
            } else {
                for r in &inst.rho {
                    unit_traces.record((r.trace.eval(field, &x).norm() - 1.0).abs() < 1e-12, || witness(&x));
                }
            }
        }
        let bound = inst.d * (field.q() as usize).pow(inst.n as u32 - 1);
        let mut hyper = ExactCheck::new("hypersurface_bound");
        hyper.record(zeros <= bound && zeros < shape.size(), Vec::new);
        checks.push(hyper);
        checks.push(unit_traces);
    }

    Ok(ValidationReport { instance: inst.name.clone(), q: field.q(), checks })
}

/// Parses and validates a config, rejecting it with the failing check's
/// witness.
pub fn load_instance<R: Rng>(cfg: &CatalogConfig, field: &FiniteField, rng: &mut R) -> Result<PvsInstance> {
    let inst = cfg.parse(field)?;
    let report = validate_instance(&inst, field, 200, rng)?;
    if let Some(fail) = report.first_failure() {
        return Err(Error::Validation(format!(
            "{} failed for {} ({} of {} points), witness {:?}",
            fail.name, inst.name, fail.failures, fail.checked, fail.witness
        )));
    }
    Ok(inst)
}
