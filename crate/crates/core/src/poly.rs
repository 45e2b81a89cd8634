//! Sparse multivariate polynomials with integer coefficients, reduced modulo
//! the characteristic on evaluation, plus formal gradients and pairings.
//!
//! Text format: a sum of terms `c*x1^a1*...*xn^an`, e.g. `x1*x3 - x2^2` or
//! `3*x1^2 + x2`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{mod_inverse, FieldElement, FiniteField};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: i64,
    pub exps: Vec<u32>,
}

/// A polynomial in `nvars` variables. Terms are kept sorted by exponent
/// vector with no duplicates and no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: impl IntoIterator<Item = (i64, Vec<u32>)>) -> Self {
        let mut acc: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for (c, mut exps) in terms {
            assert!(exps.len() <= nvars, "exponent vector longer than nvars");
            exps.resize(nvars, 0);
            *acc.entry(exps).or_insert(0) += c;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(exps, coeff)| Term { coeff, exps })
            .collect();
        Polynomial { nvars, terms }
    }

    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: i64) -> Self {
        Self::new(nvars, [(c, vec![0; nvars])])
    }

    /// The variable `x_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::new(nvars, [(1, e)])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exps.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.iter().map(|t| t.exps.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Coefficients reduced into `0..p`, dropping those divisible by `p`.
    pub fn reduce_mod(&self, p: u32) -> Self {
        Self::new(
            self.nvars,
            self.terms.iter().map(|t| (t.coeff.rem_euclid(p as i64), t.exps.clone())),
        )
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::new(self.nvars, self.terms.iter().map(|t| (t.coeff * c, t.exps.clone())))
    }

    pub fn add(&self, other: &Polynomial) -> Self {
        assert_eq!(self.nvars, other.nvars);
        Self::new(
            self.nvars,
            self.terms.iter().chain(other.terms.iter()).map(|t| (t.coeff, t.exps.clone())),
        )
    }

    pub fn mul(&self, other: &Polynomial) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let exps = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
                terms.push((a.coeff * b.coeff, exps));
            }
        }
        Self::new(self.nvars, terms)
    }

    /// Reinterprets the polynomial in `total` variables, its own variables
    /// placed starting at `offset`.
    pub fn embed(&self, total: usize, offset: usize) -> Self {
        assert!(offset + self.nvars <= total);
        Self::new(
            total,
            self.terms.iter().map(|t| {
                let mut exps = vec![0; total];
                exps[offset..offset + self.nvars].copy_from_slice(&t.exps);
                (t.coeff, exps)
            }),
        )
    }

    /// Formal partial derivative in variable `i` (term-wise exponent drop).
    pub fn partial(&self, i: usize) -> Self {
        Self::new(
            self.nvars,
            self.terms.iter().filter(|t| t.exps[i] > 0).map(|t| {
                let mut exps = t.exps.clone();
                exps[i] -= 1;
                (t.coeff * t.exps[i] as i64, exps)
            }),
        )
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    pub fn eval(&self, field: &FiniteField, x: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = FieldElement::ZERO;
        for t in &self.terms {
            let mut v = field.from_int(t.coeff);
            if v.is_zero() {
                continue;
            }
            for (&xi, &a) in x.iter().zip(&t.exps) {
                if a > 0 {
                    v = field.mul(v, field.pow(xi, a as u64));
                }
            }
            acc = field.add(acc, v);
        }
        acc
    }

    /// Parses the text format. Variables are `x1..xN`; `nvars` is the larger
    /// of `min_vars` and the highest variable index used.
    pub fn parse(text: &str, min_vars: usize) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut raw_terms: Vec<(i64, BTreeMap<usize, u32>)> = Vec::new();
        let bytes = s.as_bytes();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut sign = 1i64;
            while pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                if bytes[pos] == b'-' {
                    sign = -sign;
                }
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && bytes[pos] != b'+' && bytes[pos] != b'-' {
                pos += 1;
            }
            let body = &s[start..pos];
            if body.is_empty() {
                return Err(Error::Parse(format!("dangling sign in `{text}`")));
            }
            let mut coeff = sign;
            let mut vars = BTreeMap::new();
            for factor in body.split('*') {
                if factor.is_empty() {
                    return Err(Error::Parse(format!("empty factor in `{text}`")));
                }
                if let Some(rest) = factor.strip_prefix('x') {
                    let (idx, pow) = match rest.split_once('^') {
                        Some((i, e)) => (i, e),
                        None => (rest, "1"),
                    };
                    let idx: usize = idx
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad variable `{factor}`")))?;
                    let pow: u32 = pow
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?;
                    if idx == 0 {
                        return Err(Error::Parse("variables are numbered from x1".into()));
                    }
                    *vars.entry(idx - 1).or_insert(0) += pow;
                } else {
                    let c: i64 = factor
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad coefficient `{factor}`")))?;
                    coeff *= c;
                }
            }
            raw_terms.push((coeff, vars));
        }
        let nvars = raw_terms
            .iter()
            .flat_map(|(_, v)| v.keys().map(|k| k + 1))
            .max()
            .unwrap_or(0)
            .max(min_vars);
        Ok(Self::new(
            nvars,
            raw_terms.into_iter().map(|(c, vars)| {
                let mut exps = vec![0; nvars];
                for (i, a) in vars {
                    exps[i] = a;
                }
                (c, exps)
            }),
        ))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest exponent vectors first reads more naturally
        for (n, t) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            let c = t.coeff.abs();
            let vars: Vec<String> = t
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, &a)| if a == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, a) })
                .collect();
            if c != 1 || vars.is_empty() {
                factors.push(c.to_string());
            }
            factors.extend(vars);
            let sep = match (n, t.coeff < 0) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            write!(f, "{sep}{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Determinant of the generic `m x m` matrix whose entry `(i, j)` is the
/// variable returned by `var(i, j)`.
pub fn determinant(nvars: usize, m: usize, var: impl Fn(usize, usize) -> usize) -> Polynomial {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut terms = Vec::new();
    permutations(&mut perm, 0, &mut |p| {
        let mut inversions = 0;
        for i in 0..m {
            for j in i + 1..m {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        let mut exps = vec![0u32; nvars];
        for (i, &j) in p.iter().enumerate() {
            exps[var(i, j)] += 1;
        }
        terms.push((if inversions % 2 == 0 { 1 } else { -1 }, exps));
    });
    Polynomial::new(nvars, terms)
}

fn permutations(v: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// A symmetric bilinear pairing `<x, y> = x^T B y` with integer entries,
/// read in the prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    matrix: Vec<Vec<i64>>,
}

impl Pairing {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("pairing matrix must be square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::Parse("pairing matrix must be symmetric".into()));
                }
            }
        }
        Ok(Pairing { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1; n])
    }

    pub fn diagonal(d: &[i64]) -> Self {
        let n = d.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0 }).collect())
            .collect();
        Pairing { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn diagonal_entries(&self) -> Option<Vec<i64>> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.matrix[i][j] != 0 {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.matrix[i][i]).collect())
    }

    /// `B ⊕ I_extra`.
    pub fn extend_identity(&self, extra: usize) -> Self {
        let n = self.dim();
        let total = n + extra;
        let matrix = (0..total)
            .map(|i| {
                (0..total)
                    .map(|j| {
                        if i < n && j < n {
                            self.matrix[i][j]
                        } else if i == j {
                            1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        Pairing { matrix }
    }

    /// Entries of `B` in the prime field of `field`.
    pub fn in_field(&self, field: &FiniteField) -> Vec<Vec<FieldElement>> {
        self.matrix.iter().map(|r| r.iter().map(|&c| field.from_int(c)).collect()).collect()
    }

    /// `B^{-1}` over `F_p`, entries in `0..p`.
    pub fn inverse_mod(&self, p: u32) -> Result<Vec<Vec<u32>>> {
        let n = self.dim();
        let pm = p as i64;
        let mut a: Vec<Vec<i64>> = self
            .matrix
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row: Vec<i64> = r.iter().map(|c| c.rem_euclid(pm)).collect();
                row.extend((0..n).map(|j| (i == j) as i64));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r][col] != 0).ok_or(Error::SingularPairing(p))?;
            a.swap(col, pivot);
            let inv = mod_inverse(a[col][col] as u64, p as u64).unwrap() as i64;
            for v in a[col].iter_mut() {
                *v = *v * inv % pm;
            }
            for r in 0..n {
                if r != col && a[r][col] != 0 {
                    let factor = a[r][col];
                    for c in 0..2 * n {
                        a[r][c] = (a[r][c] - factor * a[col][c]).rem_euclid(pm);
                    }
                }
            }
        }
        Ok(a.into_iter().map(|r| r[n..].iter().map(|&v| v as u32).collect()).collect())
    }

    pub fn eval(&self, field: &FiniteField, x: &[FieldElement], y: &[FieldElement]) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        for (i, row) in self.matrix.iter().enumerate() {
            if x[i].is_zero() {
                continue;
            }
            for (j, &b) in row.iter().enumerate() {
                if b != 0 && !y[j].is_zero() {
                    acc = field.add(acc, field.mul(field.from_int(b), field.mul(x[i], y[j])));
                }
            }
        }
        acc
    }
}

fn apply_matrix(field: &FiniteField, m: &[Vec<FieldElement>], v: &[FieldElement]) -> Vec<FieldElement> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(FieldElement::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
        })
        .collect()
}

/// `x ↦ B^{-1} ∇f(x) / f(x)` for one field.
#[derive(Clone, Debug)]
pub struct GradientMap {
    f: Polynomial,
    gradient: Vec<Polynomial>,
    pairing: Pairing,
    b_inv: Vec<Vec<FieldElement>>,
}

impl GradientMap {
    pub fn polynomial(&self) -> &Polynomial {
        &self.f
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }

    /// `B^{-1} ∇f(x)`.
    pub fn raw_gradient(&self, field: &FiniteField, x: &[FieldElement]) -> Vec<FieldElement> {
        let g: Vec<FieldElement> = self.gradient.iter().map(|d| d.eval(field, x)).collect();
        apply_matrix(field, &self.b_inv, &g)
    }

    /// `F(x)`, or `None` where `f(x) = 0`.
    pub fn eval(&self, field: &FiniteField, x: &[FieldElement]) -> Option<Vec<FieldElement>> {
        let inv = field.inv(self.f.eval(field, x))?;
        Some(self.raw_gradient(field, x).into_iter().map(|v| field.mul(v, inv)).collect())
    }
}

/// The gradient of `log f` with respect to the pairing `B`.
pub fn grad_log(f: &Polynomial, pairing: &Pairing, field: &FiniteField) -> Result<GradientMap> {
    if f.is_zero() {
        return Err(Error::Validation("grad log of the zero polynomial".into()));
    }
    if pairing.dim() != f.nvars() {
        return Err(Error::Validation(format!(
            "pairing dimension {} does not match {} variables",
            pairing.dim(),
            f.nvars()
        )));
    }
    let b_inv = pairing
        .inverse_mod(field.p())?
        .into_iter()
        .map(|r| r.into_iter().map(FieldElement).collect())
        .collect();
    Ok(GradientMap { f: f.clone(), gradient: f.gradient(), pairing: pairing.clone(), b_inv })
}

/// A formal quotient `num / den` of polynomials in the same variables.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
    num_grad: Vec<Polynomial>,
    den_grad: Vec<Polynomial>,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Self {
        assert_eq!(num.nvars(), den.nvars());
        let num_grad = num.gradient();
        let den_grad = den.gradient();
        RationalFunction { num, den, num_grad, den_grad }
    }

    /// `f(x) / (t_1 ... t_d)` on `V × A^d`.
    pub fn invariant_quotient(f: &Polynomial, d: usize) -> Self {
        let n = f.nvars();
        let total = n + d;
        let mut exps = vec![0u32; total];
        for e in exps.iter_mut().skip(n) {
            *e = 1;
        }
        Self::new(f.embed(total, 0), Polynomial::new(total, [(1, exps)]))
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn eval(&self, field: &FiniteField, y: &[FieldElement]) -> Option<FieldElement> {
        field.div(self.num.eval(field, y), self.den.eval(field, y))
    }

    /// Formal partials `(N_i D - N D_i) / D^2`.
    pub fn partials(&self, field: &FiniteField, y: &[FieldElement]) -> Option<Vec<FieldElement>> {
        let n = self.num.eval(field, y);
        let d = self.den.eval(field, y);
        let d2_inv = field.inv(field.mul(d, d))?;
        Some(
            self.num_grad
                .iter()
                .zip(&self.den_grad)
                .map(|(ni, di)| {
                    let top = field.sub(field.mul(ni.eval(field, y), d), field.mul(n, di.eval(field, y)));
                    field.mul(top, d2_inv)
                })
                .collect(),
        )
    }

    /// Gradient with respect to the pairing `B` (symmetric), i.e. `B^{-1} ∂`.
    pub fn gradient(
        &self,
        field: &FiniteField,
        b_inv: &[Vec<FieldElement>],
        y: &[FieldElement],
    ) -> Option<Vec<FieldElement>> {
        let partials = self.partials(field, y)?;
        Some(apply_matrix(field, b_inv, &partials))
    }
}
