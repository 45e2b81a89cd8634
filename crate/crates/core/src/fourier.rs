//! The normalized transform
//! `F(φ)(y) = (-1)^n q^{-n/2} sum_x φ(x) ψ(<x, y>)` on dense functions
//! `k^n → C`.
//!
//! The fast path writes `Tr <x, y> = u^T G v` over `F_p^{en}` (digits of the
//! grid index), runs `en` radix-`p` passes for `Φ̂(w) = sum_u φ(u) ω^{u·w}`
//! and reads `F(φ)(v) = Φ̂(G v)` through a precomputed permutation. The naive
//! path evaluates every `ψ(<x, y>)` with field arithmetic.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::characters::{AddChar, Complex};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FiniteField};
use crate::grid::GridShape;
use crate::poly::Pairing;

/// Naive kernels above this many points are computed row by row instead of
/// cached.
const KERNEL_CACHE_POINTS: usize = 4096;

/// Dense values on `k^n`, indexed as in [`GridShape`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub shape: GridShape,
    pub values: Vec<Complex>,
    /// Unit-modulus summands folded into each value; drives tolerances.
    pub summands: usize,
}

impl GridFunction {
    pub fn zeros(shape: GridShape) -> Self {
        GridFunction { shape, values: vec![Complex::new(0.0, 0.0); shape.size()], summands: 1 }
    }

    pub fn from_fn(shape: GridShape, f: impl Fn(&[FieldElement]) -> Complex + Sync) -> Self {
        let values = (0..shape.size())
            .into_par_iter()
            .map_init(|| vec![FieldElement::ZERO; shape.n], |buf, idx| {
                shape.point_into(idx, buf);
                f(buf)
            })
            .collect();
        GridFunction { shape, values, summands: 1 }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn get(&self, point: &[FieldElement]) -> Complex {
        self.values[self.shape.index(point)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DftMode {
    #[default]
    Fast,
    Naive,
}

/// Everything needed to transform functions on `k^n` for one
/// `(field, B, ψ)`.
pub struct DftPlan {
    field: FiniteField,
    shape: GridShape,
    b: Vec<Vec<FieldElement>>,
    psi: AddChar,
    scale: f64,
    p_roots: Vec<Complex>,
    gram: Vec<Vec<u32>>,
    perm: Vec<u32>,
    kernel: OnceLock<Vec<u8>>,
}

impl DftPlan {
    pub fn new(field: &FiniteField, pairing: &Pairing, psi: AddChar, cap: u64) -> Result<Self> {
        if psi.q != field.q() {
            return Err(Error::FieldMismatch(psi.q as u64, field.q() as u64));
        }
        if psi.is_trivial() {
            return Err(Error::TrivialAdditiveCharacter);
        }
        let n = pairing.dim();
        let shape = GridShape::new(field.q(), n, cap)?;
        // singular B would make the Gram matrix singular and the permutation non-bijective
        pairing.inverse_mod(field.p())?;
        let b = pairing.in_field(field);
        let (p, e) = (field.p(), field.e() as usize);
        let basis: Vec<FieldElement> = (0..e).map(|i| FieldElement(p.pow(i as u32))).collect();
        let dim = n * e;
        let mut gram = vec![vec![0u32; dim]; dim];
        for a in 0..n {
            for c in 0..n {
                let bac = field.mul(psi.b, b[a][c]);
                for i in 0..e {
                    for j in 0..e {
                        let v = field.mul(bac, field.mul(basis[i], basis[j]));
                        gram[a * e + i][c * e + j] = field.abs_trace(v);
                    }
                }
            }
        }
        let perm = (0..shape.size())
            .into_par_iter()
            .map(|v| {
                let digits = digits_of(v, p, dim);
                let mut w = 0u64;
                for row in gram.iter().rev() {
                    let s = row.iter().zip(&digits).map(|(&g, &d)| g as u64 * d as u64).sum::<u64>();
                    w = w * p as u64 + s % p as u64;
                }
                w as u32
            })
            .collect();
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let scale = sign * (field.q() as f64).powf(-(n as f64) / 2.0);
        let p_roots = (0..p).map(|j| Complex::from_polar(1.0, std::f64::consts::TAU * j as f64 / p as f64)).collect();
        Ok(DftPlan {
            field: field.clone(),
            shape,
            b,
            psi,
            scale,
            p_roots,
            gram,
            perm,
            kernel: OnceLock::new(),
        })
    }

    pub fn standard(field: &FiniteField, pairing: &Pairing, cap: u64) -> Result<Self> {
        Self::new(field, pairing, AddChar::standard(field), cap)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    /// The `F_p`-valued Gram matrix of `(u, v) ↦ Tr(b <x(u), y(v)>)`.
    pub fn gram(&self) -> &[Vec<u32>] {
        &self.gram
    }

    /// `<x, y> = x^T B y` in the field.
    pub fn pair(&self, x: &[FieldElement], y: &[FieldElement]) -> FieldElement {
        let f = &self.field;
        let mut acc = FieldElement::ZERO;
        for (i, row) in self.b.iter().enumerate() {
            if x[i].is_zero() {
                continue;
            }
            let by = row.iter().zip(y).fold(FieldElement::ZERO, |s, (&bij, &yj)| f.add(s, f.mul(bij, yj)));
            acc = f.add(acc, f.mul(x[i], by));
        }
        acc
    }

    /// `Tr(b <x, y>)` in `0..p`.
    pub fn trace_pair(&self, x: &[FieldElement], y: &[FieldElement]) -> u32 {
        self.field.abs_trace(self.field.mul(self.psi.b, self.pair(x, y)))
    }

    pub fn transform(&self, phi: &GridFunction, mode: DftMode) -> Result<GridFunction> {
        if phi.shape != self.shape {
            return Err(Error::Validation(format!(
                "grid function on {}^{} does not match plan {}^{}",
                phi.shape.q, phi.shape.n, self.shape.q, self.shape.n
            )));
        }
        Ok(match mode {
            DftMode::Fast => self.fast(phi),
            DftMode::Naive => self.naive(phi),
        })
    }

    pub fn fast(&self, phi: &GridFunction) -> GridFunction {
        let p = self.field.p() as usize;
        let dim = self.gram.len();
        let mut a = phi.values.clone();
        let mut stride = 1usize;
        for _ in 0..dim {
            let block = stride * p;
            a.par_chunks_mut(block).for_each(|chunk| {
                let mut buf = vec![Complex::new(0.0, 0.0); p];
                for r in 0..stride {
                    for (k, b) in buf.iter_mut().enumerate() {
                        let mut s = Complex::new(0.0, 0.0);
                        for j in 0..p {
                            s += chunk[r + j * stride] * self.p_roots[(j * k) % p];
                        }
                        *b = s;
                    }
                    for (k, b) in buf.iter().enumerate() {
                        chunk[r + k * stride] = *b;
                    }
                }
            });
            stride = block;
        }
        let values = self.perm.par_iter().map(|&w| a[w as usize] * self.scale).collect();
        GridFunction { shape: self.shape, values, summands: phi.summands * self.shape.size() }
    }

    fn kernel(&self) -> &[u8] {
        self.kernel.get_or_init(|| {
            let size = self.shape.size();
            (0..size * size)
                .into_par_iter()
                .map_init(
                    || (vec![FieldElement::ZERO; self.shape.n], vec![FieldElement::ZERO; self.shape.n]),
                    |(x, y), idx| {
                        self.shape.point_into(idx / size, y);
                        self.shape.point_into(idx % size, x);
                        self.trace_pair(x, y) as u8
                    },
                )
                .collect()
        })
    }

    pub fn naive(&self, phi: &GridFunction) -> GridFunction {
        let size = self.shape.size();
        let n = self.shape.n;
        let values = if size <= KERNEL_CACHE_POINTS {
            let kernel = self.kernel();
            (0..size)
                .into_par_iter()
                .map(|yi| {
                    let row = &kernel[yi * size..(yi + 1) * size];
                    let s: Complex = row.iter().zip(&phi.values).map(|(&t, &v)| v * self.p_roots[t as usize]).sum();
                    s * self.scale
                })
                .collect()
        } else {
            (0..size)
                .into_par_iter()
                .map(|yi| {
                    let y = self.shape.point(yi);
                    let mut x = vec![FieldElement::ZERO; n];
                    let mut s = Complex::new(0.0, 0.0);
                    for (xi, &v) in phi.values.iter().enumerate() {
                        if v == Complex::new(0.0, 0.0) {
                            continue;
                        }
                        self.shape.point_into(xi, &mut x);
                        s += v * self.p_roots[self.trace_pair(&x, &y) as usize];
                    }
                    s * self.scale
                })
                .collect()
        };
        GridFunction { shape: self.shape, values, summands: phi.summands * size }
    }

    /// Index of `-x` for the point at `idx`.
    pub fn negate_index(&self, idx: usize) -> usize {
        let x: Vec<FieldElement> = self.shape.point(idx).into_iter().map(|c| self.field.neg(c)).collect();
        self.shape.index(&x)
    }
}

fn digits_of(mut v: usize, p: u32, len: usize) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (v % p as usize) as u32;
            v /= p as usize;
            d
        })
        .collect()
}

/// `| ||F(φ)|| - ||φ|| |`.
pub fn parseval_residual(phi: &GridFunction, transformed: &GridFunction) -> f64 {
    (transformed.norm() - phi.norm()).abs()
}

/// `max_x |F(F(φ))(x) - φ(-x)|`.
pub fn involution_residual(plan: &DftPlan, phi: &GridFunction, mode: DftMode) -> Result<f64> {
    let twice = plan.transform(&plan.transform(phi, mode)?, mode)?;
    Ok((0..phi.values.len())
        .map(|i| (twice.values[i] - phi.values[plan.negate_index(i)]).norm())
        .fold(0.0, f64::max))
}

/// `max_y |F(φ(· - a))(y) - ψ(<a, y>) F(φ)(y)|`.
pub fn shift_residual(plan: &DftPlan, phi: &GridFunction, a: &[FieldElement], mode: DftMode) -> Result<f64> {
    let shape = plan.shape();
    let f = plan.field();
    let shifted = GridFunction::from_fn(shape, |x| {
        let y: Vec<FieldElement> = x.iter().zip(a).map(|(&xi, &ai)| f.sub(xi, ai)).collect();
        phi.get(&y)
    });
    let lhs = plan.transform(&shifted, mode)?;
    let rhs = plan.transform(phi, mode)?;
    Ok((0..shape.size())
        .map(|i| {
            let y = shape.point(i);
            let w = plan.p_roots[plan.trace_pair(a, &y) as usize];
            (lhs.values[i] - w * rhs.values[i]).norm()
        })
        .fold(0.0, f64::max))
}
