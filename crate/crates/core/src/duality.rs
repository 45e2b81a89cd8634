//! Exact checks of the duality between `f` and `f^∨`: `f^∨(F(x)) f(x) = 1`,
//! `F^∨ ∘ F = id` on `U`, and the critical-point structure of
//! `R(x, t) = f(x) / (t_1 ... t_d)`.

use rand::Rng;
use serde::Serialize;

use crate::catalog::PvsInstance;
use crate::error::Result;
use crate::field::{FieldElement, FiniteField};
use crate::grid::GridShape;
use crate::poly::RationalFunction;

/// Outcome of an exact (zero-tolerance) check over a set of points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactCheck {
    pub name: String,
    pub checked: usize,
    pub failures: usize,
    /// Coordinates (element indices) of the first failing point.
    pub witness: Option<Vec<u32>>,
}

impl ExactCheck {
    pub fn new(name: &str) -> Self {
        ExactCheck { name: name.into(), checked: 0, failures: 0, witness: None }
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Vec<u32>) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Every point of `U(k)`.
    Exhaustive,
    /// `count` uniform points of `U(k)` (points with `f = 0` are redrawn).
    Random { count: usize },
}

fn indices(x: &[FieldElement]) -> Vec<u32> {
    x.iter().map(|c| c.0).collect()
}

fn random_point<R: Rng>(field: &FiniteField, n: usize, rng: &mut R) -> Vec<FieldElement> {
    (0..n).map(|_| FieldElement(rng.gen_range(0..field.q()))).collect()
}

fn for_each_in_u<R: Rng>(
    inst: &PvsInstance,
    field: &FiniteField,
    sampling: Sampling,
    rng: &mut R,
    mut visit: impl FnMut(&[FieldElement], &mut R),
) -> Result<()> {
    match sampling {
        Sampling::Exhaustive => {
            let shape = GridShape::new(field.q(), inst.n, u64::MAX)?;
            for idx in 0..shape.size() {
                let x = shape.point(idx);
                if !inst.f.eval(field, &x).is_zero() {
                    visit(&x, rng);
                }
            }
        }
        Sampling::Random { count } => {
            let mut done = 0;
            while done < count {
                let x = random_point(field, inst.n, rng);
                if inst.f.eval(field, &x).is_zero() {
                    continue;
                }
                visit(&x, rng);
                done += 1;
            }
        }
    }
    Ok(())
}

/// `f^∨(F(x)) = f(x)^{-1}` and `F^∨(F(x)) = x`, exactly in the field.
pub fn check_dual_inverse<R: Rng>(
    inst: &PvsInstance,
    field: &FiniteField,
    sampling: Sampling,
    rng: &mut R,
) -> Result<ExactCheck> {
    inst.check_field(field)?;
    let grad = inst.gradient_map(field)?;
    let dual = inst.dual_gradient_map(field)?;
    let mut check = ExactCheck::new("dual_inverse");
    for_each_in_u(inst, field, sampling, rng, |x, _| {
        let fx = inst.f.eval(field, x);
        let y = grad.eval(field, x).expect("x in U");
        let ok = field.mul(inst.f_dual.eval(field, &y), fx) == FieldElement::ONE
            && dual.eval(field, &y).as_deref() == Some(x);
        check.record(ok, || indices(x));
    })?;
    Ok(check)
}

/// For `y = (x, t) ∈ U × (k^*)^d` with `ξ = grad R(y)` under the pairing
/// `B ⊕ I`: `ξ ∈ U^∨ × (k^*)^d`, `(-1)^d R^∨(ξ)^{-2} grad R^∨(ξ) = y`,
/// `<y, ξ> = 0`, and `R(y) + <y, ξ> = (-1)^d R^∨(ξ)^{-1}`.
pub fn check_critical_point<R: Rng>(
    inst: &PvsInstance,
    field: &FiniteField,
    sampling: Sampling,
    rng: &mut R,
) -> Result<ExactCheck> {
    inst.check_field(field)?;
    let (n, d) = (inst.n, inst.d);
    let r = RationalFunction::invariant_quotient(&inst.f, d);
    let r_dual = RationalFunction::invariant_quotient(&inst.f_dual, d);
    let ext = inst.pairing.extend_identity(d);
    let b_inv: Vec<Vec<FieldElement>> = ext
        .inverse_mod(field.p())?
        .into_iter()
        .map(|row| row.into_iter().map(FieldElement).collect())
        .collect();
    let sign = if d % 2 == 0 { FieldElement::ONE } else { field.neg(FieldElement::ONE) };
    let mut check = ExactCheck::new("critical_point");

    for_each_in_u(inst, field, sampling, rng, |x, rng| {
        let mut y = x.to_vec();
        y.extend((0..d).map(|_| FieldElement(rng.gen_range(1..field.q()))));
        let ok = (|| {
            let xi = r.gradient(field, &b_inv, &y)?;
            if inst.f_dual.eval(field, &xi[..n]).is_zero() || xi[n..].iter().any(|c| c.is_zero()) {
                return None;
            }
            let rv = r_dual.eval(field, &xi)?;
            let rv_inv = field.inv(rv)?;
            let scale = field.mul(sign, field.mul(rv_inv, rv_inv));
            let back: Vec<FieldElement> =
                r_dual.gradient(field, &b_inv, &xi)?.into_iter().map(|c| field.mul(scale, c)).collect();
            let pairing = ext.eval(field, &y, &xi);
            let value = field.add(r.eval(field, &y)?, pairing);
            Some(back == y && pairing.is_zero() && value == field.mul(sign, rv_inv))
        })()
        .unwrap_or(false);
        check.record(ok, || indices(&y));
    })?;
    Ok(check)
}
