//! Verification of the functional equation
//!
//! `F(φ_χ)(y) = C_χ · t^∨(y) · χ^{-1}(f^∨(y))` on `U^∨(k)`, `0` off it,
//!
//! with `φ_χ(x) = Tr(ρ_x) χ(f(x))` on `U(k)`, and recovery of
//! `C_χ = ζ χ^{-1}(a) prod_i g(χ λ_i)/√q prod_j g(χ^{-1} μ_j)/√q`
//! from the weight drops of `|C_χ|`.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::PvsInstance;
use crate::characters::{gauss_product_local, CharacterContext, Complex, GaussTable, MultChar};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FiniteField, SubfieldEmbedding};
use crate::fourier::{DftMode, DftPlan, GridFunction};
use crate::grid::DEFAULT_GRID_CAP;

pub const DEFAULT_RATIO_TOL: f64 = 1e-7;
pub const DEFAULT_FIT_TOL: f64 = 1e-6;
/// Largest accepted distance of `-2 log_q |C_χ|` from an integer.
pub const WEIGHT_ROUNDING_TOL: f64 = 0.1;

/// A field together with its character tables.
pub struct FieldData {
    pub ctx: CharacterContext,
    pub gauss: GaussTable,
}

impl FieldData {
    pub fn new(field: FiniteField, cache_dir: Option<&Path>) -> Result<Self> {
        let ctx = CharacterContext::new(Arc::new(field));
        let gauss = GaussTable::load_or_build(&ctx, cache_dir)?;
        Ok(FieldData { ctx, gauss })
    }

    pub fn field(&self) -> &FiniteField {
        self.ctx.field()
    }
}

/// `φ_χ = t_ρ · χ∘f` on `U(k)`, zero elsewhere.
pub fn build_phi(inst: &PvsInstance, rho: &str, chi: MultChar, ctx: &CharacterContext) -> Result<GridFunction> {
    let field = ctx.field();
    inst.check_field(field)?;
    if chi.q != field.q() {
        return Err(Error::FieldMismatch(chi.q as u64, field.q() as u64));
    }
    let trace = inst.rho_trace(rho)?;
    let shape = crate::grid::GridShape::new(field.q(), inst.n, u64::MAX)?;
    Ok(GridFunction::from_fn(shape, |x| {
        let fx = inst.f.eval(field, x);
        if fx.is_zero() {
            Complex::new(0.0, 0.0)
        } else {
            trace.eval(field, x) * ctx.chi(chi, fx)
        }
    }))
}

#[derive(Clone, Copy, Debug)]
pub struct TableOptions {
    pub mode: DftMode,
    pub tol: f64,
    pub cap: u64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { mode: DftMode::Fast, tol: DEFAULT_RATIO_TOL, cap: DEFAULT_GRID_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub chi: MultChar,
    pub c_re: f64,
    pub c_im: f64,
    pub abs_c: f64,
    /// Largest deviation of the ratio from its mean over `U^∨(k)`.
    pub ratio_residual: f64,
    /// Largest `|F(φ_χ)|` off `U^∨(k)`.
    pub support_residual: f64,
}

impl TableRow {
    pub fn c(&self) -> Complex {
        Complex::new(self.c_re, self.c_im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwistScore {
    pub name: String,
    /// Worst ratio residual over all characters.
    pub worst_residual: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharSumTable {
    pub instance: String,
    pub rho: String,
    pub p: u32,
    pub e: u32,
    pub q: u32,
    pub n: usize,
    pub d: usize,
    pub twist: String,
    pub twist_scores: Vec<TwistScore>,
    pub rows: Vec<TableRow>,
}

impl CharSumTable {
    pub fn unique_twist(&self) -> bool {
        self.twist_scores.iter().filter(|s| s.passes).count() == 1
    }

    pub fn max_ratio_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio_residual).fold(0.0, f64::max)
    }

    pub fn row(&self, k: u32) -> Option<&TableRow> {
        self.rows.get(k as usize).filter(|r| r.chi.k == k)
    }

    /// CSV with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("chi_exponent,C_re,C_im,abs_C,ratio_residual,support_residual\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.chi.k,
                sig12(r.c_re),
                sig12(r.c_im),
                sig12(r.abs_c),
                sig12(r.ratio_residual),
                sig12(r.support_residual)
            ));
        }
        out
    }
}

/// Scientific notation with 12 significant digits.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

const NO_LOG: u32 = u32::MAX;

/// Transforms `φ_χ` for every `χ`, selects the dual twist that makes the
/// ratio constant on `U^∨(k)` for all `χ` at once, and records `C_χ`.
pub fn compute_table(
    inst: &PvsInstance,
    rho: &str,
    fd: &FieldData,
    plan: &DftPlan,
    opts: &TableOptions,
) -> Result<CharSumTable> {
    let field = fd.field();
    let ctx = &fd.ctx;
    inst.check_field(field)?;
    let shape = plan.shape();
    if shape.q != field.q() || shape.n != inst.n {
        return Err(Error::Validation("transform plan does not match the instance".into()));
    }
    let trace = inst.rho_trace(rho)?;
    let twists = inst.dual_twist_candidates(rho)?;

    let log_or_none = |v: FieldElement| field.log(v).unwrap_or(NO_LOG);
    let size = shape.size();
    let pts: Vec<(u32, Complex, u32, Vec<Complex>)> = (0..size)
        .into_par_iter()
        .map(|idx| {
            let x = shape.point(idx);
            let fl = log_or_none(inst.f.eval(field, &x));
            let t = if fl == NO_LOG { Complex::new(0.0, 0.0) } else { trace.eval(field, &x) };
            let dl = log_or_none(inst.f_dual.eval(field, &x));
            let tv = if dl == NO_LOG { Vec::new() } else { twists.iter().map(|c| c.trace.eval(field, &x)).collect() };
            (fl, t, dl, tv)
        })
        .collect();

    let q1 = field.unit_order();
    let per_chi: Vec<(Vec<(Complex, f64)>, f64)> = (0..q1)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let values = pts
                .iter()
                .map(|(fl, t, _, _)| if *fl == NO_LOG { Complex::new(0.0, 0.0) } else { t * ctx.unit_root(k as u64 * *fl as u64) })
                .collect();
            let phi = GridFunction { shape, values, summands: 1 };
            let out = plan.transform(&phi, opts.mode)?;
            let mut support = 0.0f64;
            for ((_, _, dl, _), v) in pts.iter().zip(&out.values) {
                if *dl == NO_LOG {
                    support = support.max(v.norm());
                }
            }
            let scores = (0..twists.len())
                .map(|c| {
                    let mut ratios = Vec::new();
                    for ((_, _, dl, tv), v) in pts.iter().zip(&out.values) {
                        if *dl == NO_LOG {
                            continue;
                        }
                        let denom = tv[c] * ctx.unit_root((q1 - k) as u64 * *dl as u64);
                        if denom.norm() < 0.5 {
                            return (Complex::new(f64::NAN, 0.0), f64::INFINITY);
                        }
                        ratios.push(v / denom);
                    }
                    if ratios.is_empty() {
                        return (Complex::new(f64::NAN, 0.0), f64::INFINITY);
                    }
                    let mean = ratios.iter().sum::<Complex>() / ratios.len() as f64;
                    let dev = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
                    (mean, dev)
                })
                .collect();
            Ok((scores, support))
        })
        .collect::<Result<_>>()?;

    let twist_scores: Vec<TwistScore> = twists
        .iter()
        .enumerate()
        .map(|(c, t)| {
            let worst = per_chi.iter().map(|(s, _)| s[c].1).fold(0.0, f64::max);
            TwistScore { name: t.name.clone(), worst_residual: worst, passes: worst < opts.tol }
        })
        .collect();
    let best = (0..twists.len())
        .min_by(|&a, &b| twist_scores[a].worst_residual.total_cmp(&twist_scores[b].worst_residual))
        .ok_or_else(|| Error::Validation("instance has no dual-twist candidates".into()))?;
    if !twist_scores[best].passes {
        let (chi, residual) = per_chi
            .iter()
            .enumerate()
            .map(|(k, (s, _))| (k as u32, s[best].1))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        return Err(Error::NoDualTwist { candidate: twists[best].name.clone(), residual, chi });
    }

    let rows = per_chi
        .iter()
        .enumerate()
        .map(|(k, (s, support))| {
            let (c, dev) = s[best];
            TableRow {
                chi: MultChar { q: field.q(), k: k as u32 },
                c_re: c.re,
                c_im: c.im,
                abs_c: c.norm(),
                ratio_residual: dev,
                support_residual: *support,
            }
        })
        .collect();

    Ok(CharSumTable {
        instance: inst.name.clone(),
        rho: rho.into(),
        p: field.p(),
        e: field.e(),
        q: field.q(),
        n: inst.n,
        d: inst.d,
        twist: twists[best].name.clone(),
        twist_scores,
        rows,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub m_max: usize,
    pub tol: f64,
    /// Threshold on `|F(φ_χ)|` off `U^∨` for calling `χ` exceptional.
    pub support_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { m_max: 2, tol: DEFAULT_FIT_TOL, support_tol: DEFAULT_RATIO_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightDrop {
    pub chi: MultChar,
    pub c: u32,
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub instance: String,
    pub rho: String,
    pub q: u32,
    pub twist: String,
    pub m: usize,
    /// Characters of `k0` (the smallest subfield they descend to).
    pub lambdas: Vec<MultChar>,
    pub mus: Vec<MultChar>,
    /// The same characters pulled back to `k`.
    pub lambdas_k1: Vec<MultChar>,
    pub mus_k1: Vec<MultChar>,
    pub k0_q: u32,
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub zeta_abs: f64,
    pub zeta_arg: f64,
    /// The shift `a` as an element index of `k`, and its discrete log.
    pub shift: FieldElement,
    pub shift_log: u32,
    pub shift_in_prime_field: bool,
    pub fit_residual: f64,
    /// Largest `| |C_χ| - q^{-c(χ)/2} |`.
    pub weight_residual: f64,
    pub weight_drops: Vec<WeightDrop>,
    /// `{χ : c(χ) > 0}`.
    pub exceptional: Vec<MultChar>,
    /// Accepted splits (all equivalent to the reported one).
    pub accepted_splits: usize,
}

impl FitResult {
    pub fn zeta(&self) -> Complex {
        Complex::new(self.zeta_re, self.zeta_im)
    }

    /// `ζ χ^{-1}(a) prod g(χλ)/√q prod g(χ^{-1}μ)/√q` over `k`.
    pub fn predict(&self, fd: &FieldData, chi: MultChar) -> Result<Complex> {
        let p = gauss_product_local(&fd.gauss, chi, &self.lambdas_k1, &self.mus_k1)?;
        Ok(self.zeta() * fd.ctx.chi(chi.inverse(), self.shift) * p)
    }
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, m, &mut Vec::new(), &mut out);
    out
}

struct Candidate {
    lambdas: Vec<MultChar>,
    mus: Vec<MultChar>,
    shift_log: u32,
    zeta: Complex,
    residual: f64,
    predictions: Vec<Complex>,
}

/// Reads `m`, `(λ_i)`, `(μ_j)`, `ζ` and the shift off a complete table.
pub fn fit_exponents(table: &CharSumTable, fd: &FieldData, opts: &FitOptions) -> Result<FitResult> {
    let field = fd.field();
    let ctx = &fd.ctx;
    let q = field.q();
    if table.q != q {
        return Err(Error::FieldMismatch(table.q as u64, q as u64));
    }
    let q1 = field.unit_order();
    if table.rows.len() != q1 as usize || table.rows.iter().enumerate().any(|(k, r)| r.chi.k != k as u32) {
        return Err(Error::IncompleteTable(format!("expected {} rows in exponent order", q1)));
    }
    let lnq = (q as f64).ln();

    let mut drops = Vec::new();
    let mut weight_residual = 0.0f64;
    let mut total = 0usize;
    for r in &table.rows {
        if !(r.abs_c > 0.0) {
            return Err(Error::Fit(format!("C vanishes at chi exponent {}", r.chi.k)));
        }
        let raw = -2.0 * r.abs_c.ln() / lnq;
        let c = raw.round();
        if (raw - c).abs() >= WEIGHT_ROUNDING_TOL || c < 0.0 {
            return Err(Error::Fit(format!(
                "-2 log_q |C| = {raw:.6} at chi exponent {} is not a non-negative integer",
                r.chi.k
            )));
        }
        let c = c as u32;
        weight_residual = weight_residual.max((r.abs_c - (q as f64).powf(-(c as f64) / 2.0)).abs());
        if c > 0 {
            drops.push(WeightDrop { chi: r.chi, c, raw });
            total += c as usize;
        }
    }
    let d = table.d;
    if total < d || !(total - d).is_multiple_of(2) {
        return Err(Error::Fit(format!("total weight drop {total} is incompatible with d = {d}")));
    }
    let m = (total - d) / 2;
    if m > opts.m_max {
        return Err(Error::Fit(format!("weight drops imply m = {m} > m_max = {}", opts.m_max)));
    }

    let pool: Vec<MultChar> = drops.iter().flat_map(|w| std::iter::repeat_n(w.chi, w.c as usize)).collect();
    let generic = table
        .rows
        .iter()
        .find(|r| !drops.iter().any(|w| w.chi == r.chi) && r.support_residual < opts.support_tol)
        .or_else(|| table.rows.first())
        .unwrap()
        .chi;

    let mut seen = BTreeSet::new();
    let mut accepted: Vec<Candidate> = Vec::new();
    let mut best_rejected = f64::INFINITY;
    for pick in combinations(pool.len(), m) {
        let mut mus: Vec<MultChar> = pick.iter().map(|&i| pool[i]).collect();
        let mut lambdas: Vec<MultChar> =
            (0..pool.len()).filter(|i| !pick.contains(i)).map(|i| pool[i].inverse()).collect();
        mus.sort();
        lambdas.sort();
        if !seen.insert((lambdas.clone(), mus.clone())) {
            continue;
        }
        let products: Vec<Complex> = table
            .rows
            .iter()
            .map(|r| gauss_product_local(&fd.gauss, r.chi, &lambdas, &mus))
            .collect::<Result<_>>()?;
        for shift_log in 0..q1 {
            let twist = |k: u32| ctx.unit_root(((q1 - k) as u64 * shift_log as u64) % q1 as u64);
            let g = generic.k as usize;
            let zeta = table.rows[g].c() / (twist(generic.k) * products[g]);
            let predictions: Vec<Complex> =
                (0..q1).map(|k| zeta * twist(k) * products[k as usize]).collect();
            let residual = table
                .rows
                .iter()
                .zip(&predictions)
                .map(|(r, p)| (r.c() - p).norm())
                .fold(0.0, f64::max);
            if residual < opts.tol {
                accepted.push(Candidate { lambdas: lambdas.clone(), mus: mus.clone(), shift_log, zeta, residual, predictions });
            } else {
                best_rejected = best_rejected.min(residual);
            }
        }
    }

    if accepted.is_empty() {
        return Err(Error::Fit(format!("no split of the weight drops fits; best residual {best_rejected:e}")));
    }
    accepted.sort_by(|a, b| {
        let key = |c: &Candidate| {
            (c.lambdas.iter().map(|x| x.k).collect::<Vec<_>>(), c.mus.iter().map(|x| x.k).collect::<Vec<_>>(), c.shift_log)
        };
        key(a).cmp(&key(b))
    });
    let chosen = &accepted[0];
    for other in &accepted[1..] {
        let diff = chosen.predictions.iter().zip(&other.predictions).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff >= opts.tol {
            return Err(Error::AmbiguousFit(format!(
                "Λ = {:?}, M = {:?} and Λ = {:?}, M = {:?} both fit",
                chosen.lambdas.iter().map(|c| c.k).collect::<Vec<_>>(),
                chosen.mus.iter().map(|c| c.k).collect::<Vec<_>>(),
                other.lambdas.iter().map(|c| c.k).collect::<Vec<_>>(),
                other.mus.iter().map(|c| c.k).collect::<Vec<_>>(),
            )));
        }
    }

    let (k0_q, lambdas, mus) = descend_to_smallest(field, &chosen.lambdas, &chosen.mus)?;
    let shift = field.exp(chosen.shift_log as u64);
    let mut exceptional: Vec<MultChar> = drops.iter().map(|w| w.chi).collect();
    exceptional.sort();

    Ok(FitResult {
        instance: table.instance.clone(),
        rho: table.rho.clone(),
        q,
        twist: table.twist.clone(),
        m,
        lambdas,
        mus,
        lambdas_k1: chosen.lambdas.clone(),
        mus_k1: chosen.mus.clone(),
        k0_q,
        zeta_re: chosen.zeta.re,
        zeta_im: chosen.zeta.im,
        zeta_abs: chosen.zeta.norm(),
        zeta_arg: chosen.zeta.arg(),
        shift,
        shift_log: chosen.shift_log,
        shift_in_prime_field: field.is_in_prime_field(shift),
        fit_residual: chosen.residual,
        weight_residual,
        weight_drops: drops,
        exceptional,
        accepted_splits: accepted.len(),
    })
}

/// The smallest subfield all characters descend to, with the descended
/// characters.
fn descend_to_smallest(
    field: &FiniteField,
    lambdas: &[MultChar],
    mus: &[MultChar],
) -> Result<(u32, Vec<MultChar>, Vec<MultChar>)> {
    for e0 in (1..=field.e()).filter(|e0| field.e().is_multiple_of(*e0)) {
        let sub = FiniteField::new(field.p(), e0, None)?;
        let emb = SubfieldEmbedding::new(field, &sub)?;
        let down = |cs: &[MultChar]| cs.iter().map(|c| c.descend(&emb)).collect::<Option<Vec<_>>>();
        if let (Some(mut l), Some(mut m)) = (down(lambdas), down(mus)) {
            let back: Option<Vec<MultChar>> = l.iter().chain(&m).map(|c| c.pullback(&emb).ok()).collect();
            if back.as_deref() != Some(&lambdas.iter().chain(mus).copied().collect::<Vec<_>>()[..]) {
                continue;
            }
            l.sort();
            m.sort();
            return Ok((sub.q(), l, m));
        }
    }
    Err(Error::Fit("characters do not descend to any subfield".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportScan {
    pub support_exceptional: Vec<MultChar>,
    pub weight_exceptional: Vec<MultChar>,
    /// Largest support residual over characters outside the weight-exceptional set.
    pub max_generic_residual: f64,
    pub sets_match: bool,
}

/// Compares `{χ : F(φ_χ) ≠ 0 off U^∨}` with `{λ_i^{-1}} ∪ {μ_j}`.
pub fn support_scan(table: &CharSumTable, fit: &FitResult, tol: f64) -> SupportScan {
    let support: Vec<MultChar> = table.rows.iter().filter(|r| r.support_residual >= tol).map(|r| r.chi).collect();
    let weight: BTreeSet<MultChar> =
        fit.lambdas_k1.iter().map(|l| l.inverse()).chain(fit.mus_k1.iter().copied()).collect();
    let weight: Vec<MultChar> = weight.into_iter().collect();
    let max_generic_residual = table
        .rows
        .iter()
        .filter(|r| !weight.contains(&r.chi))
        .map(|r| r.support_residual)
        .fold(0.0, f64::max);
    SupportScan { sets_match: support == weight, support_exceptional: support, weight_exceptional: weight, max_generic_residual }
}

/// Multiset equality of character lists.
pub fn match_collections(a: &[MultChar], b: &[MultChar]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    a == b
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossReport {
    pub q1: u32,
    pub q2: u32,
    pub degree: u32,
    pub lambdas_match: bool,
    pub mus_match: bool,
    pub zeta_residual: f64,
    pub fit1: FitResult,
    pub fit2: FitResult,
    pub passed: bool,
}

/// `Λ(k_2) = Λ(k_1)∘N`, `M(k_2) = M(k_1)∘N` and `ζ(k_2) = ζ(k_1)^{[k_2:k_1]}`.
pub fn cross_extension_check(
    fit1: &FitResult,
    k1: &FiniteField,
    fit2: &FitResult,
    k2: &FiniteField,
    tol: f64,
) -> Result<CrossReport> {
    let emb = SubfieldEmbedding::new(k2, k1)?;
    let pull = |cs: &[MultChar]| cs.iter().map(|c| c.pullback(&emb)).collect::<Result<Vec<_>>>();
    let lambdas_match = match_collections(&pull(&fit1.lambdas_k1)?, &fit2.lambdas_k1);
    let mus_match = match_collections(&pull(&fit1.mus_k1)?, &fit2.mus_k1);
    let degree = emb.degree();
    let zeta_residual = (fit1.zeta().powu(degree) - fit2.zeta()).norm();
    Ok(CrossReport {
        q1: k1.q(),
        q2: k2.q(),
        degree,
        lambdas_match,
        mus_match,
        zeta_residual,
        passed: lambdas_match && mus_match && zeta_residual < tol,
        fit1: fit1.clone(),
        fit2: fit2.clone(),
    })
}

/// Table, fit and support scan for one instance over one field.
#[derive(Clone, Debug, Serialize)]
pub struct FieldRun {
    pub table: CharSumTable,
    pub fit: FitResult,
    pub scan: SupportScan,
}

pub fn run_field(
    inst: &PvsInstance,
    rho: &str,
    fd: &FieldData,
    table_opts: &TableOptions,
    fit_opts: &FitOptions,
) -> Result<FieldRun> {
    let plan = DftPlan::standard(fd.field(), &inst.pairing, table_opts.cap)?;
    let table = compute_table(inst, rho, fd, &plan, table_opts)?;
    let fit = fit_exponents(&table, fd, fit_opts)?;
    let scan = support_scan(&table, &fit, fit_opts.support_tol);
    Ok(FieldRun { table, fit, scan })
}
