//! Closed-form calculus in the Paley–Wiener space `PW_E`.
//!
//! A function `f(z) = ∫_E φ(t) e^{itz} dt` is stored through its density
//! `φ`, a finite sum of terms `p(t)·e^{iωt}` each supported on one part of
//! `E`, with `p` a polynomial of low degree. Evaluation, `L²(E)` pairings,
//! reproducing kernels, sub-band projections and division by `z − λ` all stay
//! inside this class and are computed exactly up to rounding.
//!
//! [`ExtSum`] carries elements `A(z) + z·B(z)` of `PW_E + z·PW_E`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{Interval, IntervalUnion};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Largest polynomial degree a stored term may carry.
pub const MAX_DEGREE: usize = 4;

/// Relative threshold for a planted zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Below this `|κ|` the factor `e^{iκt}` is treated as constant.
const KAPPA_ZERO: f64 = 1e-12;

/// `J_m(σ) = ∫_0^1 v^m e^{σv} dv` for `m = 0..=m_max`.
///
/// Upward recurrence is used while `m ≤ |σ|`, where it is stable; above that
/// the series `e^σ Σ_r (−σ)^r m!/(m+1+r)!`, whose terms decrease
/// monotonically, takes over.
fn unit_moments(sigma: C64, m_max: usize, out: &mut Vec<C64>) {
    out.clear();
    let r = sigma.norm();
    let e = sigma.exp();
    let j0 = if r < 0.5 {
        // (e^σ − 1)/σ = Σ σ^k/(k+1)!
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..30 {
            term *= sigma / (k as f64 + 1.0);
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (e - 1.0) / sigma
    };
    out.push(j0);
    for m in 1..=m_max {
        let jm = if (m as f64) <= r {
            (e - out[m - 1] * m as f64) / sigma
        } else {
            let neg = -sigma;
            let mut term = C64::new(1.0 / (m as f64 + 1.0), 0.0);
            let mut sum = term;
            for k in 1..400 {
                term *= neg / (m as f64 + 1.0 + k as f64);
                sum += term;
                if term.norm() < 1e-18 * sum.norm() {
                    break;
                }
            }
            e * sum
        };
        out.push(jm);
    }
}

/// Coefficients of `p(a + u)` as a polynomial in `u`.
fn taylor_shift(p: &[C64], a: f64) -> Vec<C64> {
    // repeated synthetic division (Horner shift)
    let mut q = p.to_vec();
    let n = q.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let carry = q[k + 1] * a;
            q[k] += carry;
        }
    }
    q
}

/// `∫_a^b p(t) e^{iκt} dt` in closed form.
pub fn integrate_poly_exp(p: &[C64], kappa: C64, a: f64, b: f64) -> C64 {
    if p.is_empty() {
        return C64::new(0.0, 0.0);
    }
    let len = b - a;
    let q = taylor_shift(p, a);
    let sigma = I * kappa * len;
    let mut moments = Vec::with_capacity(q.len());
    unit_moments(sigma, q.len() - 1, &mut moments);
    let mut acc = C64::new(0.0, 0.0);
    let mut lp = len;
    for (qr, jr) in q.iter().zip(&moments) {
        acc += qr * jr * lp;
        lp *= len;
    }
    (I * kappa * a).exp() * acc
}

fn poly_eval(p: &[C64], t: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * t + c)
}

fn poly_trim(p: &mut Vec<C64>) {
    while p.len() > 1 && p.last().is_some_and(|c| c.norm() == 0.0) {
        p.pop();
    }
}

fn poly_mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn poly_derivative(p: &[C64]) -> Vec<C64> {
    if p.len() <= 1 {
        return vec![C64::new(0.0, 0.0)];
    }
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

fn poly_antiderivative(p: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    out.extend(p.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)));
    out
}

fn poly_abs_max(p: &[C64], iv: Interval) -> f64 {
    let r = iv.a.abs().max(iv.b.abs());
    let mut acc = 0.0;
    let mut rp = 1.0;
    for c in p {
        acc += c.norm() * rp;
        rp *= r;
    }
    acc
}

/// One summand `p(t)·e^{iωt}` of a density, supported on part `interval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub interval: usize,
    pub poly: Vec<C64>,
    pub freq: C64,
}

impl ExpTerm {
    pub fn new(interval: usize, poly: Vec<C64>, freq: C64) -> Self {
        let mut poly = poly;
        if poly.is_empty() {
            poly.push(C64::new(0.0, 0.0));
        }
        poly_trim(&mut poly);
        ExpTerm { interval, poly, freq }
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    fn is_zero(&self) -> bool {
        self.poly.iter().all(|c| c.norm() == 0.0)
    }
}

/// A band-limited function with spectrum in `spectrum`, stored by its density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    pub spectrum: IntervalUnion,
    pub terms: Vec<ExpTerm>,
}

impl ExpSum {
    pub fn new(spectrum: IntervalUnion, terms: Vec<ExpTerm>) -> Result<Self> {
        for t in &terms {
            if t.interval >= spectrum.len() {
                return Err(Error::Range(format!(
                    "term interval index {} with {} parts",
                    t.interval,
                    spectrum.len()
                )));
            }
            if t.degree() > MAX_DEGREE {
                return Err(Error::DegreeOverflow(t.degree()));
            }
        }
        Ok(ExpSum { spectrum, terms }.simplified())
    }

    pub fn zero(spectrum: &IntervalUnion) -> Self {
        ExpSum { spectrum: spectrum.clone(), terms: Vec::new() }
    }

    /// The exponential `e_λ(t) = e^{iλt}` on every part of `spectrum`.
    pub fn exponential(spectrum: &IntervalUnion, lambda: C64) -> Self {
        Self::uniform(spectrum, C64::new(1.0, 0.0), lambda)
    }

    fn uniform(spectrum: &IntervalUnion, coeff: C64, freq: C64) -> Self {
        let terms = (0..spectrum.len()).map(|j| ExpTerm::new(j, vec![coeff], freq)).collect();
        ExpSum { spectrum: spectrum.clone(), terms }
    }

    /// Merges terms with equal part and frequency and drops zero terms.
    pub fn simplified(self) -> Self {
        let mut acc: BTreeMap<(usize, u64, u64), ExpTerm> = BTreeMap::new();
        for mut t in self.terms {
            // `+ 0.0` folds −0.0 into +0.0 so equal frequencies share a key
            t.freq = C64::new(t.freq.re + 0.0, t.freq.im + 0.0);
            let key = (t.interval, t.freq.re.to_bits(), t.freq.im.to_bits());
            match acc.get_mut(&key) {
                Some(existing) => {
                    if existing.poly.len() < t.poly.len() {
                        existing.poly.resize(t.poly.len(), C64::new(0.0, 0.0));
                    }
                    for (e, c) in existing.poly.iter_mut().zip(&t.poly) {
                        *e += c;
                    }
                    poly_trim(&mut existing.poly);
                }
                None => {
                    acc.insert(key, t);
                }
            }
        }
        let terms = acc.into_values().filter(|t| !t.is_zero()).collect();
        ExpSum { spectrum: self.spectrum, terms }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(ExpTerm::degree).max().unwrap_or(0)
    }

    /// `φ(t)`; zero off the spectrum.
    pub fn density(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .filter(|term| self.spectrum.part(term.interval).contains(t))
            .map(|term| poly_eval(&term.poly, C64::new(t, 0.0)) * (I * term.freq * t).exp())
            .sum()
    }

    /// `f(z) = ∫_E φ(t) e^{itz} dt`.
    pub fn eval(&self, z: C64) -> C64 {
        self.terms
            .iter()
            .map(|term| {
                let iv = self.spectrum.part(term.interval);
                integrate_poly_exp(&term.poly, term.freq + z, iv.a, iv.b)
            })
            .sum()
    }

    /// `f^{(r)}(z) = ∫_E (it)^r φ(t) e^{itz} dt`.
    pub fn eval_derivative(&self, z: C64, r: usize) -> C64 {
        let mut factor = vec![C64::new(0.0, 0.0); r + 1];
        factor[r] = I.powu(r as u32);
        self.terms
            .iter()
            .map(|term| {
                let iv = self.spectrum.part(term.interval);
                integrate_poly_exp(&poly_mul(&term.poly, &factor), term.freq + z, iv.a, iv.b)
            })
            .sum()
    }

    /// `f(z)/(z − λ)`, switching to the Taylor series of the quotient for
    /// `|z − λ| < 1e−3`. Only meaningful when `f(λ) = 0`.
    pub fn eval_over_pole(&self, lambda: C64, z: C64) -> C64 {
        let d = z - lambda;
        if d.norm() < 1e-3 {
            let mut acc = C64::new(0.0, 0.0);
            let mut dp = C64::new(1.0, 0.0);
            let mut fact = 1.0;
            for r in 1..=6 {
                fact *= r as f64;
                acc += self.eval_derivative(lambda, r) * dp / fact;
                dp *= d;
            }
            acc
        } else {
            self.eval(z) / d
        }
    }

    /// Upper bound for `sup_{x∈ℝ} |f(x)|`: the `L¹` norm bound of the density.
    pub fn l1_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let iv = self.spectrum.part(term.interval);
                let growth = (-(term.freq.im) * iv.a).exp().max((-(term.freq.im) * iv.b).exp());
                iv.len() * poly_abs_max(&term.poly, iv) * growth
            })
            .sum()
    }

    /// Size of `|f(λ)|` that counts as "zero": `ZERO_TOL · max(1, bound)`
    /// where `bound` majorizes `∫|φ(t) e^{itλ}| dt`.
    pub fn zero_tolerance(&self, lambda: C64) -> f64 {
        let bound: f64 = self
            .terms
            .iter()
            .map(|term| {
                let iv = self.spectrum.part(term.interval);
                let g = -(term.freq.im + lambda.im);
                iv.len() * poly_abs_max(&term.poly, iv) * (g * iv.a).exp().max((g * iv.b).exp())
            })
            .sum();
        ZERO_TOL * bound.max(1.0)
    }

    pub fn scaled(&self, c: C64) -> ExpSum {
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm { poly: t.poly.iter().map(|p| p * c).collect(), ..t.clone() })
            .collect();
        ExpSum { spectrum: self.spectrum.clone(), terms }.simplified()
    }

    pub fn add(&self, other: &ExpSum) -> Result<ExpSum> {
        if self.spectrum != other.spectrum {
            return Err(Error::SpectrumMismatch);
        }
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(ExpSum { spectrum: self.spectrum.clone(), terms }.simplified())
    }

    pub fn sub(&self, other: &ExpSum) -> Result<ExpSum> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// `Σ c_k f_k` over functions sharing one spectrum.
    pub fn linear_combination(spectrum: &IntervalUnion, parts: &[(C64, &ExpSum)]) -> Result<ExpSum> {
        let mut terms = Vec::new();
        for (c, f) in parts {
            if &f.spectrum != spectrum {
                return Err(Error::SpectrumMismatch);
            }
            terms.extend(f.terms.iter().map(|t| ExpTerm {
                poly: t.poly.iter().map(|p| p * c).collect(),
                ..t.clone()
            }));
        }
        Ok(ExpSum { spectrum: spectrum.clone(), terms }.simplified())
    }

    /// Keeps the terms living on the listed parts.
    pub fn project_parts(&self, parts: &[usize]) -> ExpSum {
        let terms = self.terms.iter().filter(|t| parts.contains(&t.interval)).cloned().collect();
        ExpSum { spectrum: self.spectrum.clone(), terms }
    }

    /// `L²(E)` norm of the density.
    pub fn norm(&self) -> f64 {
        inner_product(self, self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }
}

pub fn eval(f: &ExpSum, z: C64) -> C64 {
    f.eval(z)
}

/// `∫_E φ_f(t) · conj(φ_g(t)) dt`.
pub fn inner_product(f: &ExpSum, g: &ExpSum) -> Result<C64> {
    if f.spectrum != g.spectrum {
        return Err(Error::SpectrumMismatch);
    }
    let conj_g: Vec<(usize, Vec<C64>, C64)> = g
        .terms
        .iter()
        .map(|t| (t.interval, t.poly.iter().map(|c| c.conj()).collect(), t.freq.conj()))
        .collect();
    let pair_sum = |tf: &ExpTerm| -> C64 {
        let iv = f.spectrum.part(tf.interval);
        conj_g
            .iter()
            .filter(|(j, _, _)| *j == tf.interval)
            .map(|(_, q, nu)| integrate_poly_exp(&poly_mul(&tf.poly, q), tf.freq - nu, iv.a, iv.b))
            .sum()
    };
    #[cfg(feature = "parallel")]
    let partial: Vec<C64> = {
        use rayon::prelude::*;
        f.terms.par_iter().map(pair_sum).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<C64> = f.terms.iter().map(pair_sum).collect();
    Ok(partial.into_iter().sum())
}

/// The pairing of `PW_E` as a subspace of `L²(ℝ)`: `2π` times the density
/// pairing. With this normalization `⟨f, k_λ⟩ = f(λ)`.
pub fn pw_inner_product(f: &ExpSum, g: &ExpSum) -> Result<C64> {
    Ok(inner_product(f, g)? * (2.0 * PI))
}

/// Reproducing kernel `k_λ(z) = (1/2π) ∫_E e^{it(z − λ̄)} dt`.
pub fn kernel(e: &IntervalUnion, lambda: C64) -> ExpSum {
    ExpSum::uniform(e, C64::new(1.0 / (2.0 * PI), 0.0), -lambda.conj())
}

/// Projection onto `PW_onto`, `onto` being a union of whole parts of the
/// spectrum of `f`.
pub fn project(f: &ExpSum, onto: &IntervalUnion) -> Result<ExpSum> {
    let idx = f.spectrum.sub_union_indices(onto)?;
    Ok(f.project_parts(&idx))
}

/// Result of dividing out a zero: `f(z)/(z − λ) = quotient(z) + Σ_j c_j k^{L^j}_{λ̄}(z)`.
#[derive(Debug, Clone)]
pub struct Division {
    pub lambda: C64,
    pub quotient: ExpSum,
    pub coeffs: Vec<C64>,
    /// Correction kernels `k^{L^j}_{λ̄}`, each on its own gap.
    pub gap_kernels: Vec<ExpSum>,
}

impl Division {
    pub fn eval(&self, z: C64) -> C64 {
        self.quotient.eval(z)
            + self.coeffs.iter().zip(&self.gap_kernels).map(|(c, k)| c * k.eval(z)).sum::<C64>()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.norm() <= tol)
    }
}

/// Divides `f` by `z − λ` at a zero `λ`.
///
/// The quotient density is `−iΦ(t)e^{−iλt}` with `Φ(x) = ∫_{a_1}^x φ(t)e^{itλ} dt`.
/// `Φ` is constant on each gap `L^j`; those constants give the kernel
/// coefficients `c_j = −2πi Φ(b_j)`, `Φ(b_j)` being the value at `λ` of the
/// projection onto the first `j` parts.
pub fn divide_out_zero(f: &ExpSum, lambda: C64) -> Result<Division> {
    let at = f.eval(lambda);
    let tol = f.zero_tolerance(lambda);
    if at.norm() > tol {
        return Err(Error::NotAZero { point: format!("{lambda}"), value: at.norm(), tol });
    }
    let e = &f.spectrum;
    let mut terms: Vec<ExpTerm> = Vec::new();
    let mut phi_start = C64::new(0.0, 0.0);
    let mut coeffs = Vec::with_capacity(e.len().saturating_sub(1));
    for j in 0..e.len() {
        let iv = e.part(j);
        // constant part of Φ on this piece, collected as the coefficient of e^{-iλt}
        let mut constant = phi_start;
        let mut phi_end = phi_start;
        for term in f.terms.iter().filter(|t| t.interval == j) {
            let kappa = term.freq + lambda;
            if kappa.norm() < KAPPA_ZERO {
                let prim = poly_antiderivative(&term.poly);
                if prim.len() - 1 > MAX_DEGREE {
                    return Err(Error::DegreeOverflow(prim.len() - 1));
                }
                let pa = poly_eval(&prim, iv.a.into());
                let pb = poly_eval(&prim, iv.b.into());
                constant -= pa;
                phi_end += pb - pa;
                terms.push(ExpTerm::new(j, prim.iter().map(|c| -I * c).collect(), -lambda));
            } else {
                // e^{iκt} Q(t) with Q = Σ_r (−1)^r p^{(r)} / (iκ)^{r+1}
                let ik = I * kappa;
                let mut q = vec![C64::new(0.0, 0.0); term.poly.len()];
                let mut deriv = term.poly.clone();
                let mut denom = ik;
                let mut sign = 1.0;
                for _ in 0..term.poly.len() {
                    for (qk, dk) in q.iter_mut().zip(&deriv) {
                        *qk += dk * sign / denom;
                    }
                    deriv = poly_derivative(&deriv);
                    denom *= ik;
                    sign = -sign;
                }
                let qa = poly_eval(&q, iv.a.into()) * (ik * iv.a).exp();
                let qb = poly_eval(&q, iv.b.into()) * (ik * iv.b).exp();
                constant -= qa;
                phi_end += qb - qa;
                terms.push(ExpTerm::new(j, q.iter().map(|c| -I * c).collect(), term.freq));
            }
        }
        terms.push(ExpTerm::new(j, vec![-I * constant], -lambda));
        if j + 1 < e.len() {
            coeffs.push(-2.0 * PI * I * phi_end);
        }
        phi_start = phi_end;
    }
    let quotient = ExpSum { spectrum: e.clone(), terms }.simplified();
    let gap_kernels = match e.gaps() {
        Ok(gaps) => gaps
            .iter()
            .map(|g| kernel(&IntervalUnion::single(g.a, g.b).expect("gap is nondegenerate"), lambda.conj()))
            .collect(),
        Err(_) => Vec::new(),
    };
    Ok(Division { lambda, quotient, coeffs, gap_kernels })
}

/// True iff every per-part projection `f^j` vanishes at the zero `λ`, i.e.
/// `f(z)/(z − λ)` stays in `PW_E`.
pub fn divisibility_check(f: &ExpSum, lambda: C64) -> Result<bool> {
    let at = f.eval(lambda);
    let tol = f.zero_tolerance(lambda);
    if at.norm() > tol {
        return Err(Error::NotAZero { point: format!("{lambda}"), value: at.norm(), tol });
    }
    Ok((0..f.spectrum.len()).all(|j| {
        let fj = f.project_parts(&[j]);
        fj.eval(lambda).norm() <= fj.zero_tolerance(lambda).max(tol)
    }))
}

/// An element `A(z) + z·B(z)` of `PW_E + z·PW_E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtSum {
    pub base: ExpSum,
    pub zpart: ExpSum,
}

impl ExtSum {
    pub fn from_pw(f: ExpSum) -> Self {
        let zpart = ExpSum::zero(&f.spectrum);
        ExtSum { base: f, zpart }
    }

    /// `(z − μ)·f(z)`.
    pub fn times_linear(f: &ExpSum, mu: C64) -> Self {
        ExtSum { base: f.scaled(-mu), zpart: f.clone() }
    }

    pub fn spectrum(&self) -> &IntervalUnion {
        &self.base.spectrum
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.base.eval(z) + z * self.zpart.eval(z)
    }

    /// Spectral piece on the listed parts; multiplication by `z` does not
    /// move spectra.
    pub fn project_parts(&self, parts: &[usize]) -> ExtSum {
        ExtSum { base: self.base.project_parts(parts), zpart: self.zpart.project_parts(parts) }
    }

    pub fn linear_combination(spectrum: &IntervalUnion, parts: &[(C64, &ExtSum)]) -> Result<ExtSum> {
        let bases: Vec<(C64, &ExpSum)> = parts.iter().map(|(c, f)| (*c, &f.base)).collect();
        let zparts: Vec<(C64, &ExpSum)> = parts.iter().map(|(c, f)| (*c, &f.zpart)).collect();
        Ok(ExtSum {
            base: ExpSum::linear_combination(spectrum, &bases)?,
            zpart: ExpSum::linear_combination(spectrum, &zparts)?,
        })
    }

    /// Divides by `z − λ`: `A + zB = (z − λ)B + (A + λB)`, and the second
    /// summand goes through [`divide_out_zero`]. The returned coefficients
    /// vanish exactly when the quotient lies in `PW_E`.
    pub fn divide(&self, lambda: C64) -> Result<(ExpSum, Division)> {
        let h = self.base.add(&self.zpart.scaled(lambda))?;
        let div = divide_out_zero(&h, lambda)?;
        let q = self.zpart.add(&div.quotient)?;
        Ok((q, div))
    }

    /// `(A + λB)` is the PW part carrying the per-part values at `λ`.
    pub fn divisibility_check(&self, lambda: C64) -> Result<bool> {
        divisibility_check(&self.base.add(&self.zpart.scaled(lambda))?, lambda)
    }
}
