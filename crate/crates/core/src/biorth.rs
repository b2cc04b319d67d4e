//! Explicit biorthogonal elements from determinant formulas.
//!
//! With `f_{λ_k}` the section duals, `F_k(z) = (z − λ_k) f_{λ_k}(z)` vanishes on
//! all of `Λ`. Splitting `F_k = Σ_j F_k^j` by spectral part, the combination
//! `Σ_k a_k^l F_k` with cofactors `a_k^l = (−1)^{k+l} det(F_i^j(λ))_{i≠k, j≠l}`
//! has every part vanishing at `λ`, hence is divisible by `z − λ` inside
//! `PW_E`, and the quotient is biorthogonal to `Λ ∖ {λ}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gram::DualSystem;
use crate::intervals::IntervalUnion;
use crate::pw::{inner_product, ExpSum, ExtSum};

pub type C64 = Complex64;

/// Anchor candidates: the points of `Λ` nearest the origin.
pub const ANCHOR_POOL: usize = 20;

/// Below this score no tuple counts as independent.
pub const MIN_SCORE: f64 = 1e-10;

/// Deterministic probe points used for scores and scales.
pub fn probe_grid() -> Vec<C64> {
    let mut out = Vec::with_capacity(32);
    for &y in &[-0.5, 0.5] {
        for i in 0..16 {
            out.push(C64::new(-10.0 + 20.0 * (i as f64 + 0.37) / 16.0, y));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FTuple {
    pub anchors: Vec<C64>,
    /// `F_k = (z − λ_k) f_{λ_k}`.
    pub f: Vec<ExtSum>,
    /// `projections[k][j] = F_k^j`.
    pub projections: Vec<Vec<ExtSum>>,
}

impl FTuple {
    pub fn spectrum(&self) -> &IntervalUnion {
        self.f[0].spectrum()
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// `M[k][j] = F_k^j(z)`.
    pub fn matrix_at(&self, z: C64) -> DMatrix<C64> {
        let n = self.len();
        DMatrix::from_fn(n, self.spectrum().len(), |k, j| self.projections[k][j].eval(z))
    }

    /// `S(z) = det(F_k^j(z))`.
    pub fn s_det(&self, z: C64) -> C64 {
        let m = self.matrix_at(z);
        if m.nrows() != m.ncols() {
            return C64::new(f64::NAN, f64::NAN);
        }
        m.determinant()
    }

    /// `Σ_k (−1)^{k+1} F_k(z) · det(F_i^j(z))_{i≠k, j≠1}`: expansion along
    /// the first column after replacing it by the column sums `F_k`.
    pub fn s_expansion(&self, z: C64) -> C64 {
        let m = self.matrix_at(z);
        let n = m.nrows();
        (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                self.f[k].eval(z) * minor(&m, k, 0) * sign
            })
            .sum()
    }
}

fn minor(m: &DMatrix<C64>, row: usize, col: usize) -> C64 {
    if m.nrows() == 1 {
        return C64::new(1.0, 0.0);
    }
    m.clone().remove_row(row).remove_column(col).determinant()
}

/// Assembles `F_k` for anchors in `Λ` using the duals of `dual`.
pub fn build_f(anchors: &[C64], dual: &DualSystem) -> Result<FTuple> {
    let e = dual.domain();
    let mut f = Vec::with_capacity(anchors.len());
    let mut projections = Vec::with_capacity(anchors.len());
    for &a in anchors {
        let idx = dual.index_of(a).ok_or_else(|| Error::AnchorNotInSet(format!("{a}")))?;
        let fk = ExtSum::times_linear(&dual.pw_element(idx), a);
        projections.push((0..e.len()).map(|j| fk.project_parts(&[j])).collect());
        f.push(fk);
    }
    Ok(FTuple { anchors: anchors.to_vec(), f, projections })
}

fn smallest_singular_value(cols: &[&Vec<C64>]) -> f64 {
    let rows = cols[0].len();
    let m = DMatrix::from_fn(rows, cols.len(), |r, c| {
        let norm = cols[c].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        cols[c][r] / norm
    });
    m.singular_values().iter().fold(f64::INFINITY, |a, &v| a.min(v))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Picks `n` anchors from the pool maximizing the smallest singular value of
/// the normalized probe samples of `F_1..F_n`.
pub fn select_independent(dual: &DualSystem, n: usize) -> Result<(Vec<C64>, f64)> {
    if n == 0 || n > 3 {
        return Err(Error::Unsupported(format!("tuples of size {n}")));
    }
    if n != dual.domain().len() {
        return Err(Error::Range(format!("{n} anchors for a spectrum with {} parts", dual.domain().len())));
    }
    let pool = crate::gram::centered_window(dual.freqs(), ANCHOR_POOL.min(dual.freqs().len()));
    if pool.len() < n {
        return Err(Error::Size(n, pool.len()));
    }
    let probes = probe_grid();
    let sample = |lam: &C64| -> Vec<C64> {
        let idx = dual.index_of(*lam).expect("pool point is in the section");
        let f = dual.pw_element(idx);
        probes.iter().map(|&z| (z - lam) * f.eval(z)).collect()
    };
    #[cfg(feature = "parallel")]
    let samples: Vec<Vec<C64>> = {
        use rayon::prelude::*;
        pool.par_iter().map(sample).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<Vec<C64>> = pool.iter().map(sample).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for tuple in subsets(pool.len(), n) {
        let cols: Vec<&Vec<C64>> = tuple.iter().map(|&i| &samples[i]).collect();
        let score = smallest_singular_value(&cols);
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((tuple, score));
        }
    }
    let (tuple, score) = best.expect("at least one tuple");
    if !(score >= MIN_SCORE) {
        return Err(Error::DegenerateTuple(score));
    }
    Ok((tuple.into_iter().map(|i| pool[i]).collect(), score))
}

/// A biorthogonal element `c · (Σ_k a_k F_k)(z)/(z − λ)`.
#[derive(Debug, Clone, Serialize)]
pub struct BiorthElement {
    pub pole: C64,
    /// Which cofactor column produced the numerator (1-based).
    pub column: usize,
    pub cofactors: Vec<C64>,
    pub numerator: ExtSum,
    /// `numerator/(z − λ)` before normalization.
    pub quotient: ExpSum,
    pub normalization: C64,
}

impl BiorthElement {
    /// `c · quotient`, normalized to `1` at the pole.
    pub fn normalized(&self) -> ExpSum {
        self.quotient.scaled(self.normalization)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.quotient.eval(z) * self.normalization
    }

    /// `sup |numerator|` over the probe grid.
    pub fn scale(&self) -> f64 {
        probe_grid().iter().map(|&z| self.numerator.eval(z).norm()).fold(0.0, f64::max)
    }
}

/// Cofactors `a_k^l` of `M = (F_k^j(λ))` for column `l` (1-based).
pub fn cofactors(m: &DMatrix<C64>, l: usize) -> Vec<C64> {
    (0..m.nrows())
        .map(|k| {
            let sign = if (k + l - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            minor(m, k, l - 1) * sign
        })
        .collect()
}

/// `max_{j} |Σ_k a_k^l F_k^j(λ)|` for every column `l`.
pub fn cofactor_identity_residual(ft: &FTuple, lambda: C64) -> f64 {
    let m = ft.matrix_at(lambda);
    let n = m.nrows();
    let mut worst = 0.0f64;
    for l in 1..=n {
        let a = cofactors(&m, l);
        for j in 0..m.ncols() {
            let r: C64 = (0..n).map(|k| a[k] * m[(k, j)]).sum();
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// The element for column `l` of the cofactor matrix at `λ ∈ Λ`.
pub fn biorth_element(ft: &FTuple, lambda: C64, l: usize) -> Result<BiorthElement> {
    let n = ft.len();
    if ft.spectrum().len() != n {
        return Err(Error::Range(format!("{n} anchors for {} parts", ft.spectrum().len())));
    }
    if l == 0 || l > n {
        return Err(Error::Range(format!("cofactor column {l} outside 1..={n}")));
    }
    let m = ft.matrix_at(lambda);
    let a = cofactors(&m, l);
    let parts: Vec<(C64, &ExtSum)> = a.iter().copied().zip(ft.f.iter()).collect();
    let numerator = ExtSum::linear_combination(ft.spectrum(), &parts)?;
    let scale = probe_grid().iter().map(|&z| numerator.eval(z).norm()).fold(0.0, f64::max);
    if !(scale > 1e-300) {
        return Err(Error::NullElement);
    }
    let (quotient, division) = numerator.divide(lambda)?;
    let at_pole = quotient.eval(lambda);
    let tol = 1e-8 * scale.max(at_pole.norm());
    if !division.is_pure(tol) {
        return Err(Error::NotAZero {
            point: format!("{lambda} (per-part)"),
            value: division.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max),
            tol,
        });
    }
    if at_pole.norm() <= 1e-12 * scale {
        return Err(Error::NullElement);
    }
    Ok(BiorthElement { pole: lambda, column: l, cofactors: a, numerator, quotient, normalization: 1.0 / at_pole })
}

/// Two-interval element: column 2 is `F₁¹(λ)F₂ − F₂¹(λ)F₁`, column 1 the
/// second form `F₂²(λ)F₁ − F₁²(λ)F₂`. Returns both.
pub fn biorth_two(ft: &FTuple, lambda: C64) -> Result<(BiorthElement, BiorthElement)> {
    if ft.len() != 2 {
        return Err(Error::Range(format!("{} anchors (two required)", ft.len())));
    }
    Ok((biorth_element(ft, lambda, 2)?, biorth_element(ft, lambda, 1)?))
}

pub fn biorth_three(ft: &FTuple, lambda: C64, l: usize) -> Result<BiorthElement> {
    if ft.len() != 3 {
        return Err(Error::Range(format!("{} anchors (three required)", ft.len())));
    }
    biorth_element(ft, lambda, l)
}

/// `‖f̂ − f_λ‖/‖f_λ‖` in `L²(E)` between the normalized formula element and the
/// dual element of `dual` at the same pole (both are `1` at `λ`).
pub fn cross_validate(elt: &BiorthElement, dual: &DualSystem) -> Result<f64> {
    let idx = dual.index_of(elt.pole).ok_or_else(|| Error::AnchorNotInSet(format!("{}", elt.pole)))?;
    let reference = dual.pw_element(idx);
    let diff = elt.normalized().sub(&reference)?;
    let num = inner_product(&diff, &diff)?.re.max(0.0).sqrt();
    Ok(num / reference.norm())
}
