//! Finite sections of exponential systems: Gram matrices, Riesz bounds,
//! biorthogonal duals and completeness residuals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervals::IntervalUnion;
use crate::pw::{integrate_poly_exp, inner_product, ExpSum, ExpTerm};

pub type C64 = Complex64;

/// Largest Gram section assembled.
pub const MAX_GRAM: usize = 5000;

/// `λ_min ≤ ILL_CONDITIONED · λ_max` counts as singular.
pub const ILL_CONDITIONED: f64 = 1e-10;

/// `G_{nm} = ⟨e_{λ_n}, e_{λ_m}⟩_{L²(E)} = ∫_E e^{i(λ_n − λ̄_m)t} dt`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub domain: IntervalUnion,
    pub freqs: Vec<C64>,
    pub entries: DMatrix<C64>,
}

fn exp_integral(e: &IntervalUnion, kappa: C64) -> C64 {
    let one = [C64::new(1.0, 0.0)];
    e.parts().iter().map(|iv| integrate_poly_exp(&one, kappa, iv.a, iv.b)).sum()
}

pub fn gram_matrix(e: &IntervalUnion, freqs: &[C64]) -> Result<GramMatrix> {
    let n = freqs.len();
    if n > MAX_GRAM {
        return Err(Error::Size(n, MAX_GRAM));
    }
    let row = |i: usize| -> Vec<C64> {
        (0..n)
            .map(|j| if j < i { C64::new(0.0, 0.0) } else { exp_integral(e, freqs[i] - freqs[j].conj()) })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<C64>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<C64>> = (0..n).map(row).collect();
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (i, r) in rows.into_iter().enumerate() {
        for j in i..n {
            g[(i, j)] = r[j];
            g[(j, i)] = r[j].conj();
        }
        g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
    }
    Ok(GramMatrix { domain: e.clone(), freqs: freqs.to_vec(), entries: g })
}

/// Hermitian eigendecomposition with eigenvalues ascending.
fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `H⁻¹` through the eigendecomposition, refusing near-singular sections.
fn hermitian_inverse(m: &DMatrix<C64>) -> Result<(DMatrix<C64>, f64, f64)> {
    let (vals, vecs) = eigh(m);
    let (lo, hi) = (vals[0], *vals.last().unwrap_or(&0.0));
    if !(hi > 0.0) || lo <= ILL_CONDITIONED * hi {
        return Err(Error::IllConditioned { ratio: if hi > 0.0 { lo / hi } else { 0.0 } });
    }
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for (c, v) in vals.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] /= *v;
        }
    }
    Ok((&scaled * vecs.adjoint(), lo, hi))
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.entries).0
    }

    /// `D^{-1/2} G D^{-1/2}` with `D = diag G`: Gram matrix of unit-norm exponentials.
    pub fn normalized(&self) -> DMatrix<C64> {
        let d: Vec<f64> = (0..self.len()).map(|i| self.entries[(i, i)].re.sqrt()).collect();
        DMatrix::from_fn(self.len(), self.len(), |r, c| self.entries[(r, c)] / (d[r] * d[c]))
    }

    pub fn max_abs_diff(&self, other: &GramMatrix) -> f64 {
        (&self.entries - &other.entries).iter().fold(0.0, |a, v| a.max(v.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszBounds {
    pub window: usize,
    /// Extreme eigenvalues of the raw section.
    pub a: f64,
    pub b: f64,
    /// Extreme eigenvalues after normalizing each exponential in `L²(E)`.
    pub a_normalized: f64,
    pub b_normalized: f64,
}

impl RieszBounds {
    pub fn cond(&self) -> f64 {
        self.b_normalized / self.a_normalized
    }
}

/// Indices of the `n` points nearest the origin, ordered by real part.
pub fn centered_indices(freqs: &[C64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..freqs.len()).collect();
    idx.sort_by(|&a, &b| freqs[a].norm().total_cmp(&freqs[b].norm()).then(freqs[a].re.total_cmp(&freqs[b].re)));
    idx.truncate(n);
    idx.sort_by(|&a, &b| freqs[a].re.total_cmp(&freqs[b].re).then(freqs[a].im.total_cmp(&freqs[b].im)));
    idx
}

/// The centered window of `n` frequencies.
pub fn centered_window(freqs: &[C64], n: usize) -> Vec<C64> {
    centered_indices(freqs, n).into_iter().map(|i| freqs[i]).collect()
}

/// Section eigenvalue bounds over centered windows.
pub fn riesz_bounds(e: &IntervalUnion, freqs: &[C64], windows: &[usize]) -> Result<Vec<RieszBounds>> {
    windows
        .iter()
        .map(|&w| {
            if w > freqs.len() || w == 0 {
                return Err(Error::Size(w, freqs.len()));
            }
            let g = gram_matrix(e, &centered_window(freqs, w))?;
            let raw = g.eigenvalues();
            let norm = eigh(&g.normalized()).0;
            Ok(RieszBounds {
                window: w,
                a: raw[0],
                b: raw[w - 1],
                a_normalized: norm[0],
                b_normalized: norm[w - 1],
            })
        })
        .collect()
}

/// `C = G⁻¹`. The `L²(E)` dual of `e_{λ_n}` is `g_n = Σ_m conj(C_{mn}) e_{λ_m}`,
/// so that `⟨e_{λ_k}, g_n⟩ = (GC)_{kn} = δ_{kn}`.
#[derive(Debug, Clone)]
pub struct DualSystem {
    pub gram: GramMatrix,
    pub coeffs: DMatrix<C64>,
    pub eig_min: f64,
    pub eig_max: f64,
}

pub fn dual_system(e: &IntervalUnion, freqs: &[C64]) -> Result<DualSystem> {
    let gram = gram_matrix(e, freqs)?;
    let (coeffs, eig_min, eig_max) = hermitian_inverse(&gram.entries)?;
    Ok(DualSystem { gram, coeffs, eig_min, eig_max })
}

impl DualSystem {
    pub fn freqs(&self) -> &[C64] {
        &self.gram.freqs
    }

    pub fn domain(&self) -> &IntervalUnion {
        &self.gram.domain
    }

    pub fn index_of(&self, lambda: C64) -> Option<usize> {
        self.freqs().iter().position(|f| (f - lambda).norm() <= 1e-12 * lambda.norm().max(1.0))
    }

    /// `max |G·C − I|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let n = self.gram.len();
        let p = &self.gram.entries * &self.coeffs;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p[(r, c)] - want).norm());
            }
        }
        worst
    }

    /// `g_n` as an element of `L²(E)`.
    pub fn dual_element(&self, n: usize) -> ExpSum {
        let e = self.domain();
        let terms = (0..e.len())
            .flat_map(|j| {
                self.freqs().iter().enumerate().map(move |(m, &lam)| ExpTerm::new(j, vec![self.coeffs[(m, n)].conj()], lam))
            })
            .collect();
        ExpSum::new(e.clone(), terms).expect("degree-0 terms on valid parts")
    }

    /// The `PW_E` function `f_n(z) = ∫_E conj(g_n(t)) e^{itz} dt`, which
    /// satisfies `f_n(λ_k) = δ_{kn}`.
    pub fn pw_element(&self, n: usize) -> ExpSum {
        let e = self.domain();
        let terms = (0..e.len())
            .flat_map(|j| {
                self.freqs().iter().enumerate().map(move |(m, &lam)| ExpTerm::new(j, vec![self.coeffs[(m, n)]], -lam.conj()))
            })
            .collect();
        ExpSum::new(e.clone(), terms).expect("degree-0 terms on valid parts")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub truncation: usize,
    pub residual_exponentials: f64,
    pub residual_duals: f64,
}

/// `‖f − Σ c_m u_m‖ / ‖f‖` where the `u_m` have Gram matrix `h` and
/// `rhs_m = ⟨f, u_m⟩`; solved through the eigendecomposition.
fn projection_residual(f: &ExpSum, norm_f: f64, basis: &[ExpSum], h: &DMatrix<C64>, rhs: &DVector<C64>) -> Result<f64> {
    let (inv, _, _) = hermitian_inverse(h)?;
    // Σ_m c_m ⟨u_m, u_k⟩ = ⟨f, u_k⟩  ⇔  hᵀ c = rhs, and hᵀ = conj(h)
    let c = inv.map(|v| v.conj()) * rhs;
    let mut parts: Vec<(C64, &ExpSum)> = vec![(C64::new(1.0, 0.0), f)];
    parts.extend(c.iter().zip(basis).map(|(ci, u)| (-*ci, u)));
    let r = ExpSum::linear_combination(&f.spectrum, &parts)?;
    Ok(r.norm() / norm_f)
}

/// Relative distance from `f` to the span of the first `T` exponentials and,
/// separately, of the first `T` duals of the full section, for each `T`.
pub fn completeness_residual(
    e: &IntervalUnion,
    freqs: &[C64],
    f: &ExpSum,
    truncations: &[usize],
) -> Result<Vec<Residual>> {
    if &f.spectrum != e {
        return Err(Error::SpectrumMismatch);
    }
    let t_max = truncations.iter().copied().max().unwrap_or(0);
    if t_max > freqs.len() {
        return Err(Error::Size(t_max, freqs.len()));
    }
    let pool = centered_window(freqs, t_max);
    let dual = dual_system(e, &pool)?;
    let norm_f = f.norm();
    // ⟨f, e_m⟩ for all pool points
    let b: Vec<C64> = pool
        .iter()
        .map(|&lam| inner_product(f, &ExpSum::exponential(e, lam)))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(truncations.len());
    for &t in truncations {
        let idx = centered_indices(&pool, t);
        let exps: Vec<ExpSum> = idx.iter().map(|&i| ExpSum::exponential(e, pool[i])).collect();
        let g_sec = DMatrix::from_fn(t, t, |r, c| dual.gram.entries[(idx[r], idx[c])]);
        let rhs = DVector::from_iterator(t, idx.iter().map(|&i| b[i]));
        let r_exp = projection_residual(f, norm_f, &exps, &g_sec, &rhs)?;

        // ⟨g_i, g_j⟩ = C_ij and ⟨f, g_j⟩ = Σ_k C_kj ⟨f, e_k⟩
        let duals: Vec<ExpSum> = idx.iter().map(|&i| dual.dual_element(i)).collect();
        let c_sec = DMatrix::from_fn(t, t, |r, c| dual.coeffs[(idx[r], idx[c])]);
        let rhs_d = DVector::from_iterator(
            t,
            idx.iter().map(|&j| (0..pool.len()).map(|k| dual.coeffs[(k, j)] * b[k]).sum::<C64>()),
        );
        let r_dual = projection_residual(f, norm_f, &duals, &c_sec, &rhs_d)?;
        out.push(Residual { truncation: t, residual_exponentials: r_exp, residual_duals: r_dual });
    }
    Ok(out)
}

/// Smallest eigenvalues of windowed Gram sections on `[0, |E|]`.
pub fn uniqueness_floor(measure: f64, freqs: &[C64], windows: &[usize]) -> Result<Vec<(usize, f64)>> {
    let interval = IntervalUnion::single(0.0, measure)?;
    windows
        .iter()
        .map(|&w| {
            if w > freqs.len() {
                return Err(Error::Size(w, freqs.len()));
            }
            let g = gram_matrix(&interval, &centered_window(freqs, w))?;
            Ok((w, g.eigenvalues()[0]))
        })
        .collect()
}
