//! Generating functions `G(z) = ∏_c G_c(z − t_c)` of the constructed bases.
//!
//! Each component is `w e^{isw} v.p.∏_{0<|k|≤T}(1 − w/p_k)`, a symmetric
//! truncation of a product whose zeros `p_k` follow a lattice with step `h`
//! and shift `s = π/h`. Evaluation runs in the log domain; by default the
//! missing factors `|k| > T` are restored from the asymptotic lattice by an
//! Euler–Maclaurin tail.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{block_balanced_perturbation, blocks_covering, MIN_GENFUN_TRUNC};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Zero pattern of a component, in units before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ZeroModel {
    /// `p_k = k`.
    Integers,
    /// `p_k = γ_k/α` from the block-balanced perturbation with parameters `(α, M)`.
    Lattice { alpha: f64, m: usize },
}

impl ZeroModel {
    pub fn alpha(&self) -> f64 {
        match self {
            ZeroModel::Integers => 1.0,
            ZeroModel::Lattice { alpha, .. } => *alpha,
        }
    }
}

/// Zeros at `scale·p_k + translate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub model: ZeroModel,
    pub scale: i64,
    pub translate: i64,
}

impl ComponentSpec {
    /// Asymptotic spacing of the zeros.
    pub fn step(&self) -> f64 {
        self.scale as f64 / self.model.alpha()
    }

    /// Length of the spectral interval this component accounts for.
    pub fn width(&self) -> f64 {
        2.0 * PI / self.step()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailPolicy {
    /// Plain symmetric truncation.
    None,
    /// Truncation times the asymptotic-lattice tail `∏_{|k|>T}(1 − x²/k²)`.
    #[default]
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub spec: ComponentSpec,
    /// Unscaled zero positions for indices `−T..=T`; entry `T` is `0`.
    pub slots: Vec<i64>,
    pub step: f64,
    pub shift: f64,
}

impl Component {
    fn build(spec: ComponentSpec, trunc: usize) -> Result<Self> {
        let t = trunc as i64;
        let slots = match spec.model {
            ZeroModel::Integers => (-t..=t).collect(),
            ZeroModel::Lattice { alpha, m } => {
                let lat = block_balanced_perturbation(alpha, m, blocks_covering(m, t))?;
                (-t..=t).map(|k| lat.slots[&k]).collect()
            }
        };
        let step = spec.step();
        Ok(Component { spec, slots, step, shift: PI / step })
    }

    fn zero(&self, idx: usize) -> f64 {
        (self.spec.scale * self.slots[idx]) as f64
    }

    fn trunc(&self) -> usize {
        (self.slots.len() - 1) / 2
    }

    /// `log G_c(z)` with the factor of index `skip` left out; `None` at a
    /// stored zero.
    fn log_value(&self, z: C64, skip: Option<usize>, tail: TailPolicy) -> Option<C64> {
        let w = z - self.spec.translate as f64;
        let center = self.trunc();
        let mut acc = I * self.shift * w;
        if skip != Some(center) {
            if w == C64::new(0.0, 0.0) {
                return None;
            }
            acc += w.ln();
        }
        for idx in 0..self.slots.len() {
            if idx == center || Some(idx) == skip {
                continue;
            }
            let f = C64::new(1.0, 0.0) - w / self.zero(idx);
            if f == C64::new(0.0, 0.0) {
                return None;
            }
            acc += f.ln();
        }
        if tail == TailPolicy::Asymptotic {
            acc += asymptotic_tail(w / self.step, center as f64);
        }
        Some(acc)
    }

    /// Index into `slots` of a zero at `w`, if any.
    fn zero_index(&self, w: f64) -> Option<usize> {
        let scaled = w / self.spec.scale as f64;
        let s = scaled.round();
        if (scaled - s).abs() * self.spec.scale as f64 > 1e-9 * w.abs().max(1.0) {
            return None;
        }
        self.slots.binary_search(&(s as i64)).ok()
    }
}

/// `Σ_{k>T} log(1 − x²/k²)` by Euler–Maclaurin with four Bernoulli terms.
pub fn asymptotic_tail(x: C64, t: f64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let f_t = (one - x * x / (t * t)).ln();
    let integral = -f_t * t + x * ((t - x) / (t + x)).ln();
    // f^{(m)}(u) = (−1)^{m−1}(m − 1)! [(u − x)^{−m} + (u + x)^{−m} − 2u^{−m}]
    let deriv = |m: i32| -> C64 {
        let fact: f64 = (1..m).map(|v| v as f64).product();
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        ((t - x).powi(-m) + (t + x).powi(-m) - 2.0 * t.powi(-m)) * (sign * fact)
    };
    const B: [(i32, f64); 4] = [(2, 1.0 / 6.0), (4, -1.0 / 30.0), (6, 1.0 / 42.0), (8, -1.0 / 30.0)];
    let mut em = C64::new(0.0, 0.0);
    for (p2, b) in B {
        let fact: f64 = (1..=p2).map(|v| v as f64).product();
        em += deriv(p2 - 1) * (b / fact);
    }
    integral - f_t * 0.5 - em
}

/// A generating function: components, index truncation and tail policy.
#[derive(Debug, Clone, PartialEq)]
pub struct GenFunctionSpec {
    pub components: Vec<Component>,
    pub trunc: usize,
    pub tail: TailPolicy,
}

fn sample_grid(r_win: f64, samples: usize) -> Vec<C64> {
    const ROWS: usize = 11;
    let cols = samples.div_ceil(ROWS);
    let mut out = Vec::with_capacity(ROWS * cols);
    for j in 0..ROWS {
        let y = -1.0 + 2.0 * j as f64 / (ROWS - 1) as f64;
        for i in 0..cols {
            // golden-ratio offset keeps the grid off the integers
            let x = -r_win + 2.0 * r_win * (i as f64 + 0.381_966_011_250_105) / cols as f64;
            out.push(C64::new(x, y));
        }
    }
    out
}

impl GenFunctionSpec {
    pub fn new(specs: Vec<ComponentSpec>, trunc: usize) -> Result<Self> {
        if trunc < MIN_GENFUN_TRUNC {
            return Err(Error::Range(format!("truncation {trunc} is below {MIN_GENFUN_TRUNC}")));
        }
        if specs.is_empty() {
            return Err(Error::Empty);
        }
        let components = specs.into_iter().map(|s| Component::build(s, trunc)).collect::<Result<_>>()?;
        Ok(GenFunctionSpec { components, trunc, tail: TailPolicy::default() })
    }

    /// `z e^{iπz} v.p.∏(1 − z/n) = e^{iπz} sin(πz)/π`.
    pub fn integers(trunc: usize) -> Result<Self> {
        Self::new(vec![ComponentSpec { model: ZeroModel::Integers, scale: 1, translate: 0 }], trunc)
    }

    pub fn with_tail(mut self, tail: TailPolicy) -> Self {
        self.tail = tail;
        self
    }

    pub fn specs(&self) -> Vec<ComponentSpec> {
        self.components.iter().map(|c| c.spec.clone()).collect()
    }

    /// Total spectral width `Σ 2π/h_c`, the expected length of the
    /// conjugate indicator diagram.
    pub fn width(&self) -> f64 {
        self.components.iter().map(|c| c.spec.width()).sum()
    }

    /// `log G(z)`, or `None` at a stored zero.
    pub fn log_eval(&self, z: C64) -> Option<C64> {
        self.components.iter().map(|c| c.log_value(z, None, self.tail)).sum()
    }

    pub fn vp_eval(&self, z: C64) -> C64 {
        self.log_eval(z).map_or(C64::new(0.0, 0.0), C64::exp)
    }

    /// All stored zeros, ascending.
    pub fn zeros(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self
            .components
            .iter()
            .flat_map(|c| (0..c.slots.len()).map(move |i| c.zero(i) + c.spec.translate as f64))
            .collect();
        z.sort_by(f64::total_cmp);
        z
    }

    /// Radius inside which the truncation represents every component well.
    pub fn trusted_radius(&self) -> f64 {
        let min_step = self.components.iter().map(|c| c.step).fold(f64::INFINITY, f64::min);
        0.8 * self.trunc as f64 * min_step
    }

    /// `G'(γ)` at a stored zero: the other factors evaluated at `γ`.
    pub fn derivative_at_zero(&self, gamma: f64) -> Result<C64> {
        let not_zero = || Error::NotAZero { point: format!("{gamma}"), value: f64::NAN, tol: 1e-9 };
        let (ci, idx) = self
            .components
            .iter()
            .enumerate()
            .find_map(|(ci, c)| c.zero_index(gamma - c.spec.translate as f64).map(|i| (ci, i)))
            .ok_or_else(not_zero)?;
        let z = C64::new(gamma, 0.0);
        let mut log = C64::new(0.0, 0.0);
        for (cj, c) in self.components.iter().enumerate() {
            let skip = if cj == ci { Some(idx) } else { None };
            log += c.log_value(z, skip, self.tail).ok_or_else(not_zero)?;
        }
        let comp = &self.components[ci];
        let factor = if idx == comp.trunc() { C64::new(1.0, 0.0) } else { C64::new(-1.0 / comp.zero(idx), 0.0) };
        Ok(factor * log.exp())
    }

    /// Deterministic strip samples: 11 rows across `|Im z| ≤ 1`, columns
    /// spread over `|Re z| ≤ r_win`.
    pub fn strip_samples(r_win: f64, samples: usize) -> Vec<C64> {
        sample_grid(r_win, samples)
    }

    /// `(min, max)` of `|G(z)|/dist(z, Γ)` over the given samples with
    /// `dist ≥ 1e−6`.
    pub fn comparability_on(&self, samples: &[C64]) -> (f64, f64) {
        let zeros = self.zeros();
        let ratio = |z: &C64| -> Option<f64> {
            let d = distance_to_sorted(&zeros, *z);
            if d < 1e-6 {
                return None;
            }
            let lg = self.log_eval(*z)?;
            Some((lg.re - d.ln()).exp())
        };
        #[cfg(feature = "parallel")]
        let values: Vec<Option<f64>> = {
            use rayon::prelude::*;
            samples.par_iter().map(ratio).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let values: Vec<Option<f64>> = samples.iter().map(ratio).collect();
        values.into_iter().flatten().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// `(c₁, c₂)` over the default grid on `|Re z| ≤ 0.8·T·h_min`.
    pub fn strip_comparability(&self, samples: usize) -> Result<(f64, f64)> {
        if samples < 1000 {
            return Err(Error::Range(format!("{samples} samples (at least 1000 required)")));
        }
        Ok(self.comparability_on(&sample_grid(self.trusted_radius(), samples)))
    }

    /// `(log|G(iy)|/y, log|G(−iy)|/y)` at `y = y_max`.
    pub fn exp_type_profile(&self, y_max: f64) -> Result<(f64, f64)> {
        if y_max < 20.0 {
            return Err(Error::Range(format!("y_max = {y_max} (at least 20 required)")));
        }
        let up = self.log_eval(C64::new(0.0, y_max)).map_or(f64::NEG_INFINITY, |v| v.re) / y_max;
        let down = self.log_eval(C64::new(0.0, -y_max)).map_or(f64::NEG_INFINITY, |v| v.re) / y_max;
        Ok((up, down))
    }
}

/// Distance from `z` to the nearest point of a sorted real set.
pub fn distance_to_sorted(zeros: &[f64], z: C64) -> f64 {
    let pos = zeros.partition_point(|&g| g < z.re);
    zeros[pos.saturating_sub(1)..(pos + 1).min(zeros.len())]
        .iter()
        .map(|g| C64::new(z.re - g, z.im).norm())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form(z: C64) -> C64 {
        (I * PI * z).exp() * (z * PI).sin() / PI
    }

    #[test]
    fn integer_lattice_values() {
        let g = GenFunctionSpec::integers(1000).unwrap();
        let v = g.vp_eval(C64::new(0.5, 0.0));
        assert!((v - C64::new(0.0, 1.0 / PI)).norm() < 1e-9);
        assert_eq!(g.vp_eval(C64::new(3.0, 0.0)), C64::new(0.0, 0.0));
        let v = g.vp_eval(C64::new(0.5, 1.0));
        assert!((v.norm() - (-PI).exp() * PI.cosh() / PI).abs() < 1e-9);
        for &z in &[C64::new(17.3, 0.4), C64::new(-250.1, -0.9), C64::new(0.01, 3.0)] {
            let rel = (g.vp_eval(z) - closed_form(z)).norm() / closed_form(z).norm();
            assert!(rel < 1e-9, "z={z} rel={rel}");
        }
    }

    #[test]
    fn plain_truncation_within_pairing_bound() {
        let g = GenFunctionSpec::integers(1000).unwrap().with_tail(TailPolicy::None);
        for &z in &[C64::new(0.5, 0.0), C64::new(10.5, 0.5), C64::new(-20.25, 0.0)] {
            let rel = (g.vp_eval(z) - closed_form(z)).norm() / closed_form(z).norm();
            let bound = (z.norm_sqr() / 1000.0).exp() - 1.0;
            assert!(rel <= bound, "z={z}: {rel} > {bound}");
        }
    }

    #[test]
    fn derivative_at_integers() {
        let g = GenFunctionSpec::integers(10_000).unwrap();
        for n in [0.0, 1.0, -7.0, 100.0] {
            let d = g.derivative_at_zero(n).unwrap();
            assert!((d.norm() - 1.0).abs() < 1e-6, "n={n} |G'|={}", d.norm());
        }
        assert!(matches!(g.derivative_at_zero(0.5), Err(Error::NotAZero { .. })));
    }

    #[test]
    fn strip_ratio_at_half_integers() {
        let g = GenFunctionSpec::integers(1000).unwrap();
        let (lo, hi) = g.comparability_on(&[C64::new(4.5, 0.0)]);
        assert!((lo - 2.0 / PI).abs() < 1e-9 && (hi - 2.0 / PI).abs() < 1e-9);
        let (lo, _) = g.comparability_on(&[C64::new(4.0 + 1e-5, 0.0)]);
        assert!((lo - 1.0).abs() < 1e-4);
    }

    #[test]
    fn strip_matches_closed_form_oracle() {
        let g = GenFunctionSpec::integers(1000).unwrap();
        let samples = GenFunctionSpec::strip_samples(g.trusted_radius(), 2000);
        let (c1, c2) = g.comparability_on(&samples);
        let zeros: Vec<f64> = (-1000..=1000).map(|k| k as f64).collect();
        let (mut o1, mut o2) = (f64::INFINITY, 0.0f64);
        for z in &samples {
            let d = distance_to_sorted(&zeros, *z);
            let r = closed_form(*z).norm() / d;
            o1 = o1.min(r);
            o2 = o2.max(r);
        }
        assert!((c1 - o1).abs() < 1e-6 * o1 && (c2 - o2).abs() < 1e-6 * o2);
        assert!(c1 >= 0.04);
        assert!(g.strip_comparability(999).is_err());
    }

    #[test]
    fn exp_type_of_integers() {
        let g = GenFunctionSpec::integers(1000).unwrap();
        let (up, down) = g.exp_type_profile(50.0).unwrap();
        assert!(up.abs() < 0.05, "up {up}");
        assert!((down - 2.0 * PI).abs() < 0.05, "down {down}");
        assert!(g.exp_type_profile(10.0).is_err());
    }

    #[test]
    fn tail_matches_direct_sum() {
        let x = C64::new(3.7, 0.6);
        let t = 200.0;
        let direct: C64 = (201..2_000_000).map(|k| (C64::new(1.0, 0.0) - x * x / (k as f64 * k as f64)).ln()).sum();
        // remainder beyond 2e6 ≈ −x²/2e6
        let direct = direct - x * x / 2.0e6;
        assert!((asymptotic_tail(x, t) - direct).norm() < 1e-10);
    }

    #[test]
    fn truncation_floor() {
        assert!(matches!(GenFunctionSpec::integers(999), Err(Error::Range(_))));
    }
}
