//! Exponential Riesz bases: block-balanced lattice perturbations on one
//! interval, the glue/rescale route for two intervals, the level-set
//! combination for three, and counting densities.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::{ComponentSpec, GenFunctionSpec, ZeroModel};
use crate::intervals::{self, IntervalUnion, DEFAULT_N_MAX};

pub type C64 = Complex64;

const TWO_PI: f64 = 2.0 * PI;

/// Smallest index truncation used for generating functions.
pub const MIN_GENFUN_TRUNC: usize = 1000;

/// `(1 − α)M² > 2M + 2` and `M > 4`.
pub fn avdonin_feasible(alpha: f64, m: usize) -> Result<bool> {
    check_alpha(alpha)?;
    let mf = m as f64;
    Ok(m > 4 && (1.0 - alpha) * mf * mf > 2.0 * mf + 2.0)
}

/// Smallest feasible block length for `alpha`.
pub fn min_feasible_m(alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    let mut m = 5;
    while !avdonin_feasible(alpha, m)? {
        m += 1;
    }
    Ok(m)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Range(format!("alpha = {alpha} is not in (0, 1)")))
    }
}

/// `Δ_0` of the unadjusted block `γ_k = αk`, `k = 1..M`: `(α − 1)M(M + 1)/2`.
pub fn all_left_block_sum(alpha: f64, m: usize) -> f64 {
    let mf = m as f64;
    (alpha - 1.0) * mf * (mf + 1.0) / 2.0
}

/// Slot range `{s : lM < αs ≤ (l + 1)M}`.
fn block_slots(alpha: f64, m: usize, l: i64) -> (i64, i64) {
    let lo_edge = (l * m as i64) as f64;
    let hi_edge = ((l + 1) * m as i64) as f64;
    let mut lo = (lo_edge / alpha).floor() as i64 + 1;
    while alpha * (lo as f64) <= lo_edge {
        lo += 1;
    }
    while alpha * ((lo - 1) as f64) > lo_edge {
        lo -= 1;
    }
    let mut hi = (hi_edge / alpha).floor() as i64;
    while alpha * (hi as f64) > hi_edge {
        hi -= 1;
    }
    while alpha * ((hi + 1) as f64) <= hi_edge {
        hi += 1;
    }
    (lo, hi)
}

/// `Γ = {γ_k} ⊂ αℤ` with `γ_0 = 0` and every run of consecutive block sums
/// `Δ_l = Σ_{k∈(lM,(l+1)M]} (γ_k − k)` inside `(−α, α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedLattice {
    pub alpha: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub index_range: (i64, i64),
    /// `γ_k / α`: exact integer positions.
    pub slots: BTreeMap<i64, i64>,
    pub gammas: BTreeMap<i64, f64>,
    pub deltas: BTreeMap<i64, f64>,
    pub block_sums: BTreeMap<i64, f64>,
}

/// Places the `M` points of block `l` in its slot window so that `Δ_l`
/// lands in `[lo, hi)` (or `(lo, hi]` when `closed_right`).
///
/// The points start on the `M` smallest slots. Sweeps from the largest point
/// down raise each point to the next free slot until enough moves are made.
fn place_block(
    alpha: f64,
    m: usize,
    l: i64,
    lo: f64,
    hi: f64,
    closed_right: bool,
) -> Result<(Vec<i64>, f64)> {
    let (s_lo, s_hi) = block_slots(alpha, m, l);
    let first = l * m as i64 + 1;
    // block −1 carries γ_0 = 0 pinned on slot 0
    let pinned = l == -1;
    let movable = if pinned { m - 1 } else { m };
    let top = if pinned { -1 } else { s_hi };
    let mut slots: Vec<i64> = (0..movable as i64).map(|i| s_lo + i).collect();
    if pinned {
        slots.push(0);
    }
    let sum_of = |slots: &[i64]| -> f64 {
        slots.iter().enumerate().map(|(i, &s)| alpha * s as f64 - (first + i as i64) as f64).sum()
    };
    let base = sum_of(&slots);
    let caps: Vec<i64> = (0..movable).map(|i| top - (movable - 1 - i) as i64).collect();
    let capacity: i64 = (0..movable).map(|i| caps[i] - slots[i]).sum();
    let steps = if closed_right {
        ((hi - base) / alpha).floor()
    } else {
        ((lo - base) / alpha).ceil()
    };
    // one candidate; nudge for rounding at the window edges
    let mut moves = steps as i64;
    for _ in 0..2 {
        let d = base + alpha * moves as f64;
        let inside = if closed_right { d > lo && d <= hi } else { d >= lo && d < hi };
        if inside {
            break;
        }
        if (closed_right && d > hi) || (!closed_right && d >= hi) {
            moves -= 1;
        } else {
            moves += 1;
        }
    }
    if moves < 0 || moves > capacity {
        return Err(Error::Infeasible(format!(
            "block {l}: need {moves} moves, capacity {capacity} (alpha {alpha}, M {m})"
        )));
    }
    let mut left = moves;
    while left > 0 {
        for i in (0..movable).rev() {
            if left == 0 {
                break;
            }
            let next = if i + 1 < movable { slots[i + 1] } else { top + 1 };
            if slots[i] + 1 < next {
                slots[i] += 1;
                left -= 1;
            }
        }
    }
    let sum = sum_of(&slots);
    Ok((slots, sum))
}

/// Builds blocks `l_min..=l_max` (which must contain block `−1`, home of `γ_0`).
///
/// Blocks `l ≥ −1` are filled upward keeping every prefix sum
/// `Σ_{j=−1}^{l} Δ_j` in `[0, α)`; blocks `l ≤ −2` downward keeping
/// `Σ_{j=l}^{−2} Δ_j` in `(−α, 0]`. Any run of consecutive blocks then sums
/// into `(−α, α)`, and the result does not depend on the requested range.
pub fn block_balanced_perturbation(alpha: f64, m: usize, blocks: (i64, i64)) -> Result<PerturbedLattice> {
    if !avdonin_feasible(alpha, m)? {
        return Err(Error::Range(format!("(alpha, M) = ({alpha}, {m}) fails the Avdonin condition")));
    }
    let (l_min, l_max) = blocks;
    if l_min > -1 || l_max < -1 {
        return Err(Error::Range(format!("block range [{l_min}, {l_max}] must contain block -1")));
    }
    let mut slots = BTreeMap::new();
    let mut block_sums = BTreeMap::new();
    let mut store = |l: i64, s: Vec<i64>, sum: f64, slots: &mut BTreeMap<i64, i64>| {
        let first = l * m as i64 + 1;
        for (i, v) in s.into_iter().enumerate() {
            slots.insert(first + i as i64, v);
        }
        block_sums.insert(l, sum);
    };
    let mut p = 0.0;
    for l in -1..=l_max {
        let (s, sum) = place_block(alpha, m, l, -p, alpha - p, false)?;
        p += sum;
        store(l, s, sum, &mut slots);
    }
    let mut q = 0.0;
    for l in (l_min..=-2).rev() {
        let (s, sum) = place_block(alpha, m, l, -alpha - q, -q, true)?;
        q += sum;
        store(l, s, sum, &mut slots);
    }
    let gammas: BTreeMap<i64, f64> = slots.iter().map(|(&k, &s)| (k, alpha * s as f64)).collect();
    let deltas = gammas.iter().map(|(&k, &g)| (k, g - k as f64)).collect();
    let lattice = PerturbedLattice {
        alpha,
        m,
        index_range: (l_min * m as i64 + 1, (l_max + 1) * m as i64),
        slots,
        gammas,
        deltas,
        block_sums,
    };
    lattice.check_invariants()?;
    Ok(lattice)
}

/// Block range whose indices cover `−k..=k`.
pub fn blocks_covering(m: usize, k: i64) -> (i64, i64) {
    let mi = m as i64;
    ((-k - 1).div_euclid(mi).min(-1), k.div_euclid(mi).max(-1))
}

impl PerturbedLattice {
    pub fn gamma(&self, k: i64) -> Option<f64> {
        self.gammas.get(&k).copied()
    }

    pub fn sup_delta(&self) -> f64 {
        self.deltas.values().fold(0.0, |a, d| a.max(d.abs()))
    }

    /// `M(1 − α) + α`.
    pub fn delta_envelope(&self) -> f64 {
        self.m as f64 * (1.0 - self.alpha) + self.alpha
    }

    /// Largest `|Σ_{k=m₁}^{m₂} δ_k|` over the stored range.
    pub fn max_partial_sum(&self) -> f64 {
        let (mut p, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
        for d in self.deltas.values() {
            p += d;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        hi - lo
    }

    /// Largest `|Σ_{l=l₁}^{l₂} Δ_l|` over runs of consecutive blocks.
    pub fn max_block_run(&self) -> f64 {
        let (mut p, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
        for d in self.block_sums.values() {
            p += d;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        hi - lo
    }

    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Infeasible(msg));
        let (alpha, m) = (self.alpha, self.m as i64);
        if self.slots.get(&0) != Some(&0) {
            return fail("gamma_0 != 0".into());
        }
        let mut prev: Option<i64> = None;
        for (&k, &s) in &self.slots {
            if let Some(p) = prev {
                if s <= p {
                    return fail(format!("gamma not increasing at index {k}"));
                }
            }
            prev = Some(s);
            let l = (k - 1).div_euclid(m);
            let g = alpha * s as f64;
            if !(g > (l * m) as f64 && g <= ((l + 1) * m) as f64) {
                return fail(format!("gamma_{k} = {g} leaves block {l}"));
            }
        }
        for (&l, &d) in &self.block_sums {
            if d.abs() >= alpha {
                return fail(format!("block {l}: sum {d} outside (-alpha, alpha)"));
            }
            if d.abs() / self.m as f64 >= 0.25 {
                return fail(format!("block {l}: mean deviation {d} too large"));
            }
        }
        if self.max_block_run() >= alpha {
            return fail(format!("block partial sum {} outside (-alpha, alpha)", self.max_block_run()));
        }
        let sup = self.sup_delta();
        if sup > self.delta_envelope() + 1e-12 {
            return fail(format!("sup |delta| = {sup} exceeds the envelope"));
        }
        if self.max_partial_sum() > alpha + 2.0 * self.m as f64 * sup + 1e-9 {
            return fail("partial deviation sums exceed the envelope".into());
        }
        Ok(())
    }

    pub fn to_frequency_set(&self, label: &str) -> FrequencySet {
        FrequencySet {
            points: self.gammas.values().map(|&g| C64::new(g, 0.0)).collect(),
            label: label.to_string(),
        }
    }
}

/// A finite truncation of a frequency sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub points: Vec<C64>,
    #[serde(default)]
    pub label: String,
}

impl FrequencySet {
    /// Rejects points closer than `1e−12` to one another.
    pub fn new(points: Vec<C64>, label: &str) -> Result<Self> {
        let mut points = points;
        points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[j].re - points[i].re > 1e-12 {
                    break;
                }
                if (points[i] - points[j]).norm() <= 1e-12 {
                    return Err(Error::Duplicate(format!("{}", points[i])));
                }
            }
        }
        Ok(FrequencySet { points, label: label.to_string() })
    }

    pub fn from_reals(points: &[f64], label: &str) -> Result<Self> {
        Self::new(points.iter().map(|&x| C64::new(x, 0.0)).collect(), label)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `n` points nearest the origin, ordered by real part.
    pub fn centered_window(&self, n: usize) -> Vec<C64> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            self.points[a].norm().total_cmp(&self.points[b].norm()).then(self.points[a].re.total_cmp(&self.points[b].re))
        });
        let mut out: Vec<C64> = idx.into_iter().take(n).map(|i| self.points[i]).collect();
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMode {
    Disk,
    Uniform,
}

impl std::str::FromStr for DensityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(DensityMode::Disk),
            "uniform" => Ok(DensityMode::Uniform),
            other => Err(Error::Parse(format!("density mode '{other}'"))),
        }
    }
}

/// `disk`: `#(Λ ∩ B(0, R))/2R`. `uniform`: largest `#(Λ ∩ (x, x + R))/R` over
/// all window positions, using real parts.
pub fn density_estimate(points: &[C64], r: f64, mode: DensityMode) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Range(format!("R = {r} must be positive")));
    }
    Ok(match mode {
        DensityMode::Disk => points.iter().filter(|p| p.norm() <= r).count() as f64 / (2.0 * r),
        DensityMode::Uniform => {
            let mut xs: Vec<f64> = points.iter().map(|p| p.re).collect();
            xs.sort_by(f64::total_cmp);
            // an open window of length R holds x_i..x_j iff x_j − x_i < R
            let mut best = 0usize;
            let mut j = 0usize;
            for i in 0..xs.len() {
                if j < i {
                    j = i;
                }
                while j < xs.len() && xs[j] - xs[i] < r {
                    j += 1;
                }
                best = best.max(j - i);
            }
            best as f64 / r
        }
    })
}

/// How the basis for one spectrum was assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub reduction_n: Option<usize>,
    pub components: Vec<ComponentSpec>,
}

fn assemble(e: &IntervalUnion, depth: usize) -> Result<Construction> {
    if depth > 3 {
        return Err(Error::Unsupported("level-set recursion did not terminate".into()));
    }
    let g = intervals::glue(e, TWO_PI)?;
    if g.len() == 1 {
        let len = g.measure();
        let model = if (len - TWO_PI).abs() <= 1e-9 {
            ZeroModel::Integers
        } else {
            let alpha = len / TWO_PI;
            ZeroModel::Lattice { alpha, m: min_feasible_m(alpha)? }
        };
        return Ok(Construction { reduction_n: None, components: vec![ComponentSpec { model, scale: 1, translate: 0 }] });
    }
    if g.len() >= 4 {
        return Err(Error::Unsupported(format!("{} intervals (at most 3 are supported)", g.len())));
    }
    let s = if g.within(0.0, TWO_PI) { g } else { g.translate(-g.min()) };
    let n = intervals::min_reducing_n(&s, DEFAULT_N_MAX)?;
    let levels = intervals::cyclic_level_sets(&s, n)?;
    let mut components = Vec::new();
    for (idx, level) in levels.iter().enumerate() {
        let Some(a) = level else { continue };
        let sub = assemble(&a.scale(n as f64), depth + 1)?;
        for c in sub.components {
            components.push(ComponentSpec {
                model: c.model,
                scale: c.scale * n as i64,
                translate: c.translate * n as i64 + idx as i64 + 1,
            });
        }
    }
    Ok(Construction { reduction_n: Some(n), components })
}

/// The construction plan for `E ⊂ [0, 2π]` without materializing points.
pub fn plan(e: &IntervalUnion) -> Result<Construction> {
    if !e.within(0.0, TWO_PI) {
        return Err(Error::Domain(format!("spectrum [{}, {}] is not inside [0, 2pi]", e.min(), e.max())));
    }
    if e.len() >= 4 {
        let glued = intervals::glue(e, TWO_PI)?;
        if glued.len() >= 4 {
            return Err(Error::Unsupported(format!("{} intervals (at most 3 are supported)", e.len())));
        }
    }
    assemble(e, 0)
}

/// Integer frequencies `value = scale·slot + translate` of one component with
/// `|value| ≤ bound`.
pub fn component_values(c: &ComponentSpec, bound: f64) -> Result<Vec<i64>> {
    let reach = (bound + c.translate.unsigned_abs() as f64) / c.scale as f64;
    let slots: Vec<i64> = match c.model {
        ZeroModel::Integers => {
            let r = reach.floor() as i64 + 1;
            (-r..=r).collect()
        }
        ZeroModel::Lattice { alpha, m } => {
            let k = (alpha * reach).ceil() as i64 + 2 * m as i64 + 2;
            block_balanced_perturbation(alpha, m, blocks_covering(m, k))?.slots.into_values().collect()
        }
    };
    Ok(slots
        .into_iter()
        .map(|s| c.scale * s + c.translate)
        .filter(|v| (*v as f64).abs() <= bound)
        .collect())
}

/// Riesz basis of exponentials for `E ⊂ [0, 2π]` with 1–3 parts, truncated to
/// `|γ| ≤ trunc`, together with its generating function.
pub fn multiband_basis(e: &IntervalUnion, trunc: usize) -> Result<(FrequencySet, GenFunctionSpec)> {
    let construction = plan(e)?;
    let mut values = Vec::new();
    for c in &construction.components {
        values.extend(component_values(c, trunc as f64)?);
    }
    values.sort_unstable();
    let label = match construction.reduction_n {
        None => "lattice".to_string(),
        Some(n) => format!("level-sets N={n}"),
    };
    let freqs = FrequencySet::new(values.into_iter().map(|v| C64::new(v as f64, 0.0)).collect(), &label)?;
    let genfun = GenFunctionSpec::new(construction.components, trunc.max(MIN_GENFUN_TRUNC))?;
    Ok((freqs, genfun))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avdonin_examples() {
        assert!(avdonin_feasible(0.9, 21).unwrap());
        assert!(!avdonin_feasible(0.9, 20).unwrap());
        assert!(!avdonin_feasible(0.5, 4).unwrap());
        assert!(matches!(avdonin_feasible(1.0, 30), Err(Error::Range(_))));
        assert!(matches!(avdonin_feasible(0.0, 30), Err(Error::Range(_))));
        assert_eq!(min_feasible_m(0.5).unwrap(), 5);
        assert_eq!(min_feasible_m(0.75).unwrap(), 9);
        assert_eq!(min_feasible_m(0.9).unwrap(), 21);
    }

    #[test]
    fn all_left_sum_example() {
        assert!((all_left_block_sum(0.9, 21) + 23.1).abs() < 1e-12);
    }

    #[test]
    fn perturbation_examples() {
        let lat = block_balanced_perturbation(0.9, 21, (-3, 3)).unwrap();
        assert_eq!(lat.gamma(0), Some(0.0));
        let d1 = lat.block_sums[&0];
        assert!(d1.abs() < 0.9);
        assert_eq!(lat.index_range, (-62, 84));
        assert_eq!(lat.slots.len(), 147);
        lat.check_invariants().unwrap();
        assert!(matches!(block_balanced_perturbation(0.9, 20, (-1, 1)), Err(Error::Range(_))));
        assert!(matches!(block_balanced_perturbation(0.9, 21, (0, 1)), Err(Error::Range(_))));
    }

    #[test]
    fn perturbation_is_stable_under_range_extension() {
        let small = block_balanced_perturbation(0.7, 12, (-2, 2)).unwrap();
        let big = block_balanced_perturbation(0.7, 12, (-9, 9)).unwrap();
        for (k, s) in &small.slots {
            assert_eq!(big.slots[k], *s);
        }
    }

    #[test]
    fn many_alphas_feasible() {
        for i in 1..60 {
            let alpha = i as f64 / 61.0 + 0.003;
            let m = min_feasible_m(alpha).unwrap();
            let lat = block_balanced_perturbation(alpha, m, (-20, 20)).unwrap();
            lat.check_invariants().unwrap();
        }
    }

    #[test]
    fn density_examples() {
        let z: Vec<C64> = (-100..=100).map(|k| C64::new(k as f64, 0.0)).collect();
        assert!((density_estimate(&z, 100.5, DensityMode::Disk).unwrap() - 1.0).abs() < 1e-12);
        let z2: Vec<C64> = (-100..=100).map(|k| C64::new(2.0 * k as f64, 0.0)).collect();
        assert!((density_estimate(&z2, 100.5, DensityMode::Disk).unwrap() - 101.0 / 201.0).abs() < 1e-12);
        assert!((density_estimate(&z, 10.0, DensityMode::Uniform).unwrap() - 1.0).abs() < 1e-12);
        assert!(density_estimate(&z, 0.0, DensityMode::Disk).is_err());
    }

    #[test]
    fn full_circle_gives_integers() {
        let e = IntervalUnion::single(0.0, TWO_PI).unwrap();
        let (f, g) = multiband_basis(&e, 10).unwrap();
        let want: Vec<C64> = (-10..=10).map(|k| C64::new(k as f64, 0.0)).collect();
        assert_eq!(f.points, want);
        assert_eq!(g.components.len(), 1);
    }

    #[test]
    fn two_parts_glue_to_integer_lattice() {
        let e = IntervalUnion::new(&[(0.0, 1.5), (3.0, TWO_PI)]).unwrap();
        let (f, _) = multiband_basis(&e, 200).unwrap();
        assert!(f.points.iter().all(|p| p.im == 0.0 && p.re.fract() == 0.0));
        assert!(f.points.contains(&C64::new(0.0, 0.0)));
        let c = plan(&e).unwrap();
        assert_eq!(c.reduction_n, None);
        match c.components[0].model {
            ZeroModel::Lattice { alpha, m } => {
                assert!((alpha - (TWO_PI - 1.5) / TWO_PI).abs() < 1e-12);
                assert_eq!(m, 10);
            }
            _ => panic!("expected a lattice"),
        }
    }

    #[test]
    fn level_set_route_example() {
        let e = IntervalUnion::new(&[(1.0, 2.0), (3.0, 6.0)]).unwrap();
        let c = plan(&e).unwrap();
        assert_eq!(c.reduction_n, Some(2));
        assert_eq!(c.components.len(), 2);
        assert_eq!((c.components[0].scale, c.components[0].translate), (2, 1));
        assert_eq!((c.components[1].scale, c.components[1].translate), (2, 2));
        let (f, _) = multiband_basis(&e, 300).unwrap();
        let d = density_estimate(&f.points, 250.0, DensityMode::Disk).unwrap();
        assert!((d - 4.0 / TWO_PI).abs() < 0.05 * 4.0 / TWO_PI, "density {d}");
    }

    #[test]
    fn three_parts() {
        let e = IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0), (4.5, TWO_PI)]).unwrap();
        let (f, _) = multiband_basis(&e, 600).unwrap();
        let target = e.measure() / TWO_PI;
        let d = density_estimate(&f.points, 500.0, DensityMode::Disk).unwrap();
        assert!((d - target).abs() < 0.05 * target, "density {d} vs {target}");
        assert!(d <= target + 2.0 / 500.0);
    }

    #[test]
    fn errors() {
        let four = IntervalUnion::new(&[(0.5, 1.0), (1.5, 2.0), (2.5, 3.0), (4.0, 5.0)]).unwrap();
        assert!(matches!(multiband_basis(&four, 10), Err(Error::Unsupported(_))));
        let far = IntervalUnion::new(&[(0.0, 7.0)]).unwrap();
        assert!(matches!(multiband_basis(&far, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn frequency_set_rejects_duplicates() {
        assert!(matches!(FrequencySet::from_reals(&[0.0, 1.0, 1.0], "x"), Err(Error::Duplicate(_))));
        let s = FrequencySet::from_reals(&[3.0, -1.0, 2.0], "x").unwrap();
        assert_eq!(s.points[0], C64::new(-1.0, 0.0));
        let js = serde_json::to_string(&s).unwrap();
        assert!(js.starts_with(r#"{"points":[[-1.0,0.0]"#));
    }

    #[test]
    fn lattice_json_has_alpha_m_deltas() {
        let lat = block_balanced_perturbation(0.5, 5, (-1, 0)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&lat).unwrap();
        assert_eq!(v["M"], 5);
        assert!(v["deltas"]["0"].is_number());
        let back: PerturbedLattice = serde_json::from_value(v).unwrap();
        assert_eq!(back, lat);
    }
}
