//! Finite unions of closed intervals on the real line.
//!
//! Besides measure and gaps this module implements the two set operations the
//! basis construction relies on: periodic gluing of the first part onto the
//! last one, and the cyclic level sets `A_1 ⊇ A_2 ⊇ … ⊇ A_N` obtained by
//! folding a set `S ⊂ [0, 2π]` onto the cell `[0, 2π/N]` and thresholding the
//! multiplicity of the fold.

use std::f64::consts::PI;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Breakpoints closer than this are identified.
pub const SNAP: f64 = 1e-12;

/// Default search bound for [`min_reducing_n`].
pub const DEFAULT_N_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Degenerate(a, b));
        }
        Ok(Interval { a, b })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// A nonempty union of strictly disjoint closed intervals, sorted by left
/// endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    /// Builds a union from raw `(a, b)` pairs.
    ///
    /// Input order is irrelevant. Intervals sharing an endpoint are merged;
    /// intervals with overlapping interiors are rejected.
    pub fn new(raw: &[(f64, f64)]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Empty);
        }
        let mut parts = raw
            .iter()
            .map(|&(a, b)| Interval::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        parts.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            match merged.last_mut() {
                Some(last) if p.a < last.b - SNAP => {
                    return Err(Error::Overlap(last.a, last.b, p.a, p.b));
                }
                Some(last) if p.a <= last.b + SNAP => last.b = p.b,
                _ => merged.push(p),
            }
        }
        Ok(IntervalUnion { parts: merged })
    }

    pub fn from_parts(parts: &[Interval]) -> Result<Self> {
        let raw: Vec<(f64, f64)> = parts.iter().map(|p| (p.a, p.b)).collect();
        Self::new(&raw)
    }

    pub fn single(a: f64, b: f64) -> Result<Self> {
        Self::new(&[(a, b)])
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn part(&self, j: usize) -> Interval {
        self.parts[j]
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::len).sum()
    }

    pub fn min(&self) -> f64 {
        self.parts[0].a
    }

    pub fn max(&self) -> f64 {
        self.parts[self.parts.len() - 1].b
    }

    pub fn hull_len(&self) -> f64 {
        self.max() - self.min()
    }

    /// Complementary intervals `[b_j, a_{j+1}]`.
    pub fn gaps(&self) -> Result<Vec<Interval>> {
        if self.parts.len() < 2 {
            return Err(Error::NoGap);
        }
        Ok(self
            .parts
            .windows(2)
            .map(|w| Interval { a: w[0].b, b: w[1].a })
            .collect())
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.parts.partition_point(|p| p.b < x);
        idx < self.parts.len() && self.parts[idx].a <= x
    }

    /// Exact containment: every part of `other` lies inside a part of `self`.
    pub fn contains_union(&self, other: &IntervalUnion) -> bool {
        other
            .parts
            .iter()
            .all(|q| self.parts.iter().any(|p| p.a <= q.a && q.b <= p.b))
    }

    /// True when `self ⊂ [lo, hi]` up to [`SNAP`].
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.min() >= lo - SNAP && self.max() <= hi + SNAP
    }

    pub fn translate(&self, t: f64) -> IntervalUnion {
        IntervalUnion {
            parts: self.parts.iter().map(|p| Interval { a: p.a + t, b: p.b + t }).collect(),
        }
    }

    /// Scales by `s > 0`.
    pub fn scale(&self, s: f64) -> IntervalUnion {
        assert!(s > 0.0, "scale factor must be positive");
        IntervalUnion {
            parts: self.parts.iter().map(|p| Interval { a: p.a * s, b: p.b * s }).collect(),
        }
    }

    /// Index set of the parts of `self` that also appear as parts of `sub`.
    ///
    /// Fails unless `sub` is made of whole parts of `self`.
    pub fn sub_union_indices(&self, sub: &IntervalUnion) -> Result<Vec<usize>> {
        sub.parts
            .iter()
            .map(|q| {
                self.parts
                    .iter()
                    .position(|p| (p.a - q.a).abs() <= SNAP && (p.b - q.b).abs() <= SNAP)
                    .ok_or(Error::NotSubUnion)
            })
            .collect()
    }

    /// Affine normalization into the cell `[0, 2π]`.
    ///
    /// Returns `(E', shift, scale)` with `E' = scale · (E − shift)`, the shift
    /// being the left endpoint and the scale shrinking the hull to `2π` when it
    /// is longer. A frequency `γ'` for `E'` corresponds to `scale · γ'` for `E`.
    pub fn to_unit_cell(&self) -> (IntervalUnion, f64, f64) {
        let shift = self.min();
        let hull = self.hull_len();
        let scale = if hull > 2.0 * PI { 2.0 * PI / hull } else { 1.0 };
        (self.translate(-shift).scale(scale), shift, scale)
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "{}", s.join(" ∪ "))
    }
}

/// Free-function form of [`IntervalUnion::new`].
pub fn make_union(raw: &[(f64, f64)]) -> Result<IntervalUnion> {
    IntervalUnion::new(raw)
}

pub fn measure(e: &IntervalUnion) -> f64 {
    e.measure()
}

pub fn gaps(e: &IntervalUnion) -> Result<Vec<Interval>> {
    e.gaps()
}

/// Moves the first part by `+period` onto the end of the set.
///
/// Requires `E ⊂ [0, period]`. When the first part starts at `0` and the last
/// one ends at `period` the two are merged, which is the glued set `Ẽ`. Sets
/// whose first part does not start at `0`, and single intervals, are returned
/// unchanged. For frequencies in `(2π/period)ℤ` the exponential systems on `E`
/// and on the result are unitarily equivalent.
pub fn glue(e: &IntervalUnion, period: f64) -> Result<IntervalUnion> {
    if !e.within(0.0, period) {
        return Err(Error::Domain(format!("{e} is not contained in [0, {period}]")));
    }
    let parts = e.parts();
    if parts.len() < 2 || parts[0].a.abs() > SNAP {
        return Ok(e.clone());
    }
    let first = parts[0];
    let mut rest: Vec<Interval> = parts[1..].to_vec();
    let shifted = Interval { a: first.a + period, b: first.b + period };
    let last = rest.last_mut().expect("at least two parts");
    if (last.b - period).abs() <= SNAP {
        last.b = shifted.b;
    } else {
        rest.push(shifted);
    }
    IntervalUnion::from_parts(&rest)
}

/// Cyclic level sets `A_n = {x ∈ [0, 2π/N] : #{j : x + 2πj/N ∈ S} ≥ n}`.
///
/// Entry `n − 1` of the result holds `A_n`, or `None` when it has measure
/// zero. Null components are dropped.
pub fn cyclic_level_sets(s: &IntervalUnion, n: usize) -> Result<Vec<Option<IntervalUnion>>> {
    if n == 0 {
        return Err(Error::Range("N must be positive".into()));
    }
    if !s.within(0.0, 2.0 * PI) {
        return Err(Error::Domain(format!("{s} is not contained in [0, 2π]")));
    }
    let cell = 2.0 * PI / n as f64;
    let (breaks, mult) = fold_multiplicity(s, n, cell);
    let mut sets = Vec::with_capacity(n);
    for level in 1..=n {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (k, &m) in mult.iter().enumerate() {
            if m < level {
                continue;
            }
            let (a, b) = (breaks[k], breaks[k + 1]);
            match raw.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => raw.push((a, b)),
            }
        }
        sets.push(if raw.is_empty() { None } else { Some(IntervalUnion::new(&raw)?) });
    }
    Ok(sets)
}

/// Sorted breakpoints of the fold of `S` onto `[0, cell]` together with the
/// multiplicity on each elementary segment.
fn fold_multiplicity(s: &IntervalUnion, n: usize, cell: f64) -> (Vec<f64>, Vec<usize>) {
    let reduce = |x: f64| {
        let r = x - cell * (x / cell).floor();
        if r < SNAP || r > cell - SNAP {
            0.0
        } else {
            r
        }
    };
    let mut breaks = vec![0.0, cell];
    for p in s.parts() {
        breaks.push(reduce(p.a));
        breaks.push(reduce(p.b));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= SNAP);
    // dedup may have swallowed the cell endpoint into a nearby breakpoint
    *breaks.last_mut().expect("nonempty") = cell;

    let mult = breaks
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (0..n).filter(|&j| s.contains(mid + cell * j as f64)).count()
        })
        .collect();
    (breaks, mult)
}

/// Number of intervals of a subset of `[0, cell]`, counting a part touching
/// `0` and a part touching `cell` as one.
pub fn cyclic_part_count(set: Option<&IntervalUnion>, cell: f64) -> usize {
    let Some(u) = set else { return 0 };
    let c = u.len();
    if c >= 2 && u.min().abs() <= SNAP && (u.max() - cell).abs() <= SNAP {
        c - 1
    } else {
        c
    }
}

/// Smallest `N ≤ n_max` for which every level set `A_n` is a union of at most
/// `L − 1` cyclic intervals, `L` being the number of parts of `S` (a single
/// interval has target one).
pub fn min_reducing_n(s: &IntervalUnion, n_max: usize) -> Result<usize> {
    let target = s.len().saturating_sub(1).max(1);
    for n in 1..=n_max {
        let cell = 2.0 * PI / n as f64;
        let sets = cyclic_level_sets(s, n)?;
        if sets.iter().all(|a| cyclic_part_count(a.as_ref(), cell) <= target) {
            return Ok(n);
        }
    }
    Err(Error::NotFound(n_max))
}

/// Parses an endpoint expression such as `"2*pi"`, `"pi/3"`, `"-1.5"` or
/// `"2*(pi-1)"`.
pub fn parse_endpoint(src: &str) -> Result<f64> {
    let mut p = ExprParser { s: src.as_bytes(), pos: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(Error::Parse(format!("trailing input in endpoint {src:?}")));
    }
    if !v.is_finite() {
        return Err(Error::Parse(format!("endpoint {src:?} is not finite")));
    }
    Ok(v)
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if c == b'+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            v = if c == b'*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => self.constant(),
            None => Err(Error::Parse("unexpected end of endpoint expression".into())),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'+' || c == b'-')
                && self.pos > start
                && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        txt.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {txt:?}")))
    }

    fn constant(&mut self) -> Result<f64> {
        let rest = &self.s[self.pos..];
        for (name, value) in [("pi".as_bytes(), PI), ("π".as_bytes(), PI)] {
            if rest.starts_with(name) {
                self.pos += name.len();
                return Ok(value);
            }
        }
        Err(Error::Parse(format!(
            "unknown token at {:?}",
            String::from_utf8_lossy(rest)
        )))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EndpointRepr {
    Num(f64),
    Text(String),
}

impl EndpointRepr {
    fn value(&self) -> Result<f64> {
        match self {
            EndpointRepr::Num(v) => Ok(*v),
            EndpointRepr::Text(s) => parse_endpoint(s),
        }
    }
}

#[derive(Deserialize)]
struct SpectrumRepr {
    intervals: Vec<(EndpointRepr, EndpointRepr)>,
}

#[derive(Serialize)]
struct SpectrumOut {
    intervals: Vec<(f64, f64)>,
}

impl Serialize for IntervalUnion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumOut { intervals: self.parts.iter().map(|p| (p.a, p.b)).collect() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntervalUnion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SpectrumRepr::deserialize(deserializer)?;
        let raw = repr
            .intervals
            .iter()
            .map(|(a, b)| Ok((a.value()?, b.value()?)))
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        IntervalUnion::new(&raw).map_err(de::Error::custom)
    }
}

/// Parses the spectrum JSON format `{"intervals": [[a, b], ...]}`.
pub fn parse_spectrum(json: &str) -> Result<IntervalUnion> {
    serde_json::from_str(json).map_err(|e| {
        // surface the structural error message rather than the serde wrapper
        Error::Parse(e.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(raw: &[(f64, f64)]) -> IntervalUnion {
        IntervalUnion::new(raw).unwrap()
    }

    #[test]
    fn make_union_sorts_and_validates() {
        let e = u(&[(2.0, 3.0), (0.0, 1.0)]);
        assert_eq!(e, u(&[(0.0, 1.0), (2.0, 3.0)]));
        assert_eq!(e.parts()[0], Interval { a: 0.0, b: 1.0 });
        assert!(matches!(IntervalUnion::new(&[(0.0, 2.0), (1.0, 3.0)]), Err(Error::Overlap(..))));
        assert_eq!(IntervalUnion::new(&[]), Err(Error::Empty));
        assert!(matches!(IntervalUnion::new(&[(1.0, 1.0)]), Err(Error::Degenerate(..))));
    }

    #[test]
    fn abutting_intervals_merge() {
        let e = u(&[(0.0, 1.0), (1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(e.len(), 2);
        assert_eq!(e.measure(), 3.0);
    }

    #[test]
    fn measure_examples() {
        assert_eq!(u(&[(0.0, 1.0), (2.0, 3.0)]).measure(), 2.0);
        assert_eq!(u(&[(0.0, 2.0 * PI)]).measure(), 2.0 * PI);
        assert_eq!(u(&[(1.0, 2.0), (3.0, 6.0)]).measure(), 4.0);
    }

    #[test]
    fn gap_examples() {
        assert_eq!(u(&[(0.0, 1.0), (2.0, 3.0)]).gaps().unwrap(), vec![Interval { a: 1.0, b: 2.0 }]);
        assert_eq!(
            u(&[(0.0, 1.0), (2.0, 3.0), (5.0, 6.0)]).gaps().unwrap(),
            vec![Interval { a: 1.0, b: 2.0 }, Interval { a: 3.0, b: 5.0 }]
        );
        assert_eq!(u(&[(0.0, 2.0 * PI)]).gaps(), Err(Error::NoGap));
    }

    #[test]
    fn glue_two_and_three_parts() {
        let (a, b, c, d) = (1.0, 2.5, 3.5, 5.0);
        let tp = 2.0 * PI;
        let g = glue(&u(&[(0.0, a), (b, tp)]), tp).unwrap();
        assert_eq!(g, u(&[(b, tp + a)]));
        let g = glue(&u(&[(0.0, a), (b, c), (d, tp)]), tp).unwrap();
        assert_eq!(g, u(&[(b, c), (d, tp + a)]));
        let e = u(&[(1.0, 2.0)]);
        assert_eq!(glue(&e, tp).unwrap(), e);
        assert!(matches!(glue(&u(&[(0.0, 7.0)]), tp), Err(Error::Domain(_))));
    }

    #[test]
    fn glue_preserves_measure() {
        let e = u(&[(0.0, 0.7), (1.3, 2.9), (4.1, 2.0 * PI)]);
        assert_eq!(glue(&e, 2.0 * PI).unwrap().measure(), e.measure());
    }

    #[test]
    fn level_sets_half_circle() {
        let sets = cyclic_level_sets(&u(&[(0.0, PI)]), 2).unwrap();
        let a1 = sets[0].as_ref().unwrap();
        assert!((a1.measure() - PI).abs() < 1e-15);
        assert!(sets[1].is_none());
    }

    #[test]
    fn level_sets_two_parts() {
        let s = u(&[(1.0, 2.0), (3.0, 6.0)]);
        let sets = cyclic_level_sets(&s, 2).unwrap();
        let a1 = sets[0].as_ref().unwrap();
        let a2 = sets[1].as_ref().unwrap();
        assert!((a1.measure() - 3.0).abs() < 1e-12);
        assert_eq!(cyclic_part_count(Some(a1), PI), 1);
        assert_eq!(a2, &u(&[(1.0, 2.0)]));
    }

    #[test]
    fn level_sets_full_circle() {
        let sets = cyclic_level_sets(&u(&[(0.0, 2.0 * PI)]), 3).unwrap();
        for a in &sets {
            assert_eq!(a.as_ref().unwrap(), &u(&[(0.0, 2.0 * PI / 3.0)]));
        }
    }

    #[test]
    fn min_reducing_examples() {
        assert_eq!(min_reducing_n(&u(&[(1.0, 2.0), (3.0, 6.0)]), DEFAULT_N_MAX).unwrap(), 2);
        assert_eq!(min_reducing_n(&u(&[(0.0, PI)]), DEFAULT_N_MAX).unwrap(), 1);
        let s = u(&[(0.0, 1.0), (1.5, 2.5), (3.7, 5.0)]);
        let n = min_reducing_n(&s, DEFAULT_N_MAX).unwrap();
        let cell = 2.0 * PI / n as f64;
        for a in cyclic_level_sets(&s, n).unwrap() {
            assert!(cyclic_part_count(a.as_ref(), cell) <= 2);
        }
    }

    #[test]
    fn min_reducing_reports_failure() {
        let s = u(&[(0.0, 1.0), (1.5, 2.5), (3.7, 5.0)]);
        assert!(matches!(min_reducing_n(&s, 1), Err(Error::NotFound(1))));
    }

    #[test]
    fn level_sets_reject_outside() {
        assert!(matches!(cyclic_level_sets(&u(&[(1.0, 7.0)]), 2), Err(Error::Domain(_))));
    }

    #[test]
    fn endpoint_expressions() {
        assert_eq!(parse_endpoint("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_endpoint("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_endpoint(" -1.5e0 ").unwrap(), -1.5);
        assert_eq!(parse_endpoint("2*(pi-1)").unwrap(), 2.0 * (PI - 1.0));
        assert!(parse_endpoint("2*tau").is_err());
        assert!(parse_endpoint("1/0").is_err());
    }

    #[test]
    fn spectrum_json() {
        let e = parse_spectrum(r#"{"intervals": [[0, "2*pi"]]}"#).unwrap();
        assert_eq!(e.measure(), 2.0 * PI);
        let e = parse_spectrum(r#"{"intervals": [[3, 6], [1, 2]]}"#).unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"intervals":[[1.0,2.0],[3.0,6.0]]}"#);
        assert!(parse_spectrum(r#"{"intervals": [[0, 2], [1, 3]]}"#).is_err());
    }

    #[test]
    fn unit_cell_normalization() {
        let e = u(&[(10.0, 12.0), (14.0, 20.0)]);
        let (n, shift, scale) = e.to_unit_cell();
        assert_eq!(shift, 10.0);
        assert!((scale - 2.0 * PI / 10.0).abs() < 1e-15);
        assert!(n.within(0.0, 2.0 * PI));
    }
}
