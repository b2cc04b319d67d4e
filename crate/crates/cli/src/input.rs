use crate::output::Failure;
use crate::Common;
use mexp::lattice::{self, FrequencySet};
use mexp::{GenFunctionSpec, IntervalUnion, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs;

pub fn spectrum(common: &Common) -> Result<IntervalUnion, Failure> {
    let src = common.spectrum.as_deref().ok_or_else(|| Failure::Parse("--spectrum is required".into()))?;
    let trimmed = src.trim_start();
    let text = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        src.to_string()
    } else {
        fs::read_to_string(src).map_err(|e| Failure::Other(format!("{src}: {e}")))?
    };
    let text = text.trim();
    let json = if text.starts_with('[') { format!("{{\"intervals\": {text}}}") } else { text.to_string() };
    Ok(mexp::intervals::parse_spectrum(&json)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FreqFile {
    Set { points: Vec<PointRepr> },
    List(Vec<PointRepr>),
}

/// Frequencies from `--freqs` sorted by real part, duplicates kept so that the
/// Gram stage can report them.
pub fn freqs_file(common: &Common) -> Result<Option<Vec<C64>>, Failure> {
    let Some(path) = &common.freqs else { return Ok(None) };
    let text = fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
    let parsed: FreqFile =
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let raw = match parsed {
        FreqFile::Set { points } | FreqFile::List(points) => points,
    };
    let mut pts: Vec<C64> = raw
        .into_iter()
        .map(|p| match p {
            PointRepr::Real(x) => C64::new(x, 0.0),
            PointRepr::Pair([re, im]) => C64::new(re, im),
        })
        .collect();
    if pts.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Failure::Parse("non-finite frequency".into()));
    }
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(Some(pts))
}

/// `E = a + E'/s` with `E' ⊂ [0, 2π]` starting at 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Normalization {
    pub shift: f64,
    pub scale: f64,
}

impl Normalization {
    pub fn of(e: &IntervalUnion) -> Self {
        let scale = if e.hull_len() > 2.0 * PI { 2.0 * PI / e.hull_len() } else { 1.0 };
        Normalization { shift: e.min(), scale }
    }

    pub fn apply(&self, e: &IntervalUnion) -> IntervalUnion {
        let moved = e.translate(-self.shift);
        if self.scale == 1.0 {
            moved
        } else {
            moved.scale(self.scale)
        }
    }
}

#[derive(Serialize)]
pub struct GenFunctionFile {
    pub normalization: Normalization,
    pub components: Vec<mexp::genfun::ComponentSpec>,
    pub trunc: usize,
    pub tail: mexp::TailPolicy,
}

pub struct Basis {
    pub set: FrequencySet,
    pub genfun: GenFunctionSpec,
    pub normalization: Normalization,
}

impl Basis {
    /// `G(z) = G'(z/s)` for the normalized spectrum's function `G'`.
    pub fn genfun_eval(&self, z: C64) -> C64 {
        self.genfun.vp_eval(z / self.normalization.scale)
    }

    pub fn file(&self) -> GenFunctionFile {
        GenFunctionFile {
            normalization: self.normalization,
            components: self.genfun.specs(),
            trunc: self.genfun.trunc,
            tail: self.genfun.tail,
        }
    }
}

/// Basis frequencies for `E`: a frequency `γ'` for the normalized spectrum
/// becomes `s·γ'`.
pub fn basis(e: &IntervalUnion, trunc: usize) -> Result<Basis, Failure> {
    let normalization = Normalization::of(e);
    let unit = normalization.apply(e);
    let inner_trunc = (trunc as f64 / normalization.scale).ceil() as usize;
    let (set, genfun) = lattice::multiband_basis(&unit, inner_trunc)?;
    let set = if normalization.scale == 1.0 {
        set
    } else {
        let label = set.label.clone();
        FrequencySet::new(set.points.iter().map(|p| p * normalization.scale).collect(), &label)?
    };
    Ok(Basis { set, genfun, normalization })
}

/// Frequencies from `--freqs`, or the constructed basis of the spectrum.
pub fn frequencies(common: &Common, e: &IntervalUnion) -> Result<Vec<C64>, Failure> {
    match freqs_file(common)? {
        Some(f) => Ok(f),
        None => Ok(basis(e, common.trunc)?.set.points),
    }
}

pub fn parse_point(src: &str) -> Result<C64, Failure> {
    let parts: Vec<&str> = src.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| Failure::Parse(format!("bad point {src:?}")));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(Failure::Parse(format!("bad point {src:?}: expected re,im"))),
    }
}
