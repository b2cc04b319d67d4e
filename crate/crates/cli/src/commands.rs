use crate::input;
use crate::output::{fmt_f, Failure, Run};
use crate::Common;
use mexp::biorth::{self, BiorthElement, FTuple};
use mexp::genfun::distance_to_sorted;
use mexp::gram::{self, centered_window, DualSystem};
use mexp::intervals;
use mexp::lattice::{self, DensityMode};
use mexp::{ExpSum, ExpTerm, IntervalUnion, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| fmt_f(v)).collect()
}

pub fn spectrum(common: &Common, run: &mut Run) -> Result<(), Failure> {
    let e = input::spectrum(common)?;
    let norm = input::Normalization::of(&e);
    let unit = norm.apply(&e);
    let glued = intervals::glue(&unit, TWO_PI)?;
    let gaps = if e.len() > 1 { e.gaps()? } else { Vec::new() };
    let reduction = if glued.len() > 1 {
        let s = if e.within(0.0, TWO_PI) { e.clone() } else { unit.clone() };
        Some(intervals::min_reducing_n(&s, intervals::DEFAULT_N_MAX)?)
    } else {
        None
    };
    run.report("measure", e.measure())?;
    run.report("parts", e.len())?;
    run.report("gaps", gaps.iter().map(|g| (g.a, g.b)).collect::<Vec<_>>())?;
    run.report("glued", &glued)?;
    run.report("min_reducing_N", reduction)?;
    run.json(
        "spectrum.json",
        &json!({
            "spectrum": e,
            "measure": e.measure(),
            "gaps": gaps.iter().map(|g| (g.a, g.b)).collect::<Vec<_>>(),
            "normalization": norm,
            "glued": glued,
            "min_reducing_N": reduction,
        }),
    )
}

fn density_rows(points: &[C64], radii: &[f64], target: Option<f64>) -> Result<Vec<Vec<String>>, Failure> {
    radii
        .iter()
        .map(|&r| {
            let count = points.iter().filter(|p| p.norm() <= r).count();
            let disk = lattice::density_estimate(points, r, DensityMode::Disk)?;
            let uniform = lattice::density_estimate(points, r, DensityMode::Uniform)?;
            let mut out = row(&[r, count as f64, disk, uniform]);
            match target {
                Some(t) => out.extend(row(&[t, disk / t])),
                None => out.extend([String::new(), String::new()]),
            }
            Ok(out)
        })
        .collect()
}

const DENSITY_HEADER: [&str; 6] = [
    "radius [freq]",
    "count [points]",
    "disk_density [points/freq]",
    "uniform_density [points/freq]",
    "target |E|/2pi [points/freq]",
    "disk_ratio [1]",
];

pub fn basis(common: &Common, run: &mut Run) -> Result<(), Failure> {
    let e = input::spectrum(common)?;
    let b = input::basis(&e, common.trunc)?;
    let points = &b.set.points;
    let inside = points.iter().filter(|p| p.norm() <= common.trunc as f64).count();
    let target = e.measure() / TWO_PI;
    let radii: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|f| f * common.trunc as f64).collect();
    run.report("label", &b.set.label)?;
    run.report("points", inside)?;
    run.report("normalization", b.normalization)?;
    run.report(
        "density_ratio",
        lattice::density_estimate(points, common.trunc as f64, DensityMode::Disk)? / target,
    )?;
    run.json("gamma.json", &b.set)?;
    run.json("genfun.json", &b.file())?;
    let rows = density_rows(points, &radii, Some(target))?;
    run.csv("density.csv", &DENSITY_HEADER, &rows)
}

fn strip_points(rng: &mut ChaCha8Rng, half_width: f64, count: usize) -> Vec<C64> {
    (0..count)
        .map(|_| C64::new(rng.random_range(-half_width..half_width), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn genfun_eval(common: &Common, run: &mut Run, points: &[String], count: usize) -> Result<(), Failure> {
    let e = input::spectrum(common)?;
    let b = input::basis(&e, common.trunc)?;
    let zs: Vec<C64> = if points.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
        let half = (0.5 * b.genfun.trusted_radius() * b.normalization.scale).min(common.trunc as f64);
        strip_points(&mut rng, half, count)
    } else {
        points.iter().map(|p| input::parse_point(p)).collect::<Result<_, _>>()?
    };
    let zeros: Vec<f64> = b.set.points.iter().map(|p| p.re).collect();
    let rows: Vec<Vec<String>> = zs
        .iter()
        .map(|&z| {
            let g = b.genfun_eval(z);
            row(&[z.re, z.im, g.re, g.im, g.norm(), distance_to_sorted(&zeros, z)])
        })
        .collect();
    run.report("evaluated", rows.len())?;
    run.json("genfun.json", &b.file())?;
    run.csv(
        "genfun_eval.csv",
        &["re_z [freq]", "im_z [freq]", "re_G [1]", "im_G [1]", "abs_G [1]", "dist_to_zeros [freq]"],
        &rows,
    )
}

pub fn genfun_check(common: &Common, run: &mut Run, samples: usize, y_max: f64) -> Result<(), Failure> {
    let e = input::spectrum(common)?;
    let b = input::basis(&e, common.trunc)?;
    let g = &b.genfun;
    let (c1, c2) = g.strip_comparability(samples)?;
    let (up, down) = g.exp_type_profile(y_max)?;
    let width = g.width();
    let mut derivs = Vec::new();
    for gamma in g.zeros().into_iter().filter(|x| x.abs() <= 100.0) {
        derivs.push((gamma, g.derivative_at_zero(gamma)?.norm()));
    }
    let dmin = derivs.iter().fold(f64::INFINITY, |a, d| a.min(d.1));
    let dmax = derivs.iter().fold(0.0f64, |a, d| a.max(d.1));
    run.report("strip_c1", c1)?;
    run.report("strip_c2", c2)?;
    run.report("type_up", up)?;
    run.report("type_down", down)?;
    run.report("width", width)?;
    run.report("derivative_ratio", dmax / dmin)?;
    let metrics = [
        ("strip_c1 [1]", c1),
        ("strip_c2 [1]", c2),
        ("type_up [1/freq]", up),
        ("type_down [1/freq]", down),
        ("width [1/freq]", width),
        ("min_abs_derivative [1]", dmin),
        ("max_abs_derivative [1]", dmax),
        ("normalization_scale [1]", b.normalization.scale),
    ];
    let rows: Vec<Vec<String>> = metrics.iter().map(|(k, v)| vec![k.to_string(), fmt_f(*v)]).collect();
    run.csv("genfun_check.csv", &["metric", "value"], &rows)?;
    let rows: Vec<Vec<String>> = derivs.iter().map(|&(x, d)| row(&[x, d])).collect();
    run.csv("genfun_zeros.csv", &["gamma [normalized freq]", "abs_derivative [1]"], &rows)
}

fn bounds_rows(e: &IntervalUnion, freqs: &[C64], windows: &[usize]) -> Result<Vec<Vec<String>>, Failure> {
    let ws: Vec<usize> = windows.iter().copied().filter(|&w| w > 0 && w <= freqs.len()).collect();
    if ws.is_empty() {
        return Err(Failure::Parse(format!("no window fits {} frequencies", freqs.len())));
    }
    Ok(gram::riesz_bounds(e, freqs, &ws)?
        .iter()
        .map(|r| {
            let mut v = vec![r.window.to_string()];
            v.extend(row(&[r.a, r.b, r.a_normalized, r.b_normalized, r.cond()]));
            v
        })
        .collect())
}

const BOUNDS_HEADER: [&str; 6] = [
    "window [count]",
    "A_raw [L2^2]",
    "B_raw [L2^2]",
    "A_normalized [1]",
    "B_normalized [1]",
    "condition [1]",
];

pub fn gram_bounds(common: &Common, run: &mut Run, windows: &[usize]) -> Result<(), Failure> {
    let e = input::spectrum(common)?;
    let freqs = input::frequencies(common, &e)?;
    let rows = bounds_rows(&e, &freqs, windows)?;
    run.report("windows", rows.len())?;
    run.csv("bounds.csv", &BOUNDS_HEADER, &rows)
}

fn section(common: &Common, window: usize) -> Result<(IntervalUnion, Vec<C64>, DualSystem), Failure> {
    let e = input::spectrum(common)?;
    let freqs = input::frequencies(common, &e)?;
    if window == 0 || window > freqs.len() {
        return Err(Failure::Parse(format!("window {window} does not fit {} frequencies", freqs.len())));
    }
    let win = centered_window(&freqs, window);
    let dual = gram::dual_system(&e, &win)?;
    Ok((e, freqs, dual))
}

pub fn dual(common: &Common, run: &mut Run, window: usize) -> Result<(), Failure> {
    let (_, _, dual) = section(common, window)?;
    let rows: Vec<Vec<String>> = (0..dual.freqs().len())
        .map(|n| {
            let lam = dual.freqs()[n];
            let c = dual.coeffs[(n, n)];
            row(&[n as f64, lam.re, lam.im, dual.dual_element(n).norm(), c.re, c.im])
        })
        .collect();
    run.report("biorthogonality_defect", dual.biorthogonality_defect())?;
    run.report("eig_min", dual.eig_min)?;
    run.report("eig_max", dual.eig_max)?;
    run.csv(
        "dual.csv",
        &["index [count]", "re_lambda [freq]", "im_lambda [freq]", "dual_norm [L2]", "re_C_nn [1/L2^2]", "im_C_nn [1/L2^2]"],
        &rows,
    )
}

struct Formula {
    ft: FTuple,
    element: BiorthElement,
    second: Option<BiorthElement>,
}

fn nearest_non_anchor(win: &[C64], anchors: &[C64]) -> Result<C64, Failure> {
    win.iter()
        .copied()
        .filter(|p| !anchors.contains(p))
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| Failure::Parse("window holds only anchors".into()))
}

fn formula(e: &IntervalUnion, dual: &DualSystem, pole: Option<C64>) -> Result<Formula, Failure> {
    if e.len() > 3 {
        return Err(Failure::Unsupported(format!("{} intervals (determinant formulas cover at most 3)", e.len())));
    }
    let (anchors, _) = biorth::select_independent(dual, e.len())?;
    let ft = biorth::build_f(&anchors, dual)?;
    let pole = match pole {
        Some(p) => p,
        None => nearest_non_anchor(dual.freqs(), &ft.anchors)?,
    };
    let (element, second) = match e.len() {
        2 => {
            let (a, b) = biorth::biorth_two(&ft, pole)?;
            (a, Some(b))
        }
        3 => (biorth::biorth_three(&ft, pole, 1)?, Some(biorth::biorth_three(&ft, pole, 2)?)),
        _ => (biorth::biorth_element(&ft, pole, 1)?, None),
    };
    Ok(Formula { ft, element, second })
}

fn s_scale(ft: &FTuple) -> f64 {
    biorth::probe_grid().iter().fold(0.0f64, |a, &z| a.max(ft.s_det(z).norm()))
}

pub fn biorth(common: &Common, run: &mut Run, window: usize, pole: Option<&str>) -> Result<(), Failure> {
    let (e, _, dual) = section(common, window)?;
    let pole = pole.map(input::parse_point).transpose()?;
    let fm = formula(&e, &dual, pole)?;
    let scale = s_scale(&fm.ft);
    let mut trace = Vec::new();
    for k in 0..=400 {
        let x = -20.0 + 0.1 * k as f64;
        let s = fm.ft.s_det(C64::new(x, 0.0));
        trace.push(row(&[x, s.re, s.im, s.norm() / scale]));
    }
    let mut elt = Vec::new();
    for k in 0..=400 {
        let x = -20.0 + 0.1 * k as f64;
        let v = fm.element.eval(C64::new(x, 0.0));
        elt.push(row(&[x, v.re, v.im, v.norm()]));
    }
    run.report("anchors", &fm.ft.anchors)?;
    run.report("pole", fm.element.pole)?;
    run.report("cross_validation", biorth::cross_validate(&fm.element, &dual)?)?;
    run.json("biorth.json", &fm.element)?;
    run.csv("s_trace.csv", &["x [freq]", "re_S [1]", "im_S [1]", "abs_S_rel [1]"], &trace)?;
    run.csv("element.csv", &["x [freq]", "re_f [1]", "im_f [1]", "abs_f [1]"], &elt)
}

fn random_sum(rng: &mut ChaCha8Rng, e: &IntervalUnion) -> Result<ExpSum, Failure> {
    let mut terms = Vec::new();
    for j in 0..e.len() {
        for _ in 0..2 {
            let poly = (0..2).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            terms.push(ExpTerm::new(j, poly, C64::new(rng.random_range(-5.0..5.0), 0.0)));
        }
    }
    Ok(ExpSum::new(e.clone(), terms)?)
}

struct CheckTable {
    rows: Vec<Vec<String>>,
    first_failure: Option<String>,
}

impl CheckTable {
    fn new() -> Self {
        CheckTable { rows: Vec::new(), first_failure: None }
    }

    /// `asserted = false` rows are reported only.
    fn push(&mut self, name: &str, value: f64, tol: f64, upper: bool, asserted: bool) {
        let ok = if upper { value <= tol } else { value >= tol };
        let status = match (asserted, ok) {
            (false, _) => "reported",
            (true, true) => "pass",
            (true, false) => "fail",
        };
        if asserted && !ok && self.first_failure.is_none() {
            let rel = if upper { "<=" } else { ">=" };
            self.first_failure = Some(format!("{name} = {value:e} (required {rel} {tol:e})"));
        }
        self.rows.push(vec![name.to_string(), fmt_f(value), fmt_f(tol), status.to_string()]);
    }
}

pub fn verify(common: &Common, run: &mut Run, window: usize) -> Result<(), Failure> {
    let tol = &common.tol;
    let (e, freqs, dual) = section(common, window)?;
    let win = dual.freqs().to_vec();
    let mut table = CheckTable::new();

    let bw: Vec<usize> = [window / 4, window / 2, window].into_iter().filter(|&w| w >= 2).collect();
    let bounds = bounds_rows(&e, &freqs, &bw)?;
    run.csv("bounds.csv", &BOUNDS_HEADER, &bounds)?;

    table.push("biorthogonality_defect", dual.biorthogonality_defect(), tol.tol_defect, true, true);
    let fm = formula(&e, &dual, None)?;
    let probes = biorth::probe_grid();
    let f_van = fm
        .ft
        .f
        .iter()
        .map(|f| {
            let sc = probes.iter().fold(0.0f64, |a, &z| a.max(f.eval(z).norm()));
            win.iter().filter(|m| !fm.ft.anchors.contains(m)).fold(0.0f64, |a, &m| a.max(f.eval(m).norm())) / sc
        })
        .fold(0.0f64, f64::max);
    table.push("F_vanishing [scale]", f_van, tol.tol_vanish, true, true);
    let el = &fm.element;
    let van = win.iter().filter(|&&m| m != el.pole).fold(0.0f64, |a, &m| a.max(el.numerator.eval(m).norm())) / el.scale();
    table.push("element_vanishing [scale]", van, tol.tol_vanish, true, true);
    let divisible = el.numerator.divisibility_check(el.pole).unwrap_or(false);
    table.push("numerator_divisible", if divisible { 1.0 } else { 0.0 }, 1.0, false, true);
    table.push("value_at_pole_error", (el.eval(el.pole) - 1.0).norm(), 1e-9, true, true);
    if let Some(second) = &fm.second {
        let diff = probes.iter().fold(0.0f64, |a, &z| {
            let v = el.eval(z);
            a.max((v - second.eval(z)).norm() / v.norm().max(1e-300))
        });
        if e.len() == 2 {
            table.push("forms_agree [rel]", diff, tol.tol_forms, true, true);
        } else {
            let cof = biorth::cofactor_identity_residual(&fm.ft, el.pole) / el.scale();
            table.push("cofactor_identity [scale]", cof, tol.tol_cofactor, true, true);
            table.push("columns_proportional [rel]", diff, tol.tol_proportional, true, true);
        }
    }
    let scale = s_scale(&fm.ft);
    let s_on = win.iter().fold(0.0f64, |a, &l| a.max(fm.ft.s_det(l).norm())) / scale;
    table.push("S_on_lambda [scale]", s_on, tol.tol_s, true, true);
    let s_mid = win
        .windows(2)
        .map(|w| (w[0] + w[1]) * 0.5)
        .filter(|m| m.re.abs() <= 10.0)
        .fold(f64::INFINITY, |a, m| a.min(fm.ft.s_det(m).norm()))
        / scale;
    table.push("S_midpoint_min [scale]", s_mid, 1e-3, false, false);
    table.push("cross_validation [rel L2]", biorth::cross_validate(el, &dual)?, 0.05, true, false);

    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let f = random_sum(&mut rng, &e)?;
    let mut ts: Vec<usize> = [window / 8, window / 4, window / 2, window].into_iter().filter(|&t| t >= 2).collect();
    ts.dedup();
    let res = gram::completeness_residual(&e, &freqs, &f, &ts)?;
    let rows: Vec<Vec<String>> = res
        .iter()
        .map(|r| {
            let mut v = vec![r.truncation.to_string()];
            v.extend(row(&[r.residual_exponentials, r.residual_duals]));
            v
        })
        .collect();
    run.csv("residuals.csv", &["truncation [count]", "residual_exponentials [rel L2]", "residual_duals [rel L2]"], &rows)?;
    let duals: Vec<f64> = res.iter().map(|r| r.residual_duals).collect();
    let worst_rise = duals.windows(2).fold(0.0f64, |a, w| a.max(w[1] / w[0] - 1.0));
    table.push("residual_rise [rel]", worst_rise, tol.tol_jitter, true, true);
    table.push("residual_final [rel L2]", *duals.last().unwrap_or(&0.0), tol.tol_residual, true, true);

    run.csv("biorth_check.csv", &["check", "value", "tolerance", "status"], &table.rows)?;
    run.report("biorthogonality_defect", dual.biorthogonality_defect())?;
    run.report("residuals", &duals)?;
    match table.first_failure {
        Some(f) => Err(Failure::Invariant(f)),
        None => {
            run.report("verdict", "all asserted checks pass")?;
            Ok(())
        }
    }
}

pub fn density(common: &Common, run: &mut Run, radius: &[f64], mode: DensityMode) -> Result<(), Failure> {
    let spectrum = common.spectrum.as_ref().map(|_| input::spectrum(common)).transpose()?;
    let points = match (input::freqs_file(common)?, &spectrum) {
        (Some(p), _) => p,
        (None, Some(e)) => input::basis(e, common.trunc)?.set.points,
        (None, None) => return Err(Failure::Parse("density needs --freqs or --spectrum".into())),
    };
    let target = spectrum.as_ref().map(|e| e.measure() / TWO_PI);
    let rows = density_rows(&points, radius, target)?;
    let last = radius.last().copied().unwrap_or(0.0);
    run.report("mode", mode)?;
    run.report("estimate", lattice::density_estimate(&points, last, mode)?)?;
    if let Some(t) = target {
        let ratio = lattice::density_estimate(&points, last, mode)? / t;
        run.report("ratio", ratio)?;
        if (ratio - 1.0).abs() > common.tol.tol_density {
            eprintln!("note: density ratio {ratio} differs from 1 by more than {}", common.tol.tol_density);
        }
    }
    run.csv("density.csv", &DENSITY_HEADER, &rows)
}

