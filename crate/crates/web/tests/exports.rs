use mexp_web::{basis, level_sets, riesz_bounds};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn level_sets_example() {
    let v = parse(level_sets("[[1,2],[3,6]]", 0));
    assert_eq!(v["N"], 2);
    let m1 = v["levels"][0]["measure"].as_f64().unwrap();
    let m2 = v["levels"][1]["measure"].as_f64().unwrap();
    assert!((m1 - 3.0).abs() < 1e-12 && (m2 - 1.0).abs() < 1e-12);
}

#[test]
fn basis_profile_vanishes_on_points() {
    let v = parse(basis(r#"[[0,"2*pi"]]"#, 50, 3.0, 0.0, 7));
    assert_eq!(v["label"], "lattice");
    assert_eq!(v["points"].as_array().unwrap().len(), 101);
    let prof = v["profile"].as_array().unwrap();
    // samples at -3, -2, ..., 3 are all zeros of sin(πx)
    assert!(prof.iter().all(|p| p[1].as_f64().unwrap() < 1e-9));
    let v = parse(basis(r#"[[0,1],[2,"2*pi"]]"#, 300, 10.0, 0.5, 50));
    let d = v["density"].as_f64().unwrap() / v["target_density"].as_f64().unwrap();
    assert!((d - 1.0).abs() < 0.05);
}

#[test]
fn riesz_bounds_of_integers() {
    let v = parse(riesz_bounds(r#"[[0,"2*pi"]]"#, 100, "20, 40"));
    for b in v["bounds"].as_array().unwrap() {
        assert!((b["A_normalized"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((b["condition"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn errors_are_json() {
    let v = parse(riesz_bounds("[[0,2],[1,3]]", 100, "10"));
    assert!(v["error"].as_str().unwrap().contains("overlap"));
    let v = parse(riesz_bounds(r#"[[0,"2*pi"]]"#, 100, "10,x"));
    assert!(v["error"].is_string());
    let v = parse(basis("[[0,0.5],[1,1.5],[2,2.5],[3,3.5]]", 50, 5.0, 0.0, 10));
    assert!(v["error"].as_str().unwrap().contains("unsupported"));
}
