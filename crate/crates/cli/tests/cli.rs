use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cvconc::corpus::{random_axes, random_grid_state, random_product_state, rng_from_seed};
use cvconc::io::{read_grid_state, write_gaussian, write_grid_state};
use cvconc::state::{Bipartition, GaussianPureState, GridState};
use cvconc::Complex64;
use serde_json::Value;
use tempfile::TempDir;

fn cvconc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvconc"))
        .args(args)
        .env("CVCONC_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_grid(dir: &TempDir, name: &str, s: &GridState) -> PathBuf {
    let p = dir.path().join(name);
    write_grid_state(&p, s).unwrap();
    p
}

fn write_two_mode(dir: &TempDir, name: &str, c: f64) -> PathBuf {
    let p = dir.path().join(name);
    write_gaussian(&p, &GaussianPureState::two_mode(1.0, 1.0, Complex64::new(c, 0.0)).unwrap()).unwrap();
    p
}

#[test]
fn gaussian_command() {
    let out = cvconc(&["gaussian", "--a", "1", "--b", "1", "--c", "0"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["E2"], 0.0);
    assert_eq!(v["verdict"], "separable");

    let v = json(&cvconc(&["gaussian", "--a", "1", "--b", "1", "--c", "1", "--branch", "real"]));
    assert!((v["E2"].as_f64().unwrap() - 0.2679491924311227).abs() < 1e-15);
    assert_eq!(v["verdict"], "entangled");

    let out = cvconc(&["gaussian", "--a", "1", "--b", "1", "--c", "2", "--branch", "real"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unphysical"));

    let v = json(&cvconc(&["gaussian", "--a", "1", "--b", "1", "--c", "-10", "--branch", "imag"]));
    assert!((v["E2"].as_f64().unwrap() - 2.0 * (1.0 - 2.0 / 104f64.sqrt())).abs() < 1e-15);
    assert_eq!(code(&cvconc(&["gaussian", "--a", "0", "--b", "1", "--c", "0"])), 1);
}

#[test]
fn sweep_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = cvconc(&[
            "sweep", "--branch", "real", "--c-min", "-1.99", "--c-max", "1.99", "--steps", "399", "--out",
            path_str(p),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let rows = cvconc::io::read_sweep_csv(bytes.as_slice()).unwrap();
    assert_eq!(rows.len(), 399);
    assert_eq!(rows[199].c, 0.0);
    assert_eq!(rows[199].e2, 0.0);
    for (r, s) in rows.iter().zip(rows.iter().rev()) {
        assert!((r.c + s.c).abs() < 1e-15);
        assert!((r.e2 - s.e2).abs() < 1e-13);
    }
    assert!(rows[0].e2 > 1.8 && rows[0].norm < rows[199].norm);

    let one = dir.path().join("one.csv");
    cvconc(&["sweep", "--c-min", "0.5", "--c-max", "1.5", "--steps", "1", "--out", path_str(&one)]);
    let text = std::fs::read_to_string(&one).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("5.0000000000000000e-1,"));

    let imag = dir.path().join("imag.csv");
    cvconc(&[
        "sweep", "--branch", "imag", "--c-min", "-10", "--c-max", "10", "--steps", "401", "--out",
        path_str(&imag),
    ]);
    let rows = cvconc::io::read_sweep_csv(std::fs::File::open(&imag).unwrap()).unwrap();
    assert_eq!(rows.len(), 401);
    assert!(rows.iter().all(|r| r.norm == rows[0].norm));
    assert!(rows[200].e2 == 0.0 && rows[400].e2 > 1.6);

    let bad = cvconc(&["sweep", "--c-min", "-2", "--c-max", "2", "--steps", "5", "--out", path_str(&one)]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn concurrence_on_product_and_gaussian_files() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from_seed(17);
    let axes = random_axes(&mut rng, 2, 6, 10).unwrap();
    let prod = random_product_state(&mut rng, &axes, &Bipartition::new(2, [0]).unwrap()).unwrap();
    let p = write_grid(&dir, "prod.json", &prod);
    let out = cvconc(&["concurrence", path_str(&p), "--M", "0", "--routes", "all"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for key in ["route_a_wedge", "route_b_overlap", "route_c_purity", "route_lambda", "route_d_hilbert_schmidt", "route_e_pt_fourth"] {
        assert!(v[key].as_f64().unwrap().abs() < 1e-12, "{key}: {}", v[key]);
    }
    assert_eq!(v["verdict"], "separable");

    let g = write_two_mode(&dir, "g.json", 1.0);
    let v = json(&cvconc(&["concurrence", path_str(&g), "--grid", "48", "--box", "6", "--routes", "b"]));
    assert!((v["route_b_overlap"].as_f64().unwrap() - 0.2679491924311227).abs() < 2e-3);
    assert!((v["exact_E2"].as_f64().unwrap() - 0.2679491924311227).abs() < 1e-12);

    assert_eq!(code(&cvconc(&["concurrence", path_str(&p), "--routes", "z"])), 1);
    assert_eq!(code(&cvconc(&["concurrence", path_str(&p), "--M", "0,1"])), 1);
    assert_eq!(code(&cvconc(&["concurrence", "/nonexistent.json"])), 1);
}

/// `E² = 2(1 - Σ|ρ_M(y,y')|²)` with `ρ_M` accumulated term by term.
fn brute_force_three_axis(s: &GridState, m: &[usize]) -> f64 {
    let shape = s.shape();
    let w = s.weights();
    let amps = s.amplitudes();
    let idx = |lin: usize| [lin / (shape[1] * shape[2]), lin / shape[2] % shape[1], lin % shape[2]];
    let key = |i: &[usize; 3], inside: bool| -> Vec<usize> {
        (0..3).filter(|k| m.contains(k) == inside).map(|k| i[k]).collect()
    };
    let mut rho = std::collections::HashMap::<(Vec<usize>, Vec<usize>), Complex64>::new();
    for u in 0..amps.len() {
        for v in 0..amps.len() {
            let (iu, iv) = (idx(u), idx(v));
            if key(&iu, false) != key(&iv, false) {
                continue;
            }
            *rho.entry((key(&iu, true), key(&iv, true))).or_default() +=
                amps[u] * amps[v].conj() * (w[u] * w[v]).sqrt();
        }
    }
    2.0 * (1.0 - rho.values().map(|z| z.norm_sqr()).sum::<f64>())
}

#[test]
fn concurrence_with_non_contiguous_bipartition() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from_seed(23);
    let axes = random_axes(&mut rng, 3, 3, 5).unwrap();
    let st = random_grid_state(&mut rng, &axes).unwrap();
    let p = write_grid(&dir, "three.json", &st);
    let out = cvconc(&["concurrence", path_str(&p), "--M", "0,2", "--routes", "all"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let expected = brute_force_three_axis(&st, &[0, 2]);
    assert!(expected > 0.1);
    for key in ["route_a_wedge", "route_b_overlap", "route_c_purity", "route_lambda", "route_d_hilbert_schmidt", "route_e_pt_fourth"] {
        assert!((v[key].as_f64().unwrap() - expected).abs() < 1e-10, "{key}");
    }
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from_seed(31);
    let axes = random_axes(&mut rng, 2, 8, 12).unwrap();
    let st = random_grid_state(&mut rng, &axes).unwrap();
    let p = write_grid(&dir, "ok.json", &st);
    let out = cvconc(&["verify", path_str(&p), "--M", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["pass"], true);

    let bad = st.map_amplitudes(|_, a| a * 0.9f64.sqrt()).unwrap();
    let q = write_grid(&dir, "bad.json", &bad);
    let out = cvconc(&["verify", path_str(&q)]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["checks"][0]["name"], "normalization");
    assert_eq!(v["checks"][0]["pass"], false);

    let sep = random_product_state(&mut rng, &axes, &Bipartition::new(2, [0]).unwrap()).unwrap();
    let r = write_grid(&dir, "sep.json", &sep);
    let v = json(&cvconc(&["verify", path_str(&r)]));
    let names: Vec<_> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_owned()).collect();
    assert!(names.contains(&"ppt_separable".to_owned()));
    assert!(names.contains(&"lambda_invariance_separable".to_owned()));
    assert_eq!(v["pass"], true);
}

#[test]
fn factor_command() {
    let dir = TempDir::new().unwrap();
    let g = write_two_mode(&dir, "prod.json", 0.0);
    let (fm, fr) = (dir.path().join("m.json"), dir.path().join("r.json"));
    let out = cvconc(&[
        "factor", path_str(&g), "--grid", "32", "--box", "6", "--out-m", path_str(&fm), "--out-rest", path_str(&fr),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["reconstruction_error"].as_f64().unwrap() < 1e-9);
    let m = read_grid_state(&fm).unwrap();
    assert_eq!(m.shape(), vec![32]);
    // a single-mode Gaussian sampled on the grid: symmetric about the origin
    let a = m.amplitudes();
    assert!((a[0] / a[16] - a[31] / a[16]).norm() < 1e-12);

    let again = cvconc(&["factor", path_str(&fm), "--out-m", path_str(&fm), "--out-rest", path_str(&fr)]);
    assert_eq!(code(&again), 1);

    let e = write_two_mode(&dir, "ent.json", 1.0);
    let out = cvconc(&["factor", path_str(&e), "--out-m", path_str(&fm), "--out-rest", path_str(&fr)]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("witness") && err.contains("m_indices"), "{err}");
}

#[test]
fn thread_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_cvconc"))
        .args(["gaussian", "--a", "1", "--b", "1", "--c", "0"])
        .env("CVCONC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_cvconc"))
        .args(["gaussian", "--a", "1", "--b", "1", "--c", "0"])
        .env("CVCONC_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
