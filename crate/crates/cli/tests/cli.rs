use std::path::Path;
use std::process::{Command, Output};

fn erkn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erkn-wave"))
        .args(args)
        .env_remove("ERKN_WAVE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows (after the provenance and header lines).
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn converge_default_has_110_rows_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o = erkn(&["converge", "--output", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = erkn(&[
        "converge",
        "--threads",
        "1",
        "--output",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let mut lines = text.lines();
    let prov = lines.next().unwrap();
    assert!(prov.starts_with("# command=converge config_sha256="));
    assert!(prov.contains("prng=chacha20") && prov.ends_with("seed=1"));
    assert_eq!(
        lines.next().unwrap(),
        "scheme,alpha,h,n_steps,err_y,err_ydot,fit_order_y,fit_order_ydot,seed,prng,K,p,s,discretization"
    );
    let data = rows(&text);
    assert_eq!(data.len(), 110);
    assert!(data.iter().all(|r| r.len() == 14));

    let erkn3_a1: Vec<&Vec<String>> = data
        .iter()
        .filter(|r| r[0] == "ERKN3" && r[1].parse::<f64>().unwrap() == 1.0)
        .collect();
    assert_eq!(erkn3_a1.len(), 11);
    let order: f64 = erkn3_a1[0][6].parse().unwrap();
    assert!((1.75..=2.25).contains(&order), "{order}");
}

#[test]
fn floats_round_trip() {
    let o = erkn(&["filters", "--scheme", "ERKN3"]);
    for r in rows(&stdout(&o)) {
        let x: f64 = r[3].parse().unwrap();
        assert_eq!(erkn_wave_cli::fmt_float(x), r[3]);
    }
}

#[test]
fn thread_count_from_environment_does_not_change_output() {
    let a = erkn(&["filters"]);
    let b = Command::new(env!("CARGO_BIN_EXE_erkn-wave"))
        .arg("filters")
        .env("ERKN_WAVE_THREADS", "2")
        .output()
        .unwrap();
    assert!(b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_config_exits_with_field_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "K = 64\np = 1\n");
    let o = erkn(&["converge", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("field `p`"), "{err}");

    let cfg = write_config(dir.path(), "unknown.cfg", "colour = blue\n");
    assert_eq!(erkn(&["converge", "--config", &cfg]).status.code(), Some(1));
    assert_eq!(
        erkn(&["converge", "--config", "/nonexistent/x.cfg"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn config_output_key_and_scheme_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("small.csv");
    let cfg = write_config(
        dir.path(),
        "small.cfg",
        &format!(
            "K = 8\nt_end = 1\nh_exponents = 2, 3, 4, 5\nh_ref_exponent = 8\nalphas = 1, 0\noutput = {}\n",
            out.display()
        ),
    );
    let o = erkn(&[
        "converge", "--config", &cfg, "--scheme", "ERKN1", "--scheme", "erkn5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let data = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(data.len(), 2 * 2 * 4);
    assert!(data.iter().all(|r| r[0] == "ERKN1" || r[0] == "ERKN5"));
    assert!(data.iter().all(|r| r[10] == "8"));
}

#[test]
fn filters_cover_all_schemes_and_betas() {
    let o = erkn(&["filters"]);
    assert!(o.status.success());
    let data = rows(&stdout(&o));
    assert_eq!(data.len(), 50);
    assert_eq!(data.iter().filter(|r| r[2] == "one_minus_b").count(), 25);
    assert!(data
        .iter()
        .all(|r| r[3].parse::<f64>().unwrap().is_finite()));
    let erkn2 = data
        .iter()
        .find(|r| {
            r[0] == "ERKN2"
                && r[1].parse::<f64>().unwrap() == 1.0
                && r[2] == "half_sinc2_minus_bbar"
        })
        .unwrap();
    assert_eq!(erkn2[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn filters_with_empty_scheme_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "empty.cfg", "schemes =\n");
    let o = erkn(&["filters", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&stdout(&o)).is_empty());
}

#[test]
fn props_match_declared_flags() {
    let o = erkn(&["props"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let data = rows(&stdout(&o));
    assert_eq!(data.len(), 5);
    assert!(data.iter().all(|r| r[9] == "true"));
    let erkn3 = data.iter().find(|r| r[0] == "ERKN3").unwrap();
    assert_eq!((erkn3[2].as_str(), erkn3[6].as_str()), ("true", "true"));
    let erkn1 = data.iter().find(|r| r[0] == "ERKN1").unwrap();
    assert_eq!(erkn1[2], "false");
    let erkn5 = data.iter().find(|r| r[0] == "ERKN5").unwrap();
    assert!(erkn5[8].parse::<f64>().unwrap() > 1e-4);
}

#[test]
fn props_unknown_scheme_is_an_error() {
    let o = erkn(&["props", "--scheme", "ERKN9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reference_check_passes_on_defaults() {
    let o = erkn(&["reference-check"]);
    assert_eq!(o.status.code(), Some(0));
    let data = rows(&stdout(&o));
    assert_eq!(data.len(), 1);
    assert_eq!(data[0][5], "true");
}

#[test]
fn blow_up_in_reference_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "blow.cfg",
        "K = 8\namplitude = 3\nh_exponents = 0, 1\nh_ref_exponent = 4\n",
    );
    let o = erkn(&["reference-check", "--config", &cfg]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = erkn(&["converge", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hash_identifies_output() {
    let a = stdout(&erkn(&["props", "--scheme", "ERKN2"]));
    let b = stdout(&erkn(&["props", "--scheme", "ERKN2"]));
    let c = stdout(&erkn(&["props", "--scheme", "ERKN4"]));
    assert_eq!(a, b);
    assert_ne!(a.lines().next(), c.lines().next());
}
