//! Command-line contract: subcommands, exit codes, field files and reports.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use canonform::cli::read_field;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_canonform"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn machine(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn text(out: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
}

#[test]
fn catalog_lists_models_with_tags() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let t = text(&out);
    assert!(t.lines().any(|l| l.starts_with("acoustics ") && l.contains("tag x11xx")), "{t}");
    assert!(t.lines().any(|l| l.starts_with("boltzmann_bgk ") && l.contains("momentum")));
    let v = machine(&run(dir.path(), &["catalog", "--machine"]));
    let models = v["models"].as_array().unwrap();
    assert!(models.len() >= 18);
    let bgk = models.iter().find(|m| m["id"] == "boltzmann_bgk").unwrap();
    assert_eq!(bgk["needs"], "phase_space");
    let ac = models.iter().find(|m| m["id"] == "acoustics").unwrap();
    assert_eq!(ac["tag"], "x11xx");
    assert!(ac["params"].as_array().unwrap().iter().any(|p| p["name"] == "rho"));
}

#[test]
fn commands_other_than_catalog_need_a_config() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["solve"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify", "--config", "missing.toml"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["bogus"]).status.code(), Some(2));
}

#[test]
fn default_verify_passes_and_writes_the_audit() {
    let dir = tempfile::tempdir().unwrap();
    config(dir.path(), "v.toml", "[output]\naudit = \"audit.json\"\nreport = \"verify.json\"\n");
    let out = run(dir.path(), &["verify", "--config", "v.toml", "--machine"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let v = machine(&out);
    let fams = v["families"].as_array().unwrap();
    assert!(fams.len() >= 12);
    for f in fams {
        assert!(f["hermiticity"].as_f64().unwrap() <= 1e-12 && f["idempotency"].as_f64().unwrap() <= 1e-12);
        assert!(f["samples"].as_u64().unwrap() >= 200);
    }
    let audit: Value = serde_json::from_slice(&std::fs::read(dir.path().join("audit.json")).unwrap()).unwrap();
    let maps = audit.as_array().unwrap();
    assert!(maps.len() >= 18);
    assert!(maps.iter().all(|m| !m["tag"].as_str().unwrap().is_empty()));
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn faulty_family_fails_verification_by_name() {
    let dir = tempfile::tempdir().unwrap();
    config(
        dir.path(),
        "v.toml",
        "[verify]\nfamilies = [\"G\", \"EM\"]\nfaulty = \"EM\"\nfield_tests = false\naudit = false\n",
    );
    let out = run(dir.path(), &["verify", "--config", "v.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("verification failed: family EM"), "{}", text(&out));
}

#[test]
fn unknown_family_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    config(dir.path(), "v.toml", "[verify]\nfamilies = [\"Q7\"]\n");
    let out = run(dir.path(), &["verify", "--config", "v.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out).contains("Q7"));
}

const DIFFUSION_POINT: &str = r#"
[grid]
spatial = [16, 16]
spacing = 0.25
nt = 16
dt = 0.5
[model]
id = "convective_diffusion"
params = { K = 1.0, alpha = 1.0 }
[solver]
tol = 1e-11
[source]
profile = "point"
[output]
report = "report.json"
j = "J.cf"
psi = "psi.cf"
"#;

#[test]
fn homogeneous_diffusion_with_a_point_source() {
    let dir = tempfile::tempdir().unwrap();
    config(dir.path(), "s.toml", DIFFUSION_POINT);
    let out = run(dir.path(), &["solve", "--config", "s.toml", "--machine"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let v = machine(&out);
    assert!(v["solve"]["final_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["tag"], "x12");
    let e = read_field(&dir.path().join("E.cf")).unwrap();
    assert_eq!(e.labels(), ["grad_T[0]", "grad_T[1]", "i_T_t", "T"]);
    assert!(read_field(&dir.path().join("J.cf")).is_ok());
    assert!(read_field(&dir.path().join("psi.cf")).is_ok());
}

#[test]
fn acoustic_manufactured_solution_is_recovered() {
    let dir = tempfile::tempdir().unwrap();
    config(
        dir.path(),
        "s.toml",
        r#"
seed = 11
[grid]
spatial = [12, 12]
nt = 16
dt = 0.37
[model]
id = "acoustics"
params = { rho = 1.0, kappa = 2.0 }
modulate.rho = { contrast = 0.25 }
[solver]
tol = 1e-12
[source]
profile = "manufactured"
max_mode = 2
[output]
dir = "out"
e_exact = "E_exact.cf"
"#,
    );
    let out = run(dir.path(), &["solve", "--config", "s.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let e = read_field(&dir.path().join("out/E.cf")).unwrap();
    let exact = read_field(&dir.path().join("out/E_exact.cf")).unwrap();
    let err = e.sub(&exact).unwrap().norm() / exact.norm();
    assert!(err <= 1e-8, "{err}");
}

#[test]
fn missing_parameter_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    config(dir.path(), "s.toml", &DIFFUSION_POINT.replace("K = 1.0, ", ""));
    let out = run(dir.path(), &["solve", "--config", "s.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let t = text(&out);
    assert!(t.contains("missing required parameter `K`"), "{t}");
    assert!(!dir.path().join("E.cf").exists());
}

#[test]
fn non_convergence_exits_three_and_keeps_the_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DIFFUSION_POINT.replace("tol = 1e-11", "tol = 1e-11\nmax_iter = 2\nrestart = 2");
    config(dir.path(), "s.toml", &cfg.replace("params = { K = 1.0, alpha = 1.0 }", "params = { K = 1.0, alpha = 1.0 }\nmodulate.K = { contrast = 0.4 }"));
    let out = run(dir.path(), &["solve", "--config", "s.toml", "--machine"]);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out));
    assert_eq!(machine(&out)["solve"]["converged"], false);
    assert!(read_field(&dir.path().join("E.cf")).is_ok());
}

#[test]
fn neumann_divergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    config(
        dir.path(),
        "s.toml",
        r#"
[grid]
spatial = [16]
nt = 16
[model]
id = "acoustics"
params = { rho = 1.0, kappa = 1.0 }
modulate.rho = { contrast = 0.3 }
[solver]
method = "neumann"
c = [1.0, 0.0]
max_iter = 200
[source]
profile = "manufactured"
"#,
    );
    let out = run(dir.path(), &["solve", "--config", "s.toml", "--machine"]);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out));
    assert!(dir.path().join("E.cf").exists());
}

const MMS: &str = r#"
seed = 2
[model]
id = "acoustics"
params = { rho = 1.0, kappa = 2.0 }
[solver]
tol = 1e-11
[mms]
grids = [[8, 8, 8], [12, 12, 16]]
contrasts = [0.0, 0.3, 0.5]
parameter = "rho"
"#;

#[test]
fn mms_table() {
    let dir = tempfile::tempdir().unwrap();
    config(dir.path(), "m.toml", MMS);
    let out = run(dir.path(), &["mms", "--config", "m.toml", "--machine"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let v = machine(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 3);
    for g in rows.chunks(3) {
        assert_eq!(g[0]["iterations"], 1);
        assert!(g[0]["error"].as_f64().unwrap() <= 1e-12);
        let (i3, i5) = (g[1]["iterations"].as_f64().unwrap(), g[2]["iterations"].as_f64().unwrap());
        assert!(i3 <= 1.5 * i5, "{i3} vs {i5}");
    }
}

#[test]
fn mms_error_does_not_grow_as_tolerance_tightens() {
    let dir = tempfile::tempdir().unwrap();
    let mut last = f64::INFINITY;
    for tol in ["1e-6", "1e-8", "1e-10"] {
        config(dir.path(), "m.toml", &MMS.replace("tol = 1e-11", &format!("tol = {tol}")).replace("[[8, 8, 8], [12, 12, 16]]", "[[8, 8, 8]]"));
        let v = machine(&run(dir.path(), &["mms", "--config", "m.toml", "--machine"]));
        let err = v["rows"][2]["error"].as_f64().unwrap();
        assert!(err <= last, "{err} after {last}");
        last = err;
    }
}

fn dispersion(dir: &Path, model: &str, k: &str, range: &str) -> Output {
    config(
        dir,
        "d.toml",
        &format!("[grid]\nspatial = [4, 4, 4]\nnt = 4\n[model]\n{model}\n[dispersion]\nk = {k}\nomega = {range}\nsamples = 241\n"),
    );
    run(dir, &["dispersion", "--config", "d.toml", "--machine"])
}

fn roots(out: &Output) -> Vec<f64> {
    machine(out)["scan"]["roots"].as_array().unwrap().iter().map(|r| r["omega"].as_f64().unwrap()).collect()
}

#[test]
fn dispersion_roots() {
    let dir = tempfile::tempdir().unwrap();
    let ac = dispersion(dir.path(), "id = \"acoustics\"\nparams = { rho = 1.0, kappa = 4.0 }", "[1.0, 0.0, 0.0]", "[0.5, 3.0]");
    assert_eq!(ac.status.code(), Some(0));
    let r = roots(&ac);
    assert_eq!(r.len(), 1);
    assert!((r[0] - 2.0).abs() <= 1e-6, "{r:?}");
    let em = dispersion(dir.path(), "id = \"em\"\nexample = true\nparams = { mu = 1.0, eps = 1.0 }", "[0.0, 1.0, 0.0]", "[0.2, 2.0]");
    let r = roots(&em);
    assert_eq!(r.len(), 1);
    assert!((r[0] - 1.0).abs() <= 1e-6, "{r:?}");
}

#[test]
fn dispersion_at_zero_wavenumber() {
    let dir = tempfile::tempdir().unwrap();
    let out = dispersion(dir.path(), "id = \"acoustics\"\nparams = { rho = 1.0, kappa = 4.0 }", "[0.0, 0.0, 0.0]", "[-1.0, 1.0]");
    assert_eq!(out.status.code(), Some(0));
    let r = roots(&out);
    assert_eq!(r, vec![0.0]);
    assert_eq!(machine(&out)["empty_range"], false);
}

#[test]
fn dispersion_rejects_varying_media() {
    let dir = tempfile::tempdir().unwrap();
    let out = dispersion(
        dir.path(),
        "id = \"acoustics\"\nparams = { rho = 1.0, kappa = 4.0 }\nmodulate.rho = { contrast = 0.1 }",
        "[1.0, 0.0, 0.0]",
        "[0.5, 3.0]",
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = r#"
seed = 9
[grid]
spatial = [8]
nt = 8
dt = 0.37
[model]
id = "elastodynamics"
params = { C = { isotropic = { lambda = 1.0, mu = 0.5 } }, rho = 1.0 }
modulate.C = { contrast = 0.2 }
[solver]
tol = 1e-10
[source]
profile = "manufactured"
[output]
e_exact = "X.cf"
"#;
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|i| {
            let dir = tempfile::tempdir().unwrap();
            config(dir.path(), "s.toml", cfg);
            let threads = if i == 0 { "1" } else { "3" };
            let out = bin().current_dir(dir.path()).env("CANONFORM_THREADS", threads).args(["solve", "--config", "s.toml"]).output().unwrap();
            assert_eq!(out.status.code(), Some(0), "{}", text(&out));
            (std::fs::read(dir.path().join("E.cf")).unwrap(), std::fs::read(dir.path().join("X.cf")).unwrap())
        })
        .collect();
    assert_eq!(outputs[0].1, outputs[1].1);
    assert_eq!(outputs[0].0.len(), outputs[1].0.len());
    // the solve itself must be reproducible at a fixed worker count
    let dir = tempfile::tempdir().unwrap();
    config(dir.path(), "s.toml", cfg);
    let again = bin().current_dir(dir.path()).env("CANONFORM_THREADS", "1").args(["solve", "--config", "s.toml"]).output().unwrap();
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("E.cf")).unwrap(), outputs[0].0);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "seed = 1\n[grid]\nspatial = [8]\nnt = 8\n[model]\nid = \"schrodinger\"\nexample = true\n[source]\nprofile = \"manufactured\"\n[output]\ne_exact = \"X.cf\"\n";
    config(dir.path(), "s.toml", cfg);
    let read = || std::fs::read(dir.path().join("X.cf")).unwrap();
    assert_eq!(run(dir.path(), &["solve", "--config", "s.toml"]).status.code(), Some(0));
    let a = read();
    assert_eq!(run(dir.path(), &["solve", "--config", "s.toml", "--seed", "1"]).status.code(), Some(0));
    assert_eq!(read(), a);
    assert_eq!(run(dir.path(), &["solve", "--config", "s.toml", "--seed", "2"]).status.code(), Some(0));
    assert_ne!(read(), a);
}
