use std::path::PathBuf;
use std::process::Command;

fn idpns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_idpns"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn converge_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = idpns()
        .args([
            "converge",
            "--case",
            "becker1d",
            "--grids",
            "26,51,101",
            "--t-final",
            "0.2",
        ])
        .env("IDPNS_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,delta1,rate1,delta2,rate2,deltainf,rateinf");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",--"));
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 7);
    }
    assert_eq!(String::from_utf8_lossy(&out.stdout), csv);
}

#[test]
fn mesh_info_reports_the_sign_audit() {
    let out = idpns()
        .arg("mesh-info")
        .arg(fixture("shock_coarse.msh"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("dimension        2"), "{text}");
    assert!(text.contains("dofs             4482"), "{text}");
    assert!(text.contains("beta <= 0        yes"), "{text}");
}

#[test]
fn bad_input_exits_nonzero() {
    let out = idpns()
        .args(["converge", "--no-such-flag"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = idpns()
        .args(["run", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn run_writes_snapshots_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        r#"
[mesh]
kind = "structured2d"
x = [0.0, 1.0]
y = [0.0, 0.5]
nx = 17
ny = 9

[gas]
mu = 1e-2
prandtl = 0.73

[initial]
kind = "sod2d"

[bc]
left = "noslip"
right = "noslip"
bottom = "noslip"
top = "slip"

[time]
cfl = 0.4
t_final = 0.02

[output]
snapshots = [0.0, 0.01, 0.02]
"#,
    )
    .unwrap();
    let out = idpns()
        .args(["run", "--config"])
        .arg(&cfg)
        .env("IDPNS_OUTPUT_DIR", dir.path().join("out"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for k in 0..3 {
        let vtk =
            std::fs::read_to_string(dir.path().join(format!("out/snapshot_{k:03}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
        assert!(vtk.contains("POINTS 180 double"));
    }
    let series = std::fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    assert!(series.starts_with("step,time,dt,dt0,"));
    assert!(series.lines().count() > 2);
}

#[test]
fn export_exact_samples_the_profile() {
    let out = idpns()
        .args(["export-exact", "--n", "11"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,rho,v,e,p");
    assert_eq!(lines.len(), 12);
    // Upstream density is 1 at the left end of [-1, 1.5].
    let rho: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((rho - 1.0).abs() < 1e-10, "{rho}");
}

#[test]
fn shipped_configs_load() {
    use idpns::harness::config::RunConfig;
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            match cfg.dimension().unwrap() {
                1 => drop(cfg.problem(cfg.mesh_1d().unwrap()).unwrap()),
                _ => drop(cfg.problem(cfg.mesh_2d().unwrap()).unwrap()),
            }
            n += 1;
        }
    }
    assert!(n >= 2);
}
