use std::process::Command;

use cpd_topo::cli::cli_main;
use cpd_topo::io::{
    format_problem, generate_benchmark, load_problem, parse_problem, read_log, read_vtk, save_problem,
    write_vtk, BenchmarkSpec, BENCHMARK_NAMES, LOG_HEADER,
};
use cpd_topo::mesh::{Passive, VoxelMesh};
use cpd_topo::Error;

const BEAM: &str = r#"
schema = "cpd-problem/1"
volume_fraction = 0.4

[mesh]
nelx = 12
nely = 4
nelz = 2

[material]
youngs = 1.0
poisson = 0.3

[[support]]
min = [0.0, 0.0, 0.0]
max = [0.0, 4.0, 2.0]

[[distributed_load]]
min = [12.0, 0.0, 0.0]
max = [12.0, 0.0, 2.0]
axis = "y"
total = -1.0
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpd-topo"))
}

#[test]
fn problem_file_round_trip_with_passive() {
    let mut p = parse_problem(BEAM).unwrap();
    p.passive[5] = Passive::ForcedVoid;
    p.passive[40] = Passive::ForcedSolid;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beam.toml");
    save_problem(&path, &p).unwrap();
    assert_eq!(load_problem(&path).unwrap(), p);
    assert_eq!(parse_problem(&format_problem(&p).unwrap()).unwrap(), p);
}

#[test]
fn benchmarks_round_trip_through_files() {
    for name in BENCHMARK_NAMES {
        let spec = BenchmarkSpec::new(name).unwrap().with_dims([8, 4, 4]);
        let spec = if name == "cantilever-hole" {
            spec.with_hole(cpd_topo::io::Hole { center: [4.0, 2.0], radius: 1.0 })
        } else {
            spec
        };
        let p = generate_benchmark(&spec).unwrap();
        let total: f64 = p.loads.iter().map(|(_, v)| v).sum();
        assert!((total + 1.0).abs() < 1e-12, "{name}: total load {total}");
        assert_eq!(parse_problem(&format_problem(&p).unwrap()).unwrap(), p, "{name}");
    }
}

#[test]
fn vtk_round_trip() {
    let mesh = VoxelMesh::new(3, 2, 2).unwrap();
    let rho: Vec<f64> = (0..12).map(|e| e as f64 / 11.0).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.vtk");
    write_vtk(&path, &mesh, &rho).unwrap();
    let back = read_vtk(&path).unwrap();
    assert_eq!(back.dims, [3, 2, 2]);
    assert_eq!(back.density, rho);
}

#[test]
fn parse_errors_carry_lines() {
    let bad = BEAM.replace("nely = 4", "nely = \"four\"");
    match parse_problem(&bad) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn cli_usage_errors() {
    assert_eq!(cli_main(["cpd-topo"]), 2);
    assert_eq!(cli_main(["cpd-topo", "--benchmark", "wheel", "--problem", "x.toml"]), 2);
    assert_eq!(cli_main(["cpd-topo", "--benchmark", "no-such", "--out", "/tmp/unused"]), 2);
    assert_eq!(cli_main(["cpd-topo", "--benchmark", "wheel", "--dims", "1,2", "--out", "/tmp/unused"]), 2);
    assert_eq!(cli_main(["cpd-topo", "--help"]), 0);
}

#[test]
fn cli_requires_output_dir() {
    let out = bin()
        .args(["--benchmark", "cantilever-distributed"])
        .env_remove("CPD_TOPO_OUT")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CPD_TOPO_OUT"));
}

#[test]
fn cli_simp_run_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("beam.toml");
    std::fs::write(&problem, BEAM).unwrap();
    let out = dir.path().join("run");
    let status = bin()
        .args(["--problem"])
        .arg(&problem)
        .args(["--method", "simp", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_log(out.join("convergence.csv")).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == LOG_HEADER.len()));
    assert_eq!(read_vtk(out.join("density.vtk")).unwrap().density.len(), 96);
    let summary = std::fs::read_to_string(out.join("summary.toml")).unwrap();
    assert!(summary.contains("method = \"simp\""));
}

#[test]
fn cli_cpd_run_uses_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--benchmark", "cantilever-distributed", "--dims", "20,8,4"])
        .env("CPD_TOPO_OUT", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let d = read_vtk(dir.path().join("density.vtk")).unwrap();
    assert!(d.density.iter().all(|&r| r == 0.0 || r == 1.0));
    let solid: f64 = d.density.iter().sum();
    assert!((solid - 192.0).abs() <= 1.0);
}
