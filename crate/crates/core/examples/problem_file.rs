//! Build a problem in code, save it as TOML, load it back and run CPD on it.
//!
//! ```text
//! cargo run --release --example problem_file
//! ```

use cpd_topo::cpd::{self, CpdConfig};
use cpd_topo::io::{format_problem, load_problem, save_problem, write_vtk};
use cpd_topo::mesh::{Axis, Material, ProblemDef, Region, VoxelMesh};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = VoxelMesh::new(20, 8, 4)?;
    let left = mesh.select_region(&Region::plane(Axis::X, 0.0));
    let tip = mesh.select_region(&Region::new([20.0, 0.0, 0.0], [20.0, 0.0, 4.0]));
    let mut p = ProblemDef::new(mesh, Material::new(1.0, 0.3), 0.3);
    p.fix_nodes(&left);
    p.distribute_load(&tip, Axis::Y, -1.0);

    let dir = std::env::temp_dir().join("cpd-problem-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("beam.toml");
    save_problem(&path, &p)?;
    let text = format_problem(&p)?;
    println!("{}", text.lines().filter(|l| l.len() < 80).take(12).collect::<Vec<_>>().join("\n"));
    println!("...");

    let loaded = load_problem(&path)?;
    assert_eq!(loaded, p);
    let res = cpd::run(&loaded, &CpdConfig::default())?;
    println!(
        "compliance {:.4e}, volume fraction {:.4}, {} steps",
        res.compliance,
        res.volume_fraction(),
        res.record.len()
    );
    write_vtk(dir.join("density.vtk"), &loaded.mesh, &res.density)?;
    println!("wrote {}", dir.display());
    Ok(())
}
