//! Generate every built-in benchmark, print its size and write a VTK file of
//! the passive layout (hole elements at 0).
//!
//! ```text
//! cargo run --example benchmarks [out_dir]
//! ```

use cpd_topo::io::{generate_benchmark, write_vtk, BenchmarkSpec, Hole, BENCHMARK_NAMES};
use cpd_topo::mesh::Passive;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string());
    std::fs::create_dir_all(&out)?;
    for name in BENCHMARK_NAMES {
        let mut spec = BenchmarkSpec::new(name)?;
        if name == "cantilever-hole" {
            spec = spec.with_hole(Hole { center: [35.0, 15.0], radius: 8.0 });
        }
        let p = generate_benchmark(&spec)?;
        let [nx, ny, nz] = p.mesh.dims();
        let void = p.passive.iter().filter(|&&s| s == Passive::ForcedVoid).count();
        println!(
            "{name:<24} {nx}×{ny}×{nz}  V_c={:<5} μ={:<5} β={:<6} fixed DOFs {:>4}  loads {:>3}  forced void {void}",
            spec.volume_fraction,
            spec.mu,
            spec.beta,
            p.fixed_dofs.len(),
            p.loads.len()
        );
        let rho: Vec<f64> = p.passive.iter().map(|&s| if s == Passive::ForcedVoid { 0.0 } else { 1.0 }).collect();
        write_vtk(format!("{out}/{name}.vtk"), &p.mesh, &rho)?;
    }
    println!("layouts written to {out}");
    Ok(())
}
