//! SIMP baseline next to CPD on the same cantilever.
//!
//! ```text
//! cargo run --release --example simp_vs_cpd [nelx nely nelz]
//! ```
//!
//! SIMP leaves intermediate densities; CPD ends with a 0/1 design.

use cpd_topo::cpd;
use cpd_topo::io::{generate_benchmark, BenchmarkSpec};
use cpd_topo::simp::{simp_run, SimpConfig};

fn main() -> cpd_topo::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let dims = match args[..] {
        [x, y, z] => [x, y, z],
        _ => [30, 10, 4],
    };
    let spec = BenchmarkSpec::new("cantilever-distributed")?.with_dims(dims);
    let problem = generate_benchmark(&spec)?;

    let simp = simp_run(&problem, &SimpConfig::default())?;
    println!(
        "SIMP: compliance {:.4e}, {} iterations (converged {}), {} gray elements in (0.01, 0.99)",
        simp.compliance,
        simp.record.len(),
        simp.converged,
        simp.gray_count(0.01, 0.99)
    );

    match cpd::run(&problem, &spec.cpd_config()) {
        Ok(res) => {
            let gray = res.density.iter().filter(|&&r| r > 0.01 && r < 0.99).count();
            println!(
                "CPD:  compliance {:.4e}, {} outer steps, {gray} gray elements",
                res.compliance,
                res.record.len()
            );
        }
        Err(e) => println!("CPD:  {e}"),
    }
    Ok(())
}
