//! Convergence of the Ricci lower bound as `t` grows, written as CSV.

use curvforge::bundle::Mode;
use curvforge::certify::sweep;
use curvforge::scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    report(&std::env::args().nth(1).unwrap_or_else(|| "so4-so3".into()))
}

fn report(name: &str) -> Result<(), Box<dyn std::error::Error>> {
    let s = scenario::catalog(name)?;
    let grid = [0.0, 0.1, 1.0, 10.0, 100.0, 1e4, 1e6];
    let table = sweep(&s.bundle, &grid, Mode::Lower, 1e-10)?;
    println!("t,min_ricci_lb,ptilde_residual,lift_residual");
    for r in &table.rows {
        println!("{:e},{:.12},{:.3e},{:.3e}", r.t, r.min_ricci_lb, r.ptilde_residual, r.lift_residual);
    }
    println!("inf,{:.12},0,0", table.asymptotic.min_ricci_lb);
    Ok(())
}
