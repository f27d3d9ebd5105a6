//! Ricci positivity certificates for every catalog scenario.

use curvforge::bundle::Mode;
use curvforge::certify::{certify, DEFAULT_T_MAX};
use curvforge::scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in scenario::catalog_names() {
        let s = scenario::catalog(name)?;
        let c = certify(&s.bundle, 1e-10, DEFAULT_T_MAX, Mode::Lower)?;
        let t = c.min_t.map(|t| format!("{t:.4}")).unwrap_or_else(|| "-".into());
        println!("{name:<20} {:<20} C = {:<6} t* = {t}", format!("{:?}", c.verdict), c.c);
        for r in &c.reasons {
            println!("    {r}");
        }
    }
    Ok(())
}
