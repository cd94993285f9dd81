//! Classify the tangential singularity at the origin and compare the
//! first Lyapunov coefficient with a fit of the displacement map.
//!
//! ```text
//! cargo run --example classify
//! ```

use pseudohopf::field::{classify_mts, PiecewiseField};
use pseudohopf::flow::{estimate_lyapunov, IntegratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::default();
    for (name, z) in [
        ("A(1, 1)", PiecewiseField::sys_a(1, 1.0)),
        ("A(2, -1)", PiecewiseField::sys_a(2, -1.0)),
        ("A(3, 0.5)", PiecewiseField::sys_a(3, 0.5)),
        ("G", PiecewiseField::sys_g()),
    ] {
        let d = classify_mts(&z)?;
        let fit = estimate_lyapunov(&z, (1e-3, 2e-2), &cfg)?;
        println!(
            "{name:>10}: (2k+, 2k-) = ({}, {}), delta = {:+}, V2 = {:+.6}, fitted order {} coefficient {:+.6}",
            2 * d.k_plus,
            2 * d.k_minus,
            d.delta,
            d.V2,
            fit.order,
            fit.coefficient
        );
    }
    Ok(())
}
