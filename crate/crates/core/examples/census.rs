//! Unfold a `(2k, 2k)` singularity, shift it, and count the limit cycles
//! born at the invisible two-folds. Expect `k` of them for one sign of `b`
//! and none for the other.
//!
//! ```text
//! cargo run --example census -- 3
//! ```

use pseudohopf::cycles::{cycle_census, cycle_producing_sign, CycleConfig};
use pseudohopf::field::PiecewiseField;
use pseudohopf::unfold::{ShiftConvention, UnfoldingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: u32 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let z = PiecewiseField::sys_a(k, 1.0);
    let lambda: Vec<f64> = std::iter::once(-1.0).chain((1..2 * k - 2).map(|i| i as f64)).collect();
    let params = UnfoldingParams::new(k, lambda, 0.1);
    let v2 = 2.0 / (2 * k + 1) as f64;
    let s = cycle_producing_sign(v2, 1.0, ShiftConvention::Minus);
    let cfg = CycleConfig::default();

    for b in [s * 1e-6, -s * 1e-6] {
        let r = cycle_census(&z, &params.clone().with_b(b), &cfg)?;
        println!("b = {b:+.0e}: {} cycles, {}", r.cycles.len(), if r.pass { "pass" } else { "no k-cycle census" });
        for c in &r.cycles {
            println!(
                "  around {:+.4}: chord [{:+.6}, {:+.6}], amplitude {:.3e}, {}",
                c.window_center,
                c.chord.0,
                c.chord.1,
                c.amplitude,
                c.stability.as_str()
            );
        }
    }
    Ok(())
}
