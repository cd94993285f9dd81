//! Pseudo-Hopf bifurcation: shift the sliding segment by `b` and watch a
//! crossing limit cycle appear on one side only, with amplitude `~ √|b|`.
//!
//! ```text
//! cargo run --example pseudo_hopf
//! ```

use pseudohopf::cycles::{pseudo_hopf_scan, write_scan_csv, CycleConfig};
use pseudohopf::field::PiecewiseField;
use pseudohopf::unfold::ShiftConvention;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = PiecewiseField::sys_a(1, 1.0);
    let bs = [-1e-3, -1e-4, -1e-5, -1e-6, 0.0, 1e-6, 1e-5, 1e-4, 1e-3];
    let table = pseudo_hopf_scan(&z, &bs, ShiftConvention::Minus, &CycleConfig::default())?;
    write_scan_csv(&table, std::io::stdout().lock())?;
    Ok(())
}
