//! Draw the phase portrait of an unfolded and shifted field as SVG, with
//! the census cycles highlighted.
//!
//! ```text
//! cargo run --example portrait > portrait.svg
//! ```

use pseudohopf::cycles::{cycle_census, CycleConfig};
use pseudohopf::field::PiecewiseField;
use pseudohopf::flow::IntegratorConfig;
use pseudohopf::portrait::build_portrait;
use pseudohopf::unfold::{unfold, UnfoldingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = PiecewiseField::sys_a(2, 1.0);
    let params = UnfoldingParams::new(2, vec![-1.0, 1.0], 0.1).with_b(-1e-5);
    let census = cycle_census(&z, &params, &CycleConfig::default())?;
    let (shifted, _) = unfold(&z, &params)?;
    let centers: Vec<f64> = census.windows.iter().map(|w| w.window_center).collect();
    let p = build_portrait(&shifted, &centers, census.radius, &census.cycles, 5, &IntegratorConfig::default());
    print!("{}", p.to_svg());
    Ok(())
}
