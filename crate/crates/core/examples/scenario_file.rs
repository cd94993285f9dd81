//! Load a scenario file, as the command-line tool does, and print its
//! classification and normalized form.
//!
//! ```text
//! cargo run --example scenario_file -- scenarios/sys_a3.toml
//! ```

use pseudohopf::field::classify_mts;
use pseudohopf::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "scenarios/sys_a2.toml".into());
    let sc = Scenario::load(path.as_ref())?;
    let z = sc.piecewise_field();
    let d = classify_mts(&z.shift_x(sc.window.center))?;
    println!("{}: V2 = {:+.6}, delta = {:+}", sc.name, d.V2, d.delta);
    print!("{}", sc.to_toml());
    Ok(())
}
