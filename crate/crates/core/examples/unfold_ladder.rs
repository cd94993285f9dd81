//! Unfold a `(2k, 2k)` singularity into `2k − 1` two-folds and check each
//! contact's multiplicity and visibility.
//!
//! ```text
//! cargo run --example unfold_ladder
//! ```

use pseudohopf::field::PiecewiseField;
use pseudohopf::unfold::{unfold, verify_contact_ladder, UnfoldingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = PiecewiseField::sys_a(3, 1.0);
    let params = UnfoldingParams::new(3, vec![-1.0, 0.7, 1.5, 2.4], 0.05);
    let (unfolded, polys) = unfold(&z, &params)?;

    println!("P+ coefficients: {:?}", polys.p_plus.coeffs());
    println!("P- coefficients: {:?}", polys.p_minus.coeffs());
    println!("direct solve vs interpolation: {:.1e}", polys.method_gap);

    let ladder = verify_contact_ladder(&unfolded, &params)?;
    for c in &ladder.contacts {
        println!(
            "  a_{} = {:+.3}  {:?} side, multiplicity {}, {:?} (expected {:?})",
            c.index, c.x0, c.side, c.multiplicity, c.visibility, c.expected
        );
    }
    ladder.ensure()?;
    println!("ladder ok");
    Ok(())
}
