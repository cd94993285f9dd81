//! Check the identities satisfied by the unfolding coefficients, in
//! floating point and in exact rational arithmetic, then over random `Λ`.
//!
//! ```text
//! cargo run --example coefficient_identities -- 7
//! ```

use pseudohopf::field::PiecewiseField;
use pseudohopf::unfold::{lemma1_check, lemma1_exact, lemma1_random};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let lambda = [-1.0, 1.0];
    let z = PiecewiseField::sys_a(2, 1.0);

    let float = lemma1_check(&z, 2, &lambda)?;
    let exact = lemma1_exact(&z, 2, &lambda)?;
    println!("alpha = {}", float.alpha);
    for (f, e) in float.entries.iter().zip(&exact.entries) {
        println!("  a_{} = {:+}: s = {:?}  exact s = {:?}", f.index, f.a_i, f.s_plus, e.s_plus);
    }
    println!("max residual: float {:.1e}, exact {:.1e}", float.max_residual, exact.max_residual);

    let batch = lemma1_random(seed, 50)?;
    println!("50 random draws (seed {seed}): max residual {:.1e}", batch.max_residual);
    Ok(())
}
