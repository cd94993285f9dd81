//! A family with vanishing `V₂`: tune the quadratic coefficient until the
//! displacement map starts at order four, then check that cycle amplitudes
//! scale like `|b|^{1/4}`.
//!
//! ```text
//! cargo run --example degenerate
//! ```

use pseudohopf::cycles::{amplitude_prediction, find_cycles_local, CycleConfig, PseudoHopfPrediction};
use pseudohopf::field::{PiecewiseField, SmoothField};
use pseudohopf::flow::{displacement, estimate_lyapunov, IntegratorConfig};
use pseudohopf::poly::Poly2;
use pseudohopf::unfold::{apply_shift, ShiftConvention};

fn family(c: f64) -> PiecewiseField {
    let upper = SmoothField::new(
        Poly2::constant(1.0),
        Poly2::from_terms([(1, 0, -1.0), (2, 0, c), (2, 1, 1.0)]).expect("finite"),
    );
    PiecewiseField::new(upper, PiecewiseField::sys_a(1, 0.0).lower)
}

fn quadratic_part(c: f64) -> f64 {
    let cfg = IntegratorConfig::default();
    let g = |x: f64| displacement(&family(c), x, &cfg).expect("returns").delta_value / (x * x);
    (4.0 * g(1e-3) - g(2e-3)) / 3.0
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (mut lo, mut hi) = (-0.5, 0.5);
    let s = quadratic_part(lo).signum();
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if quadratic_part(mid).signum() == s {
            lo = mid
        } else {
            hi = mid
        }
    }
    let z = family(0.5 * (lo + hi));
    println!("tuned c = {:.3e}", 0.5 * (lo + hi));

    let fit = estimate_lyapunov(&z, (1e-3, 2e-2), &IntegratorConfig::default())?;
    println!("leading order {}, coefficient {:.5}", fit.order, fit.coefficient);

    let p = PseudoHopfPrediction::new(fit.order / 2, fit.coefficient, 1.0, ShiftConvention::Minus)?;
    for m in [1e-8, 1e-7, 1e-6] {
        let b = p.mu * m;
        let r = find_cycles_local(&apply_shift(&z, b, ShiftConvention::Minus), 0.0, 0.2, b, &CycleConfig::default())?;
        for c in &r.cycles {
            println!(
                "b = {b:+.0e}: amplitude {:.5e}, predicted {:.5e}",
                c.amplitude,
                amplitude_prediction(&p, b)?
            );
        }
    }
    Ok(())
}
