//! Bracketing scalar root finding.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("f(a) = {fa:e} and f(b) = {fb:e} do not bracket a root")]
    NotBracketed { fa: f64, fb: f64 },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("function evaluation failed at x = {x}: {msg}")]
    Evaluation { x: f64, msg: String },
}

/// Brent's method on `[a, b]` with known end values. Stops when the
/// bracket is narrower than `xtol + 4·eps·|x|` or `|f| <= ftol`.
///
/// The closure may fail; the error aborts the search.
pub fn brent<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64, RootError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: std::fmt::Display,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed { fa, fb });
    }
    const MAX_ITER: usize = 200;
    let (mut xpre, mut xcur) = (a, b);
    let (mut fpre, mut fcur) = (fa, fb);
    let (mut xblk, mut fblk) = (0.0, 0.0);
    let (mut spre, mut scur) = (0.0_f64, 0.0_f64);

    for _ in 0..MAX_ITER {
        if fpre != 0.0 && fcur != 0.0 && fpre.signum() != fcur.signum() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }
        let delta = 0.5 * (xtol + 4.0 * f64::EPSILON * xcur.abs());
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || fcur.abs() <= ftol || sbis.abs() < delta {
            return Ok(xcur);
        }
        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                // secant
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                // inverse quadratic interpolation
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }
        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur).map_err(|e| RootError::Evaluation {
            x: xcur,
            msg: e.to_string(),
        })?;
    }
    Err(RootError::NoConvergence(MAX_ITER))
}

/// Brent with end values computed here.
pub fn brent_bracket<F, E>(mut f: F, a: f64, b: f64, xtol: f64, ftol: f64) -> Result<f64, RootError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: std::fmt::Display,
{
    let eval = |f: &mut F, x: f64| {
        f(x).map_err(|e| RootError::Evaluation {
            x,
            msg: e.to_string(),
        })
    };
    let fa = eval(&mut f, a)?;
    let fb = eval(&mut f, b)?;
    brent(f, a, b, fa, fb, xtol, ftol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| Ok::<_, Infallible>(x * x * x - 2.0 * x - 5.0);
        let r = brent_bracket(f, 2.0, 3.0, 0.0, 0.0).unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-14);
    }

    #[test]
    fn rejects_unbracketed() {
        let f = |x: f64| Ok::<_, Infallible>(x * x + 1.0);
        assert!(matches!(
            brent_bracket(f, -1.0, 1.0, 0.0, 0.0),
            Err(RootError::NotBracketed { .. })
        ));
    }

    #[test]
    fn propagates_evaluation_errors() {
        let f = |x: f64| if x > 0.5 { Err("boom") } else { Ok(x - 0.7) };
        assert!(brent_bracket(f, 0.0, 0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn steep_root_to_machine_precision() {
        let f = |x: f64| Ok::<_, Infallible>((x - 1e-3).powi(3) * 1e6 + (x - 1e-3));
        let r = brent_bracket(f, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert!((r - 1e-3).abs() < 1e-15);
    }
}
