//! Dormand–Prince 5(4) for autonomous planar systems, with continuous
//! output and zero-crossing events.

pub type State = [f64; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += c * k[0];
        out[1] += c * k[1];
    }
    out
}

/// One trial step: the 5th-order solution, the stage derivatives needed by
/// the dense output, and the embedded error vector.
#[derive(Debug, Clone, Copy)]
pub struct TrialStep {
    pub h: f64,
    pub y0: State,
    pub y1: State,
    pub k: [State; 7],
    pub err: State,
}

impl TrialStep {
    pub fn new<F: Fn(&State) -> State>(f: &F, y0: State, k1: State, h: f64) -> Self {
        let k2 = f(&axpy(&y0, &[(h * A21, &k1)]));
        let k3 = f(&axpy(&y0, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = f(&axpy(&y0, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
        let k5 = f(&axpy(
            &y0,
            &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
        ));
        let k6 = f(&axpy(
            &y0,
            &[
                (h * A61, &k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ],
        ));
        let y1 = axpy(
            &y0,
            &[
                (h * A71, &k1),
                (h * A73, &k3),
                (h * A74, &k4),
                (h * A75, &k5),
                (h * A76, &k6),
            ],
        );
        let k7 = f(&y1);
        let err = axpy(
            &[0.0, 0.0],
            &[
                (h * E1, &k1),
                (h * E3, &k3),
                (h * E4, &k4),
                (h * E5, &k5),
                (h * E6, &k6),
                (h * E7, &k7),
            ],
        );
        Self {
            h,
            y0,
            y1,
            k: [k1, k2, k3, k4, k5, k6, k7],
            err,
        }
    }

    /// RMS of the error scaled by `abs_tol + rel_tol·max(|y0|, |y1|)`.
    pub fn error_norm(&self, rel_tol: f64, abs_tol: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            let sc = abs_tol + rel_tol * self.y0[i].abs().max(self.y1[i].abs());
            acc += (self.err[i] / sc).powi(2);
        }
        (acc / 2.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.y1.iter().chain(self.err.iter()).all(|v| v.is_finite())
    }

    pub fn dense(&self) -> Dense {
        let h = self.h;
        let [k1, _, k3, k4, k5, k6, k7] = self.k;
        let mut r = [[0.0; 2]; 5];
        for i in 0..2 {
            let ydiff = self.y1[i] - self.y0[i];
            let bspl = h * k1[i] - ydiff;
            r[0][i] = self.y0[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k7[i] - bspl;
            r[4][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Dense { r }
    }
}

/// Fourth-order continuous extension over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct Dense {
    r: [State; 5],
}

impl Dense {
    /// State at fraction `theta ∈ [0, 1]` of the step.
    pub fn at(&self, theta: f64) -> State {
        let t1 = 1.0 - theta;
        let r = &self.r;
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            *o = r[0][i] + theta * (r[1][i] + t1 * (r[2][i] + theta * (r[3][i] + t1 * r[4][i])));
        }
        out
    }
}

/// Starting step size from the local Lipschitz estimate.
pub fn initial_step<F: Fn(&State) -> State>(
    f: &F,
    y0: &State,
    f0: &State,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
) -> f64 {
    let norm = |v: &State| {
        let mut acc = 0.0;
        for i in 0..2 {
            let sc = abs_tol + rel_tol * y0[i].abs();
            acc += (v[i] / sc).powi(2);
        }
        (acc / 2.0).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, &[(h0, f0)]);
    let f1 = f(&y1);
    let d2 = norm(&[f1[0] - f0[0], f1[1] - f0[1]]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(max_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let f = |y: &State| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let n = 200;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut k1 = f(&y);
        for _ in 0..n {
            let s = TrialStep::new(&f, y, k1, h);
            y = s.y1;
            k1 = s.k[6];
        }
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_endpoints_and_is_accurate() {
        let f = |y: &State| [y[1], -y[0]];
        let y0 = [1.0, 0.0];
        let s = TrialStep::new(&f, y0, f(&y0), 0.1);
        let d = s.dense();
        assert_eq!(d.at(0.0), y0);
        let end = d.at(1.0);
        assert!((end[0] - s.y1[0]).abs() < 1e-15);
        let mid = d.at(0.5);
        assert!((mid[0] - 0.05_f64.cos()).abs() < 1e-8, "{:e}", mid[0] - 0.05_f64.cos());
        assert!((mid[1] + 0.05_f64.sin()).abs() < 1e-8, "{:e}", mid[1] + 0.05_f64.sin());
    }

    #[test]
    fn error_estimate_shrinks_with_step() {
        let f = |y: &State| [y[1], -y[0]];
        let y0 = [1.0, 0.0];
        let e1 = TrialStep::new(&f, y0, f(&y0), 0.4).error_norm(0.0, 1.0);
        let e2 = TrialStep::new(&f, y0, f(&y0), 0.2).error_norm(0.0, 1.0);
        assert!(e2 < e1);
    }
}
