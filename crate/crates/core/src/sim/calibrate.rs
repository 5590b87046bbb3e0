//! Two-parameter root finding used to fit workload profiles.
//!
//! `solve2` drives `f(x) - target` to zero with Newton steps on a
//! forward-difference Jacobian. Steps are halved until the residual shrinks,
//! which keeps the iteration stable on the piecewise-linear responses that
//! scenario runs produce.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub x: [f64; 2],
    pub value: [f64; 2],
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationError<E> {
    Eval(E),
    SingularJacobian { at: [f64; 2] },
    NoConvergence { best: Solution },
}

impl<E: fmt::Display> fmt::Display for CalibrationError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalibrationError::Eval(e) => write!(f, "evaluation failed: {e}"),
            CalibrationError::SingularJacobian { at } => {
                write!(f, "singular jacobian at ({}, {})", at[0], at[1])
            }
            CalibrationError::NoConvergence { best } => write!(
                f,
                "no convergence after {} iterations; best ({}, {}) -> ({}, {})",
                best.iterations, best.x[0], best.x[1], best.value[0], best.value[1]
            ),
        }
    }
}

fn norm(r: [f64; 2]) -> f64 {
    libm::hypot(r[0], r[1])
}

/// Finds `x` with `|f(x) - target|` under `tol` in both components.
/// `scale` sets the finite-difference step per coordinate.
pub fn solve2<E, F>(mut f: F, x0: [f64; 2], target: [f64; 2], scale: [f64; 2], tol: f64, max_iter: u32) -> Result<Solution, CalibrationError<E>>
where
    F: FnMut([f64; 2]) -> Result<[f64; 2], E>,
{
    let mut eval = |x: [f64; 2]| -> Result<[f64; 2], CalibrationError<E>> {
        let v = f(x).map_err(CalibrationError::Eval)?;
        Ok([v[0] - target[0], v[1] - target[1]])
    };
    let mut x = x0;
    let mut r = eval(x)?;
    for it in 0..max_iter {
        if r[0].abs() < tol && r[1].abs() < tol {
            return Ok(Solution { x, value: [r[0] + target[0], r[1] + target[1]], iterations: it });
        }
        let mut j = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut xp = x;
            xp[k] += scale[k];
            let rp = eval(xp)?;
            j[0][k] = (rp[0] - r[0]) / scale[k];
            j[1][k] = (rp[1] - r[1]) / scale[k];
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(CalibrationError::SingularJacobian { at: x });
        }
        let dx = [
            (j[1][1] * r[0] - j[0][1] * r[1]) / det,
            (-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut step = 1.0;
        loop {
            let cand = [x[0] - step * dx[0], x[1] - step * dx[1]];
            let rc = eval(cand)?;
            if norm(rc) < norm(r) || step < 1e-6 {
                x = cand;
                r = rc;
                break;
            }
            step *= 0.5;
        }
    }
    let best = Solution { x, value: [r[0] + target[0], r[1] + target[1]], iterations: max_iter };
    if r[0].abs() < tol && r[1].abs() < tol {
        Ok(best)
    } else {
        Err(CalibrationError::NoConvergence { best })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_linear_system_in_one_step() {
        let f = |x: [f64; 2]| Ok::<_, ()>([2.0 * x[0] + x[1], x[0] - 3.0 * x[1]]);
        let s = solve2(f, [0.0, 0.0], [5.0, -1.0], [1e-3, 1e-3], 1e-9, 10).unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-6 && (s.x[1] - 1.0).abs() < 1e-6);
        assert!(s.iterations <= 2);
    }

    #[test]
    fn solves_ratio_like_response() {
        // Shape of an improvement curve: 1 - (a + x0 m)/(c + x1 m).
        let f = |x: [f64; 2]| {
            let g = |m: f64| 1.0 - (x[1] + 90.0 * m) / (x[1] + (100.0 + x[0]) * m);
            Ok::<_, ()>([g(30.0), g(50.0)])
        };
        let s = solve2(f, [50.0, 1000.0], [0.17, 0.20], [0.01, 1.0], 1e-9, 50).unwrap();
        assert!((s.value[0] - 0.17).abs() < 1e-9);
        assert!((s.value[1] - 0.20).abs() < 1e-9);
    }

    #[test]
    fn flat_function_is_singular() {
        let f = |_: [f64; 2]| Ok::<_, ()>([1.0, 1.0]);
        assert!(matches!(
            solve2(f, [0.0, 0.0], [0.0, 0.0], [1.0, 1.0], 1e-9, 5),
            Err(CalibrationError::SingularJacobian { .. })
        ));
    }

    #[test]
    fn evaluation_errors_propagate() {
        let f = |_: [f64; 2]| Err::<[f64; 2], _>("boom");
        assert_eq!(solve2(f, [0.0, 0.0], [0.0, 0.0], [1.0, 1.0], 1e-9, 5), Err(CalibrationError::Eval("boom")));
    }
}
