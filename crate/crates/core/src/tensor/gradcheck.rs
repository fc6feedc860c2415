//! Central finite-difference gradient checking.

use super::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Outcome of comparing analytic gradients with central differences.
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-3)`.
    pub max_rel_error: f64,
    /// (input index, element index) where the worst error occurred.
    pub worst: (usize, usize),
    pub analytic: f64,
    pub numeric: f64,
    pub tol: f64,
    pub passed: bool,
}

const DENOM_FLOOR: f64 = 1e-3;

/// Checks gradients of the scalar function `f` built on a tape.
///
/// `f` receives a fresh `f64` tape and one trainable var per input and
/// must return a scalar var.
pub fn grad_check<F>(f: F, inputs: &[Tensor<f64>], step: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape<f64>, &[Var]) -> Result<Var>,
{
    let eval = |xs: &[Tensor<f64>]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|x| tape.constant(x.clone())).collect();
        let out = f(&mut tape, &vars)?;
        tape.value(out)
            .item()
            .ok_or_else(|| Error::usage("grad_check function must return a scalar"))
    };
    let analytic = |xs: &[Tensor<f64>]| -> Result<Vec<Vec<f64>>> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|x| tape.param(x.clone())).collect();
        let out = f(&mut tape, &vars)?;
        tape.backward(out)?;
        Ok(vars
            .iter()
            .zip(xs)
            .map(|(&v, x)| tape.grad(v).map_or_else(|| vec![0.0; x.len()], <[f64]>::to_vec))
            .collect())
    };
    grad_check_with(eval, analytic, inputs, step, tol)
}

/// Generic form: compares `analytic` against central differences of `eval`.
pub fn grad_check_with<E, A>(
    eval: E,
    analytic: A,
    inputs: &[Tensor<f64>],
    step: f64,
    tol: f64,
) -> Result<GradCheckReport>
where
    E: Fn(&[Tensor<f64>]) -> Result<f64>,
    A: Fn(&[Tensor<f64>]) -> Result<Vec<Vec<f64>>>,
{
    let grads = analytic(inputs)?;
    if grads.len() != inputs.len() {
        return Err(Error::usage("analytic gradient count differs from input count"));
    }
    let mut work: Vec<Tensor<f64>> = inputs.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: (0, 0),
        analytic: 0.0,
        numeric: 0.0,
        tol,
        passed: true,
    };
    for (i, g) in grads.iter().enumerate() {
        if g.len() != inputs[i].len() {
            return Err(Error::dim("grad_check", format!("gradient {i} has wrong length")));
        }
        for j in 0..inputs[i].len() {
            let orig = inputs[i].data()[j];
            work[i].data_mut()[j] = orig + step;
            let up = eval(&work)?;
            work[i].data_mut()[j] = orig - step;
            let down = eval(&work)?;
            work[i].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = g[j];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(DENOM_FLOOR);
            if err > report.max_rel_error || err.is_nan() {
                report.max_rel_error = if err.is_nan() { f64::INFINITY } else { err };
                report.worst = (i, j);
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    report.passed = report.max_rel_error <= tol;
    Ok(report)
}
