//! Monte Carlo estimates of the per-center error probabilities, exponent
//! fits over blocklength, and the type-I sweep.

mod experiment;
mod fit;
mod sweep;

pub use experiment::{
    clopper_pearson, collect_traces, estimates_from, run_trials, CodeMode, ErrorEstimate, ExperimentSpec, TraceSet,
};
pub use fit::{fit_exponent, fit_line, ExponentFit, FitOptions};
pub use sweep::{strong_converse_sweep, Calibration, SweepRow, SweepTable, MAX_TUNING_STEPS, TUNING_TOLERANCE};

use crate::report::{sig12, CsvTable};

/// `k,n,hypothesis,trials,errors,alpha_hat,beta_hat,ci_lo,ci_hi`
pub fn estimates_table(estimates: &[ErrorEstimate]) -> CsvTable {
    let mut t = CsvTable::new(&["k", "n", "hypothesis", "trials", "errors", "alpha_hat", "beta_hat", "ci_lo", "ci_hi"]);
    for e in estimates {
        let opt = |v: Option<f64>| v.map(sig12).unwrap_or_default();
        t.push(vec![
            e.k.to_string(),
            e.n.to_string(),
            e.hypothesis.to_string(),
            e.trials.to_string(),
            e.errors.to_string(),
            opt(e.alpha_hat()),
            opt(e.beta_hat()),
            sig12(e.ci_lo),
            sig12(e.ci_hi),
        ]);
    }
    t
}

/// `k,epsilon,exponent,slope_ci_lo,slope_ci_hi`; unresolved fits leave the
/// numeric fields empty.
pub fn sweep_table(sweep: &SweepTable) -> CsvTable {
    let mut t = CsvTable::new(&["k", "epsilon", "exponent", "slope_ci_lo", "slope_ci_hi"]);
    for r in &sweep.rows {
        let (e, lo, hi) = match &r.fit {
            Some(f) => (sig12(f.slope), sig12(f.slope_ci.0), sig12(f.slope_ci.1)),
            None => Default::default(),
        };
        t.push(vec![r.k.to_string(), sig12(r.epsilon), e, lo, hi]);
    }
    t
}

/// `k,epsilon,n,factor,alpha_hat,beta_hat,beta_ci_lo,beta_ci_hi`
pub fn calibration_table(sweep: &SweepTable) -> CsvTable {
    let mut t = CsvTable::new(&["k", "epsilon", "n", "factor", "alpha_hat", "beta_hat", "beta_ci_lo", "beta_ci_hi"]);
    for c in &sweep.calibrations {
        t.push(vec![
            c.k.to_string(),
            sig12(c.epsilon),
            c.n.to_string(),
            sig12(c.factor),
            sig12(c.alpha.estimate),
            sig12(c.beta.estimate),
            sig12(c.beta.ci_lo),
            sig12(c.beta.ci_hi),
        ]);
    }
    t
}
