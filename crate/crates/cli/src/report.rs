//! Verification reports: schema 1, one record per check, assembly sorted by
//! check name so identical runs serialize identically up to runtime fields.

use serde::Serialize;

#[derive(Serialize, Clone)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: u128,
}

impl Check {
    /// A non-finite residual can never pass and is clamped to MAX so the
    /// report stays representable in JSON.
    pub fn new(name: &str, residual: f64, tolerance: f64, runtime_ms: u128) -> Self {
        let (residual, pass) = if residual.is_finite() {
            (residual, residual <= tolerance)
        } else {
            (f64::MAX, false)
        };
        Check {
            name: name.to_string(),
            residual,
            tolerance,
            pass,
            runtime_ms,
        }
    }
}

#[derive(Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub trunc: usize,
    pub margin: usize,
    pub tol: f64,
    pub times: Vec<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn assemble(
        suite: &str,
        seed: u64,
        trunc: usize,
        margin: usize,
        tol: f64,
        times: &[f64],
        mut checks: Vec<Check>,
    ) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = checks.iter().all(|c| c.pass);
        Report {
            schema: 1,
            suite: suite.to_string(),
            seed,
            trunc,
            margin,
            tol,
            times: times.to_vec(),
            checks,
            pass,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_is_the_conjunction() {
        let ok = Check::new("a", 1e-12, 1e-8, 0);
        let bad = Check::new("b", 1.0, 1e-8, 0);
        assert!(Report::assemble("s", 0, 8, 2, 1e-8, &[], vec![ok.clone()]).pass);
        let r = Report::assemble("s", 0, 8, 2, 1e-8, &[], vec![ok, bad]);
        assert!(!r.pass);
    }

    #[test]
    fn checks_are_sorted_by_name() {
        let r = Report::assemble(
            "s",
            0,
            8,
            2,
            1e-8,
            &[],
            vec![Check::new("z", 0.0, 1.0, 0), Check::new("a", 0.0, 1.0, 0)],
        );
        assert_eq!(r.checks[0].name, "a");
        assert_eq!(r.checks[1].name, "z");
    }

    #[test]
    fn non_finite_residuals_fail_and_stay_representable() {
        let c = Check::new("nan", f64::NAN, 1e10, 0);
        assert!(!c.pass);
        assert!(c.residual.is_finite());
    }
}
