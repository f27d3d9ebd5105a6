use serde::Serialize;

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub invariant: String,
    pub passed: bool,
    /// Worst residual over all index tuples examined.
    pub residual: f64,
    /// Index tuple attaining `residual`, when the check is indexed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_index: Option<Vec<usize>>,
}

/// Result of validating algebra or curvature data against its invariants.
///
/// A failed check is data, not an error: callers decide whether to abort.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>, tolerance: f64) -> Self {
        Self {
            subject: subject.into(),
            tolerance,
            passed: true,
            checks: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, invariant: &str, residual: f64, worst_index: Option<Vec<usize>>) {
        let passed = residual <= self.tolerance;
        self.push_with(invariant, residual, worst_index, passed);
    }

    pub(crate) fn push_with(
        &mut self,
        invariant: &str,
        residual: f64,
        worst_index: Option<Vec<usize>>,
        passed: bool,
    ) {
        self.passed &= passed;
        self.checks.push(Check {
            invariant: invariant.to_string(),
            passed,
            residual,
            worst_index,
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, invariant: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.invariant == invariant)
    }

    pub fn summary(&self) -> String {
        if self.passed {
            return format!("{}: all {} checks passed", self.subject, self.checks.len());
        }
        let failed: Vec<String> = self
            .failures()
            .map(|c| match &c.worst_index {
                Some(idx) => format!("{} (residual {:e} at {:?})", c.invariant, c.residual, idx),
                None => format!("{} (residual {:e})", c.invariant, c.residual),
            })
            .collect();
        format!("{}: failed {}", self.subject, failed.join("; "))
    }
}
