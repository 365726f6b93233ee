use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Note,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Violation {
    pub rule: String,
    pub severity: Severity,
    pub entities: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport { passed: true, violations: Vec::new() }
    }
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn error(&mut self, rule: &str, entities: &[&str], message: impl Into<String>) {
        self.add(rule, Severity::Error, entities, message);
    }

    pub fn note(&mut self, rule: &str, entities: &[&str], message: impl Into<String>) {
        self.add(rule, Severity::Note, entities, message);
    }

    pub fn add(&mut self, rule: &str, severity: Severity, entities: &[&str], message: impl Into<String>) {
        self.violations.push(Violation {
            rule: rule.to_string(),
            severity,
            entities: entities.iter().map(|s| s.to_string()).collect(),
            message: message.into(),
        });
        self.finish();
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.finish();
    }

    /// Sorts, dedups and recomputes `passed`.
    fn finish(&mut self) {
        self.violations.sort();
        self.violations.dedup();
        self.passed = !self.violations.iter().any(|v| v.severity == Severity::Error);
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn has_rule(&self, prefix: &str) -> bool {
        self.errors().any(|v| v.rule.starts_with(prefix))
    }
}
