use std::fmt;
use std::path::PathBuf;

use crate::error::{CliError, CliResult};

/// What a command did, printed to stdout on success.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub seed: Option<u64>,
    pub config: Vec<(String, String)>,
    pub outcome: Vec<(String, String)>,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.into(), value.to_string()));
        self
    }

    pub fn outcome(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.outcome.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.outcome
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Fails if a listed artifact is missing on disk.
    pub fn check_artifacts(&self) -> CliResult<()> {
        match self.artifacts.iter().find(|p| !p.is_file()) {
            Some(p) => Err(CliError::Internal(format!(
                "artifact {} was not written",
                p.display()
            ))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: {}", self.command)?;
        if let Some(seed) = self.seed {
            writeln!(f, "seed: {seed}")?;
        }
        let width = self
            .config
            .iter()
            .chain(&self.outcome)
            .map(|(k, _)| k.len())
            .max()
            .unwrap_or(0);
        for (title, items) in [("config", &self.config), ("result", &self.outcome)] {
            if items.is_empty() {
                continue;
            }
            writeln!(f, "{title}:")?;
            for (k, v) in items {
                writeln!(f, "  {k:<width$}  {v}")?;
            }
        }
        if !self.artifacts.is_empty() {
            writeln!(f, "artifacts:")?;
            for p in &self.artifacts {
                writeln!(f, "  {}", p.display())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sections() {
        let mut r = RunReport::new("timing");
        r.config("n_calls", 50).outcome("t_rev_s", 100.5);
        let text = r.to_string();
        assert_eq!(
            text,
            "command: timing\nconfig:\n  n_calls  50\nresult:\n  t_rev_s  100.5\n"
        );
        assert_eq!(r.get("t_rev_s"), Some("100.5"));
    }

    #[test]
    fn missing_artifact_is_internal_error() {
        let mut r = RunReport::new("x");
        r.artifacts.push("/nonexistent/qnmf/file.csv".into());
        assert_eq!(r.check_artifacts().unwrap_err().exit_code(), 3);
    }
}
