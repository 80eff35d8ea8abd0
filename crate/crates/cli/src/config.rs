use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

/// Settings read from `--config`. Every field is optional; command-line flags
/// override what the file sets, and unset fields fall back to the defaults of
/// the command.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// If present, must name the subcommand being run.
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    /// `[nu, nv]` for Weierstrass tessellations.
    pub resolution: Option<[usize; 2]>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Table,
}

impl RunConfig {
    pub fn load(path: &Path, command: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(CliError::Input(format!(
                    "{} is a config for `{c}`, not `{command}`",
                    path.display()
                )));
            }
        }
        Ok(cfg)
    }
}

/// Parse `NUxNV`.
pub fn parse_resolution(text: &str) -> Result<[usize; 2], String> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NUxNV, got `{text}`"))?;
    let nu = a.trim().parse().map_err(|_| format!("bad resolution `{text}`"))?;
    let nv = b.trim().parse().map_err(|_| format!("bad resolution `{text}`"))?;
    Ok([nu, nv])
}
