//! External-solver backend: writes the model as MPS, runs a configured
//! command line, and reads the solution file back.
//!
//! The command is a template whose `{model}` and `{solution}` placeholders
//! are replaced by temporary-file paths (directory overridable through
//! `PICKBATCH_TMPDIR`). A time limit, when set, appends the expanded
//! `time_limit_flag` template with `{seconds}` substituted. Solution-file
//! parsing is pluggable by id; the bundled `plain` parser accepts the common
//! whitespace-separated `name value` / `index name value` line conventions.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use pickbatch_core::milp::{MilpModel, SolveError, SolveResult, SolveStatus, Solver};

/// How to drive one external MIP solver binary.
#[derive(Clone, Debug)]
pub struct BackendConfig {
    /// e.g. `"cbc {model} solve solution {solution}"`.
    pub command: String,
    /// e.g. `"sec {seconds}"`; appended when `time_limit_secs` is set.
    pub time_limit_flag: Option<String>,
    pub time_limit_secs: Option<f64>,
    /// Solution parser id; `"plain"` is bundled.
    pub parser: String,
}

impl BackendConfig {
    pub fn new(command: &str) -> Self {
        BackendConfig {
            command: command.to_string(),
            time_limit_flag: None,
            time_limit_secs: None,
            parser: "plain".to_string(),
        }
    }
}

/// Values a parser extracted from a solution file.
#[derive(Debug, Default)]
pub struct ParsedSolution {
    pub declared_status: Option<SolveStatus>,
    pub values: Vec<(String, f64)>,
}

pub trait SolutionParser {
    fn parse(&self, text: &str) -> Result<ParsedSolution, SolveError>;
}

/// Tolerant line parser: `name value` pairs or `index name value [extra]`
/// rows, with status keywords picked out of header lines.
pub struct PlainParser;

impl SolutionParser for PlainParser {
    fn parse(&self, text: &str) -> Result<ParsedSolution, SolveError> {
        let mut out = ParsedSolution::default();
        for line in text.lines() {
            let lower = line.to_ascii_lowercase();
            if lower.contains("infeasible") {
                out.declared_status = Some(SolveStatus::Infeasible);
                continue;
            }
            if lower.contains("unbounded") {
                out.declared_status = Some(SolveStatus::Unbounded);
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                [name, value] => {
                    if let Ok(v) = value.parse::<f64>() {
                        out.values.push((name.to_string(), v));
                    }
                }
                [index, name, value, ..]
                    if index.parse::<i64>().is_ok() && name.parse::<f64>().is_err() =>
                {
                    if let Ok(v) = value.parse::<f64>() {
                        out.values.push(((*name).to_string(), v));
                    }
                }
                _ => {}
            }
        }
        if out.values.is_empty() && out.declared_status.is_none() {
            return Err(SolveError::Unparsable(
                "no variable values in solution file".into(),
            ));
        }
        Ok(out)
    }
}

pub fn parser_for(id: &str) -> Option<Box<dyn SolutionParser>> {
    match id {
        "plain" => Some(Box::new(PlainParser)),
        _ => None,
    }
}

/// Drives the configured external solver once per `solve` call. Concurrent
/// calls are safe; every call uses its own temporary files.
#[derive(Clone, Debug)]
pub struct SubprocessSolver {
    pub config: BackendConfig,
}

impl SubprocessSolver {
    pub fn new(config: BackendConfig) -> Self {
        SubprocessSolver { config }
    }

    fn temp_dir() -> PathBuf {
        std::env::var_os("PICKBATCH_TMPDIR")
            .map(PathBuf::from)
            .unwrap_or_else(std::env::temp_dir)
    }

    fn command_tokens(&self, model_path: &str, solution_path: &str) -> Vec<String> {
        let seconds = self.config.time_limit_secs.map(|limit| format!("{limit}"));
        let mut tokens: Vec<String> = self
            .config
            .command
            .split_whitespace()
            .filter_map(|t| {
                let t = t
                    .replace("{model}", model_path)
                    .replace("{solution}", solution_path);
                if t.contains("{time_limit}") {
                    // Dropped entirely when no limit is configured.
                    return seconds.as_ref().map(|s| t.replace("{time_limit}", s));
                }
                Some(t)
            })
            .collect();
        if let (Some(flag), Some(seconds)) = (&self.config.time_limit_flag, &seconds) {
            tokens.extend(
                flag.split_whitespace()
                    .map(|t| t.replace("{seconds}", seconds)),
            );
        }
        tokens
    }
}

impl Solver for SubprocessSolver {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, SolveError> {
        let start = Instant::now();
        let parser = parser_for(&self.config.parser).ok_or_else(|| {
            SolveError::Backend(format!("unknown parser \"{}\"", self.config.parser))
        })?;

        let dir = Self::temp_dir();
        let mut model_file = tempfile::Builder::new()
            .prefix("pickbatch-model-")
            .suffix(".mps")
            .tempfile_in(&dir)
            .map_err(|e| SolveError::Backend(format!("temp file: {e}")))?;
        model_file
            .write_all(model.write_mps()?.as_bytes())
            .map_err(|e| SolveError::Backend(format!("writing model: {e}")))?;
        let solution_file = tempfile::Builder::new()
            .prefix("pickbatch-sol-")
            .suffix(".sol")
            .tempfile_in(&dir)
            .map_err(|e| SolveError::Backend(format!("temp file: {e}")))?;

        let model_path = model_file.path().to_string_lossy().into_owned();
        let solution_path = solution_file.path().to_string_lossy().into_owned();
        let tokens = self.command_tokens(&model_path, &solution_path);
        let (program, args) = tokens
            .split_first()
            .ok_or_else(|| SolveError::Backend("empty backend command".into()))?;

        let mut child = Command::new(program)
            .args(args)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SolveError::Backend(format!("spawning {program}: {e}")))?;

        // The solver is expected to honor its own limit flag; kill it after
        // the limit plus slack as a backstop.
        let hard_deadline = self
            .config
            .time_limit_secs
            .map(|s| Duration::from_secs_f64(s * 1.5 + 2.0));
        let mut timed_out = false;
        let status = loop {
            match child
                .try_wait()
                .map_err(|e| SolveError::Backend(format!("wait: {e}")))?
            {
                Some(status) => break status,
                None => {
                    if let Some(deadline) = hard_deadline {
                        if start.elapsed() > deadline {
                            let _ = child.kill();
                            timed_out = true;
                        }
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
            }
        };
        let output = if timed_out {
            // The child was killed; a grandchild may still hold the pipes,
            // so reading them to EOF could block. Drop them unread.
            drop(child.stdout.take());
            drop(child.stderr.take());
            std::process::Output {
                status,
                stdout: Vec::new(),
                stderr: Vec::new(),
            }
        } else {
            child
                .wait_with_output()
                .map_err(|e| SolveError::Backend(format!("collecting output: {e}")))?
        };

        let solution_text = std::fs::read_to_string(&solution_path).unwrap_or_default();
        let parsed = parser.parse(&solution_text);

        match parsed {
            Ok(parsed) => {
                if let Some(status) = parsed.declared_status {
                    return Ok(SolveResult {
                        status,
                        objective_value: None,
                        values: Vec::new(),
                        best_bound: None,
                        node_count: None,
                        wall_time_secs: start.elapsed().as_secs_f64(),
                    });
                }
                let by_name: HashMap<&str, f64> = parsed
                    .values
                    .iter()
                    .map(|(n, v)| (n.as_str(), *v))
                    .collect();
                let values: Vec<f64> = model
                    .vars()
                    .iter()
                    .map(|v| by_name.get(v.name.as_str()).copied().unwrap_or(0.0))
                    .collect();
                let objective = model.objective_value(&values);
                let result = SolveResult {
                    status: if timed_out {
                        SolveStatus::Timeout
                    } else {
                        SolveStatus::Optimal
                    },
                    objective_value: Some(objective),
                    values,
                    best_bound: None,
                    node_count: None,
                    wall_time_secs: start.elapsed().as_secs_f64(),
                };
                result.check_against(model)?;
                Ok(result)
            }
            Err(parse_err) => {
                if timed_out {
                    return Err(SolveError::TimeoutNoIncumbent);
                }
                if !status.success() {
                    return Err(SolveError::Backend(format!(
                        "{program} exited with {status}; stderr: {}",
                        String::from_utf8_lossy(&output.stderr).trim()
                    )));
                }
                Err(parse_err)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_parser_name_value() {
        let parsed = PlainParser.parse("x 1\ny 0.5\n").unwrap();
        assert_eq!(parsed.values, vec![("x".into(), 1.0), ("y".into(), 0.5)]);
    }

    #[test]
    fn plain_parser_indexed_rows_and_headers() {
        let text = "Optimal - objective value 6.0\n0 x_t1_a1_b1 1 0\n1 z_o1_t1 1 0\n";
        let parsed = PlainParser.parse(text).unwrap();
        assert_eq!(parsed.values.len(), 2);
        assert_eq!(parsed.values[0].0, "x_t1_a1_b1");
    }

    #[test]
    fn plain_parser_detects_infeasible() {
        let parsed = PlainParser
            .parse("Infeasible - objective value 0\n")
            .unwrap();
        assert_eq!(parsed.declared_status, Some(SolveStatus::Infeasible));
    }

    #[test]
    fn plain_parser_rejects_garbage() {
        assert!(PlainParser.parse("nothing here at all\n").is_err());
    }

    #[test]
    fn command_expansion() {
        let mut config = BackendConfig::new("solver {model} -o {solution}");
        config.time_limit_flag = Some("--tl {seconds}".into());
        config.time_limit_secs = Some(30.0);
        let solver = SubprocessSolver::new(config);
        let tokens = solver.command_tokens("/tmp/m.mps", "/tmp/s.sol");
        assert_eq!(
            tokens,
            vec!["solver", "/tmp/m.mps", "-o", "/tmp/s.sol", "--tl", "30"]
        );
    }

    #[test]
    fn time_limit_placeholder_in_main_template() {
        let mut config = BackendConfig::new("solver {model} -o {solution} --tl={time_limit}");
        config.time_limit_secs = Some(7.5);
        let solver = SubprocessSolver::new(config.clone());
        let tokens = solver.command_tokens("/m", "/s");
        assert_eq!(tokens, vec!["solver", "/m", "-o", "/s", "--tl=7.5"]);
        // Without a limit the whole token disappears.
        config.time_limit_secs = None;
        let solver = SubprocessSolver::new(config);
        let tokens = solver.command_tokens("/m", "/s");
        assert_eq!(tokens, vec!["solver", "/m", "-o", "/s"]);
    }
}
