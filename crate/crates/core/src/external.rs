//! Adapter that runs an external simulator per evaluation.
//!
//! The command line is a template with `{param:<name>}` and `{benchmark}`
//! placeholders (`{{` and `}}` for literal braces). The template is split into
//! arguments with shell quoting rules first and each argument is rendered
//! afterwards, so substituted values never change the argument layout.
//!
//! The simulator must write a result file of `key=value` lines holding at
//! least `power_watts` and `exec_time_ms`:
//!
//! ```text
//! power_watts=1.597
//! exec_time_ms=35.142
//! ```

use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{BenchmarkId, EvaluationError, Evaluator};
use crate::metrics::RawMetrics;
use crate::space::{Configuration, DesignSpace};

const POLL_INTERVAL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unterminated placeholder in `{0}`")]
    Unterminated(String),
    #[error("unmatched `}}` in `{0}`")]
    UnmatchedClose(String),
    #[error("unknown placeholder `{{{0}}}`")]
    UnknownPlaceholder(String),
    #[error("placeholder refers to unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("cannot split command template: {0}")]
    Quoting(String),
    #[error("command template is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ResultFormatError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("failed to spawn `{command}`: {reason}")]
    SpawnFailed { command: String, reason: String },
    #[error("`{command}` exited with {status}: {stderr}")]
    NonZeroExit {
        command: String,
        status: String,
        stderr: String,
    },
    #[error("`{command}` timed out after {after:?}")]
    Timeout { command: String, after: Duration },
    #[error("`{command}` did not produce result file {path}")]
    ResultFileMissing { command: String, path: String },
    #[error("`{command}` produced an unreadable result file: {source}")]
    ResultParseError {
        command: String,
        #[source]
        source: ResultFormatError,
    },
}

/// How to invoke the external simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterSpec {
    /// Command line template.
    pub command: String,
    /// Result file path template; same placeholders as `command`.
    pub result_file: String,
    /// Kill the process after this many seconds. No retry is attempted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Literal(String),
    Param(String),
    Benchmark,
}

fn parse_pieces(template: &str) -> Result<Vec<Piece>, TemplateError> {
    let mut pieces = Vec::new();
    let mut literal = String::new();
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                literal.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                literal.push('}');
            }
            '}' => return Err(TemplateError::UnmatchedClose(template.to_string())),
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(c) => name.push(c),
                        None => return Err(TemplateError::Unterminated(template.to_string())),
                    }
                }
                if !literal.is_empty() {
                    pieces.push(Piece::Literal(std::mem::take(&mut literal)));
                }
                if name == "benchmark" {
                    pieces.push(Piece::Benchmark);
                } else if let Some(param) = name.strip_prefix("param:") {
                    pieces.push(Piece::Param(param.to_string()));
                } else {
                    return Err(TemplateError::UnknownPlaceholder(name));
                }
            }
            c => literal.push(c),
        }
    }
    if !literal.is_empty() {
        pieces.push(Piece::Literal(literal));
    }
    Ok(pieces)
}

/// Checks a template's syntax and that every parameter placeholder names a
/// parameter of `space`.
pub fn check_template(template: &str, space: &DesignSpace) -> Result<(), TemplateError> {
    for piece in parse_pieces(template)? {
        if let Piece::Param(name) = piece {
            if space.parameter(&name).is_none() {
                return Err(TemplateError::UnknownParameter(name));
            }
        }
    }
    Ok(())
}

/// Renders a single string template.
pub fn render_template(
    template: &str,
    config: &Configuration,
    benchmark: &BenchmarkId,
) -> Result<String, TemplateError> {
    let mut out = String::new();
    for piece in parse_pieces(template)? {
        match piece {
            Piece::Literal(s) => out.push_str(&s),
            Piece::Benchmark => out.push_str(&benchmark.name),
            Piece::Param(name) => {
                let value = config
                    .get(&name)
                    .ok_or(TemplateError::UnknownParameter(name))?;
                out.push_str(&value.to_string());
            }
        }
    }
    Ok(out)
}

/// Splits the command template into arguments, then renders each one.
pub fn render_command(
    template: &str,
    config: &Configuration,
    benchmark: &BenchmarkId,
) -> Result<Vec<String>, TemplateError> {
    let words = shell_words::split(template).map_err(|e| TemplateError::Quoting(e.to_string()))?;
    if words.is_empty() {
        return Err(TemplateError::Empty);
    }
    words
        .iter()
        .map(|w| render_template(w, config, benchmark))
        .collect()
}

fn parse_number(value: &str) -> Option<f64> {
    let plain = !value.is_empty()
        && value
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        && value.chars().any(|c| c.is_ascii_digit());
    if plain {
        value.parse().ok()
    } else {
        None
    }
}

/// Parses the `key=value` result format. Unknown keys are ignored; LF and
/// CRLF line endings are accepted.
pub fn parse_result_file(text: &str) -> Result<RawMetrics, ResultFormatError> {
    let err = |line: usize, message: String| ResultFormatError { line, message };
    if !text.is_ascii() {
        return Err(err(0, "result file is not ASCII".into()));
    }
    let mut power = None;
    let mut time = None;
    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected key=value, got `{line}`")))?;
        let key = key.trim();
        let slot = match key {
            "power_watts" => &mut power,
            "exec_time_ms" => &mut time,
            _ => continue,
        };
        if slot.is_some() {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
        let value = value.trim();
        let number =
            parse_number(value).ok_or_else(|| err(line_no, format!("`{value}` is not a decimal number")))?;
        *slot = Some(number);
    }
    let power = power.ok_or_else(|| err(0, "missing key `power_watts`".into()))?;
    let time = time.ok_or_else(|| err(0, "missing key `exec_time_ms`".into()))?;
    RawMetrics::new(power, time).map_err(|e| err(0, e.to_string()))
}

/// Runs one simulator invocation per evaluation.
#[derive(Debug, Clone)]
pub struct ExternalEvaluator {
    spec: AdapterSpec,
}

impl ExternalEvaluator {
    pub fn new(spec: AdapterSpec) -> Self {
        ExternalEvaluator { spec }
    }

    pub fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    pub fn external_evaluate(
        &self,
        config: &Configuration,
        benchmark: &BenchmarkId,
    ) -> Result<RawMetrics, ExternalError> {
        let argv = render_command(&self.spec.command, config, benchmark)?;
        let command = shell_words::join(&argv);
        let path = PathBuf::from(render_template(&self.spec.result_file, config, benchmark)?);

        // a stale file from an earlier run must not be mistaken for output
        let _ = std::fs::remove_file(&path);

        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| ExternalError::SpawnFailed {
                command: command.clone(),
                reason: e.to_string(),
            })?;

        let mut stderr_pipe = child.stderr.take();
        let stderr_reader = std::thread::spawn(move || {
            let mut buf = String::new();
            if let Some(pipe) = stderr_pipe.as_mut() {
                let _ = pipe.read_to_string(&mut buf);
            }
            buf
        });

        let timeout = self.spec.timeout_secs.map(Duration::from_secs_f64);
        let started = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {}
                Err(e) => {
                    return Err(ExternalError::SpawnFailed {
                        command,
                        reason: e.to_string(),
                    })
                }
            }
            if let Some(limit) = timeout {
                if started.elapsed() >= limit {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(ExternalError::Timeout { command, after: limit });
                }
            }
            std::thread::sleep(POLL_INTERVAL);
        };
        let stderr = stderr_reader.join().unwrap_or_default();

        if !status.success() {
            return Err(ExternalError::NonZeroExit {
                command,
                status: status.to_string(),
                stderr: stderr.trim().to_string(),
            });
        }

        let text = std::fs::read_to_string(&path).map_err(|_| ExternalError::ResultFileMissing {
            command: command.clone(),
            path: path.display().to_string(),
        })?;
        parse_result_file(&text).map_err(|source| ExternalError::ResultParseError { command, source })
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<RawMetrics, EvaluationError> {
        Ok(self.external_evaluate(config, benchmark)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::Category;
    use crate::space::{ParameterSpec, Setting};

    fn space() -> DesignSpace {
        DesignSpace::new(vec![
            ParameterSpec::new("Cores", [1, 2, 4].map(Setting::from)),
            ParameterSpec::new("Frequency", [1700, 3200].map(Setting::from)),
        ])
        .unwrap()
    }

    fn config() -> Configuration {
        space()
            .all_first()
            .with("Cores", Setting::from(2))
            .with("Frequency", Setting::from(3200))
    }

    fn x264() -> BenchmarkId {
        BenchmarkId::new("x264", Category::Graphics)
    }

    #[test]
    fn renders_placeholders() {
        let argv = render_command(
            "sim --cores {param:Cores} --freq {param:Frequency} --bench {benchmark}",
            &config(),
            &x264(),
        )
        .unwrap();
        assert_eq!(shell_words::join(&argv), "sim --cores 2 --freq 3200 --bench x264");
    }

    #[test]
    fn quoted_arguments_stay_whole() {
        let argv = render_command("run 'a b {benchmark}' x{{y}}", &config(), &x264()).unwrap();
        assert_eq!(argv, vec!["run", "a b x264", "x{y}"]);
    }

    #[test]
    fn template_errors() {
        let c = config();
        let b = x264();
        assert_eq!(
            render_template("{bogus}", &c, &b),
            Err(TemplateError::UnknownPlaceholder("bogus".into()))
        );
        assert!(matches!(render_template("{param:Cores", &c, &b), Err(TemplateError::Unterminated(_))));
        assert!(matches!(render_template("a}b", &c, &b), Err(TemplateError::UnmatchedClose(_))));
        assert_eq!(
            check_template("x {param:Voltage}", &space()),
            Err(TemplateError::UnknownParameter("Voltage".into()))
        );
        assert!(check_template("x {param:Cores} {benchmark}", &space()).is_ok());
        assert_eq!(render_command("  ", &c, &b), Err(TemplateError::Empty));
    }

    #[test]
    fn parses_result_fixture() {
        let raw = parse_result_file("power_watts=1.597\nexec_time_ms=35.142\n").unwrap();
        assert_eq!(raw.power_watts, 1.597);
        assert_eq!(raw.exec_time_ms, 35.142);
    }

    #[test]
    fn accepts_crlf_and_unknown_keys() {
        let raw = parse_result_file("cycles=99\r\nexec_time_ms=2\r\npower_watts=0.5\r\n").unwrap();
        assert_eq!((raw.power_watts, raw.exec_time_ms), (0.5, 2.0));
    }

    #[test]
    fn rejects_malformed_results() {
        assert!(parse_result_file("power_watts=1.597\n").is_err());
        assert!(parse_result_file("power_watts=abc\nexec_time_ms=1\n").is_err());
        assert!(parse_result_file("power_watts=inf\nexec_time_ms=1\n").is_err());
        assert!(parse_result_file("power_watts=-1\nexec_time_ms=1\n").is_err());
        assert!(parse_result_file("power_watts 1\nexec_time_ms=1\n").is_err());
        assert!(parse_result_file("power_watts=1\npower_watts=2\nexec_time_ms=1\n").is_err());
        assert!(parse_result_file("power_watts=1\nexec_time_ms=1\nnote=\u{e9}\n").is_err());
    }

    #[cfg(unix)]
    #[test]
    fn runs_stub_script() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("{benchmark}-{param:Cores}.txt");
        let spec = AdapterSpec {
            command: format!(
                "sh -c 'printf \"power_watts=1.597\\nexec_time_ms=35.142\\n\" > \"$0\"' '{}'",
                out.display()
            ),
            result_file: out.display().to_string(),
            timeout_secs: Some(10.0),
        };
        let raw = ExternalEvaluator::new(spec).external_evaluate(&config(), &x264()).unwrap();
        assert_eq!(raw, RawMetrics::new(1.597, 35.142).unwrap());
        assert!(dir.path().join("x264-2.txt").exists());
    }

    #[cfg(unix)]
    #[test]
    fn process_failures_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let result_file = dir.path().join("r.txt").display().to_string();
        let eval = |command: &str, timeout_secs| {
            ExternalEvaluator::new(AdapterSpec {
                command: command.to_string(),
                result_file: result_file.clone(),
                timeout_secs,
            })
            .external_evaluate(&config(), &x264())
        };

        assert!(matches!(
            eval("/nonexistent/simulator --x", None),
            Err(ExternalError::SpawnFailed { .. })
        ));
        match eval("sh -c 'echo bad >&2; exit 3'", None) {
            Err(ExternalError::NonZeroExit { stderr, command, .. }) => {
                assert_eq!(stderr, "bad");
                assert!(command.starts_with("sh -c"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(eval("true", None), Err(ExternalError::ResultFileMissing { .. })));
        assert!(matches!(eval("sleep 5", Some(0.1)), Err(ExternalError::Timeout { .. })));
        let garbage = format!("sh -c 'echo power_watts=x > {result_file}'");
        assert!(matches!(eval(&garbage, None), Err(ExternalError::ResultParseError { .. })));
    }
}
