//! Output sinks: CSV and JSON tables with the effective configuration echoed
//! into every artifact.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Destination of one artifact: a file or standard output.
pub struct Sink {
    path: Option<PathBuf>,
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> CliResult<Self> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self {
            path: path.map(Path::to_path_buf),
            inner,
        })
    }

    fn label(&self) -> PathBuf {
        self.path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"))
    }

    pub fn write_all(&mut self, bytes: &[u8]) -> CliResult<()> {
        let label = self.label();
        self.inner.write_all(bytes).map_err(|e| CliError::io(label, e))
    }

    pub fn flush(&mut self) -> CliResult<()> {
        let label = self.label();
        self.inner.flush().map_err(|e| CliError::io(label, e))
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.inner.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

enum Body {
    Csv(csv::Writer<Sink>),
    Json { sink: Sink, rows: Vec<Value> },
}

/// A table written row by row. CSV rows are flushed as they arrive, so an
/// interrupted run leaves the rows finished so far on disk.
pub struct TableWriter {
    body: Body,
    command: String,
    config: Value,
    started: Instant,
}

impl TableWriter {
    pub fn create(path: Option<&Path>, format: Format, command: &str, config: Value) -> CliResult<Self> {
        let mut sink = Sink::open(path)?;
        let body = match format {
            Format::Csv => {
                let echo = format!("# command: {command}\n# config: {}\n", serde_json::to_string(&config)?);
                sink.write_all(echo.as_bytes())?;
                Body::Csv(csv::Writer::from_writer(sink))
            }
            Format::Json => Body::Json { sink, rows: Vec::new() },
            Format::Svg => {
                return Err(CliError::Usage(format!(
                    "{command} writes tables; use --format csv or json"
                )));
            }
        };
        Ok(Self {
            body,
            command: command.to_string(),
            config,
            started: Instant::now(),
        })
    }

    pub fn row<R: Serialize>(&mut self, row: &R) -> CliResult<()> {
        match &mut self.body {
            Body::Csv(w) => {
                w.serialize(row)?;
                w.flush().map_err(|e| CliError::io("<output>", e))?;
            }
            Body::Json { rows, .. } => rows.push(serde_json::to_value(row)?),
        }
        Ok(())
    }

    pub fn finish(self) -> CliResult<()> {
        let elapsed = self.started.elapsed().as_secs_f64();
        match self.body {
            Body::Csv(w) => {
                let mut sink = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
                sink.write_all(format!("# wall_clock_seconds: {elapsed}\n").as_bytes())?;
                sink.flush()
            }
            Body::Json { mut sink, rows } => {
                let doc = json!({
                    "command": self.command,
                    "config": self.config,
                    "wall_clock_seconds": elapsed,
                    "rows": rows,
                });
                let mut text = serde_json::to_string_pretty(&doc)?;
                text.push('\n');
                sink.write_all(text.as_bytes())?;
                sink.flush()
            }
        }
    }
}

/// Writes a standalone document such as a sample or an SVG.
pub fn write_document(path: Option<&Path>, text: &str) -> CliResult<()> {
    let mut sink = Sink::open(path)?;
    sink.write_all(text.as_bytes())?;
    sink.flush()
}

/// Inserts the configuration as an XML comment after the declaration.
pub fn annotate_svg(svg: &str, config: &Value) -> CliResult<String> {
    let echo = serde_json::to_string(config)?.replace("--", "- -");
    let comment = format!("<!-- hypvis config: {echo} -->\n");
    Ok(match svg.find("?>\n") {
        Some(i) => format!("{}{}{}", &svg[..i + 3], comment, &svg[i + 3..]),
        None => format!("{comment}{svg}"),
    })
}
