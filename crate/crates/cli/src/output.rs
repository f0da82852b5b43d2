use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Plotpoints,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "plotpoints" => Ok(Self::Plotpoints),
            _ => bail!("unknown format `{s}` (expected csv, json, plotpoints)"),
        }
    }
}

/// Where and how a command writes its data. `path == None` means stdout.
#[derive(Debug, Clone)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Output {
    /// An explicit format wins; otherwise `.json` selects JSON and anything
    /// else falls back to `fallback`.
    pub fn new(out: Option<&Path>, format: Option<Format>, fallback: Format) -> Result<Self> {
        let path = out.filter(|p| p.as_os_str() != "-").map(Path::to_path_buf);
        let format =
            format.unwrap_or_else(
                || match path.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
                    Some("json") => Format::Json,
                    Some("csv") => Format::Csv,
                    _ => fallback,
                },
            );
        if format == Format::Plotpoints && path.is_none() {
            bail!("plotpoints output needs `--out <directory>`");
        }
        Ok(Self { path, format })
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn context(&self) -> String {
        match &self.path {
            Some(p) => format!("writing {}", p.display()),
            None => "writing to stdout".to_string(),
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)
            .map_err(io::Error::from)
            .and_then(|()| writeln!(w))
            .and_then(|()| w.flush())
            .with_context(|| self.context())
    }

    pub fn csv(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.writer()?);
        let ctx = || self.context();
        w.write_record(header).with_context(ctx)?;
        for row in rows {
            w.write_record(&row).with_context(ctx)?;
        }
        w.flush().with_context(ctx)
    }

    /// One `<name>.dat` file per trace inside the output directory.
    pub fn plotpoints(&self, traces: &[Trace]) -> Result<()> {
        let dir = self.path.as_deref().expect("checked in Output::new");
        std::fs::create_dir_all(dir).with_context(|| format!("creating directory {}", dir.display()))?;
        for t in traces {
            let path = dir.join(format!("{}.dat", t.name));
            write_plotpoints(&path, t).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub struct Trace {
    pub name: String,
    /// Parameters for the `#` header line.
    pub params: Vec<(String, String)>,
    pub columns: (String, String),
    pub points: Vec<(f64, f64)>,
}

impl Trace {
    pub fn new(name: &str, columns: (&str, &str), params: &[(&str, String)], points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            columns: (columns.0.to_string(), columns.1.to_string()),
            points,
        }
    }
}

fn write_plotpoints(path: &Path, t: &Trace) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "# {}", t.name)?;
    for (k, v) in &t.params {
        write!(w, " {k}={v}")?;
    }
    writeln!(w)?;
    writeln!(w, "# {} {}", t.columns.0, t.columns.1)?;
    for (x, y) in &t.points {
        writeln!(w, "{x} {y}")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_inference() {
        let o = Output::new(Some(Path::new("a.json")), None, Format::Csv).unwrap();
        assert_eq!(o.format, Format::Json);
        let o = Output::new(Some(Path::new("a.json")), Some(Format::Csv), Format::Csv).unwrap();
        assert_eq!(o.format, Format::Csv);
        let o = Output::new(Some(Path::new("-")), None, Format::Json).unwrap();
        assert!(o.path.is_none());
        assert!(Output::new(None, Some(Format::Plotpoints), Format::Csv).is_err());
    }

    #[test]
    fn plotpoint_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = Output::new(Some(dir.path()), Some(Format::Plotpoints), Format::Csv).unwrap();
        let t = Trace::new(
            "ratio",
            ("n", "ratio"),
            &[("set", "evens".into())],
            vec![(1.0, 0.0), (2.0, 0.5)],
        );
        out.plotpoints(&[t]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("ratio.dat")).unwrap();
        assert_eq!(text, "# ratio set=evens\n# n ratio\n1 0\n2 0.5\n");
    }
}
