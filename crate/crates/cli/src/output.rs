//! Number formatting and CSV writers shared by the commands.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use csv::{Terminator, Writer, WriterBuilder};

use crate::error::CliError;

/// 17 significant digits: enough to round-trip every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_file(path: &Path) -> Result<Writer<File>, CliError> {
    let file = File::create(path).map_err(CliError::io(format!("cannot create {}", path.display())))?;
    Ok(csv_writer(file))
}

pub fn csv_writer<W: Write>(w: W) -> Writer<W> {
    WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(w)
}

/// Aligned `key value` lines.
pub struct Report<'a> {
    out: &'a mut dyn Write,
}

impl<'a> Report<'a> {
    pub fn new(out: &'a mut dyn Write) -> Self {
        Self { out }
    }

    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) -> io::Result<()> {
        writeln!(self.out, "{key:<30}{value}")
    }

    pub fn num(&mut self, key: &str, value: f64) -> io::Result<()> {
        self.field(key, num(value))
    }

    pub fn line(&mut self, text: impl std::fmt::Display) -> io::Result<()> {
        writeln!(self.out, "{text}")
    }
}

pub fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        context: "cannot write output".into(),
        source: e,
    }
}
