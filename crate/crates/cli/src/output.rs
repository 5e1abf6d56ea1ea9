use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::CliError;

/// `# ldps <args...>`, recorded at the top of every table.
pub fn invocation() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("# ldps {}", args.join(" "))
}

/// Writes `body` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, body: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// A CSV table preceded by the invocation comment.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Result<Self, CliError> {
        let mut prefix = invocation().into_bytes();
        prefix.push(b'\n');
        let mut writer = csv::Writer::from_writer(prefix);
        writer
            .write_record(header.iter().map(|h| h.as_ref()))
            .map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Table { writer })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<(), CliError> {
        self.writer
            .write_record(fields.iter().map(|f| f.as_ref()))
            .map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn finish(self) -> Result<Vec<u8>, CliError> {
        self.writer.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}
