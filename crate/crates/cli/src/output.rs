use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// Scientific notation with 17 significant digits; parses back to the same
/// `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub type CsvWriter = csv::Writer<Box<dyn Write>>;

/// CSV writer on `path`, or on stdout when absent.
pub fn csv_writer(path: Option<&Path>) -> Result<CsvWriter, CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub fn write_row<I, S>(w: &mut CsvWriter, fields: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).map_err(CliError::csv)
}

pub fn finish(mut w: CsvWriter) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Io {
        context: "flushing CSV output".into(),
        source: e,
    })
}

/// `dir/name.ext` -> `dir/name.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
