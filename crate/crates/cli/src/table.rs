//! Versioned CSV output. Every file starts with a `# schema: <name>/v<N>`
//! line followed by a header row.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

pub fn write_rows<R: Serialize>(path: &Path, schema: &str, rows: &[R]) -> Result<(), CliError> {
    let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
    writeln!(file, "# schema: {schema}").map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// Header-only file for an empty table.
pub fn write_header(path: &Path, schema: &str, header: &[&str]) -> Result<(), CliError> {
    let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
    writeln!(file, "# schema: {schema}").map_err(|e| CliError::io(path, e))?;
    writeln!(file, "{}", header.join(",")).map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// Reads rows back, returning the schema tag alongside them.
pub fn read_rows<R: DeserializeOwned>(path: &Path) -> Result<(String, Vec<R>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let schema = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# schema: "))
        .ok_or_else(|| CliError::Input(format!("{}: missing schema line", path.display())))?
        .to_string();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<Result<Vec<R>, _>>()?;
    Ok((schema, rows))
}
