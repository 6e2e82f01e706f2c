//! CSV output with a provenance comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pvnash::ModelParams;

/// Twelve significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

pub struct CsvOut {
    w: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    /// Opens `path`, writes `# pvnash <version> params=<json>` and the header row.
    pub fn create(path: &Path, p: &ModelParams, header: &[&str]) -> std::io::Result<Self> {
        let mut f = BufWriter::new(File::create(path)?);
        writeln!(f, "# pvnash {} params={}", env!("CARGO_PKG_VERSION"), p.to_json())?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(header)?;
        Ok(CsvOut { w })
    }

    pub fn row(&mut self, fields: &[String]) -> csv::Result<()> {
        self.w.write_record(fields)
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.w.flush()
    }
}
