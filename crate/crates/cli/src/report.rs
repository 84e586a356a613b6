//! CSV reports with a reproducibility header, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::CliError;

/// Lossless float formatting (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table being assembled in memory.
pub struct Csv {
    text: String,
    rows: csv::Writer<Vec<u8>>,
}

impl Csv {
    /// Starts a table with the comment header and the column names.
    pub fn new(cfg: &RunConfig, command: &str, columns: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# irrinv {} {command}", irrinv::VERSION);
        let _ = writeln!(text, "# seed = {}", cfg.seed);
        for line in cfg.result_lines() {
            let _ = writeln!(text, "# {line}");
        }
        let mut rows = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        rows.write_record(columns).expect("in-memory write");
        Csv { text, rows }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.rows.write_record(cells).expect("in-memory write");
    }

    /// Header and rows as one string.
    pub fn contents(&mut self) -> String {
        self.rows.flush().expect("in-memory write");
        let body = std::str::from_utf8(self.rows.get_ref()).expect("utf-8 cells");
        format!("{}{body}", self.text)
    }

    /// Writes the table to `dir/name` via a temporary file and a rename.
    pub fn write(&mut self, dir: &Path, name: &str) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(self.contents().as_bytes()).map_err(io)?;
        tmp.flush().map_err(io)?;
        tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
        Ok(())
    }
}

/// `summary.csv`: `quantity,estimate,std_error,n_paths,seed`.
pub struct Summary {
    csv: Csv,
    seed: u64,
}

impl Summary {
    pub fn new(cfg: &RunConfig, command: &str) -> Self {
        Summary {
            csv: Csv::new(
                cfg,
                command,
                &["quantity", "estimate", "std_error", "n_paths", "seed"],
            ),
            seed: cfg.seed,
        }
    }

    /// A Monte Carlo quantity.
    pub fn estimate(&mut self, name: &str, e: &irrinv::Estimate) {
        self.add(name, e.mean, e.std_error, e.n);
    }

    /// A closed-form quantity: zero error, no paths.
    pub fn exact(&mut self, name: &str, v: f64) {
        self.add(name, v, 0.0, 0);
    }

    pub fn add(&mut self, name: &str, v: f64, se: f64, n: usize) {
        let seed = self.seed.to_string();
        self.csv
            .row(&[name.to_string(), num(v), num(se), n.to_string(), seed]);
    }

    pub fn write(&mut self, dir: &Path) -> Result<(), CliError> {
        self.csv.write(dir, "summary.csv")
    }
}
