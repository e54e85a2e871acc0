use std::fmt::Write as _;
use std::path::Path;

use crate::config::Loaded;
use crate::CliError;

/// Full double precision: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV document under construction. Nothing touches the disk until
/// [`Csv::write`].
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(loaded: &Loaded, command: &str) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# viscobound {} {command}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# config sha256 {}", loaded.sha256);
        Csv { text }
    }

    pub fn comment(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.text, "# {}", line.as_ref());
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(f.as_ref());
            first = false;
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, &self.text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}
