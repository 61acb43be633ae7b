use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// Output directory with the no-silent-overwrite rule.
pub struct OutputDir {
    root: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn new(root: &Path, force: bool) -> Self {
        OutputDir {
            root: root.to_path_buf(),
            force,
        }
    }

    /// Checks every target up front so that a refused run writes nothing,
    /// then creates the directory.
    pub fn prepare(&self, names: &[&str]) -> Result<(), CliError> {
        if !self.force {
            for name in names {
                let p = self.root.join(name);
                if p.exists() {
                    return Err(CliError::config(format!(
                        "{} already exists; pass --force to overwrite",
                        p.display()
                    )));
                }
            }
        }
        fs::create_dir_all(&self.root)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", self.root.display())))
    }

    pub fn write_with(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        let fail = |e: std::io::Error| CliError::io(format!("cannot write {}: {e}", path.display()));
        let file = File::create(&path).map_err(fail)?;
        let mut w = BufWriter::new(file);
        body(&mut w).map_err(fail)?;
        w.flush().map_err(fail)?;
        Ok(path)
    }

    pub fn write_str(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write_with(name, |w| w.write_all(text.as_bytes()))
    }
}

pub fn trace_gnuplot(csv: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't [s]'\n\
         set multiplot layout 2,1\n\
         plot '{csv}' using 't':'y' with lines, '' using 't':'ydes' with lines dashtype 2\n\
         plot '{csv}' using 't':'u' with lines\n\
         unset multiplot\n\
         pause mouse close\n"
    )
}

pub fn chart_gnuplot(csv: &str, k: f64) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel 'tau'\n\
         set ylabel 'tau_hat'\n\
         set size ratio -1\n\
         set title 'stability chart, k = {k}'\n\
         plot '{csv}' using 1:2 skip 1 with lines title 'f = level', \
         '' using 1:($4 > 0 ? $2 : 1/0) skip 1 with points pt 7 title 'fold', \
         x with lines dashtype 2 title 'tau_hat = tau'\n\
         pause mouse close\n"
    )
}
