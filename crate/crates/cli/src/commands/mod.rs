pub mod fit_policy;
pub mod replay;
pub mod selfplay;
pub mod tournament;
pub mod trace;
pub mod tssr;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{Classify, Failure};

/// Writes `bytes` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).config(format!("cannot write {}", p.display())),
        None => io::stdout().write_all(bytes).internal("cannot write to stdout"),
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .config(format!("cannot create {}", path.display()))
}
