use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// One JSON-lines record: a kind tag, an optional timestamp and the flattened body.
#[derive(Serialize)]
struct Record<'a, T> {
    record: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Sink {
    out: Box<dyn Write>,
    timestamp: Option<u64>,
}

impl Sink {
    pub fn open(path: Option<&Path>, timestamps: bool) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let timestamp = timestamps.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        });
        Ok(Self { out, timestamp })
    }

    pub fn record<T: Serialize>(&mut self, kind: &str, body: &T) -> io::Result<()> {
        let rec = Record {
            record: kind,
            timestamp: self.timestamp,
            body,
        };
        serde_json::to_writer(&mut self.out, &rec)?;
        self.out.write_all(b"\n")
    }

    pub fn line(&mut self, line: &str) -> io::Result<()> {
        writeln!(self.out, "{line}")
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}
