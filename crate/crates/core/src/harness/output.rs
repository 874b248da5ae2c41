use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::TrialRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// Sizes as one `;`-joined field.
pub(crate) mod sizes_field {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(sizes: &[usize], serializer: S) -> Result<S::Ok, S::Error> {
        let joined: Vec<String> = sizes.iter().map(usize::to_string).collect();
        serializer.serialize_str(&joined.join(";"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<usize>, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.split(';')
            .map(|p| p.trim().parse().map_err(de::Error::custom))
            .collect()
    }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for record in records {
        csv.serialize(record)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[TrialRecord], mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, records)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut csv = csv::Reader::from_reader(reader);
    Ok(csv.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn parse_json<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    Ok(serde_json::from_reader(reader)?)
}

/// Writes `records` to `path`.
pub fn emit_results(records: &[TrialRecord], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Config("no records to write".into()));
    }
    let writer = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(records, writer),
        OutputFormat::Json => write_json(records, writer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(run_id: usize, sizes: Vec<usize>) -> TrialRecord {
        TrialRecord {
            run_id,
            scheme: "rand2".into(),
            n: 100,
            sizes,
            seed: 17,
            tests_used: 321,
            stages_used: 2,
            succeeded: true,
            wall_time_ms: 0,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&[record(0, vec![2, 3])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "run_id,scheme,n,sizes,seed,tests_used,stages_used,succeeded,wall_time_ms"
        );
        assert_eq!(lines[1], "0,rand2,100,2;3,17,321,2,true,0");
    }

    #[test]
    fn round_trips() {
        let records = vec![record(0, vec![2, 3]), record(1, vec![1, 1, 4])];
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), records);
        let mut buf = Vec::new();
        write_json(&records, &mut buf).unwrap();
        assert_eq!(parse_json(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn unwritable_path() {
        let err = emit_results(&[record(0, vec![1, 1])], OutputFormat::Csv, "/nonexistent/dir/out.csv");
        assert!(matches!(err, Err(Error::Io(_))));
    }
}
