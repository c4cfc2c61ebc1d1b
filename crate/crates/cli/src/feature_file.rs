//! Feature table storage in two formats.
//!
//! CSV: header `id,label,d0..d{D-1}`, one row per sample, values printed with
//! Rust's shortest round-trip float formatting.
//!
//! FVEC (binary): magic `FVEC`, then little-endian u32 dimension and u32
//! record count, then per record a u32 id byte length, the raw id bytes, one
//! label byte (covid=0, normal=1), and D little-endian f32 values.

use std::fs;
use std::path::Path;

use radaug_core::image::Label;
use radaug_core::trainer::FeatureVector;

use crate::error::Error;

pub const FVEC_MAGIC: &[u8; 4] = b"FVEC";

fn check_uniform_dim(rows: &[FeatureVector]) -> Result<usize, Error> {
    let dim = rows.first().map(|r| r.values.len()).unwrap_or(0);
    for row in rows {
        if row.values.len() != dim {
            return Err(Error::Invalid(format!(
                "feature row `{}` has {} values, expected {}",
                row.id,
                row.values.len(),
                dim
            )));
        }
    }
    Ok(dim)
}

pub fn to_csv_string(rows: &[FeatureVector]) -> Result<String, Error> {
    let dim = check_uniform_dim(rows)?;
    let mut out = String::from("id,label");
    for d in 0..dim {
        out.push_str(&format!(",d{d}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.id);
        out.push(',');
        out.push_str(row.label.as_str());
        for v in &row.values {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(path: &Path, rows: &[FeatureVector]) -> Result<(), Error> {
    let text = to_csv_string(rows)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<FeatureVector>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Invalid(format!("feature header: {e}")))?;
    let fields: Vec<&str> = headers.iter().collect();
    if fields.len() < 2 || fields[0] != "id" || fields[1] != "label" {
        return Err(Error::Invalid(
            "feature header must start with `id,label`".into(),
        ));
    }
    let dim = fields.len() - 2;
    for (d, name) in fields[2..].iter().enumerate() {
        let expected = format!("d{d}");
        if *name != expected {
            return Err(Error::Invalid(format!(
                "feature column {} must be `{expected}`, got `{name}`",
                d + 2
            )));
        }
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Invalid(format!("feature table: {e}")))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(rows.len() as u64 + 2);
        if record.len() != dim + 2 {
            return Err(Error::Invalid(format!(
                "feature line {line}: expected {} fields, got {}",
                dim + 2,
                record.len()
            )));
        }
        let id = record[0].to_string();
        let label = Label::parse(&record[1]).ok_or_else(|| {
            Error::Invalid(format!(
                "feature line {line}: unknown label `{}`",
                &record[1]
            ))
        })?;
        let mut values = Vec::with_capacity(dim);
        for field in record.iter().skip(2) {
            let v: f64 = field.parse().map_err(|_| {
                Error::Invalid(format!("feature line {line}: bad number `{field}`"))
            })?;
            values.push(v);
        }
        rows.push(FeatureVector { id, label, values });
    }
    Ok(rows)
}

fn label_byte(label: Label) -> u8 {
    match label {
        Label::Covid => 0,
        Label::Normal => 1,
    }
}

fn label_from_byte(byte: u8) -> Option<Label> {
    match byte {
        0 => Some(Label::Covid),
        1 => Some(Label::Normal),
        _ => None,
    }
}

pub fn to_fvec_bytes(rows: &[FeatureVector]) -> Result<Vec<u8>, Error> {
    let dim = check_uniform_dim(rows)?;
    let dim32 = u32::try_from(dim)
        .map_err(|_| Error::Invalid(format!("feature dimension {dim} exceeds u32")))?;
    let count = u32::try_from(rows.len())
        .map_err(|_| Error::Invalid(format!("record count {} exceeds u32", rows.len())))?;
    let mut out = Vec::new();
    out.extend_from_slice(FVEC_MAGIC);
    out.extend_from_slice(&dim32.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    for row in rows {
        let id_bytes = row.id.as_bytes();
        let id_len = u32::try_from(id_bytes.len())
            .map_err(|_| Error::Invalid(format!("id `{}` exceeds u32 length", row.id)))?;
        out.extend_from_slice(&id_len.to_le_bytes());
        out.extend_from_slice(id_bytes);
        out.push(label_byte(row.label));
        for &v in &row.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_fvec(path: &Path, rows: &[FeatureVector]) -> Result<(), Error> {
    let bytes = to_fvec_bytes(rows)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], Error> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let slice = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(Error::Invalid(format!(
                "feature file truncated while reading {what} at offset {}",
                self.pos
            ))),
        }
    }

    fn take_u32(&mut self, what: &str) -> Result<u32, Error> {
        let slice = self.take(4, what)?;
        Ok(u32::from_le_bytes([slice[0], slice[1], slice[2], slice[3]]))
    }
}

pub fn parse_fvec(bytes: &[u8]) -> Result<Vec<FeatureVector>, Error> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != FVEC_MAGIC {
        return Err(Error::Invalid(
            "feature file does not start with the FVEC magic".into(),
        ));
    }
    let dim = cur.take_u32("dimension")? as usize;
    let count = cur.take_u32("record count")? as usize;
    let mut rows = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let id_len = cur.take_u32("id length")? as usize;
        let id_bytes = cur.take(id_len, "id")?;
        let id = String::from_utf8(id_bytes.to_vec())
            .map_err(|_| Error::Invalid(format!("record {i}: id is not valid UTF-8")))?;
        let label_raw = cur.take(1, "label")?[0];
        let label = label_from_byte(label_raw).ok_or_else(|| {
            Error::Invalid(format!("record {i}: unknown label byte {label_raw}"))
        })?;
        let mut values = Vec::with_capacity(dim);
        let value_bytes = cur.take(dim * 4, "values")?;
        for chunk in value_bytes.chunks_exact(4) {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            values.push(v as f64);
        }
        rows.push(FeatureVector { id, label, values });
    }
    if cur.pos != bytes.len() {
        return Err(Error::Invalid(format!(
            "feature file has {} trailing bytes after {count} records",
            bytes.len() - cur.pos
        )));
    }
    Ok(rows)
}

/// Loads a feature table, detecting FVEC by magic and falling back to CSV.
pub fn read(path: &Path) -> Result<Vec<FeatureVector>, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let parsed = if bytes.starts_with(FVEC_MAGIC) {
        parse_fvec(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Invalid("feature file is neither FVEC nor UTF-8 CSV".into()))?;
        parse_csv(&text)
    };
    parsed.map_err(|e| match e {
        Error::Invalid(msg) => Error::format(path, msg),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<FeatureVector> {
        vec![
            FeatureVector {
                id: "imgs/a.png".into(),
                label: Label::Covid,
                values: vec![0.0, 0.25, 1.0],
            },
            FeatureVector {
                id: "imgs/b.png".into(),
                label: Label::Normal,
                values: vec![0.5, 0.125, 0.75],
            },
        ]
    }

    #[test]
    fn csv_round_trips() {
        let rows = sample_rows();
        let text = to_csv_string(&rows).unwrap();
        assert!(text.starts_with("id,label,d0,d1,d2\n"), "{text}");
        let back = parse_csv(&text).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn fvec_round_trips() {
        let rows = sample_rows();
        let bytes = to_fvec_bytes(&rows).unwrap();
        assert_eq!(&bytes[0..4], FVEC_MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        let back = parse_fvec(&bytes).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn fvec_label_bytes_are_fixed() {
        let rows = sample_rows();
        let bytes = to_fvec_bytes(&rows).unwrap();
        // magic(4) + dim(4) + count(4) + id_len(4) + id(10) = offset 26
        let id_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        assert_eq!(id_len, "imgs/a.png".len());
        assert_eq!(bytes[16 + id_len], 0, "covid label byte");
    }

    #[test]
    fn read_sniffs_the_format_by_magic() {
        let dir = tempfile::tempdir().unwrap();
        let rows = sample_rows();

        let csv_path = dir.path().join("features.csv");
        write_csv(&csv_path, &rows).unwrap();
        assert_eq!(read(&csv_path).unwrap(), rows);

        let fvec_path = dir.path().join("features.bin");
        write_fvec(&fvec_path, &rows).unwrap();
        assert_eq!(read(&fvec_path).unwrap(), rows);
    }

    #[test]
    fn truncated_fvec_is_rejected_with_offset() {
        let rows = sample_rows();
        let mut bytes = to_fvec_bytes(&rows).unwrap();
        bytes.truncate(bytes.len() - 3);
        let err = parse_fvec(&bytes).unwrap_err().to_string();
        assert!(err.contains("truncated"), "{err}");
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let rows = sample_rows();
        let mut bytes = to_fvec_bytes(&rows).unwrap();
        bytes.push(0);
        let err = parse_fvec(&bytes).unwrap_err().to_string();
        assert!(err.contains("trailing"), "{err}");
    }

    #[test]
    fn csv_header_is_validated() {
        let err = parse_csv("id,label,f0\nx,covid,0.5\n").unwrap_err().to_string();
        assert!(err.contains("d0"), "{err}");
        let err = parse_csv("name,label,d0\nx,covid,0.5\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("id,label"), "{err}");
    }

    #[test]
    fn ragged_csv_rows_are_rejected() {
        let err = parse_csv("id,label,d0,d1\nx,covid,0.5\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_label_byte_is_rejected() {
        let rows = vec![FeatureVector {
            id: "x".into(),
            label: Label::Covid,
            values: vec![1.0],
        }];
        let mut bytes = to_fvec_bytes(&rows).unwrap();
        let label_at = 4 + 4 + 4 + 4 + 1;
        bytes[label_at] = 7;
        let err = parse_fvec(&bytes).unwrap_err().to_string();
        assert!(err.contains("label byte 7"), "{err}");
    }
}
