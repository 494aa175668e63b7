//! CSV and JSON file formats.
//!
//! Numbers are written in the shortest decimal form that round-trips to the
//! same `f64`. An empty field means a vacuous bound: `0` for a lower column
//! and `+∞` for an upper column.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::bounds::{EnvelopeMode, EnvelopeSeries};
use crate::engine::{ErrorSeries, SeriesMeta, ThetaSnapshot};
use crate::error::{Error, Result};

pub const SERIES_HEADER: [&str; 3] = ["k", "r_hat", "std_err"];
pub const BOUNDS_HEADER: [&str; 5] = ["k", "lower_prop", "upper_prop", "lower_cf", "upper_cf"];
pub const ANCHORED_HEADER: [&str; 2] = ["lower_anch", "upper_anch"];

/// Shortest round-trip representation; non-finite values become empty.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

fn parse_num(field: &str, line: usize, column: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("line {line}, column {column}: bad number {field:?}")))
}

fn parse_bound(field: &str, vacuous: f64, line: usize, column: &str) -> Result<f64> {
    if field.trim().is_empty() {
        Ok(vacuous)
    } else {
        parse_num(field, line, column)
    }
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<Vec<String>> {
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.len() < expected.len() || header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(Error::Usage(format!(
            "expected header starting with {}, found {}",
            expected.join(","),
            header.join(",")
        )));
    }
    Ok(header)
}

fn check_index(record: &csv::StringRecord, expected: usize) -> Result<()> {
    let k: usize = record[0]
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("bad iteration index {:?}", &record[0])))?;
    if k != expected {
        return Err(Error::Usage(format!("iteration index {k} out of order, expected {expected}")));
    }
    Ok(())
}

pub fn write_series<W: Write>(out: W, series: &ErrorSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for (k, (r, s)) in series.r_hat.iter().zip(&series.std_err).enumerate() {
        w.write_record([k.to_string(), fmt_num(*r), fmt_num(*s)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `k,r_hat,std_err` rows; returns `(r_hat, std_err)`.
pub fn read_series<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &SERIES_HEADER)?;
    let mut r = Vec::new();
    let mut se = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        check_index(&rec, i)?;
        r.push(parse_num(&rec[1], i + 2, "r_hat")?);
        se.push(parse_num(&rec[2], i + 2, "std_err")?);
    }
    if r.is_empty() {
        return Err(Error::Usage("series file has no rows".into()));
    }
    Ok((r, se))
}

/// Envelope columns of a bounds file. A missing mode is written as empty
/// (vacuous) fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundsTable {
    pub propagated: Option<EnvelopeSeries>,
    pub closed_form: Option<EnvelopeSeries>,
    pub anchored: Option<EnvelopeSeries>,
}

impl BoundsTable {
    pub fn len(&self) -> usize {
        self.envelopes().map(EnvelopeSeries::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn envelopes(&self) -> impl Iterator<Item = &EnvelopeSeries> {
        [&self.propagated, &self.closed_form, &self.anchored]
            .into_iter()
            .flatten()
    }
}

fn push_pair(row: &mut Vec<String>, env: Option<&EnvelopeSeries>, k: usize) {
    match env.filter(|e| k < e.len()) {
        Some(e) => {
            row.push(if e.lower[k] > 0.0 { fmt_num(e.lower[k]) } else { String::new() });
            row.push(fmt_num(e.upper[k]));
        }
        None => row.extend([String::new(), String::new()]),
    }
}

pub fn write_bounds<W: Write>(out: W, table: &BoundsTable) -> Result<()> {
    let lens: Vec<usize> = table.envelopes().map(EnvelopeSeries::len).collect();
    if lens.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Usage("envelopes have different lengths".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = BOUNDS_HEADER.to_vec();
    if table.anchored.is_some() {
        header.extend(ANCHORED_HEADER);
    }
    w.write_record(&header)?;
    for k in 0..table.len() {
        let mut row = vec![k.to_string()];
        push_pair(&mut row, table.propagated.as_ref(), k);
        push_pair(&mut row, table.closed_form.as_ref(), k);
        if table.anchored.is_some() {
            push_pair(&mut row, table.anchored.as_ref(), k);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a bounds file. A mode whose columns are empty on every row is
/// reported as absent.
pub fn read_bounds<R: Read>(input: R) -> Result<BoundsTable> {
    let mut reader = csv::Reader::from_reader(input);
    let header = check_header(&mut reader, &BOUNDS_HEADER)?;
    let anchored = match &header[5..] {
        [] => false,
        [a, b] if a == ANCHORED_HEADER[0] && b == ANCHORED_HEADER[1] => true,
        other => return Err(Error::Usage(format!("unexpected bounds columns {other:?}"))),
    };
    let modes = [EnvelopeMode::Propagated, EnvelopeMode::ClosedForm, EnvelopeMode::Anchored];
    let n_modes = if anchored { 3 } else { 2 };
    let mut cols: Vec<(Vec<f64>, Vec<f64>, bool)> = vec![Default::default(); n_modes];
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        check_index(&rec, i)?;
        for (m, col) in cols.iter_mut().enumerate() {
            let (lo, hi) = (&rec[1 + 2 * m], &rec[2 + 2 * m]);
            col.2 |= !lo.trim().is_empty() || !hi.trim().is_empty();
            col.0.push(parse_bound(lo, 0.0, i + 2, header[1 + 2 * m].as_str())?);
            col.1.push(parse_bound(hi, f64::INFINITY, i + 2, header[2 + 2 * m].as_str())?);
        }
    }
    let mut table = BoundsTable::default();
    for ((lower, upper, present), mode) in cols.into_iter().zip(modes) {
        let env = present.then_some(EnvelopeSeries { lower, upper, mode, switch: None });
        match mode {
            EnvelopeMode::Propagated => table.propagated = env,
            EnvelopeMode::ClosedForm => table.closed_form = env,
            EnvelopeMode::Anchored => table.anchored = env,
        }
    }
    Ok(table)
}

pub fn write_theta<W: Write>(out: W, snapshots: &[ThetaSnapshot]) -> Result<()> {
    let d = snapshots.first().map_or(0, |s| s.theta.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["trial".to_string(), "k".to_string()];
    header.extend((1..=d).map(|i| format!("theta_{i}")));
    w.write_record(&header)?;
    for s in snapshots {
        let mut row = vec![s.trial.to_string(), s.k.to_string()];
        row.extend(s.theta.iter().map(|x| fmt_num(*x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_theta<R: Read>(input: R) -> Result<Vec<ThetaSnapshot>> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &["trial", "k"])?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let int = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| Error::Usage(format!("line {}: bad integer {f:?}", i + 2)))
        };
        let theta = rec
            .iter()
            .skip(2)
            .map(|f| parse_num(f, i + 2, "theta"))
            .collect::<Result<_>>()?;
        out.push(ThetaSnapshot { trial: int(&rec[0])?, k: int(&rec[1])?, theta });
    }
    Ok(out)
}

/// `run.csv` → `run.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes the series CSV and its metadata sidecar.
pub fn save_series(path: &Path, series: &ErrorSeries) -> Result<()> {
    write_series(BufWriter::new(File::create(path)?), series)?;
    write_json(&sidecar_path(path), &series.meta)
}

/// Loads a series CSV. Without a sidecar the series counts as exact when
/// every standard error is zero.
pub fn load_series(path: &Path) -> Result<ErrorSeries> {
    let (r_hat, std_err) = read_series(BufReader::new(File::open(path)?))?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        read_json::<SeriesMeta>(&side)?
    } else {
        SeriesMeta {
            problem: String::new(),
            eta: f64::NAN,
            trials: 0,
            seed: None,
            exact: std_err.iter().all(|s| *s == 0.0),
            single_trial_warning: false,
        }
    };
    Ok(ErrorSeries { r_hat, std_err, meta })
}

pub fn save_bounds(path: &Path, table: &BoundsTable) -> Result<()> {
    write_bounds(BufWriter::new(File::create(path)?), table)
}

pub fn load_bounds(path: &Path) -> Result<BoundsTable> {
    read_bounds(BufReader::new(File::open(path)?))
}

pub fn save_theta(path: &Path, snapshots: &[ThetaSnapshot]) -> Result<()> {
    write_theta(BufWriter::new(File::create(path)?), snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, 0.1, 1e-300, 2.1433e-5, 1.0 / 3.0, 123456789.125] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_num(f64::INFINITY), "");
    }

    #[test]
    fn series_round_trip() {
        let s = ErrorSeries::exact(vec![0.0, 0.01, 0.0181], "toy", 0.1);
        let mut buf = Vec::new();
        write_series(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,r_hat,std_err\n0,0.0,0.0\n1,0.01,0.0\n"));
        let (r, se) = read_series(buf.as_slice()).unwrap();
        assert_eq!(r, s.r_hat);
        assert_eq!(se, s.std_err);
    }

    #[test]
    fn series_rejects_bad_input() {
        assert!(read_series("k,r,se\n0,1,0\n".as_bytes()).is_err());
        assert!(read_series("k,r_hat,std_err\n1,1,0\n".as_bytes()).is_err());
        assert!(read_series("k,r_hat,std_err\n0,x,0\n".as_bytes()).is_err());
        assert!(read_series("k,r_hat,std_err\n".as_bytes()).is_err());
    }

    #[test]
    fn bounds_round_trip_with_vacuous_fields() {
        let prop = EnvelopeSeries {
            lower: vec![4.0, 0.0, 2.5],
            upper: vec![4.0, f64::INFINITY, 3.0],
            mode: EnvelopeMode::Propagated,
            switch: None,
        };
        let anch = EnvelopeSeries { mode: EnvelopeMode::Anchored, ..prop.clone() };
        let table = BoundsTable { propagated: Some(prop.clone()), closed_form: None, anchored: Some(anch) };
        let mut buf = Vec::new();
        write_bounds(&mut buf, &table).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,lower_prop,upper_prop,lower_cf,upper_cf,lower_anch,upper_anch\n"));
        assert!(text.contains("\n1,,,,,,\n"));
        let back = read_bounds(buf.as_slice()).unwrap();
        assert_eq!(back.propagated.as_ref().unwrap().lower, prop.lower);
        assert_eq!(back.propagated.as_ref().unwrap().upper, prop.upper);
        assert!(back.closed_form.is_none());
        assert!(back.anchored.is_some());
    }

    #[test]
    fn theta_round_trip() {
        let snaps = vec![
            ThetaSnapshot { trial: 0, k: 5, theta: vec![1.5, -2.0] },
            ThetaSnapshot { trial: 1, k: 5, theta: vec![0.25, 3.0] },
        ];
        let mut buf = Vec::new();
        write_theta(&mut buf, &snaps).unwrap();
        assert!(buf.starts_with(b"trial,k,theta_1,theta_2\n"));
        assert_eq!(read_theta(buf.as_slice()).unwrap(), snaps);
    }

    #[test]
    fn sidecar_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        let s = ErrorSeries::exact(vec![1.0, 0.5], "toy", 0.1);
        save_series(&path, &s).unwrap();
        assert!(dir.path().join("run.json").exists());
        assert_eq!(load_series(&path).unwrap(), s);
    }
}
