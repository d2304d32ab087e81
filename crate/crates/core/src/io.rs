//! CSV ingestion and export.
//!
//! Bins: `dataset_id,bin_lower,bin_upper,count` (blank `bin_upper` for an open
//! top bin). References: `dataset_id,mean,gini`, either value may be blank.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Bin, BinnedDataset};

pub const BINS_HEADER: [&str; 4] = ["dataset_id", "bin_lower", "bin_upper", "count"];
pub const REFS_HEADER: [&str; 3] = ["dataset_id", "mean", "gini"];

/// Published mean and Gini for one dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Reference {
    pub mean: Option<f64>,
    pub gini: Option<f64>,
}

fn parse_err(source: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

fn check_header(source: &str, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let names: Vec<&str> = found.iter().map(str::trim).collect();
    if names != expected {
        return Err(parse_err(
            source,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), names.join(",")),
        ));
    }
    Ok(())
}

fn number(source: &str, line: u64, field: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(source, line, format!("{field}: `{raw}` is not a number")))
}

fn optional_number(source: &str, line: u64, field: &str, raw: &str) -> Result<Option<f64>> {
    if raw.trim().is_empty() {
        Ok(None)
    } else {
        number(source, line, field, raw).map(Some)
    }
}

/// Reads a bins table. Datasets keep the order in which their ids first
/// appear; bins inside a dataset are sorted by lower bound.
pub fn read_bins<R: Read>(reader: R, source: &str) -> Result<Vec<BinnedDataset>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    check_header(source, rdr.headers()?, &BINS_HEADER)?;

    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<Bin>> = HashMap::new();
    let mut seen: HashSet<(String, u64)> = HashSet::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(parse_err(source, line, format!("expected 4 fields, found {}", record.len())));
        }
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(parse_err(source, line, "empty dataset_id"));
        }
        let lower = number(source, line, "bin_lower", &record[1])?;
        let upper = optional_number(source, line, "bin_upper", &record[2])?;
        let count = number(source, line, "count", &record[3])?;
        if !seen.insert((id.clone(), lower.to_bits())) {
            return Err(parse_err(source, line, format!("duplicate bin ({id}, {lower})")));
        }
        grouped
            .entry(id.clone())
            .or_insert_with(|| {
                order.push(id.clone());
                Vec::new()
            })
            .push(Bin::new(lower, upper, count));
    }

    Ok(order
        .into_iter()
        .map(|id| {
            let mut bins = grouped.remove(&id).unwrap_or_default();
            bins.sort_by(|a, b| a.lower.total_cmp(&b.lower));
            BinnedDataset::new(id, bins)
        })
        .collect())
}

pub fn read_refs<R: Read>(reader: R, source: &str) -> Result<BTreeMap<String, Reference>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    check_header(source, rdr.headers()?, &REFS_HEADER)?;
    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(parse_err(source, line, format!("expected 3 fields, found {}", record.len())));
        }
        let id = record[0].trim().to_string();
        let reference = Reference {
            mean: optional_number(source, line, "mean", &record[1])?,
            gini: optional_number(source, line, "gini", &record[2])?,
        };
        if out.insert(id.clone(), reference).is_some() {
            return Err(parse_err(source, line, format!("duplicate reference for {id}")));
        }
    }
    Ok(out)
}

pub fn read_bins_csv(path: impl AsRef<Path>) -> Result<Vec<BinnedDataset>> {
    let path = path.as_ref();
    read_bins(File::open(path)?, &path.display().to_string())
}

pub fn read_refs_csv(path: impl AsRef<Path>) -> Result<BTreeMap<String, Reference>> {
    let path = path.as_ref();
    read_refs(File::open(path)?, &path.display().to_string())
}

/// Copies known means and reference Ginis onto the datasets with matching ids.
pub fn attach_references(datasets: &mut [BinnedDataset], refs: &BTreeMap<String, Reference>) {
    for d in datasets {
        if let Some(r) = refs.get(&d.id) {
            if r.mean.is_some() {
                d.known_mean = r.mean;
            }
            if r.gini.is_some() {
                d.reference_gini = r.gini;
            }
        }
    }
}

pub fn write_bins<W: Write>(writer: W, datasets: &[BinnedDataset]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(BINS_HEADER)?;
    for d in datasets {
        for bin in &d.bins {
            wtr.write_record([
                d.id.clone(),
                bin.lower.to_string(),
                bin.upper.map(|u| u.to_string()).unwrap_or_default(),
                bin.count.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_refs<W: Write>(writer: W, datasets: &[BinnedDataset]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(REFS_HEADER)?;
    for d in datasets {
        wtr.write_record([
            d.id.clone(),
            d.known_mean.map(|v| v.to_string()).unwrap_or_default(),
            d.reference_gini.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_bins_csv(path: impl AsRef<Path>, datasets: &[BinnedDataset]) -> Result<()> {
    write_bins(File::create(path)?, datasets)
}

pub fn write_refs_csv(path: impl AsRef<Path>, datasets: &[BinnedDataset]) -> Result<()> {
    write_refs(File::create(path)?, datasets)
}
