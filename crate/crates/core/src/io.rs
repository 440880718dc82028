//! File formats: matrices as JSON arrays of `[re, im]` rows, catalogs and
//! programs as JSON, schedules and error tables as CSV.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{BasisCatalog, Provenance};
use crate::combined::ComparisonRow;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::program::{PulseSchedule, Step};
use crate::trotter::ErrorRow;

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(de)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect()
            })
            .collect();
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub fn matrix_to_json(m: &Matrix) -> Result<String> {
    Ok(serde_json::to_string(m)?)
}

pub fn matrix_from_json(s: &str) -> Result<Matrix> {
    Ok(serde_json::from_str(s)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogElementReport {
    pub index: usize,
    pub label: Option<String>,
    pub depth: u32,
    pub provenance: Provenance,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogReport {
    pub dim_group: usize,
    pub algebra_dim: usize,
    pub max_depth: u32,
    pub elements: Vec<CatalogElementReport>,
}

impl CatalogReport {
    pub fn of(catalog: &BasisCatalog) -> Self {
        CatalogReport {
            dim_group: catalog.dim_group(),
            algebra_dim: catalog.algebra_dim(),
            max_depth: catalog.max_depth(),
            elements: catalog
                .entries()
                .iter()
                .enumerate()
                .map(|(index, e)| CatalogElementReport {
                    index,
                    label: e.element.label().map(str::to_owned),
                    depth: e.depth,
                    provenance: e.provenance,
                    matrix: e.element.matrix().clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ScheduleRow {
    step: usize,
    gen: usize,
    duration: f64,
}

/// Writes one period of `schedule` with header `step,gen,duration`.
pub fn write_schedule_csv<W: Write>(schedule: &PulseSchedule, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if schedule.steps.is_empty() {
        w.write_record(["step", "gen", "duration"])?;
    }
    for (step, s) in schedule.steps.iter().enumerate() {
        w.serialize(ScheduleRow {
            step,
            gen: s.gen,
            duration: s.duration,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a schedule written by [`write_schedule_csv`]; `repeats` is set to 1.
pub fn read_schedule_csv<R: Read>(input: R) -> Result<PulseSchedule> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["step", "gen", "duration"] {
        return Err(Error::invalid(
            "schedule CSV must have header step,gen,duration",
        ));
    }
    let mut steps = Vec::new();
    for (i, row) in r.deserialize::<ScheduleRow>().enumerate() {
        let row = row?;
        if row.step != i {
            return Err(Error::invalid(format!(
                "schedule row {i} has step index {}",
                row.step
            )));
        }
        if !row.duration.is_finite() {
            return Err(Error::invalid(format!(
                "schedule row {i} has a non-finite duration"
            )));
        }
        steps.push(Step {
            gen: row.gen,
            duration: row.duration,
        });
    }
    Ok(PulseSchedule::new(steps))
}

pub fn write_error_csv<W: Write>(rows: &[ErrorRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "error"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.error.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "err_m2", "err_m3"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.err_m2.to_string(), r.err_m3.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
