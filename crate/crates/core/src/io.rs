//! State files and sweep tables.
//!
//! Grid states are stored as
//! `{"axes":[{"min","max","points"}],"amplitudes_real":[…],"amplitudes_imag":[…]}`
//! in row-major order with the last axis fastest. Gaussian states are stored
//! as `{"n","A_real":[[…]],"A_imag":[[…]]}`. The two are told apart by their keys.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{input, Error, Result};
use crate::gaussian::SweepRow;
use crate::quadrature::ProductRule;
use crate::state::{GaussianPureState, GridAxis, GridState};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridStateJson {
    axes: Vec<GridAxis>,
    amplitudes_real: Vec<f64>,
    amplitudes_imag: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianJson {
    n: usize,
    #[serde(rename = "A_real")]
    a_real: Vec<Vec<f64>>,
    #[serde(rename = "A_imag")]
    a_imag: Vec<Vec<f64>>,
}

/// Contents of a state file.
#[derive(Debug, Clone)]
pub enum StateFile {
    Grid(GridState),
    Gaussian(GaussianPureState),
}

fn grid_from_json(j: GridStateJson) -> Result<GridState> {
    if j.amplitudes_real.len() != j.amplitudes_imag.len() {
        return input(format!(
            "amplitudes_real has {} entries but amplitudes_imag has {}",
            j.amplitudes_real.len(),
            j.amplitudes_imag.len()
        ));
    }
    for a in &j.axes {
        a.validate()?;
    }
    let amps = j
        .amplitudes_real
        .iter()
        .zip(&j.amplitudes_imag)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    GridState::unchecked(ProductRule::midpoint(&j.axes)?, amps)
}

fn gaussian_from_json(j: GaussianJson) -> Result<GaussianPureState> {
    let n = j.n;
    let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
    if !square(&j.a_real) || !square(&j.a_imag) {
        return input(format!("A_real and A_imag must both be {n}x{n}"));
    }
    GaussianPureState::new(Mat::from_fn(n, n, |r, c| {
        Complex64::new(j.a_real[r][c], j.a_imag[r][c])
    }))
}

/// Parses either state format; the grid norm is not checked.
pub fn parse_state(text: &str) -> Result<StateFile> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Input("state file must hold a JSON object".into()))?;
    if obj.contains_key("axes") {
        Ok(StateFile::Grid(grid_from_json(serde_json::from_value(v)?)?))
    } else if obj.contains_key("A_real") {
        Ok(StateFile::Gaussian(gaussian_from_json(serde_json::from_value(v)?)?))
    } else {
        input("state file has neither \"axes\" nor \"A_real\"")
    }
}

pub fn read_state(path: impl AsRef<Path>) -> Result<StateFile> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    parse_state(&text)
}

/// Reads a grid state and enforces unit norm.
pub fn read_grid_state(path: impl AsRef<Path>) -> Result<GridState> {
    match read_state(path)? {
        StateFile::Grid(g) => GridState::on_rule(g.rule().clone(), g.amplitudes().to_vec()),
        StateFile::Gaussian(_) => input("expected a grid state, found a Gaussian state"),
    }
}

pub fn grid_state_to_json(state: &GridState) -> Result<String> {
    let axes = state
        .rule()
        .grid_axes()
        .ok_or_else(|| Error::Input("only midpoint-grid states can be written".into()))?;
    let j = GridStateJson {
        axes: axes.to_vec(),
        amplitudes_real: state.amplitudes().iter().map(|a| a.re).collect(),
        amplitudes_imag: state.amplitudes().iter().map(|a| a.im).collect(),
    };
    Ok(serde_json::to_string(&j)?)
}

pub fn gaussian_to_json(state: &GaussianPureState) -> Result<String> {
    let n = state.n();
    let a = state.precision();
    let j = GaussianJson {
        n,
        a_real: (0..n).map(|r| (0..n).map(|c| a[(r, c)].re).collect()).collect(),
        a_imag: (0..n).map(|r| (0..n).map(|c| a[(r, c)].im).collect()).collect(),
    };
    Ok(serde_json::to_string(&j)?)
}

fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_grid_state(path: impl AsRef<Path>, state: &GridState) -> Result<()> {
    write_text(path, &grid_state_to_json(state)?)
}

pub fn write_gaussian(path: impl AsRef<Path>, state: &GaussianPureState) -> Result<()> {
    write_text(path, &gaussian_to_json(state)?)
}

/// 17 significant digits, enough to recover every `f64` exactly.
fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["c", "E2", "norm"])?;
    for r in rows {
        w.write_record([format_value(r.c), format_value(r.e2), format_value(r.norm)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["c", "E2", "norm"] {
        return input(format!("unexpected sweep header {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("bad number {:?}: {e}", &rec[i])))
        };
        rows.push(SweepRow {
            c: field(0)?,
            e2: field(1)?,
            norm: field(2)?,
        });
    }
    Ok(rows)
}
