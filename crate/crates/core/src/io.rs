//! Canonical CSV forms of photon amplitudes.
//!
//! Numbers are written with 17 significant digits so that a value read back
//! is bit-identical to the one written. Lines starting with `#` are
//! metadata and ignored by the readers.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{FrequencyGrid, OnePhotonWavepacket, PairAmplitude, TwoPhotonAmplitude, C64};

/// Formats a real with 17 significant digits; `-0` is written as `0`.
pub fn fmt_real(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

pub fn write_comments<W: Write>(out: &mut W, comments: &[String]) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    Ok(())
}

/// Writes `omega,re,im` rows.
pub fn write_packet_csv<W: Write>(
    out: &mut W,
    packet: &OnePhotonWavepacket,
    comments: &[String],
) -> std::io::Result<()> {
    write_comments(out, comments)?;
    writeln!(out, "omega,re,im")?;
    for (w, a) in packet.grid().points().zip(packet.amplitude()) {
        writeln!(out, "{},{},{}", fmt_real(w), fmt_real(a.re), fmt_real(a.im))?;
    }
    Ok(())
}

fn write_table<W: Write>(
    out: &mut W,
    grid: &FrequencyGrid,
    table: &[C64],
    comments: &[String],
) -> std::io::Result<()> {
    write_comments(out, comments)?;
    writeln!(out, "omega1,omega2,re,im")?;
    let n = grid.len();
    for i in 0..n {
        let w1 = fmt_real(grid.point(i));
        for j in 0..n {
            let a = table[i * n + j];
            writeln!(
                out,
                "{},{},{},{}",
                w1,
                fmt_real(grid.point(j)),
                fmt_real(a.re),
                fmt_real(a.im)
            )?;
        }
    }
    Ok(())
}

/// Writes `omega1,omega2,re,im` rows in row-major order.
pub fn write_amplitude_csv<W: Write>(
    out: &mut W,
    amplitude: &TwoPhotonAmplitude,
    comments: &[String],
) -> std::io::Result<()> {
    write_table(out, amplitude.grid(), amplitude.amplitude(), comments)
}

pub fn write_pair_csv<W: Write>(
    out: &mut W,
    amplitude: &PairAmplitude,
    comments: &[String],
) -> std::io::Result<()> {
    write_table(out, amplitude.grid(), amplitude.amplitude(), comments)
}

fn data_rows<R: BufRead>(input: R, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                continue;
            }
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        if fields.len() != columns {
            return Err(Error::Format(format!(
                "line {}: expected {columns} columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        rows.push(fields);
    }
    Ok(rows)
}

fn grid_from_axis(axis: &[f64]) -> Result<FrequencyGrid> {
    if axis.len() < 2 {
        return Err(Error::Format("need at least two frequency samples".into()));
    }
    let grid = FrequencyGrid::from_range(axis[0], axis[axis.len() - 1], axis.len())?;
    for (n, &w) in axis.iter().enumerate() {
        if (w - grid.point(n)).abs() > 1e-9 * grid.step() {
            return Err(Error::Format(format!("frequency axis is not uniform at sample {n}")));
        }
    }
    Ok(grid)
}

pub fn read_packet_csv<R: BufRead>(input: R) -> Result<OnePhotonWavepacket> {
    let rows = data_rows(input, 3)?;
    let axis: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = grid_from_axis(&axis)?;
    OnePhotonWavepacket::new(grid, rows.iter().map(|r| C64::new(r[1], r[2])).collect())
}

pub fn read_amplitude_csv<R: BufRead>(input: R) -> Result<TwoPhotonAmplitude> {
    let rows = data_rows(input, 4)?;
    let n = (rows.len() as f64).sqrt().round() as usize;
    if n * n != rows.len() {
        return Err(Error::Format(format!("{} rows is not a square table", rows.len())));
    }
    let axis: Vec<f64> = rows.iter().take(n).map(|r| r[1]).collect();
    let grid = grid_from_axis(&axis)?;
    TwoPhotonAmplitude::new(grid, rows.iter().map(|r| C64::new(r[2], r[3])).collect())
}
