use std::io::{self, Write};

use serde_json::{json, Map, Value};
use wqed::io::fmt_real;

use crate::config::{Command, Format, Settings, SuiteArg};
use crate::run::Dataset;

fn uses_tau_prime(s: &Settings) -> bool {
    s.command == Command::TwoMode || s.suite == Some(SuiteArg::TwoMode)
}

fn units(s: &Settings) -> String {
    if s.tau_given {
        format!("frequencies in the units of omega, times in their inverse; tau = {}", s.tau)
    } else {
        "frequencies in units of 1/tau, times in units of tau (tau = 1)".to_string()
    }
}

fn provenance(s: &Settings) -> Value {
    let mut p = Map::new();
    p.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    p.insert("config_sha256".into(), json!(s.hash()));
    p.insert("command".into(), serde_json::to_value(s.command).expect("command serializes"));
    p.insert("tau".into(), json!(s.tau));
    p.insert("omega".into(), json!(s.omega));
    if uses_tau_prime(s) {
        p.insert("tau_prime".into(), json!(s.tau / 2.0));
    }
    p.insert("units".into(), json!(units(s)));
    p.insert("settings".into(), serde_json::to_value(s).expect("settings serialize"));
    Value::Object(p)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => fmt_real(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

pub fn write_csv<W: Write>(out: &mut W, s: &Settings, d: &Dataset) -> io::Result<()> {
    writeln!(out, "# wqed {} {}", env!("CARGO_PKG_VERSION"), command_name(s))?;
    writeln!(out, "# config_sha256 = {}", s.hash())?;
    writeln!(out, "# units: {}", units(s))?;
    writeln!(out, "# omega = {}", fmt_real(s.omega))?;
    writeln!(out, "# tau = {}", fmt_real(s.tau))?;
    if uses_tau_prime(s) {
        writeln!(out, "# tau_prime = {}", fmt_real(s.tau / 2.0))?;
    }
    for (k, v) in &d.summary {
        if k == "tau_prime" {
            continue;
        }
        match v {
            Value::Object(m) => {
                for (kk, vv) in m {
                    writeln!(out, "# {k}.{kk} = {}", scalar(vv))?;
                }
            }
            _ => writeln!(out, "# {k} = {}", scalar(v))?,
        }
    }
    writeln!(out, "{}", d.columns.join(","))?;
    let mut line = String::new();
    for row in &d.rows {
        line.clear();
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt_real(*x));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_json<W: Write>(out: &mut W, s: &Settings, d: &Dataset) -> io::Result<()> {
    let mut doc = Map::new();
    doc.insert("provenance".into(), provenance(s));
    for (k, v) in &d.summary {
        doc.insert(k.clone(), v.clone());
    }
    if s.command != Command::OracleCompare {
        doc.insert("columns".into(), json!(d.columns));
        doc.insert("rows".into(), json!(d.rows));
    }
    serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
    writeln!(out)
}

pub fn write<W: Write>(out: &mut W, s: &Settings, d: &Dataset) -> io::Result<()> {
    match s.format {
        Format::Csv => write_csv(out, s, d),
        Format::Json => write_json(out, s, d),
    }
}

fn command_name(s: &Settings) -> String {
    let c = serde_json::to_value(s.command).expect("command serializes");
    let c = c.as_str().unwrap_or_default().to_string();
    match s.suite {
        Some(suite) => format!("{c} {}", suite.suite().name()),
        None => c,
    }
}
