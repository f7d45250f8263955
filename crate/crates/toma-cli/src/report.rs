//! CSV and metadata emission. Fields are quoted only when they contain a
//! delimiter, quote, or newline, and all numeric formats are fixed so a
//! seeded single-threaded run reproduces files byte for byte.

use std::borrow::Cow;
use std::fs;
use std::io;
use std::path::Path;

use crate::config::{serialize_config, ExperimentSpec};
use crate::experiment::{ResultRow, TheoremRow};

fn escape(field: &str) -> Cow<'_, str> {
    if field.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", field.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(field)
    }
}

fn fmt_rate(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{r:.6}"),
        None => String::new(),
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(
        "experiment,scheme,sweep_param,sweep_value,rate_bps_hz,seed,runtime_s,error\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.3},{}\n",
            row.experiment,
            row.scheme,
            row.sweep_param,
            row.sweep_value,
            fmt_rate(row.rate_bps_hz),
            row.seed,
            row.runtime_s,
            escape(&row.error)
        ));
    }
    out
}

pub fn theorems_csv(rows: &[TheoremRow]) -> String {
    let mut out = String::from(
        "law,n_per_cable,cable_len,delta,wavelength,closed_form,search,regime\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.6},{},{},{:.9},{:.9},{}\n",
            row.law,
            row.n_per_cable,
            row.cable_len,
            row.delta,
            row.wavelength,
            row.closed_form,
            row.search,
            row.regime
        ));
    }
    out
}

/// Run provenance: tool version, effective seed, and the fully resolved
/// configuration (re-parseable as a config file on its own).
pub fn metadata_toml(spec: &ExperimentSpec, seed: u64, deterministic: bool) -> String {
    format!(
        "# generated by toma {}\n# seed = {}\n# deterministic = {}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        seed,
        deterministic,
        serialize_config(spec)
    )
}

pub fn write_outputs(dir: &Path, files: &[(&str, &str)]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, content) in files {
        fs::write(dir.join(name), content)?;
    }
    Ok(())
}
