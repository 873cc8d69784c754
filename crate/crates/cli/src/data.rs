//! Experiment CSV files: a header of stimulus names followed by `y`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use dfx_core::format::number;
use dfx_core::loss::LossSpec;
use dfx_core::models::Experiment;

use crate::CliError;

fn bad(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(vec![format!("{}: {msg}", path.display())])
}

pub fn read_experiment_csv(
    path: &Path,
    name: &str,
    loss: LossSpec,
) -> Result<Experiment, CliError> {
    let file = File::open(path).map_err(|e| {
        bad(
            path,
            format!("data file for experiment `{name}` not readable: {e}"),
        )
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| bad(path, e))?.clone();
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    if columns.len() < 2 || !columns.last().is_some_and(|c| c.eq_ignore_ascii_case("y")) {
        return Err(bad(
            path,
            "header must list the stimulus columns followed by `y`",
        ));
    }
    let n_stim = columns.len() - 1;
    let mut stimulus = Vec::new();
    let mut response = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(path, e))?;
        let line = record.position().map_or(row + 2, |p| p.line() as usize);
        let values = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        bad(
                            path,
                            format!("line {line}: `{field}` is not a finite number"),
                        )
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        response.push(values[n_stim]);
        stimulus.push(values[..n_stim].to_vec());
    }
    if response.is_empty() {
        return Err(bad(path, "no data rows"));
    }
    Experiment::new(name, columns[..n_stim].to_vec(), stimulus, response, loss)
        .map_err(|e| bad(path, e))
}

pub fn write_experiment_csv<W: Write>(
    exp: &Experiment,
    response: &[f64],
    out: W,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CliError::Runtime(format!("writing experiment `{}`: {e}", exp.name));
    let mut header = exp.columns.clone();
    header.push("y".into());
    w.write_record(&header).map_err(err)?;
    for (row, y) in exp.stimulus.iter().zip(response) {
        let mut fields: Vec<String> = row.iter().map(|&v| number(v)).collect();
        fields.push(number(*y));
        w.write_record(&fields).map_err(err)?;
    }
    w.flush()
        .map_err(|e| CliError::Runtime(format!("writing experiment `{}`: {e}", exp.name)))
}

/// Parses a `name,value` file with no header.
pub fn read_params_file(path: &Path) -> Result<Vec<(String, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(path, format!("cannot read parameters: {e}")))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once(',')
            .ok_or_else(|| bad(path, format!("line {}: expected `name,value`", i + 1)))?;
        let value: f64 = value.trim().parse().map_err(|_| {
            bad(
                path,
                format!("line {}: `{}` is not a number", i + 1, value.trim()),
            )
        })?;
        out.push((name.trim().to_string(), value));
    }
    Ok(out)
}

/// Orders the file's values by `names`; every name must appear exactly once.
pub fn params_in_order(
    path: &Path,
    pairs: &[(String, f64)],
    names: &[String],
) -> Result<Vec<f64>, CliError> {
    let mut problems = Vec::new();
    for (name, _) in pairs {
        if !names.iter().any(|n| n == name) {
            problems.push(format!("{}: unknown parameter `{name}`", path.display()));
        }
    }
    let mut values = Vec::with_capacity(names.len());
    for name in names {
        let hits: Vec<f64> = pairs
            .iter()
            .filter(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .collect();
        match hits.as_slice() {
            [v] => values.push(*v),
            [] => problems.push(format!("{}: missing parameter `{name}`", path.display())),
            _ => problems.push(format!(
                "{}: parameter `{name}` given more than once",
                path.display()
            )),
        }
    }
    if problems.is_empty() {
        Ok(values)
    } else {
        Err(CliError::Validation(problems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(
            &path,
            "V,y\n0.1,1e-12\n0.30000000000000004,3.0000000000000001e-23\n",
        )
        .unwrap();
        let exp = read_experiment_csv(&path, "d", LossSpec::abs()).unwrap();
        let mut buf = Vec::new();
        write_experiment_csv(&exp, &exp.response, &mut buf).unwrap();
        let again = dir.path().join("e.csv");
        std::fs::write(&again, &buf).unwrap();
        let back = read_experiment_csv(&again, "d", LossSpec::abs()).unwrap();
        assert_eq!(back, exp);
    }

    #[test]
    fn rejects_bad_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "V,y\n0.1,abc\n").unwrap();
        let err = read_experiment_csv(&path, "d", LossSpec::abs())
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2") && err.contains("abc"), "{err}");

        std::fs::write(&path, "V,I\n0.1,1\n").unwrap();
        assert!(read_experiment_csv(&path, "d", LossSpec::abs()).is_err());
    }

    #[test]
    fn params_must_match_names() {
        let p = Path::new("p.csv");
        let names = vec!["A".to_string(), "B".to_string()];
        let ok = [("B".to_string(), 2.0), ("A".to_string(), 1.0)];
        assert_eq!(params_in_order(p, &ok, &names).unwrap(), vec![1.0, 2.0]);
        let bad = [("A".to_string(), 1.0), ("C".to_string(), 1.0)];
        let err = params_in_order(p, &bad, &names).unwrap_err().to_string();
        assert!(err.contains("`C`") && err.contains("`B`"), "{err}");
    }
}
