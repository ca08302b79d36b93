mod args;
mod run;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Format};
use run::{Outcome, Report};

const OUT_DIR_VAR: &str = "DIGNET_OUT_DIR";

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
        other => rows.push(vec![prefix.to_string(), other.to_string()]),
    }
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, dignet::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| dignet::Error::InvalidParameter(format!("csv output: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| io(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 input"))
}

fn render(report: &Report, format: Format) -> Result<String, dignet::Error> {
    let json_line = |v: &Value| format!("{}\n", serde_json::to_string(v).expect("json values serialize"));
    match (report, format) {
        (Report::Text(text), _) => Ok(text.clone()),
        (Report::Json(v), Format::Json) | (Report::Table { json: v, .. }, Format::Json) => Ok(json_line(v)),
        (Report::Table { header, rows, .. }, Format::Csv) => csv_text(header, rows),
        (Report::Json(v), Format::Csv) => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            csv_text(&["key".into(), "value".into()], &rows)
        }
    }
}

fn output_path(out: &PathBuf) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if out.is_relative() => PathBuf::from(dir).join(out),
        _ => out.clone(),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), dignet::Error> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| dignet::Error::Io { path: "<stdout>".into(), source })
        }
        Some(out) => {
            let path = output_path(out);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|source| dignet::Error::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            fs::write(&path, text).map_err(|source| dignet::Error::Io { path, source })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let format = cli.format.unwrap_or(match cli.command {
        Command::Points(_) => Format::Csv,
        _ => Format::Json,
    });
    let result = run::run(&cli.command).and_then(|Outcome { report, failed }| {
        emit(&render(&report, format)?, cli.out.as_ref())?;
        Ok(failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattening_uses_dotted_keys() {
        let mut rows = Vec::new();
        flatten("", &json!({"a": {"b": 1, "c": [true, "x"]}}), &mut rows);
        assert_eq!(
            rows,
            vec![
                vec!["a.b".to_string(), "1".to_string()],
                vec!["a.c.0".to_string(), "true".to_string()],
                vec!["a.c.1".to_string(), "x".to_string()],
            ]
        );
    }
}
