//! Artifact writers. Every output embeds the fully resolved run
//! configuration (`# config:` comment lines in CSV/angle files, a `config`
//! object in JSON) plus a timestamp; identical configurations therefore
//! produce byte-identical files apart from the timestamp line.

use std::path::Path;

use crate::config::RunConfig;
use crate::CliError;

pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// CSV artifact: comment banner, embedded config, extra comment lines,
/// fixed header, then the rows.
pub fn render_csv(
    config: &RunConfig,
    extra_comments: &[String],
    header: &str,
    rows: &[Vec<f64>],
) -> String {
    let mut s = String::new();
    s.push_str(&format!("# gqspi {} output\n", config.command));
    s.push_str(&format!("# timestamp = {}\n", unix_timestamp()));
    s.push_str(&config.echo_comment_block());
    for line in extra_comments {
        s.push_str(&format!("# {line}\n"));
    }
    s.push_str(header);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// JSON artifact mirroring the CSV numerically, with an explicit schema
/// version field.
pub fn render_json(config: &RunConfig, payload: serde_json::Value) -> String {
    let doc = serde_json::json!({
        "schema_version": 1,
        "timestamp": unix_timestamp(),
        "config": config.echo_json(),
        "data": payload,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}
