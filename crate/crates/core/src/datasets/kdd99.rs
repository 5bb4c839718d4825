//! The 41-feature KDD Cup 1999 connection-record layout.

use super::{Column, ColumnKind, Dataset, DatasetError};

/// Feature names and whether each is continuous, in file order.
pub const KDD99_COLUMNS: [(&str, bool); 41] = [
    ("duration", true),
    ("protocol_type", false),
    ("service", false),
    ("flag", false),
    ("src_bytes", true),
    ("dst_bytes", true),
    ("land", false),
    ("wrong_fragment", true),
    ("urgent", true),
    ("hot", true),
    ("num_failed_logins", true),
    ("logged_in", false),
    ("num_compromised", true),
    ("root_shell", true),
    ("su_attempted", true),
    ("num_root", true),
    ("num_file_creations", true),
    ("num_shells", true),
    ("num_access_files", true),
    ("num_outbound_cmds", true),
    ("is_host_login", false),
    ("is_guest_login", false),
    ("count", true),
    ("srv_count", true),
    ("serror_rate", true),
    ("srv_serror_rate", true),
    ("rerror_rate", true),
    ("srv_rerror_rate", true),
    ("same_srv_rate", true),
    ("diff_srv_rate", true),
    ("srv_diff_host_rate", true),
    ("dst_host_count", true),
    ("dst_host_srv_count", true),
    ("dst_host_same_srv_rate", true),
    ("dst_host_diff_srv_rate", true),
    ("dst_host_same_src_port_rate", true),
    ("dst_host_srv_diff_host_rate", true),
    ("dst_host_serror_rate", true),
    ("dst_host_srv_serror_rate", true),
    ("dst_host_rerror_rate", true),
    ("dst_host_srv_rerror_rate", true),
];

/// Number of continuous features kept by [`preprocess_kdd99`].
pub const KDD99_KEEP: usize = 18;

/// Column schema for raw KDD99 files; `with_label` appends the trailing
/// attack-type column as discrete `label`.
pub fn kdd99_schema(with_label: bool) -> Vec<Column> {
    let mut cols: Vec<Column> = KDD99_COLUMNS
        .iter()
        .map(|&(n, cont)| if cont { Column::continuous(n) } else { Column::discrete(n) })
        .collect();
    if with_label {
        cols.push(Column::discrete("label"));
    }
    cols
}

/// Keeps the continuous columns that are not identically zero, in schema
/// order, and takes the first 18. The chosen names become the schema.
pub fn preprocess_kdd99(raw: &Dataset) -> Result<Dataset, DatasetError> {
    let names: Vec<&str> = raw.schema.iter().map(|c| c.name.as_str()).collect();
    let expected: Vec<&str> = KDD99_COLUMNS.iter().map(|c| c.0).collect();
    if names != expected {
        return Err(DatasetError::Schema(format!(
            "expected the 41 KDD99 feature columns, found {} columns",
            names.len()
        )));
    }
    let candidates: Vec<usize> = (0..raw.cols())
        .filter(|&j| raw.schema[j].kind == ColumnKind::Continuous)
        .filter(|&j| (0..raw.rows()).any(|i| raw.data.row(i)[j] != 0.0))
        .collect();
    if candidates.len() < KDD99_KEEP {
        return Err(DatasetError::TooFewColumns {
            found: candidates.len(),
            needed: KDD99_KEEP,
            candidates: candidates.iter().map(|&j| raw.schema[j].name.clone()).collect(),
        });
    }
    let mut out = raw.select_columns(&candidates[..KDD99_KEEP])?;
    out.notes.push(format!("kdd99 columns: {}", out.column_names().join(" ")));
    Ok(out)
}
