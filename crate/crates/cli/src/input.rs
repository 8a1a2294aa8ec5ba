use std::path::Path;

use depshap::DataMatrix;

use crate::CliError;

/// A parsed numeric CSV: every column, by header name.
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let names: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::Data(format!("bad header: {e}")))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if names.is_empty() || names.iter().any(String::is_empty) {
            return Err(CliError::Data(
                "header row is missing or has an empty column name".into(),
            ));
        }
        let mut columns = vec![Vec::new(); names.len()];
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Data(format!("row {}: {e}", row + 1)))?;
            for (j, cell) in record.iter().enumerate() {
                let value: f64 = cell.trim().parse().map_err(|_| {
                    CliError::Data(format!(
                        "row {}, column `{}`: `{cell}` is not a number",
                        row + 1,
                        names[j]
                    ))
                })?;
                if !value.is_finite() {
                    return Err(CliError::Data(format!(
                        "row {}, column `{}`: non-finite value",
                        row + 1,
                        names[j]
                    )));
                }
                columns[j].push(value);
            }
        }
        Ok(Self { names, columns })
    }

    pub fn column(&self, name: &str) -> Result<&[f64], CliError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| CliError::Data(format!("column `{name}` not found")))
    }

    /// Every column except `exclude`, as a feature matrix.
    pub fn features(&self, exclude: &[&str]) -> Result<DataMatrix, CliError> {
        let (names, columns): (Vec<String>, Vec<Vec<f64>>) = self
            .names
            .iter()
            .zip(&self.columns)
            .filter(|(n, _)| !exclude.contains(&n.as_str()))
            .map(|(n, c)| (n.clone(), c.clone()))
            .unzip();
        if names.is_empty() {
            return Err(CliError::Data("no feature columns left".into()));
        }
        Ok(DataMatrix::from_columns(&columns, names)?)
    }
}
