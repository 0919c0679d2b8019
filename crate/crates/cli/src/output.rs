//! Report emission. Every file is written to a temporary sibling and renamed
//! into place, so readers never observe a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use quick_junit::{NonSuccessKind, Report, TestCase, TestCaseStatus, TestSuite};
use serde::Serialize;
use tempfile::NamedTempFile;

use disparity_core::monte_carlo::SuiteReport;

use crate::config::Format;
use crate::error::{CliError, CliResult};

fn output_error(path: &Path, reason: impl ToString) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| output_error(dir, e))?;
    tmp.write_all(bytes).map_err(|e| output_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| output_error(path, e))?;
    tmp.persist(path).map_err(|e| output_error(path, e.error))?;
    Ok(())
}

pub fn to_csv<T: Serialize>(rows: &[T], path: &Path) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| output_error(path, e))?;
    }
    w.into_inner().map_err(|e| output_error(path, e))
}

/// Writes `rows` as `<dir>/<stem>.csv` or `<dir>/<stem>.json`.
pub fn write_table<T: Serialize>(dir: &Path, stem: &str, rows: &[T], format: Format) -> CliResult<PathBuf> {
    let (path, bytes) = match format {
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let bytes = to_csv(rows, &path)?;
            (path, bytes)
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            let mut bytes = serde_json::to_vec_pretty(rows).map_err(|e| output_error(&path, e))?;
            bytes.push(b'\n');
            (path, bytes)
        }
    };
    write_atomic(&path, &bytes)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| output_error(path, e))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// One test suite per scenario, one test case per check.
pub fn junit_xml(report: &SuiteReport) -> CliResult<String> {
    let mut junit = Report::new("disparity-verify");
    for sc in &report.scenarios {
        let mut suite = TestSuite::new(sc.id.as_str());
        for check in &sc.checks {
            let status = if check.pass {
                TestCaseStatus::success()
            } else {
                let mut s = TestCaseStatus::non_success(NonSuccessKind::Failure);
                s.set_message(format!(
                    "closed form {:e}, empirical {:e}, n = {}, z = {:.2}",
                    check.closed_form, check.empirical, check.n, check.z
                ));
                s
            };
            suite.add_test_case(TestCase::new(check.name.as_str(), status));
        }
        junit.add_test_suite(suite);
    }
    junit
        .to_string()
        .map_err(|e| output_error(Path::new("junit"), e))
}
