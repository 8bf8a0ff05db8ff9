//! Text formats.
//!
//! Dataset CSV: a header row, feature columns (written as `f0..f{p−1}`),
//! a required `label` column and an optional `subject_id` column. Reals
//! are written with 17 significant digits so every value reads back to
//! the same bits.

use std::fs;
use std::path::Path;

use kdr_core::classify::EvalReport;
use kdr_core::pipeline::{Dataset, ParamGrid, TuningRow};
use kdr_core::Matrix;

use crate::Error;

pub const LABEL: &str = "label";
pub const SUBJECT: &str = "subject_id";

/// Shortest scientific form with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    }
    fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>, path: &Path) -> Result<String, Error> {
    let bytes = w.into_inner().map_err(|e| Error::schema(path, e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::schema(path, e.to_string()))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.into(), source }
}

pub fn dataset_to_csv(data: &Dataset, origin: &Path) -> Result<String, Error> {
    let names: Vec<String> = match data.feature_names() {
        Some(n) => n.to_vec(),
        None => (0..data.p()).map(|j| format!("f{j}")).collect(),
    };
    let mut w = csv_writer();
    let mut header = names;
    header.push(LABEL.into());
    if data.subject_id().is_some() {
        header.push(SUBJECT.into());
    }
    w.write_record(&header).map_err(csv_err(origin))?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = (0..data.p()).map(|j| fmt_f64(data.x()[(i, j)])).collect();
        rec.push(data.y()[i].to_string());
        if let Some(s) = data.subject_id() {
            rec.push(s[i].clone());
        }
        w.write_record(&rec).map_err(csv_err(origin))?;
    }
    finish(w, origin)
}

/// Parses a dataset; every column other than `label` and `subject_id` is
/// a feature, in file order.
pub fn dataset_from_csv(text: &str, origin: &Path) -> Result<Dataset, Error> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err(origin))?.clone();
    let label_col =
        header.iter().position(|h| h == LABEL).ok_or_else(|| Error::schema(origin, "missing `label` column"))?;
    let subject_col = header.iter().position(|h| h == SUBJECT);
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_col && Some(c) != subject_col).collect();
    let names: Vec<String> = feature_cols.iter().map(|&c| header[c].to_string()).collect();

    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut subjects = subject_col.map(|_| Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(origin))?;
        for &c in &feature_cols {
            let v: f64 = rec[c]
                .trim()
                .parse()
                .map_err(|_| Error::schema(origin, format!("row {row}, column `{}`: not a number", &header[c])))?;
            values.push(v);
        }
        let label = rec[label_col]
            .trim()
            .parse()
            .map_err(|_| Error::schema(origin, format!("row {row}: label `{}` is not an integer", &rec[label_col])))?;
        y.push(label);
        if let (Some(s), Some(c)) = (subjects.as_mut(), subject_col) {
            s.push(rec[c].to_string());
        }
    }
    let x = Matrix::from_row_slice(y.len(), feature_cols.len(), &values);
    Ok(Dataset::with_metadata(x, y, subjects, Some(names))?)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, Error> {
    dataset_from_csv(&read_text(path)?, path)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<(), Error> {
    write_text(path, &dataset_to_csv(data, path)?)
}

/// Projection columns `p0..p{d−1}` followed by the source labels (and
/// subject ids), readable back as a dataset.
pub fn projection_dataset(projection: &Matrix, source: &Dataset) -> Result<Dataset, Error> {
    let names = (0..projection.ncols()).map(|j| format!("p{j}")).collect();
    Ok(Dataset::with_metadata(
        projection.clone(),
        source.y().to_vec(),
        source.subject_id().map(<[String]>::to_vec),
        Some(names),
    )?)
}

/// Columns `label,predicted,score`; `score` is empty without calibration.
pub fn predictions_to_csv(
    y_true: &[i64],
    y_pred: &[i64],
    scores: Option<&[f64]>,
    origin: &Path,
) -> Result<String, Error> {
    let mut w = csv_writer();
    w.write_record(["label", "predicted", "score"]).map_err(csv_err(origin))?;
    for i in 0..y_true.len() {
        let score = scores.map(|s| fmt_f64(s[i])).unwrap_or_default();
        w.write_record([y_true[i].to_string(), y_pred[i].to_string(), score]).map_err(csv_err(origin))?;
    }
    finish(w, origin)
}

/// Reads `label` and `score` columns of a predictions file.
pub fn read_scores(path: &Path) -> Result<(Vec<i64>, Vec<f64>), Error> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err(path))?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::schema(path, format!("missing `{name}` column")))
    };
    let (lc, sc) = (col(LABEL)?, col("score")?);
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        labels.push(rec[lc].trim().parse().map_err(|_| Error::schema(path, format!("row {row}: bad label")))?);
        let score = rec[sc].trim();
        if score.is_empty() {
            return Err(Error::schema(path, format!("row {row}: no score (ROC needs binary predictions)")));
        }
        scores.push(score.parse().map_err(|_| Error::schema(path, format!("row {row}: bad score")))?);
    }
    Ok((labels, scores))
}

/// `# auc=<value>` then `fpr,tpr` rows.
pub fn roc_to_csv(points: &[(f64, f64)], auc: f64) -> String {
    let mut out = format!("# auc={}\nfpr,tpr\n", fmt_f64(auc));
    for (f, t) in points {
        out.push_str(&format!("{},{}\n", fmt_f64(*f), fmt_f64(*t)));
    }
    out
}

pub fn roc_from_csv(text: &str, origin: &Path) -> Result<(Vec<(f64, f64)>, f64), Error> {
    let mut lines = text.lines();
    let auc = lines
        .next()
        .and_then(|l| l.strip_prefix("# auc="))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::schema(origin, "missing `# auc=` header"))?;
    if lines.next() != Some("fpr,tpr") {
        return Err(Error::schema(origin, "expected `fpr,tpr` header"));
    }
    let mut points = Vec::new();
    for l in lines {
        let (f, t) = l.split_once(',').ok_or_else(|| Error::schema(origin, "bad ROC row"))?;
        let parse = |v: &str| v.parse::<f64>().map_err(|_| Error::schema(origin, "bad ROC value"));
        points.push((parse(f)?, parse(t)?));
    }
    Ok((points, auc))
}

/// The ranked tuning table, best row first.
pub fn tuning_to_csv(rows: &[TuningRow], origin: &Path) -> Result<String, Error> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut w = csv_writer();
    w.write_record(["rank", "delta", "eta", "cost", "d", "accuracy", "auc", "retained_d", "error"])
        .map_err(csv_err(origin))?;
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            opt(r.point.delta),
            opt(r.point.eta),
            fmt_f64(r.point.cost),
            r.point.d.to_string(),
            opt(r.accuracy),
            opt(r.auc),
            r.retained_d.map(|d| d.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err(origin))?;
    }
    finish(w, origin)
}

/// Grid file: a JSON object mapping `delta`, `eta`, `cost` and `d` to
/// arrays of candidates. With `paper_sign`, `delta` values are in the
/// positive-exponent convention and are negated.
pub fn read_grid(path: &Path, paper_sign: bool) -> Result<ParamGrid, Error> {
    let text = read_text(path)?;
    let mut grid: ParamGrid =
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })?;
    if paper_sign {
        if let Some(d) = grid.delta.as_mut() {
            d.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(grid)
}

/// One-line human summary of a report.
pub fn summary(report: &EvalReport) -> String {
    let mut s = format!("n={} accuracy={:.4}", report.n, report.accuracy);
    for (name, v) in [("tpr", report.tpr), ("tnr", report.tnr), ("auc", report.auc)] {
        if let Some(v) = v {
            s.push_str(&format!(" {name}={v:.4}"));
        }
    }
    s
}
