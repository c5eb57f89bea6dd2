//! File formats.
//!
//! * Ratings: delimited text, `voter_id, item_id, rating` per line, optional
//!   header, configurable delimiter. IDs are arbitrary strings.
//! * Item map (`items.csv`): `index,item_id`.
//! * Pairwise coordinate files: `# key=value` comment lines (at least
//!   `num_items`), a `row,col,value` header, then one line per unordered pair
//!   with `row < col` (0-based). The `(col, row)` entry is implied as the
//!   negated value. A parallel support file has the same rows with
//!   `row,col,support`.
//! * Ranked list (`ranking.csv`): `rank,item_id,score`.
//! * Factors: `factors_u.csv` and `factors_v.csv` (`n` rows of `k` values),
//!   `factors_s.csv` (`k` rows of one value), no header.
//! * Run metadata (`meta.txt`): `key=value` lines.
//!
//! Floating-point values are written in shortest round-trip form, so reading
//! a file back reproduces the exact values.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::aggregation::{PairwiseEntry, PairwiseMatrix};
use crate::error::{Error, Result};
use crate::ratings::{Labels, Rating, RatingsMatrix};
use crate::sample::SampleSet;
use crate::scoring::RankedList;
use crate::svd::LowRankFactors;

pub const COORDINATE_MAGIC: &str = "# skewrank coordinate v1";

/// Parsed ratings with the identifier maps and the source line of every rating.
#[derive(Debug, Clone)]
pub struct RatingsTable {
    pub ratings: RatingsMatrix,
    pub voters: Labels,
    pub items: Labels,
    pub lines: Vec<u64>,
}

impl RatingsTable {
    /// Source line of the rating at `entries()[index]`.
    pub fn line_of(&self, index: usize) -> u64 {
        self.lines[index]
    }
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

pub fn read_ratings(path: &Path, delimiter: u8) -> Result<RatingsTable> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ratings(file, path, delimiter)
}

/// Parses ratings from any reader; `source` only labels error messages.
/// A first line whose rating field is not a number is taken as a header.
pub fn parse_ratings(reader: impl Read, source: &Path, delimiter: u8) -> Result<RatingsTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut voters = Labels::new();
    let mut items = Labels::new();
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(parse_error(
                source,
                line,
                format!("expected 3 fields (voter, item, rating), found {}", record.len()),
            ));
        }
        let value = match record[2].parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            Ok(_) => return Err(parse_error(source, line, "rating is not finite")),
            Err(_) if k == 0 => continue,
            Err(_) => {
                return Err(parse_error(
                    source,
                    line,
                    format!("rating {:?} is not a number", &record[2]),
                ))
            }
        };
        let voter = voters.intern(&record[0]);
        let item = items.intern(&record[1]);
        if let Some(first) = seen.insert((voter, item), line) {
            return Err(parse_error(
                source,
                line,
                format!(
                    "voter {:?} already rated item {:?} on line {first}",
                    &record[0], &record[1]
                ),
            ));
        }
        entries.push(Rating { voter, item, value });
        lines.push(line);
    }
    let ratings = RatingsMatrix::new(voters.len(), items.len(), entries)?;
    Ok(RatingsTable {
        ratings,
        voters,
        items,
        lines,
    })
}

pub fn write_items(path: &Path, items: &Labels) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["index", "item_id"])?;
    for (i, id) in items.ids().iter().enumerate() {
        w.write_record([i.to_string().as_str(), id])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_items(path: &Path) -> Result<Labels> {
    let text = read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut ids = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let index: usize = record
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_error(path, line, "bad item index"))?;
        if index != ids.len() {
            return Err(parse_error(path, line, format!("expected index {}, found {index}", ids.len())));
        }
        let id = record.get(1).ok_or_else(|| parse_error(path, line, "missing item id"))?;
        ids.push(id.to_owned());
    }
    Labels::from_ids(ids)
}

fn coordinate_header(num_items: usize, extra: &[(&str, String)]) -> String {
    let mut s = format!("{COORDINATE_MAGIC}\n# num_items={num_items}\n");
    for (k, v) in extra {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s
}

fn comment_value(text: &str, key: &str) -> Option<String> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.trim_start_matches('#').trim().split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim().to_owned())
}

/// Writes `<stem>.coo` and `<stem>.support` for `y`.
pub fn write_pairwise(stem: &Path, y: &PairwiseMatrix, extra: &[(&str, String)]) -> Result<()> {
    let coo = stem.with_extension("coo");
    let sup = stem.with_extension("support");
    let mut a = create(&coo)?;
    let mut b = create(&sup)?;
    let header = coordinate_header(y.num_items(), extra);
    let mut va = format!("{header}row,col,value\n");
    let mut vb = format!("{header}row,col,support\n");
    for e in y.upper() {
        va.push_str(&format!("{},{},{}\n", e.i, e.j, e.value));
        vb.push_str(&format!("{},{},{}\n", e.i, e.j, e.support));
    }
    a.write_all(va.as_bytes()).map_err(|e| Error::io(&coo, e))?;
    b.write_all(vb.as_bytes()).map_err(|e| Error::io(&sup, e))?;
    Ok(())
}

struct CoordinateFile {
    num_items: usize,
    rows: Vec<(usize, usize, String, u64)>,
}

fn read_coordinate(path: &Path) -> Result<CoordinateFile> {
    let text = read_to_string(path)?;
    let num_items = comment_value(&text, "num_items")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_error(path, 1, "missing '# num_items=<n>' header"))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let idx = |k: usize| -> Result<usize> {
            record
                .get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_error(path, line, "bad index"))
        };
        let (i, j) = (idx(0)?, idx(1)?);
        if i >= j || j >= num_items {
            return Err(parse_error(
                path,
                line,
                format!("entry ({i}, {j}) must satisfy row < col < {num_items}"),
            ));
        }
        let v = record
            .get(2)
            .ok_or_else(|| parse_error(path, line, "missing value"))?;
        rows.push((i, j, v.to_owned(), line));
    }
    Ok(CoordinateFile { num_items, rows })
}

/// Reads `<stem>.coo` and `<stem>.support` back into a skew-symmetric matrix.
pub fn read_pairwise(stem: &Path) -> Result<PairwiseMatrix> {
    let coo_path = stem.with_extension("coo");
    let sup_path = stem.with_extension("support");
    let coo = read_coordinate(&coo_path)?;
    let sup = read_coordinate(&sup_path)?;
    if coo.num_items != sup.num_items || coo.rows.len() != sup.rows.len() {
        return Err(parse_error(&sup_path, 1, "support file does not match the value file"));
    }
    let mut entries = Vec::with_capacity(coo.rows.len());
    for ((i, j, v, line), (si, sj, s, sline)) in coo.rows.into_iter().zip(sup.rows) {
        if (i, j) != (si, sj) {
            return Err(parse_error(&sup_path, sline, format!("expected entry ({i}, {j})")));
        }
        let value: f64 = v
            .parse()
            .map_err(|_| parse_error(&coo_path, line, format!("value {v:?} is not a number")))?;
        let support: usize = s
            .parse()
            .map_err(|_| parse_error(&sup_path, sline, format!("support {s:?} is not a count")))?;
        entries.push(PairwiseEntry { i, j, value, support });
    }
    PairwiseMatrix::new(coo.num_items, entries)
}

/// Writes the `r < c` half of a sample set in coordinate format.
pub fn write_samples(path: &Path, samples: &SampleSet) -> Result<()> {
    let mut text = coordinate_header(samples.num_items(), &[]);
    text.push_str("row,col,value\n");
    for (r, c, v) in samples.upper() {
        text.push_str(&format!("{r},{c},{v}\n"));
    }
    create(path)?
        .write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    let coo = read_coordinate(path)?;
    let mut entries = Vec::with_capacity(coo.rows.len());
    for (i, j, v, line) in coo.rows {
        let value: f64 = v
            .parse()
            .map_err(|_| parse_error(path, line, format!("value {v:?} is not a number")))?;
        entries.push((i, j, value));
    }
    SampleSet::from_upper(coo.num_items, entries)
}

pub fn write_ranking(path: &Path, ranking: &RankedList) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["rank", "item_id", "score"])?;
    for r in &ranking.items {
        w.write_record([r.rank.to_string().as_str(), &r.id, &r.score.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `(rank, item_id, score)` rows of a ranking file.
pub fn read_ranking(path: &Path) -> Result<Vec<(usize, String, f64)>> {
    let text = read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = || parse_error(path, line, "expected rank,item_id,score");
        let rank = record.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let id = record.get(1).ok_or_else(bad)?.to_owned();
        let score = record.get(2).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        rows.push((rank, id, score));
    }
    Ok(rows)
}

fn write_dense(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut text = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    create(path)?
        .write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn read_dense(path: &Path, cols: Option<usize>) -> Result<DMatrix<f64>> {
    let text = read_to_string(path)?;
    let mut data = Vec::new();
    let mut width = cols;
    let mut nrows = 0;
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_error(path, k as u64 + 1, e.to_string()))?;
        match width {
            Some(w) if w != row.len() => {
                return Err(parse_error(path, k as u64 + 1, format!("expected {w} columns")))
            }
            None => width = Some(row.len()),
            _ => {}
        }
        data.extend(row);
        nrows += 1;
    }
    Ok(DMatrix::from_row_slice(nrows, width.unwrap_or(0), &data))
}

pub fn factor_paths(dir: &Path) -> [PathBuf; 3] {
    [
        dir.join("factors_u.csv"),
        dir.join("factors_s.csv"),
        dir.join("factors_v.csv"),
    ]
}

pub fn write_factors(dir: &Path, f: &LowRankFactors) -> Result<()> {
    let [u, s, v] = factor_paths(dir);
    write_dense(&u, &f.u)?;
    write_dense(&s, &DMatrix::from_column_slice(f.rank(), 1, f.s.as_slice()))?;
    write_dense(&v, &f.v)
}

pub fn read_factors(dir: &Path) -> Result<LowRankFactors> {
    let [u, s, v] = factor_paths(dir);
    let sv = read_dense(&s, Some(1))?;
    let k = sv.nrows();
    LowRankFactors::new(
        read_dense(&u, Some(k))?,
        DVector::from_column_slice(sv.as_slice()),
        read_dense(&v, Some(k))?,
    )
}

/// Ordered `key=value` run metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = (String, String)>) {
        self.0.extend(records);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str, path: &Path) -> Result<T> {
        self.get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| parse_error(path, 0, format!("missing or invalid metadata key {key:?}")))
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        create(path)?
            .write_all(self.to_text().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let mut meta = Metadata::default();
        for (k, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_error(path, k as u64 + 1, "expected key=value"))?;
            meta.push(key.trim(), value.trim());
        }
        Ok(meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{rank_items, ScoreVector};

    #[test]
    fn ratings_with_header_and_custom_delimiter() {
        let text = "user;movie;stars\nalice;m1;5\nalice;m2;3\nbob;m2;4\n";
        let t = parse_ratings(text.as_bytes(), Path::new("x"), b';').unwrap();
        assert_eq!(t.ratings.len(), 3);
        assert_eq!(t.items.ids(), &["m1", "m2"]);
        assert_eq!(t.voters.ids(), &["alice", "bob"]);
        assert_eq!(t.lines, vec![2, 3, 4]);
    }

    #[test]
    fn ratings_without_header() {
        let t = parse_ratings("a,x,1\nb,x,2.5\n".as_bytes(), Path::new("x"), b',').unwrap();
        assert_eq!(t.ratings.len(), 2);
    }

    #[test]
    fn ratings_errors_carry_line_numbers() {
        let err = parse_ratings("a,x,1\nb,x,oops\n".as_bytes(), Path::new("r.csv"), b',').unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_ratings("a,x,1\na,x,2\n".as_bytes(), Path::new("r.csv"), b',').unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_ratings("a,x,1\nb,x\n".as_bytes(), Path::new("r.csv"), b',').unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn pairwise_files_reconstruct_closure() {
        let dir = tempfile::tempdir().unwrap();
        let y = PairwiseMatrix::new(
            3,
            [
                PairwiseEntry { i: 2, j: 0, value: 0.1 + 0.2, support: 7 },
                PairwiseEntry { i: 1, j: 2, value: -1.0 / 3.0, support: 1 },
            ],
        )
        .unwrap();
        let stem = dir.path().join("pairwise");
        write_pairwise(&stem, &y, &[("method", "am".into())]).unwrap();
        let text = fs::read_to_string(stem.with_extension("coo")).unwrap();
        assert!(text.contains("0,2,-0.30000000000000004"));
        let back = read_pairwise(&stem).unwrap();
        assert_eq!(back, y);
        assert_eq!(back.get(2, 0).unwrap().value, 0.1 + 0.2);
    }

    #[test]
    fn coordinate_rejects_lower_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.coo");
        fs::write(&p, format!("{COORDINATE_MAGIC}\n# num_items=3\nrow,col,value\n2,1,1.0\n")).unwrap();
        assert!(matches!(read_samples(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn samples_factors_ranking_and_metadata_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = SampleSet::from_upper(4, [(0, 3, 1.25), (1, 2, -0.7)]).unwrap();
        write_samples(&dir.path().join("s.coo"), &s).unwrap();
        assert_eq!(read_samples(&dir.path().join("s.coo")).unwrap(), s);

        let f = LowRankFactors::new(
            DMatrix::from_fn(4, 2, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0)),
            DVector::from_vec(vec![2.0 / 3.0, 0.1]),
            DMatrix::from_fn(4, 2, |i, j| (i * j) as f64 / 7.0),
        )
        .unwrap();
        write_factors(dir.path(), &f).unwrap();
        assert_eq!(read_factors(dir.path()).unwrap(), f);

        let ids: Vec<String> = ["b,1", "a", "c"].iter().map(|s| s.to_string()).collect();
        let list = rank_items(&ScoreVector::new(vec![0.1, 0.7, -0.8]), &ids).unwrap();
        write_ranking(&dir.path().join("r.csv"), &list).unwrap();
        let rows = read_ranking(&dir.path().join("r.csv")).unwrap();
        assert_eq!(rows[0], (1, "a".to_string(), 0.7));
        assert_eq!(rows[1].1, "b,1");

        let mut m = Metadata::default();
        m.push("model", "am 6 30");
        m.push("tol", 1e-4);
        m.write(&dir.path().join("meta.txt")).unwrap();
        let back = Metadata::read(&dir.path().join("meta.txt")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.require::<f64>("tol", Path::new("m")).unwrap(), 1e-4);

        let mut labels = Labels::new();
        labels.intern("x y");
        labels.intern("z,\"q\"");
        write_items(&dir.path().join("items.csv"), &labels).unwrap();
        assert_eq!(read_items(&dir.path().join("items.csv")).unwrap(), labels);
    }
}
