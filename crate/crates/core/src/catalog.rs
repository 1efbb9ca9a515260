use crate::error::Result;
use crate::graph::{scc_decompose, TransferGraph};
use crate::oracle::OracleOptions;
use crate::scheme::{Scheme, Voice};
use crate::spectral::{flexibility_of_graph, PowerOptions};
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

const THREE_VOICE_TABLE: &str = include_str!("../data/three_voice_table.csv");
const REPERTOIRE: &str = include_str!("../data/repertoire.csv");

pub const PRINT_TOLERANCE: f64 = 0.0015;

/// Which voice of the reduced 3-voice scheme carries the bass marking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BassPos {
    NoBass,
    First,
    Second,
    Third,
}

impl BassPos {
    pub const ALL: [BassPos; 4] = [BassPos::NoBass, BassPos::First, BassPos::Second, BassPos::Third];
}

impl fmt::Display for BassPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            BassPos::NoBass => "none",
            BassPos::First => "1st",
            BassPos::Second => "2nd",
            BassPos::Third => "3rd",
        };
        write!(f, "{text}")
    }
}

impl FromStr for BassPos {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(BassPos::NoBass),
            "1st" => Ok(BassPos::First),
            "2nd" => Ok(BassPos::Second),
            "3rd" => Ok(BassPos::Third),
            other => Err(format!("unknown bass position {other:?}")),
        }
    }
}

pub type RowKey = (u32, u32, BassPos, u8);

/// One cell of the 3-voice table: the scheme {(0,0),(t2,0),(t3,p3)} with an
/// optional bass marking.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogRow {
    pub t2: u32,
    pub t3: u32,
    pub bass: BassPos,
    pub p3: u8,
    pub lambda: f64,
    pub canonical: String,
}

impl CatalogRow {
    pub fn key(&self) -> RowKey {
        (self.t2, self.t3, self.bass, self.p3)
    }
}

/// A table cell before its flexibility is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowSpec {
    pub t2: u32,
    pub t3: u32,
    pub bass: BassPos,
    pub p3: u8,
}

impl RowSpec {
    pub fn key(&self) -> RowKey {
        (self.t2, self.t3, self.bass, self.p3)
    }

    pub fn scheme(&self) -> Scheme {
        let voices = vec![
            Voice::new(0, 0, self.bass == BassPos::First),
            Voice::new(self.t2 as i64, 0, self.bass == BassPos::Second),
            Voice::new(self.t3 as i64, self.p3 as i64, self.bass == BassPos::Third),
        ];
        Scheme::new(voices).unwrap()
    }
}

/// All reduced 3-voice cells with `t3 <= max_t3`, in the published order:
/// sorted by t3, then t2 (coprime to t3, at most t3/2), then bass
/// (none, 1st, 2nd, 3rd), then p3.
pub fn enumerate_schemes(max_t3: u32) -> Vec<RowSpec> {
    let mut rows = Vec::new();
    for t3 in 2..=max_t3 {
        for t2 in 1..=(t3 / 2) {
            if t2.gcd(&t3) != 1 {
                continue;
            }
            for bass in BassPos::ALL {
                for p3 in 0..7u8 {
                    rows.push(RowSpec { t2, t3, bass, p3 });
                }
            }
        }
    }
    rows
}

#[derive(Clone, Debug, Serialize)]
pub struct TableOutput {
    pub rows: Vec<CatalogRow>,
    pub errors: Vec<(RowKey, String)>,
}

/// Computes the flexibility of every enumerated cell. Rows are independent
/// jobs; the output order is the enumeration order regardless of worker
/// count (`workers = 0` uses the rayon default).
pub fn compute_table(max_t3: u32, workers: usize) -> TableOutput {
    let specs = enumerate_schemes(max_t3);
    let compute = |spec: &RowSpec| -> Result<CatalogRow> {
        let scheme = spec.scheme();
        let g = TransferGraph::build(&scheme, OracleOptions::default())?;
        let flex = flexibility_of_graph(&g, PowerOptions::default())?;
        Ok(CatalogRow {
            t2: spec.t2,
            t3: spec.t3,
            bass: spec.bass,
            p3: spec.p3,
            lambda: flex.lambda,
            canonical: scheme.canonical_form().0.to_string(),
        })
    };
    let results: Vec<(RowKey, Result<CatalogRow>)> = if workers == 1 {
        specs.iter().map(|s| (s.key(), compute(s))).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| specs.par_iter().map(|s| (s.key(), compute(s))).collect())
    };
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (key, result) in results {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => errors.push((key, e.to_string())),
        }
    }
    TableOutput { rows, errors }
}

/// Writes rows as CSV with the stable header; lambda at 3 decimals.
pub fn write_csv(rows: &[CatalogRow], out: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t2", "t3", "bass", "p3", "lambda", "canonical"])?;
    for r in rows {
        w.write_record([
            r.t2.to_string(),
            r.t3.to_string(),
            r.bass.to_string(),
            r.p3.to_string(),
            crate::format_lambda(r.lambda),
            r.canonical.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows back from the CSV format written by `write_csv`.
pub fn read_csv(input: impl std::io::Read) -> std::result::Result<Vec<CatalogRow>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() < 6 {
            return Err(format!("short record: {record:?}"));
        }
        rows.push(CatalogRow {
            t2: record[0].parse().map_err(|_| format!("bad t2 {record:?}"))?,
            t3: record[1].parse().map_err(|_| format!("bad t3 {record:?}"))?,
            bass: record[2].parse()?,
            p3: record[3].parse().map_err(|_| format!("bad p3 {record:?}"))?,
            lambda: record[4]
                .parse()
                .map_err(|_| format!("bad lambda {record:?}"))?,
            canonical: record[5].to_string(),
        });
    }
    Ok(rows)
}

/// The embedded published table: 308 values for t3 <= 8.
pub fn reference_table() -> BTreeMap<RowKey, f64> {
    let mut map = BTreeMap::new();
    for line in THREE_VOICE_TABLE.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("t2,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let key: RowKey = (
            fields[0].parse().unwrap(),
            fields[1].parse().unwrap(),
            fields[2].parse().unwrap(),
            fields[3].parse().unwrap(),
        );
        map.insert(key, fields[4].parse().unwrap());
    }
    map
}

/// Named repertoire schemes with their published flexibility values.
pub fn repertoire_fixtures() -> Vec<(String, Scheme, f64)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(REPERTOIRE.as_bytes());
    reader
        .records()
        .map(|record| {
            let record = record.unwrap();
            (
                record[0].to_string(),
                record[1].parse().unwrap(),
                record[2].parse().unwrap(),
            )
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub key: RowKey,
    pub computed: f64,
    pub printed: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DiffReport {
    pub mismatches: Vec<Mismatch>,
    pub missing: Vec<RowKey>,
}

impl DiffReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.missing.is_empty()
    }
}

/// Compares computed rows against the embedded reference; anything off by
/// more than the 3-decimal print tolerance is a mismatch, reference keys
/// not covered by the rows are reported missing.
pub fn reference_diff(rows: &[CatalogRow]) -> DiffReport {
    let reference = reference_table();
    let computed: BTreeMap<RowKey, f64> = rows.iter().map(|r| (r.key(), r.lambda)).collect();
    let mut report = DiffReport::default();
    for (&key, &printed) in &reference {
        match computed.get(&key) {
            Some(&lambda) => {
                if (lambda - printed).abs() > PRINT_TOLERANCE {
                    report.mismatches.push(Mismatch {
                        key,
                        computed: lambda,
                        printed,
                    });
                }
            }
            None => report.missing.push(key),
        }
    }
    report
}

/// One line of the result cache, keyed by canonical scheme string.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CacheEntry {
    pub canonical: String,
    pub lambda: f64,
    pub nodes: usize,
    pub scc_count: usize,
    pub version: String,
}

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

impl CacheEntry {
    pub fn for_scheme(scheme: &Scheme) -> Result<CacheEntry> {
        let g = TransferGraph::build(scheme, OracleOptions::default())?;
        let flex = flexibility_of_graph(&g, PowerOptions::default())?;
        Ok(CacheEntry {
            canonical: scheme.canonical_form().0.to_string(),
            lambda: flex.lambda,
            nodes: g.node_count(),
            scc_count: scc_decompose(&g).components.len(),
            version: tool_version().to_string(),
        })
    }
}

/// Appends entries as JSON lines.
pub fn cache_store(path: &Path, entries: &[CacheEntry]) -> std::io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    for entry in entries {
        writeln!(file, "{}", serde_json::to_string(entry)?)?;
    }
    Ok(())
}

/// Loads the cache, skipping corrupt lines and entries from other tool
/// versions. Returns the entries plus the number of skipped lines.
pub fn cache_load(path: &Path) -> std::io::Result<(BTreeMap<String, CacheEntry>, usize)> {
    let mut map = BTreeMap::new();
    let mut skipped = 0usize;
    if !path.exists() {
        return Ok((map, 0));
    }
    for line in BufReader::new(std::fs::File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CacheEntry>(&line) {
            Ok(entry) if entry.version == tool_version() => {
                map.insert(entry.canonical.clone(), entry);
            }
            _ => skipped += 1,
        }
    }
    Ok((map, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_schemes(2).len(), 28);
        assert_eq!(enumerate_schemes(3).len(), 56);
        assert_eq!(enumerate_schemes(8).len(), 308);
        let pairs: Vec<(u32, u32)> = {
            let mut seen = Vec::new();
            for r in enumerate_schemes(8) {
                if !seen.contains(&(r.t2, r.t3)) {
                    seen.push((r.t2, r.t3));
                }
            }
            seen
        };
        assert_eq!(
            pairs,
            vec![
                (1, 2),
                (1, 3),
                (1, 4),
                (1, 5),
                (2, 5),
                (1, 6),
                (1, 7),
                (2, 7),
                (3, 7),
                (1, 8),
                (3, 8)
            ]
        );
    }

    #[test]
    fn reference_table_has_308_values_in_range() {
        let table = reference_table();
        assert_eq!(table.len(), 308);
        assert!(table.values().all(|&v| (1.0..=3.935).contains(&v)));
    }

    #[test]
    fn selected_cells() {
        let out = compute_table(3, 1);
        assert!(out.errors.is_empty());
        let get = |key: RowKey| {
            out.rows
                .iter()
                .find(|r| r.key() == key)
                .map(|r| r.lambda)
                .unwrap()
        };
        assert!((get((1, 2, BassPos::NoBass, 3)) - 3.0).abs() < PRINT_TOLERANCE);
        assert!((get((1, 3, BassPos::Second, 3)) - 1.618).abs() < PRINT_TOLERANCE);
    }

    #[test]
    fn diff_self_test() {
        let mut out = compute_table(2, 1);
        // rows for (1,2) only: every other reference pair is missing
        let report = reference_diff(&out.rows);
        assert!(report.mismatches.is_empty(), "{:?}", report.mismatches);
        assert_eq!(report.missing.len(), 308 - 28);
        // a perturbed value must show up as exactly one mismatch
        out.rows[0].lambda += 0.01;
        let report = reference_diff(&out.rows);
        assert_eq!(report.mismatches.len(), 1);
    }

    #[test]
    fn csv_round_trip_is_deterministic() {
        let out = compute_table(2, 1);
        let mut buf1 = Vec::new();
        write_csv(&out.rows, &mut buf1).unwrap();
        let out2 = compute_table(2, 2);
        let mut buf2 = Vec::new();
        write_csv(&out2.rows, &mut buf2).unwrap();
        assert_eq!(buf1, buf2);
        let rows = read_csv(buf1.as_slice()).unwrap();
        assert_eq!(rows.len(), 28);
        assert_eq!(rows[0].key(), out.rows[0].key());
    }

    #[test]
    fn cache_round_trip_and_version_policy() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let scheme: Scheme = "{(0,0),(1,-8)B,(3,0)}".parse().unwrap();
        let entry = CacheEntry::for_scheme(&scheme).unwrap();
        let mut stale = entry.clone();
        stale.version = "0.0.0-old".to_string();
        cache_store(&path, &[entry.clone(), stale]).unwrap();
        // corrupt line is skipped with a count
        std::fs::OpenOptions::new()
            .append(true)
            .open(&path)
            .unwrap()
            .write_all(b"{not json\n")
            .unwrap();
        let (map, skipped) = cache_load(&path).unwrap();
        assert_eq!(skipped, 2);
        assert_eq!(map.len(), 1);
        assert_eq!(map.values().next().unwrap(), &entry);
    }

    #[test]
    fn equivalent_schemes_share_a_cache_key() {
        let a: Scheme = "{(0,0),(1,-8)B,(3,0)}".parse().unwrap();
        let b = a
            .transform(crate::scheme::Transform::Shear(crate::pitch::PitchClass::new(2)))
            .unwrap();
        assert_eq!(
            CacheEntry::for_scheme(&a).unwrap().canonical,
            CacheEntry::for_scheme(&b).unwrap().canonical
        );
    }

    #[test]
    fn repertoire_fixtures_parse() {
        let fixtures = repertoire_fixtures();
        assert_eq!(fixtures.len(), 9);
        assert!(fixtures.iter().any(|(name, _, _)| name == "pleni"));
    }
}
