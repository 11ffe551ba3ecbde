//! Tabulated share/exposure data: truthfulness color codes, belief groups,
//! CSV ingestion and conversion to [`Observation`]s.
//!
//! Two CSV schemas are read (UTF-8, comma separated, `#` comment lines):
//!
//! ```text
//! domain_id,bias,truth,group,exposures,shares[,extreme]
//! domain_id,color,fraction
//! ```
//!
//! An empty `truth` cell means the domain's truthfulness is computed from its
//! color-coded justifications in the second file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::Observation;
use crate::model::BeliefGroup;

/// Fact-checker color code of a news domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthColor {
    Black,
    Red,
    Orange,
    Yellow,
    Green,
}

impl TruthColor {
    pub const ALL: [TruthColor; 5] = [
        TruthColor::Black,
        TruthColor::Red,
        TruthColor::Orange,
        TruthColor::Yellow,
        TruthColor::Green,
    ];

    /// Truthfulness interval assigned to the color. Nothing maps above 0.8.
    pub fn range(self) -> (f64, f64) {
        match self {
            TruthColor::Black => (0.0, 0.1),
            TruthColor::Red => (0.1, 0.2),
            TruthColor::Orange => (0.2, 0.3),
            TruthColor::Yellow => (0.3, 0.6),
            TruthColor::Green => (0.6, 0.8),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TruthColor::Black => "black",
            TruthColor::Red => "red",
            TruthColor::Orange => "orange",
            TruthColor::Yellow => "yellow",
            TruthColor::Green => "green",
        }
    }
}

impl fmt::Display for TruthColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for TruthColor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        TruthColor::ALL
            .into_iter()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown truthfulness color `{s}`")))
    }
}

/// Display bins for truthfulness scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthCategory {
    VeryLow,
    Low,
    Mixed,
    High,
    VeryHigh,
}

impl TruthCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            TruthCategory::VeryLow => "very_low",
            TruthCategory::Low => "low",
            TruthCategory::Mixed => "mixed",
            TruthCategory::High => "high",
            TruthCategory::VeryHigh => "very_high",
        }
    }
}

impl fmt::Display for TruthCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// Bin a score on `[0, 0.8]`: very low `[0, 0.1)`, low `[0.1, 0.3)`, mixed
/// `[0.3, 0.5)`, high `[0.5, 0.7)`, very high `[0.7, 0.8]`. Boundaries go to
/// the upper bin.
pub fn truthfulness_category(t: f64) -> Result<TruthCategory> {
    if !(0.0..=0.8).contains(&t) {
        return Err(Error::domain("truthfulness", t, "[0, 0.8]"));
    }
    Ok(if t < 0.1 {
        TruthCategory::VeryLow
    } else if t < 0.3 {
        TruthCategory::Low
    } else if t < 0.5 {
        TruthCategory::Mixed
    } else if t < 0.7 {
        TruthCategory::High
    } else {
        TruthCategory::VeryHigh
    })
}

/// A color-coded rating with the position inside the color's interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Justification {
    pub color: TruthColor,
    /// Position in `[0, 1]` inside the color range; `None` means the midpoint.
    pub fraction: Option<f64>,
}

impl Justification {
    pub fn new(color: TruthColor, fraction: f64) -> Self {
        Justification {
            color,
            fraction: Some(fraction),
        }
    }

    pub fn score(&self) -> Result<f64> {
        let fraction = self.fraction.unwrap_or(0.5);
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::domain("fraction", fraction, "[0, 1]"));
        }
        let (lo, hi) = self.color.range();
        Ok(lo + fraction * (hi - lo))
    }
}

/// Mean of the justifications' positions inside their color ranges.
pub fn truthfulness_score(justifications: &[Justification]) -> Result<f64> {
    if justifications.is_empty() {
        return Err(Error::InvalidArgument(
            "truthfulness needs at least one justification".into(),
        ));
    }
    let total = justifications
        .iter()
        .map(Justification::score)
        .sum::<Result<f64>>()?;
    Ok(total / justifications.len() as f64)
}

pub fn belief_center(group: BeliefGroup) -> f64 {
    group.center()
}

/// Exposure and share counts of one belief group for one domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub group: BeliefGroup,
    pub exposures: u64,
    pub shares: u64,
    #[serde(default)]
    pub extreme: bool,
}

/// All tabulated counts for one news domain. Every article of a domain
/// shares the domain's bias and truthfulness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub domain_id: String,
    pub bias: f64,
    /// Precomputed truthfulness; when absent it comes from `justifications`.
    pub truth: Option<f64>,
    pub justifications: Vec<Justification>,
    pub cells: Vec<GroupCounts>,
}

impl DomainRecord {
    pub fn resolved_truth(&self) -> Result<f64> {
        match self.truth {
            Some(t) => Ok(t),
            None => truthfulness_score(&self.justifications)
                .map_err(|e| Error::InvalidArgument(format!("domain `{}`: {e}", self.domain_id))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad =
            |msg: String| Error::InvalidArgument(format!("domain `{}`: {msg}", self.domain_id));
        if !(-1.0..=1.0).contains(&self.bias) {
            return Err(bad(format!("bias {} outside [-1, 1]", self.bias)));
        }
        let truth = self.resolved_truth()?;
        if !(0.0..=1.0).contains(&truth) {
            return Err(bad(format!("truth {truth} outside [0, 1]")));
        }
        for cell in &self.cells {
            if cell.shares > cell.exposures {
                return Err(bad(format!(
                    "group {}: shares ({}) exceed exposures ({})",
                    cell.group, cell.shares, cell.exposures
                )));
            }
        }
        Ok(())
    }
}

/// One observation per `(domain, group)` cell with at least one exposure.
pub fn build_observations(records: &[DomainRecord]) -> Result<Vec<Observation>> {
    let mut out = Vec::new();
    for record in records {
        record.validate()?;
        let truth = record.resolved_truth()?;
        for cell in record.cells.iter().filter(|c| c.exposures > 0) {
            out.push(Observation {
                bias: record.bias,
                truth,
                belief: cell.group.center(),
                exposures: cell.exposures,
                shares: cell.shares,
                extreme: cell.extreme,
            });
        }
    }
    Ok(out)
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => Error::parse(line, e.to_string()),
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn require_columns(headers: &csv::StringRecord, names: &[&str]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|name| {
            column(headers, name).ok_or_else(|| Error::parse(1, format!("missing column `{name}`")))
        })
        .collect()
}

fn parse_f64(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("{name}: `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(
            line,
            format!("{name}: `{field}` is not finite"),
        ));
    }
    Ok(v)
}

fn parse_u64(field: &str, name: &str, line: u64) -> Result<u64> {
    field.parse().map_err(|_| {
        Error::parse(
            line,
            format!("{name}: `{field}` is not a non-negative integer"),
        )
    })
}

fn parse_bool(field: &str, line: u64) -> Result<bool> {
    match field.to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" => Ok(false),
        "1" | "true" | "yes" => Ok(true),
        other => Err(Error::parse(
            line,
            format!("extreme: `{other}` is not a boolean"),
        )),
    }
}

/// Read justifications keyed by domain id.
pub fn read_justifications<R: Read>(reader: R) -> Result<BTreeMap<String, Vec<Justification>>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let idx = require_columns(&headers, &["domain_id", "color"])?;
    let fraction_idx = column(&headers, "fraction");
    let mut out: BTreeMap<String, Vec<Justification>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let color = row[idx[1]]
            .parse::<TruthColor>()
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let fraction = match fraction_idx.map(|i| &row[i]) {
            None | Some("") => None,
            Some(s) => {
                let f = parse_f64(s, "fraction", line)?;
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::parse(line, format!("fraction {f} outside [0, 1]")));
                }
                Some(f)
            }
        };
        out.entry(row[idx[0]].to_string())
            .or_default()
            .push(Justification { color, fraction });
    }
    Ok(out)
}

/// Read domain records from the counts CSV, resolving empty truth cells
/// from `justifications`. Records come back in order of first appearance.
pub fn read_domain_records<R: Read>(
    reader: R,
    justifications: Option<&BTreeMap<String, Vec<Justification>>>,
) -> Result<Vec<DomainRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() {
        return Err(Error::parse(1, "empty input: missing header row"));
    }
    let idx = require_columns(
        &headers,
        &["domain_id", "bias", "truth", "group", "exposures", "shares"],
    )?;
    let extreme_idx = column(&headers, "extreme");

    let mut records: Vec<DomainRecord> = Vec::new();
    let mut by_id: BTreeMap<String, usize> = BTreeMap::new();
    let mut rows = 0usize;
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        rows += 1;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let domain_id = row[idx[0]].to_string();
        if domain_id.is_empty() {
            return Err(Error::parse(line, "empty domain_id"));
        }
        let bias = parse_f64(&row[idx[1]], "bias", line)?;
        if !(-1.0..=1.0).contains(&bias) {
            return Err(Error::parse(line, format!("bias {bias} outside [-1, 1]")));
        }
        let truth = match &row[idx[2]] {
            "" => None,
            s => {
                let t = parse_f64(s, "truth", line)?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::parse(line, format!("truth {t} outside [0, 1]")));
                }
                Some(t)
            }
        };
        let group = row[idx[3]]
            .parse::<BeliefGroup>()
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let exposures = parse_u64(&row[idx[4]], "exposures", line)?;
        let shares = parse_u64(&row[idx[5]], "shares", line)?;
        if shares > exposures {
            return Err(Error::parse(
                line,
                format!("shares ({shares}) exceed exposures ({exposures})"),
            ));
        }
        let extreme = match extreme_idx {
            Some(i) => parse_bool(&row[i], line)?,
            None => false,
        };
        let cell = GroupCounts {
            group,
            exposures,
            shares,
            extreme,
        };

        match by_id.get(&domain_id) {
            Some(&i) => {
                let record = &mut records[i];
                if record.bias != bias || record.truth != truth {
                    return Err(Error::parse(
                        line,
                        format!("domain `{domain_id}` has inconsistent bias or truth"),
                    ));
                }
                if record
                    .cells
                    .iter()
                    .any(|c| c.group == group && c.extreme == extreme)
                {
                    return Err(Error::parse(
                        line,
                        format!("duplicate group `{group}` for domain `{domain_id}`"),
                    ));
                }
                record.cells.push(cell);
            }
            None => {
                let justs = match (truth, justifications) {
                    (None, Some(map)) => map.get(&domain_id).cloned().unwrap_or_default(),
                    _ => Vec::new(),
                };
                if truth.is_none() && justs.is_empty() {
                    return Err(Error::parse(
                        line,
                        format!("domain `{domain_id}` has no truth value and no justifications"),
                    ));
                }
                by_id.insert(domain_id.clone(), records.len());
                records.push(DomainRecord {
                    domain_id,
                    bias,
                    truth,
                    justifications: justs,
                    cells: vec![cell],
                });
            }
        }
    }
    if rows == 0 {
        return Err(Error::parse(1, "no data rows"));
    }
    Ok(records)
}

/// Write records in the counts schema, truth resolved to a number.
pub fn write_domain_records<W: Write>(records: &[DomainRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wtr.write_record([
        "domain_id",
        "bias",
        "truth",
        "group",
        "exposures",
        "shares",
        "extreme",
    ])
    .map_err(io)?;
    for record in records {
        let truth = record.resolved_truth()?;
        for cell in &record.cells {
            wtr.write_record([
                record.domain_id.clone(),
                record.bias.to_string(),
                truth.to_string(),
                cell.group.to_string(),
                cell.exposures.to_string(),
                cell.shares.to_string(),
                u8::from(cell.extreme).to_string(),
            ])
            .map_err(io)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Read the counts CSV at `path` (and optionally a justification CSV) and
/// build observations.
pub fn load_observations(path: &Path, justifications: Option<&Path>) -> Result<Vec<Observation>> {
    let justs = justifications
        .map(|p| open(p).and_then(read_justifications))
        .transpose()?;
    let records = read_domain_records(open(path)?, justs.as_ref())?;
    build_observations(&records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn color_scores() {
        assert_eq!(
            truthfulness_score(&[Justification::new(TruthColor::Black, 0.0)]).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            truthfulness_score(&[Justification::new(TruthColor::Green, 0.5)]).unwrap(),
            0.7,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            truthfulness_score(&[
                Justification::new(TruthColor::Red, 0.5),
                Justification::new(TruthColor::Yellow, 0.5)
            ])
            .unwrap(),
            0.30,
            epsilon = 1e-12
        );
        let midpoint = Justification {
            color: TruthColor::Orange,
            fraction: None,
        };
        assert_abs_diff_eq!(
            truthfulness_score(&[midpoint]).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        assert!(truthfulness_score(&[]).is_err());
        assert!(truthfulness_score(&[Justification::new(TruthColor::Red, 1.5)]).is_err());
    }

    #[test]
    fn categories() {
        assert_eq!(truthfulness_category(0.55).unwrap(), TruthCategory::High);
        assert_eq!(truthfulness_category(0.05).unwrap(), TruthCategory::VeryLow);
        assert_eq!(truthfulness_category(0.30).unwrap(), TruthCategory::Mixed);
        assert_eq!(truthfulness_category(0.1).unwrap(), TruthCategory::Low);
        assert_eq!(truthfulness_category(0.8).unwrap(), TruthCategory::VeryHigh);
        assert!(truthfulness_category(0.85).is_err());
        assert!(truthfulness_category(-0.01).is_err());
    }

    #[test]
    fn centers() {
        assert_eq!(belief_center(BeliefGroup::ExtremeLeft), -0.857);
        assert_eq!(belief_center(BeliefGroup::Center), 0.0);
        assert_eq!(belief_center(BeliefGroup::LeanRight), 0.286);
    }

    fn record(id: &str, cells: Vec<GroupCounts>) -> DomainRecord {
        DomainRecord {
            domain_id: id.into(),
            bias: 0.4,
            truth: Some(0.6),
            justifications: vec![],
            cells,
        }
    }

    fn cell(group: BeliefGroup, exposures: u64, shares: u64) -> GroupCounts {
        GroupCounts {
            group,
            exposures,
            shares,
            extreme: false,
        }
    }

    #[test]
    fn observations_from_records() {
        let obs =
            build_observations(&[record("a", vec![cell(BeliefGroup::Right, 10, 2)])]).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(obs[0].rate(), Some(0.2));
        assert_eq!(obs[0].belief, 0.571);

        let obs = build_observations(&[record("a", vec![cell(BeliefGroup::Right, 0, 0)])]).unwrap();
        assert!(obs.is_empty());

        let all: Vec<_> = BeliefGroup::ALL.iter().map(|&g| cell(g, 5, 1)).collect();
        let obs = build_observations(&[record("a", all.clone()), record("b", all)]).unwrap();
        assert_eq!(obs.len(), 14);
    }

    #[test]
    fn malformed_record_is_rejected() {
        let bad = record("a", vec![cell(BeliefGroup::Left, 3, 4)]);
        assert!(build_observations(&[bad]).is_err());
    }

    #[test]
    fn csv_with_justifications() {
        let counts = "domain_id,bias,truth,group,exposures,shares\n\
                      # comment\n\
                      x.com,0.5,,right,100,3\n\
                      x.com,0.5,,left,50,0\n\
                      y.org,-0.2,0.65,center,20,1\n";
        let justs = "domain_id,color,fraction\nx.com,red,0.5\nx.com,yellow,\n";
        let map = read_justifications(justs.as_bytes()).unwrap();
        let records = read_domain_records(counts.as_bytes(), Some(&map)).unwrap();
        assert_eq!(records.len(), 2);
        // red midpoint 0.15, yellow default midpoint 0.45
        assert_abs_diff_eq!(records[0].resolved_truth().unwrap(), 0.3, epsilon = 1e-12);
        assert_eq!(records[0].cells.len(), 2);
        let obs = build_observations(&records).unwrap();
        assert_eq!(obs.len(), 3);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let cases = [
            ("domain_id,bias,truth,group,exposures,shares\nx,0.5,0.3,right,10,20\n", 2),
            ("domain_id,bias,truth,group,exposures,shares\nx,0.5,0.3,right,10,2\nx,1.5,0.3,left,10,2\n", 3),
            ("domain_id,bias,truth,group,exposures,shares\nx,0.5,0.3,middle,10,2\n", 2),
            ("domain_id,bias,truth,group,exposures,shares\nx,0.5,abc,right,10,2\n", 2),
            ("domain_id,bias,truth,group,exposures,shares\nx,0.5,,right,10,2\n", 2),
            ("domain_id,bias,truth,group,exposures,shares\nx,0.5,0.3,right,10,2\nx,0.4,0.3,left,10,2\n", 3),
        ];
        for (text, line) in cases {
            match read_domain_records(text.as_bytes(), None) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        assert!(matches!(
            read_domain_records("".as_bytes(), None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_domain_records("domain_id,bias\nx,0.1\n".as_bytes(), None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_domain_records(
                "domain_id,bias,truth,group,exposures,shares\n".as_bytes(),
                None
            ),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn extreme_column() {
        let text = "domain_id,bias,truth,group,exposures,shares,extreme\n\
                    x,0.5,0.3,right,10,2,0\nx,0.5,0.3,right,10,5,1\n";
        let obs = build_observations(&read_domain_records(text.as_bytes(), None).unwrap()).unwrap();
        assert_eq!(obs.iter().filter(|o| o.extreme).count(), 1);
    }
}
