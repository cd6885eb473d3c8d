//! Raw input parsing and snapshot assembly.
//!
//! Four input files describe a study:
//!
//! * `schema.json` maps each attribute name to its ordered value list and
//!   carries a `calendar` array of `{index, start, end}` semester windows
//!   (UTC epoch seconds, both ends inclusive).
//! * `events.csv` (`timestamp,sender,receiver,kind,duration`) is the call and
//!   text log behind the behavioral network.
//! * `nominations.csv` (`semester,ego,alter`) lists survey friendship
//!   nominations behind the cognitive network.
//! * `attributes.csv` (`semester,node,attribute,value`) holds survey answers.
//!
//! [`build_snapshots`] combines them into one [`Snapshot`] per semester.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{edge_weight, Node, Snapshot};

/// Maximum number of alters a participant may list per survey.
pub const MAX_NOMINATIONS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub values: Vec<String>,
}

/// The attribute universe: names and their finite, ordered value sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    lookup: HashMap<String, usize>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::Schema("no attributes defined".into()));
        }
        let mut lookup = HashMap::new();
        for (i, attr) in attributes.iter().enumerate() {
            if lookup.insert(attr.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("attribute `{}` defined twice", attr.name)));
            }
            if attr.name == "calendar" {
                return Err(Error::Schema("`calendar` is reserved".into()));
            }
            let distinct: HashSet<&String> = attr.values.iter().collect();
            if distinct.len() != attr.values.len() {
                return Err(Error::Schema(format!("attribute `{}` repeats a value", attr.name)));
            }
            if attr.values.len() < 2 {
                return Err(Error::Schema(format!(
                    "attribute `{}` needs at least 2 values",
                    attr.name
                )));
            }
        }
        Ok(AttributeSchema { attributes, lookup })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn attribute(&self, name: &str) -> Result<&Attribute> {
        self.attribute_index(name)
            .map(|i| &self.attributes[i])
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn value_index(&self, attribute: usize, value: &str) -> Option<usize> {
        self.attributes[attribute].values.iter().position(|v| v == value)
    }

    pub fn contains(&self, attribute: &str, value: &str) -> bool {
        self.attribute_index(attribute)
            .and_then(|a| self.value_index(a, value))
            .is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Semester {
    pub index: u32,
    pub start: i64,
    pub end: i64,
}

/// Ordered, non-overlapping semester windows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SemesterCalendar {
    semesters: Vec<Semester>,
}

impl SemesterCalendar {
    pub fn new(semesters: Vec<Semester>) -> Result<Self> {
        if semesters.is_empty() {
            return Err(Error::Schema("calendar has no semesters".into()));
        }
        for s in &semesters {
            if s.index == 0 {
                return Err(Error::Schema("semester indices are 1-based".into()));
            }
            if s.start > s.end {
                return Err(Error::Schema(format!("semester {} ends before it starts", s.index)));
            }
        }
        for pair in semesters.windows(2) {
            if pair[1].index <= pair[0].index || pair[1].start <= pair[0].end {
                return Err(Error::Schema(format!(
                    "semesters {} and {} overlap or are out of order",
                    pair[0].index, pair[1].index
                )));
            }
        }
        Ok(SemesterCalendar { semesters })
    }

    /// Fall 2011 through Spring 2013; summers are not covered.
    pub fn four_semesters() -> Self {
        let windows = [
            (1_313_971_200, 1_324_079_999),
            (1_326_067_200, 1_336_175_999),
            (1_345_420_800, 1_355_529_599),
            (1_357_516_800, 1_367_625_599),
        ];
        let semesters = windows
            .iter()
            .zip(1..)
            .map(|(&(start, end), index)| Semester { index, start, end })
            .collect();
        SemesterCalendar { semesters }
    }

    pub fn semesters(&self) -> &[Semester] {
        &self.semesters
    }

    pub fn len(&self) -> usize {
        self.semesters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semesters.is_empty()
    }

    pub fn get(&self, index: u32) -> Option<&Semester> {
        self.semesters.iter().find(|s| s.index == index)
    }

    /// Semester whose window contains `timestamp`.
    pub fn semester_of(&self, timestamp: i64) -> Option<u32> {
        self.semesters
            .iter()
            .find(|s| s.start <= timestamp && timestamp <= s.end)
            .map(|s| s.index)
    }
}

impl<'de> Deserialize<'de> for SemesterCalendar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let semesters = Vec::<Semester>::deserialize(d)?;
        SemesterCalendar::new(semesters).map_err(de::Error::custom)
    }
}

/// Contents of `schema.json`: attributes in file order plus the calendar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaFile {
    pub schema: AttributeSchema,
    pub calendar: SemesterCalendar,
}

impl Serialize for SchemaFile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.schema.len() + 1))?;
        for attr in self.schema.attributes() {
            map.serialize_entry(&attr.name, &attr.values)?;
        }
        map.serialize_entry("calendar", &self.calendar)?;
        map.end()
    }
}

/// Raw map entries in file order; duplicates are kept so they can be reported.
struct RawSchema {
    attributes: Vec<(String, Vec<String>)>,
    calendar: Option<Vec<Semester>>,
}

impl<'de> Deserialize<'de> for RawSchema {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RawVisitor;
        impl<'de> Visitor<'de> for RawVisitor {
            type Value = RawSchema;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping attribute names to value arrays")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<RawSchema, A::Error> {
                let mut raw = RawSchema {
                    attributes: Vec::new(),
                    calendar: None,
                };
                while let Some(key) = map.next_key::<String>()? {
                    if key == "calendar" {
                        if raw.calendar.is_some() {
                            return Err(de::Error::custom("`calendar` given twice"));
                        }
                        raw.calendar = Some(map.next_value()?);
                    } else {
                        let values: Vec<String> = map.next_value()?;
                        raw.attributes.push((key, values));
                    }
                }
                Ok(raw)
            }
        }
        d.deserialize_map(RawVisitor)
    }
}

/// 1-based line of the `occurrence`-th appearance of `"key":` in `text`.
fn key_line(text: &str, key: &str, occurrence: usize) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let mut seen = 0;
    let mut from = 0;
    while let Some(pos) = text[from..].find(&needle) {
        let at = from + pos;
        from = at + needle.len();
        if text[from..].trim_start().starts_with(':') {
            if seen == occurrence {
                return Some(text[..at].matches('\n').count() + 1);
            }
            seen += 1;
        }
    }
    None
}

impl SchemaFile {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let raw: RawSchema = serde_json::from_str(text)
            .map_err(|e| Error::parse(file, format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
        let at = |key: &str, occurrence: usize| match key_line(text, key, occurrence) {
            Some(line) => format!("line {line}, field `{key}`"),
            None => format!("field `{key}`"),
        };

        let mut seen = HashSet::new();
        for (name, values) in &raw.attributes {
            if !seen.insert(name.as_str()) {
                return Err(Error::parse(
                    file,
                    at(name, 1),
                    format!("attribute `{name}` is defined twice"),
                ));
            }
            if values.len() < 2 {
                return Err(Error::parse(
                    file,
                    at(name, 0),
                    format!("attribute `{name}` needs at least 2 values"),
                ));
            }
            let distinct: HashSet<&String> = values.iter().collect();
            if distinct.len() != values.len() {
                return Err(Error::parse(
                    file,
                    at(name, 0),
                    format!("attribute `{name}` repeats a value"),
                ));
            }
        }
        if raw.attributes.is_empty() {
            return Err(Error::parse(file, "top level", "no attributes defined"));
        }
        let calendar = raw
            .calendar
            .ok_or_else(|| Error::parse(file, "top level", "missing `calendar`"))?;
        let calendar =
            SemesterCalendar::new(calendar).map_err(|e| Error::parse(file, at("calendar", 0), e.to_string()))?;
        let schema = AttributeSchema::new(
            raw.attributes
                .into_iter()
                .map(|(name, values)| Attribute { name, values })
                .collect(),
        )
        .map_err(|e| Error::parse(file, "top level", e.to_string()))?;
        Ok(SchemaFile { schema, calendar })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

pub fn parse_schema(path: impl AsRef<Path>) -> Result<AttributeSchema> {
    SchemaFile::read(path).map(|f| f.schema)
}

pub fn parse_calendar(path: impl AsRef<Path>) -> Result<SemesterCalendar> {
    SchemaFile::read(path).map(|f| f.calendar)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Call,
    Text,
}

/// One call or text message. `duration` is seconds for calls and characters
/// for texts; it is carried through but never used for weighting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommEvent {
    pub timestamp: i64,
    pub sender: String,
    pub receiver: String,
    pub kind: EventKind,
    pub duration: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<CommEvent>,
    pub outside_window: usize,
    pub self_loops: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Nomination {
    pub semester: u32,
    pub ego: String,
    pub alter: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NominationLog {
    pub nominations: Vec<Nomination>,
    pub self_nominations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeRecord {
    pub semester: u32,
    pub node: String,
    pub attribute: String,
    pub value: String,
}

pub const EVENTS_HEADER: [&str; 5] = ["timestamp", "sender", "receiver", "kind", "duration"];
pub const NOMINATIONS_HEADER: [&str; 3] = ["semester", "ego", "alter"];
pub const ATTRIBUTES_HEADER: [&str; 4] = ["semester", "node", "attribute", "value"];

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_reader<R: Read>(reader: R, file: &str, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let found = rdr
        .headers()
        .map_err(|e| Error::parse(file, "header", e.to_string()))?
        .clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::parse(
            file,
            "header",
            format!(
                "expected `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(rdr)
}

fn row_location(record: &csv::StringRecord) -> String {
    match record.position() {
        Some(p) => format!("line {}", p.line()),
        None => "row ?".into(),
    }
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str, file: &str) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::parse(file, row_location(record), format!("cannot parse {name} `{raw}`")))
}

fn text_field(record: &csv::StringRecord, idx: usize, name: &str, file: &str) -> Result<String> {
    match record.get(idx) {
        Some(v) if !v.is_empty() => Ok(v.to_string()),
        _ => Err(Error::parse(file, row_location(record), format!("empty {name}"))),
    }
}

fn records<R: Read>(rdr: &mut csv::Reader<R>, file: &str) -> Result<Vec<csv::StringRecord>> {
    rdr.records()
        .map(|r| {
            r.map_err(|e| {
                let loc = e
                    .position()
                    .map(|p| format!("line {}", p.line()))
                    .unwrap_or_else(|| "row ?".into());
                Error::parse(file, loc, e.to_string())
            })
        })
        .collect()
}

/// Reads an event log. Events outside every semester window and self-loops
/// are dropped and counted; the result is sorted by timestamp (stable).
pub fn read_events<R: Read>(reader: R, file: &str, calendar: &SemesterCalendar) -> Result<EventLog> {
    let mut rdr = csv_reader(reader, file, &EVENTS_HEADER)?;
    let mut log = EventLog::default();
    for record in records(&mut rdr, file)? {
        let kind = match record.get(3).unwrap_or("") {
            "call" => EventKind::Call,
            "text" => EventKind::Text,
            other => {
                return Err(Error::parse(
                    file,
                    row_location(&record),
                    format!("kind `{other}` is neither call nor text"),
                ))
            }
        };
        let event = CommEvent {
            timestamp: field(&record, 0, "timestamp", file)?,
            sender: text_field(&record, 1, "sender", file)?,
            receiver: text_field(&record, 2, "receiver", file)?,
            kind,
            duration: field(&record, 4, "duration", file)?,
        };
        if event.sender == event.receiver {
            log.self_loops += 1;
        } else if calendar.semester_of(event.timestamp).is_none() {
            log.outside_window += 1;
        } else {
            log.events.push(event);
        }
    }
    log.events.sort_by_key(|e| e.timestamp);
    Ok(log)
}

pub fn parse_events(path: impl AsRef<Path>, calendar: &SemesterCalendar) -> Result<EventLog> {
    let path = path.as_ref();
    read_events(open(path)?, &path.display().to_string(), calendar)
}

/// Reads friendship nominations. Self-nominations are dropped and counted,
/// repeated rows collapse, and an ego naming more than
/// [`MAX_NOMINATIONS`] alters in one semester is an error.
pub fn read_nominations<R: Read>(reader: R, file: &str) -> Result<NominationLog> {
    let mut rdr = csv_reader(reader, file, &NOMINATIONS_HEADER)?;
    let mut log = NominationLog::default();
    let mut seen = BTreeSet::new();
    let mut per_ego: HashMap<(u32, String), usize> = HashMap::new();
    for record in records(&mut rdr, file)? {
        let semester: u32 = field(&record, 0, "semester", file)?;
        if semester == 0 {
            return Err(Error::parse(file, row_location(&record), "semesters are 1-based"));
        }
        let nom = Nomination {
            semester,
            ego: text_field(&record, 1, "ego", file)?,
            alter: text_field(&record, 2, "alter", file)?,
        };
        if nom.ego == nom.alter {
            log.self_nominations += 1;
            continue;
        }
        if !seen.insert(nom.clone()) {
            continue;
        }
        let count = per_ego.entry((nom.semester, nom.ego.clone())).or_default();
        *count += 1;
        if *count > MAX_NOMINATIONS {
            return Err(Error::parse(
                file,
                row_location(&record),
                format!(
                    "`{}` nominates more than {MAX_NOMINATIONS} alters in semester {}",
                    nom.ego, nom.semester
                ),
            ));
        }
        log.nominations.push(nom);
    }
    Ok(log)
}

pub fn parse_nominations(path: impl AsRef<Path>) -> Result<NominationLog> {
    let path = path.as_ref();
    read_nominations(open(path)?, &path.display().to_string())
}

/// Reads survey answers, checking every (attribute, value) against `schema`.
pub fn read_attributes<R: Read>(reader: R, file: &str, schema: &AttributeSchema) -> Result<Vec<AttributeRecord>> {
    let mut rdr = csv_reader(reader, file, &ATTRIBUTES_HEADER)?;
    let mut out = Vec::new();
    let mut seen: HashMap<(u32, String, String), String> = HashMap::new();
    for record in records(&mut rdr, file)? {
        let rec = AttributeRecord {
            semester: field(&record, 0, "semester", file)?,
            node: text_field(&record, 1, "node", file)?,
            attribute: text_field(&record, 2, "attribute", file)?,
            value: text_field(&record, 3, "value", file)?,
        };
        if rec.semester == 0 {
            return Err(Error::parse(file, row_location(&record), "semesters are 1-based"));
        }
        if schema.attribute_index(&rec.attribute).is_none() {
            return Err(Error::parse(
                file,
                row_location(&record),
                format!("unknown attribute `{}`", rec.attribute),
            ));
        }
        if !schema.contains(&rec.attribute, &rec.value) {
            return Err(Error::parse(
                file,
                row_location(&record),
                format!("value `{}` is not allowed for `{}`", rec.value, rec.attribute),
            ));
        }
        let key = (rec.semester, rec.node.clone(), rec.attribute.clone());
        match seen.get(&key) {
            Some(v) if *v != rec.value => {
                return Err(Error::parse(
                    file,
                    row_location(&record),
                    format!("conflicting values for `{}`/`{}`", rec.node, rec.attribute),
                ))
            }
            Some(_) => continue,
            None => {
                seen.insert(key, rec.value.clone());
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_attributes(path: impl AsRef<Path>, schema: &AttributeSchema) -> Result<Vec<AttributeRecord>> {
    let path = path.as_ref();
    read_attributes(open(path)?, &path.display().to_string(), schema)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Require both endpoints to nominate each other for a cognitive edge.
    pub mutual_nominations: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestWarnings {
    /// Node ids seen in events or nominations without any attribute history.
    pub unknown_nodes: BTreeSet<String>,
    /// Events or nominations dropped because an endpoint was not yet a participant.
    pub dropped_events: usize,
    pub dropped_nominations: usize,
}

impl IngestWarnings {
    pub fn is_empty(&self) -> bool {
        self.unknown_nodes.is_empty() && self.dropped_events == 0 && self.dropped_nominations == 0
    }
}

#[derive(Clone, Debug)]
pub struct SnapshotSet {
    pub snapshots: Vec<Snapshot>,
    pub warnings: IngestWarnings,
}

/// Assembles one snapshot per calendar semester.
///
/// A node belongs to semester `k` once it has at least one attribute record
/// in a semester `<= k`; each attribute carries forward its latest earlier
/// value. Behavioral edges exist between participants with at least one
/// event in the semester window, weighted by [`edge_weight`]. Cognitive
/// edges join participants where either (or, with `mutual_nominations`,
/// both) nominated the other in that semester.
pub fn build_snapshots(
    events: &[CommEvent],
    nominations: &[Nomination],
    attributes: &[AttributeRecord],
    calendar: &SemesterCalendar,
    schema: &AttributeSchema,
    options: BuildOptions,
) -> Result<SnapshotSet> {
    for rec in attributes {
        if !schema.contains(&rec.attribute, &rec.value) {
            return Err(Error::Schema(format!(
                "record for `{}` has value `{}` outside `{}`",
                rec.node, rec.value, rec.attribute
            )));
        }
    }

    // node -> attribute -> [(semester, value)] ordered by semester
    let mut history: BTreeMap<&str, BTreeMap<&str, BTreeMap<u32, &str>>> = BTreeMap::new();
    for rec in attributes {
        history
            .entry(&rec.node)
            .or_default()
            .entry(&rec.attribute)
            .or_default()
            .insert(rec.semester, &rec.value);
    }
    let first_seen: HashMap<&str, u32> = history
        .iter()
        .map(|(node, attrs)| {
            let first = attrs
                .values()
                .filter_map(|h| h.keys().next().copied())
                .min()
                .unwrap_or(u32::MAX);
            (*node, first)
        })
        .collect();

    let mut warnings = IngestWarnings::default();
    let participant = |id: &str, semester: u32| first_seen.get(id).is_some_and(|&f| f <= semester);

    let mut snapshots = Vec::with_capacity(calendar.len());
    for sem in calendar.semesters() {
        let k = sem.index;
        let nodes: Vec<Node> = history
            .iter()
            .filter(|(id, _)| participant(id, k))
            .map(|(id, attrs)| Node {
                id: id.to_string(),
                attributes: attrs
                    .iter()
                    .filter_map(|(attr, h)| {
                        h.range(..=k)
                            .next_back()
                            .map(|(_, v)| (attr.to_string(), v.to_string()))
                    })
                    .collect(),
            })
            .collect();

        let mut counts: BTreeMap<(&str, &str), (u64, u64)> = BTreeMap::new();
        for e in events
            .iter()
            .filter(|e| sem.start <= e.timestamp && e.timestamp <= sem.end)
        {
            if e.sender == e.receiver {
                continue;
            }
            if !participant(&e.sender, k) || !participant(&e.receiver, k) {
                for id in [&e.sender, &e.receiver] {
                    if !history.contains_key(id.as_str()) {
                        warnings.unknown_nodes.insert(id.clone());
                    }
                }
                warnings.dropped_events += 1;
                continue;
            }
            let key = if e.sender < e.receiver {
                (e.sender.as_str(), e.receiver.as_str())
            } else {
                (e.receiver.as_str(), e.sender.as_str())
            };
            let c = counts.entry(key).or_default();
            match e.kind {
                EventKind::Call => c.0 += 1,
                EventKind::Text => c.1 += 1,
            }
        }
        let behavioral = counts
            .into_iter()
            .map(|((a, b), (calls, texts))| Ok((a.to_string(), b.to_string(), edge_weight(calls, texts)?)))
            .collect::<Result<Vec<_>>>()?;

        let mut directed: BTreeSet<(&str, &str)> = BTreeSet::new();
        for n in nominations.iter().filter(|n| n.semester == k) {
            if n.ego == n.alter {
                continue;
            }
            if !participant(&n.ego, k) || !participant(&n.alter, k) {
                for id in [&n.ego, &n.alter] {
                    if !history.contains_key(id.as_str()) {
                        warnings.unknown_nodes.insert(id.clone());
                    }
                }
                warnings.dropped_nominations += 1;
                continue;
            }
            directed.insert((&n.ego, &n.alter));
        }
        let cognitive: BTreeSet<(String, String)> = directed
            .iter()
            .filter(|(a, b)| !options.mutual_nominations || directed.contains(&(*b, *a)))
            .map(|&(a, b)| {
                if a < b {
                    (a.to_string(), b.to_string())
                } else {
                    (b.to_string(), a.to_string())
                }
            })
            .collect();

        snapshots.push(Snapshot::new(k, nodes, behavioral, cognitive)?);
    }
    Ok(SnapshotSet { snapshots, warnings })
}

pub fn snapshot_file_name(semester: u32) -> String {
    format!("snapshot_{semester}.json")
}

pub fn write_snapshot(path: impl AsRef<Path>, snapshot: &Snapshot) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(snapshot)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            path.display().to_string(),
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// Writes `snapshot_<k>.json` for every snapshot and returns the paths.
pub fn write_snapshots(dir: impl AsRef<Path>, snapshots: &[Snapshot]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    snapshots
        .iter()
        .map(|s| {
            let path = dir.join(snapshot_file_name(s.semester()));
            write_snapshot(&path, s).map(|_| path)
        })
        .collect()
}

/// Reads every `snapshot_<k>.json` in `dir`, ordered by semester.
pub fn read_snapshots(dir: impl AsRef<Path>) -> Result<Vec<Snapshot>> {
    let dir = dir.as_ref();
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(k) = name.strip_prefix("snapshot_").and_then(|r| r.strip_suffix(".json")) {
            if let Ok(k) = k.parse::<u32>() {
                found.push((k, path));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no snapshot_<k>.json files in {}",
            dir.display()
        )));
    }
    found.sort();
    found.into_iter().map(|(_, p)| read_snapshot(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NetworkKind;

    const SCHEMA: &str = r#"{
  "political_views": ["conservative", "moderate", "liberal"],
  "parental_income": ["low", "high"],
  "calendar": [
    {"index": 1, "start": 1313971200, "end": 1324079999},
    {"index": 2, "start": 1326067200, "end": 1336175999}
  ]
}"#;

    fn schema_file() -> SchemaFile {
        SchemaFile::parse(SCHEMA, "schema.json").unwrap()
    }

    #[test]
    fn schema_keeps_file_order() {
        let f = SchemaFile::parse(
            r#"{"political_views": ["conservative", "moderate", "liberal"], "calendar": [{"index":1,"start":0,"end":10}]}"#,
            "s",
        )
        .unwrap();
        assert_eq!(f.schema.len(), 1);
        assert_eq!(f.schema.attributes()[0].values, ["conservative", "moderate", "liberal"]);

        let full = schema_file();
        assert_eq!(
            full.schema.names().collect::<Vec<_>>(),
            ["political_views", "parental_income"]
        );
        let text = serde_json::to_string(&full).unwrap();
        assert_eq!(SchemaFile::parse(&text, "again").unwrap(), full);
    }

    #[test]
    fn schema_errors() {
        let empty = SchemaFile::parse(r#"{"calendar": [{"index":1,"start":0,"end":10}]}"#, "s");
        assert!(empty.is_err());

        let dup = "{\n \"a\": [\"x\", \"y\"],\n \"a\": [\"x\", \"z\"],\n \"calendar\": [{\"index\":1,\"start\":0,\"end\":1}]\n}";
        let err = SchemaFile::parse(dup, "s").unwrap_err().to_string();
        assert!(err.contains("`a`") && err.contains("line 3"), "{err}");

        let single = r#"{"a": ["x"], "calendar": [{"index":1,"start":0,"end":1}]}"#;
        assert!(SchemaFile::parse(single, "s")
            .unwrap_err()
            .to_string()
            .contains("at least 2"));

        let overlap =
            r#"{"a": ["x","y"], "calendar": [{"index":1,"start":0,"end":10},{"index":2,"start":5,"end":20}]}"#;
        assert!(SchemaFile::parse(overlap, "s").is_err());
    }

    #[test]
    fn event_rows() {
        let cal = SemesterCalendar::four_semesters();
        let csv = "timestamp,sender,receiver,kind,duration\n\
                   1317600000,A,B,call,120\n\
                   1317600100,C,C,text,12\n\
                   1339000000,A,B,text,5\n";
        let log = read_events(csv.as_bytes(), "events.csv", &cal).unwrap();
        assert_eq!(log.events.len(), 1);
        assert_eq!(
            log.events[0],
            CommEvent {
                timestamp: 1317600000,
                sender: "A".into(),
                receiver: "B".into(),
                kind: EventKind::Call,
                duration: 120
            }
        );
        assert_eq!(log.self_loops, 1);
        // June 2012 falls in the summer gap.
        assert_eq!(log.outside_window, 1);

        let bad = "timestamp,sender,receiver,kind,duration\n1317600000,A,B,call,120\nnot-a-time,A,B,call,1\n";
        let err = read_events(bad.as_bytes(), "events.csv", &cal).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");

        let wrong_kind = "timestamp,sender,receiver,kind,duration\n1317600000,A,B,email,1\n";
        assert!(read_events(wrong_kind.as_bytes(), "e", &cal).is_err());
        let no_header = "1317600000,A,B,call,120\n";
        assert!(read_events(no_header.as_bytes(), "e", &cal).is_err());
    }

    #[test]
    fn nomination_limit() {
        let mut csv = String::from("semester,ego,alter\n");
        for i in 0..3 {
            csv += &format!("1,A,B{i}\n");
        }
        assert_eq!(read_nominations(csv.as_bytes(), "n").unwrap().nominations.len(), 3);

        let mut csv = String::from("semester,ego,alter\n");
        for i in 0..21 {
            csv += &format!("1,A,B{i}\n");
        }
        assert!(read_nominations(csv.as_bytes(), "n").is_err());

        // 20 per semester is fine even when spread over two semesters
        let mut csv = String::from("semester,ego,alter\n");
        for i in 0..20 {
            csv += &format!("1,A,B{i}\n2,A,B{i}\n");
        }
        assert_eq!(read_nominations(csv.as_bytes(), "n").unwrap().nominations.len(), 40);
    }

    #[test]
    fn attribute_validation() {
        let f = schema_file();
        let ok = "semester,node,attribute,value\n1,A,political_views,liberal\n";
        assert_eq!(read_attributes(ok.as_bytes(), "a", &f.schema).unwrap().len(), 1);
        let bad = "semester,node,attribute,value\n1,A,political_views,liberal\n1,B,political_views,centrist\n";
        let err = read_attributes(bad.as_bytes(), "a", &f.schema).unwrap_err().to_string();
        assert!(err.contains("centrist") && err.contains("line 3"), "{err}");
    }

    fn rec(semester: u32, node: &str, attribute: &str, value: &str) -> AttributeRecord {
        AttributeRecord {
            semester,
            node: node.into(),
            attribute: attribute.into(),
            value: value.into(),
        }
    }

    fn event(ts: i64, a: &str, b: &str, kind: EventKind) -> CommEvent {
        CommEvent {
            timestamp: ts,
            sender: a.into(),
            receiver: b.into(),
            kind,
            duration: 1,
        }
    }

    #[test]
    fn snapshot_assembly() {
        let f = schema_file();
        let attrs = vec![
            rec(1, "A", "political_views", "liberal"),
            rec(1, "A", "parental_income", "high"),
            rec(2, "A", "political_views", "moderate"),
            rec(1, "B", "political_views", "liberal"),
            rec(1, "C", "political_views", "conservative"),
        ];
        let s1 = 1_317_600_000;
        let events = vec![
            event(s1, "A", "B", EventKind::Call),
            event(s1 + 5, "B", "A", EventKind::Text),
            event(s1 + 9, "A", "B", EventKind::Text),
            event(s1 + 9, "A", "Z", EventKind::Text),
        ];
        let noms = vec![Nomination {
            semester: 2,
            ego: "A".into(),
            alter: "B".into(),
        }];
        let set = build_snapshots(&events, &noms, &attrs, &f.calendar, &f.schema, BuildOptions::default()).unwrap();
        let [one, two] = &set.snapshots[..] else {
            panic!("expected two snapshots")
        };

        assert_eq!(one.weight_between("A", "B"), Some(12));
        assert!(two.weight_between("A", "B").is_none());
        assert!(!one.has_edge_between(NetworkKind::Cognitive, "A", "B"));
        assert!(two.has_edge_between(NetworkKind::Cognitive, "A", "B"));
        assert!(two.has_edge_between(NetworkKind::Cognitive, "B", "A"));

        let a2 = two.index_of("A").unwrap();
        assert_eq!(two.attribute(a2, "political_views"), Some("moderate"));
        assert_eq!(two.attribute(a2, "parental_income"), Some("high"));
        let c = two.index_of("C").unwrap();
        assert_eq!(two.attribute(c, "parental_income"), None);

        assert!(set.warnings.unknown_nodes.contains("Z"));
        assert_eq!(set.warnings.dropped_events, 1);

        let mutual = build_snapshots(
            &events,
            &noms,
            &attrs,
            &f.calendar,
            &f.schema,
            BuildOptions {
                mutual_nominations: true,
            },
        )
        .unwrap();
        assert_eq!(mutual.snapshots[1].edge_count(NetworkKind::Cognitive), 0);
    }

    #[test]
    fn snapshot_files_round_trip() {
        let f = schema_file();
        let attrs = vec![
            rec(1, "A", "political_views", "liberal"),
            rec(1, "B", "political_views", "moderate"),
        ];
        let events = vec![event(1_317_600_000, "A", "B", EventKind::Call)];
        let set = build_snapshots(&events, &[], &attrs, &f.calendar, &f.schema, BuildOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_snapshots(dir.path(), &set.snapshots).unwrap();
        assert_eq!(read_snapshots(dir.path()).unwrap(), set.snapshots);
    }
}
