//! Trajectory logs: episodes of (joint state, joint action) steps.
//!
//! Two on-disk formats carry the same records. Each step is one record with
//! the reserved keys `episode`, `step` and `action_<i>`; every other key is a
//! state feature.
//!
//! * JSONL: one JSON object per line, optionally preceded by a schema line
//!   `{"schema":{"features":[...],"team_size":n}}`. The writer always emits
//!   the schema line so empty sets round-trip.
//! * CSV: header `episode,step,action_0,...,<features>`; an empty action
//!   cell means that agent has no logged action at that step.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::agents::{AgentIndex, StateVector};
use crate::error::{Error, Result};

const EPISODE_KEY: &str = "episode";
const STEP_KEY: &str = "step";
const SCHEMA_KEY: &str = "schema";
const ACTION_PREFIX: &str = "action_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!(
                "unknown trajectory format `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeStep {
    pub state: StateVector,
    pub actions: BTreeMap<AgentIndex, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub id: u64,
    pub steps: Vec<TimeStep>,
}

/// A validated collection of episodes sharing one feature schema.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet {
    feature_names: Vec<String>,
    team_size: usize,
    episodes: Vec<Episode>,
    episode_ids: HashMap<u64, usize>,
}

fn is_reserved(name: &str) -> bool {
    name == EPISODE_KEY || name == STEP_KEY || name == SCHEMA_KEY || name.starts_with(ACTION_PREFIX)
}

impl TrajectorySet {
    pub fn empty<I, S>(feature_names: I, team_size: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: BTreeSet<String> = feature_names.into_iter().map(Into::into).collect();
        if let Some(bad) = names.iter().find(|n| n.is_empty() || is_reserved(n)) {
            return Err(Error::Schema(format!("`{bad}` cannot be a feature name")));
        }
        Ok(TrajectorySet {
            feature_names: names.into_iter().collect(),
            team_size,
            episodes: Vec::new(),
            episode_ids: HashMap::new(),
        })
    }

    pub fn new<I, S>(feature_names: I, team_size: usize, episodes: Vec<Episode>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = Self::empty(feature_names, team_size)?;
        for episode in episodes {
            set.push_episode(episode)?;
        }
        Ok(set)
    }

    pub fn push_episode(&mut self, episode: Episode) -> Result<()> {
        if self.episode_ids.contains_key(&episode.id) {
            return Err(Error::Schema(format!(
                "duplicate episode id {}",
                episode.id
            )));
        }
        for step in &episode.steps {
            self.check_step(step)?;
        }
        self.episode_ids.insert(episode.id, self.episodes.len());
        self.episodes.push(episode);
        Ok(())
    }

    fn check_step(&self, step: &TimeStep) -> Result<()> {
        if step.state.len() != self.feature_names.len()
            || !step
                .state
                .names()
                .eq(self.feature_names.iter().map(String::as_str))
        {
            let missing = self
                .feature_names
                .iter()
                .find(|n| step.state.get(n).is_err());
            return Err(match missing {
                Some(name) => Error::MissingFeature(name.clone()),
                None => Error::Schema("state carries undeclared features".into()),
            });
        }
        if step.actions.is_empty() {
            return Err(Error::Schema("step has no actions".into()));
        }
        for (agent, label) in &step.actions {
            agent.check(self.team_size)?;
            if label.is_empty() {
                return Err(Error::Schema("empty action label".into()));
            }
        }
        Ok(())
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn team_size(&self) -> usize {
        self.team_size
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn step_count(&self) -> usize {
        self.episodes.iter().map(|e| e.steps.len()).sum()
    }

    /// Every action label appearing in the set.
    pub fn action_labels(&self) -> BTreeSet<&str> {
        self.episodes
            .iter()
            .flat_map(|e| &e.steps)
            .flat_map(|s| s.actions.values())
            .map(String::as_str)
            .collect()
    }

    /// Fails with a schema error naming the first label outside `alphabet`.
    pub fn check_alphabet(&self, alphabet: &BTreeSet<String>) -> Result<()> {
        match self
            .action_labels()
            .into_iter()
            .find(|l| !alphabet.contains(*l))
        {
            Some(label) => Err(Error::Schema(format!(
                "action `{label}` is not in the action alphabet"
            ))),
            None => Ok(()),
        }
    }

    /// `(state, action of target)` for every step, in episode/step order.
    pub fn iterate_pairs(&self, target: AgentIndex) -> Result<Pairs<'_>> {
        target.check(self.team_size)?;
        Ok(Pairs {
            set: self,
            target,
            episode: 0,
            step: 0,
        })
    }

    /// Batch form of [`iterate_pairs`](Self::iterate_pairs).
    pub fn pairs(&self, target: AgentIndex) -> Result<Vec<(&StateVector, &str)>> {
        self.iterate_pairs(target)?.collect()
    }

    /// Copies the episodes at the given positions into a new set.
    pub fn subset(&self, episodes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut out = Self::empty(self.feature_names.iter().cloned(), self.team_size)?;
        for i in episodes {
            if let Some(e) = self.episodes.get(i) {
                out.push_episode(e.clone())?;
            }
        }
        Ok(out)
    }
}

/// Iterator returned by [`TrajectorySet::iterate_pairs`].
pub struct Pairs<'a> {
    set: &'a TrajectorySet,
    target: AgentIndex,
    episode: usize,
    step: usize,
}

impl<'a> Iterator for Pairs<'a> {
    type Item = Result<(&'a StateVector, &'a str)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let episode = self.set.episodes.get(self.episode)?;
            let Some(step) = episode.steps.get(self.step) else {
                self.episode += 1;
                self.step = 0;
                continue;
            };
            let index = self.step;
            self.step += 1;
            return Some(match step.actions.get(&self.target) {
                Some(action) => Ok((&step.state, action.as_str())),
                None => Err(Error::DataGap {
                    episode: episode.id,
                    step: index,
                    agent: self.target.0,
                }),
            });
        }
    }
}

/// A rejected input row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub reason: String,
}

/// Result of a lenient load. `rows == set.step_count() + rejected.len()`.
#[derive(Clone, Debug)]
pub struct LoadReport {
    pub set: TrajectorySet,
    pub rejected: Vec<RowError>,
    pub rows: usize,
}

struct Record {
    line: usize,
    episode: u64,
    step: u64,
    actions: BTreeMap<AgentIndex, String>,
    state: StateVector,
}

struct Assembler {
    features: Option<Vec<String>>,
    team_size: Option<usize>,
    records: Vec<Record>,
    rejected: Vec<RowError>,
    rows: usize,
}

impl Assembler {
    fn new(features: Option<Vec<String>>, team_size: Option<usize>) -> Self {
        Assembler {
            features,
            team_size,
            records: Vec::new(),
            rejected: Vec::new(),
            rows: 0,
        }
    }

    fn reject(&mut self, line: usize, reason: impl Into<String>) {
        self.rejected.push(RowError {
            line,
            reason: reason.into(),
        });
    }

    fn accept(&mut self, record: Record) {
        let features = self
            .features
            .get_or_insert_with(|| record.state.names().map(str::to_string).collect());
        if !record.state.names().eq(features.iter().map(String::as_str)) {
            let reason = match features.iter().find(|f| record.state.get(f).is_err()) {
                Some(f) => format!("missing feature `{f}`"),
                None => "unexpected feature set".to_string(),
            };
            self.reject(record.line, reason);
            return;
        }
        if let Some(n) = self.team_size {
            if let Some(agent) = record.actions.keys().find(|a| a.0 >= n) {
                let reason = format!("action_{agent} exceeds declared team size {n}");
                self.reject(record.line, reason);
                return;
            }
        }
        self.records.push(record);
    }

    fn finish(self, alphabet: Option<&BTreeSet<String>>) -> Result<LoadReport> {
        let Assembler {
            features,
            team_size,
            records,
            mut rejected,
            rows,
        } = self;
        let team_size = team_size.unwrap_or_else(|| {
            records
                .iter()
                .filter_map(|r| r.actions.keys().next_back())
                .map(|a| a.0 + 1)
                .max()
                .unwrap_or(0)
        });
        let mut set = TrajectorySet::empty(features.unwrap_or_default(), team_size)?;
        let mut last_step: HashMap<u64, u64> = HashMap::new();
        for r in records {
            if let Some(&prev) = last_step.get(&r.episode) {
                if r.step <= prev {
                    rejected.push(RowError {
                        line: r.line,
                        reason: format!(
                            "step {} does not follow step {prev} of episode {}",
                            r.step, r.episode
                        ),
                    });
                    continue;
                }
            }
            last_step.insert(r.episode, r.step);
            let step = TimeStep {
                state: r.state,
                actions: r.actions,
            };
            match set.episode_ids.get(&r.episode) {
                Some(&i) => set.episodes[i].steps.push(step),
                None => {
                    set.episode_ids.insert(r.episode, set.episodes.len());
                    set.episodes.push(Episode {
                        id: r.episode,
                        steps: vec![step],
                    });
                }
            }
        }
        rejected.sort_by_key(|e| e.line);
        if let Some(alphabet) = alphabet {
            set.check_alphabet(alphabet)?;
        }
        Ok(LoadReport {
            set,
            rejected,
            rows,
        })
    }
}

fn parse_action_key(key: &str) -> Option<std::result::Result<AgentIndex, String>> {
    let suffix = key.strip_prefix(ACTION_PREFIX)?;
    Some(match suffix.parse::<usize>() {
        Ok(i) if suffix == i.to_string() => Ok(AgentIndex(i)),
        _ => Err(format!("bad action column `{key}`")),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaLine {
    schema: SchemaBody,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaBody {
    features: Vec<String>,
    team_size: usize,
}

fn jsonl_record(line: usize, obj: Map<String, Value>) -> std::result::Result<Record, String> {
    let mut episode = None;
    let mut step = None;
    let mut actions = BTreeMap::new();
    let mut state = StateVector::new();
    for (key, value) in obj {
        if key == EPISODE_KEY || key == STEP_KEY {
            let n = value
                .as_u64()
                .ok_or_else(|| format!("`{key}` must be a non-negative integer"))?;
            if key == EPISODE_KEY {
                episode = Some(n);
            } else {
                step = Some(n);
            }
        } else if let Some(agent) = parse_action_key(&key) {
            let agent = agent?;
            match value {
                Value::String(s) if !s.is_empty() => {
                    actions.insert(agent, s);
                }
                _ => return Err(format!("`{key}` must be a non-empty string")),
            }
        } else if key == SCHEMA_KEY {
            return Err("schema record must be the first line".into());
        } else {
            let v = value
                .as_f64()
                .ok_or_else(|| format!("feature `{key}` must be a number"))?;
            state.insert(key, v).map_err(|e| e.to_string())?;
        }
    }
    if actions.is_empty() {
        return Err("record has no action_<i> field".into());
    }
    Ok(Record {
        line,
        episode: episode.ok_or("missing `episode`")?,
        step: step.ok_or("missing `step`")?,
        actions,
        state,
    })
}

fn parse_jsonl(input: &str, alphabet: Option<&BTreeSet<String>>) -> Result<LoadReport> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .peekable();
    let mut asm = Assembler::new(None, None);
    while let Some((_, l)) = lines.peek() {
        if l.trim().is_empty() {
            lines.next();
        } else {
            break;
        }
    }
    if let Some(&(line, text)) = lines.peek() {
        if text.trim_start().starts_with("{\"schema\"") {
            let schema: SchemaLine = serde_json::from_str(text).map_err(|e| Error::Parse {
                line,
                reason: format!("bad schema line: {e}"),
            })?;
            let set = TrajectorySet::empty(schema.schema.features, schema.schema.team_size)?;
            asm = Assembler::new(Some(set.feature_names), Some(set.team_size));
            lines.next();
        }
    }
    for (line, text) in lines {
        if text.trim().is_empty() {
            continue;
        }
        asm.rows += 1;
        let obj = match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(obj)) => obj,
            Ok(_) => {
                asm.reject(line, "record is not a JSON object");
                continue;
            }
            Err(e) => {
                asm.reject(line, e.to_string());
                continue;
            }
        };
        match jsonl_record(line, obj) {
            Ok(record) => asm.accept(record),
            Err(reason) => asm.reject(line, reason),
        }
    }
    asm.finish(alphabet)
}

enum Column {
    Episode,
    Step,
    Action(AgentIndex),
    Feature(String),
}

fn parse_csv(input: &str, alphabet: Option<&BTreeSet<String>>) -> Result<LoadReport> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        None => return Assembler::new(None, None).finish(alphabet),
        Some(Err(e)) => {
            return Err(Error::Parse {
                line: 1,
                reason: e.to_string(),
            })
        }
        Some(Ok(h)) => h,
    };
    let mut columns = Vec::with_capacity(header.len());
    let mut features = Vec::new();
    let mut agents = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for name in header.iter() {
        if !seen.insert(name) {
            return Err(Error::Schema(format!("duplicate column `{name}`")));
        }
        columns.push(match name {
            EPISODE_KEY => Column::Episode,
            STEP_KEY => Column::Step,
            _ => match parse_action_key(name) {
                Some(Ok(agent)) => {
                    agents.insert(agent.0);
                    Column::Action(agent)
                }
                Some(Err(reason)) => return Err(Error::Schema(reason)),
                None => {
                    features.push(name.to_string());
                    Column::Feature(name.to_string())
                }
            },
        });
    }
    for required in [EPISODE_KEY, STEP_KEY] {
        if !seen.contains(required) {
            return Err(Error::Schema(format!("missing `{required}` column")));
        }
    }
    let team_size = agents.len();
    if agents.iter().enumerate().any(|(i, &a)| i != a) {
        return Err(Error::Schema(
            "action columns must be action_0..action_<n-1>".into(),
        ));
    }
    features.sort();
    let set = TrajectorySet::empty(features, team_size)?;
    let mut asm = Assembler::new(Some(set.feature_names), Some(team_size));

    for result in records {
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                asm.rows += 1;
                asm.reject(line, e.to_string());
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        asm.rows += 1;
        if record.len() != columns.len() {
            asm.reject(
                line,
                format!("expected {} fields, found {}", columns.len(), record.len()),
            );
            continue;
        }
        match csv_record(line, &columns, &record) {
            Ok(r) => asm.accept(r),
            Err(reason) => asm.reject(line, reason),
        }
    }
    asm.finish(alphabet)
}

fn csv_record(
    line: usize,
    columns: &[Column],
    record: &csv::StringRecord,
) -> std::result::Result<Record, String> {
    let mut episode = 0;
    let mut step = 0;
    let mut actions = BTreeMap::new();
    let mut state = StateVector::new();
    for (column, field) in columns.iter().zip(record.iter()) {
        match column {
            Column::Episode => {
                episode = field
                    .parse()
                    .map_err(|_| format!("bad episode `{field}`"))?
            }
            Column::Step => step = field.parse().map_err(|_| format!("bad step `{field}`"))?,
            Column::Action(agent) => {
                if !field.is_empty() {
                    actions.insert(*agent, field.to_string());
                }
            }
            Column::Feature(name) => {
                let v: f64 = field
                    .parse()
                    .map_err(|_| format!("feature `{name}`: bad number `{field}`"))?;
                state.insert(name.clone(), v).map_err(|e| e.to_string())?;
            }
        }
    }
    if actions.is_empty() {
        return Err("row has no actions".into());
    }
    Ok(Record {
        line,
        episode,
        step,
        actions,
        state,
    })
}

/// Parses trajectory text, collecting malformed rows instead of failing.
///
/// Fatal problems (bad CSV header, bad schema line, labels outside
/// `alphabet`) are still errors.
pub fn parse_trajectories(
    input: &str,
    format: Format,
    alphabet: Option<&BTreeSet<String>>,
) -> Result<LoadReport> {
    match format {
        Format::Jsonl => parse_jsonl(input, alphabet),
        Format::Csv => parse_csv(input, alphabet),
    }
}

/// Lenient load; see [`parse_trajectories`].
pub fn load_trajectories_lenient(
    path: &Path,
    format: Format,
    alphabet: Option<&BTreeSet<String>>,
) -> Result<LoadReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report = parse_trajectories(&text, format, alphabet)?;
    if report.rows == 0 {
        log::warn!("{}: no trajectory records", path.display());
    }
    Ok(report)
}

/// Strict load: the first malformed row is an error.
pub fn load_trajectories(
    path: &Path,
    format: Format,
    alphabet: Option<&BTreeSet<String>>,
) -> Result<TrajectorySet> {
    let report = load_trajectories_lenient(path, format, alphabet)?;
    match report.rejected.into_iter().next() {
        Some(RowError { line, reason }) => Err(Error::Parse { line, reason }),
        None => Ok(report.set),
    }
}

/// Renders `set` in `format`. Output is deterministic.
pub fn render_trajectories(set: &TrajectorySet, format: Format) -> Result<String> {
    match format {
        Format::Jsonl => {
            let mut out = serde_json::to_string(&serde_json::json!({
                SCHEMA_KEY: SchemaBody {
                    features: set.feature_names.clone(),
                    team_size: set.team_size,
                }
            }))?;
            out.push('\n');
            for episode in &set.episodes {
                for (i, step) in episode.steps.iter().enumerate() {
                    let mut obj = Map::new();
                    obj.insert(EPISODE_KEY.into(), episode.id.into());
                    obj.insert(STEP_KEY.into(), i.into());
                    for (agent, label) in &step.actions {
                        obj.insert(format!("{ACTION_PREFIX}{agent}"), label.clone().into());
                    }
                    for (name, &v) in step.state.features() {
                        obj.insert(name.clone(), v.into());
                    }
                    out.push_str(&serde_json::to_string(&obj)?);
                    out.push('\n');
                }
            }
            Ok(out)
        }
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
            let mut header = vec![EPISODE_KEY.to_string(), STEP_KEY.to_string()];
            header.extend((0..set.team_size).map(|i| format!("{ACTION_PREFIX}{i}")));
            header.extend(set.feature_names.iter().cloned());
            let csv_err = |e: csv::Error| Error::Schema(e.to_string());
            writer.write_record(&header).map_err(csv_err)?;
            for episode in &set.episodes {
                for (i, step) in episode.steps.iter().enumerate() {
                    let mut row = vec![episode.id.to_string(), i.to_string()];
                    row.extend((0..set.team_size).map(|a| {
                        step.actions
                            .get(&AgentIndex(a))
                            .cloned()
                            .unwrap_or_default()
                    }));
                    row.extend(step.state.features().values().map(|v| format!("{v:?}")));
                    writer.write_record(&row).map_err(csv_err)?;
                }
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| Error::Schema(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

pub fn write_trajectories(set: &TrajectorySet, path: &Path, format: Format) -> Result<()> {
    let text = render_trajectories(set, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
