//! Run configuration and the on-disk record format.
//!
//! A run file starts with a header object carrying everything needed to
//! replay the run, followed by one row per record. Two encodings share that
//! layout:
//!
//! * `jsonl`: the header object on line 1, one JSON object per row after it.
//! * `csv`: `# ` + header JSON on line 1, a column line, then rows.
//!
//! Checkpoint rows have columns `walker_id,t,z,x`; cycle rows have
//! `walker_id,k,t,z,m,n`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cycles::{CycleRecord, Stop};
use crate::direct::{CheckpointRecord, MAX_TIME};
use crate::error::{invalid, Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Direct,
    Cycles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Jsonl,
    Csv,
}

/// Checkpoint schedule descriptor.
///
/// * `geometric:RATIO[,START]`: `round(START·RATIO^i)` up to the horizon,
///   `START` defaults to 100. `RATIO` may be written `A^B`, e.g. `10^0.25`.
/// * `list:T1,T2,...`: explicit times.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Geometric { ratio: f64, start: u64 },
    List(Vec<u64>),
}

pub const DEFAULT_GEOMETRIC_START: u64 = 100;

impl Schedule {
    pub fn default_geometric() -> Self {
        Schedule::Geometric {
            ratio: 10f64.powf(0.25),
            start: DEFAULT_GEOMETRIC_START,
        }
    }

    /// Checkpoint times not exceeding `horizon`, strictly increasing.
    pub fn resolve(&self, horizon: u64) -> Vec<u64> {
        let mut out: Vec<u64> = match self {
            Schedule::List(v) => v
                .iter()
                .copied()
                .filter(|&t| t >= 1 && t <= horizon)
                .collect(),
            Schedule::Geometric { ratio, start } => {
                let mut v = Vec::new();
                let mut i = 0i32;
                loop {
                    let t = (*start as f64 * ratio.powi(i)).round();
                    if t > horizon as f64 {
                        break;
                    }
                    v.push(t as u64);
                    i += 1;
                }
                v
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn parse_ratio(s: &str) -> Result<f64> {
    let value = match s.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad ratio base {base:?}")))?;
            let exp: f64 = exp
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad ratio exponent {exp:?}")))?;
            base.powf(exp)
        }
        None => s
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad ratio {s:?}")))?,
    };
    if !(value > 1.0) || !value.is_finite() {
        return Err(invalid(format!(
            "geometric ratio must exceed 1, got {value}"
        )));
    }
    Ok(value)
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("geometric:") {
            let (ratio, start) = match rest.split_once(',') {
                Some((r, st)) => (
                    r,
                    st.trim()
                        .parse()
                        .map_err(|_| invalid(format!("bad start {st:?}")))?,
                ),
                None => (rest, DEFAULT_GEOMETRIC_START),
            };
            if start < 1 {
                return Err(invalid("geometric start must be >= 1"));
            }
            Ok(Schedule::Geometric {
                ratio: parse_ratio(ratio)?,
                start,
            })
        } else if let Some(rest) = s.strip_prefix("list:") {
            let mut v = rest
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| {
                    x.trim()
                        .parse::<u64>()
                        .map_err(|_| invalid(format!("bad checkpoint {x:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if v.is_empty() {
                return Err(invalid("checkpoint list is empty"));
            }
            v.sort_unstable();
            v.dedup();
            Ok(Schedule::List(v))
        } else {
            Err(invalid(format!(
                "checkpoint schedule must be geometric:RATIO or list:..., got {s:?}"
            )))
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Geometric { ratio, start } => write!(f, "geometric:{ratio},{start}"),
            Schedule::List(v) => {
                f.write_str("list:")?;
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
        }
    }
}

/// A simulation request. `threads` only affects wall-clock time.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma: f64,
    pub engine: Engine,
    pub t_max: Option<u64>,
    pub k_max: Option<u64>,
    pub walkers: u64,
    pub schedule: Schedule,
    pub seed: u64,
    pub threads: Option<usize>,
    pub format: Format,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() {
            return Err(invalid("gamma must be finite"));
        }
        if self.walkers < 1 {
            return Err(invalid("walkers must be >= 1"));
        }
        match (self.engine, self.t_max, self.k_max) {
            (Engine::Direct, Some(t), None) | (Engine::Cycles, Some(t), None) => {
                if t == 0 || t > MAX_TIME {
                    return Err(invalid("t_max must lie in [1, 2^62]"));
                }
            }
            (Engine::Cycles, None, Some(k)) => {
                if k == 0 {
                    return Err(invalid("k_max must be >= 1"));
                }
            }
            (Engine::Direct, _, _) => {
                return Err(invalid("the direct engine needs --t-max and no --k-max"))
            }
            (Engine::Cycles, _, _) => {
                return Err(invalid(
                    "the cycles engine needs exactly one of --t-max, --k-max",
                ))
            }
        }
        if let Some(0) = self.threads {
            return Err(invalid("threads must be >= 1"));
        }
        if let (Engine::Direct, Some(t)) = (self.engine, self.t_max) {
            if self.schedule.resolve(t).is_empty() {
                return Err(invalid("checkpoint schedule is empty below t_max"));
            }
        }
        Ok(())
    }

    pub fn stop(&self) -> Result<Stop> {
        match (self.t_max, self.k_max) {
            (Some(t), None) => Ok(Stop::Time(t)),
            (None, Some(k)) => Ok(Stop::Cycles(k)),
            _ => Err(invalid("exactly one of t_max, k_max must be set")),
        }
    }

    pub fn checkpoints(&self) -> Vec<u64> {
        self.schedule.resolve(self.t_max.unwrap_or(MAX_TIME))
    }

    pub fn header(&self) -> Header {
        Header {
            kind: "header".into(),
            version: FORMAT_VERSION,
            engine: self.engine,
            gamma: self.gamma,
            seed: self.seed,
            walkers: self.walkers,
            t_max: self.t_max,
            k_max: self.k_max,
            schedule: self.schedule.to_string(),
            checkpoints: match (self.engine, self.t_max) {
                (_, Some(_)) => self.checkpoints(),
                (Engine::Cycles, None) => Vec::new(),
                (Engine::Direct, None) => Vec::new(),
            },
            format: self.format,
        }
    }

    /// Rebuilds the configuration recorded in a header.
    pub fn from_header(h: &Header) -> Result<Self> {
        let cfg = Self {
            gamma: h.gamma,
            engine: h.engine,
            t_max: h.t_max,
            k_max: h.k_max,
            walkers: h.walkers,
            schedule: h.schedule.parse()?,
            seed: h.seed,
            threads: None,
            format: h.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: String,
    pub version: u32,
    pub engine: Engine,
    pub gamma: f64,
    pub seed: u64,
    pub walkers: u64,
    pub t_max: Option<u64>,
    pub k_max: Option<u64>,
    pub schedule: String,
    pub checkpoints: Vec<u64>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    Checkpoints(Vec<CheckpointRecord>),
    Cycles(Vec<CycleRecord>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFile {
    pub header: Header,
    pub data: Data,
}

/// Streaming writer for run files.
pub struct RecordWriter<W: Write> {
    out: W,
    format: Format,
    csv_row: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointCsv {
    walker_id: u64,
    t: u64,
    z: u64,
    x: Option<i64>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut out: W, header: &Header) -> Result<Self> {
        let json = serde_json::to_string(header)?;
        match header.format {
            Format::Jsonl => writeln!(out, "{json}")?,
            Format::Csv => {
                writeln!(out, "# {json}")?;
                match header.engine {
                    Engine::Direct => writeln!(out, "walker_id,t,z,x")?,
                    Engine::Cycles => writeln!(out, "walker_id,k,t,z,m,n")?,
                }
            }
        }
        Ok(Self {
            out,
            format: header.format,
            csv_row: Vec::new(),
        })
    }

    fn write_row<T: Serialize>(&mut self, row: &T) -> Result<()> {
        match self.format {
            Format::Jsonl => {
                serde_json::to_writer(&mut self.out, row)?;
                self.out.write_all(b"\n")?;
            }
            Format::Csv => {
                self.csv_row.clear();
                {
                    let mut w = csv::WriterBuilder::new()
                        .has_headers(false)
                        .from_writer(&mut self.csv_row);
                    w.serialize(row)?;
                    w.flush()?;
                }
                self.out.write_all(&self.csv_row)?;
            }
        }
        Ok(())
    }

    pub fn write_checkpoints(&mut self, rows: &[CheckpointRecord]) -> Result<()> {
        for r in rows {
            match self.format {
                Format::Jsonl => self.write_row(r)?,
                Format::Csv => self.write_row(&CheckpointCsv {
                    walker_id: r.walker_id,
                    t: r.t,
                    z: r.z,
                    x: r.x,
                })?,
            }
        }
        Ok(())
    }

    pub fn write_cycles(&mut self, rows: &[CycleRecord]) -> Result<()> {
        for r in rows {
            self.write_row(r)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_run<W: Write>(out: W, run: &RunFile) -> Result<W> {
    let mut w = RecordWriter::new(out, &run.header)?;
    match &run.data {
        Data::Checkpoints(rows) => w.write_checkpoints(rows)?,
        Data::Cycles(rows) => w.write_cycles(rows)?,
    }
    w.finish()
}

/// Reads any run file produced by [`RecordWriter`]; the encoding is detected
/// from the first byte.
pub fn read_run<R: BufRead>(mut input: R) -> Result<RunFile> {
    let mut first = String::new();
    if input.read_line(&mut first)? == 0 {
        return Err(Error::Schema("empty file".into()));
    }
    let trimmed = first.trim_end();
    let (header, csv_mode) = if let Some(json) = trimmed.strip_prefix("# ") {
        (serde_json::from_str::<Header>(json), true)
    } else {
        (serde_json::from_str::<Header>(trimmed), false)
    };
    let header = header.map_err(|e| Error::Schema(format!("bad header: {e}")))?;
    if header.kind != "header" || header.version != FORMAT_VERSION {
        return Err(Error::Schema(format!(
            "unsupported header kind/version {}/{}",
            header.kind, header.version
        )));
    }
    let data = if csv_mode {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let expected: &[&str] = match header.engine {
            Engine::Direct => &["walker_id", "t", "z", "x"],
            Engine::Cycles => &["walker_id", "k", "t", "z", "m", "n"],
        };
        let cols = rdr
            .headers()
            .map_err(|e| Error::Schema(e.to_string()))?
            .clone();
        if cols.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Schema(format!("unexpected columns {cols:?}")));
        }
        match header.engine {
            Engine::Direct => Data::Checkpoints(
                rdr.deserialize::<CheckpointCsv>()
                    .map(|r| {
                        r.map(|c| CheckpointRecord {
                            walker_id: c.walker_id,
                            t: c.t,
                            z: c.z,
                            x: c.x,
                        })
                        .map_err(|e| Error::Schema(e.to_string()))
                    })
                    .collect::<Result<_>>()?,
            ),
            Engine::Cycles => Data::Cycles(
                rdr.deserialize::<CycleRecord>()
                    .map(|r| r.map_err(|e| Error::Schema(e.to_string())))
                    .collect::<Result<_>>()?,
            ),
        }
    } else {
        let lines = input
            .lines()
            .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()));
        match header.engine {
            Engine::Direct => Data::Checkpoints(
                lines
                    .map(|l| serde_json::from_str(&l?).map_err(|e| Error::Schema(e.to_string())))
                    .collect::<Result<_>>()?,
            ),
            Engine::Cycles => Data::Cycles(
                lines
                    .map(|l| serde_json::from_str(&l?).map_err(|e| Error::Schema(e.to_string())))
                    .collect::<Result<_>>()?,
            ),
        }
    };
    Ok(RunFile { header, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(engine: Engine, format: Format) -> RunConfig {
        RunConfig {
            gamma: 0.25,
            engine,
            t_max: Some(1000),
            k_max: None,
            walkers: 3,
            schedule: Schedule::default_geometric(),
            seed: 42,
            threads: None,
            format,
        }
    }

    #[test]
    fn geometric_schedule_counts() {
        let s: Schedule = "geometric:10^0.25".parse().unwrap();
        let cps = s.resolve(1_000_000);
        assert_eq!(cps.len(), 17);
        assert_eq!(cps[0], 100);
        assert_eq!(*cps.last().unwrap(), 1_000_000);
        let s: Schedule = "geometric:2,1".parse().unwrap();
        assert_eq!(s.resolve(20), vec![1, 2, 4, 8, 16]);
        assert!("geometric:1".parse::<Schedule>().is_err());
        assert!("geometric:x".parse::<Schedule>().is_err());
        assert!("bogus".parse::<Schedule>().is_err());
        assert!("list:".parse::<Schedule>().is_err());
    }

    #[test]
    fn list_schedule() {
        let s: Schedule = "list:30, 10,20,20".parse().unwrap();
        assert_eq!(s, Schedule::List(vec![10, 20, 30]));
        assert_eq!(s.resolve(25), vec![10, 20]);
        assert_eq!(s.to_string().parse::<Schedule>().unwrap(), s);
    }

    #[test]
    fn schedule_descriptor_round_trips() {
        let s = Schedule::default_geometric();
        let back: Schedule = s.to_string().parse().unwrap();
        assert_eq!(back.resolve(1_000_000), s.resolve(1_000_000));
    }

    #[test]
    fn config_validation() {
        let mut c = config(Engine::Direct, Format::Jsonl);
        assert!(c.validate().is_ok());
        c.k_max = Some(5);
        assert!(c.validate().is_err());
        let mut c = config(Engine::Cycles, Format::Jsonl);
        c.t_max = None;
        assert!(c.validate().is_err());
        c.k_max = Some(10);
        assert!(c.validate().is_ok());
        c.walkers = 0;
        assert!(c.validate().is_err());
        let mut c = config(Engine::Direct, Format::Jsonl);
        c.schedule = Schedule::List(vec![5000]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn header_round_trips_config() {
        for engine in [Engine::Direct, Engine::Cycles] {
            let c = config(engine, Format::Csv);
            let back = RunConfig::from_header(&c.header()).unwrap();
            assert_eq!(back.header(), c.header());
        }
    }

    #[test]
    fn rejects_schema_mismatch() {
        assert!(read_run(&b""[..]).is_err());
        assert!(read_run(&b"{\"not\":\"a header\"}\n"[..]).is_err());
        let mut buf = Vec::new();
        let h = config(Engine::Cycles, Format::Jsonl).header();
        writeln!(buf, "{}", serde_json::to_string(&h).unwrap()).unwrap();
        writeln!(buf, "{{\"walker_id\":0,\"t\":1,\"z\":1}}").unwrap();
        assert!(matches!(read_run(&buf[..]), Err(Error::Schema(_))));
        let mut buf = Vec::new();
        let h = config(Engine::Direct, Format::Csv).header();
        writeln!(buf, "# {}", serde_json::to_string(&h).unwrap()).unwrap();
        writeln!(buf, "walker_id,k,t,z,m,n").unwrap();
        assert!(matches!(read_run(&buf[..]), Err(Error::Schema(_))));
    }

    fn arb_checkpoint() -> impl Strategy<Value = CheckpointRecord> {
        (
            any::<u64>(),
            any::<u64>(),
            any::<u64>(),
            proptest::option::of(any::<i64>()),
        )
            .prop_map(|(walker_id, t, z, x)| CheckpointRecord { walker_id, t, z, x })
    }

    fn arb_cycle() -> impl Strategy<Value = CycleRecord> {
        (
            any::<u64>(),
            any::<u64>(),
            any::<u64>(),
            any::<u64>(),
            any::<u64>(),
            any::<u64>(),
        )
            .prop_map(|(walker_id, k, t, z, m, n)| CycleRecord {
                walker_id,
                k,
                t,
                z,
                m,
                n,
            })
    }

    proptest! {
        #[test]
        fn checkpoint_files_round_trip(rows in proptest::collection::vec(arb_checkpoint(), 0..40),
                                       gamma in -5.0f64..5.0, csv in any::<bool>()) {
            let mut c = config(Engine::Direct, if csv { Format::Csv } else { Format::Jsonl });
            c.gamma = gamma;
            let run = RunFile { header: c.header(), data: Data::Checkpoints(rows) };
            let bytes = write_run(Vec::new(), &run).unwrap();
            prop_assert_eq!(read_run(&bytes[..]).unwrap(), run);
        }

        #[test]
        fn cycle_files_round_trip(rows in proptest::collection::vec(arb_cycle(), 0..40),
                                  seed in any::<u64>(), csv in any::<bool>()) {
            let mut c = config(Engine::Cycles, if csv { Format::Csv } else { Format::Jsonl });
            c.seed = seed;
            let run = RunFile { header: c.header(), data: Data::Cycles(rows) };
            let bytes = write_run(Vec::new(), &run).unwrap();
            prop_assert_eq!(read_run(&bytes[..]).unwrap(), run);
        }
    }
}
