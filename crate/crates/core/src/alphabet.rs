//! Symbols, rate tables and per-user feedback traces.
//!
//! A trace is the sequence of MCS indices reported by one user, one sample per
//! feedback instant. Feedback indices `t` count feedback instants, not
//! subframes; `delta` records how many subframes separate two instants.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An MCS index.
pub type Symbol = u16;

/// Lowest and highest spectral efficiencies (bits/symbol) of the MCS range.
pub const MIN_RATE: f64 = 0.1523;
pub const MAX_RATE: f64 = 5.5547;

/// Number of MCS levels used when nothing else is configured.
pub const DEFAULT_ALPHABET_SIZE: usize = 28;

/// Default feedback period in subframes.
pub const DEFAULT_DELTA: u32 = 5;

/// Finite symbol set `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::domain(format!("alphabet size must be at least 2, got {size}")));
        }
        if size > Symbol::MAX as usize + 1 {
            return Err(Error::domain(format!("alphabet size {size} does not fit the symbol type")));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        (s as usize) < self.size
    }

    pub fn check(&self, s: Symbol) -> Result<Symbol> {
        if self.contains(s) {
            Ok(s)
        } else {
            Err(Error::domain(format!("symbol {s} outside alphabet of size {}", self.size)))
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.size).map(|s| s as Symbol)
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self { size: DEFAULT_ALPHABET_SIZE }
    }
}

/// Spectral efficiency per symbol, strictly increasing in the symbol index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    rates: Vec<f64>,
}

impl RateTable {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.len() < 2 {
            return Err(Error::domain("rate table needs at least two entries"));
        }
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::domain(format!("rates must be finite and positive, got {r}")));
        }
        if let Some(w) = rates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "rates must be strictly increasing: rate({}) = {} >= rate({}) = {}",
                w,
                rates[w],
                w + 1,
                rates[w + 1]
            )));
        }
        Ok(Self { rates })
    }

    /// Reads an override table with header `mcs,rate`. Every index in
    /// `0..len` must be present exactly once.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        check_header(&mut rdr, &["mcs", "rate"])?;
        let mut entries = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = record_line(&rec);
            if rec.len() != 2 {
                return Err(parse_err(line, format!("expected 2 fields, found {}", rec.len())));
            }
            let mcs: usize = rec[0].parse().map_err(|e| parse_err(line, format!("bad mcs `{}`: {e}", &rec[0])))?;
            let rate: f64 = rec[1].parse().map_err(|e| parse_err(line, format!("bad rate `{}`: {e}", &rec[1])))?;
            if entries.insert(mcs, rate).is_some() {
                return Err(parse_err(line, format!("duplicate mcs {mcs}")));
            }
        }
        let rates: Vec<f64> = entries.values().copied().collect();
        if entries.keys().copied().ne(0..rates.len()) {
            return Err(Error::domain("rate table indices must be contiguous from 0"));
        }
        Self::new(rates)
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rate(&self, s: Symbol) -> f64 {
        self.rates[s as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }
}

/// Rates for `p` levels: the two published endpoints with the interior
/// geometrically interpolated (uniform spacing in the log domain).
pub fn default_rate_table(p: usize) -> Result<RateTable> {
    if p < 2 {
        return Err(Error::domain(format!("rate table needs p >= 2, got {p}")));
    }
    let (lo, hi) = (MIN_RATE.ln(), MAX_RATE.ln());
    let last = (p - 1) as f64;
    let rates = (0..p)
        .map(|i| match i {
            0 => MIN_RATE,
            i if i == p - 1 => MAX_RATE,
            i => (lo + (hi - lo) * i as f64 / last).exp(),
        })
        .collect();
    RateTable::new(rates)
}

/// Feedback samples of one user, ordered by feedback index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub user_id: String,
    pub samples: Vec<(u64, Symbol)>,
    pub delta: u32,
}

impl Trace {
    /// Builds a trace with consecutive feedback indices `0..symbols.len()`.
    pub fn from_symbols(user_id: impl Into<String>, symbols: &[Symbol]) -> Self {
        Self {
            user_id: user_id.into(),
            samples: symbols.iter().enumerate().map(|(t, &x)| (t as u64, x)).collect(),
            delta: DEFAULT_DELTA,
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.samples.iter().map(|&(_, x)| x).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn validate(&self, alphabet: &Alphabet) -> Result<()> {
        if let Some(w) = self.samples.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::domain(format!(
                "user {}: feedback index {} not strictly after {}",
                self.user_id, w[1].0, w[0].0
            )));
        }
        for &(t, x) in &self.samples {
            if !alphabet.contains(x) {
                return Err(Error::domain(format!(
                    "user {} at t={t}: symbol {x} outside alphabet of size {}",
                    self.user_id,
                    alphabet.size()
                )));
            }
        }
        Ok(())
    }
}

/// Reads a trace CSV (`user_id,t,mcs`). Returns one trace per user, ordered
/// by user id, each sorted by `t`.
pub fn load_traces(path: impl AsRef<Path>, alphabet: &Alphabet) -> Result<Vec<Trace>> {
    let file = std::fs::File::open(path)?;
    read_traces(file, alphabet)
}

pub fn read_traces<R: Read>(reader: R, alphabet: &Alphabet) -> Result<Vec<Trace>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    check_header(&mut rdr, &["user_id", "t", "mcs"])?;
    let mut users: BTreeMap<String, Vec<(u64, Symbol)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        if rec.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let user = rec[0].to_string();
        if user.is_empty() {
            return Err(parse_err(line, "empty user_id"));
        }
        let t: u64 = rec[1].parse().map_err(|e| parse_err(line, format!("bad t `{}`: {e}", &rec[1])))?;
        let x: u64 = rec[2].parse().map_err(|e| parse_err(line, format!("bad mcs `{}`: {e}", &rec[2])))?;
        if x >= alphabet.size() as u64 {
            return Err(Error::domain(format!(
                "line {line}: symbol {x} outside alphabet of size {}",
                alphabet.size()
            )));
        }
        users.entry(user).or_default().push((t, x as Symbol));
    }
    users
        .into_iter()
        .map(|(user_id, mut samples)| {
            samples.sort_by_key(|&(t, _)| t);
            let trace = Trace { user_id, samples, delta: DEFAULT_DELTA };
            trace.validate(alphabet)?;
            Ok(trace)
        })
        .collect()
}

/// Writes traces in the `user_id,t,mcs` format, users in the given order.
pub fn write_traces(path: impl AsRef<Path>, traces: &[Trace]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_traces_to(&mut w, traces)?;
    w.flush()?;
    Ok(())
}

pub fn write_traces_to<W: Write>(w: &mut W, traces: &[Trace]) -> Result<()> {
    writeln!(w, "user_id,t,mcs")?;
    for tr in traces {
        for &(t, x) in &tr.samples {
            writeln!(w, "{},{t},{x}", tr.user_id)?;
        }
    }
    Ok(())
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(parse_err(
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}
