//! Detector event records and their binary interchange format.
//!
//! A file is the 4-byte magic `FRSN`, one version byte, then a sequence of
//! 9-byte little-endian records: one channel byte followed by a `u64`
//! timestamp in picoseconds. Channel bit 0 selects the side (0 = start,
//! 1 = stop) and bit 1 the output port (0 = `+`, 1 = `−`), so the monitored
//! `+` outputs are channels 0 and 1.

use std::cmp::Ordering;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::Sign;

pub const MAGIC: &[u8; 4] = b"FRSN";
pub const FORMAT_VERSION: u8 = 1;
pub const RECORD_LEN: usize = 9;

/// Picoseconds per second.
pub const PS_PER_S: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// Detector after interferometer 1; starts the TPHC.
    Start,
    /// Detector after interferometer 2; stops the TPHC.
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub side: Side,
    pub port: Sign,
}

impl Channel {
    pub const START_PLUS: Channel = Channel::new(Side::Start, Sign::Plus);
    pub const STOP_PLUS: Channel = Channel::new(Side::Stop, Sign::Plus);
    pub const START_MINUS: Channel = Channel::new(Side::Start, Sign::Minus);
    pub const STOP_MINUS: Channel = Channel::new(Side::Stop, Sign::Minus);

    pub const fn new(side: Side, port: Sign) -> Self {
        Channel { side, port }
    }

    pub fn code(self) -> u8 {
        let side = match self.side {
            Side::Start => 0,
            Side::Stop => 1,
        };
        side | ((self.port.index() as u8) << 1)
    }

    pub fn from_code(code: u8) -> Option<Channel> {
        if code > 3 {
            return None;
        }
        let side = if code & 1 == 0 { Side::Start } else { Side::Stop };
        Some(Channel::new(side, Sign::from_index((code >> 1) as usize)))
    }
}

/// One detector click.
///
/// Records order by timestamp, then by channel code, which is the order of
/// every stream produced by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub channel: Channel,
    pub timestamp_ps: u64,
}

impl DetectionRecord {
    pub fn new(channel: Channel, timestamp_ps: u64) -> Self {
        DetectionRecord { channel, timestamp_ps }
    }

    fn key(&self) -> (u64, u8) {
        (self.timestamp_ps, self.channel.code())
    }

    pub fn to_bytes(&self) -> [u8; RECORD_LEN] {
        let mut out = [0u8; RECORD_LEN];
        out[0] = self.channel.code();
        out[1..].copy_from_slice(&self.timestamp_ps.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; RECORD_LEN]) -> Result<Self> {
        let channel =
            Channel::from_code(bytes[0]).ok_or_else(|| Error::Format(format!("invalid channel byte {}", bytes[0])))?;
        let mut ts = [0u8; 8];
        ts.copy_from_slice(&bytes[1..]);
        Ok(DetectionRecord::new(channel, u64::from_le_bytes(ts)))
    }
}

impl Ord for DetectionRecord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for DetectionRecord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn write_records<W: Write>(mut out: W, records: &[DetectionRecord]) -> Result<()> {
    let io = |e| Error::io("writing detection records", e);
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&[FORMAT_VERSION]).map_err(io)?;
    let mut buf = Vec::with_capacity(records.len() * RECORD_LEN);
    for r in records {
        buf.extend_from_slice(&r.to_bytes());
    }
    out.write_all(&buf).map_err(io)?;
    out.flush().map_err(io)
}

pub fn read_records<R: Read>(mut input: R) -> Result<Vec<DetectionRecord>> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io("reading detection records", e))?;
    if bytes.len() < 5 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing FRSN header".into()));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", bytes[4])));
    }
    let body = &bytes[5..];
    if body.len() % RECORD_LEN != 0 {
        return Err(Error::Format(format!(
            "body length {} is not a multiple of {RECORD_LEN}",
            body.len()
        )));
    }
    body.chunks_exact(RECORD_LEN)
        .map(|c| DetectionRecord::from_bytes(c.try_into().expect("exact chunk")))
        .collect()
}

pub fn seconds_to_ps(t: f64) -> i64 {
    (t * PS_PER_S).round() as i64
}
