use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One truncation level: generator parameter `d`, optional vector count `n`
/// (`None` means the generator's natural count at `d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LadderLevel {
    pub d: usize,
    pub n: Option<usize>,
}

impl LadderLevel {
    pub fn new(d: usize) -> Self {
        LadderLevel { d, n: None }
    }

    pub fn with_count(d: usize, n: usize) -> Self {
        LadderLevel { d, n: Some(n) }
    }
}

/// Increasing list of truncation levels standing in for `n -> infinity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSchedule {
    pub levels: Vec<LadderLevel>,
    #[serde(default)]
    pub note: String,
}

impl LadderSchedule {
    pub fn new(levels: Vec<LadderLevel>, note: impl Into<String>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidLadder("ladder has no levels".into()));
        }
        for w in levels.windows(2) {
            if w[1].d <= w[0].d {
                return Err(Error::InvalidLadder(format!("d not strictly increasing: {} then {}", w[0].d, w[1].d)));
            }
            if let (Some(a), Some(b)) = (w[0].n, w[1].n) {
                if b <= a {
                    return Err(Error::InvalidLadder(format!("N not strictly increasing: {a} then {b}")));
                }
            }
        }
        Ok(LadderSchedule { levels, note: note.into() })
    }

    /// `d = start, start*factor, ...` up to `end` inclusive.
    pub fn geometric(start: usize, end: usize, factor: usize) -> Result<Self> {
        if factor < 2 || start == 0 || start > end {
            return Err(Error::InvalidLadder(format!("bad geometric ladder {start}..{end}:x{factor}")));
        }
        let mut levels = Vec::new();
        let mut d = start;
        while d <= end {
            levels.push(LadderLevel::new(d));
            d = d.checked_mul(factor).ok_or_else(|| Error::InvalidLadder("ladder overflow".into()))?;
        }
        Self::new(levels, format!("d={start}..{end}:x{factor}"))
    }

    /// `d = start, start+step, ...` up to `end` inclusive.
    pub fn arithmetic(start: usize, end: usize, step: usize) -> Result<Self> {
        if step == 0 || start == 0 || start > end {
            return Err(Error::InvalidLadder(format!("bad arithmetic ladder {start}..{end}:+{step}")));
        }
        let levels = (start..=end).step_by(step).map(LadderLevel::new).collect();
        Self::new(levels, format!("d={start}..{end}:+{step}"))
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn last(&self) -> LadderLevel {
        *self.levels.last().expect("ladder is non-empty")
    }
}

impl FromStr for LadderSchedule {
    type Err = Error;

    /// Grammar: `d=START..END:xFACTOR` or `d=START..END:+STEP`, or a plain
    /// comma list `d=16,32,100`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLadder(format!("cannot parse ladder '{s}'"));
        let body = s.trim().strip_prefix("d=").ok_or_else(bad)?;
        if body.is_empty() {
            return Err(Error::InvalidLadder("ladder has no levels".into()));
        }
        if let Some((range, growth)) = body.split_once(':') {
            let (a, b) = range.split_once("..").ok_or_else(bad)?;
            let start: usize = a.trim().parse().map_err(|_| bad())?;
            let end: usize = b.trim().parse().map_err(|_| bad())?;
            if let Some(f) = growth.strip_prefix('x') {
                return Self::geometric(start, end, f.parse().map_err(|_| bad())?);
            }
            if let Some(st) = growth.strip_prefix('+') {
                return Self::arithmetic(start, end, st.parse().map_err(|_| bad())?);
            }
            return Err(bad());
        }
        let levels = body
            .split(',')
            .map(|t| t.trim().parse::<usize>().map(LadderLevel::new).map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, s.trim())
    }
}

impl fmt::Display for LadderSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ds: Vec<String> = self.levels.iter().map(|l| l.d.to_string()).collect();
        write!(f, "d={}", ds.join(","))
    }
}
