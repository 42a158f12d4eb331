//! Episode traces and their line-oriented text form.
//!
//! ```text
//! T <tick> <x> <y> <PHASE>
//! E <tick> <EVENT>
//! W <wallet|INF>
//! ```
//!
//! Event lines follow the trace line carrying the same tick.

use std::fmt;
use std::str::FromStr;

use crate::gridworld::CellCoord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Outbound,
    TrailReturn,
    RandomReturn,
    BoostedReturn,
    Done,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Outbound,
        Phase::TrailReturn,
        Phase::RandomReturn,
        Phase::BoostedReturn,
        Phase::Done,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Outbound => "OUTBOUND",
            Phase::TrailReturn => "TRAIL_RETURN",
            Phase::RandomReturn => "RANDOM_RETURN",
            Phase::BoostedReturn => "BOOSTED_RETURN",
            Phase::Done => "DONE",
        }
    }

    pub fn is_return(self) -> bool {
        matches!(self, Phase::TrailReturn | Phase::RandomReturn | Phase::BoostedReturn)
    }

    /// Edges of the per-episode phase graph. `OUTBOUND -> DONE` only
    /// happens on a timeout abort.
    pub fn can_transition_to(self, next: Phase) -> bool {
        use Phase::*;
        matches!(
            (self, next),
            (Outbound, TrailReturn)
                | (Outbound, Done)
                | (TrailReturn, RandomReturn)
                | (TrailReturn, Done)
                | (RandomReturn, BoostedReturn)
                | (RandomReturn, Done)
                | (BoostedReturn, Done)
        )
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown phase {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    ParentsFlee,
    TrailLost,
    OgreReached,
    PalaceReached,
    HomeReached,
    Award,
    Timeout,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::ParentsFlee,
        EventKind::TrailLost,
        EventKind::OgreReached,
        EventKind::PalaceReached,
        EventKind::HomeReached,
        EventKind::Award,
        EventKind::Timeout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::ParentsFlee => "PARENTS_FLEE",
            EventKind::TrailLost => "TRAIL_LOST",
            EventKind::OgreReached => "OGRE_REACHED",
            EventKind::PalaceReached => "PALACE_REACHED",
            EventKind::HomeReached => "HOME_REACHED",
            EventKind::Award => "AWARD",
            EventKind::Timeout => "TIMEOUT",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown event {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub tick: u64,
    pub position: CellCoord,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub tick: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub trace: Vec<TraceEntry>,
    pub events: Vec<Event>,
    pub episodes: u32,
    /// Zero while the wallet is empty; `f64::INFINITY` for the unbounded award.
    pub final_wallet: f64,
}

pub fn format_wallet(w: f64) -> String {
    if w.is_infinite() {
        "INF".to_owned()
    } else {
        w.to_string()
    }
}

pub fn parse_wallet(s: &str) -> Result<f64, String> {
    match s {
        "INF" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|_| format!("bad wallet {s:?}")),
    }
}

impl RunRecord {
    pub fn positions(&self) -> Vec<CellCoord> {
        self.trace.iter().map(|t| t.position).collect()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut events = self.events.iter().peekable();
        for t in &self.trace {
            out.push_str(&format!("T {} {} {} {}\n", t.tick, t.position.x, t.position.y, t.phase));
            while let Some(e) = events.next_if(|e| e.tick <= t.tick) {
                out.push_str(&format!("E {} {}\n", e.tick, e.kind));
            }
        }
        for e in events {
            out.push_str(&format!("E {} {}\n", e.tick, e.kind));
        }
        out.push_str(&format!("W {}\n", format_wallet(self.final_wallet)));
        out
    }

    /// Inverse of [`to_text`](Self::to_text). The episode count is not part
    /// of the format and is rebuilt from episode starts in the trace.
    pub fn parse(text: &str) -> Result<RunRecord, String> {
        let mut rec = RunRecord::default();
        let mut wallet = None;
        for (n, line) in text.lines().enumerate() {
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || format!("line {}: malformed {line:?}", n + 1);
            match f.as_slice() {
                ["T", tick, x, y, phase] => rec.trace.push(TraceEntry {
                    tick: tick.parse().map_err(|_| bad())?,
                    position: CellCoord::new(x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?),
                    phase: phase.parse()?,
                }),
                ["E", tick, kind] => rec.events.push(Event {
                    tick: tick.parse().map_err(|_| bad())?,
                    kind: kind.parse()?,
                }),
                ["W", w] => wallet = Some(parse_wallet(w)?),
                [] => {}
                _ => return Err(bad()),
            }
        }
        rec.final_wallet = wallet.ok_or("missing wallet footer")?;
        rec.episodes = rec
            .trace
            .iter()
            .enumerate()
            .filter(|(i, t)| t.phase == Phase::Outbound && (*i == 0 || rec.trace[i - 1].phase != Phase::Outbound))
            .count() as u32;
        Ok(rec)
    }

    /// Check the structural invariants: strictly increasing ticks, every
    /// event tick present in the trace, and phase changes that follow the
    /// episode graph (a return to `OUTBOUND` starts a new episode).
    pub fn validate(&self) -> Result<(), String> {
        for pair in self.trace.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.tick <= a.tick {
                return Err(format!("tick {} follows {}", b.tick, a.tick));
            }
            if a.phase != b.phase && b.phase != Phase::Outbound && !a.phase.can_transition_to(b.phase) {
                return Err(format!("forbidden transition {} -> {} at tick {}", a.phase, b.phase, b.tick));
            }
        }
        for e in &self.events {
            if self.trace.binary_search_by_key(&e.tick, |t| t.tick).is_err() {
                return Err(format!("event {} at tick {} has no trace entry", e.kind, e.tick));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        RunRecord {
            trace: vec![
                TraceEntry {
                    tick: 0,
                    position: CellCoord::new(1, 1),
                    phase: Phase::Outbound,
                },
                TraceEntry {
                    tick: 1,
                    position: CellCoord::new(2, 1),
                    phase: Phase::Outbound,
                },
                TraceEntry {
                    tick: 2,
                    position: CellCoord::new(1, 1),
                    phase: Phase::TrailReturn,
                },
            ],
            events: vec![
                Event {
                    tick: 1,
                    kind: EventKind::ParentsFlee,
                },
                Event {
                    tick: 2,
                    kind: EventKind::HomeReached,
                },
            ],
            episodes: 1,
            final_wallet: f64::INFINITY,
        }
    }

    #[test]
    fn text_round_trip() {
        let rec = sample();
        let text = rec.to_text();
        assert!(text.starts_with("T 0 1 1 OUTBOUND\nT 1 2 1 OUTBOUND\nE 1 PARENTS_FLEE\n"));
        assert!(text.ends_with("W INF\n"));
        assert_eq!(RunRecord::parse(&text).unwrap(), rec);
    }

    #[test]
    fn backward_phase_is_rejected() {
        let mut rec = sample();
        rec.trace[1].phase = Phase::RandomReturn;
        rec.trace[2].phase = Phase::TrailReturn;
        assert!(rec.validate().is_err());
        assert!(sample().validate().is_ok());
    }
}
