//! Test-session monitoring.
//!
//! A session tracks total sites `n`, tested sites `s`, sensitive sites `s0`
//! and math time `τ = s/n` as pass and fault events arrive. Bounds are
//! always evaluated against the initial semantic mean `1/s0(0)`; the current
//! mean `1/s0(τ)` only feeds the semantic-shift figure.
//!
//! Sessions persist as JSON Lines: a header line followed by one event per
//! line.
//!
//! ```text
//! {"n":20,"s0":4,"target":"enough"}
//! {"event":"pass"}
//! {"event":"fault","delta_total_sites":5}
//! ```

use std::io::{BufRead, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::law::{self, Bounds, LawError};
use crate::sites::{self, SiteError};

pub const FOUR_SIGMA_LAMBDA: f64 = 0.00621;
pub const SIX_SIGMA_LAMBDA: f64 = 2.0e-9;

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("{0}")]
    Domain(String),
    #[error("all {0} sites are already tested")]
    SessionComplete(u64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Event {
        line: usize,
        #[source]
        source: Box<MonitorError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<SiteError> for MonitorError {
    fn from(err: SiteError) -> Self {
        MonitorError::Domain(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaKind {
    Four,
    Six,
    Enough,
    Custom,
}

/// Required failure intensity of a session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaTarget {
    FourSigma,
    SixSigma,
    /// `1/n` for the current site count: the smallest intensity the law can
    /// distinguish for the project.
    EnoughSigma,
    Custom(f64),
}

impl SigmaTarget {
    pub fn custom(lambda_rq: f64) -> Result<Self, MonitorError> {
        if lambda_rq.is_finite() && lambda_rq > 0.0 {
            Ok(SigmaTarget::Custom(lambda_rq))
        } else {
            Err(MonitorError::Domain(format!(
                "custom target {lambda_rq} must be a positive failure intensity"
            )))
        }
    }

    pub fn kind(&self) -> SigmaKind {
        match self {
            SigmaTarget::FourSigma => SigmaKind::Four,
            SigmaTarget::SixSigma => SigmaKind::Six,
            SigmaTarget::EnoughSigma => SigmaKind::Enough,
            SigmaTarget::Custom(_) => SigmaKind::Custom,
        }
    }

    pub fn lambda_rq(&self, total_sites: u64) -> f64 {
        match *self {
            SigmaTarget::FourSigma => FOUR_SIGMA_LAMBDA,
            SigmaTarget::SixSigma => SIX_SIGMA_LAMBDA,
            SigmaTarget::EnoughSigma => 1.0 / total_sites as f64,
            SigmaTarget::Custom(l) => l,
        }
    }
}

/// First line of a persisted session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionHeader {
    pub n: u64,
    pub s0: u64,
    pub target: SigmaKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_rq: Option<f64>,
}

impl SessionHeader {
    pub fn new(n: u64, s0: u64, target: SigmaTarget) -> Self {
        Self {
            n,
            s0,
            target: target.kind(),
            lambda_rq: match target {
                SigmaTarget::Custom(l) => Some(l),
                _ => None,
            },
        }
    }

    pub fn sigma_target(&self) -> Result<SigmaTarget, MonitorError> {
        match self.target {
            SigmaKind::Four => Ok(SigmaTarget::FourSigma),
            SigmaKind::Six => Ok(SigmaTarget::SixSigma),
            SigmaKind::Enough => Ok(SigmaTarget::EnoughSigma),
            SigmaKind::Custom => match self.lambda_rq {
                Some(l) => SigmaTarget::custom(l),
                None => Err(MonitorError::Domain(
                    "custom target requires lambda_rq".into(),
                )),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum EventKind {
    /// A site tested fault-free.
    Pass,
    /// A detected and corrected fault; adds a sensitive site and may change
    /// the total site count.
    Fault {
        #[serde(default)]
        delta_total_sites: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestEvent {
    #[serde(flatten)]
    pub kind: EventKind,
    /// Unix milliseconds; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl TestEvent {
    pub fn pass() -> Self {
        Self {
            kind: EventKind::Pass,
            timestamp: None,
        }
    }

    pub fn fault(delta_total_sites: i64) -> Self {
        Self {
            kind: EventKind::Fault { delta_total_sites },
            timestamp: None,
        }
    }

    fn stamped(mut self) -> Self {
        self.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_millis() as u64);
        self
    }
}

/// Tests still needed to reach a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestsRemaining {
    Count(u64),
    NoSolution,
}

impl Serialize for TestsRemaining {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            TestsRemaining::Count(c) => serializer.serialize_u64(*c),
            TestsRemaining::NoSolution => serializer.serialize_str("NO_SOLUTION"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatusReport {
    pub total_sites: u64,
    pub tested_sites: u64,
    pub sensitive_sites: u64,
    pub coverage: f64,
    pub tau: f64,
    pub bounds: Bounds,
    pub semantic_shift: f64,
    pub lambda_rq: f64,
    pub target_met: bool,
    pub tests_remaining_to_target: TestsRemaining,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSession {
    header: SessionHeader,
    target: SigmaTarget,
    total_sites: u64,
    tested_sites: u64,
    sensitive_sites: u64,
    tau: f64,
    initial_semantic_mean: f64,
    current_semantic_mean: f64,
    event_log: Vec<TestEvent>,
}

impl MonitorSession {
    pub fn new(n: u64, s0: u64, target: SigmaTarget) -> Result<Self, MonitorError> {
        if s0 > n {
            return Err(MonitorError::Domain(format!(
                "{s0} sensitive sites exceed {n} total sites"
            )));
        }
        let mean = sites::semantic_mean_of(s0)?;
        if let SigmaTarget::Custom(l) = target {
            SigmaTarget::custom(l)?;
        }
        Ok(Self {
            header: SessionHeader::new(n, s0, target),
            target,
            total_sites: n,
            tested_sites: 0,
            sensitive_sites: s0,
            tau: 0.0,
            initial_semantic_mean: mean,
            current_semantic_mean: mean,
            event_log: Vec::new(),
        })
    }

    pub fn from_header(header: &SessionHeader) -> Result<Self, MonitorError> {
        Self::new(header.n, header.s0, header.sigma_target()?)
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn target(&self) -> SigmaTarget {
        self.target
    }

    pub fn total_sites(&self) -> u64 {
        self.total_sites
    }

    pub fn tested_sites(&self) -> u64 {
        self.tested_sites
    }

    pub fn sensitive_sites(&self) -> u64 {
        self.sensitive_sites
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn initial_semantic_mean(&self) -> f64 {
        self.initial_semantic_mean
    }

    pub fn current_semantic_mean(&self) -> f64 {
        self.current_semantic_mean
    }

    pub fn semantic_shift(&self) -> f64 {
        self.initial_semantic_mean - self.current_semantic_mean
    }

    pub fn coverage(&self) -> f64 {
        self.tested_sites as f64 / self.total_sites as f64
    }

    pub fn event_log(&self) -> &[TestEvent] {
        &self.event_log
    }

    pub fn record_pass(&mut self) -> Result<(), MonitorError> {
        self.apply(TestEvent::pass().stamped())
    }

    pub fn record_fault(&mut self, delta_total_sites: i64) -> Result<(), MonitorError> {
        self.apply(TestEvent::fault(delta_total_sites).stamped())
    }

    /// Applies one event. The session is unchanged when an error is returned.
    pub fn apply(&mut self, event: TestEvent) -> Result<(), MonitorError> {
        match event.kind {
            EventKind::Pass => {
                if self.tested_sites >= self.total_sites {
                    return Err(MonitorError::SessionComplete(self.total_sites));
                }
                self.tested_sites += 1;
            }
            EventKind::Fault { delta_total_sites } => {
                let n = self.total_sites as i128 + delta_total_sites as i128;
                let s0 = self.sensitive_sites + 1;
                if n < s0 as i128 {
                    return Err(MonitorError::Domain(format!(
                        "fault leaves {n} total sites for {s0} sensitive sites"
                    )));
                }
                if n < self.tested_sites as i128 {
                    return Err(MonitorError::Domain(format!(
                        "fault leaves {n} total sites below {} tested sites",
                        self.tested_sites
                    )));
                }
                let n = u64::try_from(n)
                    .map_err(|_| MonitorError::Domain(format!("total sites {n} overflow")))?;
                self.total_sites = n;
                self.sensitive_sites = s0;
                self.current_semantic_mean = 1.0 / s0 as f64;
            }
        }
        self.tau = self.tested_sites as f64 / self.total_sites as f64;
        self.event_log.push(event);
        Ok(())
    }

    pub fn lambda_rq(&self) -> f64 {
        self.target.lambda_rq(self.total_sites)
    }

    pub fn status(&self) -> Result<StatusReport, MonitorError> {
        let n = self.total_sites;
        let p0 = self.initial_semantic_mean;
        let lambda_rq = self.lambda_rq();
        let coverage = self.coverage();
        // c <= 1/s0(0) exactly when s·s0(0) <= n
        let bounds = if self.tested_sites as u128 * self.header.s0 as u128 <= n as u128 {
            Bounds::NotGrowing
        } else {
            law::evaluate_bounds(n as f64, coverage, p0, p0, 0.0)?
        };
        let target_met = bounds
            .report()
            .is_some_and(|b| b.lambda_max <= lambda_rq);
        let tests_remaining_to_target = match law::required_coverage(n, p0, lambda_rq) {
            Ok(required) => TestsRemaining::Count(required.saturating_sub(self.tested_sites)),
            Err(LawError::NoSolution { .. }) => TestsRemaining::NoSolution,
            Err(e) => return Err(e.into()),
        };
        Ok(StatusReport {
            total_sites: n,
            tested_sites: self.tested_sites,
            sensitive_sites: self.sensitive_sites,
            coverage,
            tau: self.tau,
            bounds,
            semantic_shift: self.semantic_shift(),
            lambda_rq,
            target_met,
            tests_remaining_to_target,
        })
    }

    /// Rebuilds a session by applying `events` in order to a fresh one.
    pub fn replay<I>(
        n: u64,
        s0: u64,
        target: SigmaTarget,
        events: I,
    ) -> Result<Self, MonitorError>
    where
        I: IntoIterator<Item = TestEvent>,
    {
        let mut session = Self::new(n, s0, target)?;
        for event in events {
            session.apply(event)?;
        }
        Ok(session)
    }

    /// Writes the header line followed by one line per event.
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<(), MonitorError> {
        serde_json::to_writer(&mut out, &self.header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for event in &self.event_log {
            serde_json::to_writer(&mut out, event).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Replays a JSON Lines stream.
///
/// Without `header` the first non-blank line must be the session header.
/// `on_event` sees the session after every applied event together with the
/// 1-based line number. Blank lines are skipped.
pub fn replay_log<R, F>(
    reader: R,
    header: Option<SessionHeader>,
    mut on_event: F,
) -> Result<MonitorSession, MonitorError>
where
    R: BufRead,
    F: FnMut(usize, &MonitorSession),
{
    let mut session = match header {
        Some(h) => Some(MonitorSession::from_header(&h)?),
        None => None,
    };
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match session.as_mut() {
            None => {
                let header: SessionHeader =
                    serde_json::from_str(&line).map_err(|e| MonitorError::Parse {
                        line: line_no,
                        message: format!("invalid session header: {e}"),
                    })?;
                session = Some(MonitorSession::from_header(&header).map_err(|e| {
                    MonitorError::Event {
                        line: line_no,
                        source: Box::new(e),
                    }
                })?);
            }
            Some(s) => {
                let event: TestEvent =
                    serde_json::from_str(&line).map_err(|e| MonitorError::Parse {
                        line: line_no,
                        message: format!("invalid event: {e}"),
                    })?;
                s.apply(event).map_err(|e| MonitorError::Event {
                    line: line_no,
                    source: Box::new(e),
                })?;
                on_event(line_no, s);
            }
        }
    }
    session.ok_or(MonitorError::Parse {
        line: 0,
        message: "missing session header".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanRow {
    pub target: SigmaKind,
    pub lambda_rq: f64,
    pub required_tests: TestsRemaining,
    /// `required_tests / n`, absent without a solution.
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffortRatio {
    pub numerator: SigmaKind,
    pub denominator: SigmaKind,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub total_sites: u64,
    pub sensitive_sites: u64,
    pub semantic_mean: f64,
    pub rows: Vec<PlanRow>,
    pub ratios: Vec<EffortRatio>,
}

impl Plan {
    pub fn row(&self, target: SigmaKind) -> Option<&PlanRow> {
        self.rows.iter().find(|r| r.target == target)
    }

    pub fn ratio(&self, numerator: SigmaKind, denominator: SigmaKind) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.numerator == numerator && r.denominator == denominator)
            .and_then(|r| r.ratio)
    }
}

pub fn plan_row(n: u64, s0: u64, target: SigmaTarget) -> Result<PlanRow, MonitorError> {
    if s0 > n {
        return Err(MonitorError::Domain(format!(
            "{s0} sensitive sites exceed {n} total sites"
        )));
    }
    let mean = sites::semantic_mean_of(s0)?;
    let lambda_rq = target.lambda_rq(n);
    let required_tests = match law::required_coverage(n, mean, lambda_rq) {
        Ok(s) => TestsRemaining::Count(s),
        Err(LawError::NoSolution { .. }) => TestsRemaining::NoSolution,
        Err(e) => return Err(e.into()),
    };
    let coverage = match required_tests {
        TestsRemaining::Count(s) => Some(s as f64 / n as f64),
        TestsRemaining::NoSolution => None,
    };
    Ok(PlanRow {
        target: target.kind(),
        lambda_rq,
        required_tests,
        coverage,
    })
}

/// Required test counts for the four-, six- and enough-sigma targets with
/// the effort ratios between them.
pub fn plan(n: u64, s0: u64) -> Result<Plan, MonitorError> {
    let rows = [
        SigmaTarget::FourSigma,
        SigmaTarget::SixSigma,
        SigmaTarget::EnoughSigma,
    ]
    .into_iter()
    .map(|t| plan_row(n, s0, t))
    .collect::<Result<Vec<_>, _>>()?;

    let count = |kind: SigmaKind| match rows.iter().find(|r| r.target == kind) {
        Some(PlanRow {
            required_tests: TestsRemaining::Count(c),
            ..
        }) => Some(*c as f64),
        _ => None,
    };
    let ratios = [
        (SigmaKind::Six, SigmaKind::Four),
        (SigmaKind::Enough, SigmaKind::Four),
        (SigmaKind::Enough, SigmaKind::Six),
    ]
    .into_iter()
    .map(|(numerator, denominator)| EffortRatio {
        numerator,
        denominator,
        ratio: count(numerator).zip(count(denominator)).map(|(a, b)| a / b),
    })
    .collect();

    Ok(Plan {
        total_sites: n,
        sensitive_sites: s0,
        semantic_mean: sites::semantic_mean_of(s0)?,
        rows,
        ratios,
    })
}
