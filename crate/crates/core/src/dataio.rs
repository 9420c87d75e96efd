//! Raw LFI recordings: canonical on-disk formats, validation and decimation.
//!
//! A recording is the synchronous 4-tuple stream `(v1, v2, d1, d2)` from the
//! two sensors of one subject/activity session. The canonical disk format is
//! a CSV with header `t,v1,v2,d1,d2`; per-file metadata (subject, activity,
//! sampling rate) lives in a manifest CSV with header
//! `path,subject,activity,rate_hz`.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::{Error, Result};

/// The seven recorded activities: five stationary tasks plus two dynamic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Talk,
    Read,
    Video,
    Walk,
    Type,
    Solve,
    Cycle,
}

impl Activity {
    pub const ALL: [Activity; 7] = [
        Activity::Talk,
        Activity::Read,
        Activity::Video,
        Activity::Walk,
        Activity::Type,
        Activity::Solve,
        Activity::Cycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Activity::Talk => "talk",
            Activity::Read => "read",
            Activity::Video => "video",
            Activity::Walk => "walk",
            Activity::Type => "type",
            Activity::Solve => "solve",
            Activity::Cycle => "cycle",
        }
    }

    /// True for the free-roaming activities (walking, cycling).
    pub fn is_dynamic(self) -> bool {
        matches!(self, Activity::Walk | Activity::Cycle)
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Activity::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown activity {s:?} (expected one of talk/read/video/walk/type/solve/cycle)"
                ))
            })
    }
}

/// One subject/activity session of raw sensor channels.
///
/// Channels are stored column-wise; the four vectors always have equal length
/// and every value is finite. Units are consistent sensor units — downstream
/// features are either unit-covariant or standardized, so no conversion layer
/// exists.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub activity: Activity,
    pub sampling_rate_hz: f64,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Optional session timestamp, carried as opaque metadata.
    pub session_start: Option<String>,
}

impl Recording {
    pub fn new(
        subject_id: impl Into<String>,
        activity: Activity,
        sampling_rate_hz: f64,
        v1: Vec<f64>,
        v2: Vec<f64>,
        d1: Vec<f64>,
        d2: Vec<f64>,
    ) -> Result<Self> {
        let rec = Recording {
            subject_id: subject_id.into(),
            activity,
            sampling_rate_hz,
            v1,
            v2,
            d1,
            d2,
            session_start: None,
        };
        rec.check_invariants()?;
        Ok(rec)
    }

    pub fn len(&self) -> usize {
        self.v1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v1.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sampling_rate_hz
    }

    /// The four raw channels in canonical order.
    pub fn channels(&self) -> [&[f64]; 4] {
        [&self.v1, &self.v2, &self.d1, &self.d2]
    }

    fn check_invariants(&self) -> Result<()> {
        if self.sampling_rate_hz <= 0.0 || !self.sampling_rate_hz.is_finite() {
            return Err(Error::invalid(format!(
                "sampling rate must be positive, got {}",
                self.sampling_rate_hz
            )));
        }
        let n = self.v1.len();
        if n == 0 {
            return Err(Error::invalid("recording has no samples"));
        }
        if self.v2.len() != n || self.d1.len() != n || self.d2.len() != n {
            return Err(Error::invalid("raw channels differ in length"));
        }
        for ch in self.channels() {
            if ch.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("recording contains non-finite samples"));
            }
        }
        Ok(())
    }
}

/// A set of recordings sharing one sampling rate, the unit of every
/// identification experiment.
#[derive(Debug, Clone, Default)]
pub struct Cohort {
    pub recordings: Vec<Recording>,
}

impl Cohort {
    pub fn new(recordings: Vec<Recording>) -> Self {
        Cohort { recordings }
    }

    /// Common sampling rate, taken from the first recording.
    pub fn sampling_rate_hz(&self) -> Option<f64> {
        self.recordings.first().map(|r| r.sampling_rate_hz)
    }

    pub fn subjects(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .recordings
            .iter()
            .map(|r| r.subject_id.as_str())
            .collect();
        set.into_iter().map(String::from).collect()
    }

    pub fn activities(&self) -> Vec<Activity> {
        let set: BTreeSet<Activity> = self.recordings.iter().map(|r| r.activity).collect();
        set.into_iter().collect()
    }
}

/// Outcome of [`validate_cohort`]: everything is reported, nothing thrown.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// `(subject, activity, duration in seconds, sample count)` per recording.
    pub recordings: Vec<(String, Activity, f64, usize)>,
    pub subjects: Vec<String>,
    pub activities: Vec<Activity>,
    /// `coverage[s][a]` = number of recordings for subject `s`, activity `a`.
    pub coverage: Vec<Vec<usize>>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "recordings = {}", self.recordings.len())?;
        for (s, a, dur, n) in &self.recordings {
            writeln!(f, "recording {s}/{a}: {dur:.3} s, {n} samples")?;
        }
        write!(f, "coverage subjects={}", self.subjects.len())?;
        writeln!(f, " activities={}", self.activities.len())?;
        for (si, s) in self.subjects.iter().enumerate() {
            let row: Vec<String> = self.coverage[si].iter().map(|c| c.to_string()).collect();
            writeln!(f, "coverage {s}: {}", row.join(","))?;
        }
        if self.violations.is_empty() {
            writeln!(f, "violations = none")?;
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
        }
        Ok(())
    }
}

/// Load one recording CSV (`t,v1,v2,d1,d2`). The `t` column is informational;
/// `declared_rate` is authoritative for timing.
pub fn load_recording(
    path: &Path,
    subject_id: &str,
    activity: Activity,
    declared_rate: f64,
) -> Result<Recording> {
    if declared_rate <= 0.0 {
        return Err(Error::invalid("declared sampling rate must be positive"));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);

    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io(path, e))?;
    if header.is_empty() {
        return Err(Error::parse(path, 1, "empty file"));
    }
    if header.trim_end() != "t,v1,v2,d1,d2" {
        return Err(Error::parse(
            path,
            1,
            format!("expected header 't,v1,v2,d1,d2', got {:?}", header.trim_end()),
        ));
    }

    let mut v1 = Vec::new();
    let mut v2 = Vec::new();
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    let mut line = String::new();
    let mut line_no = 1usize;
    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(|e| Error::io(path, e))?;
        if read == 0 {
            break;
        }
        line_no += 1;
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split(',');
        // t is parsed for validity but not stored.
        let mut next_val = |name: &str| -> Result<f64> {
            let raw = fields
                .next()
                .ok_or_else(|| Error::parse(path, line_no, format!("missing column {name}")))?;
            let val: f64 = raw.trim().parse().map_err(|_| {
                Error::parse(path, line_no, format!("column {name}: cannot parse {raw:?}"))
            })?;
            if !val.is_finite() {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("column {name}: non-finite value {raw:?}"),
                ));
            }
            Ok(val)
        };
        let _t = next_val("t")?;
        v1.push(next_val("v1")?);
        v2.push(next_val("v2")?);
        d1.push(next_val("d1")?);
        d2.push(next_val("d2")?);
        if fields.next().is_some() {
            return Err(Error::parse(path, line_no, "too many columns"));
        }
    }
    if v1.is_empty() {
        return Err(Error::parse(path, line_no, "no data rows"));
    }
    Recording::new(subject_id, activity, declared_rate, v1, v2, d1, d2)
}

/// Write a recording in the canonical CSV format. Values round-trip exactly
/// (shortest representation that parses back to the same float).
pub fn save_recording(rec: &Recording, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::with_capacity(1 << 20, file);
    let mut write = |s: &str| w.write_all(s.as_bytes()).map_err(|e| Error::io(path, e));
    write("t,v1,v2,d1,d2\n")?;
    let dt = 1.0 / rec.sampling_rate_hz;
    let mut buf = String::with_capacity(96);
    for i in 0..rec.len() {
        buf.clear();
        use fmt::Write as _;
        let _ = write!(
            &mut buf,
            "{},{},{},{},{}\n",
            i as f64 * dt,
            rec.v1[i],
            rec.v2[i],
            rec.d1[i],
            rec.d2[i]
        );
        w.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One manifest row.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub subject: String,
    pub activity: Activity,
    pub rate_hz: f64,
}

/// Parse a manifest CSV (`path,subject,activity,rate_hz`). Relative paths are
/// resolved against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 {
            if trimmed != "path,subject,activity,rate_hz" {
                return Err(Error::parse(
                    path,
                    1,
                    format!("expected header 'path,subject,activity,rate_hz', got {trimmed:?}"),
                ));
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let rel = PathBuf::from(fields[0]);
        let resolved = if rel.is_absolute() { rel } else { base.join(rel) };
        let rate: f64 = fields[3].trim().parse().map_err(|_| {
            Error::parse(path, line_no, format!("cannot parse rate {:?}", fields[3]))
        })?;
        entries.push(ManifestEntry {
            path: resolved,
            subject: fields[1].trim().to_string(),
            activity: fields[2].trim().parse()?,
            rate_hz: rate,
        });
    }
    if entries.is_empty() {
        return Err(Error::parse(path, 1, "manifest lists no recordings"));
    }
    Ok(entries)
}

/// Write a manifest next to its recordings. Paths are stored relative to the
/// manifest when possible.
pub fn save_manifest(entries: &[ManifestEntry], path: &Path) -> Result<()> {
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = |s: String| w.write_all(s.as_bytes()).map_err(|e| Error::io(path, e));
    write("path,subject,activity,rate_hz\n".to_string())?;
    for e in entries {
        let p = e.path.strip_prefix(base).unwrap_or(&e.path);
        write(format!(
            "{},{},{},{}\n",
            p.display(),
            e.subject,
            e.activity,
            e.rate_hz
        ))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Load every recording listed in a manifest. Recordings load in parallel;
/// the returned cohort preserves manifest order.
pub fn load_cohort(manifest_path: &Path) -> Result<Cohort> {
    let entries = load_manifest(manifest_path)?;
    let recordings: Result<Vec<Recording>> = entries
        .par_iter()
        .map(|e| load_recording(&e.path, &e.subject, e.activity, e.rate_hz))
        .collect();
    Ok(Cohort::new(recordings?))
}

/// Check cohort-level invariants and summarize coverage. All problems are
/// reported in the result, never thrown.
pub fn validate_cohort(cohort: &Cohort) -> ValidationReport {
    let mut violations = Vec::new();
    let subjects = cohort.subjects();
    let activities = cohort.activities();

    let recordings: Vec<(String, Activity, f64, usize)> = cohort
        .recordings
        .iter()
        .map(|r| (r.subject_id.clone(), r.activity, r.duration_s(), r.len()))
        .collect();

    let mut coverage = vec![vec![0usize; activities.len()]; subjects.len()];
    for r in &cohort.recordings {
        let si = subjects.iter().position(|s| *s == r.subject_id).unwrap();
        let ai = activities.iter().position(|a| *a == r.activity).unwrap();
        coverage[si][ai] += 1;
    }

    if subjects.len() < 2 {
        violations.push(format!(
            "identification impossible: <2 subjects (found {})",
            subjects.len()
        ));
    }
    if let Some(rate) = cohort.sampling_rate_hz() {
        for r in &cohort.recordings {
            if (r.sampling_rate_hz - rate).abs() > f64::EPSILON * rate.abs() {
                violations.push(format!(
                    "sampling rate mismatch: {}/{} at {} Hz, cohort at {} Hz",
                    r.subject_id, r.activity, r.sampling_rate_hz, rate
                ));
            }
        }
    } else {
        violations.push("cohort is empty".to_string());
    }
    for (si, s) in subjects.iter().enumerate() {
        for (ai, a) in activities.iter().enumerate() {
            if coverage[si][ai] == 0 {
                violations.push(format!("missing recording: subject {s}, activity {a}"));
            }
        }
    }
    for r in &cohort.recordings {
        if let Err(e) = r.check_invariants() {
            violations.push(format!("{}/{}: {e}", r.subject_id, r.activity));
        }
    }

    ValidationReport {
        recordings,
        subjects,
        activities,
        coverage,
        violations,
    }
}

/// Anti-alias FIR length used by [`decimate`].
const DECIMATE_TAPS: usize = 255;

/// Reduce the sampling rate by an integer factor.
///
/// Each raw channel is low-passed at 0.8 x the target Nyquist with a
/// 255-tap windowed-sinc FIR applied forward-backward (zero phase, so
/// waveform morphology used by time-domain features is preserved), then every
/// k-th sample is kept. Edges are handled by reflection so the first window
/// of the output is free of start-up transients.
pub fn decimate(rec: &Recording, target_rate_hz: f64) -> Result<Recording> {
    if target_rate_hz <= 0.0 {
        return Err(Error::invalid("target rate must be positive"));
    }
    if target_rate_hz >= rec.sampling_rate_hz {
        return Err(Error::invalid(format!(
            "target rate {} Hz must be below source rate {} Hz",
            target_rate_hz, rec.sampling_rate_hz
        )));
    }
    let ratio = rec.sampling_rate_hz / target_rate_hz;
    let k = ratio.round();
    if (ratio - k).abs() > 1e-9 * ratio {
        return Err(Error::invalid(format!(
            "source rate {} Hz is not an integer multiple of target {} Hz",
            rec.sampling_rate_hz, target_rate_hz
        )));
    }
    let k = k as usize;
    let cutoff = 0.8 * (target_rate_hz / 2.0) / rec.sampling_rate_hz;
    let h = dsp::lowpass_fir(DECIMATE_TAPS, cutoff);

    let out_len = rec.len() / k;
    let filtered: Vec<Vec<f64>> = rec
        .channels()
        .into_par_iter()
        .map(|ch| {
            let smooth = dsp::filtfilt(&h, ch);
            smooth.iter().step_by(k).take(out_len).copied().collect()
        })
        .collect();

    let mut it = filtered.into_iter();
    let mut out = Recording::new(
        rec.subject_id.clone(),
        rec.activity,
        target_rate_hz,
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    )?;
    out.session_start = rec.session_start.clone();
    Ok(out)
}
