//! File formats: configuration JSON, JSON-lines traces and certificates,
//! and the textual angle syntax shared by all of them.
//!
//! Integers inside the `exact` block are written as JSON numbers when they
//! fit in an `i64` and as decimal strings otherwise.

use std::io::{BufRead, Write};

use dashu_int::{IBig, UBig};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::classifier::ClassLabel;
use crate::config::{ConfigError, Configuration};
use crate::geometry::{ExactAngle, Point, Polar, Rational, Tolerance};
use crate::simulator::{Outcome, Trace, Warning};
use crate::sweep::ExperimentSpec;
use crate::utp::{Certificate, StepVerdict, Verdict};

pub const FORMAT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TRACE_FORMAT: &str = "cfp-trace";
pub const CERTIFICATE_FORMAT: &str = "cfp-certificate";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        source: serde_json::Error,
    },
    #[error("field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error("invalid angle `{0}` (expected e.g. pi/10, 3π/20, 18deg, 1/20turn or radians)")]
    Angle(String),
    #[error("malformed {kind}: {msg}")]
    Format { kind: &'static str, msg: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn field_err(field: impl Into<String>, msg: impl Into<String>) -> IoError {
    IoError::Field {
        field: field.into(),
        msg: msg.into(),
    }
}

// ---------------------------------------------------------------- angles

/// Parses `pi/10`, `3π/20`, `-pi`, `2*pi/7`, `18deg`, `1/20turn` (all
/// exact) or a plain decimal number of radians.
pub fn parse_angle(s: &str) -> Result<ExactAngle, IoError> {
    let bad = || IoError::Angle(s.to_string());
    let t = s.trim().to_lowercase().replace('π', "pi").replace(' ', "");
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(v) = t.strip_suffix("deg") {
        let q = parse_rational(v).ok_or_else(bad)?;
        return Ok(ExactAngle::turns(q / Rational::from(360)));
    }
    if let Some(v) = t.strip_suffix("turns").or_else(|| t.strip_suffix("turn")) {
        return Ok(ExactAngle::turns(parse_rational(v).ok_or_else(bad)?));
    }
    if let Some((pre, post)) = t.split_once("pi") {
        let pre = pre.strip_suffix('*').unwrap_or(pre);
        let num = match pre {
            "" => Rational::ONE,
            "-" => -Rational::ONE,
            p => parse_rational(p).ok_or_else(bad)?,
        };
        let den = match post {
            "" => Rational::ONE,
            p => {
                let d = parse_rational(p.strip_prefix('/').ok_or_else(bad)?).ok_or_else(bad)?;
                if d == Rational::ZERO {
                    return Err(bad());
                }
                d
            }
        };
        return Ok(ExactAngle::turns(num / den / Rational::from(2)));
    }
    let r: f64 = t.parse().map_err(|_| bad())?;
    if !r.is_finite() {
        return Err(bad());
    }
    Ok(ExactAngle::radians(r))
}

/// `a` or `a/b` with integer `a`, `b`.
fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: IBig = n.parse().ok()?;
    let d: UBig = d.parse().ok()?;
    if d == UBig::ZERO {
        return None;
    }
    Some(Rational::from_parts(n, d))
}

/// Inverse of [`parse_angle`]: exact angles as fractions of π, radians with
/// full round-trip precision.
pub fn format_angle(a: &ExactAngle) -> String {
    match a {
        ExactAngle::Turns(t) if *t == Rational::ZERO => "0pi".into(),
        ExactAngle::Turns(_) => a.to_string(),
        ExactAngle::Radians(r) => r.to_string(),
    }
}

/// Serde adapter storing an [`ExactAngle`] as its [`format_angle`] string.
pub mod angle_serde {
    use super::*;

    pub fn serialize<S: Serializer>(a: &ExactAngle, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_angle(a))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactAngle, D::Error> {
        let s = String::deserialize(d)?;
        parse_angle(&s).map_err(serde::de::Error::custom)
    }
}

// --------------------------------------------------------- configurations

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonInt {
    Small(i64),
    Big(String),
}

impl JsonInt {
    fn from_ibig(v: &IBig) -> Self {
        match i64::try_from(v) {
            Ok(x) => JsonInt::Small(x),
            Err(_) => JsonInt::Big(v.to_string()),
        }
    }

    fn from_ubig(v: &UBig) -> Self {
        match i64::try_from(v) {
            Ok(x) => JsonInt::Small(x),
            Err(_) => JsonInt::Big(v.to_string()),
        }
    }

    fn to_ibig(&self, field: &str) -> Result<IBig, IoError> {
        match self {
            JsonInt::Small(x) => Ok(IBig::from(*x)),
            JsonInt::Big(s) => s
                .parse()
                .map_err(|_| field_err(field, format!("`{s}` is not an integer"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactEntry {
    pub turns_num: JsonInt,
    pub turns_den: JsonInt,
    pub radius_num: JsonInt,
    pub radius_den: JsonInt,
}

fn positive_rational(num: &JsonInt, den: &JsonInt, field: &str) -> Result<Rational, IoError> {
    let n = num.to_ibig(field)?;
    let d = den.to_ibig(field)?;
    let d = UBig::try_from(d).map_err(|_| field_err(field, "denominator must be positive"))?;
    if d == UBig::ZERO {
        return Err(field_err(field, "denominator must be positive"));
    }
    Ok(Rational::from_parts(n, d))
}

/// On-disk form of a [`Configuration`]. When `exact` is present it is
/// authoritative and `points` is derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub n: usize,
    pub epsilon: f64,
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<ExactEntry>>,
}

impl ConfigFile {
    pub fn from_config(c: &Configuration) -> Self {
        let (center, exact) = match c.exact() {
            Some(l) => (
                Some(l.center),
                Some(
                    l.polar
                        .iter()
                        .map(|p| ExactEntry {
                            turns_num: JsonInt::from_ibig(p.turns.numerator()),
                            turns_den: JsonInt::from_ubig(p.turns.denominator()),
                            radius_num: JsonInt::from_ibig(p.radius.numerator()),
                            radius_den: JsonInt::from_ubig(p.radius.denominator()),
                        })
                        .collect(),
                ),
            ),
            None => (None, None),
        };
        ConfigFile {
            n: c.len(),
            epsilon: c.tolerance().eps,
            points: c.positions().to_vec(),
            center,
            exact,
        }
    }

    pub fn to_config(&self) -> Result<Configuration, IoError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(field_err("epsilon", "must be a positive number"));
        }
        let config = match &self.exact {
            Some(entries) => {
                if entries.len() != self.n {
                    return Err(field_err(
                        "exact",
                        format!("{} entries for n = {}", entries.len(), self.n),
                    ));
                }
                let mut polar = Vec::with_capacity(entries.len());
                for (i, e) in entries.iter().enumerate() {
                    let turns = positive_rational(&e.turns_num, &e.turns_den, &format!("exact[{i}].turns"))?;
                    let radius = positive_rational(&e.radius_num, &e.radius_den, &format!("exact[{i}].radius"))?;
                    if radius <= Rational::ZERO {
                        return Err(field_err(format!("exact[{i}].radius"), "must be positive"));
                    }
                    polar.push(Polar::new(radius, turns));
                }
                let center = self.center.unwrap_or(Point::new(0.0, 0.0));
                Configuration::from_polar(center, polar)?
            }
            None => {
                if self.points.len() != self.n {
                    return Err(field_err(
                        "points",
                        format!("{} points for n = {}", self.points.len(), self.n),
                    ));
                }
                for (i, p) in self.points.iter().enumerate() {
                    Point::try_new(p.x, p.y).map_err(|e| field_err(format!("points[{i}]"), e.to_string()))?;
                }
                Configuration::new(self.points.clone())?
            }
        };
        Ok(config.with_tolerance(Tolerance::new(self.epsilon)))
    }
}

pub fn config_to_json(c: &Configuration) -> String {
    serde_json::to_string_pretty(&ConfigFile::from_config(c)).expect("configuration serializes")
}

pub fn config_from_json(s: &str) -> Result<Configuration, IoError> {
    let f: ConfigFile = serde_json::from_str(s)?;
    f.to_config()
}

// ----------------------------------------------------------------- traces

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub robot: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum TraceLine {
    Header {
        format: String,
        version: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spec: Option<ExperimentSpec>,
        initial: ConfigFile,
        class: ClassLabel,
    },
    Step {
        index: u64,
        active: Vec<usize>,
        targets: Vec<TargetEntry>,
        after: ConfigFile,
        class: ClassLabel,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<Warning>,
    },
    Outcome {
        outcome: Outcome,
        steps: usize,
    },
}

fn write_line<W: Write, T: Serialize>(w: &mut W, line: &T) -> Result<(), IoError> {
    serde_json::to_writer(&mut *w, line)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Writes `trace` as JSON lines: header, one line per step, outcome.
pub fn write_trace<W: Write>(w: &mut W, spec: Option<&ExperimentSpec>, trace: &Trace) -> Result<(), IoError> {
    write_line(
        w,
        &TraceLine::Header {
            format: TRACE_FORMAT.into(),
            version: FORMAT_VERSION.into(),
            spec: spec.cloned(),
            initial: ConfigFile::from_config(&trace.initial),
            class: trace.classes[0],
        },
    )?;
    for (i, s) in trace.steps.iter().enumerate() {
        write_line(
            w,
            &TraceLine::Step {
                index: s.index,
                active: s.active.clone(),
                targets: s
                    .targets
                    .iter()
                    .map(|&(robot, p)| TargetEntry { robot, x: p.x, y: p.y })
                    .collect(),
                after: ConfigFile::from_config(&s.config_after),
                class: trace.classes[i + 1],
                warnings: s.warnings.clone(),
            },
        )?;
    }
    write_line(
        w,
        &TraceLine::Outcome {
            outcome: trace.outcome,
            steps: trace.steps.len(),
        },
    )?;
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(spec: Option<&ExperimentSpec>, trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, spec, trace).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub index: u64,
    pub active: Vec<usize>,
    pub targets: Vec<(usize, Point)>,
    pub after: Configuration,
    pub class: ClassLabel,
    pub warnings: Vec<Warning>,
}

/// A trace read back from disk.
#[derive(Debug, Clone)]
pub struct TraceFile {
    pub version: String,
    pub spec: Option<ExperimentSpec>,
    pub initial: Configuration,
    pub initial_class: ClassLabel,
    pub steps: Vec<TraceStep>,
    /// Missing when the run was cut short before the outcome line.
    pub outcome: Option<Outcome>,
}

impl TraceFile {
    /// Configuration before step `i`.
    pub fn before(&self, i: usize) -> &Configuration {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].after
        }
    }
}

fn json_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String), IoError>> {
    r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(e.into())),
    })
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: usize, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|source| IoError::Line { line, source })
}

pub fn read_trace<R: BufRead>(r: R) -> Result<TraceFile, IoError> {
    let fmt = |msg: String| IoError::Format { kind: "trace", msg };
    let mut lines = json_lines(r);
    let (no, first) = lines.next().ok_or_else(|| fmt("empty file".into()))??;
    let TraceLine::Header {
        format,
        version,
        spec,
        initial,
        class,
    } = parse_line(no, &first)?
    else {
        return Err(fmt("first line is not a header".into()));
    };
    if format != TRACE_FORMAT {
        return Err(fmt(format!("unexpected format `{format}`")));
    }
    let mut out = TraceFile {
        version,
        spec,
        initial: initial.to_config()?,
        initial_class: class,
        steps: Vec::new(),
        outcome: None,
    };
    for l in lines {
        let (no, text) = l?;
        if out.outcome.is_some() {
            return Err(fmt(format!("line {no}: data after the outcome line")));
        }
        match parse_line(no, &text)? {
            TraceLine::Header { .. } => return Err(fmt(format!("line {no}: repeated header"))),
            TraceLine::Step {
                index,
                active,
                targets,
                after,
                class,
                warnings,
            } => out.steps.push(TraceStep {
                index,
                active,
                targets: targets.into_iter().map(|t| (t.robot, Point::new(t.x, t.y))).collect(),
                after: after.to_config()?.with_time(index + 1),
                class,
                warnings,
            }),
            TraceLine::Outcome { outcome, steps } => {
                if steps != out.steps.len() {
                    return Err(fmt(format!(
                        "outcome reports {steps} steps, file has {}",
                        out.steps.len()
                    )));
                }
                out.outcome = Some(outcome);
            }
        }
    }
    Ok(out)
}

// ----------------------------------------------------------- certificates

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum CertificateLine {
    Header {
        format: String,
        version: String,
        rule: String,
        n: usize,
        #[serde(with = "angle_serde")]
        alpha: ExactAngle,
        budget: u64,
        initial: ConfigFile,
    },
    Step {
        verdict: StepVerdict,
    },
    Outcome {
        verdict: Verdict,
        steps: usize,
        merge_hazards: usize,
        #[serde(rename = "final")]
        final_config: ConfigFile,
    },
}

/// Writes a certificate as JSON lines, one per-step verdict per line.
pub fn write_certificate<W: Write>(w: &mut W, cert: &Certificate) -> Result<(), IoError> {
    write_line(
        w,
        &CertificateLine::Header {
            format: CERTIFICATE_FORMAT.into(),
            version: FORMAT_VERSION.into(),
            rule: cert.rule.clone(),
            n: cert.n,
            alpha: cert.alpha.clone(),
            budget: cert.budget,
            initial: ConfigFile::from_config(&cert.initial),
        },
    )?;
    for v in &cert.steps {
        write_line(w, &CertificateLine::Step { verdict: v.clone() })?;
    }
    write_line(
        w,
        &CertificateLine::Outcome {
            verdict: cert.verdict,
            steps: cert.steps.len(),
            merge_hazards: cert.merge_hazards(),
            final_config: ConfigFile::from_config(&cert.final_config),
        },
    )?;
    w.flush()?;
    Ok(())
}

pub fn certificate_to_string(cert: &Certificate) -> String {
    let mut buf = Vec::new();
    write_certificate(&mut buf, cert).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_certificate<R: BufRead>(r: R) -> Result<Certificate, IoError> {
    let fmt = |msg: String| IoError::Format {
        kind: "certificate",
        msg,
    };
    let mut lines = json_lines(r);
    let (no, first) = lines.next().ok_or_else(|| fmt("empty file".into()))??;
    let CertificateLine::Header {
        format,
        rule,
        n,
        alpha,
        budget,
        initial,
        ..
    } = parse_line(no, &first)?
    else {
        return Err(fmt("first line is not a header".into()));
    };
    if format != CERTIFICATE_FORMAT {
        return Err(fmt(format!("unexpected format `{format}`")));
    }
    let mut steps = Vec::new();
    for l in lines {
        let (no, text) = l?;
        match parse_line(no, &text)? {
            CertificateLine::Header { .. } => return Err(fmt(format!("line {no}: repeated header"))),
            CertificateLine::Step { verdict } => steps.push(verdict),
            CertificateLine::Outcome {
                verdict,
                final_config,
                ..
            } => {
                return Ok(Certificate {
                    rule,
                    n,
                    alpha,
                    budget,
                    initial: initial.to_config()?,
                    final_config: final_config.to_config()?,
                    steps,
                    verdict,
                })
            }
        }
    }
    Err(fmt("missing outcome line".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::geometry::rat;

    #[test]
    fn angle_syntax() {
        let pi10 = ExactAngle::pi_fraction(1, 10);
        for s in ["pi/10", "π/10", " PI / 10 ", "1*pi/10", "18deg", "1/20turn", "1/20 turns"] {
            assert_eq!(parse_angle(s).unwrap(), pi10, "{s}");
        }
        assert_eq!(parse_angle("3π/20").unwrap(), ExactAngle::pi_fraction(3, 20));
        assert_eq!(parse_angle("-pi").unwrap(), ExactAngle::pi_fraction(-1, 1));
        assert_eq!(parse_angle("0.25").unwrap(), ExactAngle::radians(0.25));
        for bad in ["", "pi/0", "pi10", "abc", "1/0deg", "inf"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn angle_format_round_trip() {
        for a in [
            ExactAngle::pi_fraction(3, 20),
            ExactAngle::pi_fraction(1, 1),
            ExactAngle::zero(),
            ExactAngle::radians(0.123456789012345),
        ] {
            assert_eq!(parse_angle(&format_angle(&a)).unwrap(), a);
        }
    }

    #[test]
    fn exact_config_round_trip() {
        let c = generate::strict_biangular(10, &ExactAngle::pi_fraction(1, 10)).unwrap();
        let back = config_from_json(&config_to_json(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn huge_integers_are_strings() {
        let big = Rational::from_parts(IBig::ONE, UBig::ONE << 200);
        let c = Configuration::from_polar(
            Point::new(0.0, 0.0),
            vec![Polar::new(rat(1, 1), big), Polar::new(rat(1, 1), rat(1, 2))],
        )
        .unwrap();
        let s = config_to_json(&c);
        assert!(s.contains(&format!("\"{}\"", UBig::ONE << 200)));
        assert_eq!(config_from_json(&s).unwrap(), c);
    }

    #[test]
    fn real_config_round_trip() {
        let c = Configuration::new(vec![Point::new(0.1, 0.2), Point::new(-3.0, 1e-7)])
            .unwrap()
            .with_tolerance(Tolerance::new(1e-6));
        assert_eq!(config_from_json(&config_to_json(&c)).unwrap(), c);
    }

    #[test]
    fn malformed_configs() {
        assert!(matches!(config_from_json("{"), Err(IoError::Parse(_))));
        let e = config_from_json(r#"{"n": 3, "epsilon": 1e-9, "points": [{"x":0,"y":0},{"x":1,"y":0}]}"#);
        assert!(matches!(e, Err(IoError::Field { ref field, .. }) if field == "points"));
        let e = config_from_json(
            r#"{"n": 2, "epsilon": 1e-9, "points": [],
                "exact": [{"turns_num":0,"turns_den":0,"radius_num":1,"radius_den":1},
                          {"turns_num":1,"turns_den":2,"radius_num":1,"radius_den":1}]}"#,
        );
        assert!(matches!(e, Err(IoError::Field { ref field, .. }) if field == "exact[0].turns"));
        let e = config_from_json(r#"{"n": 2, "epsilon": -1, "points": [{"x":0,"y":0},{"x":1,"y":0}]}"#);
        assert!(matches!(e, Err(IoError::Field { ref field, .. }) if field == "epsilon"));
    }

    #[test]
    fn trace_round_trip() {
        use crate::simulator::SchedulerPolicy;
        use crate::sweep::{ExperimentSpec, InitialClass};
        let spec = ExperimentSpec::new(
            10,
            InitialClass::StrictBiangular {
                alpha: ExactAngle::pi_fraction(1, 10),
            },
            SchedulerPolicy::SeededRandomFair { seed: 3, k: 3 },
            3,
            200,
        );
        let trace = spec.run().unwrap();
        let text = trace_to_string(Some(&spec), &trace);
        assert_eq!(text.lines().count(), trace.steps.len() + 2);
        let back = read_trace(text.as_bytes()).unwrap();
        assert_eq!(back.spec.as_ref(), Some(&spec));
        assert_eq!(back.outcome, Some(trace.outcome));
        assert_eq!(back.initial, trace.initial);
        for (a, b) in back.steps.iter().zip(&trace.steps) {
            assert_eq!(a.after, b.config_after);
            assert_eq!(a.active, b.active);
            assert_eq!(a.targets, b.targets);
        }
    }

    #[test]
    fn certificate_round_trip() {
        let cert = crate::utp::demonstrate(&crate::utp::NeighborMidpoint, 10, &ExactAngle::pi_fraction(1, 10), 20)
            .unwrap();
        let text = certificate_to_string(&cert);
        let back = read_certificate(text.as_bytes()).unwrap();
        assert_eq!(back.steps, cert.steps);
        assert_eq!(back.verdict, cert.verdict);
        assert!(back.final_config.same_positions(&cert.final_config));
        assert_eq!(certificate_to_string(&back), text);
    }

    #[test]
    fn trace_errors_carry_line_numbers() {
        let e = read_trace("{\"type\":\"outcome\",\"outcome\":{\"kind\":\"budget-exhausted\"},\"steps\":0}\n".as_bytes());
        assert!(matches!(e, Err(IoError::Format { .. })));
        let c = generate::regular(12, rat(1, 1)).unwrap();
        let header = serde_json::to_string(&TraceLine::Header {
            format: TRACE_FORMAT.into(),
            version: FORMAT_VERSION.into(),
            spec: None,
            initial: ConfigFile::from_config(&c),
            class: ClassLabel::RegularNGon,
        })
        .unwrap();
        let e = read_trace(format!("{header}\n\nnot json\n").as_bytes());
        assert!(matches!(e, Err(IoError::Line { line: 3, .. })), "{e:?}");
    }
}
