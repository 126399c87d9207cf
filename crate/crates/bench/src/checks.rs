//! Comparisons between the two standards, each reported with both values.

use std::fmt;

use v2x_core::crypto::count_signatures;
use v2x_core::transcript::{FlowError, FlowParams};

use crate::fixture::{fail, Etsi, Ieee};
use crate::lengths::{self, LengthRow};
use crate::timings::{self, TimingRow};
use crate::{messages as m, Standard};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Length,
    Timing,
    Signatures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Greater,
    Less,
    Equal,
}

impl Relation {
    fn holds(self, left: f64, right: f64) -> bool {
        match self {
            Relation::Greater => left > right,
            Relation::Less => left < right,
            Relation::Equal => left == right,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Greater => ">",
            Relation::Less => "<",
            Relation::Equal => "==",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Bytes,
    Millis,
    Signatures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operand {
    pub label: String,
    pub value: f64,
    pub unit: Unit,
}

impl Operand {
    fn new(label: impl Into<String>, value: f64, unit: Unit) -> Self {
        Operand { label: label.into(), value, unit }
    }

    /// The value with its unit, e.g. `133 B` or `2.459 ms`.
    pub fn display_value(&self) -> String {
        match self.unit {
            Unit::Bytes => format!("{} B", self.value),
            Unit::Millis => format!("{:.3} ms", self.value),
            Unit::Signatures => format!("{}", self.value),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.label, self.display_value())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub kind: CheckKind,
    pub left: Operand,
    pub relation: Relation,
    pub right: Operand,
    pub passed: bool,
}

impl Verdict {
    fn new(name: impl Into<String>, kind: CheckKind, left: Operand, relation: Relation, right: Operand) -> Self {
        let passed = relation.holds(left.value, right.value);
        Verdict { name: name.into(), kind, left, relation, right, passed }
    }

    fn missing(name: impl Into<String>, kind: CheckKind, what: &str, unit: Unit) -> Self {
        let nan = Operand::new(format!("{what} (not measured)"), f64::NAN, unit);
        Verdict { name: name.into(), kind, left: nan.clone(), relation: Relation::Equal, right: nan, passed: false }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let result = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{result} {}: {} {} {}", self.name, self.left, self.relation, self.right)
    }
}

/// ECDSA signatures produced by one request builder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureCount {
    pub message: &'static str,
    pub standard: Standard,
    pub count: u64,
    pub expected: u64,
}

/// Counts the signatures made while building each client request.
pub fn measure_signature_counts(params: &FlowParams) -> Result<Vec<SignatureCount>, FlowError> {
    let ieee = Ieee::new(params)?;
    let mut ee = ieee.end_entity(0);
    let (r, enrollment) = count_signatures(|| ee.build_enrollment_request());
    let request = r.map_err(fail("enrollment request"))?;
    let response = ieee.eca_response(&request)?;
    ee.process_enrollment_response(&response).map_err(fail("enrollment response"))?;
    let (r, authorization) = count_signatures(|| ee.build_auth_cert_request(params.cert_count.max(1)));
    r.map_err(fail("RA request"))?;

    let etsi = Etsi::new(params)?;
    let mut its = etsi.station(0)?;
    let (r, enrolment) = count_signatures(|| its.build_enrolment_request());
    let request = r.map_err(fail("enrolment request"))?;
    let response = etsi.ea.process_enrolment_request(&request);
    its.process_enrolment_response(&response).map_err(fail("enrolment response"))?;
    let (r, ticket) = count_signatures(|| its.build_authorization_request());
    r.map_err(fail("authorization request"))?;

    let count = |message, standard, count, expected| SignatureCount { message, standard, count, expected };
    Ok(vec![
        count(m::EE_ECA_CERT_REQUEST, Standard::Ieee, enrollment, 1),
        count(m::EE_RA_CERT_REQUEST, Standard::Ieee, authorization, 1),
        count(m::ENROLMENT_REQUEST, Standard::Etsi, enrolment, 2),
        count(m::AUTHORIZATION_REQUEST, Standard::Etsi, ticket, 2),
    ])
}

/// The ten messages the minimum-length check ranges over.
const MINIMUM_SET: [&str; 10] = [
    m::EE_ECA_CERT_REQUEST,
    m::ECA_EE_CERT_RESPONSE,
    m::EE_RA_CERT_REQUEST,
    m::RA_EE_CERT_INFO,
    m::ACA_RESPONSE,
    m::CERT_BATCH_ARCHIVE,
    m::ENROLMENT_REQUEST,
    m::ENROLMENT_RESPONSE,
    m::AUTHORIZATION_REQUEST,
    m::AUTHORIZATION_RESPONSE,
];

fn length_check(rows: &[LengthRow], left: &str, relation: Relation, right: &str) -> Verdict {
    let name = format!("len({left}) {relation} len({right})");
    match (lengths::find(rows, left), lengths::find(rows, right)) {
        (Some(l), Some(r)) => Verdict::new(
            name,
            CheckKind::Length,
            Operand::new(format!("len({left})"), l.measured_bytes as f64, Unit::Bytes),
            relation,
            Operand::new(format!("len({right})"), r.measured_bytes as f64, Unit::Bytes),
        ),
        _ => Verdict::missing(name, CheckKind::Length, "length", Unit::Bytes),
    }
}

fn minimum_check(rows: &[LengthRow]) -> Verdict {
    let name = format!("len({}) is the minimum", m::RA_EE_CERT_INFO);
    let Some(info) = lengths::find(rows, m::RA_EE_CERT_INFO) else {
        return Verdict::missing(name, CheckKind::Length, "length", Unit::Bytes);
    };
    let others = rows
        .iter()
        .filter(|r| r.message != m::RA_EE_CERT_INFO && MINIMUM_SET.contains(&r.message))
        .min_by_key(|r| r.measured_bytes);
    match others {
        Some(next) => Verdict::new(
            name,
            CheckKind::Length,
            Operand::new(format!("len({})", info.message), info.measured_bytes as f64, Unit::Bytes),
            Relation::Less,
            Operand::new(format!("len({}), next smallest", next.message), next.measured_bytes as f64, Unit::Bytes),
        ),
        None => Verdict::missing(name, CheckKind::Length, "other lengths", Unit::Bytes),
    }
}

fn phase_prefix(row: &TimingRow) -> &'static str {
    match row.phase {
        timings::Phase::Generate => "t_gen",
        timings::Phase::Process => "t_proc",
    }
}

/// Compares medians; with `strict`, the slower side's p10 must exceed the
/// faster side's p90.
fn timing_check(rows: &[TimingRow], slower: &str, faster: &str, strict: bool) -> Verdict {
    let (Some(s), Some(f)) = (timings::find(rows, slower), timings::find(rows, faster)) else {
        let name = format!("t({slower}) > t({faster})");
        return Verdict::missing(name, CheckKind::Timing, "median", Unit::Millis);
    };
    let (ps, pf) = (phase_prefix(s), phase_prefix(f));
    let name = format!("{ps}({slower}) > {pf}({faster})");
    let (left, right) = if strict {
        (
            Operand::new(format!("p10 {ps}({slower})"), s.p10_ns() as f64 / 1e6, Unit::Millis),
            Operand::new(format!("p90 {pf}({faster})"), f.p90_ns() as f64 / 1e6, Unit::Millis),
        )
    } else {
        (
            Operand::new(format!("median {ps}({slower})"), s.median_ms(), Unit::Millis),
            Operand::new(format!("median {pf}({faster})"), f.median_ms(), Unit::Millis),
        )
    };
    Verdict::new(name, CheckKind::Timing, left, Relation::Greater, right)
}

/// Evaluates every named check. Timing checks are included only when timing
/// rows are present.
pub fn check_orderings(
    lengths: &[LengthRow],
    timings: &[TimingRow],
    signatures: &[SignatureCount],
    strict: bool,
) -> Vec<Verdict> {
    use Relation::Greater;
    let mut verdicts = vec![
        length_check(lengths, m::ENROLMENT_REQUEST, Greater, m::EE_ECA_CERT_REQUEST),
        length_check(lengths, m::AUTHORIZATION_REQUEST, Greater, m::EE_RA_CERT_REQUEST),
        length_check(lengths, m::ECA_EE_CERT_RESPONSE, Greater, m::ENROLMENT_RESPONSE),
        minimum_check(lengths),
    ];
    if !timings.is_empty() {
        verdicts.extend([
            timing_check(timings, m::ENROLMENT_REQUEST, m::EE_ECA_CERT_REQUEST, strict),
            timing_check(timings, m::AUTHORIZATION_REQUEST, m::EE_RA_CERT_REQUEST, strict),
            timing_check(timings, m::ECA_EE_CERT_RESPONSE, m::ENROLMENT_RESPONSE, strict),
        ]);
    }
    verdicts.extend(signatures.iter().map(|s| {
        Verdict::new(
            format!("signatures({}) == {}", s.message, s.expected),
            CheckKind::Signatures,
            Operand::new(format!("signatures({})", s.message), s.count as f64, Unit::Signatures),
            Relation::Equal,
            Operand::new("expected", s.expected as f64, Unit::Signatures),
        )
    }));
    verdicts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ieee_padding, measure_lengths};

    #[test]
    fn default_lengths_pass_every_check() {
        let params = FlowParams::default();
        let verdicts = check_orderings(
            &measure_lengths(&params).unwrap(),
            &[],
            &measure_signature_counts(&params).unwrap(),
            false,
        );
        assert_eq!(verdicts.len(), 8);
        for v in &verdicts {
            assert!(v.passed, "{v}");
        }
        let mut names: Vec<_> = verdicts.iter().map(|v| &v.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), verdicts.len());
    }

    #[test]
    fn padding_the_ieee_enrollment_request_flips_its_check() {
        let params = FlowParams { ieee_padding: ieee_padding(8), ..FlowParams::default() };
        let verdicts = check_orderings(&measure_lengths(&params).unwrap(), &[], &[], false);
        let v = verdicts.iter().find(|v| v.name.starts_with("len(EnrolmentRequest)")).unwrap();
        assert!(!v.passed, "{v}");
        assert!(v.left.value > 0.0 && v.right.value > v.left.value);
    }

    #[test]
    fn missing_rows_fail_rather_than_vanish() {
        let verdicts = check_orderings(&[], &[], &[], false);
        assert_eq!(verdicts.len(), 4);
        assert!(verdicts.iter().all(|v| !v.passed));
    }

    #[test]
    fn relations_are_strict() {
        assert!(!Relation::Greater.holds(1.0, 1.0));
        assert!(!Relation::Less.holds(1.0, 1.0));
        assert!(Relation::Equal.holds(2.0, 2.0));
        assert!(!Relation::Equal.holds(f64::NAN, f64::NAN));
    }
}
