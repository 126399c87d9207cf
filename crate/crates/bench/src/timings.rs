//! Wall-clock cost of generating or processing each message on the client
//! side (end entity or ITS station).

use std::fmt;
use std::hint::black_box;
use std::time::{Duration, Instant};

use v2x_core::scms::CertBatchArchive;
use v2x_core::transcript::{FlowError, FlowParams};

use crate::fixture::{fail, Etsi, Ieee};
use crate::{messages as m, BenchError, Standard};

pub const MIN_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingOptions {
    pub iterations: usize,
    pub warmup: usize,
    pub threads: usize,
}

impl Default for TimingOptions {
    fn default() -> Self {
        TimingOptions { iterations: MIN_ITERATIONS, warmup: 10, threads: 1 }
    }
}

impl TimingOptions {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.threads != 1 {
            return Err(BenchError::ConcurrentLoad(self.threads));
        }
        if self.iterations < MIN_ITERATIONS {
            return Err(BenchError::TooFewIterations { got: self.iterations });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Generate,
    Process,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Generate => "generate",
            Phase::Process => "process",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub message: &'static str,
    pub standard: Standard,
    pub phase: Phase,
    pub samples_ns: Vec<u64>,
    /// Time reported in the comparison table, in milliseconds.
    pub paper_ms: Option<u32>,
}

impl TimingRow {
    fn sorted(&self) -> Vec<u64> {
        let mut s = self.samples_ns.clone();
        s.sort_unstable();
        s
    }

    pub fn median_ns(&self) -> f64 {
        median(&self.sorted())
    }

    pub fn p10_ns(&self) -> u64 {
        nearest_rank(&self.sorted(), 10)
    }

    pub fn p90_ns(&self) -> u64 {
        nearest_rank(&self.sorted(), 90)
    }

    pub fn median_ms(&self) -> f64 {
        self.median_ns() / 1e6
    }
}

fn median(sorted: &[u64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0,
    }
}

fn nearest_rank(sorted: &[u64], percent: usize) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (percent * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = black_box(f());
    (out, start.elapsed())
}

/// Runs `iteration` `warmup + iterations` times and keeps the last
/// `iterations` durations. Each call does its own untimed setup and returns
/// the duration of the measured step.
fn sample(
    options: &TimingOptions,
    mut iteration: impl FnMut(u64) -> Result<Duration, FlowError>,
) -> Result<Vec<u64>, FlowError> {
    let mut samples = Vec::with_capacity(options.iterations);
    for k in 0..(options.warmup + options.iterations) {
        let elapsed = iteration(k as u64)?;
        if k >= options.warmup {
            samples.push(u64::try_from(elapsed.as_nanos()).unwrap_or(u64::MAX));
        }
    }
    Ok(samples)
}

/// Times every client-side step of both flows. The combined
/// `RaEeCertInfoSpdu + AcaResponse` row unpacks a whole archive of
/// `cert_count` entries (at least one); the two rows before it time the
/// info entry and a single AcaResponse on their own.
pub fn measure_timings(params: &FlowParams, options: &TimingOptions) -> Result<Vec<TimingRow>, BenchError> {
    options.validate()?;
    let cert_count = params.cert_count.max(1);
    let ieee = Ieee::new(params)?;
    let etsi = Etsi::new(params)?;
    let row = |message, standard, phase, samples_ns, paper_ms| TimingRow {
        message,
        standard,
        phase,
        samples_ns,
        paper_ms,
    };
    use Phase::{Generate, Process};
    use Standard::{Etsi as E, Ieee as I};
    let mut rows = Vec::new();

    let s = sample(options, |k| {
        let mut ee = ieee.end_entity(k);
        let (r, t) = timed(|| ee.build_enrollment_request());
        r.map_err(fail("enrollment request"))?;
        Ok(t)
    })?;
    rows.push(row(m::EE_ECA_CERT_REQUEST, I, Generate, s, Some(46)));

    let s = sample(options, |k| {
        let mut ee = ieee.end_entity(k);
        let response = ieee.enrollment_response(&mut ee)?;
        let (r, t) = timed(|| ee.process_enrollment_response(&response));
        r.map_err(fail("enrollment response"))?;
        Ok(t)
    })?;
    rows.push(row(m::ECA_EE_CERT_RESPONSE, I, Process, s, Some(396)));

    let mut ee = ieee.enrolled(u64::MAX)?;
    let s = sample(options, |_| {
        let (r, t) = timed(|| ee.build_auth_cert_request(cert_count));
        r.map_err(fail("RA request"))?;
        Ok(t)
    })?;
    rows.push(row(m::EE_RA_CERT_REQUEST, I, Generate, s, Some(161)));

    let (mut ee, archive) = ieee.with_batch(u64::MAX - 1, cert_count)?;
    let parsed = CertBatchArchive::from_zip(&archive).map_err(fail("archive"))?;
    let info_only = CertBatchArchive { info: parsed.info.clone(), aca_responses: Vec::new() }.to_zip();
    let s = sample(options, |_| {
        let (r, t) = timed(|| ee.download_and_unpack(&info_only));
        r.map_err(fail("unpack"))?;
        Ok(t)
    })?;
    rows.push(row(m::RA_EE_CERT_INFO, I, Process, s, None));

    let entry = &parsed.aca_responses[0];
    let s = sample(options, |_| {
        let (r, t) = timed(|| ee.process_aca_response(0, entry));
        r.map_err(fail("AcaResponse"))?;
        Ok(t)
    })?;
    rows.push(row(m::ACA_RESPONSE, I, Process, s, None));

    let s = sample(options, |_| {
        let (r, t) = timed(|| ee.download_and_unpack(&archive));
        let outcome = r.map_err(fail("unpack"))?;
        if outcome.entries.iter().any(Result::is_err) {
            return Err(FlowError { stage: "unpack", reason: "an archive entry failed".into() });
        }
        Ok(t)
    })?;
    rows.push(row(m::RA_EE_CERT_INFO_AND_ACA_RESPONSE, I, Process, s, Some(348)));

    let s = sample(options, |k| {
        let mut its = etsi.station(k)?;
        let (r, t) = timed(|| its.build_enrolment_request());
        r.map_err(fail("enrolment request"))?;
        Ok(t)
    })?;
    rows.push(row(m::ENROLMENT_REQUEST, E, Generate, s, Some(244)));

    let s = sample(options, |k| {
        let mut its = etsi.station(1_000_000 + k)?;
        let response = etsi.enrolment_response(&mut its)?;
        let (r, t) = timed(|| its.process_enrolment_response(&response));
        r.map_err(fail("enrolment response"))?;
        Ok(t)
    })?;
    rows.push(row(m::ENROLMENT_RESPONSE, E, Process, s, Some(171)));

    let mut its = etsi.enrolled(u64::MAX)?;
    let s = sample(options, |_| {
        let (r, t) = timed(|| its.build_authorization_request());
        r.map_err(fail("authorization request"))?;
        Ok(t)
    })?;
    rows.push(row(m::AUTHORIZATION_REQUEST, E, Generate, s, Some(345)));

    let s = sample(options, |_| {
        let request = its.build_authorization_request().map_err(fail("authorization request"))?;
        let response = etsi.aa.process_authorization_request(&etsi.ea, &request);
        let (r, t) = timed(|| its.process_authorization_response(&response));
        r.map_err(fail("authorization response"))?;
        Ok(t)
    })?;
    rows.push(row(m::AUTHORIZATION_RESPONSE, E, Process, s, Some(171)));

    Ok(rows)
}

pub fn find<'a>(rows: &'a [TimingRow], message: &str) -> Option<&'a TimingRow> {
    rows.iter().find(|r| r.message == message)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles_use_nearest_rank() {
        let sorted: Vec<u64> = (1..=100).collect();
        assert_eq!(nearest_rank(&sorted, 10), 10);
        assert_eq!(nearest_rank(&sorted, 90), 90);
        assert_eq!(nearest_rank(&[7], 10), 7);
        assert_eq!(median(&[1, 2, 3, 10]), 2.5);
        assert_eq!(median(&[1, 3, 5]), 3.0);
    }

    #[test]
    fn options_refuse_load_and_short_runs() {
        let opts = TimingOptions { threads: 2, ..TimingOptions::default() };
        assert!(matches!(opts.validate(), Err(BenchError::ConcurrentLoad(2))));
        let opts = TimingOptions { iterations: 99, ..TimingOptions::default() };
        assert!(matches!(opts.validate(), Err(BenchError::TooFewIterations { got: 99 })));
        let err = measure_timings(&FlowParams::default(), &opts).unwrap_err();
        assert!(matches!(err, BenchError::TooFewIterations { .. }));
    }

    #[test]
    fn every_row_has_the_requested_sample_count() {
        let opts = TimingOptions { warmup: 1, ..TimingOptions::default() };
        let rows = measure_timings(&FlowParams { cert_count: 2, ..FlowParams::default() }, &opts).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            assert_eq!(r.samples_ns.len(), opts.iterations, "{}", r.message);
            assert!(r.p10_ns() as f64 <= r.median_ns() && r.median_ns() <= r.p90_ns() as f64);
        }
    }
}
