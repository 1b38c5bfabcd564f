//! Daily price-history ingestion.
//!
//! Input is Yahoo-style OHLCV CSV (`Date,Open,High,Low,Close,Adj Close,Volume`).
//! Only `Date` and `Close` are read. Rows whose close is missing (`null`,
//! empty, `NaN`) are dropped and counted; anything else that fails to parse is
//! a hard error carrying the file line number.

use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveTime};

use crate::error::{Error, Result};

pub const DATE_COLUMN: &str = "Date";
pub const CLOSE_COLUMN: &str = "Close";

/// Default download endpoint. Placeholders: `{symbol}`, `{start_epoch}`, `{end_epoch}`.
pub const DEFAULT_URL_TEMPLATE: &str = "https://query1.finance.yahoo.com/v7/finance/download/{symbol}?period1={start_epoch}&period2={end_epoch}&interval=1d&events=history";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    pub close: f64,
}

/// A dated series of daily closing values, strictly increasing in date.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    symbol: String,
    observations: Vec<Observation>,
}

impl PriceSeries {
    /// Sorts `observations` by date and validates them.
    pub fn new(symbol: impl Into<String>, mut observations: Vec<Observation>) -> Result<Self> {
        observations.sort_by_key(|o| o.date);
        for pair in observations.windows(2) {
            if pair[0].date == pair[1].date {
                return Err(Error::Format(format!("duplicate date {}", pair[1].date)));
            }
        }
        if let Some(bad) = observations
            .iter()
            .find(|o| !(o.close.is_finite() && o.close > 0.0))
        {
            return Err(Error::Format(format!(
                "close on {} must be positive and finite, got {}",
                bad.date, bad.close
            )));
        }
        Ok(PriceSeries {
            symbol: symbol.into(),
            observations,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn closes(&self) -> impl Iterator<Item = f64> + '_ {
        self.observations.iter().map(|o| o.close)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.observations.iter().map(|o| o.date)
    }
}

/// Output of [`parse_csv`]: the series and how many rows were dropped for a
/// missing close.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSeries {
    pub series: PriceSeries,
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    /// Minimum number of valid rows; fewer is `InsufficientData`.
    pub min_rows: usize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { min_rows: 2 }
    }
}

impl CsvOptions {
    /// Two τ-windows: the least data that can hold one drawdown and one drawup.
    pub fn for_tau(tau_days: usize) -> Self {
        CsvOptions {
            min_rows: (2 * tau_days).max(2),
        }
    }
}

fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty()
        || f.eq_ignore_ascii_case("null")
        || f.eq_ignore_ascii_case("nan")
        || f.eq_ignore_ascii_case("n/a")
}

/// Parses a daily-history CSV and returns observations in ascending date order.
pub fn parse_csv<R: Read>(raw: R, symbol: &str, options: CsvOptions) -> Result<ParsedSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(raw);

    let headers = reader
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::Format(format!("missing `{name}` column in header {headers:?}")))
    };
    let date_idx = column(DATE_COLUMN)?;
    let close_idx = column(CLOSE_COLUMN)?;

    let mut observations = Vec::new();
    let mut dropped_rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::row(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }

        let date_field = record
            .get(date_idx)
            .ok_or_else(|| Error::row(line, "missing Date field"))?;
        let date = NaiveDate::parse_from_str(date_field, "%Y-%m-%d")
            .map_err(|e| Error::row(line, format!("unparseable date {date_field:?}: {e}")))?;

        let close_field = record.get(close_idx).unwrap_or("");
        if is_missing(close_field) {
            dropped_rows += 1;
            continue;
        }
        let close: f64 = close_field
            .parse()
            .map_err(|_| Error::row(line, format!("unparseable close {close_field:?}")))?;
        if !close.is_finite() || close <= 0.0 {
            return Err(Error::row(
                line,
                format!("close must be positive and finite, got {close_field}"),
            ));
        }
        observations.push((line, Observation { date, close }));
    }

    observations.sort_by_key(|(_, o)| o.date);
    if let Some(pair) = observations.windows(2).find(|w| w[0].1.date == w[1].1.date) {
        let line = pair[0].0.max(pair[1].0);
        return Err(Error::row(
            line,
            format!("duplicate date {}", pair[1].1.date),
        ));
    }
    if observations.len() < options.min_rows {
        return Err(Error::InsufficientData {
            found: observations.len(),
            required: options.min_rows,
        });
    }

    let series = PriceSeries::new(symbol, observations.into_iter().map(|(_, o)| o).collect())?;
    Ok(ParsedSeries {
        series,
        dropped_rows,
    })
}

/// Writes the canonical `Date,Close` form. Closes use the shortest
/// representation that round-trips exactly.
pub fn write_csv<W: Write>(series: &PriceSeries, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([DATE_COLUMN, CLOSE_COLUMN])?;
    for obs in series.observations() {
        writer.write_record([
            obs.date.format("%Y-%m-%d").to_string(),
            obs.close.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Minimal HTTP GET capability, supplied by the caller.
pub trait HttpGet {
    fn get(&self, url: &str) -> Result<HttpResponse>;
}

impl<F> HttpGet for F
where
    F: Fn(&str) -> Result<HttpResponse>,
{
    fn get(&self, url: &str) -> Result<HttpResponse> {
        self(url)
    }
}

fn epoch_seconds(day: NaiveDate) -> i64 {
    day.and_time(NaiveTime::MIN).and_utc().timestamp()
}

/// Expands the URL template. The end bound is midnight after `end`, so `end`
/// itself is included.
pub fn history_url(template: &str, symbol: &str, start: NaiveDate, end: NaiveDate) -> String {
    let symbol: String = url::form_urlencoded::byte_serialize(symbol.as_bytes()).collect();
    let end_exclusive = end.succ_opt().unwrap_or(end);
    template
        .replace("{symbol}", &symbol)
        .replace("{start_epoch}", &epoch_seconds(start).to_string())
        .replace("{end_epoch}", &epoch_seconds(end_exclusive).to_string())
}

/// Downloads a daily history with one GET and parses the body.
pub fn fetch_history(
    symbol: &str,
    start: NaiveDate,
    end: NaiveDate,
    transport: &dyn HttpGet,
    url_template: &str,
    options: CsvOptions,
) -> Result<ParsedSeries> {
    if start >= end {
        return Err(Error::Config(format!(
            "fetch start {start} must precede end {end}"
        )));
    }
    let url = history_url(url_template, symbol, start, end);
    let response = transport.get(&url)?;
    if !(200..300).contains(&response.status) {
        return Err(Error::Fetch {
            status: response.status,
        });
    }
    parse_csv(response.body.as_slice(), symbol, options)
}

/// Blocking HTTPS transport.
#[cfg(feature = "live-fetch")]
#[derive(Debug, Default, Clone, Copy)]
pub struct LiveTransport;

#[cfg(feature = "live-fetch")]
impl HttpGet for LiveTransport {
    fn get(&self, url: &str) -> Result<HttpResponse> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        let mut response = agent
            .get(url)
            .header("User-Agent", "resicycle/0.1")
            .call()
            .map_err(|e| Error::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_vec()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}
