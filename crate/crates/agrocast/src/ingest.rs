//! CSV ingestion: parse, validate, gap-fill, and monthly-aggregate market
//! and NDVI inputs into the internal data model.
//!
//! File schemas (UTF-8, comma delimited, '.' decimal separator, header row):
//!
//! * `ndvi.csv`     — `location_id,lat,lon,month,ndvi` with month = YYYY-MM
//! * `arrivals.csv` — `market_id,market_name,lat,lon,date,arrival_qty` with
//!   date = YYYY-MM-DD
//! * `prices.csv`   — `market_id,date,min_price,max_price,modal_price`
//!
//! A missing month is an absent entry, never zero: zero arrivals is a real
//! market signal while gaps come from reporting failure. Interior gaps are
//! filled by linear interpolation; leading/trailing gaps are flagged.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::month::{parse_date, YearMonth};

/// One geolocated NDVI time series at monthly resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationSeries {
    pub location_id: String,
    pub lat: f64,
    pub lon: f64,
    /// Strictly increasing months, NDVI in [-1, 1].
    pub months: Vec<(YearMonth, f64)>,
}

impl LocationSeries {
    pub fn value_at(&self, month: YearMonth) -> Option<f64> {
        self.months
            .binary_search_by_key(&month, |(m, _)| *m)
            .ok()
            .map(|i| self.months° [i].1)
    }

    pub fn first_month(&self) -> Option<YearMonth> {
        self.months.first().map(|(m, _)| *m)
    }

    pub fn last_month(&self) -> Option<YearMonth> {
        self.months.last().map(|(m, _)| *m)
    }
}

/// One market's monthly arrival and price series plus geolocation.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    pub market_id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    /// Monthly arrival quantities, contiguous months after gap filling.
    pub arrivals: Vec<(YearMonth, f64)>,
    /// Monthly mean modal prices, contiguous months after gap filling.
    pub prices: Vec<(YearMonth, f64)>,
    /// Months that had price rows but no arrival rows before gap filling.
    pub price_only_months: Vec<YearMonth>,
    /// Interior months filled by interpolation, per series.
    pub interpolated_arrival_months: Vec<YearMonth>,
    pub interpolated_price_months: Vec<YearMonth>,
}

impl MarketSeries {
    pub fn arrival_at(&self, month: YearMonth) -> Option<f64> {
        self.arrivals
            .binary_search_by_key(&month, |(m, _)| *m)
            .ok()
            .map(|i| self.arrivals[i].1)
    }

    pub fn price_at(&self, month: YearMonth) -> Option<f64> {
        self.prices
            .binary_search_by_key(&month, |(m, _)| *m)
            .ok()
            .map(|i| self.prices[i].1)
    }
}

/// Daily market rows straight from the files, grouped per market but not yet
/// aggregated to months.
#[derive(Debug, Clone)]
pub struct DailyMarketRecords {
    pub market_id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    /// (month, day, arrival quantity)
    pub arrival_rows: Vec<(YearMonth, u32, f64)>,
    /// (month, day, modal price)
    pub price_rows: Vec<(YearMonth, u32, f64)>,
}

/// The immutable working dataset: all series plus the global month axis.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub locations: Vec<LocationSeries>,
    pub markets: Vec<MarketSeries>,
    /// Contiguous union span of all member series.
    pub month_index: Vec<YearMonth>,
}

/// Ingest outcome counters for the summary report.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub n_locations: usize,
    pub n_markets: usize,
    pub first_month: Option<String>,
    pub last_month: Option<String>,
    /// Series that do not cover the full global month axis.
    pub partial_coverage: Vec<CoverageGap>,
    pub interpolated_months: usize,
    pub price_only_months: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageGap {
    pub series_id: String,
    pub kind: String,
    pub first: String,
    pub last: String,
}

impl Dataset {
    /// Builds the dataset and the global month axis. Missing leading or
    /// trailing months relative to the axis are reported, never filled.
    pub fn assemble(locations: Vec<LocationSeries>, markets: Vec<MarketSeries>) -> Result<Self> {
        let mut first: Option<YearMonth> = None;
        let mut last: Option<YearMonth> = None;
        let mut span = |f: Option<YearMonth>, l: Option<YearMonth>| {
            if let (Some(f), Some(l)) = (f, l) {
                first = Some(first.map_or(f, |x| x.min(f)));
                last = Some(last.map_or(l, |x| x.max(l)));
            }
        };
        for loc in &locations {
            span(loc.first_month(), loc.last_month());
        }
        for market in &markets {
            span(
                market.arrivals.first().map(|(m, _)| *m),
                market.arrivals.last().map(|(m, _)| *m),
            );
            span(
                market.prices.first().map(|(m, _)| *m),
                market.prices.last().map(|(m, _)| *m),
            );
        }
        let month_index = match (first, last) {
            (Some(f), Some(l)) => YearMonth::range_inclusive(f, l),
            _ => Vec::new(),
        };
        Ok(Dataset {
            locations,
            markets,
            month_index,
        })
    }

    pub fn market(&self, market_id: &str) -> Option<&MarketSeries> {
        self.markets.iter().find(|m| m.market_id == market_id)
    }

    pub fn summary(&self) -> DatasetSummary {
        let mut partial = Vec::new();
        let (gf, gl) = (self.month_index.first(), self.month_index.last());
        if let (Some(&gf), Some(&gl)) = (gf, gl) {
            for loc in &self.locations {
                if let (Some(f), Some(l)) = (loc.first_month(), loc.last_month()) {
                    if f > gf || l < gl {
                        partial.push(CoverageGap {
                            series_id: loc.location_id.clone(),
                            kind: "ndvi".into(),
                            first: f.to_string(),
                            last: l.to_string(),
                        });
                    }
                }
            }
            for market in &self.markets {
                if let (Some(&(f, _)), Some(&(l, _))) =
                    (market.arrivals.first(), market.arrivals.last())
                {
                    if f > gf || l < gl {
                        partial.push(CoverageGap {
                            series_id: market.market_id.clone(),
                            kind: "arrivals".into(),
                            first: f.to_string(),
                            last: l.to_string(),
                        });
                    }
                }
            }
        }
        DatasetSummary {
            n_locations: self.locations.len(),
            n_markets: self.markets.len(),
            first_month: self.month_index.first().map(|m| m.to_string()),
            last_month: self.month_index.last().map(|m| m.to_string()),
            partial_coverage: partial,
            interpolated_months: self
                .markets
                .iter()
                .map(|m| m.interpolated_arrival_months.len() + m.interpolated_price_months.len())
                .sum(),
            price_only_months: self.markets.iter().map(|m| m.price_only_months.len()).sum(),
        }
    }
}

fn check_header(path: &str, actual: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let actual: Vec<&str> = actual.iter().map(str::trim).collect();
    if actual != expected {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("header {actual:?} does not match expected {expected:?}"),
        });
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    path: &str,
    line: u64,
    field: &str,
    value: &str,
) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse {
        path: path.into(),
        line,
        message: format!("cannot parse {field} from {value:?}"),
    })
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
        })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Parses the NDVI file into one series per distinct location.
pub fn parse_ndvi_csv(path: &Path) -> Result<Vec<LocationSeries>> {
    let path_str = path.display().to_string();
    let mut reader = open_reader(path)?;
    check_header(
        &path_str,
        reader.headers().map_err(|e| Error::Parse {
            path: path_str.clone(),
            line: 1,
            message: e.to_string(),
        })?,
        &["location_id", "lat", "lon", "month", "ndvi"],
    )?;

    // location_id -> (lat, lon, month -> ndvi)
    let mut groups: BTreeMap<String, (f64, f64, BTreeMap<YearMonth, f64>)> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path_str.clone(),
            line: e
                .position()
                .map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        if record.len() != 5 {
            return Err(Error::Parse {
                path: path_str.clone(),
                line,
                message: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let location_id = record[0].trim().to_string();
        let lat: f64 = parse_field(&path_str, line, "lat", &record[1])?;
        let lon: f64 = parse_field(&path_str, line, "lon", &record[2])?;
        let month: YearMonth = record[3].trim().parse().map_err(|e: Error| Error::Parse {
            path: path_str.clone(),
            line,
            message: e.to_string(),
        })?;
        let ndvi: f64 = parse_field(&path_str, line, "ndvi", &record[4])?;
        validate_geo(&path_str, line, lat, lon)?;
        if !ndvi.is_finite() || !(-1.0..=1.0).contains(&ndvi) {
            return Err(Error::Parse {
                path: path_str.clone(),
                line,
                message: format!("ndvi out of range [-1,1]: {ndvi}"),
            });
        }
        let entry = groups
            .entry(location_id.clone())
            .or_insert_with(|| (lat, lon, BTreeMap::new()));
        if entry.2.insert(month, ndvi).is_some() {
            return Err(Error::Parse {
                path: path_str.clone(),
                line,
                message: format!("duplicate (location_id, month) = ({location_id}, {month})"),
            });
        }
    }

    Ok(groups
        .into_iter()
        .map(|(location_id, (lat, lon, months))| LocationSeries {
            location_id,
            lat,
            lon,
            months: months.into_iter().collect(),
        })
        .collect())
}

fn validate_geo(path: &str, line: u64, lat: f64, lon: f64) -> Result<()> {
    if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
        return Err(Error::Parse {
            path: path.into(),
            line,
            message: format!("lat out of range [-90,90]: {lat}"),
        });
    }
    if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
        return Err(Error::Parse {
            path: path.into(),
            line,
            message: format!("lon out of range [-180,180]: {lon}"),
        });
    }
    Ok(())
}

/// Parses the arrivals and prices files into daily per-market records.
/// Min/max price columns are accepted and discarded; only the modal price
/// feeds downstream models.
pub fn parse_market_csv(
    arrivals_path: &Path,
    prices_path: &Path,
) -> Result<Vec<DailyMarketRecords>> {
    let arr_str = arrivals_path.display().to_string();
    let mut reader = open_reader(arrivals_path)?;
    check_header(
        &arr_str,
        reader.headers().map_err(|e| Error::Parse {
            path: arr_str.clone(),
            line: 1,
            message: e.to_string(),
        })?,
        &["market_id", "market_name", "lat", "lon", "date", "arrival_qty"],
    )?;

    let mut markets: BTreeMap<String, DailyMarketRecords> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: arr_str.clone(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        if record.len() != 6 {
            return Err(Error::Parse {
                path: arr_str.clone(),
                line,
                message: format!("expected 6 fields, found {}", record.len()),
            });
        }
        let market_id = record[0].trim().to_string();
        let name = record[1].trim().to_string();
        let lat: f64 = parse_field(&arr_str, line, "lat", &record[2])?;
        let lon: f64 = parse_field(&arr_str, line, "lon", &record[3])?;
        validate_geo(&arr_str, line, lat, lon)?;
        let (month, day) = parse_date(record[4].trim()).map_err(|e| Error::Parse {
            path: arr_str.clone(),
            line,
            message: e.to_string(),
        })?;
        let qty: f64 = parse_field(&arr_str, line, "arrival_qty", &record[5])?;
        if !qty.is_finite() || qty < 0.0 {
            return Err(Error::Parse {
                path: arr_str.clone(),
                line,
                message: format!("negative arrival quantity: {qty}"),
            });
        }
        markets
            .entry(market_id.clone())
            .or_insert_with(|| DailyMarketRecords {
                market_id,
                name,
                lat,
                lon,
                arrival_rows: Vec::new(),
                price_rows: Vec::new(),
            })
            .arrival_rows
            .push((month, day, qty));
    }

    let price_str = prices_path.display().to_string();
    let mut reader = open_reader(prices_path)?;
    check_header(
        &price_str,
        reader.headers().map_err(|e| Error::Parse {
            path: price_str.clone(),
            line: 1,
            message: e.to_string(),
        })?,
        &["market_id", "date", "min_price", "max_price", "modal_price"],
    )?;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: price_str.clone(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        if record.len() != 5 {
            return Err(Error::Parse {
                path: price_str.clone(),
                line,
                message: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let market_id = record[0].trim().to_string();
        let (month, day) = parse_date(record[1].trim()).map_err(|e| Error::Parse {
            path: price_str.clone(),
            line,
            message: e.to_string(),
        })?;
        // min and max prices are parsed for schema validation only
        let _min: f64 = parse_field(&price_str, line, "min_price", &record[2])?;
        let _max: f64 = parse_field(&price_str, line, "max_price", &record[3])?;
        let modal: f64 = parse_field(&price_str, line, "modal_price", &record[4])?;
        if !modal.is_finite() || modal <= 0.0 {
            return Err(Error::Parse {
                path: price_str.clone(),
                line,
                message: format!("nonpositive modal price: {modal}"),
            });
        }
        match markets.get_mut(&market_id) {
            Some(market) => market.price_rows.push((month, day, modal)),
            None => {
                // Price rows for a market with no arrival rows at all: keep
                // the market with empty arrivals so the months get flagged.
                markets.insert(
                    market_id.clone(),
                    DailyMarketRecords {
                        market_id,
                        name: String::new(),
                        lat: 0.0,
                        lon: 0.0,
                        arrival_rows: Vec::new(),
                        price_rows: vec![(month, day, modal)],
                    },
                );
            }
        }
    }

    Ok(markets.into_values().collect())
}

/// Aggregates daily rows to months: arrivals are summed, the monthly price
/// is the arithmetic mean of daily modal prices. A month with no rows stays
/// missing; gap filling is a separate, explicit step.
pub fn monthly_aggregate(daily: &DailyMarketRecords) -> MarketSeries {
    let mut arrivals: BTreeMap<YearMonth, f64> = BTreeMap::new();
    for &(month, _day, qty) in &daily.arrival_rows {
        *arrivals.entry(month).or_insert(0.0) += qty;
    }
    let mut price_sums: BTreeMap<YearMonth, (f64, usize)> = BTreeMap::new();
    for &(month, _day, modal) in &daily.price_rows {
        let e = price_sums.entry(month).or_insert((0.0, 0));
        e.0 += modal;
        e.1 += 1;
    }
    let prices: Vec<(YearMonth, f64)> = price_sums
        .iter()
        .map(|(&m, &(sum, n))| (m, sum / n as f64))
        .collect();
    let price_only_months: Vec<YearMonth> = price_sums
        .keys()
        .filter(|m| !arrivals.contains_key(m))
        .copied()
        .collect();
    MarketSeries {
        market_id: daily.market_id.clone(),
        name: daily.name.clone(),
        lat: daily.lat,
        lon: daily.lon,
        arrivals: arrivals.into_iter().collect(),
        prices,
        price_only_months,
        interpolated_arrival_months: Vec::new(),
        interpolated_price_months: Vec::new(),
    }
}

/// Fills interior gaps of a (month, value) series by linear interpolation,
/// returning the contiguous series and the months that were filled.
pub fn fill_series_gaps(
    points: &[(YearMonth, f64)],
) -> Result<(Vec<(YearMonth, f64)>, Vec<YearMonth>)> {
    if points.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let first = points[0].0;
    let last = points[points.len() - 1].0;
    let axis = YearMonth::range_inclusive(first, last);
    let mut slots: Vec<Option<f64>> = vec![None; axis.len()];
    for &(m, v) in points {
        let idx = m.months_since(&first) as usize;
        slots[idx] = Some(v);
    }
    let filled = interpolate_missing(&slots)?;
    let mut filled_months = Vec::new();
    let series: Vec<(YearMonth, f64)> = axis
        .iter()
        .zip(&filled)
        .map(|(&m, &v)| (m, v))
        .collect();
    for (i, slot) in slots.iter().enumerate() {
        if slot.is_none() {
            filled_months.push(axis[i]);
        }
    }
    Ok((series, filled_months))
}

/// Linear interpolation of interior gaps on an implicit contiguous axis.
/// Observed values are returned unchanged.
pub fn interpolate_missing(values: &[Option<f64>]) -> Result<Vec<f64>> {
    let n_observed = values.iter().filter(|v| v.is_some()).count();
    if n_observed < 2 {
        return Err(Error::InsufficientData(format!(
            "interpolation needs at least 2 observed values, found {n_observed}"
        )));
    }
    if values.first().unwrap().is_none() || values.last().unwrap().is_none() {
        return Err(Error::Validation(
            "cannot extrapolate: leading or trailing gap".into(),
        ));
    }
    let mut out = Vec::with_capacity(values.len());
    let mut i = 0;
    while i < values.len() {
        match values[i] {
            Some(v) => {
                out.push(v);
                i += 1;
            }
            None => {
                // Left neighbor exists because the first slot is observed.
                let left_idx = i - 1;
                let left = out[left_idx];
                let mut right_idx = i;
                while values[right_idx].is_none() {
                    right_idx += 1;
                }
                let right = values[right_idx].unwrap();
                let gap = (right_idx - left_idx) as f64;
                for k in i..right_idx {
                    let frac = (k - left_idx) as f64 / gap;
                    out.push(left + (right - left) * frac);
                }
                i = right_idx;
            }
        }
    }
    Ok(out)
}

/// Runs gap filling over both series of a market.
pub fn fill_market_gaps(market: MarketSeries) -> Result<MarketSeries> {
    let (arrivals, filled_arr) = fill_series_gaps(&market.arrivals)?;
    let (prices, filled_price) = fill_series_gaps(&market.prices)?;
    Ok(MarketSeries {
        arrivals,
        prices,
        interpolated_arrival_months: filled_arr,
        interpolated_price_months: filled_price,
        ..market
    })
}

/// Full ingest pipeline: parse all three files, aggregate, gap-fill,
/// assemble.
pub fn load_dataset(ndvi: &Path, arrivals: &Path, prices: &Path) -> Result<Dataset> {
    let locations = parse_ndvi_csv(ndvi)?;
    let daily = parse_market_csv(arrivals, prices)?;
    let markets: Result<Vec<MarketSeries>> = daily
        .iter()
        .map(|d| fill_market_gaps(monthly_aggregate(d)))
        .collect();
    Dataset::assemble(locations, markets?)
}

/// Writes the NDVI series back out in the ingest schema. Floats use the
/// shortest round-trip representation, so re-parsing reproduces values
/// bit-exactly.
pub fn write_ndvi_csv(locations: &[LocationSeries], path: &Path) -> Result<()> {
    let mut out = String::from("location_id,lat,lon,month,ndvi\n");
    for loc in locations {
        for &(month, ndvi) in &loc.months {
            writeln!(
                out,
                "{},{},{},{},{}",
                loc.location_id, loc.lat, loc.lon, month, ndvi
            )
            .unwrap();
        }
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Writes markets back out as daily files with one synthetic row on the
/// first of each month, so aggregation on re-parse is the identity.
pub fn write_market_csvs(
    markets: &[MarketSeries],
    arrivals_path: &Path,
    prices_path: &Path,
) -> Result<()> {
    let mut arr = String::from("market_id,market_name,lat,lon,date,arrival_qty\n");
    let mut price = String::from("market_id,date,min_price,max_price,modal_price\n");
    for market in markets {
        for &(month, qty) in &market.arrivals {
            writeln!(
                arr,
                "{},{},{},{},{}-01,{}",
                market.market_id, market.name, market.lat, market.lon, month, qty
            )
            .unwrap();
        }
        for &(month, modal) in &market.prices {
            writeln!(
                price,
                "{},{}-01,{},{},{}",
                market.market_id, month, modal, modal, modal
            )
            .unwrap();
        }
    }
    std::fs::write(arrivals_path, arr).map_err(|e| Error::Io {
        path: arrivals_path.display().to_string(),
        source: e,
    })?;
    std::fs::write(prices_path, price).map_err(|e| Error::Io {
        path: prices_path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn parses_single_location() {
        let f = write_tmp(
            "location_id,lat,lon,month,ndvi\n\
             L1,15.0,76.0,2015-01,0.1\n\
             L1,15.0,76.0,2015-02,0.5\n\
             L1,15.0,76.0,2015-03,0.8\n",
        );
        let locations = parse_ndvi_csv(f.path()).unwrap();
        assert_eq!(locations.len(), 1);
        assert_eq!(locations[0].months.len(), 3);
        assert_eq!(locations[0].months[2].1, 0.8);
    }

    #[test]
    fn rejects_out_of_range_ndvi() {
        let f = write_tmp(
            "location_id,lat,lon,month,ndvi\n\
             L1,15.0,76.0,2015-01,1.7\n",
        );
        let err = parse_ndvi_csv(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ndvi out of range"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn empty_file_with_header_gives_empty_set() {
        let f = write_tmp("location_id,lat,lon,month,ndvi\n");
        let locations = parse_ndvi_csv(f.path()).unwrap();
        assert!(locations.is_empty());
    }

    #[test]
    fn rejects_duplicate_location_month() {
        let f = write_tmp(
            "location_id,lat,lon,month,ndvi\n\
             L1,15.0,76.0,2015-01,0.1\n\
             L1,15.0,76.0,2015-01,0.2\n",
        );
        assert!(parse_ndvi_csv(f.path()).is_err());
    }

    #[test]
    fn rejects_wrong_header() {
        let f = write_tmp("id,lat,lon,month,ndvi\nL1,15.0,76.0,2015-01,0.1\n");
        assert!(parse_ndvi_csv(f.path()).is_err());
    }

    #[test]
    fn parses_markets_with_daily_rows() {
        let arrivals = write_tmp(
            "market_id,market_name,lat,lon,date,arrival_qty\n\
             M1,Kalaburagi,17.3,76.8,2015-01-05,10\n\
             M1,Kalaburagi,17.3,76.8,2015-01-12,20\n\
             M2,Raichur,16.2,77.3,2015-01-05,7\n",
        );
        let prices = write_tmp(
            "market_id,date,min_price,max_price,modal_price\n\
             M1,2015-01-05,3900,4300,4000\n\
             M1,2015-01-12,4000,4500,4200\n\
             M2,2015-01-05,4100,4400,4250\n",
        );
        let daily = parse_market_csv(arrivals.path(), prices.path()).unwrap();
        assert_eq!(daily.len(), 2);
        let m1 = daily.iter().find(|d| d.market_id == "M1").unwrap();
        assert_eq!(m1.arrival_rows.len(), 2);
        assert_eq!(m1.price_rows.len(), 2);
    }

    #[test]
    fn rejects_negative_arrival() {
        let arrivals = write_tmp(
            "market_id,market_name,lat,lon,date,arrival_qty\n\
             M1,K,17.3,76.8,2015-01-05,-5\n",
        );
        let prices = write_tmp("market_id,date,min_price,max_price,modal_price\n");
        assert!(parse_market_csv(arrivals.path(), prices.path()).is_err());
    }

    #[test]
    fn rejects_nonpositive_modal_price() {
        let arrivals = write_tmp("market_id,market_name,lat,lon,date,arrival_qty\n");
        let prices = write_tmp(
            "market_id,date,min_price,max_price,modal_price\n\
             M1,2015-01-05,10,20,0\n",
        );
        assert!(parse_market_csv(arrivals.path(), prices.path()).is_err());
    }

    #[test]
    fn price_only_months_are_flagged() {
        let arrivals = write_tmp(
            "market_id,market_name,lat,lon,date,arrival_qty\n\
             M1,K,17.3,76.8,2015-01-05,10\n",
        );
        let prices = write_tmp(
            "market_id,date,min_price,max_price,modal_price\n\
             M1,2015-01-05,3900,4300,4000\n\
             M1,2015-02-03,3900,4300,4100\n",
        );
        let daily = parse_market_csv(arrivals.path(), prices.path()).unwrap();
        let monthly = monthly_aggregate(&daily[0]);
        assert_eq!(monthly.price_only_months.len(), 1);
        assert_eq!(monthly.price_only_months[0].to_string(), "2015-02");
    }

    #[test]
    fn monthly_aggregation_sums_and_averages() {
        let daily = DailyMarketRecords {
            market_id: "M1".into(),
            name: "K".into(),
            lat: 17.3,
            lon: 76.8,
            arrival_rows: vec![
                ("2015-01".parse().unwrap(), 3, 10.0),
                ("2015-01".parse().unwrap(), 10, 20.0),
                ("2015-01".parse().unwrap(), 20, 30.0),
            ],
            price_rows: vec![
                ("2015-01".parse().unwrap(), 3, 4000.0),
                ("2015-01".parse().unwrap(), 10, 4200.0),
            ],
        };
        let monthly = monthly_aggregate(&daily);
        assert_eq!(monthly.arrivals, vec![("2015-01".parse().unwrap(), 60.0)]);
        assert_eq!(monthly.prices, vec![("2015-01".parse().unwrap(), 4100.0)]);
    }

    #[test]
    fn month_without_rows_stays_missing() {
        let daily = DailyMarketRecords {
            market_id: "M1".into(),
            name: "K".into(),
            lat: 17.3,
            lon: 76.8,
            arrival_rows: vec![
                ("2015-01".parse().unwrap(), 3, 10.0),
                ("2015-03".parse().unwrap(), 3, 30.0),
            ],
            price_rows: vec![],
        };
        let monthly = monthly_aggregate(&daily);
        assert_eq!(monthly.arrivals.len(), 2);
        assert!(monthly.arrival_at("2015-02".parse().unwrap()).is_none());
    }

    #[test]
    fn interpolation_midpoint() {
        let filled = interpolate_missing(&[Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(filled, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn interpolation_linear_in_index() {
        let filled = interpolate_missing(&[Some(10.0), None, None, Some(40.0)]).unwrap();
        assert_eq!(filled, vec![10.0, 20.0, 30.0, 40.0]);
    }

    #[test]
    fn interpolation_rejects_leading_gap() {
        assert!(interpolate_missing(&[None, Some(5.0), Some(6.0)]).is_err());
        assert!(interpolate_missing(&[Some(5.0), Some(6.0), None]).is_err());
        assert!(interpolate_missing(&[Some(5.0)]).is_err());
    }

    #[test]
    fn interpolation_is_idempotent() {
        let once = interpolate_missing(&[Some(2.0), None, None, Some(8.0), None, Some(1.0)])
            .unwrap();
        let again =
            interpolate_missing(&once.iter().map(|&v| Some(v)).collect::<Vec<_>>()).unwrap();
        assert_eq!(once, again);
    }

    #[test]
    fn roundtrip_dataset_through_csv() {
        let locations = vec![LocationSeries {
            location_id: "L1".into(),
            lat: 15.123456789,
            lon: 76.987654321,
            months: vec![
                ("2015-01".parse().unwrap(), 0.123456789012345),
                ("2015-02".parse().unwrap(), -0.5),
            ],
        }];
        let markets = vec![MarketSeries {
            market_id: "M1".into(),
            name: "K".into(),
            lat: 17.3,
            lon: 76.8,
            arrivals: vec![
                ("2015-01".parse().unwrap(), 1234.5),
                ("2015-02".parse().unwrap(), 999.25),
            ],
            prices: vec![
                ("2015-01".parse().unwrap(), 4000.125),
                ("2015-02".parse().unwrap(), 4100.0),
            ],
            price_only_months: vec![],
            interpolated_arrival_months: vec![],
            interpolated_price_months: vec![],
        }];
        let dir = tempfile::tempdir().unwrap();
        let ndvi = dir.path().join("ndvi.csv");
        let arr = dir.path().join("arrivals.csv");
        let price = dir.path().join("prices.csv");
        write_ndvi_csv(&locations, &ndvi).unwrap();
        write_market_csvs(&markets, &arr, &price).unwrap();

        let ds = load_dataset(&ndvi, &arr, &price).unwrap();
        assert_eq!(ds.locations, locations);
        assert_eq!(ds.markets[0].arrivals, markets[0].arrivals);
        assert_eq!(ds.markets[0].prices, markets[0].prices);
        assert_eq!(ds.month_index.len(), 2);
    }

    #[test]
    fn gap_fill_records_filled_months() {
        let market = MarketSeries {
            market_id: "M1".into(),
            name: "K".into(),
            lat: 17.3,
            lon: 76.8,
            arrivals: vec![
                ("2015-01".parse().unwrap(), 10.0),
                ("2015-04".parse().unwrap(), 40.0),
            ],
            prices: vec![
                ("2015-01".parse().unwrap(), 4000.0),
                ("2015-02".parse().unwrap(), 4100.0),
            ],
            price_only_months: vec![],
            interpolated_arrival_months: vec![],
            interpolated_price_months: vec![],
        };
        let filled = fill_market_gaps(market).unwrap();
        assert_eq!(filled.arrivals.len(), 4);
        assert_eq!(filled.arrivals[1].1, 20.0);
        assert_eq!(filled.arrivals[2].1, 30.0);
        assert_eq!(filled.interpolated_arrival_months.len(), 2);
        assert!(filled.interpolated_price_months.is_empty());
    }
}
