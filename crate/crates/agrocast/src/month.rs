//! Calendar month keys. All cross-file joins use the ISO "YYYY-MM" format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month, the atomic time unit of every series in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct YearMonth {
    /// Months since year 0 January; total order and arithmetic fall out of this.
    index: i32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Validation(format!(
                "month {month} out of range 1..=12"
            )));
        }
        Ok(YearMonth {
            index: year * 12 + (month as i32 - 1),
        })
    }

    pub fn year(&self) -> i32 {
        self.index.div_euclid(12)
    }

    /// 1-based month within the year.
    pub fn month(&self) -> u32 {
        (self.index.rem_euclid(12) + 1) as u32
    }

    pub fn next(&self) -> Self {
        YearMonth {
            index: self.index + 1,
        }
    }

    pub fn prev(&self) -> Self {
        YearMonth {
            index: self.index - 1,
        }
    }

    pub fn plus(&self, months: i32) -> Self {
        YearMonth {
            index: self.index + months,
        }
    }

    /// Signed number of months from `other` to `self`.
    pub fn months_since(&self, other: &YearMonth) -> i32 {
        self.index - other.index
    }

    /// Inclusive range of consecutive months.
    pub fn range_inclusive(from: YearMonth, to: YearMonth) -> Vec<YearMonth> {
        (from.index..=to.index)
            .map(|index| YearMonth { index })
            .collect()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Validation(format!("invalid month key {s:?}, expected YYYY-MM"));
        let (y, m) = s.split_once('-').ok_or_else(err)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(err());
        }
        let year: i32 = y.parse().map_err(|_| err())?;
        let month: u32 = m.parse().map_err(|_| err())?;
        YearMonth::new(year, month)
    }
}

impl TryFrom<String> for YearMonth {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<YearMonth> for String {
    fn from(ym: YearMonth) -> String {
        ym.to_string()
    }
}

/// Parses a full "YYYY-MM-DD" date, returning the month and day.
/// Day validity is checked against the month length (leap years included).
pub fn parse_date(s: &str) -> Result<(YearMonth, u32)> {
    let err = || Error::Validation(format!("invalid date {s:?}, expected YYYY-MM-DD"));
    let parts: Vec<&str> = s.split('-').collect();
    if parts.len() != 3 || parts[0].len() != 4 || parts[1].len() != 2 || parts[2].len() != 2 {
        return Err(err());
    }
    let year: i32 = parts[0].parse().map_err(|_| err())?;
    let month: u32 = parts[1].parse().map_err(|_| err())?;
    let day: u32 = parts[2].parse().map_err(|_| err())?;
    let ym = YearMonth::new(year, month)?;
    if day < 1 || day > days_in_month(year, month) {
        return Err(err());
    }
    Ok((ym, day))
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 {
                29
            } else {
                28
            }
        }
        _ => 0,
    }
}
