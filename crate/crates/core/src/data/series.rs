use std::io::Read;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Daily log losses `L_t = -log(P_t / P_{t-1})`, dated by `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSeries {
    pub dates: Vec<NaiveDate>,
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// `date,close`
    #[default]
    Price,
    /// `date,return` with net returns `r_t`, so `L_t = -log(1 + r_t)`.
    Return,
}

impl LossSeries {
    pub fn new(dates: Vec<NaiveDate>, losses: Vec<f64>) -> Result<Self> {
        if dates.len() != losses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dates for {} losses",
                dates.len(),
                losses.len()
            )));
        }
        if let Some(i) = losses.iter().position(|l| !l.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedDates(i + 2));
        }
        Ok(Self { dates, losses })
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.losses.iter().sum::<f64>() / self.len() as f64
    }
}

pub fn load_prices_csv(path: impl AsRef<Path>, mode: InputMode) -> Result<LossSeries> {
    read_prices(std::fs::File::open(path)?, mode)
}

/// Parses a price or return CSV. Line numbers in errors count the header
/// as line 1.
pub fn read_prices<R: Read>(input: R, mode: InputMode) -> Result<LossSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let value_col = match mode {
        InputMode::Price => "close",
        InputMode::Return => "return",
    };
    let (Some(dc), Some(vc)) = (find("date"), find(value_col)) else {
        return Err(Error::Parse {
            line: 1,
            message: format!("header needs `date` and `{value_col}` columns"),
        });
    };

    let mut rows: Vec<(NaiveDate, f64, usize)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let field = |c: usize| {
            rec.get(c).ok_or_else(|| Error::Parse {
                line,
                message: "missing field".into(),
            })
        };
        let d = field(dc)?;
        let date = NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|_| Error::Parse {
            line,
            message: format!("bad date {d:?}"),
        })?;
        let v = field(vc)?;
        let v: f64 = v.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad number {v:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite value {v}"),
            });
        }
        match mode {
            InputMode::Price if v <= 0.0 => return Err(Error::NonPositivePrice(line)),
            InputMode::Return if v <= -1.0 => return Err(Error::NonPositivePrice(line)),
            _ => {}
        }
        if let Some(&(prev, _, _)) = rows.last() {
            if date <= prev {
                return Err(Error::UnorderedDates(line));
            }
        }
        rows.push((date, v, line));
    }

    let (dates, losses) = match mode {
        InputMode::Price => {
            if rows.len() < 2 {
                return Err(Error::TooFewRows);
            }
            rows.windows(2)
                .map(|w| (w[1].0, -(w[1].1 / w[0].1).ln()))
                .unzip()
        }
        InputMode::Return => {
            if rows.is_empty() {
                return Err(Error::TooFewRows);
            }
            rows.iter().map(|&(d, r, _)| (d, -r.ln_1p())).unzip()
        }
    };
    LossSeries::new(dates, losses)
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowSpec {
    /// Consecutive blocks of this many calendar years, from the first year.
    Years(u32),
    /// Inclusive date ranges.
    Ranges(Vec<(NaiveDate, NaiveDate)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub id: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub series: LossSeries,
    /// The window asks for years the data does not reach.
    pub partial: bool,
}

fn slice(series: &LossSeries, keep: impl Fn(NaiveDate) -> bool) -> LossSeries {
    let (dates, losses) = series
        .dates
        .iter()
        .zip(&series.losses)
        .filter(|(d, _)| keep(**d))
        .map(|(d, l)| (*d, *l))
        .unzip();
    LossSeries { dates, losses }
}

pub fn window_split(series: &LossSeries, spec: &WindowSpec) -> Result<Vec<Window>> {
    let (Some(first), Some(last)) = (series.dates.first(), series.dates.last()) else {
        return Err(Error::EmptySeries);
    };
    match spec {
        WindowSpec::Years(0) => Err(Error::Config("window length must be at least one year".into())),
        WindowSpec::Years(k) => {
            let k = *k as i32;
            let (y0, y1) = (first.year(), last.year());
            let mut out = Vec::new();
            let mut start = y0;
            while start <= y1 {
                let end = start + k - 1;
                let s = slice(series, |d| (start..=end).contains(&d.year()));
                if !s.is_empty() {
                    out.push(Window {
                        id: out.len(),
                        start: NaiveDate::from_ymd_opt(start, 1, 1).unwrap(),
                        end: NaiveDate::from_ymd_opt(end, 12, 31).unwrap(),
                        series: s,
                        partial: end > y1,
                    });
                }
                start += k;
            }
            Ok(out)
        }
        WindowSpec::Ranges(ranges) => ranges
            .iter()
            .enumerate()
            .map(|(id, &(a, b))| {
                let s = slice(series, |d| a <= d && d <= b);
                if s.is_empty() {
                    return Err(Error::EmptySeries);
                }
                Ok(Window {
                    id,
                    start: a,
                    end: b,
                    series: s,
                    partial: a < *first || b > *last,
                })
            })
            .collect(),
    }
}
