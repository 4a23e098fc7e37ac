use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Daily closes of an index and its constituents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePanel {
    pub dates: Vec<NaiveDate>,
    pub index_prices: Array1<f64>,
    /// `T × N`, one column per asset.
    pub asset_prices: Array2<f64>,
    pub asset_ids: Vec<String>,
}

impl PricePanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.dates.len();
        if self.index_prices.len() != t || self.asset_prices.nrows() != t {
            return Err(Error::DimensionMismatch(format!(
                "{t} dates, {} index prices, {} asset rows",
                self.index_prices.len(),
                self.asset_prices.nrows()
            )));
        }
        if self.asset_prices.ncols() != self.asset_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} asset columns, {} ids",
                self.asset_prices.ncols(),
                self.asset_ids.len()
            )));
        }
        if let Some(i) = self.dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedDates { line: i + 3 });
        }
        for (i, p) in self.index_prices.iter().enumerate() {
            if !(*p > 0.0) || !p.is_finite() {
                return Err(Error::NonPositivePrice {
                    asset: "index".into(),
                    date: self.dates[i].to_string(),
                });
            }
        }
        for ((i, j), p) in self.asset_prices.indexed_iter() {
            if !(*p > 0.0) || !p.is_finite() {
                return Err(Error::NonPositivePrice {
                    asset: self.asset_ids[j].clone(),
                    date: self.dates[i].to_string(),
                });
            }
        }
        Ok(())
    }

    /// Writes the `date,index,<ids>` CSV layout read by [`load_prices`].
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["date".to_string(), "index".to_string()];
        header.extend(self.asset_ids.iter().cloned());
        w.write_record(&header)?;
        for (t, d) in self.dates.iter().enumerate() {
            let mut row = vec![d.to_string(), self.index_prices[t].to_string()];
            row.extend(self.asset_prices.row(t).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Reject,
    /// Carry the previous date's price forward; a leading gap drops the asset.
    ForwardFill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricePolicy {
    #[default]
    Reject,
    /// Drop any asset with a non-positive price, with a warning.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadConfig {
    pub sort_on_load: bool,
    pub missing: MissingPolicy,
    pub nonpositive: PricePolicy,
}

pub fn load_prices(path: &Path, cfg: &LoadConfig) -> Result<PricePanel> {
    parse_prices(std::fs::File::open(path)?, cfg)
}

struct Row {
    line: usize,
    date: NaiveDate,
    index: f64,
    assets: Vec<Option<f64>>,
}

fn parse_price(s: &str, line: usize, what: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|e| Error::Parse {
        line,
        message: format!("{what}: {e} ({s:?})"),
    })
}

/// Parses `date,index,<asset ids...>` with ISO-8601 dates.
pub fn parse_prices<R: Read>(reader: R, cfg: &LoadConfig) -> Result<PricePanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "date" || &header[1] != "index" {
        return Err(Error::Parse {
            line: 1,
            message: "header must be date,index,<asset ids...>".into(),
        });
    }
    let mut ids: Vec<String> = header.iter().skip(2).map(str::to_string).collect();

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, got {}", header.len(), rec.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("date {:?}: {e}", &rec[0]),
        })?;
        let index = parse_price(&rec[1], line, "index")?.ok_or_else(|| Error::Parse {
            line,
            message: "missing index price".into(),
        })?;
        let assets = rec
            .iter()
            .skip(2)
            .zip(&ids)
            .map(|(s, id)| parse_price(s, line, id))
            .collect::<Result<Vec<_>>>()?;
        rows.push(Row {
            line,
            date,
            index,
            assets,
        });
    }
    if rows.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    if cfg.sort_on_load {
        rows.sort_by_key(|r| r.date);
    }
    if let Some(w) = rows.windows(2).find(|w| w[0].date >= w[1].date) {
        return Err(Error::UnsortedDates { line: w[1].line });
    }
    for r in &rows {
        if !(r.index > 0.0) || !r.index.is_finite() {
            return Err(Error::NonPositivePrice {
                asset: "index".into(),
                date: r.date.to_string(),
            });
        }
    }

    let mut keep = vec![true; ids.len()];
    for j in 0..ids.len() {
        let mut last: Option<f64> = None;
        for r in rows.iter_mut() {
            match r.assets[j] {
                Some(v) if !(v > 0.0) || !v.is_finite() => match cfg.nonpositive {
                    PricePolicy::Reject => {
                        return Err(Error::NonPositivePrice {
                            asset: ids[j].clone(),
                            date: r.date.to_string(),
                        })
                    }
                    PricePolicy::Drop => {
                        log::warn!("dropping asset {}: price {v} on {}", ids[j], r.date);
                        keep[j] = false;
                        break;
                    }
                },
                Some(v) => last = Some(v),
                None => match (cfg.missing, last) {
                    (MissingPolicy::ForwardFill, Some(v)) => r.assets[j] = Some(v),
                    (MissingPolicy::ForwardFill, None) => {
                        log::warn!("dropping asset {}: no price before {}", ids[j], r.date);
                        keep[j] = false;
                        break;
                    }
                    (MissingPolicy::Reject, _) => {
                        return Err(Error::Parse {
                            line: r.line,
                            message: format!("missing price for asset {}", ids[j]),
                        })
                    }
                },
            }
        }
    }

    let cols: Vec<usize> = (0..ids.len()).filter(|&j| keep[j]).collect();
    if cols.is_empty() {
        return Err(Error::InvalidArgument(
            "no usable assets in price file".into(),
        ));
    }
    let asset_prices = Array2::from_shape_fn((rows.len(), cols.len()), |(t, k)| {
        rows[t].assets[cols[k]].expect("filled above")
    });
    ids = cols.iter().map(|&j| ids[j].clone()).collect();
    Ok(PricePanel {
        dates: rows.iter().map(|r| r.date).collect(),
        index_prices: rows.iter().map(|r| r.index).collect(),
        asset_prices,
        asset_ids: ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "date,index,A,B,C\n2024-01-02,100,10,20,30\n2024-01-03,101,10.5,19,31\n2024-01-04,99,10.2,19.5,29\n";

    #[test]
    fn toy_panel() {
        let p = parse_prices(TOY.as_bytes(), &LoadConfig::default()).unwrap();
        assert_eq!(p.n_assets(), 3);
        assert_eq!(p.len(), 3);
        assert_eq!(p.asset_prices[[1, 1]], 19.0);
    }

    #[test]
    fn zero_price_rejected_or_dropped() {
        let bad = TOY.replace("10.5", "0");
        assert!(matches!(
            parse_prices(bad.as_bytes(), &LoadConfig::default()),
            Err(Error::NonPositivePrice { ref asset, .. }) if asset == "A"
        ));
        let cfg = LoadConfig {
            nonpositive: PricePolicy::Drop,
            ..Default::default()
        };
        let p = parse_prices(bad.as_bytes(), &cfg).unwrap();
        assert_eq!(p.asset_ids, vec!["B", "C"]);
    }

    #[test]
    fn shuffled_rows() {
        let lines: Vec<&str> = TOY.lines().collect();
        let shuffled = format!("{}\n{}\n{}\n{}\n", lines[0], lines[3], lines[1], lines[2]);
        assert!(matches!(
            parse_prices(shuffled.as_bytes(), &LoadConfig::default()),
            Err(Error::UnsortedDates { .. })
        ));
        let cfg = LoadConfig {
            sort_on_load: true,
            ..Default::default()
        };
        assert_eq!(
            parse_prices(shuffled.as_bytes(), &cfg).unwrap(),
            parse_prices(TOY.as_bytes(), &LoadConfig::default()).unwrap()
        );
    }

    #[test]
    fn missing_cells() {
        let gap = TOY.replace("19,31", ",31");
        assert!(matches!(
            parse_prices(gap.as_bytes(), &LoadConfig::default()),
            Err(Error::Parse { line: 3, .. })
        ));
        let cfg = LoadConfig {
            missing: MissingPolicy::ForwardFill,
            ..Default::default()
        };
        let p = parse_prices(gap.as_bytes(), &cfg).unwrap();
        assert_eq!(p.asset_prices[[1, 1]], 20.0);
    }

    #[test]
    fn bad_number_reports_line() {
        let bad = TOY.replace("29", "abc");
        assert!(matches!(
            parse_prices(bad.as_bytes(), &LoadConfig::default()),
            Err(Error::Parse { line: 4, .. })
        ));
    }
}
