//! Deterministic synthetic input data: seasonal and diurnal profiles with
//! bounded noise, optional planted extreme days, and small datasets with
//! known clustering or dominance structure.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::{
    AttributeProfile, Dataset, EL_DEMAND, EL_PRICE, HEAT_DEMAND, SOLAR_CF, STANDARD_ATTRIBUTES, T_AMBIENT,
};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic data configuration: {0}")]
    InvalidConfig(String),
}

pub const HOURS_PER_DAY: usize = 24;

/// Annual cosine: `mean + amplitude * cos(2π (doy - peak_day) / 365)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seasonal {
    pub mean: f64,
    pub amplitude: f64,
    pub peak_day: f64,
}

impl Seasonal {
    pub fn at(&self, doy: f64) -> f64 {
        self.mean + self.amplitude * (2.0 * PI * (doy - self.peak_day) / 365.0).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedExtreme {
    pub day: usize,
    pub attribute: String,
    /// Above one, the day becomes `scale` times the hourwise maximum over
    /// all generated days; below one, `scale` times the hourwise minimum.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceBand {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Default for PriceBand {
    fn default() -> Self {
        Self {
            min: 0.190,
            max: 0.370,
            mean: 0.301,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_days: usize,
    pub seed: u64,
    /// Day of year of the first generated day (0 = 1 January).
    pub start_day: usize,
    /// Relative half-width of the multiplicative demand noise.
    pub noise: f64,
    /// Daily mean electricity demand, kW.
    pub el_demand: Seasonal,
    /// Daily mean ambient temperature, degC.
    pub t_ambient: Seasonal,
    /// Half-width of the day-to-day temperature offset, K.
    pub t_noise: f64,
    /// Clear-sky noon capacity factor.
    pub solar_peak: Seasonal,
    /// Cloud cover removes up to this fraction of a day's solar output.
    pub cloudiness: f64,
    /// Space heating starts below this temperature, degC.
    pub heating_limit: f64,
    /// Space heating per kelvin below the limit, kW/K.
    pub heat_per_kelvin: f64,
    /// Constant hot water demand, kW.
    pub hot_water: f64,
    pub price_band: PriceBand,
    pub planted_extremes: Vec<PlantedExtreme>,
}

impl Default for SynthConfig {
    /// 90 winter days starting 1 January with a planted cold spell, see
    /// [`killer_spell`].
    fn default() -> Self {
        Self {
            n_days: 90,
            seed: 7,
            start_day: 0,
            noise: 0.1,
            el_demand: Seasonal {
                mean: 0.45,
                amplitude: 0.1,
                peak_day: 15.0,
            },
            t_ambient: Seasonal {
                mean: 9.0,
                amplitude: 9.0,
                peak_day: 196.0,
            },
            t_noise: 3.0,
            solar_peak: Seasonal {
                mean: 0.45,
                amplitude: 0.25,
                peak_day: 172.0,
            },
            cloudiness: 0.6,
            heating_limit: 16.0,
            heat_per_kelvin: 0.3,
            hot_water: 0.3,
            price_band: PriceBand::default(),
            planted_extremes: killer_spell(),
        }
    }
}

/// Days 8 to 12 get 2.2 to 2.6 times the peak heat demand, and the killer
/// day 10 gets three times the peak heat demand with a tenth of the weakest
/// solar profile. The spell days resemble each other, so clustering merges
/// the killer day with its neighbours instead of isolating it.
pub fn killer_spell() -> Vec<PlantedExtreme> {
    let heat = |day, scale| PlantedExtreme {
        day,
        attribute: HEAT_DEMAND.into(),
        scale,
    };
    vec![
        heat(8, 2.2),
        heat(9, 2.5),
        heat(10, 3.0),
        PlantedExtreme {
            day: 10,
            attribute: SOLAR_CF.into(),
            scale: 0.1,
        },
        heat(11, 2.6),
        heat(12, 2.3),
    ]
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.n_days == 0 {
            return bad("n_days must be positive");
        }
        if !(0.0..1.0).contains(&self.noise) || !(0.0..=1.0).contains(&self.cloudiness) || !(self.t_noise >= 0.0) {
            return bad("noise must lie in [0, 1), cloudiness in [0, 1], t_noise >= 0");
        }
        let b = &self.price_band;
        if !(b.min >= 0.0 && b.min <= b.mean && b.mean <= b.max) || (b.min < b.max && !(b.min < b.mean && b.mean < b.max)) {
            return bad("price band needs 0 <= min < mean < max, or min = mean = max");
        }
        for p in &self.planted_extremes {
            if p.day >= self.n_days {
                return Err(SynthError::InvalidConfig(format!(
                    "planted day {} outside 0..{}",
                    p.day, self.n_days
                )));
            }
            if !STANDARD_ATTRIBUTES.contains(&p.attribute.as_str()) {
                return Err(SynthError::InvalidConfig(format!("unknown attribute `{}`", p.attribute)));
            }
            if !(p.scale >= 0.0) {
                return bad("planted scale must be nonnegative");
            }
        }
        Ok(())
    }
}

/// Hourly electricity demand shape with morning and evening peaks, mean one.
fn el_shape() -> Vec<f64> {
    let raw: Vec<f64> = (0..HOURS_PER_DAY)
        .map(|t| {
            let h = t as f64 + 0.5;
            let bump = |c: f64, w: f64| (-((h - c) / w).powi(2)).exp();
            0.5 + 0.9 * bump(7.5, 1.5) + 1.3 * bump(19.0, 2.0)
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.iter().map(|v| v / mean).collect()
}

/// Price shape before mapping to the band.
fn price_shape(h: f64) -> f64 {
    let bump = |c: f64, w: f64| (-((h - c) / w).powi(2)).exp();
    1.0 + 0.6 * bump(8.0, 2.0) + 0.9 * bump(18.5, 2.5) - 0.3 * bump(13.0, 2.0)
}

fn daylength(doy: f64) -> f64 {
    12.0 - 4.0 * (2.0 * PI * (doy + 10.0) / 365.0).cos()
}

/// Map values onto `[min, max]` and bend them with a power so the mean hits
/// the band mean: `min + (max - min) u^γ`, γ found by bisection.
fn fit_price_band(raw: &mut [f64], band: &PriceBand) {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = band.max - band.min;
    if span == 0.0 || hi <= lo {
        raw.iter_mut().for_each(|v| *v = band.mean);
        return;
    }
    let u: Vec<f64> = raw.iter().map(|v| (v - lo) / (hi - lo)).collect();
    let target = (band.mean - band.min) / span;
    let mean_at = |g: f64| u.iter().map(|x| x.powf(g)).sum::<f64>() / u.len() as f64;
    // mean_at decreases in γ.
    let (mut a, mut b) = (-30.0_f64, 30.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mean_at(mid.exp()) > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    let g = (0.5 * (a + b)).exp();
    for (v, x) in raw.iter_mut().zip(&u) {
        *v = band.min + span * x.powf(g);
    }
}

/// Generate a dataset with the five standard attributes.
pub fn generate(config: &SynthConfig) -> Result<Dataset, SynthError> {
    config.validate()?;
    let h = HOURS_PER_DAY;
    let n = config.n_days * h;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut el = Vec::with_capacity(n);
    let mut heat = Vec::with_capacity(n);
    let mut temp = Vec::with_capacity(n);
    let mut solar = Vec::with_capacity(n);
    let mut price = Vec::with_capacity(n);
    let shape = el_shape();
    let unif = |rng: &mut ChaCha8Rng, w: f64| if w > 0.0 { rng.gen_range(-w..=w) } else { 0.0 };

    for d in 0..config.n_days {
        let doy = ((config.start_day + d) % 365) as f64;
        let el_level = config.el_demand.at(doy).max(0.0);
        let t_mean = config.t_ambient.at(doy) + unif(&mut rng, config.t_noise);
        let clear = config.solar_peak.at(doy).clamp(0.0, 1.0);
        let cloud = 1.0 - config.cloudiness * rng.gen::<f64>();
        let len = daylength(doy);
        let (rise, set) = (12.5 - len / 2.0, 12.5 + len / 2.0);
        for t in 0..h {
            let hour = t as f64 + 0.5;
            el.push((el_level * shape[t] * (1.0 + unif(&mut rng, config.noise))).max(0.0));
            let temp_h = t_mean + 3.0 * (2.0 * PI * (hour - 15.0) / 24.0).cos() + unif(&mut rng, 0.5);
            temp.push(temp_h);
            let space = config.heat_per_kelvin * (config.heating_limit - temp_h).max(0.0);
            heat.push(((space + config.hot_water) * (1.0 + unif(&mut rng, config.noise))).max(0.0));
            let cf = if hour > rise && hour < set {
                clear * cloud * (PI * (hour - rise) / len).sin() * (1.0 + unif(&mut rng, config.noise))
            } else {
                0.0
            };
            solar.push(cf.clamp(0.0, 1.0));
            price.push(price_shape(hour) * (1.0 + unif(&mut rng, config.noise)) + 0.1 * el_level);
        }
    }
    fit_price_band(&mut price, &config.price_band);

    let mut rows = [el, heat, temp, solar, price];
    plant(&mut rows, config)?;
    let attrs = STANDARD_ATTRIBUTES
        .iter()
        .zip(rows)
        .map(|(name, values)| AttributeProfile::new(*name, values))
        .collect();
    Dataset::new(attrs, h).map_err(|e| SynthError::InvalidConfig(e.to_string()))
}

fn plant(rows: &mut [Vec<f64>; 5], config: &SynthConfig) -> Result<(), SynthError> {
    let h = HOURS_PER_DAY;
    // Envelopes come from the unplanted data so planting order is irrelevant.
    let envelopes: Vec<(Vec<f64>, Vec<f64>)> = rows
        .iter()
        .map(|row| {
            let mut max = vec![f64::NEG_INFINITY; h];
            let mut min = vec![f64::INFINITY; h];
            for day in row.chunks(h) {
                for t in 0..h {
                    max[t] = max[t].max(day[t]);
                    min[t] = min[t].min(day[t]);
                }
            }
            (max, min)
        })
        .collect();
    for p in &config.planted_extremes {
        let a = STANDARD_ATTRIBUTES.iter().position(|n| *n == p.attribute).expect("validated");
        let (max, min) = &envelopes[a];
        let base = if p.scale >= 1.0 { max } else { min };
        for t in 0..h {
            let mut v = p.scale * base[t];
            if p.attribute == SOLAR_CF {
                v = v.clamp(0.0, 1.0);
            }
            rows[a][p.day * h + t] = v;
        }
    }
    Ok(())
}

/// `k` distinct days, each repeated `copies` times, in a fixed shuffled
/// order.
pub fn duplicated_day_dataset(k: usize, copies: usize) -> Dataset {
    let year = generate(&SynthConfig {
        n_days: 365,
        planted_extremes: Vec::new(),
        ..SynthConfig::default()
    })
    .expect("default configuration is valid");
    let step = 365 / k.max(1);
    let mut order: Vec<usize> = (0..k).flat_map(|j| std::iter::repeat(j * step).take(copies)).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let periods: Vec<_> = order.iter().map(|&d| year.day(d)).collect();
    Dataset::from_periods(&year.attribute_names(), &periods).expect("periods share one layout")
}

/// A dataset in which one day dominates every other day hour by hour:
/// strictly highest electricity and heat demand, lowest temperature and
/// lowest (or equally zero) solar availability. Returns the dataset and the dominating day.
pub fn dominance_dataset(config: &SynthConfig) -> Result<(Dataset, usize), SynthError> {
    let base = generate(&SynthConfig {
        planted_extremes: Vec::new(),
        ..config.clone()
    })?;
    let h = HOURS_PER_DAY;
    let heat = base.attribute(HEAT_DEMAND).expect("standard attribute");
    let day = (0..base.n_days())
        .max_by(|&a, &b| {
            let s = |d: usize| heat.values[d * h..(d + 1) * h].iter().sum::<f64>();
            s(a).total_cmp(&s(b)).then(b.cmp(&a))
        })
        .expect("n_days > 0");
    let mut rows: Vec<Vec<f64>> = base.attributes().iter().map(|a| a.values.clone()).collect();
    for (a, name) in STANDARD_ATTRIBUTES.iter().enumerate() {
        let take_max = match *name {
            EL_DEMAND | HEAT_DEMAND => true,
            SOLAR_CF | T_AMBIENT => false,
            EL_PRICE => continue,
            _ => unreachable!(),
        };
        for t in 0..h {
            let hour = (0..base.n_days()).map(|d| rows[a][d * h + t]);
            // Step strictly past the envelope so no other day ties.
            rows[a][day * h + t] = if take_max {
                hour.fold(f64::NEG_INFINITY, f64::max) * 1.001 + 1e-6
            } else if *name == SOLAR_CF {
                hour.fold(f64::INFINITY, f64::min) * 0.999
            } else {
                hour.fold(f64::INFINITY, f64::min) - 0.1
            };
        }
    }
    let attrs = STANDARD_ATTRIBUTES
        .iter()
        .zip(rows)
        .map(|(name, values)| AttributeProfile::new(*name, values))
        .collect();
    let data = Dataset::new(attrs, h).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    Ok((data, day))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{attribute_extremum, Direction, Statistic};

    #[test]
    fn el_shape_has_unit_mean() {
        let m: f64 = el_shape().iter().sum::<f64>() / 24.0;
        assert!((m - 1.0).abs() < 1e-12, "{m}");
    }

    #[test]
    fn default_dataset_shape_and_ranges() {
        let d = generate(&SynthConfig::default()).unwrap();
        assert_eq!(d.n_days(), 90);
        assert_eq!(d.hours_per_day(), 24);
        d.validate_ranges().unwrap();
        assert_eq!(attribute_extremum(&d, HEAT_DEMAND, Statistic::Absolute, Direction::Max).unwrap(), 10);
        assert_eq!(attribute_extremum(&d, SOLAR_CF, Statistic::Integral, Direction::Min).unwrap(), 10);
    }

    #[test]
    fn price_band_statistics() {
        let d = generate(&SynthConfig::default()).unwrap();
        let p = &d.attribute(EL_PRICE).unwrap().values;
        let min = p.iter().copied().fold(f64::INFINITY, f64::min);
        let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((min - 0.190).abs() < 1e-6);
        assert!((max - 0.370).abs() < 1e-6);
        assert!((mean - 0.301).abs() < 1e-6);
    }

    #[test]
    fn invalid_configs() {
        let mut c = SynthConfig::default();
        c.planted_extremes[0].day = 90;
        assert!(generate(&c).is_err());
        let c = SynthConfig {
            price_band: PriceBand { min: 0.3, max: 0.2, mean: 0.25 },
            ..SynthConfig::default()
        };
        assert!(generate(&c).is_err());
    }

    #[test]
    fn duplicated_days() {
        let d = duplicated_day_dataset(3, 5);
        assert_eq!(d.n_days(), 15);
        let mut distinct: Vec<Vec<f64>> = Vec::new();
        for p in d.periods() {
            let f = p.flatten();
            if !distinct.contains(&f) {
                distinct.push(f);
            }
        }
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn dominating_day_dominates() {
        let (d, day) = dominance_dataset(&SynthConfig::default()).unwrap();
        let h = d.hours_per_day();
        let row = |name: &str, dd: usize, t: usize| d.attribute(name).unwrap().values[dd * h + t];
        for other in 0..d.n_days() {
            for t in 0..h {
                assert!(row(EL_DEMAND, day, t) >= row(EL_DEMAND, other, t));
                assert!(row(HEAT_DEMAND, day, t) >= row(HEAT_DEMAND, other, t));
                assert!(row(SOLAR_CF, day, t) <= row(SOLAR_CF, other, t));
                assert!(row(T_AMBIENT, day, t) <= row(T_AMBIENT, other, t));
            }
        }
    }
}
