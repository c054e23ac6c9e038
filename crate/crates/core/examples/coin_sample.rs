//! Writes the bundled synthetic coin price sample and its lag-2 returns table.
//!
//!     cargo run -p discovars-core --example coin_sample -- data
//!
//! Eight daily closing-price series over 1090 days from 2017-10-01. Log
//! returns share a market factor, BNP leads the market by one day and ETH
//! follows BTC with a two-day lag, so the dependency network has some
//! lagged structure to find.

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use discovars_core::ingest::{compute_returns, DataTable, ReturnDenominator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};

const SYMBOLS: [&str; 8] = ["BTC", "ETH", "XRP", "LTC", "BCH", "BNP", "EOS", "XLM"];
const START_PRICES: [f64; 8] = [4400.0, 300.0, 0.2, 52.0, 420.0, 1.1, 0.7, 0.02];
const BETAS: [f64; 8] = [1.0, 1.15, 0.9, 1.05, 1.2, 0.7, 1.1, 0.95];
const DAYS: usize = 1090;
const SEED: u64 = 20171001;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let shock = StudentT::new(4.0)?;
    let idio = Normal::new(0.0, 0.025)?;

    let d = SYMBOLS.len();
    let mut log_returns = vec![vec![0.0; d]; DAYS];
    for t in 1..DAYS {
        let market = 0.022 * shock.sample(&mut rng) / 2f64.sqrt();
        for c in 0..d {
            let mut r = BETAS[c] * market + idio.sample(&mut rng);
            if c != 5 {
                r += 0.35 * log_returns[t - 1][5];
            }
            if c == 1 && t >= 2 {
                r += 0.3 * log_returns[t - 2][0];
            }
            log_returns[t][c] = r.clamp(-0.6, 0.6);
        }
    }

    let mut prices = vec![START_PRICES.to_vec()];
    for t in 1..DAYS {
        let prev = &prices[t - 1];
        prices.push((0..d).map(|c| prev[c] * log_returns[t][c].exp()).collect());
    }

    let start = NaiveDate::from_ymd_opt(2017, 10, 1).expect("valid date");
    let mut csv = format!("date,{}\n", SYMBOLS.join(","));
    for (t, row) in prices.iter().enumerate() {
        write!(csv, "{}", start + Duration::days(t as i64))?;
        for p in row {
            write!(csv, ",{p}")?;
        }
        csv.push('\n');
    }
    std::fs::write(out.join("coin1_prices.csv"), csv)?;

    let table = DataTable::from_rows(SYMBOLS.iter().map(|s| s.to_string()).collect(), &prices)?;
    let returns = compute_returns(&table, 2, ReturnDenominator::Current)?;
    std::fs::write(out.join("coin1_returns.csv"), returns.to_csv()?)?;
    println!("{} x {} returns", returns.nrows(), returns.ncols());
    Ok(())
}
