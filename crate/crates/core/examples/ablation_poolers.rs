//! Every temporal pooler applied to the same frame-score series.

use favor::temporal::{PoolStrategy, Pooling};

fn main() -> favor::Result<()> {
    // slow drift with two dips
    let raw: Vec<f64> = (0..75)
        .map(|k| {
            let base = 0.85 + 0.05 * (k as f64 / 9.0).sin();
            match k {
                20..=24 => base - 0.35,
                60..=61 => base - 0.5,
                _ => base,
            }
        })
        .collect();

    let mut poolers = vec![("memory".to_string(), Pooling::default())];
    for name in PoolStrategy::NAMES {
        poolers.push((name.to_string(), Pooling::Strategy(PoolStrategy::from_name(name, &[])?)));
    }
    let short = PoolStrategy::from_name(
        "hysteresis",
        &[("fps".into(), "25".into()), ("seconds".into(), "0.5".into())],
    )?;
    poolers.push(("hysteresis (0.5 s)".to_string(), Pooling::Strategy(short)));

    for (label, p) in &poolers {
        println!("{label:<20} {:.4}", p.aggregate(&raw)?.score);
    }
    Ok(())
}
