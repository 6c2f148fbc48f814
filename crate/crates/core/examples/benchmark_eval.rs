//! Correlation benchmark of predictions against MOS, overall and per codec.
//!
//! ```text
//! cargo run --example benchmark_eval -- records.csv
//! ```
//!
//! Records are `video_id,codec,level,pred,mos`.

use std::env;
use std::fs::File;

use favor::eval::{evaluate, EvalRecord, GroupKey};
use favor::pipeline::to_json;

fn demo() -> Vec<EvalRecord> {
    let mut out = Vec::new();
    for (c, codec) in ["hevc", "vvc", "gfvc"].iter().enumerate() {
        for level in 0..8 {
            let pred = 0.55 + 0.05 * level as f64 - 0.02 * c as f64;
            let mos = 15.0 + 70.0 / (1.0 + (-12.0 * (pred - 0.7)).exp()) + 3.0 * ((level * 7 + c) as f64).sin();
            out.push(EvalRecord {
                video_id: format!("{codec}_{level}"),
                codec: codec.to_string(),
                level: (level / 4).to_string(),
                pred,
                mos,
            });
        }
    }
    out
}

fn main() -> favor::Result<()> {
    let records = match env::args().nth(1) {
        Some(path) => EvalRecord::read_csv(File::open(path)?)?,
        None => demo(),
    };
    let report = evaluate(&records, &[GroupKey::Codec])?;
    let o = &report.overall;
    println!("overall  PLCC {:.4}  SRCC {:.4}  KRCC {:.4}  RMSE {:.4}", o.plcc, o.srcc, o.krcc, o.rmse);
    print!("{}", to_json(&report)?);
    Ok(())
}
