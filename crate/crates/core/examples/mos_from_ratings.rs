//! Raw subjective ratings to per-video MOS.
//!
//! ```text
//! cargo run --example mos_from_ratings -- ratings.csv
//! ```
//!
//! The CSV has `subject_id,video_id,score` rows on a 1..5 scale.

use std::env;
use std::fs::File;
use std::io;

use favor::subjective::{mos_from_ratings, zscore, Rating, RatingsMatrix};

fn demo() -> favor::Result<RatingsMatrix> {
    let table = [
        ("alice", [5.0, 4.0, 2.0, 1.0]),
        ("bob", [4.0, 4.0, 3.0, 2.0]),
        ("carol", [5.0, 3.0, 3.0, 1.0]),
    ];
    let mut entries = Vec::new();
    for (subject, scores) in table {
        for (v, score) in scores.into_iter().enumerate() {
            entries.push(Rating { subject: subject.into(), video: format!("clip{v}"), score });
        }
    }
    RatingsMatrix::new(entries)
}

fn main() -> favor::Result<()> {
    let ratings = match env::args().nth(1) {
        Some(path) => RatingsMatrix::from_csv(File::open(path)?, None)?,
        None => demo()?,
    };
    for z in zscore(&ratings)?.iter().take(4) {
        println!("{} rated {}: z = {:+.3}", z.subject, z.video, z.z);
    }
    mos_from_ratings(&ratings)?.write_csv(io::stdout())
}
