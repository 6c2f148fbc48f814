//! Mean opinion scores from raw subjective ratings.
//!
//! Each subject's ratings are standardized with that subject's own mean and
//! sample standard deviation, the z-scores are mapped linearly from
//! `[-3, 3]` onto `[0, 100]` (no clamping), and each video's MOS is the mean
//! of its rescaled scores, with the sample standard deviation alongside.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::output::fixed;

/// Lowest and highest valid rating.
pub const RATING_SCALE: (f64, f64) = (1.0, 5.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Rating {
    pub subject: String,
    pub video: String,
    pub score: f64,
}

/// Sparse subject-by-video ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    entries: Vec<Rating>,
}

impl RatingsMatrix {
    pub fn new(entries: Vec<Rating>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &entries {
            if !(RATING_SCALE.0..=RATING_SCALE.1).contains(&r.score) {
                return Err(Error::RatingOutOfRange {
                    subject: r.subject.clone(),
                    video: r.video.clone(),
                    score: r.score,
                });
            }
            if !seen.insert((r.subject.as_str(), r.video.as_str())) {
                return Err(Error::DegenerateInput(format!(
                    "subject `{}` rated `{}` more than once",
                    r.subject, r.video
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Reads `subject_id,video_id,score` rows. When `keep` is given, only
    /// those subjects are retained (pre-screened subject list).
    pub fn from_csv<R: Read>(reader: R, keep: Option<&HashSet<String>>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            subject_id: String,
            video_id: String,
            score: f64,
        }
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut entries = Vec::new();
        for (i, row) in csv.deserialize::<Row>().enumerate() {
            // header is row 1
            let row = row.map_err(|e| Error::Schema {
                file: "ratings".into(),
                row: i + 2,
                reason: e.to_string(),
            })?;
            if keep.is_some_and(|k| !k.contains(&row.subject_id)) {
                continue;
            }
            entries.push(Rating {
                subject: row.subject_id,
                video: row.video_id,
                score: row.score,
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    pub fn subject_count(&self) -> usize {
        self.entries
            .iter()
            .map(|r| r.subject.as_str())
            .collect::<HashSet<_>>()
            .len()
    }
}

/// Standardized rating of one subject for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScore {
    pub subject: String,
    pub video: String,
    pub z: f64,
}

fn mean_and_sample_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Standardizes every rating with its subject's mean and sample std.
pub fn zscore(ratings: &RatingsMatrix) -> Result<Vec<ZScore>> {
    let mut by_subject: HashMap<&str, Vec<f64>> = HashMap::new();
    for r in &ratings.entries {
        by_subject.entry(&r.subject).or_default().push(r.score);
    }
    let mut moments = HashMap::with_capacity(by_subject.len());
    for (subject, scores) in by_subject {
        let (mean, std) = mean_and_sample_std(&scores);
        if scores.len() < 2 || std == 0.0 {
            return Err(Error::DegenerateSubject(subject.to_owned()));
        }
        moments.insert(subject, (mean, std));
    }
    Ok(ratings
        .entries
        .iter()
        .map(|r| {
            let (mean, std) = moments[r.subject.as_str()];
            ZScore {
                subject: r.subject.clone(),
                video: r.video.clone(),
                z: (r.score - mean) / std,
            }
        })
        .collect())
}

/// Maps a z-score from `[-3, 3]` onto `[0, 100]`; values outside pass through.
#[inline]
pub fn rescale(z: f64) -> f64 {
    100.0 * (z + 3.0) / 6.0
}

/// MOS of one video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoMos {
    pub mos: f64,
    /// Sample standard deviation; `None` with a single rating.
    pub std: Option<f64>,
    pub n: usize,
}

/// Per-video MOS keyed by video id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MosResult {
    pub videos: BTreeMap<String, VideoMos>,
}

/// Averages rescaled z-scores per video.
pub fn mos(zscores: &[ZScore]) -> Result<MosResult> {
    let mut by_video: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for z in zscores {
        by_video.entry(&z.video).or_default().push(rescale(z.z));
    }
    let mut videos = BTreeMap::new();
    for (video, scores) in by_video {
        if scores.is_empty() {
            return Err(Error::InsufficientRatings(video.to_owned()));
        }
        let (mean, std) = mean_and_sample_std(&scores);
        videos.insert(
            video.to_owned(),
            VideoMos {
                mos: mean,
                std: (scores.len() >= 2).then_some(std),
                n: scores.len(),
            },
        );
    }
    Ok(MosResult { videos })
}

/// Full pipeline: z-score, rescale, average.
pub fn mos_from_ratings(ratings: &RatingsMatrix) -> Result<MosResult> {
    mos(&zscore(ratings)?)
}

impl MosResult {
    /// Writes `video_id,mos,std,n`; a missing std is left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "video_id,mos,std,n")?;
        for (video, m) in &self.videos {
            let std = m.std.map(fixed).unwrap_or_default();
            writeln!(out, "{video},{},{std},{}", fixed(m.mos), m.n)?;
        }
        Ok(())
    }
}
