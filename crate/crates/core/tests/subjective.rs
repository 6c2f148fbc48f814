mod common;

use std::collections::HashSet;
use std::fs::File;

use favor::subjective::{mos_from_ratings, rescale, zscore, Rating, RatingsMatrix};
use favor::Error;
use proptest::prelude::*;

use common::*;

const EXPECTED: [(&str, f64, f64, usize); 4] = [
    ("v1", 43.707157010660, 18.078434642182, 4),
    ("v2", 43.037090342193, 7.230272031247, 3),
    ("v3", 50.158771483409, 18.256383014097, 3),
    ("v4", 61.395946620138, 8.220945297350, 4),
];

fn fixture() -> RatingsMatrix {
    let f = File::open(fixtures().join("ratings_small.csv")).unwrap();
    RatingsMatrix::from_csv(f, None).unwrap()
}

fn rating(subject: &str, video: &str, score: f64) -> Rating {
    Rating { subject: subject.into(), video: video.into(), score }
}

#[test]
fn hand_computed_fixture() {
    let result = mos_from_ratings(&fixture()).unwrap();
    for (video, mos, std, n) in EXPECTED {
        let v = &result.videos[video];
        assert!((v.mos - mos).abs() < 1e-9, "{video}");
        assert!((v.std.unwrap() - std).abs() < 1e-9, "{video}");
        assert_eq!(v.n, n);
    }
    let mut out = Vec::new();
    result.write_csv(&mut out).unwrap();
    let want = std::fs::read_to_string(fixtures().join("ratings_small_mos.csv")).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), want);
}

#[test]
fn two_point_subject_is_exact() {
    // a subject rating 2 and 5: z = -1/sqrt(2), +1/sqrt(2)
    let m = RatingsMatrix::new(vec![rating("a", "x", 2.0), rating("a", "y", 5.0)]).unwrap();
    let z = zscore(&m).unwrap();
    let h = 0.5f64.sqrt();
    assert!((z[0].z + h).abs() < 1e-15 && (z[1].z - h).abs() < 1e-15);
    let r = mos_from_ratings(&m).unwrap();
    assert!((r.videos["x"].mos - rescale(-h)).abs() < 1e-12);
    assert_eq!(r.videos["x"].std, None);
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().contains("\nx,38.214887,,1\n"));
}

#[test]
fn rescale_endpoints() {
    assert_eq!(rescale(-3.0), 0.0);
    assert_eq!(rescale(0.0), 50.0);
    assert_eq!(rescale(3.0), 100.0);
    assert!(rescale(4.0) > 100.0);
}

#[test]
fn subject_filter() {
    let keep: HashSet<String> = ["s1", "s2", "s3"].iter().map(|s| s.to_string()).collect();
    let f = File::open(fixtures().join("ratings_small.csv")).unwrap();
    let m = RatingsMatrix::from_csv(f, Some(&keep)).unwrap();
    assert_eq!(m.subject_count(), 3);
    assert_eq!(mos_from_ratings(&m).unwrap().videos["v1"].n, 3);
}

#[test]
fn rejects_bad_ratings() {
    let flat = RatingsMatrix::new(vec![rating("a", "x", 3.0), rating("a", "y", 3.0)]).unwrap();
    assert!(matches!(zscore(&flat), Err(Error::DegenerateSubject(s)) if s == "a"));
    let single = RatingsMatrix::new(vec![rating("a", "x", 3.0)]).unwrap();
    assert!(matches!(zscore(&single), Err(Error::DegenerateSubject(_))));
    assert!(matches!(
        RatingsMatrix::new(vec![rating("a", "x", 0.5)]),
        Err(Error::RatingOutOfRange { .. })
    ));
    let text = "subject_id,video_id,score\na,x,3\na,y,high\n";
    assert!(matches!(
        RatingsMatrix::from_csv(text.as_bytes(), None),
        Err(Error::Schema { row: 3, .. })
    ));
    let text = "subject,video,score\na,x,3\n";
    assert!(RatingsMatrix::from_csv(text.as_bytes(), None).is_err());
}

fn ratings_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    // 2..5 subjects x 3..7 videos, integer ratings, each subject non-constant
    (2usize..5, 3usize..7).prop_flat_map(|(s, v)| {
        prop::collection::vec(prop::collection::vec(1u8..=5, v), s).prop_map(|mut grid| {
            for row in &mut grid {
                if row.iter().all(|x| *x == row[0]) {
                    row[0] = if row[0] == 5 { 4 } else { row[0] + 1 };
                }
            }
            grid.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect()
        })
    })
}

fn matrix(grid: &[Vec<f64>]) -> Vec<Rating> {
    let mut out = Vec::new();
    for (s, row) in grid.iter().enumerate() {
        for (v, &x) in row.iter().enumerate() {
            out.push(rating(&format!("s{s}"), &format!("v{v}"), x));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subject_affine_invariance(grid in ratings_strategy(), subject in 0usize..5, a in 0.2f64..1.0, b in 0.0f64..1.0) {
        let base = mos_from_ratings(&RatingsMatrix::new(matrix(&grid)).unwrap()).unwrap();
        let mut moved = grid.clone();
        let s = subject % grid.len();
        // stays inside the 1..5 scale
        for x in &mut moved[s] {
            *x = 1.0 + b + a * (*x - 1.0) * (3.0 - b) / 4.0;
        }
        let other = mos_from_ratings(&RatingsMatrix::new(matrix(&moved)).unwrap()).unwrap();
        for (k, v) in &base.videos {
            prop_assert!((v.mos - other.videos[k].mos).abs() < 1e-9);
        }
    }

    #[test]
    fn row_order_does_not_matter(grid in ratings_strategy(), seed in any::<u64>()) {
        let rows = matrix(&grid);
        let mut shuffled = rows.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng(seed));
        let a = mos_from_ratings(&RatingsMatrix::new(rows).unwrap()).unwrap();
        let b = mos_from_ratings(&RatingsMatrix::new(shuffled).unwrap()).unwrap();
        for (k, v) in &a.videos {
            prop_assert!((v.mos - b.videos[k].mos).abs() < 1e-12);
        }
    }

    #[test]
    fn zscores_are_standardized(grid in ratings_strategy()) {
        let z = zscore(&RatingsMatrix::new(matrix(&grid)).unwrap()).unwrap();
        for s in 0..grid.len() {
            let mine: Vec<f64> = z.iter().filter(|r| r.subject == format!("s{s}")).map(|r| r.z).collect();
            let n = mine.len() as f64;
            let mean = mine.iter().sum::<f64>() / n;
            let var = mine.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            prop_assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        }
    }
}
