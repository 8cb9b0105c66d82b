use serde::{Deserialize, Serialize};

/// How the first pass over a word is delimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstPassRule {
    /// The first visit to the word counts, whenever it happens.
    #[default]
    FirstVisit,
    /// A first visit that comes after any word to the right was fixated
    /// does not count as first pass.
    BeforeRightward,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WordMeasures {
    pub fprt_ms: Option<f64>,
    pub go_past_ms: Option<f64>,
    pub n_fixations: usize,
    pub skipped: bool,
}

/// Word-level reading measures from a scanpath of `(word, duration)`
/// entries. `None` words are fixations outside every AOI: they end a run
/// on a word but still take time inside a go-past region.
///
/// * first-pass reading time: durations of the consecutive run that opens
///   the first visit to the word;
/// * go-past time: every fixation from the first one on the word up to,
///   not including, the first later fixation on a word further right (or
///   to the end of the trial);
/// * skipped: never fixated, both measures undefined.
pub fn compute_measures(scanpath: &[(Option<usize>, f64)], n_words: usize, rule: FirstPassRule) -> Vec<WordMeasures> {
    let mut out = vec![
        WordMeasures {
            skipped: true,
            ..Default::default()
        };
        n_words
    ];
    let mut first_seen: Vec<Option<usize>> = vec![None; n_words];
    // rightmost word fixated before each position
    let mut rightmost_before: Vec<Option<usize>> = Vec::with_capacity(scanpath.len());
    let mut rightmost = None;
    for (pos, &(word, _)) in scanpath.iter().enumerate() {
        rightmost_before.push(rightmost);
        if let Some(w) = word.filter(|&w| w < n_words) {
            out[w].n_fixations += 1;
            first_seen[w].get_or_insert(pos);
            rightmost = rightmost.max(Some(w));
        }
    }

    for (w, first) in first_seen.iter().enumerate() {
        let Some(first) = *first else { continue };
        let m = &mut out[w];
        m.skipped = false;

        let entered_from_right = rightmost_before[first].is_some_and(|r| r > w);
        if !(rule == FirstPassRule::BeforeRightward && entered_from_right) {
            let fprt = scanpath[first..]
                .iter()
                .take_while(|&&(word, _)| word == Some(w))
                .map(|&(_, d)| d)
                .sum();
            m.fprt_ms = Some(fprt);
        }

        let go_past = scanpath[first..]
            .iter()
            .take_while(|&&(word, _)| !word.is_some_and(|x| x > w && x < n_words))
            .map(|&(_, d)| d)
            .sum();
        m.go_past_ms = Some(go_past);
    }
    out
}

/// One row of the measure CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub reader_id: String,
    pub text_id: String,
    pub word_index: usize,
    pub word: String,
    pub fprt_ms: Option<f64>,
    pub go_past_ms: Option<f64>,
    #[serde(with = "bool_as_int")]
    pub skipped: bool,
    #[serde(skip)]
    pub n_fixations: usize,
}

mod bool_as_int {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!("skipped must be 0 or 1, got {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(entries: &[(usize, f64)]) -> Vec<(Option<usize>, f64)> {
        entries.iter().map(|&(w, d)| (Some(w), d)).collect()
    }

    #[test]
    fn hand_traced_scanpath() {
        let sp = path(&[(1, 100.0), (2, 150.0), (1, 120.0), (2, 80.0), (3, 200.0)]);
        let m = compute_measures(&sp, 4, FirstPassRule::FirstVisit);
        assert!(m[0].skipped);
        assert_eq!(m[0].fprt_ms, None);
        assert_eq!((m[1].fprt_ms, m[1].go_past_ms), (Some(100.0), Some(100.0)));
        assert_eq!((m[2].fprt_ms, m[2].go_past_ms), (Some(150.0), Some(350.0)));
        assert_eq!((m[3].fprt_ms, m[3].go_past_ms), (Some(200.0), Some(200.0)));
        assert_eq!(m[1].n_fixations, 2);
    }

    #[test]
    fn single_fixation() {
        let m = compute_measures(&path(&[(5, 90.0)]), 8, FirstPassRule::FirstVisit);
        assert_eq!(m[5].fprt_ms, Some(90.0));
        assert_eq!(m[5].go_past_ms, Some(90.0));
        assert!(m.iter().enumerate().all(|(i, x)| x.skipped == (i != 5)));
    }

    #[test]
    fn refixations_extend_first_pass() {
        let m = compute_measures(&path(&[(0, 100.0), (0, 50.0), (1, 80.0), (0, 60.0)]), 2, FirstPassRule::FirstVisit);
        assert_eq!(m[0].fprt_ms, Some(150.0));
        assert_eq!(m[0].go_past_ms, Some(150.0));
    }

    #[test]
    fn off_text_fixation_ends_the_run() {
        let sp = vec![(Some(0), 100.0), (None, 40.0), (Some(0), 70.0), (Some(1), 90.0)];
        let m = compute_measures(&sp, 2, FirstPassRule::FirstVisit);
        assert_eq!(m[0].fprt_ms, Some(100.0));
        assert_eq!(m[0].go_past_ms, Some(210.0));
    }

    #[test]
    fn last_word_go_past_runs_to_end() {
        let m = compute_measures(&path(&[(2, 100.0), (0, 50.0), (1, 70.0)]), 3, FirstPassRule::FirstVisit);
        assert_eq!(m[2].go_past_ms, Some(220.0));
    }

    #[test]
    fn strict_rule_drops_late_first_visits() {
        // word 1 is first fixated after word 2: a regression, not first pass
        let sp = path(&[(0, 100.0), (2, 150.0), (1, 120.0), (3, 90.0)]);
        let loose = compute_measures(&sp, 4, FirstPassRule::FirstVisit);
        let strict = compute_measures(&sp, 4, FirstPassRule::BeforeRightward);
        assert_eq!(loose[1].fprt_ms, Some(120.0));
        assert_eq!(strict[1].fprt_ms, None);
        assert!(!strict[1].skipped);
        assert_eq!(strict[2].fprt_ms, Some(150.0));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            MeasureRecord {
                reader_id: "r1".into(),
                text_id: "t1".into(),
                word_index: 0,
                word: "Hello,".into(),
                fprt_ms: Some(210.0),
                go_past_ms: Some(250.5),
                skipped: false,
                n_fixations: 0,
            },
            MeasureRecord {
                reader_id: "r1".into(),
                text_id: "t1".into(),
                word_index: 1,
                word: "world".into(),
                fprt_ms: None,
                go_past_ms: None,
                skipped: true,
                n_fixations: 0,
            },
        ];
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.serialize(r).unwrap();
        }
        let bytes = w.into_inner().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("reader_id,text_id,word_index,word,fprt_ms,go_past_ms,skipped\n"));
        assert!(text.contains("r1,t1,1,world,,,1\n"));
        let back: Vec<MeasureRecord> = csv::Reader::from_reader(bytes.as_slice())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back, rows);
    }

    /// Walks the scanpath once per word, tracking visit state explicitly.
    fn naive_measures(sp: &[(Option<usize>, f64)], n: usize) -> Vec<(Option<f64>, Option<f64>, bool)> {
        (0..n)
            .map(|w| {
                let mut fprt: Option<f64> = None;
                let mut go_past: Option<f64> = None;
                let mut in_first_visit = false;
                let mut first_visit_done = false;
                let mut go_past_open = false;
                let mut go_past_done = false;
                for &(word, d) in sp {
                    let on_w = word == Some(w);
                    if on_w && !first_visit_done {
                        in_first_visit = true;
                    }
                    if in_first_visit {
                        if on_w {
                            *fprt.get_or_insert(0.0) += d;
                        } else {
                            in_first_visit = false;
                            first_visit_done = true;
                        }
                    }
                    if on_w && !go_past_open && !go_past_done {
                        go_past_open = true;
                    }
                    if go_past_open {
                        if let Some(x) = word {
                            if x > w && x < n {
                                go_past_open = false;
                                go_past_done = true;
                                continue;
                            }
                        }
                        *go_past.get_or_insert(0.0) += d;
                    }
                }
                (fprt, go_past, fprt.is_none())
            })
            .collect()
    }

    proptest! {
        #[test]
        fn matches_naive_walker(
            sp in prop::collection::vec((prop::option::weighted(0.9, 0usize..8), 50u32..400), 0..30)
        ) {
            let sp: Vec<(Option<usize>, f64)> = sp.into_iter().map(|(w, d)| (w, d as f64)).collect();
            let fast = compute_measures(&sp, 8, FirstPassRule::FirstVisit);
            let slow = naive_measures(&sp, 8);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert_eq!((a.fprt_ms, a.go_past_ms, a.skipped), *b);
            }
            let total: f64 = sp.iter().map(|e| e.1).sum();
            for m in &fast {
                if let (Some(f), Some(g)) = (m.fprt_ms, m.go_past_ms) {
                    prop_assert!(f <= g);
                    prop_assert!(g <= total);
                }
            }
        }
    }
}
