use haris_core::geo::GeoPoint;
use haris_core::store::{PlateStore, StoredSighting};
use haris_core::Point2D;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sighting(i: u64) -> StoredSighting {
    StoredSighting {
        plate: format!("{:05}", 10000 + i % 37),
        position: GeoPoint {
            lat: 25.0 + i as f64 * 1e-6,
            lon: 51.0,
        },
        local: Point2D::new(i as f64, -(i as f64)),
        timestamp: 1000 + (i * 7919) % 101,
        confidence: (i % 10) as f64 / 10.0,
    }
}

fn snapshot(s: &PlateStore) -> String {
    serde_json::to_string(&s.records().collect::<Vec<_>>()).unwrap()
}

#[test]
fn empty_journal_is_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let s = PlateStore::open(&dir.path().join("j.jsonl")).unwrap();
    assert!(s.is_empty());
}

#[test]
fn journal_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.jsonl");
    let mut s = PlateStore::open(&path).unwrap();
    for i in 0..100 {
        s.upsert(&sighting(i)).unwrap();
    }
    let restored = PlateStore::open(&path).unwrap();
    assert_eq!(snapshot(&s), snapshot(&restored));
    let rec = s.lookup("10005").unwrap();
    assert_eq!(
        serde_json::to_string(rec).unwrap(),
        serde_json::to_string(restored.lookup("10005").unwrap()).unwrap()
    );
}

#[test]
fn torn_final_line_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.jsonl");
    {
        let mut s = PlateStore::open(&path).unwrap();
        for i in 0..100 {
            s.upsert(&StoredSighting {
                plate: format!("{}", 50000 + i),
                ..sighting(i)
            })
            .unwrap();
        }
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let cut = text.len() - 10;
    std::fs::write(&path, &text[..cut]).unwrap();
    let mut s = PlateStore::open(&path).unwrap();
    assert_eq!(s.len(), 99);
    // the torn tail is gone, so later appends stay readable
    s.upsert(&StoredSighting {
        plate: "77777".into(),
        ..sighting(1)
    })
    .unwrap();
    assert_eq!(PlateStore::open(&path).unwrap().len(), 100);
}

proptest! {
    #[test]
    fn final_state_ignores_arrival_order(seed in 0u64..1000, n in 1u64..60) {
        let batch: Vec<StoredSighting> = (0..n).map(|i| sighting(i * 37 + seed % 37)).collect();
        let mut a = PlateStore::new();
        for s in &batch {
            a.upsert(s).unwrap();
        }
        let mut shuffled = batch.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut b = PlateStore::new();
        for s in &shuffled {
            b.upsert(s).unwrap();
        }
        prop_assert_eq!(snapshot(&a), snapshot(&b));
    }
}
