//! Plate → last known location store with an append-only JSON-lines journal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alpr::Sighting;
use crate::error::StoreError;
use crate::geo::GeoPoint;
use crate::geometry::Point2D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateLocationRecord {
    pub plate: String,
    pub position: GeoPoint,
    pub local_pose: Point2D,
    pub last_seen: u64,
    pub confidence: f64,
    pub sighting_count: u64,
}

/// The part of a sighting the store keeps; one journal line each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSighting {
    pub plate: String,
    pub position: GeoPoint,
    pub local: Point2D,
    pub timestamp: u64,
    pub confidence: f64,
}

impl From<&Sighting> for StoredSighting {
    fn from(s: &Sighting) -> Self {
        Self {
            plate: s.plate_read.clone(),
            position: s.car_position,
            local: s.car_local,
            timestamp: s.timestamp,
            confidence: s.confidence,
        }
    }
}

/// Uppercase with all whitespace removed.
pub fn canonical_plate(plate: &str) -> String {
    plate
        .chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_uppercase)
        .collect()
}

/// Total order deciding which sighting wins: newest timestamp, then the remaining
/// fields so that equal timestamps still resolve the same way in any arrival order.
fn recency(a: &StoredSighting, b: &PlateLocationRecord) -> Ordering {
    a.timestamp
        .cmp(&b.last_seen)
        .then(a.confidence.total_cmp(&b.confidence))
        .then(a.position.lat.total_cmp(&b.position.lat))
        .then(a.position.lon.total_cmp(&b.position.lon))
        .then(a.local.x.total_cmp(&b.local_pose.x))
        .then(a.local.y.total_cmp(&b.local_pose.y))
}

#[derive(Debug, Default)]
pub struct PlateStore {
    records: BTreeMap<String, PlateLocationRecord>,
    journal: Option<(PathBuf, File)>,
}

impl PlateStore {
    /// Memory-only store.
    pub fn new() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a journal and replays it. A torn final line is
    /// discarded with a warning and cut from the file.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)?;
        let mut store = Self::new();
        let mut good_len = 0u64;
        {
            let mut reader = BufReader::new(&file);
            let mut line = String::new();
            let mut lineno = 0;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                lineno += 1;
                let complete = line.ends_with('\n');
                match serde_json::from_str::<StoredSighting>(line.trim_end()) {
                    Ok(s) if complete => {
                        if let Err(e) = store.apply(&s) {
                            log::warn!("journal {}:{lineno}: skipped: {e}", path.display());
                        }
                        good_len += n as u64;
                    }
                    Ok(_) | Err(_) if !complete => {
                        log::warn!(
                            "journal {}:{lineno}: torn final line skipped",
                            path.display()
                        );
                    }
                    _ => {
                        log::warn!(
                            "journal {}:{lineno}: unreadable line skipped",
                            path.display()
                        );
                        good_len += n as u64;
                    }
                }
            }
        }
        if file.seek(SeekFrom::End(0))? != good_len {
            file.set_len(good_len)?;
        }
        store.journal = Some((path.to_path_buf(), file));
        Ok(store)
    }

    pub fn journal_path(&self) -> Option<&Path> {
        self.journal.as_ref().map(|(p, _)| p.as_path())
    }

    fn apply(&mut self, s: &StoredSighting) -> Result<PlateLocationRecord, StoreError> {
        let plate = canonical_plate(&s.plate);
        if plate.is_empty() {
            return Err(StoreError::EmptyPlate);
        }
        if !(0.0..=1.0).contains(&s.confidence) {
            return Err(StoreError::InvalidConfidence(s.confidence));
        }
        let rec = self
            .records
            .entry(plate.clone())
            .and_modify(|r| {
                r.sighting_count += 1;
                if recency(s, r) == Ordering::Greater {
                    r.position = s.position;
                    r.local_pose = s.local;
                    r.last_seen = s.timestamp;
                    r.confidence = s.confidence;
                }
            })
            .or_insert_with(|| PlateLocationRecord {
                plate,
                position: s.position,
                local_pose: s.local,
                last_seen: s.timestamp,
                confidence: s.confidence,
                sighting_count: 1,
            });
        Ok(rec.clone())
    }

    /// Records a sighting; newest timestamp wins the position, every accepted sighting counts.
    /// Journaled sightings are flushed before returning.
    pub fn upsert(&mut self, s: &StoredSighting) -> Result<PlateLocationRecord, StoreError> {
        let rec = self.apply(s)?;
        if let Some((_, file)) = &mut self.journal {
            let line = serde_json::to_string(&StoredSighting {
                plate: rec.plate.clone(),
                ..s.clone()
            })
            .expect("sighting serializes");
            file.write_all(line.as_bytes())?;
            file.write_all(b"\n")?;
            file.flush()?;
        }
        Ok(rec)
    }

    pub fn upsert_sighting(&mut self, s: &Sighting) -> Result<PlateLocationRecord, StoreError> {
        self.upsert(&StoredSighting::from(s))
    }

    pub fn lookup(&self, plate: &str) -> Option<&PlateLocationRecord> {
        self.records.get(&canonical_plate(plate))
    }

    /// All records in plate order.
    pub fn records(&self) -> impl Iterator<Item = &PlateLocationRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
