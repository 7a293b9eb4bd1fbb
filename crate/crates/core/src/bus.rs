//! In-process publish/subscribe bus with MQTT-style topics.
//!
//! Topics are slash-delimited `[a-z0-9_/]+`; subscription patterns may use `+` for
//! exactly one segment. Each subscription owns a bounded queue that drops its oldest
//! envelope on overflow, so publishers never block.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, Weak};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::BusError;

pub const DEFAULT_CAPACITY: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub topic: String,
    pub seq: u64,
    pub timestamp: u64,
    pub payload: Value,
}

pub fn valid_topic(topic: &str) -> bool {
    !topic.is_empty()
        && topic
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'/')
}

pub fn valid_pattern(pattern: &str) -> bool {
    !pattern.is_empty()
        && pattern
            .split('/')
            .all(|seg| seg == "+" || (!seg.contains('+') && valid_topic_segment(seg)))
}

fn valid_topic_segment(seg: &str) -> bool {
    seg.bytes()
        .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

pub fn pattern_matches(pattern: &str, topic: &str) -> bool {
    let mut p = pattern.split('/');
    let mut t = topic.split('/');
    loop {
        match (p.next(), t.next()) {
            (None, None) => return true,
            (Some(ps), Some(ts)) if ps == "+" || ps == ts => {}
            _ => return false,
        }
    }
}

#[derive(Debug, Default)]
struct Queue {
    items: VecDeque<Envelope>,
    dropped: u64,
    delivered: u64,
}

#[derive(Debug)]
struct SubShared {
    pattern: String,
    capacity: usize,
    queue: Mutex<Queue>,
    ready: Condvar,
}

impl SubShared {
    fn push(&self, env: Envelope) {
        let mut q = self.queue.lock().unwrap();
        if q.items.len() == self.capacity {
            q.items.pop_front();
            q.dropped += 1;
        }
        q.items.push_back(env);
        q.delivered += 1;
        drop(q);
        self.ready.notify_one();
    }
}

/// Receiving end of a subscription. Dropping it unsubscribes.
#[derive(Debug)]
pub struct Subscription {
    shared: Arc<SubShared>,
}

impl Subscription {
    pub fn pattern(&self) -> &str {
        &self.shared.pattern
    }

    pub fn try_recv(&self) -> Option<Envelope> {
        self.shared.queue.lock().unwrap().items.pop_front()
    }

    pub fn recv_timeout(&self, timeout: Duration) -> Option<Envelope> {
        let deadline = Instant::now() + timeout;
        let mut q = self.shared.queue.lock().unwrap();
        loop {
            if let Some(e) = q.items.pop_front() {
                return Some(e);
            }
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            q = self.shared.ready.wait_timeout(q, deadline - now).unwrap().0;
        }
    }

    pub fn drain(&self) -> Vec<Envelope> {
        self.shared.queue.lock().unwrap().items.drain(..).collect()
    }

    /// Envelopes discarded because the queue was full.
    pub fn dropped(&self) -> u64 {
        self.shared.queue.lock().unwrap().dropped
    }

    /// Envelopes ever enqueued, including ones later dropped.
    pub fn enqueued(&self) -> u64 {
        self.shared.queue.lock().unwrap().delivered
    }
}

type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

struct Inner {
    // seq counters; also serializes delivery so per-topic order is preserved
    topics: Mutex<HashMap<String, u64>>,
    subs: Mutex<Vec<Weak<SubShared>>>,
    clock: Clock,
    next_correlation: AtomicU64,
}

#[derive(Clone)]
pub struct Bus {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for Bus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bus").finish_non_exhaustive()
    }
}

impl Default for Bus {
    fn default() -> Self {
        Self::new()
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub reply_to: String,
    pub correlation_id: u64,
    pub body: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub correlation_id: u64,
    pub body: Value,
}

impl Bus {
    /// Bus stamping envelopes with wall-clock milliseconds.
    pub fn new() -> Self {
        Self::with_clock(Arc::new(now_ms))
    }

    pub fn with_clock(clock: Clock) -> Self {
        Self {
            inner: Arc::new(Inner {
                topics: Mutex::new(HashMap::new()),
                subs: Mutex::new(Vec::new()),
                clock,
                next_correlation: AtomicU64::new(1),
            }),
        }
    }

    pub fn subscribe(&self, pattern: &str) -> Result<Subscription, BusError> {
        self.subscribe_with_capacity(pattern, DEFAULT_CAPACITY)
    }

    pub fn subscribe_with_capacity(
        &self,
        pattern: &str,
        capacity: usize,
    ) -> Result<Subscription, BusError> {
        if !valid_pattern(pattern) || capacity == 0 {
            return Err(BusError::InvalidPattern(pattern.to_string()));
        }
        let shared = Arc::new(SubShared {
            pattern: pattern.to_string(),
            capacity,
            queue: Mutex::new(Queue::default()),
            ready: Condvar::new(),
        });
        // taking the topic lock orders this subscription against in-flight publishes
        let _topics = self.inner.topics.lock().unwrap();
        self.inner
            .subs
            .lock()
            .unwrap()
            .push(Arc::downgrade(&shared));
        Ok(Subscription { shared })
    }

    pub fn publish<T: Serialize>(&self, topic: &str, payload: &T) -> Result<u64, BusError> {
        let ts = (self.inner.clock)();
        self.publish_at(topic, payload, ts)
    }

    /// Publishes with an explicit timestamp in milliseconds.
    pub fn publish_at<T: Serialize>(
        &self,
        topic: &str,
        payload: &T,
        timestamp: u64,
    ) -> Result<u64, BusError> {
        if !valid_topic(topic) {
            return Err(BusError::InvalidTopic(topic.to_string()));
        }
        let payload =
            serde_json::to_value(payload).map_err(|_| BusError::InvalidTopic(topic.to_string()))?;
        let mut topics = self.inner.topics.lock().unwrap();
        let counter = topics.entry(topic.to_string()).or_insert(0);
        *counter += 1;
        let seq = *counter;
        let env = Envelope {
            topic: topic.to_string(),
            seq,
            timestamp,
            payload,
        };
        let targets: Vec<Arc<SubShared>> = {
            let mut subs = self.inner.subs.lock().unwrap();
            subs.retain(|w| w.strong_count() > 0);
            subs.iter()
                .filter_map(Weak::upgrade)
                .filter(|s| pattern_matches(&s.pattern, topic))
                .collect()
        };
        for s in targets {
            s.push(env.clone());
        }
        drop(topics);
        Ok(seq)
    }

    /// Sends `payload` to `service_topic` and waits for the reply carrying the same
    /// correlation id.
    pub fn request<T: Serialize>(
        &self,
        service_topic: &str,
        payload: &T,
        timeout_ms: u64,
    ) -> Result<Value, BusError> {
        if !valid_topic(service_topic) {
            return Err(BusError::InvalidTopic(service_topic.to_string()));
        }
        let id = self.inner.next_correlation.fetch_add(1, Ordering::Relaxed);
        let reply_to = format!("reply/{id}");
        let sub = self.subscribe(&reply_to)?;
        let body = serde_json::to_value(payload)
            .map_err(|_| BusError::InvalidTopic(service_topic.to_string()))?;
        self.publish(
            service_topic,
            &Request {
                reply_to: reply_to.clone(),
                correlation_id: id,
                body,
            },
        )?;
        let deadline = Instant::now() + Duration::from_millis(timeout_ms);
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(BusError::Timeout(timeout_ms));
            }
            match sub.recv_timeout(left) {
                Some(env) => {
                    if let Ok(reply) = serde_json::from_value::<Reply>(env.payload) {
                        if reply.correlation_id == id {
                            return Ok(reply.body);
                        }
                    }
                }
                None => return Err(BusError::Timeout(timeout_ms)),
            }
        }
    }

    /// Answers a request envelope received on a service topic.
    pub fn reply<T: Serialize>(&self, request: &Envelope, body: &T) -> Result<u64, BusError> {
        let req: Request = serde_json::from_value(request.payload.clone())
            .map_err(|_| BusError::InvalidTopic(request.topic.clone()))?;
        let body =
            serde_json::to_value(body).map_err(|_| BusError::InvalidTopic(req.reply_to.clone()))?;
        self.publish(
            &req.reply_to,
            &Reply {
                correlation_id: req.correlation_id,
                body,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use std::thread;

    #[test]
    fn topic_and_pattern_rules() {
        assert!(valid_topic("robot/pose"));
        assert!(!valid_topic("Robot/pose"));
        assert!(!valid_topic("robot/+"));
        assert!(!valid_topic(""));
        assert!(valid_pattern("mission/+"));
        assert!(!valid_pattern("mission/a+"));
        assert!(pattern_matches("mission/+", "mission/state"));
        assert!(!pattern_matches("mission/+", "mission/state/x"));
        assert!(!pattern_matches("mission/+", "mission"));
    }

    #[test]
    fn seq_advances_without_subscribers() {
        let bus = Bus::new();
        assert_eq!(bus.publish("a/b", &1).unwrap(), 1);
        assert_eq!(bus.publish("a/b", &2).unwrap(), 2);
        assert_eq!(bus.publish("a/c", &2).unwrap(), 1);
        assert_eq!(
            bus.publish("A", &2),
            Err(BusError::InvalidTopic("A".into()))
        );
    }

    #[test]
    fn exact_and_wildcard_delivery() {
        let bus = Bus::new();
        bus.publish("robot/pose", &0).unwrap();
        let pose = bus.subscribe("robot/pose").unwrap();
        let mission = bus.subscribe("mission/+").unwrap();
        for t in [
            "robot/pose",
            "robot/scan",
            "mission/state",
            "mission/command",
            "mission/state/extra",
        ] {
            bus.publish(t, &json!({"t": t})).unwrap();
        }
        let got: Vec<String> = pose.drain().into_iter().map(|e| e.topic).collect();
        assert_eq!(got, vec!["robot/pose"]);
        let got: Vec<String> = mission.drain().into_iter().map(|e| e.topic).collect();
        assert_eq!(got, vec!["mission/state", "mission/command"]);
        assert!(bus.subscribe("Bad").is_err());
    }

    #[test]
    fn overflow_drops_oldest() {
        let bus = Bus::new();
        let sub = bus.subscribe_with_capacity("s/x", 100).unwrap();
        for i in 0..1000 {
            bus.publish("s/x", &i).unwrap();
        }
        assert_eq!(sub.dropped(), 900);
        let kept = sub.drain();
        assert_eq!(kept.len(), 100);
        assert_eq!(kept[0].payload, json!(900));
        assert_eq!(kept[0].seq, 901);
    }

    #[test]
    fn request_round_trip_and_timeout() {
        let bus = Bus::new();
        let service = bus.subscribe("svc/echo").unwrap();
        let responder = bus.clone();
        let handle = thread::spawn(move || {
            for _ in 0..2 {
                let req = service.recv_timeout(Duration::from_secs(5)).unwrap();
                let body = serde_json::from_value::<Request>(req.payload.clone())
                    .unwrap()
                    .body;
                responder.reply(&req, &body).unwrap();
            }
        });
        let a = bus.clone();
        let t = thread::spawn(move || a.request("svc/echo", &json!({"n": 1}), 5000).unwrap());
        let second = bus.request("svc/echo", &json!({"n": 2}), 5000).unwrap();
        assert_eq!(second, json!({"n": 2}));
        assert_eq!(t.join().unwrap(), json!({"n": 1}));
        handle.join().unwrap();

        let start = Instant::now();
        assert_eq!(bus.request("svc/none", &0, 50), Err(BusError::Timeout(50)));
        assert!(start.elapsed() >= Duration::from_millis(50));
    }
}
