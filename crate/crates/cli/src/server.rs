//! Live backend: the simulation on its own thread, a store-owner thread fed by the bus,
//! and the HTTP + WebSocket API on top.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use haris_core::alpr::Sighting;
use haris_core::bus::{now_ms, Bus, Envelope, Request, Subscription};
use haris_core::mission::{Mission, Phase, DEFAULT_TOLERANCE};
use haris_core::runner::{
    topics, Command, CommandReply, MissionReport, PoseReport, ReplyStatus, RunConfig, SimRunner,
};
use haris_core::sim::Scenario;
use haris_core::store::{PlateLocationRecord, PlateStore};
use haris_core::{GeoPoint, GeoReference};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commands::load_world;
use crate::ServeArgs;

pub const JOURNAL_FILE: &str = "journal.jsonl";
/// How long an HTTP handler waits for the simulation to answer a command.
const COMMAND_TIMEOUT_MS: u64 = 2000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub scenario: Scenario,
    pub run: RunConfig,
    /// Sightings journal; the store lives in memory only when `None`.
    pub journal: Option<PathBuf>,
    /// Simulated seconds per wall second; 0 runs missions unthrottled (idle time stays real time).
    pub rate: f64,
}

/// Latest robot state as seen on the bus.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RobotView {
    pub pose: Option<PoseReport>,
    pub mission: Option<MissionReport>,
    pub reference: Option<GeoReference>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MissionView {
    #[serde(flatten)]
    pub mission: Mission,
    #[serde(flatten)]
    pub phase: Phase,
}

struct Shared {
    bus: Bus,
    store: RwLock<PlateStore>,
    robot: RwLock<RobotView>,
    /// Accepted missions in submission order.
    missions: RwLock<BTreeMap<u64, Mission>>,
    phases: RwLock<HashMap<String, Phase>>,
    next_mission: AtomicU64,
    stop: AtomicBool,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn bus(&self) -> &Bus {
        &self.0.bus
    }

    pub fn lookup(&self, plate: &str) -> Option<PlateLocationRecord> {
        self.0.store.read().unwrap().lookup(plate).cloned()
    }

    pub fn robot(&self) -> RobotView {
        self.0.robot.read().unwrap().clone()
    }
}

/// The simulation and store threads; stopped and joined on drop.
pub struct Service {
    state: AppState,
    threads: Vec<JoinHandle<()>>,
}

impl Service {
    pub fn start(config: ServiceConfig) -> Result<Self> {
        let store = match &config.journal {
            Some(p) => PlateStore::open(p).with_context(|| format!("journal {}", p.display()))?,
            None => PlateStore::new(),
        };
        let bus = Bus::new();
        let mut runner = SimRunner::new(config.scenario.clone(), config.run.clone())?;
        let state = AppState(Arc::new(Shared {
            bus: bus.clone(),
            store: RwLock::new(store),
            robot: RwLock::new(RobotView::default()),
            missions: RwLock::new(BTreeMap::new()),
            phases: RwLock::new(HashMap::new()),
            next_mission: AtomicU64::new(1),
            stop: AtomicBool::new(false),
        }));

        // everything subscribes before the first tick so nothing early is missed
        let feeds = Feeds {
            sightings: bus.subscribe_with_capacity(topics::SIGHTING, 1 << 16)?,
            states: bus.subscribe_with_capacity(topics::MISSION_STATE, 4096)?,
            poses: bus.subscribe_with_capacity(topics::POSE, 16)?,
            references: bus.subscribe_with_capacity(topics::REFERENCE, 64)?,
        };
        let commands = bus.subscribe(topics::MISSION_COMMAND)?;
        runner.attach_bus(bus);

        let owner = {
            let state = state.clone();
            std::thread::Builder::new()
                .name("store".into())
                .spawn(move || store_owner(&state, &feeds))?
        };
        let sim = {
            let state = state.clone();
            let rate = config.rate;
            std::thread::Builder::new()
                .name("sim".into())
                .spawn(move || sim_loop(&state, runner, &commands, rate))?
        };
        Ok(Self {
            state,
            threads: vec![owner, sim],
        })
    }

    pub fn state(&self) -> AppState {
        self.state.clone()
    }

    pub fn router(&self) -> Router {
        router(self.state())
    }
}

impl Drop for Service {
    fn drop(&mut self) {
        self.state.0.stop.store(true, Ordering::Relaxed);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

fn sim_loop(state: &AppState, mut runner: SimRunner, commands: &Subscription, rate: f64) {
    let dt = runner.config().dt;
    let bus = state.bus().clone();
    let mut deadline = Instant::now();
    while !state.0.stop.load(Ordering::Relaxed) {
        // commands land between ticks, never inside one
        for env in commands.drain() {
            handle_command(&bus, &mut runner, &env);
        }
        runner.step();
        let pace = if rate > 0.0 {
            rate
        } else if runner.phase().is_active() {
            f64::INFINITY
        } else {
            1.0
        };
        let now = Instant::now();
        if pace.is_finite() {
            deadline += Duration::from_secs_f64(dt / pace);
            if deadline > now {
                std::thread::sleep(deadline - now);
            } else if now - deadline > Duration::from_millis(250) {
                deadline = now;
            }
        } else {
            deadline = now;
        }
    }
}

/// Requests get a reply; bare commands (e.g. published over the WebSocket bridge) do not.
fn handle_command(bus: &Bus, runner: &mut SimRunner, env: &Envelope) {
    let (body, reply) = match serde_json::from_value::<Request>(env.payload.clone()) {
        Ok(req) => (req.body, true),
        Err(_) => (env.payload.clone(), false),
    };
    let outcome = match serde_json::from_value::<Command>(body) {
        Ok(cmd) => runner.apply(cmd),
        Err(e) => CommandReply::rejected(ReplyStatus::Invalid, format!("malformed command: {e}")),
    };
    if outcome.status != ReplyStatus::Accepted {
        log::info!("command rejected: {:?}", outcome.reason);
    }
    if reply {
        if let Err(e) = bus.reply(env, &outcome) {
            log::warn!("command reply: {e}");
        }
    }
}

struct Feeds {
    sightings: Subscription,
    states: Subscription,
    poses: Subscription,
    references: Subscription,
}

/// Single writer of the store and of the cached robot and mission state.
fn store_owner(state: &AppState, feeds: &Feeds) {
    let shared = &state.0;
    loop {
        let stopping = shared.stop.load(Ordering::Relaxed);
        let first = feeds.sightings.recv_timeout(Duration::from_millis(20));
        let batch: Vec<Envelope> = first.into_iter().chain(feeds.sightings.drain()).collect();
        if !batch.is_empty() {
            let mut store = shared.store.write().unwrap();
            for env in batch {
                match serde_json::from_value::<Sighting>(env.payload) {
                    Ok(s) => {
                        if let Err(e) = store.upsert_sighting(&s) {
                            log::warn!("sighting {} rejected: {e}", env.seq);
                        }
                    }
                    Err(e) => log::warn!("malformed sighting {}: {e}", env.seq),
                }
            }
        }
        for env in feeds.states.drain() {
            if let Ok(report) = serde_json::from_value::<MissionReport>(env.payload) {
                if let Some(id) = &report.mission_id {
                    shared
                        .phases
                        .write()
                        .unwrap()
                        .insert(id.clone(), report.phase.clone());
                }
                shared.robot.write().unwrap().mission = Some(report);
            }
        }
        if let Some(env) = feeds.poses.drain().pop() {
            if let Ok(pose) = serde_json::from_value::<PoseReport>(env.payload) {
                shared.robot.write().unwrap().pose = Some(pose);
            }
        }
        if let Some(env) = feeds.references.drain().pop() {
            if let Ok(r) = serde_json::from_value::<GeoReference>(env.payload) {
                shared.robot.write().unwrap().reference = Some(r);
            }
        }
        if stopping {
            break;
        }
    }
    if feeds.sightings.dropped() > 0 {
        log::warn!(
            "{} sightings dropped by the store feed",
            feeds.sightings.dropped()
        );
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/cars", get(list_cars))
        .route("/api/cars/{plate}", get(get_car))
        .route("/api/missions", get(list_missions).post(post_mission))
        .route("/api/missions/{id}", get(get_mission))
        .route("/api/robot/state", get(robot_state))
        .route("/api/robot/initial_pose", post(initial_pose))
        .route("/api/stream", get(stream))
        .with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn list_cars(State(s): State<AppState>) -> Json<Vec<PlateLocationRecord>> {
    let store = s.0.store.read().unwrap();
    let mut all: Vec<_> = store.records().cloned().collect();
    all.sort_by(|a, b| a.plate.cmp(&b.plate));
    Json(all)
}

async fn get_car(State(s): State<AppState>, Path(plate): Path<String>) -> Response {
    match s.lookup(&plate) {
        Some(r) => Json(r).into_response(),
        None => error(
            StatusCode::NOT_FOUND,
            format!("no car with plate {plate:?}"),
        ),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MissionRequest {
    waypoints: Vec<GeoPoint>,
    #[serde(default, alias = "arrival_tolerance")]
    tolerance: Option<f64>,
}

/// Sends a command to the simulation thread and maps its answer to a status code.
async fn send(s: &AppState, command: Command) -> Result<(), Response> {
    let bus = s.bus().clone();
    let answer = tokio::task::spawn_blocking(move || {
        bus.request(topics::MISSION_COMMAND, &command, COMMAND_TIMEOUT_MS)
    })
    .await
    .map_err(|e| error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| error(StatusCode::SERVICE_UNAVAILABLE, e.to_string()))?;
    let reply: CommandReply = serde_json::from_value(answer)
        .map_err(|e| error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let reason = reply.reason.unwrap_or_default();
    match reply.status {
        ReplyStatus::Accepted => Ok(()),
        ReplyStatus::Busy => Err(error(StatusCode::CONFLICT, reason)),
        ReplyStatus::Invalid => Err(error(StatusCode::BAD_REQUEST, reason)),
    }
}

async fn post_mission(State(s): State<AppState>, body: Bytes) -> Response {
    let req: MissionRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed mission: {e}")),
    };
    let n = s.0.next_mission.fetch_add(1, Ordering::Relaxed);
    let mission = Mission {
        id: format!("m{n}"),
        waypoints: req.waypoints,
        arrival_tolerance: req.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        created_at: now_ms(),
    };
    if let Err(e) = mission.validate() {
        return error(StatusCode::BAD_REQUEST, e.to_string());
    }
    let id = mission.id.clone();
    if let Err(r) = send(
        &s,
        Command::Load {
            mission: mission.clone(),
        },
    )
    .await
    {
        return r;
    }
    s.0.phases
        .write()
        .unwrap()
        .entry(id.clone())
        .or_insert(Phase::Navigating(0));
    s.0.missions.write().unwrap().insert(n, mission);
    (StatusCode::ACCEPTED, Json(json!({ "id": id }))).into_response()
}

fn view(s: &AppState, m: &Mission) -> MissionView {
    let phase =
        s.0.phases
            .read()
            .unwrap()
            .get(&m.id)
            .cloned()
            .unwrap_or(Phase::Idle);
    MissionView {
        mission: m.clone(),
        phase,
    }
}

async fn list_missions(State(s): State<AppState>) -> Json<Vec<MissionView>> {
    let missions = s.0.missions.read().unwrap();
    Json(missions.values().map(|m| view(&s, m)).collect())
}

async fn get_mission(State(s): State<AppState>, Path(id): Path<String>) -> Response {
    let missions = s.0.missions.read().unwrap();
    match missions.values().find(|m| m.id == id) {
        Some(m) => Json(view(&s, m)).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no mission {id:?}")),
    }
}

async fn robot_state(State(s): State<AppState>) -> Json<RobotView> {
    Json(s.robot())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialPose {
    lat: f64,
    lon: f64,
    /// Compass heading, degrees clockwise from north.
    heading: f64,
}

async fn initial_pose(State(s): State<AppState>, body: Bytes) -> Response {
    let p: InitialPose = match serde_json::from_slice(&body) {
        Ok(p) => p,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                format!("malformed initial pose: {e}"),
            )
        }
    };
    if let Err(e) = GeoPoint::new(p.lat, p.lon) {
        return error(StatusCode::BAD_REQUEST, e.to_string());
    }
    let command = Command::InitialPose {
        lat: p.lat,
        lon: p.lon,
        heading: p.heading,
    };
    match send(&s, command).await {
        Ok(()) => (StatusCode::ACCEPTED, Json(json!({ "status": "accepted" }))).into_response(),
        Err(r) => r,
    }
}

async fn stream(ws: WebSocketUpgrade, State(s): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| bridge(socket, s))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ClientFrame {
    Subscribe(String),
    Unsubscribe(String),
    Publish { topic: String, payload: Value },
}

/// One WebSocket client: its own bus subscriptions, forwarded as `{topic, seq, timestamp, payload}`.
async fn bridge(mut socket: WebSocket, s: AppState) {
    let mut subs: Vec<Subscription> = Vec::new();
    let mut poll = tokio::time::interval(Duration::from_millis(10));
    loop {
        tokio::select! {
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let answer = client_frame(&s, &mut subs, text.as_str());
                if socket.send(Message::Text(answer.to_string().into())).await.is_err() {
                    break;
                }
            }
            _ = poll.tick() => {
                for sub in &subs {
                    for env in sub.drain() {
                        let frame = serde_json::to_string(&env).expect("envelope serializes");
                        if socket.send(Message::Text(frame.into())).await.is_err() {
                            return;
                        }
                    }
                }
            }
        }
    }
}

fn client_frame(s: &AppState, subs: &mut Vec<Subscription>, text: &str) -> Value {
    match serde_json::from_str::<ClientFrame>(text) {
        Ok(ClientFrame::Subscribe(pattern)) => {
            if subs.iter().any(|x| x.pattern() == pattern) {
                return json!({ "subscribed": pattern });
            }
            match s.bus().subscribe(&pattern) {
                Ok(sub) => {
                    subs.push(sub);
                    json!({ "subscribed": pattern })
                }
                Err(e) => json!({ "error": e.to_string() }),
            }
        }
        Ok(ClientFrame::Unsubscribe(pattern)) => {
            subs.retain(|x| x.pattern() != pattern);
            json!({ "unsubscribed": pattern })
        }
        Ok(ClientFrame::Publish { topic, payload }) => match s.bus().publish(&topic, &payload) {
            Ok(seq) => json!({ "published": topic, "seq": seq }),
            Err(e) => json!({ "error": e.to_string() }),
        },
        Err(e) => json!({ "error": format!("unrecognised frame: {e}") }),
    }
}

pub fn serve(args: &ServeArgs) -> Result<ExitCode> {
    let scenario = load_world(args.sim.world.as_deref())?;
    let journal = match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Some(dir.join(JOURNAL_FILE))
        }
        None => None,
    };
    if !(args.rate >= 0.0 && args.rate.is_finite()) {
        anyhow::bail!("rate must be zero or positive");
    }
    let service = Service::start(ServiceConfig {
        scenario,
        run: args.sim.config(),
        journal,
        rate: args.rate,
    })?;
    let addr = SocketAddr::from(([127, 0, 0, 1], args.port));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot listen on {addr}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, service.router())
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        anyhow::Ok(())
    })?;
    drop(service);
    Ok(ExitCode::SUCCESS)
}
