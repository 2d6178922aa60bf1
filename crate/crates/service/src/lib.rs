//! HTTP query service over a registry of trained models.
//!
//! Models are loaded once at startup (the process fails fast if any registry
//! entry is unreadable) and shared immutably across requests. Three
//! endpoints: `/models`, `/relatedness` and `/neighbors`. Errors use a JSON
//! envelope `{code, message, detail}` with stable machine-readable codes.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use dsmkit::corpus::Preprocessor;
use dsmkit::eval::{Strategy, TranslatorSpec};
use dsmkit::translate::Translator;
use dsmkit::vecspace::{Model, ModelKind, WordSimilarity};

pub type ServiceResult<T> = Result<T, ServiceError>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot read service config {path}: {source}")]
    Config {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid service config: {0}")]
    ConfigFormat(#[from] serde_json::Error),
    #[error("empty model registry")]
    EmptyRegistry,
    #[error("cannot load model {kind}-{lang} from {path}: {message}")]
    ModelLoad {
        kind: ModelKind,
        lang: String,
        path: PathBuf,
        message: String,
    },
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One model in the registry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub model: ModelKind,
    pub lang: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    pub models: Vec<RegistryEntry>,
    #[serde(default = "default_reference_lang")]
    pub reference_lang: String,
    #[serde(default)]
    pub translator: Option<TranslatorSpec>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_timeout_ms")]
    pub request_timeout_ms: u64,
}

fn default_bind() -> String {
    "127.0.0.1:8391".to_string()
}

fn default_reference_lang() -> String {
    "en".to_string()
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl ServiceConfig {
    /// Read the JSON config, then apply `DSMKIT_PORT` and `DSMKIT_REGISTRY`
    /// environment overrides.
    pub fn load(path: &Path) -> ServiceResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ServiceError::Config {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: ServiceConfig = serde_json::from_str(&text)?;
        config.apply_env_overrides()?;
        Ok(config)
    }

    pub fn apply_env_overrides(&mut self) -> ServiceResult<()> {
        if let Ok(port) = std::env::var("DSMKIT_PORT") {
            let host = self.bind.rsplit_once(':').map(|(h, _)| h).unwrap_or("127.0.0.1");
            self.bind = format!("{host}:{port}");
        }
        if let Ok(registry) = std::env::var("DSMKIT_REGISTRY") {
            let text =
                std::fs::read_to_string(Path::new(&registry)).map_err(|source| ServiceError::Config {
                    path: PathBuf::from(&registry),
                    source,
                })?;
            self.models = serde_json::from_str(&text)?;
        }
        Ok(())
    }
}

struct LoadedModel {
    model: Model,
    preprocessor: Preprocessor,
}

/// Immutable shared state: every registered model plus lazily constructed
/// per-language translators.
pub struct AppState {
    models: HashMap<(ModelKind, String), LoadedModel>,
    reference_lang: String,
    translator_spec: Option<TranslatorSpec>,
    cache_dir: Option<PathBuf>,
    translators: Mutex<HashMap<String, Arc<Translator>>>,
}

impl AppState {
    /// Load every registry entry; any failure aborts startup.
    pub fn build(config: &ServiceConfig) -> ServiceResult<Arc<AppState>> {
        if config.models.is_empty() {
            return Err(ServiceError::EmptyRegistry);
        }
        let mut models = HashMap::new();
        for entry in &config.models {
            let model = Model::load_binary(&entry.path).map_err(|e| ServiceError::ModelLoad {
                kind: entry.model,
                lang: entry.lang.clone(),
                path: entry.path.clone(),
                message: e.to_string(),
            })?;
            let preprocessor = Preprocessor::new(model.preprocess().clone());
            models.insert(
                (entry.model, entry.lang.clone()),
                LoadedModel {
                    model,
                    preprocessor,
                },
            );
        }
        Ok(Arc::new(AppState {
            models,
            reference_lang: config.reference_lang.clone(),
            translator_spec: config.translator.clone(),
            cache_dir: config.cache_dir.clone(),
            translators: Mutex::new(HashMap::new()),
        }))
    }

    fn translator_for(&self, lang: &str) -> Result<Arc<Translator>, ApiError> {
        if let Some(t) = self.translators.lock().unwrap().get(lang) {
            return Ok(t.clone());
        }
        let spec = self
            .translator_spec
            .as_ref()
            .ok_or_else(|| ApiError::translator_failure("no translator configured"))?;
        let translator = spec
            .build(lang, &self.reference_lang, self.cache_dir.as_deref())
            .map_err(|e| ApiError::translator_failure(&e.to_string()))?;
        let translator = Arc::new(translator);
        self.translators
            .lock()
            .unwrap()
            .insert(lang.to_string(), translator.clone());
        Ok(translator)
    }
}

/// Machine-readable error envelope.
#[derive(Debug, Serialize)]
pub struct ApiErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

pub struct ApiError {
    status: StatusCode,
    body: ApiErrorBody,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ApiErrorBody {
                code: "bad_request",
                message: message.into(),
                detail: None,
            },
        }
    }

    fn unknown_model(kind: ModelKind, lang: &str) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            body: ApiErrorBody {
                code: "unknown_model",
                message: format!("no {kind} model registered for language '{lang}'"),
                detail: None,
            },
        }
    }

    fn oov(missing: Vec<String>) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: ApiErrorBody {
                code: "oov",
                message: format!("word(s) not in the model vocabulary: {}", missing.join(", ")),
                detail: Some(serde_json::json!({ "missing": missing })),
            },
        }
    }

    fn translator_failure(message: &str) -> Self {
        ApiError {
            status: StatusCode::BAD_GATEWAY,
            body: ApiErrorBody {
                code: "translation_failed",
                message: message.to_string(),
                detail: None,
            },
        }
    }

    fn internal(message: String) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ApiErrorBody {
                code: "internal",
                message,
                detail: None,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Serialize)]
struct ModelInfo {
    model: ModelKind,
    lang: String,
    dim: usize,
    vocab_size: usize,
}

async fn list_models(State(state): State<Arc<AppState>>) -> Json<Vec<ModelInfo>> {
    let mut out: Vec<ModelInfo> = state
        .models
        .iter()
        .map(|((kind, lang), loaded)| ModelInfo {
            model: *kind,
            lang: lang.clone(),
            dim: loaded.model.dim(),
            vocab_size: loaded.model.vocab().len(),
        })
        .collect();
    out.sort_by(|a, b| (a.model, a.lang.clone()).cmp(&(b.model, b.lang.clone())));
    Json(out)
}

#[derive(Deserialize)]
struct RelatednessQuery {
    model: String,
    lang: String,
    w1: String,
    w2: String,
    #[serde(default)]
    strategy: Option<String>,
}

#[derive(Serialize)]
struct RelatednessResponse {
    model: ModelKind,
    lang: String,
    strategy: &'static str,
    w1: String,
    w2: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    translated_w1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    translated_w2: Option<String>,
    score: f64,
}

fn parse_kind(raw: &str) -> Result<ModelKind, ApiError> {
    ModelKind::parse(raw).ok_or_else(|| ApiError::bad_request(format!("unknown model kind '{raw}'")))
}

fn parse_strategy(raw: Option<&str>) -> Result<Strategy, ApiError> {
    match raw.unwrap_or("native") {
        "native" => Ok(Strategy::Native),
        "mt" => Ok(Strategy::Mt),
        other => Err(ApiError::bad_request(format!(
            "strategy must be 'native' or 'mt', got '{other}'"
        ))),
    }
}

async fn relatedness(
    State(state): State<Arc<AppState>>,
    Query(query): Query<RelatednessQuery>,
) -> Result<Json<RelatednessResponse>, ApiError> {
    let kind = parse_kind(&query.model)?;
    let strategy = parse_strategy(query.strategy.as_deref())?;
    if query.w1.trim().is_empty() || query.w2.trim().is_empty() {
        return Err(ApiError::bad_request("w1 and w2 must be nonempty"));
    }

    let (model_lang, lookup_w1, lookup_w2, translated) = match strategy {
        Strategy::Native => (query.lang.clone(), query.w1.clone(), query.w2.clone(), None),
        Strategy::Mt => {
            let translator = state.translator_for(&query.lang)?;
            let (w1, w2) = (query.w1.clone(), query.w2.clone());
            let pair = tokio::task::spawn_blocking(move || translator.translate_pair(&w1, &w2))
                .await
                .map_err(|e| ApiError::internal(e.to_string()))?
                .map_err(|e| ApiError::translator_failure(&e.to_string()))?;
            (
                state.reference_lang.clone(),
                pair.target_w1.clone(),
                pair.target_w2.clone(),
                Some((pair.target_w1, pair.target_w2)),
            )
        }
    };

    let loaded = state
        .models
        .get(&(kind, model_lang))
        .ok_or_else(|| ApiError::unknown_model(kind, &query.lang))?;
    let outcome = loaded
        .model
        .similarity(&loaded.preprocessor, &lookup_w1, &lookup_w2)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    match outcome {
        WordSimilarity::Score(score) => Ok(Json(RelatednessResponse {
            model: kind,
            lang: query.lang,
            strategy: match strategy {
                Strategy::Native => "native",
                Strategy::Mt => "mt",
            },
            w1: query.w1,
            w2: query.w2,
            translated_w1: translated.as_ref().map(|(a, _)| a.clone()),
            translated_w2: translated.map(|(_, b)| b),
            score: score.value(),
        })),
        WordSimilarity::Oov(report) => Err(ApiError::oov(
            report
                .missing_words(&lookup_w1, &lookup_w2)
                .into_iter()
                .map(str::to_string)
                .collect(),
        )),
    }
}

#[derive(Deserialize)]
struct NeighborsQuery {
    model: String,
    lang: String,
    word: String,
    #[serde(default = "default_k")]
    k: usize,
}

fn default_k() -> usize {
    10
}

#[derive(Serialize)]
struct Neighbor {
    word: String,
    score: f64,
}

#[derive(Serialize)]
struct NeighborsResponse {
    model: ModelKind,
    lang: String,
    word: String,
    neighbors: Vec<Neighbor>,
}

async fn neighbors(
    State(state): State<Arc<AppState>>,
    Query(query): Query<NeighborsQuery>,
) -> Result<Json<NeighborsResponse>, ApiError> {
    let kind = parse_kind(&query.model)?;
    if query.k == 0 {
        return Err(ApiError::bad_request("k must be at least 1"));
    }
    let loaded = state
        .models
        .get(&(kind, query.lang.clone()))
        .ok_or_else(|| ApiError::unknown_model(kind, &query.lang))?;
    let neighbors = loaded
        .model
        .nearest_neighbors(&loaded.preprocessor, &query.word, query.k)
        .map_err(|e| match e {
            dsmkit::vecspace::VecspaceError::UnknownWord(w) => ApiError::oov(vec![w]),
            other => ApiError::internal(other.to_string()),
        })?;
    Ok(Json(NeighborsResponse {
        model: kind,
        lang: query.lang,
        word: query.word,
        neighbors: neighbors
            .into_iter()
            .map(|(word, score)| Neighbor { word, score })
            .collect(),
    }))
}

/// Build the router over loaded state.
pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/models", get(list_models))
        .route("/relatedness", get(relatedness))
        .route("/neighbors", get(neighbors))
        .with_state(state)
}

/// Bind the configured address. Split from [`serve`] so callers can learn
/// the actual port before the server starts.
pub async fn bind(config: &ServiceConfig) -> ServiceResult<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(&config.bind)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: config.bind.clone(),
            source,
        })
}

/// Serve until SIGINT/SIGTERM.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> ServiceResult<()> {
    let local = listener.local_addr()?;
    log::info!("serving on http://{local}");
    axum::serve(
        listener,
        router(state).into_make_service_with_connect_info::<SocketAddr>(),
    )
    .with_graceful_shutdown(shutdown_signal())
    .await?;
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        tokio::signal::ctrl_c().await.ok();
    };
    #[cfg(unix)]
    let terminate = async {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut stream) => {
                stream.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
    log::info!("shutdown signal received");
}
