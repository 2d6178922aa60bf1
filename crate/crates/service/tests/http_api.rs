//! End-to-end tests of the HTTP API over toy models.

use std::path::Path;


use dsmkit::corpus::{PreprocessConfig, Preprocessor, Vocabulary};
use dsmkit::vecspace::{DenseModel, Model, ModelKind, WordSimilarity};
use dsmkit_service::{AppState, RegistryEntry, ServiceConfig};

fn toy_model(kind: ModelKind, words: &[(&str, [f64; 3])]) -> Model {
    let vocab = Vocabulary::from_entries(
        words.iter().map(|(w, _)| (w.to_string(), 1)).collect(),
        1,
    );
    let vectors: Vec<f64> = words.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    Model::Dense(
        DenseModel::new(kind, vocab, 3, vectors, PreprocessConfig::default()).unwrap(),
    )
}

fn write_models(dir: &Path) -> Vec<RegistryEntry> {
    let w2v_en = toy_model(
        ModelKind::W2v,
        &[
            ("sun", [1.0, 0.2, 0.0]),
            ("moon", [0.9, 0.3, 0.1]),
            ("tree", [0.0, 1.0, 0.4]),
            ("rock", [0.1, 0.2, 1.0]),
        ],
    );
    let w2v_de = toy_model(
        ModelKind::W2v,
        &[("sonne", [1.0, 0.0, 0.0]), ("mond", [0.8, 0.6, 0.0])],
    );
    let p1 = dir.join("w2v-en.dsm");
    let p2 = dir.join("w2v-de.dsm");
    w2v_en.save_binary(&p1).unwrap();
    w2v_de.save_binary(&p2).unwrap();
    vec![
        RegistryEntry {
            model: ModelKind::W2v,
            lang: "en".into(),
            path: p1,
        },
        RegistryEntry {
            model: ModelKind::W2v,
            lang: "de".into(),
            path: p2,
        },
    ]
}

struct TestServer {
    base: String,
    _handle: tokio::task::JoinHandle<()>,
}

async fn start_server(config: ServiceConfig) -> TestServer {
    let state = AppState::build(&config).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let router = dsmkit_service::router(state);
    let handle = tokio::spawn(async move {
        axum::serve(listener, router).await.unwrap();
    });
    TestServer {
        base: format!("http://{addr}"),
        _handle: handle,
    }
}

async fn get_json(url: String) -> (u16, serde_json::Value) {
    tokio::task::spawn_blocking(move || {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        let mut response = agent.get(&url).call().unwrap();
        let status = response.status().as_u16();
        let body: serde_json::Value = response.body_mut().read_json().unwrap();
        (status, body)
    })
    .await
    .unwrap()
}

fn test_config(models: Vec<RegistryEntry>) -> ServiceConfig {
    ServiceConfig {
        bind: "127.0.0.1:0".into(),
        models,
        reference_lang: "en".into(),
        translator: Some(dsmkit::eval::TranslatorSpec::Identity),
        cache_dir: None,
        request_timeout_ms: 5000,
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn models_endpoint_lists_registry() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (status, body) = get_json(format!("{}/models", server.base)).await;
    assert_eq!(status, 200);
    let list = body.as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!(list[0]["model"], "w2v");
    assert_eq!(list[0]["lang"], "de");
    assert_eq!(list[0]["vocab_size"], 2);
    assert_eq!(list[1]["lang"], "en");
    assert_eq!(list[1]["dim"], 3);

    // Stable across repeated calls.
    let (_, body2) = get_json(format!("{}/models", server.base)).await;
    assert_eq!(body, body2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn relatedness_of_word_with_itself_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (status, body) = get_json(format!(
        "{}/relatedness?model=w2v&lang=en&w1=sun&w2=sun",
        server.base
    ))
    .await;
    assert_eq!(status, 200);
    assert!((body["score"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn relatedness_matches_in_process_similarity_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let entries = write_models(dir.path());
    let model = Model::load_binary(&entries[0].path).unwrap();
    let pre = Preprocessor::new(model.preprocess().clone());
    let expected = match model.similarity(&pre, "sun", "moon").unwrap() {
        WordSimilarity::Score(s) => s.value(),
        other => panic!("unexpected {other:?}"),
    };

    let server = start_server(test_config(entries)).await;
    let (status, body) = get_json(format!(
        "{}/relatedness?model=w2v&lang=en&w1=sun&w2=moon",
        server.base
    ))
    .await;
    assert_eq!(status, 200);
    let got = body["score"].as_f64().unwrap();
    assert_eq!(got.to_bits(), expected.to_bits());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn mt_with_identity_translator_equals_native_on_english() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (s1, native) = get_json(format!(
        "{}/relatedness?model=w2v&lang=en&w1=sun&w2=tree&strategy=native",
        server.base
    ))
    .await;
    let (s2, mt) = get_json(format!(
        "{}/relatedness?model=w2v&lang=en&w1=sun&w2=tree&strategy=mt",
        server.base
    ))
    .await;
    assert_eq!((s1, s2), (200, 200));
    assert_eq!(
        native["score"].as_f64().unwrap().to_bits(),
        mt["score"].as_f64().unwrap().to_bits()
    );
    assert_eq!(mt["translated_w1"], "sun");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn unknown_language_is_404_with_code() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (status, body) = get_json(format!(
        "{}/relatedness?model=w2v&lang=xx&w1=a&w2=b",
        server.base
    ))
    .await;
    assert_eq!(status, 404);
    assert_eq!(body["code"], "unknown_model");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn oov_is_422_naming_missing_words() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (status, body) = get_json(format!(
        "{}/relatedness?model=w2v&lang=en&w1=sun&w2=zzzz",
        server.base
    ))
    .await;
    assert_eq!(status, 422);
    assert_eq!(body["code"], "oov");
    assert_eq!(body["detail"]["missing"][0], "zzzz");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn neighbors_k1_on_two_word_model() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (status, body) = get_json(format!(
        "{}/neighbors?model=w2v&lang=de&word=sonne&k=1",
        server.base
    ))
    .await;
    assert_eq!(status, 200);
    let neighbors = body["neighbors"].as_array().unwrap();
    assert_eq!(neighbors.len(), 1);
    assert_eq!(neighbors[0]["word"], "mond");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn neighbors_k_larger_than_vocab_returns_all_others() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (status, body) = get_json(format!(
        "{}/neighbors?model=w2v&lang=en&word=sun&k=100",
        server.base
    ))
    .await;
    assert_eq!(status, 200);
    assert_eq!(body["neighbors"].as_array().unwrap().len(), 3);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn neighbors_match_in_process_computation() {
    let dir = tempfile::tempdir().unwrap();
    let entries = write_models(dir.path());
    let model = Model::load_binary(&entries[0].path).unwrap();
    let pre = Preprocessor::new(model.preprocess().clone());
    let expected = model.nearest_neighbors(&pre, "sun", 3).unwrap();

    let server = start_server(test_config(entries)).await;
    let (_, body) = get_json(format!(
        "{}/neighbors?model=w2v&lang=en&word=sun&k=3",
        server.base
    ))
    .await;
    let got = body["neighbors"].as_array().unwrap();
    for (g, (word, score)) in got.iter().zip(&expected) {
        assert_eq!(g["word"].as_str().unwrap(), word);
        assert_eq!(g["score"].as_f64().unwrap().to_bits(), score.to_bits());
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn zero_k_is_400() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let (status, body) = get_json(format!(
        "{}/neighbors?model=w2v&lang=en&word=sun&k=0",
        server.base
    ))
    .await;
    assert_eq!(status, 400);
    assert_eq!(body["code"], "bad_request");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_identical_queries_return_identical_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(test_config(write_models(dir.path()))).await;
    let url = format!(
        "{}/relatedness?model=w2v&lang=en&w1=moon&w2=rock",
        server.base
    );
    let mut tasks = Vec::new();
    for _ in 0..20 {
        tasks.push(get_json(url.clone()));
    }
    let mut bodies = Vec::new();
    for task in tasks {
        let (status, body) = task.await;
        assert_eq!(status, 200);
        bodies.push(body.to_string());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn empty_registry_is_rejected_at_startup() {
    let config = test_config(Vec::new());
    assert!(matches!(
        AppState::build(&config),
        Err(dsmkit_service::ServiceError::EmptyRegistry)
    ));
}

#[test]
fn missing_model_file_fails_fast() {
    let config = test_config(vec![RegistryEntry {
        model: ModelKind::W2v,
        lang: "en".into(),
        path: "/nonexistent/model.dsm".into(),
    }]);
    assert!(matches!(
        AppState::build(&config),
        Err(dsmkit_service::ServiceError::ModelLoad { .. })
    ));
}
