use bqr_cli::snapshot::load_config;
use bqr_core::{DimensionKind, Method, Orientation, UnlabeledPolicy};

#[test]
fn documented_config_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(
        &path,
        r#"
k = 7
n = 15
max_iter = 3
method = "m3"
unlabeled_policy = "unlabeled-as-category"
pseudo_pareto = "lean_bias"

[index]
k1 = 1.2
b = 0.75

[provider]
kind = "replay-fixture"
max_in_flight = 2

[[dims]]
name = "geography_entropy"
kind = "entropy-vs-original"
attribute = "geography"

[[dims]]
name = "lean_bias"
kind = "signed-mean"
attribute = "lean"
orientation = "minimize-abs"

[[dims]]
name = "relevance"
kind = "relevance"
"#,
    )
    .unwrap();
    let c = load_config(Some(&path)).unwrap();
    assert_eq!((c.k, c.n, c.max_iter, c.method), (7, 15, 3, Method::LlmKeywords));
    assert_eq!(c.unlabeled_policy, UnlabeledPolicy::UnlabeledAsCategory);
    assert_eq!(c.index.k1, 1.2);
    assert_eq!(c.provider.max_in_flight, 2);
    assert_eq!(c.dims.len(), 3);
    assert_eq!(c.dims[1].orientation, Some(Orientation::MinimizeAbs));
    assert_eq!(c.dims[2].kind, DimensionKind::Relevance);
}

#[test]
fn relevance_must_be_last() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(
        &path,
        "[[dims]]\nname = \"relevance\"\nkind = \"relevance\"\n\n[[dims]]\nname = \"g\"\nkind = \"entropy-vs-original\"\nattribute = \"geography\"\n",
    )
    .unwrap();
    assert!(load_config(Some(&path)).is_err());
}

#[test]
fn missing_file_is_reported() {
    let err = load_config(Some(std::path::Path::new("/no/such/config.toml"))).unwrap_err();
    assert!(err.contains("/no/such/config.toml"));
}
