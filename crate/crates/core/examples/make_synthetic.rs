//! Regenerates the bundled synthetic dataset under `data/synthetic/`.
//!
//! The corpus, topics and word vectors come from a seeded RNG. LLM replies are produced
//! by a scripted provider and recorded while every topic runs through methods 2 and 3,
//! so the fixture file covers exactly the prompts the bundled config sends.
//!
//!     cargo run -p bqr-core --example make_synthetic -- data/synthetic

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bqr_core::llm::{FnProvider, RecordingProvider};
use bqr_core::{
    load_corpus, load_queries, load_vectors, recommend, EngineConfig, Error, Index, LlmProvider,
    Method, Resources, Schema,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REGIONS: [&str; 4] = ["Europe", "Asia", "Africa", "Americas"];

struct Cluster {
    general: &'static [&'static str],
    // indexed like REGIONS
    regional: [&'static [&'static str]; 4],
    // probability that a document of this cluster is labeled female
    female: f64,
}

const CLUSTERS: [Cluster; 5] = [
    Cluster {
        general: &["politics", "election", "government", "policy", "minister"],
        regional: [
            &["parliament", "chancellor"],
            &["assembly", "cabinet"],
            &["president", "independence"],
            &["congress", "senate"],
        ],
        female: 0.3,
    },
    Cluster {
        general: &["religion", "faith", "worship", "belief"],
        regional: [
            &["church", "cathedral"],
            &["temple", "monastery"],
            &["mosque", "pilgrimage"],
            &["mission", "chapel"],
        ],
        female: 0.4,
    },
    Cluster {
        general: &["music", "song", "album", "concert"],
        regional: [
            &["orchestra", "classical", "opera"],
            &["raga", "sitar"],
            &["afrobeat", "drum"],
            &["jazz", "blues"],
        ],
        female: 0.5,
    },
    Cluster {
        general: &["sport", "team", "championship", "player"],
        regional: [
            &["football", "cycling"],
            &["cricket", "badminton"],
            &["marathon", "athletics"],
            &["baseball", "basketball"],
        ],
        female: 0.2,
    },
    Cluster {
        general: &["science", "research", "physics", "university"],
        regional: [
            &["chemistry", "laboratory"],
            &["mathematics", "engineering"],
            &["medicine", "agriculture"],
            &["astronomy", "computing"],
        ],
        female: 0.45,
    },
];

const FILLER: &[&str] = &[
    "born", "career", "known", "early", "life", "work", "family", "city", "later", "award",
    "national", "history",
];

const DIM: usize = 8;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/synthetic".into())
        .into();
    fs::create_dir_all(&out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20_230_915);

    write_corpus(&out, &mut rng)?;
    fs::write(out.join("schema.json"), "[\"geography\", \"gender\"]\n")?;
    write_vectors(&out, &mut rng)?;
    write_topics(&out)?;
    fs::write(out.join("config.toml"), "k = 5\nn = 20\nmax_iter = 4\n")?;
    record_fixtures(&out)?;
    Ok(())
}

fn write_corpus(out: &Path, rng: &mut ChaCha8Rng) -> std::io::Result<()> {
    let mut lines = String::new();
    let mut id = 0;
    for (ci, cluster) in CLUSTERS.iter().enumerate() {
        // uneven regional coverage so the original result sets are skewed
        let weights = match ci {
            0 => [8, 4, 3, 6],
            1 => [4, 6, 3, 2],
            2 => [6, 2, 2, 5],
            3 => [5, 4, 2, 5],
            _ => [6, 4, 1, 5],
        };
        for (ri, &count) in weights.iter().enumerate() {
            for _ in 0..count {
                id += 1;
                let gender = if rng.random_bool(cluster.female) {
                    "female"
                } else {
                    "male"
                };
                // the head word (politics, religion, ...) is in every document of its cluster
                let mut words = vec![cluster.general[0]];
                for _ in 0..5 {
                    words.push(*cluster.general.choose(rng).unwrap());
                }
                for _ in 0..4 {
                    words.push(*cluster.regional[ri].choose(rng).unwrap());
                }
                for _ in 0..3 {
                    words.push(*FILLER.choose(rng).unwrap());
                }
                // a little cross-topic bleed
                if rng.random_bool(0.3) {
                    let other = &CLUSTERS[(ci + 1) % CLUSTERS.len()];
                    words.push(*other.general.choose(rng).unwrap());
                }
                let region = REGIONS[ri];
                let title = format!(
                    "{} {} {id:03}",
                    region,
                    cluster.regional[ri].choose(rng).unwrap()
                );
                let doc = serde_json::json!({
                    "doc_id": format!("d{id:03}"),
                    "title": title,
                    "url": format!("https://example.org/wiki/d{id:03}"),
                    "text": words.join(" "),
                    "attributes": {"geography": region, "gender": gender},
                });
                lines.push_str(&doc.to_string());
                lines.push('\n');
            }
        }
    }
    fs::write(out.join("corpus.jsonl"), lines)
}

fn write_vectors(out: &Path, rng: &mut ChaCha8Rng) -> std::io::Result<()> {
    let region_axis = |ri: usize| -> [f64; 3] {
        match ri {
            0 => [1.0, 0.0, 0.0],
            1 => [0.0, 1.0, 0.0],
            2 => [0.0, 0.0, 1.0],
            _ => [-0.6, -0.6, -0.6],
        }
    };
    let mut text = String::new();
    let mut emit = |word: &str, base: [f64; DIM], rng: &mut ChaCha8Rng| {
        let _ = write!(text, "{word}");
        for b in base {
            let v = b + rng.random_range(-0.08..0.08);
            let _ = write!(text, " {v:.5}");
        }
        text.push('\n');
    };
    for (ci, cluster) in CLUSTERS.iter().enumerate() {
        for w in cluster.general {
            let mut base = [0.0; DIM];
            base[ci] = 1.0;
            emit(w, base, rng);
        }
        for (ri, words) in cluster.regional.iter().enumerate() {
            for w in *words {
                let mut base = [0.0; DIM];
                base[ci] = 0.9;
                for (j, a) in region_axis(ri).iter().enumerate() {
                    base[5 + j] = 0.5 * a;
                }
                emit(w, base, rng);
            }
        }
    }
    for (ri, r) in REGIONS.iter().enumerate() {
        let mut base = [0.0; DIM];
        for (j, a) in region_axis(ri).iter().enumerate() {
            base[5 + j] = *a;
        }
        emit(&r.to_lowercase(), base, rng);
    }
    for w in FILLER {
        let mut base = [0.0; DIM];
        for b in &mut base {
            *b = rng.random_range(-0.3..0.3);
        }
        emit(w, base, rng);
    }
    fs::write(out.join("glove.txt"), text)
}

fn write_topics(out: &Path) -> std::io::Result<()> {
    let topics = [
        (
            "t1",
            "politics",
            vec!["election", "government", "policy"],
            vec!["d001", "d002"],
        ),
        (
            "t2",
            "classical music",
            vec!["orchestra", "concert", "opera"],
            vec!["d037"],
        ),
        (
            "t3",
            "religion",
            vec!["worship", "faith", "belief"],
            vec!["d022"],
        ),
        (
            "t4",
            "sport team",
            vec!["championship", "player"],
            vec!["d052"],
        ),
        (
            "t5",
            "science research",
            vec!["physics", "university"],
            vec!["d068"],
        ),
        ("t6", "jazz", vec![], vec![]),
    ];
    let mut lines = String::new();
    for (id, title, kw, rel) in topics {
        let t = serde_json::json!({
            "topic_id": id, "title": title, "keywords": kw, "relevant_docs": rel,
        });
        lines.push_str(&t.to_string());
        lines.push('\n');
    }
    fs::write(out.join("topics.jsonl"), lines)
}

/// Deterministic stand-in for a chat model: recombines the topic with the listed words.
fn scripted_reply(prompt: &str) -> bqr_core::Result<String> {
    let field = |name: &str| {
        prompt
            .lines()
            .find_map(|l| l.strip_prefix(name))
            .map(str::trim)
            .unwrap_or("")
            .to_string()
    };
    let topic = field("Topic:");
    let words: Vec<String> = field("Keywords:")
        .split(',')
        .map(|w| w.trim().to_string())
        .filter(|w| !w.is_empty())
        .collect();
    if topic.is_empty() || words.is_empty() {
        return Err(Error::Provider(
            "scripted reply needs a topic and keywords".into(),
        ));
    }
    let mut out = vec!["Here are some search queries:".to_string()];
    let mut n = 0;
    let mut push = |q: String, out: &mut Vec<String>| {
        if n < 10 {
            n += 1;
            out.push(format!("{n}. {q}"));
        }
    };
    for w in &words {
        push(w.clone(), &mut out);
    }
    for w in &words {
        push(format!("{topic} {w}"), &mut out);
    }
    for pair in words.windows(2) {
        push(format!("{} {}", pair[0], pair[1]), &mut out);
    }
    Ok(out.join("\n"))
}

fn record_fixtures(out: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus(
        out.join("corpus.jsonl"),
        Schema::load(out.join("schema.json"))?,
    )?;
    let topics = load_queries(out.join("topics.jsonl"))?;
    let store = load_vectors(out.join("glove.txt"), Some(DIM))?;
    let index = Index::build(&corpus, Default::default())?;
    let recorder = RecordingProvider::new(FnProvider(scripted_reply));
    let provider: &dyn LlmProvider = &recorder;
    let res = Resources {
        index: &index,
        corpus: &corpus,
        store: Some(&store),
        provider: Some(provider),
    };
    for topic in &topics {
        for method in [Method::LlmSimilar, Method::LlmKeywords] {
            let config = EngineConfig {
                k: 5,
                n: 20,
                max_iter: 4,
                method,
                ..Default::default()
            };
            match recommend(&topic.title, &topic.keywords, &config, &res) {
                Ok(r) => eprintln!(
                    "{} {method}: {} recs after {} iterations",
                    topic.topic_id,
                    r.recs.len(),
                    r.iterations_used
                ),
                Err(e) => eprintln!("{} {method}: {e}", topic.topic_id),
            }
        }
    }
    recorder.save(out.join("fixtures.json"))?;
    Ok(())
}
